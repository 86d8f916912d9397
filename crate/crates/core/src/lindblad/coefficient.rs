use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

/// Closed time interval on which a coefficient may be non-zero, with the
/// largest integration step allowed while inside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub max_step: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64, max_step: f64) -> Self {
        assert!(lo < hi, "window must have lo < hi");
        assert!(max_step > 0.0, "window step cap must be positive");
        Self { lo, hi, max_step }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// Deterministic scalar function of time (ns), optionally supported only on
/// a union of windows.
#[derive(Clone)]
pub struct TimeCoefficient {
    func: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
    windows: Vec<Window>,
    constant: Option<C64>,
}

impl TimeCoefficient {
    pub fn new(f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            func: Arc::new(f),
            windows: Vec::new(),
            constant: None,
        }
    }

    pub fn constant(value: C64) -> Self {
        Self {
            constant: Some(value),
            ..Self::new(move |_| value)
        }
    }

    pub fn constant_real(value: f64) -> Self {
        Self::constant(C64::new(value, 0.0))
    }

    /// `f` restricted to the given windows; exactly zero elsewhere.
    pub fn windowed(f: impl Fn(f64) -> C64 + Send + Sync + 'static, windows: Vec<Window>) -> Self {
        assert!(!windows.is_empty(), "windowed coefficient needs at least one window");
        Self {
            func: Arc::new(f),
            windows,
            constant: None,
        }
    }

    /// The value, when built with [`TimeCoefficient::constant`].
    pub fn constant_value(&self) -> Option<C64> {
        self.constant
    }

    /// Empty slice means unbounded support.
    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn is_bounded(&self) -> bool {
        !self.windows.is_empty()
    }

    pub fn in_support(&self, t: f64) -> bool {
        self.windows.is_empty() || self.windows.iter().any(|w| w.contains(t))
    }

    #[inline]
    pub fn eval(&self, t: f64) -> C64 {
        if self.in_support(t) {
            (self.func)(t)
        } else {
            C64::new(0.0, 0.0)
        }
    }
}

impl fmt::Debug for TimeCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeCoefficient").field("windows", &self.windows).finish_non_exhaustive()
    }
}
