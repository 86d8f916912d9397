//! Damped-cosine fringe fits and delay autocorrelation.

use std::f64::consts::{PI, TAU};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::ExperimentError;
use crate::qmath::{lstsq, RealMatrix};

/// A dominant periodogram peak must exceed the median bin by this factor.
pub const PEAK_TO_MEDIAN: f64 = 3.0;
/// Minimum number of oscillation periods the data must span.
pub const MIN_PERIODS: f64 = 4.0;

/// Parameters of `y = A·exp(−λt)·cos(2πft + φ) + C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeFit {
    /// GHz when t is in ns.
    pub frequency: f64,
    /// Radians in (−π, π].
    pub phase: f64,
    pub amplitude: f64,
    /// λ, 1/ns.
    pub decay_rate: f64,
    pub offset: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    /// Periodogram peak over median at the seed frequency.
    pub peak_ratio: f64,
}

impl FringeFit {
    /// 1/λ in ns, infinite for an undamped fringe.
    pub fn decay_time(&self) -> f64 {
        if self.decay_rate > 0.0 {
            1.0 / self.decay_rate
        } else {
            f64::INFINITY
        }
    }

    /// A / |C|.
    pub fn visibility(&self) -> f64 {
        self.amplitude / self.offset.abs()
    }

    pub fn eval(&self, t: f64) -> f64 {
        model(&[self.amplitude, self.decay_rate, self.frequency, self.phase, self.offset], t)
    }
}

fn model(p: &[f64; 5], t: f64) -> f64 {
    p[0] * (-p[1] * t).exp() * (TAU * p[2] * t + p[3]).cos() + p[4]
}

fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

fn check_uniform(t: &[f64]) -> Result<f64, ExperimentError> {
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(ExperimentError::InvalidScan("fringe fit needs uniformly spaced, increasing samples".into()));
    }
    Ok(dt)
}

/// Dominant frequency of the mean-subtracted samples from a zero-padded
/// periodogram, with the peak-to-median ratio.
pub fn periodogram_peak(values: &[f64], dt: f64) -> Result<(f64, f64), ExperimentError> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let nfft = (n.next_power_of_two() * 8).max(64);
    let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let power: Vec<f64> = buf[..=nfft / 2].iter().map(|z| z.norm_sqr()).collect();
    let (k, peak) = power
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, f64::MIN), |best, (k, &p)| if p > best.1 { (k, p) } else { best });
    let mut sorted = power[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let ratio = if median > 0.0 { peak / median } else if peak > 0.0 { f64::INFINITY } else { 0.0 };
    if !(ratio >= PEAK_TO_MEDIAN) || k == 0 {
        return Err(ExperimentError::NoFringe { peak_ratio: ratio });
    }
    let mut kf = k as f64;
    if k + 1 < power.len() {
        let (a, b, c) = (power[k - 1], power[k], power[k + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            kf += 0.5 * (a - c) / denom;
        }
    }
    Ok((kf / (nfft as f64 * dt), ratio))
}

/// Least-squares fit of a damped cosine: periodogram seed, then
/// Levenberg–Marquardt on (A, λ, f, φ, C) with λ ≥ 0.
pub fn fit_damped_cosine(t: &[f64], y: &[f64]) -> Result<FringeFit, ExperimentError> {
    if t.len() != y.len() {
        return Err(ExperimentError::InvalidScan("time and value lengths differ".into()));
    }
    if t.len() < 8 {
        return Err(ExperimentError::InvalidScan(format!("{} samples are too few for a fringe fit", t.len())));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(ExperimentError::InvalidScan("non-finite sample".into()));
    }
    let dt = check_uniform(t)?;
    let (f0, ratio) = periodogram_peak(y, dt)?;
    let span = t[t.len() - 1] - t[0];
    if f0 * span < MIN_PERIODS {
        return Err(ExperimentError::InvalidScan(format!(
            "data span {span} covers only {:.2} periods of the {f0} fringe",
            f0 * span
        )));
    }

    // Linear seed at f0: y ≈ a cos + b sin + C.
    let rows: Vec<Vec<f64>> = t
        .iter()
        .map(|&ti| {
            let (s, c) = (TAU * f0 * ti).sin_cos();
            vec![c, s, 1.0]
        })
        .collect();
    let seed = lstsq(&RealMatrix::from_rows(&rows)?, y)?.coefficients;
    let mut p = [seed[0].hypot(seed[1]), 0.0, f0, (-seed[1]).atan2(seed[0]), seed[2]];

    let sse = |p: &[f64; 5]| t.iter().zip(y).map(|(&ti, &yi)| (yi - model(p, ti)).powi(2)).sum::<f64>();
    let mut cost = sse(&p);
    let mut mu = -1.0;
    for _ in 0..500 {
        let mut jac = Vec::with_capacity(t.len());
        let mut res = Vec::with_capacity(t.len());
        for (&ti, &yi) in t.iter().zip(y) {
            let e = (-p[1] * ti).exp();
            let (s, c) = (TAU * p[2] * ti + p[3]).sin_cos();
            jac.push([e * c, -ti * p[0] * e * c, -TAU * ti * p[0] * e * s, -p[0] * e * s, 1.0]);
            res.push(yi - model(&p, ti));
        }
        let diag: Vec<f64> = (0..5).map(|j| jac.iter().map(|r| r[j] * r[j]).sum::<f64>().max(1e-300)).collect();
        if mu < 0.0 {
            mu = 1e-3;
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut rows: Vec<Vec<f64>> = jac.iter().map(|r| r.to_vec()).collect();
            let mut rhs = res.clone();
            for (j, d) in diag.iter().enumerate() {
                let mut row = vec![0.0; 5];
                row[j] = (mu * d).sqrt();
                rows.push(row);
                rhs.push(0.0);
            }
            let step = lstsq(&RealMatrix::from_rows(&rows)?, &rhs)?.coefficients;
            let mut trial = p;
            for j in 0..5 {
                trial[j] += step[j];
            }
            trial[1] = trial[1].max(0.0);
            let c = sse(&trial);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost.max(1e-300);
                p = trial;
                cost = c;
                mu = (mu / 3.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[3] += PI;
    }
    Ok(FringeFit {
        frequency: p[2],
        phase: wrap_phase(p[3]),
        amplitude: p[0],
        decay_rate: p[1],
        offset: p[4],
        rms_residual: (cost / t.len() as f64).sqrt(),
        peak_ratio: ratio,
    })
}

/// Lag of the first autocorrelation maximum after its first minimum, in the
/// units of `delays`. Unbiased estimator on the mean-subtracted series, lags
/// up to half the record, parabolic refinement around the peak.
pub fn autocorrelation_period(delays: &[f64], values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 8 || delays.len() != n {
        return None;
    }
    let step = check_uniform(delays).ok()?;
    let mean = values.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return None;
    }
    let max_lag = n / 2;
    let r: Vec<f64> = (0..=max_lag)
        .map(|k| x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / ((n - k) as f64 * var))
        .collect();
    let mut k = 1;
    while k < max_lag && r[k + 1] <= r[k] {
        k += 1;
    }
    while k < max_lag && r[k + 1] > r[k] {
        k += 1;
    }
    if k >= max_lag || k < 2 {
        return None;
    }
    let (a, b, c) = (r[k - 1], r[k], r[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some((k as f64 + shift) * step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn pure_cosine() {
        let t = grid(751, 1.33e-3);
        let y: Vec<f64> = t.iter().map(|&x| 0.1 * (TAU * 32.0 * x + 0.3).cos() + 0.5).collect();
        let fit = fit_damped_cosine(&t, &y).unwrap();
        assert!((fit.frequency - 32.0).abs() < 32.0 * 1e-3 * 0.01, "{fit:?}");
        assert!((fit.phase - 0.3).abs() < 1e-8);
        assert!((fit.amplitude - 0.1).abs() < 1e-9);
        assert!(fit.decay_rate < 1e-8);
        assert!((fit.visibility() - 0.2).abs() < 1e-8);
    }

    #[test]
    fn damped_with_negative_phase() {
        let t: Vec<f64> = (0..400).map(|k| 0.02 + k as f64 * 1.33e-3).collect();
        let y: Vec<f64> = t.iter().map(|&x| 0.2 * (-1.5 * x).exp() * (TAU * 31.0 * x - 2.9).cos() + 1.0).collect();
        let fit = fit_damped_cosine(&t, &y).unwrap();
        assert!((fit.frequency - 31.0).abs() < 1e-8);
        assert!((fit.phase + 2.9).abs() < 1e-8);
        assert!((fit.decay_rate - 1.5).abs() < 1e-6);
        assert!((fit.decay_time() - 1.0 / 1.5).abs() < 1e-6);
    }

    #[test]
    fn flat_data_has_no_fringe() {
        let t = grid(200, 1e-3);
        let y = vec![1.0; 200];
        assert!(matches!(fit_damped_cosine(&t, &y), Err(ExperimentError::NoFringe { .. })));
    }

    #[test]
    fn too_few_periods() {
        let t = grid(100, 1e-3);
        let y: Vec<f64> = t.iter().map(|&x| (TAU * 20.0 * x).cos()).collect();
        assert!(fit_damped_cosine(&t, &y).is_err());
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn autocorrelation_of_cosine() {
        let d = grid(91, 1.33);
        let v: Vec<f64> = d.iter().map(|&x| (TAU * x / 31.25).cos() + 2.0).collect();
        let p = autocorrelation_period(&d, &v).unwrap();
        assert!((p - 31.25).abs() < 0.01 * 31.25, "{p}");
        assert_eq!(autocorrelation_period(&d, &vec![1.0; 91]), None);
    }
}
