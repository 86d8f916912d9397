use num_complex::Complex64 as C64;

use super::{DensityMatrix, LindbladError, TimeCoefficient, Window};
use crate::qmath::ComplexMatrix;

const STATIC_HERMITIAN_TOL: f64 = 1e-12;
const ZERO: C64 = C64::new(0.0, 0.0);

/// Contributes `coeff(t)·operator + h.c.` to H(t).
#[derive(Clone, Debug)]
pub struct HamiltonianTerm {
    pub operator: ComplexMatrix,
    pub coeff: TimeCoefficient,
}

impl HamiltonianTerm {
    pub fn new(operator: ComplexMatrix, coeff: TimeCoefficient) -> Self {
        Self { operator, coeff }
    }
}

/// Collapse operator `amplitude(t)·operator`; the amplitude must be real and
/// non-negative, so the dissipation rate scales as amplitude².
#[derive(Clone, Debug)]
pub struct CollapseChannel {
    pub operator: ComplexMatrix,
    pub amplitude: TimeCoefficient,
}

impl CollapseChannel {
    pub fn new(operator: ComplexMatrix, amplitude: TimeCoefficient) -> Self {
        Self { operator, amplitude }
    }

    /// Constant rate γ: amplitude √γ.
    pub fn with_rate(operator: ComplexMatrix, rate: f64) -> Self {
        Self::new(operator, TimeCoefficient::constant_real(rate.max(0.0).sqrt()))
    }
}

type Sparse = Vec<(usize, usize, C64)>;

fn sparse(m: &ComplexMatrix) -> Sparse {
    let n = m.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            if z != ZERO {
                out.push((i, j, z));
            }
        }
    }
    out
}

/// Immutable description of a Lindblad generator.
#[derive(Clone, Debug)]
pub struct LindbladSystem {
    h_static: ComplexMatrix,
    h_terms: Vec<HamiltonianTerm>,
    collapse: Vec<CollapseChannel>,
    windows: Vec<Window>,
    // Time-independent part of H_eff = H − (i/2) Σ γ C†C, row-major.
    heff_base: Vec<C64>,
    // Constant jump terms γ C ρ C†, flattened to out[x,y] += z·ρ[a,b].
    const_jumps: Vec<(usize, usize, usize, usize, C64)>,
    dyn_terms: Vec<(usize, Sparse)>,
    dyn_collapse: Vec<(usize, Sparse, Sparse)>,
}

impl LindbladSystem {
    pub fn new(
        h_static: ComplexMatrix,
        h_terms: Vec<HamiltonianTerm>,
        collapse: Vec<CollapseChannel>,
    ) -> Result<Self, LindbladError> {
        let n = h_static.dim();
        let defect = h_static.hermiticity_defect();
        if defect > STATIC_HERMITIAN_TOL * h_static.max_abs().max(1.0) {
            return Err(LindbladError::NotHermitian { what: "static Hamiltonian", defect });
        }
        if !h_static.is_finite() {
            return Err(LindbladError::InvalidInput("static Hamiltonian has non-finite entries".into()));
        }
        for op in h_terms.iter().map(|t| &t.operator).chain(collapse.iter().map(|c| &c.operator)) {
            if op.dim() != n {
                return Err(LindbladError::InvalidInput(format!(
                    "operator dimension {} does not match Hamiltonian dimension {n}",
                    op.dim()
                )));
            }
            if !op.is_finite() {
                return Err(LindbladError::InvalidInput("operator has non-finite entries".into()));
            }
        }

        let mut heff_base = h_static.as_slice().to_vec();
        let mut dyn_terms = Vec::new();
        for (idx, term) in h_terms.iter().enumerate() {
            let sp = sparse(&term.operator);
            match term.coeff.constant_value() {
                Some(c) => {
                    for &(i, j, z) in &sp {
                        heff_base[i * n + j] += c * z;
                        heff_base[j * n + i] += (c * z).conj();
                    }
                }
                None => dyn_terms.push((idx, sp)),
            }
        }
        let mut const_jumps = Vec::new();
        let mut dyn_collapse = Vec::new();
        for (idx, ch) in collapse.iter().enumerate() {
            let jump = sparse(&ch.operator);
            let cdc = sparse(&ch.operator.adjoint().matmul(&ch.operator));
            if ch.amplitude.constant_value().is_some() {
                let rate = amplitude_rate(&ch.amplitude, 0.0)?;
                if rate == 0.0 {
                    continue;
                }
                for &(i, j, z) in &cdc {
                    heff_base[i * n + j] += C64::new(0.0, -0.5 * rate) * z;
                }
                for &(x, a, cxa) in &jump {
                    for &(y, b, cyb) in &jump {
                        const_jumps.push((x, y, a, b, cxa * cyb.conj() * rate));
                    }
                }
            } else {
                dyn_collapse.push((idx, jump, cdc));
            }
        }

        let mut windows: Vec<Window> = h_terms
            .iter()
            .map(|t| &t.coeff)
            .chain(collapse.iter().map(|c| &c.amplitude))
            .flat_map(|c| c.windows().iter().copied())
            .collect();
        windows.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        Ok(Self {
            h_static,
            h_terms,
            collapse,
            windows,
            heff_base,
            const_jumps,
            dyn_terms,
            dyn_collapse,
        })
    }

    pub fn dim(&self) -> usize {
        self.h_static.dim()
    }

    pub fn h_static(&self) -> &ComplexMatrix {
        &self.h_static
    }

    pub fn h_terms(&self) -> &[HamiltonianTerm] {
        &self.h_terms
    }

    pub fn collapse(&self) -> &[CollapseChannel] {
        &self.collapse
    }

    /// All support windows of all coefficients, sorted by start.
    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    /// Whether any time dependence lives outside of windows.
    pub fn has_unbounded_terms(&self) -> bool {
        self.h_terms.iter().any(|t| !t.coeff.is_bounded())
    }

    /// H(t).
    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        let mut h = self.h_static.clone();
        let data = h.as_mut_slice();
        for term in &self.h_terms {
            let c = term.coeff.eval(t);
            if c == ZERO {
                continue;
            }
            let op = term.operator.as_slice();
            for i in 0..n {
                for j in 0..n {
                    let z = op[i * n + j];
                    if z != ZERO {
                        data[i * n + j] += c * z;
                        data[j * n + i] += (c * z).conj();
                    }
                }
            }
        }
        h
    }

    /// Rate γ_m(t) = amplitude² of every channel, validating the amplitude.
    pub fn collapse_rates(&self, t: f64) -> Result<Vec<f64>, LindbladError> {
        self.collapse.iter().map(|c| amplitude_rate(&c.amplitude, t)).collect()
    }

    /// Writes dρ/dt for row-major `rho` into `out`.
    pub(crate) fn rhs_into(&self, t: f64, rho: &[C64], out: &mut [C64], heff: &mut [C64]) -> Result<(), LindbladError> {
        let n = self.dim();
        heff.copy_from_slice(&self.heff_base);
        for (idx, sp) in &self.dyn_terms {
            let c = self.h_terms[*idx].coeff.eval(t);
            if c == ZERO {
                continue;
            }
            for &(i, j, z) in sp {
                heff[i * n + j] += c * z;
                heff[j * n + i] += (c * z).conj();
            }
        }
        let mut rates = [0.0; 16];
        for (k, (idx, _, cdc)) in self.dyn_collapse.iter().enumerate() {
            let rate = amplitude_rate(&self.collapse[*idx].amplitude, t)?;
            if k < rates.len() {
                rates[k] = rate;
            }
            if rate == 0.0 {
                continue;
            }
            let f = C64::new(0.0, -0.5 * rate);
            for &(i, j, z) in cdc {
                heff[i * n + j] += f * z;
            }
        }
        // out = −i (H_eff ρ − ρ H_eff†)
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += heff[i * n + k] * rho[k * n + j] - rho[i * n + k] * heff[j * n + k].conj();
                }
                out[i * n + j] = C64::new(acc.im, -acc.re);
            }
        }
        // + Σ γ_m C_m ρ C_m†
        for &(x, y, a, b, z) in &self.const_jumps {
            out[x * n + y] += z * rho[a * n + b];
        }
        for (k, (idx, sp, _)) in self.dyn_collapse.iter().enumerate() {
            let rate = if k < rates.len() {
                rates[k]
            } else {
                amplitude_rate(&self.collapse[*idx].amplitude, t)?
            };
            if rate == 0.0 {
                continue;
            }
            for &(x, a, cxa) in sp {
                for &(y, b, cyb) in sp {
                    out[x * n + y] += cxa * rho[a * n + b] * cyb.conj() * rate;
                }
            }
        }
        Ok(())
    }
}

#[inline]
fn amplitude_rate(amp: &TimeCoefficient, t: f64) -> Result<f64, LindbladError> {
    let a = amp.eval(t);
    if a.re < 0.0 || a.im != 0.0 || !a.re.is_finite() {
        return Err(LindbladError::InvalidAmplitude { t, value: a });
    }
    Ok(a.re * a.re)
}

/// dρ/dt at time `t`.
pub fn rhs(system: &LindbladSystem, rho: &DensityMatrix, t: f64) -> Result<ComplexMatrix, LindbladError> {
    let n = system.dim();
    if rho.dim() != n {
        return Err(LindbladError::InvalidInput(format!(
            "state dimension {} does not match system dimension {n}",
            rho.dim()
        )));
    }
    let mut out = ComplexMatrix::zeros(n);
    let mut heff = vec![ZERO; n * n];
    system.rhs_into(t, rho.matrix().as_slice(), out.as_mut_slice(), &mut heff)?;
    if !out.is_finite() {
        return Err(LindbladError::InvalidInput(format!("generator overflowed at t = {t}")));
    }
    Ok(out)
}
