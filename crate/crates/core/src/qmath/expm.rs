use super::{ComplexMatrix, QmathError};

/// Scaling threshold for the Taylor core (1-norm).
const THETA: f64 = 0.5;
const MAX_TERMS: usize = 40;

/// Matrix exponential by scaling and squaring around a truncated Taylor
/// series. The series is summed until the next term is below machine
/// precision relative to the partial sum; with ‖A/2^s‖₁ ≤ 0.5 that takes
/// about 18 terms.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix, QmathError> {
    if !m.is_finite() {
        return Err(QmathError::NonFinite);
    }
    let n = m.dim();
    let norm = m.norm_one();
    let squarings = if norm > THETA {
        (norm / THETA).log2().ceil() as i32
    } else {
        0
    };
    let a = m.scale_real(0.5_f64.powi(squarings));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=MAX_TERMS {
        term = term.matmul(&a).scale_real(1.0 / k as f64);
        sum = &sum + &term;
        if term.norm_one() <= 1e-18 * sum.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    Ok(sum)
}
