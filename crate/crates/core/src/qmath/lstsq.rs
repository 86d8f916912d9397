use num_complex::Complex64 as C64;

use super::{herm_eigen, ComplexMatrix, QmathError};

/// Designs whose column-scaled condition number exceeds this are rejected.
const MAX_CONDITION: f64 = 1e8;

/// Dense real `rows × cols` matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, QmathError> {
        let cols = rows.first().map_or(0, Vec::len);
        if cols == 0 {
            return Err(QmathError::BadDimension(0));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(QmathError::DimensionMismatch { left: cols, right: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstsqSolution {
    pub coefficients: Vec<f64>,
    /// ‖design·x − observations‖₂.
    pub residual_norm: f64,
    /// 2-norm condition number of the column-normalized design.
    pub condition: f64,
}

/// Linear least squares by Householder QR.
///
/// Rank is checked first on the column-normalized Gram matrix; a design whose
/// condition number exceeds 1e8 is reported as degenerate together with the
/// parameter-space direction it cannot resolve.
pub fn lstsq(design: &RealMatrix, observations: &[f64]) -> Result<LstsqSolution, QmathError> {
    let (n, p) = (design.rows, design.cols);
    if observations.len() != n {
        return Err(QmathError::DimensionMismatch { left: n, right: observations.len() });
    }
    if n < p {
        return Err(QmathError::Underdetermined { rows: n, cols: p });
    }
    if design.data.iter().chain(observations).any(|x| !x.is_finite()) {
        return Err(QmathError::NonFinite);
    }

    let col_norms: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| design.get(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    if let Some(j) = col_norms.iter().position(|&c| c == 0.0) {
        let mut null_direction = vec![0.0; p];
        null_direction[j] = 1.0;
        return Err(QmathError::DegenerateFit { condition: f64::INFINITY, null_direction });
    }
    let condition = check_rank(design, &col_norms)?;

    // Householder QR on an augmented copy [A | b].
    let w = p + 1;
    let mut a: Vec<f64> = Vec::with_capacity(n * w);
    for i in 0..n {
        a.extend((0..p).map(|j| design.get(i, j)));
        a.push(observations[i]);
    }
    for k in 0..p {
        let norm = (k..n).map(|i| a[i * w + k].powi(2)).sum::<f64>().sqrt();
        let alpha = if a[k * w + k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..n).map(|i| a[i * w + k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..w {
            let dot: f64 = (k..n).map(|i| v[i - k] * a[i * w + j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..n {
                a[i * w + j] -= f * v[i - k];
            }
        }
    }
    let mut x = vec![0.0; p];
    for k in (0..p).rev() {
        let s: f64 = ((k + 1)..p).map(|j| a[k * w + j] * x[j]).sum();
        x[k] = (a[k * w + p] - s) / a[k * w + k];
    }
    let fitted = design.mul_vec(&x);
    let residual_norm = fitted
        .iter()
        .zip(observations)
        .map(|(f, o)| (f - o).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LstsqSolution { coefficients: x, residual_norm, condition })
}

fn check_rank(design: &RealMatrix, col_norms: &[f64]) -> Result<f64, QmathError> {
    let (n, p) = (design.rows, design.cols);
    let mut gram = ComplexMatrix::zeros(p);
    for a in 0..p {
        for b in 0..p {
            let g: f64 = (0..n)
                .map(|i| design.get(i, a) * design.get(i, b))
                .sum::<f64>()
                / (col_norms[a] * col_norms[b]);
            gram[(a, b)] = C64::new(g, 0.0);
        }
    }
    let eig = herm_eigen(&gram)?;
    let lo = eig.min().max(0.0);
    let condition = if lo > 0.0 { (eig.max() / lo).sqrt() } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        let v = eig.vector(0);
        let mut dir: Vec<f64> = v.iter().zip(col_norms).map(|(z, c)| z.re / c).collect();
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sign = if dir.iter().cloned().fold(0.0, |m: f64, x| if x.abs() > m.abs() { x } else { m }) < 0.0 { -1.0 } else { 1.0 };
        dir.iter_mut().for_each(|x| *x *= sign / len);
        return Err(QmathError::DegenerateFit { condition, null_direction: dir });
    }
    Ok(condition)
}
