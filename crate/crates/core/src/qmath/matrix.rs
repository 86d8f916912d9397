use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use super::QmathError;

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

fn check_dim(dim: usize) -> Result<(), QmathError> {
    if dim == 0 || dim > MAX_DIM {
        Err(QmathError::BadDimension(dim))
    } else {
        Ok(())
    }
}

impl ComplexMatrix {
    /// # Panics
    /// If `dim` is 0 or above [`MAX_DIM`].
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim).expect("invalid matrix dimension");
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, QmathError> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(QmathError::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self, QmathError> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(QmathError::DimensionMismatch {
                left: dim * dim,
                right: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// The outer product |row⟩⟨col|.
    pub fn unit(dim: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(row, col)] = C64::new(1.0, 0.0);
        m
    }

    pub fn outer(a: &Ket, b: &Ket) -> Self {
        assert_eq!(a.dim(), b.dim(), "outer product of kets with different dimensions");
        let dim = a.dim();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = a[i] * b[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let mut out = Self::zeros(self.dim);
        matmul_into(self.dim, &self.data, &rhs.data, &mut out.data);
        out
    }

    pub fn apply(&self, v: &Ket) -> Ket {
        assert_eq!(self.dim, v.dim(), "matrix-vector dimension mismatch");
        let n = self.dim;
        let amps = (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect();
        Ket { amps }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_one(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |m_ij − conj(m_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Exact for `tol = 0` on conjugate-symmetric input.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// (m + m†)/2.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        out
    }
}

/// `out = a · b` for row-major `n × n` slices.
#[inline]
pub(crate) fn matmul_into(n: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        let dst = &mut out[i * n..(i + 1) * n];
        dst.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (k, &aik) in row.iter().enumerate() {
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let brow = &b[k * n..(k + 1) * n];
            for (d, &bkj) in dst.iter_mut().zip(brow) {
                *d += aik * bkj;
            }
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// State vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Result<Self, QmathError> {
        check_dim(amps.len())?;
        Ok(Self { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        check_dim(dim).expect("invalid ket dimension");
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            amps: self.amps.iter().map(|z| z / n).collect(),
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }
}

impl Index<usize> for Ket {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.amps[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(ComplexMatrix::from_vec(0, vec![]), Err(QmathError::BadDimension(0))));
        assert!(ComplexMatrix::from_vec(17, vec![c(0.0, 0.0); 289]).is_err());
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).is_err());
    }

    #[test]
    fn hermiticity_exact_at_zero_tolerance() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.3, -0.7)],
            vec![c(0.3, 0.7), c(-2.0, 0.0)],
        ])
        .unwrap();
        assert!(m.is_hermitian(0.0));
        let mut bad = m.clone();
        bad[(0, 1)] = c(0.3, -0.7000001);
        assert!(!bad.is_hermitian(0.0));
        assert!(bad.is_hermitian(1e-6));
    }

    #[test]
    fn unit_operators_compose() {
        // |0⟩⟨1| · |1⟩⟨0| = |0⟩⟨0|
        let a = ComplexMatrix::unit(3, 0, 1);
        let b = ComplexMatrix::unit(3, 1, 0);
        assert_eq!(a.matmul(&b), ComplexMatrix::unit(3, 0, 0));
        assert_eq!(a.adjoint(), b);
    }

    #[test]
    fn ket_outer_and_inner() {
        let k = Ket::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap().normalized();
        assert!((k.norm() - 1.0).abs() < 1e-15);
        let p = ComplexMatrix::outer(&k, &k);
        assert!((p.trace().re - 1.0).abs() < 1e-15);
        assert!((p.matmul(&p).as_slice().iter().zip(p.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)) < 1e-15);
        assert!((k.inner(&k).re - 1.0).abs() < 1e-15);
    }
}
