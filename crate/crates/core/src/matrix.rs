//! Dense complex linear algebra: the carrier type for states, observables and
//! unitaries, plus Kronecker products, partial traces and spectral matrix
//! functions.
//!
//! Every matrix function goes through the Hermitian eigendecomposition, so
//! `exp(i t h)` is unitary up to rounding for any Hermitian `h`.

use std::fs;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance for Hermiticity checks, scaled by the largest entry
/// when that exceeds one.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense square matrix of complex scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for dimension {dim}",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    /// Real-valued rows, convenient for literals in tests and examples.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<C64> = rows.iter().flat_map(|r| r.iter().map(|&x| C64::new(x, 0.0))).collect();
        Self::from_row_major(dim, &entries)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, z: C64) -> Self {
        Self(&self.0 * z)
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff: dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |m_ij - conj(m_ji)|.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.max_abs().max(1.0)
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "trace_product: dimension mismatch");
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * other.0[(j, i)];
            }
        }
        acc
    }

    /// Integer power by repeated squaring; `pow(0)` is the identity.
    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim());
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Change of basis `u† · self · u`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(u.0.adjoint() * &self.0 * &u.0)
    }

    pub fn to_file(&self) -> MatrixFile {
        let entries = self.to_row_major();
        MatrixFile {
            dim: self.dim(),
            re: entries.iter().map(|z| z.re).collect(),
            im: entries.iter().map(|z| z.im).collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(s)?;
        file.into_matrix()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// Square complex product through `matrixmultiply`'s blocked kernel; the
/// generic nalgebra path is a naive triple loop for complex scalars.
fn gemm(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let mut c = DMatrix::<C64>::zeros(n, n);
    if n == 0 {
        return c;
    }
    let s = n as isize;
    // SAFETY: `Complex64` is `repr(C)` with fields `re, im`, so it has the
    // layout of `[f64; 2]`. All three buffers are column-major n×n, matching
    // the strides (1, n), and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            n,
            n,
            n,
            [1.0, 0.0],
            a.as_ptr().cast::<[f64; 2]>(),
            1,
            s,
            b.as_ptr().cast::<[f64; 2]>(),
            1,
            s,
            [0.0, 0.0],
            c.as_mut_ptr().cast::<[f64; 2]>(),
            1,
            s,
        );
    }
    c
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix product: dimension mismatch");
        ComplexMatrix(gemm(&self.0, &rhs.0))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// On-disk form of a matrix: `{"dim": n, "re": [...], "im": [...]}`, both
/// arrays row-major with `n²` entries.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixFile {
    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        if self.re.len() != self.im.len() {
            return Err(Error::DimensionMismatch(format!(
                "re has {} entries, im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        let entries: Vec<C64> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect();
        ComplexMatrix::from_row_major(self.dim, &entries)
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    let o = C64::new(0.0, 0.0);
    ComplexMatrix::from_row_major(2, &[o, -i, i, o]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[1.0, -1.0])
}

/// Kronecker product with `a` as the slow (leftmost) factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// `(a ⊗ b) m (a ⊗ b)†`, applying the factors one at a time instead of
/// forming the Kronecker product.
pub fn kron_sandwich(a: &ComplexMatrix, b: &ComplexMatrix, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() * b.dim() != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} x {} factors on a matrix of dimension {}",
            a.dim(),
            b.dim(),
            m.dim()
        )));
    }
    let left = kron_apply(&a.0, &b.0, &m.0);
    Ok(ComplexMatrix(kron_apply(&a.0, &b.0, &left.adjoint()).adjoint()))
}

/// `(a ⊗ b) m`: each column of `m`, reshaped to `dB × dA`, maps to
/// `b · V · aᵀ`.
fn kron_apply(a: &DMatrix<C64>, b: &DMatrix<C64>, m: &DMatrix<C64>) -> DMatrix<C64> {
    let (da, db) = (a.nrows(), b.nrows());
    let at = a.transpose();
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        let v = DMatrix::from_iterator(db, da, m.column(c).iter().copied());
        let w = b * v * &at;
        out.column_mut(c).copy_from_slice(w.as_slice());
    }
    out
}

/// Which tensor factor a partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of a matrix on `C^dA ⊗ C^dB`. Tracing over `A` leaves the
/// `dB × dB` block, tracing over `B` leaves `dA × dA`.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), over: Subsystem) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if da == 0 || db == 0 || m.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "matrix of dimension {} cannot be split as {da} x {db}",
            m.dim()
        )));
    }
    let out = match over {
        Subsystem::A => ComplexMatrix::from_fn(db, |j, l| (0..da).map(|i| m.0[(i * db + j, i * db + l)]).sum()),
        Subsystem::B => ComplexMatrix::from_fn(da, |i, k| (0..db).map(|j| m.0[(i * db + j, k * db + j)]).sum()),
    };
    Ok(out)
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {0}x{0} and {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(ComplexMatrix(&a.0 * &b.0 - &b.0 * &a.0))
}

/// Spectral decomposition of a Hermitian matrix. Eigenvalues ascend and the
/// columns of `eigenvectors` are the matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V · diag(f(λ)) · V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
        let mut scaled = self.eigenvectors.0.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let fk = f(lambda);
            if !fk.re.is_finite() || !fk.im.is_finite() {
                return Err(Error::Domain(lambda));
            }
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        Ok(ComplexMatrix(scaled * self.eigenvectors.0.adjoint()))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| C64::new(x, 0.0)).expect("identity map is finite")
    }
}

/// Hermitian eigendecomposition. Ties keep the order in which the solver
/// produced them.
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let scale = h.max_abs().max(1.0);
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(dev));
    }
    let sym = (&h.0 + h.0.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(h.dim(), h.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: ComplexMatrix(eigenvectors),
    })
}

/// Applies a scalar function through the spectrum of a Hermitian matrix.
/// Fails with [`Error::Domain`] if `f` is not finite on some eigenvalue.
pub fn matrix_fn(h: &ComplexMatrix, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
    herm_eig(h)?.map(f)
}

/// `exp(i t h)` for Hermitian `h`.
pub fn expi(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    matrix_fn(h, |x| C64::new(0.0, t * x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let g = random_matrix(dim, rng);
        (&g + &g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn kron_identities() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4)
        );
        let k = kron(
            &ComplexMatrix::from_diagonal(&[2.0]),
            &ComplexMatrix::from_diagonal(&[3.0]),
        );
        assert_eq!(k, ComplexMatrix::from_diagonal(&[6.0]));
    }

    #[test]
    fn kron_block_structure() {
        let k = kron(&pauli_x(), &pauli_z());
        let expected = ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_trace_and_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b, d) = (
            random_matrix(2, &mut rng),
            random_matrix(3, &mut rng),
            random_matrix(2, &mut rng),
        );
        let lhs = kron(&kron(&a, &b), &d);
        let rhs = kron(&a, &kron(&b, &d));
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        let t = kron(&a, &b).trace();
        assert!((t - a.trace() * b.trace()).norm() < 1e-12);
    }

    #[test]
    fn kron_sandwich_matches_explicit_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (da, db) in [(1, 3), (2, 2), (3, 5), (4, 1)] {
            let a = random_matrix(da, &mut rng);
            let b = random_matrix(db, &mut rng);
            let m = random_matrix(da * db, &mut rng);
            let k = kron(&a, &b);
            let dense = &(&k * &m) * &k.adjoint();
            assert!(kron_sandwich(&a, &b, &m).unwrap().max_abs_diff(&dense) < 1e-12);
        }
        assert!(kron_sandwich(&pauli_x(), &pauli_x(), &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let m = kron(&a, &b);
        let rb = partial_trace(&m, (2, 3), Subsystem::A).unwrap();
        assert!(rb.max_abs_diff(&b.scale(a.trace())) < 1e-12);
        let ra = partial_trace(&m, (2, 3), Subsystem::B).unwrap();
        assert!(ra.max_abs_diff(&a.scale(b.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let h = 0.5;
        let bell = ComplexMatrix::from_real_rows(&[
            &[h, 0.0, 0.0, h],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[h, 0.0, 0.0, h],
        ])
        .unwrap();
        let r = partial_trace(&bell, (2, 2), Subsystem::A).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(6, &mut rng);
        for over in [Subsystem::A, Subsystem::B] {
            let r = partial_trace(&m, (2, 3), over).unwrap();
            assert!((r.trace() - m.trace()).norm() < 1e-12);
        }
        assert!(matches!(
            partial_trace(&m, (4, 2), Subsystem::A),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn commutator_cases() {
        let xy = commutator(&pauli_x(), &pauli_y()).unwrap();
        assert!(xy.max_abs_diff(&pauli_z().scale(c(0.0, 2.0))) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_matrix(4, &mut rng);
        assert_eq!(commutator(&m, &m).unwrap().max_abs(), 0.0);

        let d = [0.3, -1.2, 2.0, 0.5];
        let rho = random_matrix(4, &mut rng);
        let k = commutator(&ComplexMatrix::from_diagonal(&d), &rho).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = rho.get(i, j) * (d[i] - d[j]);
                assert!((k.get(i, j) - expected).norm() < 1e-14);
            }
        }
        assert!(commutator(&m, &ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn eig_of_paulis() {
        let ez = herm_eig(&pauli_z()).unwrap();
        assert_eq!(ez.eigenvalues.len(), 2);
        assert!((ez.eigenvalues[0] + 1.0).abs() < 1e-15 && (ez.eigenvalues[1] - 1.0).abs() < 1e-15);

        let ex = herm_eig(&pauli_x()).unwrap();
        assert!((ex.eigenvalues[0] + 1.0).abs() < 1e-14 && (ex.eigenvalues[1] - 1.0).abs() < 1e-14);
        // |x-> = (1, -1)/sqrt2 and |x+> = (1, 1)/sqrt2 up to phase
        let v = &ex.eigenvectors;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(((v.get(0, 0) * v.get(1, 0).conj()).re + 0.5).abs() < 1e-14);
        assert!(((v.get(0, 1) * v.get(1, 1).conj()).re - 0.5).abs() < 1e-14);
        assert!((v.get(0, 1).norm() - s).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for dim in 1..=16 {
            let h = random_hermitian(dim, &mut rng);
            let eig = herm_eig(&h).unwrap();
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let rel = (&eig.reconstruct() - &h).frobenius_norm() / h.frobenius_norm();
            assert!(rel < 1e-10, "dim {dim}: residual {rel:e}");
            let v = &eig.eigenvectors;
            let vv = &v.adjoint() * v;
            assert!(vv.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-10);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn matrix_functions() {
        let t = 0.7;
        let u = expi(&pauli_z(), t).unwrap();
        let expected =
            ComplexMatrix::from_row_major(2, &[c(0.0, t).exp(), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -t).exp()]).unwrap();
        assert!(u.max_abs_diff(&expected) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = random_matrix(5, &mut rng);
        let rho = (&g * &g.adjoint()).scale_real(1.0 / (&g * &g.adjoint()).trace().re);
        let id = matrix_fn(&rho, |x| c(x, 0.0)).unwrap();
        assert!(id.max_abs_diff(&rho) < 1e-12);
        let sq = matrix_fn(&rho, |x| c(x * x, 0.0)).unwrap();
        assert!(sq.max_abs_diff(&(&rho * &rho)) < 1e-12);

        let proj = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(matrix_fn(&proj, |x| c(x.ln(), 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn exponential_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for dim in [2, 5, 12] {
            let h = random_hermitian(dim, &mut rng);
            let norm = herm_eig(&h)
                .unwrap()
                .eigenvalues
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            let t = 50.0 / norm;
            let u = expi(&h, t).unwrap();
            assert!((&u.adjoint() * &u).max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-10);
        }
    }

    #[test]
    fn power_matches_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = random_matrix(3, &mut rng);
        assert_eq!(m.pow(0), ComplexMatrix::identity(3));
        let cube = &(&m * &m) * &m;
        assert!(m.pow(3).max_abs_diff(&cube) < 1e-13);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = ComplexMatrix::from_row_major(2, &[c(1.0, 0.5), c(0.0, -1.0), c(2.0, 0.0), c(-0.25, 3.0)]).unwrap();
        let s = m.to_json_string().unwrap();
        assert_eq!(ComplexMatrix::from_json_str(&s).unwrap(), m);
        assert!(ComplexMatrix::from_json_str(r#"{"dim":2,"re":[1,0,0],"im":[0,0,0]}"#).is_err());
        assert!(ComplexMatrix::from_json_str(r#"{"dim":1,"re":[1],"im":[0,1]}"#).is_err());
        assert!(ComplexMatrix::from_json_str("not json").is_err());
        assert!(ComplexMatrix::from_row_major(1, &[c(f64::NAN, 0.0)]).is_err());
    }
}
