//! State constructors and validation.
//!
//! Basis conventions: qubit ancillas are written in the σ_x eigenbasis
//! ordered (|x⁺⟩, |x⁻⟩), qubit systems in the reference eigenbasis ordered
//! (|b_x⟩, |b_y⟩), Fock spaces by occupation number. Joint states put the
//! ancilla first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{expi, herm_eig, kron, ComplexMatrix, C64, HERMITIAN_TOL};

/// Validation tolerance for trace and positivity.
pub const STATE_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {:e})",
                mat.hermitian_deviation()
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = herm_eig(&mat)?.eigenvalues[0];
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { mat })
    }

    /// Skips validation; callers guarantee a unitary image or partial trace
    /// of a valid state.
    pub(crate) fn new_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    /// Normalised projector onto `psi`.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if psi.is_empty() || !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::InvalidArgument(
                "state vector must be non-zero and finite".into(),
            ));
        }
        let n = psi.len();
        Ok(Self {
            mat: ComplexMatrix::from_fn(n, |i, j| psi[i] * psi[j].conj() / norm2),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eig(&self.mat).expect("density matrices are Hermitian").eigenvalues
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::new_unchecked(kron(&self.mat, &other.mat))
    }

    /// `u ρ u†` for unitary `u`.
    pub fn transform(&self, u: &ComplexMatrix) -> DensityMatrix {
        DensityMatrix::new_unchecked(&(u * &self.mat) * &u.adjoint())
    }
}

/// Qubit state `α|x⁺⟩⟨x⁻| + α*|x⁻⟩⟨x⁺| + δ|x⁺⟩⟨x⁺| + (1−δ)|x⁻⟩⟨x⁻|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitAtomState {
    pub alpha: C64,
    pub delta: f64,
}

impl QubitAtomState {
    pub fn new(alpha: C64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidState(format!("population δ = {delta} outside [0, 1]")));
        }
        if alpha.norm_sqr() > delta * (1.0 - delta) + 1e-12 {
            return Err(Error::InvalidState(format!(
                "|α|² = {} exceeds δ(1−δ) = {}",
                alpha.norm_sqr(),
                delta * (1.0 - delta)
            )));
        }
        Ok(Self { alpha, delta })
    }

    pub fn density(&self) -> DensityMatrix {
        let d = C64::new(self.delta, 0.0);
        DensityMatrix::new_unchecked(
            ComplexMatrix::from_row_major(2, &[d, self.alpha, self.alpha.conj(), C64::new(1.0, 0.0) - d])
                .expect("2x2 literal"),
        )
    }
}

/// Single bosonic mode truncated to levels `0..dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockSpace {
    pub dim: usize,
    pub omega: f64,
    /// Coupling amplitude; absorbs the mode function at the atom's position.
    pub nu: f64,
}

impl FockSpace {
    pub fn new(dim: usize, omega: f64, nu: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!("Fock truncation {dim} < 2")));
        }
        if !(omega > 0.0) || !omega.is_finite() || !nu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need ω > 0 and finite ν, got ω = {omega}, ν = {nu}"
            )));
        }
        Ok(Self { dim, omega, nu })
    }

    /// Truncation with unit frequency and coupling.
    pub fn with_dim(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0, 1.0)
    }

    /// Annihilation operator with exact `√n` elements.
    pub fn annihilation(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, |i, j| {
            if j == i + 1 {
                C64::new((j as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn creation(&self) -> ComplexMatrix {
        self.annihilation().adjoint()
    }

    pub fn number(&self) -> ComplexMatrix {
        let levels: Vec<f64> = (0..self.dim).map(|n| n as f64).collect();
        ComplexMatrix::from_diagonal(&levels)
    }

    /// `a + a†`.
    pub fn quadrature(&self) -> ComplexMatrix {
        let a = self.annihilation();
        &a + &a.adjoint()
    }
}

/// Pure product state `(|x⁺⟩ + r|x⁻⟩) ⊗ (|b_x⟩ + s|b_y⟩)`, normalised.
pub fn qubit_pair_pure(r: C64, s: C64) -> DensityMatrix {
    let one = C64::new(1.0, 0.0);
    DensityMatrix::from_pure(&[one, s, r, r * s]).expect("first component is 1")
}

pub fn qubit_atom(alpha: C64, delta: f64) -> Result<DensityMatrix> {
    Ok(QubitAtomState::new(alpha, delta)?.density())
}

pub fn vacuum(fs: &FockSpace) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(fs.dim);
    m.set(0, 0, C64::new(1.0, 0.0));
    DensityMatrix::new_unchecked(m)
}

/// Thermal state normalised over the truncated spectrum.
pub fn thermal_state(fs: &FockSpace, beta: f64) -> Result<DensityMatrix> {
    let x = beta * fs.omega;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("need βω > 0, got {x}")));
    }
    let weights: Vec<f64> = (0..fs.dim).map(|n| (-x * n as f64).exp()).collect();
    let z: f64 = weights.iter().sum();
    let pops: Vec<f64> = weights.iter().map(|w| w / z).collect();
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::from_diagonal(&pops)))
}

/// Normalised pure superposition of Fock levels.
pub fn fock_superposition(fs: &FockSpace, coeffs: &[(usize, C64)]) -> Result<DensityMatrix> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("empty Fock superposition".into()));
    }
    let mut psi = vec![C64::new(0.0, 0.0); fs.dim];
    for &(level, amp) in coeffs {
        if level >= fs.dim {
            return Err(Error::InvalidArgument(format!(
                "level {level} outside truncation {}",
                fs.dim
            )));
        }
        psi[level] += amp;
    }
    DensityMatrix::from_pure(&psi)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| complex_normal(rng))
}

/// `G G† / Tr(G G†)` with `G` complex Gaussian; deterministic per seed.
pub fn random_density(dim: usize, seed: u64) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(dim, &mut rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    let mut m = w.scale_real(1.0 / tr);
    // Exact Hermiticity so validation never trips on rounding.
    m = (&m + &m.adjoint()).scale_real(0.5);
    Ok(DensityMatrix::new_unchecked(m))
}

/// Random pure state with Gaussian amplitudes.
pub fn random_pure(dim: usize, seed: u64) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi: Vec<C64> = (0..dim).map(|_| complex_normal(&mut rng)).collect();
    DensityMatrix::from_pure(&psi)
}

/// Random Hermitian matrix rescaled to unit spectral radius.
pub fn random_hermitian(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(dim, &mut rng);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    let radius = herm_eig(&h)?.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(if radius > 0.0 { h.scale_real(1.0 / radius) } else { h })
}

/// Random unitary `exp(i·π·H)` for a random Hermitian `H`.
pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    expi(&random_hermitian(dim, seed)?, std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rank(rho: &DensityMatrix) -> usize {
        rho.eigenvalues().iter().filter(|&&l| l > 1e-12).count()
    }

    #[test]
    fn pair_pure_basis_states() {
        let rho = qubit_pair_pure(c(0.0, 0.0), c(0.0, 0.0));
        let mut expected = ComplexMatrix::zeros(4);
        expected.set(0, 0, c(1.0, 0.0));
        assert_eq!(rho.matrix(), &expected);

        let rho = qubit_pair_pure(c(1.0, 0.0), c(1.0, 0.0));
        assert!(rho
            .matrix()
            .to_row_major()
            .iter()
            .all(|z| (z - c(0.25, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn pair_pure_is_rank_one() {
        for (r, s) in [(c(0.3, -1.2), c(2.0, 0.5)), (c(-4.0, 0.0), c(0.0, 0.1))] {
            let rho = qubit_pair_pure(r, s);
            assert!((rho.matrix().trace() - c(1.0, 0.0)).norm() < 1e-12);
            assert_eq!(rank(&rho), 1);
            assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn qubit_atom_cases() {
        let up = qubit_atom(c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(up.matrix(), &ComplexMatrix::from_diagonal(&[1.0, 0.0]));

        let plus = qubit_atom(c(0.5, 0.0), 0.5).unwrap();
        assert_eq!(rank(&plus), 1);

        let ev = qubit_atom(c(0.3, 0.0), 0.4).unwrap().eigenvalues();
        let root = 0.10f64.sqrt();
        assert!((ev[0] - (0.5 - root)).abs() < 1e-14);
        assert!((ev[1] - (0.5 + root)).abs() < 1e-14);

        assert!(matches!(qubit_atom(c(0.6, 0.0), 0.5), Err(Error::InvalidState(_))));
        assert!(qubit_atom(c(0.0, 0.0), 1.5).is_err());
    }

    #[test]
    fn vacuum_state() {
        let fs = FockSpace::with_dim(6).unwrap();
        let v = vacuum(&fs);
        assert_eq!(v.matrix().get(0, 0), c(1.0, 0.0));
        assert_eq!(v.matrix().max_abs(), 1.0);
        assert!(DensityMatrix::new(v.matrix().clone()).is_ok());
    }

    #[test]
    fn thermal_cases() {
        let fs = FockSpace::with_dim(32).unwrap();
        let cold = thermal_state(&fs, 50.0).unwrap();
        assert!(cold.matrix().max_abs_diff(vacuum(&fs).matrix()) < 1e-12);

        let two = FockSpace::with_dim(2).unwrap();
        let t = thermal_state(&two, std::f64::consts::LN_2).unwrap();
        assert!(
            t.matrix()
                .max_abs_diff(&ComplexMatrix::from_diagonal(&[2.0 / 3.0, 1.0 / 3.0]))
                < 1e-15
        );

        let warm = thermal_state(&fs, 0.3).unwrap();
        let pops: Vec<f64> = (0..32).map(|n| warm.matrix().get(n, n).re).collect();
        assert!(pops.windows(2).all(|w| w[0] > w[1]));
        assert!(DensityMatrix::new(warm.matrix().clone()).is_ok());
        assert!(thermal_state(&fs, 0.0).is_err());
    }

    #[test]
    fn fock_superpositions() {
        let fs = FockSpace::with_dim(5).unwrap();
        let single = fock_superposition(&fs, &[(2, c(0.0, 3.0))]).unwrap();
        assert!(
            single
                .matrix()
                .max_abs_diff(&ComplexMatrix::from_diagonal(&[0.0, 0.0, 1.0, 0.0, 0.0]))
                < 1e-15
        );

        let (r, p) = (c(0.5, 0.2), c(-0.3, 0.7));
        let rho = fock_superposition(&fs, &[(1, c(1.0, 0.0)), (2, r), (3, p)]).unwrap();
        let norm = 1.0 / (1.0 + r.norm_sqr() + p.norm_sqr());
        assert!((rho.matrix().get(1, 1).re - norm).abs() < 1e-15);
        assert!((rho.matrix().get(2, 1) - r * norm).norm() < 1e-15);
        assert_eq!(rank(&rho), 1);

        assert!(fock_superposition(&fs, &[]).is_err());
        assert!(fock_superposition(&fs, &[(5, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn random_density_is_deterministic_and_valid() {
        let a = random_density(5, 42).unwrap();
        let b = random_density(5, 42).unwrap();
        let bits = |m: &DensityMatrix| -> Vec<u64> {
            m.matrix()
                .to_row_major()
                .iter()
                .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
                .collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&random_density(5, 43).unwrap()));
        assert!(a.eigenvalues().iter().all(|&l| l >= -1e-12));
        assert!((a.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(DensityMatrix::new(a.matrix().clone()).is_ok());
    }

    #[test]
    fn validation_rejects_bad_states() {
        let not_unit = ComplexMatrix::from_diagonal(&[0.5, 0.4]);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = ComplexMatrix::from_diagonal(&[1.2, -0.2]);
        assert!(DensityMatrix::new(negative).is_err());
        let skew = ComplexMatrix::from_real_rows(&[&[0.5, 0.1], &[-0.1, 0.5]]).unwrap();
        assert!(DensityMatrix::new(skew).is_err());
    }

    #[test]
    fn ladder_operators() {
        let fs = FockSpace::with_dim(6).unwrap();
        let a = fs.annihilation();
        let n = &fs.creation() * &a;
        assert!(n.max_abs_diff(&fs.number()) < 1e-14);
        assert!(FockSpace::new(1, 1.0, 1.0).is_err());
        assert!(FockSpace::new(4, 0.0, 1.0).is_err());
    }
}
