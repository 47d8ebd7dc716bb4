//! Scalar functionals of states: n-purities, Rényi and von Neumann entropies,
//! mixedness, 2-norm coherence and variance.
//!
//! Logarithms are natural throughout.

use crate::error::{Error, Result};
use crate::matrix::{herm_eig, ComplexMatrix, HermitianEigen, C64};
use crate::states::DensityMatrix;

/// Eigenvalues closer than this (relative to the spectral radius) are
/// treated as one degenerate eigenspace when dephasing.
pub const DEGENERACY_REL_GAP: f64 = 1e-8;

/// Hermitian reference operator with its eigendecomposition cached.
#[derive(Clone, Debug)]
pub struct HermitianObservable {
    mat: ComplexMatrix,
    eig: HermitianEigen,
}

impl HermitianObservable {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let eig = herm_eig(&mat)?;
        Ok(Self { mat, eig })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::new(ComplexMatrix::from_diagonal(values)).expect("real diagonal is Hermitian")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.mat.scale_real(c)).expect("real multiple of a Hermitian matrix")
    }

    /// Labels each eigenvector with the index of its (block) eigenvalue.
    fn eigenspace_labels(&self) -> Vec<usize> {
        let values = &self.eig.eigenvalues;
        let radius = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = DEGENERACY_REL_GAP * if radius > 0.0 { radius } else { 1.0 };
        let mut labels = Vec::with_capacity(values.len());
        let mut label = 0;
        for (k, &v) in values.iter().enumerate() {
            if k > 0 && v - values[k - 1] > tol {
                label += 1;
            }
            labels.push(label);
        }
        labels
    }
}

pub(crate) fn check_dims(rho: &DensityMatrix, b: &HermitianObservable) -> Result<()> {
    if rho.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} with observable of dimension {}",
            rho.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `Tr ρⁿ` for integer `n ≥ 1`.
pub fn n_purity(rho: &DensityMatrix, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("n-purity needs n >= 1".into()));
    }
    Ok(rho.matrix().pow(n).trace().re)
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    m.trace_product(m).re
}

/// `1 − Tr ρ²`.
pub fn mixedness(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// Order of a Rényi entropy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RenyiOrder {
    /// The `n → 1` limit.
    VonNeumann,
    Integer(u32),
}

pub fn renyi_entropy(rho: &DensityMatrix, order: RenyiOrder) -> Result<f64> {
    match order {
        RenyiOrder::VonNeumann => Ok(von_neumann_entropy(rho)),
        RenyiOrder::Integer(1) => Ok(von_neumann_entropy(rho)),
        RenyiOrder::Integer(n) => {
            let g = n_purity(rho, n)?;
            Ok(g.ln() / (1.0 - n as f64))
        }
    }
}

/// `−Σ λ log λ` with `0 log 0 = 0`; tiny negative eigenvalues count as zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

pub(crate) fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum()
}

/// Rényi entropy of real order `alpha` from eigenvalue powers. Near
/// `alpha = 1` the evaluation uses `expm1`/`ln_1p` so that orders like
/// `1 + 1e-5` keep full relative precision.
pub fn renyi_entropy_real(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("Rényi order {alpha} must be positive")));
    }
    let ev = rho.eigenvalues();
    Ok(renyi_of_spectrum(&ev, alpha))
}

pub(crate) fn renyi_of_spectrum(eigenvalues: &[f64], alpha: f64) -> f64 {
    let positive: Vec<f64> = eigenvalues.iter().copied().filter(|&l| l > 0.0).collect();
    let total: f64 = positive.iter().sum();
    let eps = alpha - 1.0;
    if eps == 0.0 {
        return entropy_of_spectrum(&positive.iter().map(|l| l / total).collect::<Vec<_>>());
    }
    // Σ pᵢ^α − 1 = Σ pᵢ (pᵢ^ε − 1)
    let excess: f64 = positive
        .iter()
        .map(|&l| {
            let p = l / total;
            p * (eps * p.ln()).exp_m1()
        })
        .sum();
    excess.ln_1p() / (1.0 - alpha)
}

/// Block-dephased copy of `rho`: off-diagonal blocks between distinct
/// eigenvalues of `b` are removed, everything inside a degenerate eigenspace
/// is kept.
pub fn dephase(rho: &DensityMatrix, b: &HermitianObservable) -> Result<ComplexMatrix> {
    check_dims(rho, b)?;
    let v = &b.eig.eigenvectors;
    let mut tilde = rho.matrix().conjugate_by(v);
    let labels = b.eigenspace_labels();
    let n = rho.dim();
    for i in 0..n {
        for j in 0..n {
            if labels[i] != labels[j] {
                tilde.set(i, j, C64::new(0.0, 0.0));
            }
        }
    }
    Ok(&(v * &tilde) * &v.adjoint())
}

/// 2-norm coherence `Σ_{i≠j} |ρ̃_ij|²` in the eigenbasis of `b`, with
/// degenerate eigenspaces dephased blockwise.
pub fn coherence_2norm(rho: &DensityMatrix, b: &HermitianObservable) -> Result<f64> {
    check_dims(rho, b)?;
    let tilde = rho.matrix().conjugate_by(&b.eig.eigenvectors);
    let labels = b.eigenspace_labels();
    let n = rho.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] != labels[j] {
                acc += tilde.get(i, j).norm_sqr();
            }
        }
    }
    Ok(acc)
}

pub fn expectation(rho: &DensityMatrix, b: &HermitianObservable) -> Result<f64> {
    check_dims(rho, b)?;
    Ok(rho.matrix().trace_product(b.matrix()).re)
}

/// `Tr(ρb²) − (Tr ρb)²`.
pub fn variance(rho: &DensityMatrix, b: &HermitianObservable) -> Result<f64> {
    check_dims(rho, b)?;
    let m = rho.matrix();
    let rb = m * b.matrix();
    let second = rb.trace_product(b.matrix()).re;
    let first = rb.trace().re;
    Ok(second - first * first)
}

/// Qubit split of the normalised variance into coherent and incoherent parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceDecomposition {
    /// `(ΔB)² / (2 (ΔB)²_max)` with `(ΔB)²_max = (b_x − b_y)²/4`.
    pub normalized_variance: f64,
    pub coherence: f64,
    pub mixedness: f64,
}

impl VarianceDecomposition {
    pub fn residual(&self) -> f64 {
        self.normalized_variance - self.coherence - self.mixedness
    }
}

pub fn qubit_variance_decomposition(rho: &DensityMatrix, b: &HermitianObservable) -> Result<VarianceDecomposition> {
    check_dims(rho, b)?;
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "qubit decomposition on dimension {}",
            rho.dim()
        )));
    }
    let ev = b.eigenvalues();
    let gap = ev[1] - ev[0];
    if gap.abs() <= DEGENERACY_REL_GAP * ev[0].abs().max(ev[1].abs()).max(1.0) {
        return Err(Error::InvalidArgument("reference observable is degenerate".into()));
    }
    let max_variance = gap * gap / 4.0;
    Ok(VarianceDecomposition {
        normalized_variance: variance(rho, b)? / (2.0 * max_variance),
        coherence: coherence_2norm(rho, b)?,
        mixedness: mixedness(rho),
    })
}
