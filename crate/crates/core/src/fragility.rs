//! n-fragilities of a state with respect to a reference observable.
//!
//! For a product state `ρ_A ⊗ ρ_B` evolving under `exp(i t A⊗B)`, the
//! n-purity of `B` starts out as `γ_n(t) = γ_n(0) − 2 (ΔA)² f_n t² + O(t³)`
//! with
//!
//! ```text
//! f_n = −(n/2) Tr[ρⁿ⁻¹ [B, ρ] B]        (n ≥ 2)
//! f_1 = −Tr[log ρ [B, ρ] B]             (von Neumann, S̈(0) = 2 (ΔA)² f_1)
//! ```
//!
//! `f_2 = −½ Tr([B, ρ]²) = ½ Σ_ij (b_i − b_j)² |ρ_ij|²` in the eigenbasis of
//! `B`; it never exceeds the variance of `B` and coincides with it on pure
//! states.

use crate::diagnostics::{check_dims, variance, HermitianObservable};
use crate::error::{Error, Result};
use crate::matrix::{commutator, herm_eig};
use crate::states::DensityMatrix;

/// Smallest eigenvalue `fragility_1` accepts by default.
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-12;

/// Largest imaginary part tolerated in a trace that is real in exact
/// arithmetic, relative to its real part (or absolute below one).
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-8;

/// `f_n` for integer `n ≥ 2` via matrix powers.
pub fn fragility_n(rho: &DensityMatrix, b: &HermitianObservable, n: u32) -> Result<f64> {
    check_dims(rho, b)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "fragility_n needs n >= 2 (got {n}); use fragility_1 for the von Neumann case"
        )));
    }
    let comm = commutator(b.matrix(), rho.matrix())?;
    let left = &rho.matrix().pow(n - 1) * &comm;
    let tr = left.trace_product(b.matrix());
    if tr.im.abs() > IMAGINARY_RESIDUE_TOL * tr.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue(tr.im));
    }
    Ok(-0.5 * n as f64 * tr.re)
}

/// `f_2 = −½ Tr([B, ρ]²)`. The commutator is anti-Hermitian, so this is half
/// its squared Frobenius norm and never negative.
pub fn fragility_2(rho: &DensityMatrix, b: &HermitianObservable) -> Result<f64> {
    check_dims(rho, b)?;
    let comm = commutator(b.matrix(), rho.matrix())?;
    let norm = comm.frobenius_norm();
    Ok(0.5 * norm * norm)
}

/// `f_2 = ½ Σ_ij (b_i − b_j)² |ρ_ij|²` with `ρ` written in the eigenbasis of `b`.
pub fn fragility_2_eigenbasis(rho: &DensityMatrix, b: &HermitianObservable) -> Result<f64> {
    check_dims(rho, b)?;
    let tilde = rho.matrix().conjugate_by(&b.eigen().eigenvectors);
    let ev = b.eigenvalues();
    let n = rho.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let gap = ev[i] - ev[j];
                acc += gap * gap * tilde.get(i, j).norm_sqr();
            }
        }
    }
    Ok(0.5 * acc)
}

/// `f_1 = −Tr[log ρ [B, ρ] B]`, evaluated in the eigenbasis of `ρ` as
/// `Σ_{i≠k} (λ_i − λ_k) log λ_i |B_ik|²`.
///
/// Fails with [`Error::NearPureDivergence`] when an eigenvalue of `ρ` is
/// below `eigen_floor`: the quantity grows without bound as the state
/// approaches the boundary of the state space.
pub fn fragility_1(rho: &DensityMatrix, b: &HermitianObservable, eigen_floor: f64) -> Result<f64> {
    check_dims(rho, b)?;
    let eig = herm_eig(rho.matrix())?;
    let lambda = &eig.eigenvalues;
    if lambda[0] < eigen_floor {
        return Err(Error::NearPureDivergence {
            eigenvalue: lambda[0],
            floor: eigen_floor,
        });
    }
    let b_tilde = b.matrix().conjugate_by(&eig.eigenvectors);
    let logs: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
    let n = rho.dim();
    let mut acc = 0.0;
    // Symmetrised pairs: (λ_i − λ_k)(log λ_i − log λ_k) ≥ 0 term by term.
    for i in 0..n {
        for k in (i + 1)..n {
            acc += (lambda[i] - lambda[k]) * (logs[i] - logs[k]) * b_tilde.get(i, k).norm_sqr();
        }
    }
    Ok(acc)
}

/// `(ΔB)² − f_2`, non-negative for every state and zero for pure states.
pub fn variance_fragility_gap(rho: &DensityMatrix, b: &HermitianObservable) -> Result<f64> {
    Ok(variance(rho, b)? - fragility_2(rho, b)?)
}
