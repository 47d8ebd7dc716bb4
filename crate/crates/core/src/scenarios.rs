//! Worked examples with closed forms: a qubit probed through `σ_x ⊗ B`
//! (commuting case) and `σ_x ⊗ H_B` (non-commuting case), a Fock-state
//! environment, a two-level atom coupled to one field mode, and a thermal
//! mode. Each closed form has a numeric counterpart built from the generic
//! evolution.

use serde::{Deserialize, Deserializer};

use crate::diagnostics::{coherence_2norm, purity, variance, HermitianObservable};
use crate::dynamics::{
    sample_trajectory_with, uniform_grid, Diagnostic, ProductInteraction, Propagator, References, Side, Trajectory,
};
use crate::error::{Error, Result};
use crate::fragility::fragility_2;
use crate::matrix::{partial_trace, pauli_y, ComplexMatrix, Subsystem, C64};
use crate::states::{fock_superposition, qubit_atom, thermal_state, vacuum, DensityMatrix, FockSpace, QubitAtomState};

/// Successive Fock truncations must agree to this before a light-matter run
/// is accepted.
pub const FOCK_CONVERGENCE_TOL: f64 = 1e-8;
/// Largest truncation tried by the doubling sweep.
pub const MAX_FOCK_DIM: usize = 256;
/// Initial truncation of the doubling sweep.
pub const DEFAULT_FOCK_DIM: usize = 32;

fn cplx(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn pure_qubit(s: C64) -> DensityMatrix {
    DensityMatrix::from_pure(&[cplx(1.0), s]).expect("first component is 1")
}

/// `σ_x` written in its own eigenbasis `(|x⁺⟩, |x⁻⟩)`.
fn sigma_x_diagonal() -> HermitianObservable {
    HermitianObservable::diagonal(&[1.0, -1.0])
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Qubit probed through σ_x ⊗ B

/// Ancilla `|x⁺⟩ + r|x⁻⟩`, system `|b_x⟩ + s|b_y⟩`, interaction
/// `exp(i ε t σ_x ⊗ B)` with `B = diag(b_x, b_y)`. Only the gap `b_x − b_y`
/// enters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Case1Params {
    pub r: C64,
    pub s: C64,
    pub eps: f64,
    pub b_gap: f64,
}

impl Case1Params {
    pub fn new(r: C64, s: C64, eps: f64, b_gap: f64) -> Result<Self> {
        let finite = [r.re, r.im, s.re, s.im, eps, b_gap].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite);
        }
        Ok(Self { r, s, eps, b_gap })
    }

    /// Ancilla-dependent factor `(1 + |r|⁴ + 2|r|² cos θ)/(1 + |r|²)²`,
    /// `θ = 2 ε t (b_x − b_y)`.
    fn visibility(&self, t: f64) -> f64 {
        let r2 = self.r.norm_sqr();
        let theta = 2.0 * self.eps * t * self.b_gap;
        (1.0 + r2 * r2 + 2.0 * r2 * theta.cos()) / ((1.0 + r2) * (1.0 + r2))
    }

    pub fn observable(&self) -> HermitianObservable {
        HermitianObservable::diagonal(&[self.b_gap, 0.0])
    }

    pub fn interaction(&self) -> ProductInteraction {
        ProductInteraction {
            a: sigma_x_diagonal(),
            b: self.observable(),
            coupling: self.eps,
        }
    }

    pub fn initial_states(&self) -> (DensityMatrix, DensityMatrix) {
        (pure_qubit(self.r), pure_qubit(self.s))
    }
}

pub fn case1_mixedness(p: &Case1Params, t: f64) -> f64 {
    let s2 = p.s.norm_sqr();
    1.0 - (1.0 + s2 * s2 + 2.0 * s2 * p.visibility(t)) / ((1.0 + s2) * (1.0 + s2))
}

/// 2-norm coherence in the `{|b_x⟩, |b_y⟩}` basis.
pub fn case1_coherence(p: &Case1Params, t: f64) -> f64 {
    let s2 = p.s.norm_sqr();
    2.0 * s2 * p.visibility(t) / ((1.0 + s2) * (1.0 + s2))
}

/// `(|s| (b_x − b_y)/(1 + |s|²))²`, constant in time.
pub fn case1_variance(p: &Case1Params) -> f64 {
    let s = p.s.norm();
    let v = s * p.b_gap / (1.0 + s * s);
    v * v
}

/// Numeric evolution with the closed forms alongside. Needs `b_gap ≠ 0`
/// so that the coherence basis is defined.
pub fn case1_trajectory(p: &Case1Params, grid: &[f64]) -> Result<Trajectory> {
    if p.b_gap == 0.0 {
        return Err(Error::InvalidArgument("Case-1 coherence needs b_x ≠ b_y".into()));
    }
    check_grid(grid)?;
    let (rho_a, rho_b) = p.initial_states();
    let which = [
        Diagnostic::Mixedness(Side::B),
        Diagnostic::Coherence(Side::B),
        Diagnostic::Variance(Side::B),
    ];
    let h = p.interaction();
    let mut traj = sample_trajectory_with(&rho_a, &rho_b, &h, grid, &which, &References::from_interaction(&h))?;
    traj.push("mixedness_exact", grid.iter().map(|&t| case1_mixedness(p, t)).collect())?;
    traj.push("coherence_exact", grid.iter().map(|&t| case1_coherence(p, t)).collect())?;
    traj.push("variance_exact", vec![case1_variance(p); grid.len()])?;
    Ok(traj)
}

// ---------------------------------------------------------------------------
// Qubit driven through σ_x ⊗ H_B with [H_B, B] ≠ 0

/// `H_B = −i(|b_x⟩⟨b_y| − |b_y⟩⟨b_x|)`, i.e. `σ_y` in the `B` eigenbasis.
pub fn case2_generator() -> HermitianObservable {
    HermitianObservable::new(pauli_y()).expect("σ_y is Hermitian")
}

/// Reduced system state for `exp(i ε t σ_x ⊗ H_B)` acting on the same
/// product initial state as the commuting case, from the closed-form
/// amplitudes.
pub fn case2_reduced_state(r: C64, s: C64, eps: f64, t: f64) -> Result<DensityMatrix> {
    if ![r.re, r.im, s.re, s.im, eps, t].iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let r2 = r.norm_sqr();
    let norm = ((1.0 + r2) * (1.0 + s.norm_sqr())).sqrt();
    let (c, sn) = ((eps * t).cos(), (eps * t).sin());
    let chi_p = (s * sn + c) / norm;
    let chi_m = (-s * sn + c) / norm;
    let xi_p = (s * c + sn) / norm;
    let xi_m = (s * c - sn) / norm;
    let xx = chi_p.norm_sqr() + r2 * chi_m.norm_sqr();
    let xy = chi_p * xi_m.conj() + chi_m * xi_p.conj() * r2;
    let yy = xi_m.norm_sqr() + r2 * xi_p.norm_sqr();
    let m = ComplexMatrix::from_row_major(2, &[cplx(xx), xy, xy.conj(), cplx(yy)])?;
    Ok(DensityMatrix::new_unchecked(m))
}

/// Same state by evolving the joint pure state numerically.
pub fn case2_numeric_state(r: C64, s: C64, eps: f64, t: f64) -> Result<DensityMatrix> {
    let h = ProductInteraction::new(sigma_x_diagonal(), case2_generator(), eps)?;
    let joint = pure_qubit(r).tensor(&pure_qubit(s));
    Ok(Propagator::new(&joint, &h)?.reduced_at(t, Subsystem::A))
}

/// Purity, coherence and variance of the system (gap normalised to 1),
/// from the closed form, plus the largest entrywise deviation from the
/// numeric evolution.
pub fn case2_trajectory(r: C64, s: C64, eps: f64, grid: &[f64]) -> Result<Trajectory> {
    check_grid(grid)?;
    let b = HermitianObservable::diagonal(&[1.0, 0.0]);
    let h = ProductInteraction::new(sigma_x_diagonal(), case2_generator(), eps)?;
    let prop = Propagator::new(&pure_qubit(r).tensor(&pure_qubit(s)), &h)?;
    let mut cols = [vec![], vec![], vec![], vec![]];
    for &t in grid {
        let rho = case2_reduced_state(r, s, eps, t)?;
        let numeric = prop.reduced_at(t, Subsystem::A);
        cols[0].push(purity(&rho));
        cols[1].push(coherence_2norm(&rho, &b)?);
        cols[2].push(variance(&rho, &b)?);
        cols[3].push(rho.matrix().max_abs_diff(numeric.matrix()));
    }
    let mut traj = Trajectory::new(grid.to_vec());
    for (name, col) in ["purity_b", "coherence_b", "variance_b", "numeric_deviation"]
        .into_iter()
        .zip(cols)
    {
        traj.push(name, col)?;
    }
    Ok(traj)
}

/// Environment `|1⟩ + r|2⟩ + p|3⟩` in a truncated mode, system
/// `|b_x⟩ + s|b_y⟩`, interaction `exp(i ε t N ⊗ H_B)`. Records purity,
/// coherence and variance of the system (gap 1) and the residual of
/// `(ΔB)² = (1 − γ + c)/2`.
pub fn fock_env_scenario(r: C64, p: C64, s: C64, eps: f64, fock_dim: usize, grid: &[f64]) -> Result<Trajectory> {
    if fock_dim < 4 {
        return Err(Error::InvalidArgument(format!(
            "Fock environment needs at least 4 levels, got {fock_dim}"
        )));
    }
    check_grid(grid)?;
    let fs = FockSpace::with_dim(fock_dim)?;
    let env = fock_superposition(&fs, &[(1, cplx(1.0)), (2, r), (3, p)])?;
    let number = HermitianObservable::new(fs.number())?;
    let h = ProductInteraction::new(number.clone(), case2_generator(), eps)?;
    let refs = References {
        a: number,
        b: HermitianObservable::diagonal(&[1.0, 0.0]),
    };
    let which = [
        Diagnostic::Purity(Side::B),
        Diagnostic::Coherence(Side::B),
        Diagnostic::Variance(Side::B),
    ];
    let mut traj = sample_trajectory_with(&env, &pure_qubit(s), &h, grid, &which, &refs)?;
    let residual = {
        let g = traj.get("purity_b").expect("recorded");
        let c = traj.get("coherence_b").expect("recorded");
        let v = traj.get("variance_b").expect("recorded");
        (0..grid.len()).map(|k| v[k] - 0.5 * (1.0 - g[k] + c[k])).collect()
    };
    traj.push("variance_relation_residual", residual)?;
    Ok(traj)
}

// ---------------------------------------------------------------------------
// Two-level atom coupled to one field mode through σ_x ⊗ ν(a + a†)

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UdwParams {
    pub alpha: C64,
    pub delta: f64,
    pub nu: f64,
    /// First truncation of the doubling sweep.
    pub fock_dim: usize,
}

impl UdwParams {
    pub fn new(alpha: C64, delta: f64, nu: f64, fock_dim: usize) -> Result<Self> {
        QubitAtomState::new(alpha, delta)?;
        if fock_dim < 8 {
            return Err(Error::InvalidArgument(format!("field truncation {fock_dim} < 8")));
        }
        if !nu.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            alpha,
            delta,
            nu,
            fock_dim,
        })
    }
}

/// Qubit 2-fragility w.r.t. `σ_x`: `4|α|² |⟨0|e^{2itν(a+a†)}|0⟩|²
/// = 4|α|² e^{−4ν²t²}`.
pub fn udw_qubit_fragility_exact(p: &UdwParams, t: f64) -> f64 {
    4.0 * p.alpha.norm_sqr() * (-4.0 * p.nu * p.nu * t * t).exp()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!("population δ = {delta} outside [0, 1]")));
    }
    Ok(())
}

/// Field 2-fragility w.r.t. `a + a†` with the published `t²` coefficient
/// `6 + √2`, at `ν = 1`. Disagrees with the numeric evolution for
/// `0 < δ < 1`; see [`udw_field_fragility_coherent`].
pub fn udw_field_fragility_exact(delta: f64, t: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(field_fragility_with_coefficient(delta, 1.0, 6.0 + 2f64.sqrt(), t))
}

/// Field 2-fragility w.r.t. `a + a†` from the coherent-state algebra:
/// `δ² + (1−δ)² + 2δ(1−δ)(1 − 8ν²t²) e^{−4ν²t²}`.
///
/// The field ends up in `δ|iνt⟩⟨iνt| + (1−δ)|−iνt⟩⟨−iνt|`; the cross terms
/// carry the overlap `e^{−2ν²t²}` and a factor `(1 − 8ν²t²)` from
/// `[a + a†, ·]` acting on them.
pub fn udw_field_fragility_coherent(delta: f64, nu: f64, t: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(field_fragility_with_coefficient(delta, nu, 8.0, t))
}

fn field_fragility_with_coefficient(delta: f64, nu: f64, coefficient: f64, t: f64) -> f64 {
    let x = nu * t;
    let cross = 2.0 * delta * (1.0 - delta);
    delta * delta + (1.0 - delta) * (1.0 - delta) + cross * (1.0 - coefficient * x * x) * (-4.0 * x * x).exp()
}

/// Least-squares `t²` coefficient `k` in
/// `δ² + (1−δ)² + 2δ(1−δ)(1 − k ν²t²) e^{−4ν²t²}` for sampled field
/// fragilities.
pub fn fit_field_coefficient(delta: f64, nu: f64, times: &[f64], values: &[f64]) -> Result<f64> {
    check_delta(delta)?;
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch("times and values differ in length".into()));
    }
    let cross = 2.0 * delta * (1.0 - delta);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&t, &f) in times.iter().zip(values) {
        let x2 = nu * nu * t * t;
        let decay = (-4.0 * x2).exp();
        let x = -cross * x2 * decay;
        let y = f - delta * delta - (1.0 - delta) * (1.0 - delta) - cross * decay;
        sxy += x * y;
        sxx += x * x;
    }
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument(
            "coefficient is not identifiable from these samples".into(),
        ));
    }
    Ok(sxy / sxx)
}

/// Numeric light-matter run at the accepted truncation.
#[derive(Clone, Debug)]
pub struct UdwRun {
    pub trajectory: Trajectory,
    pub fock_dim: usize,
    /// Largest difference from the previous truncation over all series.
    pub deviation: f64,
}

const UDW_SERIES: [(&str, &str); 6] = [
    ("f2_a", "f2_qubit"),
    ("f2_b", "f2_field"),
    ("purity_a", "purity_qubit"),
    ("purity_b", "purity_field"),
    ("variance_a", "variance_qubit"),
    ("variance_b", "variance_field"),
];

fn udw_at_dim(p: &UdwParams, dim: usize, grid: &[f64]) -> Result<Trajectory> {
    let fs = FockSpace::new(dim, 1.0, p.nu)?;
    let quadrature = HermitianObservable::new(fs.quadrature())?;
    let h = ProductInteraction::new(sigma_x_diagonal(), quadrature.scaled(p.nu), 1.0)?;
    let refs = References {
        a: sigma_x_diagonal(),
        b: quadrature,
    };
    let which: Vec<Diagnostic> = UDW_SERIES.iter().map(|(n, _)| n.parse().expect("valid name")).collect();
    let raw = sample_trajectory_with(&qubit_atom(p.alpha, p.delta)?, &vacuum(&fs), &h, grid, &which, &refs)?;
    let mut out = Trajectory::new(grid.to_vec());
    for (from, to) in UDW_SERIES {
        out.push(to, raw.get(from).expect("recorded").to_vec())?;
    }
    Ok(out)
}

fn max_series_deviation(x: &Trajectory, y: &Trajectory) -> f64 {
    x.series
        .iter()
        .zip(&y.series)
        .flat_map(|((_, a), (_, b))| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

/// Evolves `qubit_atom(α, δ) ⊗ |0⟩⟨0|` under `exp(i t ν σ_x ⊗ (a + a†))`
/// and records the qubit and field 2-fragilities (w.r.t. `σ_x` and
/// `a + a†`), purities and variances. The truncation starts at
/// `p.fock_dim` and doubles until two successive runs agree within
/// [`FOCK_CONVERGENCE_TOL`].
pub fn udw_numeric(p: &UdwParams, grid: &[f64]) -> Result<UdwRun> {
    check_grid(grid)?;
    let mut dim = p.fock_dim;
    let mut previous = udw_at_dim(p, dim, grid)?;
    let mut deviation = f64::INFINITY;
    while dim * 2 <= MAX_FOCK_DIM {
        dim *= 2;
        let next = udw_at_dim(p, dim, grid)?;
        deviation = max_series_deviation(&previous, &next);
        if deviation < FOCK_CONVERGENCE_TOL {
            return Ok(UdwRun {
                trajectory: next,
                fock_dim: dim,
                deviation,
            });
        }
        previous = next;
    }
    Err(Error::Truncation {
        max_dim: MAX_FOCK_DIM,
        deviation,
    })
}

/// `⟨0|e^{iθ(a+a†)}|0⟩` on a truncated mode by diagonalising `a + a†`.
pub fn vacuum_overlap_numeric(fock_dim: usize, theta: f64) -> Result<C64> {
    let fs = FockSpace::with_dim(fock_dim)?;
    let u = HermitianObservable::new(fs.quadrature())?
        .eigen()
        .map(|x| C64::new(0.0, theta * x).exp())?;
    Ok(u.get(0, 0))
}

// ---------------------------------------------------------------------------
// Thermal mode

/// `ν² · 4 sinh⁴(βω/2)/sinh²(βω)`, evaluated as `ν² tanh²(βω/2)` which is
/// the same function without overflow at large `βω`.
pub fn thermal_fragility_exact(beta: f64, omega: f64, nu: f64) -> Result<f64> {
    let x = beta * omega;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("need βω > 0, got {x}")));
    }
    let t = (0.5 * x).tanh();
    Ok(nu * nu * t * t)
}

/// 2-fragility of the truncated thermal state w.r.t. `ν(a + a†)`.
pub fn thermal_fragility_numeric(beta: f64, omega: f64, nu: f64, fock_dim: usize) -> Result<f64> {
    ThermalMode::new(omega, nu, fock_dim)?.fragility(beta)
}

/// Truncated mode with its coupling operator decomposed once, for sweeps
/// over temperature.
struct ThermalMode {
    fs: FockSpace,
    coupling: HermitianObservable,
}

impl ThermalMode {
    fn new(omega: f64, nu: f64, fock_dim: usize) -> Result<Self> {
        let fs = FockSpace::new(fock_dim, omega, nu)?;
        let coupling = HermitianObservable::new(fs.quadrature().scale_real(nu))?;
        Ok(Self { fs, coupling })
    }

    fn fragility(&self, beta: f64) -> Result<f64> {
        fragility_2(&thermal_state(&self.fs, beta)?, &self.coupling)
    }
}

// ---------------------------------------------------------------------------
// Normal ordering of powers of a + a†

fn checked_binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Coefficients `(k, c_k)` with `(a + a†)ⁿ = Σ_k c_k Ω_k`, highest `k`
/// first, where `Ω_k = Σ_i C(k, i) a†^{k−i} aⁱ` and `Ω_0 = 1`. Each
/// contraction of a pair of factors contributes one; `c_{n−2i} =
/// (2i − 1)!! C(n, 2i)`.
pub fn normal_order_expand(n: u32) -> Result<Vec<(u32, u128)>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("normal ordering needs n >= 2, got {n}")));
    }
    let overflow = || Error::InvalidArgument(format!("coefficients of (a + a†)^{n} overflow u128"));
    let mut out = Vec::with_capacity(n as usize / 2 + 1);
    let mut double_factorial: u128 = 1;
    for i in 0..=n / 2 {
        if i > 0 {
            double_factorial = double_factorial.checked_mul(2 * i as u128 - 1).ok_or_else(overflow)?;
        }
        let c = checked_binomial(n as u128, 2 * i as u128).ok_or_else(overflow)?;
        out.push((n - 2 * i, c.checked_mul(double_factorial).ok_or_else(overflow)?));
    }
    Ok(out)
}

/// `Ω_k` on a truncated mode.
pub fn normal_ordered_block(fs: &FockSpace, k: u32) -> ComplexMatrix {
    let a = fs.annihilation();
    let ad = fs.creation();
    let mut acc = ComplexMatrix::zeros(fs.dim);
    for i in 0..=k {
        let c = checked_binomial(k as u128, i as u128).expect("small binomial") as f64;
        let term = &ad.pow(k - i) * &a.pow(i);
        acc = &acc + &term.scale_real(c);
    }
    acc
}

/// Largest relative deviation between `Σ_k c_k Ω_k` and `(a + a†)ⁿ` on the
/// top-left block unaffected by the truncation edge.
pub fn normal_order_deviation(n: u32, dim: usize) -> Result<f64> {
    if dim <= n as usize {
        return Err(Error::InvalidArgument(format!(
            "truncation {dim} too small for n = {n}"
        )));
    }
    let fs = FockSpace::with_dim(dim)?;
    let power = fs.quadrature().pow(n);
    let mut sum = ComplexMatrix::zeros(dim);
    for (k, coef) in normal_order_expand(n)? {
        sum = &sum + &normal_ordered_block(&fs, k).scale_real(coef as f64);
    }
    let keep = dim - n as usize;
    let mut worst: f64 = 0.0;
    for i in 0..keep {
        for j in 0..keep {
            let scale = power.get(i, j).norm().max(1.0);
            worst = worst.max((power.get(i, j) - sum.get(i, j)).norm() / scale);
        }
    }
    Ok(worst)
}

/// `|0⟩` component of `exp(iθ(a + a†))|0⟩` summed through order `max_n`
/// of the exponential series. Only even orders contribute, each through the
/// vacuum moment `⟨0|(a + a†)^{2k}|0⟩ = (2k − 1)!!`, so the partial sums
/// approach `e^{−θ²/2}`.
pub fn expansion_vacuum_overlap(theta: f64, max_n: u32) -> C64 {
    let step = -0.5 * theta * theta;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=max_n / 2 {
        term *= step / k as f64;
        sum += term;
    }
    cplx(sum)
}

// ---------------------------------------------------------------------------
// Scenario configuration

/// Complex parameter given as a number or as `[re, im]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

fn de_complex<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
    Ok(match ComplexValue::deserialize(d)? {
        ComplexValue::Real(x) => cplx(x),
        ComplexValue::Pair([re, im]) => C64::new(re, im),
    })
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max: f64,
    pub points: usize,
}

/// `{"scenario": name, "params": {...}, "grid": {"t_max": x, "points": n},
/// "fock_dim": n}`; every field optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<String>,
    #[serde(default)]
    pub params: serde_json::Value,
    pub grid: Option<GridSpec>,
    pub fock_dim: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn params<T: serde::de::DeserializeOwned + Default>(&self) -> Result<T> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        Ok(serde_json::from_value(self.params.clone())?)
    }

    fn grid(&self, t_max: f64, points: usize) -> Result<Vec<f64>> {
        let spec = self.grid.unwrap_or(GridSpec { t_max, points });
        if !(spec.t_max > 0.0) || !spec.t_max.is_finite() || spec.points < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs t_max > 0 and at least 2 points, got {spec:?}"
            )));
        }
        Ok(uniform_grid(spec.t_max, spec.points))
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Case1Config {
    #[serde(deserialize_with = "de_complex")]
    r: C64,
    #[serde(deserialize_with = "de_complex")]
    s: C64,
    eps: f64,
    b_gap: f64,
}

impl Default for Case1Config {
    fn default() -> Self {
        Self {
            r: cplx(1.0),
            s: cplx(1.0),
            eps: 1.0,
            b_gap: 1.0,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Case2Config {
    #[serde(deserialize_with = "de_complex")]
    r: C64,
    #[serde(deserialize_with = "de_complex")]
    s: C64,
    eps: f64,
}

impl Default for Case2Config {
    fn default() -> Self {
        Self {
            r: cplx(0.5),
            s: cplx(0.0),
            eps: 1.0,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FockEnvConfig {
    #[serde(deserialize_with = "de_complex")]
    r: C64,
    #[serde(deserialize_with = "de_complex")]
    p: C64,
    #[serde(deserialize_with = "de_complex")]
    s: C64,
    eps: f64,
}

impl Default for FockEnvConfig {
    fn default() -> Self {
        Self {
            r: cplx(0.5),
            p: cplx(0.2),
            s: cplx(0.0),
            eps: 1.0,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct UdwConfig {
    #[serde(deserialize_with = "de_complex")]
    alpha: C64,
    delta: f64,
    nu: f64,
}

impl Default for UdwConfig {
    fn default() -> Self {
        Self {
            alpha: cplx(0.3),
            delta: 0.4,
            nu: 1.0,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ThermalSweepConfig {
    beta_min: f64,
    beta_max: f64,
    omega: f64,
    nu: f64,
}

impl Default for ThermalSweepConfig {
    fn default() -> Self {
        Self {
            beta_min: 0.1,
            beta_max: 10.0,
            omega: 1.0,
            nu: 1.0,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ComparisonConfig {
    /// `[δ, α]` pairs.
    states: Vec<[f64; 2]>,
    nu: f64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            states: vec![[0.4, 0.3], [0.5, 0.5], [0.3, 0.3], [0.5, 0.1]],
            nu: 1.0,
        }
    }
}

pub const SCENARIO_NAMES: [&str; 6] = [
    "case1",
    "case2",
    "fock-env",
    "udw",
    "thermal-sweep",
    "fragility-comparison",
];

/// Output of a named scenario: the data plus remarks for the operator.
#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub trajectory: Trajectory,
    pub notes: Vec<String>,
}

impl From<Trajectory> for ScenarioOutput {
    fn from(trajectory: Trajectory) -> Self {
        Self {
            trajectory,
            notes: Vec::new(),
        }
    }
}

/// Thermal sweep over `βω`: exact and truncated 2-fragility of the field.
pub fn thermal_sweep(betas: &[f64], omega: f64, nu: f64, fock_dim: usize) -> Result<Trajectory> {
    let mut traj = Trajectory::with_axis("beta", betas.to_vec());
    let exact = betas
        .iter()
        .map(|&b| thermal_fragility_exact(b, omega, nu))
        .collect::<Result<_>>()?;
    let mode = ThermalMode::new(omega, nu, fock_dim)?;
    let numeric = betas.iter().map(|&b| mode.fragility(b)).collect::<Result<_>>()?;
    traj.push("temperature", betas.iter().map(|b| 1.0 / b).collect())?;
    traj.push("f2_exact", exact)?;
    traj.push("f2_numeric", numeric)?;
    Ok(traj)
}

fn state_tag(delta: f64, alpha: f64) -> String {
    format!("d{delta}_a{alpha}")
}

/// Field and qubit 2-fragilities with their ratios to the (constant)
/// variances, one group of columns per `(δ, α)`.
pub fn fragility_comparison(states: &[(f64, C64)], nu: f64, fock_dim: usize, grid: &[f64]) -> Result<ScenarioOutput> {
    let mut traj = Trajectory::new(grid.to_vec());
    let mut notes = Vec::new();
    for &(delta, alpha) in states {
        let run = udw_numeric(&UdwParams::new(alpha, delta, nu, fock_dim)?, grid)?;
        let tag = state_tag(delta, alpha.re);
        let get = |name: &str| run.trajectory.get(name).expect("recorded").to_vec();
        let (ff, fq, vf, vq) = (
            get("f2_field"),
            get("f2_qubit"),
            get("variance_field"),
            get("variance_qubit"),
        );
        traj.push(format!("f2_field_{tag}"), ff.clone())?;
        traj.push(format!("f2_qubit_{tag}"), fq.clone())?;
        traj.push(
            format!("ratio_field_{tag}"),
            ff.iter().zip(&vf).map(|(f, v)| f / v).collect(),
        )?;
        if vq.iter().all(|&v| v > 0.0) {
            traj.push(
                format!("ratio_qubit_{tag}"),
                fq.iter().zip(&vq).map(|(f, v)| f / v).collect(),
            )?;
        }
        notes.push(format!(
            "{tag}: Fock truncation {} (deviation {:.2e})",
            run.fock_dim, run.deviation
        ));
    }
    Ok(ScenarioOutput {
        trajectory: traj,
        notes,
    })
}

/// Runs a scenario by name with optional configuration overrides.
pub fn run_scenario(name: &str, config: &ScenarioConfig) -> Result<ScenarioOutput> {
    if let Some(declared) = &config.scenario {
        if declared != name {
            return Err(Error::InvalidArgument(format!(
                "configuration is for scenario `{declared}`, not `{name}`"
            )));
        }
    }
    match name {
        "case1" => {
            let c: Case1Config = config.params()?;
            let p = Case1Params::new(c.r, c.s, c.eps, c.b_gap)?;
            Ok(case1_trajectory(&p, &config.grid(std::f64::consts::PI, 50)?)?.into())
        }
        "case2" => {
            let c: Case2Config = config.params()?;
            Ok(case2_trajectory(c.r, c.s, c.eps, &config.grid(2.0 * std::f64::consts::PI, 50)?)?.into())
        }
        "fock-env" => {
            let c: FockEnvConfig = config.params()?;
            let dim = config.fock_dim.unwrap_or(8);
            let grid = config.grid(2.0 * std::f64::consts::PI, 50)?;
            Ok(fock_env_scenario(c.r, c.p, c.s, c.eps, dim, &grid)?.into())
        }
        "udw" => {
            let c: UdwConfig = config.params()?;
            let p = UdwParams::new(c.alpha, c.delta, c.nu, config.fock_dim.unwrap_or(DEFAULT_FOCK_DIM))?;
            let grid = config.grid(1.5, 50)?;
            let run = udw_numeric(&p, &grid)?;
            let mut traj = run.trajectory;
            traj.push(
                "f2_qubit_exact",
                grid.iter().map(|&t| udw_qubit_fragility_exact(&p, t)).collect(),
            )?;
            let coherent = grid
                .iter()
                .map(|&t| udw_field_fragility_coherent(p.delta, p.nu, t))
                .collect::<Result<_>>()?;
            traj.push("f2_field_coherent", coherent)?;
            Ok(ScenarioOutput {
                trajectory: traj,
                notes: vec![format!(
                    "Fock truncation {} (deviation {:.2e})",
                    run.fock_dim, run.deviation
                )],
            })
        }
        "thermal-sweep" => {
            let c: ThermalSweepConfig = config.params()?;
            if !(c.beta_min > 0.0 && c.beta_max > c.beta_min) {
                return Err(Error::InvalidArgument("need 0 < beta_min < beta_max".into()));
            }
            let points = config.grid.map_or(50, |g| g.points);
            if points < 2 {
                return Err(Error::InvalidArgument("thermal sweep needs at least 2 points".into()));
            }
            let betas: Vec<f64> = uniform_grid(c.beta_max - c.beta_min, points)
                .into_iter()
                .map(|x| c.beta_min + x)
                .collect();
            Ok(thermal_sweep(&betas, c.omega, c.nu, config.fock_dim.unwrap_or(MAX_FOCK_DIM))?.into())
        }
        "fragility-comparison" => {
            let c: ComparisonConfig = config.params()?;
            let states: Vec<(f64, C64)> = c.states.iter().map(|&[d, a]| (d, cplx(a))).collect();
            let grid = config.grid(1.5, 50)?;
            fragility_comparison(&states, c.nu, config.fock_dim.unwrap_or(DEFAULT_FOCK_DIM), &grid)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown scenario `{other}`; expected one of {}",
            SCENARIO_NAMES.join(", ")
        ))),
    }
}

/// Reduced states of a product state evolved under `h`, for callers that
/// need the matrices rather than scalars.
pub fn reduced_pair(joint: &DensityMatrix, dims: (usize, usize)) -> Result<(DensityMatrix, DensityMatrix)> {
    let a = partial_trace(joint.matrix(), dims, Subsystem::B)?;
    let b = partial_trace(joint.matrix(), dims, Subsystem::A)?;
    Ok((DensityMatrix::new_unchecked(a), DensityMatrix::new_unchecked(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::mixedness;
    use crate::dynamics::evolve;
    use crate::matrix::{expi, kron};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn case1_special_values() {
        let p = Case1Params::new(c(0.0, 0.0), c(0.7, 0.1), 1.3, 0.8).unwrap();
        for t in [0.0, 0.4, 3.0] {
            assert_eq!(case1_mixedness(&p, t), 0.0);
        }
        let s2: f64 = 0.5;
        let p = Case1Params::new(c(0.0, 0.0), c(s2.sqrt(), 0.0), 1.0, 1.0).unwrap();
        assert!((case1_coherence(&p, 2.0) - 2.0 * s2 / ((1.0 + s2) * (1.0 + s2))).abs() < 1e-15);

        let p = Case1Params::new(c(1.0, 0.0), c(1.0, 0.0), 0.5, 2.0).unwrap();
        for t in [0.0, 0.3, 1.1] {
            let theta = 2.0 * p.eps * t * p.b_gap;
            assert!((case1_mixedness(&p, t) - (1.0 - (3.0 + theta.cos()) / 4.0)).abs() < 1e-15);
        }
        let t_pi = PI / (2.0 * p.eps * p.b_gap);
        assert!((case1_mixedness(&p, t_pi) - 0.5).abs() < 1e-15);

        let p = Case1Params::new(c(0.4, 0.3), c(0.0, 0.0), 1.0, 1.0).unwrap();
        assert_eq!(case1_coherence(&p, 0.7), 0.0);
    }

    #[test]
    fn case1_closed_forms_match_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = uniform_grid(6.0, 50);
        for _ in 0..20 {
            let p = Case1Params::new(
                c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                rng.random_range(0.2..2.0),
                rng.random_range(0.2..2.0),
            )
            .unwrap();
            let traj = case1_trajectory(&p, &grid).unwrap();
            let pairs = [
                ("mixedness_b", "mixedness_exact"),
                ("coherence_b", "coherence_exact"),
                ("variance_b", "variance_exact"),
            ];
            for (num, exact) in pairs {
                let (x, y) = (traj.get(num).unwrap(), traj.get(exact).unwrap());
                for k in 0..grid.len() {
                    assert!(
                        (x[k] - y[k]).abs() < 1e-10,
                        "{num} at {}: {} vs {}",
                        grid[k],
                        x[k],
                        y[k]
                    );
                }
            }
            let m = traj.get("mixedness_b").unwrap();
            let co = traj.get("coherence_b").unwrap();
            let sum0 = m[0] + co[0];
            assert!(m.iter().zip(co).all(|(a, b)| (a + b - sum0).abs() < 1e-10));
            assert!(grid.iter().all(|&t| (case1_mixedness(&p, t) + case1_coherence(&p, t)
                - case1_mixedness(&p, 0.0)
                - case1_coherence(&p, 0.0))
            .abs()
                < 1e-12));
        }
        let degenerate = Case1Params::new(c(1.0, 0.0), c(1.0, 0.0), 1.0, 0.0).unwrap();
        assert!(case1_trajectory(&degenerate, &grid).is_err());
    }

    #[test]
    fn case2_reference_values() {
        let (r, s) = (c(0.3, -0.2), c(0.8, 0.5));
        let rho0 = case2_reduced_state(r, s, 1.0, 0.0).unwrap();
        let expected = s.conj() / (1.0 + s.norm_sqr());
        assert!((rho0.matrix().get(0, 1) - expected).norm() < 1e-15);
        for t in [0.0, 0.3, 1.2, 2.5] {
            let rho = case2_reduced_state(c(0.0, 0.0), c(0.0, 0.0), 0.9, t).unwrap();
            assert!((rho.matrix().get(0, 0).re - (0.9 * t).cos().powi(2)).abs() < 1e-15);
        }
    }

    #[test]
    fn case2_matches_dense_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let r = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let s = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let eps = rng.random_range(0.1..2.0);
            let joint = pure_qubit(r).tensor(&pure_qubit(s));
            let h = kron(&ComplexMatrix::from_diagonal(&[1.0, -1.0]), &pauli_y()).scale_real(eps);
            for t in uniform_grid(5.0, 50) {
                let dense = joint.transform(&expi(&h, t).unwrap());
                let (_, rho_b) = reduced_pair(&dense, (2, 2)).unwrap();
                let closed = case2_reduced_state(r, s, eps, t).unwrap();
                assert!(closed.matrix().max_abs_diff(rho_b.matrix()) < 1e-10);
                assert!(DensityMatrix::new(closed.into_matrix()).is_ok());
            }
        }
        let traj = case2_trajectory(c(1.0, 0.0), c(1.0, 0.0), 1.0, &uniform_grid(6.0, 30)).unwrap();
        assert!(traj.get("numeric_deviation").unwrap().iter().all(|&d| d < 1e-10));
        let v = traj.get("variance_b").unwrap();
        assert!(v.iter().all(|x| (x - 0.25).abs() < 1e-12));
    }

    #[test]
    fn fock_environment() {
        let grid = uniform_grid(2.0 * PI, 50);
        let traj = fock_env_scenario(c(0.5, 0.0), c(0.2, 0.0), c(0.0, 0.0), 1.0, 6, &grid).unwrap();
        assert!(traj
            .get("variance_relation_residual")
            .unwrap()
            .iter()
            .all(|r| r.abs() < 1e-10));
        assert!(traj.get("purity_b").unwrap().iter().any(|&g| g < 0.99));

        let single = fock_env_scenario(c(0.0, 0.0), c(0.0, 0.0), c(0.4, 0.2), 0.7, 4, &grid).unwrap();
        assert!(single.get("purity_b").unwrap().iter().all(|g| (g - 1.0).abs() < 1e-12));
        // A single level acts as a free rotation with period π/ε.
        let period = PI / 0.7;
        let rot = fock_env_scenario(c(0.0, 0.0), c(0.0, 0.0), c(0.4, 0.2), 0.7, 4, &[0.3, 0.3 + period]).unwrap();
        let cohs = rot.get("coherence_b").unwrap();
        assert!((cohs[0] - cohs[1]).abs() < 1e-12);

        assert!(fock_env_scenario(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 1.0, 3, &grid).is_err());
    }

    #[test]
    fn udw_closed_forms() {
        let p = UdwParams::new(c(0.3, 0.1), 0.4, 0.7, 32).unwrap();
        assert!((udw_qubit_fragility_exact(&p, 0.0) - 0.4).abs() < 1e-15);
        let zero = UdwParams::new(c(0.0, 0.0), 0.4, 1.0, 32).unwrap();
        assert_eq!(udw_qubit_fragility_exact(&zero, 0.8), 0.0);
        for d in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert!((udw_field_fragility_exact(d, 0.0).unwrap() - 1.0).abs() < 1e-15);
            assert!((udw_field_fragility_coherent(d, 1.3, 0.0).unwrap() - 1.0).abs() < 1e-15);
        }
        for t in [0.1, 0.7, 2.0] {
            assert!((udw_field_fragility_exact(0.0, t).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((udw_field_fragility_exact(0.5, 10.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(udw_field_fragility_exact(1.2, 0.1).is_err());
        assert!(UdwParams::new(c(0.5, 0.0), 0.1, 1.0, 32).is_err());
        assert!(UdwParams::new(c(0.1, 0.0), 0.1, 1.0, 4).is_err());
    }

    #[test]
    fn udw_qubit_fragility_from_vacuum_overlap() {
        let p = UdwParams::new(c(0.3, 0.0), 0.5, 1.0, 32).unwrap();
        let t = 0.5;
        let overlap = vacuum_overlap_numeric(32, 2.0 * p.nu * t).unwrap();
        assert!((4.0 * p.alpha.norm_sqr() * overlap.norm_sqr() - udw_qubit_fragility_exact(&p, t)).abs() < 1e-8);
    }

    #[test]
    fn udw_numeric_matches_closed_forms() {
        let grid = uniform_grid(1.5, 50);
        let p = UdwParams::new(c(0.2, 0.15), 0.3, 1.0, 32).unwrap();
        let run = udw_numeric(&p, &grid).unwrap();
        assert!(run.deviation < FOCK_CONVERGENCE_TOL);
        let traj = &run.trajectory;
        for (k, &t) in grid.iter().enumerate() {
            assert!((traj.get("f2_qubit").unwrap()[k] - udw_qubit_fragility_exact(&p, t)).abs() < 1e-8);
            let coherent = udw_field_fragility_coherent(p.delta, p.nu, t).unwrap();
            assert!((traj.get("f2_field").unwrap()[k] - coherent).abs() < 1e-8);
            assert!((traj.get("variance_field").unwrap()[k] - 1.0).abs() < 1e-9);
            assert!((traj.get("variance_qubit").unwrap()[k] - 4.0 * 0.3 * 0.7).abs() < 1e-9);
        }
        assert!((traj.get("f2_field").unwrap()[0] - 1.0).abs() < 1e-12);
        let fitted = fit_field_coefficient(p.delta, p.nu, &grid, traj.get("f2_field").unwrap()).unwrap();
        assert!((fitted - 8.0).abs() < 1e-6, "fitted {fitted}");
        let published = (1..grid.len())
            .map(|k| (traj.get("f2_field").unwrap()[k] - udw_field_fragility_exact(p.delta, grid[k]).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(published > 1e-3);
    }

    #[test]
    fn udw_fragilities_separate_in_parameters() {
        let grid = uniform_grid(1.5, 12);
        let run = |alpha: f64, delta: f64| {
            udw_numeric(&UdwParams::new(c(alpha, 0.0), delta, 1.0, 32).unwrap(), &grid)
                .unwrap()
                .trajectory
        };
        let base = run(0.1, 0.3);
        let other_alpha = run(0.4, 0.3);
        let other_delta = run(0.1, 0.5);
        let dev = |x: &Trajectory, y: &Trajectory, name: &str| {
            x.get(name)
                .unwrap()
                .iter()
                .zip(y.get(name).unwrap())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        assert!(dev(&base, &other_alpha, "f2_field") < 1e-8);
        assert!(dev(&base, &other_delta, "f2_qubit") < 1e-8);
        assert!(dev(&base, &other_alpha, "f2_qubit") > 1e-2);
    }

    #[test]
    fn thermal_closed_form() {
        let sinh_form = |x: f64| 4.0 * (0.5 * x).sinh().powi(4) / x.sinh().powi(2);
        for x in [0.01, 0.5, 1.0, 3.0, 10.0, 20.0] {
            assert!((thermal_fragility_exact(x, 1.0, 1.0).unwrap() - sinh_form(x)).abs() < 1e-12);
        }
        assert!((thermal_fragility_exact(2f64.ln(), 1.0, 1.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!((thermal_fragility_exact(50.0, 1.0, 0.7).unwrap() - 0.49).abs() < 1e-10);
        let small = thermal_fragility_exact(1e-3, 1.0, 1.0).unwrap();
        assert!((small / (1e-6 / 4.0) - 1.0).abs() < 1e-5);
        assert!(thermal_fragility_exact(0.0, 1.0, 1.0).is_err());
        assert!(thermal_fragility_exact(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn thermal_truncation_converges() {
        let exact = thermal_fragility_exact(2.0, 1.0, 1.0).unwrap();
        assert!((thermal_fragility_numeric(2.0, 1.0, 1.0, 64).unwrap() - exact).abs() < 1e-10);
        let exact = thermal_fragility_exact(0.5, 1.0, 1.0).unwrap();
        assert!((thermal_fragility_numeric(0.5, 1.0, 1.0, 128).unwrap() - exact).abs() < 1e-8);
        let fs = FockSpace::with_dim(16).unwrap();
        let vac = fragility_2(&vacuum(&fs), &HermitianObservable::new(fs.quadrature()).unwrap()).unwrap();
        assert!((vac - thermal_fragility_numeric(50.0, 1.0, 1.0, 16).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn normal_order_small_cases() {
        assert_eq!(normal_order_expand(2).unwrap(), vec![(2, 1), (0, 1)]);
        assert_eq!(normal_order_expand(3).unwrap(), vec![(3, 1), (1, 3)]);
        assert_eq!(normal_order_expand(4).unwrap(), vec![(4, 1), (2, 6), (0, 3)]);
        assert!(normal_order_expand(1).is_err());
        assert!(normal_order_expand(200).is_err());
    }

    #[test]
    fn normal_order_matches_brute_force() {
        for n in 2..=8 {
            for extra in [2, 5, 10] {
                assert!(
                    normal_order_deviation(n, n as usize + extra).unwrap() < 1e-10,
                    "n = {n}"
                );
            }
        }
        let fs = FockSpace::with_dim(10).unwrap();
        assert!((fs.quadrature().pow(4).get(0, 0).re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn vacuum_overlap_series() {
        assert_eq!(expansion_vacuum_overlap(0.0, 10), c(1.0, 0.0));
        assert!((expansion_vacuum_overlap(1.0, 40).re - (-0.5f64).exp()).abs() < 1e-12);
        for theta in [0.3, 1.0, 2.0] {
            let numeric = vacuum_overlap_numeric(64, theta).unwrap();
            assert!((expansion_vacuum_overlap(theta, 80) - numeric).norm() < 1e-10);
        }
    }

    #[test]
    fn scenario_configs() {
        let cfg = ScenarioConfig::from_json_str(
            r#"{"scenario": "case1", "params": {"r": [0.5, 0.1], "s": 1.0}, "grid": {"t_max": 2.0, "points": 11}}"#,
        )
        .unwrap();
        let out = run_scenario("case1", &cfg).unwrap();
        assert_eq!(out.trajectory.times.len(), 11);
        assert!(run_scenario("case2", &cfg).is_err());
        let bad = ScenarioConfig::from_json_str(r#"{"params": {"rr": 1.0}}"#).unwrap();
        assert!(run_scenario("case1", &bad).is_err());
        assert!(ScenarioConfig::from_json_str(r#"{"grid": {"t_max": 1.0}}"#).is_err());
        assert!(run_scenario("nope", &ScenarioConfig::default()).is_err());
        for name in ["case2", "fock-env"] {
            assert_eq!(
                run_scenario(name, &ScenarioConfig::default())
                    .unwrap()
                    .trajectory
                    .times
                    .len(),
                50
            );
        }
    }

    #[test]
    fn thermal_sweep_is_monotone() {
        let out = run_scenario("thermal-sweep", &ScenarioConfig::default()).unwrap();
        let f = out.trajectory.get("f2_numeric").unwrap();
        assert!(f.windows(2).all(|w| w[1] > w[0]));
        assert!(*f.last().unwrap() > 0.99);
    }

    #[test]
    fn evolve_agrees_with_case1_closed_form() {
        let p = Case1Params::new(c(0.3, 0.0), c(0.9, -0.2), 1.0, 1.0).unwrap();
        let (ra, rb) = p.initial_states();
        let joint = evolve(&ra.tensor(&rb), &p.interaction(), 0.6).unwrap();
        let (_, sys) = reduced_pair(&joint, (2, 2)).unwrap();
        assert!((mixedness(&sys) - case1_mixedness(&p, 0.6)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn case1_sum_is_conserved(rr in -3.0..3.0f64, ri in -3.0..3.0f64, sr in -3.0..3.0f64, si in -3.0..3.0f64,
                                  eps in 0.0..3.0f64, gap in -3.0..3.0f64, t in 0.0..20.0f64) {
            let p = Case1Params::new(c(rr, ri), c(sr, si), eps, gap).unwrap();
            let sum = case1_mixedness(&p, t) + case1_coherence(&p, t);
            let sum0 = case1_mixedness(&p, 0.0) + case1_coherence(&p, 0.0);
            prop_assert!((sum - sum0).abs() < 1e-12);
            prop_assert!((-1e-15..=0.5 + 1e-15).contains(&case1_mixedness(&p, t)));
        }

        #[test]
        fn case2_state_is_valid(rr in -3.0..3.0f64, sr in -3.0..3.0f64, si in -3.0..3.0f64, t in -5.0..5.0f64) {
            let rho = case2_reduced_state(c(rr, 0.0), c(sr, si), 1.0, t).unwrap();
            prop_assert!(DensityMatrix::new(rho.into_matrix()).is_ok());
        }

        #[test]
        fn vacuum_series_converges(theta in 0.0..2.0f64) {
            prop_assert!((expansion_vacuum_overlap(theta, 60).re - (-0.5 * theta * theta).exp()).abs() < 1e-12);
        }
    }
}
