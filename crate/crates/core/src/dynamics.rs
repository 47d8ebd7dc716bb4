//! Bipartite evolution under `U(t) = exp(i ε t A⊗B)`, trajectory sampling,
//! and finite-difference checks of the short-time expansions of n-purities
//! and entropies.
//!
//! Free Hamiltonians are not modelled; the interaction is the whole
//! generator.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diagnostics::{
    coherence_2norm, expectation, mixedness, n_purity, purity, renyi_entropy, variance, von_neumann_entropy,
    HermitianObservable, RenyiOrder,
};
use crate::error::{Error, Result};
use crate::fragility::{fragility_1, fragility_2, fragility_n, DEFAULT_EIGEN_FLOOR};
use crate::matrix::{commutator, herm_eig, kron, kron_sandwich, partial_trace, ComplexMatrix, Subsystem, C64};
use crate::states::DensityMatrix;

/// Default finite-difference step, in units where `ε‖A‖‖B‖ ~ 1`.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Interaction `H = ε A⊗B`, ancilla factor first.
#[derive(Clone, Debug)]
pub struct ProductInteraction {
    pub a: HermitianObservable,
    pub b: HermitianObservable,
    pub coupling: f64,
}

impl ProductInteraction {
    pub fn new(a: HermitianObservable, b: HermitianObservable, coupling: f64) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling {coupling} is not finite")));
        }
        Ok(Self { a, b, coupling })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a.dim(), self.b.dim())
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        kron(self.a.matrix(), self.b.matrix()).scale_real(self.coupling)
    }

    /// Same interaction with the tensor factors exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
            coupling: self.coupling,
        }
    }
}

/// Precomputed propagation of one initial state.
///
/// The generator `A⊗B` is diagonal in the product of the factor eigenbases,
/// so only the factor decompositions are needed; each time step is a phase
/// multiplication and one change of basis.
pub struct Propagator {
    basis_a: ComplexMatrix,
    basis_b: ComplexMatrix,
    energies: Vec<f64>,
    initial: ComplexMatrix,
    coupling: f64,
    dims: (usize, usize),
}

impl Propagator {
    pub fn new(rho0: &DensityMatrix, h: &ProductInteraction) -> Result<Self> {
        let (da, db) = h.dims();
        if rho0.dim() != da * db {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for interaction on {da} x {db}",
                rho0.dim()
            )));
        }
        let basis_a = h.a.eigen().eigenvectors.clone();
        let basis_b = h.b.eigen().eigenvectors.clone();
        let energies =
            h.a.eigenvalues()
                .iter()
                .flat_map(|&x| h.b.eigenvalues().iter().map(move |&y| x * y))
                .collect();
        Ok(Self {
            initial: kron_sandwich(&basis_a.adjoint(), &basis_b.adjoint(), rho0.matrix())?,
            basis_a,
            basis_b,
            energies,
            coupling: h.coupling,
            dims: (da, db),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Joint state `U(t) ρ₀ U(t)†`.
    pub fn state_at(&self, t: f64) -> DensityMatrix {
        let n = self.energies.len();
        let phase = self.coupling * t;
        let rotated = ComplexMatrix::from_fn(n, |p, q| {
            self.initial.get(p, q) * C64::new(0.0, phase * (self.energies[p] - self.energies[q])).exp()
        });
        let back = kron_sandwich(&self.basis_a, &self.basis_b, &rotated).expect("dimensions checked at construction");
        DensityMatrix::new_unchecked(back)
    }

    /// Reduced state of the side that is kept (`over` is traced out).
    pub fn reduced_at(&self, t: f64, over: Subsystem) -> DensityMatrix {
        let joint = self.state_at(t);
        let m = partial_trace(joint.matrix(), self.dims, over).expect("dimensions checked at construction");
        DensityMatrix::new_unchecked(m)
    }
}

/// `U(t) ρ₀ U(t)†` with `U(t) = exp(i ε t A⊗B)`.
pub fn evolve(rho0: &DensityMatrix, h: &ProductInteraction, t: f64) -> Result<DensityMatrix> {
    Ok(Propagator::new(rho0, h)?.state_at(t))
}

/// `exp(i t H) ρ exp(−i t H)` for a single closed system.
pub fn evolve_closed(rho: &DensityMatrix, h: &HermitianObservable, t: f64) -> Result<DensityMatrix> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} with generator of dimension {}",
            rho.dim(),
            h.dim()
        )));
    }
    let u = h.eigen().map(|x| C64::new(0.0, t * x).exp())?;
    Ok(rho.transform(&u))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    fn traced(self) -> Subsystem {
        match self {
            Side::A => Subsystem::B,
            Side::B => Subsystem::A,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Side::A => "a",
            Side::B => "b",
        }
    }
}

/// Scalar recorded along a trajectory, evaluated on the reduced state of
/// one side. Coherence, variance and fragilities use that side's reference
/// observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Diagnostic {
    Purity(Side),
    Mixedness(Side),
    Coherence(Side),
    Variance(Side),
    /// `f_n`; order 1 is the von Neumann fragility.
    Fragility(Side, u32),
    Renyi(Side, RenyiOrder),
}

impl Diagnostic {
    pub fn side(&self) -> Side {
        match *self {
            Diagnostic::Purity(s)
            | Diagnostic::Mixedness(s)
            | Diagnostic::Coherence(s)
            | Diagnostic::Variance(s)
            | Diagnostic::Fragility(s, _)
            | Diagnostic::Renyi(s, _) => s,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.side().suffix();
        match self {
            Diagnostic::Purity(_) => write!(f, "purity_{s}"),
            Diagnostic::Mixedness(_) => write!(f, "mixedness_{s}"),
            Diagnostic::Coherence(_) => write!(f, "coherence_{s}"),
            Diagnostic::Variance(_) => write!(f, "variance_{s}"),
            Diagnostic::Fragility(_, n) => write!(f, "f{n}_{s}"),
            Diagnostic::Renyi(_, RenyiOrder::VonNeumann) => write!(f, "vn_{s}"),
            Diagnostic::Renyi(_, RenyiOrder::Integer(n)) => write!(f, "renyi{n}_{s}"),
        }
    }
}

impl FromStr for Diagnostic {
    type Err = Error;

    /// Names look like `purity_b`, `coherence_a`, `f2_b`, `renyi3_a`, `vn_b`.
    fn from_str(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownDiagnostic(name.to_string());
        let (stem, side) = name.rsplit_once('_').ok_or_else(unknown)?;
        let side = match side {
            "a" | "A" => Side::A,
            "b" | "B" => Side::B,
            _ => return Err(unknown()),
        };
        let order = |digits: &str| digits.parse::<u32>().ok().filter(|&n| n >= 1);
        Ok(match stem {
            "purity" => Diagnostic::Purity(side),
            "mixedness" => Diagnostic::Mixedness(side),
            "coherence" => Diagnostic::Coherence(side),
            "variance" => Diagnostic::Variance(side),
            "vn" => Diagnostic::Renyi(side, RenyiOrder::VonNeumann),
            _ => {
                if let Some(d) = stem.strip_prefix("renyi") {
                    match order(d).ok_or_else(unknown)? {
                        1 => Diagnostic::Renyi(side, RenyiOrder::VonNeumann),
                        n => Diagnostic::Renyi(side, RenyiOrder::Integer(n)),
                    }
                } else if let Some(d) = stem.strip_prefix('f') {
                    Diagnostic::Fragility(side, order(d).ok_or_else(unknown)?)
                } else {
                    return Err(unknown());
                }
            }
        })
    }
}

/// Uniform ascending grid of `points` times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect(),
    }
}

/// Time grid plus named scalar series of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub axis: String,
    pub times: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>) -> Self {
        Self::with_axis("t", times)
    }

    pub fn with_axis(axis: &str, times: Vec<f64>) -> Self {
        Self {
            axis: axis.to_string(),
            times,
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch(format!(
                "series `{name}` has {} values for {} grid points",
                values.len(),
                self.times.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(self.times[k]));
        }
        self.series.push((name, values));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.series.iter().map(|(n, _)| n.as_str())
    }

    /// Header `t,<name1>,...`, one row per grid point, 17 significant digits,
    /// LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.axis);
        for (name, _) in &self.series {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&format_value(*t));
            for (_, values) in &self.series {
                out.push(',');
                out.push_str(&format_value(values[k]));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// 17 significant digits, round-trip exact; negative zero prints as zero.
pub fn format_value(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Reference observables for the diagnostics on each side.
#[derive(Clone, Debug)]
pub struct References {
    pub a: HermitianObservable,
    pub b: HermitianObservable,
}

impl References {
    pub fn from_interaction(h: &ProductInteraction) -> Self {
        Self {
            a: h.a.clone(),
            b: h.b.clone(),
        }
    }

    fn side(&self, s: Side) -> &HermitianObservable {
        match s {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

/// Evaluates one diagnostic on an already reduced state.
pub fn evaluate(diag: Diagnostic, rho: &DensityMatrix, reference: &HermitianObservable) -> Result<f64> {
    match diag {
        Diagnostic::Purity(_) => Ok(purity(rho)),
        Diagnostic::Mixedness(_) => Ok(mixedness(rho)),
        Diagnostic::Coherence(_) => coherence_2norm(rho, reference),
        Diagnostic::Variance(_) => variance(rho, reference),
        Diagnostic::Fragility(_, 1) => fragility_1(rho, reference, DEFAULT_EIGEN_FLOOR),
        Diagnostic::Fragility(_, 2) => fragility_2(rho, reference),
        Diagnostic::Fragility(_, n) => fragility_n(rho, reference, n),
        Diagnostic::Renyi(_, order) => renyi_entropy(rho, order),
    }
}

/// Evolves `ρ_A ⊗ ρ_B` over `grid` and records `which` on the reduced
/// states, using the interaction factors as reference observables.
pub fn sample_trajectory(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    h: &ProductInteraction,
    grid: &[f64],
    which: &[Diagnostic],
) -> Result<Trajectory> {
    sample_trajectory_with(rho_a, rho_b, h, grid, which, &References::from_interaction(h))
}

/// As [`sample_trajectory`] with caller-supplied reference observables.
/// Grid points are evaluated in parallel; the output does not depend on
/// scheduling.
pub fn sample_trajectory_with(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    h: &ProductInteraction,
    grid: &[f64],
    which: &[Diagnostic],
    refs: &References,
) -> Result<Trajectory> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("time grid must be strictly ascending".into()));
    }
    if refs.a.dim() != rho_a.dim() || refs.b.dim() != rho_b.dim() {
        return Err(Error::DimensionMismatch(
            "reference observables do not match the states".into(),
        ));
    }
    let mut trajectory = Trajectory::new(grid.to_vec());
    if which.is_empty() {
        return Ok(trajectory);
    }
    let prop = Propagator::new(&rho_a.tensor(rho_b), h)?;
    let need_a = which.iter().any(|d| d.side() == Side::A);
    let need_b = which.iter().any(|d| d.side() == Side::B);
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&t| -> Result<Vec<f64>> {
            let joint = prop.state_at(t);
            let reduce = |side: Side| {
                partial_trace(joint.matrix(), prop.dims(), side.traced()).map(DensityMatrix::new_unchecked)
            };
            let ra = if need_a { Some(reduce(Side::A)?) } else { None };
            let rb = if need_b { Some(reduce(Side::B)?) } else { None };
            which
                .iter()
                .map(|d| {
                    let rho = match d.side() {
                        Side::A => ra.as_ref(),
                        Side::B => rb.as_ref(),
                    }
                    .expect("reduced state computed for every requested side");
                    evaluate(*d, rho, refs.side(d.side()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    for (k, d) in which.iter().enumerate() {
        trajectory.push(d.to_string(), rows.iter().map(|r| r[k]).collect())?;
    }
    Ok(trajectory)
}

/// Derivative order for [`fd_derivative`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdOrder {
    First,
    Second,
}

/// Five-point central difference, truncation error `O(step⁴)`.
pub fn fd_derivative(mut f: impl FnMut(f64) -> f64, t0: f64, order: FdOrder, step: f64) -> Result<f64> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {step} must be positive"
        )));
    }
    let mut sample = |t: f64| {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteSample(t))
        }
    };
    let h = step;
    let (m2, m1, p1, p2) = (
        sample(t0 - 2.0 * h)?,
        sample(t0 - h)?,
        sample(t0 + h)?,
        sample(t0 + 2.0 * h)?,
    );
    Ok(match order {
        FdOrder::First => (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
        FdOrder::Second => {
            let c = sample(t0)?;
            (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h)
        }
    })
}

/// A numeric value next to the prediction it is checked against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub numeric: f64,
    pub predicted: f64,
}

impl Comparison {
    pub fn abs_error(&self) -> f64 {
        (self.numeric - self.predicted).abs()
    }

    /// Error relative to the prediction; absolute when the prediction is
    /// zero.
    pub fn relative_error(&self) -> f64 {
        let scale = self.predicted.abs();
        if scale > 0.0 {
            self.abs_error() / scale
        } else {
            self.abs_error()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OnsetOptions {
    pub n: u32,
    pub step: f64,
    /// Also check `S̈(0) = 2 ε² (ΔA)² f_1`; fails if `ρ_B` has an eigenvalue
    /// below `eigen_floor`.
    pub check_von_neumann: bool,
    pub eigen_floor: f64,
}

impl OnsetOptions {
    pub fn new(n: u32) -> Self {
        Self {
            n,
            step: DEFAULT_FD_STEP,
            check_von_neumann: false,
            eigen_floor: DEFAULT_EIGEN_FLOOR,
        }
    }
}

/// Short-time behaviour of the system's entropies for a product initial
/// state.
#[derive(Clone, Debug)]
pub struct OnsetReport {
    pub n: u32,
    /// `γ̇_n(0)`, zero in exact arithmetic.
    pub first_derivative: f64,
    /// `γ̈_n(0)` by finite differences against `−4 ε² (ΔA)² f_n`.
    pub second_derivative: Comparison,
    /// For pure `ρ_B`: `γ̈_2(0)` against `−4 ε² (ΔA)² (ΔB)²`.
    pub pure_state: Option<Comparison>,
    /// `S̈(0)` against `2 ε² (ΔA)² f_1`, when requested.
    pub von_neumann: Option<Comparison>,
    /// `γ̈_n(0)` for `ρ_B` evolving alone under `exp(i ε t B)`, by finite
    /// differences and by the closed expression; both vanish.
    pub unipartite_fd: f64,
    pub unipartite_analytic: f64,
}

/// Checks the onset identities for `ρ_A ⊗ ρ_B` under `h`.
pub fn onset_identities(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    h: &ProductInteraction,
    opts: &OnsetOptions,
) -> Result<OnsetReport> {
    let n = opts.n;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("onset identities need n >= 2, got {n}")));
    }
    let eps2 = h.coupling * h.coupling;
    let var_a = variance(rho_a, &h.a)?;
    let prop = Propagator::new(&rho_a.tensor(rho_b), h)?;
    let system = |t: f64| prop.reduced_at(t, Subsystem::A);
    let gamma = |t: f64| n_purity(&system(t), n).expect("n >= 2");

    let first_derivative = fd_derivative(gamma, 0.0, FdOrder::First, opts.step)?;
    let second_derivative = Comparison {
        numeric: fd_derivative(gamma, 0.0, FdOrder::Second, opts.step)?,
        predicted: -4.0 * eps2 * var_a * fragility_n(rho_b, &h.b, n)?,
    };

    let pure_state = if purity(rho_b) > 1.0 - 1e-10 {
        let g2 = |t: f64| purity(&system(t));
        Some(Comparison {
            numeric: fd_derivative(g2, 0.0, FdOrder::Second, opts.step)?,
            predicted: -4.0 * eps2 * var_a * variance(rho_b, &h.b)?,
        })
    } else {
        None
    };

    let von_neumann = if opts.check_von_neumann {
        let f1 = fragility_1(rho_b, &h.b, opts.eigen_floor)?;
        let s = |t: f64| von_neumann_entropy(&system(t));
        Some(Comparison {
            numeric: fd_derivative(s, 0.0, FdOrder::Second, opts.step)?,
            predicted: 2.0 * eps2 * var_a * f1,
        })
    } else {
        None
    };

    let closed = |t: f64| {
        let rho = evolve_closed(rho_b, &h.b, h.coupling * t).expect("dimensions match");
        n_purity(&rho, n).expect("n >= 2")
    };
    let unipartite_fd = fd_derivative(closed, 0.0, FdOrder::Second, opts.step)?;
    let unipartite_analytic = eps2 * unipartite_second_derivative(rho_b, h.b.matrix(), n)?;

    Ok(OnsetReport {
        n,
        first_derivative,
        second_derivative,
        pure_state,
        von_neumann,
        unipartite_fd,
        unipartite_analytic,
    })
}

/// `γ̈_n` for a single system evolving under `exp(−i t H)`:
/// `n Tr[Σ_i −ρⁱ[H,ρ]ρⁿ⁻²⁻ⁱ[H,ρ] + 2ρⁿ⁻¹HρH − 2ρⁿH²]`, identically zero.
pub fn unipartite_second_derivative(rho: &DensityMatrix, h: &ComplexMatrix, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be >= 2, got {n}")));
    }
    let r = rho.matrix();
    let c = commutator(h, r)?;
    let powers: Vec<ComplexMatrix> = (0..=n).map(|k| r.pow(k)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..=(n - 2) as usize {
        let term = &(&powers[i] * &c) * &powers[n as usize - 2 - i];
        acc -= term.trace_product(&c);
    }
    let hrh = &(h * r) * h;
    acc += powers[n as usize - 1].trace_product(&hrh) * 2.0;
    acc -= powers[n as usize].trace_product(&(h * h)) * 2.0;
    Ok(n as f64 * acc.re)
}

/// `γ̈_n(0)` for `ρ_A ⊗ ρ_B` from the unsimplified expansion
/// `−n⟨A⟩² Tr[C Σ ρⁱ C ρⁿ⁻²⁻ⁱ] + 2n⟨A²⟩ Tr[ρⁿ⁻¹ C B]` with `C = [B, ρ_B]`,
/// times `ε²`.
pub fn bipartite_second_derivative(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    h: &ProductInteraction,
    n: u32,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be >= 2, got {n}")));
    }
    let mean_a = expectation(rho_a, &h.a)?;
    let a2 = HermitianObservable::new(h.a.matrix() * h.a.matrix())?;
    let mean_a2 = expectation(rho_a, &a2)?;
    let r = rho_b.matrix();
    let b = h.b.matrix();
    let c = commutator(b, r)?;
    let mut sum = C64::new(0.0, 0.0);
    for i in 0..=(n - 2) {
        let inner = &(&r.pow(i) * &c) * &r.pow(n - 2 - i);
        sum += c.trace_product(&inner);
    }
    let second = (&r.pow(n - 1) * &c).trace_product(b);
    let nf = n as f64;
    let value = -nf * mean_a * mean_a * sum.re + 2.0 * nf * mean_a2 * second.re;
    Ok(h.coupling * h.coupling * value)
}

/// One row of a [`VnLimitReport`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VnLimitEntry {
    pub eps: f64,
    /// `−γ̇_{1+ε} / ε`.
    pub first: f64,
    /// `−γ̈_{1+ε} / ε`.
    pub second: f64,
}

#[derive(Clone, Debug)]
pub struct VnLimitReport {
    pub s_dot: f64,
    pub s_ddot: f64,
    pub entries: Vec<VnLimitEntry>,
}

impl VnLimitReport {
    pub fn first_discrepancies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.first - self.s_dot).collect()
    }

    pub fn second_discrepancies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.second - self.s_ddot).collect()
    }
}

fn positive_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let ev = herm_eig(rho.matrix())?.eigenvalues;
    if ev[0] <= 0.0 {
        return Err(Error::NearPureDivergence {
            eigenvalue: ev[0],
            floor: 0.0,
        });
    }
    Ok(ev)
}

/// Compares time derivatives of the von Neumann entropy along `rho_path`
/// with `−γ̇_{1+ε}/ε` and `−γ̈_{1+ε}/ε` for each `ε`.
///
/// `(γ_{1+ε} − 1)/ε` is evaluated as `Σ λ·expm1(ε log λ)/ε`, which is exact
/// for trace-one states and keeps full precision for small `ε`.
pub fn vn_derivative_limit_check(
    rho_path: impl Fn(f64) -> DensityMatrix,
    t0: f64,
    eps_list: &[f64],
    step: f64,
) -> Result<VnLimitReport> {
    let offsets = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let spectra: Vec<Vec<f64>> = offsets
        .iter()
        .map(|k| positive_spectrum(&rho_path(t0 + k * step)))
        .collect::<Result<_>>()?;
    let lookup = |t: f64| -> &Vec<f64> {
        let k = ((t - t0) / step).round() as i64 + 2;
        &spectra[k as usize]
    };
    let entropy = |t: f64| crate::diagnostics::entropy_of_spectrum(lookup(t));
    let s_dot = fd_derivative(entropy, t0, FdOrder::First, step)?;
    let s_ddot = fd_derivative(entropy, t0, FdOrder::Second, step)?;

    let mut entries = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("ε = {eps} must be positive")));
        }
        let excess = |t: f64| lookup(t).iter().map(|&l| l * (eps * l.ln()).exp_m1()).sum::<f64>() / eps;
        entries.push(VnLimitEntry {
            eps,
            first: -fd_derivative(excess, t0, FdOrder::First, step)?,
            second: -fd_derivative(excess, t0, FdOrder::Second, step)?,
        });
    }
    Ok(VnLimitReport { s_dot, s_ddot, entries })
}
