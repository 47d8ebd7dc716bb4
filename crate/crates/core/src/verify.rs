//! Randomised invariant suites behind the `verify` command.
//!
//! Every check reports the worst residual seen and the tolerance it was
//! held to. Trials are seeded per index, so results do not depend on thread
//! scheduling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{coherence_2norm, variance, HermitianObservable};
use crate::dynamics::{onset_identities, uniform_grid, OnsetOptions, ProductInteraction, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::fragility::{fragility_2, fragility_n, variance_fragility_gap};
use crate::matrix::{ComplexMatrix, C64};
use crate::scenarios::{
    case1_trajectory, case2_trajectory, expansion_vacuum_overlap, fock_env_scenario, normal_order_deviation,
    thermal_fragility_exact, thermal_fragility_numeric, udw_field_fragility_coherent, udw_numeric,
    udw_qubit_fragility_exact, vacuum_overlap_numeric, Case1Params, UdwParams, DEFAULT_FOCK_DIM,
};
use crate::states::{random_density, random_hermitian, random_pure, DensityMatrix};

/// Thresholds for every check; any subset can be overridden from JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub fd_step: f64,
    pub onset_first_derivative: f64,
    pub onset_relative: f64,
    pub pure_state_relative: f64,
    pub von_neumann_relative: f64,
    pub unipartite: f64,
    pub bound: f64,
    pub pure_equality: f64,
    pub closed_form: f64,
    pub conservation: f64,
    pub fock_convergence: f64,
    pub thermal: f64,
    pub series: f64,
    pub normal_order: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fd_step: DEFAULT_FD_STEP,
            onset_first_derivative: 1e-8,
            onset_relative: 1e-4,
            pure_state_relative: 1e-6,
            von_neumann_relative: 1e-4,
            unipartite: 1e-8,
            bound: 1e-10,
            pure_equality: 1e-8,
            closed_form: 1e-10,
            conservation: 1e-12,
            fock_convergence: 1e-8,
            thermal: 1e-8,
            series: 1e-12,
            normal_order: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One `name = value` line per threshold.
    pub fn describe(&self) -> String {
        let value = serde_json::to_value(self).expect("plain struct");
        let map = value.as_object().expect("struct serialises to an object");
        map.iter().map(|(k, v)| format!("  {k} = {v}\n")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Onset,
    Bounds,
    Scenarios,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onset" => Ok(Suite::Onset),
            "bounds" => Ok(Suite::Bounds),
            "scenarios" => Ok(Suite::Scenarios),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite `{other}`; expected onset, bounds, scenarios or all"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Number of random configurations; `None` uses each suite's default.
    pub trials: Option<usize>,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            worst,
            tolerance,
        }
    }

    /// NaN residuals fail.
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: worst {:.3e} (tolerance {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance
        )
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    match suite {
        Suite::Onset => onset_suite(opts),
        Suite::Bounds => bounds_suite(opts),
        Suite::Scenarios => scenarios_suite(opts),
        Suite::All => {
            let mut out = onset_suite(opts)?;
            out.extend(bounds_suite(opts)?);
            out.extend(scenarios_suite(opts)?);
            Ok(out)
        }
    }
}

/// Independent generator per (check, trial index).
fn trial_rng(seed: u64, check: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((check << 40) | index as u64);
    rng
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v)
        }
    })
}

/// Random mixed `ρ_A`, `ρ_B` and Hermitian `A`, `B` with unit coupling and
/// side dimensions in `2..=6`.
pub fn random_onset_config(rng: &mut impl Rng) -> Result<(DensityMatrix, DensityMatrix, ProductInteraction)> {
    let da = rng.random_range(2..=6);
    let db = rng.random_range(2..=6);
    let rho_a = random_density(da, rng.random())?;
    let rho_b = random_density(db, rng.random())?;
    let a = HermitianObservable::new(random_hermitian(da, rng.random())?)?;
    let b = HermitianObservable::new(random_hermitian(db, rng.random())?)?;
    Ok((rho_a, rho_b, ProductInteraction::new(a, b, 1.0)?))
}

fn onset_suite(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let tol = &opts.tolerances;
    let trials = opts.trials.unwrap_or(200);
    type Row = ([f64; 3], [f64; 3], f64, f64, f64);
    let rows: Vec<Row> = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<Row> {
            let mut rng = trial_rng(opts.seed, 1, k);
            let (rho_a, rho_b, h) = random_onset_config(&mut rng)?;
            let mut first = [0.0; 3];
            let mut rel = [0.0; 3];
            let mut vn = 0.0;
            let mut uni: f64 = 0.0;
            for (i, n) in (2..=4).enumerate() {
                let mut o = OnsetOptions::new(n);
                o.step = tol.fd_step;
                o.check_von_neumann = n == 2;
                let r = onset_identities(&rho_a, &rho_b, &h, &o)?;
                first[i] = r.first_derivative.abs();
                rel[i] = r.second_derivative.relative_error();
                if let Some(v) = r.von_neumann {
                    vn = v.relative_error();
                }
                uni = uni.max(r.unipartite_fd.abs()).max(r.unipartite_analytic.abs());
            }
            let pure_b = random_pure(rho_b.dim(), rng.random())?;
            let mut o = OnsetOptions::new(2);
            o.step = tol.fd_step;
            let pure = onset_identities(&rho_a, &pure_b, &h, &o)?
                .pure_state
                .expect("pure system")
                .relative_error();
            Ok((first, rel, vn, pure, uni))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    out.push(CheckResult::new(
        "onset: |first derivative of n-purity|, n = 2..4",
        max_of(rows.iter().flat_map(|r| r.0)),
        tol.onset_first_derivative,
    ));
    for (i, n) in (2..=4).enumerate() {
        out.push(CheckResult::new(
            format!("onset: second derivative vs -4 eps^2 (dA)^2 f_{n}, relative"),
            max_of(rows.iter().map(|r| r.1[i])),
            tol.onset_relative,
        ));
    }
    out.push(CheckResult::new(
        "onset: pure system, second derivative vs -4 eps^2 (dA)^2 (dB)^2, relative",
        max_of(rows.iter().map(|r| r.3)),
        tol.pure_state_relative,
    ));
    out.push(CheckResult::new(
        "onset: von Neumann second derivative vs 2 eps^2 (dA)^2 f_1, relative",
        max_of(rows.iter().map(|r| r.2)),
        tol.von_neumann_relative,
    ));
    out.push(CheckResult::new(
        "onset: closed single-system evolution, second derivative",
        max_of(rows.iter().map(|r| r.4)),
        tol.unipartite,
    ));
    Ok(out)
}

fn bounds_suite(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let tol = &opts.tolerances;
    let trials = opts.trials.unwrap_or(10_000);
    let mixed: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<(f64, f64)> {
            let mut rng = trial_rng(opts.seed, 2, k);
            let dim = rng.random_range(2..=8);
            let rho = random_density(dim, rng.random())?;
            let b = HermitianObservable::new(random_hermitian(dim, rng.random())?)?;
            let excess = -variance_fragility_gap(&rho, &b)?;
            let negative = (3..=5)
                .map(|n| fragility_n(&rho, &b, n).map(|f| -f))
                .collect::<Result<Vec<_>>>()?;
            Ok((excess, max_of(negative)))
        })
        .collect::<Result<_>>()?;
    let pure: Vec<f64> = (0..(trials / 10).max(1))
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut rng = trial_rng(opts.seed, 3, k);
            let dim = rng.random_range(2..=8);
            let rho = random_pure(dim, rng.random())?;
            let b = HermitianObservable::new(random_hermitian(dim, rng.random())?)?;
            Ok((variance(&rho, &b)? - fragility_2(&rho, &b)?).abs())
        })
        .collect::<Result<_>>()?;
    Ok(vec![
        CheckResult::new(
            "bounds: max(f_2 - variance) over random states",
            max_of(mixed.iter().map(|m| m.0)),
            tol.bound,
        ),
        CheckResult::new(
            "bounds: |variance - f_2| over random pure states",
            max_of(pure),
            tol.pure_equality,
        ),
        CheckResult::new(
            "bounds: max(-f_n), n = 3..5",
            max_of(mixed.iter().map(|m| m.1)),
            tol.bound,
        ),
    ])
}

/// Three-level state whose 2-fragility rises from 0.04 to 0.09 under a
/// permutation of basis vectors that leaves the 2-norm coherence unchanged.
/// Returns the state before and after, and the observable.
pub fn swap_witness() -> (DensityMatrix, DensityMatrix, HermitianObservable) {
    let b = HermitianObservable::diagonal(&[0.0, 1.0, 3.0]);
    let mut m = ComplexMatrix::from_diagonal(&[0.4, 0.3, 0.3]);
    m.set(1, 2, C64::new(0.1, 0.0));
    m.set(2, 1, C64::new(0.1, 0.0));
    let before = DensityMatrix::new(m).expect("valid state");
    let swap =
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]).expect("permutation");
    let after = before.transform(&swap);
    (before, after, b)
}

fn series_deviation(a: &[f64], b: &[f64]) -> f64 {
    max_of(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

fn spread(a: &[f64]) -> f64 {
    let lo = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn scenarios_suite(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let tol = &opts.tolerances;
    let trials = opts.trials.unwrap_or(100).min(1000);
    let c = |re: f64, im: f64| C64::new(re, im);
    let mut out = Vec::new();

    let grid = uniform_grid(6.0, 50);
    let case1: Vec<[f64; 4]> = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<[f64; 4]> {
            let mut rng = trial_rng(opts.seed, 4, k);
            let mut draw = || rng.random_range(-2.0..2.0);
            let p = Case1Params::new(
                c(draw(), draw()),
                c(draw(), draw()),
                draw().abs() + 0.1,
                draw().abs() + 0.1,
            )?;
            let t = case1_trajectory(&p, &grid)?;
            let g = |n: &str| t.get(n).expect("recorded");
            let closed = series_deviation(g("mixedness_b"), g("mixedness_exact"))
                .max(series_deviation(g("coherence_b"), g("coherence_exact")));
            let sums: Vec<f64> = g("mixedness_exact")
                .iter()
                .zip(g("coherence_exact"))
                .map(|(m, c)| m + c)
                .collect();
            Ok([
                closed,
                spread(&sums),
                spread(g("variance_b")),
                series_deviation(g("variance_b"), g("variance_exact")),
            ])
        })
        .collect::<Result<_>>()?;
    out.push(CheckResult::new(
        "case 1: numeric vs closed-form mixedness and coherence",
        max_of(case1.iter().map(|r| r[0])),
        tol.closed_form,
    ));
    out.push(CheckResult::new(
        "case 1: spread of mixedness + coherence",
        max_of(case1.iter().map(|r| r[1])),
        tol.conservation,
    ));
    out.push(CheckResult::new(
        "case 1: variance drift and closed-form deviation",
        max_of(case1.iter().flat_map(|r| [r[2], r[3]])),
        tol.closed_form,
    ));

    let case2: Vec<f64> = (0..trials.min(50))
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut rng = trial_rng(opts.seed, 5, k);
            let mut draw = || rng.random_range(-2.0..2.0);
            let t = case2_trajectory(c(draw(), draw()), c(draw(), draw()), draw().abs() + 0.1, &grid)?;
            Ok(max_of(t.get("numeric_deviation").expect("recorded").iter().cloned()))
        })
        .collect::<Result<_>>()?;
    out.push(CheckResult::new(
        "case 2: closed-form reduced state vs numeric evolution",
        max_of(case2),
        tol.closed_form,
    ));

    let fock: Vec<f64> = (0..trials.min(20))
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut rng = trial_rng(opts.seed, 6, k);
            let mut draw = || rng.random_range(-1.5..1.5);
            let t = fock_env_scenario(c(draw(), draw()), c(draw(), draw()), c(draw(), draw()), 1.0, 6, &grid)?;
            Ok(max_of(
                t.get("variance_relation_residual")
                    .expect("recorded")
                    .iter()
                    .map(|r| r.abs()),
            ))
        })
        .collect::<Result<_>>()?;
    out.push(CheckResult::new(
        "fock environment: variance relation residual",
        max_of(fock),
        tol.closed_form,
    ));

    let udw_grid = uniform_grid(1.5, 50);
    let mut qubit: f64 = 0.0;
    let mut field: f64 = 0.0;
    let mut conv: f64 = 0.0;
    for (alpha, delta) in [(0.3, 0.4), (0.0, 0.1), (0.2, 0.5)] {
        let p = UdwParams::new(c(alpha, 0.0), delta, 1.0, DEFAULT_FOCK_DIM)?;
        let run = udw_numeric(&p, &udw_grid)?;
        conv = conv.max(run.deviation);
        let q = run.trajectory.get("f2_qubit").expect("recorded");
        let f = run.trajectory.get("f2_field").expect("recorded");
        for (k, &t) in udw_grid.iter().enumerate() {
            qubit = qubit.max((q[k] - udw_qubit_fragility_exact(&p, t)).abs());
            field = field.max((f[k] - udw_field_fragility_coherent(delta, 1.0, t)?).abs());
        }
    }
    out.push(CheckResult::new(
        "light-matter: Fock truncation convergence",
        conv,
        tol.fock_convergence,
    ));
    out.push(CheckResult::new(
        "light-matter: qubit fragility vs 4|alpha|^2 exp(-4 nu^2 t^2)",
        qubit,
        tol.fock_convergence,
    ));
    out.push(CheckResult::new(
        "light-matter: field fragility vs coherent-state closed form",
        field,
        tol.fock_convergence,
    ));

    let thetas = [0.5, 1.0, 1.5, 2.0];
    let series = max_of(
        thetas
            .iter()
            .map(|&th| (expansion_vacuum_overlap(th, 80).re - (-0.5 * th * th).exp()).abs()),
    );
    out.push(CheckResult::new(
        "vacuum overlap series vs exp(-theta^2/2)",
        series,
        tol.series,
    ));
    let exponential = thetas
        .iter()
        .map(|&th| Ok((vacuum_overlap_numeric(64, th)? - expansion_vacuum_overlap(th, 80)).norm()))
        .collect::<Result<Vec<f64>>>()?;
    out.push(CheckResult::new(
        "vacuum overlap series vs truncated matrix exponential",
        max_of(exponential),
        tol.closed_form,
    ));

    let thermal = (0..20)
        .map(|k| 0.5 + 9.5 * k as f64 / 19.0)
        .map(|x| Ok((thermal_fragility_numeric(x, 1.0, 1.0, 128)? - thermal_fragility_exact(x, 1.0, 1.0)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    out.push(CheckResult::new(
        "thermal: truncated vs closed-form fragility, beta omega in [0.5, 10]",
        max_of(thermal),
        tol.thermal,
    ));

    let normal = (2..=8)
        .map(|n| normal_order_deviation(n, n as usize + 6))
        .collect::<Result<Vec<f64>>>()?;
    out.push(CheckResult::new(
        "normal ordering vs truncated matrix powers, n <= 8",
        max_of(normal),
        tol.normal_order,
    ));

    let (before, after, b) = swap_witness();
    let f_before = fragility_2(&before, &b)?;
    let f_after = fragility_2(&after, &b)?;
    let witness = (f_before - 0.04)
        .abs()
        .max((f_after - 0.09).abs())
        .max((coherence_2norm(&before, &b)? - coherence_2norm(&after, &b)?).abs());
    out.push(CheckResult::new(
        "swap witness: f_2 0.04 -> 0.09 at fixed coherence",
        witness,
        tol.conservation,
    ));
    Ok(out)
}
