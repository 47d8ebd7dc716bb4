//! CSV tables behind each published plot. No plotting happens here.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dynamics::{uniform_grid, Trajectory};
use crate::error::Result;
use crate::matrix::C64;
use crate::scenarios::{
    case2_trajectory, fock_env_scenario, fragility_comparison, thermal_sweep, udw_field_fragility_coherent,
    udw_field_fragility_exact, udw_numeric, ScenarioOutput, UdwParams, DEFAULT_FOCK_DIM, MAX_FOCK_DIM,
};

pub const GRID_POINTS: usize = 50;
pub const FIELD_DELTAS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

/// A named table plus operator remarks (truncations used and the like).
#[derive(Clone, Debug)]
pub struct Figure {
    pub name: &'static str,
    pub output: ScenarioOutput,
}

impl Figure {
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Field 2-fragility against time for several populations: published
/// closed form, coherent-state closed form and converged numeric.
pub fn field_fragility_figure() -> Result<Figure> {
    let grid = uniform_grid(1.5, GRID_POINTS);
    let mut traj = Trajectory::new(grid.clone());
    let mut notes = Vec::new();
    for delta in FIELD_DELTAS {
        let run = udw_numeric(&UdwParams::new(c(0.0), delta, 1.0, DEFAULT_FOCK_DIM)?, &grid)?;
        let published = grid
            .iter()
            .map(|&t| udw_field_fragility_exact(delta, t))
            .collect::<Result<_>>()?;
        let coherent = grid
            .iter()
            .map(|&t| udw_field_fragility_coherent(delta, 1.0, t))
            .collect::<Result<_>>()?;
        traj.push(format!("published_d{delta}"), published)?;
        traj.push(format!("coherent_d{delta}"), coherent)?;
        traj.push(
            format!("numeric_d{delta}"),
            run.trajectory.get("f2_field").expect("recorded").to_vec(),
        )?;
        notes.push(format!(
            "delta {delta}: Fock truncation {} (deviation {:.2e})",
            run.fock_dim, run.deviation
        ));
    }
    Ok(Figure {
        name: "fig1_field_fragility",
        output: ScenarioOutput {
            trajectory: traj,
            notes,
        },
    })
}

pub fn thermal_figure() -> Result<Figure> {
    let betas: Vec<f64> = uniform_grid(9.9, GRID_POINTS).into_iter().map(|x| 0.1 + x).collect();
    Ok(Figure {
        name: "fig2_thermal_fragility",
        output: thermal_sweep(&betas, 1.0, 1.0, MAX_FOCK_DIM)?.into(),
    })
}

fn append_prefixed(dst: &mut Trajectory, src: &Trajectory, names: &[&str], tag: &str) -> Result<()> {
    for name in names {
        let stem = name.trim_end_matches("_b");
        dst.push(format!("{stem}_{tag}"), src.get(name).expect("recorded").to_vec())?;
    }
    Ok(())
}

/// Panels `(r, s)` of the non-commuting qubit example.
pub const CASE2_PANELS: [(f64, f64); 6] = [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 0.3), (0.5, 0.6)];

pub fn case2_figure() -> Result<Figure> {
    let grid = uniform_grid(2.0 * PI, GRID_POINTS);
    let mut traj = Trajectory::new(grid.clone());
    for (r, s) in CASE2_PANELS {
        let panel = case2_trajectory(c(r), c(s), 1.0, &grid)?;
        append_prefixed(
            &mut traj,
            &panel,
            &["purity_b", "coherence_b", "variance_b"],
            &format!("r{r}_s{s}"),
        )?;
    }
    Ok(Figure {
        name: "fig3_case2",
        output: traj.into(),
    })
}

/// Panels `(s, p, r)` of the Fock-environment example.
pub const FOCK_PANELS: [(f64, f64, f64); 4] = [(0.0, 0.2, 0.5), (0.0, 0.0, 0.5), (0.0, 0.5, 0.5), (0.5, 0.2, 0.5)];

pub fn fock_env_figure() -> Result<Figure> {
    let grid = uniform_grid(2.0 * PI, GRID_POINTS);
    let mut traj = Trajectory::new(grid.clone());
    for (s, p, r) in FOCK_PANELS {
        let panel = fock_env_scenario(c(r), c(p), c(s), 1.0, 8, &grid)?;
        append_prefixed(
            &mut traj,
            &panel,
            &["purity_b", "coherence_b", "variance_b"],
            &format!("s{s}_p{p}_r{r}"),
        )?;
    }
    Ok(Figure {
        name: "fig4_fock_env",
        output: traj.into(),
    })
}

fn select(src: &ScenarioOutput, prefixes: &[&str]) -> Result<ScenarioOutput> {
    let mut traj = Trajectory::new(src.trajectory.times.clone());
    for (name, values) in &src.trajectory.series {
        if prefixes.iter().any(|p| name.starts_with(p)) {
            traj.push(name.clone(), values.clone())?;
        }
    }
    Ok(ScenarioOutput {
        trajectory: traj,
        notes: src.notes.clone(),
    })
}

/// `(δ, α)` pairs for the comparison plots: the first three vary δ at
/// fixed α, the rest vary α at fixed δ.
pub const COMPARISON_STATES: [(f64, f64); 6] = [(0.1, 0.0), (0.3, 0.0), (0.5, 0.0), (0.5, 0.1), (0.5, 0.2), (0.5, 0.3)];
pub const SIDE_BY_SIDE_STATES: [(f64, f64); 2] = [(0.4, 0.3), (0.5, 0.5)];

/// The last three tables: fragilities by parameter, field and qubit side by
/// side, and fragility-to-variance ratios.
pub fn comparison_figures() -> Result<[Figure; 3]> {
    let grid = uniform_grid(1.5, GRID_POINTS);
    let states: Vec<(f64, C64)> = COMPARISON_STATES.iter().map(|&(d, a)| (d, c(a))).collect();
    let sweep = fragility_comparison(&states, 1.0, DEFAULT_FOCK_DIM, &grid)?;
    let both: Vec<(f64, C64)> = SIDE_BY_SIDE_STATES.iter().map(|&(d, a)| (d, c(a))).collect();
    let side_by_side = fragility_comparison(&both, 1.0, DEFAULT_FOCK_DIM, &grid)?;
    Ok([
        Figure {
            name: "fig5_fragility_comparison",
            output: select(&sweep, &["f2_"])?,
        },
        Figure {
            name: "fig6_fragilities_both",
            output: select(&side_by_side, &["f2_"])?,
        },
        Figure {
            name: "fig7_fragility_variance_ratio",
            output: select(&sweep, &["ratio_"])?,
        },
    ])
}

pub fn all_figures() -> Result<Vec<Figure>> {
    let mut out = vec![
        field_fragility_figure()?,
        thermal_figure()?,
        case2_figure()?,
        fock_env_figure()?,
    ];
    out.extend(comparison_figures()?);
    Ok(out)
}

/// Writes every table into `outdir` (created if missing) and returns the
/// figures with their paths.
pub fn write_figures(outdir: impl AsRef<Path>) -> Result<Vec<(Figure, PathBuf)>> {
    let outdir = outdir.as_ref();
    fs::create_dir_all(outdir)?;
    all_figures()?
        .into_iter()
        .map(|fig| {
            let path = outdir.join(fig.file_name());
            fig.output.trajectory.write_csv(&path)?;
            Ok((fig, path))
        })
        .collect()
}
