//! Command-line front end for the stratwave solvers.
//!
//! Every subcommand writes into `<output>/<subcommand>/`, starting with a
//! `run.meta` echo of the resolved configuration.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use stratwave::kv::{self, fmt_f64};
use stratwave::symmetry::stream_asymmetry_norm;
use stratwave::*;
use std::result::Result;

pub use config::{parse_config, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad invocation, configuration or missing inputs.
    #[error("{0}")]
    Usage(String),
    /// A solver or validator failed.
    #[error(transparent)]
    Model(#[from] stratwave::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(_) => 1,
        }
    }
}

pub const SUBCOMMANDS: [&str; 8] = [
    "laminar",
    "dispersion",
    "solve-height",
    "continue",
    "solve-stream",
    "stagnation",
    "symmetry-check",
    "validate-mp",
];

/// Runs one subcommand and returns the directory it wrote.
pub fn dispatch(subcommand: &str, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    if !SUBCOMMANDS.contains(&subcommand) {
        return Err(CliError::Usage(format!(
            "unknown subcommand `{subcommand}`; expected one of {}",
            SUBCOMMANDS.join(", ")
        )));
    }
    let dir = cfg.output.join(subcommand);
    std::fs::create_dir_all(&dir).map_err(|e| io_usage(&dir, e))?;
    write(&dir.join("run.meta"), &cfg.meta())?;
    match subcommand {
        "laminar" => laminar(cfg, &dir)?,
        "dispersion" => dispersion(cfg, &dir)?,
        "solve-height" => solve_height(cfg, &dir)?,
        "continue" => continuation(cfg, &dir)?,
        "solve-stream" => solve_stream(cfg, &dir)?,
        "stagnation" => stagnation(cfg, &dir)?,
        "symmetry-check" => symmetry_check(cfg, &dir)?,
        "validate-mp" => validate_mp(cfg, &dir)?,
        _ => unreachable!("checked above"),
    }
    Ok(dir)
}

fn io_usage(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_usage(path, e))
}

fn write_kv<K: std::fmt::Display>(path: &Path, pairs: Vec<(K, String)>) -> Result<(), CliError> {
    write(path, &kv::render(pairs))
}

fn profile(p: &FluidParameters) -> Result<StratificationProfile, CliError> {
    Ok(linear_stratification(p.a, p.b, p.gamma)?)
}

fn case_name(c: StagnationCase) -> &'static str {
    match c {
        StagnationCase::SurfaceOrBalance => "SurfaceOrBalance",
        StagnationCase::LambdaPlus => "LambdaPlus",
        StagnationCase::LambdaMinus => "LambdaMinus",
    }
}

fn laminar(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let flow = LaminarFlow::new(cfg.params)?;
    let h = cfg.params.depth;
    let stag = find_stagnation_depths(&flow);
    let mut pairs = vec![
        ("lambda".to_string(), fmt_f64(flow.lambda)),
        ("Q".to_string(), fmt_f64(cfg.params.laminar_head())),
        ("stagnation_case".to_string(), case_name(stag.case_tag).to_string()),
        ("tangency".to_string(), stag.tangency.to_string()),
        ("stagnation_count".to_string(), stag.depths.len().to_string()),
    ];
    for (k, y) in stag.depths.iter().enumerate() {
        pairs.push((format!("stagnation_depth_{k}"), fmt_f64(*y)));
    }
    write_kv(&dir.join("laminar.kv"), pairs)?;
    let mut csv = String::from("y,psi,psi_y\n");
    for j in 0..=cfg.np {
        let y = (h * j as f64 / cfg.np as f64).min(h);
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_f64(y),
            fmt_f64(laminar_psi(&flow, y)?),
            fmt_f64(laminar_psi_y(&flow, y)?)
        );
    }
    write(&dir.join("profile.csv"), &csv)
}

fn dispersion(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let (minus, plus) = dispersion_lambdas(&cfg.params);
    write_kv(
        &dir.join("dispersion.kv"),
        vec![
            ("lambda_plus", fmt_f64(plus)),
            ("lambda_minus", fmt_f64(minus)),
            ("product", fmt_f64(plus * minus)),
        ],
    )
}

fn solve_report_pairs(rep: &SolveReport) -> Vec<(&'static str, String)> {
    vec![
        ("iterations", rep.iterations.to_string()),
        ("residual", fmt_f64(rep.residual)),
        ("converged", rep.converged.to_string()),
        ("min_hp", fmt_f64(rep.min_hp)),
    ]
}

fn solve_height(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let p = cfg.params;
    let prof = profile(&p)?;
    let grid = make_grid(cfg.nq, cfg.np, p.p0)?;
    let guess = laminar_height_field(&p, &prof, &grid)?;
    let (h, rep) = newton_solve(&guess, &p, &prof, cfg.newton_tol, cfg.max_iter)?;
    h.write_csv(&dir.join("height.csv"))?;
    let mut pairs = solve_report_pairs(&rep);
    pairs.push(("amplitude", fmt_f64(h.amplitude())));
    pairs.push(("mean_height", fmt_f64(h.mean_height())));
    let phys = recover_physical(&h, &p, &prof, 0.0)?;
    let flux = phys.column_flux();
    let spread = flux.iter().fold(0.0f64, |m, f| m.max((f - p.p0).abs()));
    pairs.push(("flux_deviation", fmt_f64(spread)));
    write_kv(&dir.join("solve.kv"), pairs)
}

fn branch_options(cfg: &RunConfig) -> ContinuationOptions {
    ContinuationOptions {
        nq: cfg.nq,
        np: cfg.np,
        steps: cfg.steps,
        ds: cfg.ds,
        ds_min: cfg.ds / 64.0,
        newton_tol: cfg.newton_tol,
        max_iter: cfg.max_iter,
        ..ContinuationOptions::default()
    }
}

fn continuation(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let prof = profile(&cfg.params)?;
    match continue_branch(&cfg.params, &prof, cfg.which, &branch_options(cfg)) {
        Ok(branch) => Ok(branch.write(dir)?),
        Err(Error::BranchTerminated { branch, reason }) => {
            // keep the accepted part for inspection
            branch.write(dir)?;
            Err(Error::BranchTerminated { branch, reason }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn stream_wave(cfg: &RunConfig) -> Result<StreamSolution, CliError> {
    let flow = LaminarFlow::at_bifurcation(cfg.params, cfg.which)?;
    let grid = Grid2D::sigma(cfg.nq, cfg.np)?;
    let opts = FreeBoundaryOptions {
        tol: 10.0 * cfg.newton_tol,
        max_iter: cfg.max_iter,
        ..FreeBoundaryOptions::default()
    };
    Ok(solve_wave(&flow.params, &grid, cfg.first_mode, &opts)?)
}

fn solve_stream(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let sol = stream_wave(cfg)?;
    sol.write(dir)?;
    let slope = surface_slope_check(&sol)?;
    let mut csv = String::from("x,slope_fd,slope_flow\n");
    for i in 0..sol.grid.nq {
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_f64(sol.eta.x[i]),
            fmt_f64(slope.slope_fd[i]),
            fmt_f64(slope.slope_flow[i])
        );
    }
    write(&dir.join("slope.csv"), &csv)?;
    let residual = bernoulli_residual(&sol)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    let mut pairs = vec![
        ("Q".to_string(), fmt_f64(sol.params.q)),
        ("mean_height".to_string(), fmt_f64(sol.eta.mean)),
        ("amplitude".to_string(), fmt_f64(sol.eta.amplitude())),
        ("bernoulli_residual".to_string(), fmt_f64(residual)),
        ("slope_discrepancy".to_string(), fmt_f64(slope.max_discrepancy)),
        ("oddness_defect".to_string(), fmt_f64(slope.oddness_defect)),
        ("asymmetry_norm".to_string(), fmt_f64(stream_asymmetry_norm(&sol))),
    ];
    let table = serrin_edge_check(&sol)?;
    for (name, e) in table.entries().iter().chain(table.chain().iter()) {
        pairs.push((format!("edge_{name}"), fmt_f64(e.value)));
        pairs.push((format!("edge_{name}_error"), fmt_f64(e.error)));
    }
    pairs.push(("edge_violations".to_string(), table.violations(10.0).join(" ")));
    write_kv(&dir.join("stream.kv"), pairs)
}

fn stagnation(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let flow = LaminarFlow::at_bifurcation(cfg.params, cfg.which)?;
    let grid = Grid2D::sigma(cfg.nq, cfg.np)?;
    let flat = SurfaceShape::flat(cfg.nq, flow.params.depth)?;
    let sol = solve_dirichlet(&flat, &flow.params, &grid)?;
    let points = locate_stagnation_points(&sol)?;
    let laminar = find_stagnation_depths(&flow);
    let mut pairs = vec![
        ("lambda".to_string(), fmt_f64(flow.lambda)),
        ("p0".to_string(), fmt_f64(flow.params.p0)),
        ("stagnation_case".to_string(), case_name(laminar.case_tag).to_string()),
        ("points".to_string(), points.len().to_string()),
    ];
    for (k, y) in laminar.depths.iter().enumerate() {
        pairs.push((format!("closed_form_depth_{k}"), fmt_f64(*y)));
    }
    write_kv(&dir.join("stagnation.kv"), pairs)?;
    let mut csv = String::from("x,y,residual\n");
    for p in &points {
        let _ = writeln!(csv, "{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.residual));
    }
    write(&dir.join("points.csv"), &csv)
}

fn symmetry_check(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let source = cfg.output.join("continue");
    if !source.join("branch.meta").exists() {
        return Err(CliError::Usage(format!(
            "{} holds no branch; run `continue` first",
            source.display()
        )));
    }
    let branch = SolutionBranch::read(&source)?;
    let step = branch.len() - 1;
    let field = &branch.points[step].field;
    let rep = moving_plane_sweep_height(field, cfg.sweep_tol)?;
    let mono = check_monotone_streamlines(field);
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f64);
    let mut pairs = vec![
        ("branch_step", step.to_string()),
        ("case_tag", rep.case_tag.to_string()),
        ("lambda0", fmt_f64(rep.lambda0)),
        ("lambda0_plus", fmt_f64(rep.lambda0_plus)),
        ("lambda0_minus", fmt_f64(rep.lambda0_minus)),
        ("sweep_step", fmt_f64(rep.sweep_step)),
        ("min_w", fmt_f64(rep.min_w)),
        ("blocking_lambda", opt(rep.blocking_lambda)),
        ("asymmetry_norm", fmt_f64(rep.asymmetry_norm)),
        ("monotone", mono.monotone.to_string()),
        ("strict_near_trough", mono.strict_near_trough.to_string()),
        ("hypothesis_met", mono.hypothesis_met().to_string()),
    ];
    match &rep.touching_point {
        Some(t) => pairs.extend([
            ("touching_q", fmt_f64(t.q)),
            ("touching_w", fmt_f64(t.w)),
            ("touching_w_q", fmt_f64(t.w_q)),
            ("touching_w_qq", fmt_f64(t.w_qq)),
            ("touching_curvature", t.curvature.to_string()),
        ]),
        None => pairs.push(("touching_q", "none".to_string())),
    }
    write_kv(&dir.join("reflection_report.kv"), pairs)
}

fn validate_mp(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let p = cfg.params;
    let prof = profile(&p)?;
    let grid = make_grid(cfg.nq, cfg.np, p.p0)?;
    let h = laminar_height_field(&p, &prof, &grid)?;
    let op = assemble_linearization(&h, &p, &prof)?;
    let opts = MaxPrincipleOptions {
        trials: cfg.trials,
        seed: cfg.seed,
        ..MaxPrincipleOptions::default()
    };
    let rep = check_discrete_max_principle(&op, &opts)?;
    let mut pairs = vec![
        ("rows_checked", rep.rows_checked.to_string()),
        ("diagonal_ok", rep.diagonal_ok.to_string()),
        ("off_diagonal_ok", rep.off_diagonal_ok.to_string()),
        ("row_sum_ok", rep.row_sum_ok.to_string()),
        ("worst_off_diagonal", fmt_f64(rep.worst_off_diagonal)),
        ("worst_row_sum", fmt_f64(rep.worst_row_sum)),
        ("trials", rep.trials.to_string()),
        ("valid_trials", rep.valid_trials.to_string()),
        ("counterexample", rep.counterexample.is_some().to_string()),
    ];
    if let Some(c) = &rep.counterexample {
        pairs.extend([
            ("counterexample_trial", c.trial.to_string()),
            ("counterexample_node", c.node.to_string()),
            ("counterexample_interior_min", fmt_f64(c.interior_min)),
            ("counterexample_boundary_min", fmt_f64(c.boundary_min)),
        ]);
    }
    write_kv(&dir.join("max_principle.kv"), pairs)
}
