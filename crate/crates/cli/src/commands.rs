use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use gbsde_core::{
    alpha_grid, optimal_transfer_construct, run_property_suite, solve_constrained, transfer_sweep, Error,
    InfConvOptions, RiskMeasure,
};

use crate::config::{ConfigError, ExperimentConfig, TransferMode, VerifyConfig};
use crate::csvio::{write_allocation, write_node_table, write_sweep};
use crate::record::{CommandKind, PropertyLine, ResultRecord, Status};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;
pub const EXIT_DIVERGENCE: u8 = 4;
pub const EXIT_PROPERTY: u8 = 5;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub csv: Option<PathBuf>,
    /// Overrides `verify.seed`.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub record: ResultRecord,
    pub exit_code: u8,
}

/// Exit code for an error that escaped [`execute`].
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. }) => EXIT_NON_CONVERGENCE,
        Some(Error::Divergence { .. }) => EXIT_DIVERGENCE,
        Some(_) => EXIT_CONFIG,
        None => EXIT_FAILURE,
    }
}

/// Run one command. Solver non-convergence and divergence still produce a
/// record (with the matching status and exit code); other errors are
/// returned.
pub fn execute(command: CommandKind, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    let start = Instant::now();
    let mut echo = cfg.clone();
    if command == CommandKind::Verify {
        let seed = opts.seed.or(cfg.verify().seed).ok_or_else(|| {
            ConfigError("verify needs a seed (verify.seed or --seed)".into())
        })?;
        echo.verify = Some(VerifyConfig { seed: Some(seed), ..cfg.verify() });
    }
    let mut record = ResultRecord::new(command, &echo);
    let body = match command {
        CommandKind::Solve => solve(&echo, opts, &mut record),
        CommandKind::Transfer => transfer(&echo, opts, &mut record),
        CommandKind::Verify => verify(&echo, &mut record),
    };
    let exit_code = match body {
        Ok(code) => code,
        Err(e) => match e.downcast_ref::<Error>() {
            Some(Error::NonConvergence { .. }) => {
                record.status = Status::NonConverged;
                record.diagnostics.push(e.to_string());
                EXIT_NON_CONVERGENCE
            }
            Some(Error::Divergence { .. }) => {
                record.status = Status::Diverged;
                record.diagnostics.push(e.to_string());
                EXIT_DIVERGENCE
            }
            _ => return Err(e),
        },
    };
    record.wall_time_s = start.elapsed().as_secs_f64();
    Ok(Outcome { record, exit_code })
}

fn solve(cfg: &ExperimentConfig, opts: &RunOptions, record: &mut ResultRecord) -> Result<u8> {
    let lattice = cfg.build_lattice()?;
    let g = cfg.driver.build("driver")?;
    let phi = cfg.constraint.build()?;
    let claim = cfg.claim.build(&lattice)?;
    let config = cfg.solver.build()?;
    let steps = cfg.export_steps()?;

    let sol = solve_constrained(&g, &phi, &claim, &lattice, &config)?;
    record.set("y0", sol.y0());
    record.set("m_final", sol.m_final);
    record.set("convergence_gap", sol.convergence_gap);
    record.set("phi_residual", sol.phi_residual);
    record.set("monotone_violation", sol.monotone_violation);
    record.set("identity_residual", sol.solution.identity_residual(&g));
    record.set("claim_bound", claim.bound());
    if let Some(path) = &opts.csv {
        write_node_table(path, &sol.solution, &steps)?;
    }
    Ok(EXIT_OK)
}

fn transfer(cfg: &ExperimentConfig, opts: &RunOptions, record: &mut ResultRecord) -> Result<u8> {
    let lattice = cfg.build_lattice()?;
    let g1 = cfg.driver.build("driver")?;
    let g2 = cfg.second_driver()?;
    let phi = cfg.constraint.build()?;
    let eta = cfg.claim.build(&lattice)?;
    let config = cfg.solver.build()?;
    let tc = cfg.transfer();

    match tc.mode {
        TransferMode::Sweep => {
            let grid = alpha_grid(tc.alpha_step).map_err(|e| ConfigError(format!("transfer: {e}")))?;
            let rm1 = RiskMeasure::new(g1, phi.clone(), lattice.clone(), config)?;
            let rm2 = RiskMeasure::new(g2, phi, lattice, config)?;
            let sweep = transfer_sweep(&rm1, &rm2, &eta, &grid)?;
            record.set("best_alpha", sweep.best_alpha);
            record.set("best_total", sweep.best_total);
            record.set("keep_all_total", sweep.curve[0].1);
            record.set("transfer_all_total", sweep.curve[sweep.curve.len() - 1].1);
            if let Some(path) = &opts.csv {
                write_sweep(path, &sweep.curve)?;
            }
        }
        TransferMode::Construct => {
            let res = optimal_transfer_construct(&g1, &g2, &phi, &eta, &lattice, &config, InfConvOptions::default())?;
            record.set("first_share", res.first_share);
            record.set("second_share", res.second_share);
            record.set("total", res.total_risk);
            record.set("baseline", res.baseline);
            record.set("equality_gap", res.equality_gap);
            record.set("dynamic_gap", res.dynamic_gap);
            record.set("max_phi_share", res.hypothesis.max_phi_share);
            record.set("max_phi_remainder", res.hypothesis.max_phi_remainder);
            record.set("xi_star_bound", res.allocation.bound());
            record.diagnostics.push(
                "values are in expectation form; in risk form the position is -eta and the transfer is -xi_star".into(),
            );
            if res.hypothesis.violated() {
                record.status = Status::HypothesisViolation;
                record.diagnostics.push(format!(
                    "constraint violated by the split: max phi(z_hat) = {:e}, max phi(z3_hat - z_hat) = {:e}",
                    res.hypothesis.max_phi_share, res.hypothesis.max_phi_remainder
                ));
            }
            if let Some(path) = &opts.csv {
                write_allocation(path, &lattice, &eta, &res.allocation)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn verify(cfg: &ExperimentConfig, record: &mut ResultRecord) -> Result<u8> {
    let lattice = cfg.build_lattice()?;
    let g = cfg.driver.build("driver")?;
    let phi = cfg.constraint.build()?;
    let config = cfg.solver.build()?;
    let vc = cfg.verify();
    let seed = vc.seed.expect("seed resolved by execute");

    let rm = RiskMeasure::new(g, phi, lattice, config)?;
    let report = run_property_suite(&rm, vc.samples, seed)?;
    record.properties = report
        .checks
        .iter()
        .map(|c| PropertyLine {
            name: c.name.to_string(),
            max_violation: c.max_violation,
            tolerance: c.tolerance,
            skipped: c.skipped.map(str::to_string),
            passed: c.passed(),
        })
        .collect();
    record.failures = report.failures().into_iter().map(str::to_string).collect();
    record.set("properties_failed", record.failures.len() as f64);
    if record.failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        record.diagnostics.push(format!("failing properties: {}", record.failures.join(", ")));
        Ok(EXIT_PROPERTY)
    }
}
