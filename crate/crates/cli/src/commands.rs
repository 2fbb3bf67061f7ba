use std::fmt::Write as _;

use front_forge_core::analysis::{decay_report, verify_front, DEFAULT_BAND};
use front_forge_core::chain::{
    crossing_position, denormalize_front, energy_drift, init_front, init_riemann, is_monotone_transition,
    linear_slope, simulate, snapshots_csv, tw_deviation,
};
use front_forge_core::potential::{check_assumptions, g_area, Potential};
use front_forge_core::profile::shock_profile;
use front_forge_core::psystem::{curve_csv, energy_residual, trace_curve, turning_points};
use front_forge_core::solver::interior_fixed_points;
use front_forge_core::{decay_rate, solve_front_from, Grid, Outcome, Profile, TraceOptions};
use serde_json::{json, Value};

use crate::config::{ChainInit, InitialProfile, RunConfig};
use crate::error::CliError;

/// Everything a command produces, written out only after the command succeeds.
pub struct Output {
    pub files: Vec<(&'static str, String)>,
    pub report: Value,
    pub exit: u8,
    pub summary: String,
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn check_potential(cfg: &RunConfig) -> Result<Output, CliError> {
    let res = cfg.resolve()?;
    let np = &res.np;
    let n = cfg.check.samples;
    let rep = check_assumptions(np, n)?;
    let tps = turning_points(np, (-1.0, 1.0), n.max(64))?;
    let fps = interior_fixed_points(np);

    let mut g = String::from("w,g,dphi,d2phi\n");
    for i in 0..n {
        let w = if i + 1 == n { 1.0 } else { -1.0 + 2.0 * i as f64 / (n - 1) as f64 };
        let gv = g_area(np, w)?;
        let _ = writeln!(g, "{w:.16e},{gv:.16e},{:.16e},{:.16e}", np.dphi(w), np.d2phi(w));
    }

    let flags: serde_json::Map<String, Value> = rep
        .flags()
        .iter()
        .map(|(k, f)| (k.to_string(), json!(if f.pass { "pass" } else { "fail" })))
        .collect();
    let failed: Vec<&str> = rep.flags().iter().filter(|(_, f)| !f.pass).map(|(k, _)| *k).collect();
    let summary = if failed.is_empty() {
        "all assumptions hold".to_string()
    } else {
        format!("failing assumptions: {}", failed.join(", "))
    };
    let report = json!({
        "command": "check-potential",
        "config": cfg,
        "all_pass": rep.all_pass(),
        "flags": flags,
        "assumptions": rep,
        "normalization": {
            "r_mean": np.r_mean,
            "r_jump": np.r_jump,
            "dphi_mean": np.dphi_mean,
            "dphi_jump": np.dphi_jump,
        },
        "lambda_minus": np.lambda_minus,
        "lambda_plus": np.lambda_plus,
        "energy_gap": np.energy_gap(),
        "turning_points": tps,
        "fixed_points": fps,
        "shock": res.shock,
    });
    Ok(Output {
        files: vec![("g.csv", g)],
        report,
        exit: 0,
        summary,
    })
}

pub fn shock_curve(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec = cfg.base_potential()?;
    let c = &cfg.curve;
    if !(c.step > 0.0 && c.step.is_finite()) {
        return Err(validation(format!("curve.step must be positive, got {}", c.step)));
    }
    if !(c.range.0 < c.range.1) {
        return Err(validation(format!("curve.range {:?} is empty", c.range)));
    }
    if c.max_points == 0 {
        return Err(validation("curve.max_points must be positive"));
    }
    let tps = turning_points(&spec, c.range, c.samples)?;
    let seeds: Vec<(f64, Value)> = match &c.seeds {
        Some(s) => s.iter().map(|&x| (x, Value::Null)).collect(),
        None => tps.iter().map(|t| (t.r, json!(t.kind))).collect(),
    };
    let opts = TraceOptions {
        step: c.step,
        max_points: c.max_points,
        bounds: c.bounds.unwrap_or((f64::NEG_INFINITY, f64::INFINITY)),
    };

    let mut csv = String::from("r_minus,r_plus,J_residual,sigma_branch2,type\n");
    let mut curves = Vec::new();
    let mut row = 0;
    for (seed, kind) in seeds {
        let curve = trace_curve(&spec, seed, &opts)?;
        curve.check()?;
        let body = curve_csv(&spec, &curve);
        csv.extend(body.lines().skip(1).flat_map(|l| [l, "\n"]));
        let max_j = curve
            .points
            .iter()
            .map(|&(a, b)| energy_residual(&spec, a, b).abs())
            .fold(0.0, f64::max);
        curves.push(json!({
            "seed": seed,
            "kind": kind,
            "points": curve.points.len(),
            "rows": [row, row + curve.points.len()],
            "termination": curve.termination,
            "max_abs_J": max_j,
        }));
        row += curve.points.len();
    }
    let summary = format!("{} curve(s), {row} points", curves.len());
    let report = json!({
        "command": "shock-curve",
        "config": cfg,
        "turning_points": tps,
        "curves": curves,
    });
    Ok(Output {
        files: vec![("curve.csv", csv)],
        report,
        exit: 0,
        summary,
    })
}

pub fn decay(cfg: &RunConfig) -> Result<Output, CliError> {
    let lambdas: Vec<(&str, f64)> = match &cfg.decay.lambdas {
        Some(v) => {
            if v.is_empty() {
                return Err(validation("decay.lambdas is empty"));
            }
            if let Some(bad) = v.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
                return Err(validation(format!("decay.lambdas entries must lie in (0, 1), got {bad}")));
            }
            v.iter().map(|&l| ("given", l)).collect()
        }
        None => {
            let res = cfg.resolve()?;
            vec![("minus", res.np.lambda_minus), ("plus", res.np.lambda_plus)]
        }
    };
    let mut rates = Vec::new();
    for (side, l) in &lambdas {
        let tau = decay_rate(*l)?;
        rates.push(json!({ "side": side, "lambda": l, "tau": tau }));
    }
    let mut table = String::from("lambda,tau\n");
    for i in 1..100 {
        let l = i as f64 / 100.0;
        let _ = writeln!(table, "{l:.16e},{:.16e}", decay_rate(l)?);
    }
    let summary = rates
        .iter()
        .map(|r| format!("lambda {} -> tau {}", r["lambda"], r["tau"]))
        .collect::<Vec<_>>()
        .join("; ");
    let report = json!({
        "command": "decay-rate",
        "config": cfg,
        "rates": rates,
    });
    Ok(Output {
        files: vec![("decay.csv", table)],
        report,
        exit: 0,
        summary,
    })
}

fn initial_profile(cfg: &RunConfig, grid: Grid) -> Result<Profile, CliError> {
    match &cfg.initial {
        InitialProfile::Shock => Ok(shock_profile(grid)),
        InitialProfile::Tanh { width } => {
            if !(*width > 0.0 && width.is_finite()) {
                return Err(validation(format!("initial.width must be positive, got {width}")));
            }
            Ok(Profile::from_fn(grid, |x| (x / width).tanh(), -1.0, 1.0))
        }
        InitialProfile::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
            let mut lines = text.lines();
            let header = lines.next().unwrap_or_default();
            if !header.starts_with("phi,W") {
                return Err(validation(format!("{}: expected a phi,W header", path.display())));
            }
            let mut values = Vec::with_capacity(grid.len());
            for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
                let mut cols = line.split(',').map(|s| s.trim().parse::<f64>());
                let (Some(Ok(phi)), Some(Ok(w))) = (cols.next(), cols.next()) else {
                    return Err(validation(format!("{}: bad row {}", path.display(), i + 2)));
                };
                if i >= grid.len() || (phi - grid.phi(i)).abs() > 1e-9 {
                    return Err(validation(format!(
                        "{}: row {} at phi = {phi} is off the configured grid",
                        path.display(),
                        i + 2
                    )));
                }
                values.push(w);
            }
            Ok(Profile::new(grid, values, -1.0, 1.0)?)
        }
    }
}

fn history_csv(r: &front_forge_core::FrontResult) -> String {
    let mut out = String::from("iteration,residual,action,pinned_action,shift,total_shift,boundary_contact,cone_correction\n");
    for h in &r.history {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e}",
            h.iteration,
            h.residual,
            h.action,
            h.pinned_action,
            h.shift,
            h.total_shift,
            u8::from(h.boundary_contact),
            h.cone_correction
        );
    }
    out
}

pub fn solve(cfg: &RunConfig) -> Result<Output, CliError> {
    let res = cfg.resolve()?;
    let grid = cfg.grid()?;
    let solver = cfg.solver()?;
    let w0 = initial_profile(cfg, grid)?;
    let r = solve_front_from(&res.np, w0, &solver)?;
    let verification = (r.outcome == Outcome::Converged).then(|| verify_front(&res.np, &r));
    let decay = decay_report(&res.np, &r.profile, DEFAULT_BAND);

    let mut files = vec![("profile.csv", r.profile.to_csv()), ("history.csv", history_csv(&r))];
    if let (Outcome::Converged, Some(shock)) = (r.outcome, res.shock) {
        let front = denormalize_front(&res.np, &r.profile, &shock)?;
        let mut csv = String::from("phi,R,V\n");
        for x in grid.nodes() {
            let _ = writeln!(csv, "{x:.16e},{:.16e},{:.16e}", front.r(x), front.v(x));
        }
        files.push(("front.csv", csv));
    }

    let exit = if r.outcome == Outcome::MaxIter { 3 } else { 0 };
    let summary = format!(
        "{:?} after {} iterations, residual {:e}, action {}",
        r.outcome, r.iterations, r.residual, r.action
    );
    let report = json!({
        "command": "solve-front",
        "config": cfg,
        "outcome": r.outcome,
        "residual": r.residual,
        "action": r.action,
        "action_sharp": r.action_sharp,
        "iterations": r.iterations,
        "lambda_minus": res.np.lambda_minus,
        "lambda_plus": res.np.lambda_plus,
        "tau_plus_fit": decay.tau_plus_fit,
        "tau_minus_fit": decay.tau_minus_fit,
        "tau_plus_pred": decay.tau_plus_pred,
        "tau_minus_pred": decay.tau_minus_pred,
        "shifts": r.shifts(),
        "diagnosis": r.diagnosis,
        "fixed_points": r.fixed_points,
        "verification": verification,
        "decay": decay,
        "shock": res.shock,
    });
    Ok(Output {
        files,
        report,
        exit,
        summary,
    })
}

pub fn simulate_chain(cfg: &RunConfig) -> Result<Output, CliError> {
    let res = cfg.resolve()?;
    let shock = res.shock()?;
    let ch = cfg.chain;
    if !(ch.dt > 0.0 && ch.dt.is_finite()) {
        return Err(validation(format!("chain.dt must be positive, got {}", ch.dt)));
    }
    if !(ch.snapshot_every >= ch.dt && ch.t_end >= ch.snapshot_every) {
        return Err(validation(format!(
            "need dt <= snapshot_every <= t_end, got {} / {} / {}",
            ch.dt, ch.snapshot_every, ch.t_end
        )));
    }
    let steps = (ch.snapshot_every / ch.dt).round() as usize;
    let n_snaps = (ch.t_end / ch.snapshot_every).round() as usize;
    if (steps as f64 * ch.dt - ch.snapshot_every).abs() > 1e-9 * ch.snapshot_every
        || (n_snaps as f64 * ch.snapshot_every - ch.t_end).abs() > 1e-9 * ch.t_end
    {
        return Err(validation("snapshot_every must be a multiple of dt and divide t_end"));
    }

    let (state, front) = match ch.init {
        ChainInit::Front => {
            let grid = cfg.grid()?;
            if ch.n < 4 * grid.m {
                return Err(validation(format!("chain.N = {} is below 4M = {}", ch.n, 4 * grid.m)));
            }
            let solver = cfg.solver()?;
            let r = solve_front_from(&res.np, initial_profile(cfg, grid)?, &solver)?;
            if r.outcome != Outcome::Converged {
                return Err(CliError::NonConvergence(format!(
                    "front solve ended with {:?} after {} iterations",
                    r.outcome, r.iterations
                )));
            }
            let front = denormalize_front(&res.np, &r.profile, &shock)?;
            (init_front(&front, ch.n)?, Some(front))
        }
        ChainInit::Riemann => (init_riemann(&shock, ch.n, ch.smoothing)?, None),
    };

    let (end, snaps) = simulate(&state, &res.spec, ch.dt, steps, n_snaps)?;
    let origin = 0.5 * ch.n as f64;
    let (shape_error, speed_fit) = match &front {
        Some(f) => {
            let dev = tw_deviation(&snaps, |x| f.r(x), shock.sigma, origin, shock.r_mean())?;
            (Some(dev.shape_error), dev.speed_fit)
        }
        None => {
            let late: Vec<_> = snaps.iter().filter(|s| s.time >= 0.5 * ch.t_end).collect();
            let (ts, xs): (Vec<f64>, Vec<f64>) = late
                .iter()
                .filter_map(|s| crossing_position(&s.strains, shock.r_mean()).map(|x| (s.time, x)))
                .unzip();
            let speed = if ts.len() >= 2 { linear_slope(&ts, &xs) } else { f64::NAN };
            (None, speed)
        }
    };
    let jump_speed_sq = res.np.dphi_jump / res.np.r_jump;
    let rel = (speed_fit * speed_fit - jump_speed_sq).abs() / jump_speed_sq;
    let drift = energy_drift(&snaps);
    let monotone = is_monotone_transition(&end.strains, shock.r_minus, shock.r_plus, 0.01);

    let summary = format!(
        "t = {}: speed {speed_fit}, sigma {}, energy drift {drift:e}",
        end.time, shock.sigma
    );
    let report = json!({
        "command": "simulate-chain",
        "config": cfg,
        "init": ch.init,
        "sigma": shock.sigma,
        "jump_speed_sq": jump_speed_sq,
        "speed_fit": speed_fit,
        "speed_sq_rel_error": rel,
        "shape_error": shape_error,
        "energy_drift": drift,
        "monotone_transition": monotone,
        "final_time": end.time,
        "snapshots": snaps.len(),
        "shock": shock,
    });
    Ok(Output {
        files: vec![("snapshots.csv", snapshots_csv(&snaps))],
        report,
        exit: 0,
        summary,
    })
}
