//! Fixed-point map, action functionals, Euler gradient-flow iteration and
//! regime diagnosis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{g_area, NormalizedPotential, Potential};
use crate::profile::{average, crossing_index, enforce_cone, pin, shock_profile, Grid, Profile};

/// Largest |w| accepted by `apply_T`.
pub const DOMAIN_BAND: f64 = 1.05;
/// A front whose end nodes stray further than this from -+1 touches the boundary.
pub const BOUNDARY_TOL: f64 = 1e-3;
pub const STAGNATION_TOL: f64 = 1e-3;
pub const PLATEAU_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// 0 disables pinning.
    pub pin_every: usize,
    pub diag_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            tol: 1e-10,
            max_iter: 10_000,
            pin_every: 1,
            diag_window: 50,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        if self.diag_window < 2 {
            return Err(Error::InvalidConfig("diag_window must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Converged,
    TravellingShift,
    Plateau,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iteration: usize,
    /// `||W - T[W]||` of the iterate before the step.
    pub residual: f64,
    /// Action of the iterate plus the jumps removed by pinning so far; the
    /// action of the unpinned sequence.
    pub action: f64,
    /// Action of the pinned iterate.
    pub pinned_action: f64,
    /// Crossing index before pinning.
    pub crossing: Option<usize>,
    pub shift: isize,
    pub total_shift: isize,
    /// Node counts of `|w - wbar| < 0.05`, one per interior fixed point.
    pub plateau_counts: Vec<usize>,
    pub boundary_contact: bool,
    pub cone_correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub outcome: Outcome,
    /// Mean pinning shift per iteration over the window (nodes).
    pub drift_rate: Option<f64>,
    pub plateau_value: Option<f64>,
    /// Mean plateau growth over the window (nodes per iteration).
    pub plateau_growth: Option<f64>,
}

impl Diagnosis {
    fn plain(outcome: Outcome) -> Self {
        Self {
            outcome,
            drift_rate: None,
            plateau_value: None,
            plateau_growth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontResult {
    pub profile: Profile,
    pub residual: f64,
    pub action: f64,
    pub action_sharp: f64,
    pub iterations: usize,
    pub outcome: Outcome,
    pub diagnosis: Diagnosis,
    pub history: Vec<IterRecord>,
    pub fixed_points: Vec<f64>,
}

impl FrontResult {
    pub fn shifts(&self) -> Vec<isize> {
        self.history.iter().map(|r| r.shift).collect()
    }
}

fn check_band(w: &Profile) -> Result<()> {
    match w.values.iter().position(|v| !(v.abs() <= DOMAIN_BAND)) {
        Some(index) => Err(Error::PotentialDomain {
            index,
            value: w.values[index],
        }),
        None => Ok(()),
    }
}

/// `T[W] = A Phi_hat'(A W)`.
#[allow(non_snake_case)]
pub fn apply_T(np: &NormalizedPotential, w: &Profile) -> Result<Profile> {
    check_band(w)?;
    let aw = average(w);
    let f = aw.map(|v| np.dphi(v), np.dphi(w.left_limit), np.dphi(w.right_limit));
    Ok(average(&f))
}

pub fn residual(np: &NormalizedPotential, w: &Profile) -> Result<f64> {
    let t = apply_T(np, w)?;
    Ok(diff_norm(w, &t))
}

fn diff_norm(a: &Profile, b: &Profile) -> f64 {
    let d: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y) * (x - y))
        .collect();
    a.grid.trapezoid(&d).sqrt()
}

/// `L(W) = int (W^2/2 - Phi(AW)) - (W_sh^2/2 - Phi(A W_sh))`.
///
/// The reference uses the discrete average of the sampled shock profile,
/// which differs from `clamp(2 phi)` by O(h) near `|phi| = 1/2`; this keeps
/// `L(W_sh) = 0` exact on every grid.
pub fn action(np: &NormalizedPotential, w: &Profile) -> f64 {
    let aw = average(w);
    let sh = shock_profile(w.grid);
    let ash = average(&sh);
    let f: Vec<f64> = (0..w.len())
        .map(|i| {
            let s = sh.values[i];
            let v = w.values[i];
            0.5 * (v * v - s * s) - (np.phi(aw.values[i]) - np.phi(ash.values[i]))
        })
        .collect();
    w.grid.trapezoid(&f)
}

/// `L#(W) = int g(W)`.
pub fn action_sharp(np: &NormalizedPotential, w: &Profile) -> Result<f64> {
    let f = w
        .values
        .iter()
        .map(|&v| g_area(np, v))
        .collect::<Result<Vec<f64>>>()?;
    Ok(w.grid.trapezoid(&f))
}

/// `(1 - lambda) W + lambda T[W]` followed by `enforce_cone`.
pub fn euler_step(np: &NormalizedPotential, w: &Profile, lambda: f64) -> Result<Profile> {
    euler_step_with_correction(np, w, lambda).map(|(p, _)| p)
}

fn euler_step_with_correction(
    np: &NormalizedPotential,
    w: &Profile,
    lambda: f64,
) -> Result<(Profile, f64)> {
    let t = apply_T(np, w)?;
    euler_combine(w, &t, lambda)
}

fn euler_combine(w: &Profile, t: &Profile, lambda: f64) -> Result<(Profile, f64)> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "lambda must lie in (0, 1], got {lambda}"
        )));
    }
    let values = if lambda == 1.0 {
        t.values.clone()
    } else {
        w.values
            .iter()
            .zip(&t.values)
            .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
            .collect()
    };
    let mixed = Profile {
        values,
        ..w.clone()
    };
    Ok(enforce_cone(&mixed))
}

/// Interior solutions of `w = Phi_hat'(w)`, sorted.
pub fn interior_fixed_points(np: &NormalizedPotential) -> Vec<f64> {
    const N: usize = 4000;
    let lo = -1.0 + 1e-6;
    let hi = 1.0 - 1e-6;
    let f = |w: f64| np.dphi(w) - w;
    let mut out: Vec<f64> = Vec::new();
    let mut prev = (lo, f(lo));
    for i in 1..=N {
        let x = lo + (hi - lo) * i as f64 / N as f64;
        let fx = f(x);
        if fx == 0.0 {
            out.push(x);
        } else if prev.1 != 0.0 && prev.1.signum() != fx.signum() {
            let (mut a, mut b, fa) = (prev.0, x, prev.1);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a < 1e-14 {
                    break;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = (x, fx);
    }
    out
}

fn plateau_counts(w: &Profile, fixed: &[f64]) -> Vec<usize> {
    fixed
        .iter()
        .map(|&wb| {
            w.values
                .iter()
                .filter(|v| (*v - wb).abs() < PLATEAU_BAND)
                .count()
        })
        .collect()
}

fn touches_boundary(w: &Profile) -> bool {
    let n = w.len();
    (w.values[0] - w.left_limit).abs() > BOUNDARY_TOL
        || (w.values[n - 1] - w.right_limit).abs() > BOUNDARY_TOL
}

/// Classifies the tail of an iteration history.
///
/// Looks at the last `cfg.diag_window` records; errs with `Indeterminate`
/// when neither convergence, a growing plateau nor a steady drift is seen.
pub fn diagnose(history: &[IterRecord], fixed_points: &[f64], cfg: &SolverConfig) -> Result<Diagnosis> {
    let n = cfg.diag_window;
    let indeterminate = Error::Indeterminate {
        iterations: history.len(),
    };
    let last = history.last().ok_or(indeterminate.clone())?;
    if last.residual <= cfg.tol && !last.boundary_contact {
        return Ok(Diagnosis::plain(Outcome::Converged));
    }
    if history.len() < n {
        return Err(indeterminate);
    }
    let win = &history[history.len() - n..];

    let mut best: Option<(f64, f64)> = None;
    for (j, &wb) in fixed_points.iter().enumerate() {
        let counts: Vec<usize> = win.iter().map(|r| r.plateau_counts[j]).collect();
        let monotone = counts.windows(2).all(|c| c[1] >= c[0]);
        let growth = counts[n - 1] as f64 - counts[0] as f64;
        if monotone && growth >= (n as f64 / 10.0).max(1.0) {
            let rate = growth / (n - 1) as f64;
            if best.is_none_or(|(_, r)| rate > r) {
                best = Some((wb, rate));
            }
        }
    }
    if let Some((wb, rate)) = best {
        return Ok(Diagnosis {
            outcome: Outcome::Plateau,
            drift_rate: None,
            plateau_value: Some(wb),
            plateau_growth: Some(rate),
        });
    }

    let (rmin, rmax) = win
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.residual), b.max(r.residual)));
    let stagnant = rmax > cfg.tol && (rmax - rmin) / rmax < STAGNATION_TOL;
    let nonzero: Vec<isize> = win.iter().map(|r| r.shift).filter(|&s| s != 0).collect();
    let one_sign = nonzero.iter().all(|&s| s > 0) || nonzero.iter().all(|&s| s < 0);
    if stagnant && one_sign && nonzero.len() * 4 >= n {
        let total: isize = win.iter().map(|r| r.shift).sum();
        return Ok(Diagnosis {
            outcome: Outcome::TravellingShift,
            drift_rate: Some(total as f64 / n as f64),
            plateau_value: None,
            plateau_growth: None,
        });
    }
    Err(indeterminate)
}

/// Gradient-flow iteration started from the shock profile.
pub fn solve_front(np: &NormalizedPotential, grid: Grid, cfg: &SolverConfig) -> Result<FrontResult> {
    solve_front_from(np, shock_profile(grid), cfg)
}

/// Gradient-flow iteration from `w0`.
///
/// Iterates until the residual drops below `tol`, a steady drift of the
/// pinning shifts is seen, or `max_iter` is hit. A detected plateau keeps
/// growing until the profile reaches the domain ends.
pub fn solve_front_from(np: &NormalizedPotential, w0: Profile, cfg: &SolverConfig) -> Result<FrontResult> {
    cfg.validate()?;
    let fixed_points = interior_fixed_points(np);
    let mut w = if cfg.pin_every > 0 { pin(&w0)?.0 } else { w0 };
    let mut history: Vec<IterRecord> = Vec::new();
    let mut offset = 0.0;
    let mut total_shift = 0isize;
    let mut pinned_action = action(np, &w);
    let mut plateau: Option<Diagnosis> = None;

    for it in 0..cfg.max_iter {
        let t = apply_T(np, &w)?;
        let res = diff_norm(&w, &t);
        let contact = touches_boundary(&w);
        history.push(IterRecord {
            iteration: it,
            residual: res,
            action: pinned_action + offset,
            pinned_action,
            crossing: crossing_index(&w),
            shift: 0,
            total_shift,
            plateau_counts: plateau_counts(&w, &fixed_points),
            boundary_contact: contact,
            cone_correction: 0.0,
        });

        if let Some(d) = &plateau {
            if contact {
                return finish(np, w, res, history, d.clone(), fixed_points);
            }
        }
        let warm = history.len() >= cfg.diag_window;
        if res <= cfg.tol || warm {
            match diagnose(&history, &fixed_points, cfg) {
                Ok(d) if d.outcome == Outcome::Converged => {
                    return finish(np, w, res, history, d, fixed_points);
                }
                Ok(d) if d.outcome == Outcome::Plateau => {
                    if contact {
                        return finish(np, w, res, history, d, fixed_points);
                    }
                    plateau = Some(d);
                }
                Ok(d) if plateau.is_none() => {
                    return finish(np, w, res, history, d, fixed_points);
                }
                _ => {}
            }
        }

        let (next, corr) = euler_combine(&w, &t, cfg.lambda)?;
        let rec = history.last_mut().expect("pushed above");
        rec.cone_correction = corr;
        let pre = action(np, &next);
        w = next;
        pinned_action = pre;
        if cfg.pin_every > 0 && (it + 1) % cfg.pin_every == 0 {
            let (pinned, s) = pin(&w)?;
            if s != 0 {
                w = pinned;
                pinned_action = action(np, &w);
                offset += pre - pinned_action;
                total_shift += s;
            }
            // the shift belongs to the step that produced it
            let rec = history.last_mut().expect("pushed above");
            rec.shift = s;
        }
    }

    let res = residual(np, &w)?;
    let diagnosis = plateau.unwrap_or(Diagnosis::plain(Outcome::MaxIter));
    finish(np, w, res, history, diagnosis, fixed_points)
}

fn finish(
    np: &NormalizedPotential,
    w: Profile,
    residual: f64,
    history: Vec<IterRecord>,
    diagnosis: Diagnosis,
    fixed_points: Vec<f64>,
) -> Result<FrontResult> {
    Ok(FrontResult {
        action: action(np, &w),
        action_sharp: action_sharp(np, &w)?,
        residual,
        iterations: history.len(),
        outcome: diagnosis.outcome,
        diagnosis,
        history,
        profile: w,
        fixed_points,
    })
}
