//! Exponential tail rates: prediction from the characteristic equation,
//! log-linear fits of computed fronts, and a bundled front verification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{g_unchecked, NormalizedPotential, Potential};
use crate::profile::{deviation, Profile};
use crate::solver::{action, action_sharp, residual, FrontResult, Outcome};

pub const DEFAULT_BAND: (f64, f64) = (1e-8, 1e-2);
/// Deviations smaller than this are treated as saturated when checking monotonicity.
pub const SATURATION: f64 = 1e-12;

/// `lambda (sinh(t/2) / (t/2))^2 - 1`; same roots as `t^2 = 2 lambda (cosh t - 1)` for `t > 0`.
fn char_fn(lambda: f64, tau: f64) -> f64 {
    let x = 0.5 * tau;
    let q = x.sinh() / x;
    lambda * q * q - 1.0
}

/// Positive root of `tau^2 = 2 lambda (cosh tau - 1)`.
pub fn decay_rate(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositive { lambda });
    }
    if lambda >= 1.0 - 1e-12 {
        return Err(Error::Sonic { lambda });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while char_fn(lambda, hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if char_fn(lambda, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Decay rate of `|W_sh - w|` on one side from a least-squares fit of its logarithm.
pub fn fit_tail(w: &Profile, side: Side, band: (f64, f64)) -> Result<f64> {
    fit_deviation(&deviation(w), side, band)
}

/// As `fit_tail`, but takes the deviation `W_sh - w` itself, avoiding the
/// cancellation in `1 - w` for tiny deviations.
pub fn fit_deviation(dev: &Profile, side: Side, band: (f64, f64)) -> Result<f64> {
    let g = dev.grid;
    let c = g.center();
    let (xs, ys): (Vec<f64>, Vec<f64>) = dev
        .values
        .iter()
        .enumerate()
        .filter(|&(i, _)| match side {
            Side::Left => i < c,
            Side::Right => i > c,
        })
        .filter(|(_, v)| v.abs() >= band.0 && v.abs() <= band.1)
        .map(|(i, v)| (g.phi(i), v.abs().ln()))
        .unzip();
    if xs.len() < 8 {
        return Err(Error::InsufficientPoints { found: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(match side {
        Side::Right => -slope,
        Side::Left => slope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub tau_plus_pred: Option<f64>,
    pub tau_minus_pred: Option<f64>,
    pub tau_plus_fit: Option<f64>,
    pub tau_minus_fit: Option<f64>,
    pub fit_window: (f64, f64),
    /// `|fit - pred| / pred` for the right and left tails.
    pub relative_error: (Option<f64>, Option<f64>),
}

pub fn decay_report(np: &NormalizedPotential, w: &Profile, band: (f64, f64)) -> DecayReport {
    let tp = decay_rate(np.lambda_plus).ok();
    let tm = decay_rate(np.lambda_minus).ok();
    let fp = fit_tail(w, Side::Right, band).ok();
    let fm = fit_tail(w, Side::Left, band).ok();
    let rel = |f: Option<f64>, p: Option<f64>| Some((f? - p?).abs() / p?);
    DecayReport {
        tau_plus_pred: tp,
        tau_minus_pred: tm,
        tau_plus_fit: fp,
        tau_minus_fit: fm,
        fit_window: band,
        relative_error: (rel(fp, tp), rel(fm, tm)),
    }
}

/// Constants `c_lo <= g(w) / (+-1 - w)^2 <= c_hi` on the two halves of `[-1, 1]`.
///
/// The endpoint limits are `g''(+-1) / 2 = (1 - Phi''(+-1)) / 2`.
pub fn sharp_constants(np: &NormalizedPotential) -> (f64, f64) {
    const N: usize = 20_000;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut take = |r: f64| {
        lo = lo.min(r);
        hi = hi.max(r);
    };
    take(0.5 * (1.0 - np.d2phi(1.0)));
    take(0.5 * (1.0 - np.d2phi(-1.0)));
    for i in 0..=N {
        let w = -1.0 + 2.0 * i as f64 / N as f64;
        let (dl, dr) = (1.0 + w, 1.0 - w);
        let g = g_unchecked(np, w);
        if w <= 0.0 && dl >= 1e-4 {
            take(g / (dl * dl));
        }
        if w >= 0.0 && dr >= 1e-4 {
            take(g / (dr * dr));
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub residual_tol: f64,
    pub band: (f64, f64),
    pub decay_rel_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            band: DEFAULT_BAND,
            decay_rel_tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub residual: f64,
    pub residual_ok: bool,
    pub min_increment: f64,
    pub monotone_ok: bool,
    pub action: f64,
    pub action_sharp: f64,
    pub action_gap_ok: bool,
    pub c_lower: f64,
    pub c_upper: f64,
    /// `||W_sh - W||^2` without the node at the origin.
    pub deviation_sq: f64,
    pub sharp_bounds_ok: bool,
    pub decay: DecayReport,
    pub decay_ok: bool,
    /// `max |w[i+1] - 2 w[i] + w[i-1]| / h^2`.
    pub max_second_difference: f64,
    pub smooth_ok: bool,
    pub violations: Vec<String>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Smallest increment between neighbouring nodes whose deviation from -+1
/// is at least `SATURATION`.
pub fn min_resolved_increment(w: &Profile) -> f64 {
    let dev = deviation(w);
    w.values
        .windows(2)
        .zip(dev.values.windows(2))
        .filter(|(_, d)| d[0].abs() >= SATURATION && d[1].abs() >= SATURATION)
        .map(|(v, _)| v[1] - v[0])
        .fold(f64::INFINITY, f64::min)
}

/// Checks that `(c_lo, c_hi)` bound `L#` for a pinned cone profile.
///
/// The node at the origin is left out of the norm; its `g` value enters as
/// slack on the upper side.
pub fn sharp_bounds_hold(np: &NormalizedPotential, w: &Profile, c_lo: f64, c_hi: f64) -> Result<(bool, f64, f64)> {
    let ls = action_sharp(np, w)?;
    let dev = deviation(w);
    let g = w.grid;
    let c = g.center();
    let mut sq: Vec<f64> = dev.values.iter().map(|v| v * v).collect();
    sq[c] = 0.0;
    let dsq = g.trapezoid(&sq);
    let slack = 1e-9 * (c_lo.abs() + c_hi.abs()) * dsq + 1e-15;
    let node0 = g.h() * g_unchecked(np, w.values[c]);
    let ok = c_lo * dsq <= ls + slack && ls <= c_hi * dsq + node0.max(0.0) + slack;
    Ok((ok, ls, dsq))
}

pub fn verify_front(np: &NormalizedPotential, result: &FrontResult) -> VerificationReport {
    verify_front_with(np, result, &VerifyOptions::default())
}

pub fn verify_front_with(np: &NormalizedPotential, result: &FrontResult, opts: &VerifyOptions) -> VerificationReport {
    let w = &result.profile;
    let g = w.grid;
    let h = g.h();
    let mut violations = Vec::new();
    if result.outcome != Outcome::Converged {
        violations.push(format!("outcome is {:?}, not Converged", result.outcome));
    }

    let res = residual(np, w).unwrap_or(f64::INFINITY);
    let residual_ok = res <= opts.residual_tol;
    if !residual_ok {
        violations.push(format!("residual {res:e} exceeds {:e}", opts.residual_tol));
    }

    let min_inc = min_resolved_increment(w);
    let monotone_ok = min_inc > 0.0;
    if !monotone_ok {
        violations.push(format!("not strictly increasing: min increment {min_inc:e}"));
    }

    let l = action(np, w);
    let (c_lower, c_upper) = sharp_constants(np);
    let (sharp_bounds_ok, ls, dsq) = match sharp_bounds_hold(np, w, c_lower, c_upper) {
        Ok(t) => t,
        Err(e) => {
            violations.push(format!("sharp action undefined: {e}"));
            (false, f64::NAN, f64::NAN)
        }
    };
    if !sharp_bounds_ok && ls.is_finite() {
        violations.push(format!(
            "sharp action {ls:e} outside [{:e}, {:e}]",
            c_lower * dsq,
            c_upper * dsq
        ));
    }
    let action_gap_ok = (l - ls).abs() <= 4.0 + 10.0 * h;
    if !action_gap_ok {
        violations.push(format!("|L - L#| = {:e} exceeds 4 + 10h", (l - ls).abs()));
    }

    let decay = decay_report(np, w, opts.band);
    let decay_ok = match decay.relative_error {
        (Some(a), Some(b)) => a <= opts.decay_rel_tol && b <= opts.decay_rel_tol,
        _ => false,
    };
    if !decay_ok {
        violations.push(format!("tail rates off: {:?}", decay.relative_error));
    }

    let max_d2 = w
        .values
        .windows(3)
        .map(|t| (t[2] - 2.0 * t[1] + t[0]).abs())
        .fold(0.0f64, f64::max)
        / (h * h);
    // a jump of size s gives s / h^2, bounded curvature stays O(1)
    let smooth_ok = max_d2 <= 1.0 / h;
    if !smooth_ok {
        violations.push(format!("second differences {max_d2:e} suggest a kink or jump"));
    }

    VerificationReport {
        residual: res,
        residual_ok,
        min_increment: min_inc,
        monotone_ok,
        action: l,
        action_sharp: ls,
        action_gap_ok,
        c_lower,
        c_upper,
        deviation_sq: dsq,
        sharp_bounds_ok,
        decay,
        decay_ok,
        max_second_difference: max_d2,
        smooth_ok,
        violations,
    }
}
