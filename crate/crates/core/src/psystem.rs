//! Shock algebra of the p-system: Rankine–Hugoniot data, shock types, and
//! continuation of conservative-shock curves `J(r-, r+) = 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;

pub const CURVE_TOL: f64 = 1e-10;
pub const SONIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockData {
    pub r_minus: f64,
    pub r_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub sigma: f64,
}

impl ShockData {
    pub fn r_jump(&self) -> f64 {
        self.r_plus - self.r_minus
    }
    pub fn v_jump(&self) -> f64 {
        self.v_plus - self.v_minus
    }
    pub fn r_mean(&self) -> f64 {
        0.5 * (self.r_plus + self.r_minus)
    }
    pub fn v_mean(&self) -> f64 {
        0.5 * (self.v_plus + self.v_minus)
    }

    /// Mass, momentum and energy jump residuals.
    pub fn jump_residuals<P: Potential + ?Sized>(&self, p: &P) -> [f64; 3] {
        let s = self.sigma;
        let (vm, vp) = (self.v_minus, self.v_plus);
        let (fm, fp) = (p.dphi(self.r_minus), p.dphi(self.r_plus));
        let em = 0.5 * vm * vm + p.phi(self.r_minus);
        let ep = 0.5 * vp * vp + p.phi(self.r_plus);
        [
            s * self.r_jump() + self.v_jump(),
            s * self.v_jump() + (fp - fm),
            s * (ep - em) + (fp * vp - fm * vm),
        ]
    }

    /// Adds `dv` to both velocities.
    pub fn boosted(&self, dv: f64) -> Self {
        Self {
            v_minus: self.v_minus + dv,
            v_plus: self.v_plus + dv,
            ..*self
        }
    }

    /// The same shock seen with the lattice index reversed.
    pub fn mirrored(&self) -> Self {
        Self {
            r_minus: self.r_plus,
            r_plus: self.r_minus,
            v_minus: -self.v_plus,
            v_plus: -self.v_minus,
            sigma: -self.sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShockType {
    Lax,
    Rarefaction,
    Supersonic,
    Subsonic,
    Sonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    One,
    Two,
}

impl Branch {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Branch::One),
            2 => Ok(Branch::Two),
            _ => Err(Error::BadParams(format!("branch must be 1 or 2, got {i}"))),
        }
    }
}

/// `[Phi] - [r] <Phi'>`.
pub fn energy_residual<P: Potential + ?Sized>(p: &P, r_minus: f64, r_plus: f64) -> f64 {
    let dr = r_plus - r_minus;
    p.phi(r_plus) - p.phi(r_minus) - dr * 0.5 * (p.dphi(r_plus) + p.dphi(r_minus))
}

/// Partial derivatives of the energy residual with respect to `r-` and `r+`.
pub fn energy_residual_gradient<P: Potential + ?Sized>(p: &P, r_minus: f64, r_plus: f64) -> [f64; 2] {
    let dr = r_plus - r_minus;
    let df = p.dphi(r_plus) - p.dphi(r_minus);
    [
        0.5 * df - 0.5 * dr * p.d2phi(r_minus),
        0.5 * df - 0.5 * dr * p.d2phi(r_plus),
    ]
}

pub fn complete_shock<P: Potential + ?Sized>(
    p: &P,
    r_minus: f64,
    r_plus: f64,
    v_minus: f64,
    branch: Branch,
) -> Result<ShockData> {
    let dr = r_plus - r_minus;
    if dr == 0.0 {
        return Err(Error::DegenerateJump { r: r_minus });
    }
    let df = p.dphi(r_plus) - p.dphi(r_minus);
    let ratio = df / dr;
    if !(ratio > 0.0) {
        return Err(Error::NonHyperbolic {
            dphi_jump: df,
            r_jump: dr,
        });
    }
    let speed = ratio.sqrt();
    let sigma = match branch {
        Branch::One => -speed,
        Branch::Two => speed,
    };
    Ok(ShockData {
        r_minus,
        r_plus,
        v_minus,
        v_plus: v_minus - sigma * dr,
        sigma,
    })
}

pub fn classify<P: Potential + ?Sized>(p: &P, s: &ShockData) -> Result<ShockType> {
    let sound = |r: f64| {
        let d2 = p.d2phi(r);
        if d2 < 0.0 {
            Err(Error::ComplexSoundSpeed { r, d2 })
        } else {
            Ok(d2.sqrt())
        }
    };
    let (cm, cp) = (sound(s.r_minus)?, sound(s.r_plus)?);
    let speed = s.sigma.abs();
    if (speed - cm).abs() <= SONIC_TOL || (speed - cp).abs() <= SONIC_TOL {
        return Ok(ShockType::Sonic);
    }
    if speed > cm && speed > cp {
        return Ok(ShockType::Supersonic);
    }
    if speed < cm && speed < cp {
        return Ok(ShockType::Subsonic);
    }
    // signed comparison; sound speeds carry the sign of sigma
    let sg = s.sigma.signum();
    let (lm, lp) = (sg * cm, sg * cp);
    if lm > s.sigma && s.sigma > lp {
        Ok(ShockType::Lax)
    } else {
        Ok(ShockType::Rarefaction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurningKind {
    /// Local maximum of `Phi''`.
    ConvexConcave,
    /// Local minimum of `Phi''`.
    ConcaveConvex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub r: f64,
    pub kind: TurningKind,
}

/// Sign changes of `Phi'''` on `[a, b]`, refined by bisection.
pub fn turning_points<P: Potential + ?Sized>(
    p: &P,
    interval: (f64, f64),
    n_grid: usize,
) -> Result<Vec<TurningPoint>> {
    let (a, b) = interval;
    if !(a < b) || n_grid < 16 {
        return Err(Error::BadParams(format!(
            "need a < b and n_grid >= 16, got [{a}, {b}], {n_grid}"
        )));
    }
    let xs: Vec<f64> = (0..=n_grid)
        .map(|i| a + (b - a) * i as f64 / n_grid as f64)
        .collect();
    let vals: Vec<f64> = xs.iter().map(|&x| p.d3phi(x)).collect();
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(Vec::new());
    }
    let floor = 1e-13 * peak;

    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&x, &v) in xs.iter().zip(&vals) {
        if v.abs() <= floor {
            continue;
        }
        if let Some((xl, vl)) = last {
            if vl.signum() != v.signum() {
                let r = bisect(|t| p.d3phi(t), xl, x, vl);
                let kind = if vl > 0.0 {
                    TurningKind::ConvexConcave
                } else {
                    TurningKind::ConcaveConvex
                };
                out.push(TurningPoint { r, kind });
            }
        }
        last = Some((x, v));
    }
    Ok(out)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let s_lo = f_lo.signum();
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    MaxPoints,
    Bounds,
    /// The curve came back to the diagonal, i.e. to another turning point.
    Diagonal,
    CorrectorDiverged { r_minus: f64, r_plus: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockCurve {
    pub seed: f64,
    /// Ordered along the curve; the seed `(r*, r*)` sits at index `seed_index`.
    pub points: Vec<(f64, f64)>,
    pub seed_index: usize,
    /// How the two arms ended: towards `r+ < r-` first, then `r+ > r-`.
    pub termination: [Termination; 2],
}

impl ShockCurve {
    /// Errors if either arm was truncated by a failed corrector.
    pub fn check(&self) -> Result<()> {
        for t in &self.termination {
            if let Termination::CorrectorDiverged { r_minus, r_plus } = *t {
                return Err(Error::CorrectorDiverged { r_minus, r_plus });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub step: f64,
    /// Per arm.
    pub max_points: usize,
    /// Both strains must stay inside.
    pub bounds: (f64, f64),
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            step: 0.01,
            max_points: 2000,
            bounds: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Works in `m = <r>`, `d = [r]/2`, where `J = d^3 G` and `G` is regular at `d = 0`.
struct Reduced<'a, P: ?Sized> {
    p: &'a P,
}

impl<P: Potential + ?Sized> Reduced<'_, P> {
    fn j(&self, m: f64, d: f64) -> f64 {
        energy_residual(self.p, m - d, m + d)
    }

    fn g(&self, m: f64, d: f64) -> f64 {
        if d.abs() < 1e-4 {
            // series: J = -(2/3) d^3 Phi'''(m) + O(d^5)
            return -2.0 / 3.0 * self.p.d3phi(m);
        }
        self.j(m, d) / d.powi(3)
    }

    fn grad_g(&self, m: f64, d: f64) -> [f64; 2] {
        if d.abs() < 1e-4 {
            let e = 1e-6;
            let gm = -2.0 / 3.0 * (self.p.d3phi(m + e) - self.p.d3phi(m - e)) / (2.0 * e);
            return [gm, 0.0];
        }
        let [jl, jr] = energy_residual_gradient(self.p, m - d, m + d);
        let d3 = d.powi(3);
        [
            (jl + jr) / d3,
            (jr - jl) / d3 - 3.0 * self.j(m, d) / (d3 * d),
        ]
    }

    /// Newton along `n` from `x`; returns the offset along `n`.
    fn correct(&self, x: [f64; 2], n: [f64; 2], max_offset: f64) -> Option<[f64; 2]> {
        let mut a = 0.0;
        for _ in 0..40 {
            let y = [x[0] + a * n[0], x[1] + a * n[1]];
            let g = self.g(y[0], y[1]);
            let gr = self.grad_g(y[0], y[1]);
            let slope = gr[0] * n[0] + gr[1] * n[1];
            if !(slope.is_finite() && g.is_finite()) || slope == 0.0 {
                return None;
            }
            let da = -g / slope;
            a += da;
            if a.abs() > max_offset {
                return None;
            }
            if da.abs() <= 1e-14 * (1.0 + a.abs()) {
                break;
            }
        }
        let y = [x[0] + a * n[0], x[1] + a * n[1]];
        (self.j(y[0], y[1]).abs() <= 0.1 * CURVE_TOL).then_some(y)
    }
}

fn trace_arm<P: Potential + ?Sized>(
    red: &Reduced<'_, P>,
    seed: f64,
    dir: f64,
    opts: &TraceOptions,
) -> (Vec<(f64, f64)>, Termination) {
    let inside = |m: f64, d: f64| {
        let (lo, hi) = opts.bounds;
        let (a, b) = (m - d, m + d);
        a >= lo && a <= hi && b >= lo && b <= hi
    };
    let mut pts = Vec::new();
    let mut x = [seed, 0.0];
    let mut t = [0.0, dir];
    let mut step = opts.step;
    let min_step = opts.step / 1024.0;
    while pts.len() < opts.max_points {
        let pred = [x[0] + step * t[0], x[1] + step * t[1]];
        let n = [-t[1], t[0]];
        match red.correct(pred, n, step) {
            Some(y) => {
                if !inside(y[0], y[1]) {
                    return (pts, Termination::Bounds);
                }
                if y[1] * dir <= 0.0 || (pts.len() > 2 && y[1].abs() < 0.5 * opts.step) {
                    return (pts, Termination::Diagonal);
                }
                let len = ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2)).sqrt();
                t = [(y[0] - x[0]) / len, (y[1] - x[1]) / len];
                x = y;
                pts.push((x[0] - x[1], x[0] + x[1]));
                step = (2.0 * step).min(opts.step);
            }
            None => {
                step *= 0.5;
                if step < min_step {
                    return (
                        pts,
                        Termination::CorrectorDiverged {
                            r_minus: x[0] - x[1],
                            r_plus: x[0] + x[1],
                        },
                    );
                }
            }
        }
    }
    (pts, Termination::MaxPoints)
}

/// Traces the conservative-shock curve bifurcating from the turning point `seed`.
///
/// Step lengths are measured in the `(<r>, [r]/2)` plane.
pub fn trace_curve<P: Potential + ?Sized>(p: &P, seed: f64, opts: &TraceOptions) -> Result<ShockCurve> {
    if !(opts.step > 0.0) || opts.max_points == 0 {
        return Err(Error::BadParams(format!(
            "step must be positive and max_points nonzero: {opts:?}"
        )));
    }
    let red = Reduced { p };
    let (mut lower, t_lower) = trace_arm(&red, seed, -1.0, opts);
    let (upper, t_upper) = trace_arm(&red, seed, 1.0, opts);
    lower.reverse();
    let seed_index = lower.len();
    let mut points = lower;
    points.push((seed, seed));
    points.extend(upper);
    Ok(ShockCurve {
        seed,
        points,
        seed_index,
        termination: [t_lower, t_upper],
    })
}

/// CSV with columns `r_minus,r_plus,J_residual,sigma_branch2,type`.
///
/// Diagonal points report the sonic limit `sqrt(Phi'')`.
pub fn curve_csv<P: Potential + ?Sized>(p: &P, curve: &ShockCurve) -> String {
    let mut out = String::from("r_minus,r_plus,J_residual,sigma_branch2,type\n");
    for &(a, b) in &curve.points {
        let j = energy_residual(p, a, b);
        let (sigma, kind) = if a == b {
            let d2 = p.d2phi(a);
            (d2.max(0.0).sqrt(), if d2 >= 0.0 { "Sonic" } else { "Undefined" }.to_string())
        } else {
            match complete_shock(p, a, b, 0.0, Branch::Two) {
                Ok(s) => (
                    s.sigma,
                    classify(p, &s)
                        .map(|k| format!("{k:?}"))
                        .unwrap_or_else(|_| "Undefined".into()),
                ),
                Err(_) => (f64::NAN, "Undefined".into()),
            }
        };
        let _ = writeln!(out, "{a:.16e},{b:.16e},{j:.16e},{sigma:.16e},{kind}");
    }
    out
}
