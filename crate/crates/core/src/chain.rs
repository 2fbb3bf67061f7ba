//! Direct simulation of the atomic chain `x''_a = Phi'(x_{a+1} - x_a) - Phi'(x_a - x_{a-1})`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{NormalizedPotential, Potential};
use crate::profile::{average, Profile};
use crate::psystem::ShockData;

pub const BLOWUP_SPEED: f64 = 1e6;

/// Atoms `0..N` with ghost strains held at `r_left` / `r_right` beyond the ends.
///
/// Strains are the state variables, so uniform regions stay bit-exact;
/// positions are recovered from the left end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub time: f64,
    /// `r_a = x_{a+1} - x_a`, length `N - 1`.
    pub strains: Vec<f64>,
    pub velocities: Vec<f64>,
    pub r_left: f64,
    pub r_right: f64,
    /// Position of atom 0.
    pub x0: f64,
    /// Initial positions of the two end atoms; reference for the work of the boundary forces.
    pub anchors: (f64, f64),
}

impl ChainState {
    pub fn from_strains(strains: &[f64], velocities: Vec<f64>, r_left: f64, r_right: f64) -> Result<Self> {
        if strains.len() + 1 != velocities.len() {
            return Err(Error::BadParams(format!(
                "{} strains need {} velocities, got {}",
                strains.len(),
                strains.len() + 1,
                velocities.len()
            )));
        }
        let span: f64 = strains.iter().sum();
        Ok(Self {
            time: 0.0,
            strains: strains.to_vec(),
            velocities,
            r_left,
            r_right,
            x0: 0.0,
            anchors: (0.0, span),
        })
    }

    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut x = self.x0;
        out.push(x);
        for r in &self.strains {
            x += r;
            out.push(x);
        }
        out
    }

    fn accelerations<P: Potential + ?Sized>(&self, p: &P, out: &mut [f64]) {
        let n = self.len();
        let mut left = p.dphi(self.r_left);
        for a in 0..n {
            let right = if a + 1 < n {
                p.dphi(self.strains[a])
            } else {
                p.dphi(self.r_right)
            };
            out[a] = right - left;
            left = right;
        }
    }

    pub fn snapshot<P: Potential + ?Sized>(&self, p: &P) -> Snapshot {
        let (energy, momentum) = conserved_quantities(self, p);
        Snapshot {
            time: self.time,
            strains: self.strains.clone(),
            velocities: self.velocities.clone(),
            energy,
            momentum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub strains: Vec<f64>,
    pub velocities: Vec<f64>,
    pub energy: f64,
    pub momentum: f64,
}

/// CSV with columns `t,alpha,r,v`; the last atom has no strain and is skipped.
pub fn snapshots_csv(snaps: &[Snapshot]) -> String {
    let mut out = String::from("t,alpha,r,v\n");
    for s in snaps {
        for (a, r) in s.strains.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{a},{r:.16e},{:.16e}", s.time, s.velocities[a]);
        }
    }
    out
}

/// Total energy including the work of the constant boundary forces, and total momentum.
pub fn conserved_quantities<P: Potential + ?Sized>(state: &ChainState, p: &P) -> (f64, f64) {
    let kin: f64 = state.velocities.iter().map(|v| 0.5 * v * v).sum();
    let pot: f64 = state.strains.iter().map(|&r| p.phi(r)).sum();
    let x_last = state.x0 + state.strains.iter().sum::<f64>();
    let boundary = p.dphi(state.r_left) * (state.x0 - state.anchors.0)
        - p.dphi(state.r_right) * (x_last - state.anchors.1);
    (kin + pot + boundary, state.velocities.iter().sum())
}

/// Velocity Verlet.
pub fn step<P: Potential + ?Sized>(state: &ChainState, p: &P, dt: f64, n_steps: usize) -> Result<ChainState> {
    if !(dt > 0.0) {
        return Err(Error::BadParams(format!("dt must be positive, got {dt}")));
    }
    let mut s = state.clone();
    let t0 = s.time;
    let n = s.len();
    let mut acc = vec![0.0; n];
    s.accelerations(p, &mut acc);
    for k in 0..n_steps {
        for a in 0..n {
            s.velocities[a] += 0.5 * dt * acc[a];
        }
        s.x0 += dt * s.velocities[0];
        for a in 0..n - 1 {
            s.strains[a] += dt * (s.velocities[a + 1] - s.velocities[a]);
        }
        s.accelerations(p, &mut acc);
        for a in 0..n {
            s.velocities[a] += 0.5 * dt * acc[a];
        }
        s.time = t0 + (k + 1) as f64 * dt;
        if let Some((atom, v)) = s
            .velocities
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.abs() <= BLOWUP_SPEED))
        {
            return Err(Error::Instability {
                time: s.time,
                atom,
                speed: v.abs(),
            });
        }
    }
    Ok(s)
}

/// Negates all velocities.
pub fn reversed(state: &ChainState) -> ChainState {
    ChainState {
        velocities: state.velocities.iter().map(|v| -v).collect(),
        ..state.clone()
    }
}

/// Travelling-wave strain and velocity profiles in lattice units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub shock: ShockData,
    /// `A W`, sampled on the grid of `W`.
    averaged: Profile,
    profile: Profile,
}

impl Front {
    /// `R(phi) = <r> + [r]/2 (A W)(phi + 1/2)`.
    pub fn r(&self, phi: f64) -> f64 {
        self.shock.r_mean() + 0.5 * self.shock.r_jump() * self.averaged.interpolate(phi + 0.5)
    }

    /// `V(phi) = <v> + [v]/2 W(phi)`.
    pub fn v(&self, phi: f64) -> f64 {
        self.shock.v_mean() + 0.5 * self.shock.v_jump() * self.profile.interpolate(phi)
    }

    pub fn sigma(&self) -> f64 {
        self.shock.sigma
    }

    /// `max |sigma R'(phi) + V(phi + 1) - V(phi)|` over the grid nodes, with a centred difference for `R'`.
    pub fn tw_residual(&self) -> f64 {
        let g = self.profile.grid;
        let h = g.h();
        (1..g.len() - 1)
            .map(|i| {
                let x = g.phi(i);
                let dr = (self.r(x + h) - self.r(x - h)) / (2.0 * h);
                (self.sigma() * dr + self.v(x + 1.0) - self.v(x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Maps a normalized front back to physical strains and velocities.
pub fn denormalize_front(np: &NormalizedPotential, w: &Profile, s: &ShockData) -> Result<Front> {
    let scale = np.r_jump.abs().max(1.0);
    if (np.r_mean - s.r_mean()).abs() > 1e-12 * scale || (np.r_jump - s.r_jump()).abs() > 1e-12 * scale {
        return Err(Error::MismatchedShock(format!(
            "potential built for <r> = {}, [r] = {}; shock has {}, {}",
            np.r_mean,
            np.r_jump,
            s.r_mean(),
            s.r_jump()
        )));
    }
    let speed2 = np.dphi_jump / np.r_jump;
    if (s.sigma * s.sigma - speed2).abs() > 1e-10 * speed2.max(1.0) {
        return Err(Error::MismatchedShock(format!(
            "sigma^2 = {} but [Phi']/[r] = {speed2}",
            s.sigma * s.sigma
        )));
    }
    Ok(Front {
        shock: *s,
        averaged: average(w),
        profile: w.clone(),
    })
}

/// Riemann data: `(r-, v-)` left of the middle, `(r+, v+)` right, blended by `tanh` over `smoothing` atoms.
pub fn init_riemann(s: &ShockData, n: usize, smoothing: f64) -> Result<ChainState> {
    if n < 100 {
        return Err(Error::BadParams(format!("need at least 100 atoms, got {n}")));
    }
    if !(smoothing >= 0.0) {
        return Err(Error::BadParams(format!("smoothing must be >= 0, got {smoothing}")));
    }
    let mid = 0.5 * n as f64;
    let blend = |x: f64| {
        if smoothing == 0.0 {
            if x < 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            0.5 * (1.0 + (x / smoothing).tanh())
        }
    };
    let strains: Vec<f64> = (0..n - 1)
        .map(|a| s.r_minus + s.r_jump() * blend(a as f64 + 0.5 - mid))
        .collect();
    let vel = (0..n)
        .map(|a| s.v_minus + s.v_jump() * blend(a as f64 - mid))
        .collect();
    ChainState::from_strains(&strains, vel, s.r_minus, s.r_plus)
}

/// Samples `r_a = R(a - N/2)`, `v_a = V(a - N/2)`.
pub fn init_front(front: &Front, n: usize) -> Result<ChainState> {
    let m = front.profile.grid.m;
    if n < 4 * m {
        return Err(Error::BadParams(format!("need N >= 4M = {}, got {n}", 4 * m)));
    }
    let mid = 0.5 * n as f64;
    let strains: Vec<f64> = (0..n - 1).map(|a| front.r(a as f64 - mid)).collect();
    let vel = (0..n).map(|a| front.v(a as f64 - mid)).collect();
    ChainState::from_strains(&strains, vel, front.shock.r_minus, front.shock.r_plus)
}

/// Position (in atoms) where the strains first cross `level`, linearly interpolated.
pub fn crossing_position(strains: &[f64], level: f64) -> Option<f64> {
    strains.windows(2).enumerate().find_map(|(a, w)| {
        let (d0, d1) = (w[0] - level, w[1] - level);
        if d0 == 0.0 {
            Some(a as f64)
        } else if d0 * d1 < 0.0 {
            Some(a as f64 + d0 / (d0 - d1))
        } else {
            None
        }
    })
}

/// Strain indices `[lo, hi]` around the mid-level crossing, extended outward until
/// the strains come within `frac * |r+ - r-|` of the respective asymptotic state.
pub fn transition_segment(strains: &[f64], r_minus: f64, r_plus: f64, frac: f64) -> Option<(usize, usize)> {
    let c = crossing_position(strains, 0.5 * (r_minus + r_plus))?.floor() as usize;
    let band = frac * (r_plus - r_minus).abs();
    let mut lo = c;
    while lo > 0 && (strains[lo] - r_minus).abs() > band {
        lo -= 1;
    }
    let mut hi = (c + 1).min(strains.len() - 1);
    while hi + 1 < strains.len() && (strains[hi] - r_plus).abs() > band {
        hi += 1;
    }
    Some((lo, hi))
}

/// Whether the strains move strictly from `r-` towards `r+` across the transition segment.
pub fn is_monotone_transition(strains: &[f64], r_minus: f64, r_plus: f64, frac: f64) -> bool {
    let dir = (r_plus - r_minus).signum();
    match transition_segment(strains, r_minus, r_plus, frac) {
        Some((lo, hi)) => strains[lo..=hi].windows(2).all(|w| dir * (w[1] - w[0]) > 0.0),
        None => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TWDeviation {
    pub shape_error: f64,
    pub speed_fit: f64,
    pub energy_drift: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Compares strain snapshots with `R(a - origin - sigma t)`.
///
/// The speed is fitted to the positions where the strains cross `level`.
pub fn tw_deviation(
    snaps: &[Snapshot],
    r: impl Fn(f64) -> f64,
    sigma: f64,
    origin: f64,
    level: f64,
) -> Result<TWDeviation> {
    if snaps.len() < 2 {
        return Err(Error::BadParams("need at least two snapshots".into()));
    }
    let mut shape = 0.0f64;
    for s in snaps {
        for (a, &ra) in s.strains.iter().enumerate() {
            shape = shape.max((ra - r(a as f64 - origin - sigma * s.time)).abs());
        }
    }
    let (ts, xs): (Vec<f64>, Vec<f64>) = snaps
        .iter()
        .filter_map(|s| crossing_position(&s.strains, level).map(|x| (s.time, x)))
        .unzip();
    let speed_fit = if ts.len() >= 2 { linear_slope(&ts, &xs) } else { f64::NAN };
    Ok(TWDeviation {
        shape_error: shape,
        speed_fit,
        energy_drift: energy_drift(snaps),
    })
}

/// `max |E(t) - E(0)| / |E(0)|`, or the absolute drift when `E(0) = 0`.
pub fn energy_drift(snaps: &[Snapshot]) -> f64 {
    let Some(first) = snaps.first() else { return 0.0 };
    let e0 = first.energy;
    let denom = if e0 != 0.0 { e0.abs() } else { 1.0 };
    snaps
        .iter()
        .map(|s| (s.energy - e0).abs() / denom)
        .fold(0.0, f64::max)
}

/// Runs `n_snaps` equal legs of `steps_per_snap` steps, recording a snapshot before the first and after each leg.
pub fn simulate<P: Potential + ?Sized>(
    state: &ChainState,
    p: &P,
    dt: f64,
    steps_per_snap: usize,
    n_snaps: usize,
) -> Result<(ChainState, Vec<Snapshot>)> {
    let mut s = state.clone();
    let mut snaps = vec![s.snapshot(p)];
    for _ in 0..n_snaps {
        s = step(&s, p, dt, steps_per_snap)?;
        snaps.push(s.snapshot(p));
    }
    Ok((s, snaps))
}
