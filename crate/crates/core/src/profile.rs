//! Profiles sampled on a truncated uniform grid with constant extension,
//! together with the averaging and difference operators.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values within this distance of zero count as non-positive when pinning.
pub const PIN_TOL: f64 = 1e-12;
/// Descents below this size are left alone by `enforce_cone`.
pub const CONE_TOL: f64 = 1e-14;

const PAR_THRESHOLD: usize = 1 << 17;

/// Nodes `phi_i = -M + i h`, `h = 1/(2k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub k: usize,
    pub m: usize,
}

impl Grid {
    pub fn new(h: f64, m: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("h must be positive, got {h}")));
        }
        let kf = 1.0 / (2.0 * h);
        let k = kf.round();
        if (kf - k).abs() > 1e-9 * kf || k < 2.0 {
            return Err(Error::InvalidGrid(format!(
                "h = {h} is not 1/(2k) for an integer k >= 2"
            )));
        }
        Self::from_k(k as usize, m)
    }

    pub fn from_k(k: usize, m: usize) -> Result<Self> {
        if k < 2 || m == 0 {
            return Err(Error::InvalidGrid(format!("need k >= 2 and M >= 1, got k = {k}, M = {m}")));
        }
        Ok(Self { k, m })
    }

    pub fn h(&self) -> f64 {
        0.5 / self.k as f64
    }

    pub fn len(&self) -> usize {
        4 * self.k * self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the node at `phi = 0`.
    pub fn center(&self) -> usize {
        2 * self.k * self.m
    }

    pub fn phi(&self, i: usize) -> f64 {
        (i as f64 - self.center() as f64) * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.phi(i))
    }

    /// Trapezoid rule over `[-M, M]`.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        let n = f.len();
        let inner: f64 = f.iter().sum();
        self.h() * (inner - 0.5 * (f[0] + f[n - 1]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub left_limit: f64,
    pub right_limit: f64,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>, left_limit: f64, right_limit: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("profile has non-finite values".into()));
        }
        Ok(Self {
            grid,
            values,
            left_limit,
            right_limit,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64, left_limit: f64, right_limit: f64) -> Self {
        Self {
            grid,
            values: grid.nodes().map(f).collect(),
            left_limit,
            right_limit,
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_fn(grid, |_| c, c, c)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at index `i`, reading the constant extension outside the grid.
    pub fn at(&self, i: isize) -> f64 {
        if i < 0 {
            self.left_limit
        } else if i as usize >= self.values.len() {
            self.right_limit
        } else {
            self.values[i as usize]
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64, left_limit: f64, right_limit: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            left_limit,
            right_limit,
        }
    }

    /// Integer-node translation: `out[i] = self[i - s]`.
    pub fn shifted(&self, s: isize) -> Self {
        let values = (0..self.len() as isize).map(|i| self.at(i - s)).collect();
        Self {
            values,
            ..self.clone()
        }
    }

    /// Piecewise-linear interpolant, constant outside `[-M, M]`.
    pub fn interpolate(&self, phi: f64) -> f64 {
        let x = (phi + self.grid.m as f64) / self.grid.h();
        if x <= 0.0 {
            return if x < 0.0 { self.left_limit } else { self.values[0] };
        }
        let n = self.len();
        if x >= (n - 1) as f64 {
            return if x > (n - 1) as f64 {
                self.right_limit
            } else {
                self.values[n - 1]
            };
        }
        let i = x.floor() as usize;
        let t = x - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    pub fn inner(&self, other: &Profile) -> f64 {
        let prod: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        self.grid.trapezoid(&prod)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Profile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Smallest node-to-node increment.
    pub fn min_increment(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `phi,W,AW`.
    pub fn to_csv(&self) -> String {
        let aw = average(self);
        let mut out = String::from("phi,W,AW\n");
        for (i, (w, a)) in self.values.iter().zip(&aw.values).enumerate() {
            let _ = writeln!(out, "{:.16e},{w:.16e},{a:.16e}", self.grid.phi(i));
        }
        out
    }
}

/// `sgn(phi)` with value 0 at the origin.
pub fn shock_profile(g: Grid) -> Profile {
    let c = g.center();
    let values = (0..g.len())
        .map(|i| match i.cmp(&c) {
            std::cmp::Ordering::Less => -1.0,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => 1.0,
        })
        .collect();
    Profile {
        grid: g,
        values,
        left_limit: -1.0,
        right_limit: 1.0,
    }
}

fn padded(u: &Profile) -> Vec<f64> {
    let k = u.grid.k;
    let mut p = Vec::with_capacity(u.len() + 2 * k);
    p.extend(std::iter::repeat(u.left_limit).take(k));
    p.extend_from_slice(&u.values);
    p.extend(std::iter::repeat(u.right_limit).take(k));
    p
}

/// Unit-window moving integral with trapezoid end weights.
pub fn average(u: &Profile) -> Profile {
    let k = u.grid.k;
    let h = u.grid.h();
    let p = padded(u);
    let window = |i: usize| {
        // node i sits at p[i + k]; window p[i..=i + 2k]
        let w = &p[i..=i + 2 * k];
        let inner: f64 = w[1..2 * k].iter().sum();
        h * (0.5 * w[0] + inner + 0.5 * w[2 * k])
    };
    let n = u.len();
    let values: Vec<f64> = if n * k >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(window).collect()
    } else {
        (0..n).map(window).collect()
    };
    Profile {
        grid: u.grid,
        values,
        left_limit: u.left_limit,
        right_limit: u.right_limit,
    }
}

/// `u(. + 1/2) - u(. - 1/2)`.
pub fn nabla(u: &Profile) -> Profile {
    let k = u.grid.k;
    let p = padded(u);
    let values = (0..u.len()).map(|i| p[i + 2 * k] - p[i]).collect();
    Profile {
        grid: u.grid,
        values,
        left_limit: 0.0,
        right_limit: 0.0,
    }
}

/// Deviation from the shock profile: `W_sh - u`.
pub fn deviation(u: &Profile) -> Profile {
    let sh = shock_profile(u.grid);
    Profile {
        grid: u.grid,
        values: sh.values.iter().zip(&u.values).map(|(s, v)| s - v).collect(),
        left_limit: -1.0 - u.left_limit,
        right_limit: 1.0 - u.right_limit,
    }
}

/// Trapezoid L2 norm of `W_sh - u` over `[-M, M]`.
pub fn l2_deviation(u: &Profile) -> f64 {
    deviation(u).l2_norm()
}

/// Translates `u` so that `u(0) <= 0 < u(h)`; returns the applied shift.
///
/// Among several admissible crossings the one nearest the origin wins.
pub fn pin(u: &Profile) -> Result<(Profile, isize)> {
    let c0 = u.grid.center() as isize;
    let best = u
        .values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] <= PIN_TOL && w[1] > PIN_TOL)
        .map(|(c, _)| c as isize)
        .min_by_key(|c| ((c - c0).abs(), *c));
    match best {
        Some(c) => {
            let s = c0 - c;
            Ok((if s == 0 { u.clone() } else { u.shifted(s) }, s))
        }
        None => Err(Error::NoCrossing),
    }
}

/// Index of the last node with `u <= 0` before the first positive one.
pub fn crossing_index(u: &Profile) -> Option<usize> {
    u.values
        .windows(2)
        .position(|w| w[0] <= PIN_TOL && w[1] > PIN_TOL)
}

/// Isotonic least-squares fit with unit weights.
pub fn pool_adjacent_violators(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        let mut cur = (v, 1usize);
        while let Some(&(m, n)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let tot = n + cur.1;
            cur = ((m * n as f64 + cur.0 * cur.1 as f64) / tot as f64, tot);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(y.len());
    for (m, n) in blocks {
        out.extend(std::iter::repeat(m).take(n));
    }
    out
}

/// Clips to the limits and restores monotonicity; returns the largest change.
pub fn enforce_cone(u: &Profile) -> (Profile, f64) {
    let lo = u.left_limit.min(u.right_limit);
    let hi = u.left_limit.max(u.right_limit);
    let mut vals: Vec<f64> = u.values.iter().map(|v| v.clamp(lo, hi)).collect();
    if vals.windows(2).any(|w| w[1] < w[0] - CONE_TOL) {
        vals = pool_adjacent_violators(&vals);
    }
    let corr = vals
        .iter()
        .zip(&u.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    (
        Profile {
            values: vals,
            ..u.clone()
        },
        corr,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(h: f64, m: usize) -> Grid {
        Grid::new(h, m).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.05, 40).is_ok());
        assert!(Grid::new(0.03, 40).is_err());
        assert!(Grid::new(0.5, 40).is_err());
        assert!(Grid::new(0.05, 0).is_err());
        let gr = g(0.05, 40);
        assert_eq!(gr.k, 10);
        assert_eq!(gr.len(), 1601);
        assert_eq!(gr.phi(0), -40.0);
        assert_eq!(gr.phi(gr.center()), 0.0);
    }

    #[test]
    fn shock_profile_values() {
        let gr = g(0.05, 5);
        let s = shock_profile(gr);
        assert_eq!(s.values[gr.center()], 0.0);
        assert_eq!(s.values[gr.center() - 3], -1.0);
        assert_eq!(l2_deviation(&s), 0.0);
    }

    #[test]
    fn average_examples() {
        let gr = g(0.05, 6);
        let c = Profile::constant(gr, 0.3);
        assert!(average(&c).values.iter().all(|v| (v - 0.3).abs() < 1e-15));
        let lin = Profile::from_fn(gr, |x| x, -6.0, 6.0);
        let a = average(&lin);
        for i in gr.k..gr.len() - gr.k {
            assert!((a.values[i] - gr.phi(i)).abs() < 1e-12);
        }
        let s = average(&shock_profile(gr));
        assert!(s.values[gr.center()].abs() < 1e-15);
    }

    /// Antiderivative of the interpolant `clamp(x / h, -1, 1)` of the sampled shock.
    fn ramp_integral(x: f64, h: f64) -> f64 {
        if x.abs() <= h {
            x * x / (2.0 * h)
        } else {
            x.abs() - 0.5 * h
        }
    }

    #[test]
    fn average_of_shock_is_exact_for_interpolant() {
        for h in [0.05, 0.025] {
            let gr = g(h, 4);
            let a = average(&shock_profile(gr));
            for (i, v) in a.values.iter().enumerate() {
                let x = gr.phi(i);
                let exact = ramp_integral(x + 0.5, h) - ramp_integral(x - 0.5, h);
                assert!((v - exact).abs() < 1e-14);
                if x.abs() <= 0.5 - h || x.abs() >= 0.5 + h {
                    assert!((v - (2.0 * x).clamp(-1.0, 1.0)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn nabla_examples() {
        let gr = g(0.05, 6);
        assert!(nabla(&Profile::constant(gr, 2.0)).values.iter().all(|&v| v == 0.0));
        assert_eq!(nabla(&shock_profile(gr)).values[gr.center()], 2.0);
        let lin = Profile::from_fn(gr, |x| 0.7 * x, -4.2, 4.2);
        let d = nabla(&lin);
        for i in gr.k..gr.len() - gr.k {
            assert!((d.values[i] - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_profile_deviation() {
        for (h, m) in [(0.05, 10), (0.025, 10)] {
            let gr = g(h, m);
            let z = Profile::from_fn(gr, |_| 0.0, -1.0, 1.0);
            let exact = (2.0 * m as f64).sqrt();
            assert!((l2_deviation(&z) - exact).abs() < 2.0 * h);
        }
    }

    #[test]
    fn pin_examples() {
        let gr = g(0.05, 5);
        let s = shock_profile(gr);
        let (p, sh) = pin(&s).unwrap();
        assert_eq!(sh, 0);
        assert_eq!(p, s);
        let moved = s.shifted(7);
        let (p, sh) = pin(&moved).unwrap();
        assert_eq!(sh, -7);
        assert_eq!(p, s);
        let neg = Profile::constant(gr, -0.5);
        assert_eq!(pin(&neg).unwrap_err(), Error::NoCrossing);
    }

    #[test]
    fn pin_tanh() {
        let gr = g(0.05, 5);
        let u = Profile::from_fn(gr, |x| (x - 0.83).tanh(), -1.0, 1.0);
        let (p, sh) = pin(&u).unwrap();
        let c = gr.center();
        assert!(p.values[c] <= 0.0 && p.values[c + 1] > 0.0);
        assert_eq!(sh, -16);
    }

    #[test]
    fn cone_examples() {
        let gr = g(0.25, 2);
        let u = Profile::from_fn(gr, |x| (x / 2.0).clamp(-1.0, 1.0), -1.0, 1.0);
        let (v, c) = enforce_cone(&u);
        assert_eq!(c, 0.0);
        assert_eq!(v, u);

        let mut w = u.clone();
        w.values[5] = w.values[4] - 1e-13;
        let (v, c) = enforce_cone(&w);
        assert!(c <= 1e-13);
        assert_eq!(v.values[4], v.values[5]);
        assert!(v.min_increment() >= 0.0);

        let mut w = u.clone();
        let n = w.len();
        w.values[n - 1] = 1.0 + 1e-15;
        let (v, _) = enforce_cone(&w);
        assert_eq!(v.values[n - 1], 1.0);
    }

    #[test]
    fn pav_basic() {
        assert_eq!(pool_adjacent_violators(&[1.0, 3.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(pool_adjacent_violators(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn csv_layout() {
        let gr = g(0.25, 1);
        let csv = shock_profile(gr).to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "phi,W,AW");
        assert_eq!(lines.len(), gr.len() + 1);
        assert!(lines[1].starts_with("-1.0000000000000000e0,"));
    }

    #[test]
    fn interpolation() {
        let gr = g(0.25, 2);
        let u = Profile::from_fn(gr, |x| x / 2.0, -1.0, 1.0);
        assert!((u.interpolate(0.3) - 0.15).abs() < 1e-15);
        assert_eq!(u.interpolate(-7.0), -1.0);
        assert_eq!(u.interpolate(2.0), 1.0);
    }
}
