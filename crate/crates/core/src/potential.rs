//! Interaction potentials, the normalized potential built from shock data,
//! and the sampled checks of the standing assumptions (R, N, C, E, S, A).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything that can report a potential and its first three derivatives.
pub trait Potential {
    fn phi(&self, r: f64) -> f64;
    fn dphi(&self, r: f64) -> f64;
    fn d2phi(&self, r: f64) -> f64;
    fn d3phi(&self, r: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amp: f64,
    pub freq: f64,
    pub kind: TrigKind,
}

impl TrigTerm {
    /// n-th derivative of `amp * kind(freq * s)`.
    fn derivative(&self, s: f64, n: u32) -> f64 {
        let x = self.freq * s;
        let scale = self.amp * self.freq.powi(n as i32);
        // cos -> -sin -> -cos -> sin, sin -> cos -> -sin -> -cos
        let phase = match self.kind {
            TrigKind::Cos => n,
            TrigKind::Sin => n + 3,
        } % 4;
        scale
            * match phase {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            }
    }
}

/// `Phi(r) = sum c_i s^i + sum trig terms`, with `s = r - shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(rename = "poly")]
    pub poly_coeffs: Vec<f64>,
    #[serde(rename = "trig", default)]
    pub trig_terms: Vec<TrigTerm>,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Value,
    First,
    Second,
}

impl PotentialSpec {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self {
            poly_coeffs: coeffs,
            trig_terms: Vec::new(),
            shift: 0.0,
        }
    }

    /// `Phi(r) = r^2 / 2`.
    pub fn harmonic() -> Self {
        Self::polynomial(vec![0.0, 0.0, 0.5])
    }

    /// `Phi(r) = F(r - 1)` with `F(s) = s + s^2/2 + s^3/20 - cos(2s)/4 + sin(3s)/10`.
    pub fn figure2() -> Self {
        Self {
            poly_coeffs: vec![0.0, 1.0, 0.5, 0.05],
            trig_terms: vec![
                TrigTerm {
                    amp: -0.25,
                    freq: 2.0,
                    kind: TrigKind::Cos,
                },
                TrigTerm {
                    amp: 0.1,
                    freq: 3.0,
                    kind: TrigKind::Sin,
                },
            ],
            shift: 1.0,
        }
    }

    fn derivative(&self, r: f64, n: u32) -> f64 {
        let s = r - self.shift;
        let mut acc = 0.0;
        for (i, &c) in self.poly_coeffs.iter().enumerate().skip(n as usize).rev() {
            let mut falling = 1.0;
            for j in 0..n as usize {
                falling *= (i - j) as f64;
            }
            acc = acc * s + c * falling;
        }
        let trig: f64 = self.trig_terms.iter().map(|t| t.derivative(s, n)).sum();
        acc + trig
    }

    pub fn is_finite(&self) -> bool {
        self.shift.is_finite()
            && self.poly_coeffs.iter().all(|c| c.is_finite())
            && self
                .trig_terms
                .iter()
                .all(|t| t.amp.is_finite() && t.freq.is_finite())
    }
}

impl Potential for PotentialSpec {
    fn phi(&self, r: f64) -> f64 {
        self.derivative(r, 0)
    }
    fn dphi(&self, r: f64) -> f64 {
        self.derivative(r, 1)
    }
    fn d2phi(&self, r: f64) -> f64 {
        self.derivative(r, 2)
    }
    fn d3phi(&self, r: f64) -> f64 {
        self.derivative(r, 3)
    }
}

pub fn evaluate(p: &PotentialSpec, r: f64, order: Order) -> f64 {
    match order {
        Order::Value => p.phi(r),
        Order::First => p.dphi(r),
        Order::Second => p.d2phi(r),
    }
}

/// `Phi_hat(w) = scale * Phi(center + half * w) - slope * w + offset`.
///
/// A fresh normalization has `offset = 0`; renormalizing composes the
/// affine maps so the result stays a single evaluation of the base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPotential {
    pub base: PotentialSpec,
    pub r_mean: f64,
    pub r_jump: f64,
    pub dphi_mean: f64,
    pub dphi_jump: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    scale: f64,
    center: f64,
    half: f64,
    slope: f64,
    offset: f64,
}

fn jumps<P: Potential + ?Sized>(p: &P, r_minus: f64, r_plus: f64) -> Result<(f64, f64, f64)> {
    if r_minus == r_plus {
        return Err(Error::DegenerateJump { r: r_minus });
    }
    let (dm, dp) = (p.dphi(r_minus), p.dphi(r_plus));
    let dphi_jump = dp - dm;
    let r_jump = r_plus - r_minus;
    if !(dphi_jump * r_jump > 0.0) {
        return Err(Error::NonHyperbolic { dphi_jump, r_jump });
    }
    Ok((0.5 * (dp + dm), dphi_jump, r_jump))
}

pub fn build_normalized(p: &PotentialSpec, r_minus: f64, r_plus: f64) -> Result<NormalizedPotential> {
    let (dphi_mean, dphi_jump, r_jump) = jumps(p, r_minus, r_plus)?;
    let mut np = NormalizedPotential {
        base: p.clone(),
        r_mean: 0.5 * (r_minus + r_plus),
        r_jump,
        dphi_mean,
        dphi_jump,
        lambda_minus: 0.0,
        lambda_plus: 0.0,
        scale: 4.0 / (dphi_jump * r_jump),
        center: 0.5 * (r_minus + r_plus),
        half: 0.5 * r_jump,
        slope: 2.0 * dphi_mean / dphi_jump,
        offset: 0.0,
    };
    np.cache_lambdas();
    Ok(np)
}

impl NormalizedPotential {
    /// Wraps `p` without rescaling. Summary fields describe `p` between -1 and 1.
    pub fn identity(p: PotentialSpec) -> Self {
        let (dm, dp) = (p.dphi(-1.0), p.dphi(1.0));
        let mut np = Self {
            base: p,
            r_mean: 0.0,
            r_jump: 2.0,
            dphi_mean: 0.5 * (dp + dm),
            dphi_jump: dp - dm,
            lambda_minus: 0.0,
            lambda_plus: 0.0,
            scale: 1.0,
            center: 0.0,
            half: 1.0,
            slope: 0.0,
            offset: 0.0,
        };
        np.cache_lambdas();
        np
    }

    fn cache_lambdas(&mut self) {
        self.lambda_minus = self.d2phi(-1.0);
        self.lambda_plus = self.d2phi(1.0);
    }

    /// Normalizes `self` again for the jump `w_minus -> w_plus`.
    pub fn renormalized(&self, w_minus: f64, w_plus: f64) -> Result<Self> {
        let (mean, djump, wjump) = jumps(self, w_minus, w_plus)?;
        let a = 4.0 / (djump * wjump);
        let b = 2.0 * mean / djump;
        let m = 0.5 * (w_minus + w_plus);
        let hj = 0.5 * wjump;
        let center = self.center + self.half * m;
        let half = self.half * hj;
        let (bm, bp) = (self.base.dphi(center - half), self.base.dphi(center + half));
        let mut np = Self {
            base: self.base.clone(),
            r_mean: center,
            r_jump: 2.0 * half,
            dphi_mean: 0.5 * (bm + bp),
            dphi_jump: bp - bm,
            lambda_minus: 0.0,
            lambda_plus: 0.0,
            scale: a * self.scale,
            center,
            half,
            slope: a * self.slope * hj + b,
            offset: a * (self.offset - self.slope * m),
        };
        np.cache_lambdas();
        Ok(np)
    }

    /// Maps a normalized argument back to a strain of the base potential.
    pub fn strain(&self, w: f64) -> f64 {
        self.center + self.half * w
    }

    /// `Phi_hat(1) - Phi_hat(-1)`; zero exactly for conservative data.
    pub fn energy_gap(&self) -> f64 {
        self.phi(1.0) - self.phi(-1.0)
    }
}

impl Potential for NormalizedPotential {
    fn phi(&self, w: f64) -> f64 {
        self.scale * self.base.phi(self.strain(w)) - self.slope * w + self.offset
    }
    fn dphi(&self, w: f64) -> f64 {
        self.scale * self.half * self.base.dphi(self.strain(w)) - self.slope
    }
    fn d2phi(&self, w: f64) -> f64 {
        self.scale * self.half * self.half * self.base.d2phi(self.strain(w))
    }
    fn d3phi(&self, w: f64) -> f64 {
        self.scale * self.half.powi(3) * self.base.d3phi(self.strain(w))
    }
}

/// Signed area `Phi(-1) - Phi(w) + w^2/2 - 1/2` for the normalized potential.
pub fn g_area(np: &NormalizedPotential, w: f64) -> Result<f64> {
    if !(w.abs() <= 1.0) {
        return Err(Error::OutOfDomain { w });
    }
    Ok(g_unchecked(np, w))
}

pub(crate) fn g_unchecked<P: Potential + ?Sized>(np: &P, w: f64) -> f64 {
    np.phi(-1.0) - np.phi(w) + 0.5 * w * w - 0.5
}

pub const CONVEXITY_TOL: f64 = 1e-10;
pub const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagCheck {
    pub pass: bool,
    /// Where the checked quantity is worst.
    pub location: f64,
    /// The worst value of the checked quantity.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Closed-form derivatives are finite on all samples.
    pub r: FlagCheck,
    /// `max |Phi'(+-1) -+ 1|`.
    pub n: FlagCheck,
    /// `min Phi''` over the samples.
    pub c: FlagCheck,
    /// `Phi(1) - Phi(-1)`.
    pub e: FlagCheck,
    /// `max Phi''(+-1)`.
    pub s: FlagCheck,
    /// `min g` over interior samples.
    pub a: FlagCheck,
    pub sample_count: usize,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        [self.r, self.n, self.c, self.e, self.s, self.a]
            .iter()
            .all(|f| f.pass)
    }

    pub fn flags(&self) -> [(&'static str, FlagCheck); 6] {
        [
            ("R", self.r),
            ("N", self.n),
            ("C", self.c),
            ("E", self.e),
            ("S", self.s),
            ("A", self.a),
        ]
    }
}

pub fn check_assumptions(np: &NormalizedPotential, n_samples: usize) -> Result<AssumptionReport> {
    if n_samples < 3 {
        return Err(Error::BadParams(format!(
            "need at least 3 samples, got {n_samples}"
        )));
    }
    let step = 2.0 / (n_samples - 1) as f64;
    let node = |i: usize| if i + 1 == n_samples { 1.0 } else { -1.0 + i as f64 * step };

    let mut finite = true;
    let mut first_bad = f64::NAN;
    let mut c_min = (f64::INFINITY, 0.0);
    let mut a_min = (f64::INFINITY, 0.0);
    for i in 0..n_samples {
        let w = node(i);
        let vals = [np.phi(w), np.dphi(w), np.d2phi(w)];
        if finite && vals.iter().any(|v| !v.is_finite()) {
            finite = false;
            first_bad = w;
        }
        if vals[2] < c_min.0 {
            c_min = (vals[2], w);
        }
        if i > 0 && i + 1 < n_samples {
            let g = g_unchecked(np, w);
            if g < a_min.0 {
                a_min = (g, w);
            }
        }
    }

    let nm = (np.dphi(-1.0) + 1.0).abs();
    let npl = (np.dphi(1.0) - 1.0).abs();
    let gap = np.energy_gap();
    let (lm, lp) = (np.d2phi(-1.0), np.d2phi(1.0));
    let (s_val, s_loc) = if lm >= lp { (lm, -1.0) } else { (lp, 1.0) };

    Ok(AssumptionReport {
        r: FlagCheck {
            pass: finite,
            location: first_bad,
            value: if finite { 0.0 } else { f64::NAN },
        },
        n: FlagCheck {
            pass: nm.max(npl) <= ENDPOINT_TOL,
            location: if nm >= npl { -1.0 } else { 1.0 },
            value: nm.max(npl),
        },
        c: FlagCheck {
            pass: c_min.0 >= -CONVEXITY_TOL,
            location: c_min.1,
            value: c_min.0,
        },
        e: FlagCheck {
            pass: gap.abs() <= ENDPOINT_TOL,
            location: 1.0,
            value: gap,
        },
        s: FlagCheck {
            pass: s_val < 1.0 - ENDPOINT_TOL,
            location: s_loc,
            value: s_val,
        },
        a: FlagCheck {
            pass: a_min.0 > -ENDPOINT_TOL,
            location: a_min.1,
            value: a_min.0,
        },
        sample_count: n_samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Builtin {
    /// `Phi'(w) = w + beta (w - w^3)`.
    CubicForce { beta: f64 },
    /// `Phi'(w) = w + beta (w - w^3) + delta (1 - w^2)`.
    Tilted { beta: f64, delta: f64 },
    /// `Phi'(w) = w - beta (w - w^3)`.
    ConcaveConvex { beta: f64 },
    /// The trigonometric example potential; not normalized.
    Figure2,
}

impl Builtin {
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let want = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::BadParams(format!(
                    "{name} takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        match name {
            "cubic_force" => want(1).map(|_| Builtin::CubicForce { beta: params[0] }),
            "tilted" => want(2).map(|_| Builtin::Tilted {
                beta: params[0],
                delta: params[1],
            }),
            "concave_convex" => want(1).map(|_| Builtin::ConcaveConvex { beta: params[0] }),
            "figure2" => want(0).map(|_| Builtin::Figure2),
            other => Err(Error::BadParams(format!("unknown builtin {other:?}"))),
        }
    }

    pub fn spec(&self) -> PotentialSpec {
        match *self {
            Builtin::CubicForce { beta } => {
                PotentialSpec::polynomial(vec![0.0, 0.0, 0.5 * (1.0 + beta), 0.0, -0.25 * beta])
            }
            Builtin::Tilted { beta, delta } => PotentialSpec::polynomial(vec![
                0.0,
                delta,
                0.5 * (1.0 + beta),
                -delta / 3.0,
                -0.25 * beta,
            ]),
            Builtin::ConcaveConvex { beta } => {
                PotentialSpec::polynomial(vec![0.0, 0.0, 0.5 * (1.0 - beta), 0.0, 0.25 * beta])
            }
            Builtin::Figure2 => PotentialSpec::figure2(),
        }
    }
}

pub fn builtin(b: Builtin) -> Result<NormalizedPotential> {
    let spec = b.spec();
    if !spec.is_finite() {
        return Err(Error::BadParams(format!("non-finite parameters in {b:?}")));
    }
    if let Builtin::Figure2 = b {
        return Ok(NormalizedPotential::identity(spec));
    }
    const N: usize = 2001;
    for i in 0..N {
        let w = -1.0 + 2.0 * i as f64 / (N - 1) as f64;
        let d2 = spec.d2phi(w);
        if d2 < -CONVEXITY_TOL {
            return Err(Error::BadParams(format!(
                "{b:?} is not convex on [-1, 1]: Phi''({w}) = {d2}"
            )));
        }
    }
    build_normalized(&spec, -1.0, 1.0)
}
