use std::path::{Path, PathBuf};

use front_forge_core::potential::Potential;
use front_forge_core::psystem::complete_shock;
use front_forge_core::{
    build_normalized, builtin, Branch, Builtin, Grid, NormalizedPotential, PotentialSpec, ShockData, SolverConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialChoice {
    Builtin {
        builtin: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    Spec(PotentialSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockConfig {
    pub r_minus: f64,
    pub r_plus: f64,
    #[serde(default)]
    pub v_minus: f64,
    #[serde(default = "default_branch")]
    pub branch: u8,
}

fn default_branch() -> u8 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { h: 0.05, m: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    /// `sgn(phi)`.
    #[default]
    Shock,
    Tanh { width: f64 },
    /// A profile CSV (`phi,W[,AW]`) on the configured grid.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    /// Defaults to the turning points inside `range`.
    pub seeds: Option<Vec<f64>>,
    pub range: (f64, f64),
    pub samples: usize,
    pub step: f64,
    pub max_points: usize,
    pub bounds: Option<(f64, f64)>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            seeds: None,
            range: (-2.0, 2.0),
            samples: 2000,
            step: 0.01,
            max_points: 2000,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    /// Defaults to the endpoint curvatures of the normalized potential.
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChainInit {
    #[default]
    Front,
    Riemann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub init: ChainInit,
    pub smoothing: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            dt: 0.01,
            t_end: 10.0,
            snapshot_every: 1.0,
            init: ChainInit::Front,
            smoothing: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { samples: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub potential: Option<PotentialChoice>,
    #[serde(default)]
    pub shock: Option<ShockConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial: InitialProfile,
    #[serde(default)]
    pub curve: CurveConfig,
    #[serde(default)]
    pub decay: DecayConfig,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Scalar flags that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub tol: Option<f64>,
    pub h: Option<f64>,
    pub m: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

pub const DEFAULT_OUTPUT_DIR: &str = "front-forge-out";

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, command: &str, o: &Overrides) -> Result<(), CliError> {
        if let Some(c) = &self.command {
            if c != command {
                return Err(CliError::Validation(format!(
                    "config is for {c:?}, invoked as {command:?}"
                )));
            }
        }
        self.command = Some(command.to_string());
        if let Some(v) = o.lambda {
            self.solver.lambda = v;
        }
        if let Some(v) = o.tol {
            self.solver.tol = v;
        }
        if let Some(v) = o.h {
            self.grid.h = v;
        }
        if let Some(v) = o.m {
            self.grid.m = v;
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = Some(v.clone());
        }
        if self.output_dir.is_none() {
            self.output_dir = Some(PathBuf::from(DEFAULT_OUTPUT_DIR));
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.grid.h, self.grid.m)?)
    }

    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        self.solver.validate()?;
        Ok(self.solver)
    }

    pub fn base_potential(&self) -> Result<PotentialSpec, CliError> {
        let spec = match self.potential.as_ref() {
            None => return Err(CliError::Validation("config has no potential".into())),
            Some(PotentialChoice::Builtin { builtin, params }) => Builtin::from_name(builtin, params)?.spec(),
            Some(PotentialChoice::Spec(s)) => s.clone(),
        };
        if !spec.is_finite() {
            return Err(CliError::Validation("potential has non-finite coefficients".into()));
        }
        Ok(spec)
    }

    /// Normalized potential plus the physical shock data it was built for.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let spec = self.base_potential()?;
        let np = match (self.shock, self.potential.as_ref()) {
            (Some(s), _) => build_normalized(&spec, s.r_minus, s.r_plus)?,
            (None, Some(PotentialChoice::Builtin { builtin: name, params })) => {
                builtin(Builtin::from_name(name, params)?)?
            }
            (None, _) => NormalizedPotential::identity(spec.clone()),
        };
        let (v_minus, branch) = match self.shock {
            Some(s) => (s.v_minus, Branch::from_index(s.branch)?),
            None => (0.0, Branch::Two),
        };
        let (rm, rp) = (np.strain(-1.0), np.strain(1.0));
        // non-hyperbolic data still allows the potential checks
        let shock = complete_shock(&spec, rm, rp, v_minus, branch).ok();
        Ok(Resolved { spec, np, shock })
    }
}

pub struct Resolved {
    pub spec: PotentialSpec,
    pub np: NormalizedPotential,
    pub shock: Option<ShockData>,
}

impl Resolved {
    pub fn shock(&self) -> Result<ShockData, CliError> {
        self.shock.ok_or_else(|| {
            let (rm, rp) = (self.np.strain(-1.0), self.np.strain(1.0));
            CliError::Validation(format!(
                "no shock between {rm} and {rp}: [Phi'] / [r] = {} is not positive",
                (self.spec.dphi(rp) - self.spec.dphi(rm)) / (rp - rm)
            ))
        })
    }
}
