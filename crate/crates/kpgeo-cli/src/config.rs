use std::path::{Path, PathBuf};

use kpgeo::fields::snapshot::load_real;
use kpgeo::fields::{GridField, Support, TorusGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_SCHEMA: &str = "kpgeo-config v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SolveGeodesic,
    DiscSolve,
    VerifySuite,
    Schedule,
    ShiftBackground,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Zero,
    Constant,
    Cosine,
    /// `a (cos x + 0.3 sin 2x)`.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum EndpointSource {
    Builtin {
        profile: Profile,
        #[serde(default)]
        amplitude: f64,
    },
    Snapshot { snapshot: PathBuf },
}

impl Default for EndpointSource {
    fn default() -> Self {
        EndpointSource::Builtin { profile: Profile::Zero, amplitude: 0.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoints {
    #[serde(default)]
    pub phi0: EndpointSource,
    #[serde(default)]
    pub phi1: EndpointSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleParams {
    pub c0: f64,
    pub c: f64,
    pub h_norm_b: f64,
    pub steps: usize,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self { c0: 1.5, c: 1.5, h_norm_b: 0.05, steps: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub mode: Mode,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_j")]
    pub j: f64,
    /// Radius of the neighbourhood `|f|_b ≤ ε` the iteration must stay in.
    #[serde(default = "default_eps")]
    pub epsilon_amplitude: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Torus grid `[nx, ny]`.
    #[serde(default = "default_torus")]
    pub torus: [usize; 2],
    /// Window cells for geodesic modes, lattice cells for `disc-solve`.
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub endpoints: Endpoints,
    /// Background potential snapshot, required by `shift-background`.
    #[serde(default)]
    pub background: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thread_count: Option<usize>,
    #[serde(default)]
    pub schedule: ScheduleParams,
    #[serde(default)]
    pub boundary_spacing: Option<f64>,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

fn default_k() -> f64 {
    5.0
}
fn default_j() -> f64 {
    0.1
}
fn default_eps() -> f64 {
    1.0
}
fn default_theta() -> f64 {
    6.0
}
fn default_torus() -> [usize; 2] {
    [64, 1]
}
fn default_resolutions() -> Vec<usize> {
    vec![16]
}
fn default_output() -> PathBuf {
    PathBuf::from("kpgeo-out")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let Some(b) = self.background.as_mut() {
            fix(b);
        }
        for e in [&mut self.endpoints.phi0, &mut self.endpoints.phi1] {
            if let EndpointSource::Snapshot { snapshot } = e {
                fix(snapshot);
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema != CONFIG_SCHEMA {
            return bad(format!("schema `{}` is not `{CONFIG_SCHEMA}`", self.schema));
        }
        if self.torus[0] < 4 || self.torus[1] == 0 {
            return bad(format!("torus grid {:?} too small", self.torus));
        }
        if matches!(self.mode, Mode::SolveGeodesic | Mode::ShiftBackground | Mode::DiscSolve) && self.resolutions.is_empty() {
            return bad("resolutions must not be empty".into());
        }
        if matches!(self.mode, Mode::SolveGeodesic | Mode::ShiftBackground | Mode::Schedule) {
            kpgeo::nash_moser::precheck(self.k, self.j).map_err(|e| CliError::Config(e.to_string()))?;
            if self.theta <= 4.0 {
                return bad(format!("theta = {} must exceed 4", self.theta));
            }
        }
        if self.mode == Mode::ShiftBackground && self.background.is_none() {
            return bad("shift-background requires `background`".into());
        }
        if self.thread_count == Some(0) {
            return bad("thread_count must be positive".into());
        }
        Ok(())
    }

    pub fn torus_grid(&self) -> TorusGrid {
        TorusGrid::new(self.torus[0], self.torus[1])
    }

    pub fn endpoint(&self, source: &EndpointSource) -> Result<GridField<f64>, CliError> {
        let torus = self.torus_grid();
        match source {
            EndpointSource::Builtin { profile, amplitude } => Ok(profile_field(torus, *profile, *amplitude)),
            EndpointSource::Snapshot { snapshot } => load_torus_snapshot(snapshot, torus),
        }
    }
}

pub fn profile_field(torus: TorusGrid, profile: Profile, a: f64) -> GridField<f64> {
    let v = match profile {
        Profile::Zero => vec![0.0; torus.len()],
        Profile::Constant => vec![a; torus.len()],
        Profile::Cosine => torus.sample(|x, _| a * x.cos()),
        Profile::Mixed => torus.sample(|x, _| a * (x.cos() + 0.3 * (2.0 * x).sin())),
    };
    GridField::torus_field(torus, v)
}

pub fn load_torus_snapshot(path: &Path, torus: TorusGrid) -> Result<GridField<f64>, CliError> {
    let f = load_real(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if !matches!(f.support, Support::Torus) || f.torus != torus {
        return Err(CliError::Config(format!(
            "{}: expected a torus field on {}x{}",
            path.display(),
            torus.nx,
            torus.ny
        )));
    }
    Ok(f)
}
