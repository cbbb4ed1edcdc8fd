//! Experiment configuration: JSON text in, fully-resolved and validated
//! settings out.
//!
//! A config file names a game, an algorithm, and the update schedule.
//! Unknown keys are rejected so typos cannot silently fall back to
//! defaults; defaults that do apply are materialized into the resolved
//! struct, which [`crate::run::cmd_run`] echoes next to the trace so every
//! artifact is self-describing.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use kpg_core::engine::{
    LearningRates, Optimizer, OptimizerKind, DEFAULT_DECAY, DEFAULT_EPSILON, DEFAULT_MOMENTUM,
};
use kpg_core::games::{matrix_game_make, MeetupGame, QuadraticGame};
use kpg_core::tabular::{ClipMode, TabularMarkovGame};
use kpg_core::{DifferentiableGame, JointParams};

use crate::error::LabError;

/// Which game the experiment runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameKind {
    Meetup,
    Quadratic,
    Matrix,
}

/// Game selector plus per-kind parameters. Fields irrelevant to the chosen
/// kind must stay absent; validation enforces it so a config never carries
/// misleading leftovers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub kind: GameKind,
    /// Meet-up: initial positions of the two agents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota2: Option<[f64; 2]>,
    /// Scalar quadratic: own curvature (negative) and coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Matrix game: actions per agent and the payoff tensor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared: Option<bool>,
}

impl GameSpec {
    /// Reject fields that do not belong to the chosen kind and fill the
    /// kind's defaults.
    fn resolve(&mut self) -> Result<(), LabError> {
        let claim = |present: bool, field: &str, kind: &str| {
            if present {
                Err(LabError::Config(format!(
                    "field `{field}` does not apply to game kind `{kind}`"
                )))
            } else {
                Ok(())
            }
        };
        match self.kind {
            GameKind::Meetup => {
                claim(self.p.is_some(), "p", "meetup")?;
                claim(self.c.is_some(), "c", "meetup")?;
                claim(self.action_counts.is_some(), "action_counts", "meetup")?;
                claim(self.payoffs.is_some(), "payoffs", "meetup")?;
                claim(self.shared.is_some(), "shared", "meetup")?;
                self.iota1.get_or_insert([0.0, 0.0]);
                self.iota2.get_or_insert([3.0, 2.0]);
            }
            GameKind::Quadratic => {
                claim(self.iota1.is_some(), "iota1", "quadratic")?;
                claim(self.iota2.is_some(), "iota2", "quadratic")?;
                claim(self.action_counts.is_some(), "action_counts", "quadratic")?;
                claim(self.payoffs.is_some(), "payoffs", "quadratic")?;
                claim(self.shared.is_some(), "shared", "quadratic")?;
                self.p.get_or_insert(-1.0);
                self.c.get_or_insert(0.5);
            }
            GameKind::Matrix => {
                claim(self.iota1.is_some(), "iota1", "matrix")?;
                claim(self.iota2.is_some(), "iota2", "matrix")?;
                claim(self.p.is_some(), "p", "matrix")?;
                claim(self.c.is_some(), "c", "matrix")?;
                if self.action_counts.is_none() {
                    return Err(LabError::Config(
                        "matrix game needs `action_counts`".into(),
                    ));
                }
                if self.payoffs.is_none() {
                    return Err(LabError::Config("matrix game needs `payoffs`".into()));
                }
                self.shared.get_or_insert(true);
            }
        }
        Ok(())
    }

    /// Instantiate a differentiable game, or explain why this kind is not
    /// one.
    pub fn build_differentiable(&self) -> Result<Box<dyn DifferentiableGame>, LabError> {
        match self.kind {
            GameKind::Meetup => {
                let game = MeetupGame::new(
                    self.iota1.expect("resolved"),
                    self.iota2.expect("resolved"),
                )?;
                Ok(Box::new(game))
            }
            GameKind::Quadratic => {
                let game = QuadraticGame::two_player_scalar(
                    self.p.expect("resolved"),
                    self.c.expect("resolved"),
                )?;
                Ok(Box::new(game))
            }
            GameKind::Matrix => Err(LabError::Config(
                "game kind `matrix` has no differentiable parameters; use algo `tabular-kmappo`"
                    .into(),
            )),
        }
    }

    /// Instantiate the tabular game, or explain why this kind is not one.
    pub fn build_tabular(&self) -> Result<TabularMarkovGame, LabError> {
        match self.kind {
            GameKind::Matrix => Ok(matrix_game_make(
                self.action_counts.as_deref().expect("resolved"),
                self.payoffs.as_deref().expect("resolved"),
                self.shared.expect("resolved"),
            )?),
            other => Err(LabError::Config(format!(
                "game kind `{other:?}` is not tabular; algo `tabular-kmappo` needs kind `matrix`"
            ))),
        }
    }
}

/// Which update rule drives the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgoKind {
    /// Finite-depth k-level updates committed every step.
    Kpg,
    /// Run the level recursion to its fixed point once.
    Gsppm,
    /// K-level clipped-surrogate training over softmax policy tables.
    TabularKmappo,
}

/// Optimizer selection with hyperparameters materialized.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub kind: OptimizerChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerChoice {
    Plain,
    Momentum,
    RmspropLike,
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec { kind: OptimizerChoice::Plain, momentum: None, decay: None, epsilon: None }
    }
}

impl OptimizerSpec {
    fn resolve(&mut self) -> Result<(), LabError> {
        match self.kind {
            OptimizerChoice::Plain => {
                if self.momentum.is_some() || self.decay.is_some() || self.epsilon.is_some() {
                    return Err(LabError::Config(
                        "optimizer `plain` takes no hyperparameters".into(),
                    ));
                }
            }
            OptimizerChoice::Momentum => {
                if self.decay.is_some() || self.epsilon.is_some() {
                    return Err(LabError::Config(
                        "optimizer `momentum` takes only `momentum`".into(),
                    ));
                }
                let beta = *self.momentum.get_or_insert(DEFAULT_MOMENTUM);
                if !(0.0..1.0).contains(&beta) {
                    return Err(LabError::Config(format!(
                        "momentum must lie in [0, 1), got {beta}"
                    )));
                }
            }
            OptimizerChoice::RmspropLike => {
                if self.momentum.is_some() {
                    return Err(LabError::Config(
                        "optimizer `rmsprop-like` takes `decay` and `epsilon`".into(),
                    ));
                }
                let rho = *self.decay.get_or_insert(DEFAULT_DECAY);
                if !(0.0..1.0).contains(&rho) {
                    return Err(LabError::Config(format!(
                        "decay must lie in [0, 1), got {rho}"
                    )));
                }
                let eps = *self.epsilon.get_or_insert(DEFAULT_EPSILON);
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(LabError::Config(format!(
                        "epsilon must be positive, got {eps}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Build the optimizer for the given per-agent dimensions.
    pub fn build(&self, dims: &[usize]) -> Optimizer {
        let kind = match self.kind {
            OptimizerChoice::Plain => OptimizerKind::Plain,
            OptimizerChoice::Momentum => OptimizerKind::Momentum,
            OptimizerChoice::RmspropLike => OptimizerKind::RmspropLike,
        };
        Optimizer::with_hyperparameters(
            kind,
            dims,
            self.momentum.unwrap_or(DEFAULT_MOMENTUM),
            self.decay.unwrap_or(DEFAULT_DECAY),
            self.epsilon.unwrap_or(DEFAULT_EPSILON),
        )
    }
}

/// How the clipped surrogate treats the clip (tabular algo only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ClipModeSpec {
    #[default]
    Standard,
    LiteralRatio,
}

impl From<ClipModeSpec> for ClipMode {
    fn from(spec: ClipModeSpec) -> ClipMode {
        match spec {
            ClipModeSpec::Standard => ClipMode::Standard,
            ClipModeSpec::LiteralRatio => ClipMode::LiteralRatio,
        }
    }
}

fn default_steps() -> usize {
    100
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_gsppm_k_max() -> usize {
    1000
}

fn default_eps_clip() -> f64 {
    0.2
}

/// One experiment, fully describing game, algorithm, and schedule.
///
/// Required keys: `game`, `algo`, `K`, `etas`. Everything else defaults;
/// the resolved struct carries the defaults explicitly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSpec,
    pub algo: AlgoKind,
    /// Reasoning depth: levels per committed update.
    #[serde(rename = "K")]
    pub k_levels: usize,
    /// Per-agent learning rates.
    pub etas: Vec<f64>,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    /// Committed updates (`kpg`, `tabular-kmappo`); ignored by `gsppm`.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Level-gap tolerance for the fixed-point solver.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Level cap for the fixed-point solver.
    #[serde(default = "default_gsppm_k_max")]
    pub gsppm_k_max: usize,
    #[serde(default)]
    pub seed: u64,
    /// Clip range for the tabular surrogate.
    #[serde(default = "default_eps_clip")]
    pub eps_clip: f64,
    #[serde(default)]
    pub clip_mode: ClipModeSpec,
    /// Initial joint parameters, one vector per agent. Absent means "draw
    /// uniformly from the game's region with `seed`"; the resolved config
    /// records the drawn value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<Vec<f64>>>,
    /// Output base path; defaults to the config path minus its extension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentConfig {
    /// Parse a config file, reporting JSON problems with line and column.
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let mut config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
            LabError::Config(format!(
                "{}:{}:{}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        config.resolve()?;
        Ok(config)
    }

    /// Validate cross-field constraints and materialize defaults.
    pub fn resolve(&mut self) -> Result<(), LabError> {
        self.game.resolve()?;
        self.optimizer.resolve()?;
        if self.k_levels == 0 {
            return Err(LabError::Config("`K` must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(LabError::Config("`steps` must be at least 1".into()));
        }
        if self.etas.is_empty() {
            return Err(LabError::Config("`etas` must list one rate per agent".into()));
        }
        if self.etas.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(LabError::Config(
                "`etas` entries must be positive and finite".into(),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(LabError::Config("`tolerance` must be positive".into()));
        }
        if self.gsppm_k_max == 0 {
            return Err(LabError::Config("`gsppm_k_max` must be at least 1".into()));
        }
        if self.eps_clip.is_nan() || self.eps_clip < 0.0 {
            return Err(LabError::Config("`eps_clip` must be non-negative".into()));
        }
        match self.algo {
            AlgoKind::Kpg | AlgoKind::Gsppm => {
                // Surface the game/algo mismatch at validation time, before
                // any files are touched.
                let game = self.game.build_differentiable()?;
                if self.etas.len() != game.n_agents() {
                    return Err(LabError::Config(format!(
                        "`etas` lists {} rates but the game has {} agents",
                        self.etas.len(),
                        game.n_agents()
                    )));
                }
                if let Some(start) = &self.start {
                    let dims = game.dims();
                    if start.len() != dims.len()
                        || start.iter().zip(&dims).any(|(s, &d)| s.len() != d)
                    {
                        return Err(LabError::Config(format!(
                            "`start` must match the game's layout {dims:?}"
                        )));
                    }
                    if start.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(LabError::Config("`start` entries must be finite".into()));
                    }
                }
            }
            AlgoKind::TabularKmappo => {
                let game = self.game.build_tabular()?;
                if self.etas.len() != game.n_agents() {
                    return Err(LabError::Config(format!(
                        "`etas` lists {} rates but the game has {} agents",
                        self.etas.len(),
                        game.n_agents()
                    )));
                }
                if self.start.is_some() {
                    return Err(LabError::Config(
                        "`start` does not apply to algo `tabular-kmappo`; initial logits \
                         come from `seed`"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Per-agent learning rates as the engine type.
    pub fn rates(&self) -> Result<LearningRates, LabError> {
        Ok(LearningRates::per_agent(self.etas.clone())?)
    }

    /// Initial joint parameters for differentiable-game algorithms,
    /// drawing from the region when no start is given, and recording the
    /// draw so the echo file pins it.
    pub fn resolve_start(&mut self, game: &dyn DifferentiableGame) -> Result<JointParams, LabError> {
        if let Some(start) = &self.start {
            return Ok(JointParams::pack(start)?);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let flat: Vec<f64> = game
            .region()
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect();
        let theta = JointParams::from_flat(&game.dims(), &flat)?;
        self.start = Some(theta.unpack());
        Ok(theta)
    }

    /// Serialize the resolved config as pretty JSON (the echo artifact).
    pub fn echo_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }
}
