//! Experiment configuration (JSON). See `configs/` for complete examples.

use std::path::Path;

use circqft::linalg::ComplexMatrix;
use circqft::models::{FourLevelModel, SixLevelModel};
use circqft::schedule::{Direction, PulsePair, Schedule};
use circqft::C64;
use serde::{Deserialize, Serialize};

/// A complex number written as `[re, im]`.
pub type Complex = [f64; 2];

fn c(z: Complex) -> C64 {
    C64::new(z[0], z[1])
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub pulses: Option<PulseConfig>,
    /// `[t_min, t_max]`; defaults to ±6T.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub direction: DirectionConfig,
    #[serde(default)]
    pub qpe: Option<QpeConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// `diag(−E, −E/3, E/3, E)` and the ring circulant with coupling V
    /// (default `E(1 + i/3)`).
    FourLevel {
        energy: f64,
        #[serde(default)]
        coupling: Option<Complex>,
    },
    /// The ring of six sublevels. `levels` supplies H0 when a schedule is
    /// needed; H1 is then the gauge-reduced circulant.
    SixLevel {
        omega1: Complex,
        omega2: Complex,
        #[serde(default)]
        levels: Option<Vec<f64>>,
    },
    /// `h0` is the diagonal of H0, `h1` the full matrix row by row.
    Custom { h0: Vec<f64>, h1: Vec<Vec<Complex>> },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseConfig {
    Tanh { t_cross: f64 },
    SechMasked { t_cross: f64, tau: f64 },
    Constant { f: f64, g: f64 },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DirectionConfig {
    #[default]
    Forward,
    Inverse,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QpeConfig {
    pub phi: f64,
    #[serde(default = "default_qubits")]
    pub r: u32,
    /// Draw this many simulated measurements (needs `--seed`).
    #[serde(default)]
    pub shots: Option<usize>,
}

fn default_qubits() -> u32 {
    2
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Values of E·T; the four-level energy is set to `value / T`.
    pub et_values: Vec<f64>,
}

/// Invalid configuration: maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        // serde_json reports line and column; unknown keys are named
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let err = |msg: String| Err(ConfigError(msg));
        match &self.model {
            ModelConfig::FourLevel { energy, coupling } => {
                if !(energy.is_finite() && *energy > 0.0) {
                    return err(format!("model.energy must be positive, got {energy}"));
                }
                if coupling.is_some_and(|z| !z.iter().all(|x| x.is_finite())) {
                    return err("model.coupling must be finite".into());
                }
            }
            ModelConfig::SixLevel { levels, .. } => {
                if levels.as_ref().is_some_and(|l| l.len() != 6) {
                    return err("model.levels must have 6 entries".into());
                }
            }
            ModelConfig::Custom { h0, h1 } => {
                if h0.len() < 2 {
                    return err("model.h0 needs at least 2 levels".into());
                }
                if h1.len() != h0.len() || h1.iter().any(|row| row.len() != h0.len()) {
                    return err(format!("model.h1 must be {n}x{n} to match model.h0", n = h0.len()));
                }
            }
        }
        if let Some(p) = self.pulses {
            let positive = |name: &str, x: f64| {
                if x.is_finite() && x > 0.0 {
                    Ok(())
                } else {
                    err(format!("pulses.{name} must be positive, got {x}"))
                }
            };
            match p {
                PulseConfig::Tanh { t_cross } => positive("t_cross", t_cross)?,
                PulseConfig::SechMasked { t_cross, tau } => {
                    positive("t_cross", t_cross)?;
                    positive("tau", tau)?;
                }
                PulseConfig::Constant { .. } => {}
            }
        }
        if let Some([a, b]) = self.window {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return err(format!("window [{a}, {b}] must be increasing"));
            }
        }
        if self.steps == Some(0) {
            return err("steps must be positive".into());
        }
        if let Some(q) = self.qpe {
            if !(0.0..1.0).contains(&q.phi) {
                return err(format!("qpe.phi must lie in [0, 1), got {}", q.phi));
            }
            if q.r == 0 {
                return err("qpe.r must be at least 1".into());
            }
        }
        if let Some(s) = &self.sweep {
            if s.et_values.is_empty() || s.et_values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return err("sweep.et_values must be a nonempty list of positive numbers".into());
            }
        }
        Ok(())
    }

    pub fn pulse_pair(&self) -> PulsePair {
        match self.pulses.unwrap_or(PulseConfig::SechMasked { t_cross: 1.0, tau: 1.0 }) {
            PulseConfig::Tanh { t_cross } => PulsePair::Tanh { t_cross },
            PulseConfig::SechMasked { t_cross, tau } => PulsePair::SechMasked { t_cross, tau },
            PulseConfig::Constant { f, g } => PulsePair::Constant { f, g },
        }
    }

    pub fn direction(&self) -> Direction {
        match self.direction {
            DirectionConfig::Forward => Direction::Forward,
            DirectionConfig::Inverse => Direction::Inverse,
        }
    }

    pub fn four_level(&self, energy: f64) -> circqft::Result<FourLevelModel> {
        match &self.model {
            ModelConfig::FourLevel { coupling: Some(v), energy: e0 } => {
                FourLevelModel::new(energy, c(*v) * (energy / e0))
            }
            _ => FourLevelModel::standard(energy),
        }
    }

    /// `(H0, H1)` for schedule-based commands.
    pub fn hamiltonians(&self) -> Result<(ComplexMatrix, ComplexMatrix), CommandError> {
        match &self.model {
            ModelConfig::FourLevel { energy, .. } => Ok(self.four_level(*energy)?.hamiltonians()),
            ModelConfig::SixLevel { omega1, omega2, levels } => {
                let levels = levels.as_ref().ok_or_else(|| {
                    ConfigError("six_level model needs `levels` for time-dependent commands".into())
                })?;
                let reduction = SixLevelModel::new(c(*omega1), c(*omega2)).gauge_reduction()?;
                Ok((ComplexMatrix::from_real_diagonal(levels), reduction.spec.materialize()))
            }
            ModelConfig::Custom { h0, h1 } => {
                let rows: Vec<Vec<C64>> = h1.iter().map(|r| r.iter().map(|&z| c(z)).collect()).collect();
                let h1 = ComplexMatrix::from_rows(&rows).map_err(circqft::Error::from)?;
                Ok((ComplexMatrix::from_real_diagonal(h0), h1))
            }
        }
    }

    pub fn schedule(&self, steps_override: Option<usize>) -> Result<Schedule, CommandError> {
        let (h0, h1) = self.hamiltonians()?;
        self.schedule_from(h0, h1, steps_override)
    }

    pub fn schedule_from(
        &self,
        h0: ComplexMatrix,
        h1: ComplexMatrix,
        steps_override: Option<usize>,
    ) -> Result<Schedule, CommandError> {
        let mut s = Schedule::new(self.pulse_pair(), h0, h1, self.direction())?;
        if let Some([a, b]) = self.window {
            s = s.with_window(a, b)?;
        }
        if let Some(n) = steps_override.or(self.steps) {
            s = s.with_steps(n)?;
        }
        Ok(s)
    }
}

/// Failure of a command, classified for the exit code.
#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Core(circqft::Error),
    Io(anyhow::Error),
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<circqft::Error> for CommandError {
    fn from(e: circqft::Error) -> Self {
        CommandError::Core(e)
    }
}

impl From<anyhow::Error> for CommandError {
    fn from(e: anyhow::Error) -> Self {
        CommandError::Io(e)
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Io(e.into())
    }
}

impl From<csv::Error> for CommandError {
    fn from(e: csv::Error) -> Self {
        CommandError::Io(e.into())
    }
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        use circqft::ErrorKind;
        match self {
            CommandError::Config(_) => 2,
            CommandError::Core(e) => match e.kind() {
                ErrorKind::Parameter => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Physics => 4,
            },
            CommandError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Config(e) => write!(f, "config error: {e}"),
            CommandError::Core(e) => write!(f, "{e}"),
            CommandError::Io(e) => write!(f, "{e:#}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = ExperimentConfig::parse(r#"{"model": {"kind": "four_level", "energy": 10}}"#).unwrap();
        assert_eq!(cfg.direction, DirectionConfig::Forward);
        assert!(matches!(cfg.pulse_pair(), PulsePair::SechMasked { .. }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::parse(r#"{"model": {"kind": "four_level", "energy": 1}, "stpes": 3}"#)
            .unwrap_err();
        assert!(e.0.contains("stpes"), "{e}");
        assert!(e.0.contains("line 1"), "{e}");
    }

    #[test]
    fn bad_values_are_rejected() {
        for text in [
            r#"{"model": {"kind": "four_level", "energy": -1}}"#,
            r#"{"model": {"kind": "four_level", "energy": 1}, "steps": 0}"#,
            r#"{"model": {"kind": "four_level", "energy": 1}, "qpe": {"phi": 1.0}}"#,
            r#"{"model": {"kind": "four_level", "energy": 1}, "pulses": {"kind": "tanh", "t_cross": 0}}"#,
            r#"{"model": {"kind": "custom", "h0": [0, 1], "h1": [[[0, 0]]]}}"#,
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn coupling_scales_with_energy() {
        let cfg = ExperimentConfig::parse(
            r#"{"model": {"kind": "four_level", "energy": 2, "coupling": [2, 1]}}"#,
        )
        .unwrap();
        let m = cfg.four_level(4.0).unwrap();
        assert_eq!(m.coupling(), C64::new(4.0, 2.0));
    }
}
