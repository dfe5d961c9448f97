//! Experiment configuration, read from TOML with strict key checking.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use torus_lab::chain::{check_epsilon, EnclosureMode, TwoJumpBudgets};
use torus_lab::torus::{
    build_return_perturbation, denjoy_product, rigid_translation, skew_example, SkewExampleParams,
};
use torus_lab::{SkewProduct, TorusPoint};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MapSpec {
    Rigid {
        a: f64,
        b: f64,
    },
    DenjoyProduct {
        #[serde(default)]
        params: SkewExampleParams,
    },
    SkewExample {
        #[serde(default)]
        params: SkewExampleParams,
    },
    /// The skew example with the return-forcing perturbation at `point`
    /// (default: left end of the largest base gap, fiber height 0.3).
    SkewPerturbed {
        #[serde(default)]
        params: SkewExampleParams,
        #[serde(default)]
        point: Option<[f64; 2]>,
        epsilon: f64,
        delta: f64,
    },
}

impl Default for MapSpec {
    fn default() -> Self {
        MapSpec::SkewExample {
            params: SkewExampleParams::default(),
        }
    }
}

impl MapSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MapSpec::Rigid { .. } => "rigid",
            MapSpec::DenjoyProduct { .. } => "denjoy-product",
            MapSpec::SkewExample { .. } => "skew-example",
            MapSpec::SkewPerturbed { .. } => "skew-perturbed",
        }
    }

    pub fn params(&self) -> Option<&SkewExampleParams> {
        match self {
            MapSpec::Rigid { .. } => None,
            MapSpec::DenjoyProduct { params }
            | MapSpec::SkewExample { params }
            | MapSpec::SkewPerturbed { params, .. } => Some(params),
        }
    }

    /// Rotation vector the map is built to have.
    pub fn prescribed_rotation(&self) -> (f64, f64) {
        match self {
            MapSpec::Rigid { a, b } => (*a, *b),
            _ => {
                let p = self.params().expect("Denjoy-based map");
                (p.rho1.value(), p.rho2.value())
            }
        }
    }

    pub fn build(&self) -> Result<SkewProduct, ConfigError> {
        let err = |e: torus_lab::TorusError| ConfigError::Invalid(format!("map: {e}"));
        match self {
            MapSpec::Rigid { a, b } => Ok(rigid_translation(*a, *b)),
            MapSpec::DenjoyProduct { params } => denjoy_product(params).map_err(err),
            MapSpec::SkewExample { params } => skew_example(params).map_err(err),
            MapSpec::SkewPerturbed {
                params,
                point,
                epsilon,
                delta,
            } => {
                let f = skew_example(params).map_err(err)?;
                let x = perturbation_point(&f, *point)?;
                let pert = build_return_perturbation(f.beta(), x, *epsilon, *delta).map_err(err)?;
                Ok(f.with_beta(pert.beta))
            }
        }
    }
}

/// Configured point, or the left end of gap 0 at fiber height 0.3.
pub fn perturbation_point(
    f: &SkewProduct,
    point: Option<[f64; 2]>,
) -> Result<TorusPoint, ConfigError> {
    if let Some([s, t]) = point {
        if !(s.is_finite() && t.is_finite()) {
            return invalid("perturbation point must be finite");
        }
        return Ok(TorusPoint::new(s, t));
    }
    let g1 = match f.base_denjoy() {
        Some(g) => g,
        None => return invalid("perturbation needs a Denjoy base map"),
    };
    let s = g1.gap(0).expect("gap 0 always exists").left;
    Ok(TorusPoint::new(s, 0.3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotationConfig {
    pub iterations: Vec<u64>,
    pub starts: usize,
    /// Allowed distance to the prescribed vector; per-map default when absent.
    pub tolerance: Option<f64>,
}

impl Default for RotationConfig {
    fn default() -> Self {
        Self {
            iterations: vec![100, 10_000, 1_000_000],
            starts: 10,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub m: usize,
    /// Defaults to `2/m`.
    pub epsilon: Option<f64>,
    pub trials: usize,
    pub mode: EnclosureMode,
    /// Also report the nonwandering approximation of the `nonwandering` section.
    pub report_wandering: bool,
    /// Write the full transition graph as an edge list.
    pub write_edges: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            m: 256,
            epsilon: None,
            trials: 20,
            mode: EnclosureMode::OuterBound,
            report_wandering: true,
            write_edges: false,
        }
    }
}

impl ChainConfig {
    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(2.0 / self.m as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoJumpConfig {
    pub epsilon: f64,
    pub pairs: usize,
    pub budgets: TwoJumpBudgets,
}

impl Default for TwoJumpConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            pairs: 10,
            budgets: TwoJumpBudgets::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EssentialConfig {
    pub m: usize,
    pub cross_width: f64,
    /// Random doubly essential pairs tested for intersection.
    pub random_pairs: usize,
    /// Spanning-tree seeds compared for basis stability.
    pub seeds: u64,
    /// Random paths tested against the capture diameter of the cross.
    pub paths: usize,
}

impl Default for EssentialConfig {
    fn default() -> Self {
        Self {
            m: 64,
            cross_width: 0.25,
            random_pairs: 1000,
            seeds: 10,
            paths: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbConfig {
    /// Center of the ball; default is the left end of gap 0 at height 0.3.
    pub point: Option<[f64; 2]>,
    pub epsilon: f64,
    pub delta: f64,
    pub samples: usize,
    /// Minimal-set points on which `β′ = β` is checked.
    pub minimal_points: usize,
    /// Samples for the `C⁰` distance of the fiber families.
    pub distance_samples: usize,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            point: None,
            epsilon: 0.05,
            delta: 0.1,
            samples: 4096,
            minimal_points: 100,
            distance_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonwanderingConfig {
    pub m: usize,
    pub n_max: u64,
    /// `Some(true)`: certified wandering boxes must exist; `Some(false)`:
    /// none may exist; absent: informational only.
    pub expect_wandering: Option<bool>,
}

impl Default for NonwanderingConfig {
    fn default() -> Self {
        Self {
            m: 64,
            n_max: 10_000,
            expect_wandering: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub map: MapSpec,
    pub rotation: RotationConfig,
    pub chain: ChainConfig,
    pub two_jump: TwoJumpConfig,
    pub essential: EssentialConfig,
    pub perturb: PerturbConfig,
    pub nonwandering: NonwanderingConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: None,
            map: MapSpec::default(),
            rotation: RotationConfig::default(),
            chain: ChainConfig::default(),
            two_jump: TwoJumpConfig::default(),
            essential: EssentialConfig::default(),
            perturb: PerturbConfig::default(),
            nonwandering: NonwanderingConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Range checks against the preconditions of the operations each section
    /// feeds. Map construction errors surface later, when the map is built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.map {
            MapSpec::Rigid { a, b } if !(a.is_finite() && b.is_finite()) => {
                return invalid("map: translation must be finite")
            }
            MapSpec::SkewPerturbed { epsilon, delta, .. }
                if !(*epsilon > 0.0 && *epsilon < 0.5 && *delta > 0.0) =>
            {
                return invalid("map: need 0 < epsilon < 0.5 and delta > 0")
            }
            _ => {}
        }

        let r = &self.rotation;
        if r.iterations.is_empty() || r.iterations.contains(&0) {
            return invalid("rotation.iterations must be non-empty and positive");
        }
        if r.starts == 0 {
            return invalid("rotation.starts must be positive");
        }
        if matches!(r.tolerance, Some(t) if !(t > 0.0)) {
            return invalid("rotation.tolerance must be positive");
        }

        let c = &self.chain;
        if c.m == 0 || c.trials == 0 {
            return invalid("chain.m and chain.trials must be positive");
        }
        if let Err(e) = check_epsilon(c.m, c.epsilon()) {
            return invalid(format!("chain: {e}"));
        }
        if matches!(c.mode, EnclosureMode::Sampled { per_side: 0 }) {
            return invalid("chain.mode.sampled.per_side must be positive");
        }

        let t = &self.two_jump;
        if !(t.epsilon > 0.0 && t.epsilon < 0.5) {
            return invalid("two_jump.epsilon must lie in (0, 0.5)");
        }
        let b = &t.budgets;
        if b.omega_grid == 0 || b.connector_samples == 0 || b.connector_orbit == 0 {
            return invalid("two_jump.budgets must be positive");
        }

        let e = &self.essential;
        if e.m < 4 || !(e.cross_width > 0.0 && e.cross_width < 1.0) || e.seeds == 0 {
            return invalid("essential: need m >= 4, 0 < cross_width < 1, seeds >= 1");
        }

        let p = &self.perturb;
        if !(p.epsilon > 0.0 && p.epsilon < 0.5 && p.delta > 0.0) {
            return invalid("perturb: need 0 < epsilon < 0.5 and delta > 0");
        }
        if p.samples < 2 || p.distance_samples == 0 {
            return invalid("perturb: samples must be at least 2");
        }

        let n = &self.nonwandering;
        if n.m == 0 || n.n_max == 0 {
            return invalid("nonwandering.m and nonwandering.n_max must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(
            ExperimentConfig::from_toml("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("sede = 1").is_err());
        assert!(ExperimentConfig::from_toml("[chain]\nmm = 3").is_err());
        assert!(
            ExperimentConfig::from_toml("[map]\nkind = \"rigid\"\na = 0.1\nb = 0.2\nc = 1")
                .is_err()
        );
        assert!(ExperimentConfig::from_toml(
            "[map]\nkind = \"skew-example\"\n[map.params]\nrho = 1"
        )
        .is_err());
    }

    #[test]
    fn map_kinds_parse() {
        let cfg =
            ExperimentConfig::from_toml("[map]\nkind = \"rigid\"\na = 0.25\nb = 0.5\n").unwrap();
        assert_eq!(cfg.map, MapSpec::Rigid { a: 0.25, b: 0.5 });
        let cfg = ExperimentConfig::from_toml(
            "[map]\nkind = \"skew-perturbed\"\nepsilon = 0.05\ndelta = 0.1\n[map.params]\namplitude = 0.2\n",
        )
        .unwrap();
        assert_eq!(cfg.map.params().unwrap().amplitude, 0.2);
        let cfg = ExperimentConfig::from_toml("[chain]\nmode = { sampled = { per_side = 3 } }\n")
            .unwrap();
        assert_eq!(cfg.chain.mode, EnclosureMode::Sampled { per_side: 3 });
    }

    #[test]
    fn out_of_range_values_are_invalid() {
        assert!(matches!(
            ExperimentConfig::from_toml("[chain]\nm = 64\nepsilon = 0.001"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_toml("[two_jump]\nepsilon = 0.7"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(ExperimentConfig::from_toml("[rotation]\niterations = []").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }
}
