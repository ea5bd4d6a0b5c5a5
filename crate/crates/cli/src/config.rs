//! Run configuration: a TOML document with one section per concern. Every
//! field has a default, unknown keys are rejected, and the whole document is
//! validated against the core preconditions before anything runs.

use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};

use eprlab_core::measurement::{Aperture, ApertureKind};
use eprlab_core::protocols::audit::OracleCheckConfig;
use eprlab_core::protocols::discriminator::DiscriminatorConfig;
use eprlab_core::protocols::kim_shih::KimShihConfig;
use eprlab_core::protocols::persistence::PersistenceConfig;
use eprlab_core::protocols::signaling::{SignalingConfig, SignalingModel};
use eprlab_core::protocols::GridSpec;
use eprlab_core::{DiscreteEntangledSpec, EprParams, Grid1D, ParaxialGeometry, PhysicalConstants};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Where the run writes its files. Left out of the echoed config so
    /// that reports written to different places compare equal.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub constants: ConstantsSection,
    pub grid: GridSection,
    pub state: StateSection,
    pub aperture: ApertureSection,
    pub times: TimesSection,
    pub geometry: GeometrySection,
    pub signaling: SignalingSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            constants: ConstantsSection::default(),
            grid: GridSection::default(),
            state: StateSection::default(),
            aperture: ApertureSection::default(),
            times: TimesSection::default(),
            geometry: GeometrySection::default(),
            signaling: SignalingSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsSection {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            n: g.n,
            x_min: g.x_min,
            x_max: g.x_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Epr,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateSection {
    pub kind: StateKind,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub terms: usize,
    pub spacing: f64,
    pub peak_sigma: f64,
    /// Repeated measurements drawn for a discrete state.
    pub trials: usize,
}

impl Default for StateSection {
    fn default() -> Self {
        Self {
            kind: StateKind::Epr,
            sigma_plus: 0.1,
            sigma_minus: 10.0,
            terms: 4,
            spacing: 6.0,
            peak_sigma: 0.5,
            trials: 40_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApertureSection {
    pub kind: ApertureKind,
    pub center: f64,
    pub width: f64,
}

impl Default for ApertureSection {
    fn default() -> Self {
        Self {
            kind: ApertureKind::Tophat,
            center: 0.0,
            width: 1.0,
        }
    }
}

impl ApertureSection {
    fn with_width(width: f64) -> Self {
        Self {
            width,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimesSection {
    pub measurement_time: f64,
    pub delays: Vec<f64>,
}

impl Default for TimesSection {
    fn default() -> Self {
        Self {
            measurement_time: 0.0,
            delays: vec![0.0, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub longitudinal_speed: f64,
    pub source_time: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            longitudinal_speed: 100.0,
            source_time: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalingSection {
    pub slit_high: ApertureSection,
    pub slit_low: ApertureSection,
    pub blocks: usize,
    pub pairs_per_block: usize,
    pub delay: f64,
    pub model: SignalingModel,
}

impl Default for SignalingSection {
    fn default() -> Self {
        Self {
            slit_high: ApertureSection::with_width(1.0),
            slit_low: ApertureSection::with_width(0.4),
            blocks: 50,
            pairs_per_block: 2000,
            delay: 1.0,
            model: SignalingModel::M1,
        }
    }
}

fn at<T>(key: &str, r: eprlab_core::Result<T>) -> Result<T> {
    r.map_err(|e| anyhow!("{key}: {e}"))
}

fn aperture(key: &str, s: &ApertureSection) -> Result<Aperture> {
    at(key, Aperture::new(s.kind, s.center, s.width))
}

impl RunConfig {
    pub fn constants(&self) -> Result<PhysicalConstants> {
        at(
            "constants",
            PhysicalConstants::new(self.constants.hbar, self.constants.mass),
        )
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            n: self.grid.n,
            x_min: self.grid.x_min,
            x_max: self.grid.x_max,
        }
    }

    pub fn grid(&self) -> Result<Grid1D> {
        at("grid", self.grid_spec().build(self.constants()?))
    }

    pub fn epr(&self) -> Result<EprParams> {
        at(
            "state",
            EprParams::new(self.state.sigma_plus, self.state.sigma_minus),
        )
    }

    pub fn discrete(&self) -> Result<DiscreteEntangledSpec> {
        at(
            "state",
            DiscreteEntangledSpec::new(self.state.terms, self.state.spacing, self.state.peak_sigma),
        )
    }

    pub fn slit(&self) -> Result<Aperture> {
        aperture("aperture", &self.aperture)
    }

    pub fn geometry(&self) -> Result<ParaxialGeometry> {
        at(
            "geometry",
            ParaxialGeometry::new(self.geometry.longitudinal_speed, self.geometry.source_time),
        )
    }

    pub fn discriminator(&self) -> Result<DiscriminatorConfig> {
        let cfg = DiscriminatorConfig {
            constants: self.constants()?,
            grid: self.grid_spec(),
            epr: self.epr()?,
            slit: self.slit()?,
            measurement_time: self.times.measurement_time,
            delays: self.times.delays.clone(),
            geometry: self.geometry()?,
        };
        at("times", cfg.validate())?;
        Ok(cfg)
    }

    pub fn signaling_config(&self) -> Result<SignalingConfig> {
        let s = &self.signaling;
        let cfg = SignalingConfig {
            constants: self.constants()?,
            grid: self.grid_spec(),
            epr: self.epr()?,
            slit_high: aperture("signaling.slit_high", &s.slit_high)?,
            slit_low: aperture("signaling.slit_low", &s.slit_low)?,
            blocks: s.blocks,
            pairs_per_block: s.pairs_per_block,
            delay: s.delay,
            model: s.model,
            seed: self.seed,
        };
        at("signaling", cfg.validate())?;
        Ok(cfg)
    }

    pub fn kim_shih(&self, delay: f64) -> Result<KimShihConfig> {
        let cfg = KimShihConfig {
            constants: self.constants()?,
            grid: self.grid_spec(),
            epr: self.epr()?,
            slit: self.slit()?,
            delay,
        };
        at("times", cfg.validate())?;
        Ok(cfg)
    }

    pub fn persistence(&self) -> Result<PersistenceConfig> {
        let cfg = PersistenceConfig {
            constants: self.constants()?,
            grid: self.grid_spec(),
            epr: self.epr()?,
            slit: self.slit()?,
            measurement_time: self.times.measurement_time,
            delays: self.times.delays.clone(),
        };
        at("times", cfg.validate())?;
        Ok(cfg)
    }

    pub fn oracle_check(&self) -> Result<OracleCheckConfig> {
        Ok(OracleCheckConfig {
            constants: self.constants()?,
            grid: self.grid_spec(),
            epr: self.epr()?,
            slit: self.slit()?,
            delays: self.times.delays.clone(),
        })
    }

    /// Checks the sections every subcommand reads. The signaling section is
    /// only read by `signal-test`, which validates it when building its
    /// configuration, still before any computation.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        match self.state.kind {
            StateKind::Epr => {
                self.epr()?;
            }
            StateKind::Discrete => {
                self.discrete()?;
                if self.state.trials == 0 {
                    return Err(anyhow!("state.trials: must be at least 1"));
                }
            }
        }
        at("aperture", self.slit()?.check_resolved(&grid))?;
        self.geometry()?;
        if self.state.kind == StateKind::Epr {
            self.discriminator()?;
        }
        aperture("signaling.slit_high", &self.signaling.slit_high)?;
        aperture("signaling.slit_low", &self.signaling.slit_low)?;
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).context("malformed configuration")?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.grid.n, 1024);
        assert_eq!((cfg.grid.x_min, cfg.grid.x_max), (-40.0, 40.0));
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.constants.hbar, 1.0);
    }

    #[test]
    fn grid_size_must_be_power_of_two() {
        let err = parse_config("[grid]\nn = 1000\n").unwrap_err().to_string();
        assert!(err.contains("grid") && err.contains("power of two"), "{err}");
    }

    #[test]
    fn sigma_must_be_positive() {
        let err = parse_config("[state]\nsigma_plus = -1.0\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("sigma_plus") && err.contains("positive"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = format!("{:#}", parse_config("[grid]\nsize = 512\n").unwrap_err());
        assert!(err.contains("size"), "{err}");
        assert!(parse_config("colour = 1\n").is_err());
    }

    #[test]
    fn signaling_minimums() {
        let cfg = parse_config("[signaling]\nblocks = 10\n").unwrap();
        let err = cfg.signaling_config().unwrap_err().to_string();
        assert!(err.contains("blocks"), "{err}");
    }

    #[test]
    fn nested_sections_parse() {
        let cfg = parse_config(
            "seed = 7\n[aperture]\nkind = \"gaussian\"\ncenter = 1.0\nwidth = 0.5\n\
             [signaling]\nmodel = \"m2_unconditional\"\n[signaling.slit_low]\nwidth = 0.35\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.aperture.kind, ApertureKind::Gaussian);
        assert_eq!(cfg.signaling.model, SignalingModel::M2Unconditional);
        assert_eq!(cfg.signaling.slit_low.width, 0.35);
        assert_eq!(cfg.signaling.slit_low.center, 0.0);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
