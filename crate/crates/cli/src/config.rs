//! Run configuration: a TOML file with one section per concern.
//!
//! Every key has a default, so an empty file is a valid configuration (the
//! Stora model on a near-circular orbit in a weak Coulomb field).

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use presym::evolution_space::{EvolutionPoint, ModelCoefficients, Preset};
use presym::fields::{event, RadialTable, FieldKind, FieldModel, RadialProfile, DEFAULT_R_MIN};
use presym::minkowski::{LabFrameState, SkewEndomorphism};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub field: FieldSection,
    pub initial: InitialSection,
    pub integration: IntegrationSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
    /// Directory of the config file, for relative table paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub preset: String,
    pub m: f64,
    pub s: f64,
    pub q: f64,
    pub g: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { preset: "stora".into(), m: 1.0, s: 1.0, q: 1.0, g: 2.0, k: None, l: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSection {
    /// `central`, `uniform`, `swirl` or `zero`.
    pub kind: String,
    /// Central profile: `coulomb`, `harmonic` or `tabulated`.
    pub profile: String,
    pub kappa: f64,
    pub r_min: f64,
    /// Two-column `r, phi` table for the tabulated profile, relative to the
    /// config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_path: Option<String>,
    /// Electric and magnetic parts of a uniform field.
    pub e: [f64; 3],
    pub b: [f64; 3],
    /// Where the potential of a uniform field vanishes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge_origin: Option<[f64; 3]>,
}

/// `κ = γ v²` puts the default initial state on a circular orbit of radius 1.
pub const DEFAULT_KAPPA: f64 = 0.010050378152592121;

impl Default for FieldSection {
    fn default() -> Self {
        FieldSection {
            kind: "central".into(),
            profile: "coulomb".into(),
            kappa: DEFAULT_KAPPA,
            r_min: DEFAULT_R_MIN,
            table_path: None,
            e: [0.0; 3],
            b: [0.0; 3],
            gauge_origin: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub r: [f64; 3],
    pub t: f64,
    pub v: [f64; 3],
    pub u: [f64; 3],
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection { r: [1.0, 0.0, 0.0], t: 0.0, v: [0.0, 0.1, 0.0], u: [0.6, 0.0, 0.8] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSection {
    pub h: f64,
    pub n_steps: usize,
    pub project_every: usize,
    /// τ-horizon of the convergence study; defaults to `min(1/(q‖F‖), 10/m)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        IntegrationSection { h: 0.02, n_steps: 10_000, project_every: 1, horizon: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub eps_list: Vec<f64>,
    pub family_size: usize,
    /// Number of random points in the audit.
    pub n_points: usize,
    pub seed: u64,
    /// Relative drift bound of the conservation run.
    pub drift_bound: f64,
    /// Closedness residual bound of the audit.
    pub closedness_bound: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            eps_list: vec![1e-2, 3e-3, 1e-3, 3e-4],
            family_size: 32,
            n_points: 50,
            seed: 0,
            drift_bound: 1e-8,
            closedness_bound: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    /// `csv` or `json`.
    pub format: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: None, format: "csv".into() }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative table paths are resolved against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    /// Canonical TOML text; parsing it gives back the same configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }

    /// Canonical text without the output directory, which does not change
    /// any result. This is what output headers echo.
    pub fn echo(&self) -> String {
        let mut c = self.clone();
        c.output.directory = None;
        c.canonical()
    }

    /// Validates after command-line overrides.
    pub fn revalidate(&self) -> Result<(), CliError> {
        self.validate()
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !matches!(self.output.format.as_str(), "csv" | "json") {
            return bad(format!("output.format must be csv or json, got {:?}", self.output.format));
        }
        if self.integration.h.is_nan() || self.integration.h <= 0.0 {
            return bad(format!("integration.h must be positive, got {}", self.integration.h));
        }
        if self.experiment.eps_list.is_empty() || self.experiment.eps_list.iter().any(|e| e.is_nan() || *e < 0.0) {
            return bad("experiment.eps_list must hold non-negative values".into());
        }
        if self.experiment.n_points == 0 {
            return bad("experiment.n_points must be at least 1".into());
        }
        self.coefficients()?;
        Ok(())
    }

    pub fn preset(&self) -> Result<Preset, CliError> {
        self.model.preset.parse::<Preset>().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn coefficients(&self) -> Result<ModelCoefficients, CliError> {
        let m = &self.model;
        let coeffs = match (self.preset()?, m.k, m.l) {
            (Preset::Custom, Some(k), Some(l)) => ModelCoefficients::custom(m.m, m.s, m.q, m.g, k, l),
            (Preset::Custom, _, _) => return Err(CliError::Config("custom preset needs model.k and model.l".into())),
            (_, None, None) => ModelCoefficients::from_preset(self.preset()?, m.m, m.s, m.q, m.g),
            _ => return Err(CliError::Config("model.k and model.l are only read by the custom preset".into())),
        };
        Ok(coeffs?)
    }

    /// Coefficients of a named preset with this config's `m, s, q, g`.
    pub fn coefficients_for(&self, preset: Preset) -> Result<ModelCoefficients, CliError> {
        let m = &self.model;
        Ok(ModelCoefficients::from_preset(preset, m.m, m.s, m.q, m.g)?)
    }

    pub fn field_model(&self) -> Result<FieldModel, CliError> {
        let f = &self.field;
        let kind = match f.kind.as_str() {
            "central" => {
                let profile = match f.profile.as_str() {
                    "coulomb" => RadialProfile::Coulomb { kappa: f.kappa },
                    "harmonic" => RadialProfile::Harmonic { kappa: f.kappa },
                    "tabulated" => {
                        let path = f
                            .table_path
                            .as_ref()
                            .ok_or_else(|| CliError::Config("tabulated profile needs field.table_path".into()))?;
                        let path = match &self.base_dir {
                            Some(base) if Path::new(path).is_relative() => base.join(path),
                            _ => PathBuf::from(path),
                        };
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| CliError::Config(format!("cannot read table {}: {e}", path.display())))?;
                        RadialProfile::Tabulated(RadialTable::parse(&text)?)
                    }
                    other => return Err(CliError::Config(format!("unknown field.profile {other:?}"))),
                };
                FieldKind::CentralElectric { profile, r_min: f.r_min }
            }
            "uniform" => FieldKind::Uniform {
                f0: SkewEndomorphism::from_fields(Vector3::from(f.e), Vector3::from(f.b)),
                gauge_origin: f.gauge_origin.map(|o| event(o, 0.0)),
            },
            "swirl" => FieldKind::Swirl { kappa: f.kappa },
            "zero" => return Ok(FieldModel::zero()),
            other => return Err(CliError::Config(format!("unknown field.kind {other:?}"))),
        };
        Ok(FieldModel::new(kind))
    }

    pub fn initial_state(&self) -> Result<LabFrameState, CliError> {
        let i = &self.initial;
        Ok(LabFrameState::new(Vector3::from(i.r), i.t, Vector3::from(i.v), Vector3::from(i.u))?)
    }

    pub fn initial_point(&self) -> Result<EvolutionPoint, CliError> {
        Ok(EvolutionPoint::from_lab(&self.initial_state()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "[model]\npreset = \"custom\"\nk = -0.25\nl = -0.75\n[field]\nkind = \"uniform\"\ne = [0.1, 0, 0]\n";
        let config = RunConfig::parse(text).unwrap();
        let echo = config.canonical();
        let again = RunConfig::parse(&echo).unwrap();
        assert_eq!(again, config);
        assert_eq!(again.canonical(), echo);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::parse("[model]\nmass = 1.0\n").is_err());
        assert!(RunConfig::parse("[output]\nformat = \"xml\"\n").is_err());
        assert!(RunConfig::parse("[model]\npreset = \"custom\"\n").is_err());
        assert!(RunConfig::parse("[model]\nk = 0.5\n").is_err());
        assert!(RunConfig::parse("[integration]\nh = 0.0\n").is_err());
    }

    #[test]
    fn echo_leaves_out_the_output_directory() {
        let config = RunConfig::parse("[output]\ndirectory = \"a\"\n").unwrap();
        assert!(config.canonical().contains("directory"));
        assert_eq!(config.echo(), RunConfig::default().echo());
    }

    #[test]
    fn default_orbit_is_circular() {
        let config = RunConfig::default();
        let v: f64 = 0.1;
        let gamma = 1.0 / (1.0 - v * v).sqrt();
        assert!((config.field.kappa - gamma * v * v).abs() < 1e-17);
    }
}
