//! TOML manifests and scenario files.
//!
//! A manifest lists scenarios either inline or through `file = "..."`
//! pointing at a flat scenario document. Paths are relative to the manifest.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use havok_arc_core::arc_model::ArcParameters;
use havok_arc_core::detector::DetectionThresholds;
use havok_arc_core::feeder::{FeederConfig, LoadSwitch, MotorLoad, ScenarioKind, ScenarioSpec};
use havok_arc_core::havok::DEFAULT_EMBEDDING;
use serde::Deserialize;

use crate::error::CliError;

/// Flat scenario keys. Every key is optional at parse time; `into_spec`
/// checks which ones the kind needs.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFields {
    pub id: Option<String>,
    pub seed: Option<u64>,
    pub file: Option<PathBuf>,
    pub kind: Option<String>,
    pub extent: Option<f64>,
    pub duration: Option<f64>,
    pub offset: Option<f64>,
    pub m_coefficient: Option<f64>,
    pub grounding_resistance: Option<f64>,
    pub snr_db: Option<f64>,
    pub t_on: Option<f64>,
    pub t_off: Option<f64>,
    pub delta_power: Option<f64>,
    pub fault_resistance: Option<f64>,
    pub inrush: Option<f64>,
    pub time_constant: Option<f64>,
    pub motor_start: Option<f64>,
}

macro_rules! fill {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl ScenarioFields {
    /// Fills keys missing here from `other`.
    fn merge_from(&mut self, other: &ScenarioFields) {
        fill!(
            self, other, id, seed, kind, extent, duration, offset, m_coefficient,
            grounding_resistance, snr_db, t_on, t_off, delta_power, fault_resistance, inrush,
            time_constant, motor_start
        );
    }

    pub fn into_spec(&self, id: &str) -> Result<ScenarioSpec, CliError> {
        let err = |message: String| CliError::Scenario {
            id: id.to_string(),
            message,
        };
        let kind: ScenarioKind = self
            .kind
            .as_deref()
            .ok_or_else(|| err("missing `kind`".into()))?
            .parse()
            .map_err(|_| err(format!("unknown kind `{}`", self.kind.as_deref().unwrap_or(""))))?;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| err(format!("missing `{name}`")));

        let arc = if kind.involves_arc() {
            let mut a = ArcParameters::new(
                need(self.extent, "extent")?,
                need(self.duration, "duration")?,
                need(self.offset, "offset")?,
                need(self.grounding_resistance, "grounding_resistance")?,
            );
            a.m_coefficient = self.m_coefficient.unwrap_or(0.0);
            Some(a)
        } else {
            None
        };
        let snr_db = match kind {
            ScenarioKind::ArcWithNoise => Some(need(self.snr_db, "snr_db")?),
            _ => None,
        };
        let switch = (kind == ScenarioKind::LoadSwitch).then(|| {
            let d = LoadSwitch::default();
            LoadSwitch {
                t_on: self.t_on.unwrap_or(d.t_on),
                t_off: self.t_off.unwrap_or(d.t_off),
                delta_power: self.delta_power.unwrap_or(d.delta_power),
            }
        });
        let fault_resistance =
            (kind == ScenarioKind::LineToGround).then(|| self.fault_resistance.unwrap_or(1.0));
        let motor = (kind == ScenarioKind::ArcWithMotorLoad).then(|| {
            let d = MotorLoad::default();
            MotorLoad {
                inrush: self.inrush.unwrap_or(d.inrush),
                time_constant: self.time_constant.unwrap_or(d.time_constant),
                start: self.motor_start.unwrap_or(d.start),
            }
        });
        let spec = ScenarioSpec {
            kind,
            arc,
            snr_db,
            switch,
            fault_resistance,
            motor,
        };
        spec.validate().map_err(|e| err(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeederFields {
    pub source_peak_voltage: Option<f64>,
    pub frequency: Option<f64>,
    pub source_impedance: Option<f64>,
    pub load_power: Option<f64>,
    pub load_count: Option<usize>,
    pub sample_rate: Option<f64>,
    pub horizon: Option<f64>,
    pub fault_start: Option<f64>,
    pub fault_duration: Option<f64>,
    pub exponent_cap: Option<f64>,
}

impl FeederFields {
    fn build(&self) -> FeederConfig {
        let d = FeederConfig::default();
        FeederConfig {
            source_peak_voltage: self.source_peak_voltage.unwrap_or(d.source_peak_voltage),
            frequency: self.frequency.unwrap_or(d.frequency),
            source_impedance: self.source_impedance.unwrap_or(d.source_impedance),
            load_power: self.load_power.unwrap_or(d.load_power),
            load_count: self.load_count.unwrap_or(d.load_count),
            sample_rate: self.sample_rate.unwrap_or(d.sample_rate),
            horizon: self.horizon.unwrap_or(d.horizon),
            fault_start: self.fault_start.unwrap_or(d.fault_start),
            fault_duration: self.fault_duration.unwrap_or(d.fault_duration),
            exponent_cap: self.exponent_cap.unwrap_or(d.exponent_cap),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    output_dir: Option<PathBuf>,
    repetitions: Option<usize>,
    q: Option<usize>,
    thresholds: Option<Vec<f64>>,
    #[serde(default)]
    feeder: FeederFields,
    #[serde(default)]
    scenario: Vec<ScenarioFields>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub id: String,
    pub seed: u64,
    pub spec: ScenarioSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub scenarios: Vec<ScenarioEntry>,
    pub output_dir: PathBuf,
    pub repetitions: usize,
    pub q: usize,
    pub thresholds: DetectionThresholds,
    pub feeder: FeederConfig,
}

/// Parses `a,b,c,d` band edges in ascending order.
pub fn parse_thresholds(text: &str) -> Result<DetectionThresholds, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("thresholds: {e}")))?;
    bands(&values)
}

fn bands(values: &[f64]) -> Result<DetectionThresholds, CliError> {
    match values {
        [a, b, c, d] => DetectionThresholds::with_bands(*a, *b, *c, *d)
            .map_err(|e| CliError::Config(format!("thresholds: {e}"))),
        _ => Err(CliError::Config("thresholds need exactly four values".into())),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = read(path)?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses manifest text; `base` resolves relative scenario files.
pub fn parse_manifest(text: &str, base: &Path) -> Result<RunManifest, CliError> {
    let raw: ManifestFile =
        toml::from_str(text).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
    let repetitions = raw.repetitions.unwrap_or(1);
    if repetitions == 0 {
        return Err(CliError::Config("repetitions must be at least 1".into()));
    }
    let q = raw.q.unwrap_or(DEFAULT_EMBEDDING);
    let thresholds = match &raw.thresholds {
        Some(v) => bands(v)?,
        None => DetectionThresholds::default(),
    };
    let feeder = raw.feeder.build();
    feeder
        .validate()
        .map_err(|e| CliError::Config(format!("feeder: {e}")))?;

    let mut seen = HashSet::new();
    let mut scenarios = Vec::with_capacity(raw.scenario.len());
    for (k, entry) in raw.scenario.iter().enumerate() {
        let mut fields = entry.clone();
        if let Some(file) = &entry.file {
            let path = base.join(file);
            let mut from_file: ScenarioFields = toml::from_str(&read(&path)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            from_file.file = None;
            fields.merge_from(&from_file);
        }
        let id = fields.id.clone().unwrap_or_else(|| format!("scenario{}", k + 1));
        if !seen.insert(id.clone()) {
            return Err(CliError::Config(format!("duplicate scenario id `{id}`")));
        }
        let spec = fields.into_spec(&id)?;
        scenarios.push(ScenarioEntry {
            seed: fields.seed.unwrap_or(0),
            id,
            spec,
        });
    }
    Ok(RunManifest {
        scenarios,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        repetitions,
        q,
        thresholds,
        feeder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_scenario_parses() {
        let m = parse_manifest(
            r#"
            repetitions = 2
            [[scenario]]
            id = "A"
            seed = 4
            kind = "low_current_arc"
            extent = 5000.0
            duration = 0.00413
            offset = 0.2
            grounding_resistance = 1000.0
            "#,
            Path::new("."),
        )
        .unwrap();
        assert_eq!(m.repetitions, 2);
        assert_eq!(m.scenarios[0].seed, 4);
        assert_eq!(m.scenarios[0].spec.arc.unwrap().extent, 5000.0);
        assert_eq!(m.q, 40);
    }

    #[test]
    fn missing_arc_key_names_the_scenario() {
        let err = parse_manifest(
            "[[scenario]]\nid = \"X\"\nkind = \"arc_dry_soil\"\nextent = 1.0",
            Path::new("."),
        )
        .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("`X`") && text.contains("duration"), "{text}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let doc = "[[scenario]]\nid = \"E\"\nkind = \"load_switch\"\n\
                   [[scenario]]\nid = \"E\"\nkind = \"load_switch\"\n";
        assert!(parse_manifest(doc, Path::new(".")).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_manifest("[[scenario]]\nkind = \"load_switch\"\ncolour = 1", Path::new(".")).is_err());
    }

    #[test]
    fn zero_repetitions_are_rejected() {
        assert!(parse_manifest("repetitions = 0", Path::new(".")).is_err());
    }

    #[test]
    fn threshold_list_must_ascend() {
        assert!(parse_thresholds("0.045,0.06,0.18,0.2").is_ok());
        assert!(parse_thresholds("0.2,0.18,0.06,0.045").is_err());
        assert!(parse_thresholds("0.1,0.2").is_err());
    }
}
