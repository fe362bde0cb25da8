//! Run configuration: flat TOML sections of `key = value`.
//!
//! Angles accept either plain numbers (radians) or small expressions built
//! on `pi` ("pi", "2pi/3", "0.3pi"), which keeps figure-reproduction
//! configs readable.

use std::fmt;
use std::path::Path;

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Angle in radians, deserializable from a number or a `pi` expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl Angle {
    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Parse "pi", "2pi/3", "pi/2", "0.3pi", "-pi/4", or a plain number.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = s.to_ascii_lowercase();
    if let Some(idx) = lower.find("pi") {
        let (prefix, rest) = (&lower[..idx], &lower[idx + 2..]);
        let coeff = match prefix.trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("bad angle coefficient in {text:?}"))?,
        };
        let divisor = match rest.strip_prefix('/') {
            None if rest.is_empty() => 1.0,
            None => return Err(format!("trailing text after pi in {text:?}")),
            Some(d) => d
                .parse::<f64>()
                .map_err(|_| format!("bad angle divisor in {text:?}"))?,
        };
        if divisor == 0.0 {
            return Err(format!("zero divisor in angle {text:?}"));
        }
        Ok(coeff * std::f64::consts::PI / divisor)
    } else {
        lower
            .parse::<f64>()
            .map_err(|_| format!("cannot parse angle {text:?}"))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Integer(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(x) => Ok(Angle(x)),
            Raw::Integer(x) => Ok(Angle(x as f64)),
            Raw::Text(s) => parse_angle(&s).map(Angle).map_err(D::Error::custom),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub model: ModelSection,
    pub system: SystemSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub classical: ClassicalSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switching: Option<SwitchingSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seed() -> u64 {
    0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub p: u32,
    pub lambda: f64,
    #[serde(default)]
    pub h: f64,
    pub alpha_b: Angle,
    /// "kicked" (default) or "exact"
    #[serde(default = "default_drive")]
    pub drive: String,
}

fn default_drive() -> String {
    "kicked".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub t_max: usize,
    /// Initial coherent-state polar angle.
    pub theta: Angle,
    /// Initial coherent-state azimuth.
    pub phi: Angle,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            t_max: 4096,
            theta: Angle(0.0),
            phi: Angle(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Resonance orders probed by spectral/classical diagnostics.
    pub qs: Vec<u32>,
    /// Leading samples discarded before the DFT.
    pub drop_transient: usize,
    /// Scale spectra so the largest bin is 1.
    pub normalize_spectrum: bool,
    /// |F_inf| above this counts as a finite OTOC order parameter.
    pub otoc_threshold: f64,
    /// Samples skipped before the OTOC long-time average.
    pub otoc_burn_in: usize,
    /// Circular tolerance when matching 2pi/q tuples.
    pub clustering_tol: f64,
    /// Bins of the eigenphase histogram.
    pub dos_bins: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            qs: vec![2],
            drop_transient: 0,
            normalize_spectrum: true,
            otoc_threshold: 0.01,
            otoc_burn_in: 0,
            clustering_tol: 1e-3,
            dos_bins: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub alpha_min: Angle,
    pub alpha_max: Angle,
    pub alpha_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSection {
    pub sphere_points: usize,
    pub t_max: usize,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self {
            sphere_points: 14_000,
            t_max: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchingSection {
    /// Ordered `[angle, kicks]` pairs; angles take the same pi expressions
    /// as everywhere else.
    pub segments: Vec<(Angle, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl Config {
    /// Template config: period-doubling point of the p = 2 model at desk
    /// scale. Used by tests and documented in the README as the starting
    /// point for new runs.
    #[allow(dead_code)]
    pub fn template() -> Self {
        Self {
            seed: 42,
            model: ModelSection {
                p: 2,
                lambda: 0.7,
                h: 0.1,
                alpha_b: Angle(std::f64::consts::PI),
                drive: "kicked".into(),
            },
            system: SystemSection { n: 256 },
            dynamics: DynamicsSection {
                t_max: 4096,
                theta: Angle(std::f64::consts::PI / 5.0),
                phi: Angle(0.0),
            },
            analysis: AnalysisSection::default(),
            sweep: None,
            classical: ClassicalSection::default(),
            switching: None,
            output: OutputSection::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("in {}: {e}", path.display()))
    }

    /// Parse from TOML text; errors carry line/column positions and the
    /// offending key.
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: Config = toml::from_str(text).map_err(|e| e.to_string())?;
        config.validate()?;
        Ok(config)
    }

    #[allow(dead_code)]
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), String> {
        if self.model.p < 2 {
            return Err("model.p must be >= 2".into());
        }
        if self.model.lambda < 0.0 {
            return Err("model.lambda must be >= 0".into());
        }
        if self.system.n == 0 {
            return Err("system.n must be >= 1".into());
        }
        match self.model.drive.as_str() {
            "kicked" | "exact" => {}
            other => return Err(format!("model.drive must be kicked or exact, got {other:?}")),
        }
        if self.analysis.qs.is_empty() {
            return Err("analysis.qs must not be empty".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.lambda_count == 0 || sweep.alpha_count == 0 {
                return Err("sweep axis counts must be >= 1".into());
            }
            if sweep.lambda_max < sweep.lambda_min {
                return Err("sweep.lambda_max must be >= sweep.lambda_min".into());
            }
        }
        if let Some(sw) = &self.switching {
            if sw.segments.is_empty() {
                return Err("switching.segments must not be empty".into());
            }
            for (angle, steps) in &sw.segments {
                if *steps == 0 {
                    return Err("switching segment durations must be >= 1".into());
                }
                if !angle.radians().is_finite() {
                    return Err("switching segment angles must be finite".into());
                }
            }
        }
        Ok(())
    }
}
