use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{LinkModel, RisStrategy, TdlProfile};
use crate::detection::{CodecConfig, EqualizerConfig, QamConstellation};
use crate::error::{Error, Result};
use crate::phase_noise::{OscillatorKind, OscillatorModel};
use crate::waveform::{default_pilot_power, FrameConfig, WaveformKind};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Proposed,
    Bem,
    Spline,
    PerfectCsi,
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Self::Proposed),
            "bem" => Ok(Self::Bem),
            "spline" => Ok(Self::Spline),
            "perfect_csi" => Ok(Self::PerfectCsi),
            other => Err(Error::Config(format!("unknown estimator `{other}`"))),
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Proposed => "proposed",
            Self::Bem => "bem",
            Self::Spline => "spline",
            Self::PerfectCsi => "perfect_csi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileName {
    TdlC,
}

fn default_sinusoids() -> usize {
    1
}

/// Per-hop channel statistics shared by the two links of every element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub profile: ProfileName,
    /// RMS delay spread scaling the normalised profile, seconds.
    pub delay_spread: f64,
    /// Maximum Doppler in Hz; alternatively give velocity and carrier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity_kmh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_hz: Option<f64>,
    /// RIS element count.
    pub q: usize,
    pub ris_strategy: RisStrategy,
    #[serde(default = "default_sinusoids")]
    pub sinusoids_per_path: usize,
    #[serde(default)]
    pub normalization: ChannelNormalization,
}

/// Reference for the SNR definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelNormalization {
    /// Unit average received power per frame: SNR is the received SNR.
    #[default]
    Frame,
    /// Unit mean power per element cascade: SNR is the single-element SNR
    /// and the array gain of the RIS shows up as extra received power.
    Element,
}

impl ChannelConfig {
    /// `f_D`, from the explicit value or `v f_c / c`.
    pub fn max_doppler(&self) -> Result<f64> {
        match (self.doppler_hz, self.velocity_kmh, self.carrier_hz) {
            (Some(fd), None, None) => Ok(fd),
            (None, Some(v), Some(fc)) => Ok(v / 3.6 * fc / SPEED_OF_LIGHT),
            (None, None, None) => Ok(0.0),
            _ => Err(Error::Config(
                "give either channel.doppler_hz or both channel.velocity_kmh and channel.carrier_hz".into(),
            )),
        }
    }

    pub fn link_model(&self) -> Result<LinkModel> {
        let profile = match self.profile {
            ProfileName::TdlC => TdlProfile::tdl_c(),
        };
        Ok(LinkModel {
            profile,
            delay_spread: self.delay_spread,
            max_doppler: self.max_doppler()?,
            sinusoids_per_path: self.sinusoids_per_path,
        })
    }
}

/// Oscillator section; the sample period comes from the frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    pub kind: OscillatorKind,
    pub beta_pn: f64,
    #[serde(default)]
    pub f_pll: f64,
}

/// One simulation operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub waveform: WaveformKind,
    pub frame: FrameConfig,
    pub channel: ChannelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub osc: Option<OscillatorConfig>,
    pub estimator: EstimatorKind,
    /// BEM oversampling factor.
    #[serde(default = "default_k_over")]
    pub k_over: f64,
    #[serde(default)]
    pub equalizer: EqualizerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coding: Option<CodecConfig>,
    pub qam_order: usize,
    /// Per-sample SNR in dB; `inf` disables noise.
    #[serde(with = "super::snr_serde")]
    pub snr_db: f64,
    pub frames: usize,
    pub base_seed: u64,
    /// Delay-time pilot power; defaults to `10 (2L - 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_power: Option<f64>,
    /// Stage-1 amplitude threshold in noise standard deviations.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_k_over() -> f64 {
    1.0
}

fn default_threshold() -> f64 {
    crate::estimation::DEFAULT_THRESHOLD
}

impl SimConfig {
    /// Small profile sized for CI-length Monte Carlo runs.
    pub fn desk() -> Self {
        Self {
            waveform: WaveformKind::Otfs,
            frame: FrameConfig::new(32, 8, 8, 60e3, 4),
            channel: ChannelConfig {
                profile: ProfileName::TdlC,
                delay_spread: 60e-9,
                doppler_hz: None,
                velocity_kmh: Some(500.0),
                carrier_hz: Some(5.9e9),
                q: 8,
                ris_strategy: RisStrategy::StatisticalAlign,
                sinusoids_per_path: 1,
                normalization: ChannelNormalization::Frame,
            },
            osc: Some(OscillatorConfig {
                kind: OscillatorKind::Fro,
                beta_pn: 100.0,
                f_pll: 0.0,
            }),
            estimator: EstimatorKind::Proposed,
            k_over: 1.0,
            equalizer: EqualizerConfig::default(),
            coding: None,
            qam_order: 4,
            snr_db: 10.0,
            frames: 500,
            base_seed: 1,
            pilot_power: None,
            threshold: default_threshold(),
        }
    }

    /// Large profile at 7.68 MHz with 64 elements. Not used in CI.
    pub fn full_scale() -> Self {
        let mut cfg = Self::desk();
        cfg.frame = FrameConfig::new(128, 32, 10, 60e3, 5);
        cfg.channel.delay_spread = 30e-9;
        cfg.channel.q = 64;
        cfg.frames = 100_000;
        cfg
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a TOML or JSON file (by extension) and applies dotted
    /// `key=value` overrides before validation.
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut tree: toml::Value = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        for o in overrides {
            apply_override(&mut tree, o)?;
        }
        let cfg: Self = tree.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut tree = toml::Value::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut tree, o)?;
        }
        let cfg: Self = tree.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sample_period(&self) -> f64 {
        self.frame.sample_period()
    }

    pub fn pilot_power(&self) -> f64 {
        self.pilot_power.unwrap_or_else(|| default_pilot_power(self.frame.channel_len))
    }

    pub fn max_doppler(&self) -> Result<f64> {
        self.channel.max_doppler()
    }

    pub fn oscillator(&self) -> OscillatorModel {
        match &self.osc {
            None => OscillatorModel::ideal(self.sample_period()),
            Some(o) => OscillatorModel {
                kind: o.kind,
                beta_pn: o.beta_pn,
                f_pll: o.f_pll,
                sample_period: self.sample_period(),
            },
        }
    }

    /// `σ_η² = 10^(-SNR/10)`.
    pub fn noise_var(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            10f64.powf(-self.snr_db / 10.0)
        }
    }

    pub fn constellation(&self) -> Result<QamConstellation> {
        QamConstellation::new(self.qam_order).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        self.frame.validate().map_err(cfg_err)?;
        crate::waveform::build_pilot_pattern(self.waveform, &self.frame, self.pilot_power()).map_err(cfg_err)?;
        self.equalizer.validate().map_err(cfg_err)?;
        if let Some(c) = &self.coding {
            c.validate().map_err(cfg_err)?;
        }
        self.constellation()?;
        self.oscillator().validate().map_err(cfg_err)?;
        let fd = self.max_doppler()?;
        if !(fd.is_finite() && fd >= 0.0) {
            return Err(Error::Config("Doppler must be finite and nonnegative".into()));
        }
        if self.frames == 0 {
            return Err(Error::Config("frames must be at least 1".into()));
        }
        if self.channel.q == 0 {
            return Err(Error::Config("the RIS needs at least one element".into()));
        }
        if !(self.channel.delay_spread >= 0.0 && self.channel.delay_spread.is_finite()) {
            return Err(Error::Config("delay spread must be finite and nonnegative".into()));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Config("SNR must be a number or +inf".into()));
        }
        if !(self.k_over > 0.0) {
            return Err(Error::Config("k_over must be positive".into()));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::Config("threshold must be nonnegative".into()));
        }
        let link = self.channel.link_model()?;
        let cascade = 2 * link.tap_count(self.sample_period()) - 1;
        if cascade > self.frame.channel_len {
            return Err(Error::Config(format!(
                "cascade spans {cascade} taps but frame.channel_len is {}",
                self.frame.channel_len
            )));
        }
        if self.coding.is_some() {
            let layout_capacity = crate::waveform::FrameLayout::new(self.waveform, self.frame.clone(), self.pilot_power())
                .map_err(cfg_err)?
                .data_capacity();
            let bits = layout_capacity * self.constellation()?.bits_per_symbol();
            if self.coding.as_ref().is_some_and(|c| c.info_len_for(bits) == 0) {
                return Err(Error::Config("frame too small for the convolutional code".into()));
            }
        }
        Ok(())
    }
}

/// Sets `a.b.c = value` in a TOML tree. The value is parsed as a TOML
/// literal when possible and taken as a string otherwise.
pub fn apply_override(tree: &mut toml::Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut node = tree;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{key}` does not name a table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    node.as_table_mut()
        .ok_or_else(|| Error::Config(format!("`{key}` does not name a table")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
