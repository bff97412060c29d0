use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ChannelNormalization, EstimatorKind, SimConfig};
use crate::channel::{
    add_awgn, apply_channel, cascade_ris_channel, cascade_ris_channel_raw, design_ris_phases, LinkModel, RisChannel, TapGainMatrix,
};
use crate::detection::{
    bit_errors, conv_encode, decision_noise_variance, lsmr_ic_equalize, viterbi_decode, DecoderInput, DecoderKind,
    Interleaver, QamConstellation,
};
use crate::error::Result;
use crate::estimation::{
    apply_wiener, bem_estimate, nmse, spline_estimate, stage1_estimate_with_threshold, CorrelationModel, WienerCache,
    WienerFilterBank,
};
use crate::phase_noise::{apply_phase_noise, OscillatorModel};
use crate::waveform::FrameLayout;

/// Independent random streams of one frame.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Data = 0,
    Channel = 1,
    Phase = 2,
    Noise = 3,
    Interleaver = 4,
}

fn stream(seed: u64, s: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}

/// Metrics of one simulated frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutcome {
    /// Channel-estimate NMSE against the true effective channel.
    pub nmse: f64,
    /// Hard-decision errors on all transmitted channel bits.
    pub bit_errors: usize,
    pub bit_count: usize,
    /// Information-bit errors after decoding (zero without coding).
    pub coded_bit_errors: usize,
    pub coded_bit_count: usize,
}

/// Everything about a frame that does not depend on its seed.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    layout: FrameLayout,
    constellation: QamConstellation,
    link: LinkModel,
    osc: OscillatorModel,
    doppler: f64,
    noise_var: f64,
    bank: Option<Arc<WienerFilterBank>>,
}

impl Simulation {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        Self::with_cache(cfg, &WienerCache::new())
    }

    /// Like [`Simulation::new`] but reuses filter banks across calls.
    pub fn with_cache(cfg: &SimConfig, cache: &WienerCache) -> Result<Self> {
        cfg.validate()?;
        let layout = FrameLayout::new(cfg.waveform, cfg.frame, cfg.pilot_power())?;
        let osc = cfg.oscillator();
        let doppler = cfg.max_doppler()?;
        let noise_var = cfg.noise_var();
        let bank = match cfg.estimator {
            EstimatorKind::Proposed => {
                let model = CorrelationModel::new(doppler, osc, cfg.sample_period())?;
                Some(cache.get_or_build(
                    &model,
                    &layout.pattern.frame_indices(),
                    layout.frame_len(),
                    noise_var,
                    layout.pattern.pilot_power(),
                )?)
            }
            _ => None,
        };
        Ok(Self {
            cfg: cfg.clone(),
            constellation: cfg.constellation()?,
            link: cfg.channel.link_model()?,
            layout,
            osc,
            doppler,
            noise_var,
            bank,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &FrameLayout {
        &self.layout
    }

    /// Draws the RIS channel of a frame and returns its normalised
    /// tap-gain matrix padded to the frame's channel length.
    pub fn draw_channel(&self, frame_seed: u64) -> Result<TapGainMatrix> {
        let mut rng = stream(frame_seed, Stream::Channel);
        let ts = self.cfg.sample_period();
        let ris = RisChannel::sample(self.cfg.channel.q, &self.link, &self.link, ts, &mut rng);
        let ris = design_ris_phases(&ris, self.cfg.channel.ris_strategy, &mut rng);
        let g = match self.cfg.channel.normalization {
            ChannelNormalization::Frame => cascade_ris_channel(&ris, self.layout.frame_len(), ts),
            ChannelNormalization::Element => cascade_ris_channel_raw(&ris, self.layout.frame_len(), ts),
        };
        g.with_taps(self.cfg.frame.channel_len)
    }

    /// Estimates the effective channel from the received frame.
    pub fn estimate(&self, received: &[crate::Complex64], truth: &TapGainMatrix) -> Result<TapGainMatrix> {
        let taps = self.cfg.frame.channel_len;
        if self.cfg.estimator == EstimatorKind::PerfectCsi {
            return Ok(truth.clone());
        }
        let snap =
            stage1_estimate_with_threshold(received, &self.layout.pattern, taps, self.noise_var, self.cfg.threshold)?;
        let n = self.layout.frame_len();
        match self.cfg.estimator {
            EstimatorKind::Proposed => apply_wiener(self.bank.as_ref().expect("bank built for proposed"), &snap),
            EstimatorKind::Bem => bem_estimate(
                &snap,
                self.doppler,
                self.osc.beta_pn,
                self.cfg.sample_period(),
                self.cfg.k_over,
                n,
            ),
            EstimatorKind::Spline => spline_estimate(&snap, n),
            EstimatorKind::PerfectCsi => unreachable!(),
        }
    }

    /// Runs the full chain for one frame. Deterministic in `frame_seed`.
    pub fn run_frame(&self, frame_seed: u64) -> Result<FrameOutcome> {
        let c = &self.constellation;
        let capacity = self.layout.data_capacity();
        let total_bits = capacity * c.bits_per_symbol();

        // payload
        let mut data_rng = stream(frame_seed, Stream::Data);
        let (tx_bits, info, interleaver) = match &self.cfg.coding {
            None => ((0..total_bits).map(|_| data_rng.random_range(0..2u8)).collect::<Vec<_>>(), None, None),
            Some(codec) => {
                let info: Vec<u8> = (0..codec.info_len_for(total_bits))
                    .map(|_| data_rng.random_range(0..2u8))
                    .collect();
                let code = conv_encode(&info, codec)?;
                let il = Interleaver::random(code.len(), &mut stream(frame_seed, Stream::Interleaver));
                let mut bits = il.interleave(&code)?;
                bits.extend((bits.len()..total_bits).map(|_| data_rng.random_range(0..2u8)));
                (bits, Some(info), Some(il))
            }
        };
        let mut grid = self.layout.empty_grid();
        grid.fill_data(&c.map(&tx_bits)?)?;
        let s = self.layout.modulate(&grid)?;

        // propagation: channel, oscillator, receiver noise
        let h = self.draw_channel(frame_seed)?;
        let trace = self.osc.gen_trace(s.len(), &mut stream(frame_seed, Stream::Phase));
        let truth = h.with_phase_noise(&trace)?;
        let r = apply_phase_noise(&apply_channel(&s, &h)?, &trace)?;
        let y = add_awgn(&r, self.noise_var, &mut stream(frame_seed, Stream::Noise));

        let estimate = self.estimate(&y, &truth)?;
        let frame_nmse = if self.cfg.estimator == EstimatorKind::PerfectCsi {
            0.0
        } else {
            nmse(&estimate, &truth)?
        };

        let eq = lsmr_ic_equalize(&y, &estimate, &self.layout, &self.cfg.equalizer, c)?;
        let rx_bits = c.demap_hard(&eq.soft);
        let mut outcome = FrameOutcome {
            nmse: frame_nmse,
            bit_errors: bit_errors(&tx_bits, &rx_bits),
            bit_count: tx_bits.len(),
            coded_bit_errors: 0,
            coded_bit_count: 0,
        };
        if let (Some(codec), Some(info), Some(il)) = (&self.cfg.coding, info, interleaver) {
            let decoded = match codec.decoder {
                DecoderKind::Soft => {
                    // max-log Viterbi is invariant to a common LLR scale, so
                    // the variance only needs to be positive
                    let var = decision_noise_variance(&eq.soft, c).max(1e-12);
                    let llr = c.demap_soft(&eq.soft, var)?;
                    viterbi_decode(DecoderInput::Soft(&il.deinterleave(&llr[..il.len()])?), codec)?
                }
                DecoderKind::Hard => viterbi_decode(DecoderInput::Hard(&il.deinterleave(&rx_bits[..il.len()])?), codec)?,
            };
            outcome.coded_bit_errors = bit_errors(&info, &decoded);
            outcome.coded_bit_count = info.len();
        }
        Ok(outcome)
    }
}

/// One frame of `cfg` with its own filter-bank build.
pub fn run_frame(cfg: &SimConfig, frame_seed: u64) -> Result<FrameOutcome> {
    Simulation::new(cfg)?.run_frame(frame_seed)
}
