//! BPSK modulation, AWGN noise injection and LLR computation.
//!
//! The SNR axis is Eb/N0 in decibels, with the code rate folded into the
//! noise standard deviation: `sigma = 1 / sqrt(2 * rate * 10^(ebn0_db/10))`.
//! Gaussian samples come from the Marsaglia polar method over a ChaCha8
//! stream, so sequences are reproducible across platforms and library
//! versions; the harness records `chacha8/marsaglia-polar` in run metadata.

use crate::codes::BitVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("code rate must lie in (0, 1], got {0}")]
    BadRate(f64),
    #[error("sigma must be positive for LLR computation, got {0}")]
    ZeroSigma(f64),
}

/// Derives a deterministic ChaCha8 stream from a base seed and salt words.
///
/// Every consumer of randomness in the crate goes through this, so a run is
/// reproducible from the base seed alone and independent units (frames,
/// batch elements, initialization draws) never share a stream.
pub fn seeded_rng(base: u64, salts: &[u64]) -> ChaCha8Rng {
    let mut state = base ^ 0x9e37_79b9_7f4a_7c15;
    let mut mix = |v: u64| {
        state ^= v.wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(state << 6)
            .wrapping_add(state >> 2);
        // SplitMix64 finalizer
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
        state
    };
    let mut seed = [0u8; 32];
    mix(0xa076_1d64_78bd_642f);
    for (i, chunk) in seed.chunks_mut(8).enumerate() {
        let w = mix(salts.get(i).copied().unwrap_or(i as u64));
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Standard-normal source using the Marsaglia polar method.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(rng: ChaCha8Rng) -> Self {
        GaussianSource { rng, spare: None }
    }

    pub fn from_seed(base: u64, salts: &[u64]) -> Self {
        Self::new(seeded_rng(base, salts))
    }

    /// One standard-normal draw.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.rng.random::<f64>() - 1.0;
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }

    /// Access the underlying uniform stream (for non-Gaussian draws).
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Noise level for a given Eb/N0 and code rate.
pub fn sigma_from_ebn0(ebn0_db: f64, rate: f64) -> Result<f64, ChannelError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(ChannelError::BadRate(rate));
    }
    Ok(1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0)).sqrt())
}

/// Channel parameters for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    pub code_rate: f64,
    pub sigma: f64,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, code_rate: f64) -> Result<Self, ChannelError> {
        Ok(ChannelConfig {
            ebn0_db,
            code_rate,
            sigma: sigma_from_ebn0(ebn0_db, code_rate)?,
        })
    }
}

/// Log-likelihood ratios per variable; positive favors bit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    /// Panics on non-finite values (the finiteness invariant).
    pub fn new(values: Vec<f64>) -> Self {
        assert!(
            values.iter().all(|v| v.is_finite()),
            "LLR values must be finite"
        );
        LlrVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// BPSK: bit 0 -> +1.0, bit 1 -> -1.0.
pub fn modulate(bits: &BitVector) -> Vec<f64> {
    bits.bits()
        .iter()
        .map(|&b| if b == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Adds `sigma`-scaled white Gaussian noise; `sigma = 0` passes through.
pub fn transmit(signal: &[f64], sigma: f64, noise: &mut GaussianSource) -> Vec<f64> {
    assert!(sigma >= 0.0, "sigma must be nonnegative");
    signal.iter().map(|&s| s + sigma * noise.next_normal()).collect()
}

/// Channel LLRs: `l_i = 2 y_i / sigma^2`.
pub fn llr(received: &[f64], sigma: f64) -> Result<LlrVector, ChannelError> {
    if sigma <= 0.0 {
        return Err(ChannelError::ZeroSigma(sigma));
    }
    let scale = 2.0 / (sigma * sigma);
    Ok(LlrVector::new(received.iter().map(|&y| y * scale).collect()))
}

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Analytic uncoded BPSK bit error rate at a given Eb/N0.
pub fn uncoded_ber(ebn0_db: f64) -> f64 {
    q_function((2.0 * 10f64.powf(ebn0_db / 10.0)).sqrt())
}
