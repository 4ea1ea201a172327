//! Deterministic, addressable random number generation.
//!
//! Every shock in a simulation is drawn from a stream whose seed is a hash of
//! its address: (stream key, period, agent, channel). Two consequences the
//! rest of the crate relies on:
//!
//! - identical seeds reproduce identical draw sequences, bit for bit;
//! - the draw for a given address never depends on evaluation order, so
//!   per-agent updates can be partitioned across threads arbitrarily without
//!   changing a single output byte.
//!
//! The underlying generator is SplitMix64 (Vigna): streams advance by the
//! golden-ratio increment and emit through the usual two-round finalizer.
//! Normal variates are sampled from the stream via the ziggurat method.

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const K_MASTER: u64 = 0x8a5c_d789_635d_2dff;
const K_DERIVE: u64 = 0xd6e8_feb8_6659_fd93;
const K_PERIOD: u64 = 0xa076_1d64_78bd_642f;
const K_AGENT: u64 = 0xe703_7ed1_a0b4_28db;

/// SplitMix64 finalizer: a 64-bit permutation with full avalanche.
#[inline(always)]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Identifies an independent random stream within a larger experiment.
///
/// Distinct (master_seed, stream_id) pairs yield statistically independent
/// streams; the same pair always reproduces the identical draw sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Collapses the pair into a single well-mixed stream key.
    pub fn key(&self) -> u64 {
        mix(mix(self.master_seed ^ K_MASTER) ^ self.stream_id.wrapping_mul(GOLDEN))
    }
}

/// Derives an independent subkey from `key`, labeled by `tag`.
pub fn derive_key(key: u64, tag: u64) -> u64 {
    mix(key ^ tag.wrapping_mul(K_DERIVE))
}

/// Shock channel within a period. Part of the draw address, so each channel
/// sees an independent stream even at the same (period, agent).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Innovation of the latent fundamental.
    Fundamental,
    /// Private-signal noise.
    Signal,
    /// Behavioral noise in the belief update.
    Update,
    /// Initial-condition draw.
    Init,
}

impl Channel {
    #[inline(always)]
    fn salt(self) -> u64 {
        match self {
            Channel::Fundamental => 0x1b87_3bbb_2b2a_b645,
            Channel::Signal => 0x41c6_4e6d_a3bc_74c5,
            Channel::Update => 0x6c62_272e_07bb_0142,
            Channel::Init => 0x27d4_eb2f_1656_67c5,
        }
    }
}

/// Sequential SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    /// Stream whose seed is the raw `key` (use [`seed_stream`] or
    /// [`shock_stream`] to build keys from addresses).
    pub fn new(key: u64) -> Self {
        Self { state: key }
    }

    /// Raw 64-bit draw; not an `Iterator` because the stream never ends.
    #[allow(clippy::should_implement_trait)]
    #[inline(always)]
    pub fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }
}

impl RngCore for Stream {
    #[inline(always)]
    fn next_u32(&mut self) -> u32 {
        (self.next() >> 32) as u32
    }

    #[inline(always)]
    fn next_u64(&mut self) -> u64 {
        self.next()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Hash of (key, period), shared by every per-agent address in that period.
/// Hoisted out of agent loops.
#[inline(always)]
pub fn period_key(key: u64, period: u64) -> u64 {
    mix(key ^ period.wrapping_add(1).wrapping_mul(K_PERIOD))
}

/// Hash of (period key, agent), shared by both shock channels of that agent.
/// Hoisted inside the panel's hot loop.
#[inline(always)]
pub(crate) fn agent_base(period_key: u64, agent: u64) -> u64 {
    mix(period_key ^ agent.wrapping_add(1).wrapping_mul(K_AGENT))
}

/// Stream for one channel off a precomputed agent base.
#[inline(always)]
pub(crate) fn channel_stream(agent_base: u64, channel: Channel) -> Stream {
    Stream::new(mix(agent_base ^ channel.salt()))
}

/// Stream addressed by (period key, agent, channel).
#[inline(always)]
pub fn agent_stream(period_key: u64, agent: u64, channel: Channel) -> Stream {
    channel_stream(agent_base(period_key, agent), channel)
}

/// Stream addressed by the full (key, period, agent, channel) tuple.
pub fn shock_stream(key: u64, period: u64, agent: u64, channel: Channel) -> Stream {
    agent_stream(period_key(key, period), agent, channel)
}

/// Stream for sequential (non-addressed) use, e.g. test oracles.
pub fn seed_stream(seed: &SeedSpec) -> Stream {
    Stream::new(seed.key())
}

/// One normal variate with the given mean and standard deviation.
///
/// `std` must be nonnegative; `std == 0` returns `mean` exactly. Always
/// advances the stream deterministically.
#[inline(always)]
pub fn gaussian_draw(stream: &mut Stream, mean: f64, std: f64) -> f64 {
    debug_assert!(std >= 0.0, "gaussian_draw requires std >= 0, got {std}");
    let z: f64 = StandardNormal.sample(stream);
    mean + std * z
}
