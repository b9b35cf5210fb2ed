//! Deterministic seed splitting.
//!
//! Every random stream in a run is derived from the master seed, a stream
//! tag, the epoch, and an index by chained SplitMix64 finalisation.
//! Environment seeds for training episodes have the top bit clear and those
//! for evaluation episodes have it set, so the two sets never overlap.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Network initialisation.
    Init,
    /// Expert-only bootstrap episodes.
    Bootstrap,
    /// Combined collection episodes.
    Collect,
    /// Minibatch shuffling and dropout masks during training.
    Train,
    /// Decision-rule randomness (coin flips, MC-dropout masks) in training.
    Rule,
    /// Evaluation episodes.
    Eval,
    /// Decision-rule randomness in evaluation.
    EvalRule,
    /// Per-algorithm master seeds within a sweep.
    Algorithm,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Init => 1,
            Stream::Bootstrap => 2,
            Stream::Collect => 3,
            Stream::Train => 4,
            Stream::Rule => 5,
            Stream::Eval => 6,
            Stream::EvalRule => 7,
            Stream::Algorithm => 8,
        }
    }

    fn is_eval(self) -> bool {
        matches!(self, Stream::Eval | Stream::EvalRule)
    }
}

const TOP_BIT: u64 = 1 << 63;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for `(stream, epoch, index)` under `master`.
pub fn derive(master: u64, stream: Stream, epoch: u64, index: u64) -> u64 {
    let mut h = splitmix(master);
    for part in [stream.tag(), epoch, index] {
        h = splitmix(h ^ part);
    }
    if stream.is_eval() {
        h | TOP_BIT
    } else {
        h & !TOP_BIT
    }
}
