//! Seeded random streams and draw replay.
//!
//! Every node draws from its own ChaCha stream derived from the scenario
//! seed and the node id, so adding a node never shifts another node's
//! draws. Mobility has a dedicated stream shared by all protocols, which
//! keeps dwell times identical across protocol runs with one seed.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{NodeId, NodeKind};
use crate::protocols::RandomWait;
use crate::time::SimDuration;

/// Identifies one random stream of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StreamId {
    Mobility,
    Node(NodeId),
}

impl StreamId {
    fn number(self) -> u64 {
        match self {
            StreamId::Mobility => 1,
            StreamId::Node(n) => {
                let tag = match n.kind {
                    NodeKind::Etx => 2u64,
                    NodeKind::Erx => 3u64,
                };
                (tag << 32) | u64::from(n.id)
            }
        }
    }
}

pub fn stream_rng(seed: u64, stream: StreamId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.number());
    rng
}

/// Where a stream's values come from.
#[derive(Debug, Clone)]
pub enum DrawSource {
    Seeded(ChaCha8Rng),
    Replay(VecDeque<SimDuration>),
}

impl DrawSource {
    /// Uniform duration in `[lo, hi]` seconds. Replay sources return recorded
    /// values verbatim and `None` once exhausted.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Option<SimDuration> {
        match self {
            DrawSource::Seeded(rng) => {
                let u: f64 = rng.gen();
                Some(SimDuration::from_secs_f64(lo + (hi - lo) * u))
            }
            DrawSource::Replay(q) => q.pop_front(),
        }
    }
}

/// Per-stream draw sources for one run.
#[derive(Debug, Clone)]
pub enum Draws {
    Seeded(u64),
    Replay(BTreeMap<StreamId, VecDeque<SimDuration>>),
}

impl Draws {
    pub fn source(&self, stream: StreamId) -> DrawSource {
        match self {
            Draws::Seeded(seed) => DrawSource::Seeded(stream_rng(*seed, stream)),
            Draws::Replay(map) => DrawSource::Replay(map.get(&stream).cloned().unwrap_or_default()),
        }
    }
}

/// Adapter that lets a protocol handler draw its back-off from a
/// [`DrawSource`] while remembering what was drawn.
pub(crate) struct Recording<'a> {
    pub source: &'a mut DrawSource,
    pub drawn: Vec<SimDuration>,
    pub exhausted: bool,
}

impl RandomWait for Recording<'_> {
    fn rand_wait(&mut self, max_s: f64) -> SimDuration {
        match self.source.uniform(0.0, max_s) {
            Some(d) => {
                self.drawn.push(d);
                d
            }
            None => {
                self.exhausted = true;
                SimDuration::ZERO
            }
        }
    }
}
