use rand::Rng;

use crate::error::Result;
use crate::quantum::sample_index;

/// Supplies every random choice a protocol run makes: private coin flips and
/// measurement outcomes.
pub trait OutcomeSource {
    fn coin(&mut self) -> Result<u8> {
        Ok(self.choose(&[0.5, 0.5])? as u8)
    }

    /// Picks an index with probability proportional to `probs[k]`.
    fn choose(&mut self, probs: &[f64]) -> Result<usize>;
}

/// Draws from a seeded generator: one `u64` per coin, one `f64` per
/// measurement.
#[derive(Debug, Clone)]
pub struct RngSource<R>(pub R);

impl<R: Rng> OutcomeSource for RngSource<R> {
    fn coin(&mut self) -> Result<u8> {
        Ok((self.0.random::<u64>() & 1) as u8)
    }

    fn choose(&mut self, probs: &[f64]) -> Result<usize> {
        sample_index(probs, self.0.random::<f64>())
    }
}

/// Forwards to an inner source and keeps each measurement's probability vector.
pub struct Recording<'a> {
    inner: &'a mut dyn OutcomeSource,
    pub log: Vec<Vec<f64>>,
}

impl<'a> Recording<'a> {
    pub fn new(inner: &'a mut dyn OutcomeSource) -> Self {
        Recording { inner, log: Vec::new() }
    }
}

impl OutcomeSource for Recording<'_> {
    fn coin(&mut self) -> Result<u8> {
        self.inner.coin()
    }

    fn choose(&mut self, probs: &[f64]) -> Result<usize> {
        self.log.push(probs.to_vec());
        self.inner.choose(probs)
    }
}
