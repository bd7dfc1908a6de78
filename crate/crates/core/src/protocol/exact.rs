//! Exact outcome distributions by enumerating every branch of a run.

use super::params::{ProtocolParams, Representation};
use super::run::{run_honest_with, Attacker};
use super::source::OutcomeSource;
use super::transcript::Outcome;
use crate::error::{Error, Result};

/// Branches less likely than this are dropped.
pub const PRUNE_PROBABILITY: f64 = 1e-13;

/// Upper limit on enumerated branches.
pub const MAX_BRANCHES: usize = 1 << 22;

/// Probabilities of `X = 0`, `X = 1` and `X = ⊥`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutcomeDistribution {
    pub zero: f64,
    pub one: f64,
    pub abort: f64,
}

impl OutcomeDistribution {
    pub fn get(&self, x: Outcome) -> f64 {
        match x {
            Outcome::Bit(0) => self.zero,
            Outcome::Bit(_) => self.one,
            Outcome::Abort => self.abort,
        }
    }

    pub fn total(&self) -> f64 {
        self.zero + self.one + self.abort
    }

    fn add(&mut self, x: Outcome, w: f64) {
        match x {
            Outcome::Bit(0) => self.zero += w,
            Outcome::Bit(_) => self.one += w,
            Outcome::Abort => self.abort += w,
        }
    }
}

/// Replays a fixed prefix of choices and takes the first admissible option
/// for every choice beyond it.
struct Scripted {
    script: Vec<usize>,
    /// Normalized options seen at each choice point.
    seen: Vec<Vec<f64>>,
    weight: f64,
}

impl OutcomeSource for Scripted {
    fn choose(&mut self, probs: &[f64]) -> Result<usize> {
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("no outcome has positive probability".into()));
        }
        let norm: Vec<f64> = probs.iter().map(|&x| x.max(0.0) / total).collect();
        let pos = self.seen.len();
        let k = match self.script.get(pos) {
            Some(&k) => k,
            None => {
                let k = norm.iter().position(|&x| x >= PRUNE_PROBABILITY).expect("probabilities sum to one");
                self.script.push(k);
                k
            }
        };
        self.weight *= norm[k];
        self.seen.push(norm);
        Ok(k)
    }
}

/// Runs `f` once per branch of its random choices and sums the branch
/// weights per result.
pub fn exact_distribution(mut f: impl FnMut(&mut dyn OutcomeSource) -> Result<Outcome>) -> Result<OutcomeDistribution> {
    let mut dist = OutcomeDistribution::default();
    let mut script: Vec<usize> = Vec::new();
    for _ in 0..MAX_BRANCHES {
        let mut src = Scripted { script, seen: Vec::new(), weight: 1.0 };
        let x = f(&mut src)?;
        dist.add(x, src.weight);
        // advance the deepest choice that still has an untried option
        script = src.script;
        script.truncate(src.seen.len());
        loop {
            let Some(last) = script.pop() else {
                return Ok(dist);
            };
            let options = &src.seen[script.len()];
            if let Some(next) = (last + 1..options.len()).find(|&k| options[k] >= PRUNE_PROBABILITY) {
                script.push(next);
                break;
            }
        }
    }
    Err(Error::InvalidArgument(format!("more than {MAX_BRANCHES} branches")))
}

pub fn honest_distribution(p: &ProtocolParams, repr: Representation) -> Result<OutcomeDistribution> {
    exact_distribution(|src| Ok(run_honest_with(p, repr, src, None)?.result))
}

pub fn attack_distribution(p: &ProtocolParams, target: u8, repr: Representation) -> Result<OutcomeDistribution> {
    let attacker = Attacker::new(p, repr)?;
    exact_distribution(|src| Ok(attacker.run(target, src, None)?.result))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_a_known_tree() {
        // two fair coins, then a biased draw: P(both heads and draw 0) = ¼·0.3
        let d = exact_distribution(|src| {
            let x = src.coin()? & src.coin()?;
            let y = src.choose(&[0.3, 0.7, 0.0])?;
            Ok(if y == 0 { Outcome::Bit(x) } else { Outcome::Abort })
        })
        .unwrap();
        assert!((d.zero - 0.75 * 0.3).abs() < 1e-15);
        assert!((d.one - 0.25 * 0.3).abs() < 1e-15);
        assert!((d.abort - 0.7).abs() < 1e-15);
    }

    #[test]
    fn honest_protocol_is_fair() {
        let p = ProtocolParams::from_c2(0.9, 1, 2, 1).unwrap();
        let d = honest_distribution(&p, Representation::Compressed).unwrap();
        assert!((d.zero - 0.5).abs() < 1e-12 && (d.one - 0.5).abs() < 1e-12);
        assert!(d.abort < 1e-12);
    }

    #[test]
    fn single_round_attack_by_hand() {
        // m = l = 1: Bob* knows nothing of Alice's bit; half the time he must
        // flip his own, passing Alice's test with probability ⟨Φ(0)|Φ(1)⟩²
        for (c2, n) in [(0.9, 1), (0.75, 2), (0.6, 1)] {
            let p = ProtocolParams::from_c2(c2, n, 1, 1).unwrap();
            let overlap2 = (2.0 * c2 - 1.0f64).powi(2 * n as i32);
            let d = attack_distribution(&p, 0, Representation::Compressed).unwrap();
            assert!((d.zero - 0.5 * (1.0 + overlap2)).abs() < 1e-12, "c² = {c2}, n = {n}");
            assert!((d.abort - 0.5 * (1.0 - overlap2)).abs() < 1e-12);
            assert!(d.one.abs() < 1e-12);
        }
    }
}
