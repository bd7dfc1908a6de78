//! One branch of a run replayed in both representations, comparing the
//! probabilities of every choice along the way.

use serde::{Deserialize, Serialize};

use super::params::{ProtocolParams, Representation};
use super::run::{run_honest_with, seeded_source, Attacker};
use super::source::OutcomeSource;
use super::transcript::Outcome;
use crate::error::{Error, Result};

/// Forwards to an inner source, keeping every choice and its options.
struct Tape<'a> {
    inner: &'a mut dyn OutcomeSource,
    choices: Vec<usize>,
    log: Vec<Vec<f64>>,
}

impl OutcomeSource for Tape<'_> {
    fn coin(&mut self) -> Result<u8> {
        let x = self.inner.coin()?;
        self.choices.push(x as usize);
        self.log.push(vec![0.5, 0.5]);
        Ok(x)
    }

    fn choose(&mut self, probs: &[f64]) -> Result<usize> {
        let k = self.inner.choose(probs)?;
        self.choices.push(k);
        self.log.push(probs.to_vec());
        Ok(k)
    }
}

/// Makes the recorded choices again, in order.
struct Replay {
    choices: Vec<usize>,
    log: Vec<Vec<f64>>,
}

impl OutcomeSource for Replay {
    fn choose(&mut self, probs: &[f64]) -> Result<usize> {
        let k = *self
            .choices
            .get(self.log.len())
            .ok_or_else(|| Error::Inconsistent("replayed run makes more choices than the original".into()))?;
        if k >= probs.len() {
            return Err(Error::Inconsistent(format!("choice {k} of {} options", probs.len())));
        }
        self.log.push(probs.to_vec());
        Ok(k)
    }
}

/// Agreement of the compressed and full representations over some branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceComparison {
    pub runs: usize,
    /// Choice points compared, summed over runs.
    pub checkpoints: usize,
    /// Largest difference between matching probabilities.
    pub max_diff: f64,
    /// Runs whose two replays ended with different results.
    pub result_mismatches: usize,
}

impl TraceComparison {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_diff <= tol && self.result_mismatches == 0
    }
}

/// Runs the compressed simulation once per seed, replays its choices in the
/// full representation and compares the two probability logs.
pub fn compare_traces(
    mut run: impl FnMut(Representation, &mut dyn OutcomeSource) -> Result<Outcome>,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<TraceComparison> {
    let mut cmp = TraceComparison { runs: 0, checkpoints: 0, max_diff: 0.0, result_mismatches: 0 };
    for seed in seeds {
        let mut base = seeded_source(seed);
        let mut tape = Tape { inner: &mut base, choices: Vec::new(), log: Vec::new() };
        let x = run(Representation::Compressed, &mut tape)?;
        let (choices, log) = (tape.choices, tape.log);
        let mut replay = Replay { choices, log: Vec::new() };
        let y = run(Representation::Full, &mut replay)?;
        if replay.log.len() != log.len() {
            return Err(Error::Inconsistent(format!(
                "seed {seed}: {} choices compressed, {} full",
                log.len(),
                replay.log.len()
            )));
        }
        for (a, b) in log.iter().zip(&replay.log) {
            if a.len() != b.len() {
                return Err(Error::Inconsistent(format!("seed {seed}: option counts {} and {}", a.len(), b.len())));
            }
            for (u, v) in a.iter().zip(b) {
                cmp.max_diff = cmp.max_diff.max((u - v).abs());
            }
        }
        cmp.runs += 1;
        cmp.checkpoints += log.len();
        cmp.result_mismatches += usize::from(x != y);
    }
    Ok(cmp)
}

pub fn compare_attack_traces(
    p: &ProtocolParams,
    target: u8,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<TraceComparison> {
    let attackers = [Attacker::new(p, Representation::Compressed)?, Attacker::new(p, Representation::Full)?];
    compare_traces(
        |repr, src| {
            let which = usize::from(repr == Representation::Full);
            Ok(attackers[which].run(target, src, None)?.result)
        },
        seeds,
    )
}

pub fn compare_honest_traces(p: &ProtocolParams, seeds: impl IntoIterator<Item = u64>) -> Result<TraceComparison> {
    compare_traces(|repr, src| Ok(run_honest_with(p, repr, src, None)?.result), seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attack_traces_agree() {
        for (c2, n, m, l) in [(0.9, 1, 2, 1), (0.75, 2, 2, 1), (0.6, 3, 2, 2), (0.9, 2, 3, 1)] {
            let p = ProtocolParams::from_c2(c2, n, m, l).unwrap();
            for target in 0..2 {
                let cmp = compare_attack_traces(&p, target, 0..8).unwrap();
                assert_eq!(cmp.runs, 8);
                assert!(cmp.checkpoints > 8 * 3 * m);
                assert!(cmp.passes(1e-9), "{p:?}: {cmp:?}");
            }
        }
    }

    #[test]
    fn honest_traces_agree() {
        let p = ProtocolParams::from_c2(0.75, 2, 3, 1).unwrap();
        assert!(compare_honest_traces(&p, 0..5).unwrap().passes(1e-9));
    }

    #[test]
    fn a_differing_simulation_is_caught() {
        let cmp = compare_traces(
            |repr, src| {
                let skew = if repr == Representation::Full { 1e-6 } else { 0.0 };
                let k = src.choose(&[0.5 - skew, 0.5 + skew])?;
                Ok(Outcome::Bit(k as u8))
            },
            0..3,
        )
        .unwrap();
        assert!((cmp.max_diff - 1e-6).abs() < 1e-12 && !cmp.passes(1e-9));
    }
}
