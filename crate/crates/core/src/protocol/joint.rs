//! The state Bob* shares with Alice after the qubit exchange.
//!
//! For every unopened round `j` Alice holds a block in `Φ(b_j)` and Bob* holds
//! the returned block `Φ(b̄_j)` plus register qubit `|b_j⟩`, all in
//! superposition over `b`. The returned blocks are a fixed function of the
//! register, so [`JointState`] stores only Alice's blocks and the register;
//! [`JointState::expanded`] materializes the returned blocks when needed.
//! Bob*'s register operations are applied through the isometry
//! `|b⟩ ↦ |Φ(b̄)⟩|b⟩`, which keeps the two pictures equivalent.

use super::mixture::product_ket;
use super::params::{block_state, ProtocolParams, QubitAmplitudes, Representation};
use super::source::OutcomeSource;
use crate::error::{Error, Result};
use crate::linalg::{c, CVector};
use crate::quantum::{self, uhlmann_unitary, DensityMatrix, Povm, QuantumState, StateVector, UhlmannResult};

/// Norm left after removing a factor that should be a product factor.
const FACTOR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct JointState {
    state: StateVector,
    /// Round of each of Alice's blocks, in factor order.
    ba_rounds: Vec<usize>,
    /// Round of each register qubit, in factor order after the blocks.
    reg_rounds: Vec<usize>,
    amps: QubitAmplitudes,
    n: usize,
    repr: Representation,
}

fn parity(s: u32) -> u8 {
    (s.count_ones() & 1) as u8
}

fn string_bits(s: u32, q: usize) -> Vec<u8> {
    (0..q).map(|j| ((s >> (q - 1 - j)) & 1) as u8).collect()
}

impl JointState {
    /// Uniform superposition over every register string of rounds
    /// `first..=m`, the shape of the state after the exchange step.
    pub fn uniform(p: &ProtocolParams, repr: Representation, first: usize) -> Result<Self> {
        Self::rounds(p, repr, first, p.m)
    }

    /// Uniform superposition over the register strings of rounds
    /// `first..=last`. The state after the exchange is a product over rounds,
    /// so any contiguous range of them can be simulated on its own.
    pub fn rounds(p: &ProtocolParams, repr: Representation, first: usize, last: usize) -> Result<Self> {
        if first == 0 || last > p.m || first > last {
            return Err(Error::InvalidArgument(format!("rounds {first}..={last} outside 1..={}", p.m)));
        }
        Self::from_strings(p.amplitudes(), p.n, repr, (first..=last).collect(), |_| true)
    }

    /// Superposition over the strings of rounds `first..=m` with the given
    /// parity.
    pub fn parity_sector(p: &ProtocolParams, repr: Representation, first: usize, parity_bit: u8) -> Result<Self> {
        let rounds: Vec<usize> = (first..=p.m).collect();
        Self::from_strings(p.amplitudes(), p.n, repr, rounds, |s| parity(s) == parity_bit & 1)
    }

    fn from_strings(
        amps: QubitAmplitudes,
        n: usize,
        repr: Representation,
        rounds: Vec<usize>,
        admit: impl Fn(u32) -> bool,
    ) -> Result<Self> {
        let q = rounds.len();
        if q == 0 || q > 12 {
            return Err(Error::InvalidArgument(format!("{q} open rounds cannot be simulated")));
        }
        let d = repr.block_dim(n);
        let blocks = [block_state(0, amps, n, repr), block_state(1, amps, n, repr)];
        let reg = 1usize << q;
        let ba = d.pow(q as u32);
        let admitted: Vec<u32> = (0..reg as u32).filter(|&s| admit(s)).collect();
        if admitted.is_empty() {
            return Err(Error::InvalidArgument("no register string admitted".into()));
        }
        let w = 1.0 / (admitted.len() as f64).sqrt();
        let mut amps_vec = CVector::zeros(ba * reg);
        for &s in &admitted {
            let ket = product_ket(s, q, &blocks);
            for (i, a) in ket.amplitudes().iter().enumerate() {
                amps_vec[i * reg + s as usize] = a * w;
            }
        }
        let mut dims = vec![d; q];
        dims.extend(std::iter::repeat_n(2, q));
        Ok(JointState {
            state: StateVector::from_parts(amps_vec, dims),
            ba_rounds: rounds.clone(),
            reg_rounds: rounds,
            amps,
            n,
            repr,
        })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn alice_rounds(&self) -> &[usize] {
        &self.ba_rounds
    }

    pub fn register_rounds(&self) -> &[usize] {
        &self.reg_rounds
    }

    pub fn alice_factors(&self) -> Vec<usize> {
        (0..self.ba_rounds.len()).collect()
    }

    pub fn register_factors(&self) -> Vec<usize> {
        let a = self.ba_rounds.len();
        (a..a + self.reg_rounds.len()).collect()
    }

    fn block(&self, bit: u8) -> StateVector {
        block_state(bit, self.amps, self.n, self.repr)
    }

    /// Alice's reduced state on her unopened blocks.
    pub fn alice_reduced(&self) -> Result<DensityMatrix> {
        self.state.reduced(&self.alice_factors())
    }

    /// Probability of each register string, indexed by the string read most
    /// significant bit first.
    pub fn register_weights(&self) -> Vec<f64> {
        let reg = 1usize << self.reg_rounds.len();
        let mut w = vec![0.0; reg];
        for (idx, a) in self.state.amplitudes().iter().enumerate() {
            w[idx % reg] += a.norm_sqr();
        }
        w
    }

    /// Zeroes every register string not admitted and renormalizes.
    fn project_register(&mut self, admit: impl Fn(u32) -> bool) -> Result<()> {
        let reg = 1usize << self.reg_rounds.len();
        let mut amps = self.state.amplitudes().clone();
        for (idx, a) in amps.iter_mut().enumerate() {
            if !admit((idx % reg) as u32) {
                *a = c(0.0);
            }
        }
        self.state = StateVector::normalized(amps, self.state.dims().to_vec())?;
        Ok(())
    }

    fn drop_factor(&mut self, factor: usize, v: &StateVector) -> Result<()> {
        let (amps, dims) = self.state.contract(factor, v)?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > FACTOR_TOLERANCE {
            return Err(Error::Inconsistent(format!("factor {factor} is not separable (residual norm {norm})")));
        }
        self.state = StateVector::normalized(amps, dims)?;
        Ok(())
    }

    /// Bob*'s `{|0⟩⟨0|, |1⟩⟨1|}` measurement on the first register qubit.
    /// The qubit is classical afterwards and is removed.
    pub fn measure_register_bit(&mut self, src: &mut dyn OutcomeSource) -> Result<u8> {
        let q = self.reg_rounds.len();
        if q == 0 {
            return Err(Error::Inconsistent("register is empty".into()));
        }
        let weights = self.register_weights();
        let top = |s: usize| ((s >> (q - 1)) & 1) as u8;
        let mut probs = [0.0; 2];
        for (s, w) in weights.iter().enumerate() {
            probs[top(s) as usize] += w;
        }
        let bit = src.choose(&probs)? as u8;
        self.project_register(|s| top(s as usize) == bit)?;
        let ket = StateVector::basis(vec![2], bit as usize)?;
        let factor = self.ba_rounds.len();
        self.drop_factor(factor, &ket)?;
        self.reg_rounds.remove(0);
        Ok(bit)
    }

    /// `{F₀, F₁}`: parity of the whole register.
    pub fn measure_register_parity(&mut self, src: &mut dyn OutcomeSource) -> Result<u8> {
        let weights = self.register_weights();
        let mut probs = [0.0; 2];
        for (s, w) in weights.iter().enumerate() {
            probs[parity(s as u32) as usize] += w;
        }
        let f = src.choose(&probs)? as u8;
        self.project_register(|s| parity(s) == f)?;
        Ok(f)
    }

    /// Alice's test `(E_b, E⊥)` on her first unopened block. On success the
    /// block is removed; on `⊥` the state is left collapsed and `false` is
    /// returned.
    pub fn alice_check(&mut self, bit: u8, src: &mut dyn OutcomeSource) -> Result<bool> {
        if self.ba_rounds.is_empty() {
            return Err(Error::Inconsistent("Alice holds no unopened block".into()));
        }
        let expected = self.block(bit);
        let povm = Povm::check(&expected, &bit.to_string())?;
        let pure = QuantumState::Pure(self.state.clone());
        let probs = quantum::probabilities(&pure, &povm, Some(&[0]))?;
        let k = src.choose(&probs)?;
        let QuantumState::Pure(post) = quantum::collapse(&pure, &povm, Some(&[0]), k, probs[k])? else {
            unreachable!("pure states collapse to pure states")
        };
        self.state = post;
        if k != 0 {
            return Ok(false);
        }
        self.drop_factor(0, &expected)?;
        self.ba_rounds.remove(0);
        Ok(true)
    }

    /// Adds the returned blocks `Φ(b̄_j)` explicitly. Factor order: Alice's
    /// blocks, returned blocks (one per register qubit), register.
    pub fn expanded(&self) -> StateVector {
        let qa = self.ba_rounds.len();
        let qr = self.reg_rounds.len();
        let reg = 1usize << qr;
        let d = self.repr.block_dim(self.n);
        let blocks = [self.block(0), self.block(1)];
        let returned: Vec<StateVector> =
            (0..reg as u32).map(|s| product_ket(!s & (reg as u32 - 1), qr, &blocks)).collect();
        let bab = d.pow(qr as u32);
        let ba = self.state.len() / reg;
        let mut out = CVector::zeros(ba * bab * reg);
        for (idx, a) in self.state.amplitudes().iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let (i, s) = (idx / reg, idx % reg);
            for (k, r) in returned[s].amplitudes().iter().enumerate() {
                out[(i * bab + k) * reg + s] = a * r;
            }
        }
        let mut dims = vec![d; qa];
        dims.extend(std::iter::repeat_n(d, qr));
        dims.extend(std::iter::repeat_n(2, qr));
        StateVector::from_parts(out, dims)
    }

    /// Optimal register rotation from the parity-`f` state on this state's
    /// open rounds to the opposite-parity one.
    ///
    /// The cross-overlap matrix depends only on the block overlaps, so it is
    /// formed in the compressed representation whatever `self` uses. This
    /// also fixes the otherwise arbitrary completion of the rotation when that
    /// matrix is singular, making it the same for both representations.
    pub fn flip_rotation(&self, f: u8) -> Result<UhlmannResult> {
        if self.ba_rounds != self.reg_rounds {
            return Err(Error::Inconsistent("Alice's blocks and the register cover different rounds".into()));
        }
        let sector = |bit: u8| {
            Self::from_strings(self.amps, self.n, Representation::Compressed, self.reg_rounds.clone(), |s| {
                parity(s) == bit & 1
            })
        };
        let (from, to) = (sector(f)?, sector(f ^ 1)?);
        uhlmann_unitary(&from.state, &to.state, &from.register_factors())
    }
}

/// What [`steer`] did.
#[derive(Debug, Clone)]
pub struct SteerOutcome {
    /// Bits Bob* announces for the open rounds, in round order.
    pub announced: Vec<u8>,
    /// Whether the register measurement produced a string of the desired
    /// parity, as opposed to the fallback random choice.
    pub hit: bool,
    /// `|⟨η(F̄)|U η(F)⟩|²` when a rotation was applied.
    pub u: Option<f64>,
    pub post: JointState,
}

/// Bob*'s opening of the unopened rounds from a register of parity `f`.
///
/// Without `want_flip` the register is read out and announced as is. With
/// it, the optimal local unitary towards the opposite-parity state is applied
/// first; a register outcome of the wrong parity falls back to a uniformly
/// random string of the desired parity.
pub fn steer(joint: &JointState, f: u8, want_flip: bool, src: &mut dyn OutcomeSource) -> Result<SteerOutcome> {
    steer_with(joint, f, want_flip, None, src)
}

/// [`steer`] with a rotation computed beforehand by
/// [`JointState::flip_rotation`].
pub fn steer_with(
    joint: &JointState,
    f: u8,
    want_flip: bool,
    rotation: Option<&UhlmannResult>,
    src: &mut dyn OutcomeSource,
) -> Result<SteerOutcome> {
    let goal = if want_flip { (f ^ 1) & 1 } else { f & 1 };
    let mut work = joint.clone();
    let mut u = None;
    if want_flip {
        let free = joint.register_factors();
        let computed;
        let rotation = match rotation {
            Some(r) => r,
            None => {
                computed = joint.flip_rotation(f)?;
                &computed
            }
        };
        work.state = work.state.apply_unitary(&rotation.unitary, &free)?;
        u = Some(rotation.u);
    }
    let q = work.reg_rounds.len();
    let weights = work.register_weights();
    let goal_strings: Vec<u32> = (0..1u32 << q).filter(|&s| parity(s) == goal).collect();
    let mut probs: Vec<f64> = goal_strings.iter().map(|&s| weights[s as usize]).collect();
    let rest: f64 = (0..1u32 << q).filter(|&s| parity(s) != goal).map(|s| weights[s as usize]).sum();
    probs.push(rest);
    let k = src.choose(&probs)?;
    let (announced, hit) = if k < goal_strings.len() {
        let s = goal_strings[k];
        work.project_register(|x| x == s)?;
        (string_bits(s, q), true)
    } else {
        work.project_register(|x| parity(x) != goal)?;
        let pick = src.choose(&vec![1.0; goal_strings.len()])?;
        (string_bits(goal_strings[pick], q), false)
    };
    Ok(SteerOutcome { announced, hit, u, post: work })
}

/// Bob*'s entangled commitment before the exchange, qubit by qubit: for each
/// round `j` and position `i` the pair `ψ(b_j ⊕ d_ij) ψ(b̄_j ⊕ d_ij)`,
/// followed by the `m` register qubits. `d[i][j]` as in the transcript.
pub fn entangled_commitment(p: &ProtocolParams, d: &[Vec<u8>]) -> Result<StateVector> {
    let qubits = 2 * p.m * p.n + p.m;
    if qubits > 16 {
        return Err(Error::InvalidArgument(format!("{qubits} qubits is too many to store densely")));
    }
    let amps = p.amplitudes();
    let reg = 1usize << p.m;
    let mut total = CVector::zeros(1usize << qubits);
    for s in 0..reg as u32 {
        let b = string_bits(s, p.m);
        let mut ket: Option<StateVector> = None;
        for (j, &bj) in b.iter().enumerate() {
            for row in d.iter().take(p.n) {
                let dij = row[j];
                let pair = super::params::psi(bj ^ dij, amps).tensor(&super::params::psi(bj ^ 1 ^ dij, amps));
                ket = Some(match ket {
                    None => pair,
                    Some(k) => k.tensor(&pair),
                });
            }
        }
        let ket = ket.expect("m, n ≥ 1");
        for (i, a) in ket.amplitudes().iter().enumerate() {
            total[i * reg + s as usize] += a;
        }
    }
    StateVector::normalized(total, vec![2; qubits])
}

/// Regroups [`entangled_commitment`] after Alice keeps qubit `f_ij` of each
/// pair (`0` = first) and returns the other: Alice's kept qubits by round
/// then position, the returned qubits in the same order, then the register.
pub fn split_after_announcement(eta: &StateVector, p: &ProtocolParams, f: &[Vec<u8>]) -> Result<StateVector> {
    let (m, n) = (p.m, p.n);
    let pair_qubit = |j: usize, i: usize, which: usize| 2 * (j * n + i) + which;
    let mut order = Vec::with_capacity(eta.dims().len());
    for j in 0..m {
        for i in 0..n {
            order.push(pair_qubit(j, i, f[i][j] as usize));
        }
    }
    for j in 0..m {
        for i in 0..n {
            order.push(pair_qubit(j, i, 1 - f[i][j] as usize));
        }
    }
    order.extend(2 * m * n..2 * m * n + m);
    eta.permute_factors(&order)
}
