//! Seeded Monte Carlo engine for the full private-query protocol.
//!
//! Every round draws its randomness from its own ChaCha stream keyed by
//! `(seed, round index)`, so rounds are simulated in parallel and the
//! result is bit-identical regardless of scheduling.

mod guess;
mod qber;
mod query;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{attack_announcement, attack_profile};
use crate::error::{Error, Result};
use crate::qstate::{bsm_distribution, ProtocolParams, StateSet};
use crate::sift::{check_protocol_params, ConclusiveVerdict, Sifter};

pub use guess::{
    bob_position_guess, guess_odds, position_guess_study, GuessOdds, GuessStudy, PositionGuess,
};
pub use qber::{
    detect_attack, detection_power, estimate_qber, run_attack, AttackConfig, AttackMode,
    AttackReport, ClassTally, PowerEstimate, QberEstimate,
};
pub use query::{effective_key, one_time_pad, private_query, shift_key, QuerySession};

/// Stream reserved for error-estimation sampling.
const QBER_STREAM: u64 = u64::MAX;
/// Stream reserved for Alice's choice of query position.
const QUERY_STREAM: u64 = u64::MAX - 1;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BobStrategy {
    Honest,
    MiddleAttack,
}

/// One round that produced the kept Bell outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiftRound {
    pub round: u64,
    pub alice_state: usize,
    /// Honest ensemble index, or middle-state index under attack.
    pub bob_state: usize,
    pub bsm_outcome: usize,
    pub announced_index: usize,
    pub verdict: ConclusiveVerdict,
    pub bob_key_bit: u8,
}

/// Key material over the kept rounds. Positions index the kept rounds in
/// order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KeyRecord {
    pub rounds_total: u64,
    pub sifted_rounds: Vec<u64>,
    pub announcements: Vec<usize>,
    pub bob_key: Vec<u8>,
    /// Positions where Alice is conclusive, with her inferred bit.
    pub alice_known: BTreeMap<usize, u8>,
    /// Positions disclosed during error estimation; no longer usable.
    pub disclosed: BTreeSet<usize>,
    pub degenerate: usize,
}

impl KeyRecord {
    pub fn len(&self) -> usize {
        self.bob_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bob_key.is_empty()
    }

    pub fn conclusive_count(&self) -> usize {
        self.alice_known.len()
    }

    /// Conclusive positions not yet disclosed.
    pub fn usable_positions(&self) -> Vec<usize> {
        self.alice_known
            .keys()
            .copied()
            .filter(|p| !self.disclosed.contains(p))
            .collect()
    }

    pub fn estimate_qber(&mut self, test_fraction: f64, seed: u64) -> Result<QberEstimate> {
        estimate_qber(self, test_fraction, seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiftRun {
    pub params: ProtocolParams,
    pub strategy: BobStrategy,
    pub seed: u64,
    pub rounds: Vec<SiftRound>,
    pub record: KeyRecord,
}

impl SiftRun {
    pub fn retained(&self) -> usize {
        self.rounds.len()
    }

    /// Fraction of kept rounds where Alice is conclusive; `None` when no
    /// round was kept.
    pub fn conclusive_rate(&self) -> Option<f64> {
        (!self.rounds.is_empty())
            .then(|| self.record.conclusive_count() as f64 / self.rounds.len() as f64)
    }

    pub fn retention_rate(&self) -> f64 {
        self.rounds.len() as f64 / self.record.rounds_total as f64
    }
}

#[derive(Clone, Copy, Debug)]
enum KeyRule {
    Fixed(u8),
    Random,
}

struct Engine {
    n_alice: usize,
    n_bob: usize,
    target: usize,
    /// Cumulative outcome distribution, indexed `bob * n_alice + alice`.
    cdf: Vec<Vec<f64>>,
    announce: Vec<usize>,
    key: Vec<KeyRule>,
    /// `verdicts[alice][announcement]`
    verdicts: Vec<Vec<ConclusiveVerdict>>,
    base: ChaCha8Rng,
}

impl Engine {
    fn new(params: &ProtocolParams, strategy: BobStrategy, seed: u64) -> Result<Self> {
        let sifter = Sifter::new(params)?;
        let ensemble = sifter.ensemble();
        let dim = params.dim();
        let (bob_states, announce, key) = match strategy {
            BobStrategy::Honest => {
                let announce = (0..ensemble.len()).map(|b| ensemble.index_of(b)).collect();
                let key = (0..ensemble.len())
                    .map(|b| KeyRule::Fixed(ensemble.basis_of(b).key_bit()))
                    .collect();
                (ensemble.states().to_vec(), announce, key)
            }
            BobStrategy::MiddleAttack => {
                let middle = params.middle_states()?;
                let profile = attack_profile(params)?;
                let announce = (0..middle.len())
                    .map(|m| attack_announcement(dim, m))
                    .collect();
                let key = profile
                    .instances
                    .iter()
                    .map(|i| i.bob_bit.map_or(KeyRule::Random, KeyRule::Fixed))
                    .collect();
                (middle.states().to_vec(), announce, key)
            }
        };
        let mut cdf = Vec::with_capacity(bob_states.len() * ensemble.len());
        for b in &bob_states {
            for a in ensemble.states() {
                let dist = bsm_distribution(b, a, sifter.bell())?;
                let mut acc = 0.0;
                cdf.push(
                    dist.iter()
                        .map(|p| {
                            acc += p;
                            acc
                        })
                        .collect(),
                );
            }
        }
        let verdicts = (0..ensemble.len())
            .map(|a| (0..dim).map(|ann| sifter.verdict(a, ann)).collect())
            .collect();
        Ok(Self {
            n_alice: ensemble.len(),
            n_bob: bob_states.len(),
            target: params.target_bell_index,
            cdf,
            announce,
            key,
            verdicts,
            base: stream_rng(seed, 0),
        })
    }

    fn round(&self, round: u64) -> Option<SiftRound> {
        let mut rng = self.base.clone();
        rng.set_stream(round);
        let alice = rng.gen_range(0..self.n_alice);
        let bob = rng.gen_range(0..self.n_bob);
        let u: f64 = rng.gen();
        let coin: bool = rng.gen();

        let cdf = &self.cdf[bob * self.n_alice + alice];
        let total = *cdf.last().expect("nonempty distribution");
        let outcome = cdf.partition_point(|&c| c <= u * total).min(cdf.len() - 1);
        if outcome != self.target {
            return None;
        }
        let announced_index = self.announce[bob];
        let bob_key_bit = match self.key[bob] {
            KeyRule::Fixed(bit) => bit,
            KeyRule::Random => u8::from(coin),
        };
        Some(SiftRound {
            round,
            alice_state: alice,
            bob_state: bob,
            bsm_outcome: outcome,
            announced_index,
            verdict: self.verdicts[alice][announced_index].clone(),
            bob_key_bit,
        })
    }
}

/// Runs `rounds` protocol rounds and sifts the ones that produced the
/// target Bell outcome.
pub fn run_sift(
    params: &ProtocolParams,
    rounds: u64,
    strategy: BobStrategy,
    seed: u64,
) -> Result<SiftRun> {
    if rounds == 0 {
        return Err(Error::InvalidParams(
            "at least one round is required".into(),
        ));
    }
    check_protocol_params(params)?;
    let engine = Engine::new(params, strategy, seed)?;
    let kept: Vec<SiftRound> = (0..rounds)
        .into_par_iter()
        .filter_map(|r| engine.round(r))
        .collect();

    let mut record = KeyRecord {
        rounds_total: rounds,
        ..KeyRecord::default()
    };
    for (pos, r) in kept.iter().enumerate() {
        record.sifted_rounds.push(r.round);
        record.announcements.push(r.announced_index);
        record.bob_key.push(r.bob_key_bit);
        if let Some(bit) = r.verdict.inferred_key_bit {
            record.alice_known.insert(pos, bit);
        }
        if r.verdict.degenerate {
            record.degenerate += 1;
        }
    }
    Ok(SiftRun {
        params: *params,
        strategy,
        seed,
        rounds: kept,
        record,
    })
}
