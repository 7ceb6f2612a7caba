use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{estimate_qber, run_sift, stream_rng, BobStrategy, SiftRound, SiftRun, QUERY_STREAM};
use crate::analysis::{attack_profile, AttackProfile};
use crate::error::Result;
use crate::qstate::{ProtocolParams, TOLERANCE};

/// Bob's best guess at which position Alice will use, given what he
/// learned from his own middle-state choices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionGuess {
    pub position: Option<usize>,
    /// Undisclosed positions with the highest conclusive probability.
    pub tier: Vec<usize>,
    pub tier_probability: f64,
    pub candidates: usize,
}

fn top_tier(
    rounds: &[SiftRound],
    disclosed: &BTreeSet<usize>,
    profile: &AttackProfile,
) -> (Vec<usize>, f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut tier = Vec::new();
    let mut candidates = 0;
    for (pos, r) in rounds.iter().enumerate() {
        if disclosed.contains(&pos) {
            continue;
        }
        candidates += 1;
        let p = profile.instances[r.bob_state].conclusive();
        if p > best + TOLERANCE {
            best = p;
            tier.clear();
        }
        if (p - best).abs() <= TOLERANCE {
            tier.push(pos);
        }
    }
    (tier, best, candidates)
}

pub fn bob_position_guess<R: Rng + ?Sized>(
    rounds: &[SiftRound],
    disclosed: &BTreeSet<usize>,
    profile: &AttackProfile,
    rng: &mut R,
) -> PositionGuess {
    let (tier, tier_probability, candidates) = top_tier(rounds, disclosed, profile);
    PositionGuess {
        position: tier.choose(rng).copied(),
        tier,
        tier_probability,
        candidates,
    }
}

/// Exact odds that Bob's guess hits the position Alice picks uniformly
/// among her usable ones, against uniform guessing over his candidates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuessOdds {
    pub candidates: usize,
    pub usable: usize,
    pub tier: usize,
    pub success: f64,
    pub candidate_baseline: f64,
    pub usable_baseline: f64,
}

/// `None` when Alice has no usable position.
pub fn guess_odds(run: &SiftRun, profile: &AttackProfile) -> Option<GuessOdds> {
    let usable: BTreeSet<usize> = run.record.usable_positions().into_iter().collect();
    if usable.is_empty() {
        return None;
    }
    let (tier, _, candidates) = top_tier(&run.rounds, &run.record.disclosed, profile);
    let overlap = tier.iter().filter(|p| usable.contains(p)).count();
    Some(GuessOdds {
        candidates,
        usable: usable.len(),
        tier: tier.len(),
        success: overlap as f64 / (tier.len() * usable.len()) as f64,
        candidate_baseline: 1.0 / candidates as f64,
        usable_baseline: 1.0 / usable.len() as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuessStudy {
    pub sessions: usize,
    /// Sessions that ended in a restart and were not scored.
    pub skipped: usize,
    pub hits: usize,
    pub hit_rate: f64,
    pub mean_success: f64,
    pub mean_candidate_baseline: f64,
    pub mean_usable_baseline: f64,
}

/// Repeats short attacked sessions and scores Bob's position guess in each.
pub fn position_guess_study(
    params: &ProtocolParams,
    rounds_per_session: u64,
    sessions: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<GuessStudy> {
    let profile = attack_profile(params)?;
    let mut seeds = stream_rng(seed, QUERY_STREAM - 1);
    let session_seeds: Vec<u64> = (0..sessions).map(|_| seeds.gen()).collect();
    let outcomes = session_seeds
        .par_iter()
        .map(|&s| -> Result<Option<(bool, GuessOdds)>> {
            let mut run = run_sift(params, rounds_per_session, BobStrategy::MiddleAttack, s)?;
            if estimate_qber(&mut run.record, test_fraction, s).is_err() {
                return Ok(None);
            }
            let Some(odds) = guess_odds(&run, &profile) else {
                return Ok(None);
            };
            let mut rng = stream_rng(s, QUERY_STREAM);
            let usable = run.record.usable_positions();
            let alice = *usable.choose(&mut rng).expect("usable positions exist");
            let guess = bob_position_guess(&run.rounds, &run.record.disclosed, &profile, &mut rng);
            Ok(Some((guess.position == Some(alice), odds)))
        })
        .collect::<Result<Vec<_>>>()?;

    let scored: Vec<_> = outcomes.into_iter().flatten().collect();
    let n = scored.len().max(1) as f64;
    let hits = scored.iter().filter(|(hit, _)| *hit).count();
    Ok(GuessStudy {
        sessions,
        skipped: sessions - scored.len(),
        hits,
        hit_rate: hits as f64 / n,
        mean_success: scored.iter().map(|(_, o)| o.success).sum::<f64>() / n,
        mean_candidate_baseline: scored
            .iter()
            .map(|(_, o)| o.candidate_baseline)
            .sum::<f64>()
            / n,
        mean_usable_baseline: scored.iter().map(|(_, o)| o.usable_baseline).sum::<f64>() / n,
    })
}
