use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::guess::{guess_odds, GuessOdds};
use super::{run_sift, stream_rng, BobStrategy, KeyRecord, QBER_STREAM};
use crate::analysis::{attack_announcement, attack_profile, attack_retention_probability};
use crate::error::{Error, Result};
use crate::qstate::{ProtocolParams, Setting};

/// Error count for the test bits carrying one announcement value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassTally {
    pub announcement: usize,
    pub tested: usize,
    pub mismatches: usize,
}

impl ClassTally {
    pub fn qber(&self) -> Option<f64> {
        (self.tested > 0).then(|| self.mismatches as f64 / self.tested as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QberEstimate {
    /// Disclosed positions, ascending.
    pub tested: Vec<usize>,
    pub mismatches: usize,
    pub qber: f64,
    pub by_announcement: Vec<ClassTally>,
}

impl QberEstimate {
    pub fn class(&self, announcement: usize) -> Option<&ClassTally> {
        self.by_announcement
            .iter()
            .find(|c| c.announcement == announcement)
    }
}

/// Discloses a random `test_fraction` of the usable conclusive positions
/// (at least one) and compares both parties' bits there.
pub fn estimate_qber(
    record: &mut KeyRecord,
    test_fraction: f64,
    seed: u64,
) -> Result<QberEstimate> {
    if !(test_fraction > 0.0 && test_fraction <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "test fraction {test_fraction} outside (0, 1]"
        )));
    }
    let available = record.usable_positions();
    if available.is_empty() {
        return Err(Error::NoConclusive);
    }
    let k = ((test_fraction * available.len() as f64).ceil() as usize).clamp(1, available.len());
    let mut rng = stream_rng(seed, QBER_STREAM);
    let mut tested: Vec<usize> = sample(&mut rng, available.len(), k)
        .into_iter()
        .map(|i| available[i])
        .collect();
    tested.sort_unstable();

    let mut classes: BTreeMap<usize, ClassTally> = BTreeMap::new();
    let mut mismatches = 0;
    for &pos in &tested {
        let ann = record.announcements[pos];
        let tally = classes.entry(ann).or_insert(ClassTally {
            announcement: ann,
            tested: 0,
            mismatches: 0,
        });
        tally.tested += 1;
        if record.alice_known[&pos] != record.bob_key[pos] {
            tally.mismatches += 1;
            mismatches += 1;
        }
    }
    record.disclosed.extend(tested.iter().copied());
    Ok(QberEstimate {
        qber: mismatches as f64 / tested.len() as f64,
        tested,
        mismatches,
        by_announcement: classes.into_values().collect(),
    })
}

/// Alice aborts when the observed error rate reaches the threshold.
pub fn detect_attack(qber_observed: f64, threshold: f64) -> bool {
    qber_observed >= threshold
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackMode {
    Qubit,
    Qutrit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub rounds: u64,
    pub seed: u64,
    pub test_fraction: f64,
    pub threshold: f64,
}

/// Outcome of one attacked key distribution, observed values next to the
/// analytic expectations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub mode: AttackMode,
    pub rounds: u64,
    pub retained: usize,
    pub retention_observed: f64,
    pub retention_expected: f64,
    pub conclusive: usize,
    pub conclusive_rate_observed: Option<f64>,
    pub conclusive_rate_expected: f64,
    pub degenerate: usize,
    pub tested_bits: usize,
    pub mismatches: usize,
    /// Over all test bits; this is what detection uses.
    pub qber_observed: f64,
    pub qber_expected: f64,
    /// Announcement Bob makes for his first middle state.
    pub instance_announcement: usize,
    pub instance_tested: usize,
    pub instance_qber_observed: Option<f64>,
    pub instance_qber_expected: f64,
    pub p0_expected: f64,
    pub p1_expected: f64,
    pub threshold: f64,
    pub detected: bool,
    pub bob_guess: Option<GuessOdds>,
}

pub fn run_attack(params: &ProtocolParams, config: &AttackConfig) -> Result<AttackReport> {
    let mode = match params.setting {
        Setting::Qubit { .. } => AttackMode::Qubit,
        Setting::Qutrit { .. } => AttackMode::Qutrit,
        Setting::QutritFourier => {
            return Err(Error::InvalidParams(
                "the middle-state attack is defined for the rotated ensembles only".into(),
            ))
        }
    };
    let mut run = run_sift(
        params,
        config.rounds,
        BobStrategy::MiddleAttack,
        config.seed,
    )?;
    let profile = attack_profile(params)?;
    let estimate = estimate_qber(&mut run.record, config.test_fraction, config.seed)?;

    let first = &profile.instances[0];
    let instance_announcement = attack_announcement(params.dim(), 0);
    let class = estimate.class(instance_announcement);
    Ok(AttackReport {
        mode,
        rounds: config.rounds,
        retained: run.retained(),
        retention_observed: run.retention_rate(),
        retention_expected: attack_retention_probability(params)?,
        conclusive: run.record.conclusive_count(),
        conclusive_rate_observed: run.conclusive_rate(),
        conclusive_rate_expected: profile.conclusive_rate(),
        degenerate: run.record.degenerate,
        tested_bits: estimate.tested.len(),
        mismatches: estimate.mismatches,
        qber_observed: estimate.qber,
        qber_expected: profile.expected_qber(),
        instance_announcement,
        instance_tested: class.map_or(0, |c| c.tested),
        instance_qber_observed: class.and_then(ClassTally::qber),
        instance_qber_expected: first.mismatch() / first.conclusive(),
        p0_expected: first.bits.p0,
        p1_expected: first.bits.p1,
        threshold: config.threshold,
        detected: detect_attack(estimate.qber, config.threshold),
        bob_guess: guess_odds(&run, &profile),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub trials: usize,
    pub detections: usize,
    pub power: f64,
    pub min_test_bits: usize,
    pub mean_qber: f64,
}

/// Fraction of independent sessions in which the test flags an error rate
/// at or above `threshold`.
pub fn detection_power(
    params: &ProtocolParams,
    strategy: BobStrategy,
    rounds_per_trial: u64,
    test_fraction: f64,
    threshold: f64,
    trials: usize,
    seed: u64,
) -> Result<PowerEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParams(
            "at least one trial is required".into(),
        ));
    }
    let mut seeds = stream_rng(seed, QBER_STREAM - 2);
    let mut detections = 0;
    let mut min_test_bits = usize::MAX;
    let mut qber_sum = 0.0;
    for _ in 0..trials {
        let s: u64 = seeds.gen();
        let mut run = run_sift(params, rounds_per_trial, strategy, s)?;
        let estimate = estimate_qber(&mut run.record, test_fraction, s)?;
        min_test_bits = min_test_bits.min(estimate.tested.len());
        qber_sum += estimate.qber;
        if detect_attack(estimate.qber, threshold) {
            detections += 1;
        }
    }
    Ok(PowerEstimate {
        trials,
        detections,
        power: detections as f64 / trials as f64,
        min_test_bits,
        mean_qber: qber_sum / trials as f64,
    })
}
