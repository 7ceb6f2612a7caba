//! Joint probability tables and the conclusiveness rule Alice applies after
//! Bob's announcement.
//!
//! Alice's rule is generic: Bob's announcement leaves two candidates, the
//! computational and the rotated state carrying that index. If her own state
//! makes exactly one candidate impossible for the kept Bell outcome, the
//! other candidate's basis is Bob's key bit.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{
    bsm_probability, Basis, BellBasis, ProtocolParams, Setting, StateEnsemble, StateSet, TOLERANCE,
};

/// Probabilities at or below this are treated as impossible events.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Rows are Alice's states, columns Bob's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub entries: Vec<Vec<f64>>,
    pub normalized: bool,
    /// The common column sum that normalization divided out (1 when raw).
    pub norm_constant: f64,
}

impl ProbabilityTable {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.cols())
            .map(|c| self.entries.iter().map(|row| row[c]).sum())
            .collect()
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_labels.iter().position(|l| l == label)
    }

    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.col_labels.iter().position(|l| l == label)
    }
}

/// Entry `(i, j)` is the probability of `outcome` when Alice sends her
/// `i`-th state and Bob his `j`-th.
pub fn joint_table<B: StateSet + ?Sized>(
    alice: &StateEnsemble,
    bob: &B,
    bell: &BellBasis,
    outcome: usize,
) -> Result<ProbabilityTable> {
    let entries = alice
        .states()
        .iter()
        .map(|a| {
            bob.states()
                .iter()
                .map(|b| bsm_probability(b, a, bell, outcome))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityTable {
        row_labels: alice.labels().to_vec(),
        col_labels: bob.labels().to_vec(),
        entries,
        normalized: false,
        norm_constant: 1.0,
    })
}

/// Divides every entry by the common column sum, turning entry `(a, b)`
/// into Alice's state distribution given Bob's state and the outcome.
pub fn normalize_columns(table: &ProbabilityTable) -> Result<ProbabilityTable> {
    if table.normalized {
        return Ok(table.clone());
    }
    let sums = table.column_sums();
    let first = *sums.first().ok_or(Error::EmptyGrid)?;
    if first <= ZERO_PROBABILITY || sums.iter().any(|s| (s - first).abs() > TOLERANCE) {
        return Err(Error::UnequalColumnSums(sums));
    }
    let entries = table
        .entries
        .iter()
        .map(|row| row.iter().map(|x| x / first).collect())
        .collect();
    Ok(ProbabilityTable {
        row_labels: table.row_labels.clone(),
        col_labels: table.col_labels.clone(),
        entries,
        normalized: true,
        norm_constant: first,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConclusiveVerdict {
    pub conclusive: bool,
    pub inferred_key_bit: Option<u8>,
    /// Ensemble index of the candidate Alice ruled out.
    pub excluded_candidate: Option<usize>,
    /// Both candidates were impossible for Alice's state.
    pub degenerate: bool,
}

impl ConclusiveVerdict {
    fn inconclusive() -> Self {
        Self {
            conclusive: false,
            inferred_key_bit: None,
            excluded_candidate: None,
            degenerate: false,
        }
    }
}

/// Alice's view of one configuration: her ensemble and the target-outcome
/// probability of every (her state, candidate) pair.
#[derive(Clone, Debug)]
pub struct Sifter {
    ensemble: StateEnsemble,
    bell: BellBasis,
    target: usize,
    /// `prob[alice][candidate]`
    prob: Vec<Vec<f64>>,
}

impl Sifter {
    pub fn new(params: &ProtocolParams) -> Result<Self> {
        let ensemble = params.ensemble()?;
        let bell = params.bell();
        let target = params.target_bell_index;
        let table = joint_table(&ensemble, &ensemble, &bell, target)?;
        Ok(Self {
            ensemble,
            bell,
            target,
            prob: table.entries,
        })
    }

    pub fn ensemble(&self) -> &StateEnsemble {
        &self.ensemble
    }

    pub fn bell(&self) -> &BellBasis {
        &self.bell
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Target-outcome probability for Alice's state against one of the
    /// honest states.
    pub fn probability(&self, alice: usize, bob: usize) -> f64 {
        self.prob[alice][bob]
    }

    pub fn verdict(&self, alice: usize, announcement: usize) -> ConclusiveVerdict {
        let c0 = self.ensemble.candidate(Basis::Computational, announcement);
        let c1 = self.ensemble.candidate(Basis::Rotated, announcement);
        let alive0 = self.prob[alice][c0] > ZERO_PROBABILITY;
        let alive1 = self.prob[alice][c1] > ZERO_PROBABILITY;
        match (alive0, alive1) {
            (true, true) => ConclusiveVerdict::inconclusive(),
            (false, false) => ConclusiveVerdict {
                degenerate: true,
                ..ConclusiveVerdict::inconclusive()
            },
            (true, false) => ConclusiveVerdict {
                conclusive: true,
                inferred_key_bit: Some(self.ensemble.basis_of(c0).key_bit()),
                excluded_candidate: Some(c1),
                degenerate: false,
            },
            (false, true) => ConclusiveVerdict {
                conclusive: true,
                inferred_key_bit: Some(self.ensemble.basis_of(c1).key_bit()),
                excluded_candidate: Some(c0),
                degenerate: false,
            },
        }
    }

    /// For each honest Bob state, the Alice states that can co-occur with it
    /// on the target outcome and leave her conclusive.
    pub fn conclusive_sets(&self) -> BTreeMap<String, BTreeSet<String>> {
        let e = &self.ensemble;
        (0..e.len())
            .map(|b| {
                let set = (0..e.len())
                    .filter(|&a| {
                        self.prob[a][b] > ZERO_PROBABILITY
                            && self.verdict(a, e.index_of(b)).conclusive
                    })
                    .map(|a| e.label(a).to_string())
                    .collect();
                (e.label(b).to_string(), set)
            })
            .collect()
    }

    fn zero_pattern(&self) -> Vec<Vec<bool>> {
        self.prob
            .iter()
            .map(|row| row.iter().map(|&p| p <= ZERO_PROBABILITY).collect())
            .collect()
    }
}

pub fn conclusive_verdict(
    alice_state: usize,
    announcement: usize,
    params: &ProtocolParams,
) -> Result<ConclusiveVerdict> {
    let sifter = Sifter::new(params)?;
    if alice_state >= sifter.ensemble.len() || announcement >= params.dim() {
        return Err(Error::InvalidParams(format!(
            "alice state {alice_state} / announcement {announcement} out of range"
        )));
    }
    Ok(sifter.verdict(alice_state, announcement))
}

pub fn conclusive_sets(params: &ProtocolParams) -> Result<BTreeMap<String, BTreeSet<String>>> {
    Ok(Sifter::new(params)?.conclusive_sets())
}

/// Checks that `params` can drive a protocol run: angles in the open
/// interval, and no table cell that is nonzero for generic angles has
/// collapsed below [`ZERO_PROBABILITY`]. A collapsed cell changes which
/// rounds are conclusive, so the sifting rules would no longer be the
/// protocol's.
pub fn check_protocol_params(params: &ProtocolParams) -> Result<()> {
    params.check_open_interval()?;
    let reference = match params.setting {
        Setting::Qubit { .. } => ProtocolParams::qubit(0.7)?,
        Setting::Qutrit { .. } => ProtocolParams::qutrit(1.0, 0.6)?,
        Setting::QutritFourier => return Ok(()),
    }
    .with_target(params.target_bell_index)?;
    let actual = Sifter::new(params)?.zero_pattern();
    let generic = Sifter::new(&reference)?.zero_pattern();
    if actual != generic {
        return Err(Error::Domain(format!(
            "angles {:?} are too close to a degenerate point: a sifting probability vanishes",
            params.setting
        )));
    }
    Ok(())
}
