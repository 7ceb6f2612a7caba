//! Closed-form security quantities, their table-derived counterparts, and
//! grid scans over the qutrit angle square.
//!
//! The honest conclusive rate is the probability that Alice learns Bob's
//! key bit with certainty, conditioned on the kept Bell outcome. Table
//! routes compute it from normalized columns weighted uniformly over Bob's
//! states within a basis; this is exact because every column of the raw
//! tables has the same sum.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{Basis, ProtocolParams, StateSet, TOLERANCE};
use crate::sift::{joint_table, normalize_columns, Sifter, ZERO_PROBABILITY};

fn check_angle(name: &str, angle: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&angle) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {angle} outside [0, pi/2]")))
    }
}

fn sin2(x: f64) -> f64 {
    x.sin().powi(2)
}

fn cos2(x: f64) -> f64 {
    x.cos().powi(2)
}

/// `p(γ1, γ2) = (2 sin²γ1 + 2 sin²γ2 − sin²γ1 sin²γ2) / 6`
pub fn honest_rate_qutrit(gamma1: f64, gamma2: f64) -> Result<f64> {
    check_angle("gamma1", gamma1)?;
    check_angle("gamma2", gamma2)?;
    let (s1, s2) = (sin2(gamma1), sin2(gamma2));
    Ok((2.0 * s1 + 2.0 * s2 - s1 * s2) / 6.0)
}

/// `p'(θ) = sin²θ / 2`
pub fn honest_rate_qubit(theta: f64) -> Result<f64> {
    check_angle("theta", theta)?;
    Ok(sin2(theta) / 2.0)
}

/// Sign predicate of region R1: negative iff `p(γ1, γ2) < p'(γ1)`.
pub fn r1_predicate(gamma1: f64, gamma2: f64) -> f64 {
    let (s1, s2) = (sin2(gamma1), sin2(gamma2));
    -s1 + 2.0 * s2 - s1 * s2
}

/// Sign predicate of region R2: negative iff `p(γ1, γ2) < p'(γ2)`.
pub fn r2_predicate(gamma1: f64, gamma2: f64) -> f64 {
    let (s1, s2) = (sin2(gamma1), sin2(gamma2));
    2.0 * s1 - s2 - s1 * s2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regions {
    pub in_r1: bool,
    pub in_r2: bool,
}

pub fn region_membership(gamma1: f64, gamma2: f64) -> Result<Regions> {
    check_angle("gamma1", gamma1)?;
    check_angle("gamma2", gamma2)?;
    Ok(Regions {
        in_r1: r1_predicate(gamma1, gamma2) < 0.0,
        in_r2: r2_predicate(gamma1, gamma2) < 0.0,
    })
}

/// Region membership recomputed from the rates themselves.
pub fn regions_by_rate(gamma1: f64, gamma2: f64) -> Result<Regions> {
    let p = honest_rate_qutrit(gamma1, gamma2)?;
    Ok(Regions {
        in_r1: p < honest_rate_qubit(gamma1)?,
        in_r2: p < honest_rate_qubit(gamma2)?,
    })
}

/// Alice's conclusive rate when Bob sends the qutrit middle states.
pub fn attack_rate_qutrit(gamma1: f64, gamma2: f64) -> Result<f64> {
    check_angle("gamma1", gamma1)?;
    check_angle("gamma2", gamma2)?;
    let (h1, h2) = (gamma1 / 2.0, gamma2 / 2.0);
    let cross = cross_term(gamma1, gamma2);
    Ok((2.0
        + 2.0 * sin2(h1) * sin2(h2)
        + 2.0 * cos2(h1) * cos2(h2)
        + cos2(gamma1) * sin2(h2)
        + cross * cross)
        / 6.0)
}

/// `cos γ1 cos(γ1/2) + sin γ1 sin(γ1/2) cos(γ2/2)`, the overlap of `|0'>`
/// with `|0''>`.
fn cross_term(gamma1: f64, gamma2: f64) -> f64 {
    let h1 = gamma1 / 2.0;
    gamma1.cos() * h1.cos() + gamma1.sin() * h1.sin() * (gamma2 / 2.0).cos()
}

/// `cos²(θ/2)`
pub fn attack_rate_qubit(theta: f64) -> Result<f64> {
    check_angle("theta", theta)?;
    Ok(cos2(theta / 2.0))
}

/// Alice's chances of concluding bit 0 and bit 1 in one declared attack
/// instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitProbabilities {
    pub p0: f64,
    pub p1: f64,
}

impl BitProbabilities {
    /// Mismatch fraction when Bob records bit 1 for the instance.
    pub fn qber(&self) -> f64 {
        self.p0 / (self.p0 + self.p1)
    }
}

/// `(p0, p1)` for the instance where Bob sends `|0''>` and announces 1.
pub fn attack_bit_probabilities(gamma1: f64, gamma2: f64) -> Result<BitProbabilities> {
    check_angle("gamma1", gamma1)?;
    check_angle("gamma2", gamma2)?;
    let (h1, h2) = (gamma1 / 2.0, gamma2 / 2.0);
    let cross = cross_term(gamma1, gamma2);
    let tail = sin2(h1) * sin2(h2);
    Ok(BitProbabilities {
        p0: 0.5 * (cross * cross + tail),
        p1: 0.5 * (cos2(h1) + tail),
    })
}

/// Qubit analogue: both bits occur with probability `cos²(θ/2) / 2`.
pub fn attack_bit_probabilities_qubit(theta: f64) -> Result<BitProbabilities> {
    let half = attack_rate_qubit(theta)? / 2.0;
    Ok(BitProbabilities { p0: half, p1: half })
}

/// `p0 / (p0 + p1)` for the `|0''>` instance.
pub fn expected_attack_qber(gamma1: f64, gamma2: f64) -> Result<f64> {
    Ok(attack_bit_probabilities(gamma1, gamma2)?.qber())
}

/// Conclusive rate of the Fourier configuration, read off its normalized
/// table.
pub fn fourier_rate() -> f64 {
    honest_rate_from_table(&ProtocolParams::fourier()).expect("Fourier tables are well formed")
}

/// Qubit reference for the Fourier case: the Hadamard basis, `θ = π/4`.
pub fn fourier_qubit_reference() -> f64 {
    honest_rate_qubit(FRAC_PI_4).expect("pi/4 is in range")
}

/// `½ [Pr(A=0|B=0) + Pr(A=1|B=1)]` with
/// `Pr(A=k|B=k) = (1/d) Σ_{b in basis k} Σ_{a conclusive for b} T[a][b]`
/// over the normalized honest table `T`.
pub fn honest_rate_from_table(params: &ProtocolParams) -> Result<f64> {
    let sifter = Sifter::new(params)?;
    let e = sifter.ensemble();
    let raw = joint_table(e, e, sifter.bell(), sifter.target())?;
    let table = normalize_columns(&raw)?;
    let d = e.dim() as f64;
    let per_basis = |basis: Basis| -> f64 {
        e.basis_indices(basis)
            .map(|b| {
                (0..e.len())
                    .filter(|&a| {
                        raw.get(a, b) > ZERO_PROBABILITY
                            && sifter.verdict(a, e.index_of(b)).conclusive
                    })
                    .map(|a| table.get(a, b))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / d
    };
    Ok(0.5 * (per_basis(Basis::Computational) + per_basis(Basis::Rotated)))
}

/// Announcement a dishonest Bob makes after sending middle state `index`:
/// `|0''>→1, |1''>→2, |2''>→0` for qutrits and `|0''>→1, |1''>→0` for qubits.
pub fn attack_announcement(dim: usize, index: usize) -> usize {
    (index + 1) % dim
}

/// What Alice concludes, per declared attack instance, under the
/// normalized middle-state table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackInstance {
    pub middle_state: usize,
    pub announcement: usize,
    pub bits: BitProbabilities,
    /// Mass of rounds where Alice rules out both candidates.
    pub degenerate: f64,
    /// Key bit Bob records; `None` when both bits are equally likely and he
    /// must insert one at random.
    pub bob_bit: Option<u8>,
}

impl AttackInstance {
    pub fn conclusive(&self) -> f64 {
        self.bits.p0 + self.bits.p1
    }

    /// Expected mismatch mass between Alice's and Bob's bits.
    pub fn mismatch(&self) -> f64 {
        match self.bob_bit {
            Some(0) => self.bits.p1,
            Some(_) => self.bits.p0,
            None => 0.5 * self.conclusive(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackProfile {
    pub instances: Vec<AttackInstance>,
}

impl AttackProfile {
    /// Conclusive rate among kept rounds; Bob's states are equally likely
    /// given the kept outcome because every middle column has the same sum.
    pub fn conclusive_rate(&self) -> f64 {
        self.instances
            .iter()
            .map(AttackInstance::conclusive)
            .sum::<f64>()
            / self.instances.len() as f64
    }

    /// Mismatch fraction over all conclusive rounds.
    pub fn expected_qber(&self) -> f64 {
        let mismatch: f64 = self.instances.iter().map(AttackInstance::mismatch).sum();
        let conclusive: f64 = self.instances.iter().map(AttackInstance::conclusive).sum();
        mismatch / conclusive
    }
}

/// Builds the per-instance picture from the middle-state table. Bob records
/// the bit Alice is more likely to conclude, which for `|0''>` is always 1.
pub fn attack_profile(params: &ProtocolParams) -> Result<AttackProfile> {
    let sifter = Sifter::new(params)?;
    let middle = params.middle_states()?;
    let e = sifter.ensemble();
    let raw = joint_table(e, &middle, sifter.bell(), sifter.target())?;
    let table = normalize_columns(&raw)?;
    let dim = params.dim();
    let instances = (0..middle.len())
        .map(|m| {
            let announcement = attack_announcement(dim, m);
            let mut bits = BitProbabilities { p0: 0.0, p1: 0.0 };
            let mut degenerate = 0.0;
            for a in 0..e.len() {
                if raw.get(a, m) <= ZERO_PROBABILITY {
                    continue;
                }
                let v = sifter.verdict(a, announcement);
                match v.inferred_key_bit {
                    Some(0) => bits.p0 += table.get(a, m),
                    Some(_) => bits.p1 += table.get(a, m),
                    None if v.degenerate => degenerate += table.get(a, m),
                    None => {}
                }
            }
            let bob_bit = if (bits.p0 - bits.p1).abs() <= TOLERANCE {
                None
            } else if bits.p1 > bits.p0 {
                Some(1)
            } else {
                Some(0)
            };
            AttackInstance {
                middle_state: m,
                announcement,
                bits,
                degenerate,
                bob_bit,
            }
        })
        .collect();
    Ok(AttackProfile { instances })
}

pub fn attack_rate_from_table(params: &ProtocolParams) -> Result<f64> {
    Ok(attack_profile(params)?.conclusive_rate())
}

/// Probability that a round yields the kept Bell outcome, with both parties
/// choosing their honest states uniformly.
pub fn retention_probability(params: &ProtocolParams) -> Result<f64> {
    let sifter = Sifter::new(params)?;
    let e = sifter.ensemble();
    let t = joint_table(e, e, sifter.bell(), sifter.target())?;
    let n = (e.len() * e.len()) as f64;
    Ok(t.entries.iter().flatten().sum::<f64>() / n)
}

/// Same, with Bob sending middle states.
pub fn attack_retention_probability(params: &ProtocolParams) -> Result<f64> {
    let sifter = Sifter::new(params)?;
    let middle = params.middle_states()?;
    let e = sifter.ensemble();
    let t = joint_table(e, &middle, sifter.bell(), sifter.target())?;
    let n = (e.len() * middle.states().len()) as f64;
    Ok(t.entries.iter().flatten().sum::<f64>() / n)
}

/// All closed-form quantities at one angle pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecuritySummary {
    pub gamma1: f64,
    pub gamma2: f64,
    pub p: f64,
    pub p_prime_g1: f64,
    pub p_prime_g2: f64,
    pub in_r1: bool,
    pub in_r2: bool,
    pub p_c_mid: f64,
    pub p0: f64,
    pub p1: f64,
    pub qber_expected: f64,
}

pub fn security_summary(gamma1: f64, gamma2: f64) -> Result<SecuritySummary> {
    let regions = region_membership(gamma1, gamma2)?;
    let bits = attack_bit_probabilities(gamma1, gamma2)?;
    Ok(SecuritySummary {
        gamma1,
        gamma2,
        p: honest_rate_qutrit(gamma1, gamma2)?,
        p_prime_g1: honest_rate_qubit(gamma1)?,
        p_prime_g2: honest_rate_qubit(gamma2)?,
        in_r1: regions.in_r1,
        in_r2: regions.in_r2,
        p_c_mid: attack_rate_qutrit(gamma1, gamma2)?,
        p0: bits.p0,
        p1: bits.p1,
        qber_expected: bits.qber(),
    })
}

/// Uniformly spaced sample points along one angle axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

/// Points per axis of the default scan.
pub const DEFAULT_GRID_POINTS: usize = 65;

impl Axis {
    /// `count` points strictly inside `(lo, hi)`, spaced `(hi − lo)/(count + 1)`.
    pub fn open(lo: f64, hi: f64, count: usize) -> Result<Self> {
        check_range(lo, hi)?;
        if count == 0 {
            return Err(Error::EmptyGrid);
        }
        let step = (hi - lo) / (count + 1) as f64;
        Ok(Self {
            start: lo + step,
            step,
            count,
        })
    }

    /// Points `lo + k·step`, `k ≥ 1`, strictly below `hi`.
    pub fn stepped(lo: f64, hi: f64, step: f64) -> Result<Self> {
        check_range(lo, hi)?;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParams(format!(
                "step must be positive, got {step}"
            )));
        }
        let span = (hi - lo) / step;
        // the endpoint itself is excluded even when it lands on the lattice
        let count = (span - 1e-9).ceil().max(0.0) as usize - 1;
        if count == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(Self {
            start: lo + step,
            step,
            count,
        })
    }

    pub fn default_open() -> Self {
        Self::open(0.0, FRAC_PI_2, DEFAULT_GRID_POINTS).expect("default axis")
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.value(i))
    }
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    check_angle("range start", lo)?;
    check_angle("range end", hi)?;
    if lo >= hi {
        return Err(Error::Domain(format!("degenerate range [{lo}, {hi}]")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridScan {
    pub gamma1_axis: Axis,
    pub gamma2_axis: Axis,
    /// Row-major: all `γ2` values for the first `γ1`, then the next.
    pub cells: Vec<SecuritySummary>,
}

pub const SCAN_COLUMNS: &str =
    "gamma1,gamma2,p,p_prime_g1,p_prime_g2,in_R1,in_R2,p_c_mid,p0,p1,qber_expected";

pub fn grid_scan(gamma1_axis: Axis, gamma2_axis: Axis) -> Result<GridScan> {
    if gamma1_axis.count == 0 || gamma2_axis.count == 0 {
        return Err(Error::EmptyGrid);
    }
    let n2 = gamma2_axis.count;
    let cells = (0..gamma1_axis.count * n2)
        .into_par_iter()
        .map(|cell| security_summary(gamma1_axis.value(cell / n2), gamma2_axis.value(cell % n2)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridScan {
        gamma1_axis,
        gamma2_axis,
        cells,
    })
}
