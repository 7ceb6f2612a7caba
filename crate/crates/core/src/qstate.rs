//! Complex state vectors for qubits and qutrits, the state ensembles used by
//! the protocol, and generalized Bell-state measurement probabilities.
//!
//! Bipartite vectors use a row-major layout: the amplitude of `|r> ⊗ |c>`
//! sits at index `r * d + c`. Throughout the crate the first slot holds
//! Bob's photon and the second slot Alice's.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for exactness assertions (norms, orthogonality, closed forms).
pub const TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A unit vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a state, rejecting vectors whose squared norm is not 1 within
    /// [`TOLERANCE`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        let norm: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// The computational basis vector `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self ⊗ other` in row-major layout.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        StateVector { amplitudes }
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Which of the two preparation bases a state belongs to. The basis is the
/// raw key bit the state encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Computational,
    Rotated,
}

impl Basis {
    pub fn key_bit(self) -> u8 {
        match self {
            Basis::Computational => 0,
            Basis::Rotated => 1,
        }
    }
}

/// Labelled list of states, so tables can carry their row and column names.
pub trait StateSet {
    fn labels(&self) -> &[String];
    fn states(&self) -> &[StateVector];
}

/// The `2·dim` honest preparation states: the computational basis followed
/// by the rotated basis, in announcement order.
#[derive(Clone, Debug, Serialize)]
pub struct StateEnsemble {
    dim: usize,
    states: Vec<StateVector>,
    labels: Vec<String>,
    basis_of: Vec<Basis>,
    index_of: Vec<usize>,
}

impl StateEnsemble {
    fn from_rotated(dim: usize, rotated: Vec<StateVector>) -> Self {
        let mut states: Vec<_> = (0..dim).map(|i| StateVector::basis(dim, i)).collect();
        states.extend(rotated);
        let labels = (0..dim)
            .map(|i| format!("|{i}>"))
            .chain((0..dim).map(|i| format!("|{i}'>")))
            .collect();
        let basis_of = (0..2 * dim)
            .map(|i| {
                if i < dim {
                    Basis::Computational
                } else {
                    Basis::Rotated
                }
            })
            .collect();
        let index_of = (0..2 * dim).map(|i| i % dim).collect();
        Self {
            dim,
            states,
            labels,
            basis_of,
            index_of,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &StateVector {
        &self.states[index]
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn basis_of(&self, index: usize) -> Basis {
        self.basis_of[index]
    }

    /// The trit (or bit) Bob announces after sending this state.
    pub fn index_of(&self, index: usize) -> usize {
        self.index_of[index]
    }

    /// Ensemble index of the state in `basis` carrying `announcement`.
    pub fn candidate(&self, basis: Basis, announcement: usize) -> usize {
        match basis {
            Basis::Computational => announcement,
            Basis::Rotated => self.dim + announcement,
        }
    }

    /// Indices of the states in one basis, in announcement order.
    pub fn basis_indices(&self, basis: Basis) -> std::ops::Range<usize> {
        match basis {
            Basis::Computational => 0..self.dim,
            Basis::Rotated => self.dim..2 * self.dim,
        }
    }
}

impl StateSet for StateEnsemble {
    fn labels(&self) -> &[String] {
        &self.labels
    }
    fn states(&self) -> &[StateVector] {
        &self.states
    }
}

/// States a dishonest Bob sends in the middle-state attack.
#[derive(Clone, Debug, Serialize)]
pub struct MiddleStates {
    states: Vec<StateVector>,
    labels: Vec<String>,
}

impl MiddleStates {
    fn new(states: Vec<StateVector>) -> Self {
        let labels = (0..states.len()).map(|i| format!("|{i}''>")).collect();
        Self { states, labels }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &StateVector {
        &self.states[index]
    }
}

impl StateSet for MiddleStates {
    fn labels(&self) -> &[String] {
        &self.labels
    }
    fn states(&self) -> &[StateVector] {
        &self.states
    }
}

fn check_closed_angle(name: &str, angle: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&angle) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {angle} outside [0, pi/2]")))
    }
}

/// Unit vector `cos a |0> + sin a cos b |1> + sin a sin b |2>` together with
/// its two orthogonal companions, as rows of a real rotation.
fn qutrit_rotation(a: f64, b: f64) -> [[f64; 3]; 3] {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    [
        [ca, sa * cb, sa * sb],
        [-sa, ca * cb, ca * sb],
        [0.0, -sb, cb],
    ]
}

fn real_states(rows: &[[f64; 3]]) -> Vec<StateVector> {
    rows.iter()
        .map(|r| StateVector::from_real(r).expect("rotation rows are unit vectors"))
        .collect()
}

/// The six-state qutrit ensemble `{|0>,|1>,|2>,|0'>,|1'>,|2'>}` where the
/// primed states are the rows of the two-angle rotation.
pub fn rotated_qutrit_basis(gamma1: f64, gamma2: f64) -> Result<StateEnsemble> {
    check_closed_angle("gamma1", gamma1)?;
    check_closed_angle("gamma2", gamma2)?;
    let rotated = real_states(&qutrit_rotation(gamma1, gamma2));
    Ok(StateEnsemble::from_rotated(3, rotated))
}

/// Bob's attack states `|0''>,|1''>,|2''>`: the rotated basis at half angles.
pub fn middle_qutrit_basis(gamma1: f64, gamma2: f64) -> Result<MiddleStates> {
    check_closed_angle("gamma1", gamma1)?;
    check_closed_angle("gamma2", gamma2)?;
    let states = real_states(&qutrit_rotation(gamma1 / 2.0, gamma2 / 2.0));
    Ok(MiddleStates::new(states))
}

/// Computational basis plus the discrete-Fourier basis, listed as
/// `|j'> = (1/√3) Σ_m ω^{-jm} |m>` with `ω = e^{2πi/3}`.
pub fn fourier_basis() -> StateEnsemble {
    let scale = 1.0 / 3f64.sqrt();
    let rotated = (0..3)
        .map(|j| {
            let amplitudes = (0..3)
                .map(|m| Complex64::from_polar(scale, -2.0 * PI * ((j * m) % 3) as f64 / 3.0))
                .collect();
            StateVector { amplitudes }
        })
        .collect();
    StateEnsemble::from_rotated(3, rotated)
}

/// Honest qubit ensemble `{|0>,|1>,|0'>,|1'>}` with
/// `|0'> = cos θ|0> + sin θ|1>` and `|1'> = sin θ|0> − cos θ|1>`.
pub fn qubit_bases(theta: f64) -> Result<StateEnsemble> {
    check_closed_angle("theta", theta)?;
    Ok(StateEnsemble::from_rotated(2, qubit_pair(theta)))
}

/// Qubit attack states: the honest rotated pair at half angle.
pub fn qubit_middle_states(theta: f64) -> Result<MiddleStates> {
    check_closed_angle("theta", theta)?;
    Ok(MiddleStates::new(qubit_pair(theta / 2.0)))
}

fn qubit_pair(theta: f64) -> Vec<StateVector> {
    let (s, c) = theta.sin_cos();
    vec![
        StateVector::from_real(&[c, s]).expect("unit"),
        StateVector::from_real(&[s, -c]).expect("unit"),
    ]
}

/// The `d²` maximally entangled states
/// `|φ_{dk+l}> = (1/√d) Σ_m ω^{ml} |m+k, m>`, `ω = e^{2πi/d}`.
#[derive(Clone, Debug, Serialize)]
pub struct BellBasis {
    dim: usize,
    states: Vec<StateVector>,
    omega: Complex64,
}

/// Index of `|φ0> = (|00>+|11>+|22>)/√3`.
pub const PHI0: usize = 0;
/// Index of the qubit member with `k = l = 1`, which is `−|ψ⁻>`.
pub const PSI_MINUS: usize = 3;

pub fn bell_basis(dim: usize) -> Result<BellBasis> {
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let omega = Complex64::from_polar(1.0, 2.0 * PI / dim as f64);
    let scale = 1.0 / (dim as f64).sqrt();
    let mut states = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        for l in 0..dim {
            let mut amplitudes = vec![ZERO; dim * dim];
            for m in 0..dim {
                let phase = 2.0 * PI * ((m * l) % dim) as f64 / dim as f64;
                amplitudes[((m + k) % dim) * dim + m] = Complex64::from_polar(scale, phase);
            }
            states.push(StateVector { amplitudes });
        }
    }
    Ok(BellBasis { dim, states, omega })
}

impl BellBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &StateVector {
        &self.states[index]
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }
}

/// `|<φ_outcome| first ⊗ second>|²`. Callers put Bob's state first.
pub fn bsm_probability(
    first: &StateVector,
    second: &StateVector,
    bell: &BellBasis,
    outcome: usize,
) -> Result<f64> {
    check_dim(bell.dim, first.dim())?;
    check_dim(bell.dim, second.dim())?;
    if outcome >= bell.len() {
        return Err(Error::InvalidParams(format!(
            "Bell outcome {outcome} out of range 0..{}",
            bell.len()
        )));
    }
    Ok(overlap_sqr(bell.state(outcome), first, second))
}

/// Probabilities of all `d²` Bell outcomes for the product `first ⊗ second`.
pub fn bsm_distribution(
    first: &StateVector,
    second: &StateVector,
    bell: &BellBasis,
) -> Result<Vec<f64>> {
    check_dim(bell.dim, first.dim())?;
    check_dim(bell.dim, second.dim())?;
    Ok(bell
        .states
        .iter()
        .map(|phi| overlap_sqr(phi, first, second))
        .collect())
}

fn overlap_sqr(phi: &StateVector, first: &StateVector, second: &StateVector) -> f64 {
    let d = first.dim();
    let mut acc = ZERO;
    for (r, a) in first.amplitudes.iter().enumerate() {
        for (c, b) in second.amplitudes.iter().enumerate() {
            acc += phi.amplitudes[r * d + c].conj() * a * b;
        }
    }
    acc.norm_sqr()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Rotated,
    Fourier,
}

/// Basis parameters of one protocol configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Setting {
    Qubit { theta: f64 },
    Qutrit { gamma1: f64, gamma2: f64 },
    QutritFourier,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub setting: Setting,
    /// The Bell outcome Alice keeps.
    pub target_bell_index: usize,
}

impl ProtocolParams {
    pub fn qutrit(gamma1: f64, gamma2: f64) -> Result<Self> {
        check_closed_angle("gamma1", gamma1)?;
        check_closed_angle("gamma2", gamma2)?;
        Ok(Self {
            setting: Setting::Qutrit { gamma1, gamma2 },
            target_bell_index: PHI0,
        })
    }

    pub fn qubit(theta: f64) -> Result<Self> {
        check_closed_angle("theta", theta)?;
        Ok(Self {
            setting: Setting::Qubit { theta },
            target_bell_index: PSI_MINUS,
        })
    }

    pub fn fourier() -> Self {
        Self {
            setting: Setting::QutritFourier,
            target_bell_index: PHI0,
        }
    }

    pub fn with_target(mut self, target: usize) -> Result<Self> {
        let d = self.dim();
        if target >= d * d {
            return Err(Error::InvalidParams(format!(
                "target Bell index {target} out of range 0..{}",
                d * d
            )));
        }
        self.target_bell_index = target;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match self.setting {
            Setting::Qubit { .. } => 2,
            Setting::Qutrit { .. } | Setting::QutritFourier => 3,
        }
    }

    pub fn ensemble_kind(&self) -> EnsembleKind {
        match self.setting {
            Setting::QutritFourier => EnsembleKind::Fourier,
            _ => EnsembleKind::Rotated,
        }
    }

    pub fn ensemble(&self) -> Result<StateEnsemble> {
        match self.setting {
            Setting::Qubit { theta } => qubit_bases(theta),
            Setting::Qutrit { gamma1, gamma2 } => rotated_qutrit_basis(gamma1, gamma2),
            Setting::QutritFourier => Ok(fourier_basis()),
        }
    }

    /// Attack states; the Fourier configuration has none.
    pub fn middle_states(&self) -> Result<MiddleStates> {
        match self.setting {
            Setting::Qubit { theta } => qubit_middle_states(theta),
            Setting::Qutrit { gamma1, gamma2 } => middle_qutrit_basis(gamma1, gamma2),
            Setting::QutritFourier => Err(Error::InvalidParams(
                "the middle-state attack is defined for the rotated ensembles only".into(),
            )),
        }
    }

    pub fn bell(&self) -> BellBasis {
        bell_basis(self.dim()).expect("dimension is 2 or 3")
    }

    /// Protocol runs draw angles from the open interval `(0, π/2)`.
    pub fn check_open_interval(&self) -> Result<()> {
        let open = |name: &str, a: f64| {
            if a > 0.0 && a < FRAC_PI_2 {
                Ok(())
            } else {
                Err(Error::Domain(format!(
                    "{name} = {a} outside the open interval (0, pi/2)"
                )))
            }
        };
        match self.setting {
            Setting::Qubit { theta } => open("theta", theta),
            Setting::Qutrit { gamma1, gamma2 } => {
                open("gamma1", gamma1)?;
                open("gamma2", gamma2)
            }
            Setting::QutritFourier => Ok(()),
        }
    }
}
