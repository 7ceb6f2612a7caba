//! Test-side oracles. Nothing here calls into the library: states are built
//! from their amplitude formulas, probabilities from explicit overlap
//! formulas, and the tables and conclusive sets are transcribed by hand.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

pub const LABELS_QUTRIT: [&str; 6] = ["|0>", "|1>", "|2>", "|0'>", "|1'>", "|2'>"];
pub const LABELS_QUBIT: [&str; 4] = ["|0>", "|1>", "|0'>", "|1'>"];

fn s2(x: f64) -> f64 {
    x.sin().powi(2)
}

fn c2(x: f64) -> f64 {
    x.cos().powi(2)
}

/// `|0>, |1>, |2>, |0'>, |1'>, |2'>` as real amplitude triples.
pub fn qutrit_states(g1: f64, g2: f64) -> [[f64; 3]; 6] {
    let (s1, c1, s2_, c2_) = (g1.sin(), g1.cos(), g2.sin(), g2.cos());
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [c1, s1 * c2_, s1 * s2_],
        [-s1, c1 * c2_, c1 * s2_],
        [0.0, -s2_, c2_],
    ]
}

pub fn qutrit_middle(g1: f64, g2: f64) -> [[f64; 3]; 3] {
    let s = qutrit_states(g1 / 2.0, g2 / 2.0);
    [s[3], s[4], s[5]]
}

pub fn qubit_states(t: f64) -> [[f64; 2]; 4] {
    [
        [1.0, 0.0],
        [0.0, 1.0],
        [t.cos(), t.sin()],
        [t.sin(), -t.cos()],
    ]
}

pub fn qubit_middle(t: f64) -> [[f64; 2]; 2] {
    let s = qubit_states(t / 2.0);
    [s[2], s[3]]
}

/// Probability of `|φ0> = (|00>+|11>+|22>)/√3` for real product states.
pub fn phi0(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot * dot / 3.0
}

/// Probability of `|ψ⁻> = (|01>-|10>)/√2` for real product states.
pub fn psi_minus(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let x = a[0] * b[1] - a[1] * b[0];
    x * x / 2.0
}

/// Raw honest qutrit table in its published layout (Alice rows, Bob columns).
pub fn reference_table1(g1: f64, g2: f64) -> [[f64; 6]; 6] {
    let t = 1.0 / 3.0;
    let a = t * c2(g1);
    let b = t * s2(g1);
    let c = t * s2(g1) * c2(g2);
    let d = t * c2(g1) * c2(g2);
    let e = t * s2(g2);
    let f = t * s2(g1) * s2(g2);
    let g = t * c2(g1) * s2(g2);
    let h = t * c2(g2);
    [
        [t, 0.0, 0.0, a, b, 0.0],
        [0.0, t, 0.0, c, d, e],
        [0.0, 0.0, t, f, g, h],
        [a, c, f, t, 0.0, 0.0],
        [b, d, g, 0.0, t, 0.0],
        [0.0, e, h, 0.0, 0.0, t],
    ]
}

pub fn reference_table2(g1: f64, g2: f64) -> [[f64; 6]; 6] {
    let mut t = reference_table1(g1, g2);
    for row in &mut t {
        for x in row.iter_mut() {
            *x *= 1.5;
        }
    }
    t
}

pub fn reference_table3(t: f64) -> [[f64; 4]; 4] {
    let (s, c) = (0.5 * s2(t), 0.5 * c2(t));
    [
        [0.0, 0.5, s, c],
        [0.5, 0.0, c, s],
        [s, c, 0.0, 0.5],
        [c, s, 0.5, 0.0],
    ]
}

/// Published with Bob on the rows; stored here transposed
/// to Alice rows and Bob columns.
pub fn reference_table4(t: f64) -> [[f64; 2]; 4] {
    let (s, c) = (0.5 * s2(t / 2.0), 0.5 * c2(t / 2.0));
    [[s, c], [c, s], [s, c], [c, s]]
}

/// Normalized middle-state table (Alice rows, Bob `|0''>, |1''>, |2''>`).
pub fn reference_table5(g1: f64, g2: f64) -> [[f64; 3]; 6] {
    let (h1, h2) = (g1 / 2.0, g2 / 2.0);
    let x = g1.cos() * h1.cos() + g1.sin() * h1.sin() * h2.cos();
    let y = g1.cos() * h1.sin() - g1.sin() * h1.cos() * h2.cos();
    let z = g1.sin() * h1.cos() - g1.cos() * h1.sin() * h2.cos();
    let w = g1.sin() * h1.sin() + g1.cos() * h1.cos() * h2.cos();
    [
        [0.5 * c2(h1), 0.5 * s2(h1), 0.0],
        [0.5 * s2(h1) * c2(h2), 0.5 * c2(h1) * c2(h2), 0.5 * s2(h2)],
        [0.5 * s2(h1) * s2(h2), 0.5 * c2(h1) * s2(h2), 0.5 * c2(h2)],
        [0.5 * x * x, 0.5 * y * y, 0.5 * s2(g1) * s2(h2)],
        [0.5 * z * z, 0.5 * w * w, 0.5 * c2(g1) * s2(h2)],
        [0.5 * s2(h1) * s2(h2), 0.5 * c2(h1) * s2(h2), 0.5 * c2(h2)],
    ]
}

pub fn reference_table6() -> [[f64; 6]; 6] {
    let (t, n) = (1.0 / 3.0, 1.0 / 9.0);
    [
        [t, 0.0, 0.0, n, n, n],
        [0.0, t, 0.0, n, n, n],
        [0.0, 0.0, t, n, n, n],
        [n, n, n, t, 0.0, 0.0],
        [n, n, n, 0.0, t, 0.0],
        [n, n, n, 0.0, 0.0, t],
    ]
}

pub fn reference_table7() -> [[f64; 6]; 6] {
    let mut t = reference_table6();
    for row in &mut t {
        for x in row.iter_mut() {
            *x *= 1.5;
        }
    }
    t
}

/// Swaps Alice's `|1'>` and `|2'>` rows. The published Fourier tables
/// pair Alice's `|1'>` with Bob's `|1'>`; the bilinear overlap with
/// `|φ0>` pairs it with `|2'>` instead, since `|2'>` is the complex
/// conjugate of `|1'>`.
pub fn conjugate_alice_rows(t: [[f64; 6]; 6]) -> [[f64; 6]; 6] {
    let mut out = t;
    out.swap(4, 5);
    out
}

/// The six enumerated conclusive cases for the rotated qutrit protocol:
/// Bob's state, Alice's states that identify it.
pub fn reference_conclusive_sets() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("|0>", vec!["|1'>"]),
        ("|0'>", vec!["|1>", "|2>"]),
        ("|1>", vec!["|0'>", "|2'>"]),
        ("|1'>", vec!["|0>", "|2>"]),
        ("|2>", vec!["|0'>", "|1'>"]),
        ("|2'>", vec!["|1>"]),
    ]
}

/// Qubit: one identifying Alice state per Bob state.
pub fn reference_conclusive_sets_qubit() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("|0>", vec!["|0'>"]),
        ("|1>", vec!["|1'>"]),
        ("|0'>", vec!["|0>"]),
        ("|1'>", vec!["|1>"]),
    ]
}

/// Middle-state attack: Alice states that are conclusive for each of Bob's
/// middle states, with the bit she infers.
pub fn reference_attack_sets() -> [Vec<(usize, u8)>; 3] {
    [
        vec![(3, 0), (5, 0), (0, 1), (2, 1)],
        vec![(1, 1), (3, 0), (4, 0)],
        vec![(1, 1), (2, 1), (4, 0)],
    ]
}

fn index_qutrit(label: &str) -> usize {
    LABELS_QUTRIT.iter().position(|l| *l == label).unwrap()
}

fn index_qubit(label: &str) -> usize {
    LABELS_QUBIT.iter().position(|l| *l == label).unwrap()
}

/// `P(conclusive and φ0) / P(φ0)` with both parties uniform, from explicit
/// state vectors and the enumerated sets.
pub fn brute_force_rate_qutrit(g1: f64, g2: f64) -> f64 {
    let s = qutrit_states(g1, g2);
    let mut kept = 0.0;
    for a in &s {
        for b in &s {
            kept += phi0(a, b);
        }
    }
    let mut conclusive = 0.0;
    for (bob, alices) in reference_conclusive_sets() {
        let b = &s[index_qutrit(bob)];
        for a in alices {
            conclusive += phi0(&s[index_qutrit(a)], b);
        }
    }
    conclusive / kept
}

pub fn brute_force_rate_qubit(t: f64) -> f64 {
    let s = qubit_states(t);
    let mut kept = 0.0;
    for a in &s {
        for b in &s {
            kept += psi_minus(a, b);
        }
    }
    let mut conclusive = 0.0;
    for (bob, alices) in reference_conclusive_sets_qubit() {
        let b = &s[index_qubit(bob)];
        for a in alices {
            conclusive += psi_minus(&s[index_qubit(a)], b);
        }
    }
    conclusive / kept
}

/// Attack-mode conclusive rate and `(p0, p1)` for the `|0''>` instance,
/// from explicit middle states.
pub fn brute_force_attack_qutrit(g1: f64, g2: f64) -> (f64, f64, f64) {
    let s = qutrit_states(g1, g2);
    let m = qutrit_middle(g1, g2);
    let norm = 2.0 / 3.0;
    let sets = reference_attack_sets();
    let mut rate = 0.0;
    for (b, set) in sets.iter().enumerate() {
        for &(a, _) in set {
            rate += phi0(&s[a], &m[b]) / norm / 3.0;
        }
    }
    let (mut p0, mut p1) = (0.0, 0.0);
    for &(a, bit) in &sets[0] {
        let p = phi0(&s[a], &m[0]) / norm;
        if bit == 0 {
            p0 += p;
        } else {
            p1 += p;
        }
    }
    (rate, p0, p1)
}

pub fn closed_honest_qutrit(g1: f64, g2: f64) -> f64 {
    (2.0 * s2(g1) + 2.0 * s2(g2) - s2(g1) * s2(g2)) / 6.0
}

pub fn closed_honest_qubit(t: f64) -> f64 {
    s2(t) / 2.0
}

pub fn closed_attack_qutrit(g1: f64, g2: f64) -> f64 {
    let (h1, h2) = (g1 / 2.0, g2 / 2.0);
    let x = g1.cos() * h1.cos() + g1.sin() * h1.sin() * h2.cos();
    (2.0 + 2.0 * s2(h1) * s2(h2) + 2.0 * c2(h1) * c2(h2) + c2(g1) * s2(h2) + x * x) / 6.0
}

pub fn closed_attack_qubit(t: f64) -> f64 {
    c2(t / 2.0)
}

pub fn closed_p0_p1(g1: f64, g2: f64) -> (f64, f64) {
    let (h1, h2) = (g1 / 2.0, g2 / 2.0);
    let x = g1.cos() * h1.cos() + g1.sin() * h1.sin() * h2.cos();
    (
        0.5 * (x * x + s2(h1) * s2(h2)),
        0.5 * (c2(h1) + s2(h1) * s2(h2)),
    )
}

/// Angles strictly inside `(margin, π/2 − margin)`.
pub fn random_angles(seed: u64, n: usize, margin: f64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (
                rng.gen_range(margin..FRAC_PI_2 - margin),
                rng.gen_range(margin..FRAC_PI_2 - margin),
            )
        })
        .collect()
}

/// Binomial standard deviation of a proportion.
pub fn sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
