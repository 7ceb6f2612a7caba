mod common;

use std::f64::consts::FRAC_PI_2;

use mdiqpq::analysis::{
    attack_bit_probabilities, attack_profile, attack_rate_qutrit, honest_rate_from_table,
    honest_rate_qutrit, region_membership, regions_by_rate,
};
use mdiqpq::protocol::{one_time_pad, run_sift, shift_key, BobStrategy};
use mdiqpq::qstate::{
    bell_basis, bsm_distribution, bsm_probability, middle_qutrit_basis, rotated_qutrit_basis,
    ProtocolParams, StateSet, StateVector, PHI0,
};
use mdiqpq::sift::{joint_table, normalize_columns, Sifter};
use num_complex::Complex64;
use proptest::prelude::*;

use common::*;

const OPEN: std::ops::Range<f64> = 1e-3..(FRAC_PI_2 - 1e-3);

fn state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| {
            v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
        })
        .prop_map(|v| {
            let z: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let n = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            StateVector::new(z.into_iter().map(|c| c / n).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bell_outcomes_complete_qutrit(a in state(3), b in state(3)) {
        let total: f64 = bsm_distribution(&a, &b, &bell_basis(3).unwrap()).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bell_outcomes_complete_qubit(a in state(2), b in state(2)) {
        let total: f64 = bsm_distribution(&a, &b, &bell_basis(2).unwrap()).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn phi0_exchange_symmetric(a in state(3), b in state(3)) {
        let bell = bell_basis(3).unwrap();
        let ab = bsm_probability(&a, &b, &bell, PHI0).unwrap();
        let ba = bsm_probability(&b, &a, &bell, PHI0).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ensembles_orthonormal(g1 in 0.0..=FRAC_PI_2, g2 in 0.0..=FRAC_PI_2) {
        let e = rotated_qutrit_basis(g1, g2).unwrap();
        let m = middle_qutrit_basis(g1, g2).unwrap();
        for basis in [&e.states()[..3], &e.states()[3..], m.states()] {
            for (i, u) in basis.iter().enumerate() {
                for (j, v) in basis.iter().enumerate() {
                    let g = u.inner(v).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((g.re - want).abs() <= 1e-12 && g.im.abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn states_match_oracle(g1 in 0.0..=FRAC_PI_2, g2 in 0.0..=FRAC_PI_2) {
        let e = rotated_qutrit_basis(g1, g2).unwrap();
        let m = middle_qutrit_basis(g1, g2).unwrap();
        let want = qutrit_states(g1, g2);
        let want_mid = qutrit_middle(g1, g2);
        for (s, w) in e.states().iter().zip(want.iter()).chain(m.states().iter().zip(want_mid.iter())) {
            for (z, x) in s.amplitudes().iter().zip(w) {
                prop_assert!((z.re - x).abs() <= 1e-15 && z.im == 0.0);
            }
        }
    }

    #[test]
    fn column_sums_are_protocol_constants(g1 in OPEN, g2 in OPEN) {
        let e = rotated_qutrit_basis(g1, g2).unwrap();
        let m = middle_qutrit_basis(g1, g2).unwrap();
        let bell = bell_basis(3).unwrap();
        for t in [joint_table(&e, &e, &bell, PHI0).unwrap(), joint_table(&e, &m, &bell, PHI0).unwrap()] {
            for s in t.column_sums() {
                prop_assert!((s - 2.0 / 3.0).abs() <= 1e-12);
            }
            let n = normalize_columns(&t).unwrap();
            for s in n.column_sums() {
                prop_assert!((s - 1.0).abs() <= 1e-12);
            }
            prop_assert!(n.entries.iter().flatten().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
        }
    }

    #[test]
    fn honest_rate_three_ways(g1 in OPEN, g2 in OPEN) {
        let p = honest_rate_qutrit(g1, g2).unwrap();
        let table = honest_rate_from_table(&ProtocolParams::qutrit(g1, g2).unwrap()).unwrap();
        prop_assert!((p - table).abs() <= 1e-12);
        prop_assert!((p - brute_force_rate_qutrit(g1, g2)).abs() <= 1e-12);
    }

    #[test]
    fn attack_quantities_match_oracle(g1 in OPEN, g2 in OPEN) {
        let (rate, p0, p1) = brute_force_attack_qutrit(g1, g2);
        prop_assert!((attack_rate_qutrit(g1, g2).unwrap() - rate).abs() <= 1e-12);
        prop_assert!((attack_rate_qutrit(g1, g2).unwrap() - closed_attack_qutrit(g1, g2)).abs() <= 1e-12);
        let b = attack_bit_probabilities(g1, g2).unwrap();
        prop_assert!((b.p0 - p0).abs() <= 1e-12 && (b.p1 - p1).abs() <= 1e-12);
        prop_assert!(b.p0 < b.p1);
        let profile = attack_profile(&ProtocolParams::qutrit(g1, g2).unwrap()).unwrap();
        prop_assert!((profile.conclusive_rate() - rate).abs() <= 1e-12);
        prop_assert_eq!(profile.instances[0].bob_bit, Some(1));
    }

    #[test]
    fn attack_dominates_honest(g1 in OPEN, g2 in OPEN) {
        prop_assert!(attack_rate_qutrit(g1, g2).unwrap() > honest_rate_qutrit(g1, g2).unwrap());
    }

    #[test]
    fn region_predicates_sound(g1 in OPEN, g2 in OPEN) {
        prop_assert_eq!(region_membership(g1, g2).unwrap(), regions_by_rate(g1, g2).unwrap());
    }

    #[test]
    fn honest_conclusive_bits_correct(g1 in OPEN, g2 in OPEN) {
        // exhaustive over (Alice, Bob) pairs with nonzero target probability
        let params = ProtocolParams::qutrit(g1, g2).unwrap();
        let sifter = Sifter::new(&params).unwrap();
        let e = sifter.ensemble();
        for b in 0..e.len() {
            for a in 0..e.len() {
                if sifter.probability(a, b) <= 1e-12 {
                    continue;
                }
                let v = sifter.verdict(a, e.index_of(b));
                prop_assert!(!v.degenerate);
                if let Some(bit) = v.inferred_key_bit {
                    prop_assert_eq!(bit, e.basis_of(b).key_bit());
                }
            }
        }
    }

    #[test]
    fn pad_involution(bits in prop::collection::vec(0u8..=1, 1..200), seed in any::<u64>()) {
        let key: Vec<u8> = bits.iter().enumerate().map(|(i, _)| ((seed >> (i % 64)) & 1) as u8).collect();
        let c = one_time_pad(&bits, &key).unwrap();
        prop_assert_eq!(one_time_pad(&c, &key).unwrap(), bits);
    }

    #[test]
    fn shift_moves_position(len in 1usize..100, j in 0usize..100, i in 0usize..100) {
        let (j, i) = (j % len, i % len);
        let key: Vec<u8> = (0..len).map(|t| u8::from(t == j)).collect();
        let shifted = shift_key(&key, (j + len - i) % len);
        prop_assert_eq!(shifted[i], 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), g1 in OPEN, g2 in OPEN) {
        let params = ProtocolParams::qutrit(g1, g2).unwrap();
        for strategy in [BobStrategy::Honest, BobStrategy::MiddleAttack] {
            let a = run_sift(&params, 3000, strategy, seed).unwrap();
            let b = run_sift(&params, 3000, strategy, seed).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.rounds.iter().all(|r| r.bsm_outcome == params.target_bell_index));
            for (pos, r) in a.rounds.iter().enumerate() {
                prop_assert_eq!(a.record.alice_known.get(&pos).copied(), r.verdict.inferred_key_bit);
            }
        }
    }
}
