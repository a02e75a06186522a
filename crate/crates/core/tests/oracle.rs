//! Exhaustive enumeration over small prime fields as an independent oracle.

mod common;

use std::collections::HashSet;

use common::{all_vectors, brute_force_agrees, elements, matrix, span};
use lls_core::extension::enumerate_extensions;
use lls_core::instance::{fixtures, monomial_instance, random_refined, random_spec, SequenceSpec};
use lls_core::kernel::KernelModel;
use lls_core::matrix::Vector;
use lls_core::scalar::Field;
use lls_core::subspace::{map_kernel, map_preimage};
use proptest::prelude::*;

const F3: Field = Field::Prime(3);
const F5: Field = Field::Prime(5);

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_algebra_matches_enumeration(
        rows in 1usize..=3,
        cols in 1usize..=4,
        entries in prop::collection::vec(0i64..3, 12),
        w in prop::collection::vec(prop::collection::vec(0i64..3, 4), 0..3),
        u in prop::collection::vec(prop::collection::vec(0i64..3, 4), 0..3),
    ) {
        let a = matrix(F3, rows, cols, &entries);
        let every = all_vectors(F3, cols);
        let ker: HashSet<Vector> = every.iter().filter(|v| a.apply(v).unwrap().iter().all(|s| s.is_zero())).cloned().collect();
        prop_assert_eq!(elements(&map_kernel(&a)), ker);

        let target = if w.is_empty() { lls_core::subspace::Subspace::zero(F3, rows) } else { span(F3, rows, &w) };
        let pre: HashSet<Vector> = every.iter().filter(|v| target.contains(&a.apply(v).unwrap())).cloned().collect();
        prop_assert_eq!(elements(&map_preimage(&a, &target).unwrap()), pre);

        if !w.is_empty() && !u.is_empty() {
            let x = span(F3, cols, &w);
            let y = span(F3, cols, &u);
            let ex = elements(&x);
            let both: HashSet<Vector> = elements(&y).into_iter().filter(|v| ex.contains(v)).collect();
            prop_assert_eq!(elements(&x.intersect(&y).unwrap()), both);
        }
    }
}

#[test]
fn instances_over_f3_match_enumeration() {
    let mut count = 0;
    for d in 1..=3usize {
        let singles = (0..=d).map(|a| vec![a]);
        let pairs = (0..=d).flat_map(|a| (a + 1..=d).map(move |b| vec![a, b]));
        for exps in singles.chain(pairs) {
            let Ok(spec) = SequenceSpec::monomial(d, &exps) else { continue };
            let Ok(h) = monomial_instance(&spec, &exps, F3) else { continue };
            brute_force_agrees(&h).unwrap_or_else(|e| panic!("{exps:?} at d={d}: {e}"));
            count += 1;
        }
    }
    for seed in 0..4 {
        let spec = random_spec(3, 1, seed).unwrap();
        let h = random_refined(&spec, F3, seed).unwrap();
        brute_force_agrees(&h).unwrap();
        count += 1;
    }
    let h = fixtures::double_vanishing(3, &[1], F3).unwrap();
    brute_force_agrees(&h).unwrap();
    assert!(count >= 10);
}

#[test]
fn exhaustive_extension_counts_over_f5() {
    let unique = KernelModel::new(fixtures::unique_d4(F5).unwrap(), Default::default()).unwrap();
    assert_eq!(enumerate_extensions(&unique, 1 << 16).unwrap().len(), 1);
    let witness = KernelModel::new(fixtures::witness_d4(F5).unwrap(), Default::default()).unwrap();
    assert!(enumerate_extensions(&witness, 1 << 16).unwrap().len() >= 2);
}
