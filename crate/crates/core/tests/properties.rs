use std::collections::BTreeMap;

use msset::decompose::{shuffle_filtration, step_block, verify, PushoutCertificate};
use msset::marked::{closure_2of3, closure_2of6, flat, sharp, tensor, MarkedSSet};
use msset::nucat::{segal_defect, NuCat};
use msset::sset::standard;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn simplex(n: usize, marked: bool) -> MarkedSSet {
    if marked {
        sharp(standard(n))
    } else {
        flat(standard(n))
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn tensor_is_associative(a in 0usize..=2, b in 0usize..=2, c in 0usize..=2, ma: bool, mb: bool, mc: bool) {
        prop_assume!(a + b + c <= 4);
        let (x, y, z) = (simplex(a, ma), simplex(b, mb), simplex(c, mc));
        let left = tensor(&tensor(&x, &y).unwrap(), &z).unwrap();
        let right = tensor(&x, &tensor(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left.labeled_form(), right.labeled_form());
    }

    #[test]
    fn shuffle_certificates_survive_block_permutation(m in 1usize..=2, n in 2usize..=3, l_seed in 0usize..4, seed: u64) {
        let l = l_seed % (n + 1);
        let cert = shuffle_filtration(m, n, l).unwrap();
        let mut blocks: BTreeMap<(usize, i64), Vec<_>> = BTreeMap::new();
        for s in &cert.steps {
            blocks.entry(step_block(s, m, n, l).unwrap()).or_default().push(s.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut steps = Vec::new();
        for (_, mut b) in blocks {
            b.shuffle(&mut rng);
            steps.extend(b);
        }
        let permuted = PushoutCertificate { steps, ..cert };
        prop_assert!(verify(&permuted).ok());
    }

    #[test]
    fn two_of_six_contains_two_of_three(edges in proptest::collection::btree_set(0usize..6, 0..6)) {
        let w = MarkedSSet::new(standard(3), edges).unwrap();
        let a = closure_2of3(&w);
        let b = closure_2of6(&w);
        prop_assert!(a.marking().is_subset(b.marking()));
        prop_assert_eq!(closure_2of3(&a), a);
    }

    #[test]
    fn group_nerves_are_segal(order in 1usize..=4, depth in 2usize..=4) {
        let g = NuCat::cyclic_group(order).unwrap();
        prop_assert!(segal_defect(&g.nerve(depth), depth).unwrap().is_empty());
    }
}
