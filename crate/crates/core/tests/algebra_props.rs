use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qdiff::calculi::{shipped_calculi, tensor_factors, Calculus};
use qdiff::galgebra::check_order_independence;
use qdiff::sampling::{random_element, random_homogeneous, random_tensor_element, random_tensor_pairs, SampleShape};
use qdiff::tensor::TensorContext;
use qdiff::RootExponent;
use std::sync::{Arc, OnceLock};

fn calculi() -> &'static [Calculus] {
    static CALCULI: OnceLock<Vec<Calculus>> = OnceLock::new();
    CALCULI.get_or_init(|| shipped_calculi().unwrap())
}

fn shape() -> SampleShape {
    SampleShape {
        max_len: 4,
        max_degree: 4,
        ..SampleShape::default()
    }
}

fn context(n: u32, k: i64) -> TensorContext {
    let (a, b) = tensor_factors(n).unwrap();
    TensorContext::new(
        Arc::new(a.differential().clone()),
        Arc::new(b.differential().clone()),
        RootExponent::new(n, k).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normal_forms_are_stable(seed in any::<u64>(), which in 0usize..7) {
        let cal = &calculi()[which];
        let ds = cal.differential();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_element(&mut rng, cal.signature(), cal.modulus(), &shape());
        let once = ds.normalize(&e).unwrap();
        prop_assert_eq!(ds.normalize(&once).unwrap(), once.clone());
        let report = check_order_independence(cal.rules(), &[e], 4, &mut rng).unwrap();
        prop_assert!(report.passed(), "{}", cal.label());
    }

    #[test]
    fn normalized_product_is_associative(seed in any::<u64>(), which in 0usize..7) {
        let cal = &calculi()[which];
        let ds = cal.differential();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sig, n) = (cal.signature(), cal.modulus());
        let [a, b, c] = [0, 1, 2].map(|_| random_element(&mut rng, sig, n, &shape()));
        let ab = ds.normalize(&a.mul(&b).unwrap()).unwrap();
        let bc = ds.normalize(&b.mul(&c).unwrap()).unwrap();
        let left = ds.normalize(&ab.mul(&c).unwrap()).unwrap();
        let right = ds.normalize(&a.mul(&bc).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn leibniz_and_nilpotency(seed in any::<u64>(), which in 0usize..7) {
        let cal = &calculi()[which];
        let ds = cal.differential();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sig, n) = (cal.signature(), cal.modulus());
        let a = random_homogeneous(&mut rng, sig, n, &shape());
        let b = random_homogeneous(&mut rng, sig, n, &shape());
        prop_assert!(ds.verify_leibniz(&[(a.clone(), b)]).unwrap().passed());
        prop_assert!(ds.verify_nilpotency(&[a]).unwrap().passed());
    }

    #[test]
    fn star_is_an_involution(seed in any::<u64>(), which in 0usize..7) {
        let cal = &calculi()[which];
        let ds = cal.differential();
        let table = cal.star_table().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_element(&mut rng, cal.signature(), cal.modulus(), &shape());
        let twice = ds.star(table, &ds.star(table, &e).unwrap()).unwrap();
        prop_assert_eq!(twice, ds.normalize(&e).unwrap());
    }

    #[test]
    fn tensor_product_is_associative_with_unit(seed in any::<u64>(), n in 2u32..=4, k in 0i64..4) {
        let ctx = context(n, k % n as i64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [u, v, w] = [0, 1, 2].map(|_| random_tensor_element(&mut rng, &ctx, &shape()).unwrap());
        let left = ctx.mul(&ctx.mul(&u, &v).unwrap(), &w).unwrap();
        let right = ctx.mul(&u, &ctx.mul(&v, &w).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(ctx.mul(&ctx.one(), &u).unwrap(), u.clone());
        prop_assert_eq!(ctx.mul(&u, &ctx.one()).unwrap(), u);
    }
}

#[test]
fn flip_is_an_isomorphism_for_every_braiding() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=4 {
        for k in 0..n as i64 {
            let ctx = context(n, k);
            let pairs = random_tensor_pairs(&mut rng, &ctx, &shape(), 200).unwrap();
            let report = ctx.check_flip(&pairs).unwrap();
            assert_eq!(report.checked, 200);
            assert!(report.passed(), "N={n} braiding {k}");
        }
    }
}

#[test]
fn classical_control() {
    let (a, _) = tensor_factors(2).unwrap();
    let ds = a.differential();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sig = a.signature();
    let samples: Vec<_> = (0..200).map(|_| random_element(&mut rng, sig, 2, &SampleShape::default())).collect();
    let report = ds.verify_nilpotency(&samples).unwrap();
    assert_eq!(report.order, 2);
    assert!(report.passed());
    let pairs: Vec<_> = (0..200)
        .map(|_| {
            (
                random_homogeneous(&mut rng, sig, 2, &SampleShape::default()),
                random_homogeneous(&mut rng, sig, 2, &SampleShape::default()),
            )
        })
        .collect();
    assert!(ds.verify_leibniz(&pairs).unwrap().passed());
}
