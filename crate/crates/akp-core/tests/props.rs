//! Property tests for the numeric invariants.

use akp_core::activation::softmax;
use akp_core::data::{split, Dataset};
use akp_core::init::{init_tensor, InitializerKind};
use akp_core::metrics::{precision_recall_f1, Confusion};
use akp_core::perturb::SwapPolicy;
use akp_core::repsim::pearson;
use akp_core::rng::Prng;
use akp_core::tensor::{matmul, Tensor};
use akp_core::activation::ActivationKind;

use proptest::prelude::*;

proptest! {
    #[test]
    fn softmax_sums_to_one_and_stays_positive(
        logits in prop::collection::vec(-30.0f64..30.0, 2..6)
    ) {
        let p = softmax(&logits).unwrap();
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn softmax_argmax_is_shift_invariant(
        logits in prop::collection::vec(-20.0f64..20.0, 2..5),
        shift in -50.0f64..50.0
    ) {
        let p = softmax(&logits).unwrap();
        let shifted: Vec<f64> = logits.iter().map(|v| v + shift).collect();
        let q = softmax(&shifted).unwrap();
        let arg = |v: &[f64]| {
            v.iter().enumerate().fold(0usize, |best, (i, &x)| {
                if x > v[best] { i } else { best }
            })
        };
        prop_assert_eq!(arg(&p), arg(&q));
    }

    #[test]
    fn pearson_invariant_under_positive_affine_maps(
        seed in 0u64..1000,
        alpha in 0.01f64..100.0,
        beta in -100.0f64..100.0
    ) {
        let mut rng = Prng::new(seed);
        let x: Vec<f64> = (0..16).map(|_| rng.next_normal()).collect();
        let y: Vec<f64> = (0..16).map(|_| rng.next_normal()).collect();
        let base = pearson(&x, &y).unwrap();
        let mapped: Vec<f64> = x.iter().map(|v| alpha * v + beta).collect();
        let r = pearson(&mapped, &y).unwrap();
        prop_assert!((base - r).abs() < 1e-12, "{} vs {}", base, r);
        prop_assert!((-1.0..=1.0).contains(&r));
    }

    #[test]
    fn matmul_identity_association(seed in 0u64..500) {
        let mut rng = Prng::new(seed);
        let a = Tensor::from_vec(&[3, 4], (0..12).map(|_| rng.next_normal()).collect()).unwrap();
        let b = Tensor::from_vec(&[4, 2], (0..8).map(|_| rng.next_normal()).collect()).unwrap();
        let direct = matmul(&a, &b).unwrap();
        let via_identity = matmul(&matmul(&a, &Tensor::eye(4)).unwrap(), &b).unwrap();
        prop_assert_eq!(direct.data(), via_identity.data());
    }

    #[test]
    fn f1_is_bounded_by_precision_and_recall(
        tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50, tn in 0usize..50
    ) {
        let c = Confusion { tp, fp, fn_, tn };
        let (p, r, f1) = precision_recall_f1(&c);
        for v in [p, r, f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if p + r > 0.0 {
            prop_assert!(f1 <= p.max(r) + 1e-12);
            prop_assert!(f1 >= p.min(r) - 1e-12);
        } else {
            prop_assert_eq!(f1, 0.0);
        }
    }

    #[test]
    fn truncated_normal_draws_stay_in_band(
        seed in 0u64..200,
        mean in -2.0f64..2.0,
        std in 0.05f64..1.5
    ) {
        let mut rng = Prng::new(seed);
        let t = init_tensor(
            InitializerKind::TruncatedNormal { mean, std },
            &[64],
            4,
            4,
            &mut rng,
        ).unwrap();
        prop_assert!(t.iter().all(|&v| (v - mean).abs() <= 2.0 * std));
    }

    #[test]
    fn schedule_holds_final_value_after_last_swap(
        seed in 0u64..300,
        epochs in prop::collection::btree_set(1usize..40, 1..6)
    ) {
        let swap_epochs: Vec<usize> = epochs.into_iter().collect();
        let kinds = [ActivationKind::Tanh, ActivationKind::Softplus, ActivationKind::ReLU];
        let mut rng = Prng::new(seed);
        let sequence: Vec<ActivationKind> =
            (0..1 + (rng.next_u64() % 3) as usize).map(|i| kinds[i % 3]).collect();
        let final_value = kinds[(rng.next_u64() % 3) as usize];
        let policy = SwapPolicy::activation(sequence.clone(), swap_epochs.clone(), final_value).unwrap();
        let last = *swap_epochs.last().unwrap();
        for epoch in last..last + 20 {
            prop_assert_eq!(policy.active_value_at(epoch), final_value);
        }
        // before the first swap, the first sequence entry is active
        for epoch in 0..swap_epochs[0] {
            prop_assert_eq!(policy.active_value_at(epoch), sequence[0]);
        }
    }

    #[test]
    fn split_partitions_exactly_and_preserves_ratios(
        seed in 0u64..200,
        n0 in 12usize..80,
        n1 in 12usize..80,
        raw_train in 0.2f64..0.7,
        raw_val in 0.1f64..0.3
    ) {
        let train = raw_train;
        let val = raw_val;
        let test = 1.0 - train - val;
        prop_assume!(test > 0.05);

        let n = n0 + n1;
        let mut data = Vec::with_capacity(n * 4);
        for i in 0..n {
            data.extend_from_slice(&[i as f64, 0.0, 0.0, 0.0]);
        }
        let mut labels = vec![0u8; n0];
        labels.extend(vec![1u8; n1]);
        let ds = Dataset::new(Tensor::from_vec(&[n, 1, 2, 2], data).unwrap(), labels).unwrap();

        let (tr, va, te) = split(&ds, (train, val, test), seed, true).unwrap();
        prop_assert_eq!(tr.len() + va.len() + te.len(), n);

        let mut ids: Vec<usize> = tr.images.data().chunks(4)
            .chain(va.images.data().chunks(4))
            .chain(te.images.data().chunks(4))
            .map(|c| c[0] as usize)
            .collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());

        for (part, frac) in [(&tr, train), (&va, val), (&te, test)] {
            let (c0, c1) = part.class_counts();
            prop_assert!((c0 as f64 - n0 as f64 * frac).abs() <= 1.0);
            prop_assert!((c1 as f64 - n1 as f64 * frac).abs() <= 1.0);
        }
    }
}
