//! Structural invariants checked over randomized inputs.

use kpg_core::game::complement_indices;
use kpg_core::games::{MeetupGame, QuadraticGame};
use kpg_core::tabular::SoftmaxPolicyTable;
use kpg_core::theory::theorem1_bound;
use kpg_core::{DifferentiableGame, JointParams};
use proptest::prelude::*;

/// Strategy for a per-agent parameter layout: 2..=6 agents with 1..=4
/// coordinates each, values bounded away from overflow.
fn segments() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(-100.0..100.0f64, 1..=4),
        2..=6,
    )
}

proptest! {
    #[test]
    fn pack_then_unpack_is_the_identity(segs in segments()) {
        let packed = JointParams::pack(&segs).unwrap();
        prop_assert_eq!(packed.n_agents(), segs.len());
        prop_assert_eq!(packed.unpack(), segs.clone());
        for (i, seg) in segs.iter().enumerate() {
            prop_assert_eq!(packed.segment(i), seg.as_slice());
        }
    }

    #[test]
    fn complement_partitions_the_flat_index_space(segs in segments(), pick in 0usize..6) {
        let dims: Vec<usize> = segs.iter().map(Vec::len).collect();
        let i = pick % dims.len();
        let total: usize = dims.iter().sum();
        let offset: usize = dims[..i].iter().sum();
        let own: Vec<usize> = (offset..offset + dims[i]).collect();
        let others = complement_indices(&dims, i);
        prop_assert_eq!(others.len(), total - dims[i]);
        let mut all: Vec<usize> = own.iter().chain(others.iter()).cloned().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..total).collect::<Vec<_>>());
    }

    #[test]
    fn meetup_objectives_are_periodic(
        t1 in -10.0..10.0f64,
        t2 in -10.0..10.0f64,
        m1 in -3i32..=3,
        m2 in -3i32..=3,
    ) {
        let game = MeetupGame::default();
        let tau = std::f64::consts::TAU;
        let base = game.objectives(t1, t2);
        let shifted = game.objectives(t1 + m1 as f64 * tau, t2 + m2 as f64 * tau);
        // Both evaluations land on the same headings, so either both are
        // degenerate or both values agree.
        match (base, shifted) {
            (Ok((a1, a2)), Ok((b1, b2))) => {
                prop_assert!((a1 - b1).abs() < 1e-9);
                prop_assert!((a2 - b2).abs() < 1e-9);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "periodicity broke degeneracy: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn meetup_objectives_stay_in_their_range(
        t1 in -10.0..10.0f64,
        t2 in -10.0..10.0f64,
    ) {
        let game = MeetupGame::default();
        if let Ok((j1, j2)) = game.objectives(t1, t2) {
            prop_assert!((-2.0..=0.0).contains(&j1), "j1 = {j1}");
            prop_assert!((-2.0..=0.0).contains(&j2), "j2 = {j2}");
        }
    }

    #[test]
    fn softmax_rows_are_distributions_invariant_to_shifts(
        logits in prop::collection::vec(-30.0..30.0f64, 1..=6),
        shift in -20.0..20.0f64,
    ) {
        let table = SoftmaxPolicyTable::from_logits(vec![logits.clone()]).unwrap();
        let probs = table.probs(0);
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(probs.iter().all(|&p| p > 0.0));

        let shifted = SoftmaxPolicyTable::from_logits(
            vec![logits.iter().map(|l| l + shift).collect()],
        )
        .unwrap();
        for (p, q) in probs.iter().zip(shifted.probs(0)) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_gradients_are_additive(
        c in -2.0..2.0f64,
        a in prop::collection::vec(-5.0..5.0f64, 2),
        b in prop::collection::vec(-5.0..5.0f64, 2),
    ) {
        let game = QuadraticGame::two_player_scalar(-1.0, c).unwrap();
        let theta_a = JointParams::from_flat(&[1, 1], &a).unwrap();
        let theta_b = JointParams::from_flat(&[1, 1], &b).unwrap();
        let summed: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let theta_sum = JointParams::from_flat(&[1, 1], &summed).unwrap();
        for i in 0..2 {
            let ga = game.gradient(i, &theta_a).unwrap();
            let gb = game.gradient(i, &theta_b).unwrap();
            let gs = game.gradient(i, &theta_sum).unwrap();
            prop_assert!((gs[0] - ga[0] - gb[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn first_level_bound_is_monotone_in_depth(
        eta in 0.001..0.2f64,
        l in 0.1..0.9f64,
        grad_max in 0.0..10.0f64,
        k in 1usize..=9,
    ) {
        // With η·L·(n-1) < 1 deeper levels move strictly less, so the bound
        // shrinks with k; n = 2 keeps the product below one by construction.
        let b_k = theorem1_bound(k, eta, l, 2, grad_max);
        let b_next = theorem1_bound(k + 1, eta, l, 2, grad_max);
        prop_assert!(b_k >= 0.0);
        prop_assert!(b_next <= b_k + 1e-15);
    }
}
