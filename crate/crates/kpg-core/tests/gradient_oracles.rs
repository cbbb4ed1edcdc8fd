//! Analytic gradients cross-checked against central finite differences on
//! a deterministic grid of sample points.

use std::time::Instant;

use kpg_core::game::fd_gradient;
use kpg_core::games::{MeetupGame, QuadraticGame};
use kpg_core::linalg::Mat;
use kpg_core::{DifferentiableGame, JointParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 100;
const REL_TOL: f64 = 1e-5;

/// Largest relative deviation between analytic and finite-difference
/// gradients over `SAMPLES` points drawn uniformly from the game's region.
fn max_relative_error<G: DifferentiableGame + ?Sized>(game: &G, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let region = game.region();
    let dims = game.dims();
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    while accepted < SAMPLES {
        let flat: Vec<f64> =
            region.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        let theta = JointParams::from_flat(&dims, &flat).unwrap();
        // Degenerate geometry (agents landing on one spot) is skipped; the
        // draw space makes that measure zero but replays must not hang on
        // an unlucky draw near it.
        let all_ok = (0..game.n_agents()).all(|i| game.gradient(i, &theta).is_ok());
        if !all_ok {
            continue;
        }
        accepted += 1;
        for i in 0..game.n_agents() {
            let analytic = game.gradient(i, &theta).unwrap();
            let numeric = fd_gradient(game, i, &theta, None).unwrap();
            let norm = analytic.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            let diff = analytic
                .iter()
                .zip(&numeric)
                .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
            worst = worst.max(diff / (1.0 + norm));
        }
    }
    worst
}

fn vector_quadratic() -> QuadraticGame {
    let p1 = Mat::from_rows(&[vec![-1.0, 0.2], vec![0.2, -2.0]]).unwrap();
    let p2 = Mat::from_rows(&[vec![-0.5, -0.1], vec![-0.1, -1.5]]).unwrap();
    let m1 = Mat::from_rows(&[vec![0.3, -0.2], vec![0.1, 0.4]]).unwrap();
    let m2 = Mat::from_rows(&[vec![-0.25, 0.15], vec![0.05, -0.35]]).unwrap();
    QuadraticGame::new(vec![p1, p2], vec![m1, m2]).unwrap()
}

#[test]
fn analytic_gradients_match_finite_differences_everywhere() {
    let start = Instant::now();

    let meetup = MeetupGame::default();
    let err = max_relative_error(&meetup, 7);
    assert!(err < REL_TOL, "meet-up gradient deviates by {err}");

    let scalar = QuadraticGame::two_player_scalar(-1.0, 0.5).unwrap();
    let err = max_relative_error(&scalar, 11);
    assert!(err < REL_TOL, "scalar quadratic gradient deviates by {err}");

    let vector = vector_quadratic();
    let err = max_relative_error(&vector, 13);
    assert!(err < REL_TOL, "vector quadratic gradient deviates by {err}");

    assert!(
        start.elapsed().as_secs_f64() < 5.0,
        "oracle sweep took {:?}",
        start.elapsed()
    );
}

#[test]
fn hessian_blocks_match_finite_differences_at_the_origin() {
    let game = vector_quadratic();
    let theta = JointParams::from_flat(&[2, 2], &[0.0; 4]).unwrap();
    for i in 0..2 {
        let (a, b, _c) = kpg_core::game::fd_hessian_blocks(&game, i, &theta, None).unwrap();
        let (pa, pb, _) = game.analytic_hessian_blocks(i, &theta).unwrap();
        assert!(a.max_abs_diff(&pa) < 1e-6, "agent {i} own-block mismatch");
        assert!(b.max_abs_diff(&pb) < 1e-6, "agent {i} cross-block mismatch");
    }
}
