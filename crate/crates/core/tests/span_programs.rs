use nalgebra::{DMatrix, DVector};
use st_shield::fixtures;
use st_shield::qshapley::{apply_value_oracle, SpanPeConfig, ValueOracleBackend, PL, UT};
use st_shield::qsim::{RegisterLayout, StateVector};
use st_shield::rng::seeded;
use st_shield::shapley::Game;
use st_shield::span::{
    bits_min, build_operator, build_span_program, decide_spectral, default_coupling, span_membership,
    walk_phase_estimation, zero_eigenspace_overlap,
};
use st_shield::Coalition;

/// `|| 2^-b sum_k U^k e_0 ||^2`, the chance that phase estimation reads 0.
fn zero_reading(walk: &DMatrix<f64>, bits: usize) -> f64 {
    let m = 1usize << bits;
    let mut v = DVector::<f64>::zeros(walk.nrows());
    v[0] = 1.0;
    let mut acc = DVector::<f64>::zeros(walk.nrows());
    for _ in 0..m {
        acc += &v;
        v = walk * &v;
    }
    (acc / m as f64).norm_squared()
}

#[test]
fn membership_matches_bfs_up_to_five_nodes() {
    for n in 2..=5 {
        for g in fixtures::nonisomorphic_graphs(n) {
            let w = g.player_count();
            for mask in 0..1u64 << w {
                let h = g.induced_subgraph(&Coalition::new(w, mask).unwrap()).unwrap();
                assert_eq!(span_membership(&build_span_program(&h).unwrap()), h.is_st_connected_bfs());
            }
        }
    }
}

#[test]
fn operator_identities_and_spectral_decision() {
    for n in 3..=5 {
        for g in fixtures::nonisomorphic_graphs(n) {
            let op = build_operator(&g, None, default_coupling(n)).unwrap();
            assert!(op.defects().max() < 1e-9);
            assert_eq!(decide_spectral(&op).unwrap(), g.is_st_connected_bfs());
        }
    }
}

#[test]
fn phase_reading_matches_power_average() {
    let g = fixtures::diamond();
    let w = g.player_count();
    for mask in 0..1u64 << w {
        let op = build_operator(&g, Some(&Coalition::new(w, mask).unwrap()), default_coupling(g.n())).unwrap();
        for bits in [3, 5] {
            let pe = walk_phase_estimation(&op, bits).unwrap();
            assert!((pe.probability(0) - zero_reading(&op.walk, bits)).abs() < 1e-10);
        }
    }
}

/// Disconnected inputs read 0 less often as the phase register grows;
/// connected inputs approach the eigenspace overlap from above.
#[test]
fn zero_reading_versus_bits() {
    for g in fixtures::nonisomorphic_graphs(4).into_iter().chain(fixtures::nonisomorphic_graphs(5)) {
        let op = build_operator(&g, None, default_coupling(g.n())).unwrap();
        let overlap = zero_eigenspace_overlap(&op).unwrap();
        let readings: Vec<f64> = (2..=9).map(|b| zero_reading(&op.walk, b)).collect();
        for pair in readings.windows(2) {
            if op.connected {
                assert!(pair[1] <= pair[0] + 1e-12);
            } else {
                assert!(pair[1] <= pair[0] + 1e-12 && pair[1] >= -1e-12);
            }
        }
        assert!(readings.iter().all(|&r| r >= overlap - 1e-9));
        let last = *readings.last().unwrap();
        if op.connected {
            assert!(last >= 0.5);
        } else {
            assert!(last < 0.1, "{last}");
        }
    }
}

/// Compressed span-program oracle against the coherent picture: with one
/// repetition the flag equals the zero-reading probability and the work
/// registers keep exactly `2 p (1 - p)` population.
#[test]
fn compressed_oracle_matches_coherent_model() {
    for g in [fixtures::path(), fixtures::series(), fixtures::parallel()] {
        let game = Game::st_connectivity(g.clone());
        let w = g.player_count();
        let bits = bits_min(g.n());
        let c = default_coupling(g.n());
        for reps in [1usize, 3] {
            let backend = ValueOracleBackend::SpanPe(SpanPeConfig { bits: Some(bits), n_reps: reps, coupling: Some(c) });
            for mask in 0..1u64 << w {
                let op = build_operator(&g, Some(&Coalition::new(w, mask).unwrap()), c).unwrap();
                let p = zero_reading(&op.walk, bits);
                let layout = RegisterLayout::new(&[(PL, w)]).unwrap();
                let state = StateVector::basis(layout, mask as usize).unwrap();
                let out = apply_value_oracle(state, &game, &backend, &mut seeded(0)).unwrap();
                let flag = out.state.probability(UT, 1).unwrap();
                let expect: f64 = (reps / 2 + 1..=reps)
                    .map(|k| binom(reps, k) * p.powi(k as i32) * (1.0 - p).powi((reps - k) as i32))
                    .sum();
                assert!((flag - expect).abs() < 1e-9, "{flag} vs {expect}");
                if reps == 1 {
                    assert!((out.aux_residual - 2.0 * p * (1.0 - p)).abs() < 1e-9);
                }
                assert_eq!(out.cost, 2 * reps as u64 * ((1u64 << bits) - 1));
            }
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}
