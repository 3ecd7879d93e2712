mod common;

use flatband::bands::{compute_bands, KGrid};
use flatband::cycles::{cycle_sum, enumerate_cycles, ModifiedGraph};
use flatband::trace::{
    exact_grid_resolution, flat_spectrum_verdict, fourier_cross_check, parseval_check,
    trace_fourier, Verdict,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{doubled_with_pi_offsets, index_box, load_fixture, random_graph, GraphSpec};

fn graph(seed: u64) -> flatband::graph::FundamentalGraph {
    random_graph(&mut ChaCha8Rng::seed_from_u64(seed), GraphSpec::default())
}

fn norm(g: &[i64]) -> f64 {
    g.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matches_cycle_enumeration(seed in any::<u64>()) {
        let g = graph(seed);
        let series = trace_fourier(&g, 4).unwrap();
        let mg = ModifiedGraph::new(&g);
        for n in 1..=4usize {
            for gamma in index_box(n as i64, g.dimension()) {
                let oracle = cycle_sum(&enumerate_cycles(&mg, n, &gamma).unwrap());
                let got = series.coefficient(n, &gamma);
                prop_assert!((got - oracle).norm() <= 1e-12, "n={} γ={:?}: {} vs {}", n, gamma, got, oracle);
            }
        }
    }

    #[test]
    fn series_reproduces_traces_on_a_grid(seed in any::<u64>()) {
        let g = graph(seed);
        let nu = g.num_vertices();
        let series = trace_fourier(&g, nu).unwrap();
        let grid = KGrid::new(16, g.dimension()).unwrap();
        for err in fourier_cross_check(&g, &series, &grid).unwrap() {
            prop_assert!(err <= 1e-9);
        }
    }

    #[test]
    fn support_stays_in_the_index_ball(seed in any::<u64>()) {
        let g = graph(seed);
        let series = trace_fourier(&g, 5).unwrap();
        for (n, gamma, _) in series.iter() {
            prop_assert!(norm(gamma) <= n as f64 * g.max_index_norm() + 1e-9);
        }
    }

    #[test]
    fn coefficients_are_conjugate_symmetric(seed in any::<u64>()) {
        let g = graph(seed);
        let series = trace_fourier(&g, 5).unwrap();
        for (n, gamma, c) in series.iter() {
            let neg: Vec<i64> = gamma.iter().map(|x| -x).collect();
            prop_assert!((series.coefficient(n, &neg) - c.conj()).norm() <= 1e-12);
        }
    }

    #[test]
    fn reversal_pairs_opposite_indices(seed in any::<u64>()) {
        let g = graph(seed);
        let mg = ModifiedGraph::new(&g);
        for n in 1..=3usize {
            for gamma in index_box(n as i64, g.dimension()) {
                let neg: Vec<i64> = gamma.iter().map(|x| -x).collect();
                let plus = enumerate_cycles(&mg, n, &gamma).unwrap();
                let mut minus = enumerate_cycles(&mg, n, &neg).unwrap();
                prop_assert_eq!(plus.len(), minus.len());
                for c in &plus {
                    let r = c.reversed();
                    prop_assert_eq!(&r.index, &neg);
                    prop_assert_eq!(r.weight, c.weight);
                    prop_assert!((r.contribution() - c.contribution().conj()).norm() <= 1e-12);
                    let pos = minus.iter().position(|m| m.edges == r.edges);
                    prop_assert!(pos.is_some(), "reversed cycle missing");
                    minus.swap_remove(pos.unwrap());
                }
                prop_assert!(minus.is_empty());
            }
        }
    }

    #[test]
    fn verdict_agrees_with_band_widths(seed in any::<u64>(), doubled in any::<bool>()) {
        let base = graph(seed);
        let g = if doubled { doubled_with_pi_offsets(&base) } else { base };
        let nu = g.num_vertices();
        let series = trace_fourier(&g, nu).unwrap();
        let verdict = flat_spectrum_verdict(&series, nu, 1e-9).unwrap();
        let n = exact_grid_resolution(&g, nu);
        let bs = compute_bands(&g, &KGrid::new(n, g.dimension()).unwrap(), 1e-9).unwrap();
        prop_assert_eq!(verdict.is_flat(), bs.is_all_flat());
        if doubled {
            prop_assert!(verdict.is_flat());
        }
        let report = parseval_check(&g, &series, &KGrid::new(n, g.dimension()).unwrap()).unwrap();
        prop_assert!(report.grid_exact);
        for row in &report.rows {
            prop_assert!(row.residual() <= 1e-9 * row.coefficient_energy.max(1.0));
        }
    }
}

#[test]
fn lattice_certificate() {
    let g = load_fixture("zlattice.json");
    let series = trace_fourier(&g, 1).unwrap();
    match flat_spectrum_verdict(&series, 1, 1e-9).unwrap() {
        Verdict::AcNonempty(c) => {
            assert_eq!((c.n, c.gamma.as_slice()), (1, &[-1i64][..]));
            assert!((c.value.re + 1.0).abs() < 1e-15 && c.value.im.abs() < 1e-15);
        }
        Verdict::Flat => panic!("lattice is not flat"),
    }
}

#[test]
fn magnetic_chain_has_no_off_zero_modes() {
    for q1 in [0.0, 1.0, -2.0] {
        let g = common::ex2(q1, std::f64::consts::FRAC_PI_4);
        let series = trace_fourier(&g, 2).unwrap();
        for (_, gamma, _) in series.iter() {
            assert!(gamma.iter().all(|&x| x == 0));
        }
        let grid = KGrid::new(exact_grid_resolution(&g, 2), 1).unwrap();
        let report = parseval_check(&g, &series, &grid).unwrap();
        for row in &report.rows {
            assert!(row.residual() < 1e-10);
            assert!(row.flat_identity_gap() < 1e-10 * row.zero_mode_energy.max(1.0));
        }
    }
}

#[test]
fn chain_cycle_count_without_field() {
    let g = load_fixture("ex2.json");
    let cycles = enumerate_cycles(&ModifiedGraph::new(&g), 2, &[1]).unwrap();
    assert_eq!(cycles.len(), 4);
    assert!((cycle_sum(&cycles).norm()) < 1e-15);
    let plain = g.without_phases();
    let series = trace_fourier(&plain, 2).unwrap();
    assert!((series.coefficient(2, &[1]).re - 4.0).abs() < 1e-15);
}
