use baker_core::stats::{chi_square_uniform, ks_two_sample};
use baker_core::transport::PSI;
use baker_core::*;

fn cfg(ell: f64, q: f64, variant: MapVariant) -> SimConfig64 {
    SimConfig::new(MapParams::new(ell, q).unwrap(), variant)
}

#[test]
fn quadrant_counts_are_binomial() {
    let n = 1_000_000;
    let pts: Vec<Point64> = sample_ensemble(n, 11).unwrap();
    let mut quad = [0u64; 4];
    for p in &pts {
        quad[(p.x >= 0.5) as usize * 2 + (p.y >= 0.5) as usize] += 1;
    }
    let expect = n as f64 / 4.0;
    let bound = 4.0 * (expect * 0.75).sqrt();
    for c in quad {
        assert!((c as f64 - expect).abs() <= bound, "{quad:?}");
    }
}

#[test]
fn seeds_give_the_same_law() {
    let a: Vec<f64> = sample_ensemble::<f64>(20_000, 1)
        .unwrap()
        .iter()
        .map(|p| p.x)
        .collect();
    let b: Vec<f64> = sample_ensemble::<f64>(20_000, 2)
        .unwrap()
        .iter()
        .map(|p| p.x)
        .collect();
    assert_ne!(a, b);
    assert!(ks_two_sample(&a, &b, 0.01).passed);
}

#[test]
fn transition_frequencies_match_the_chain() {
    let ell = 0.15;
    let p = transition_matrix(ell).unwrap();
    for variant in [MapVariant::ReversibleM, MapVariant::IrreversibleK] {
        let counts = transition_counts(
            &cfg(ell, 0.0, variant)
                .with_sizes(100_000, 11, 200)
                .with_seed(4),
        )
        .unwrap();
        assert_eq!(counts.total(), 1_000_000);
        for from in Region::ALL {
            for to in Region::ALL {
                let (f, se) = counts.frequency(from, to);
                let exact = p.get(from, to);
                if exact == 0.0 {
                    assert_eq!(f, 0.0, "{from}->{to}");
                } else {
                    assert!(
                        (f - exact).abs() <= 3.0 * se,
                        "{variant:?} {from}->{to}: {f} vs {exact} (se {se})"
                    );
                }
            }
        }
    }
}

#[test]
fn flip_leaves_x_untouched_member_by_member() {
    let m = cfg(0.15, 0.0, MapVariant::ReversibleM)
        .with_sizes(500, 40, 10)
        .with_seed(9);
    let k = m.with_variant(MapVariant::IrreversibleK);
    let (tm, tk) = (trajectories(&m).unwrap(), trajectories(&k).unwrap());
    let mut flipped = 0;
    for (a, b) in tm.iter().zip(&tk) {
        for ((pa, ra), (pb, rb)) in a.iter().zip(b) {
            assert_eq!(pa.x.to_bits(), pb.x.to_bits());
            assert_eq!(ra, rb);
            flipped += (pa.y != pb.y) as usize;
        }
    }
    assert!(flipped > 0);
}

#[test]
fn empty_strip_is_bitwise_reversible_dynamics() {
    let params = MapParams::with_strip(0.15, 0.1, 0.15, 0.0).unwrap();
    let m = SimConfig::new(params, MapVariant::ReversibleM).with_sizes(200, 30, 5);
    let k = m.with_variant(MapVariant::IrreversibleK);
    assert_eq!(trajectories(&m).unwrap(), trajectories(&k).unwrap());
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let c = cfg(0.15, 0.2, MapVariant::IrreversibleK)
        .with_sizes(3000, 50, 20)
        .with_seed(5);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            (
                empirical_density(&c, 16, 16).unwrap(),
                time_average(&c, |p: Point64, _| p.y).unwrap(),
                evolve_final(&c).unwrap(),
            )
        })
    };
    let one = run(1);
    for threads in [2, 4] {
        let other = run(threads);
        assert_eq!(one.0, other.0);
        assert_eq!(one.1.mean.to_bits(), other.1.mean.to_bits());
        assert_eq!(one.2, other.2);
    }
}

#[test]
fn memory_budget_is_enforced() {
    let mut c = cfg(0.15, 0.0, MapVariant::ReversibleM).with_sizes(1000, 1000, 0);
    c.memory_budget = 1024;
    assert!(matches!(trajectories(&c), Err(Error::MemoryBudget { .. })));
    assert!(matches!(
        region_sequences(&c),
        Err(Error::MemoryBudget { .. })
    ));
}

#[test]
fn equilibrium_density_marginals() {
    let rho = stationary_density(0.15f64).unwrap();
    assert!((rho.rho_l - 1.25).abs() < 1e-15 && (rho.rho_r - 0.75).abs() < 1e-15);
    let base = cfg(0.15, 0.0, MapVariant::ReversibleM)
        .with_sizes(10_000, 100, 1000)
        .with_seed(21);
    let hm = empirical_density(&base, 100, 100).unwrap();
    let hk = empirical_density(&base.with_variant(MapVariant::IrreversibleK), 100, 100).unwrap();
    // The x-marginal is identical under the flip, and matches the projected density.
    assert_eq!(hm.x_counts(), hk.x_counts());
    let left = hm.x_band_density(0.0, 0.5);
    let right = hm.x_band_density(0.5, 1.0);
    assert!(
        (left - 1.25).abs() < 0.01 && (right - 0.75).abs() < 0.01,
        "{left} {right}"
    );
    assert!(chi_square_uniform(&hm.y_counts(), 0.01).passed);
    assert!(!chi_square_uniform(&hk.y_counts(), 0.01).passed);
}

#[test]
fn microcanonical_histogram_is_uniform() {
    // Independent points: one step after burn-in per member.
    let c = cfg(0.25, 0.0, MapVariant::ReversibleM)
        .with_sizes(200_000, 1, 100)
        .with_seed(3);
    let h = empirical_density(&c, 20, 20).unwrap();
    assert!(chi_square_uniform(&h.counts, 0.01).passed);
}

#[test]
fn measures_of_simple_sets() {
    let c = cfg(0.15, 0.0, MapVariant::ReversibleM)
        .with_sizes(20_000, 50, 1000)
        .with_seed(8);
    let all = measure_estimate(&c, &RectSet::unit()).unwrap();
    assert_eq!(all.mean, 1.0);
    let left = measure_estimate(&c, &RectSet::new(0.0, 0.5, 0.0, 1.0).unwrap()).unwrap();
    assert!(left.z_score(0.625) < 3.0, "{left:?}");
}

#[test]
fn rectangle_battery_is_time_reversal_symmetric() {
    let c = cfg(0.15, 0.0, MapVariant::ReversibleM)
        .with_sizes(20_000, 50, 1000)
        .with_seed(12);
    let battery = [
        (0.0, 0.5, 0.0, 0.5),
        (0.1, 0.3, 0.2, 0.9),
        (0.4, 0.7, 0.1, 0.6),
        (0.55, 0.95, 0.3, 0.8),
        (0.05, 0.95, 0.05, 0.25),
        (0.2, 0.8, 0.45, 1.0),
    ];
    for (x0, x1, y0, y1) in battery {
        let w = RectSet::new(x0, x1, y0, y1).unwrap();
        let diff = measure_difference(&c, &[w], &w.g_image()).unwrap();
        assert!(diff.z_score(0.0) < 3.0, "{w:?}: {diff:?}");
    }
}

#[test]
fn odd_observables_average_to_zero() {
    let eq = cfg(0.15, 0.0, MapVariant::ReversibleM)
        .with_sizes(20_000, 50, 1000)
        .with_seed(2);
    let lam = eq.params.lambdas();
    let est = odd_observable_mean(&eq, &lam, ReversalScheme::Q4).unwrap();
    assert!(est.z_score(0.0) < 3.0, "{est:?}");

    let flat = cfg(0.25, 0.0, MapVariant::IrreversibleK)
        .with_sizes(20_000, 50, 1000)
        .with_seed(2);
    let est = odd_observable_mean(&flat, &PSI, ReversalScheme::Q3).unwrap();
    assert!(est.z_score(0.0) < 3.0, "{est:?}");

    assert_eq!(
        odd_observable_mean(&eq, &[0.0; 4], ReversalScheme::Q4)
            .unwrap()
            .mean,
        0.0
    );
    assert!(matches!(
        odd_observable_mean(&eq, &[1.0, 0.0, 0.0, 1.0], ReversalScheme::Q4),
        Err(Error::NotOdd { .. })
    ));
}
