use baker_core::fluctuation::{e_lattice_unit, variance_ratio};
use baker_core::*;

fn dissipative() -> (MapParams64, f64) {
    let params = MapParams::new(0.15, 0.2).unwrap();
    let m = mean_lambda(&params);
    (params, m)
}

fn exact_pi(params: &MapParams64, config: &FRConfig) -> PiHistogram {
    let m = mean_lambda(params);
    let dist = exact_en_distribution(params, config.n).unwrap();
    estimate_pi(
        config,
        PiSource::ExactDp(&dist),
        PiAxis::normalized(m).unwrap(),
    )
    .unwrap()
}

#[test]
fn monte_carlo_histogram_matches_the_exact_one() {
    let (params, m) = dissipative();
    let n = 50;
    // One segment per member keeps the segments independent.
    let sim = SimConfig::new(params, MapVariant::ReversibleM)
        .with_sizes(1_000_000, n, 100)
        .with_seed(17);
    let sums = segment_sums(&sim, n).unwrap();
    assert_eq!(sums.len(), 1_000_000);
    let config = FRConfig::tiling(n, 0.1, 6.0).unwrap();
    let mc = estimate_pi(
        &config,
        PiSource::MonteCarlo(&sums),
        PiAxis::normalized(m).unwrap(),
    )
    .unwrap();
    let exact = exact_pi(&params, &config);
    let total = mc.total as f64;
    let mut worst = 0.0f64;
    for i in 0..config.p_grid.len() {
        let p = exact.mass(i);
        let se = (p * (1.0 - p) / total).sqrt();
        let observed = mc.counts.as_ref().unwrap()[i] as f64 / total;
        if se > 0.0 {
            worst = worst.max((observed - p).abs() / se);
        } else {
            assert_eq!(observed, 0.0);
        }
    }
    assert!(worst < 3.0, "worst cell {worst:.2} standard errors");
}

#[test]
fn exact_mass_is_complete_and_peaks_at_one() {
    let (params, _) = dissipative();
    let config = FRConfig::tiling(500, 0.1, 6.0).unwrap();
    let pi = exact_pi(&params, &config);
    assert!((pi.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((pi.p[pi.peak()] - 1.0).abs() < 1e-9);
}

#[test]
fn rate_function_moves_down_with_n_near_one() {
    let (params, _) = dissipative();
    let zeta_at = |n: usize, p: f64| {
        let pi = exact_pi(&params, &FRConfig::tiling(n, 0.1, 6.0).unwrap());
        rate_function(&pi).unwrap().at(p).unwrap()
    };
    for p in [0.9, 1.0, 1.1] {
        let z: Vec<f64> = [100, 200, 400, 800]
            .iter()
            .map(|&n| zeta_at(n, p))
            .collect();
        assert!(z.windows(2).all(|w| w[1] < w[0]), "p = {p}: {z:?}");
    }
    let zeta = rate_function(&exact_pi(
        &params,
        &FRConfig::tiling(400, 0.1, 6.0).unwrap(),
    ))
    .unwrap();
    assert!((zeta.argmin().unwrap().p - 1.0).abs() < 1e-9);
}

#[test]
fn exact_slope_at_n_500_on_the_default_grid() {
    let (params, m) = dissipative();
    let pi = exact_pi(&params, &FRConfig::tiling(500, 0.1, 6.0).unwrap());
    let fr = fr_check(&pi, m).unwrap();
    assert!((0.9..=1.1).contains(&fr.slope), "slope {}", fr.slope);
}

#[test]
fn exact_slope_approaches_one_monotonically() {
    let (params, m) = dissipative();
    let mut last = f64::INFINITY;
    for n in [50, 100, 200, 500] {
        let dist = exact_en_distribution(&params, n).unwrap();
        let unit = e_lattice_unit(&dist, m).unwrap();
        let config = FRConfig::atom_resolved(n, unit, 5.0).unwrap();
        let pi = estimate_pi(
            &config,
            PiSource::ExactDp(&dist),
            PiAxis::normalized(m).unwrap(),
        )
        .unwrap();
        let gap = (fr_check(&pi, m).unwrap().slope - 1.0).abs();
        assert!(gap < last, "n = {n}: {gap} after {last}");
        last = gap;
    }
}

#[test]
fn exact_rate_function_is_convex() {
    let (params, m) = dissipative();
    for n in [50, 100, 200] {
        let dist = exact_en_distribution(&params, n).unwrap();
        let unit = e_lattice_unit(&dist, m).unwrap();
        let config = FRConfig::commensurate(n, unit, 0.2, 4.0).unwrap();
        let pi = estimate_pi(
            &config,
            PiSource::ExactDp(&dist),
            PiAxis::normalized(m).unwrap(),
        )
        .unwrap();
        assert!(rate_function(&pi).unwrap().is_convex(1e-9), "n = {n}");
    }
}

#[test]
fn parabola_offsets_shrink_with_n() {
    let (params, m) = dissipative();
    let b: Vec<f64> = [100, 300, 1000]
        .iter()
        .map(|&n| {
            let dist = exact_en_distribution(&params, n).unwrap();
            let unit = e_lattice_unit(&dist, m).unwrap();
            let config = FRConfig::commensurate(n, unit, 0.2, 2.0).unwrap();
            let pi = estimate_pi(
                &config,
                PiSource::ExactDp(&dist),
                PiAxis::normalized(m).unwrap(),
            )
            .unwrap();
            let fit = fit_parabola(&rate_function(&pi).unwrap()).unwrap();
            assert!(fit.a > 0.0);
            fit.b
        })
        .collect();
    assert!(b.windows(2).all(|w| w[1].abs() < w[0].abs()), "{b:?}");
}

#[test]
fn variance_ratio_is_reported() {
    let (params, _) = dissipative();
    let r = variance_ratio(&exact_en_distribution(&params, 500).unwrap());
    assert!(r.is_finite() && r > 0.0);
}

#[test]
fn equilibrium_uses_the_raw_axis() {
    let params = MapParams::new(0.15, 0.0).unwrap();
    assert!(matches!(
        PiAxis::normalized(mean_lambda(&params)),
        Err(Error::ZeroMeanLambda)
    ));
    let dist = exact_en_distribution(&params, 60).unwrap();
    let unit = dist.unit.unwrap().abs();
    let config = FRConfig::atom_resolved(60, unit, 60.0 * unit).unwrap();
    let pi = estimate_pi(&config, PiSource::ExactDp(&dist), PiAxis::Raw).unwrap();
    let fr = fr_check(&pi, 0.0).unwrap();
    assert!(fr.points.iter().all(|pt| pt.c.abs() < 1e-12));
}

#[test]
fn too_few_negative_fluctuations_is_an_error() {
    let (params, m) = dissipative();
    let sim = SimConfig::new(params, MapVariant::ReversibleM)
        .with_sizes(200, 1000, 100)
        .with_seed(1);
    let sums = segment_sums(&sim, 1000).unwrap();
    let config = FRConfig::tiling(1000, 0.1, 4.0).unwrap();
    let pi = estimate_pi(
        &config,
        PiSource::MonteCarlo(&sums),
        PiAxis::normalized(m).unwrap(),
    )
    .unwrap();
    assert!(matches!(
        fr_check(&pi, m),
        Err(Error::InsufficientNegativeFluctuations)
    ));
}

#[test]
fn variant_equivalence() {
    let (params, _) = dissipative();
    let n = 20;
    let m = SimConfig::new(params, MapVariant::ReversibleM)
        .with_sizes(50_000, n, 100)
        .with_seed(3);
    let k = m.with_variant(MapVariant::IrreversibleK);

    let same_seed = variant_equivalence_test(&m, &k, n, 0.01).unwrap();
    assert!(same_seed.identical && same_seed.test.passed);
    assert_eq!(same_seed.test.statistic, 0.0);

    let other = variant_equivalence_test(&m, &k.with_seed(4), n, 0.01).unwrap();
    assert!(!other.identical);
    assert!(other.test.passed, "{:?}", other.test);

    // A different ell changes the law of n Λ̄_n.
    let shifted = SimConfig {
        params: MapParams::new(0.2, 0.2).unwrap(),
        ..m
    };
    let report = variant_equivalence_test(&m, &shifted.with_seed(5), n, 0.01).unwrap();
    assert!(!report.test.passed);
}
