use dispersive_core::fields::{sample, AnalyticField, Coverage, GridSpec, SampledField};
use dispersive_core::harness::airy::airy_pointwise_rhs;
use dispersive_core::harness::{
    airy_decay_experiment, check_airy_local_energy, check_airy_pointwise, check_monomial_estimate, geometric_times,
    Exclusion,
};
use dispersive_core::spectral::{guard_fraction, sizing, DispersionPolynomial, Evolution};

/// `exp(-x^2)`, i.e. a Gaussian of width `1/sqrt 2`.
fn airy_datum(half: f64, n: usize) -> SampledField {
    let g = GridSpec::symmetric(half, n).unwrap();
    sample(&AnalyticField::gaussian(&[0.0], 0.5f64.sqrt()), &g, Coverage::Enforce).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn pointwise_rhs_from_gaussian_moments() {
    let u0 = airy_datum(40.0, 1024);
    let rhs = airy_pointwise_rhs(&u0).unwrap();
    let expected = 2.0 * (std::f64::consts::PI / 2.0).sqrt();
    assert!((rhs - expected).abs() < 1e-10, "{rhs}");
}

#[test]
fn pointwise_estimate_holds_on_the_probe_grid() {
    let u0 = airy_datum(4096.0, 65536);
    let times = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];
    let probes = linspace(-50.0, 50.0, 1001);
    let report = check_airy_pointwise(&u0, &times, &probes).unwrap();
    assert!(report.pass, "max ratio {}", report.max_ratio);
    assert!(report.excluded.is_empty());
    assert_eq!(report.samples.len(), times.len() * probes.len());
    // at t = 0 the left side is x e^{-2x^2}, largest at x = 1/2
    let bound = 0.5 * (-0.5f64).exp();
    for s in report.samples.iter().filter(|s| s.t == 0.0) {
        let x = s.x.unwrap();
        assert!((s.lhs - x * (-2.0 * x * x).exp()).abs() < 1e-12);
        assert!(s.lhs <= bound);
    }
}

#[test]
fn zero_datum() {
    let g = GridSpec::symmetric(40.0, 256).unwrap();
    let zero = SampledField::zeros(g);
    let r = check_airy_pointwise(&zero, &[0.0, 1.0], &[0.0, 1.0]).unwrap();
    assert!(r.pass && r.samples.iter().all(|s| s.lhs == 0.0 && s.rhs == 0.0));
    let e = check_airy_local_energy(&zero, 0.5, &[1.0, 2.0], None).unwrap();
    assert!(e.report.pass && e.report.max_ratio == 0.0);
    let m = check_monomial_estimate(2, &zero, &[1.0, 2.0], 2.0).unwrap();
    assert!(m.pass && m.max_ratio == 0.0);
}

#[test]
fn sup_norm_decays_like_cube_root() {
    let u0 = airy_datum(1500.0, 32768);
    let mut times = geometric_times(2.0, 20.0, 2f64.sqrt());
    times.push(20.0);
    // the 1e-12 band rule asks for a wider box than the guard needs
    let sz = sizing(&u0, &DispersionPolynomial::airy(), 16.0).unwrap();
    assert!(!sz.satisfied);
    let ev = Evolution::new(&u0, &DispersionPolynomial::airy()).unwrap();
    assert!(guard_fraction(&ev.at(16.0)) < 1e-6);
    let decay = airy_decay_experiment(&u0, &times, (2.0, 20.0)).unwrap();
    assert!(decay.sup_fit.samples_used >= 5);
    assert!(decay.excluded.iter().all(|e| matches!(e, Exclusion::Contaminated { t, .. } if *t > 16.0)));
    assert!((decay.sup_fit.slope + 1.0 / 3.0).abs() < 0.1);
    assert!((decay.right_derivative_fit.slope + 0.5).abs() < 0.1);
    assert!(decay.max_scaled_ratio.is_finite());
}

#[test]
fn local_energy_is_bounded_by_the_data_constant() {
    let u0 = airy_datum(8192.0, 65536);
    let times = geometric_times(1.0, 50.0, 2f64.sqrt());
    let e = check_airy_local_energy(&u0, 0.5, &times, Some((2.0, 50.0))).unwrap();
    assert!(e.report.pass);
    assert!(e.report.excluded.is_empty());
    assert!(e.fit.unwrap().slope <= -0.9);
}

#[test]
fn monomial_estimates() {
    let g = GridSpec::symmetric(4096.0, 1 << 15).unwrap();
    let u0 = sample(&AnalyticField::gaussian(&[0.0], 1.0), &g, Coverage::Enforce).unwrap();
    let times = geometric_times(1.0, 20.0, 2f64.sqrt());
    let k1 = check_monomial_estimate(1, &u0, &times, 2.0).unwrap();
    assert!(k1.pass && k1.excluded.is_empty());
    let k2 = check_monomial_estimate(2, &u0, &times, 2.0).unwrap();
    assert!(k2.pass && k2.excluded.is_empty());
}

#[test]
fn contaminated_samples_are_excluded() {
    let u0 = airy_datum(100.0, 2048);
    let times = geometric_times(2.0, 64.0, 2.0);
    let r = check_airy_pointwise(&u0, &times, &[0.0, 10.0]).unwrap();
    assert!(!r.excluded.is_empty());
    assert!(r.excluded.iter().all(|e| matches!(e, Exclusion::Contaminated { .. })));
    assert!(airy_decay_experiment(&u0, &geometric_times(20.0, 64.0, 1.1), (20.0, 64.0)).is_err());
}
