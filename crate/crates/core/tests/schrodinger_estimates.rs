use dispersive_core::fields::{sample, AnalyticField, Coverage, GridSpec, SampledField};
use dispersive_core::harness::schrodinger::boost_word_norms;
use dispersive_core::harness::{
    check_dispersive_schrodinger, check_ks_schrodinger, check_ks_schrodinger_series, check_local_mass, check_lp_decay,
    geometric_times, RatioBound,
};
use dispersive_core::norms::{hs_norm, x_norm, DyadicPartition};
use dispersive_core::spectral::{propagate, DispersionPolynomial, Evolution};
use dispersive_core::symmetry::{conserved_operator_norm, CommutingOperator};

/// `exp(-|x|^2 / 2)` evolves with `|u(t,x)| = (1+4t^2)^{-d/4} exp(-|x|^2 / (2(1+4t^2)))`.
fn modulus_oracle(t: f64, x: f64) -> f64 {
    let a = 1.0 + 4.0 * t * t;
    a.powf(-0.25) * (-x * x / (2.0 * a)).exp()
}

fn unit_gaussian(half: f64, n: usize) -> SampledField {
    let g = GridSpec::symmetric(half, n).unwrap();
    sample(&AnalyticField::gaussian(&[0.0], 1.0), &g, Coverage::Enforce).unwrap()
}

#[test]
fn gaussian_modulus_matches_closed_form() {
    let u0 = unit_gaussian(2048.0, 1 << 16);
    let ev = Evolution::new(&u0, &DispersionPolynomial::schrodinger(1).unwrap()).unwrap();
    let mid = 1 << 15;
    for t in [1.0, 5.0, 25.0] {
        let u = ev.at(t);
        let centre = u.values()[mid].norm();
        let oracle = modulus_oracle(t, 0.0);
        assert!((centre / oracle - 1.0).abs() < 1e-8, "t = {t}: {centre} vs {oracle}");
        let worst = (0..u.grid().len())
            .step_by(61)
            .map(|i| (u.values()[i].norm() - modulus_oracle(t, u.grid().coord(0, i))).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "t = {t}: {worst}");
    }
}

#[test]
fn unitarity_and_sobolev_conservation() {
    let g = GridSpec::symmetric(512.0, 1 << 14).unwrap();
    let u0 = sample(&AnalyticField::gaussian_modulated(&[3.0], 1.3, &[0.7]), &g, Coverage::Enforce).unwrap();
    let disp = DispersionPolynomial::schrodinger(1).unwrap();
    let ev = Evolution::new(&u0, &disp).unwrap();
    for t in [0.5, 3.0, 40.0] {
        let u = ev.at(t);
        assert!((u.l2_norm() / u0.l2_norm() - 1.0).abs() < 1e-12);
        for s in [0.25, 0.5, 1.0] {
            let a = hs_norm(&u0, s).value;
            let b = hs_norm(&u, s).value;
            assert!((b / a - 1.0).abs() < 1e-12, "s = {s}, t = {t}");
        }
    }
}

#[test]
fn two_dimensional_gaussian_factorizes() {
    let g = GridSpec::symmetric_nd(&[40.0, 40.0], &[256, 256]).unwrap();
    let u0 = sample(&AnalyticField::gaussian(&[0.0, 0.0], 1.0), &g, Coverage::Enforce).unwrap();
    let u = propagate(&u0, &DispersionPolynomial::schrodinger(2).unwrap(), 2.0).unwrap();
    let peak = u.max_abs();
    assert!((peak - modulus_oracle(2.0, 0.0).powi(2)).abs() < 1e-10);
}

fn dispersive_setup() -> (SampledField, DyadicPartition) {
    let g = GridSpec::symmetric(4096.0, 1 << 17).unwrap();
    let u0 = sample(&AnalyticField::gaussian(&[2.0], 0.25), &g, Coverage::Enforce).unwrap();
    let p = DyadicPartition::build(&g, -2, 4).unwrap();
    (u0, p)
}

#[test]
fn dispersive_estimate_has_a_stable_constant() {
    let (u0, p) = dispersive_setup();
    let times = geometric_times(1.0, 100.0, 2f64.sqrt());
    let report = check_dispersive_schrodinger(&u0, &times, &p, 1.2).unwrap();
    assert!(report.excluded.is_empty(), "{:?}", report.excluded);
    assert!(report.pass, "spread {}", report.spread());
    assert!(report.max_ratio.is_finite() && report.max_ratio > 0.0);

    // lhs at t = 25 from the closed form: width s, |u|_inf = (1 + 4t^2/s^4)^{-1/4}
    let rhs = x_norm(&u0, 0.5, 1.0, &p).unwrap().value;
    let s4 = 0.25f64.powi(4);
    let oracle = 25f64.sqrt() * (1.0 + 4.0 * 625.0 / s4).powf(-0.25) / rhs;
    let u = propagate(&u0, &DispersionPolynomial::schrodinger(1).unwrap(), 25.0).unwrap();
    let measured = 5.0 * u.max_abs() / rhs;
    assert!((measured - oracle).abs() < 1e-6, "{measured} vs {oracle}");
}

#[test]
fn zero_datum_gives_zero_reports() {
    let g = GridSpec::symmetric(64.0, 4096).unwrap();
    let p = DyadicPartition::build(&g, -2, 4).unwrap();
    let zero = SampledField::zeros(g);
    let r = check_dispersive_schrodinger(&zero, &[1.0, 2.0], &p, 2.0).unwrap();
    assert!(r.pass && r.max_ratio == 0.0);
    let e = check_ks_schrodinger(&zero, 1.0).unwrap();
    assert_eq!((e.lhs, e.rhs), (0.0, 0.0));
    let m = check_local_mass(&zero, 0.25, &[1.0, 2.0], &p, 2.0).unwrap();
    assert!(m.pass && m.samples.iter().all(|s| s.lhs == 0.0 && s.rhs == 0.0));
}

#[test]
fn klainerman_sobolev_one_dimension() {
    let u0 = unit_gaussian(2048.0, 1 << 14);
    let e = check_ks_schrodinger(&u0, 4.0).unwrap();
    let lhs_oracle = 4.0 * 65f64.powf(-0.5);
    assert!((e.lhs - lhs_oracle).abs() < 1e-10, "{}", e.lhs);
    // ||u|| = pi^{1/4}, ||W u(t)|| = ||x u0|| / 2 = pi^{1/4} / (2 sqrt 2)
    let rhs_oracle = 2.0 * std::f64::consts::PI.sqrt() / (2.0 * 2f64.sqrt());
    assert!((e.rhs - rhs_oracle).abs() < 1e-9, "{}", e.rhs);

    let (report, _) = check_ks_schrodinger_series(&u0, &geometric_times(1.0, 100.0, 2f64.sqrt()), 2.0).unwrap();
    assert!(report.pass && report.excluded.is_empty());
    assert!(report.max_ratio <= 1.0);
}

#[test]
fn klainerman_sobolev_two_dimensions_matches_squared_structure() {
    let g1 = GridSpec::symmetric(40.0, 256).unwrap();
    let g2 = GridSpec::symmetric_nd(&[40.0, 40.0], &[256, 256]).unwrap();
    let one = sample(&AnalyticField::gaussian(&[0.0], 1.0), &g1, Coverage::Enforce).unwrap();
    let two = sample(&AnalyticField::gaussian(&[0.0, 0.0], 1.0), &g2, Coverage::Enforce).unwrap();
    let e1 = check_ks_schrodinger(&one, 2.0).unwrap();
    let e2 = check_ks_schrodinger(&two, 2.0).unwrap();
    assert!((e2.lhs / e1.lhs.powi(2) - 1.0).abs() < 0.1);
    assert!((e2.mixed_block.unwrap() / e1.rhs.powi(2) - 1.0).abs() < 0.1);
    assert!(e2.lhs <= e2.rhs);
}

#[test]
fn boost_words_are_conserved() {
    let g = GridSpec::symmetric_nd(&[60.0, 60.0], &[384, 384]).unwrap();
    let u0 =
        sample(&AnalyticField::gaussian_modulated(&[1.0, -0.5], 1.2, &[0.3, -0.2]), &g, Coverage::Enforce).unwrap();
    let disp = DispersionPolynomial::schrodinger(2).unwrap();
    let w0 = boost_word_norms(&u0, 0.0).unwrap();
    let ev = Evolution::new(&u0, &disp).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let wt = boost_word_norms(&ev.at(t), t).unwrap();
        for (a, b) in w0.iter().zip(&wt) {
            assert_eq!(a.alpha, b.alpha);
            assert!((b.norm / a.norm - 1.0).abs() < 1e-9, "{:?} at t = {t}: {} vs {}", a.alpha, a.norm, b.norm);
        }
    }
    let word = [CommutingOperator::SchrodingerBoost { axis: 0 }, CommutingOperator::SchrodingerBoost { axis: 1 }];
    let series = conserved_operator_norm(&u0, &word, &disp, &[0.0, 1.0, 2.0]).unwrap();
    assert!(series.iter().all(|(_, v)| (v / series[0].1 - 1.0).abs() < 1e-9));
}

#[test]
fn lp_decay_rates() {
    let u0 = unit_gaussian(2048.0, 1 << 14);
    let times = geometric_times(5.0, 50.0, 2f64.sqrt());
    let zero = check_lp_decay(&u0, 0.0, &times, None, None, 2.0).unwrap();
    for s in &zero.weighted.samples {
        assert!((s.ratio() - 1.0).abs() < 1e-12);
    }
    assert!(zero.weighted.pass);
    let half = check_lp_decay(&u0, 0.5, &times, None, Some((5.0, 50.0)), 2.0).unwrap();
    assert_eq!(half.p, 4.0);
    let fit = half.fit.unwrap();
    assert!((fit.slope + 0.25).abs() < 0.05, "{}", fit.slope);
    // ||u(t)||_4 = (pi/2)^{1/8} (1+4t^2)^{-1/8}
    for &(t, v) in &half.series {
        let oracle = (std::f64::consts::PI / 2.0).powf(0.125) * (1.0 + 4.0 * t * t).powf(-0.125);
        assert!((v / oracle - 1.0).abs() < 1e-9);
    }
    assert!(half.weighted.pass && half.truncated.pass);
}

#[test]
fn local_mass_ratios() {
    let g = GridSpec::symmetric(4096.0, 1 << 15).unwrap();
    let p = DyadicPartition::build(&g, 0, 11).unwrap();
    let u0 = sample(&AnalyticField::gaussian(&[8.0], 1.0), &g, Coverage::Enforce).unwrap();
    let times = geometric_times(1.0, 100.0, 2f64.sqrt());
    let zero = check_local_mass(&u0, 0.0, &times, &p, 2.0).unwrap();
    assert!(zero.excluded.is_empty(), "{:?}", zero.excluded);
    for s in &zero.samples {
        let r = s.ratio();
        assert!(r >= 2f64.powf(-0.5) - 1e-9 && r <= 2f64.powf(0.5) + 1e-9, "{r}");
    }
    let quarter = check_local_mass(&u0, 0.25, &times, &p, 2.0).unwrap();
    assert!(quarter.pass, "spread {}", quarter.spread());
    assert!(matches!(quarter.bound, RatioBound::Empirical { .. }));
}
