use approx::assert_relative_eq;
use dispersive_core::fields::{sample, AnalyticField, Coverage, FieldKind, GridSpec, SampledField};
use dispersive_core::harness::fit_decay;
use dispersive_core::norms::{dyadic_bump, unit_bump_l2_sq, weighted_l2, x_norm, DyadicPartition, Weight};
use dispersive_core::spectral::{group_property_check, propagate, DispersionPolynomial};
use dispersive_core::transport::{DispersionMap, KsOptions, TransportSolution};
use num_complex::Complex64;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn packet_1d() -> impl Strategy<Value = AnalyticField> {
    (-4.0..4.0f64, 0.8..2.5f64, -1.5..1.5f64).prop_map(|(c, w, k)| AnalyticField::gaussian_modulated(&[c], w, &[k]))
}

fn shell_packet() -> impl Strategy<Value = AnalyticField> {
    (prop::bool::ANY, 4.0..12.0f64, 0.3..0.8f64, -2.0..2.0f64).prop_map(|(neg, c, w, k)| {
        let c = if neg { -c } else { c };
        AnalyticField::gaussian_modulated(&[c], w, &[k])
    })
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn parseval(datum in packet_1d()) {
        let g = GridSpec::symmetric(40.0, 1024).unwrap();
        let f = sample(&datum, &g, Coverage::Enforce).unwrap();
        assert_relative_eq!(f.l2_norm(), f.l2_norm_spectral(), max_relative = 1e-12);
    }

    #[test]
    fn derivatives_compose(datum in packet_1d()) {
        let g = GridSpec::symmetric(40.0, 1024).unwrap();
        let f = sample(&datum, &g, Coverage::Enforce).unwrap();
        let twice = f.spectral_derivative(1).unwrap().spectral_derivative(1).unwrap();
        let direct = f.spectral_derivative(2).unwrap();
        let diff = twice.sub(&direct).unwrap().l2_norm();
        prop_assert!(diff <= 1e-12 * direct.l2_norm().max(1.0), "{diff:e}");
    }

    #[test]
    fn gaussian_integral_matches_moment(c in -3.0..3.0f64, w in 0.5..2.0f64) {
        let g = GridSpec::symmetric(30.0, 2048).unwrap();
        let datum = AnalyticField::gaussian(&[c], w);
        let f = sample(&datum, &g, Coverage::Enforce).unwrap();
        let oracle = datum.integral().unwrap();
        prop_assert!((f.integrate() - oracle).norm() <= 1e-9 * oracle.norm());
    }

    #[test]
    fn gradient_matches_finite_differences(
        x in -2.0..2.0f64, y in -2.0..2.0f64, c in -1.0..1.0f64, w in 0.6..1.5f64, k in -1.0..1.0f64,
    ) {
        let datum = AnalyticField::gaussian_modulated(&[c, -c], w, &[k, 0.5 * k]);
        let grad = datum.gradient(&[x, y]);
        let h = 1e-5;
        for axis in 0..2 {
            let mut plus = [x, y];
            let mut minus = [x, y];
            plus[axis] += h;
            minus[axis] -= h;
            let fd = (datum.value(&plus) - datum.value(&minus)) / (2.0 * h);
            prop_assert!((fd - grad[axis]).norm() <= 1e-6, "axis {axis}: {fd} vs {}", grad[axis]);
        }
    }

    #[test]
    fn density_is_constant_along_characteristics(
        q in -2.0..2.0f64, p in -2.0..2.0f64, t in 0.0..20.0f64, which in 0usize..3,
    ) {
        let map = [DispersionMap::Identity { d: 1 }, DispersionMap::Relativistic { d: 1 }, DispersionMap::SquareD1][which];
        let sol = TransportSolution::new(AnalyticField::gaussian(&[0.3, -0.2], 0.8), map).unwrap();
        let w = map.w(&[p])[0];
        let moved = sol.evaluate_density(t, &[q + t * w], &[p]);
        let start = sol.evaluate_density(0.0, &[q], &[p]);
        prop_assert!((moved - start).abs() <= 1e-14 * start.abs().max(1e-300));
    }

    #[test]
    fn transport_boost_matches_finite_differences(
        q in -2.0..2.0f64, p in -1.5..1.5f64, t in 0.0..5.0f64,
    ) {
        let sol = TransportSolution::new(AnalyticField::gaussian(&[0.0, 0.0], 1.0), DispersionMap::Relativistic { d: 1 }).unwrap();
        // W nu = d_p nu + t w'(p) d_q nu
        let h = 1e-5;
        let dp = (sol.evaluate_density(t, &[q], &[p + h]) - sol.evaluate_density(t, &[q], &[p - h])) / (2.0 * h);
        let dq = (sol.evaluate_density(t, &[q + h], &[p]) - sol.evaluate_density(t, &[q - h], &[p])) / (2.0 * h);
        let wprime = DispersionMap::Relativistic { d: 1 }.jacobian(&[p])[0][0];
        let fd = dp + t * wprime * dq;
        let exact = sol.apply_transport_boost(t, 0, &[q], &[p]);
        prop_assert!((fd - exact).abs() <= 1e-6, "{fd} vs {exact}");
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn transport_mass_is_conserved(c in -1.0..1.0f64, w in 0.5..1.2f64, t in 0.0..10.0f64, which in 0usize..3) {
        let map = [DispersionMap::Identity { d: 1 }, DispersionMap::Relativistic { d: 1 }, DispersionMap::SquareD1][which];
        let sol = TransportSolution::new(AnalyticField::gaussian(&[c, 0.5 * c], w), map).unwrap();
        let g0 = sol.covering_phase_grid(0.0, 10.0, 1 << 16).unwrap();
        let gt = sol.covering_phase_grid(t, 10.0, 1 << 16).unwrap();
        let m0 = sol.conserved_functional(|_, v| v, 0.0, &g0).unwrap();
        let mt = sol.conserved_functional(|_, v| v, t, &gt).unwrap();
        prop_assert!((mt / m0 - 1.0).abs() <= 1e-8, "{m0} {mt}");
    }

    #[test]
    fn free_streaming_boost_inequality(w in 0.6..1.5f64, t_index in 0usize..6) {
        let t = [0.5, 1.0, 2.0, 5.0, 10.0, 100.0][t_index];
        let sol = TransportSolution::new(AnalyticField::gaussian(&[0.0, 0.0], w), DispersionMap::Identity { d: 1 }).unwrap();
        let s = sol.ks_vlasov_check(t, &KsOptions::default()).unwrap();
        prop_assert!(s.lhs <= s.rhs * (1.0 + 1e-9), "t = {t}: {} > {}", s.lhs, s.rhs);
    }

    #[test]
    fn propagation_is_unitary_and_a_group(datum in packet_1d(), s in -2.0..2.0f64, t in -2.0..2.0f64, which in 0usize..4) {
        let disp = [
            DispersionPolynomial::schrodinger(1).unwrap(),
            DispersionPolynomial::airy(),
            DispersionPolynomial::even_order(1).unwrap(),
            DispersionPolynomial::even_order(2).unwrap(),
        ][which].clone();
        let g = GridSpec::symmetric(200.0, 4096).unwrap();
        let u0 = sample(&datum, &g, Coverage::Enforce).unwrap();
        let u = propagate(&u0, &disp, t).unwrap();
        prop_assert!((u.l2_norm() / u0.l2_norm() - 1.0).abs() <= 1e-12);
        prop_assert!(group_property_check(&u0, &disp, s, t).unwrap() <= 1e-12);
    }

    #[test]
    fn airy_keeps_real_data_real(c in -3.0..3.0f64, w in 0.6..2.0f64, t in 0.0..5.0f64) {
        let g = GridSpec::symmetric(200.0, 4096).unwrap();
        let real = sample(&AnalyticField::gaussian(&[c], w), &g, Coverage::Enforce).unwrap();
        let complex = real.map(FieldKind::Complex, |v| v);
        let u = propagate(&complex, &DispersionPolynomial::airy(), t).unwrap();
        let imag = u.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        prop_assert!(imag <= 1e-12);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn dyadic_norms_sandwich_and_nest(datum in shell_packet(), theta in -1.0..1.5f64) {
        let g = GridSpec::symmetric(64.0, 4096).unwrap();
        let p = DyadicPartition::build(&g, -2, 4).unwrap();
        let f = sample(&datum, &g, Coverage::Enforce).unwrap();
        let l2 = f.l2_norm();
        let x02 = x_norm(&f, 0.0, 2.0, &p).unwrap();
        prop_assert!(x02.truncation.is_none());
        prop_assert!(x02.value <= l2 * (1.0 + 1e-12) && x02.value >= l2 / 2f64.sqrt() * (1.0 - 1e-12));

        let inf = x_norm(&f, theta, f64::INFINITY, &p).unwrap().value;
        let two = x_norm(&f, theta, 2.0, &p).unwrap().value;
        let one = x_norm(&f, theta, 1.0, &p).unwrap().value;
        prop_assert!(inf <= two * (1.0 + 1e-12) && two <= one * (1.0 + 1e-12));

        // the grid holds x = 0, where negative powers blow up
        let a = theta.abs();
        let two = x_norm(&f, a, 2.0, &p).unwrap().value;
        let weighted = weighted_l2(&f, Weight::Power { a }).value;
        let factor = 2f64.powf(a + 0.5);
        prop_assert!(two <= factor * weighted && weighted <= factor * two, "{two} vs {weighted}");
    }

    #[test]
    fn dyadic_pieces_are_bounded_by_the_sup(k in -2i32..=4, amp in 0.1..3.0f64) {
        let g = GridSpec::symmetric(64.0, 4096).unwrap();
        let p = DyadicPartition::build(&g, -2, 4).unwrap();
        let f = SampledField::from_fn(g, FieldKind::Complex, |x| Complex64::new(amp * (x[0]).cos(), amp * (x[0]).sin()));
        let piece = p.pieces(&f).unwrap()[(k + 2) as usize];
        let c = unit_bump_l2_sq(1).sqrt();
        prop_assert!(piece <= c * 2f64.powf(k as f64 / 2.0) * f.max_abs() * (1.0 + 1e-6));
        prop_assert!(dyadic_bump(k, 2f64.powi(k)) == 1.0);
    }

    #[test]
    fn power_laws_are_recovered(a_index in 0usize..4, scale in 0.1..10.0f64) {
        let a = [1.0 / 3.0, 0.5, 1.0, 2.0][a_index];
        let series: Vec<(f64, f64)> = (0..12).map(|i| {
            let t = 2f64.powf(i as f64 / 2.0);
            (t, scale * t.powf(-a))
        }).collect();
        let fit = fit_decay(&series, (1.0, 100.0)).unwrap();
        prop_assert!((fit.slope + a).abs() <= 1e-12);
    }
}
