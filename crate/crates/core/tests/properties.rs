//! Property tests over randomly drawn generators and parameters.

use std::sync::Arc;

use proptest::prelude::*;
use squeezeflux::analysis::*;
use squeezeflux::flux::*;
use squeezeflux::genfun::*;
use squeezeflux::jet::Jet;
use squeezeflux::modes::*;
use squeezeflux::{fmt17, PI};

fn analytic(g: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> GeneratingFunction {
    let g: AnalyticFn = Arc::new(g);
    GeneratingFunction::from_segments(vec![Segment::new(Interval::WHOLE_LINE, SegmentForm::Analytic(g))], vec![]).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

prop_compose! {
    fn shock_params()(x_i in -5.0..5.0f64, l in 0.01..5.0f64, u in 0.001..0.99f64, hbar in 0.1..10.0f64) -> ShockParams {
        ShockParams::new(u * hbar / (12.0 * PI * l), x_i, x_i + l, hbar)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moebius_jets_have_zero_schwarzian(b in -0.4..0.4f64, c in -1.0..1.0f64, d in 0.5..2.0f64, x in -1.9..1.9f64) {
        let p = MobiusParams::new(1.0, b, c, d);
        prop_assume!(p.determinant() > 0.0);
        let f = make_moebius(p, Interval::new(-2.0, 2.0)).unwrap();
        let j = f.segments()[0].form.jet(x);
        prop_assert!(j.schwarzian().abs() < 1e-10);
        prop_assert_eq!(flux_density(&f, x, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn shock_is_c1_with_the_delta_law(s in shock_params()) {
        let f = make_shock(&s).unwrap();
        for &k in f.kinks() {
            let (l, r) = f.one_sided(k).unwrap();
            prop_assert!((l.v - r.v).abs() <= 1e-12 * (1.0 + l.v.abs()));
            prop_assert!(rel(r.d1, l.d1) <= 1e-12);
        }
        let d = delta_terms(&f, s.hbar);
        let k = s.coupling();
        prop_assert!(rel(d[0].weight, -s.e_n) < 1e-10);
        prop_assert!(rel(d[1].weight, s.e_n / (1.0 - k)) < 1e-10);
        prop_assert!(validate(&f).passed());
    }

    #[test]
    fn inverse_undoes_value(s in shock_params(), t in -1.0..2.0f64) {
        let f = make_shock(&s).unwrap();
        let x = s.x_i + t * s.length();
        let back = f.inverse(f.value(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * (1.0 + x.abs()));
    }

    #[test]
    fn json_round_trip_preserves_jets(s in shock_params(), t in -1.0..2.0f64) {
        for f in [make_shock(&s).unwrap(), make_f_eta(s.e_n, s.length(), s.hbar).unwrap()] {
            let (g, h) = GeneratingFunction::from_json(&f.to_json(Some(s.hbar)).unwrap()).unwrap();
            prop_assert_eq!(h, Some(s.hbar));
            prop_assert_eq!(g.kinks(), f.kinks());
            let x = s.x_i + t * s.length();
            prop_assume!(!f.is_kink(x));
            prop_assert_eq!(g.jet(x).unwrap(), f.jet(x).unwrap());
        }
    }

    #[test]
    fn flux_is_invariant_under_moebius_postcomposition(a in -0.5..0.5f64, b in -0.2..0.2f64, d in 0.5..2.0f64, x in -1.0..1.0f64) {
        // |g| <= |x| + 0.5 keeps 1 + b g away from zero on [-1, 1]
        let g = analytic(move |y| y + y.tanh() * a);
        let mg = analytic(move |y| {
            let v = y + y.tanh() * a;
            (v * d) / (v * b + 1.0)
        });
        let want = flux_density(&g, x, 1.0).unwrap();
        let got = flux_density(&mg, x, 1.0).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn schwarzian_transforms_under_affine_reparametrization(lam in 0.2..3.0f64, mu in -1.0..1.0f64, x in -1.0..1.0f64) {
        // S(f(λx + μ)) = λ² S(f)(λx + μ)
        let f = analytic(|y| y.sinh() + y);
        let g = analytic(move |y| {
            let z = y * lam + mu;
            z.sinh() + z
        });
        let want = lam * lam * schwarzian(&f, lam * x + mu).unwrap();
        prop_assert!((schwarzian(&g, x).unwrap() - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn flux_is_linear_in_hbar(a in 0.05..0.45f64, x in -2.0..2.0f64, k in 0.01..100.0f64) {
        let f = analytic(move |y| y + (y * 3.0).tanh() * a);
        let one = flux_density(&f, x, 1.0).unwrap();
        prop_assert!((flux_density(&f, x, k).unwrap() - k * one).abs() <= 1e-14 * k * (1.0 + one.abs()));
    }

    #[test]
    fn compensation_bound_dominates_and_grows(e in 0.0..0.02f64, x1 in 0.0..1.3f64, dx in 0.0..0.01f64) {
        let x2 = x1 + dx;
        prop_assume!(12.0 * PI * e * x2 < 0.999);
        let b1 = compensation_lower_bound(e, x1, 1.0).unwrap();
        let b2 = compensation_lower_bound(e, x2, 1.0).unwrap();
        prop_assert!(b1 >= e);
        prop_assert!(b2 >= b1);
    }

    #[test]
    fn two_point_is_symmetric_and_negative(s in shock_params(), t1 in -1.0..2.0f64, t2 in -1.0..2.0f64) {
        prop_assume!((t1 - t2).abs() > 1e-3);
        let f = make_shock(&s).unwrap();
        let (a, b) = (s.x_i + t1 * s.length(), s.x_i + t2 * s.length());
        let ab = two_point(&f, a, b, s.hbar).unwrap();
        let ba = two_point(&f, b, a, s.hbar).unwrap();
        prop_assert!(ab < 0.0);
        prop_assert!(rel(ab, ba) < 1e-14);
    }

    #[test]
    fn csv_numbers_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn point_split_matches_schwarzian(a in 0.05..0.45f64, x in -1.0..1.0f64) {
        let f = analytic(move |y| y + (y * 3.0).tanh() * a);
        let want = flux_density(&f, x, 1.0).unwrap();
        let got = point_split_flux(&f, x, &SplitParams::default(), 1.0).unwrap().value;
        prop_assert!((got - want).abs() <= 1e-4 * want.abs().max(1e-12), "{} vs {}", got, want);
    }

    #[test]
    fn gram_is_hermitian(c1 in 10.0..14.0f64, c2 in 10.0..14.0f64, s1 in 0.5..1.2f64, s2 in 0.5..1.2f64) {
        let p = [
            Wavepacket::new(c1, s1, Sector::Positive, None).unwrap(),
            Wavepacket::new(c2, s2, Sector::Positive, None).unwrap(),
            Wavepacket::new(c2, s1, Sector::Conjugate, None).unwrap(),
        ];
        let g = gram_matrix(&p, 1.0).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                prop_assert!((g[j][k] - g[k][j].conj()).norm() < 1e-9);
                prop_assert!((g[j][k] - packet_overlap_closed_form(&p[j], &p[k])).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn oracle_never_beats_the_closed_form(u in 0.05..0.5f64, l in 0.3..3.0f64, seed in 0u64..1000) {
        let p = MinimizerProblem::new(u / (12.0 * PI * l), l, 1.0);
        let closed = min_compensation_energy(&p).unwrap();
        let r = numeric_min_oracle(&p, seed).unwrap();
        prop_assert!(r.energy >= closed - 1e-6);
        prop_assert!(r.energy <= 1.005 * closed);
    }
}
