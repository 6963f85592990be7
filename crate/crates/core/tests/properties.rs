use mixed_hardy::atomic::{decompose_s, default_t, validate_atom};
use mixed_hardy::operators::{
    martingale_transform, maximal, p_value, q_value, square_function, tilde_maximal, TransformMultipliers,
};
use mixed_hardy::sampling::{random_martingale, random_multipliers, random_variable, trial_rng};
use mixed_hardy::{cond_exp, make_dyadic_space, mixed_norm, Martingale, MixedExponent};
use proptest::prelude::*;

fn exponent(d: usize) -> impl Strategy<Value = MixedExponent> {
    prop::collection::vec(prop_oneof![0.3f64..6.0, Just(f64::INFINITY)], d).prop_map(|v| MixedExponent::new(v).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_homogeneous(seed in any::<u64>(), p in exponent(2), c in -5.0f64..5.0) {
        let s = make_dyadic_space(2, 2).unwrap();
        let f = random_variable(&s, &mut trial_rng(seed, 0), -1.0, 1.0);
        let lhs = mixed_norm(&f.scale(c), &p).unwrap();
        prop_assert!(close(lhs, c.abs() * mixed_norm(&f, &p).unwrap(), 1e-12));
    }

    #[test]
    fn norm_is_monotone(seed in any::<u64>(), p in exponent(2)) {
        let s = make_dyadic_space(2, 2).unwrap();
        let mut rng = trial_rng(seed, 0);
        let f = random_variable(&s, &mut rng, -1.0, 1.0);
        let bigger = f.abs().add(&random_variable(&s, &mut rng, 0.0, 1.0));
        prop_assert!(mixed_norm(&f, &p).unwrap() <= mixed_norm(&bigger, &p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn uniform_exponent_collapses_to_scalar_norm(seed in any::<u64>(), q in 0.3f64..6.0) {
        let s = make_dyadic_space(3, 1).unwrap();
        let f = random_variable(&s, &mut trial_rng(seed, 0), -1.0, 1.0);
        let scalar = f.map(|v| v.abs().powf(q)).expectation().powf(1.0 / q);
        prop_assert!(close(mixed_norm(&f, &MixedExponent::uniform(q, 3).unwrap()).unwrap(), scalar, 1e-12));
    }

    #[test]
    fn quasi_triangle_with_power_r(seed in any::<u64>(), p in exponent(2)) {
        // ‖f + g‖^r <= ‖f‖^r + ‖g‖^r with r = min(1, p_min).
        let s = make_dyadic_space(2, 2).unwrap();
        let mut rng = trial_rng(seed, 0);
        let (f, g) = (random_variable(&s, &mut rng, -1.0, 1.0), random_variable(&s, &mut rng, -1.0, 1.0));
        let r = p.min().min(1.0);
        let lhs = mixed_norm(&f.add(&g), &p).unwrap().powf(r);
        let rhs = mixed_norm(&f, &p).unwrap().powf(r) + mixed_norm(&g, &p).unwrap().powf(r);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn tower_property(seed in any::<u64>(), m in 0usize..=3, n in 0usize..=3) {
        let s = make_dyadic_space(2, 3).unwrap();
        let g = random_variable(&s, &mut trial_rng(seed, 0), -1.0, 1.0);
        let both = cond_exp(&cond_exp(&g, n).unwrap(), m).unwrap();
        prop_assert!(both.max_abs_diff(&cond_exp(&g, m.min(n)).unwrap()) < 1e-12);
        prop_assert!((cond_exp(&g, m).unwrap().expectation() - g.expectation()).abs() < 1e-12);
    }

    #[test]
    fn conditional_expectation_contracts(seed in any::<u64>(), n in 0usize..=3, p in prop::collection::vec(1.0f64..6.0, 2)) {
        let p = MixedExponent::new(p).unwrap();
        let s = make_dyadic_space(2, 3).unwrap();
        let g = random_variable(&s, &mut trial_rng(seed, 0), -1.0, 1.0);
        prop_assert!(mixed_norm(&cond_exp(&g, n).unwrap(), &p).unwrap() <= mixed_norm(&g, &p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn pointwise_dominations(seed in any::<u64>(), signs in any::<bool>()) {
        let s = make_dyadic_space(2, 3).unwrap();
        let mut rng = trial_rng(seed, 0);
        let f = random_martingale(&s, &mut rng);
        let b = TransformMultipliers::new(&s, random_multipliers(&s, &mut rng, signs)).unwrap();
        let (sf, stf) = (square_function(&f, None), square_function(&martingale_transform(&f, &b).unwrap(), None));
        prop_assert!(stf.values().iter().zip(sf.values()).all(|(a, b)| *a <= b + 1e-12));
        let (mf, tilde) = (maximal(&f, None), tilde_maximal(&f.terminal()));
        prop_assert!(mf.values().iter().zip(tilde.values()).all(|(a, b)| *a <= b + 1e-12));
    }

    #[test]
    fn envelope_values_dominate_hardy_norms(seed in any::<u64>(), p in exponent(2)) {
        let s = make_dyadic_space(2, 2).unwrap();
        let f = random_martingale(&s, &mut trial_rng(seed, 0));
        prop_assert!(mixed_norm(&maximal(&f, None), &p).unwrap() <= p_value(&f, &p).unwrap() * (1.0 + 1e-12));
        prop_assert!(mixed_norm(&square_function(&f, None), &p).unwrap() <= q_value(&f, &p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn s_decomposition_reconstructs(seed in any::<u64>(), p in prop::collection::vec(0.3f64..6.0, 2)) {
        let p = MixedExponent::new(p).unwrap();
        let s = make_dyadic_space(2, 2).unwrap();
        let f = random_martingale(&s, &mut trial_rng(seed, 0));
        let dec = decompose_s(&f, &p, default_t(&p, false)).unwrap();
        prop_assert!(dec.reconstruction_error(&f) < 1e-9);
        for term in &dec.terms {
            prop_assert!(validate_atom(&term.atom, &p).unwrap().valid);
        }
    }

    #[test]
    fn scaling_a_martingale_scales_its_envelope_values(seed in any::<u64>(), c in 0.1f64..10.0) {
        let s = make_dyadic_space(1, 4).unwrap();
        let f: Martingale = random_martingale(&s, &mut trial_rng(seed, 0));
        let p = MixedExponent::uniform(1.5, 1).unwrap();
        prop_assert!(close(q_value(&f.scale(c), &p).unwrap(), c * q_value(&f, &p).unwrap(), 1e-12));
        prop_assert!(close(p_value(&f.scale(c), &p).unwrap(), c * p_value(&f, &p).unwrap(), 1e-12));
    }
}
