use proptest::prelude::*;
use thinlevy::numerics::*;

// 30-digit values of ζ
const ZETA_HALF: f64 = -1.460_354_508_809_586_8;
const ZETA_08: f64 = -4.437_538_415_895_551_6;
const ZETA_04: f64 = -1.134_797_783_866_981_6;

#[test]
fn zeta_exact_at_zero() {
    for n in [100u64, 1000, 12345] {
        for refinement in [Refinement::Plain, Refinement::Richardson] {
            let cfg = ZetaConfig {
                truncation: n,
                refinement,
            };
            assert_eq!(zeta_em(0.0, &cfg).unwrap().value, -0.5);
        }
    }
}

#[test]
fn zeta_against_reference_values() {
    let cfg = ZetaConfig::default();
    assert!((zeta_em(0.5, &cfg).unwrap().value - ZETA_HALF).abs() < 1e-6);
    assert!((zeta_em(0.8, &cfg).unwrap().value - ZETA_08).abs() < 1e-8);
    assert!((zeta_em(0.4, &cfg).unwrap().value - ZETA_04).abs() < 1e-8);
}

#[test]
fn zeta_large_n_richardson_oracle() {
    // the same truncated formula at N = 10⁷, refined
    let big = ZetaConfig {
        truncation: 10_000_000,
        refinement: Refinement::Richardson,
    };
    let oracle = zeta_em(0.5, &big).unwrap().value;
    assert!((oracle - ZETA_HALF).abs() < 1e-9);
    assert!((zeta_em(0.5, &ZetaConfig::default()).unwrap().value - oracle).abs() < 1e-6);
    let plain = zeta_em(
        0.5,
        &ZetaConfig {
            truncation: 10_000,
            refinement: Refinement::Plain,
        },
    )
    .unwrap();
    assert!((plain.value - oracle).abs() <= plain.error);
}

#[test]
fn zeta_domain() {
    let cfg = ZetaConfig::default();
    assert!(zeta_em(1.0, &cfg).is_err());
    assert!(zeta_em(-1.0, &cfg).is_err());
    assert!(ZetaConfig {
        truncation: 99,
        refinement: Refinement::Plain
    }
    .validate()
    .is_err());
}

#[test]
fn quadrature_closed_forms() {
    let spec = QuadratureSpec::default();
    let q = integrate_improper(|x| (-x).exp(), Domain::UpperHalf(0.0), &spec).unwrap();
    assert!((q.value - 1.0).abs() < 1e-10);
    let q = integrate_improper(|x| x * (-x * x).exp(), Domain::UpperHalf(0.0), &spec).unwrap();
    assert!((q.value - 0.5).abs() < 1e-10);
    // Λ integrand at θ = 0
    let q = integrate_improper(|y| thinlevy::ratefn::f_tail_y(y, 0.0), Domain::UpperHalf(0.0), &spec).unwrap();
    assert!(q.value.abs() < spec.abs_tol);
    assert_eq!(spec.abs_tol, 1e-10);
    assert_eq!(spec.rel_tol, 1e-8);
    assert_eq!(spec.max_subdivisions, 2048);
}

#[test]
fn quadrature_power_substitution() {
    // ∫_0^1 x^{-1/2} dx = 2 and ∫_0^1 ln x dx = -1, both singular at 0
    let spec = QuadratureSpec::with_tolerances(1e-12, 1e-12).with_exponent(3.0);
    assert!((integrate(|x| x.powf(-0.5), Domain::Interval(0.0, 1.0), &spec).unwrap() - 2.0).abs() < 1e-10);
    assert!((integrate(|x| x.ln(), Domain::Interval(0.0, 1.0), &spec).unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn minimizer_examples() {
    let m = minimize_scalar(|x| (x - 2.0) * (x - 2.0), (0.0, 5.0), 1e-10).unwrap();
    assert!((m.x_star - 2.0).abs() < 1e-8);
    let m = minimize_scalar(|x: f64| x.cosh() - x, (0.0, 3.0), 1e-10).unwrap();
    assert!((m.x_star - 1f64.asinh()).abs() < 1e-8);
    assert_eq!(m.g_star, m.x_star.cosh() - m.x_star);
    assert!(minimize_scalar(|x| x, (0.0, 1.0), 1e-10).is_err());
}

#[test]
fn laplace_table_transforms_every_order() {
    for order in [12, 14, 16] {
        let cfg = InversionConfig {
            order,
            working_precision: 32,
        };
        let f = laplace_invert_gs(|a| Ok(1.0 / (a * a)), 1.0, &cfg).unwrap().value;
        assert!((f - 1.0).abs() < 1e-6, "{order}: {f}");
        let g = laplace_invert_gs(|a| Ok(1.0 / (a * (a + 1.0))), 0.7, &cfg).unwrap().value;
        assert!((g + (-0.7f64).exp_m1()).abs() < 1e-5, "{order}: {g}");
    }
    // shallow orders are accurate only to ~1e-4 even in exact arithmetic
    for order in [8, 10] {
        let cfg = InversionConfig {
            order,
            working_precision: 32,
        };
        let f = laplace_invert_gs(|a| Ok(1.0 / (a * a)), 1.0, &cfg).unwrap().value;
        assert!((f - 1.0).abs() < 1e-3, "{order}: {f}");
    }
    assert!(InversionConfig {
        order: 14,
        working_precision: 20
    }
    .validate()
    .is_err());
    assert!(InversionConfig {
        order: 9,
        working_precision: 32
    }
    .validate()
    .is_err());
}

// Σ_{i≥2} c_i^a e^{-b c_i u} at τ = 3.5, 40-digit direct summation
// with an Euler–Maclaurin remainder
const SUM_3_1_20: f64 = 0.990_831_815_492_670_1;
const SUM_3_1_50: f64 = 0.626_657_061_779_596_8;
// c(a, 1) = (τ-1) Γ(a-τ+1)
const C_3_1: f64 = 2.5 * 1.772_453_850_905_516; // Γ(1/2)
const C_4_1: f64 = 2.5 * 0.886_226_925_452_758; // Γ(3/2)

#[test]
fn sum_ci_exp_against_summation_oracle() {
    let s = sum_ci_exp(3.0, 1.0, 20.0, 3.5).unwrap();
    assert!((s.sum / SUM_3_1_20 - 1.0).abs() < 2e-8, "{}", s.sum);
    assert!((s.scaling_constant / C_3_1 - 1.0).abs() < 1e-10);
    let ratio = s.sum / (s.scaling_constant * 20f64.powf(-0.5));
    assert!((0.9..=1.1).contains(&ratio));
    let s = sum_ci_exp(3.0, 1.0, 50.0, 3.5).unwrap();
    assert!((s.sum / SUM_3_1_50 - 1.0).abs() < 2e-8, "{}", s.sum);
    let ratio = s.sum / (s.scaling_constant * 50f64.powf(-0.5));
    assert!((0.95..=1.05).contains(&ratio));
    let c4 = sum_ci_exp(4.0, 1.0, 20.0, 3.5).unwrap().scaling_constant;
    assert!(c4 > 0.0 && (c4 / C_4_1 - 1.0).abs() < 1e-10);
    assert!(sum_ci_exp(2.5, 1.0, 20.0, 3.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrature_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k in 0.5f64..4.0) {
        let spec = QuadratureSpec::default();
        let f = |x: f64| (-k * x).exp();
        let g = |x: f64| x * x * (-x).exp();
        let q = |h: &dyn Fn(f64) -> f64| integrate_improper(h, Domain::UpperHalf(0.0), &spec).unwrap().value;
        let lhs = q(&|x| a * f(x) + b * g(x));
        let rhs = a * q(&f) + b * q(&g);
        prop_assert!((lhs - rhs).abs() <= 2.0 * spec.abs_tol.max(spec.rel_tol * rhs.abs()) + 1e-12);
    }

    #[test]
    fn sum_ci_exp_decreases_in_b_and_u(b in 0.2f64..3.0, u in 1.0f64..40.0) {
        let base = sum_ci_exp(3.0, b, u, 3.5).unwrap().sum;
        prop_assert!(sum_ci_exp(3.0, b * 1.1, u, 3.5).unwrap().sum < base);
        prop_assert!(sum_ci_exp(3.0, b, u * 1.1, 3.5).unwrap().sum < base);
    }

    #[test]
    fn zeta_error_bound_shrinks_with_n(s in 0.05f64..0.95, n in 100u64..5000) {
        let e = |n| zeta_em(s, &ZetaConfig { truncation: n, refinement: Refinement::Plain }).unwrap().error;
        prop_assert!(e(2 * n) < e(n) && e(4 * n) < e(2 * n));
    }
}
