mod common;

use common::{gauss_legendre_half_line, rel};
use num_traits::ToPrimitive;
use std::f64::consts::{LN_2, PI};
use ymqm_core::heat_kernel::*;
use ymqm_core::special::{gamma_fn, EULER_GAMMA};
use ymqm_core::wk::{self, integrate_momenta, Potential};
use ymqm_core::{Error, ModelParams};

fn n2(g: f64, v: f64, hbar: f64, t: f64) -> ModelParams {
    ModelParams::n2(g, v, hbar, t).unwrap()
}

/// `v` giving a requested `z` at fixed `g`, `t`.
fn v_for_z(z: f64, g: f64, t: f64) -> f64 {
    (2.0 * g * g * z / t).powf(0.25)
}

/// Test-side `I_mn` by nested Gauss-Legendre over the quadrant.
fn imn_oracle(m: u32, n: u32, g: f64, v2: f64, t: f64) -> f64 {
    let inner = |x: f64| {
        let decay = 0.5 * t * (v2 + g * g * x * x);
        let f = |y: f64| {
            x.powi(2 * m as i32) * y.powi(2 * n as i32) * (-0.5 * t * (g * g * x * x * y * y + v2 * (x * x + y * y))).exp()
        };
        gauss_legendre_half_line(f, decay.powf(-0.5), 200)
    };
    4.0 * gauss_legendre_half_line(inner, (0.5 * t * v2).powf(-0.5), 200)
}

#[test]
fn prefactor_values() {
    let p = n2(1.0, 0.0, 1.0, 1.0);
    assert!(rel(prefactor_k(&p).unwrap(), 1.0 / (2.0 * PI).sqrt()) < 1e-15);
    let q = n2(1.0, 0.0, 1.0, 4.0);
    assert!(rel(prefactor_k(&q).unwrap() / prefactor_k(&p).unwrap(), 0.125) < 1e-15);
    let r = n2(1e-2, 0.0, 1.0, 1.0);
    assert!((r.lambda2() - 1e-4).abs() < 1e-18);
    assert!(rel(prefactor_k(&r).unwrap(), (2.0 * PI * 1e-4).powf(-0.5)) < 1e-14);
}

#[test]
fn prefactor_needs_coupling() {
    assert!(prefactor_k(&n2(0.0, 1.0, 1.0, 1.0)).is_err());
}

#[test]
fn thomas_fermi_deep_harmonic_regime() {
    // tv⁴/4g² = 10
    let (g, t, hbar) = (1.0, 1.0, 1.0);
    let p = n2(g, v_for_z(20.0, g, t), hbar, t);
    let oracle = imn_oracle(0, 0, g, p.v * p.v, t) * (2.0 * PI / t) / (2.0 * PI * hbar).powi(2);
    assert!(rel(tf_partition_n2(&p).unwrap(), oracle) < 1e-10);
}

#[test]
fn thomas_fermi_scales_as_inverse_hbar_squared() {
    let p = n2(0.7, 1.1, 1.0, 0.8);
    let mut q = p;
    q.hbar = 2.0;
    assert!(rel(tf_partition_n2(&q).unwrap(), 0.25 * tf_partition_n2(&p).unwrap()) < 1e-14);
}

#[test]
fn thomas_fermi_small_v_limit() {
    let (g, t) = (1.0, 1.0);
    for &z in &[1e-2, 1e-4, 1e-6] {
        let p = n2(g, v_for_z(z, g, t), 1.0, t);
        let lim = tf_limit_v0(&p).unwrap();
        let ratio = tf_partition_n2(&p).unwrap() / lim.value;
        assert!((ratio - 1.0).abs() < z, "z={z}: ratio {ratio}");
        assert!(lim.is_clear());
    }
    let p = n2(g, v_for_z(1e-6, g, t), 1.0, t);
    let r = tf_partition_n2(&p).unwrap() / tf_limit_v0(&p).unwrap().value;
    assert!((r - 1.0).abs() < 1e-3);
}

#[test]
fn thomas_fermi_limit_formula_and_slope() {
    let p = n2(1.0, 0.3, 1.0, 1.0);
    let k = prefactor_k(&p).unwrap();
    let direct = k * ((8.0 * p.g * p.g / (p.t * p.v.powi(4))).ln() - EULER_GAMMA);
    assert!(rel(tf_limit_v0(&p).unwrap().value, direct) < 1e-14);
    let h: f64 = 1e-4;
    let a = tf_limit_v0(&p.with_v(p.v * (-h).exp())).unwrap().value;
    let b = tf_limit_v0(&p.with_v(p.v * h.exp())).unwrap().value;
    assert!(((b - a) / (2.0 * h) / k + 4.0).abs() < 1e-8);
}

#[test]
fn thomas_fermi_limit_flags_large_z() {
    let p = n2(1.0, 2.0, 1.0, 1.0);
    let lim = tf_limit_v0(&p).unwrap();
    assert!(matches!(lim.warnings.as_slice(), [Warning::ZNotSmall { .. }]));
}

#[test]
fn closed_forms_reject_wrong_model_and_missing_higgs() {
    let p3 = ModelParams::n3(1.0, 1.0, 1.0, 1.0).unwrap();
    assert!(matches!(tf_partition_n2(&p3), Err(Error::ModelMismatch(_))));
    assert!(matches!(z2_closed_n2(&n2(1.0, 0.0, 1.0, 1.0)), Err(Error::Domain(_))));
}

#[test]
fn z2_free_oscillator_limit() {
    for &v in &[0.5, 1.0, 2.0] {
        let p = n2(1e-3, v, 1.0, 1.0);
        let z2 = z2_closed_n2(&p).unwrap();
        assert!((z2 + 1.0 / 12.0).abs() < 1e-5, "v={v}: {z2}");
    }
}

#[test]
fn z2_small_v_singularity() {
    let p = n2(1.3, 2e-3, 0.9, 0.8);
    let expect = -prefactor_k(&p).unwrap() * p.hbar.powi(2) * p.g.powi(2) * p.t.powf(1.5) / (6.0 * (p.t * p.v.powi(4)).sqrt());
    assert!(rel(z2_closed_n2(&p).unwrap(), expect) < 1e-4);
}

#[test]
fn z2_mid_range_matches_moment_quadrature() {
    let (g, t) = (1.0, 1.0);
    let p = n2(g, v_for_z(1.0, g, t), 1.0, t);
    let (g2, v2) = (g * g, p.v * p.v);
    let i = |m, n| imn_oracle(m, n, g, v2, t);
    let oracle = t / (12.0 * PI)
        * ((-g2 + 0.5 * t * v2 * v2) * i(1, 0) + 0.5 * t * g2 * g2 * i(2, 1) - v2 * i(0, 0) + t * g2 * v2 * i(1, 1));
    assert!(rel(z2_closed_n2(&p).unwrap(), oracle) < 1e-9);
    assert!(rel(z2_from_moments_n2(&p).unwrap(), oracle) < 1e-9);
}

#[test]
fn z2_routes_agree_over_z() {
    for i in 0..12 {
        let z = 0.05 * 1.8f64.powi(i);
        let p = n2(0.9, v_for_z(z, 0.9, 1.2), 1.1, 1.2);
        let a = z2_closed_n2(&p).unwrap();
        let b = z2_from_moments_n2(&p).unwrap();
        let c = zk_symbolic_n2(2, &p).unwrap();
        assert!(rel(a, b) < 1e-10 && rel(a, c) < 1e-10, "z={z}: {a} {b} {c}");
    }
}

#[test]
fn harmonic_limit_pair() {
    let (series, exact) = z2_harmonic_limit(1.0, 1.0, 0.1);
    assert!((series - exact).abs() < 0.01 / 200.0);
    let (s2, e2) = z2_harmonic_limit(2.0, 0.5, 0.1);
    assert_eq!((series, exact), (s2, e2));
}

#[test]
fn moments_match_quadrature() {
    for &z in &[0.1, 1.0, 5.0] {
        let (g, t) = (1.0, 1.0);
        let v2 = v_for_z(z, g, t).powi(2);
        for (m, n) in [(0, 0), (1, 0), (1, 1), (2, 1), (3, 0)] {
            let c = imn_closed_v2(m, n, g, v2, t).unwrap();
            assert!(rel(c, imn_oracle(m, n, g, v2, t)) < 1e-8, "({m},{n}) z={z}");
        }
    }
}

#[test]
fn moment_divergences_as_v_vanishes() {
    let (g, t) = (1.0, 1.0);
    let i00 = |z: f64| imn_closed_v2(0, 0, g, v_for_z(z, g, t).powi(2), t).unwrap();
    // logarithmic: doubling ln(1/z) roughly doubles I₀₀
    let ratio = i00(1e-8) / i00(1e-4);
    assert!(ratio > 1.5 && ratio < 2.5, "{ratio}");
    // I₁₀ ∝ z^{-1/2}
    let i10 = |z: f64| imn_closed_v2(1, 0, g, v_for_z(z, g, t).powi(2), t).unwrap();
    let slope = (i10(1e-8) / i10(1e-6)).ln() / (1e-2f64).ln();
    assert!((slope + 0.5).abs() < 1e-2, "{slope}");
}

#[test]
fn moment_index_order_enforced() {
    assert!(matches!(imn_closed_v2(0, 1, 1.0, 1.0, 1.0), Err(Error::Index(_))));
    let p = n2(1.0, 1.0, 1.0, 1.0);
    assert!(integral_imn_closed(2, 1, &p).is_ok());
}

#[test]
fn most_singular_values() {
    let p = n2(0.8, 0.3, 1.2, 0.7);
    let base = prefactor_k(&p).unwrap() * (4.0 * p.g.powi(4) * p.hbar.powi(4) * p.t.powi(3) / (p.v.powi(4) * p.t)).sqrt();
    let t = zk_most_singular(2, 1, &p).unwrap();
    assert!(rel(t.value, base) < 1e-14);
    assert_eq!(t.indices, TermIndices::Pair { m: 1, n: 0 });
    assert_eq!(t.route, Route::SingularFamily);
    let r = zk_most_singular(4, 4, &p).unwrap().value / zk_most_singular(4, 2, &p).unwrap().value;
    assert!(rel(r, 3.0) < 1e-14);
    for k in [2u32, 4, 6] {
        let a = zk_most_singular(k, k / 2, &p).unwrap().value;
        let b = zk_most_singular(k, k / 2, &p.with_v(2.0 * p.v)).unwrap().value;
        assert!(rel(a / b, 2f64.powi(k as i32)) < 1e-13);
    }
}

#[test]
fn singular_family_preconditions() {
    let p = n2(1.0, 0.3, 1.0, 1.0);
    assert!(zk_most_singular(3, 2, &p).is_err());
    assert!(zk_most_singular(4, 1, &p).is_err());
    assert!(zk_most_singular(4, 5, &p).is_err());
    assert!(zk_less_singular(4, 2, 1, &p).is_err());
    assert!(zk_less_singular(8, 4, 2, &p).is_err());
    assert!(zk_less_singular(8, 4, 1, &p).is_ok());
}

#[test]
fn less_singular_continuity_at_zero() {
    let p = n2(1.0, 0.3, 1.0, 1.0);
    for m in 2..=4 {
        let a = zk_less_singular(4, m, 0, &p).unwrap().value;
        let b = zk_most_singular(4, m, &p).unwrap().value;
        assert!(rel(a, b) < 1e-14);
    }
    let t = zk_less_singular(8, 5, 1, &p).unwrap();
    assert_eq!(t.indices, TermIndices::Less { m: 5, n: 3, ell: 1 });
}

#[test]
fn diagonal_log_slope() {
    let p = n2(1.0, 0.2, 1.0, 0.5);
    for k in [0u32, 2, 4] {
        let h: f64 = 1e-4;
        let a = zk_diagonal_log(k, 1, &p.with_v(p.v * (-h).exp())).unwrap().value;
        let b = zk_diagonal_log(k, 1, &p.with_v(p.v * h.exp())).unwrap().value;
        let expect = -4.0 * prefactor_k(&p).unwrap() * p.lambda2().powf(k as f64 / 4.0);
        assert!(rel((b - a) / (2.0 * h), expect) < 1e-7);
    }
}

#[test]
fn resummed_constants() {
    let p = n2(1.0, 0.0, 1.0, 0.05);
    let k = prefactor_k(&p).unwrap();
    assert!(rel(resummed_term(2, &p).unwrap().value, 5.0 / 3.0 * k) < 1e-15);
    assert!(rel(resummed_term(4, &p).unwrap().value, 127.0 / 180.0 * k) < 1e-15);
    assert!(resummed_term(6, &p).is_err());
    assert!(resummed_term(0, &n2(1.0, 0.0, 1.0, 1.0)).unwrap().warnings.len() == 1);
}

#[test]
fn resummed_tf_exact_vs_small_lambda() {
    let mut prev = f64::INFINITY;
    for &t in &[0.3, 0.1, 0.03, 0.01] {
        let p = n2(1.0, 0.0, 1.0, t);
        let r = (resummed_term(0, &p).unwrap().value / resummed_tf_small_lambda(&p).unwrap() - 1.0).abs();
        assert!(r < prev);
        prev = r;
    }
    assert!(prev < 1e-6);
}

#[test]
fn resummed_symbolic_route_reproduces_constants() {
    let p = n2(1.0, 0.0, 1.0, 0.01);
    let k = prefactor_k(&p).unwrap();
    let z0 = tilde_zk_symbolic_n2(0, &p).unwrap();
    assert!(rel(z0, resummed_term(0, &p).unwrap().value) < 1e-10);
    assert!(rel(tilde_zk_symbolic_n2(2, &p).unwrap() / k, 5.0 / 3.0) < 1e-4);
    assert!(rel(tilde_zk_symbolic_n2(4, &p).unwrap() / k, 127.0 / 180.0) < 1e-4);
}

#[test]
fn resummation_removes_small_v_singularity() {
    let p = n2(1.0, 0.0, 1.0, 0.1);
    let at_zero = tilde_zk_symbolic_n2(2, &p).unwrap();
    let mut last = f64::INFINITY;
    for &v in &[1e-2, 1e-3, 1e-4] {
        let q = p.with_v(v);
        let d = rel(tilde_zk_symbolic_n2(2, &q).unwrap(), at_zero);
        assert!(d < last);
        last = d;
        assert!(zk_symbolic_n2(2, &q).unwrap().abs() > 1e3 * at_zero.abs() * (1e-2 / v).powi(2) / 10.0);
    }
    assert!(last < 1e-6);
}

/// Test-side version of the finite singular sum, term by term.
fn p_terms(k: u32, n: u32, ell: u32, lambda2: f64) -> Vec<f64> {
    let big_n = k / 2 - 2 * ell;
    (0..big_n)
        .map(|p| {
            let mut fact = 1.0;
            for i in 1..=p {
                fact *= i as f64;
            }
            gamma_fn((big_n - p) as f64).unwrap() * gamma_fn(n as f64 + 0.5 + p as f64).unwrap() * (-lambda2 / 8.0).powi(p as i32) / fact
        })
        .collect()
}

#[test]
fn singular_sums_match_term_by_term_oracle() {
    let p = n2(1.0, 0.0, 1.0, 0.1);
    let l2 = p.lambda2();
    for (k, n, ell) in [(2u32, 0u32, 0u32), (4, 1, 0), (6, 2, 0), (8, 1, 1), (10, 0, 1)] {
        let terms = p_terms(k, n, ell, l2);
        let pre = prefactor_k(&p).unwrap() * l2.powi(ell as i32) * 2f64.powi((k - 4 * ell) as i32)
            * ymqm_core::special::double_factorial_f64(2 * n as i64 - 1).unwrap()
            / gamma_fn(n as f64 + 0.5).unwrap();
        let full = tilde_zk_less(k, n, ell, &p, SumMode::Full).unwrap();
        let lead = tilde_zk_less(k, n, ell, &p, SumMode::Leading).unwrap();
        assert!(rel(full, pre * terms.iter().sum::<f64>()) < 1e-13);
        assert!(rel(lead, pre * terms[0]) < 1e-14);
    }
}

#[test]
fn partial_sums_bracket_the_full_sum() {
    let p = n2(1.0, 0.0, 1.0, 0.1);
    let terms = p_terms(8, 1, 0, 1e-3);
    let full: f64 = terms.iter().sum();
    let mut partial = 0.0;
    for (i, t) in terms.iter().enumerate() {
        let before = partial;
        partial += t;
        if i + 1 < terms.len() {
            let (lo, hi) = if before < partial { (before, partial) } else { (partial, before) };
            if i > 0 {
                assert!(lo <= full && full <= hi, "step {i}");
            }
        }
    }
    let _ = p;
}

#[test]
fn leading_singular_sum_gives_five_thirds() {
    let p = n2(1.0, 0.0, 1.0, 0.2);
    let a = resummed_coefficients(2).unwrap();
    let mut sum = 0.0;
    for (&(_, n, _), c) in &a {
        sum += c.to_f64().unwrap() * tilde_zk_singular_sum(2, n, &p, SumMode::Leading).unwrap();
    }
    assert!(rel(sum / prefactor_k(&p).unwrap(), 5.0 / 3.0) < 1e-14);
    // one term only at k = 2: both modes coincide
    assert_eq!(tilde_zk_singular_sum(2, 1, &p, SumMode::Leading).unwrap(), tilde_zk_singular_sum(2, 1, &p, SumMode::Full).unwrap());
}

#[test]
fn assembly_leading_constant() {
    let p = n2(1.0, 0.0, 1.0, 0.02);
    let s = series_assemble(&p, 4, SumMode::Leading).unwrap();
    let k = prefactor_k(&p).unwrap();
    let expect = k * (-p.lambda2().ln() + 5.0 * LN_2 - EULER_GAMMA + 427.0 / 180.0);
    assert!(rel(s.total, expect) < 1e-13);
    assert!(s.warnings.is_empty());
    let s0 = series_assemble(&p, 0, SumMode::Full).unwrap();
    assert_eq!(s0.terms.len(), 1);
    assert_eq!(s0.total, resummed_tf_small_lambda(&p).unwrap());
    assert!(series_assemble(&p, 3, SumMode::Full).is_err());
}

#[test]
fn assembly_corrections_are_suppressed() {
    // Full minus leading at k_max = 4 carries λ² (times logarithms).
    let diff = |l2: f64| {
        let p = n2(1.0, 0.0, 1.0, l2.cbrt());
        let k = prefactor_k(&p).unwrap();
        (series_assemble(&p, 4, SumMode::Full).unwrap().total - series_assemble(&p, 4, SumMode::Leading).unwrap().total) / k
    };
    let e = (diff(1e-2) / diff(1e-4)).abs().ln() / 100f64.ln();
    assert!(e > 0.75 && e < 1.05, "exponent {e}");
}

#[test]
fn most_singular_terms_do_not_cancel() {
    // Σₘ a_m (2m-k-1)!! over the most singular conventional entries is the
    // exact coefficient multiplying the common v^{-k} factor.
    let w = wk::wk_kernels(&Potential::yang_mills_higgs(2), 6);
    let expect = [(4usize, common::rat(7, 2880)), (6, common::rat(-31, 483_840))];
    for (k, target) in expect {
        let a = wk::extract_coefficients(&integrate_momenta(&w[k]).unwrap(), k).unwrap();
        let mut total = num_rational::BigRational::from_integer(0.into());
        for (&(m, n, _), c) in &a {
            if m - n == k as u32 / 2 {
                let df = ymqm_core::special::double_factorial(2 * m as i64 - k as i64 - 1).unwrap();
                total += c * num_rational::BigRational::from_integer((df as i64).into());
            }
        }
        assert_eq!(total, target, "k={k}");
    }
}

#[test]
fn n3_radial_j_limits_and_refinement() {
    let lam: f64 = 1e-6;
    assert!((lam.sqrt() * radial_jb(0, lam).unwrap() - 0.25).abs() < 1e-3);
    let j2 = radial_jb(2, lam).unwrap();
    assert!((j2 - gamma_fn(0.75).unwrap() / (32.0 * 2f64.sqrt())).abs() < 1e-3);
    for b in [0, 2] {
        let tight = radial_jb_with(b, 1.0, &ymqm_core::QuadratureSpec::with_rel_tol(1e-13)).unwrap();
        let loose = radial_jb_with(b, 1.0, &ymqm_core::QuadratureSpec::with_rel_tol(1e-10)).unwrap();
        assert!(rel(loose, tight) < 1e-9);
    }
    assert!(radial_jb(1, 1.0).is_err());
    assert!(radial_jb(0, 0.0).is_err());
}

#[test]
fn n3_terms() {
    let p = ModelParams::n3(0.5, 0.0, 1.2, 0.9).unwrap();
    let l = 0.5 * gamma_fn(0.25).unwrap().powi(3) * (2.0 * PI * PI * p.lambda2()).powf(-0.75);
    assert!(rel(tf_term_n3(&p).unwrap(), l) < 1e-14);
    assert!(matches!(tf_term_n3(&n2(1.0, 0.0, 1.0, 1.0)), Err(Error::ModelMismatch(_))));
    let small = ModelParams::n3(1e-6, 0.0, 1.0, 1.0).unwrap();
    assert!(rel(z2_n3(&small).unwrap(), z2_n3_leading(&small).unwrap()) < 1e-3);
    assert!(z2_n3(&p).unwrap() < 0.0);
}
