mod common;

use common::{gauss_legendre, gauss_legendre_half_line, harmonic_sum, rat, rel, sinh_series};
use num_rational::BigRational;
use proptest::prelude::*;
use std::collections::BTreeMap;
use ymqm_core::heat_kernel::imn_closed_v2;
use ymqm_core::wk::*;
use ymqm_core::Error;

/// Conventional recursion, written out independently of the resummed one:
/// `∂ₜWₖ = i p·(∇ - t∇V)W_{k-1} + ½[Δ + t²(∇V)² - tΔV - 2t∇V·∇]W_{k-2}`.
fn conventional_kernels(pot: &Potential, order: usize) -> Vec<PhasePolynomial> {
    let dims = pot.dims();
    let v = pot.polynomial();
    let grad = v.gradient();
    let lap = v.laplacian();
    let grad_sq = grad.iter().fold(PhasePolynomial::zero(dims), |a, g| a.add(&g.mul(g)));
    let p_grad_v = v.p_dot_grad();
    let half = rat(1, 2);
    let mut out = vec![PhasePolynomial::one(dims)];
    for k in 1..=order {
        let mut rhs = PhasePolynomial::zero(dims);
        let w1 = &out[k - 1];
        rhs = rhs.add(&w1.p_dot_grad().sub(&p_grad_v.mul(w1).mul_t_pow(1)).mul_i());
        if k >= 2 {
            let w2 = &out[k - 2];
            let mut b = w2.laplacian();
            b = b.add(&grad_sq.mul(w2).mul_t_pow(2));
            b = b.sub(&lap.mul(w2).mul_t_pow(1));
            b = b.sub(&w2.directional(&grad).mul_t_pow(1).scale(&rat(2, 1)));
            rhs = rhs.add(&b.scale(&half));
        }
        out.push(rhs.integrate_t());
    }
    out
}

#[test]
fn seed_kernel_is_one() {
    let w = resummed_kernels(&Potential::yang_mills_higgs(2), 0);
    assert_eq!(w.len(), 1);
    assert_eq!(w[0].len(), 1);
    assert_eq!(w[0], PhasePolynomial::one(2));
    let dump = w[0].canonical_dump();
    assert_eq!(dump.trim(), "1 *");
}

#[test]
fn unresummed_kernels_match_conventional_recursion() {
    for pot in [Potential::yang_mills_higgs(2), Potential::yang_mills_higgs(3), Potential::harmonic_1d()] {
        let ours = wk_kernels(&pot, 6);
        let oracle = conventional_kernels(&pot, 6);
        for k in 0..=6 {
            assert_eq!(ours[k], oracle[k], "order {k}, {} dimensions", pot.dims());
        }
    }
}

#[test]
fn momentum_parity_follows_order() {
    let w = resummed_kernels(&Potential::yang_mills_higgs(2), 7);
    for (k, wk) in w.iter().enumerate() {
        assert!(wk.has_momentum_parity(k % 2 == 1), "order {k}");
    }
}

#[test]
fn odd_orders_integrate_to_zero() {
    for pot in [Potential::yang_mills_higgs(2), Potential::yang_mills(2)] {
        let w = resummed_kernels(&pot, 7);
        for k in (1..=7).step_by(2) {
            assert!(integrate_momenta(&w[k]).unwrap().is_zero(), "order {k}");
        }
        let w = wk_kernels(&pot, 5);
        for k in (1..=5).step_by(2) {
            assert!(integrate_momenta(&w[k]).unwrap().is_zero(), "order {k}");
        }
    }
}

#[test]
fn first_order_kernel_is_odd_and_imaginary() {
    let w = resummed_kernels(&Potential::yang_mills_higgs(2), 1);
    assert!(!w[1].is_zero());
    assert!(w[1].terms().all(|(m, _)| m.imag && m.momentum_degree() == 1));
}

#[test]
fn second_order_reduction_has_the_four_moment_entries() {
    let w = wk_kernels(&Potential::yang_mills_higgs(2), 2);
    let red = integrate_momenta(&w[2]).unwrap();
    // (2π/t)·(t²/6)[(−g² + tv⁴/2)I₁₀ + (tg⁴/2)I₂₁ − v²I₀₀ + tg²v²I₁₁]
    let mut expect: BTreeMap<[u32; 3], Vec<((i32, u32, u32), BigRational)>> = BTreeMap::new();
    expect.insert([1, 0, 0], vec![((2, 1, 0), rat(-1, 6)), ((3, 0, 2), rat(1, 12))]);
    expect.insert([2, 1, 0], vec![((3, 2, 0), rat(1, 12))]);
    expect.insert([0, 0, 0], vec![((2, 0, 1), rat(-1, 6))]);
    expect.insert([1, 1, 0], vec![((3, 1, 1), rat(1, 6))]);
    assert_eq!(red.len(), 4);
    for (e, terms) in &expect {
        let c = red.get(*e).unwrap_or_else(|| panic!("missing entry {e:?}"));
        assert_eq!(c.terms().count(), terms.len(), "entry {e:?}");
        for ((a, b, d), val) in terms {
            assert_eq!(&c.get(*a, *b, *d), val, "entry {e:?}");
        }
    }
}

#[test]
fn entries_are_symmetrized() {
    let w = wk_kernels(&Potential::yang_mills_higgs(2), 4);
    let red = integrate_momenta(&w[4]).unwrap();
    assert!(red.entries().all(|(e, _)| e[0] >= e[1]));
}

#[test]
fn thomas_fermi_reduction() {
    let red = integrate_momenta(&PhasePolynomial::one(2)).unwrap();
    assert_eq!(red.len(), 1);
    let c = red.get([0, 0, 0]).unwrap();
    assert_eq!(c.get(0, 0, 0), rat(1, 1));
    let a = extract_coefficients(&red, 0).unwrap();
    assert_eq!(a.into_iter().collect::<Vec<_>>(), vec![((0, 0, 0), rat(1, 1))]);
}

#[test]
fn second_order_coefficients() {
    let w = resummed_kernels(&Potential::yang_mills(2), 2);
    let a = extract_coefficients(&integrate_momenta(&w[2]).unwrap(), 2).unwrap();
    // Z̃₂ = (g²t/24π)(4Ĩ₁₀ + g²tĨ₂₁)
    let expect: BTreeMap<_, _> = [((1, 0, 0), rat(1, 3)), ((2, 1, 0), rat(1, 12))].into_iter().collect();
    assert_eq!(a, expect);
}

#[test]
fn fourth_order_coefficients() {
    let w = resummed_kernels(&Potential::yang_mills(2), 4);
    let a = extract_coefficients(&integrate_momenta(&w[4]).unwrap(), 4).unwrap();
    assert_eq!(a[&(2, 0, 0)], rat(1, 30));
    assert_eq!(a[&(3, 1, 0)], rat(1, 180));
    assert_eq!(a[&(4, 2, 0)], rat(1, 576));
    for (&(m, n, ell), _) in &a {
        assert_eq!(m - n + 2 * ell, 2);
    }
}

#[test]
fn singular_structure_of_conventional_kernels() {
    let pot = Potential::yang_mills_higgs(2);
    let w = wk_kernels(&pot, 6);
    for k in [2usize, 4, 6] {
        let red = integrate_momenta(&w[k]).unwrap();
        let a = extract_coefficients(&red, k).unwrap();
        assert!(a.keys().any(|&(m, n, _)| m - n == k as u32 / 2), "order {k} lacks a most singular entry");
        for &(m, n, ell) in a.keys() {
            assert_eq!(m - n, k as u32 / 2 - 2 * ell);
        }
    }
}

#[test]
fn harmonic_closure_through_fourth_order() {
    let w = wk_kernels(&Potential::yang_mills_higgs(2), 4);
    let target = sinh_series(2, 3);
    for (j, k) in [0usize, 2, 4].into_iter().enumerate() {
        let s = harmonic_sum(&integrate_momenta(&w[k]).unwrap());
        assert_eq!(s.len(), 1, "order {k}");
        assert_eq!(s[&(k as i32, k as i32 / 2)], target[j], "order {k}");
    }
}

#[test]
fn unresum_checks_lengths_and_seed() {
    let pot = Potential::yang_mills_higgs(2);
    let wt = resummed_kernels(&pot, 2);
    assert!(matches!(unresum(&wt, 4, &pot), Err(Error::OrderMismatch(_))));
    let w = unresum(&wt, 0, &pot).unwrap();
    assert_eq!(w[0], PhasePolynomial::one(2));
}

#[test]
fn potential_rejects_momenta_and_time() {
    let p = PhasePolynomial::var(2, Var::Px);
    assert!(matches!(Potential::new(p), Err(Error::UnsupportedPotential(_))));
    let t = PhasePolynomial::var(2, Var::T);
    assert!(Potential::new(t).is_err());
}

#[test]
fn recursion_rejects_dimension_mismatch() {
    let pot = Potential::yang_mills_higgs(2);
    let prev = vec![PhasePolynomial::one(3)];
    assert!(matches!(recursion_step(&prev, 1, &pot), Err(Error::OrderMismatch(_))));
}

#[test]
fn extraction_rejects_odd_order_and_other_dimensions() {
    let red = integrate_momenta(&PhasePolynomial::one(2)).unwrap();
    assert!(matches!(extract_coefficients(&red, 3), Err(Error::OddOrder(3))));
    let red3 = integrate_momenta(&PhasePolynomial::one(3)).unwrap();
    assert!(matches!(extract_coefficients(&red3, 0), Err(Error::ModelMismatch(_))));
}

#[test]
fn canonical_dump_is_stable() {
    let a = wk_kernels(&Potential::yang_mills_higgs(2), 4);
    let b = wk_kernels(&Potential::yang_mills_higgs(2), 4);
    assert_eq!(a[4].canonical_dump(), b[4].canonical_dump());
}

fn momentum_moment(j: u16, t: f64) -> f64 {
    let f = |p: f64| 2.0 * p.powi(j as i32) * (-0.5 * t * p * p).exp();
    gauss_legendre_half_line(f, 1.0 / t.sqrt(), 200)
}

fn coordinate_moment(a: u16, b: u16, g: f64, v2: f64, t: f64) -> f64 {
    let inner = |x: f64| {
        let decay = 0.5 * t * (v2 + g * g * x * x);
        let f = |y: f64| x.powi(a as i32) * y.powi(b as i32) * (-0.5 * t * (g * g * x * x * y * y + v2 * (x * x + y * y))).exp();
        gauss_legendre_half_line(f, decay.powf(-0.5), 120)
    };
    4.0 * gauss_legendre_half_line(inner, (0.5 * t * v2).powf(-0.5), 120)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn reduction_matches_numeric_phase_space_integral(
        terms in prop::collection::vec((0u16..3, 0u16..3, 0u16..3, 0u16..3, -5i64..6), 1..4)
    ) {
        let (g, v2, t) = (1.0, 1.3, 0.9);
        let mut poly = PhasePolynomial::zero(2);
        for &(a, b, c, d, k) in &terms {
            let m = PhasePolynomial::monomial(
                2,
                &[(Var::X, 2 * a), (Var::Y, 2 * b), (Var::Px, 2 * c), (Var::Py, 2 * d)],
                rat(k, 1),
            );
            poly = poly.add(&m);
        }
        let red = integrate_momenta(&poly).unwrap();
        let ours = red.evaluate(t, g, v2, |e| imn_closed_v2(e[0], e[1], g, v2, t)).unwrap();
        let mut oracle = 0.0;
        for (m, c) in poly.terms() {
            let k: f64 = num_traits::ToPrimitive::to_f64(c).unwrap();
            oracle += k
                * momentum_moment(m.exp(Var::Px), t)
                * momentum_moment(m.exp(Var::Py), t)
                * coordinate_moment(m.exp(Var::X), m.exp(Var::Y), g, v2, t);
        }
        let scale = poly.terms().map(|(m, c)| {
            let k: f64 = num_traits::ToPrimitive::to_f64(c).unwrap();
            (k * momentum_moment(m.exp(Var::Px), t) * momentum_moment(m.exp(Var::Py), t)
                * coordinate_moment(m.exp(Var::X), m.exp(Var::Y), g, v2, t)).abs()
        }).sum::<f64>();
        prop_assert!((ours - oracle).abs() <= 1e-8 * scale, "{} vs {}", ours, oracle);
    }
}

#[test]
fn gauss_legendre_oracle_sanity() {
    let v = gauss_legendre(|x| x * x, 0.0, 1.0, 1);
    assert!(rel(v, 1.0 / 3.0) < 1e-14);
}
