//! Test-side oracles shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use ymqm_core::wk::MomentReduction;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn odd_double_factorial(e: u32) -> BigInt {
    // (2e-1)!!
    let mut acc = BigInt::one();
    let mut k = 2 * e as i64 - 1;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Exact value of a reduction against uncoupled Gaussian moments.
///
/// With `g = 0` each moment is `Π √(2π) (2eᵢ-1)!! (tv²)^{-(eᵢ+½)}`, so after
/// the momentum and moment Gaussian factors the reduction is
/// `(2π)^d (tv)^{-d}` times `Σ c (2e-1)!! t^a (v²)^b`. The returned map is
/// keyed by the net powers `(a, b)` of `t` and `v²`. Entries carrying `g²`
/// are dropped.
pub fn harmonic_sum(red: &MomentReduction) -> BTreeMap<(i32, i32), BigRational> {
    let mut out: BTreeMap<(i32, i32), BigRational> = BTreeMap::new();
    for (e, c) in red.entries() {
        let esum: u32 = e.iter().sum();
        let mut df = BigInt::one();
        for &ei in e {
            df *= odd_double_factorial(ei);
        }
        for (&(a, g2, b), k) in c.terms() {
            if g2 > 0 {
                continue;
            }
            let key = (a - esum as i32, b as i32 - esum as i32);
            let slot = out.entry(key).or_insert_with(BigRational::zero);
            *slot += k * BigRational::from_integer(df.clone());
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Laurent coefficients of `[2 sinh(x/2)]^{-d}` times `x^d`, as a power
/// series in `x²`, through `x^{2·terms-2}`.
pub fn sinh_series(d: u32, terms: usize) -> Vec<BigRational> {
    // s(x)/x = Σ x^{2j} / (4^j (2j+1)!)
    let mut s = Vec::with_capacity(terms);
    let mut fact = BigInt::one();
    let mut four = BigInt::one();
    for j in 0..terms {
        if j > 0 {
            fact *= BigInt::from((2 * j) as i64) * BigInt::from((2 * j + 1) as i64);
            four *= 4;
        }
        s.push(BigRational::new(BigInt::one(), &fact * &four));
    }
    // reciprocal power series
    let mut inv = vec![BigRational::zero(); terms];
    inv[0] = BigRational::one();
    for n in 1..terms {
        let mut acc = BigRational::zero();
        for k in 1..=n {
            acc += &s[k] * &inv[n - k];
        }
        inv[n] = -acc;
    }
    let mut out = inv.clone();
    for _ in 1..d {
        let mut next = vec![BigRational::zero(); terms];
        for i in 0..terms {
            for j in 0..terms - i {
                next[i + j] += &out[i] * &inv[j];
            }
        }
        out = next;
    }
    out
}

/// Composite Gauss-Legendre rule on `[a, b]` with `pieces` panels; an
/// independent, non-adaptive oracle.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize) -> f64 {
    const X: [f64; 10] = [
        -0.973_906_528_517_171_7,
        -0.865_063_366_688_984_5,
        -0.679_409_568_299_024_4,
        -0.433_395_394_129_247_2,
        -0.148_874_338_981_631_2,
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const W: [f64; 10] = [
        0.066_671_344_308_688_1,
        0.149_451_349_150_580_6,
        0.219_086_362_515_982_0,
        0.269_266_719_309_996_4,
        0.295_524_224_714_752_9,
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982_0,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    let h = (b - a) / pieces as f64;
    let mut sum = 0.0;
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for i in 0..10 {
            sum += W[i] * f(mid + 0.5 * h * X[i]);
        }
    }
    sum * 0.5 * h
}

/// `∫₀^∞ f` through `x = s/(1-s)` on `[0, 1)` with composite Gauss-Legendre.
pub fn gauss_legendre_half_line<F: Fn(f64) -> f64>(f: F, scale: f64, pieces: usize) -> f64 {
    gauss_legendre(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let x = scale * s / (1.0 - s);
            f(x) * scale / ((1.0 - s) * (1.0 - s))
        },
        0.0,
        1.0,
        pieces,
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
