//! Special functions: Gamma, digamma, double factorial, modified Bessel
//! `K₀`, `K₁`, `I₀` and the Whittaker function `W_{κ,μ}`.

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_breaks, QuadratureSpec};
use std::f64::consts::PI;

/// Euler's constant `C`.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

/// Largest argument for which `Γ(x)` is representable.
const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("Gamma requires x > 0, got {x}"));
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow(format!("Gamma({x}) exceeds f64 range")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("ln Gamma requires x > 0, got {x}"));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `1/Γ(x)` for any real `x`, zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x > GAMMA_MAX_ARG {
        return 0.0;
    }
    if x > 0.0 {
        return 1.0 / statrs::function::gamma::gamma(x);
    }
    if x == x.floor() {
        return 0.0;
    }
    // 1/Γ(x) = sin(πx) Γ(1-x) / π
    (PI * x).sin() * statrs::function::gamma::gamma(1.0 - x) / PI
}

pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("digamma requires x > 0, got {x}"));
    }
    Ok(digamma_pos(x))
}

fn digamma_pos(mut x: f64) -> f64 {
    // Shift upward with ψ(x) = ψ(x+1) - 1/x, then use the asymptotic series.
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    // Bernoulli terms B_{2k}/(2k)
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

/// `n!!` with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> Result<u128> {
    if n < -1 {
        return domain(format!("double factorial requires n >= -1, got {n}"));
    }
    let mut acc: u128 = 1;
    let mut k = n;
    while k > 1 {
        acc = acc
            .checked_mul(k as u128)
            .ok_or_else(|| Error::Overflow(format!("{n}!! exceeds 128 bits")))?;
        k -= 2;
    }
    Ok(acc)
}

/// `n!!` as a float, for use inside closed forms.
pub fn double_factorial_f64(n: i64) -> Result<f64> {
    if n < -1 {
        return domain(format!("double factorial requires n >= -1, got {n}"));
    }
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    if !acc.is_finite() {
        return Err(Error::Overflow(format!("{n}!! exceeds f64 range")));
    }
    Ok(acc)
}

pub fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

// ---------------------------------------------------------------------------
// Modified Bessel functions
// ---------------------------------------------------------------------------

/// `I₀(z)` for `z ≥ 0`.
pub fn bessel_i0(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return domain(format!("I0 requires z >= 0, got {z}"));
    }
    if z <= 30.0 {
        Ok(i0_series(z))
    } else {
        Ok(i0_asymptotic_scaled(z) * z.exp())
    }
}

/// `e^{-z} I₀(z)`, finite for every `z ≥ 0`.
pub fn bessel_i0_scaled(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return domain(format!("I0 requires z >= 0, got {z}"));
    }
    if z <= 30.0 {
        Ok(i0_series(z) * (-z).exp())
    } else {
        Ok(i0_asymptotic_scaled(z))
    }
}

fn i0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

fn i0_asymptotic_scaled(z: f64) -> f64 {
    // e^{-z} I₀(z) ~ (2πz)^{-1/2} Σ ((2k-1)!!)² / (k! (8z)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * z);
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

/// `K₀(z)` for `z > 0`.
pub fn bessel_k0(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return domain(format!("K0 requires z > 0, got {z}"));
    }
    if z <= 2.0 {
        Ok(k0_series(z))
    } else {
        Ok(k01_continued_fraction(z).0 * (-z).exp())
    }
}

/// `e^{z} K₀(z)`.
pub fn bessel_k0_scaled(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return domain(format!("K0 requires z > 0, got {z}"));
    }
    if z <= 2.0 {
        Ok(k0_series(z) * z.exp())
    } else {
        Ok(k01_continued_fraction(z).0)
    }
}

/// `K₁(z)` for `z > 0`.
pub fn bessel_k1(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return domain(format!("K1 requires z > 0, got {z}"));
    }
    if z <= 2.0 {
        Ok(k1_series(z))
    } else {
        Ok(k01_continued_fraction(z).1 * (-z).exp())
    }
}

fn k0_series(z: f64) -> f64 {
    // K₀ = -(ln(z/2) + C) I₀ + Σ_{k≥1} (z²/4)^k H_k / (k!)²
    let q = 0.25 * z * z;
    let lead = -((0.5 * z).ln() + EULER_GAMMA);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = lead;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        harmonic += 1.0 / k;
        let add = term * (lead + harmonic);
        sum += add;
        if term * (lead.abs() + harmonic) < 1e-17 * sum.abs() {
            return sum;
        }
        k += 1.0;
    }
}

fn k1_series(z: f64) -> f64 {
    // K₁ = 1/z + ln(z/2) I₁(z) - (z/4) Σ_k [ψ(k+1)+ψ(k+2)] (z²/4)^k / (k!(k+1)!)
    let q = 0.25 * z * z;
    let lz = (0.5 * z).ln();
    let mut term = 1.0; // (z²/4)^k / (k!(k+1)!)
    let mut psi1 = -EULER_GAMMA; // ψ(k+1)
    let mut psi2 = 1.0 - EULER_GAMMA; // ψ(k+2)
    let mut i1 = 0.0;
    let mut tail = 0.0;
    let mut k = 0.0;
    loop {
        i1 += term;
        tail += term * (psi1 + psi2);
        k += 1.0;
        let next = term * q / (k * (k + 1.0));
        if next < 1e-18 * i1 {
            break;
        }
        term = next;
        psi1 += 1.0 / k;
        psi2 += 1.0 / (k + 1.0);
    }
    1.0 / z + lz * (0.5 * z) * i1 - 0.25 * z * tail
}

/// Steed's continued fraction for `(e^z K₀(z), e^z K₁(z))`, accurate for `z ≥ 2`.
fn k01_continued_fraction(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - a1 * h) / x;
    (k0, k1)
}

// ---------------------------------------------------------------------------
// Whittaker function
// ---------------------------------------------------------------------------

/// Arguments `(κ, μ, z)` of `W_{κ,μ}(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhittakerArgs {
    pub kappa: f64,
    pub mu: f64,
    pub z: f64,
}

impl WhittakerArgs {
    pub fn new(kappa: f64, mu: f64, z: f64) -> Result<Self> {
        let a = Self { kappa, mu, z };
        a.validate()?;
        Ok(a)
    }

    /// Indices of the coordinate moment `I_mn`: `κ = -(m+n)/2`, `μ = (m-n)/2`.
    pub fn for_moment(m: u32, n: u32, z: f64) -> Result<Self> {
        Self::new(-(m as f64 + n as f64) / 2.0, (m as f64 - n as f64) / 2.0, z)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z > 0.0) || !self.z.is_finite() {
            return domain(format!("Whittaker argument must be positive, got {}", self.z));
        }
        if !self.kappa.is_finite() || !self.mu.is_finite() {
            return domain("Whittaker indices must be finite");
        }
        if 0.5 + self.mu.abs() - self.kappa <= 0.0 {
            return domain("integral representation requires 1/2 + |mu| - kappa > 0");
        }
        Ok(())
    }
}

/// `W_{κ,μ}(z)`.
///
/// Evaluated as `e^{-z/2} z^{μ+½} U(½+μ-κ, 1+2μ, z)`. For integer `1+2μ` and
/// `z < 1/2` the logarithmic series of `U` is used; otherwise `U` comes from
/// its Laplace-type integral, integrated adaptively in a logarithmic variable.
pub fn whittaker_w(args: WhittakerArgs) -> Result<f64> {
    let (mant, log_scale) = whittaker_w_log(args)?;
    let w = mant * log_scale.exp();
    if !w.is_finite() {
        return Err(Error::Overflow(format!("W_{{{},{}}}({}) not representable", args.kappa, args.mu, args.z)));
    }
    Ok(w)
}

/// `W_{κ,μ}(z)` as `(m, s)` with `W = m·eˢ`, for arguments where the value
/// itself under- or overflows.
pub fn whittaker_w_log(args: WhittakerArgs) -> Result<(f64, f64)> {
    args.validate()?;
    let mu = args.mu.abs();
    let a = 0.5 + mu - args.kappa;
    let b = 1.0 + 2.0 * mu;
    let z = args.z;
    let prefactor_log = -0.5 * z + (mu + 0.5) * z.ln();
    let (u_mant, u_log) = if b == b.round() && z < 0.5 && b < 60.0 {
        match kummer_u_series(a, b as u32, z) {
            Some(u) => (u, 0.0),
            None => kummer_u_integral(a, b, z)?,
        }
    } else {
        kummer_u_integral(a, b, z)?
    };
    if !u_mant.is_finite() {
        return Err(Error::Accuracy(format!("U({a}, {b}, {z}) evaluation failed")));
    }
    Ok((u_mant, prefactor_log + u_log))
}

/// `U(a, n+1, z)` from its logarithmic series; `None` if cancellation
/// would spoil the result.
fn kummer_u_series(a: f64, b: u32, z: f64) -> Option<f64> {
    let n = b - 1;
    let nf = n as f64;
    let lz = z.ln();
    // Logarithmic part: (-1)^{n+1} / (n! Γ(a-n)) Σ_k (a)_k z^k / ((n+1)_k k!) [ln z + ψ(a+k) - ψ(1+k) - ψ(n+1+k)]
    let mut log_part = 0.0;
    let mut mag = 0.0;
    let rg = rgamma(a - nf);
    if rg != 0.0 {
        let mut coef = 1.0;
        let mut psi_a = digamma_pos(a);
        let mut psi_1 = -EULER_GAMMA;
        let mut psi_n = digamma_pos(nf + 1.0);
        for k in 0..200 {
            let kf = k as f64;
            let term = coef * (lz + psi_a - psi_1 - psi_n);
            log_part += term;
            mag += term.abs();
            if coef.abs() < 1e-18 * (1.0 + log_part.abs()) && k > 2 {
                break;
            }
            coef *= (a + kf) * z / ((nf + 1.0 + kf) * (kf + 1.0));
            psi_a += 1.0 / (a + kf);
            psi_1 += 1.0 / (kf + 1.0);
            psi_n += 1.0 / (nf + 1.0 + kf);
        }
        let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let scale = sign * rg / factorial_f64(n);
        log_part *= scale;
        mag *= scale.abs();
    }
    // Principal part: 1/Γ(a) Σ_{k=1}^{n} (k-1)! (1-a+k)_{n-k} / (n-k)! z^{-k}
    let mut principal = 0.0;
    for k in 1..=n {
        let kf = k as f64;
        let mut poch = 1.0;
        for j in 0..(n - k) {
            poch *= 1.0 - a + kf + j as f64;
        }
        let term = factorial_f64(k - 1) * poch / factorial_f64(n - k) * z.powi(-(k as i32));
        principal += term;
        mag += (term * rgamma(a)).abs();
    }
    principal *= rgamma(a);
    let u = log_part + principal;
    if !u.is_finite() || u.abs() < 1e-4 * mag {
        return None;
    }
    Some(u)
}

/// `U(a, b, z)` through `U = z^{1-b}/Γ(a) ∫₀^∞ e^{-s} s^{a-1} (s+z)^{b-a-1} ds`,
/// returned as `(mantissa, log_scale)` with `U = mantissa · e^{log_scale}`.
fn kummer_u_integral(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    let c = b - a - 1.0;
    let lz = z.ln();
    // log of the integrand in y = ln s: -s + a y + c ln(s + z)
    let log_f = |y: f64| {
        let s = y.exp();
        -s + a * y + c * (s + z).ln()
    };
    // Upper limit: e^{-s} has killed everything well below 1e-20 of the peak.
    let peak_y = {
        // maximize -s + a y + c ln(s+z) on a coarse grid
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut y = (lz - 5.0).min(-40.0);
        while y < 8.0 {
            let v = log_f(y);
            if v > best.0 {
                best = (v, y);
            }
            y += 0.05;
        }
        best
    };
    let log_peak = peak_y.0;
    let mut y_hi = peak_y.1.max(0.0) + 1.0;
    while log_f(y_hi) - log_peak > -50.0 {
        y_hi += 0.5;
    }
    // Lower limit: below s0 the integrand is z^c s^a (1 + O(s/z) + O(s)); the
    // remainder is added analytically with its first-order correction.
    let s0 = 1e-5 * z.min(1.0);
    let y_lo = s0.ln();
    let tail = (c * lz + a * y_lo - log_peak).exp() * (1.0 / a + (c / z - 1.0) * s0 / (a + 1.0));
    let spec = QuadratureSpec { rel_tol: 1e-13, abs_tol: 0.0, max_subdivisions: 4000, domain_cutoff: None };
    let mut breaks = vec![y_lo];
    if lz > y_lo && lz < y_hi {
        breaks.push(lz);
    }
    if peak_y.1 > *breaks.last().unwrap() && peak_y.1 < y_hi {
        breaks.push(peak_y.1);
    }
    breaks.push(y_hi);
    let est = integrate_breaks(|y| (log_f(y) - log_peak).exp(), &breaks, &spec)
        .map_err(|e| Error::Accuracy(format!("Whittaker integral: {e}")))?;
    let mantissa = est.value + tail;
    let log_scale = log_peak + (1.0 - b) * lz - ln_gamma(a)?;
    Ok((mantissa, log_scale))
}
