//! Closed forms and series assembly for the partition function.
//!
//! Conventions: `K = (2πλ²)^{-1/2}`, `L = ½Γ(1/4)³(2π²λ²)^{-3/4}`,
//! `z = tv⁴/(2g²)`, and for the resummed terms the effective Higgs mass
//! `v_eff² = ħ²g²t/2`, which turns `z` into `λ²/8`.

use crate::error::{domain, Error, Result};
use crate::params::ModelParams;
use crate::quadrature::{integrate_breaks, integrate_half_line, QuadratureSpec};
use crate::special::{self, digamma, double_factorial_f64, gamma_fn, whittaker_w_log, WhittakerArgs, EULER_GAMMA};
use crate::wk::{self, extract_coefficients, integrate_momenta, PhasePolynomial, Potential};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::sync::Mutex;

/// Threshold on `λ²` and `z` above which asymptotic forms are flagged.
pub const REGIME_THRESHOLD: f64 = 0.1;

/// Highest order with tested symbolic support.
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// `λ²` is not small; the small-λ series is outside its regime.
    LambdaNotSmall { lambda2: f64 },
    /// `z` is not small; the `v → 0` limit form is outside its regime.
    ZNotSmall { z: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::LambdaNotSmall { lambda2 } => write!(f, "lambda2={lambda2:e} exceeds {REGIME_THRESHOLD}"),
            Warning::ZNotSmall { z } => write!(f, "z={z:e} exceeds {REGIME_THRESHOLD}"),
        }
    }
}

/// A value with regime warnings attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Flagged<T> {
    fn new(value: T) -> Self {
        Self { value, warnings: Vec::new() }
    }

    pub fn is_clear(&self) -> bool {
        self.warnings.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    ClosedForm,
    Resummed,
    SingularFamily,
    Oracle,
}

/// Which moment structure a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermIndices {
    None,
    Pair { m: u32, n: u32 },
    Less { m: u32, n: u32, ell: u32 },
    Diagonal { m: u32 },
}

/// One contribution to `Z(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernelTerm {
    pub order_k: u32,
    pub indices: TermIndices,
    pub route: Route,
    pub value: f64,
    /// Short label of the formula family that produced the value.
    pub tag: &'static str,
}

fn require_n2(p: &ModelParams) -> Result<()> {
    if p.n_model != 2 {
        return Err(Error::ModelMismatch(format!("operation needs n_model = 2, got {}", p.n_model)));
    }
    Ok(())
}

fn require_n3(p: &ModelParams) -> Result<()> {
    if p.n_model != 3 {
        return Err(Error::ModelMismatch(format!("operation needs n_model = 3, got {}", p.n_model)));
    }
    Ok(())
}

fn require_higgs(p: &ModelParams) -> Result<()> {
    if !(p.v > 0.0) {
        return domain("operation requires v > 0");
    }
    if !(p.g > 0.0) {
        return domain("operation requires g > 0");
    }
    Ok(())
}

fn lambda_warnings(p: &ModelParams) -> Vec<Warning> {
    let l2 = p.lambda2();
    if l2 > REGIME_THRESHOLD {
        vec![Warning::LambdaNotSmall { lambda2: l2 }]
    } else {
        Vec::new()
    }
}

pub fn prefactor_k(p: &ModelParams) -> Result<f64> {
    p.prefactor_k()
}

/// Thomas-Fermi term of the two-dimensional model, `K e^{z/2} K₀(z/2)`.
pub fn tf_partition_n2(p: &ModelParams) -> Result<f64> {
    require_n2(p)?;
    require_higgs(p)?;
    Ok(p.prefactor_k()? * special::bessel_k0_scaled(0.5 * p.z())?)
}

/// Small-`v` form of the Thomas-Fermi term, `K(ln(8g²/tv⁴) - C)`.
pub fn tf_limit_v0(p: &ModelParams) -> Result<Flagged<f64>> {
    require_n2(p)?;
    require_higgs(p)?;
    let z = p.z();
    let mut out = Flagged::new(p.prefactor_k()? * ((4.0 / z).ln() - EULER_GAMMA));
    if z > REGIME_THRESHOLD {
        out.warnings.push(Warning::ZNotSmall { z });
    }
    Ok(out)
}

/// Coordinate moment `I_mn` from its Whittaker closed form, for explicit `v²`.
pub fn imn_closed_v2(m: u32, n: u32, g: f64, v2: f64, t: f64) -> Result<f64> {
    if m < n {
        return Err(Error::Index(format!("I_mn needs m >= n, got ({m},{n}); symmetrize first")));
    }
    if !(v2 > 0.0) || !(g > 0.0) || !(t > 0.0) {
        return domain("I_mn closed form needs v² > 0, g > 0, t > 0");
    }
    let z = t * v2 * v2 / (2.0 * g * g);
    let d = (m - n) as f64;
    let (w, w_log) = whittaker_w_log(WhittakerArgs::for_moment(m, n, z)?)?;
    let log_scale = w_log + 0.5 * (2.0 * PI).ln() + d * v2.ln() - (n as f64 + 0.5) * t.ln() - (2.0 * m as f64 + 1.0) * g.ln()
        + 0.5 * z
        - 0.5 * (d + 1.0) * z.ln();
    Ok(double_factorial_f64(2 * n as i64 - 1)? * gamma_fn(m as f64 + 0.5)? * w * log_scale.exp())
}

/// `I_mn` at the model's own `v`.
pub fn integral_imn_closed(m: u32, n: u32, p: &ModelParams) -> Result<f64> {
    require_higgs(p)?;
    imn_closed_v2(m, n, p.g, p.v * p.v, p.t)
}

/// Second-order Wigner-Kirkwood term of the two-dimensional model in closed form.
pub fn z2_closed_n2(p: &ModelParams) -> Result<f64> {
    require_n2(p)?;
    require_higgs(p)?;
    let z = p.z();
    // e^{z/2} W, formed in log space so that large z neither over- nor underflows
    let w = |k: f64, mu: f64| -> Result<f64> {
        let (m, s) = whittaker_w_log(WhittakerArgs::new(k, mu, z)?)?;
        Ok(m * (s + 0.5 * z).exp())
    };
    let g12 = gamma_fn(0.5)?;
    let g32 = gamma_fn(1.5)?;
    let g52 = gamma_fn(2.5)?;
    let bracket = 2.0 * (-1.0 + z) / z * g32 * w(-0.5, 0.5)? + g52 / z * w(-1.5, 0.5)?
        - 2.0 * g12 / z.sqrt() * w(0.0, 0.0)?
        + 2.0 * g32 / z.sqrt() * w(-1.0, 0.0)?;
    let pre = p.t * p.v * p.v / (12.0 * (2.0 * PI).sqrt() * p.g * p.t.sqrt());
    Ok(pre * bracket)
}

/// `Z₂` from the four coordinate moments, `t/(12π)[...]`, as a second closed route.
pub fn z2_from_moments_n2(p: &ModelParams) -> Result<f64> {
    require_n2(p)?;
    require_higgs(p)?;
    let (g2, v2, t) = (p.g * p.g, p.v * p.v, p.t);
    let i = |m, n| integral_imn_closed(m, n, p);
    let bracket = (-g2 + 0.5 * t * v2 * v2) * i(1, 0)? + 0.5 * t * g2 * g2 * i(2, 1)? - v2 * i(0, 0)?
        + t * g2 * v2 * i(1, 1)?;
    Ok(t / (12.0 * PI) * bracket)
}

/// The harmonic limits: `Z₀ + Z₂ = (ħvt)^{-2}(1 - (ħvt)²/12)` and the exact `[2 sinh(ħvt/2)]^{-2}`.
pub fn z2_harmonic_limit(hbar: f64, v: f64, t: f64) -> (f64, f64) {
    let x = hbar * v * t;
    ((1.0 - x * x / 12.0) / (x * x), (2.0 * (0.5 * x).sinh()).powi(-2))
}

fn check_even_k(k: u32) -> Result<()> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::Index(format!("order k must be even and >= 2, got {k}")));
    }
    Ok(())
}

fn singular_base(k: u32, p: &ModelParams) -> Result<f64> {
    require_higgs(p)?;
    let ratio = 4.0 * p.g.powi(4) * p.hbar.powi(4) * p.t.powi(3) / (p.v.powi(4) * p.t);
    Ok(p.prefactor_k()? * ratio.powf(k as f64 / 4.0))
}

/// Most singular family at order `k`: `m - n = k/2`, `k/2 ≤ m ≤ k`.
pub fn zk_most_singular(k: u32, m: u32, p: &ModelParams) -> Result<HeatKernelTerm> {
    check_even_k(k)?;
    if m < k / 2 || m > k {
        return Err(Error::Index(format!("most singular family needs k/2 <= m <= k, got m={m}, k={k}")));
    }
    let value = singular_base(k, p)? * gamma_fn(k as f64 / 2.0)? * double_factorial_f64(2 * m as i64 - k as i64 - 1)?;
    Ok(HeatKernelTerm {
        order_k: k,
        indices: TermIndices::Pair { m, n: m - k / 2 },
        route: Route::SingularFamily,
        value,
        tag: "wk-most-singular",
    })
}

/// Less singular family, `m - n = k/2 - 2ℓ` with `0 ≤ ℓ < k/4`; `ℓ = 0`
/// coincides with [`zk_most_singular`].
pub fn zk_less_singular(k: u32, m: u32, ell: u32, p: &ModelParams) -> Result<HeatKernelTerm> {
    check_even_k(k)?;
    if 4 * ell >= k {
        return Err(Error::Index(format!("less singular family needs l < k/4, got l={ell}, k={k}")));
    }
    if m < k / 2 || m > k {
        return Err(Error::Index(format!("less singular family needs k/2 <= m <= k, got m={m}, k={k}")));
    }
    let x = p.v.powi(4) * p.t / (4.0 * p.g.powi(4));
    let value = singular_base(k, p)?
        * x.powi(ell as i32)
        * gamma_fn(k as f64 / 2.0 - ell as f64)?
        * double_factorial_f64(2 * m as i64 - k as i64 - 1)?;
    let n = m + 2 * ell - k / 2;
    Ok(HeatKernelTerm {
        order_k: k,
        indices: TermIndices::Less { m, n, ell },
        route: Route::SingularFamily,
        value,
        tag: "wk-less-singular",
    })
}

/// Diagonal family `m = n`, logarithmic in `v`.
pub fn zk_diagonal_log(k: u32, m: u32, p: &ModelParams) -> Result<HeatKernelTerm> {
    if k % 2 == 1 {
        return Err(Error::Index(format!("order k must be even, got {k}")));
    }
    require_higgs(p)?;
    let bracket = (2.0 * p.g * p.g / (p.v.powi(4) * p.t)).ln() - 2.0 * EULER_GAMMA - digamma(m as f64 + 0.5)?;
    let value = p.prefactor_k()? * p.lambda2().powf(k as f64 / 4.0) * bracket;
    Ok(HeatKernelTerm { order_k: k, indices: TermIndices::Diagonal { m }, route: Route::SingularFamily, value, tag: "wk-diagonal" })
}

/// Small-λ form of the resummed Thomas-Fermi term, `K(-ln λ² + 5 ln 2 - C)`.
pub fn resummed_tf_small_lambda(p: &ModelParams) -> Result<f64> {
    Ok(p.prefactor_k()? * (-p.lambda2().ln() + 5.0 * LN_2 - EULER_GAMMA))
}

/// Resummed terms of the two-dimensional Yang-Mills model at `v = 0`.
///
/// `k = 0` is exact, `K e^{λ²/16} K₀(λ²/16)`; `k = 2, 4` are the small-λ
/// constants `5/3 K` and `127/180 K`.
pub fn resummed_term(k: u32, p: &ModelParams) -> Result<Flagged<f64>> {
    require_n2(p)?;
    let kk = p.prefactor_k()?;
    let value = match k {
        0 => kk * special::bessel_k0_scaled(p.lambda2() / 16.0)?,
        2 => kk * 5.0 / 3.0,
        4 => kk * 127.0 / 180.0,
        _ => return Err(Error::Index(format!("resummed_term supports k = 0, 2, 4, got {k}"))),
    };
    Ok(Flagged { value, warnings: lambda_warnings(p) })
}

/// How many terms of each singular sum to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    /// Only the `p = 0` term, and only the most singular family in assemblies.
    Leading,
    /// Full finite `p` sums, and every family in assemblies.
    Full,
}

fn p_sum(big_n: u32, n: u32, lambda2: f64, mode: SumMode) -> Result<f64> {
    let top = match mode {
        SumMode::Leading => 0,
        SumMode::Full => big_n - 1,
    };
    let x = -lambda2 / 8.0;
    let mut sum = 0.0;
    for pp in 0..=top {
        let term = gamma_fn((big_n - pp) as f64)? * gamma_fn(n as f64 + 0.5 + pp as f64)? * x.powi(pp as i32)
            / special::factorial_f64(pp);
        sum += term;
    }
    Ok(sum)
}

/// Resummed most singular structure `m - n = k/2` at `v = 0`.
pub fn tilde_zk_singular_sum(k: u32, n: u32, p: &ModelParams, mode: SumMode) -> Result<f64> {
    tilde_zk_less(k, n, 0, p, mode)
}

/// Resummed structure `m - n = k/2 - 2ℓ > 0` at `v = 0`, carrying `λ^{2ℓ}`.
pub fn tilde_zk_less(k: u32, n: u32, ell: u32, p: &ModelParams, mode: SumMode) -> Result<f64> {
    check_even_k(k)?;
    if 4 * ell >= k {
        return Err(Error::Index(format!("need m - n = k/2 - 2l >= 1, got k={k}, l={ell}")));
    }
    let big_n = k / 2 - 2 * ell;
    let l2 = p.lambda2();
    let pre = p.prefactor_k()? * l2.powi(ell as i32) * 2f64.powi((k - 4 * ell) as i32)
        * double_factorial_f64(2 * n as i64 - 1)?
        / gamma_fn(n as f64 + 0.5)?;
    Ok(pre * p_sum(big_n, n, l2, mode)?)
}

/// Resummed diagonal structure `m = n` at `v = 0`, per unit `(2m-1)!!`.
pub fn tilde_zk_diagonal(k: u32, m: u32, p: &ModelParams) -> Result<f64> {
    if k % 2 == 1 {
        return Err(Error::Index(format!("order k must be even, got {k}")));
    }
    let l2 = p.lambda2();
    let bracket = -l2.ln() + 3.0 * LN_2 - 2.0 * EULER_GAMMA - digamma(m as f64 + 0.5)?;
    Ok(p.prefactor_k()? * l2.powf(k as f64 / 4.0) * bracket)
}

type CoeffMap = BTreeMap<(u32, u32, u32), BigRational>;

static COEFF_CACHE: Mutex<Vec<CoeffMap>> = Mutex::new(Vec::new());

/// Exact structure coefficients of `W̃ₖ` for the two-dimensional Yang-Mills
/// potential, cached after the first request.
pub fn resummed_coefficients(k: usize) -> Result<CoeffMap> {
    if k > MAX_ORDER {
        return Err(Error::Index(format!("orders above {MAX_ORDER} are not supported, got {k}")));
    }
    if k % 2 == 1 {
        return Err(Error::OddOrder(k));
    }
    let mut cache = COEFF_CACHE.lock().unwrap_or_else(|e| e.into_inner());
    if cache.len() <= k {
        let pot = Potential::yang_mills(2);
        let kernels = wk::resummed_kernels(&pot, k);
        cache.clear();
        for (j, w) in kernels.iter().enumerate() {
            let map = if j % 2 == 0 { extract_coefficients(&integrate_momenta(w)?, j)? } else { CoeffMap::new() };
            cache.push(map);
        }
    }
    Ok(cache[k].clone())
}

/// Per-term breakdown and total of the resummed small-λ series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesAssembly {
    pub terms: Vec<HeatKernelTerm>,
    pub total: f64,
    pub warnings: Vec<Warning>,
}

/// Assemble `Z(t)` from the resummed Thomas-Fermi log and the singular sums
/// through order `k_max`, with coefficients from the symbolic pipeline.
pub fn series_assemble(p: &ModelParams, k_max: u32, mode: SumMode) -> Result<SeriesAssembly> {
    require_n2(p)?;
    if k_max % 2 == 1 || k_max as usize > MAX_ORDER {
        return Err(Error::Index(format!("k_max must be even and <= {MAX_ORDER}, got {k_max}")));
    }
    let mut terms = vec![HeatKernelTerm {
        order_k: 0,
        indices: TermIndices::None,
        route: Route::Resummed,
        value: resummed_tf_small_lambda(p)?,
        tag: "resummed-tf-log",
    }];
    for k in (2..=k_max).step_by(2) {
        let coeffs = resummed_coefficients(k as usize)?;
        for (&(m, n, ell), a) in &coeffs {
            let a = a.to_f64().unwrap_or(f64::NAN);
            let (value, indices, tag) = if ell == 0 {
                (a * tilde_zk_singular_sum(k, n, p, mode)?, TermIndices::Pair { m, n }, "resummed-most-singular")
            } else if mode == SumMode::Leading {
                continue;
            } else if m == n {
                let df = double_factorial_f64(2 * m as i64 - 1)?;
                (a * df * tilde_zk_diagonal(k, m, p)?, TermIndices::Diagonal { m }, "resummed-diagonal")
            } else {
                (a * tilde_zk_less(k, n, ell, p, mode)?, TermIndices::Less { m, n, ell }, "resummed-less-singular")
            };
            terms.push(HeatKernelTerm { order_k: k, indices, route: Route::Resummed, value, tag });
        }
    }
    let total = terms.iter().map(|t| t.value).sum();
    Ok(SeriesAssembly { terms, total, warnings: lambda_warnings(p) })
}

/// Exact phase-space integral of a kernel's moment reduction using closed-form
/// moments with weight `e^{-tV}` at squared Higgs mass `v2`.
pub fn reduction_closed_n2(w: &PhasePolynomial, g: f64, v2_poly: f64, v2_weight: f64, t: f64) -> Result<f64> {
    let red = integrate_momenta(w)?;
    if red.dims != 2 {
        return Err(Error::ModelMismatch("closed-form moments exist for two dimensions".into()));
    }
    red.evaluate(t, g, v2_poly, |e| imn_closed_v2(e[0], e[1], g, v2_weight, t))
}

/// `Z_k` of the two-dimensional Yang-Mills-Higgs model through the symbolic
/// kernel and closed-form moments.
pub fn zk_symbolic_n2(k: usize, p: &ModelParams) -> Result<f64> {
    require_n2(p)?;
    require_higgs(p)?;
    let pot = Potential::yang_mills_higgs(2);
    let w = wk::wk_kernels(&pot, k);
    let v2 = p.v * p.v;
    let integral = reduction_closed_n2(&w[k], p.g, v2, v2, p.t)?;
    Ok(p.hbar.powi(k as i32) / (2.0 * PI * p.hbar).powi(2) * integral)
}

/// `Z̃_k` of the two-dimensional model through the symbolic kernel, with the
/// exact effective weight `e^{-t(V + ħ²tΔV/4)}`.
pub fn tilde_zk_symbolic_n2(k: usize, p: &ModelParams) -> Result<f64> {
    require_n2(p)?;
    if !(p.g > 0.0) {
        return domain("resummed terms need g > 0");
    }
    let pot = if p.v > 0.0 { Potential::yang_mills_higgs(2) } else { Potential::yang_mills(2) };
    let w = wk::resummed_kernels(&pot, k);
    let v2 = p.v * p.v;
    let v2_eff = v2 + p.v_eff2();
    let constant = (-p.hbar * p.hbar * p.t * p.t * v2 / 2.0).exp();
    let integral = reduction_closed_n2(&w[k], p.g, v2, v2_eff, p.t)?;
    Ok(constant * p.hbar.powi(k as i32) / (2.0 * PI * p.hbar).powi(2) * integral)
}

// ---------------------------------------------------------------------------
// Three-dimensional model
// ---------------------------------------------------------------------------

/// Thomas-Fermi term `L` of the three-dimensional model.
pub fn tf_term_n3(p: &ModelParams) -> Result<f64> {
    require_n3(p)?;
    p.prefactor_l()
}

/// `J_b(λ) = ∫₀^∞ u^b e^{-u²-λu} (λ+8u)^{-3/2} du` for `b ∈ {0, 2}`.
pub fn radial_jb(b: u32, lambda: f64) -> Result<f64> {
    radial_jb_with(b, lambda, &QuadratureSpec::with_rel_tol(1e-12))
}

pub fn radial_jb_with(b: u32, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
    if b != 0 && b != 2 {
        return Err(Error::Index(format!("J_b is defined for b = 0, 2, got {b}")));
    }
    if !(lambda > 0.0) {
        return domain(format!("J_b needs lambda > 0, got {lambda}"));
    }
    let f = |u: f64| u.powi(b as i32) * (-u * u - lambda * u).exp() * (lambda + 8.0 * u).powf(-1.5);
    // Geometric breaks resolve the (λ+8u)^{-3/2} knee at u ~ λ/8.
    let mut breaks = vec![0.0];
    let mut x = lambda / 64.0;
    while x < 2.0 {
        breaks.push(x);
        x *= 4.0;
    }
    breaks.push(2.0);
    let body = integrate_breaks(f, &breaks, spec)?;
    let tail = integrate_half_line(f, 2.0, 1.0, spec)?;
    Ok(body.value + tail.value)
}

/// Second-order term of the three-dimensional model after the effective
/// Higgs substitution, `√2 t^{-3/4}/(ħ g^{1/2}) [-J₀(λ) + 4J₂(λ)]`.
pub fn z2_n3(p: &ModelParams) -> Result<f64> {
    require_n3(p)?;
    if !(p.g > 0.0) {
        return domain("z2_n3 needs g > 0");
    }
    let lam = p.lambda();
    let pre = 2f64.sqrt() * p.t.powf(-0.75) / (p.hbar * p.g.sqrt());
    Ok(pre * (-radial_jb(0, lam)? + 4.0 * radial_jb(2, lam)?))
}

/// Leading small-λ form of [`z2_n3`]: `-L Γ(3/4)³/(2^{5/4}π^{3/2}) (g²ħ⁴t³)^{1/4}`.
pub fn z2_n3_leading(p: &ModelParams) -> Result<f64> {
    let l = tf_term_n3(p)?;
    let c = gamma_fn(0.75)?.powi(3) / (2f64.powf(1.25) * PI.powf(1.5));
    Ok(-l * c * p.lambda2().powf(0.25))
}
