//! Adaptive Gauss-Kronrod quadrature and the brute-force oracles built on it.
//!
//! All coordinate integrals that the closed forms claim to reproduce are
//! computed here by direct numerical integration. Momentum integrals are
//! Gaussian and are always done analytically.

use crate::error::{domain, Error, Result};
use crate::params::ModelParams;
use crate::special;
use crate::wk::{self, PhasePolynomial};
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Tolerances and limits for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation radius for half-line integrals. `None` integrates the whole
    /// half line through a tangent map; `Some(R)` stops at `R` and bounds the
    /// neglected tail separately.
    pub domain_cutoff: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-300, max_subdivisions: 2000, domain_cutoff: None }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    fn inner(&self) -> Self {
        Self { rel_tol: self.rel_tol * 0.1, abs_tol: self.abs_tol * 0.1, ..*self }
    }
}

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration over `[a, b]`.
///
/// Intervals are bisected in order of decreasing error estimate until the
/// summed estimate falls below `max(abs_tol, rel_tol·|I|)`. The final sum is
/// taken in interval order so the result does not depend on heap layout.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_breaks(f, &[a, b], spec)
}

/// As [`integrate`], with the initial partition given by `breaks`.
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Estimate> {
    if breaks.len() < 2 {
        return domain("at least two break points are required");
    }
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = gk15(&f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Piece { a: w[0], b: w[1], value: v, error: e });
    }
    let mut n = heap.len();
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Accuracy("non-finite integrand value".into()));
        }
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if err <= target {
            break;
        }
        if n >= spec.max_subdivisions {
            return Err(Error::Convergence { subdivisions: n, value: total, error: err, target });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        n += 1;
    }
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = pieces.iter().map(|p| p.value).sum();
    let error = pieces.iter().map(|p| p.error).sum::<f64>().max(0.0);
    Ok(Estimate { value, error })
}

/// Integral over `[a, ∞)` through the tangent map `x = a + s·tan θ`.
///
/// `scale` sets where the integrand decays; choosing it near the decay length
/// keeps the mapped integrand well resolved. With a finite `domain_cutoff` the
/// integral stops there and the neglected tail is estimated and required to
/// stay below `rel_tol/10` of the result.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if !(scale > 0.0) {
        return domain("half-line scale must be positive");
    }
    let mapped = |lo: f64, hi: f64| {
        let th_lo = ((lo - a) / scale).atan();
        let th_hi = if hi.is_finite() { ((hi - a) / scale).atan() } else { 0.5 * PI };
        let g = |th: f64| {
            let c = th.cos();
            if c <= 0.0 {
                return 0.0;
            }
            let x = a + scale * th.tan();
            let y = f(x) * scale / (c * c);
            if y.is_finite() { y } else { 0.0 }
        };
        let breaks: Vec<f64> = (0..=8).map(|i| th_lo + (th_hi - th_lo) * i as f64 / 8.0).collect();
        integrate_breaks(g, &breaks, spec)
    };
    match spec.domain_cutoff {
        None => mapped(a, f64::INFINITY),
        Some(r) => {
            if r <= a {
                return domain("domain cutoff must exceed the lower limit");
            }
            let body = mapped(a, r)?;
            let tail = mapped(r, f64::INFINITY)?;
            if tail.value.abs() > 0.1 * spec.rel_tol * body.value.abs() {
                return Err(Error::Accuracy(format!(
                    "tail beyond cutoff {r} is {:e}, above rel_tol/10 of {:e}",
                    tail.value, body.value
                )));
            }
            Ok(Estimate { value: body.value, error: body.error + tail.value.abs() })
        }
    }
}

/// Decay length of `exp(-(t/2)(v² x² + ...))` used to scale half-line maps.
fn gaussian_scale(t: f64, v2: f64, g: f64) -> f64 {
    let a = 0.5 * t * v2;
    let s1 = if a > 0.0 { a.powf(-0.5) } else { f64::INFINITY };
    let s2 = if g > 0.0 { (0.5 * t * g * g).powf(-0.25) } else { f64::INFINITY };
    let s = s1.min(s2);
    if s.is_finite() { s } else { 1.0 }
}

/// Route for the two-dimensional coordinate moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImnRoute {
    /// Nested integration in `(x, y)`.
    Cartesian,
    /// Nested integration in `(u, w) = (xy, ln(x/y))`, aligned with the channels.
    Hyperbolic,
    /// Cartesian first, hyperbolic if the Cartesian mesh stalls.
    Auto,
}

/// `I_mn = 4∫₀^∞∫₀^∞ x^{2m} y^{2n} exp[-(t/2)(v²(x²+y²) + g²x²y²)] dx dy`
/// with explicit `v²`, so the same routine serves the effective-Higgs moments.
pub fn imn_quadrature_v2(m: u32, n: u32, g: f64, v2: f64, t: f64, spec: &QuadratureSpec, route: ImnRoute) -> Result<Estimate> {
    if !(v2 > 0.0) {
        return domain("I_mn requires a positive (effective) Higgs term");
    }
    match route {
        ImnRoute::Cartesian => imn_cartesian(m, n, g, v2, t, spec),
        ImnRoute::Hyperbolic => imn_hyperbolic(m, n, g, v2, t, spec),
        ImnRoute::Auto => match imn_cartesian(m, n, g, v2, t, spec) {
            Ok(e) => Ok(e),
            Err(Error::Convergence { .. }) | Err(Error::Accuracy(_)) => imn_hyperbolic(m, n, g, v2, t, spec),
            Err(e) => Err(e),
        },
    }
}

/// [`imn_quadrature_v2`] at the model's own `v`.
pub fn imn_quadrature(m: u32, n: u32, params: &ModelParams, spec: &QuadratureSpec) -> Result<Estimate> {
    imn_quadrature_v2(m, n, params.g, params.v * params.v, params.t, spec, ImnRoute::Auto)
}

fn imn_cartesian(m: u32, n: u32, g: f64, v2: f64, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    let inner_spec = spec.inner();
    let sx = gaussian_scale(t, v2, g);
    let failure = std::cell::RefCell::new(None::<Error>);
    let outer = |x: f64| {
        let a = 0.5 * t * (v2 + g * g * x * x);
        let fy = |y: f64| y.powi(2 * n as i32) * (-a * y * y).exp();
        match integrate_half_line(fy, 0.0, a.powf(-0.5), &inner_spec) {
            Ok(e) => x.powi(2 * m as i32) * (-0.5 * t * v2 * x * x).exp() * e.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let r = integrate_half_line(outer, 0.0, sx, spec)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Estimate { value: 4.0 * r.value, error: 4.0 * r.error + 0.4 * spec.rel_tol * r.value.abs() })
}

fn imn_hyperbolic(m: u32, n: u32, g: f64, v2: f64, t: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    // x = √u e^{w/2}, y = √u e^{-w/2}, dx dy = ½ du dw, over u > 0 and all w.
    let inner_spec = spec.inner();
    let d = m as f64 - n as f64;
    let failure = std::cell::RefCell::new(None::<Error>);
    let outer = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let b = t * v2 * u;
        let fw = |w: f64| (d * w - b * w.cosh()).exp() + (-d * w - b * w.cosh()).exp();
        let scale = 1.0 + (d / b).asinh();
        match integrate_half_line(fw, 0.0, scale, &inner_spec) {
            Ok(e) => 0.5 * u.powi((m + n) as i32) * (-0.5 * t * g * g * u * u).exp() * e.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut su = 1.0 / (t * v2);
    if g > 0.0 {
        su = su.min((0.5 * t * g * g).powf(-0.5));
    }
    let r = integrate_half_line(outer, 0.0, su, spec)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Estimate { value: 4.0 * r.value, error: 4.0 * r.error + 0.4 * spec.rel_tol * r.value.abs() })
}

/// Which mass term the coordinate weight carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// `e^{-tV}` with the model's own `v`.
    Plain,
    /// `e^{-tV}` with `v²` replaced by the given value.
    Higgs(f64),
}

/// Nested adaptive integration over the positive orthant of `dims` coordinates,
/// each on a tangent-mapped half line. `decay(k, outer)` returns the Gaussian
/// coefficient of `x_k²` given the already fixed outer coordinates.
fn orthant<F, D>(dims: usize, f: &F, decay: &D, quartic_scale: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64; 3]) -> f64,
    D: Fn(usize, &[f64; 3]) -> f64,
{
    let failure = std::cell::RefCell::new(None::<Error>);
    fn level<F, D>(
        d: usize,
        dims: usize,
        point: [f64; 3],
        f: &F,
        decay: &D,
        quartic_scale: f64,
        spec: &QuadratureSpec,
        failure: &std::cell::RefCell<Option<Error>>,
    ) -> Result<Estimate>
    where
        F: Fn(&[f64; 3]) -> f64,
        D: Fn(usize, &[f64; 3]) -> f64,
    {
        let a = decay(d, &point);
        let scale = if a > 0.0 { a.powf(-0.5).min(quartic_scale) } else { quartic_scale };
        let inner = QuadratureSpec { rel_tol: spec.rel_tol * 0.1, abs_tol: spec.abs_tol * 0.1, ..*spec };
        let g = |x: f64| {
            let mut p = point;
            p[d] = x;
            if d + 1 == dims {
                f(&p)
            } else {
                match level(d + 1, dims, p, f, decay, quartic_scale, &inner, failure) {
                    Ok(e) => e.value,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            }
        };
        integrate_half_line(g, 0.0, scale, spec)
    }
    let r = level(0, dims, [0.0; 3], f, decay, quartic_scale, spec, &failure)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Estimate { value: r.value, error: r.error + 0.2 * spec.rel_tol * r.value.abs() })
}

fn model_decay(t: f64, g: f64, v2: f64) -> impl Fn(usize, &[f64; 3]) -> f64 {
    move |k, outer: &[f64; 3]| {
        let others: f64 = (0..k).map(|j| outer[j] * outer[j]).sum();
        0.5 * t * (v2 + g * g * others)
    }
}

fn model_potential(dims: usize, g: f64, v2: f64, x: &[f64; 3]) -> f64 {
    let mut quartic = 0.0;
    let mut quad = 0.0;
    for i in 0..dims {
        quad += x[i] * x[i];
        for j in i + 1..dims {
            quartic += x[i] * x[i] * x[j] * x[j];
        }
    }
    0.5 * g * g * quartic + 0.5 * v2 * quad
}

/// Direct evaluation of `ħ^order (2πħ)^{-n} ∫dΓ W e^{-tH}`.
///
/// Momenta are integrated analytically; the coordinate integral is done by
/// nested adaptive quadrature of the unsymmetrized polynomial, so this route
/// shares nothing with the moment closed forms.
pub fn phase_space_quadrature(
    poly: &PhasePolynomial,
    params: &ModelParams,
    hbar_order: u32,
    weight: Weight,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let dims = poly.dims() as usize;
    if dims != params.n_model as usize {
        return Err(Error::ModelMismatch(format!("polynomial has {dims} dimensions, model has {}", params.n_model)));
    }
    let (t, g) = (params.t, params.g);
    let v2_poly = params.v * params.v;
    let v2_w = match weight {
        Weight::Plain => v2_poly,
        Weight::Higgs(v2) => v2,
    };
    if !(v2_w > 0.0) {
        return domain("direct quadrature needs a positive Higgs term in the weight");
    }
    let raw = wk::integrate_momenta_raw(poly)?;
    let mut terms: Vec<([i32; 3], f64)> = Vec::new();
    for (e, c) in &raw {
        if e.iter().any(|k| k % 2 == 1) {
            continue;
        }
        let k = c.evaluate(t, g, v2_poly);
        if k != 0.0 {
            terms.push(([e[0] as i32, e[1] as i32, e[2] as i32], k));
        }
    }
    if terms.is_empty() {
        return Ok(0.0);
    }
    let f = |x: &[f64; 3]| {
        let poly_val: f64 = terms.iter().map(|(e, k)| k * x[0].powi(e[0]) * x[1].powi(e[1]) * x[2].powi(e[2])).sum();
        poly_val * (-t * model_potential(dims, g, v2_w, x)).exp()
    };
    let quartic_scale = if g > 0.0 { (0.5 * t * g * g).powf(-0.25) } else { f64::INFINITY };
    let est = orthant(dims, &f, &model_decay(t, g, v2_w), quartic_scale, spec)?;
    let coordinate = est.value * 2f64.powi(dims as i32);
    let momentum = (2.0 * PI / t).powf(dims as f64 / 2.0);
    Ok(params.hbar.powi(hbar_order as i32) * (2.0 * PI * params.hbar).powi(-(dims as i32)) * momentum * coordinate)
}

/// The two radial integrals of the three-dimensional second-order term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialIntegral {
    /// `∫ x² e^{-tV}` over `x ≥ 0` and the full `(y, z)` plane.
    I1,
    /// `∫ x²(y²+z²)² e^{-tV}` over the same region.
    I2,
}

fn radial_v2(params: &ModelParams, effective: bool) -> f64 {
    let v2 = params.v * params.v;
    if effective {
        v2 + params.v_eff2()
    } else {
        v2
    }
}

/// Radial form `½(2π/t)^{3/2} ∫ r^{1|5} e^{-a} I₀(a) (v² + g²r²)^{-3/2} dr`,
/// `a = tg²r⁴/16`. With `effective = true` the mass is raised by `ħ²g²t/2`.
///
/// Power-law divergences at either end (present whenever `v² = 0`) are
/// detected from the local exponent of the integrand and reported as
/// [`Error::Divergent`].
pub fn radial_quadrature_n3(which: RadialIntegral, params: &ModelParams, effective: bool, spec: &QuadratureSpec) -> Result<f64> {
    if params.n_model != 3 {
        return Err(Error::ModelMismatch("radial integrals belong to the three-dimensional model".into()));
    }
    let (t, g) = (params.t, params.g);
    if !(g > 0.0) {
        return domain("radial integrals need g > 0");
    }
    let v2 = radial_v2(params, effective);
    let power = match which {
        RadialIntegral::I1 => 1,
        RadialIntegral::I2 => 5,
    };
    let f = |r: f64| {
        let a = t * g * g * r.powi(4) / 16.0;
        let i0s = special::bessel_i0_scaled(a).unwrap_or(f64::NAN);
        r.powi(power) * (-0.5 * t * v2 * r * r).exp() * i0s * (v2 + g * g * r * r).powf(-1.5)
    };
    let scale = (t * g * g / 16.0).powf(-0.25);
    let local_exponent = |r1: f64, r2: f64| {
        let (f1, f2) = (f(r1), f(r2));
        if f1 > 0.0 && f2 > 0.0 { Some((f2 / f1).ln() / (r2 / r1).ln()) } else { None }
    };
    if let Some(p0) = local_exponent(1e-9 * scale, 1e-8 * scale) {
        if p0 <= -1.0 + 1e-6 {
            return Err(Error::Divergent(format!("{which:?} integrand behaves as r^{p0:.3} at r -> 0")));
        }
    }
    if let Some(pinf) = local_exponent(1e6 * scale, 1e7 * scale) {
        if pinf >= -1.0 - 1e-6 {
            return Err(Error::Divergent(format!("{which:?} integrand behaves as r^{pinf:.3} at r -> infinity")));
        }
    }
    // decay length: the quartic I₀ envelope or the Gaussian mass term, whichever is shorter
    let reach = if v2 > 0.0 { scale.min((0.5 * t * v2).powf(-0.5)) } else { scale };
    let mut breaks = vec![0.0];
    // geometric breaks from below the knee of (v² + g²r²)^{-3/2}
    let mut x = if v2 > 0.0 { (v2.sqrt() / g).min(reach) / 16.0 } else { reach / 16.0 };
    while x < 4.0 * reach {
        breaks.push(x);
        x *= 4.0;
    }
    breaks.push(4.0 * reach);
    let body = integrate_breaks(f, &breaks, spec)?;
    let tail = integrate_half_line(f, 4.0 * reach, reach, spec)?;
    Ok(0.5 * (2.0 * PI / t).powf(1.5) * (body.value + tail.value))
}

/// Raw three-dimensional coordinate integral matching [`radial_quadrature_n3`].
pub fn raw_quadrature_n3(which: RadialIntegral, params: &ModelParams, effective: bool, spec: &QuadratureSpec) -> Result<f64> {
    if params.n_model != 3 {
        return Err(Error::ModelMismatch("raw integrals belong to the three-dimensional model".into()));
    }
    let (t, g) = (params.t, params.g);
    let v2 = radial_v2(params, effective);
    if !(v2 > 0.0) {
        return Err(Error::Divergent("raw integral without a Higgs term is not integrable".into()));
    }
    let f = |x: &[f64; 3]| {
        let poly = match which {
            RadialIntegral::I1 => x[0] * x[0],
            RadialIntegral::I2 => x[0] * x[0] * (x[1] * x[1] + x[2] * x[2]).powi(2),
        };
        poly * (-t * model_potential(3, g, v2, x)).exp()
    };
    let quartic_scale = (0.5 * t * g * g).powf(-0.25);
    let est = orthant(3, &f, &model_decay(t, g, v2), quartic_scale, spec)?;
    // x on the half line, (y, z) over the full plane
    Ok(4.0 * est.value)
}

/// Second-order term of the three-dimensional model from the two radial
/// integrals, `t^{1/2}/((2π)^{3/2}ħ) [-g²I₁ + (g⁴t/4) I₂]`. Both integrals
/// cover only `x ≥ 0`, so the bracket carries the reflection factor 2.
pub fn z2_n3_radial(params: &ModelParams, effective: bool, spec: &QuadratureSpec) -> Result<f64> {
    let i1 = radial_quadrature_n3(RadialIntegral::I1, params, effective, spec)?;
    let i2 = radial_quadrature_n3(RadialIntegral::I2, params, effective, spec)?;
    let (t, g) = (params.t, params.g);
    Ok(t.sqrt() / ((2.0 * PI).powf(1.5) * params.hbar) * (-g * g * i1 + 0.25 * g.powi(4) * t * i2))
}
