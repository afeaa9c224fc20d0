//! Wigner-Kirkwood kernels as exact-rational phase-space polynomials.
//!
//! The resummed kernels `W̃ₖ` are generated by their own recursion in `t`.
//! Conventional kernels `Wₖ` follow by multiplying back the Taylor series of
//! `exp(-ħ²t²ΔV/4)`. Phase-space integrals reduce to coordinate moments after
//! analytic Gaussian integration over momenta.

mod moments;
mod poly;

pub use moments::{extract_coefficients, integrate_momenta, integrate_momenta_raw, MomentReduction, SymbolicCoeff};
pub use poly::{Monomial, PhasePolynomial, Var, NVARS};

use crate::error::{Error, Result};
use num_rational::BigRational;
use num_traits::One;
use poly::rat;

/// A polynomial potential together with the derivative combinations the
/// recursion needs, computed once.
#[derive(Debug, Clone)]
pub struct Potential {
    v: PhasePolynomial,
    grad: Vec<PhasePolynomial>,
    lap: PhasePolynomial,
    grad_lap: Vec<PhasePolynomial>,
    lap_lap: PhasePolynomial,
    grad_sq: PhasePolynomial,
    grad_dot_grad_lap: PhasePolynomial,
    grad_lap_sq: PhasePolynomial,
    p_dot_grad: PhasePolynomial,
    p_dot_grad_lap: PhasePolynomial,
}

impl Potential {
    /// Wrap a coordinate polynomial. Momenta, `t` and imaginary parts are rejected.
    pub fn new(v: PhasePolynomial) -> Result<Self> {
        for (m, _) in v.terms() {
            if m.imag {
                return Err(Error::UnsupportedPotential("imaginary coefficient".into()));
            }
            if m.momentum_degree() > 0 {
                return Err(Error::UnsupportedPotential("potential depends on momenta".into()));
            }
            if m.exp(Var::T) > 0 {
                return Err(Error::UnsupportedPotential("potential depends on t".into()));
            }
        }
        let grad = v.gradient();
        let lap = v.laplacian();
        let grad_lap = lap.gradient();
        let lap_lap = lap.laplacian();
        let dot = |a: &[PhasePolynomial], b: &[PhasePolynomial]| {
            a.iter().zip(b).fold(PhasePolynomial::zero(v.dims()), |acc, (x, y)| acc.add(&x.mul(y)))
        };
        let grad_sq = dot(&grad, &grad);
        let grad_dot_grad_lap = dot(&grad, &grad_lap);
        let grad_lap_sq = dot(&grad_lap, &grad_lap);
        let p_dot_grad = v.p_dot_grad();
        let p_dot_grad_lap = lap.p_dot_grad();
        Ok(Self { v, grad, lap, grad_lap, lap_lap, grad_sq, grad_dot_grad_lap, grad_lap_sq, p_dot_grad, p_dot_grad_lap })
    }

    /// `½ v² x²`.
    pub fn harmonic_1d() -> Self {
        let v = PhasePolynomial::monomial(1, &[(Var::V2, 1), (Var::X, 2)], rat(1, 2));
        Self::new(v).expect("polynomial potential")
    }

    /// `½ g² Σ_{i<j} x_i² x_j² + ½ v² Σ x_i²` in two or three dimensions.
    pub fn yang_mills_higgs(dims: u8) -> Self {
        Self::build(dims, true)
    }

    /// The pure Yang-Mills potential, without the Higgs term.
    pub fn yang_mills(dims: u8) -> Self {
        Self::build(dims, false)
    }

    fn build(dims: u8, higgs: bool) -> Self {
        assert!(dims == 2 || dims == 3, "Yang-Mills potentials need 2 or 3 dimensions");
        let half = rat(1, 2);
        let mut v = PhasePolynomial::zero(dims);
        let c = &Var::COORDS[..dims as usize];
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                v = v.add(&PhasePolynomial::monomial(dims, &[(Var::G2, 1), (c[i], 2), (c[j], 2)], half.clone()));
            }
            if higgs {
                v = v.add(&PhasePolynomial::monomial(dims, &[(Var::V2, 1), (c[i], 2)], half.clone()));
            }
        }
        Self::new(v).expect("polynomial potential")
    }

    pub fn dims(&self) -> u8 {
        self.v.dims()
    }

    pub fn polynomial(&self) -> &PhasePolynomial {
        &self.v
    }

    pub fn laplacian(&self) -> &PhasePolynomial {
        &self.lap
    }

    pub fn gradient(&self) -> &[PhasePolynomial] {
        &self.grad
    }
}

/// One step of the resummed recursion.
///
/// `prev[j]` holds `W̃_j`; orders that are missing or negative count as zero.
/// The result is `W̃ₖ = ∫₀^t (right-hand side) dτ`, so `W̃ₖ(t=0) = 0` for `k ≥ 1`.
pub fn recursion_step(prev: &[PhasePolynomial], k: usize, potential: &Potential) -> Result<PhasePolynomial> {
    let dims = potential.dims();
    if k == 0 {
        return Ok(PhasePolynomial::one(dims));
    }
    if let Some(bad) = prev.iter().find(|p| p.dims() != dims) {
        return Err(Error::OrderMismatch(format!("kernel has {} dimensions, potential has {dims}", bad.dims())));
    }
    let get = |back: usize| -> Option<&PhasePolynomial> {
        if back > k {
            None
        } else {
            prev.get(k - back).filter(|p| !p.is_zero())
        }
    };
    let pt = &potential;
    let mut rhs = PhasePolynomial::zero(dims);

    if let Some(w) = get(1) {
        // i p·∇W - i t (p·∇V) W
        let a = w.p_dot_grad();
        let b = pt.p_dot_grad.mul(w).mul_t_pow(1);
        rhs = rhs.add(&a.sub(&b).mul_i());
    }
    if let Some(w) = get(2) {
        // ½ΔW + ½t²(∇V)²W - t ∇V·∇W
        let half = rat(1, 2);
        rhs = rhs.add(&w.laplacian().scale(&half));
        rhs = rhs.add(&pt.grad_sq.mul(w).mul_t_pow(2).scale(&half));
        rhs = rhs.sub(&w.directional(&pt.grad).mul_t_pow(1));
    }
    if let Some(w) = get(3) {
        // -(i t²/4) (p·∇ΔV) W
        rhs = rhs.sub(&pt.p_dot_grad_lap.mul(w).mul_t_pow(2).scale(&rat(1, 4)).mul_i());
    }
    if let Some(w) = get(4) {
        // (t³/4) ∇V·∇ΔV W - (t²/4) ∇ΔV·∇W - (t²/8) ΔΔV W
        rhs = rhs.add(&pt.grad_dot_grad_lap.mul(w).mul_t_pow(3).scale(&rat(1, 4)));
        rhs = rhs.sub(&w.directional(&pt.grad_lap).mul_t_pow(2).scale(&rat(1, 4)));
        rhs = rhs.sub(&pt.lap_lap.mul(w).mul_t_pow(2).scale(&rat(1, 8)));
    }
    if let Some(w) = get(6) {
        // (t⁴/32) (∇ΔV)² W
        rhs = rhs.add(&pt.grad_lap_sq.mul(w).mul_t_pow(4).scale(&rat(1, 32)));
    }
    Ok(rhs.integrate_t())
}

/// `W̃₀ … W̃_order` for a potential.
pub fn resummed_kernels(potential: &Potential, order: usize) -> Vec<PhasePolynomial> {
    let mut out: Vec<PhasePolynomial> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let next = recursion_step(&out, k, potential).expect("dimensions are consistent by construction");
        out.push(next);
    }
    out
}

/// Conventional kernels `W₀ … W_order` from the resummed hierarchy.
///
/// `Wₖ = Σ_j W̃_{k-2j} (-t²ΔV/4)^j / j!`.
pub fn unresum(wtilde: &[PhasePolynomial], order: usize, potential: &Potential) -> Result<Vec<PhasePolynomial>> {
    if wtilde.len() < order + 1 {
        return Err(Error::OrderMismatch(format!(
            "need resummed kernels through order {order}, got {}",
            wtilde.len().saturating_sub(1)
        )));
    }
    let dims = potential.dims();
    let factor = potential.lap.mul_t_pow(2).scale(&rat(-1, 4));
    let mut powers = vec![PhasePolynomial::one(dims)];
    for j in 1..=order / 2 {
        powers.push(powers[j - 1].mul(&factor));
    }
    let inv_fact: Vec<BigRational> = (0..=order / 2)
        .map(|j| {
            let f: BigRational = (1..=j).fold(BigRational::one(), |a, i| a * BigRational::from_integer(i.into()));
            BigRational::one() / f
        })
        .collect();
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut w = PhasePolynomial::zero(dims);
        for j in 0..=k / 2 {
            w = w.add(&wtilde[k - 2 * j].mul(&powers[j]).scale(&inv_fact[j]));
        }
        out.push(w);
    }
    Ok(out)
}

/// Conventional Wigner-Kirkwood kernels through `order`.
pub fn wk_kernels(potential: &Potential, order: usize) -> Vec<PhasePolynomial> {
    let wt = resummed_kernels(potential, order);
    unresum(&wt, order, potential).expect("length matches by construction")
}
