use super::poly::{PhasePolynomial, Var};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Exact coefficient `Σ c · t^a (g²)^b (v²)^c`; `t` powers may be negative
/// after momentum integration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolicCoeff {
    terms: BTreeMap<(i32, u32, u32), BigRational>,
}

impl SymbolicCoeff {
    pub fn add(&mut self, t: i32, g2: u32, v2: u32, c: BigRational) {
        let e = self.terms.entry((t, g2, v2)).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(t, g2, v2));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `((t_exp, g2_exp, v2_exp), coefficient)` pairs in sorted order.
    pub fn terms(&self) -> impl Iterator<Item = (&(i32, u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn get(&self, t: i32, g2: u32, v2: u32) -> BigRational {
        self.terms.get(&(t, g2, v2)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn evaluate(&self, t: f64, g: f64, v2: f64) -> f64 {
        let g2 = g * g;
        self.terms
            .iter()
            .map(|(&(a, b, c), k)| k.to_f64().unwrap_or(f64::NAN) * t.powi(a) * g2.powi(b as i32) * v2.powi(c as i32))
            .sum()
    }

    /// Drop every term carrying a power of `v²`.
    pub fn at_v_zero(&self) -> Self {
        Self { terms: self.terms.iter().filter(|(k, _)| k.2 == 0).map(|(k, c)| (*k, c.clone())).collect() }
    }
}

/// Phase-space integral of a kernel, expressed over coordinate moments.
///
/// Represents `∫dΓ W e^{-tH} = (2π/t)^{d/2} Σ_e coeff_e · ∫d^d x Π x_i^{2 e_i} e^{-tV}`,
/// with the half-exponents `e` sorted in decreasing order (coordinate
/// permutation symmetry of the potential is applied). The Gaussian factor
/// `(2π/t)^{d/2}` is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentReduction {
    pub dims: u8,
    entries: BTreeMap<[u32; 3], SymbolicCoeff>,
}

impl MomentReduction {
    pub fn entries(&self) -> impl Iterator<Item = (&[u32; 3], &SymbolicCoeff)> {
        self.entries.iter()
    }

    pub fn get(&self, exps: [u32; 3]) -> Option<&SymbolicCoeff> {
        self.entries.get(&exps)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Numeric value given a moment oracle `moment(e)` for each entry.
    pub fn evaluate<F: FnMut([u32; 3]) -> Result<f64>>(&self, t: f64, g: f64, v2: f64, mut moment: F) -> Result<f64> {
        let mut sum = 0.0;
        for (e, c) in &self.entries {
            let k = c.evaluate(t, g, v2);
            if k != 0.0 {
                sum += k * moment(*e)?;
            }
        }
        Ok(sum * (2.0 * std::f64::consts::PI / t).powf(self.dims as f64 / 2.0))
    }
}

fn gaussian_moment_factor(e: u16) -> BigInt {
    // (e-1)!! for even e
    let mut acc = BigInt::from(1);
    let mut k = e as i64 - 1;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Apply `∫dp p^{2j} e^{-tp²/2} = (2j-1)!! t^{-j} √(2π/t)` per momentum and
/// return `(raw coordinate exponents, coefficient)` pairs without any
/// symmetrization. Terms odd in a momentum vanish.
pub fn integrate_momenta_raw(poly: &PhasePolynomial) -> Result<Vec<([u16; 3], SymbolicCoeff)>> {
    let dims = poly.dims() as usize;
    let mut acc: BTreeMap<[u16; 3], SymbolicCoeff> = BTreeMap::new();
    for (m, c) in poly.terms() {
        let pe: Vec<u16> = Var::MOMENTA[..dims].iter().map(|&v| m.exp(v)).collect();
        if pe.iter().any(|e| e % 2 == 1) {
            continue;
        }
        if m.imag {
            return Err(Error::NonReal(format!("even-momentum term carries a factor of i: {:?}", m.exps)));
        }
        let mut k = c.clone();
        let mut j_total = 0i32;
        for &e in &pe {
            k *= gaussian_moment_factor(e);
            j_total += e as i32 / 2;
        }
        let mut ce = [0u16; 3];
        for d in 0..dims {
            ce[d] = m.exp(Var::COORDS[d]);
        }
        let t_exp = m.exp(Var::T) as i32 - j_total;
        acc.entry(ce).or_default().add(t_exp, m.exp(Var::G2) as u32, m.exp(Var::V2) as u32, k);
    }
    Ok(acc.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

/// Momentum integration followed by reduction onto symmetrized moments.
///
/// Odd coordinate powers integrate to zero against the even weight and are
/// dropped; the remaining half-exponents are sorted so that `m ≥ n (≥ q)`.
pub fn integrate_momenta(poly: &PhasePolynomial) -> Result<MomentReduction> {
    let raw = integrate_momenta_raw(poly)?;
    let mut entries: BTreeMap<[u32; 3], SymbolicCoeff> = BTreeMap::new();
    for (ce, c) in raw {
        if ce.iter().any(|e| e % 2 == 1) {
            continue;
        }
        let mut h = [ce[0] as u32 / 2, ce[1] as u32 / 2, ce[2] as u32 / 2];
        h.sort_unstable_by(|a, b| b.cmp(a));
        let slot = entries.entry(h).or_default();
        for (&(a, b, d), k) in c.terms() {
            slot.add(a, b, d, k.clone());
        }
    }
    entries.retain(|_, c| !c.is_zero());
    Ok(MomentReduction { dims: poly.dims(), entries })
}

/// Coefficients `a` of the structures `(g²t)^n Ĩ_mn` in a reduction of `W̃ₖ`
/// for the two-dimensional model, keyed by `(m, n, ℓ)` with `m - n = k/2 - 2ℓ`.
///
/// Only the `v`-independent part is read. Every surviving entry must be a
/// single monomial `a · (g²)^{k/4+(m+n)/2} t^{3k/4+(m+n)/2}`; anything else is
/// reported as an error.
pub fn extract_coefficients(reduction: &MomentReduction, k: usize) -> Result<BTreeMap<(u32, u32, u32), BigRational>> {
    if k % 2 == 1 {
        return Err(Error::OddOrder(k));
    }
    if reduction.dims != 2 {
        return Err(Error::ModelMismatch("coefficient extraction is defined for the two-dimensional model".into()));
    }
    let mut out = BTreeMap::new();
    for (e, c) in reduction.entries() {
        let c0 = c.at_v_zero();
        if c0.is_zero() {
            continue;
        }
        let (m, n) = (e[0], e[1]);
        let diff = m - n;
        let half_k = (k / 2) as u32;
        if diff > half_k || (half_k - diff) % 2 == 1 {
            return Err(Error::Structure(format!("moment ({m},{n}) does not fit the order-{k} structure")));
        }
        let ell = (half_k - diff) / 2;
        let twice_g = k as u32 / 2 + m + n;
        let twice_t = 3 * k as u32 / 2 + m + n;
        if twice_g % 2 == 1 || twice_t % 2 == 1 {
            return Err(Error::Structure(format!("moment ({m},{n}) has fractional power at order {k}")));
        }
        let (ge, te) = (twice_g / 2, (twice_t / 2) as i32);
        let mut it = c0.terms();
        match (it.next(), it.next()) {
            (Some((&(a, b, 0), val)), None) if a == te && b == ge => {
                out.insert((m, n, ell), val.clone());
            }
            _ => {
                return Err(Error::Structure(format!("moment ({m},{n}) coefficient is not a single g²/t monomial")));
            }
        }
    }
    Ok(out)
}
