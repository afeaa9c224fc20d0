use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Number of tracked symbols: x, y, z, p_x, p_y, p_z, t, g², v².
pub const NVARS: usize = 9;

/// Symbol slots of a [`Monomial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X = 0,
    Y = 1,
    Z = 2,
    Px = 3,
    Py = 4,
    Pz = 5,
    T = 6,
    G2 = 7,
    V2 = 8,
}

impl Var {
    pub const COORDS: [Var; 3] = [Var::X, Var::Y, Var::Z];
    pub const MOMENTA: [Var; 3] = [Var::Px, Var::Py, Var::Pz];

    pub fn name(self) -> &'static str {
        ["x", "y", "z", "px", "py", "pz", "t", "g2", "v2"][self as usize]
    }
}

/// Exponent vector plus a flag for one factor of the imaginary unit.
///
/// `i² = -1` is folded into the coefficient, so at most one factor of `i`
/// is ever carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub exps: [u16; NVARS],
    pub imag: bool,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { exps: [0; NVARS], imag: false };

    pub fn exp(&self, v: Var) -> u16 {
        self.exps[v as usize]
    }

    pub fn momentum_degree(&self) -> u32 {
        Var::MOMENTA.iter().map(|&v| self.exp(v) as u32).sum()
    }

    fn mul(&self, other: &Monomial) -> (Monomial, bool) {
        let mut exps = [0u16; NVARS];
        for i in 0..NVARS {
            exps[i] = self.exps[i] + other.exps[i];
        }
        let negate = self.imag && other.imag;
        (Monomial { exps, imag: self.imag ^ other.imag }, negate)
    }
}

/// Sparse polynomial in phase-space variables, `t`, `g²` and `v²` with exact
/// rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePolynomial {
    dims: u8,
    terms: BTreeMap<Monomial, BigRational>,
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl PhasePolynomial {
    pub fn zero(dims: u8) -> Self {
        assert!((1..=3).contains(&dims), "dims must be 1, 2 or 3");
        Self { dims, terms: BTreeMap::new() }
    }

    pub fn one(dims: u8) -> Self {
        Self::constant(dims, BigRational::one())
    }

    pub fn constant(dims: u8, c: BigRational) -> Self {
        let mut p = Self::zero(dims);
        p.add_term(Monomial::ONE, c);
        p
    }

    /// A single symbol raised to the first power.
    pub fn var(dims: u8, v: Var) -> Self {
        Self::monomial(dims, &[(v, 1)], BigRational::one())
    }

    pub fn monomial(dims: u8, powers: &[(Var, u16)], c: BigRational) -> Self {
        let mut m = Monomial::ONE;
        for &(v, e) in powers {
            m.exps[v as usize] += e;
        }
        let mut p = Self::zero(dims);
        p.add_term(m, c);
        p
    }

    pub fn dims(&self) -> u8 {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dims.max(other.dims));
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let (m, negate) = m1.mul(m2);
                let c = c1 * c2;
                out.add_term(m, if negate { -c } else { c });
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.dims);
        if c.is_zero() {
            return out;
        }
        for (m, k) in &self.terms {
            out.terms.insert(*m, k * c);
        }
        out
    }

    /// Multiply by `i`.
    pub fn mul_i(&self) -> Self {
        let mut out = Self::zero(self.dims);
        for (m, c) in &self.terms {
            let mut m2 = *m;
            m2.imag = !m.imag;
            out.terms.insert(m2, if m.imag { -c.clone() } else { c.clone() });
        }
        out
    }

    /// Multiply by `t^e`.
    pub fn mul_t_pow(&self, e: u16) -> Self {
        let mut out = Self::zero(self.dims);
        for (m, c) in &self.terms {
            let mut m2 = *m;
            m2.exps[Var::T as usize] += e;
            out.terms.insert(m2, c.clone());
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.dims);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to one symbol.
    pub fn derivative(&self, v: Var) -> Self {
        let mut out = Self::zero(self.dims);
        let i = v as usize;
        for (m, c) in &self.terms {
            let e = m.exps[i];
            if e == 0 {
                continue;
            }
            let mut m2 = *m;
            m2.exps[i] = e - 1;
            out.add_term(m2, c * BigInt::from(e));
        }
        out
    }

    /// Coordinate gradient, one entry per active dimension.
    pub fn gradient(&self) -> Vec<Self> {
        Var::COORDS[..self.dims as usize].iter().map(|&v| self.derivative(v)).collect()
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.dims);
        for &v in &Var::COORDS[..self.dims as usize] {
            out = out.add(&self.derivative(v).derivative(v));
        }
        out
    }

    /// `p·∇f`.
    pub fn p_dot_grad(&self) -> Self {
        let mut out = Self::zero(self.dims);
        for d in 0..self.dims as usize {
            let p = Self::var(self.dims, Var::MOMENTA[d]);
            out = out.add(&p.mul(&self.derivative(Var::COORDS[d])));
        }
        out
    }

    /// `a·∇f` for a coordinate vector field `a`.
    pub fn directional(&self, field: &[Self]) -> Self {
        let mut out = Self::zero(self.dims);
        for (d, a) in field.iter().enumerate() {
            out = out.add(&a.mul(&self.derivative(Var::COORDS[d])));
        }
        out
    }

    /// `∫₀^t f(τ) dτ` in the `t` symbol.
    pub fn integrate_t(&self) -> Self {
        let mut out = Self::zero(self.dims);
        let i = Var::T as usize;
        for (m, c) in &self.terms {
            let mut m2 = *m;
            m2.exps[i] += 1;
            out.add_term(m2, c / BigInt::from(m2.exps[i]));
        }
        out
    }

    /// Replace a symbol by zero.
    pub fn set_zero(&self, v: Var) -> Self {
        let mut out = Self::zero(self.dims);
        for (m, c) in &self.terms {
            if m.exp(v) == 0 {
                out.terms.insert(*m, c.clone());
            }
        }
        out
    }

    /// Maximum total degree in one symbol.
    pub fn degree(&self, v: Var) -> u16 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    /// Whether every term has momentum degree of the given parity.
    pub fn has_momentum_parity(&self, odd: bool) -> bool {
        self.terms.keys().all(|m| (m.momentum_degree() % 2 == 1) == odd)
    }

    /// Numeric value at a point; returns `(re, im)`.
    ///
    /// `point` holds values for all nine symbols in [`Var`] order.
    pub fn evaluate(&self, point: &[f64; NVARS]) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = c.to_f64().unwrap_or(f64::NAN);
            for i in 0..NVARS {
                if m.exps[i] > 0 {
                    v *= point[i].powi(m.exps[i] as i32);
                }
            }
            if m.imag {
                im += v;
            } else {
                re += v;
            }
        }
        (re, im)
    }

    /// Canonical text form: one term per line, sorted by exponent tuple.
    pub fn canonical_dump(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.terms {
            s.push_str(&format!("{}{} *", if m.imag { "i*" } else { "" }, fmt_rat(c)));
            for v in [Var::X, Var::Y, Var::Z, Var::Px, Var::Py, Var::Pz, Var::T, Var::G2, Var::V2] {
                let e = m.exp(v);
                if e > 0 {
                    s.push_str(&format!(" {}^{}", v.name(), e));
                }
            }
            s.push('\n');
        }
        s
    }
}

fn fmt_rat(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for PhasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            write!(f, "{}", fmt_rat(&c.abs()))?;
            if m.imag {
                write!(f, "*i")?;
            }
            for v in [Var::X, Var::Y, Var::Z, Var::Px, Var::Py, Var::Pz, Var::T, Var::G2, Var::V2] {
                match m.exp(v) {
                    0 => {}
                    1 => write!(f, "*{}", v.name())?,
                    e => write!(f, "*{}^{}", v.name(), e)?,
                }
            }
        }
        Ok(())
    }
}
