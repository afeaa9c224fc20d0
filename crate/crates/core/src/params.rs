use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

/// Physical configuration of a model instance.
///
/// `n_model` is the number of coordinates (2 or 3). `λ²` and `z` are derived
/// on demand and never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n_model: u8,
    pub g: f64,
    pub v: f64,
    pub hbar: f64,
    pub t: f64,
}

impl ModelParams {
    pub fn new(n_model: u8, g: f64, v: f64, hbar: f64, t: f64) -> Result<Self> {
        let p = Self { n_model, g, v, hbar, t };
        p.validate()?;
        Ok(p)
    }

    pub fn n2(g: f64, v: f64, hbar: f64, t: f64) -> Result<Self> {
        Self::new(2, g, v, hbar, t)
    }

    pub fn n3(g: f64, v: f64, hbar: f64, t: f64) -> Result<Self> {
        Self::new(3, g, v, hbar, t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_model != 2 && self.n_model != 3 {
            return Err(Error::ModelMismatch(format!("n_model must be 2 or 3, got {}", self.n_model)));
        }
        let finite = [self.g, self.v, self.hbar, self.t].iter().all(|x| x.is_finite());
        if !finite {
            return domain("parameters must be finite");
        }
        if self.g < 0.0 {
            return domain(format!("g must be non-negative, got {}", self.g));
        }
        if self.v < 0.0 {
            return domain(format!("v must be non-negative, got {}", self.v));
        }
        if self.hbar <= 0.0 {
            return domain(format!("hbar must be positive, got {}", self.hbar));
        }
        if self.t <= 0.0 {
            return domain(format!("t must be positive, got {}", self.t));
        }
        Ok(())
    }

    /// `λ² = g²ħ⁴t³`.
    pub fn lambda2(&self) -> f64 {
        self.g * self.g * self.hbar.powi(4) * self.t.powi(3)
    }

    /// `λ = g t^{3/2} ħ²`, the unsquared parameter of the three-dimensional radial integrals.
    pub fn lambda(&self) -> f64 {
        self.g * self.t.powf(1.5) * self.hbar * self.hbar
    }

    /// `z = tv⁴/(2g²)`.
    pub fn z(&self) -> f64 {
        self.t * self.v.powi(4) / (2.0 * self.g * self.g)
    }

    /// Effective Higgs mass squared `ħ²g²t/2` generated by the resummation.
    pub fn v_eff2(&self) -> f64 {
        0.5 * self.hbar * self.hbar * self.g * self.g * self.t
    }

    /// Same parameters with `v` replaced.
    pub fn with_v(&self, v: f64) -> Self {
        Self { v, ..*self }
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..*self }
    }

    /// Apply the unit rescaling `(t, v, ħ) → (t/s, s^{1/4} v, s^{3/4} ħ)`.
    ///
    /// Every partition function is invariant under this map.
    pub fn rescaled(&self, s: f64) -> Self {
        Self {
            t: self.t / s,
            v: self.v * s.powf(0.25),
            hbar: self.hbar * s.powf(0.75),
            ..*self
        }
    }

    /// `K = (2πg²ħ⁴t³)^{-1/2}`.
    pub fn prefactor_k(&self) -> Result<f64> {
        if self.g <= 0.0 {
            return domain("K requires g > 0");
        }
        Ok((2.0 * PI * self.lambda2()).powf(-0.5))
    }

    /// `L = ½Γ(1/4)³(2π²g²ħ⁴t³)^{-3/4}`.
    pub fn prefactor_l(&self) -> Result<f64> {
        if self.g <= 0.0 {
            return domain("L requires g > 0");
        }
        let g14 = crate::special::gamma_fn(0.25)?;
        Ok(0.5 * g14.powi(3) * (2.0 * PI * PI * self.lambda2()).powf(-0.75))
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { n_model: 2, g: 1.0, v: 1.0, hbar: 1.0, t: 1.0 }
    }
}
