//! Partition functions of the homogeneous Yang-Mills and Yang-Mills-Higgs
//! quantum mechanics with `x²y²` potentials.
//!
//! The crate evaluates the Thomas-Fermi term, Wigner-Kirkwood ħ-corrections
//! and the resummed effective-Higgs expansion in closed form, and checks
//! them against two independent oracles: brute-force quadrature of the
//! phase-space integrals and direct diagonalization of the Hamiltonian.
//!
//! Units follow the convention `[H] = 1`, `[t] = -1`, `[x] = [v] = 1/4`,
//! `[ħ] = 3/4`, with `g` dimensionless. Every partition function depends
//! only on `λ² = g²ħ⁴t³` and `z = tv⁴/(2g²)`.

pub mod error;
pub mod heat_kernel;
pub mod params;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod wk;

pub use error::{Error, Result};
pub use heat_kernel::{Flagged, HeatKernelTerm, Route, SeriesAssembly, SumMode, TermIndices, Warning};
pub use params::ModelParams;
pub use quadrature::{Estimate, QuadratureSpec};
pub use special::WhittakerArgs;
pub use spectral::{BasisSpec, SpectrumResult};
pub use wk::{MomentReduction, PhasePolynomial, Potential};
