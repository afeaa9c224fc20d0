//! Spectral oracle: `Z(t) = Σ e^{-tEᵢ}` from direct diagonalization.
//!
//! The Hamiltonian is represented in a truncated product basis of harmonic
//! oscillator states of frequency `ω` (a numerical parameter), assembled from
//! exact one-dimensional matrix elements of `x²` and `p²`. Parity and, for
//! two coordinates, the `x ↔ y` exchange split the matrix into blocks.

use crate::error::{domain, Error, Result};
use crate::heat_kernel;
use crate::params::ModelParams;
use crate::special;
use faer::{Mat, Side};
use std::io::{BufRead, Write};

/// Block structure used for diagonalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// One dense block.
    None,
    /// Parity of every coordinate.
    Parity,
    /// Parity plus the `x ↔ y` exchange (two coordinates); parity only for three.
    Full,
}

/// Truncated product basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    /// Levels `0 … N-1` per coordinate.
    pub cutoff_per_axis: usize,
    /// Basis frequency `ω`; `None` selects [`default_oscillator_scale`].
    pub oscillator_scale: Option<f64>,
    pub symmetry: Symmetry,
    /// Largest block dimension accepted before refusing to build.
    pub max_block_dim: usize,
}

impl BasisSpec {
    pub fn new(cutoff_per_axis: usize) -> Self {
        Self { cutoff_per_axis, oscillator_scale: None, symmetry: Symmetry::Full, max_block_dim: 12_000 }
    }

    pub fn with_scale(mut self, omega: f64) -> Self {
        self.oscillator_scale = Some(omega);
        self
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn dimension(&self, n_model: u8) -> usize {
        self.cutoff_per_axis.pow(n_model as u32)
    }

    fn enlarged(&self, extra: usize) -> Self {
        Self { cutoff_per_axis: self.cutoff_per_axis + extra, ..*self }
    }
}

/// Basis frequency used when none is given: `ω = (v³ + c³ g²ħ)^{1/3}` with
/// `c = 0.35`.
///
/// The form is the only combination of `v` and `g²ħ` with the units of `ω`
/// that reduces to `ω = v` without coupling; `c` was calibrated on the
/// `v = 0` truncation study of `Z(t)`.
pub fn default_oscillator_scale(params: &ModelParams) -> f64 {
    const C: f64 = 0.35;
    let w = (params.v.powi(3) + C.powi(3) * params.g * params.g * params.hbar).cbrt();
    if w > 0.0 { w } else { 1.0 }
}

/// `tr(H)` per basis state as a function of `ω`; the minimizer is an
/// alternative, purely variational choice of basis frequency.
pub fn trace_per_state(params: &ModelParams, n: usize, omega: f64) -> f64 {
    let nf = n as f64;
    // mean of (k + 1/2) over k < N
    let mean_level = 0.5 * nf;
    let x2 = params.hbar / omega * mean_level;
    let p2 = params.hbar * omega * mean_level;
    let d = params.n_model as f64;
    let pairs = d * (d - 1.0) / 2.0;
    0.5 * d * p2 + 0.5 * params.g * params.g * pairs * x2 * x2 + 0.5 * params.v * params.v * d * x2
}

/// Minimizer of [`trace_per_state`] over `ω` by golden-section search.
pub fn trace_minimizing_scale(params: &ModelParams, n: usize) -> f64 {
    let f = |lw: f64| trace_per_state(params, n, lw.exp());
    let (mut a, mut b) = (-12.0f64, 12.0f64);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (0.5 * (a + b)).exp()
}

/// `⟨a|x²|b⟩` for oscillator states of frequency `ω` (unit mass).
pub fn x2_element(a: usize, b: usize, hbar: f64, omega: f64) -> f64 {
    Ladder::new(a.max(b) + 1, hbar, omega).x2(a, b)
}

/// `⟨a|p²|b⟩` for oscillator states of frequency `ω` (unit mass).
pub fn p2_element(a: usize, b: usize, hbar: f64, omega: f64) -> f64 {
    Ladder::new(a.max(b) + 1, hbar, omega).p2(a, b)
}

/// One-dimensional `x²` and `p²` matrices in the oscillator basis.
struct Ladder {
    x2: Vec<[f64; 2]>,
    p2: Vec<[f64; 2]>,
}

impl Ladder {
    fn new(n: usize, hbar: f64, omega: f64) -> Self {
        // per row: diagonal and the +2 neighbour; the matrices are symmetric
        let mut x2 = Vec::with_capacity(n);
        let mut p2 = Vec::with_capacity(n);
        for k in 0..n {
            let kf = k as f64;
            let off = 0.5 * ((kf + 1.0) * (kf + 2.0)).sqrt();
            x2.push([hbar / omega * (kf + 0.5), hbar / omega * off]);
            p2.push([hbar * omega * (kf + 0.5), -hbar * omega * off]);
        }
        Self { x2, p2 }
    }

    fn x2(&self, a: usize, b: usize) -> f64 {
        Self::elem(&self.x2, a, b)
    }

    fn p2(&self, a: usize, b: usize) -> f64 {
        Self::elem(&self.p2, a, b)
    }

    fn elem(m: &[[f64; 2]], a: usize, b: usize) -> f64 {
        if a == b {
            m[a][0]
        } else if a + 2 == b {
            m[a][1]
        } else if b + 2 == a {
            m[b][1]
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    All,
    Kinetic,
    Potential,
}

/// Matrix element between product states.
fn product_element(l: &Ladder, p: &ModelParams, part: Part, a: &[usize], b: &[usize]) -> f64 {
    let d = a.len();
    let others_delta = |skip: &[usize]| (0..d).filter(|i| !skip.contains(i)).all(|i| a[i] == b[i]);
    let mut h = 0.0;
    if part != Part::Potential {
        for i in 0..d {
            if others_delta(&[i]) {
                h += 0.5 * l.p2(a[i], b[i]);
            }
        }
    }
    if part != Part::Kinetic {
        let (g2, v2) = (p.g * p.g, p.v * p.v);
        for i in 0..d {
            if v2 != 0.0 && others_delta(&[i]) {
                h += 0.5 * v2 * l.x2(a[i], b[i]);
            }
            for j in i + 1..d {
                if g2 != 0.0 && others_delta(&[i, j]) {
                    h += 0.5 * g2 * l.x2(a[i], b[i]) * l.x2(a[j], b[j]);
                }
            }
        }
    }
    h
}

/// A symmetry block: basis states (possibly symmetrized pairs) and multiplicity.
#[derive(Debug, Clone)]
struct BlockLayout {
    label: String,
    /// Each state is a list of (weight, product indices).
    states: Vec<Vec<(f64, [usize; 3])>>,
    multiplicity: usize,
}

fn layouts(n_model: u8, n: usize, symmetry: Symmetry) -> Vec<BlockLayout> {
    let d = n_model as usize;
    let parity_sets: Vec<Vec<usize>> = match symmetry {
        Symmetry::None => vec![vec![]],
        _ => (0..(1usize << d)).map(|mask| (0..d).map(|i| (mask >> i) & 1).collect()).collect(),
    };
    let mut out = Vec::new();
    if symmetry == Symmetry::Full && d == 2 {
        for par in 0..2usize {
            for sign in [1.0f64, -1.0] {
                let mut states = Vec::new();
                for a in (par..n).step_by(2) {
                    for b in (a..n).step_by(2) {
                        if a == b {
                            if sign > 0.0 {
                                states.push(vec![(1.0, [a, a, 0])]);
                            }
                        } else {
                            let w = std::f64::consts::FRAC_1_SQRT_2;
                            states.push(vec![(w, [a, b, 0]), (sign * w, [b, a, 0])]);
                        }
                    }
                }
                let label = format!("{}{}", if par == 0 { "ee" } else { "oo" }, if sign > 0.0 { "+" } else { "-" });
                out.push(BlockLayout { label, states, multiplicity: 1 });
            }
        }
        let mut states = Vec::new();
        for a in (0..n).step_by(2) {
            for b in (1..n).step_by(2) {
                states.push(vec![(1.0, [a, b, 0])]);
            }
        }
        out.push(BlockLayout { label: "eo".into(), states, multiplicity: 2 });
        return out;
    }
    for par in parity_sets {
        let mut states = Vec::new();
        let mut idx = [0usize; 3];
        let total = n.pow(d as u32);
        for flat in 0..total {
            let mut r = flat;
            for i in (0..d).rev() {
                idx[i] = r % n;
                r /= n;
            }
            if par.iter().enumerate().all(|(i, &p)| idx[i] % 2 == p) {
                states.push(vec![(1.0, idx)]);
            }
        }
        let label = if par.is_empty() {
            "all".to_string()
        } else {
            par.iter().map(|&p| if p == 0 { 'e' } else { 'o' }).collect()
        };
        out.push(BlockLayout { label, states, multiplicity: 1 });
    }
    out
}

/// Hamiltonian blocks for a parameter set and basis.
#[derive(Debug)]
pub struct Hamiltonian {
    pub params: ModelParams,
    pub basis: BasisSpec,
    pub omega: f64,
    blocks: Vec<(BlockLayout, Mat<f64>)>,
}

fn assemble(layout: &BlockLayout, ladder: &Ladder, params: &ModelParams, part: Part) -> Mat<f64> {
    let d = params.n_model as usize;
    let m = layout.states.len();
    Mat::from_fn(m, m, |i, j| {
        if j < i {
            return 0.0;
        }
        let mut h = 0.0;
        for (wa, a) in &layout.states[i] {
            for (wb, b) in &layout.states[j] {
                h += wa * wb * product_element(ladder, params, part, &a[..d], &b[..d]);
            }
        }
        h
    })
}

fn symmetrize_upper(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = m[(j, i)];
            m[(i, j)] = v;
        }
    }
}

/// Assemble the symmetric Hamiltonian blocks.
pub fn build_hamiltonian(params: &ModelParams, basis: &BasisSpec) -> Result<Hamiltonian> {
    params.validate()?;
    if basis.cutoff_per_axis < 4 {
        return domain(format!("basis needs at least 4 levels per axis, got {}", basis.cutoff_per_axis));
    }
    let omega = basis.oscillator_scale.unwrap_or_else(|| default_oscillator_scale(params));
    if !(omega > 0.0) {
        return domain("oscillator scale must be positive");
    }
    let lays = layouts(params.n_model, basis.cutoff_per_axis, basis.symmetry);
    let largest = lays.iter().map(|l| l.states.len()).max().unwrap_or(0);
    if largest > basis.max_block_dim {
        return Err(Error::DimensionOverflow { dimension: largest, cap: basis.max_block_dim });
    }
    let ladder = Ladder::new(basis.cutoff_per_axis, params.hbar, omega);
    let blocks = lays
        .into_iter()
        .map(|l| {
            let mut m = assemble(&l, &ladder, params, Part::All);
            symmetrize_upper(&mut m);
            (l, m)
        })
        .collect();
    Ok(Hamiltonian { params: *params, basis: BasisSpec { oscillator_scale: Some(omega), ..*basis }, omega, blocks })
}

impl Hamiltonian {
    /// `(label, dimension, multiplicity)` per block.
    pub fn block_shapes(&self) -> Vec<(String, usize, usize)> {
        self.blocks.iter().map(|(l, m)| (l.label.clone(), m.nrows(), l.multiplicity)).collect()
    }

    /// Total number of states, multiplicities included.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|(l, m)| m.nrows() * l.multiplicity).sum()
    }

    /// Largest asymmetry `|H_ij - H_ji|` over all blocks.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for (_, m) in &self.blocks {
            for i in 0..m.nrows() {
                for j in 0..i {
                    worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
                }
            }
        }
        worst
    }

    /// Dense copy of one block.
    pub fn block_matrix(&self, index: usize) -> Option<Mat<f64>> {
        self.blocks.get(index).map(|(_, m)| m.clone())
    }

    /// All eigenvalues, multiplicities expanded, ascending.
    pub fn all_eigenvalues(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dimension());
        for (l, m) in &self.blocks {
            let ev = m
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Accuracy(format!("eigensolver failed on block {}: {e:?}", l.label)))?;
            for e in ev {
                for _ in 0..l.multiplicity {
                    out.push(e);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// Ground state energy with kinetic and potential expectation values.
    pub fn ground_state_expectations(&self) -> Result<GroundState> {
        let ladder = Ladder::new(self.basis.cutoff_per_axis, self.params.hbar, self.omega);
        let mut best: Option<GroundState> = None;
        for (l, m) in &self.blocks {
            let eig = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Accuracy(format!("eigensolver failed on block {}: {e:?}", l.label)))?;
            let e0 = eig.S().column_vector()[0];
            if best.as_ref().is_some_and(|b| b.energy <= e0) {
                continue;
            }
            let u = eig.U();
            let vec: Vec<f64> = (0..m.nrows()).map(|i| u[(i, 0)]).collect();
            let expect = |part: Part| {
                let mut op = assemble(l, &ladder, &self.params, part);
                symmetrize_upper(&mut op);
                let mut s = 0.0;
                for i in 0..vec.len() {
                    for j in 0..vec.len() {
                        s += vec[i] * op[(i, j)] * vec[j];
                    }
                }
                s
            };
            best = Some(GroundState {
                energy: e0,
                kinetic: expect(Part::Kinetic),
                potential: expect(Part::Potential),
                sector: l.label.clone(),
            });
        }
        best.ok_or_else(|| Error::Domain("empty basis".into()))
    }
}

/// Ground state summary from [`Hamiltonian::ground_state_expectations`].
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub sector: String,
}

/// Sorted eigenvalues with truncation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub basis: BasisSpec,
    pub params: ModelParams,
    pub conv_tol: f64,
    /// Leading eigenvalues that moved by less than `conv_tol` when the basis
    /// grew by eight levels per axis.
    pub count_converged: usize,
}

/// Levels added per axis when checking convergence.
pub const CONVERGENCE_STEP: usize = 8;

/// Full spectrum with convergence metadata from an enlarged basis.
pub fn spectrum(handle: &Hamiltonian, conv_tol: f64) -> Result<SpectrumResult> {
    let ev = handle.all_eigenvalues()?;
    let bigger = build_hamiltonian(&handle.params, &handle.basis.enlarged(CONVERGENCE_STEP))?;
    let ref_ev = bigger.all_eigenvalues()?;
    let count = ev.iter().zip(&ref_ev).take_while(|(a, b)| (*a - *b).abs() < conv_tol).count();
    Ok(SpectrumResult { eigenvalues: ev, basis: handle.basis, params: handle.params, conv_tol, count_converged: count })
}

/// The lowest `how_many` eigenvalues, all converged to `conv_tol`.
pub fn eigenvalues(handle: &Hamiltonian, how_many: usize, conv_tol: f64) -> Result<SpectrumResult> {
    let dim = handle.dimension();
    if how_many > dim / 4 {
        return Err(Error::Index(format!("how_many = {how_many} exceeds a quarter of the basis dimension {dim}")));
    }
    let full = spectrum(handle, conv_tol)?;
    if full.count_converged < how_many {
        let bigger = build_hamiltonian(&handle.params, &handle.basis.enlarged(CONVERGENCE_STEP))?.all_eigenvalues()?;
        let i = full.count_converged;
        return Err(Error::NotConverged { index: i, change: (full.eigenvalues[i] - bigger[i]).abs(), tol: conv_tol });
    }
    Ok(SpectrumResult { eigenvalues: full.eigenvalues[..how_many].to_vec(), count_converged: how_many, ..full })
}

/// How to bound the part of `Z(t)` carried by states beyond the converged ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBound {
    /// No tail estimate.
    None,
    /// Chernoff bound against a Thomas-Fermi envelope scaled by `safety`.
    Envelope { safety: f64 },
}

impl Default for TailBound {
    fn default() -> Self {
        TailBound::Envelope { safety: 10.0 }
    }
}

/// Partition function from a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionEstimate {
    /// Sum over every basis eigenvalue; a lower bound on `Z` by the variational principle.
    pub value: f64,
    /// Sum over the converged eigenvalues.
    pub lower: f64,
    /// `lower + tail_bound`.
    pub upper: f64,
    pub tail_bound: f64,
}

/// Thomas-Fermi envelope `Z_env(s)` used by the tail majorant.
pub fn envelope(params: &ModelParams, s: f64) -> f64 {
    let p = params.with_t(s);
    if p.g <= 0.0 {
        let x = p.hbar * p.v * s;
        return if x > 0.0 { (x * x).recip().powf(p.n_model as f64 / 2.0) } else { f64::INFINITY };
    }
    match p.n_model {
        2 => {
            let v2 = p.v * p.v + p.v_eff2();
            let zeta = s * v2 * v2 / (4.0 * p.g * p.g);
            p.prefactor_k().unwrap_or(f64::INFINITY) * special::bessel_k0_scaled(zeta).unwrap_or(f64::INFINITY)
        }
        _ => p.prefactor_l().unwrap_or(f64::INFINITY),
    }
}

fn chernoff_tail(params: &ModelParams, t: f64, e_cut: f64, safety: f64) -> f64 {
    // Σ_{E > E_c} e^{-tE} ≤ e^{-(t-s)E_c} Z(s), minimized over s on a grid.
    let mut best = f64::INFINITY;
    for i in 1..200 {
        let s = t * i as f64 / 200.0;
        let b = safety * envelope(params, s) * (-(t - s) * e_cut).exp();
        if b < best {
            best = b;
        }
    }
    best
}

/// `Z(t)` with bracket `[lower, lower + tail]`. With `rel_tol = Some(ε)` a
/// tail bound above `ε·value` is a regime error.
pub fn partition_from_spectrum(spec: &SpectrumResult, t: f64, tail: TailBound, rel_tol: Option<f64>) -> Result<PartitionEstimate> {
    if !(t > 0.0) {
        return domain("t must be positive");
    }
    let value: f64 = spec.eigenvalues.iter().map(|e| (-t * e).exp()).sum();
    let lower: f64 = spec.eigenvalues[..spec.count_converged].iter().map(|e| (-t * e).exp()).sum();
    let tail_bound = match tail {
        TailBound::None => 0.0,
        TailBound::Envelope { safety } => {
            if spec.count_converged == 0 {
                f64::INFINITY
            } else {
                let e_cut = spec.eigenvalues[spec.count_converged - 1] - spec.conv_tol;
                chernoff_tail(&spec.params, t, e_cut, safety)
            }
        }
    };
    if let Some(eps) = rel_tol {
        if tail_bound > eps * value {
            return Err(Error::Regime(format!(
                "tail bound {tail_bound:e} exceeds {eps:e} of Z = {value:e}; t = {t} is too small for this basis"
            )));
        }
    }
    Ok(PartitionEstimate { value, lower, upper: lower + tail_bound, tail_bound })
}

/// `[2 sinh(ħvt/2)]^{-n}`, the exact harmonic partition function.
pub fn harmonic_partition(n_model: u8, hbar: f64, v: f64, t: f64) -> f64 {
    (2.0 * (0.5 * hbar * v * t).sinh()).powi(-(n_model as i32))
}

/// One row of a truncation study of `Z(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPoint {
    pub t: f64,
    pub lambda2: f64,
    pub z_over_k: f64,
    /// Relative change of `Z` between `N - 8` and `N` levels per axis.
    pub truncation_change: f64,
    pub truncation_clear: bool,
    pub asymptotic_clear: bool,
}

/// Result of regressing `Z/K` against `-ln λ²` over the clear window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFit {
    pub points: Vec<WindowPoint>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub used: usize,
}

/// `Z(t)/K` on a grid of `t` with truncation and asymptotic flags, and the
/// least-squares line through the points where both flags are clear.
pub fn log_slope_study(params: &ModelParams, basis: &BasisSpec, ts: &[f64], truncation_tol: f64) -> Result<WindowFit> {
    if params.n_model != 2 {
        return Err(Error::ModelMismatch("the logarithmic window study is defined for two coordinates".into()));
    }
    if basis.cutoff_per_axis <= CONVERGENCE_STEP + 4 {
        return domain("basis too small for a truncation comparison");
    }
    let h = build_hamiltonian(params, basis)?;
    let ev = h.all_eigenvalues()?;
    drop(h);
    let smaller = BasisSpec { cutoff_per_axis: basis.cutoff_per_axis - CONVERGENCE_STEP, oscillator_scale: Some(basis.oscillator_scale.unwrap_or_else(|| default_oscillator_scale(params))), ..*basis };
    let ev_small = build_hamiltonian(params, &smaller)?.all_eigenvalues()?;
    let z = |e: &[f64], t: f64| e.iter().map(|x| (-t * x).exp()).sum::<f64>();
    let mut points = Vec::new();
    for &t in ts {
        let p = params.with_t(t);
        let zn = z(&ev, t);
        let zs = z(&ev_small, t);
        let change = (zn - zs).abs() / zn;
        points.push(WindowPoint {
            t,
            lambda2: p.lambda2(),
            z_over_k: zn / p.prefactor_k()?,
            truncation_change: change,
            truncation_clear: change < truncation_tol,
            asymptotic_clear: p.lambda2() <= heat_kernel::REGIME_THRESHOLD,
        });
    }
    let clear: Vec<&WindowPoint> = points.iter().filter(|p| p.truncation_clear && p.asymptotic_clear).collect();
    let (slope, intercept) = if clear.len() >= 2 {
        let xs: Vec<f64> = clear.iter().map(|p| -p.lambda2.ln()).collect();
        let ys: Vec<f64> = clear.iter().map(|p| p.z_over_k).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        if sxx > 0.0 {
            let s = sxy / sxx;
            (Some(s), Some(my - s * mx))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };
    let used = clear.len();
    Ok(WindowFit { points, slope, intercept, used })
}

/// Write a spectrum as versioned, self-describing text.
pub fn write_spectrum<W: Write>(spec: &SpectrumResult, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Format(e.to_string());
    let p = &spec.params;
    writeln!(out, "# ymqm-spectrum v1").map_err(io)?;
    writeln!(
        out,
        "# n_model={} g={:?} v={:?} hbar={:?} cutoff={} omega={:?} conv_tol={:?} converged={}",
        p.n_model,
        p.g,
        p.v,
        p.hbar,
        spec.basis.cutoff_per_axis,
        spec.basis.oscillator_scale.unwrap_or(f64::NAN),
        spec.conv_tol,
        spec.count_converged
    )
    .map_err(io)?;
    writeln!(out, "index,eigenvalue,converged").map_err(io)?;
    for (i, e) in spec.eigenvalues.iter().enumerate() {
        writeln!(out, "{i},{e:?},{}", u8::from(i < spec.count_converged)).map_err(io)?;
    }
    Ok(())
}

/// Read a spectrum written by [`write_spectrum`].
pub fn read_spectrum<R: BufRead>(input: R) -> Result<SpectrumResult> {
    let bad = |m: &str| Error::Format(m.to_string());
    let mut lines = input.lines();
    let mut next = || lines.next().transpose().map_err(|e| Error::Format(e.to_string()));
    if next()?.as_deref() != Some("# ymqm-spectrum v1") {
        return Err(bad("missing or unknown version header"));
    }
    let header = next()?.ok_or_else(|| bad("missing parameter header"))?;
    let mut kv = std::collections::HashMap::new();
    for tok in header.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            kv.insert(k.to_string(), v.to_string());
        }
    }
    let num = |k: &str| -> Result<f64> {
        kv.get(k).ok_or_else(|| bad(&format!("missing {k}")))?.parse::<f64>().map_err(|_| bad(&format!("bad {k}")))
    };
    let params = ModelParams::new(num("n_model")? as u8, num("g")?, num("v")?, num("hbar")?, 1.0)?;
    let basis = BasisSpec::new(num("cutoff")? as usize).with_scale(num("omega")?);
    let conv_tol = num("conv_tol")?;
    let count_converged = num("converged")? as usize;
    if next()?.as_deref() != Some("index,eigenvalue,converged") {
        return Err(bad("missing column header"));
    }
    let mut eigenvalues = Vec::new();
    while let Some(line) = next()? {
        let mut cols = line.split(',');
        let _idx = cols.next();
        let e = cols.next().ok_or_else(|| bad("short row"))?.parse::<f64>().map_err(|_| bad("bad eigenvalue"))?;
        eigenvalues.push(e);
    }
    Ok(SpectrumResult { eigenvalues, basis, params, conv_tol, count_converged })
}

/// Reference constant of the resummed series, `5 ln 2 - C` and `5 ln 2 - C + 427/180`.
pub fn intercept_candidates() -> (f64, f64) {
    let base = 5.0 * std::f64::consts::LN_2 - special::EULER_GAMMA;
    (base, base + 427.0 / 180.0)
}
