//! Search dynamics in the invariant subspace.
//!
//! In the eigenbasis of the walk, the search operator `U = W·O` is a diagonal
//! phase multiply after a rank-one reflection, so a step costs `O(N)`. The
//! model stores the eigenphases and the (real, non-negative) overlaps of the
//! target with each walk eigenvector:
//!
//! * `a₀`, the overlap with the `+1` eigenvector, which is also the start state;
//! * paired modes, two eigenvectors at `±θ` each carrying overlap `a`;
//! * single modes, one eigenvector at `θ` (used for eigenvalue `−1`).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{one_minus_power, powi, TorusGrid};
use crate::linalg::unitary_eigen;
use crate::sum::{compensated_sum, NeumaierSum};
use crate::walk::phase_from_cosine;

/// Default dimension cap for dense diagonalization of the reduced operator.
/// The Hermitian solve runs on a real embedding of twice this size, which at
/// 1024 takes a few seconds; `alpha_exact` itself never needs it.
pub const DEFAULT_REDUCED_BUDGET: usize = 1024;

/// Below this success probability the result is amplified.
pub const DEFAULT_AMPLIFICATION_THRESHOLD: f64 = 0.5;

const WEIGHT_SLACK: f64 = 1e-12;

/// A walk eigenphase with the target's overlap on each of its eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub phase: f64,
    pub cos: f64,
    pub one_minus_cos: f64,
    pub overlap: f64,
    pub paired: bool,
}

impl Mode {
    /// Eigenvalues `e^{±iθ}`, each eigenvector with overlap `overlap`.
    pub fn paired(phase: f64, overlap: f64) -> Self {
        Self::from_phase(phase, overlap, true)
    }

    /// A single eigenvalue `e^{iθ}`.
    pub fn single(phase: f64, overlap: f64) -> Self {
        Self::from_phase(phase, overlap, false)
    }

    fn from_phase(phase: f64, overlap: f64, paired: bool) -> Self {
        let (cos, one_minus_cos) = if phase == PI {
            (-1.0, 2.0)
        } else {
            let s = libm::sin(0.5 * phase);
            (libm::cos(phase), 2.0 * s * s)
        };
        Self {
            phase,
            cos,
            one_minus_cos,
            overlap,
            paired,
        }
    }

    /// Builds a mode from `cos θ` and an accurate `1 − cos θ`.
    pub fn from_cosine(cos: f64, one_minus_cos: f64, overlap: f64, paired: bool) -> Self {
        let (cos, one_minus_cos) = if cos <= -1.0 { (-1.0, 2.0) } else { (cos, one_minus_cos) };
        Self {
            phase: if cos == -1.0 {
                PI
            } else {
                phase_from_cosine(cos, one_minus_cos)
            },
            cos,
            one_minus_cos,
            overlap,
            paired,
        }
    }

    /// `sin θ` from the stored cosine, exact zero at `θ = π`.
    fn sin(&self) -> f64 {
        libm::sqrt((self.one_minus_cos * (2.0 - self.one_minus_cos)).max(0.0))
    }

    /// `cot²(θ/2) = (1 + cos θ)/(1 − cos θ)`.
    pub fn cot2_half(&self) -> f64 {
        (2.0 - self.one_minus_cos) / self.one_minus_cos
    }

    fn multiplicity(&self) -> usize {
        if self.paired {
            2
        } else {
            1
        }
    }
}

/// Eigenphases and target overlaps of a walk restricted to its invariant
/// search subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    t: u32,
    marked: usize,
    a0: f64,
    modes: Vec<Mode>,
}

impl SpectralModel {
    /// An abstract model. Phases must lie in `(0, π]` and the overlaps may not
    /// carry more than unit weight.
    pub fn new(t: u32, a0: f64, modes: Vec<Mode>) -> Result<Self> {
        if t == 0 {
            return Err(Error::ZeroSteps);
        }
        if !(0.0..=1.0).contains(&a0) {
            return Err(Error::OutOfRange {
                name: "a0",
                value: a0,
                range: "[0, 1]",
            });
        }
        for m in &modes {
            if !(m.phase > 0.0 && m.phase <= PI) {
                return Err(Error::OutOfRange {
                    name: "eigenphase",
                    value: m.phase,
                    range: "(0, pi]",
                });
            }
            if !(m.overlap >= 0.0) {
                return Err(Error::OutOfRange {
                    name: "overlap",
                    value: m.overlap,
                    range: "[0, inf)",
                });
            }
        }
        let model = Self {
            t,
            marked: 0,
            a0,
            modes,
        };
        let w = model.total_weight();
        if w > 1.0 + WEIGHT_SLACK {
            return Err(Error::OutOfRange {
                name: "total overlap weight",
                value: w,
                range: "[0, 1]",
            });
        }
        Ok(model)
    }

    /// The model of `U_t` on the `L × L` torus with target `marked`.
    ///
    /// Every nonzero grid mode contributes a pair at `±arccos(cosᵗ φ_k)` with
    /// overlap `1/√(2N)`; on even grids the mode with `cosᵗ φ_k = −1` is a
    /// single `−1` eigenvector with overlap `1/√N`.
    pub fn torus(grid: &TorusGrid, t: u32, marked: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::ZeroSteps);
        }
        if t.is_multiple_of(2) {
            return Err(Error::EvenSteps(t));
        }
        grid.check_vertex(marked)?;
        let n = grid.vertex_count() as f64;
        let pair_overlap = 1.0 / libm::sqrt(2.0 * n);
        let modes = grid
            .spectrum()
            .modes
            .into_iter()
            .filter(|m| m.k != (0, 0))
            .map(|m| {
                let c = powi(m.cos_phi, t);
                let om = one_minus_power(m.cos_phi, grid.one_minus_eigenphase(m.k), t);
                if c <= -1.0 + 1e-15 {
                    Mode::from_cosine(-1.0, 2.0, 1.0 / libm::sqrt(n), false)
                } else {
                    Mode::from_cosine(c, om, pair_overlap, true)
                }
            })
            .collect();
        Ok(Self {
            t,
            marked,
            a0: 1.0 / libm::sqrt(n),
            modes,
        })
    }

    pub fn steps(&self) -> u32 {
        self.t
    }

    pub fn marked(&self) -> usize {
        self.marked
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Number of eigenvectors represented, including the start state.
    pub fn dim(&self) -> usize {
        1 + self.modes.iter().map(Mode::multiplicity).sum::<usize>()
    }

    /// `a₀² + Σ |a_j|²` over all represented eigenvectors.
    pub fn total_weight(&self) -> f64 {
        let mut s = NeumaierSum::new();
        s.add(self.a0 * self.a0);
        for m in &self.modes {
            s.add(m.multiplicity() as f64 * m.overlap * m.overlap);
        }
        s.value()
    }

    /// Smallest eigenphase among modes the target actually overlaps.
    pub fn min_phase(&self) -> Option<f64> {
        self.modes
            .iter()
            .filter(|m| m.overlap > 0.0)
            .map(|m| m.phase)
            .min_by(f64::total_cmp)
    }

    /// Same phases with every overlap (including `a₀`) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.a0 *= factor;
        for m in &mut out.modes {
            m.overlap *= factor;
        }
        out
    }

    /// Appends a mode without validation of the total weight.
    pub(crate) fn push_mode(&mut self, mode: Mode) {
        self.modes.push(mode);
    }

    /// Flattened eigen-list: `(eigenvalue, overlap)` per represented
    /// eigenvector, start state first.
    fn eigen_list(&self) -> (Vec<Complex64>, Vec<f64>) {
        let mut rotors = Vec::with_capacity(self.dim());
        let mut overlaps = Vec::with_capacity(self.dim());
        rotors.push(Complex64::new(1.0, 0.0));
        overlaps.push(self.a0);
        for m in &self.modes {
            let s = m.sin();
            rotors.push(Complex64::new(m.cos, s));
            overlaps.push(m.overlap);
            if m.paired {
                rotors.push(Complex64::new(m.cos, -s));
                overlaps.push(m.overlap);
            }
        }
        (rotors, overlaps)
    }

    /// The reduced search operator as a dense matrix.
    pub fn reduced_matrix(&self) -> DMatrix<Complex64> {
        let (rotors, v) = self.eigen_list();
        let n = rotors.len();
        DMatrix::from_fn(n, n, |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            rotors[r] * (id - 2.0 * v[r] * v[c])
        })
    }
}

/// Coefficients of the search state over the model's eigen-list.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    pub coeffs: Vec<Complex64>,
}

impl ReducedState {
    pub fn norm(&self) -> f64 {
        libm::sqrt(compensated_sum(self.coeffs.iter().map(Complex64::norm_sqr)))
    }
}

/// Applies `U` repeatedly to the start state and records `|⟨Ψ_T|state⟩|²`.
struct Propagator {
    rotors: Vec<Complex64>,
    overlaps: Vec<f64>,
    state: Vec<Complex64>,
    amplitude: Complex64,
}

impl Propagator {
    fn new(model: &SpectralModel) -> Self {
        let (rotors, overlaps) = model.eigen_list();
        let mut state = vec![Complex64::new(0.0, 0.0); rotors.len()];
        state[0] = Complex64::new(1.0, 0.0);
        Self {
            amplitude: Complex64::new(model.a0, 0.0),
            rotors,
            overlaps,
            state,
        }
    }

    fn probability(&self) -> f64 {
        self.amplitude.norm_sqr()
    }

    fn step(&mut self) {
        let two_s = self.amplitude * 2.0;
        let mut next = Complex64::new(0.0, 0.0);
        for ((c, r), v) in self.state.iter_mut().zip(&self.rotors).zip(&self.overlaps) {
            *c = r * (*c - two_s * *v);
            next += *c * *v;
        }
        self.amplitude = next;
    }
}

/// Success probabilities `p(0), …, p(q)`.
pub fn iterate_search(model: &SpectralModel, q: usize) -> Vec<f64> {
    let mut p = Propagator::new(model);
    let mut out = Vec::with_capacity(q + 1);
    out.push(p.probability());
    for _ in 0..q {
        p.step();
        out.push(p.probability());
    }
    out
}

/// The state after `q` applications of `U`.
pub fn evolve(model: &SpectralModel, q: usize) -> ReducedState {
    let mut p = Propagator::new(model);
    for _ in 0..q {
        p.step();
    }
    ReducedState { coeffs: p.state }
}

fn check_nondegenerate(model: &SpectralModel) -> Result<f64> {
    if model.a0 <= 0.0 {
        return Err(Error::DegenerateModel);
    }
    model.min_phase().ok_or(Error::DegenerateModel)
}

/// Smallest positive eigenphase of `U`, the root in `(0, θ_min)` of
/// `Σ_j |v_j|² cot((λ − θ_j)/2) = 0`.
pub fn alpha_exact(model: &SpectralModel) -> Result<f64> {
    let theta_min = check_nondegenerate(model)?;
    let a0sq = model.a0 * model.a0;
    let secular = |lambda: f64| {
        let mut s = NeumaierSum::new();
        s.add(a0sq / libm::tan(0.5 * lambda));
        let sin_l = libm::sin(lambda);
        for m in model.modes.iter().filter(|m| m.overlap > 0.0) {
            let a2 = m.overlap * m.overlap;
            if m.paired {
                let d = libm::sin(0.5 * (lambda - m.phase)) * libm::sin(0.5 * (lambda + m.phase));
                s.add(a2 * sin_l / d);
            } else {
                s.add(a2 / libm::tan(0.5 * (lambda - m.phase)));
            }
        }
        s.value()
    };
    // The secular function decreases from +∞ to −∞ on (0, θ_min).
    let (mut lo, mut hi) = (0.0_f64, theta_min);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if secular(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `a₀ / √(Σ_paired a²/(1 − cos θ) + Σ_single a²/(2(1 − cos θ)))`. This is
/// the leading small-`α` solution of the secular equation; for the `−1` mode
/// the single term is `a²/4`.
pub fn alpha_estimate(model: &SpectralModel) -> Result<f64> {
    check_nondegenerate(model)?;
    let denom = compensated_sum(model.modes.iter().map(|m| {
        let w = if m.paired { 1.0 } else { 0.5 };
        w * m.overlap * m.overlap / m.one_minus_cos
    }));
    Ok(model.a0 / libm::sqrt(denom))
}

/// Smallest positive eigenphase from dense diagonalization of the reduced
/// operator. Used as an independent check of [`alpha_exact`].
pub fn alpha_dense(model: &SpectralModel, budget: usize) -> Result<f64> {
    check_nondegenerate(model)?;
    if model.dim() > budget {
        return Err(Error::BudgetExceeded {
            what: "dense reduced eigendecomposition",
            required: model.dim(),
            budget,
        });
    }
    let eig = unitary_eigen(&model.reduced_matrix());
    eig.phases
        .iter()
        .copied()
        .filter(|&p| p > 1e-12)
        .min_by(f64::total_cmp)
        .ok_or(Error::DegenerateModel)
}

/// `α ≈ π/(2 q*)` where `q*` is the first peak of the success trajectory,
/// located by a scan over one estimated period and refined with a parabola
/// through the three samples around the discrete maximum.
pub fn alpha_from_trajectory(model: &SpectralModel) -> Result<f64> {
    let estimate = alpha_estimate(model)?;
    let window = (libm::ceil(PI / estimate) as usize).max(4);
    let traj = iterate_search(model, window);
    let (q, _) =
        traj[1..window]
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1, *p))
            .fold(
                (1, f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
    // Successive probabilities zig-zag, so the vertex comes from a
    // least-squares parabola over a neighbourhood rather than three points.
    let half = (q / 8).max(1).min(q).min(window - q);
    let (mut s0, mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut y0, mut y1, mut y2) = (0.0, 0.0, 0.0);
    for (i, &y) in traj[q - half..=q + half].iter().enumerate() {
        let x = i as f64 - half as f64;
        s0 += 1.0;
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        y0 += y;
        y1 += x * y;
        y2 += x * x * y;
    }
    let m = Matrix3::new(s4, s3, s2, s3, s2, s1, s2, s1, s0);
    let offset = m
        .lu()
        .solve(&Vector3::new(y2, y1, y0))
        .filter(|c| c[0] < 0.0)
        .map_or(0.0, |c| (-0.5 * c[1] / c[0]).clamp(-(half as f64), half as f64));
    Ok(PI / (2.0 * (q as f64 + offset)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaPair {
    pub exact: f64,
    pub estimate: f64,
}

pub fn compute_alpha(model: &SpectralModel) -> Result<AlphaPair> {
    Ok(AlphaPair {
        exact: alpha_exact(model)?,
        estimate: alpha_estimate(model)?,
    })
}

/// A value whose derivation assumes `α < θ_min/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapChecked {
    pub value: f64,
    pub below_gap: bool,
}

fn below_gap(model: &SpectralModel, alpha: f64) -> bool {
    model.min_phase().is_some_and(|t| alpha < 0.5 * t)
}

/// `1 − α⁴ [Σ_paired (a²/a₀²)/(1 − cos θ)² + Σ_single (a²/a₀²)/((1 − cos θ)/2)²]`.
/// The single-mode term reduces to `α⁴ a²/a₀²` at `θ = π`.
pub fn overlap_ws(model: &SpectralModel, alpha: f64) -> Result<GapChecked> {
    check_nondegenerate(model)?;
    let a0sq = model.a0 * model.a0;
    let sum = compensated_sum(model.modes.iter().map(|m| {
        let scale = if m.paired {
            m.one_minus_cos
        } else {
            0.5 * m.one_minus_cos
        };
        m.overlap * m.overlap / a0sq / (scale * scale)
    }));
    Ok(GapChecked {
        value: 1.0 - powi(alpha, 4) * sum,
        below_gap: below_gap(model, alpha),
    })
}

/// `min(1/√(Σ a² cot²(θ/2)), 1)`, one term per mode.
/// `Σ a_k² cot²(θ_k/2)`; `overlap_wt` is `min(1, 1/√·)` of this.
pub fn wt_sum(model: &SpectralModel) -> f64 {
    compensated_sum(model.modes.iter().map(|m| m.overlap * m.overlap * m.cot2_half()))
}

pub fn overlap_wt(model: &SpectralModel) -> f64 {
    let sum = wt_sum(model);
    if sum <= 0.0 {
        1.0
    } else {
        (1.0 / libm::sqrt(sum)).min(1.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Rounding {
    #[default]
    Floor,
    Nearest,
}

impl Rounding {
    /// Iteration count for eigenphase `alpha`.
    pub fn iterations(self, alpha: f64) -> u64 {
        let x = FRAC_PI_2 / alpha;
        match self {
            Rounding::Floor => libm::floor(x) as u64,
            Rounding::Nearest => libm::round(x) as u64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub rounding: Rounding,
    /// `c` in the round count `⌈c/√p_s⌉`.
    pub amplification_c: f64,
    /// Amplify only when `p_s` is below this.
    pub amplification_threshold: f64,
    pub keep_trajectory: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            rounding: Rounding::Floor,
            amplification_c: 1.0,
            amplification_threshold: DEFAULT_AMPLIFICATION_THRESHOLD,
            keep_trajectory: false,
        }
    }
}

impl SearchOptions {
    pub fn rounds(&self, p_s: f64) -> u64 {
        if p_s >= self.amplification_threshold {
            0
        } else {
            libm::ceil(self.amplification_c / libm::sqrt(p_s)) as u64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub t: u32,
    pub alpha_exact: f64,
    pub alpha_estimate: f64,
    /// Iterations of the search operator per run.
    pub q: u64,
    /// Success probability after `q` iterations, from the exact dynamics.
    pub p_s: f64,
    /// `cos²α · ws² · wt²`.
    pub p_bound: f64,
    pub ws: f64,
    pub wt: f64,
    /// `α < θ_min/2`, the condition under which `ws` and `wt` apply.
    pub below_gap: bool,
    pub amplification_rounds: u64,
    pub q_o: u64,
    pub q_g: u64,
    pub trajectory: Option<Vec<f64>>,
}

/// Runs the search for `⌊π/2α⌋` iterations and accounts the query cost.
pub fn success_probability(model: &SpectralModel, opts: &SearchOptions) -> Result<SearchResult> {
    let AlphaPair { exact, estimate } = compute_alpha(model)?;
    let q = opts.rounding.iterations(exact);
    let traj = iterate_search(model, q as usize);
    let p_s = traj[q as usize].min(1.0);
    let ws = overlap_ws(model, exact)?;
    let wt = overlap_wt(model);
    let c = libm::cos(exact);
    let rounds = opts.rounds(p_s);
    let q_o = rounds.saturating_add(1).saturating_mul(q);
    Ok(SearchResult {
        t: model.t,
        alpha_exact: exact,
        alpha_estimate: estimate,
        q,
        p_s,
        p_bound: c * c * ws.value * ws.value * wt * wt,
        ws: ws.value,
        wt,
        below_gap: ws.below_gap,
        amplification_rounds: rounds,
        q_o,
        q_g: q_o.saturating_mul(model.t as u64),
        trajectory: opts.keep_trajectory.then_some(traj),
    })
}

/// Grid sums over the nonzero modes, with the shell bounds that bracket them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSums {
    pub side: usize,
    pub t: u32,
    /// `Σ 1/(1 − cosᵗ φ_k)`.
    pub s1: f64,
    /// `Σ 1/(1 − cosᵗ φ_k)²`.
    pub s2: f64,
    /// `Σ cot²(φ⁽ᵗ⁾_k/2)`.
    pub s3: f64,
    /// `(1/t) Σ 1/(1 − cos φ_k)`.
    pub lower: f64,
    /// `8 Σ_{l=1}^{⌊L/2⌋} l/(1 − e^{−4l²t/N})`.
    pub upper: f64,
    /// `(4N/t) Σ_{l≤l̃} 1/l + 8/(1 − e⁻¹) Σ_{l>l̃} l` with `l̃ = ⌊√(N/4t)⌋`.
    pub upper_split: f64,
    /// `(1/t²) Σ 1/(1 − cos φ_k)²`.
    pub s2_lower: f64,
    /// `8 Σ l/(1 − e^{−4l²t/N})²`.
    pub s2_upper: f64,
}

impl GridSums {
    pub fn vertex_count(&self) -> usize {
        self.side * self.side
    }

    /// Relative residual of `S3 = 1 − N + 2·S1`.
    pub fn identity_residual(&self) -> f64 {
        let rhs = 1.0 - self.vertex_count() as f64 + 2.0 * self.s1;
        (self.s3 - rhs).abs() / self.s3.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
    }

    pub fn s1_bracketed(&self) -> bool {
        self.lower <= self.s1 && self.s1 <= self.upper && self.upper <= self.upper_split
    }

    pub fn s2_bracketed(&self) -> bool {
        self.s2_lower <= self.s2 && self.s2 <= self.s2_upper
    }
}

pub fn grid_sums(grid: &TorusGrid, t: u32) -> Result<GridSums> {
    if t == 0 {
        return Err(Error::ZeroSteps);
    }
    let (mut s1, mut s2, mut s3, mut lo1, mut lo2) = (
        NeumaierSum::new(),
        NeumaierSum::new(),
        NeumaierSum::new(),
        NeumaierSum::new(),
        NeumaierSum::new(),
    );
    for m in grid.spectrum().modes.into_iter().filter(|m| m.k != (0, 0)) {
        let om1 = grid.one_minus_eigenphase(m.k);
        let om = one_minus_power(m.cos_phi, om1, t);
        if om <= 0.0 {
            return Err(Error::Infeasible(format!(
                "cos^t = 1 for mode {:?} (even side with even t); sums diverge",
                m.k
            )));
        }
        s1.add(1.0 / om);
        s2.add(1.0 / (om * om));
        s3.add((2.0 - om) / om);
        lo1.add(1.0 / om1);
        lo2.add(1.0 / (om1 * om1));
    }
    let n = grid.vertex_count() as f64;
    let tf = t as f64;
    let half = grid.side() / 2;
    let (mut up1, mut up2) = (NeumaierSum::new(), NeumaierSum::new());
    for l in 1..=half {
        let lf = l as f64;
        let denom = -libm::expm1(-4.0 * lf * lf * tf / n);
        up1.add(8.0 * lf / denom);
        up2.add(8.0 * lf / (denom * denom));
    }
    let l_tilde = (libm::floor(libm::sqrt(n / (4.0 * tf))) as usize).min(half);
    let harmonic = compensated_sum((1..=l_tilde).map(|l| 1.0 / l as f64));
    let tail = compensated_sum((l_tilde + 1..=half).map(|l| l as f64));
    let upper_split = 4.0 * n / tf * harmonic + 8.0 / -libm::expm1(-1.0) * tail;
    Ok(GridSums {
        side: grid.side(),
        t,
        s1: s1.value(),
        s2: s2.value(),
        s3: s3.value(),
        lower: lo1.value() / tf,
        upper: up1.value(),
        upper_split,
        s2_lower: lo2.value() / (tf * tf),
        s2_upper: up2.value(),
    })
}

/// Spectral gap of `Gᵗ` from the gap `g` of `G`: `1 − (1 − g)ᵗ`.
pub fn spectral_gap_power(g: f64, t: u32) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::OutOfRange {
            name: "spectral gap",
            value: g,
            range: "(0, 1]",
        });
    }
    Ok(1.0 - powi(1.0 - g, t))
}

/// Odd integer nearest to `x`, at least 1.
pub fn nearest_odd(x: f64) -> u32 {
    if !(x > 1.0) {
        return 1;
    }
    (libm::round((x - 1.0) / 2.0) as u32) * 2 + 1
}

/// `nearest_odd(c · ln N)`.
pub fn log_schedule(vertex_count: usize, c: f64) -> u32 {
    nearest_odd(c * libm::log(vertex_count as f64))
}
