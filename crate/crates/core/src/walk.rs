//! Exact simulation of the multi-step flip-flop walk on `C^N ⊗ C^{4ᵗ}`.
//!
//! Basis states `|u, g₁…g_t⟩` are indexed as `u·4ᵗ + code(g)`. The shift `S_t`
//! is the permutation induced by the powered rotation map, the coin `C_t`
//! reflects each vertex block about its uniform vector `|ψᵗ_u⟩`, and the
//! oracle `O_t = I − 2|ψᵗ_m⟩⟨ψᵗ_m|` flips the uniform component of the marked
//! block. Everything here is brute force and meant for small instances; the
//! search engine in [`crate::search`] is validated against it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{coin_dimension, one_minus_power, powi, TorusGrid};
use crate::linalg::{hermitian_eigen, multiset_distance, orthogonal_eigen};

/// Largest state dimension the operator will allocate tables for.
pub const MAX_STATE_DIM: usize = 1 << 24;

/// Default dimension cap for dense eigendecomposition.
pub const DEFAULT_DENSE_BUDGET: usize = 4096;

/// Singular values below this are treated as zero when counting how many real
/// eigenvectors touch the coin states.
const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    amps: Vec<Complex64>,
}

impl FullState {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amps: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut s = Self::zeros(dim);
        s.amps[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.iter().map(Complex64::norm_sqr).sum::<f64>())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FullState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &FullState) -> f64 {
        libm::sqrt(
            self.amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>(),
        )
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }
}

/// `S_t`, `C_t`, `W_t = S_t C_t` and `O_t` for one grid and step count.
#[derive(Clone, Debug)]
pub struct WalkOperator {
    grid: TorusGrid,
    t: u32,
    coin_dim: usize,
    shift: Vec<usize>,
}

impl WalkOperator {
    /// Any `t ≥ 1` is accepted; even `t` is only meaningful for spectrum
    /// experiments.
    pub fn new(grid: TorusGrid, t: u32) -> Result<Self> {
        if t == 0 {
            return Err(Error::ZeroSteps);
        }
        let n = grid.vertex_count();
        let coin_dim = coin_dimension(t)
            .filter(|c| c.checked_mul(n).is_some_and(|d| d <= MAX_STATE_DIM))
            .ok_or(Error::BudgetExceeded {
                what: "full walk state",
                required: coin_dimension(t).and_then(|c| c.checked_mul(n)).unwrap_or(usize::MAX),
                budget: MAX_STATE_DIM,
            })?;
        let mut shift = vec![0; n * coin_dim];
        for u in 0..n {
            for code in 0..coin_dim {
                let (v, back) = grid.rotate_path_code(u, code, t as usize);
                shift[u * coin_dim + code] = v * coin_dim + back;
            }
        }
        Ok(Self {
            grid,
            t,
            coin_dim,
            shift,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn steps(&self) -> u32 {
        self.t
    }

    pub fn coin_dim(&self) -> usize {
        self.coin_dim
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    #[inline]
    pub fn index(&self, vertex: usize, code: usize) -> usize {
        vertex * self.coin_dim + code
    }

    /// Image of basis state `i` under `S_t`.
    #[inline]
    pub fn shift_target(&self, i: usize) -> usize {
        self.shift[i]
    }

    fn check_dim(&self, state: &FullState) -> Result<()> {
        if state.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.dim(),
            })
        }
    }

    /// `|Φᵗ_0⟩ = N^{-1/2} Σ_u |ψᵗ_u⟩`: every amplitude equal.
    pub fn uniform_state(&self) -> FullState {
        let amp = 1.0 / libm::sqrt(self.dim() as f64);
        FullState::from_amplitudes(vec![Complex64::new(amp, 0.0); self.dim()])
    }

    /// `|ψᵗ_u⟩ = d^{-t/2} Σ_g |u, g⟩`.
    pub fn coin_uniform_state(&self, vertex: usize) -> Result<FullState> {
        self.grid.check_vertex(vertex)?;
        let mut s = FullState::zeros(self.dim());
        let amp = Complex64::new(1.0 / libm::sqrt(self.coin_dim as f64), 0.0);
        let start = vertex * self.coin_dim;
        for a in &mut s.amps[start..start + self.coin_dim] {
            *a = amp;
        }
        Ok(s)
    }

    pub fn apply_shift(&self, state: &mut FullState) -> Result<()> {
        self.check_dim(state)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, a) in state.amps.iter().enumerate() {
            out[self.shift[i]] = *a;
        }
        state.amps = out;
        Ok(())
    }

    pub fn apply_coin(&self, state: &mut FullState) -> Result<()> {
        self.check_dim(state)?;
        let inv = 1.0 / self.coin_dim as f64;
        for block in state.amps.chunks_exact_mut(self.coin_dim) {
            let twice_mean = block.iter().sum::<Complex64>() * (2.0 * inv);
            for a in block.iter_mut() {
                *a = twice_mean - *a;
            }
        }
        Ok(())
    }

    pub fn apply_walk(&self, state: &mut FullState) -> Result<()> {
        self.apply_coin(state)?;
        self.apply_shift(state)
    }

    pub fn apply_oracle(&self, marked: usize, state: &mut FullState) -> Result<()> {
        self.grid.check_vertex(marked)?;
        self.check_dim(state)?;
        let start = marked * self.coin_dim;
        let block = &mut state.amps[start..start + self.coin_dim];
        let twice_mean = block.iter().sum::<Complex64>() * (2.0 / self.coin_dim as f64);
        for a in block.iter_mut() {
            *a -= twice_mean;
        }
        Ok(())
    }

    /// Translates every vertex by `(dx, dy)` leaving the labels alone. Commutes
    /// with `S_t`, `C_t` and hence `W_t`.
    pub fn translate(&self, state: &FullState, dx: usize, dy: usize) -> Result<FullState> {
        self.check_dim(state)?;
        let mut out = FullState::zeros(self.dim());
        for u in 0..self.grid.vertex_count() {
            let (x, y) = self.grid.vertex_coords(u);
            let v = self.grid.vertex_index(x + dx, y + dy);
            out.amps[v * self.coin_dim..(v + 1) * self.coin_dim]
                .copy_from_slice(&state.amps[u * self.coin_dim..(u + 1) * self.coin_dim]);
        }
        Ok(out)
    }

    /// `a_u = ⟨Φ|ψᵗ_u⟩` for every vertex.
    pub fn coin_overlaps(&self, state: &[Complex64]) -> Vec<Complex64> {
        let scale = 1.0 / libm::sqrt(self.coin_dim as f64);
        state
            .chunks_exact(self.coin_dim)
            .map(|block| block.iter().sum::<Complex64>().conj() * scale)
            .collect()
    }

    /// `Σ_u |⟨Φ|ψᵗ_u⟩|²`.
    pub fn projection_sum(&self, state: &[Complex64]) -> f64 {
        self.coin_overlaps(state).iter().map(Complex64::norm_sqr).sum()
    }

    pub fn shift_matrix(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.dim(), self.dim());
        for (i, &j) in self.shift.iter().enumerate() {
            s[(j, i)] = 1.0;
        }
        s
    }

    pub fn coin_matrix(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let c = self.coin_dim;
        let w = 2.0 / c as f64;
        DMatrix::from_fn(dim, dim, |r, col| {
            let same_block = r / c == col / c;
            let diag = if r == col { -1.0 } else { 0.0 };
            if same_block {
                w + diag
            } else {
                0.0
            }
        })
    }

    /// Dense `W_t = S_t C_t`: row `shift(i)` of `W_t` is row `i` of `C_t`.
    pub fn walk_matrix(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let c = self.coin_dim;
        let w = 2.0 / c as f64;
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let r = self.shift[i];
            let block = i / c;
            for col in block * c..(block + 1) * c {
                m[(r, col)] = w;
            }
            m[(r, i)] -= 1.0;
        }
        m
    }

    /// Success probability `|⟨ψᵗ_m|U_tᵠ|Φᵗ_0⟩|²` for `q = 0..=steps`, simulated
    /// on the full space.
    pub fn search_trajectory(&self, marked: usize, steps: usize) -> Result<Vec<f64>> {
        self.grid.check_vertex(marked)?;
        let mut state = self.uniform_state();
        let mut out = Vec::with_capacity(steps + 1);
        let target_prob = |s: &FullState| self.coin_overlaps(s.amplitudes())[marked].norm_sqr();
        out.push(target_prob(&state));
        for _ in 0..steps {
            self.apply_oracle(marked, &mut state)?;
            self.apply_walk(&mut state)?;
            out.push(target_prob(&state));
        }
        Ok(out)
    }
}

/// Predicted non-real eigenphases `±arccos(cosᵗ φ_k)` of `W_t`, one pair per
/// grid mode with `cosᵗ φ_k ∈ (−1, 1)`.
pub fn predicted_nonreal_phases(grid: &TorusGrid, t: u32) -> Vec<f64> {
    let mut out = Vec::new();
    for m in grid.spectrum().modes {
        let c = powi(m.cos_phi, t);
        let om = one_minus_power(m.cos_phi, grid.one_minus_eigenphase(m.k), t);
        if om <= 1e-14 || c <= -1.0 + 1e-14 {
            continue;
        }
        let phase = phase_from_cosine(c, om);
        out.push(phase);
        out.push(-phase);
    }
    out
}

/// `arccos(c)` given `c` and an accurate `1 − c`.
pub fn phase_from_cosine(c: f64, one_minus_c: f64) -> f64 {
    if c > 0.0 {
        2.0 * libm::asin(libm::sqrt(0.5 * one_minus_c))
    } else {
        libm::acos(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseClass {
    PlusOne,
    MinusOne,
    NonReal,
}

/// Full eigendecomposition of `W_t`, each eigenvector tagged with its
/// projection onto `span{|ψᵗ_u⟩}`.
#[derive(Clone, Debug)]
pub struct WalkSpectrum {
    pub phases: Vec<f64>,
    pub classes: Vec<PhaseClass>,
    pub projection_sums: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl WalkSpectrum {
    pub fn compute(op: &WalkOperator, budget: usize) -> Result<Self> {
        if op.dim() > budget {
            return Err(Error::BudgetExceeded {
                what: "dense walk eigendecomposition",
                required: op.dim(),
                budget,
            });
        }
        let eig = orthogonal_eigen(&op.walk_matrix());
        let classes = eig
            .phases
            .iter()
            .map(|&p| {
                if p == 0.0 {
                    PhaseClass::PlusOne
                } else if p == PI {
                    PhaseClass::MinusOne
                } else {
                    PhaseClass::NonReal
                }
            })
            .collect();
        let projection_sums = (0..eig.vectors.ncols())
            .map(|j| op.projection_sum(eig.vectors.column(j).as_slice()))
            .collect();
        Ok(Self {
            phases: eig.phases,
            classes,
            projection_sums,
            vectors: eig.vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn indices(&self, class: PhaseClass) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.classes[j] == class).collect()
    }

    pub fn nonreal_phases(&self) -> Vec<f64> {
        self.indices(PhaseClass::NonReal)
            .into_iter()
            .map(|j| self.phases[j])
            .collect()
    }

    /// Eigenvectors within the `class` eigenspace that overlap the coin states,
    /// as `(projection, vector)` pairs. Eigenspaces at `±1` are highly
    /// degenerate, so this diagonalizes the overlap map instead of trusting the
    /// arbitrary basis returned by the solver.
    pub fn touching_vectors(&self, op: &WalkOperator, class: PhaseClass) -> Vec<(f64, DVector<Complex64>)> {
        let idx = self.indices(class);
        let n = op.grid().vertex_count();
        if idx.is_empty() {
            return Vec::new();
        }
        // overlaps[u, j] = ⟨ψ_u|v_j⟩
        let mut overlaps = DMatrix::<Complex64>::zeros(n, idx.len());
        for (c, &j) in idx.iter().enumerate() {
            let a = op.coin_overlaps(self.vectors.column(j).as_slice());
            for u in 0..n {
                overlaps[(u, c)] = a[u].conj();
            }
        }
        let gram = &overlaps * overlaps.adjoint();
        let (values, vectors) = hermitian_eigen(&gram);
        let mut out = Vec::new();
        for (s, &sigma2) in values.iter().enumerate().rev() {
            if sigma2 <= RANK_TOL {
                continue;
            }
            let w = overlaps.adjoint() * vectors.column(s) / Complex64::new(libm::sqrt(sigma2), 0.0);
            let mut v = DVector::<Complex64>::zeros(op.dim());
            for (c, &j) in idx.iter().enumerate() {
                v += self.vectors.column(j) * w[c];
            }
            out.push((sigma2, v));
        }
        out
    }

    /// Dimension of the invariant search subspace: all non-real eigenvectors
    /// plus the real eigenvectors that overlap the coin states.
    pub fn invariant_subspace_dim(&self, op: &WalkOperator) -> usize {
        self.indices(PhaseClass::NonReal).len()
            + self.touching_vectors(op, PhaseClass::PlusOne).len()
            + self.touching_vectors(op, PhaseClass::MinusOne).len()
    }

    /// Compares non-real eigenphases with `±arccos(cosᵗ φ_k)`.
    pub fn phase_check(&self, op: &WalkOperator) -> PhaseCheck {
        let predicted = predicted_nonreal_phases(op.grid(), op.steps());
        let measured = self.nonreal_phases();
        PhaseCheck {
            measured: measured.len(),
            predicted: predicted.len(),
            max_error: multiset_distance(&measured, &predicted),
        }
    }

    /// Largest deviation of a non-real eigenvector's projection sum from ½.
    pub fn max_projection_deviation(&self) -> f64 {
        self.indices(PhaseClass::NonReal)
            .into_iter()
            .map(|j| (self.projection_sums[j] - 0.5).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseCheck {
    pub measured: usize,
    pub predicted: usize,
    pub max_error: f64,
}

impl PhaseCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.measured == self.predicted && self.max_error <= tol
    }
}

/// A non-real eigenvector of `W_t` with definite lattice momentum.
#[derive(Clone, Debug)]
pub struct MomentumEigenvector {
    pub k: (usize, usize),
    pub phase: f64,
    pub vector: DVector<Complex64>,
}

/// Re-diagonalizes each degenerate non-real eigenspace of `W_t` against the
/// lattice translations, giving one eigenvector per `(k, ±)`.
///
/// Within a momentum eigenvector the coin overlaps are plane waves, so
/// `|⟨Φ_k|ψᵗ_m⟩|² = 1/(2N)` for every vertex `m`; multiplying by a global phase
/// makes the overlap with one chosen target real.
pub fn momentum_resolved(op: &WalkOperator, spectrum: &WalkSpectrum) -> Result<Vec<MomentumEigenvector>> {
    let idx = spectrum.indices(PhaseClass::NonReal);
    let mut sorted = idx.clone();
    sorted.sort_by(|&a, &b| spectrum.phases[a].total_cmp(&spectrum.phases[b]));
    let l = op.grid().side();
    let mut out = Vec::with_capacity(idx.len());

    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && spectrum.phases[sorted[end]] - spectrum.phases[sorted[end - 1]] < 1e-7 {
            end += 1;
        }
        let group = &sorted[start..end];
        let basis = DMatrix::from_columns(
            &group
                .iter()
                .map(|&j| spectrum.vectors.column(j).into_owned())
                .collect::<Vec<_>>(),
        );
        let translated = |dx: usize, dy: usize| -> Result<DMatrix<Complex64>> {
            let cols = (0..basis.ncols())
                .map(|c| {
                    let s = FullState::from_amplitudes(basis.column(c).iter().copied().collect());
                    op.translate(&s, dx, dy).map(|t| DVector::from_vec(t.into_amplitudes()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DMatrix::from_columns(&cols))
        };
        let gx = basis.adjoint() * translated(1, 0)?;
        let gy = basis.adjoint() * translated(0, 1)?;
        let half = Complex64::new(0.5, 0.0);
        let minus_half_i = Complex64::new(0.0, -0.5);
        // Generic Hermitian combination of the commuting translations.
        let h = (&gx + gx.adjoint()) * half
            + (&gx - gx.adjoint()) * minus_half_i * Complex64::new(0.31, 0.0)
            + (&gy + gy.adjoint()) * half * Complex64::new(0.71, 0.0)
            + (&gy - gy.adjoint()) * minus_half_i * Complex64::new(0.57, 0.0);
        let (_, vectors) = hermitian_eigen(&h);
        for c in 0..group.len() {
            let z = vectors.column(c);
            let tx = (z.adjoint() * &gx * z)[(0, 0)];
            let ty = (z.adjoint() * &gy * z)[(0, 0)];
            let to_k = |e: Complex64| {
                let k = libm::round(-e.arg() * l as f64 / (2.0 * PI)) as i64;
                k.rem_euclid(l as i64) as usize
            };
            let phase = group
                .iter()
                .zip(z.iter())
                .map(|(&j, zj)| zj.norm_sqr() * spectrum.phases[j])
                .sum::<f64>();
            out.push(MomentumEigenvector {
                k: (to_k(tx), to_k(ty)),
                phase,
                vector: &basis * z,
            });
        }
        start = end;
    }
    Ok(out)
}

/// Components of an eigenvector along one path-basis pair `|p±⟩`, measured
/// directly and predicted from the coin overlaps and eigenphase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathComponent {
    pub plus_measured: Complex64,
    pub plus_predicted: Complex64,
    /// `None` when the path maps to itself (possible only for even `t`) and
    /// `|p⁻⟩` vanishes.
    pub minus: Option<(Complex64, Complex64)>,
}

impl PathComponent {
    pub fn max_error(&self) -> f64 {
        let plus = (self.plus_measured - self.plus_predicted).norm();
        let minus = self.minus.map_or(0.0, |(m, p)| (m - p).norm());
        plus.max(minus)
    }
}

/// `⟨Φ|p±⟩` for the path starting at basis state `start`, where
/// `|p±⟩ = (|u,g⟩ ± |v,h⟩)/√2` and `S_t|u,g⟩ = |v,h⟩`.
pub fn path_component(op: &WalkOperator, eigenvector: &[Complex64], phase: f64, start: usize) -> PathComponent {
    let overlaps = op.coin_overlaps(eigenvector);
    path_component_with_overlaps(op, eigenvector, &overlaps, phase, start)
}

pub fn path_component_with_overlaps(
    op: &WalkOperator,
    eigenvector: &[Complex64],
    overlaps: &[Complex64],
    phase: f64,
    start: usize,
) -> PathComponent {
    let end = op.shift_target(start);
    let (u, v) = (start / op.coin_dim(), end / op.coin_dim());
    let r2 = core::f64::consts::FRAC_1_SQRT_2;
    let pref = libm::sqrt(2.0 / op.coin_dim() as f64);
    let e = Complex64::from_polar(1.0, -phase);
    let one = Complex64::new(1.0, 0.0);
    let (a_u, a_v) = (overlaps[u], overlaps[v]);
    let plus_measured = (eigenvector[start].conj() + eigenvector[end].conj()) * r2;
    let plus_predicted = (a_u + a_v) * pref / (one + e);
    let minus = (start != end).then(|| {
        (
            (eigenvector[start].conj() - eigenvector[end].conj()) * r2,
            (a_u - a_v) * pref / (one - e),
        )
    });
    PathComponent {
        plus_measured,
        plus_predicted,
        minus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Direction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op(l: usize, t: u32) -> WalkOperator {
        WalkOperator::new(TorusGrid::new(l).unwrap(), t).unwrap()
    }

    fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> FullState {
        let mut s = FullState::from_amplitudes(
            (0..dim)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect(),
        );
        let n = s.norm();
        s.scale(Complex64::new(1.0 / n, 0.0));
        s
    }

    #[test]
    fn single_step_shift_of_basis_state() {
        let w = op(4, 1);
        let g = w.grid();
        let from = w.index(g.vertex_index(1, 2), Direction::Right.index());
        let to = w.index(g.vertex_index(2, 2), Direction::Left.index());
        let mut s = FullState::basis(w.dim(), from);
        w.apply_shift(&mut s).unwrap();
        assert_eq!(s, FullState::basis(w.dim(), to));
    }

    #[test]
    fn reflections_square_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (l, t) in [(3, 1), (4, 2), (5, 3)] {
            let w = op(l, t);
            let x = random_state(w.dim(), &mut rng);
            for apply in [
                WalkOperator::apply_shift as fn(&WalkOperator, &mut FullState) -> Result<()>,
                WalkOperator::apply_coin,
                |w: &WalkOperator, s: &mut FullState| w.apply_oracle(1, s),
            ] {
                let mut y = x.clone();
                apply(&w, &mut y).unwrap();
                apply(&w, &mut y).unwrap();
                assert!(y.distance(&x) < 1e-14);
            }
        }
    }

    #[test]
    fn shift_matrix_is_symmetric_fixed_point_free_for_odd_t() {
        let w = op(3, 3);
        let s = w.shift_matrix();
        assert_eq!(s, s.transpose());
        assert!((0..w.dim()).all(|i| s[(i, i)] == 0.0));
        for r in 0..w.dim() {
            assert_eq!(s.row(r).sum(), 1.0);
        }
    }

    #[test]
    fn even_t_has_fixed_points() {
        // Doubling back (→ then ←) returns to the same port.
        let w = op(3, 2);
        assert!((0..w.dim()).any(|i| w.shift_target(i) == i));
    }

    #[test]
    fn coin_fixes_uniform_and_negates_complement() {
        let w = op(3, 3);
        let psi = w.coin_uniform_state(4).unwrap();
        let mut s = psi.clone();
        w.apply_coin(&mut s).unwrap();
        assert!(s.distance(&psi) < 1e-14);

        // A zero-mean vector inside one block is orthogonal to every |ψ_u⟩.
        let mut orth = FullState::zeros(w.dim());
        orth.amplitudes_mut()[5 * w.coin_dim()] = Complex64::new(1.0, 0.0);
        orth.amplitudes_mut()[5 * w.coin_dim() + 1] = Complex64::new(-1.0, 0.0);
        let mut s = orth.clone();
        w.apply_coin(&mut s).unwrap();
        let mut neg = orth.clone();
        neg.scale(Complex64::new(-1.0, 0.0));
        assert!(s.distance(&neg) < 1e-14);
    }

    #[test]
    fn oracle_flips_only_the_marked_coin_state() {
        let w = op(5, 1);
        let mut s = w.coin_uniform_state(7).unwrap();
        let mut expected = s.clone();
        expected.scale(Complex64::new(-1.0, 0.0));
        w.apply_oracle(7, &mut s).unwrap();
        assert!(s.distance(&expected) < 1e-15);

        let mut s = w.coin_uniform_state(3).unwrap();
        let before = s.clone();
        w.apply_oracle(7, &mut s).unwrap();
        assert_eq!(s, before);

        assert!(matches!(
            w.apply_oracle(25, &mut s),
            Err(Error::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let w = op(3, 1);
        let mut s = FullState::zeros(5);
        assert_eq!(
            w.apply_walk(&mut s),
            Err(Error::DimensionMismatch {
                expected: 36,
                actual: 5
            })
        );
    }

    #[test]
    fn unitarity_over_many_applications() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = op(5, 3);
        let mut s = random_state(w.dim(), &mut rng);
        for i in 0..1000 {
            if i % 2 == 0 {
                w.apply_walk(&mut s).unwrap();
            } else {
                w.apply_oracle(i % 25, &mut s).unwrap();
            }
        }
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_matrices_agree_with_sparse_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = op(3, 2);
        let x = random_state(w.dim(), &mut rng);
        let xv = DVector::from_column_slice(x.amplitudes());
        let dense = w.walk_matrix().map(|v| Complex64::new(v, 0.0));
        let sc = (w.shift_matrix() * w.coin_matrix()).map(|v| Complex64::new(v, 0.0));
        let mut y = x.clone();
        w.apply_walk(&mut y).unwrap();
        assert!((dense * &xv - DVector::from_column_slice(y.amplitudes())).norm() < 1e-13);
        assert!((sc * &xv - DVector::from_column_slice(y.amplitudes())).norm() < 1e-13);
    }

    #[test]
    fn translations_commute_with_the_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = op(5, 3);
        let x = random_state(w.dim(), &mut rng);
        let mut a = w.translate(&x, 2, 1).unwrap();
        w.apply_walk(&mut a).unwrap();
        let mut b = x.clone();
        w.apply_walk(&mut b).unwrap();
        let b = w.translate(&b, 2, 1).unwrap();
        assert!(a.distance(&b) < 1e-13);
    }

    #[test]
    fn single_step_spectrum_matches_grid_modes() {
        let w = op(5, 1);
        let spec = WalkSpectrum::compute(&w, DEFAULT_DENSE_BUDGET).unwrap();
        let check = spec.phase_check(&w);
        assert_eq!(check.predicted, 48);
        assert!(check.passes(1e-9), "{check:?}");
        assert!(spec.max_projection_deviation() < 1e-9);
        assert_eq!(spec.invariant_subspace_dim(&w), 49);
    }

    #[test]
    fn plus_one_eigenvector_touching_coins_is_the_uniform_state() {
        let w = op(5, 1);
        let spec = WalkSpectrum::compute(&w, DEFAULT_DENSE_BUDGET).unwrap();
        let touching = spec.touching_vectors(&w, PhaseClass::PlusOne);
        assert_eq!(touching.len(), 1);
        assert!((touching[0].0 - 1.0).abs() < 1e-9);
        let uniform = DVector::from_column_slice(w.uniform_state().amplitudes());
        assert!((uniform.dotc(&touching[0].1).norm() - 1.0).abs() < 1e-9);
        assert!(spec.touching_vectors(&w, PhaseClass::MinusOne).is_empty());
        for j in spec.indices(PhaseClass::MinusOne) {
            assert!(spec.projection_sums[j] < 1e-9);
        }
    }

    #[test]
    fn bipartite_grid_has_a_touching_minus_one_vector() {
        let w = op(4, 1);
        let spec = WalkSpectrum::compute(&w, DEFAULT_DENSE_BUDGET).unwrap();
        assert_eq!(spec.touching_vectors(&w, PhaseClass::MinusOne).len(), 1);
        // The −1 eigenvector takes the place of a conjugate pair.
        assert_eq!(spec.invariant_subspace_dim(&w), 2 * 16 - 2);
        assert!(spec.phase_check(&w).passes(1e-9));
    }

    #[test]
    fn budget_guard() {
        let w = op(3, 5);
        assert!(matches!(
            WalkSpectrum::compute(&w, DEFAULT_DENSE_BUDGET),
            Err(Error::BudgetExceeded { required: 9216, .. })
        ));
    }

    #[test]
    fn path_components_match_formula() {
        let w = op(3, 3);
        let spec = WalkSpectrum::compute(&w, DEFAULT_DENSE_BUDGET).unwrap();
        let mut worst: f64 = 0.0;
        for j in spec.indices(PhaseClass::NonReal) {
            let v = spec.vectors.column(j);
            let a = w.coin_overlaps(v.as_slice());
            for start in 0..w.dim() {
                let pc = path_component_with_overlaps(&w, v.as_slice(), &a, spec.phases[j], start);
                worst = worst.max(pc.max_error());
            }
        }
        assert!(worst <= 1e-9, "worst path component error {worst}");
    }

    #[test]
    fn path_component_sign_flips_with_orientation() {
        let w = op(3, 3);
        let spec = WalkSpectrum::compute(&w, DEFAULT_DENSE_BUDGET).unwrap();
        let j = spec.indices(PhaseClass::NonReal)[0];
        let v = spec.vectors.column(j);
        let start = 17;
        let fwd = path_component(&w, v.as_slice(), spec.phases[j], start);
        let rev = path_component(&w, v.as_slice(), spec.phases[j], w.shift_target(start));
        let (fm, fp) = fwd.minus.unwrap();
        let (rm, rp) = rev.minus.unwrap();
        assert!((fm + rm).norm() < 1e-12);
        assert!((fp + rp).norm() < 1e-9);
        assert!((fwd.plus_measured - rev.plus_measured).norm() < 1e-12);
    }

    #[test]
    fn equal_overlaps_kill_the_minus_component() {
        let w = op(5, 1);
        let spec = WalkSpectrum::compute(&w, DEFAULT_DENSE_BUDGET).unwrap();
        let j = spec.indices(PhaseClass::NonReal)[3];
        let v = spec.vectors.column(j);
        let a = w.coin_overlaps(v.as_slice());
        for start in 0..w.dim() {
            let end = w.shift_target(start);
            let (u, x) = (start / w.coin_dim(), end / w.coin_dim());
            if (a[u] - a[x]).norm() < 1e-13 {
                let pc = path_component(&w, v.as_slice(), spec.phases[j], start);
                assert!(pc.minus.unwrap().0.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn momentum_resolved_overlaps_are_flat() {
        let w = op(5, 1);
        let n = 25.0;
        let spec = WalkSpectrum::compute(&w, DEFAULT_DENSE_BUDGET).unwrap();
        let resolved = momentum_resolved(&w, &spec).unwrap();
        assert_eq!(resolved.len(), 48);
        let mut seen = std::collections::BTreeSet::new();
        for mv in &resolved {
            let a = w.coin_overlaps(mv.vector.as_slice());
            for am in &a {
                assert!((am.norm_sqr() - 1.0 / (2.0 * n)).abs() < 1e-9);
            }
            seen.insert((mv.k, mv.phase > 0.0));
        }
        assert_eq!(seen.len(), 48);
        assert!(!seen.contains(&((0, 0), true)));
    }

    #[test]
    fn full_trajectory_starts_at_one_over_n() {
        let w = op(5, 3);
        let traj = w.search_trajectory(12, 3).unwrap();
        assert!((traj[0] - 1.0 / 25.0).abs() < 1e-15);
        assert_eq!(traj.len(), 4);
    }
}
