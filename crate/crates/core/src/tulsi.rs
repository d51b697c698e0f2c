//! Ancilla-controlled search with a tunable angle `δ`.
//!
//! The walk is extended to `W̃ = diag(W, −I)` on `H ⊗ C²` and the oracle marks
//! `|ψ_m⟩|δ⟩` with `|δ⟩ = cos δ|0⟩ + sin δ|1⟩`. In the eigenbasis this scales
//! every walk overlap by `cos δ` and adds one `−1` eigenvector carrying
//! overlap `sin δ`, so the reduced engine of [`crate::search`] applies
//! unchanged.

use core::f64::consts::FRAC_PI_2;

use alloc::format;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::search::{
    alpha_estimate, alpha_exact, iterate_search, overlap_ws, overlap_wt, success_probability, GapChecked, Mode,
    SearchOptions, SearchResult, SpectralModel,
};
use crate::walk::{FullState, WalkOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct TulsiModel {
    base: SpectralModel,
    delta: f64,
    extended: SpectralModel,
}

impl TulsiModel {
    pub fn new(base: SpectralModel, delta: f64) -> Result<Self> {
        if !(0.0..FRAC_PI_2).contains(&delta) {
            return Err(Error::OutOfRange {
                name: "delta",
                value: delta,
                range: "[0, pi/2)",
            });
        }
        let (s, c) = (libm::sin(delta), libm::cos(delta));
        let mut extended = base.scaled(c);
        extended.push_mode(Mode::from_cosine(-1.0, 2.0, s, false));
        Ok(Self { base, delta, extended })
    }

    pub fn base(&self) -> &SpectralModel {
        &self.base
    }

    /// The model of `Ũ = W̃ Õ(δ)`.
    pub fn extended(&self) -> &SpectralModel {
        &self.extended
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tan2_delta(&self) -> f64 {
        let t = libm::tan(self.delta);
        t * t
    }

    /// Overlap of the target with the extra `−1` eigenvector.
    pub fn a_pi(&self) -> f64 {
        libm::sin(self.delta)
    }
}

pub fn build_tulsi(base: &SpectralModel, delta: f64) -> Result<TulsiModel> {
    TulsiModel::new(base.clone(), delta)
}

/// `a₀(δ)/√(Σ a_k²(δ)/(1 − cos θ_k) + a_π²(δ)/4)`.
pub fn compute_alpha_delta(tm: &TulsiModel) -> Result<f64> {
    alpha_estimate(&tm.extended)
}

/// Smallest positive eigenphase of `Ũ`.
pub fn alpha_delta_exact(tm: &TulsiModel) -> Result<f64> {
    alpha_exact(&tm.extended)
}

/// `(ws, wt)` for the extended model; `ws` picks up the `α⁴ a_π²/a₀²` loss
/// and `wt` is unchanged in form.
pub fn tulsi_overlaps(tm: &TulsiModel, alpha_delta: f64) -> Result<(GapChecked, f64)> {
    Ok((overlap_ws(&tm.extended, alpha_delta)?, overlap_wt(&tm.extended)))
}

/// `|⟨ψ_m, δ|Ũᵠ|Φ₀, 0⟩|²` for `q = 0..=steps`.
pub fn iterate_tulsi(tm: &TulsiModel, steps: usize) -> alloc::vec::Vec<f64> {
    iterate_search(&tm.extended, steps)
}

/// [`success_probability`] for `Ũ`: `Q_δ = ⌊π/2α_δ⌋` iterations.
pub fn tulsi_search(tm: &TulsiModel, opts: &SearchOptions) -> Result<SearchResult> {
    success_probability(&tm.extended, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeltaPolicy {
    /// `t = 1`, `tan²δ = ln N`.
    OriginalTulsi,
    /// `tan²δ = ln N / t`, requiring `t ≤ ln N`.
    Balanced,
    /// `tan²δ = clamp(ln N / t − 1, 0, 1)`: order one, vanishing once
    /// `t ≥ ln N`.
    OptimalQo,
}

impl DeltaPolicy {
    pub const ALL: [DeltaPolicy; 3] = [
        DeltaPolicy::OriginalTulsi,
        DeltaPolicy::Balanced,
        DeltaPolicy::OptimalQo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DeltaPolicy::OriginalTulsi => "original_tulsi",
            DeltaPolicy::Balanced => "balanced",
            DeltaPolicy::OptimalQo => "optimal_QO",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s))
    }
}

/// `δ = arctan √(tan²δ)` for the chosen policy, with `log_n` the (natural by
/// default) logarithm of the vertex count.
pub fn tune_delta(log_n: f64, t: u32, policy: DeltaPolicy) -> Result<f64> {
    if t == 0 {
        return Err(Error::ZeroSteps);
    }
    let tf = t as f64;
    let tan2 = match policy {
        DeltaPolicy::OriginalTulsi => {
            if t != 1 {
                return Err(Error::Infeasible(format!("original_tulsi needs t = 1, got t = {t}")));
            }
            log_n
        }
        DeltaPolicy::Balanced => {
            if tf > log_n {
                return Err(Error::Infeasible(format!(
                    "balanced needs t <= log N = {log_n:.3}, got t = {t}"
                )));
            }
            log_n / tf
        }
        DeltaPolicy::OptimalQo => (log_n / tf - 1.0).clamp(0.0, 1.0),
    };
    Ok(libm::atan(libm::sqrt(tan2)))
}

/// `X_δ = [[cos δ, sin δ], [−sin δ, cos δ]]`.
pub fn x_delta(delta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (libm::sin(delta), libm::cos(delta));
    [[c, s], [-s, c]]
}

/// A state of `H_walk ⊗ C²`, split by ancilla value.
#[derive(Clone, Debug, PartialEq)]
pub struct AncillaState {
    pub zero: FullState,
    pub one: FullState,
}

impl AncillaState {
    pub fn norm(&self) -> f64 {
        libm::hypot(self.zero.norm(), self.one.norm())
    }

    fn rotate(&mut self, m: [[f64; 2]; 2]) {
        let (z, o) = (self.zero.amplitudes_mut(), self.one.amplitudes_mut());
        for (a, b) in z.iter_mut().zip(o.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x * m[0][0] + y * m[0][1];
            *b = x * m[1][0] + y * m[1][1];
        }
    }
}

/// The circuit and block forms of one controlled-search iteration on the full
/// walk space.
#[derive(Clone, Debug)]
pub struct TulsiCircuit {
    op: WalkOperator,
    delta: f64,
    marked: usize,
}

impl TulsiCircuit {
    pub fn new(op: WalkOperator, delta: f64, marked: usize) -> Result<Self> {
        op.grid().check_vertex(marked)?;
        Ok(Self { op, delta, marked })
    }

    /// `|Φ₀⟩|0⟩`.
    pub fn start_state(&self) -> AncillaState {
        AncillaState {
            zero: self.op.uniform_state(),
            one: FullState::zeros(self.op.dim()),
        }
    }

    /// `|⟨ψ_m|⟨δ| state⟩|²`.
    pub fn success(&self, s: &AncillaState) -> f64 {
        let (sd, cd) = (libm::sin(self.delta), libm::cos(self.delta));
        let a0 = self.op.coin_overlaps(s.zero.amplitudes())[self.marked].conj();
        let a1 = self.op.coin_overlaps(s.one.amplitudes())[self.marked].conj();
        (a0 * cd + a1 * sd).norm_sqr()
    }

    /// `X_δ`, oracle controlled on `|0⟩`, `X_δ†`, walk controlled on `|0⟩`,
    /// then `Z`. The open-circle control is what makes this equal to
    /// `W̃ Õ(δ)`.
    pub fn circuit_step(&self, s: &mut AncillaState) -> Result<()> {
        let x = x_delta(self.delta);
        let xt = [[x[0][0], x[1][0]], [x[0][1], x[1][1]]];
        s.rotate(x);
        self.op.apply_oracle(self.marked, &mut s.zero)?;
        s.rotate(xt);
        self.op.apply_walk(&mut s.zero)?;
        s.one.scale(Complex64::new(-1.0, 0.0));
        Ok(())
    }

    /// `Õ(δ) = I − 2|ψ_m, δ⟩⟨ψ_m, δ|` followed by `W̃ = diag(W, −I)`.
    pub fn block_step(&self, s: &mut AncillaState) -> Result<()> {
        let (sd, cd) = (libm::sin(self.delta), libm::cos(self.delta));
        let d = self.op.coin_dim();
        let m = self.marked;
        let scale = 1.0 / libm::sqrt(d as f64);
        let block = m * d..(m + 1) * d;
        let proj = |v: &FullState| v.amplitudes()[block.clone()].iter().sum::<Complex64>() * scale;
        // ⟨ψ_m, δ|s⟩
        let amp = proj(&s.zero) * cd + proj(&s.one) * sd;
        let (kz, ko) = (amp * (2.0 * cd * scale), amp * (2.0 * sd * scale));
        for a in &mut s.zero.amplitudes_mut()[block.clone()] {
            *a -= kz;
        }
        for a in &mut s.one.amplitudes_mut()[block.clone()] {
            *a -= ko;
        }
        self.op.apply_walk(&mut s.zero)?;
        s.one.scale(Complex64::new(-1.0, 0.0));
        Ok(())
    }

    pub fn circuit_trajectory(&self, steps: usize) -> Result<alloc::vec::Vec<f64>> {
        self.trajectory(steps, Self::circuit_step)
    }

    pub fn block_trajectory(&self, steps: usize) -> Result<alloc::vec::Vec<f64>> {
        self.trajectory(steps, Self::block_step)
    }

    fn trajectory(
        &self,
        steps: usize,
        step: fn(&Self, &mut AncillaState) -> Result<()>,
    ) -> Result<alloc::vec::Vec<f64>> {
        let mut s = self.start_state();
        let mut out = alloc::vec::Vec::with_capacity(steps + 1);
        out.push(self.success(&s));
        for _ in 0..steps {
            step(self, &mut s)?;
            out.push(self.success(&s));
        }
        Ok(out)
    }
}

/// Components of `|δ⟩ = X_δ†|0⟩`, the first row of `X_δ`.
pub fn delta_state(delta: f64) -> (f64, f64) {
    let x = x_delta(delta);
    (x[0][0], x[0][1])
}
