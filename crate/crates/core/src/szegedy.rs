//! Szegedy quantization of symmetric Markov chains and its `k`-step variant.
//!
//! The walk lives on `k + 1` registers of dimension `N`, serialized with the
//! leftmost register most significant. `|Aᵏ_i⟩` starts at `i` and spreads over
//! all length-`k` paths with amplitude `√(M_{ij₁}⋯M_{j_{k−1}j_k})`; `|Bᵏ_i⟩` is
//! the same state with the register order reversed. Then `A_kᵀB_k = Mᵏ` and
//! `W_k = (2B_kB_kᵀ − I)(2A_kA_kᵀ − I)` acts on its nontrivial subspace like the
//! one-step walk of `Mᵏ`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{orthogonal_eigen, symmetric_eigen};

/// Default cap on the `N^{k+1}` register dimension.
pub const DEFAULT_REGISTER_BUDGET: usize = 4096;

/// Singular values and projector eigenvalues below this count as zero.
pub const RANK_TOL: f64 = 1e-9;

/// Eigenvalue cut for the null spaces of `2I − P_A − P_B` and `I ∓ (P_A − P_B)`.
pub const PROJECTOR_TOL: f64 = 1e-12;

const CHAIN_TOL: f64 = 1e-12;

/// A symmetric, row-stochastic transition matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    m: DMatrix<f64>,
}

impl MarkovChain {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(Error::InvalidChain(format!(
                "transition matrix must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let x = m[(i, j)];
                if !(x >= 0.0) {
                    return Err(Error::InvalidChain(format!("entry ({i}, {j}) = {x} is negative")));
                }
                if (x - m[(j, i)]).abs() > CHAIN_TOL {
                    return Err(Error::InvalidChain(format!(
                        "not symmetric at ({i}, {j}): {x} vs {}",
                        m[(j, i)]
                    )));
                }
            }
            let row = m.row(i).sum();
            if (row - 1.0).abs() > CHAIN_TOL {
                return Err(Error::InvalidChain(format!("row {i} sums to {row}")));
            }
        }
        Ok(Self { m })
    }

    /// Random walk on the cycle `C_n`. For `n = 2` both neighbours coincide.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidChain(format!("cycle needs n >= 2, got {n}")));
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, (i + 1) % n)] += 0.5;
            m[(i, (i + n - 1) % n)] += 0.5;
        }
        Self::new(m)
    }

    /// Random walk on the complete graph `K_n` without self-loops.
    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidChain(format!("complete graph needs n >= 2, got {n}")));
        }
        let w = 1.0 / (n - 1) as f64;
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { w }))
    }

    /// `(1 − p)·M + p·I`.
    pub fn lazy(&self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                name: "laziness",
                value: p,
                range: "[0, 1]",
            });
        }
        let n = self.size();
        Self::new(&self.m * (1.0 - p) + DMatrix::identity(n, n) * p)
    }

    /// `Σ_r w_r (P_r + P_rᵀ)/2` for permutations `P_r` (`P_r[i] = π_r(i)`) and
    /// weights summing to one. Every symmetric doubly stochastic matrix of this
    /// form is a valid chain.
    pub fn from_permutations(n: usize, terms: &[(f64, Vec<usize>)]) -> Result<Self> {
        let mut m = DMatrix::zeros(n, n);
        for (w, perm) in terms {
            if perm.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: perm.len(),
                });
            }
            for (i, &j) in perm.iter().enumerate() {
                if j >= n {
                    return Err(Error::InvalidChain(format!("permutation image {j} out of range")));
                }
                m[(i, j)] += 0.5 * w;
                m[(j, i)] += 0.5 * w;
            }
        }
        Self::new(m)
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `Mᵏ` by repeated multiplication.
    pub fn power(&self, k: u32) -> DMatrix<f64> {
        let n = self.size();
        let mut out = DMatrix::identity(n, n);
        for _ in 0..k {
            out = &out * &self.m;
        }
        out
    }

    /// `Mᵏ` as a chain, with symmetry restored against rounding.
    pub fn powered(&self, k: u32) -> Result<Self> {
        let p = self.power(k);
        let sym = (&p + p.transpose()) * 0.5;
        let n = self.size();
        // Renormalize rows so accumulated rounding does not trip validation.
        let rows: Vec<f64> = (0..n).map(|i| sym.row(i).sum()).collect();
        Self::new(DMatrix::from_fn(n, n, |i, j| sym[(i, j)] / rows[i]))
    }
}

/// The isometries `A_k`, `B_k` as dense `N^{k+1} × N` matrices.
#[derive(Clone, Debug)]
pub struct SzegedyWalk {
    chain: MarkovChain,
    k: u32,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

fn reverse_digits(mut index: usize, base: usize, digits: u32) -> usize {
    let mut out = 0;
    for _ in 0..digits {
        out = out * base + index % base;
        index /= base;
    }
    out
}

impl SzegedyWalk {
    pub fn new(chain: &MarkovChain, k: u32, budget: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroSteps);
        }
        let n = chain.size();
        let required = n.checked_pow(k + 1).unwrap_or(usize::MAX);
        if required > budget {
            return Err(Error::BudgetExceeded {
                what: "Szegedy register space",
                required,
                budget,
            });
        }
        let paths = required / n;
        let m = chain.matrix();
        let mut a = DMatrix::zeros(required, n);
        let mut b = DMatrix::zeros(required, n);
        for i in 0..n {
            for code in 0..paths {
                // j₁ is the most significant digit of the path code.
                let mut prob = 1.0;
                let mut prev = i;
                let mut rest = code;
                let mut div = paths / n;
                for _ in 0..k {
                    let j = rest / div.max(1);
                    rest %= div.max(1);
                    div /= n;
                    prob *= m[(prev, j)];
                    prev = j;
                }
                if prob == 0.0 {
                    continue;
                }
                let amp = libm::sqrt(prob);
                let row = i * paths + code;
                a[(row, i)] = amp;
                b[(reverse_digits(row, n, k + 1), i)] = amp;
            }
        }
        Ok(Self {
            chain: chain.clone(),
            k,
            a,
            b,
        })
    }

    pub fn chain(&self) -> &MarkovChain {
        &self.chain
    }

    pub fn steps(&self) -> u32 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `max(‖A†A − I‖, ‖B†B − I‖)` entrywise.
    pub fn isometry_error(&self) -> f64 {
        let n = self.chain.size();
        let id = DMatrix::<f64>::identity(n, n);
        let ea = (self.a.transpose() * &self.a - &id).amax();
        let eb = (self.b.transpose() * &self.b - &id).amax();
        ea.max(eb)
    }

    /// `A_kᵀB_k`.
    pub fn discriminant(&self) -> DMatrix<f64> {
        self.a.transpose() * &self.b
    }

    /// `W_k x = R_B R_A x` with `R = 2PPᵀ − I`.
    pub fn walk_apply(&self, state: &DVector<f64>) -> Result<DVector<f64>> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.len(),
            });
        }
        let ra = &self.a * (self.a.transpose() * state) * 2.0 - state;
        Ok(&self.b * (self.b.transpose() * &ra) * 2.0 - ra)
    }

    pub fn walk_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let id = DMatrix::<f64>::identity(d, d);
        let ra = &self.a * self.a.transpose() * 2.0 - &id;
        let rb = &self.b * self.b.transpose() * 2.0 - &id;
        rb * ra
    }

    /// Eigenphases of `W_k` on its nontrivial subspace.
    ///
    /// `W_k` acts as the identity outside `span(A) + span(B)`. Inside it, the
    /// trivial part is where both projectors have definite values:
    /// `range A ∩ range B` and the two mixed intersections. Each is found as
    /// the null space of a positive semidefinite combination of the projectors.
    pub fn nontrivial_phases(&self) -> Vec<f64> {
        let joint = {
            let mut m = DMatrix::zeros(self.dim(), 2 * self.chain.size());
            m.columns_mut(0, self.chain.size()).copy_from(&self.a);
            m.columns_mut(self.chain.size(), self.chain.size()).copy_from(&self.b);
            m
        };
        let svd = joint.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > RANK_TOL)
            .collect();
        let span = DMatrix::from_fn(self.dim(), keep.len(), |r, c| u[(r, keep[c])]);
        let r = span.ncols();
        let ea = span.transpose() * &self.a;
        let eb = span.transpose() * &self.b;
        let pa = &ea * ea.transpose();
        let pb = &eb * eb.transpose();
        let id = DMatrix::<f64>::identity(r, r);

        let mut trivial: Vec<DVector<f64>> = Vec::new();
        for m in [&id * 2.0 - &pa - &pb, &id - &pa + &pb, &id + &pa - &pb] {
            let (values, vectors) = symmetric_eigen(&m);
            for j in 0..r {
                if values[j] < PROJECTOR_TOL {
                    trivial.push(vectors.column(j).into_owned());
                }
            }
        }
        let complement = if trivial.is_empty() {
            id.clone()
        } else {
            let t = DMatrix::from_columns(&trivial);
            &id - &t * t.transpose()
        };
        let (values, vectors) = symmetric_eigen(&complement);
        let cols: Vec<DVector<f64>> = (0..r)
            .filter(|&j| values[j] > 0.5)
            .map(|j| vectors.column(j).into_owned())
            .collect();
        if cols.is_empty() {
            return Vec::new();
        }
        let basis = DMatrix::from_columns(&cols);
        let w = (&pb * 2.0 - &id) * (&pa * 2.0 - &id);
        let restricted = basis.transpose() * w * &basis;
        orthogonal_eigen(&restricted).phases
    }

    /// `±2 arccos σ` for the discriminant's singular values `σ ∈ (0, 1)`.
    pub fn predicted_nontrivial_phases(&self) -> Vec<f64> {
        let sv = self.discriminant().singular_values();
        let mut out = Vec::new();
        for &s in sv.iter() {
            // Same cut as the projector null spaces: σ²/2 and 1 − σ are the
            // eigenvalues a σ-mode contributes there.
            if 0.5 * s * s > PROJECTOR_TOL && 1.0 - s > PROJECTOR_TOL {
                let p = 2.0 * libm::acos(s);
                out.push(p);
                out.push(-p);
            }
        }
        out
    }

    /// Oracle queries per application of `W_k` when each `V₁`/`V₂` step costs
    /// `q`.
    pub fn query_cost(&self, q: u64) -> u64 {
        4 * self.k as u64 * q
    }
}

/// `4kQ`; `k = 0` is not a walk.
pub fn query_cost(k: u32, q: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::ZeroSteps);
    }
    Ok(4 * k as u64 * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::multiset_distance;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_chain(n: usize, rng: &mut ChaCha8Rng) -> MarkovChain {
        let terms: Vec<(f64, Vec<usize>)> = (0..3)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                (rng.gen::<f64>() + 0.05, p)
            })
            .collect();
        let total: f64 = terms.iter().map(|t| t.0).sum();
        let terms: Vec<_> = terms.into_iter().map(|(w, p)| (w / total, p)).collect();
        MarkovChain::from_permutations(n, &terms).unwrap()
    }

    #[test]
    fn chain_validation() {
        assert!(MarkovChain::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.4, 0.6])).is_err());
        assert!(MarkovChain::new(DMatrix::from_row_slice(2, 2, &[1.5, -0.5, -0.5, 1.5])).is_err());
        assert!(MarkovChain::new(DMatrix::from_row_slice(1, 2, &[0.5, 0.5])).is_err());
        assert!(MarkovChain::new(DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0])).is_err());
        assert_eq!(MarkovChain::cycle(2).unwrap().matrix()[(0, 1)], 1.0);
        assert!(MarkovChain::complete(4).unwrap().lazy(0.5).is_ok());
        assert!(MarkovChain::cycle(1).is_err());
    }

    #[test]
    fn identity_chain_states() {
        let chain = MarkovChain::new(DMatrix::identity(2, 2)).unwrap();
        let w = SzegedyWalk::new(&chain, 1, DEFAULT_REGISTER_BUDGET).unwrap();
        // |A_i⟩ = |i⟩|i⟩ → indices 0 and 3.
        assert_eq!(w.a().column(0).as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(w.a().column(1).as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        for k in 1..=3 {
            let w = SzegedyWalk::new(&chain, k, DEFAULT_REGISTER_BUDGET).unwrap();
            assert_eq!(w.discriminant(), DMatrix::identity(2, 2));
        }
    }

    #[test]
    fn swap_chain_states() {
        let chain = MarkovChain::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let w = SzegedyWalk::new(&chain, 1, DEFAULT_REGISTER_BUDGET).unwrap();
        // |A_1⟩ = |1⟩|2⟩ and |B_1⟩ = |2⟩|1⟩ in one-based labels.
        assert_eq!(w.a().column(0).as_slice(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(w.b().column(0).as_slice(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn register_order_for_three_steps() {
        let chain = MarkovChain::cycle(3).unwrap();
        let w = SzegedyWalk::new(&chain, 3, DEFAULT_REGISTER_BUDGET).unwrap();
        // Path 0 → 1 → 2 → 0 from i = 0: index 0·27 + 1·9 + 2·3 + 0.
        assert!((w.a()[(15, 0)] - libm::sqrt(0.125)).abs() < 1e-15);
        // Reversed registers |0⟩|2⟩|1⟩|0⟩ for B.
        assert!((w.b()[(2 * 9 + 3, 0)] - libm::sqrt(0.125)).abs() < 1e-15);
    }

    #[test]
    fn isometry_and_discriminant_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in 2..=4 {
            let chain = random_chain(n, &mut rng);
            for k in 1..=3 {
                let w = SzegedyWalk::new(&chain, k, DEFAULT_REGISTER_BUDGET).unwrap();
                assert!(w.isometry_error() < 1e-12);
                let err = (w.discriminant() - chain.power(k)).amax();
                assert!(err < 1e-10, "n={n} k={k}: {err}");
            }
        }
    }

    #[test]
    fn single_step_discriminant_is_m() {
        let chain = MarkovChain::complete(3).unwrap();
        let w = SzegedyWalk::new(&chain, 1, DEFAULT_REGISTER_BUDGET).unwrap();
        assert!((w.discriminant() - chain.matrix()).amax() < 1e-12);
    }

    #[test]
    fn walk_preserves_norm_and_fixes_joint_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let chain = random_chain(3, &mut rng);
        let w = SzegedyWalk::new(&chain, 2, DEFAULT_REGISTER_BUDGET).unwrap();
        let x = DVector::from_fn(w.dim(), |_, _| rng.gen::<f64>() - 0.5);
        let y = w.walk_apply(&x).unwrap();
        assert!((y.norm() - x.norm()).abs() < 1e-12);
        assert!((w.walk_matrix() * &x - &y).amax() < 1e-12);
        // The stationary state Σ_i |A_i⟩/√N lies in range A ∩ range B.
        let s = w.a() * DVector::from_element(3, 1.0 / libm::sqrt(3.0));
        assert!((w.walk_apply(&s).unwrap() - &s).amax() < 1e-12);
        assert!(w.walk_apply(&DVector::zeros(5)).is_err());
    }

    #[test]
    fn spectral_correspondence() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..4 {
            let chain = random_chain(4, &mut rng);
            for k in [2, 3] {
                let wk = SzegedyWalk::new(&chain, k, DEFAULT_REGISTER_BUDGET).unwrap();
                let w1 = SzegedyWalk::new(&chain.powered(k).unwrap(), 1, DEFAULT_REGISTER_BUDGET).unwrap();
                let a = wk.nontrivial_phases();
                let b = w1.nontrivial_phases();
                assert!(multiset_distance(&a, &b) < 1e-9, "{a:?} vs {b:?}");
                let p = wk.predicted_nontrivial_phases();
                assert!(multiset_distance(&a, &p) < 1e-9, "{a:?} vs {p:?}");
            }
        }
    }

    #[test]
    fn cycle_spectrum() {
        // C_4 has eigenvalues 1, 0, 0, −1: no singular value strictly inside (0, 1).
        let w = SzegedyWalk::new(&MarkovChain::cycle(4).unwrap(), 1, 4096).unwrap();
        assert!(w.nontrivial_phases().is_empty());
        // Lazy C_3: eigenvalues 1, 1/4, 1/4.
        let w = SzegedyWalk::new(&MarkovChain::cycle(3).unwrap().lazy(0.5).unwrap(), 1, 4096).unwrap();
        let p = 2.0 * libm::acos(0.25);
        assert!(multiset_distance(&w.nontrivial_phases(), &[p, p, -p, -p]) < 1e-9);
    }

    #[test]
    fn budget_and_cost() {
        let chain = MarkovChain::complete(4).unwrap();
        assert!(matches!(
            SzegedyWalk::new(&chain, 6, DEFAULT_REGISTER_BUDGET),
            Err(Error::BudgetExceeded { required: 16384, .. })
        ));
        assert_eq!(SzegedyWalk::new(&chain, 0, 10).unwrap_err(), Error::ZeroSteps);
        assert_eq!(query_cost(1, 1), Ok(4));
        assert_eq!(query_cost(3, 2), Ok(24));
        assert_eq!(query_cost(0, 1), Err(Error::ZeroSteps));
        let w = SzegedyWalk::new(&chain, 2, DEFAULT_REGISTER_BUDGET).unwrap();
        assert_eq!(w.query_cost(5), 40);
    }

    #[test]
    fn digit_reversal() {
        assert_eq!(reverse_digits(0b0110, 2, 4), 0b0110);
        assert_eq!(reverse_digits(9 + 2 * 3, 3, 3), 2 * 3 + 1);
    }
}
