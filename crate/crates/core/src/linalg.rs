//! Dense eigendecomposition of unitary matrices.
//!
//! A unitary `U` is normal, so its Hermitian part `(U + U†)/2` and
//! anti-Hermitian part `(U − U†)/2i` commute and share eigenvectors, with
//! eigenvalues `cos φ` and `sin φ`. We diagonalize the Hermitian part, group
//! numerically equal eigenvalues, and split each group by diagonalizing the
//! anti-Hermitian part restricted to it. Groups at `cos φ = ±1` are real
//! eigenvalues and need no splitting.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues of the Hermitian part closer than this are treated as one
/// degenerate group.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Hermitian-part eigenvalues within this distance of `±1` are real eigenvalues.
pub const REAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    /// Eigenphases in `(−π, π]`.
    pub phases: Vec<f64>,
    /// Orthonormal eigenvectors, one per column.
    pub vectors: DMatrix<Complex64>,
}

/// Off-diagonal entries below this fraction of the Frobenius norm are left
/// alone by the Jacobi polish.
const JACOBI_TOL: f64 = 1e-15;

const JACOBI_MAX_SWEEPS: usize = 50;

/// Eigendecomposition of a real symmetric matrix: `(values, vectors)` with
/// eigenvectors in columns, unordered.
///
/// nalgebra's QR-based solver is fast and its eigenvalues are reliable, but in
/// 0.33 some eigenvectors come back wrong (typically inside near-degenerate
/// clusters). Its output is therefore only a starting basis `Q`: cyclic Jacobi
/// rotations drive `QᵀAQ` to diagonal form, accumulating into `Q`. When the
/// starting basis is good this costs one cheap sweep; when it is not, Jacobi
/// still converges on its own.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let start = a.clone().symmetric_eigen();
    let mut q = start.eigenvectors;
    let mut b = q.transpose() * (a * &q);
    let tol = JACOBI_TOL * a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for r in p + 1..n {
                let bpr = b[(p, r)];
                if bpr.abs() <= tol {
                    continue;
                }
                rotated = true;
                let theta = (b[(r, r)] - b[(p, p)]) / (2.0 * bpr);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                jacobi_rotate(&mut b, &mut q, p, r, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    (b.diagonal(), q)
}

/// Applies `B ← JᵀBJ`, `Q ← QJ` for the rotation in the `(p, r)` plane.
fn jacobi_rotate(b: &mut DMatrix<f64>, q: &mut DMatrix<f64>, p: usize, r: usize, c: f64, s: f64) {
    let n = b.nrows();
    for k in 0..n {
        let (bkp, bkr) = (b[(k, p)], b[(k, r)]);
        b[(k, p)] = c * bkp - s * bkr;
        b[(k, r)] = s * bkp + c * bkr;
    }
    for k in 0..n {
        let (bpk, brk) = (b[(p, k)], b[(r, k)]);
        b[(p, k)] = c * bpk - s * brk;
        b[(r, k)] = s * bpk + c * brk;
    }
    b[(p, r)] = 0.0;
    b[(r, p)] = 0.0;
    for k in 0..n {
        let (qkp, qkr) = (q[(k, p)], q[(k, r)]);
        q[(k, p)] = c * qkp - s * qkr;
        q[(k, r)] = s * qkp + c * qkr;
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Goes through the real symmetric embedding `[[A, −B], [B, A]]` of
/// `H = A + iB`, where every eigenvalue appears twice with eigenvectors
/// `(x, y)` and `(−y, x)`, both mapping to the complex line of `x + iy`. Each
/// doubled eigenspace is reduced to a complex orthonormal basis by pivoted
/// Gram–Schmidt. (The complex solver in nalgebra 0.33 returns inaccurate
/// eigenvectors, so it is avoided.)
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = h.nrows();
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            big[(r, c)] = z.re;
            big[(r + n, c + n)] = z.re;
            big[(r, c + n)] = -z.im;
            big[(r + n, c)] = z.im;
        }
    }
    let big = (&big + big.transpose()) * 0.5;
    let (eigenvalues, eigenvectors) = symmetric_eigen(&big);
    let order = sorted_order(&eigenvalues);
    let values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();

    let mut out_values = Vec::with_capacity(n);
    let mut out_vectors: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    for (lo, hi) in clusters(&values) {
        let mut candidates: Vec<DVector<Complex64>> = (lo..hi)
            .map(|i| {
                let col = eigenvectors.column(order[i]);
                DVector::from_fn(n, |r, _| Complex64::new(col[r], col[r + n]))
            })
            .collect();
        let keep = (hi - lo).div_ceil(2);
        for _ in 0..keep {
            let (best, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
            let v = candidates.swap_remove(best);
            let v = &v / Complex64::new(v.norm(), 0.0);
            for c in &mut candidates {
                let proj = v.dotc(c);
                *c -= &v * proj;
            }
            out_values.push(v.dotc(&(h * &v)).re);
            out_vectors.push(v);
        }
    }
    (out_values, DMatrix::from_columns(&out_vectors))
}

fn clusters(sorted_values: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted_values.len() {
        if i == sorted_values.len() || sorted_values[i] - sorted_values[i - 1] > CLUSTER_TOL {
            out.push((start, i));
            start = i;
        }
    }
    out
}

fn sorted_order(values: &DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Splits one degenerate group of the Hermitian part.
///
/// `basis` spans the group, `cosines` are the Hermitian-part eigenvalues of the
/// basis columns and `sine_block` is `basis† · (U − U†)/2i · basis`.
fn split_group(
    basis: &DMatrix<Complex64>,
    cosines: &[f64],
    sine_block: DMatrix<Complex64>,
    phases: &mut Vec<f64>,
    columns: &mut Vec<DVector<Complex64>>,
) {
    let mean = cosines.iter().sum::<f64>() / cosines.len() as f64;
    if mean >= 1.0 - REAL_TOL || mean <= -1.0 + REAL_TOL {
        let phase = if mean > 0.0 { 0.0 } else { core::f64::consts::PI };
        for j in 0..basis.ncols() {
            phases.push(phase);
            columns.push(basis.column(j).into_owned());
        }
        return;
    }
    let hermitian = (&sine_block + sine_block.adjoint()) * Complex64::new(0.5, 0.0);
    let (sines, vectors) = hermitian_eigen(&hermitian);
    for (j, sine) in sines.iter().enumerate() {
        let z = vectors.column(j);
        let cos = z.iter().zip(cosines).map(|(zi, ci)| zi.norm_sqr() * ci).sum::<f64>();
        phases.push(libm::atan2(*sine, cos));
        columns.push(basis * z);
    }
}

/// Eigendecomposition of a real orthogonal matrix.
pub fn orthogonal_eigen(w: &DMatrix<f64>) -> UnitaryEigen {
    let n = w.nrows();
    let sym = (w + w.transpose()) * 0.5;
    let (eigenvalues, eigenvectors) = symmetric_eigen(&sym);
    let order = sorted_order(&eigenvalues);
    let values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let antisym = (w - w.transpose()) * 0.5;

    let mut phases = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n);
    for (lo, hi) in clusters(&values) {
        let real_basis = DMatrix::from_fn(n, hi - lo, |r, c| eigenvectors[(r, order[lo + c])]);
        let mean = values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        let basis = real_basis.map(|x| Complex64::new(x, 0.0));
        let sine_block = if mean.abs() >= 1.0 - REAL_TOL {
            DMatrix::zeros(0, 0)
        } else {
            // (W − Wᵀ)/2i restricted: −i · Vᵀ K V with K real antisymmetric.
            let k = real_basis.transpose() * (&antisym * &real_basis);
            k.map(|x| Complex64::new(0.0, -x))
        };
        split_group(&basis, &values[lo..hi], sine_block, &mut phases, &mut columns);
    }
    UnitaryEigen {
        phases,
        vectors: DMatrix::from_columns(&columns),
    }
}

/// Eigendecomposition of a complex unitary matrix.
pub fn unitary_eigen(u: &DMatrix<Complex64>) -> UnitaryEigen {
    let n = u.nrows();
    let herm = (u + u.adjoint()) * Complex64::new(0.5, 0.0);
    // Already ascending.
    let (values, vectors) = hermitian_eigen(&herm);
    // (U − U†)/2i
    let anti = (u - u.adjoint()) * Complex64::new(0.0, -0.5);

    let mut phases = Vec::with_capacity(n);
    let mut columns = Vec::with_capacity(n);
    for (lo, hi) in clusters(&values) {
        let basis = DMatrix::from_fn(n, hi - lo, |r, c| vectors[(r, lo + c)]);
        let mean = values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        let sine_block = if mean.abs() >= 1.0 - REAL_TOL {
            DMatrix::zeros(0, 0)
        } else {
            basis.adjoint() * (&anti * &basis)
        };
        split_group(&basis, &values[lo..hi], sine_block, &mut phases, &mut columns);
    }
    UnitaryEigen {
        phases,
        vectors: DMatrix::from_columns(&columns),
    }
}

/// Largest elementwise gap between two multisets after sorting, or infinity
/// when their sizes differ.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn rotation_block(theta: f64) -> [[f64; 2]; 2] {
        let (s, c) = (libm::sin(theta), libm::cos(theta));
        [[c, -s], [s, c]]
    }

    #[test]
    fn block_rotation_spectrum() {
        // diag(R(0.3), R(0.3), R(1.1), 1, −1) in a scrambled basis.
        let mut w = DMatrix::<f64>::zeros(8, 8);
        for (b, theta) in [0.3, 0.3, 1.1].iter().enumerate() {
            let r = rotation_block(*theta);
            for i in 0..2 {
                for j in 0..2 {
                    w[(2 * b + i, 2 * b + j)] = r[i][j];
                }
            }
        }
        w[(6, 6)] = 1.0;
        w[(7, 7)] = -1.0;
        // Conjugate by a permutation-with-signs to scramble.
        let perm = [3, 7, 0, 5, 1, 6, 2, 4];
        let p = DMatrix::from_fn(8, 8, |r, c| {
            if perm[r] == c {
                if r % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            }
        });
        let w = &p * w * p.transpose();

        let eig = orthogonal_eigen(&w);
        let expected = vec![0.3, -0.3, 0.3, -0.3, 1.1, -1.1, 0.0, PI];
        assert!(multiset_distance(&eig.phases, &expected) < 1e-12);
        let wc = w.map(|x| Complex64::new(x, 0.0));
        for (j, phase) in eig.phases.iter().enumerate() {
            let v = eig.vectors.column(j);
            let lhs = &wc * v;
            let rhs = v * Complex64::from_polar(1.0, *phase);
            assert!((lhs - rhs).norm() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let gram = eig.vectors.adjoint() * &eig.vectors;
        assert!((gram - DMatrix::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn complex_diagonal_unitary() {
        let phases = [0.2, -0.7, 2.9, 0.2];
        let u = DMatrix::from_diagonal(&DVector::from_iterator(
            4,
            phases.iter().map(|p| Complex64::from_polar(1.0, *p)),
        ));
        let eig = unitary_eigen(&u);
        assert!(multiset_distance(&eig.phases, &phases) < 1e-12);
    }

    #[test]
    fn hermitian_eigenvectors_have_small_residuals() {
        let h = DMatrix::from_fn(5, 5, |r, c| {
            let (r, c) = (r as f64, c as f64);
            let re = libm::cos(r + c) + if r == c { r } else { 0.0 };
            let im = if r == c {
                0.0
            } else {
                libm::sin(r * 1.3 - c * 0.7) - libm::sin(c * 1.3 - r * 0.7)
            };
            Complex64::new(re, im)
        });
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let (vals, vecs) = hermitian_eigen(&h);
        assert_eq!(vals.len(), 5);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for (j, v) in vals.iter().enumerate() {
            let z = vecs.column(j);
            assert!((&h * z - z * Complex64::new(*v, 0.0)).norm() < 1e-12);
        }
        assert!((vecs.adjoint() * &vecs - DMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn hermitian_degenerate_eigenspace() {
        // diag(2, 2, −1) rotated by a complex unitary.
        let s = 1.0 / libm::sqrt(2.0);
        let q = DMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(s, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, s),
                Complex64::new(s, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 1.0),
            ],
        );
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let h = &q * d * q.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(multiset_distance(&vals, &[2.0, 2.0, -1.0]) < 1e-12);
        assert!((vecs.adjoint() * &vecs - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn degenerate_pair_in_real_embedding() {
        // Real embedding of a 2×2 Hermitian matrix with a doubled spectrum;
        // plain QR returns wrong eigenvectors for it.
        let (a, d, br, bi) = (
            -2.0607893191240114e-5,
            2.060789319121366e-5,
            0.0003373492335034373,
            0.044603228963597696,
        );
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[a, br, 0.0, bi, br, d, -bi, 0.0, 0.0, -bi, a, br, bi, 0.0, br, d],
        );
        let (vals, vecs) = symmetric_eigen(&m);
        for j in 0..4 {
            let v = vecs.column(j);
            assert!((&m * v - v * vals[j]).norm() < 1e-15);
        }
        assert!((vecs.transpose() * &vecs - DMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn multiset_distance_detects_size_mismatch() {
        assert_eq!(multiset_distance(&[1.0], &[1.0, 2.0]), f64::INFINITY);
        assert_eq!(multiset_distance(&[2.0, 1.0], &[1.0, 2.0]), 0.0);
    }
}
