//! The periodic `L × L` grid as a 4-regular graph.
//!
//! Vertices are serialized row-major as `y·L + x`. Edge labels use the fixed
//! alphabet `0:→ 1:← 2:↑ 3:↓`; the label seen from the other end of an edge is
//! the [`Direction::reversed`] label, so the rotation map sends `(v, g)` to
//! `(v + g, reverse(g))`.
//!
//! Graph powering keeps the same vertex set and replaces edges by length-`t`
//! label sequences. A path port `(u, g₁…g_t)` is serialized as the base-4
//! number with `g₁` as the most significant digit.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Degree of the torus.
pub const DEGREE: usize = 4;

/// Default cap on the number of label sequences `dᵗ` enumerated by
/// [`TorusGrid::adjacency_power_entry`].
pub const DEFAULT_PATH_BUDGET: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Direction {
    Right = 0,
    Left = 1,
    Up = 2,
    Down = 3,
}

impl Direction {
    pub const ALL: [Direction; DEGREE] = [Direction::Right, Direction::Left, Direction::Up, Direction::Down];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// The label of the same edge seen from its other endpoint.
    #[inline]
    pub const fn reversed(self) -> Self {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub const fn symbol(self) -> char {
        match self {
            Direction::Right => '→',
            Direction::Left => '←',
            Direction::Up => '↑',
            Direction::Down => '↓',
        }
    }

    #[inline]
    const fn offset(self) -> (isize, isize) {
        match self {
            Direction::Right => (1, 0),
            Direction::Left => (-1, 0),
            Direction::Up => (0, 1),
            Direction::Down => (0, -1),
        }
    }
}

/// A vertex together with one of its edge labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Port {
    pub x: usize,
    pub y: usize,
    pub label: Direction,
}

/// A vertex together with a length-`t` sequence of edge labels, i.e. an edge
/// of the powered graph `Gᵗ` seen from one endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathPort {
    pub x: usize,
    pub y: usize,
    pub labels: Vec<Direction>,
}

impl PathPort {
    pub fn steps(&self) -> usize {
        self.labels.len()
    }

    /// Base-4 code of the label sequence, first label most significant.
    pub fn label_code(&self) -> usize {
        encode_labels(&self.labels)
    }
}

pub fn encode_labels(labels: &[Direction]) -> usize {
    labels.iter().fold(0usize, |code, g| code * DEGREE + g.index())
}

pub fn decode_labels(code: usize, t: usize) -> Vec<Direction> {
    let mut labels = vec![Direction::Right; t];
    let mut rest = code;
    for slot in labels.iter_mut().rev() {
        *slot = Direction::ALL[rest % DEGREE];
        rest /= DEGREE;
    }
    labels
}

/// `dᵗ`, or `None` on overflow.
pub fn coin_dimension(t: u32) -> Option<usize> {
    DEGREE.checked_pow(t)
}

/// One Fourier mode of the normalized adjacency matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierMode {
    pub k: (usize, usize),
    pub cos_phi: f64,
}

impl FourierMode {
    /// Eigenvalue of the Laplacian `A_G − I` for this mode.
    pub fn laplacian_shift(&self) -> f64 {
        self.cos_phi - 1.0
    }
}

/// The full spectrum `{cos φ_k}` of `A_G`, one entry per mode in row-major
/// order `k_y·L + k_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjacencySpectrum {
    pub side: usize,
    pub modes: Vec<FourierMode>,
}

impl AdjacencySpectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.cos_phi).collect()
    }

    pub fn laplacian_eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(FourierMode::laplacian_shift).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    side: usize,
}

impl TorusGrid {
    pub fn new(side: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::InvalidSide(side));
        }
        Ok(Self { side })
    }

    #[inline]
    pub const fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub const fn vertex_count(&self) -> usize {
        self.side * self.side
    }

    #[inline]
    pub const fn degree(&self) -> usize {
        DEGREE
    }

    /// Even sides make the grid bipartite; the walk then has an extra `−1`
    /// eigenvector overlapping the coin states.
    #[inline]
    pub const fn is_bipartite(&self) -> bool {
        self.side.is_multiple_of(2)
    }

    #[inline]
    pub fn vertex_index(&self, x: usize, y: usize) -> usize {
        (y % self.side) * self.side + (x % self.side)
    }

    #[inline]
    pub fn vertex_coords(&self, vertex: usize) -> (usize, usize) {
        (vertex % self.side, vertex / self.side)
    }

    pub fn check_vertex(&self, vertex: usize) -> Result<()> {
        if vertex < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex,
                count: self.vertex_count(),
            })
        }
    }

    /// Builds a port with coordinates reduced modulo the side.
    pub fn port(&self, x: usize, y: usize, label: Direction) -> Port {
        Port {
            x: x % self.side,
            y: y % self.side,
            label,
        }
    }

    pub fn path_port(&self, x: usize, y: usize, labels: Vec<Direction>) -> PathPort {
        PathPort {
            x: x % self.side,
            y: y % self.side,
            labels,
        }
    }

    #[inline]
    fn step(&self, x: usize, y: usize, g: Direction) -> (usize, usize) {
        let l = self.side as isize;
        let (dx, dy) = g.offset();
        (
            (x as isize + dx).rem_euclid(l) as usize,
            (y as isize + dy).rem_euclid(l) as usize,
        )
    }

    /// Rotation map `R_G(v, g) = (v + g, reverse(g))`.
    pub fn rotate(&self, port: Port) -> Port {
        let (x, y) = self.step(port.x, port.y, port.label);
        Port {
            x,
            y,
            label: port.label.reversed(),
        }
    }

    /// Rotation map of `Gᵗ`: walks the labels from the start vertex, collecting
    /// the reversed label of each traversed edge, then reverses their order so
    /// the result reads from the far endpoint back to the start.
    pub fn rotate_path(&self, port: &PathPort) -> PathPort {
        let (mut x, mut y) = (port.x % self.side, port.y % self.side);
        let mut back = Vec::with_capacity(port.labels.len());
        for &g in &port.labels {
            let next = self.rotate(Port { x, y, label: g });
            x = next.x;
            y = next.y;
            back.push(next.label);
        }
        back.reverse();
        PathPort { x, y, labels: back }
    }

    /// Same as [`Self::rotate_path`] on serialized `(vertex, code)` pairs.
    pub fn rotate_path_code(&self, vertex: usize, code: usize, t: usize) -> (usize, usize) {
        let (mut x, mut y) = self.vertex_coords(vertex);
        let mut back_code = 0usize;
        let mut place = 1usize;
        // Digits are consumed most significant first; the reversed label of
        // step i lands at digit position i from the least significant end,
        // which performs the order reversal.
        let mut divisor = DEGREE.pow(t as u32) / DEGREE.max(1);
        for _ in 0..t {
            let g = Direction::ALL[(code / divisor) % DEGREE];
            divisor /= DEGREE;
            let (nx, ny) = self.step(x, y, g);
            x = nx;
            y = ny;
            back_code += g.reversed().index() * place;
            place *= DEGREE;
        }
        (self.vertex_index(x, y), back_code)
    }

    /// `cos φ_k = ½(cos(2πk_x/L) + cos(2πk_y/L))`.
    pub fn adjacency_eigenphase(&self, k: (usize, usize)) -> f64 {
        let l = self.side as f64;
        0.5 * (libm::cos(2.0 * PI * k.0 as f64 / l) + libm::cos(2.0 * PI * k.1 as f64 / l))
    }

    /// `1 − cos φ_k`, evaluated as `sin²(πk_x/L) + sin²(πk_y/L)` so that it
    /// keeps full relative precision for long-wavelength modes.
    pub fn one_minus_eigenphase(&self, k: (usize, usize)) -> f64 {
        let l = self.side as f64;
        let sx = libm::sin(PI * k.0 as f64 / l);
        let sy = libm::sin(PI * k.1 as f64 / l);
        sx * sx + sy * sy
    }

    pub fn spectrum(&self) -> AdjacencySpectrum {
        let l = self.side;
        let modes = (0..l)
            .flat_map(|ky| (0..l).map(move |kx| (kx, ky)))
            .map(|k| FourierMode {
                k,
                cos_phi: self.adjacency_eigenphase(k),
            })
            .collect();
        AdjacencySpectrum { side: l, modes }
    }

    /// Dense normalized adjacency matrix `A_G` (multi-edges counted, so `L = 2`
    /// has entries `1/2`).
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        let mut a = DMatrix::zeros(n, n);
        for u in 0..n {
            let (x, y) = self.vertex_coords(u);
            for g in Direction::ALL {
                let (nx, ny) = self.step(x, y, g);
                a[(u, self.vertex_index(nx, ny))] += 1.0 / DEGREE as f64;
            }
        }
        a
    }

    pub fn laplacian_matrix(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        self.adjacency_matrix() - DMatrix::identity(n, n)
    }

    /// `(A_Gᵗ)_{uv}` by enumerating every length-`t` label sequence from `u`.
    /// Meant as a test oracle; refuses when `dᵗ` exceeds `path_budget`.
    pub fn adjacency_power_entry(&self, t: u32, u: usize, v: usize, path_budget: usize) -> Result<f64> {
        if t == 0 {
            return Err(Error::ZeroSteps);
        }
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let paths = coin_dimension(t)
            .filter(|&p| p <= path_budget)
            .ok_or(Error::BudgetExceeded {
                what: "path enumeration",
                required: coin_dimension(t).unwrap_or(usize::MAX),
                budget: path_budget,
            })?;
        let hits = (0..paths)
            .filter(|&code| self.rotate_path_code(u, code, t as usize).0 == v)
            .count();
        Ok(hits as f64 / paths as f64)
    }
}

/// `xⁿ` by repeated squaring.
pub fn powi(x: f64, n: u32) -> f64 {
    let mut base = x;
    let mut exp = n;
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

/// `1 − cᵗ` given `c` and an accurate `1 − c`, via `(1 − c)·Σ_{n<t} cⁿ`.
pub fn one_minus_power(c: f64, one_minus_c: f64, t: u32) -> f64 {
    if c <= 0.0 {
        return 1.0 - powi(c, t);
    }
    let mut geometric = 0.0;
    let mut term = 1.0;
    for _ in 0..t {
        geometric += term;
        term *= c;
    }
    one_minus_c * geometric
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(l: usize) -> TorusGrid {
        TorusGrid::new(l).unwrap()
    }

    #[test]
    fn rejects_degenerate_side() {
        assert_eq!(TorusGrid::new(1), Err(Error::InvalidSide(1)));
        assert!(TorusGrid::new(2).is_ok());
    }

    #[test]
    fn shift_rules() {
        let g = grid(4);
        let p = g.rotate(g.port(1, 2, Direction::Right));
        assert_eq!(p, g.port(2, 2, Direction::Left));
        let p = g.rotate(g.port(0, 0, Direction::Left));
        assert_eq!(p, g.port(3, 0, Direction::Right));
        let p = g.rotate(g.port(2, 3, Direction::Up));
        assert_eq!(p, g.port(2, 0, Direction::Down));
        let p = g.rotate(g.port(2, 0, Direction::Down));
        assert_eq!(p, g.port(2, 3, Direction::Up));
    }

    #[test]
    fn rotation_is_an_involution() {
        let g = grid(5);
        let p = g.port(2, 3, Direction::Up);
        assert_eq!(g.rotate(g.rotate(p)), p);
    }

    #[test]
    fn powered_rotation_with_one_step_is_the_rotation_map() {
        let g = grid(6);
        for v in 0..g.vertex_count() {
            let (x, y) = g.vertex_coords(v);
            for d in Direction::ALL {
                let single = g.rotate(g.port(x, y, d));
                let path = g.rotate_path(&g.path_port(x, y, vec![d]));
                assert_eq!((path.x, path.y, path.labels[0]), (single.x, single.y, single.label));
            }
        }
    }

    #[test]
    fn three_step_path_example() {
        use Direction::*;
        let g = grid(4);
        let out = g.rotate_path(&g.path_port(0, 0, vec![Right, Right, Up]));
        assert_eq!(out, g.path_port(2, 1, vec![Down, Left, Left]));
    }

    #[test]
    fn coded_and_structured_rotation_agree() {
        let g = grid(5);
        for t in 1..=4usize {
            for v in 0..g.vertex_count() {
                for code in 0..DEGREE.pow(t as u32) {
                    let (x, y) = g.vertex_coords(v);
                    let p = g.rotate_path(&g.path_port(x, y, decode_labels(code, t)));
                    let (w, back) = g.rotate_path_code(v, code, t);
                    assert_eq!((w, back), (g.vertex_index(p.x, p.y), p.label_code()));
                }
            }
        }
    }

    #[test]
    fn eigenphase_examples() {
        assert_eq!(grid(7).adjacency_eigenphase((0, 0)), 1.0);
        assert!((grid(6).adjacency_eigenphase((3, 3)) + 1.0).abs() < 1e-15);
        assert!((grid(4).adjacency_eigenphase((1, 0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spectrum_shape_and_symmetry() {
        for l in [2, 3, 4, 9] {
            let g = grid(l);
            let s = g.spectrum();
            assert_eq!(s.modes.len(), l * l);
            assert_eq!(s.modes[0].cos_phi, 1.0);
            for m in &s.modes {
                let neg = ((l - m.k.0) % l, (l - m.k.1) % l);
                assert!((g.adjacency_eigenphase(neg) - m.cos_phi).abs() < 1e-15);
                assert!((m.laplacian_shift() - (m.cos_phi - 1.0)).abs() == 0.0);
                let om = g.one_minus_eigenphase(m.k);
                assert!((om - (1.0 - m.cos_phi)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectrum_matches_dense_adjacency() {
        for l in 2..=8 {
            let g = grid(l);
            let mut dense: Vec<f64> = g.adjacency_matrix().symmetric_eigenvalues().iter().copied().collect();
            let mut fourier = g.spectrum().eigenvalues();
            dense.sort_by(f64::total_cmp);
            fourier.sort_by(f64::total_cmp);
            for (a, b) in dense.iter().zip(&fourier) {
                assert!((a - b).abs() < 1e-10, "L={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        for l in [2, 3, 5, 8] {
            let lap = grid(l).laplacian_matrix();
            for r in 0..lap.nrows() {
                assert!(lap.row(r).sum().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn power_entries_for_single_steps() {
        let g = grid(5);
        let u = g.vertex_index(2, 2);
        let right = g.vertex_index(3, 2);
        assert_eq!(g.adjacency_power_entry(1, u, right, DEFAULT_PATH_BUDGET).unwrap(), 0.25);
        assert_eq!(g.adjacency_power_entry(1, u, u, DEFAULT_PATH_BUDGET).unwrap(), 0.0);
    }

    #[test]
    fn power_entries_match_dense_cube() {
        let g = grid(5);
        let a = g.adjacency_matrix();
        let cube = &a * &a * &a;
        let n = g.vertex_count();
        for u in 0..n {
            let mut row_sum = 0.0;
            for v in 0..n {
                let e = g.adjacency_power_entry(3, u, v, DEFAULT_PATH_BUDGET).unwrap();
                assert!((e - cube[(u, v)]).abs() <= 1e-12);
                row_sum += e;
            }
            assert!((row_sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn power_entry_budget_and_errors() {
        let g = grid(3);
        assert!(matches!(
            g.adjacency_power_entry(8, 0, 0, DEFAULT_PATH_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(g.adjacency_power_entry(7, 0, 0, DEFAULT_PATH_BUDGET).is_ok());
        assert_eq!(
            g.adjacency_power_entry(0, 0, 0, DEFAULT_PATH_BUDGET),
            Err(Error::ZeroSteps)
        );
        assert!(matches!(
            g.adjacency_power_entry(1, 9, 0, DEFAULT_PATH_BUDGET),
            Err(Error::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn one_minus_power_is_accurate() {
        let c = 1.0 - 1e-9;
        let exact = 1.0 - powi(c, 5);
        let accurate = one_minus_power(c, 1e-9, 5);
        assert!((accurate - 5e-9).abs() < 1e-16);
        assert!((exact - accurate).abs() < 1e-14);
        assert_eq!(one_minus_power(-0.5, 1.5, 3), 1.125);
    }

    fn arb_direction() -> impl Strategy<Value = Direction> {
        (0usize..4).prop_map(|i| Direction::ALL[i])
    }

    proptest! {
        #[test]
        fn powered_rotation_is_an_involution(
            l in 2usize..9,
            x in 0usize..64,
            y in 0usize..64,
            labels in proptest::collection::vec(arb_direction(), 1..6),
        ) {
            let g = grid(l);
            let p = g.path_port(x, y, labels);
            let back = g.rotate_path(&g.rotate_path(&p));
            prop_assert_eq!(back, p);
        }

        #[test]
        fn label_codes_round_trip(labels in proptest::collection::vec(arb_direction(), 0..8)) {
            let code = encode_labels(&labels);
            prop_assert_eq!(decode_labels(code, labels.len()), labels);
        }
    }
}
