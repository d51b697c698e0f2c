//! Multi-step flip-flop quantum walk search on the periodic two-dimensional grid.
//!
//! The walk on the powered graph `G^t` uses a coin register of dimension `4^t`
//! and a shift built from `t` applications of the torus rotation map. Its
//! non-real eigenphases satisfy `cos φ⁽ᵗ⁾ = cosᵗ φ`, which is what lets the
//! oracle complexity of spatial search reach `Θ(√N)` with `t = Θ(log N)`.
//!
//! Layout:
//!
//! * [`graph`]: the torus, its rotation map, graph powering and Fourier spectrum.
//! * [`walk`]: exact dense/sparse simulation of `S_t`, `C_t`, `W_t`, `O_t`
//!   on the full `N·4^t` space. This is the brute-force oracle.
//! * [`search`]: the reduced `2N−1` dimensional search engine, abstract-search
//!   quantities, grid sums and query accounting.
//! * [`tulsi`]: the ancilla-controlled variant with tunable `δ`.
//! * [`szegedy`]: multi-step quantization of symmetric Markov chains.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod graph;
pub mod linalg;
pub mod search;
pub mod sum;
pub mod szegedy;
pub mod tulsi;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Direction, PathPort, Port, TorusGrid};
pub use search::{SearchOptions, SearchResult, SpectralModel};
pub use szegedy::{MarkovChain, SzegedyWalk};
pub use tulsi::TulsiModel;
pub use walk::{FullState, WalkOperator, WalkSpectrum};

pub use num_complex::Complex64;
