//! # netmtl
//!
//! Distributed, streaming multitask learning over graphs.
//!
//! Every agent of a network runs a stochastic-gradient *self-learning* step on
//! its own streaming data and then a *social-learning* step that mixes in
//! information from its neighbors. The social step is where prior knowledge
//! about how the agents' tasks relate gets encoded:
//!
//! | Strategy | Social step | Task prior |
//! |----------|-------------|------------|
//! | `noncooperative` | identity | none |
//! | `laplacian_reg` | `w = (I - mu*eta*L) psi` | smooth over the graph |
//! | `spectral_reg` | S-hop polynomial filter `r(L)` | spectral shape |
//! | `prox_l1` | per-coordinate l1 prox toward neighbors | piecewise constant |
//! | `diffusion` | doubly-stochastic averaging | single task (consensus) |
//! | `subspace_projection` | block combination `A` with `A^i -> P_U` | `W^o` in `Range(U)` |
//! | `overlapping` | per-variable averaging | shared entries |
//! | `clustered` | intra-cluster averaging, inter-cluster prox | clusters |
//!
//! Besides the algorithms the crate carries closed-form steady-state
//! predictors ([`theory`]) and a Monte Carlo harness ([`harness`]) so simulated
//! mean-square deviation can be checked against the predictions.
//!
//! ```
//! use netmtl::graph::{Graph, build_laplacian};
//! use netmtl::theory;
//!
//! let graph = Graph::path(2, 1.0).unwrap();
//! let spectrum = build_laplacian(&graph).unwrap();
//! assert!((spectrum.eigenvalues()[1] - 2.0).abs() < 1e-12);
//! assert!((theory::msd_noncooperative(0.01, 2, &[0.1, 0.1]).network - 1e-3).abs() < 1e-15);
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod graph;
pub mod harness;
pub mod strategies;
pub mod theory;

pub use error::{Error, Result};
