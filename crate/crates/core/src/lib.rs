//! Manifold similarity through random-walk matrices of k-nearest-neighbour
//! graphs, a similarity-gated transfer-learning classifier built on it, the
//! usual point-cloud baselines, and an image pipeline based on grid
//! superpixels.
//!
//! ```
//! use manifoldwalk::datasets::{add_noise, gen_swiss_roll, NoiseSpec};
//! use manifoldwalk::graphs::{adjacency, knn_graph};
//! use manifoldwalk::similarity::{manifold_distance, Variant};
//!
//! let roll = gen_swiss_roll(200, 4, 1).unwrap();
//! let noisy = add_noise(roll.cloud(), NoiseSpec::level(2).unwrap(), 2);
//! let a1 = adjacency(&knn_graph(roll.cloud(), 10, false).unwrap());
//! let a2 = adjacency(&knn_graph(&noisy, 10, false).unwrap());
//! let d = manifold_distance(&a1, &a2, None, Variant::Rows).unwrap();
//! assert!(d.distance > 0.0);
//! ```

pub mod baselines;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod graphs;
pub mod imaging;
pub mod matrix;
pub mod seed;
pub mod similarity;
pub mod stats;
pub mod transfer;

pub use error::{Error, Result};
