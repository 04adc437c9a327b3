//! Hybrid-diffusion graph convolutional networks.
//!
//! The pipeline propagates node information in two stages: first through
//! feature-space neighborhoods via diffusion maps, then through the graph
//! adjacency via a two-layer GCN. Training optionally adds a smoothness
//! regularizer that weights prediction differences on edges by the
//! diffusion distance between their endpoints.
//!
//! Modules:
//! - [`graph`]: CSR graphs and the symmetrically normalized adjacency operator
//! - [`diffusion`]: Gaussian kernel, Markov normalization, spectral basis,
//!   diffusion coordinates and distances
//! - [`model`]: two-layer GCN forward pass
//! - [`training`]: hybrid loss, hand-derived backprop, Adam, training loop
//! - [`data`]: dataset model, plain-text format, noise injection, synthetic data
//! - [`cli`]: end-to-end commands (train / sweep / noise / similarity / stats / diffuse)

pub mod cli;
pub mod data;
pub mod diffusion;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod model;
pub mod training;

/// Dense n x d node feature matrix (raw features or diffusion coordinates).
pub type FeatureMatrix = ndarray::Array2<f64>;

pub use error::{Error, Result};
