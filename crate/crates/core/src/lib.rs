//! Intrinsic dimension estimation for point clouds.
//!
//! Two estimators are built on the exact Euclidean minimum spanning tree:
//!
//! * [`schweinhart`]: reads the dimension off the growth rate of the
//!   power-weighted tree length `E_α = Σ |e|^α` as the sample grows.
//! * [`brito`]: a Bayesian integer estimate from the mean squared vertex
//!   degree, calibrated on uniform hypercubes.
//!
//! Supporting modules provide the point-cloud container and transforms
//! ([`cloud`]), cloud file formats ([`io`]), synthetic validation objects
//! ([`geometry`]), the tree construction itself ([`mst`]) and an LSA
//! embedding pipeline that turns tokenized corpora into clouds ([`lsa`]).
//!
//! With the default `parallel` feature the heavy loops run on rayon. Every
//! result is independent of the number of worker threads.

pub mod brito;
pub mod cloud;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lsa;
pub mod mst;
mod par;
pub mod rng;
pub mod schweinhart;

pub use cloud::{CloudMeta, LiftScheme, PointCloud};
pub use error::{Error, Result};
pub use mst::MinimumSpanningTree;
pub use rng::Seed;
