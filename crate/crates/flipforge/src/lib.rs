//! Flip sequences between edge-labelled triangulations of convex polygons
//! and of combinatorial (maximal planar) triangulations.

pub mod approx;
pub mod comb;
pub mod config;
pub mod convex;
pub mod error;
pub mod gen;
pub mod labelsort;
pub mod oracle;
pub mod parallel;
pub mod sortmodels;

pub use comb::CombTriangulation;
pub use convex::{ConvexTriangulation, Diagonal, FlipSequence, Label, LabelledTriangulation, Labelling};
pub use error::{Error, Result};
pub use parallel::SimFlipSequence;
