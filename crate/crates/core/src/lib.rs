//! Minimal-volume sublevel-set enclosures by even-degree homogeneous
//! polynomials, and the best majorants `t·e^{−g}` / `t·e^{−g^{1/d}}` of
//! log-concave functions built on them.
//!
//! - [`poly`]: homogeneous forms, the canonical monomial basis, sphere
//!   classification.
//! - [`quad`]: moments `∫x^α e^{−g}`, the moment map and sublevel volumes.
//! - [`funcs`]: the log-concave catalog and level-set clouds.
//! - [`enclosure`]: minimal-volume enclosure of a point cloud.
//! - [`outer`]: the searches over `t` for Problems 1 and 2.
//! - [`certify`]: contact-point certificates of Problem 2 solutions.

pub mod certify;
pub mod enclosure;
pub mod error;
pub mod funcs;
pub mod linalg;
pub mod outer;
pub mod poly;
pub mod quad;
pub mod search;

pub use certify::{build_certificate, find_touch_points, Certificate, Verdict};
pub use enclosure::{solve_enclosure, EnclosureProblem, EnclosureSolution};
pub use error::{Error, Result};
pub use funcs::{LogConcaveFn, Mode};
pub use outer::{solve_problem1, solve_problem2, OuterOptions, OuterSolution};
pub use poly::{HomogPoly, MultiIndex, SphereClassification};
pub use quad::SphereRule;
