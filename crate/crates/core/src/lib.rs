pub mod battery;
pub mod error;
pub mod function;
pub mod group;
pub mod inequalities;
pub mod linear;
pub mod numeric;
mod optim;
pub mod output;
pub mod sampling;
pub mod solver;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
pub use function::{Exponents, GraphFunction, TailRule};
pub use group::{make_group, CayleyBall, Element, Group, GroupSpec};
pub use solver::{SolveReport, SolverOptions};
