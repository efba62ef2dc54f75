//! Direct solver for the `p = 2` Dirichlet problem.
//!
//! For `p = 2` the minimizer is the solution of the linear system
//! `Σ_s (h(g s^{-1}) - h(g)) = 0` on the interior with the boundary values
//! moved to the right-hand side. The system is assembled densely and solved
//! by LU, so it is meant for balls of a few thousand vertices.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::group::CayleyBall;

/// Largest interior handled by the dense solve.
pub const MAX_DIRECT_INTERIOR: usize = 6000;

/// Harmonic extension of `boundary_values` into the interior.
pub fn harmonic_extension(ball: &CayleyBall, boundary_values: &BTreeMap<usize, f64>) -> Result<Vec<f64>> {
    let interior = ball.interior();
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    if interior.len() > MAX_DIRECT_INTERIOR {
        return Err(Error::InvalidParameter(format!(
            "direct solve limited to {MAX_DIRECT_INTERIOR} interior vertices, ball has {}",
            interior.len()
        )));
    }
    let mut slot = vec![usize::MAX; ball.len()];
    for (k, &i) in interior.iter().enumerate() {
        slot[i] = k;
    }
    let m = interior.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (k, &i) in interior.iter().enumerate() {
        a[(k, k)] = ball.degree() as f64;
        for s in 0..ball.degree() {
            let j = ball.neighbor(i, s).expect("interior vertex");
            if slot[j] != usize::MAX {
                a[(k, slot[j])] -= 1.0;
            } else {
                rhs[k] += *boundary_values.get(&j).ok_or(Error::MissingBoundaryValue(j))?;
            }
        }
    }
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidParameter("singular Dirichlet system".into()))?;
    let mut out = vec![0.0; ball.len()];
    for i in 0..ball.len() {
        out[i] = if slot[i] != usize::MAX {
            x[slot[i]]
        } else {
            *boundary_values.get(&i).ok_or(Error::MissingBoundaryValue(i))?
        };
    }
    Ok(out)
}
