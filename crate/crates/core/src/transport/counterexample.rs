//! Concentrated bumps transported by `w(p) = p^2`: the velocity average at the
//! critical point does not decay although the `W^{1,1}` size of the data stays
//! bounded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DispersionMap, TransportSolution, VelocityQuadrature};
use crate::error::{Error, Result};
use crate::fields::{bump, AnalyticField};

/// Trapezoid nodes across the velocity window at `q = 0`.
const ORIGIN_NODES: usize = 4001;

/// Grid cells per `1/lambda` for the Sobolev quadrature.
const W11_CELLS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpW11 {
    pub lambda: f64,
    /// `int |phi_lambda|`
    pub l1: f64,
    /// `int |d_q phi_lambda|`
    pub dq_l1: f64,
    /// `int |d_p phi_lambda|`
    pub dp_l1: f64,
    /// `int |grad phi_lambda|` with the Euclidean length of the gradient.
    pub grad_l1: f64,
    /// `l1 + dq_l1 + dp_l1`.
    pub norm: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub lambda: f64,
    pub t: f64,
    /// `nu_bar(t, 0)` for `nu(0) = phi_lambda` under `w(p) = p^2`.
    pub nu_bar_at_origin: f64,
    /// `lambda sqrt((sqrt(4 t^2 / lambda^2 + 1) - 1) / (2 t^2))`, continued by 1 at `t = 0`.
    pub lower_bound: f64,
    pub w11: BumpW11,
}

/// The closed-form lower bound, in a form that is stable for small `t`.
pub fn counterexample_lower_bound(lambda: f64, t: f64) -> f64 {
    let r = t / lambda;
    (2.0 / (1.0 + (1.0 + 4.0 * r * r).sqrt())).sqrt()
}

/// Sobolev norms of `phi_lambda` by the rectangle rule on a grid of spacing
/// `1 / (cells * lambda)` over its support.
pub fn bump_w11_norms(lambda: f64, cells: f64) -> Result<BumpW11> {
    check_lambda(lambda)?;
    let datum = AnalyticField::BumpLambda { lambda };
    let h = 1.0 / (cells * lambda);
    let r = bump::OUTER_RADIUS / lambda;
    let n = (2.0 * r / h).ceil() as usize + 1;
    let origin = -(n as f64 - 1.0) * h / 2.0;
    let rows: Vec<[f64; 4]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let q = origin + i as f64 * h;
            let mut acc = [0.0; 4];
            for j in 0..n {
                let p = origin + j as f64 * h;
                let x = [q, p];
                let v = datum.real_value(&x);
                if v == 0.0 {
                    continue;
                }
                let g = datum.gradient(&x);
                acc[0] += v.abs();
                acc[1] += g[0].re.abs();
                acc[2] += g[1].re.abs();
                acc[3] += g[0].re.hypot(g[1].re);
            }
            acc
        })
        .collect();
    let mut sums = [0.0; 4];
    for row in &rows {
        for k in 0..4 {
            sums[k] += row[k];
        }
    }
    let cell = h * h;
    let [l1, dq_l1, dp_l1, grad_l1] = sums.map(|s| s * cell);
    Ok(BumpW11 { lambda, l1, dq_l1, dp_l1, grad_l1, norm: l1 + dq_l1 + dp_l1, spacing: h })
}

/// `nu_bar(t, 0)`, its lower bound and the size of the datum for `phi_lambda`
/// transported by `w(p) = p^2`.
pub fn counterexample_profile(lambda: f64, t: f64) -> Result<CounterexampleRecord> {
    check_lambda(lambda)?;
    let sol = TransportSolution::new(AnalyticField::BumpLambda { lambda }, DispersionMap::SquareD1)?;
    let nu_bar_at_origin =
        sol.velocity_average(t, &[0.0], &VelocityQuadrature::Characteristic { nodes: ORIGIN_NODES })?;
    Ok(CounterexampleRecord {
        lambda,
        t,
        nu_bar_at_origin,
        lower_bound: counterexample_lower_bound(lambda, t),
        w11: bump_w11_norms(lambda, W11_CELLS)?,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("bump scale must be at least 1, got {lambda}")));
    }
    Ok(())
}
