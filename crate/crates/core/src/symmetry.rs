//! First-order commuting operators of the dispersive equations.
//!
//! The operators have the form `W = a t d_j^{m-1} + b x_j` on one axis. On the
//! Fourier side `x_j` acts as `i d_{xi_j}` and `[sigma(D), x_j]` has symbol
//! `-i d_{xi_j} sigma = -P'(-xi_j)`, so `W` commutes with `d_t - sigma(D)` exactly
//! when the polynomial identity
//!
//! ```text
//! a (i xi)^{m-1} + b P'(-xi) = 0
//! ```
//!
//! holds. Matching coefficients gives a linear system in `(a, b)`; its null
//! space, normalized to `a = m`, is the operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldKind, SampledField};
use crate::spectral::{propagate, DispersionPolynomial, Evolution};

const SOLVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CommutingOperator {
    /// `t d_j + (i/2) x_j`.
    SchrodingerBoost { axis: usize },
    /// `a t d_j^{order - 1} + b x_j`.
    MonomialBoost { order: u32, a: Complex64, b: Complex64, axis: usize },
}

impl CommutingOperator {
    pub fn axis(&self) -> usize {
        match *self {
            Self::SchrodingerBoost { axis } | Self::MonomialBoost { axis, .. } => axis,
        }
    }

    /// `(derivative order, a, b)`.
    pub fn coefficients(&self) -> (u32, Complex64, Complex64) {
        match *self {
            Self::SchrodingerBoost { .. } => (1, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)),
            Self::MonomialBoost { order, a, b, .. } => (order - 1, a, b),
        }
    }

    /// Copy with `a` multiplied by `factor`.
    pub fn perturbed(&self, factor: f64) -> Self {
        let (n, a, b) = self.coefficients();
        Self::MonomialBoost { order: n + 1, a: a * factor, b, axis: self.axis() }
    }

    pub fn describe(&self) -> String {
        let (n, a, b) = self.coefficients();
        format!("({a}) t d^{n} + ({b}) x_{}", self.axis())
    }
}

/// The commuting operator of `disp` on axis 0.
pub fn derive_commuting_operator(disp: &DispersionPolynomial) -> Result<CommutingOperator> {
    derive_commuting_operator_on_axis(disp, 0)
}

pub fn derive_commuting_operator_on_axis(disp: &DispersionPolynomial, axis: usize) -> Result<CommutingOperator> {
    if axis >= disp.dim() {
        return Err(Error::ShapeMismatch(format!("axis {axis} for a {}-d equation", disp.dim())));
    }
    solve_for_polynomial(disp.p_coeffs(), axis)
}

/// Solves the coefficient system for an arbitrary real `P` (lowest degree first).
pub fn solve_for_polynomial(p_coeffs: &[f64], axis: usize) -> Result<CommutingOperator> {
    let m = p_coeffs.iter().rposition(|c| *c != 0.0).ok_or_else(|| Error::NoSolution("P vanishes".into()))?;
    if m < 2 {
        return Err(Error::NoSolution(format!("P has degree {m} < 2")));
    }
    // coefficient of xi^n in (i xi)^{m-1} and in P'(-xi)
    let i_pow = Complex64::i().powu(m as u32 - 1);
    let rows: Vec<(Complex64, Complex64)> = (0..m)
        .map(|n| {
            let c1 = if n == m - 1 { i_pow } else { Complex64::new(0.0, 0.0) };
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let c2 = Complex64::new(sign * (n + 1) as f64 * p_coeffs[n + 1], 0.0);
            (c1, c2)
        })
        .collect();
    let pivot = rows
        .iter()
        .max_by(|x, y| (x.0.norm_sqr() + x.1.norm_sqr()).total_cmp(&(y.0.norm_sqr() + y.1.norm_sqr())))
        .copied()
        .expect("m >= 2 rows");
    let scale = (pivot.0.norm_sqr() + pivot.1.norm_sqr()).sqrt();
    if scale == 0.0 {
        return Err(Error::NoSolution("coefficient system vanishes".into()));
    }
    let (mut a, mut b) = (pivot.1, -pivot.0);
    if rows.iter().any(|(c1, c2)| (c1 * a + c2 * b).norm() > SOLVE_TOL * scale * scale) {
        return Err(Error::NoSolution("coefficient system has full rank".into()));
    }
    if a.norm() <= SOLVE_TOL * scale {
        return Err(Error::NoSolution("the time-derivative coefficient vanishes".into()));
    }
    let norm = Complex64::new(m as f64, 0.0) / a;
    a *= norm;
    b *= norm;
    Ok(CommutingOperator::MonomialBoost { order: m as u32, a: snap(a), b: snap(b), axis })
}

fn snap(z: Complex64) -> Complex64 {
    let r = |x: f64| if (x - x.round()).abs() < SOLVE_TOL * x.abs().max(1.0) { x.round() } else { x };
    Complex64::new(r(z.re), r(z.im))
}

/// `W(t) u`.
pub fn apply_operator(op: &CommutingOperator, u: &SampledField, t: f64) -> Result<SampledField> {
    let axis = op.axis();
    if axis >= u.grid().dim() {
        return Err(Error::ShapeMismatch(format!("axis {axis} on a {}-d grid", u.grid().dim())));
    }
    let (n, a, b) = op.coefficients();
    let deriv = u.spectral_derivative_axis(axis, n)?;
    let x_u = u.times_coordinate(axis);
    let real = u.is_real() && (a * t).im == 0.0 && b.im == 0.0;
    let kind = if real { FieldKind::Real } else { FieldKind::Complex };
    let values = deriv.values().iter().zip(x_u.values()).map(|(d, x)| a * t * d + b * x).collect();
    u.with_values(values, kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    /// The reference `||W(0) u0||` vanished and `value` is an absolute norm.
    pub absolute: bool,
}

/// `||W(t) U(t) u0 - U(t) W(0) u0|| / ||W(0) u0||`.
pub fn commutation_residual(
    op: &CommutingOperator,
    disp: &DispersionPolynomial,
    u0: &SampledField,
    t: f64,
) -> Result<Residual> {
    let w0 = apply_operator(op, u0, 0.0)?;
    let lhs = apply_operator(op, &propagate(u0, disp, t)?, t)?;
    let rhs = propagate(&w0, disp, t)?;
    let diff = lhs.sub(&rhs)?.l2_norm();
    let denom = w0.l2_norm();
    if denom == 0.0 {
        return Ok(Residual { value: diff, absolute: true });
    }
    Ok(Residual { value: diff / denom, absolute: false })
}

/// `||W_1(t) ... W_k(t) u|| ` with the last operator applied first.
pub fn operator_word_norm(ops: &[CommutingOperator], u: &SampledField, t: f64) -> Result<f64> {
    let mut v = u.clone();
    for op in ops.iter().rev() {
        v = apply_operator(op, &v, t)?;
    }
    Ok(v.l2_norm())
}

/// `t -> ||W^alpha u(t)||` for the word `ops`.
pub fn conserved_operator_norm(
    u0: &SampledField,
    ops: &[CommutingOperator],
    disp: &DispersionPolynomial,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let ev = Evolution::new(u0, disp)?;
    times.iter().map(|&t| Ok((t, operator_word_norm(ops, &ev.at(t), t)?))).collect()
}

/// `||[W_1, W_2] u|| / (||W_1 W_2 u|| + ||W_2 W_1 u||)` at time `t`.
pub fn commutator_norm(first: &CommutingOperator, second: &CommutingOperator, u: &SampledField, t: f64) -> Result<f64> {
    let ab = apply_operator(first, &apply_operator(second, u, t)?, t)?;
    let ba = apply_operator(second, &apply_operator(first, u, t)?, t)?;
    let scale = ab.l2_norm() + ba.l2_norm();
    let diff = ab.sub(&ba)?.l2_norm();
    Ok(if scale == 0.0 { diff } else { diff / scale })
}
