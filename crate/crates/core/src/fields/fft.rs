//! Thin n-dimensional wrapper over `rustfft`.
//!
//! Forward transforms are unnormalised; the inverse divides by the number of
//! points so that `inverse(forward(v)) == v`.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::grid::GridSpec;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform_axis(values: &mut [Complex64], grid: &GridSpec, axis: usize, direction: FftDirection) {
    let n = grid.points()[axis];
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
    let stride = grid.stride(axis);
    if stride == 1 {
        fft.process(values);
        return;
    }
    let block = n * stride;
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for outer in (0..values.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = values[base + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                values[base + j * stride] = *v;
            }
        }
    }
}

pub fn forward(values: &mut [Complex64], grid: &GridSpec) {
    for axis in 0..grid.dim() {
        transform_axis(values, grid, axis, FftDirection::Forward);
    }
}

pub fn inverse(values: &mut [Complex64], grid: &GridSpec) {
    for axis in 0..grid.dim() {
        transform_axis(values, grid, axis, FftDirection::Inverse);
    }
    let scale = 1.0 / grid.len() as f64;
    for v in values.iter_mut() {
        *v *= scale;
    }
}

/// Applies `multiplier(mode_wavenumbers)` on the Fourier side.
pub fn apply_multiplier<F>(values: &[Complex64], grid: &GridSpec, mut multiplier: F) -> Vec<Complex64>
where
    F: FnMut(&[f64]) -> Complex64,
{
    let mut buf = values.to_vec();
    forward(&mut buf, grid);
    let ks: Vec<Vec<f64>> = (0..grid.dim()).map(|a| grid.wavenumbers(a)).collect();
    let mut xi = vec![0.0; grid.dim()];
    for (flat, v) in buf.iter_mut().enumerate() {
        let mut rest = flat;
        for axis in (0..grid.dim()).rev() {
            let n = grid.points()[axis];
            xi[axis] = ks[axis][rest % n];
            rest /= n;
        }
        *v *= multiplier(&xi);
    }
    inverse(&mut buf, grid);
    buf
}
