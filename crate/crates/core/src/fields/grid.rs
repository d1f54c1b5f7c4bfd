use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on a box in one or two dimensions.
///
/// Nodes sit at `origin + i * spacing` for `i in 0..points`; the box is the
/// half-open interval `[origin, origin + extent)` per axis. Values are stored
/// row-major with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    origin: Vec<f64>,
    extent: Vec<f64>,
    points: Vec<usize>,
}

pub const MIN_POINTS: usize = 8;

impl GridSpec {
    pub fn new(origin: Vec<f64>, extent: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        let dim = origin.len();
        if dim == 0 || extent.len() != dim || points.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "axis counts disagree: origin {}, extent {}, points {}",
                origin.len(),
                extent.len(),
                points.len()
            )));
        }
        for axis in 0..dim {
            if !(extent[axis] > 0.0 && extent[axis].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "extent on axis {axis} must be positive, got {}",
                    extent[axis]
                )));
            }
            if !origin[axis].is_finite() {
                return Err(Error::InvalidGrid(format!("origin on axis {axis} is not finite")));
            }
            if points[axis] < MIN_POINTS {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} has {} points, at least {MIN_POINTS} required",
                    points[axis]
                )));
            }
        }
        Ok(Self { origin, extent, points })
    }

    /// One-dimensional grid on `[-half_width, half_width)`.
    pub fn symmetric(half_width: f64, points: usize) -> Result<Self> {
        Self::new(vec![-half_width], vec![2.0 * half_width], vec![points])
    }

    /// Grid on the box `prod [-h_i, h_i)`.
    pub fn symmetric_nd(half_widths: &[f64], points: &[usize]) -> Result<Self> {
        Self::new(
            half_widths.iter().map(|h| -h).collect(),
            half_widths.iter().map(|h| 2.0 * h).collect(),
            points.to_vec(),
        )
    }

    /// Grid covering `[lo, hi)` per axis.
    pub fn from_box(bounds: &[(f64, f64)], points: &[usize]) -> Result<Self> {
        Self::new(bounds.iter().map(|b| b.0).collect(), bounds.iter().map(|b| b.1 - b.0).collect(), points.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent[axis] / self.points[axis] as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(0.0, f64::max)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// `(lo, hi)` of the periodic box on `axis`.
    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        (self.origin[axis], self.origin[axis] + self.extent[axis])
    }

    /// Smallest distance from the physical origin to the box boundary.
    pub fn half_extent(&self) -> f64 {
        (0..self.dim())
            .map(|a| {
                let (lo, hi) = self.bounds(a);
                (-lo).min(hi)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + index as f64 * self.spacing(axis)
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Stride of `axis` in the flat row-major layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.points[axis + 1..].iter().product()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.points[axis];
            flat /= self.points[axis];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(flat, &mut out);
        out
    }

    pub fn point_into(&self, mut flat: usize, out: &mut [f64]) {
        for axis in (0..self.dim()).rev() {
            let i = flat % self.points[axis];
            flat /= self.points[axis];
            out[axis] = self.coord(axis, i);
        }
    }

    /// Angular wavenumbers of the discrete Fourier modes on `axis`, in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.points[axis];
        let scale = 2.0 * PI / self.extent[axis];
        (0..n)
            .map(|j| {
                let j = j as i64;
                let signed = if j < n.div_ceil(2) as i64 { j } else { j - n as i64 };
                signed as f64 * scale
            })
            .collect()
    }

    /// Index of the Nyquist mode on `axis`, when the point count is even.
    pub fn nyquist_index(&self, axis: usize) -> Option<usize> {
        let n = self.points[axis];
        n.is_multiple_of(2).then_some(n / 2)
    }

    /// The one-dimensional grid along `axis`.
    pub fn axis_grid(&self, axis: usize) -> GridSpec {
        GridSpec { origin: vec![self.origin[axis]], extent: vec![self.extent[axis]], points: vec![self.points[axis]] }
    }

    /// Whether `[lo, hi]` lies inside the box on `axis`.
    pub fn covers(&self, axis: usize, lo: f64, hi: f64) -> bool {
        let (blo, bhi) = self.bounds(axis);
        lo >= blo && hi <= bhi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_and_degenerate_grids() {
        assert!(GridSpec::symmetric(1.0, 4).is_err());
        assert!(GridSpec::symmetric(0.0, 64).is_err());
        assert!(GridSpec::new(vec![0.0], vec![1.0, 1.0], vec![8]).is_err());
    }

    #[test]
    fn symmetric_grid_with_even_points_contains_origin() {
        let g = GridSpec::symmetric(20.0, 256).unwrap();
        assert_eq!(g.coord(0, 128), 0.0);
        assert!((g.spacing(0) - 40.0 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn wavenumbers_follow_fft_order() {
        let g = GridSpec::symmetric(std::f64::consts::PI, 8).unwrap();
        let k = g.wavenumbers(0);
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_eq!(g.nyquist_index(0), Some(4));
    }

    #[test]
    fn flat_and_multi_index_agree() {
        let g = GridSpec::symmetric_nd(&[1.0, 2.0], &[8, 16]).unwrap();
        assert_eq!(g.stride(0), 16);
        for flat in [0, 5, 17, 127] {
            let idx = g.multi_index(flat);
            assert_eq!(idx[0] * 16 + idx[1], flat);
            let p = g.point(flat);
            assert_eq!(p[0], g.coord(0, idx[0]));
            assert_eq!(p[1], g.coord(1, idx[1]));
        }
    }
}
