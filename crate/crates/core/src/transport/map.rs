use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classical velocity map `w: R^d -> R^d` of the transport equation
/// `d_t nu + w(p) . grad_q nu = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DispersionMap {
    /// `w(p) = p`, free streaming.
    Identity { d: usize },
    /// `w(p) = p / sqrt(1 + |p|^2)`.
    Relativistic { d: usize },
    /// `w(p) = p^2` in one dimension.
    SquareD1,
    /// `w(p1, p2) = (p1, p2^2)`, a map whose Jacobian has rank one on `p2 = 0`.
    MixedD2,
}

impl DispersionMap {
    pub fn dim(&self) -> usize {
        match self {
            DispersionMap::Identity { d } | DispersionMap::Relativistic { d } => *d,
            DispersionMap::SquareD1 => 1,
            DispersionMap::MixedD2 => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DispersionMap::Identity { .. } => "identity",
            DispersionMap::Relativistic { .. } => "relativistic",
            DispersionMap::SquareD1 => "square-d1",
            DispersionMap::MixedD2 => "mixed-d2",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > 2 {
            return Err(Error::Unsupported(format!("{} map in dimension {d}; only d = 1, 2", self.name())));
        }
        Ok(())
    }

    pub fn w(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        self.w_into(p, &mut out);
        out
    }

    pub fn w_into(&self, p: &[f64], out: &mut [f64]) {
        match self {
            DispersionMap::Identity { .. } => out.copy_from_slice(p),
            DispersionMap::Relativistic { .. } => {
                let g = (1.0 + p.iter().map(|v| v * v).sum::<f64>()).sqrt();
                for (o, v) in out.iter_mut().zip(p) {
                    *o = v / g;
                }
            }
            DispersionMap::SquareD1 => out[0] = p[0] * p[0],
            DispersionMap::MixedD2 => {
                out[0] = p[0];
                out[1] = p[1] * p[1];
            }
        }
    }

    /// `J[j][i] = d w^j / d p_i`.
    pub fn jacobian(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let d = p.len();
        let mut j = vec![vec![0.0; d]; d];
        match self {
            DispersionMap::Identity { .. } => {
                for (i, row) in j.iter_mut().enumerate() {
                    row[i] = 1.0;
                }
            }
            DispersionMap::Relativistic { .. } => {
                let g2 = 1.0 + p.iter().map(|v| v * v).sum::<f64>();
                let g = g2.sqrt();
                for a in 0..d {
                    for b in 0..d {
                        let delta = if a == b { 1.0 } else { 0.0 };
                        j[a][b] = delta / g - p[a] * p[b] / (g2 * g);
                    }
                }
            }
            DispersionMap::SquareD1 => j[0][0] = 2.0 * p[0],
            DispersionMap::MixedD2 => {
                j[0][0] = 1.0;
                j[1][1] = 2.0 * p[1];
            }
        }
        j
    }

    /// Per-axis factors when `w^j` depends on `p_j` alone.
    pub fn axis_maps(&self) -> Option<Vec<AxisMap>> {
        match self {
            DispersionMap::Identity { d } => Some(vec![AxisMap::Linear; *d]),
            DispersionMap::Relativistic { d: 1 } => Some(vec![AxisMap::Relativistic]),
            DispersionMap::Relativistic { .. } => None,
            DispersionMap::SquareD1 => Some(vec![AxisMap::Square]),
            DispersionMap::MixedD2 => Some(vec![AxisMap::Linear, AxisMap::Square]),
        }
    }

    /// A box containing `w(p_box)`.
    pub fn image_box(&self, p_box: &[(f64, f64)]) -> Vec<(f64, f64)> {
        if let Some(maps) = self.axis_maps() {
            return maps.iter().zip(p_box).map(|(m, &(lo, hi))| m.image(lo, hi)).collect();
        }
        // each component of the relativistic map is dominated by its 1-d version
        p_box
            .iter()
            .map(|&(lo, hi)| {
                let (a, b) = AxisMap::Relativistic.image(lo, hi);
                (a.min(0.0), b.max(0.0))
            })
            .collect()
    }
}

/// A monotone-or-even scalar map used on one velocity axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisMap {
    Linear,
    Relativistic,
    Square,
}

impl AxisMap {
    pub fn eval(&self, p: f64) -> f64 {
        match self {
            AxisMap::Linear => p,
            AxisMap::Relativistic => p / (1.0 + p * p).sqrt(),
            AxisMap::Square => p * p,
        }
    }

    pub fn derivative(&self, p: f64) -> f64 {
        match self {
            AxisMap::Linear => 1.0,
            AxisMap::Relativistic => (1.0 + p * p).powf(-1.5),
            AxisMap::Square => 2.0 * p,
        }
    }

    /// Image of `[lo, hi]`.
    pub fn image(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            AxisMap::Linear | AxisMap::Relativistic => (self.eval(lo), self.eval(hi)),
            AxisMap::Square => {
                let top = (lo * lo).max(hi * hi);
                let bottom = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { (lo * lo).min(hi * hi) };
                (bottom, top)
            }
        }
    }

    /// Disjoint intervals whose union is the preimage of `[lo, hi]`; endpoints
    /// may be infinite.
    pub fn preimage(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        if lo > hi {
            return Vec::new();
        }
        match self {
            AxisMap::Linear => vec![(lo, hi)],
            AxisMap::Relativistic => {
                if lo >= 1.0 || hi <= -1.0 {
                    return Vec::new();
                }
                let inv = |w: f64| {
                    if w <= -1.0 {
                        f64::NEG_INFINITY
                    } else if w >= 1.0 {
                        f64::INFINITY
                    } else {
                        w / (1.0 - w * w).sqrt()
                    }
                };
                vec![(inv(lo), inv(hi))]
            }
            AxisMap::Square => {
                if hi < 0.0 {
                    return Vec::new();
                }
                let b = hi.sqrt();
                if lo <= 0.0 {
                    vec![(-b, b)]
                } else {
                    let a = lo.sqrt();
                    vec![(-b, -a), (a, b)]
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jacobian(map: &DispersionMap, p: &[f64]) -> Vec<Vec<f64>> {
        let d = p.len();
        let h = 1e-6;
        let mut j = vec![vec![0.0; d]; d];
        for i in 0..d {
            let mut pp = p.to_vec();
            let mut pm = p.to_vec();
            pp[i] += h;
            pm[i] -= h;
            let (wp, wm) = (map.w(&pp), map.w(&pm));
            for a in 0..d {
                j[a][i] = (wp[a] - wm[a]) / (2.0 * h);
            }
        }
        j
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let maps = [
            (DispersionMap::Identity { d: 2 }, vec![0.3, -1.2]),
            (DispersionMap::Relativistic { d: 1 }, vec![0.7]),
            (DispersionMap::Relativistic { d: 2 }, vec![0.4, -2.0]),
            (DispersionMap::SquareD1, vec![-1.5]),
            (DispersionMap::MixedD2, vec![0.2, 1.1]),
        ];
        for (map, p) in maps {
            let exact = map.jacobian(&p);
            let fd = fd_jacobian(&map, &p);
            for a in 0..p.len() {
                for b in 0..p.len() {
                    assert!((exact[a][b] - fd[a][b]).abs() < 1e-6, "{map:?} at {p:?}");
                }
            }
        }
    }

    #[test]
    fn preimages_invert_the_axis_maps() {
        for m in [AxisMap::Linear, AxisMap::Relativistic, AxisMap::Square] {
            for (lo, hi) in [(0.1, 0.5), (-0.4, 0.3), (-0.9, -0.2)] {
                for (a, b) in m.preimage(lo, hi) {
                    for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
                        let p = a + s * (b - a);
                        let w = m.eval(p);
                        assert!(w >= lo - 1e-12 && w <= hi + 1e-12, "{m:?}: w({p}) = {w}");
                    }
                }
            }
        }
        assert!(AxisMap::Square.preimage(-2.0, -1.0).is_empty());
        assert_eq!(AxisMap::Square.preimage(1.0, 4.0), vec![(-2.0, -1.0), (1.0, 2.0)]);
        assert!(AxisMap::Relativistic.preimage(1.0, 2.0).is_empty());
        assert_eq!(AxisMap::Relativistic.preimage(0.5, 3.0)[0].1, f64::INFINITY);
    }

    #[test]
    fn image_boxes_contain_sampled_images() {
        let map = DispersionMap::Relativistic { d: 2 };
        let b = [(-1.0, 3.0), (-2.0, 0.5)];
        let img = map.image_box(&b);
        for i in 0..=10 {
            for j in 0..=10 {
                let p = [-1.0 + 0.4 * i as f64, -2.0 + 0.25 * j as f64];
                let w = map.w(&p);
                for a in 0..2 {
                    assert!(w[a] >= img[a].0 - 1e-15 && w[a] <= img[a].1 + 1e-15);
                }
            }
        }
        assert_eq!(AxisMap::Square.image(-1.0, 3.0), (0.0, 9.0));
        assert_eq!(AxisMap::Square.image(1.0, 3.0), (1.0, 9.0));
    }
}
