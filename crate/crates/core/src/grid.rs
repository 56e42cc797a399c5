//! Uniform dyadic grids on `[-R, R]^n`, dyadic cubes and midpoint quadrature.
//!
//! Samples sit at cell centres `-R + (i + 1/2) h`, `h = 2^-J`, so every dyadic
//! cube of level `k <= J` is a union of whole cells.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ext::{pow_abs, root};
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    dim: usize,
    level: u32,
    radius: f64,
    side: usize,
    values: Vec<f64>,
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter("region bounds".into()));
        }
        Ok(Region { lo, hi })
    }

    pub fn cube(dim: usize, radius: f64) -> Self {
        Region { lo: vec![-radius; dim], hi: vec![radius; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v < *b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub k: u32,
    pub m: Vec<i64>,
}

impl DyadicCube {
    pub fn new(k: u32, m: Vec<i64>) -> Self {
        DyadicCube { k, m }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn side(&self) -> f64 {
        (-(self.k as f64)).exp2()
    }

    pub fn center(&self) -> Vec<f64> {
        let s = self.side();
        self.m.iter().map(|&m| (m as f64 + 0.5) * s).collect()
    }

    /// Per-axis bounds of the concentric cube `cQ`.
    pub fn bounds(&self, c: f64) -> Vec<(f64, f64)> {
        let s = self.side();
        self.m
            .iter()
            .map(|&m| {
                let mid = (m as f64 + 0.5) * s;
                (mid - 0.5 * c * s, mid + 0.5 * c * s)
            })
            .collect()
    }
}

/// Dyadic cubes of level `k` that share positive volume with `region`, in lexicographic order.
pub fn cubes_in_box(k: u32, region: &Region) -> Vec<DyadicCube> {
    let scale = (k as f64).exp2();
    let ranges: Vec<(i64, i64)> = region
        .lo
        .iter()
        .zip(&region.hi)
        .map(|(a, b)| ((a * scale).floor() as i64, (b * scale).ceil() as i64))
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|r| r.0 >= r.1) {
        return out;
    }
    loop {
        out.push(DyadicCube::new(k, cur.clone()));
        let mut axis = ranges.len();
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            cur[axis] += 1;
            if cur[axis] < ranges[axis].1 {
                break;
            }
            cur[axis] = ranges[axis].0;
        }
    }
}

/// Row-major shape padded to three axes (unused axes have length 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape3 {
    pub n: [usize; 3],
}

impl Shape3 {
    pub fn new(dim: usize, side: usize) -> Self {
        let mut n = [1usize; 3];
        for v in n.iter_mut().take(dim) {
            *v = side;
        }
        Shape3 { n }
    }

    pub fn from_dims(dims: &[usize]) -> Self {
        let mut n = [1usize; 3];
        n[..dims.len()].copy_from_slice(dims);
        Shape3 { n }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    #[inline]
    pub fn multi(&self, idx: usize) -> [usize; 3] {
        let i2 = idx % self.n[2];
        let r = idx / self.n[2];
        [r / self.n[1], r % self.n[1], i2]
    }
}

impl GridFunction {
    fn check_params(dim: usize, level: u32, radius: f64) -> Result<usize> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if level > 24 {
            return Err(Error::InvalidGrid(format!("level {level} too fine")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGrid("radius must be positive".into()));
        }
        let cells = radius * (level as f64).exp2();
        if cells.fract() != 0.0 {
            return Err(Error::InvalidGrid(format!("radius {radius} is not a multiple of 2^-{level}")));
        }
        let side = 2 * cells as usize;
        let total = side.checked_pow(dim as u32).unwrap_or(usize::MAX);
        if total > 1 << 28 {
            return Err(Error::InvalidGrid("grid too large".into()));
        }
        Ok(side)
    }

    pub fn zeros(dim: usize, level: u32, radius: f64) -> Result<Self> {
        let side = Self::check_params(dim, level, radius)?;
        Ok(GridFunction { dim, level, radius, side, values: vec![0.0; side.pow(dim as u32)] })
    }

    pub fn constant(dim: usize, level: u32, radius: f64, c: f64) -> Result<Self> {
        let mut g = Self::zeros(dim, level, radius)?;
        g.values.iter_mut().for_each(|v| *v = c);
        g.check_finite()?;
        Ok(g)
    }

    pub fn from_values(dim: usize, level: u32, radius: f64, values: Vec<f64>) -> Result<Self> {
        let side = Self::check_params(dim, level, radius)?;
        if values.len() != side.pow(dim as u32) {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                side.pow(dim as u32),
                values.len()
            )));
        }
        let g = GridFunction { dim, level, radius, side, values };
        g.check_finite()?;
        Ok(g)
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn<F>(dim: usize, level: u32, radius: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let mut g = Self::zeros(dim, level, radius)?;
        let shape = g.shape();
        let h = g.spacing();
        let slab = shape.n[1] * shape.n[2];
        par::for_each_chunk(&mut g.values, slab, |i0, chunk| {
            let mut x = [0.0f64; 3];
            x[0] = -radius + (i0 as f64 + 0.5) * h;
            for (j, v) in chunk.iter_mut().enumerate() {
                let i1 = j / shape.n[2];
                let i2 = j % shape.n[2];
                x[1] = -radius + (i1 as f64 + 0.5) * h;
                x[2] = -radius + (i2 as f64 + 0.5) * h;
                *v = f(&x[..dim]);
            }
        });
        g.check_finite()?;
        Ok(g)
    }

    fn check_finite(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    /// Number of cells per axis.
    pub fn side(&self) -> usize {
        self.side
    }
    pub fn spacing(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn shape(&self) -> Shape3 {
        Shape3::new(self.dim, self.side)
    }
    pub fn region(&self) -> Region {
        Region::cube(self.dim, self.radius)
    }

    /// Coordinate of cell centre `i` along any axis.
    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        -self.radius + (i as f64 + 0.5) * self.spacing()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mi = self.shape().multi(idx);
        (0..self.dim).map(|a| self.center(mi[a])).collect()
    }

    /// Index of the cell whose centre is `x`, if `x` is (within 1e-9 cells of) a centre.
    pub fn locate(&self, x: &[f64]) -> Option<[usize; 3]> {
        if x.len() != self.dim {
            return None;
        }
        let h = self.spacing();
        let mut out = [0usize; 3];
        for (a, &xa) in x.iter().enumerate() {
            let u = (xa + self.radius) / h - 0.5;
            let r = u.round();
            if (u - r).abs() > 1e-9 || r < 0.0 || r >= self.side as f64 {
                return None;
            }
            out[a] = r as usize;
        }
        Some(out)
    }

    /// Index of the cell containing `x`; `None` outside the box.
    pub fn nearest(&self, x: &[f64]) -> Option<[usize; 3]> {
        if x.len() != self.dim {
            return None;
        }
        let mut out = [0usize; 3];
        for (a, &xa) in x.iter().enumerate() {
            let u = ((xa + self.radius) / self.spacing()).floor();
            if !(u >= 0.0 && u < self.side as f64) {
                return None;
            }
            out[a] = u as usize;
        }
        Some(out)
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.dim == other.dim && self.level == other.level && self.radius == other.radius
    }

    pub fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(dim {}, J {}, R {}) vs (dim {}, J {}, R {})",
                self.dim, self.level, self.radius, other.dim, other.level, other.radius
            )))
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> GridFunction {
        GridFunction { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn scaled(&self, lambda: f64) -> GridFunction {
        self.map(|v| lambda * v)
    }

    /// Pointwise product with another function on the same grid.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(GridFunction { values, ..self.clone() })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFunction { values, ..self.clone() })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// `‖f‖_{L_p(box)}` by midpoint quadrature; `p = ∞` is the sample maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.values.iter().map(|&v| pow_abs(v, p)).sum();
        root(s * self.cell_volume(), p)
    }

    /// Same norm restricted to cells whose centres lie in `region`.
    pub fn lp_norm_on(&self, p: f64, region: &Region) -> Result<f64> {
        let bounds: Vec<(f64, f64)> = region.lo.iter().copied().zip(region.hi.iter().copied()).collect();
        let ranges = self.ranges_for(&bounds)?;
        Ok(self.lp_over(p, &ranges))
    }

    /// Half-open cell range `[a, b)` whose centres fall in `[lo, hi)`, clamped to the grid.
    pub fn cell_range(&self, lo: f64, hi: f64) -> (usize, usize) {
        let h = self.spacing();
        let conv = |x: f64| -> usize {
            let u = ((x + self.radius) / h - 0.5).ceil();
            u.clamp(0.0, self.side as f64) as usize
        };
        let a = conv(lo);
        let b = conv(hi);
        (a, b.max(a))
    }

    /// Cell ranges for per-axis bounds; error when the intersection is empty.
    pub fn ranges_for(&self, bounds: &[(f64, f64)]) -> Result<[(usize, usize); 3]> {
        if bounds.len() != self.dim {
            return Err(Error::GridMismatch("cube dimension differs from grid".into()));
        }
        let mut r = [(0usize, 1usize); 3];
        for (a, &(lo, hi)) in bounds.iter().enumerate() {
            r[a] = self.cell_range(lo, hi);
            if r[a].0 >= r[a].1 {
                return Err(Error::CubeOutsideDomain);
            }
        }
        Ok(r)
    }

    pub(crate) fn lp_over(&self, p: f64, ranges: &[(usize, usize); 3]) -> f64 {
        let shape = self.shape();
        let mut acc = 0.0;
        let inf = p.is_infinite();
        for i0 in ranges[0].0..ranges[0].1 {
            for i1 in ranges[1].0..ranges[1].1 {
                let base = shape.index([i0, i1, 0]);
                for v in &self.values[base + ranges[2].0..base + ranges[2].1] {
                    if inf {
                        acc = f64::max(acc, v.abs());
                    } else {
                        acc += pow_abs(*v, p);
                    }
                }
            }
        }
        if inf {
            acc
        } else {
            root(acc * self.cell_volume(), p)
        }
    }

    /// Sum of `g(v)` over cells in the ranges, times the cell volume.
    pub(crate) fn integrate_over<G: Fn(f64) -> f64>(&self, ranges: &[(usize, usize); 3], g: G) -> f64 {
        let shape = self.shape();
        let mut acc = 0.0;
        for i0 in ranges[0].0..ranges[0].1 {
            for i1 in ranges[1].0..ranges[1].1 {
                let base = shape.index([i0, i1, 0]);
                for v in &self.values[base + ranges[2].0..base + ranges[2].1] {
                    acc += g(*v);
                }
            }
        }
        acc * self.cell_volume()
    }

    pub(crate) fn max_over<G: Fn(f64) -> f64>(&self, ranges: &[(usize, usize); 3], g: G) -> f64 {
        let shape = self.shape();
        let mut acc = f64::NEG_INFINITY;
        for i0 in ranges[0].0..ranges[0].1 {
            for i1 in ranges[1].0..ranges[1].1 {
                let base = shape.index([i0, i1, 0]);
                for v in &self.values[base + ranges[2].0..base + ranges[2].1] {
                    acc = acc.max(g(*v));
                }
            }
        }
        acc
    }

    /// Number of level-`k` cubes per axis and the smallest cube index.
    pub fn cube_layout(&self, k: u32) -> Result<(usize, i64)> {
        if k > self.level {
            return Err(Error::Resolution(k));
        }
        let per = self.radius * (k as f64).exp2();
        if per.fract() != 0.0 {
            return Err(Error::InvalidGrid(format!("box not aligned with level-{k} cubes")));
        }
        Ok((2 * per as usize, -(per as i64)))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 22 + 32);
        s.push_str(&format!("{},{},{}\n", self.dim, self.level, self.radius));
        for v in &self.values {
            s.push_str(&format!("{v:?}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let parts: Vec<&str> = header.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("bad header '{header}', expected dim,J,R")));
        }
        let dim: usize = parts[0].parse().map_err(|_| Error::Parse("bad dim".into()))?;
        let level: u32 = parts[1].parse().map_err(|_| Error::Parse("bad J".into()))?;
        let radius: f64 = parts[2].parse().map_err(|_| Error::Parse("bad R".into()))?;
        let values = lines
            .map(|l| l.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value '{l}'"))))
            .collect::<Result<Vec<f64>>>()?;
        Self::from_values(dim, level, radius, values)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// `(∫_{cQ} |f|^p)^{1/p}` by midpoint quadrature over the cells of `cQ` inside the box.
pub fn local_lp_norm(f: &GridFunction, p: f64, cube: &DyadicCube, c: f64) -> Result<f64> {
    if !(p > 0.0) || !(c >= 1.0) {
        return Err(Error::InvalidParameter("need p > 0 and c >= 1".into()));
    }
    let ranges = f.ranges_for(&cube.bounds(c))?;
    Ok(f.lp_over(p, &ranges))
}

/// Values attached to every level-`k` cube of a grid's box.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeTable {
    pub k: u32,
    pub dim: usize,
    pub per_axis: usize,
    pub m_lo: i64,
    pub values: Vec<f64>,
}

impl CubeTable {
    pub fn shape(&self) -> Shape3 {
        Shape3::new(self.dim, self.per_axis)
    }

    pub fn index_of(&self, m: &[i64]) -> Option<usize> {
        let mut mi = [0usize; 3];
        for (a, &v) in m.iter().enumerate() {
            let o = v - self.m_lo;
            if o < 0 || o as usize >= self.per_axis {
                return None;
            }
            mi[a] = o as usize;
        }
        Some(self.shape().index(mi))
    }

    pub fn get(&self, m: &[i64]) -> Option<f64> {
        self.index_of(m).map(|i| self.values[i])
    }

    pub fn cube(&self, idx: usize) -> DyadicCube {
        let mi = self.shape().multi(idx);
        DyadicCube::new(self.k, (0..self.dim).map(|a| mi[a] as i64 + self.m_lo).collect())
    }

    /// Clamps an index vector into the table's range.
    pub fn clamp(&self, m: &[i64]) -> Vec<i64> {
        m.iter().map(|&v| v.clamp(self.m_lo, self.m_lo + self.per_axis as i64 - 1)).collect()
    }
}

/// Per-cube reduction over the tiling of the box by level-`k` cubes.
/// `sum = true` returns `h^n Σ g(v)`, otherwise `max g(v)`.
pub fn cube_reduce<G>(f: &GridFunction, k: u32, sum: bool, g: G) -> Result<CubeTable>
where
    G: Fn(f64) -> f64 + Sync + Send,
{
    let (per_axis, m_lo) = f.cube_layout(k)?;
    let shift = f.level - k;
    let dim = f.dim;
    let cshape = Shape3::new(dim, per_axis);
    let block = 1usize << shift;
    let values = par::map_range(cshape.len(), |ci| {
        let cm = cshape.multi(ci);
        let mut ranges = [(0usize, 1usize); 3];
        for a in 0..dim {
            ranges[a] = (cm[a] * block, (cm[a] + 1) * block);
        }
        if sum {
            f.integrate_over(&ranges, &g)
        } else {
            f.max_over(&ranges, &g)
        }
    });
    Ok(CubeTable { k, dim, per_axis, m_lo, values })
}

/// `t_{k,m}`-style table: `‖f‖_{L_p(Q_{k,m})}` for all cubes tiling the box.
pub fn cube_lp_norms(f: &GridFunction, p: f64, k: u32) -> Result<CubeTable> {
    if p.is_infinite() {
        cube_reduce(f, k, false, |v| v.abs())
    } else {
        let mut t = cube_reduce(f, k, true, |v| pow_abs(v, p))?;
        t.values.iter_mut().for_each(|v| *v = root(*v, p));
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubes_unit_interval() {
        let c = cubes_in_box(0, &Region::cube(1, 1.0));
        assert_eq!(c.iter().map(|q| q.m[0]).collect::<Vec<_>>(), vec![-1, 0]);
        let c = cubes_in_box(2, &Region::new(vec![0.0], vec![1.0]).unwrap());
        assert_eq!(c.len(), 4);
        assert_eq!(c[3].m, vec![3]);
        let c = cubes_in_box(1, &Region::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        assert_eq!(c.len(), 4);
        assert_eq!(c[1].m, vec![0, 1]);
    }

    #[test]
    fn constant_norms() {
        let f = GridFunction::constant(1, 8, 1.0, 1.0).unwrap();
        for k in 0..5u32 {
            let q = DyadicCube::new(k, vec![0]);
            let v = local_lp_norm(&f, 2.0, &q, 1.0).unwrap();
            assert!((v - (-(k as f64) / 2.0).exp2()).abs() < 1e-14);
            assert_eq!(local_lp_norm(&f, f64::INFINITY, &q, 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn linear_on_unit_cube() {
        let f = GridFunction::from_fn(1, 10, 1.0, |x| x[0]).unwrap();
        let v = local_lp_norm(&f, 2.0, &DyadicCube::new(0, vec![0]), 1.0).unwrap();
        // midpoint error for x^2 is h^2/12 per unit length
        assert!((v * v - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn outside_cube_errors() {
        let f = GridFunction::constant(1, 4, 1.0, 1.0).unwrap();
        let err = local_lp_norm(&f, 1.0, &DyadicCube::new(0, vec![5]), 1.0).unwrap_err();
        assert_eq!(err, Error::CubeOutsideDomain);
    }

    #[test]
    fn csv_round_trip() {
        let f = GridFunction::from_fn(2, 3, 1.0, |x| (x[0] * 3.1).sin() + x[1] / 7.0).unwrap();
        let g = GridFunction::from_csv(&f.to_csv()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_misaligned_radius() {
        assert!(GridFunction::zeros(1, 2, 0.3).is_err());
        assert!(GridFunction::zeros(4, 2, 1.0).is_err());
    }

    #[test]
    fn tiling_matches_global_norm() {
        let f = GridFunction::from_fn(2, 6, 1.0, |x| (x[0] - 0.2).exp() * x[1]).unwrap();
        for p in [1.0, 2.0] {
            let t = cube_lp_norms(&f, p, 3).unwrap();
            let s: f64 = t.values.iter().map(|v| v.powf(p)).sum();
            let g = f.lp_norm(p).powf(p);
            assert!((s - g).abs() <= 1e-12 * g);
        }
    }

    #[test]
    fn locate_centres() {
        let f = GridFunction::zeros(1, 3, 1.0).unwrap();
        assert_eq!(f.locate(&[f.center(5)]).unwrap()[0], 5);
        assert!(f.locate(&[0.0]).is_none());
    }
}
