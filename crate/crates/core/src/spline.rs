//! Dyadic tensor-product B-splines, a local least-squares quasi-interpolant, the telescoping
//! spline decomposition and the weighted coefficient norm.
//!
//! `N^l` is the cardinal B-spline of degree `l` on `[0, l+1]`, and
//! `N^l_{k,m}(x) = Π_i N^l(2^k x_i − m_i)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ext::{pow_abs, root};
use crate::grid::{DyadicCube, GridFunction, Shape3};
use crate::norm::{lq_combine, NormValue};
use crate::par;
use crate::weights::{weight_coeff_table, WeightSequence};

/// Values `N^l(u + i)`, `i = 0..=l`, for `u ∈ [0, 1)`.
pub fn bspline_pieces(l: u32, u: f64) -> Vec<f64> {
    let mut b = vec![1.0];
    for d in 1..=l as usize {
        let df = d as f64;
        let mut nb = vec![0.0; d + 1];
        for (i, v) in nb.iter_mut().enumerate() {
            let t = u + i as f64;
            let cur = if i < d { b[i] } else { 0.0 };
            let prev = if i >= 1 { b[i - 1] } else { 0.0 };
            *v = (t * cur + (df + 1.0 - t) * prev) / df;
        }
        b = nb;
    }
    b
}

/// Cardinal B-spline `N^l(t)`, supported on `[0, l+1]`.
pub fn cardinal_bspline(l: u32, t: f64) -> f64 {
    let j = t.floor();
    if j < 0.0 || j > l as f64 {
        return 0.0;
    }
    bspline_pieces(l, t - j)[j as usize]
}

pub fn bspline_eval(l: u32, k: u32, m: &[i64], x: &[f64]) -> f64 {
    let s = (k as f64).exp2();
    m.iter().zip(x).map(|(mi, xi)| cardinal_bspline(l, s * xi - *mi as f64)).product()
}

/// Coefficients `β_{k,m}` on the index box `[m_lo, m_lo + per_axis)^n`, tied to a sampling grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineLayer {
    pub k: u32,
    pub l: u32,
    pub dim: usize,
    pub level: u32,
    pub radius: f64,
    pub m_lo: i64,
    pub per_axis: usize,
    pub coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    k: u32,
    l: u32,
    dim: usize,
    #[serde(rename = "J")]
    level: u32,
    #[serde(rename = "R")]
    radius: f64,
    entries: Vec<(Vec<i64>, f64)>,
}

impl SplineLayer {
    /// Zero layer covering every spline that meets the box of the given grid.
    pub fn zeros(k: u32, l: u32, dim: usize, level: u32, radius: f64) -> Result<Self> {
        if level < k + 3 {
            return Err(Error::Resolution(k));
        }
        let per = radius * (k as f64).exp2();
        if per.fract() != 0.0 {
            return invalid("box not aligned with level-k cubes");
        }
        let per = per as i64;
        let per_axis = (2 * per + l as i64) as usize;
        Ok(SplineLayer {
            k,
            l,
            dim,
            level,
            radius,
            m_lo: -per - l as i64,
            per_axis,
            coeffs: vec![0.0; per_axis.pow(dim as u32)],
        })
    }

    pub fn shape(&self) -> Shape3 {
        Shape3::new(self.dim, self.per_axis)
    }

    pub fn index_of(&self, m: &[i64]) -> Option<usize> {
        let mut u = [0usize; 3];
        for (a, v) in m.iter().enumerate() {
            let o = v - self.m_lo;
            if o < 0 || o >= self.per_axis as i64 {
                return None;
            }
            u[a] = o as usize;
        }
        Some(self.shape().index(u))
    }

    pub fn m_of(&self, idx: usize) -> Vec<i64> {
        let mi = self.shape().multi(idx);
        (0..self.dim).map(|a| mi[a] as i64 + self.m_lo).collect()
    }

    pub fn get(&self, m: &[i64]) -> f64 {
        self.index_of(m).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn scaled(&self, lambda: f64) -> SplineLayer {
        let mut s = self.clone();
        s.coeffs.iter_mut().for_each(|c| *c *= lambda);
        s
    }

    pub fn sub(&self, other: &SplineLayer) -> Result<SplineLayer> {
        if self.k != other.k || self.l != other.l || self.per_axis != other.per_axis || self.dim != other.dim {
            return Err(Error::GridMismatch("spline layers differ".into()));
        }
        let mut s = self.clone();
        s.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a -= b);
        Ok(s)
    }

    /// `S(x) = Σ_m β_m N^l_{k,m}(x)` at the grid points.
    pub fn evaluate(&self) -> Result<GridFunction> {
        let g = GridFunction::zeros(self.dim, self.level, self.radius)?;
        let side = g.side();
        let scale = (self.k as f64).exp2();
        // per-axis (first spline index, spline values)
        let axis: Vec<(i64, Vec<f64>)> = (0..side)
            .map(|i| {
                let t = scale * g.center(i);
                let j = t.floor();
                let pieces = bspline_pieces(self.l, t - j);
                (j as i64 - self.l as i64, pieces.into_iter().rev().collect())
            })
            .collect();
        let shape = g.shape();
        let l1 = self.l as usize + 1;
        let dim = self.dim;
        let vals = par::map_range(g.len(), |idx| {
            let mi = shape.multi(idx);
            let mut acc = 0.0;
            let count = l1.pow(dim as u32);
            for c in 0..count {
                let mut rem = c;
                let mut m = [0i64; 3];
                let mut w = 1.0;
                for a in 0..dim {
                    let o = rem % l1;
                    rem /= l1;
                    let (first, vs) = &axis[mi[a]];
                    m[a] = *first + o as i64;
                    w *= vs[o];
                }
                if w != 0.0 {
                    acc += w * self.get(&m[..dim]);
                }
            }
            acc
        });
        GridFunction::from_values(self.dim, self.level, self.radius, vals)
    }

    /// The same spline written at level `k + 1` (two-scale relation).
    pub fn refine(&self) -> Result<SplineLayer> {
        let mut out = SplineLayer::zeros(self.k + 1, self.l, self.dim, self.level, self.radius)?;
        let mask: Vec<f64> = {
            let l1 = self.l as usize + 1;
            let mut c = vec![1.0f64; l1 + 1];
            for i in 1..=l1 {
                c[i] = c[i - 1] * (l1 + 1 - i) as f64 / i as f64;
            }
            c.iter().map(|v| v * (-(self.l as f64)).exp2()).collect()
        };
        let taps = mask.len();
        let count = taps.pow(self.dim as u32);
        for (idx, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let m = self.m_of(idx);
            for code in 0..count {
                let mut rem = code;
                let mut w = *c;
                let mut fine = [0i64; 3];
                for a in 0..self.dim {
                    let i = rem % taps;
                    rem /= taps;
                    w *= mask[i];
                    fine[a] = 2 * m[a] + i as i64;
                }
                if let Some(j) = out.index_of(&fine[..self.dim]) {
                    out.coeffs[j] += w;
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let entries = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (self.m_of(i), *c))
            .collect();
        let j = LayerJson { k: self.k, l: self.l, dim: self.dim, level: self.level, radius: self.radius, entries };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(text: &str) -> Result<SplineLayer> {
        let j: LayerJson = serde_json::from_str(text)?;
        let mut s = SplineLayer::zeros(j.k, j.l, j.dim, j.level, j.radius)?;
        for (m, b) in j.entries {
            if m.len() != j.dim {
                return invalid("spline index dimension");
            }
            let i = s.index_of(&m).ok_or_else(|| Error::InvalidParameter(format!("spline index {m:?} outside the box")))?;
            s.coeffs[i] = b;
        }
        Ok(s)
    }
}

/// Row of the local least-squares projector giving `β_m` from the samples of cube `m + ⌊l/2⌋`.
fn dual_weights(l: u32, samples: usize) -> Result<Vec<f64>> {
    let l1 = l as usize + 1;
    let b = DMatrix::from_fn(samples, l1, |i, j| {
        let u = (i as f64 + 0.5) / samples as f64;
        cardinal_bspline(l, (l as usize - j) as f64 + u)
    });
    let gram = b.transpose() * &b;
    let inv = gram.try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    let p = inv * b.transpose();
    let row = l as usize - (l / 2) as usize;
    Ok(p.row(row).iter().copied().collect())
}

/// `Q_k f = Σ_m β_{k,m}(f) N^l_{k,m}` with `β_{k,m}` the local least-squares coefficient on the
/// cube `m + ⌊l/2⌋`. Reproduces every spline of degree `l` at level `k`, hence all polynomials of degree ≤ l.
pub fn quasi_interpolant(f: &GridFunction, k: u32, l: u32) -> Result<SplineLayer> {
    let mut layer = SplineLayer::zeros(k, l, f.dim(), f.level(), f.radius())?;
    let s = 1usize << (f.level() - k);
    let w = dual_weights(l, s)?;
    let shift = (l / 2) as i64;
    let dim = f.dim();
    let shape = f.shape();
    let side = f.side() as i64;
    let cells_lo = -((f.radius() * (k as f64).exp2()) as i64);
    let vals = f.values();
    let coeffs = par::map_range(layer.coeffs.len(), |idx| {
        let m = layer.m_of(idx);
        // first grid cell of cube m + shift, per axis
        let mut start = [0i64; 3];
        for a in 0..dim {
            start[a] = (m[a] + shift - cells_lo) * s as i64;
        }
        let count = s.pow(dim as u32);
        let mut acc = 0.0;
        for c in 0..count {
            let mut rem = c;
            let mut wt = 1.0;
            let mut u = [0usize; 3];
            let mut inside = true;
            for a in 0..dim {
                let o = rem % s;
                rem /= s;
                wt *= w[o];
                let g = start[a] + o as i64;
                if g < 0 || g >= side {
                    inside = false;
                    break;
                }
                u[a] = g as usize;
            }
            if inside {
                acc += wt * vals[shape.index(u)];
            }
        }
        acc
    });
    layer.coeffs = coeffs;
    Ok(layer)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplineDecomposition {
    pub layers: Vec<SplineLayer>,
    pub r: f64,
    /// `‖f − Q_K f‖_{L_r}` over the box.
    pub residual_norm: f64,
}

impl SplineDecomposition {
    /// `Σ_k v_k` evaluated on the grid.
    pub fn reconstruct(&self) -> Result<GridFunction> {
        let mut acc = self.layers[0].evaluate()?;
        for v in &self.layers[1..] {
            let e = v.evaluate()?;
            acc.values_mut().iter_mut().zip(e.values()).for_each(|(a, b)| *a += b);
        }
        Ok(acc)
    }

    pub fn scaled(&self, lambda: f64) -> SplineDecomposition {
        SplineDecomposition {
            layers: self.layers.iter().map(|v| v.scaled(lambda)).collect(),
            r: self.r,
            residual_norm: self.residual_norm * lambda.abs(),
        }
    }
}

const CANCEL_TOL: f64 = 64.0 * f64::EPSILON;

/// `v_0 = Q_0 f`, `v_k = Q_k f − Q_{k−1} f` written at level `k`.
pub fn spline_decompose(f: &GridFunction, l: u32, k_max: u32, r: f64) -> Result<SplineDecomposition> {
    if !(r > 0.0) {
        return invalid("r must be positive");
    }
    let qs = par::map_range(k_max as usize + 1, |k| quasi_interpolant(f, k as u32, l))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut layers = vec![qs[0].clone()];
    for k in 1..qs.len() {
        let coarse = qs[k - 1].refine()?;
        let mut v = qs[k].sub(&coarse)?;
        // differences at the rounding level of the level's coefficients are zero
        let scale = qs[k].coeffs.iter().chain(&coarse.coeffs).fold(0.0f64, |m, c| m.max(c.abs()));
        v.coeffs.iter_mut().filter(|d| d.abs() <= CANCEL_TOL * scale).for_each(|d| *d = 0.0);
        layers.push(v);
    }
    let top = qs[k_max as usize].evaluate()?;
    let residual_norm = f.sub(&top)?.lp_norm(r);
    Ok(SplineDecomposition { layers, r, residual_norm })
}

/// `(Σ_k (Σ_m t_{k,m}^p |β_{k,m}|^p)^{q/p})^{1/q}` for this decomposition; spline indices
/// outside the box use the nearest boundary cube's `t_{k,m}`.
pub fn coeff_norm(dec: &SplineDecomposition, t: &WeightSequence, p: f64, q: f64) -> Result<NormValue> {
    let k_max = dec.layers.len() as u32 - 1;
    t.ensure_levels(k_max)?;
    let terms = dec
        .layers
        .iter()
        .map(|v| -> Result<f64> {
            let table = weight_coeff_table(t, v.k)?;
            let mut acc = 0.0f64;
            for (i, b) in v.coeffs.iter().enumerate() {
                if *b == 0.0 {
                    continue;
                }
                let tm = table.get(&table.clamp(&v.m_of(i))).unwrap_or(0.0);
                if p.is_infinite() {
                    acc = acc.max((tm * b).abs());
                } else {
                    acc += pow_abs(tm * b, p);
                }
            }
            Ok(if p.is_infinite() { acc } else { root(acc, p) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(lq_combine(terms, q))
}

/// The three quantities of the local norm equivalence on `Q = Q_{k,m}` and the implied constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCoeffReport {
    pub norm_q: f64,
    pub coeff_sum: f64,
    pub norm_wide: f64,
    /// `coeff_sum / norm_q`: the lower inequality holds with any `C₁` at most this.
    pub c1: f64,
    /// `coeff_sum / (2^{kn(1/r₂−1/r₁)} norm_wide)`: the upper inequality needs `C₂` at least this.
    pub c2: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Scale factor of the wide cube: the supports of all splines meeting `Q`.
pub fn c3(l: u32) -> f64 {
    2.0 * l as f64 + 1.0
}

pub fn verify_local_coeff_equivalence(s: &SplineLayer, r1: f64, r2: f64, q: &DyadicCube) -> Result<LocalCoeffReport> {
    if q.k != s.k || q.dim() != s.dim {
        return invalid("cube must sit on the layer's level and dimension");
    }
    let g = s.evaluate()?;
    let norm_q = crate::grid::local_lp_norm(&g, r1, q, 1.0)?;
    let wide = g.ranges_for(&q.bounds(c3(s.l)))?;
    let norm_wide = g.lp_over(r2, &wide);
    let n = s.dim as f64;
    let k = s.k as f64;
    let l1 = s.l as i64 + 1;
    let count = (l1 as usize).pow(s.dim as u32);
    let mut acc = 0.0f64;
    for c in 0..count {
        let mut rem = c;
        let mut m = vec![0i64; s.dim];
        for (a, v) in m.iter_mut().enumerate() {
            *v = q.m[a] - s.l as i64 + (rem % l1 as usize) as i64;
            rem /= l1 as usize;
        }
        let b = s.get(&m);
        if r1.is_infinite() {
            acc = acc.max(b.abs());
        } else {
            acc += pow_abs(b, r1);
        }
    }
    let coeff_sum = if r1.is_infinite() { acc } else { root(acc * (-k * n).exp2(), r1) };
    let inv = |r: f64| if r.is_infinite() { 0.0 } else { 1.0 / r };
    let scale = (k * n * (inv(r2) - inv(r1))).exp2();
    let c1 = if norm_q > 0.0 { coeff_sum / norm_q } else { f64::INFINITY };
    let c2 = if coeff_sum == 0.0 { 0.0 } else { coeff_sum / (scale * norm_wide) };
    Ok(LocalCoeffReport {
        norm_q,
        coeff_sum,
        norm_wide,
        c1,
        c2,
        lower_ok: norm_q == 0.0 || c1 > 0.0,
        upper_ok: c2.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinal_values() {
        assert!((cardinal_bspline(1, 1.0) - 1.0).abs() < 1e-15);
        assert!((cardinal_bspline(2, 1.5) - 0.75).abs() < 1e-15);
        assert_eq!(cardinal_bspline(3, 4.0), 0.0);
        assert_eq!(cardinal_bspline(3, -0.1), 0.0);
        for l in 0..=4 {
            for u in [0.0, 0.13, 0.5, 0.99] {
                let s: f64 = bspline_pieces(l, u).iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_reproduced() {
        let f = GridFunction::constant(1, 8, 2.0, 1.0).unwrap();
        let q = quasi_interpolant(&f, 2, 2).unwrap();
        // splines fully inside the box see only the constant
        for (i, c) in q.coeffs.iter().enumerate() {
            let m = q.m_of(i)[0];
            if m >= -7 && m <= 4 {
                assert!((c - 1.0).abs() < 1e-10, "m={m}: {c}");
            }
        }
    }

    #[test]
    fn spline_recovered() {
        let mut s = SplineLayer::zeros(1, 3, 1, 8, 2.0).unwrap();
        for (i, c) in s.coeffs.iter_mut().enumerate() {
            *c = ((i * 7919) % 13) as f64 - 6.0;
        }
        let f = s.evaluate().unwrap();
        let q = quasi_interpolant(&f, 1, 3).unwrap();
        // indices whose sampling cube m + 1 lies inside the box
        for m in -3..=0 {
            assert!((q.get(&[m]) - s.get(&[m])).abs() < 1e-8, "m={m}");
        }
    }

    #[test]
    fn refinement_preserves_values() {
        let mut s = SplineLayer::zeros(1, 2, 2, 6, 1.0).unwrap();
        for (i, c) in s.coeffs.iter_mut().enumerate() {
            *c = (i as f64 * 0.37).sin();
        }
        let a = s.evaluate().unwrap();
        let b = s.refine().unwrap().evaluate().unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn decomposition_of_level0_spline() {
        let mut s = SplineLayer::zeros(0, 2, 1, 9, 2.0).unwrap();
        s.coeffs[2] = 1.0;
        s.coeffs[3] = -0.5;
        let f = s.evaluate().unwrap();
        let d = spline_decompose(&f, 2, 4, 2.0).unwrap();
        for v in &d.layers[1..] {
            assert!(v.coeffs.iter().all(|c| c.abs() < 1e-8));
        }
        assert!(d.residual_norm < 1e-8);
    }

    #[test]
    fn json_round_trip() {
        let mut s = SplineLayer::zeros(2, 2, 2, 6, 1.0).unwrap();
        s.coeffs[5] = 0.25;
        s.coeffs[17] = -1.5;
        assert_eq!(SplineLayer::from_json(&s.to_json().unwrap()).unwrap(), s);
    }

    #[test]
    fn single_spline_coeff_norm() {
        let mut s = SplineLayer::zeros(0, 1, 1, 6, 1.0).unwrap();
        let i = s.index_of(&[0]).unwrap();
        s.coeffs[i] = 1.0;
        let dec = SplineDecomposition { layers: vec![s], r: 2.0, residual_norm: 0.0 };
        let t = crate::weights::make_weights(&crate::weights::WeightSpec::two_ks(0.0, 2.0, 1.0), 1, 6, 1.0, 0).unwrap();
        assert!((coeff_norm(&dec, &t, 2.0, 2.0).unwrap().value - 1.0).abs() < 1e-14);
    }
}
