//! Finite differences, the averaged local modulus `δ^l_r`, the sliding local `L_r` term,
//! the difference norm and the single-average variant `Δ̄^l_r`.
//!
//! Integrals over `y ∈ x + 2^{−k}I^n` use the trapezoid rule on the grid lattice (half weight on
//! the window faces). Integrals over `h ∈ 2^{−k}I^n` use the trapezoid rule on the sublattice with
//! `H_HALF` steps per half-window, so every level is resolved alike and piecewise linear
//! integrands in `h` with kinks on that lattice are exact.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ext::{pow_abs, root};
use crate::grid::{GridFunction, Shape3};
use crate::norm::{lq_combine, weighted_lp, NormParams, NormValue};
use crate::par;
use crate::weights::WeightSequence;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffParams {
    pub l: u32,
    #[serde(with = "crate::ext")]
    pub r: f64,
}

impl DiffParams {
    pub fn new(l: u32, r: f64) -> Result<Self> {
        if l == 0 || !(r > 0.0) {
            return invalid("need l >= 1 and r > 0");
        }
        Ok(DiffParams { l, r })
    }
}

fn binomials(l: u32) -> Vec<f64> {
    let mut c = vec![1.0f64; l as usize + 1];
    for i in 1..=l as usize {
        c[i] = c[i - 1] * (l as usize + 1 - i) as f64 / i as f64;
    }
    c
}

/// Zero-extended sample lookup.
#[inline]
fn sample(vals: &[f64], shape: Shape3, dim: usize, idx: [i64; 3]) -> f64 {
    let mut u = [0usize; 3];
    for a in 0..dim {
        if idx[a] < 0 || idx[a] >= shape.n[a] as i64 {
            return 0.0;
        }
        u[a] = idx[a] as usize;
    }
    vals[shape.index(u)]
}

/// `Σ_i (−1)^{l+i} C(l,i) f(y + i·step)` with signed cell indices.
#[inline]
fn diff_at(vals: &[f64], shape: Shape3, dim: usize, y: [i64; 3], step: [i64; 3], binom: &[f64]) -> f64 {
    let l = binom.len() - 1;
    let mut acc = 0.0;
    for (i, c) in binom.iter().enumerate() {
        let sign = if (l + i) % 2 == 0 { 1.0 } else { -1.0 };
        let ii = i as i64;
        let p = [y[0] + ii * step[0], y[1] + ii * step[1], y[2] + ii * step[2]];
        acc += sign * c * sample(vals, shape, dim, p);
    }
    acc
}

/// `Δ^l(h) f` on the grid; `h` must be a multiple of the spacing in every component.
pub fn finite_difference(f: &GridFunction, h: &[f64], l: u32) -> Result<GridFunction> {
    if h.len() != f.dim() {
        return Err(Error::GridMismatch("step dimension differs from grid".into()));
    }
    let mut step = [0i64; 3];
    for (a, v) in h.iter().enumerate() {
        let cells = v / f.spacing();
        if (cells - cells.round()).abs() > 1e-9 {
            return invalid("difference step is not aligned with the grid");
        }
        if l as f64 * v.abs() >= 2.0 * f.radius() {
            return invalid("l|h| exceeds the box");
        }
        step[a] = cells.round() as i64;
    }
    let binom = binomials(l);
    let shape = f.shape();
    let dim = f.dim();
    let vals = f.values();
    let out = par::map_range(f.len(), |idx| {
        let mi = shape.multi(idx);
        diff_at(vals, shape, dim, [mi[0] as i64, mi[1] as i64, mi[2] as i64], step, &binom)
    });
    GridFunction::from_values(dim, f.level(), f.radius(), out)
}

fn trap_weight(j: i64, a: i64) -> f64 {
    if j.abs() == a {
        0.5
    } else {
        1.0
    }
}

/// Trapezoid steps per half-window of the `h` integral.
const H_HALF: i64 = 8;

/// Window half-width in cells for level `k`.
fn window_cells(f: &GridFunction, k: u32) -> Result<i64> {
    if f.level() < k + 3 {
        return Err(Error::Resolution(k));
    }
    Ok(1i64 << (f.level() - k))
}

/// Offsets and trapezoid weights (including the cell volume) of the `h` quadrature for half-width `a`.
fn h_lattice(f: &GridFunction, a: i64) -> Vec<([i64; 3], f64)> {
    let dim = f.dim();
    let stride = (a / H_HALF).max(1);
    let half = a / stride;
    let hvol = (stride as f64 * f.spacing()).powi(dim as i32);
    let hshape = Shape3::new(dim, 2 * half as usize + 1);
    (0..hshape.len())
        .map(|hi| {
            let m = hshape.multi(hi);
            let mut s = [0i64; 3];
            let mut w = hvol;
            for ax in 0..dim {
                let j = m[ax] as i64 - half;
                s[ax] = j * stride;
                w *= trap_weight(j, half);
            }
            (s, w)
        })
        .collect()
}

/// `G(y) = ∫_{2^{−k}I^n} |Δ^l(h) f(y)|^r dh` (or the sup for `r = ∞`) on the grid extended by
/// `A` cells on every side, returned with its shape.
fn g_field(f: &GridFunction, k: u32, l: u32, r: f64) -> Result<(Vec<f64>, Shape3, i64)> {
    let a = window_cells(f, k)?;
    let dim = f.dim();
    let ext = f.side() + 2 * a as usize;
    let eshape = Shape3::new(dim, ext);
    // zero padding wide enough for every stencil point y + i h
    let pad = (l as i64 + 1) * a;
    let shape = f.shape();
    let pshape = Shape3::new(dim, f.side() + 2 * pad as usize);
    let mut padded = vec![0.0; pshape.len()];
    for (i, v) in f.values().iter().enumerate() {
        let mut m = shape.multi(i);
        for c in m.iter_mut().take(dim) {
            *c += pad as usize;
        }
        padded[pshape.index(m)] = *v;
    }
    let strides = [(pshape.n[1] * pshape.n[2]) as i64, pshape.n[2] as i64, 1];
    let lin = |s: [i64; 3]| s[0] * strides[0] + s[1] * strides[1] + s[2] * strides[2];
    let coef: Vec<f64> = binomials(l)
        .into_iter()
        .enumerate()
        .map(|(i, c)| if (l as usize + i) % 2 == 0 { c } else { -c })
        .collect();
    let hnodes: Vec<(i64, f64)> = h_lattice(f, a).into_iter().map(|(s, w)| (lin(s), w)).collect();
    let inf = r.is_infinite();
    let g = par::map_range(eshape.len(), |e| {
        let m = eshape.multi(e);
        let mut y = [0i64; 3];
        for ax in 0..dim {
            y[ax] = m[ax] as i64 - a + pad;
        }
        let base = lin(y);
        let mut acc = 0.0f64;
        for &(off, w) in &hnodes {
            let mut d = 0.0;
            for (i, c) in coef.iter().enumerate() {
                d += c * padded[(base + i as i64 * off) as usize];
            }
            if inf {
                acc = acc.max(d.abs());
            } else {
                acc += w * pow_abs(d, r);
            }
        }
        acc
    });
    Ok((g, eshape, a))
}

/// Trapezoid window sum (or max) of radius `a` along `axis`, shrinking that axis by `2a`.
fn window_axis(data: &[f64], shape: Shape3, axis: usize, a: i64, hmul: f64, max: bool) -> (Vec<f64>, Shape3) {
    let mut n = shape.n;
    n[axis] -= 2 * a as usize;
    let oshape = Shape3 { n };
    let out = par::map_range(oshape.len(), |o| {
        let mut mi = oshape.multi(o);
        let base = mi[axis];
        let mut acc = 0.0f64;
        for i in -a..=a {
            mi[axis] = (base as i64 + a + i) as usize;
            let v = data[shape.index(mi)];
            if max {
                acc = acc.max(v);
            } else {
                acc += trap_weight(i, a) * v;
            }
        }
        if max {
            acc
        } else {
            acc * hmul
        }
    });
    (out, oshape)
}

fn window_all(mut data: Vec<f64>, mut shape: Shape3, dim: usize, a: i64, h: f64, max: bool) -> Vec<f64> {
    for axis in 0..dim {
        let (d, s) = window_axis(&data, shape, axis, a, h, max);
        data = d;
        shape = s;
    }
    data
}

/// The field `x ↦ δ^l_r(x + 2^{−k}I^n) f` on the grid points.
pub fn delta_field(f: &GridFunction, k: u32, l: u32, r: f64) -> Result<GridFunction> {
    let (g, eshape, a) = g_field(f, k, l, r)?;
    let inf = r.is_infinite();
    let s = window_all(g, eshape, f.dim(), a, f.spacing(), inf);
    let pre = (2.0 * k as f64 * f.dim() as f64).exp2();
    let vals = if inf { s } else { s.into_iter().map(|v| root(pre * v, r)).collect() };
    GridFunction::from_values(f.dim(), f.level(), f.radius(), vals)
}

/// `δ^l_r(x + 2^{−k}I^n) f` at the grid point of the cell containing `x`, by direct double summation.
pub fn delta_lr(f: &GridFunction, x: &[f64], k: u32, l: u32, r: f64) -> Result<f64> {
    let a = window_cells(f, k)?;
    let c = f.nearest(x).ok_or(Error::CubeOutsideDomain)?;
    let dim = f.dim();
    let wshape = Shape3::new(dim, 2 * a as usize + 1);
    let binom = binomials(l);
    let inf = r.is_infinite();
    let shape = f.shape();
    let hnodes = h_lattice(f, a);
    let rows = par::map_range(wshape.len(), |yi| {
        let my = wshape.multi(yi);
        let mut y = [0i64; 3];
        let mut wy = 1.0;
        for ax in 0..dim {
            let o = my[ax] as i64 - a;
            y[ax] = c[ax] as i64 + o;
            wy *= trap_weight(o, a);
        }
        let mut acc = 0.0f64;
        for (s, wh) in &hnodes {
            let d = diff_at(f.values(), shape, dim, y, *s, &binom);
            if inf {
                acc = acc.max(d.abs());
            } else {
                acc += wy * wh * pow_abs(d, r);
            }
        }
        acc
    });
    if inf {
        return Ok(rows.into_iter().fold(0.0, f64::max));
    }
    let pre = (2.0 * k as f64 * dim as f64).exp2();
    Ok(root(pre * f.cell_volume() * rows.into_iter().sum::<f64>(), r))
}

/// The field `x ↦ ‖f‖_{L_r(x + I^n)}`.
pub fn sliding_field(f: &GridFunction, r: f64) -> Result<GridFunction> {
    let a = 1i64 << f.level();
    let dim = f.dim();
    let ext = f.side() + 2 * a as usize;
    let eshape = Shape3::new(dim, ext);
    let shape = f.shape();
    let inf = r.is_infinite();
    let padded = par::map_range(eshape.len(), |e| {
        let m = eshape.multi(e);
        let mut y = [0i64; 3];
        for ax in 0..dim {
            y[ax] = m[ax] as i64 - a;
        }
        let v = sample(f.values(), shape, dim, y);
        if inf {
            v.abs()
        } else {
            pow_abs(v, r)
        }
    });
    let s = window_all(padded, eshape, dim, a, f.spacing(), inf);
    let vals = if inf { s } else { s.into_iter().map(|v| root(v, r)).collect() };
    GridFunction::from_values(dim, f.level(), f.radius(), vals)
}

/// `‖f‖_{L_r(x + I^n)}` at the grid point of the cell containing `x`.
pub fn sliding_lr(f: &GridFunction, x: &[f64], r: f64) -> Result<f64> {
    let c = f.nearest(x).ok_or(Error::CubeOutsideDomain)?;
    let field = sliding_field(f, r)?;
    Ok(field.values()[f.shape().index(c)])
}

/// `(Σ_{k≤K} ‖t_k δ^l_r(·+2^{−k}I^n) f‖_p^q)^{1/q} + ‖t₀ ‖f‖_{L_r(·+I^n)}‖_p`.
pub fn diff_norm(f: &GridFunction, t: &WeightSequence, params: &NormParams, dp: &DiffParams) -> Result<NormValue> {
    t.ensure_levels(params.k_max)?;
    window_cells(f, params.k_max)?;
    t.level(0).ensure_same_grid(f)?;
    let fields = (0..=params.k_max).map(|k| delta_field(f, k, dp.l, dp.r)).collect::<Result<Vec<_>>>()?;
    let terms = fields
        .iter()
        .enumerate()
        .map(|(k, d)| weighted_lp(t.level(k as u32).values(), d.values(), params.p, f.cell_volume()))
        .collect();
    let mut v = lq_combine(terms, params.q);
    v.value += zero_order(f, t, params.p, dp.r)?;
    Ok(v)
}

fn zero_order(f: &GridFunction, t: &WeightSequence, p: f64, r: f64) -> Result<f64> {
    let s = sliding_field(f, r)?;
    Ok(weighted_lp(t.level(0).values(), s.values(), p, f.cell_volume()))
}

/// `Δ̄^l_r(2^{−k}) f(x) = (2^{kn} ∫_{2^{−k}I^n} |Δ^l(h) f(x)|^r dh)^{1/r}` on the grid points.
pub fn averaged_diff(f: &GridFunction, k: u32, l: u32, r: f64) -> Result<GridFunction> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid("r must lie in (0, inf)");
    }
    let (g, eshape, a) = g_field(f, k, l, r)?;
    let shape = f.shape();
    let pre = (k as f64 * f.dim() as f64).exp2();
    let vals = (0..f.len())
        .map(|i| {
            let m = shape.multi(i);
            let mut e = [0usize; 3];
            for ax in 0..f.dim() {
                e[ax] = m[ax] + a as usize;
            }
            root(pre * g[eshape.index(e)], r)
        })
        .collect();
    GridFunction::from_values(f.dim(), f.level(), f.radius(), vals)
}

/// `(Σ_{1≤k≤K} ‖t_k Δ̄^l_r(2^{−k}) f‖_p^q)^{1/q} + ‖t₀ ‖f‖_{L_r(·+I^n)}‖_p`.
pub fn averaged_diff_norm(f: &GridFunction, t: &WeightSequence, params: &NormParams, dp: &DiffParams) -> Result<NormValue> {
    t.ensure_levels(params.k_max)?;
    if params.k_max == 0 {
        return invalid("averaged difference norm needs K >= 1");
    }
    let terms = (1..=params.k_max)
        .map(|k| -> Result<f64> {
            let d = averaged_diff(f, k, dp.l, dp.r)?;
            Ok(weighted_lp(t.level(k).values(), d.values(), params.p, f.cell_volume()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut v = lq_combine(terms, params.q);
    v.value += zero_order(f, t, params.p, dp.r)?;
    Ok(v)
}
