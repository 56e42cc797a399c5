//! Weighted Sobolev norms, the shell-integrated trace weights `γ_k` and the trace inequality
//! experiment. The ambient space is the trace plane (first `d` coordinates) times the normal
//! variables (remaining `codim` coordinates).

use serde::{Deserialize, Serialize};

use crate::diff::{diff_norm, DiffParams};
use crate::error::{invalid, Error, Result};
use crate::ext::{pow_abs, root};
use crate::grid::{GridFunction, Region, Shape3};
use crate::norm::NormParams;
use crate::par;
use crate::weights::WeightSequence;

#[derive(Clone, Debug, PartialEq)]
pub struct SobolevParams {
    pub l: u32,
    pub p: f64,
    pub gamma: GridFunction,
    /// Integration region; the whole box when `None`.
    pub region: Option<Region>,
}

fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Central stencil of `D^o` in cell units: `δ^o` for even `o`, `μδ^o` for odd `o`.
fn stencil(o: u32) -> Vec<f64> {
    let mut c = vec![1.0f64];
    for _ in 0..o / 2 {
        c = conv(&c, &[1.0, -2.0, 1.0]);
    }
    if o % 2 == 1 {
        c = conv(&c, &[-0.5, 0.0, 0.5]);
    }
    c
}

/// Applies the order-`o` derivative along `axis` with zero extension.
fn derivative_axis(f: &GridFunction, axis: usize, o: u32) -> Result<GridFunction> {
    if o == 0 {
        return Ok(f.clone());
    }
    let st = stencil(o);
    let half = (st.len() / 2) as i64;
    let h = f.spacing().powi(o as i32);
    let shape = f.shape();
    let n = shape.n[axis] as i64;
    let vals = f.values();
    let out = par::map_range(f.len(), |idx| {
        let mut mi = shape.multi(idx);
        let base = mi[axis] as i64;
        let mut acc = 0.0;
        for (j, c) in st.iter().enumerate() {
            let p = base + j as i64 - half;
            if *c != 0.0 && p >= 0 && p < n {
                mi[axis] = p as usize;
                acc += c * vals[shape.index(mi)];
            }
        }
        acc / h
    });
    GridFunction::from_values(f.dim(), f.level(), f.radius(), out)
}

fn multi_indices(dim: usize, max: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=max {
        for b in 0..=(if dim > 1 { max - a } else { 0 }) {
            for c in 0..=(if dim > 2 { max - a - b } else { 0 }) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// `Σ_{|α|≤l} ‖γ D^α f‖_{L_p}` with second-order central difference derivatives.
pub fn sobolev_norm(f: &GridFunction, params: &SobolevParams) -> Result<f64> {
    if !(params.p > 1.0 && params.p.is_finite()) {
        return invalid("p must lie in (1, inf)");
    }
    f.ensure_same_grid(&params.gamma)?;
    if params.gamma.values().iter().any(|v| !(*v > 0.0)) {
        return invalid("gamma must be positive");
    }
    let ranges = match &params.region {
        Some(r) => {
            let b: Vec<(f64, f64)> = r.lo.iter().zip(&r.hi).map(|(a, b)| (*a, *b)).collect();
            f.ranges_for(&b)?
        }
        None => {
            let mut r = [(0usize, 1usize); 3];
            for a in r.iter_mut().take(f.dim()) {
                *a = (0, f.side());
            }
            r
        }
    };
    let mut total = 0.0;
    for alpha in multi_indices(f.dim(), params.l) {
        let mut d = f.clone();
        for (axis, o) in alpha.iter().enumerate().take(f.dim()) {
            d = derivative_axis(&d, axis, *o)?;
        }
        let w = d.mul(&params.gamma)?;
        total += w.lp_over(params.p, &ranges);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceWeights {
    pub p: f64,
    pub levels: Vec<GridFunction>,
}

impl TraceWeights {
    /// As a weight sequence with `σ₁ = σ₂ = p` and unit α-sequences.
    pub fn to_sequence(&self) -> Result<WeightSequence> {
        let ones = vec![1.0; self.levels.len()];
        WeightSequence::new(self.levels.clone(), self.p, self.p, self.p, ones.clone(), ones, 0.0)
    }
}

fn check_split(ambient: &GridFunction, trace_dim: usize, codim: usize) -> Result<()> {
    if trace_dim == 0 || codim == 0 || trace_dim + codim != ambient.dim() {
        return invalid("trace_dim + codim must equal the ambient dimension, both positive");
    }
    Ok(())
}

/// `γ_k(x') = (∫_{Q_{k,m}} ∫_{2^{−k−1} ≤ |x''| < 2^{−k}} γ dx'' dx')^{1/p}` for `x' ∈ Q_{k,m}`.
pub fn trace_weights(gamma: &GridFunction, p: f64, k_max: u32, trace_dim: usize, codim: usize) -> Result<TraceWeights> {
    check_split(gamma, trace_dim, codim)?;
    if !(p > 0.0 && p.is_finite()) {
        return invalid("p must be positive and finite");
    }
    if gamma.level() < k_max + 3 {
        return Err(Error::Resolution(k_max));
    }
    let side = gamma.side();
    let tshape = Shape3::new(trace_dim, side);
    let shape = gamma.shape();
    let nshape = Shape3::new(codim, side);
    // normal-direction cell volume; the trace directions are integrated by cube_reduce
    let vol = gamma.spacing().powi(codim as i32);
    let levels = par::map_range(k_max as usize + 1, |k| -> Result<GridFunction> {
        let lo = (-(k as f64) - 1.0).exp2();
        let hi = (-(k as f64)).exp2();
        // normal cells in the shell
        let shell: Vec<usize> = (0..nshape.len())
            .filter(|&j| {
                let mj = nshape.multi(j);
                let r2: f64 = (0..codim).map(|a| gamma.center(mj[a]).powi(2)).sum();
                let r = r2.sqrt();
                r >= lo && r < hi
            })
            .collect();
        // per trace point: ∫ over the shell
        let line: Vec<f64> = (0..tshape.len())
            .map(|t| {
                let mt = tshape.multi(t);
                shell
                    .iter()
                    .map(|&j| {
                        let mj = nshape.multi(j);
                        let mut full = [0usize; 3];
                        full[..trace_dim].copy_from_slice(&mt[..trace_dim]);
                        full[trace_dim..trace_dim + codim].copy_from_slice(&mj[..codim]);
                        gamma.values()[shape.index(full)]
                    })
                    .sum::<f64>()
                    * vol
            })
            .collect();
        let g = GridFunction::from_values(trace_dim, gamma.level(), gamma.radius(), line)?;
        let sums = crate::grid::cube_reduce(&g, k as u32, true, |v| v)?;
        let cs = sums.shape();
        let shift = gamma.level() - k as u32;
        let vals = (0..g.len())
            .map(|i| {
                let mi = tshape.multi(i);
                sums.values[cs.index([mi[0] >> shift, mi[1] >> shift, mi[2] >> shift])].powf(1.0 / p)
            })
            .collect();
        GridFunction::from_values(trace_dim, gamma.level(), gamma.radius(), vals)
    });
    Ok(TraceWeights { p, levels: levels.into_iter().collect::<Result<Vec<_>>>()? })
}

/// Restriction to the plane `x'' = 0`: the mean over the `2^codim` cells nearest to it.
pub fn restrict_to_plane(f: &GridFunction, trace_dim: usize, codim: usize) -> Result<GridFunction> {
    check_split(f, trace_dim, codim)?;
    let side = f.side();
    let mid = side / 2;
    let tshape = Shape3::new(trace_dim, side);
    let shape = f.shape();
    let corners = 1usize << codim;
    let vals = (0..tshape.len())
        .map(|t| {
            let mt = tshape.multi(t);
            let mut acc = 0.0;
            for c in 0..corners {
                let mut full = [0usize; 3];
                full[..trace_dim].copy_from_slice(&mt[..trace_dim]);
                for a in 0..codim {
                    full[trace_dim + a] = if (c >> a) & 1 == 1 { mid } else { mid - 1 };
                }
                acc += f.values()[shape.index(full)];
            }
            acc / corners as f64
        })
        .collect();
    GridFunction::from_values(trace_dim, f.level(), f.radius(), vals)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `‖f|_{plane}‖` in the difference norm with weights `γ_k` (`r = 1`, `q = p`) over
/// `‖f‖_{W^l_p(γ)}`.
pub fn trace_experiment(
    f: &GridFunction,
    gamma: &GridFunction,
    p: f64,
    l: u32,
    k_max: u32,
    trace_dim: usize,
) -> Result<TraceReport> {
    let codim = f.dim().checked_sub(trace_dim).ok_or_else(|| Error::InvalidParameter("trace_dim too large".into()))?;
    if l as usize <= codim {
        return Err(Error::Hypothesis(format!("trace inequality needs l > codim (l = {l}, codim = {codim})")));
    }
    let tw = trace_weights(gamma, p, k_max, trace_dim, codim)?;
    let seq = tw.to_sequence()?;
    let phi = restrict_to_plane(f, trace_dim, codim)?;
    let lhs = diff_norm(&phi, &seq, &NormParams::new(p, p, k_max)?, &DiffParams::new(l, 1.0)?)?.value;
    let rhs = sobolev_norm(f, &SobolevParams { l, p, gamma: gamma.clone(), region: None })?;
    let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(TraceReport { lhs, rhs, ratio })
}

/// `‖f‖_{L_p}` of a weighted field; shared by callers comparing trace sides.
pub fn weighted_norm(f: &GridFunction, w: &GridFunction, p: f64) -> Result<f64> {
    f.ensure_same_grid(w)?;
    let s: f64 = f.values().iter().zip(w.values()).map(|(a, b)| pow_abs(a * b, p)).sum();
    Ok(root(s * f.cell_volume(), p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils() {
        assert_eq!(stencil(1), vec![-0.5, 0.0, 0.5]);
        assert_eq!(stencil(2), vec![1.0, -2.0, 1.0]);
        assert_eq!(stencil(3), vec![-0.5, 1.0, 0.0, -1.0, 0.5]);
        assert_eq!(stencil(4), vec![1.0, -4.0, 6.0, -4.0, 1.0]);
    }

    #[test]
    fn sobolev_of_line() {
        let f = GridFunction::from_fn(1, 10, 2.0, |x| x[0]).unwrap();
        let gamma = GridFunction::constant(1, 10, 2.0, 1.0).unwrap();
        let region = Some(Region::new(vec![0.0], vec![1.0]).unwrap());
        let params = SobolevParams { l: 1, p: 2.0, gamma: gamma.clone(), region };
        let v = sobolev_norm(&f, &params).unwrap();
        let want = (1.0f64 / 3.0).sqrt() + 1.0;
        assert!((v - want).abs() < 0.01 * want);
        let doubled = SobolevParams { gamma: gamma.scaled(2.0), ..params.clone() };
        assert!((sobolev_norm(&f, &doubled).unwrap() - 2.0 * v).abs() < 1e-12 * v);
    }

    #[test]
    fn shell_volumes() {
        let gamma = GridFunction::constant(2, 7, 1.0, 1.0).unwrap();
        let tw = trace_weights(&gamma, 2.0, 4, 1, 1).unwrap();
        for (k, g) in tw.levels.iter().enumerate() {
            let want = (-(2.0 * k as f64) / 2.0).exp2();
            assert!(g.values().iter().all(|v| (v - want).abs() < 0.01 * want), "k={k}");
        }
    }

    #[test]
    fn zero_function_trace() {
        let f = GridFunction::zeros(2, 6, 1.0).unwrap();
        let gamma = GridFunction::constant(2, 6, 1.0, 1.0).unwrap();
        let r = trace_experiment(&f, &gamma, 2.0, 2, 3, 1).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert!(matches!(trace_experiment(&f, &gamma, 2.0, 1, 3, 1), Err(Error::Hypothesis(_))));
    }
}
