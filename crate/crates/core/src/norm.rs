//! Shared pieces of the `l_q(L_p)` norms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::ext::{self, pow_abs, root};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    #[serde(with = "ext")]
    pub p: f64,
    #[serde(with = "ext")]
    pub q: f64,
    #[serde(rename = "K")]
    pub k_max: u32,
}

impl NormParams {
    pub fn new(p: f64, q: f64, k_max: u32) -> Result<Self> {
        if !(p > 0.0 && q > 0.0) {
            return invalid("p and q must be positive");
        }
        Ok(NormParams { p, q, k_max })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    /// Share of the last level in the total (`q`-th powers; ratio to the max for `q = ∞`).
    pub tail_fraction: f64,
    pub terms: Vec<f64>,
}

/// `(Σ_k a_k^q)^{1/q}` with the tail diagnostic.
pub fn lq_combine(terms: Vec<f64>, q: f64) -> NormValue {
    let last = terms.last().copied().unwrap_or(0.0);
    if q.is_infinite() {
        let m = terms.iter().copied().fold(0.0, f64::max);
        let tail_fraction = if m > 0.0 { last / m } else { 0.0 };
        return NormValue { value: m, tail_fraction, terms };
    }
    let s: f64 = terms.iter().map(|a| pow_abs(*a, q)).sum();
    let tail_fraction = if s > 0.0 { pow_abs(last, q) / s } else { 0.0 };
    NormValue { value: root(s, q), tail_fraction, terms }
}

/// `‖w · g‖_{L_p}` on a common grid, given as value slices and the cell volume.
pub fn weighted_lp(w: &[f64], g: &[f64], p: f64, cell_volume: f64) -> f64 {
    if p.is_infinite() {
        return w.iter().zip(g).fold(0.0, |m, (a, b)| f64::max(m, (a * b).abs()));
    }
    let s: f64 = w.iter().zip(g).map(|(a, b)| pow_abs(a * b, p)).sum();
    root(s * cell_volume, p)
}
