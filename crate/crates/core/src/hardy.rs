//! Sequence-space tools: `l_q` norms, conjugate exponents and the two Hardy-type
//! sup conditions, evaluated in log2 space so that rapidly growing weights do not overflow.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Positive sequence stored through `log2` of its terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveSequence {
    log2_terms: Vec<f64>,
    /// Terms beyond the stored ones continue as `a_{N-1} ρ^i`.
    tail_ratio: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HardyDirection {
    /// `sup_n (Σ_{k≤n} β_k^s)^{1/s} (Σ_{k≥n} β_k^{-s'})^{1/s'}`
    Tail,
    /// `sup_n (Σ_{k≥n} β_k^s)^{1/s} (Σ_{k≤n} β_k^{-s'})^{1/s'}`
    Head,
}

impl std::str::FromStr for HardyDirection {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tail" => Ok(HardyDirection::Tail),
            "head" => Ok(HardyDirection::Head),
            _ => invalid(format!("unknown direction '{s}' (tail|head)")),
        }
    }
}

fn lse(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp2()).sum::<f64>().log2()
}

fn lse2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if !m.is_finite() {
        return m;
    }
    m + ((a - m).exp2() + (b - m).exp2()).log2()
}

/// log2 of `Σ_{i≥1} 2^{e0 + i·step}`; infinite unless `step < 0`.
fn log2_geometric_tail(e0: f64, step: f64) -> f64 {
    if step >= 0.0 {
        return f64::INFINITY;
    }
    let q = step.exp2();
    e0 + step + (1.0 / (1.0 - q)).log2()
}

impl PositiveSequence {
    pub fn from_terms(terms: &[f64]) -> Result<Self> {
        if terms.is_empty() || terms.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return invalid("sequence terms must be positive and finite");
        }
        Ok(PositiveSequence { log2_terms: terms.iter().map(|t| t.log2()).collect(), tail_ratio: None })
    }

    pub fn from_log2(log2_terms: Vec<f64>) -> Result<Self> {
        if log2_terms.is_empty() || log2_terms.iter().any(|t| !t.is_finite()) {
            return invalid("log2 terms must be finite");
        }
        Ok(PositiveSequence { log2_terms, tail_ratio: None })
    }

    /// `first·ratio^k`, `k < n`, with the geometric tail model attached.
    pub fn geometric(first: f64, ratio: f64, n: usize) -> Result<Self> {
        if !(first > 0.0) || !(ratio > 0.0) || n == 0 {
            return invalid("geometric sequence needs positive first term, ratio and length");
        }
        let (l0, lr) = (first.log2(), ratio.log2());
        Ok(PositiveSequence {
            log2_terms: (0..n).map(|k| l0 + k as f64 * lr).collect(),
            tail_ratio: Some(ratio),
        })
    }

    pub fn with_tail_ratio(mut self, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return invalid("tail ratio must be positive");
        }
        self.tail_ratio = Some(ratio);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.log2_terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log2_terms.is_empty()
    }

    pub fn tail_ratio(&self) -> Option<f64> {
        self.tail_ratio
    }

    pub fn log2_terms(&self) -> &[f64] {
        &self.log2_terms
    }

    pub fn term(&self, k: usize) -> f64 {
        self.log2_terms[k].exp2()
    }

    pub fn terms(&self) -> Vec<f64> {
        self.log2_terms.iter().map(|l| l.exp2()).collect()
    }

    /// Termwise power `a_k^μ` (tail ratio follows).
    pub fn powf(&self, mu: f64) -> PositiveSequence {
        PositiveSequence {
            log2_terms: self.log2_terms.iter().map(|l| l * mu).collect(),
            tail_ratio: self.tail_ratio.map(|r| r.powf(mu)),
        }
    }

    fn log2_tail_step(&self) -> Option<f64> {
        self.tail_ratio.map(f64::log2)
    }
}

/// `s'` with `1/s + 1/s' = 1`; `1 ↔ ∞`.
pub fn conjugate_exponent(s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return invalid(format!("conjugate exponent needs s >= 1, got {s}"));
    }
    Ok(if s == 1.0 {
        f64::INFINITY
    } else if s.is_infinite() {
        1.0
    } else {
        s / (s - 1.0)
    })
}

/// Exponents of the convolution/difference theory with their derived quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentPack {
    #[serde(with = "crate::ext")]
    pub p: f64,
    #[serde(with = "crate::ext")]
    pub q: f64,
    #[serde(with = "crate::ext")]
    pub r: f64,
    pub theta: f64,
    pub mu: f64,
}

impl ExponentPack {
    pub fn new(p: f64, q: f64, r: f64, theta: f64, mu: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0 && r > 0.0 && theta > 0.0 && mu > 0.0) {
            return invalid("exponents must be positive");
        }
        if mu > q.min(1.0) + 1e-15 {
            return invalid("mu must not exceed min(1, q)");
        }
        Ok(ExponentPack { p, q, r, theta, mu })
    }

    /// μ defaults to `min{1, q, r}`, θ to `min{1, r, p}`.
    pub fn with_defaults(p: f64, q: f64, r: f64) -> Result<Self> {
        Self::new(p, q, r, 1f64.min(r).min(p), 1f64.min(q).min(r))
    }

    pub fn q_mu(&self) -> f64 {
        self.q / self.mu
    }
    pub fn q_mu_conj(&self) -> Result<f64> {
        conjugate_exponent(self.q_mu())
    }
    pub fn p_r(&self) -> f64 {
        self.p / self.r
    }
    pub fn p_r_conj(&self) -> Result<f64> {
        conjugate_exponent(self.p_r())
    }
    /// `σ₁ = r·(p/r)'`.
    pub fn sigma1_from_r(&self) -> Result<f64> {
        Ok(self.r * self.p_r_conj()?)
    }
    /// `σ₁ = θ·(p/θ)'`.
    pub fn sigma1_from_theta(&self) -> Result<f64> {
        Ok(self.theta * conjugate_exponent(self.p / self.theta)?)
    }
}

/// `‖a‖_{l_q}` including the closed-form geometric tail when a tail model is present.
pub fn lq_norm(a: &PositiveSequence, q: f64) -> f64 {
    let last = *a.log2_terms.last().expect("non-empty");
    if q.is_infinite() {
        let m = a.log2_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return match a.log2_tail_step() {
            Some(st) if st > 0.0 => f64::INFINITY,
            _ => m.exp2(),
        };
    }
    let mut l = lse(a.log2_terms.iter().map(|x| q * x));
    if let Some(st) = a.log2_tail_step() {
        l = lse2(l, log2_geometric_tail(q * last, q * st));
    }
    (l / q).exp2()
}

/// log2 of `(Σ_{k∈range} 2^{e·x_k})^{1/e}` for every prefix (`prefix = true`) or suffix,
/// `e = ∞` giving the running max. The suffix version includes the geometric tail.
fn running_log_norms(xs: &[f64], e: f64, prefix: bool, tail_step: Option<f64>) -> Vec<f64> {
    let n = xs.len();
    let mut out = vec![0.0; n];
    let inf = e.is_infinite();
    let mut acc = f64::NEG_INFINITY;
    if !prefix {
        if let Some(st) = tail_step {
            let last = xs[n - 1];
            acc = if inf {
                if st > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                log2_geometric_tail(e * last, e * st)
            };
        }
    }
    let order: Vec<usize> = if prefix { (0..n).collect() } else { (0..n).rev().collect() };
    for k in order {
        if inf {
            acc = acc.max(xs[k]);
            out[k] = acc;
        } else {
            acc = lse2(acc, e * xs[k]);
            out[k] = acc / e;
        }
    }
    out
}

/// Sup over `n ≤ n_max` of the Hardy product for `direction`.
pub fn hardy_condition(beta: &PositiveSequence, s: f64, direction: HardyDirection, n_max: usize) -> Result<f64> {
    let sp = conjugate_exponent(s)?;
    let n = beta.len();
    if n_max >= n {
        return invalid(format!("n_max {n_max} needs at least {} terms", n_max + 1));
    }
    let pos = &beta.log2_terms;
    let neg: Vec<f64> = pos.iter().map(|x| -x).collect();
    let step = beta.log2_tail_step();
    let (a, b) = match direction {
        HardyDirection::Tail => (
            running_log_norms(pos, s, true, None),
            running_log_norms(&neg, sp, false, step.map(|v| -v)),
        ),
        HardyDirection::Head => (
            running_log_norms(pos, s, false, step),
            running_log_norms(&neg, sp, true, None),
        ),
    };
    let best = (0..=n_max).map(|k| a[k] + b[k]).fold(f64::NEG_INFINITY, f64::max);
    Ok(best.exp2())
}

/// Verdict of the finiteness rule: compare the sup at `n_max = 128` and `256`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyVerdict {
    pub value_128: f64,
    pub value_256: f64,
    pub finite: bool,
    pub diverging: bool,
}

/// Builds `β` from `log2 β_k` and applies the doubling rule (within 1% finite, > 10% growth divergent).
pub fn hardy_stability<F: Fn(usize) -> f64>(log2_beta: F, s: f64, direction: HardyDirection) -> Result<HardyVerdict> {
    let eval = |n_max: usize| -> Result<f64> {
        let seq = PositiveSequence::from_log2((0..2 * n_max).map(&log2_beta).collect())?;
        hardy_condition(&seq, s, direction, n_max)
    };
    let v1 = eval(128)?;
    let v2 = eval(256)?;
    let finite = v1.is_finite() && v2.is_finite() && (v2 - v1).abs() <= 0.01 * v1;
    let diverging = !v1.is_finite() || !v2.is_finite() || v2 > 1.1 * v1;
    Ok(HardyVerdict { value_128: v1, value_256: v2, finite, diverging })
}

/// Ratio `(Σ β_k^s b_k^s)^{1/s} / (Σ β_k^s a_k^s)^{1/s}` with `b` the tail (or head) sums of `a`.
pub fn hardy_verify(a: &PositiveSequence, beta: &PositiveSequence, s: f64, direction: HardyDirection) -> Result<f64> {
    if !(s >= 1.0) {
        return invalid("hardy_verify needs s >= 1");
    }
    if a.len() != beta.len() {
        return invalid("a and beta must have equal length");
    }
    let n = a.len();
    let la = &a.log2_terms;
    let lb = &beta.log2_terms;
    // b_k in log2
    let b: Vec<f64> = match direction {
        HardyDirection::Tail => running_log_norms(la, 1.0, false, a.log2_tail_step()),
        HardyDirection::Head => running_log_norms(la, 1.0, true, None),
    };
    let analytic_tail = direction == HardyDirection::Tail && a.tail_ratio.is_some() && beta.tail_ratio.is_some();
    let combine = |x: &[f64]| -> f64 {
        if s.is_infinite() {
            let m = (0..n).map(|k| lb[k] + x[k]).fold(f64::NEG_INFINITY, f64::max);
            let grows = analytic_tail
                && beta.log2_tail_step().unwrap() + a.log2_tail_step().unwrap() > 0.0;
            return if grows { f64::INFINITY } else { m };
        }
        let mut l = lse((0..n).map(|k| s * (lb[k] + x[k])));
        if analytic_tail {
            let st = beta.log2_tail_step().unwrap() + a.log2_tail_step().unwrap();
            l = lse2(l, log2_geometric_tail(s * (lb[n - 1] + x[n - 1]), s * st));
        }
        l / s
    };
    let lhs = combine(&b);
    let rhs = combine(la);
    Ok((lhs - rhs).exp2())
}
