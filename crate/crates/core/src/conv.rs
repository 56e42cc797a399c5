//! The dyadic family `φ_k ∗ f`, the convolution norm, the maximal function `M_A`,
//! numeric checks of the two maximal inequalities, and the Fourier-side norm.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ext::{pow_abs, root};
use crate::grid::{CubeTable, DyadicCube, GridFunction, Shape3};
use crate::hardy::{hardy_stability, ExponentPack, HardyDirection, HardyVerdict};
use crate::kernel::{convolve, fft_nd};
use crate::mollifier::Mollifier;
use crate::norm::{lq_combine, weighted_lp, NormParams, NormValue};
use crate::par;
use crate::weights::{weight_coeff_table, Witness, WeightSequence};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvField {
    pub layers: Vec<GridFunction>,
}

impl ConvField {
    pub fn k_max(&self) -> u32 {
        (self.layers.len() - 1) as u32
    }
}

/// `layers[k] = φ_k ∗ f` for `k = 0..=k_max`.
pub fn conv_field(f: &GridFunction, mol: &Mollifier, k_max: u32) -> Result<ConvField> {
    if mol.dim != f.dim() {
        return Err(Error::GridMismatch("mollifier dimension differs from grid".into()));
    }
    if k_max > f.level() {
        return Err(Error::Resolution(k_max));
    }
    let kernels = (0..=k_max).map(|k| mol.layer_kernel(k, f.level())).collect::<Result<Vec<_>>>()?;
    let layers = par::map_slice(&kernels, |g| convolve(f, g)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ConvField { layers })
}

fn weighted_terms(layers: &[GridFunction], t: &WeightSequence, p: f64) -> Result<Vec<f64>> {
    t.ensure_levels(layers.len() as u32 - 1)?;
    layers
        .iter()
        .enumerate()
        .map(|(k, g)| {
            t.level(k as u32).ensure_same_grid(g)?;
            Ok(weighted_lp(t.level(k as u32).values(), g.values(), p, g.cell_volume()))
        })
        .collect()
}

/// `(Σ_{k≤K} ‖t_k (φ_k ∗ f)‖_p^q)^{1/q}`.
pub fn conv_norm(f: &GridFunction, t: &WeightSequence, mol: &Mollifier, params: &NormParams) -> Result<NormValue> {
    let cf = conv_field(f, mol, params.k_max)?;
    conv_norm_of_field(&cf, t, params)
}

pub fn conv_norm_of_field(cf: &ConvField, t: &WeightSequence, params: &NormParams) -> Result<NormValue> {
    Ok(lq_combine(weighted_terms(&cf.layers, t, params.p)?, params.q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximalField {
    pub a: f64,
    pub c: f64,
    /// `levels[j]` holds `M_A(m, j, c)` for the level-`j` cubes tiling the box.
    pub levels: Vec<CubeTable>,
    /// Level `k` attaining each entry.
    pub argmax: Vec<Vec<u32>>,
    /// Entries with `j < K` whose sup sits at the truncation level `K`.
    pub capped: usize,
}

fn cubes_of(f: &GridFunction, j: u32) -> Result<(usize, i64, Vec<DyadicCube>)> {
    let (per, m_lo) = f.cube_layout(j)?;
    let shape = Shape3::new(f.dim(), per);
    let cubes = (0..shape.len())
        .map(|ci| {
            let mi = shape.multi(ci);
            DyadicCube::new(j, (0..f.dim()).map(|a| mi[a] as i64 + m_lo).collect())
        })
        .collect();
    Ok((per, m_lo, cubes))
}

/// `M_A(m,j,c) = max_{j≤k≤K} 2^{A(j−k)} max_{y∈cQ_{j,m}} |φ_k ∗ f(y)|`.
pub fn maximal_field(cf: &ConvField, a: f64, c: f64, j_max: u32) -> Result<MaximalField> {
    if !(a > 0.0) || !(c >= 1.0) {
        return invalid("need A > 0 and c >= 1");
    }
    let k_max = cf.k_max();
    if j_max > k_max {
        return invalid("j_max exceeds the number of layers");
    }
    let f0 = &cf.layers[0];
    let mut levels = Vec::new();
    let mut argmax = Vec::new();
    let mut capped = 0;
    for j in 0..=j_max {
        let (per, m_lo, cubes) = cubes_of(f0, j)?;
        let rows = par::map_slice(&cubes, |q| -> Result<(f64, u32)> {
            let rg = f0.ranges_for(&q.bounds(c))?;
            let mut best = (0.0f64, j);
            for k in j..=k_max {
                let v = (a * (j as f64 - k as f64)).exp2() * cf.layers[k as usize].max_over(&rg, f64::abs);
                if v > best.0 {
                    best = (v, k);
                }
            }
            Ok(best)
        });
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        capped += rows.iter().filter(|r| j < k_max && r.1 == k_max && r.0 > 0.0).count();
        argmax.push(rows.iter().map(|r| r.1).collect());
        levels.push(CubeTable { k: j, dim: f0.dim(), per_axis: per, m_lo, values: rows.into_iter().map(|r| r.0).collect() });
    }
    Ok(MaximalField { a, c, levels, argmax, capped })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalInequalityReport {
    /// Smallest constant making the inequality hold on every tested cube (or the global ratio).
    pub constant: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub witness: Option<Witness>,
    pub skipped: usize,
}

/// Fits `C` in `M_A(m,j,c₁) ≤ C (Σ_{k≥j} 2^{(j−k)Ar} 2^{kn} ∫_{c₂Q_{j,m}} |φ_k∗f|^r)^{1/r}`
/// over `j ≤ K` and all cubes, with `c₂ = c₁ + 2·supp(φ)`. Cubes whose right side is below
/// `1e-10` of the largest one are treated as noise and skipped.
pub fn verify_maximal_inequality(f: &GridFunction, mol: &Mollifier, r: f64, c1: f64, a: f64, k_max: u32) -> Result<MaximalInequalityReport> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid("r must lie in (0, inf)");
    }
    let cf = conv_field(f, mol, k_max)?;
    let mf = maximal_field(&cf, a, c1, k_max)?;
    let c2 = c1 + 4.0 * mol.support_radius;
    let n = f.dim() as f64;
    let mut entries = Vec::new();
    for j in 0..=k_max {
        let (_, _, cubes) = cubes_of(f, j)?;
        let rhs = par::map_slice(&cubes, |q| -> Result<f64> {
            let rg = f.ranges_for(&q.bounds(c2))?;
            let mut s = 0.0;
            for k in j..=k_max {
                let w = ((j as f64 - k as f64) * a * r + k as f64 * n).exp2();
                s += w * cf.layers[k as usize].integrate_over(&rg, |v| pow_abs(v, r));
            }
            Ok(root(s, r))
        });
        for ((q, rhs), lhs) in cubes.into_iter().zip(rhs).zip(&mf.levels[j as usize].values) {
            entries.push((q, *lhs, rhs?));
        }
    }
    let floor = 1e-10 * entries.iter().map(|e| e.2).fold(0.0, f64::max);
    let mut rep = MaximalInequalityReport { constant: 0.0, lhs: 0.0, rhs: 0.0, witness: None, skipped: 0 };
    for (q, lhs, rhs) in entries {
        if rhs <= floor {
            rep.skipped += 1;
            continue;
        }
        let v = lhs / rhs;
        if v > rep.constant {
            rep = MaximalInequalityReport { constant: v, lhs, rhs, witness: Some(Witness { k: q.k, j: q.k, m: q.m }), skipped: rep.skipped };
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvLowerReport {
    pub ratio: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub hardy: HardyVerdict,
}

/// Checks the hypotheses of the weighted maximal inequality: `σ₁ = r(p/r)'` and the tail
/// Hardy condition with `s = q/μ`, `β_k = (2^{kA}α¹_k)^μ`. Returns the Hardy verdict.
pub fn conv_lower_hypotheses(t: &WeightSequence, exps: &ExponentPack, a: f64) -> Result<HardyVerdict> {
    let want = exps.sigma1_from_r()?;
    let ok = if want.is_infinite() || t.sigma1.is_infinite() {
        want == t.sigma1
    } else {
        (want - t.sigma1).abs() <= 1e-9 * want
    };
    if !ok {
        return Err(Error::Hypothesis(format!(
            "weight sigma1 = {} but the maximal inequality needs r (p/r)' = {}",
            t.sigma1, want
        )));
    }
    let s = exps.q_mu();
    if !(s >= 1.0) {
        return Err(Error::Hypothesis("q / mu must be at least 1".into()));
    }
    let la: Vec<f64> = t.alpha1.iter().map(|v| v.log2()).collect();
    let kk = la.len() - 1;
    let slope = if kk > 0 { la[kk] - la[kk - 1] } else { 0.0 };
    let mu = exps.mu;
    let log2_beta = |k: usize| {
        let l = if k <= kk { la[k] } else { la[kk] + (k - kk) as f64 * slope };
        mu * (k as f64 * a + l)
    };
    let verdict = hardy_stability(log2_beta, s, HardyDirection::Tail)?;
    if !verdict.finite {
        return Err(Error::Hypothesis(format!(
            "tail Hardy condition fails for beta_k = (2^(kA) alpha1_k)^mu (sup grows from {} to {})",
            verdict.value_128, verdict.value_256
        )));
    }
    Ok(verdict)
}

/// Ratio of `(Σ_j (Σ_m t_{j,m}^p M_A(m,j,c)^p)^{q/p})^{1/q}` to the convolution norm.
pub fn verify_conv_lower_bound(
    f: &GridFunction,
    t: &WeightSequence,
    mol: &Mollifier,
    a: f64,
    c: f64,
    exps: &ExponentPack,
    k_max: u32,
) -> Result<ConvLowerReport> {
    let hardy = conv_lower_hypotheses(t, exps, a)?;
    let params = NormParams::new(exps.p, exps.q, k_max)?;
    let cf = conv_field(f, mol, k_max)?;
    let mf = maximal_field(&cf, a, c, k_max)?;
    let terms = (0..=k_max)
        .map(|j| -> Result<f64> {
            let tj = weight_coeff_table(t, j)?;
            let m = &mf.levels[j as usize].values;
            Ok(if exps.p.is_infinite() {
                tj.values.iter().zip(m).fold(0.0, |acc, (x, y)| f64::max(acc, x * y))
            } else {
                root(tj.values.iter().zip(m).map(|(x, y)| pow_abs(x * y, exps.p)).sum(), exps.p)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lhs = lq_combine(terms, exps.q).value;
    let rhs = conv_norm_of_field(&cf, t, &params)?.value;
    let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(ConvLowerReport { ratio, lhs, rhs, hardy })
}

/// Smooth radial cutoff: 1 on `|ξ| ≤ 1`, 0 on `|ξ| ≥ 2`.
pub fn psi0(xi: f64) -> f64 {
    let e = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let t = 2.0 - xi;
    let (a, b) = (e(t), e(1.0 - t));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// `Ψ_j(ξ) = Ψ₀(2^{−j}ξ) − Ψ₀(2^{1−j}ξ)` for `j ≥ 1`, `Ψ₀` for `j = 0`.
pub fn psi_layer(j: u32, xi: f64) -> f64 {
    if j == 0 {
        psi0(xi)
    } else {
        psi0(xi * (-(j as f64)).exp2()) - psi0(xi * (1.0 - j as f64).exp2())
    }
}

/// Layers `F^{-1}(Ψ_j F f)` of the periodic extension of `f` from its box.
pub fn fourier_layers(f: &GridFunction, k_max: u32) -> Result<Vec<GridFunction>> {
    let nyquist = std::f64::consts::PI * (f.level() as f64).exp2();
    if (k_max as f64 + 1.0).exp2() > nyquist {
        return Err(Error::Resolution(k_max));
    }
    let shape = f.shape();
    let dim = f.dim();
    let side = f.side();
    let period = 2.0 * f.radius();
    let mut spec: Vec<Complex<f64>> = f.values().iter().map(|v| Complex::new(*v, 0.0)).collect();
    fft_nd(&mut spec, shape, false);
    let freq = |i: usize| {
        let m = if i <= side / 2 { i as f64 } else { i as f64 - side as f64 };
        2.0 * std::f64::consts::PI * m / period
    };
    let radii: Vec<f64> = (0..shape.len())
        .map(|idx| {
            let mi = shape.multi(idx);
            (0..dim).map(|a| freq(mi[a]).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    let inv = 1.0 / shape.len() as f64;
    let out = par::map_range(k_max as usize + 1, |j| {
        let mut d: Vec<Complex<f64>> = spec.iter().zip(&radii).map(|(s, r)| s * psi_layer(j as u32, *r)).collect();
        fft_nd(&mut d, shape, true);
        GridFunction::from_values(dim, f.level(), f.radius(), d.iter().map(|z| z.re * inv).collect())
    });
    out.into_iter().collect()
}

/// `(Σ_{j≤K} ‖s_j F^{-1}(Ψ_j F f)‖_p^q)^{1/q}` on the torus reading of the box.
pub fn fourier_lp_norm(f: &GridFunction, s: &WeightSequence, p: f64, q: f64, k_max: u32) -> Result<NormValue> {
    let layers = fourier_layers(f, k_max)?;
    Ok(lq_combine(weighted_terms(&layers, s, p)?, q))
}
