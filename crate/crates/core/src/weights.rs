//! Weight sequences `{t_k}`, the local coefficients `t_{k,m}`, the bar transform,
//! the two admissibility classes and the local Muckenhoupt functional.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::ext;
use crate::grid::{cube_lp_norms, CubeTable, DyadicCube, GridFunction, Shape3};
use crate::hardy::conjugate_exponent;
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    pub levels: Vec<GridFunction>,
    pub p: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub alpha3: f64,
}

impl WeightSequence {
    pub fn new(
        levels: Vec<GridFunction>,
        p: f64,
        sigma1: f64,
        sigma2: f64,
        alpha1: Vec<f64>,
        alpha2: Vec<f64>,
        alpha3: f64,
    ) -> Result<Self> {
        if levels.is_empty() {
            return invalid("weight sequence needs at least one level");
        }
        if !(p > 0.0 && sigma1 > 0.0 && sigma2 > 0.0) {
            return invalid("p, sigma1, sigma2 must be positive");
        }
        if alpha1.len() != levels.len() || alpha2.len() != levels.len() {
            return invalid("alpha sequences must have one entry per level");
        }
        if alpha1.iter().chain(&alpha2).any(|a| !(*a > 0.0) || !a.is_finite()) || !(alpha3 >= 0.0) {
            return invalid("alpha1, alpha2 must be positive and alpha3 non-negative");
        }
        for t in &levels {
            levels[0].ensure_same_grid(t)?;
            if t.values().iter().any(|v| !(*v > 0.0)) {
                return invalid("weights must be positive at every grid point");
            }
        }
        Ok(WeightSequence { levels, p, sigma1, sigma2, alpha1, alpha2, alpha3 })
    }

    pub fn k_max(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn level(&self, k: u32) -> &GridFunction {
        &self.levels[k as usize]
    }

    pub fn dim(&self) -> usize {
        self.levels[0].dim()
    }

    pub fn ensure_levels(&self, k_max: u32) -> Result<()> {
        if self.k_max() < k_max {
            return invalid(format!("weight sequence has {} levels, need {}", self.levels.len(), k_max + 1));
        }
        Ok(())
    }

    /// Pointwise product of every level with `gamma`.
    pub fn times(&self, gamma: &GridFunction) -> Result<WeightSequence> {
        let levels = self.levels.iter().map(|t| t.mul(gamma)).collect::<Result<Vec<_>>>()?;
        WeightSequence::new(levels, self.p, self.sigma1, self.sigma2, self.alpha1.clone(), self.alpha2.clone(), self.alpha3)
    }
}

/// `t_{k,m} = ‖t_k‖_{L_p(Q_{k,m})}`.
pub fn local_weight_coeff(t: &WeightSequence, k: u32, m: &[i64]) -> Result<f64> {
    t.ensure_levels(k)?;
    crate::grid::local_lp_norm(t.level(k), t.p, &DyadicCube::new(k, m.to_vec()), 1.0)
}

/// All `t_{k,m}` for the cubes tiling the box.
pub fn weight_coeff_table(t: &WeightSequence, k: u32) -> Result<CubeTable> {
    t.ensure_levels(k)?;
    cube_lp_norms(t.level(k), t.p, k)
}

/// `t̄_k = 2^{kn/p} Σ_m t_{k,m} χ_{Q_{k,m}}`. Cubes on which `t_k` is already constant keep that
/// constant, which makes the transform exactly idempotent.
pub fn bar_transform(t: &WeightSequence) -> Result<WeightSequence> {
    let n = t.dim() as f64;
    let levels = (0..=t.k_max())
        .map(|k| {
            let tk = t.level(k);
            let coeffs = cube_lp_norms(tk, t.p, k)?;
            let factor = if t.p.is_infinite() { 1.0 } else { (k as f64 * n / t.p).exp2() };
            let spread = crate::grid::cube_reduce(tk, k, false, |v| v)?;
            let low = crate::grid::cube_reduce(tk, k, false, |v| -v)?;
            let shift = tk.level() - k;
            let shape = tk.shape();
            let cshape = coeffs.shape();
            let mut values = vec![0.0; tk.len()];
            for (idx, v) in values.iter_mut().enumerate() {
                let mi = shape.multi(idx);
                let ci = cshape.index([mi[0] >> shift, mi[1] >> shift, mi[2] >> shift]);
                *v = if spread.values[ci] == -low.values[ci] {
                    spread.values[ci]
                } else {
                    factor * coeffs.values[ci]
                };
            }
            GridFunction::from_values(tk.dim(), tk.level(), tk.radius(), values)
        })
        .collect::<Result<Vec<_>>>()?;
    WeightSequence::new(levels, t.p, t.sigma1, t.sigma2, t.alpha1.clone(), t.alpha2.clone(), t.alpha3)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub k: u32,
    pub j: u32,
    pub m: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub member: bool,
    pub c1: f64,
    pub c2: f64,
    /// Fitted neighbour exponent (class X) or the `α₃` used (class Y).
    pub c_alpha3: f64,
    pub witness_c1: Option<Witness>,
    pub witness_c2: Option<Witness>,
    pub witness_alpha3: Option<Witness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

fn max_with<T: Clone>(best: &mut (f64, Option<T>), v: f64, w: impl FnOnce() -> T) {
    let v = if v.is_nan() { f64::INFINITY } else { v };
    if best.1.is_none() || v > best.0 {
        *best = (v, Some(w()));
    }
}

/// Fits the smallest constants of the pointwise ratio class over `l ≤ k ≤ k_max`.
pub fn check_class_y(s: &WeightSequence, y: YParams, k_max: u32) -> Result<ClassReport> {
    s.ensure_levels(k_max)?;
    if y.alpha1 > y.alpha2 {
        return invalid("class Y needs alpha1 <= alpha2");
    }
    let mut c1 = (0.0f64, None);
    for k in 0..=k_max {
        for l in 0..=k {
            let d = (k - l) as f64;
            let (sk, sl) = (s.level(k).values(), s.level(l).values());
            for (i, (a, b)) in sk.iter().zip(sl).enumerate() {
                let lr = a.log2() - b.log2();
                let v = (lr - y.alpha2 * d).max(y.alpha1 * d - lr).exp2();
                max_with(&mut c1, v, || Witness { k, j: l, m: vec![i as i64] });
            }
        }
    }
    let mut c2 = (0.0f64, None);
    for k in 0..=k_max {
        let sk = s.level(k);
        let vals = sk.values();
        if y.alpha3 == 0.0 {
            let (imax, vmax) = vals.iter().enumerate().fold((0, f64::MIN), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
            let (imin, vmin) = vals.iter().enumerate().fold((0, f64::MAX), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
            max_with(&mut c2, vmax / vmin, || Witness { k, j: k, m: vec![imax as i64, imin as i64] });
        } else {
            let scale = (k as f64).exp2();
            let rows = par::map_range(vals.len(), |i| {
                let xi = sk.point(i);
                let mut best = (0.0f64, 0usize);
                for (jdx, vy) in vals.iter().enumerate() {
                    let yj = sk.point(jdx);
                    let dist = xi.iter().zip(&yj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    let v = vals[i] / (vy * (1.0 + scale * dist).powf(y.alpha3));
                    if v > best.0 {
                        best = (v, jdx);
                    }
                }
                best
            });
            for (i, (v, jdx)) in rows.into_iter().enumerate() {
                max_with(&mut c2, v, || Witness { k, j: k, m: vec![i as i64, jdx as i64] });
            }
        }
    }
    Ok(ClassReport {
        member: c1.0.is_finite() && c2.0.is_finite(),
        c1: c1.0,
        c2: c2.0,
        c_alpha3: y.alpha3,
        witness_c1: c1.1,
        witness_c2: c2.1,
        witness_alpha3: None,
    })
}

/// `(2^{kn}∫_{range} t^{±e})^{1/e}`; `inverse` integrates `t^{-e}`. `e = ∞` is the sample max.
fn normalized_power(t: &GridFunction, ranges: &[(usize, usize); 3], e: f64, inverse: bool, kn: f64) -> f64 {
    if e.is_infinite() {
        if inverse {
            t.max_over(ranges, |v| 1.0 / v)
        } else {
            t.max_over(ranges, |v| v)
        }
    } else {
        let pe = if inverse { -e } else { e };
        let s = t.integrate_over(ranges, |v| v.powf(pe));
        (kn.exp2() * s).powf(1.0 / e)
    }
}

/// Fits the constants of the integral class over `0 ≤ k ≤ j ≤ k_max` and the neighbour exponent.
pub fn check_class_x(t: &WeightSequence, k_max: u32, c1: f64, c2: f64) -> Result<ClassReport> {
    t.ensure_levels(k_max)?;
    if !(c1 >= 1.0 && c2 >= 1.0) {
        return invalid("scale factors must be >= 1");
    }
    let n = t.dim() as f64;
    let grid = t.level(0);
    let mut best1 = (0.0f64, None);
    let mut best2 = (0.0f64, None);
    let mut best3 = (0.0f64, None);
    for k in 0..=k_max {
        let (per, m_lo) = grid.cube_layout(k)?;
        let cshape = Shape3::new(t.dim(), per);
        let kn = k as f64 * n;
        let cubes: Vec<DyadicCube> = (0..cshape.len())
            .map(|ci| {
                let mi = cshape.multi(ci);
                DyadicCube::new(k, (0..t.dim()).map(|a| mi[a] as i64 + m_lo).collect())
            })
            .collect();
        // one row per cube: (A, [(B1, B2) for j = k..=k_max])
        let rows = par::map_slice(&cubes, |q| -> Result<(f64, Vec<(f64, f64)>)> {
            let r1 = grid.ranges_for(&q.bounds(c1))?;
            let r2 = grid.ranges_for(&q.bounds(c2))?;
            let a = normalized_power(t.level(k), &r1, t.p, false, kn);
            let bs = (k..=k_max)
                .map(|j| {
                    let tj = t.level(j);
                    let b1 = normalized_power(tj, &r2, t.sigma1, true, kn);
                    (b1, normalized_power(tj, &r2, t.sigma2, false, kn))
                })
                .collect();
            Ok((a, bs))
        });
        for (q, row) in cubes.iter().zip(rows) {
            let (a, bs) = row?;
            for (off, (b1, b2)) in bs.into_iter().enumerate() {
                let j = k + off as u32;
                let v1 = a * b1 * t.alpha1[j as usize] / t.alpha1[k as usize];
                let v2 = b2 / a * t.alpha2[k as usize] / t.alpha2[j as usize];
                max_with(&mut best1, v1, || Witness { k, j, m: q.m.clone() });
                max_with(&mut best2, v2, || Witness { k, j, m: q.m.clone() });
            }
        }
        let table = weight_coeff_table(t, k)?;
        for ci in 0..table.values.len() {
            let cm = table.cube(ci).m;
            for nb in neighbours(&cm) {
                if let Some(v) = table.get(&nb) {
                    let a = (table.values[ci] / v).log2();
                    max_with(&mut best3, a, || Witness { k, j: k, m: cm.clone() });
                }
            }
        }
    }
    let member = best1.0.is_finite() && best2.0.is_finite() && best3.0.is_finite() && best3.0 <= t.alpha3 + 1e-12;
    Ok(ClassReport {
        member,
        c1: best1.0,
        c2: best2.0,
        c_alpha3: best3.0,
        witness_c1: best1.1,
        witness_c2: best2.1,
        witness_alpha3: best3.1,
    })
}

fn neighbours(m: &[i64]) -> Vec<Vec<i64>> {
    let d = m.len();
    let total = 3usize.pow(d as u32);
    (0..total)
        .filter_map(|code| {
            let mut c = code;
            let mut out = m.to_vec();
            for v in out.iter_mut() {
                *v += (c % 3) as i64 - 1;
                c /= 3;
            }
            if out == m {
                None
            } else {
                Some(out)
            }
        })
        .collect()
}

/// Largest relative violation of `2^{-kn/θ} ≤ ‖t_k‖_{L_p(Q)} ‖t_k^{-1}‖_{L_{σ₁}(Q)}`, `σ₁ = θ(p/θ)'`.
pub fn verify_holder_identity(t: &WeightSequence, theta: f64, k_max: u32) -> Result<f64> {
    t.ensure_levels(k_max)?;
    if !(theta > 0.0 && theta <= t.p) {
        return invalid("theta must lie in (0, p]");
    }
    let sigma1 = if t.p.is_infinite() { theta } else { theta * conjugate_exponent(t.p / theta)? };
    let n = t.dim() as f64;
    let mut worst = 0.0f64;
    for k in 0..=k_max {
        let tk = t.level(k);
        let lp = cube_lp_norms(tk, t.p, k)?;
        let dual = if sigma1.is_infinite() {
            crate::grid::cube_reduce(tk, k, false, |v| 1.0 / v)?
        } else {
            let mut d = crate::grid::cube_reduce(tk, k, true, |v| v.powf(-sigma1))?;
            d.values.iter_mut().for_each(|v| *v = v.powf(1.0 / sigma1));
            d
        };
        let lhs = (-(k as f64) * n / theta).exp2();
        for (a, b) in lp.values.iter().zip(&dual.values) {
            worst = worst.max((lhs - a * b) / lhs);
        }
    }
    Ok(worst.max(0.0))
}

/// `sup_Q avg_Q(w) · avg_Q(w^{-1/(u-1)})^{u-1}` over dyadic cubes of side ≤ `side_cap` in the box.
pub fn check_ap_loc(w: &GridFunction, u: f64, side_cap: f64) -> Result<f64> {
    if !(u > 1.0) || !(side_cap > 0.0) {
        return invalid("need u > 1 and positive side cap");
    }
    if w.values().iter().any(|v| !(*v > 0.0)) {
        return invalid("weight must be positive");
    }
    let k0 = (-side_cap.log2()).ceil().max(0.0) as u32;
    let n = w.dim() as i32;
    let mut best = 0.0f64;
    for k in k0..=w.level() {
        let vol = (-(k as f64)).exp2().powi(n);
        let avg = crate::grid::cube_reduce(w, k, true, |v| v)?;
        let dual = if u.is_infinite() {
            crate::grid::cube_reduce(w, k, true, |v| v.log2())?
        } else {
            crate::grid::cube_reduce(w, k, true, |v| v.powf(-1.0 / (u - 1.0)))?
        };
        for (a, d) in avg.values.iter().zip(&dual.values) {
            let v = if u.is_infinite() {
                a / vol * (-(d / vol)).exp2()
            } else {
                a / vol * (d / vol).powf(u - 1.0)
            };
            best = best.max(v);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// `t_k = 2^{ks}`
    TwoKs { s: f64 },
    /// `t_k = 2^{ks} |x - center|^β`
    PowerTimes2ks {
        s: f64,
        beta: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Levels read from grid CSV files; `α¹_k = α²_k = 1` unless the manifest says otherwise.
    CustomGrid { paths: Vec<String> },
}

/// Generator for a weight sequence: the kind plus the exponents fixing `σ₁ = r·(p/r)'`, `σ₂ = p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(flatten)]
    pub kind: WeightKind,
    #[serde(with = "ext")]
    pub p: f64,
    #[serde(default = "default_r", with = "ext")]
    pub r: f64,
}

fn default_r() -> f64 {
    1.0
}

impl WeightSpec {
    pub fn two_ks(s: f64, p: f64, r: f64) -> Self {
        WeightSpec { kind: WeightKind::TwoKs { s }, p, r }
    }

    pub fn power(s: f64, beta: f64, p: f64, r: f64) -> Self {
        WeightSpec { kind: WeightKind::PowerTimes2ks { s, beta, center: None }, p, r }
    }

    /// Smoothness exponent `s` of the `2^{ks}` factor (0 for custom grids).
    pub fn s(&self) -> f64 {
        match &self.kind {
            WeightKind::TwoKs { s } | WeightKind::PowerTimes2ks { s, .. } => *s,
            WeightKind::CustomGrid { .. } => 0.0,
        }
    }

    pub fn sigma1(&self) -> Result<f64> {
        if !(self.r > 0.0 && self.r <= self.p) {
            return invalid("need 0 < r <= p");
        }
        if self.p.is_infinite() {
            return Ok(self.r);
        }
        Ok(self.r * conjugate_exponent(self.p / self.r)?)
    }
}

/// Largest neighbour exponent `a` with `t_{k,m} ≤ 2^a t_{k,m'}` over all levels.
pub fn fitted_neighbour_exponent(levels: &[GridFunction], p: f64) -> Result<f64> {
    let mut a = 0.0f64;
    for (k, tk) in levels.iter().enumerate() {
        let table = cube_lp_norms(tk, p, k as u32)?;
        for ci in 0..table.values.len() {
            for nb in neighbours(&table.cube(ci).m) {
                if let Some(v) = table.get(&nb) {
                    a = a.max((table.values[ci] / v).log2());
                }
            }
        }
    }
    Ok(a)
}

pub fn make_weights(spec: &WeightSpec, dim: usize, level: u32, radius: f64, k_max: u32) -> Result<WeightSequence> {
    let p = spec.p;
    if !(p > 0.0) {
        return Err(Error::InvalidParameter("p must be positive".into()));
    }
    let sigma1 = spec.sigma1()?;
    let sigma2 = p;
    let ks = 0..=k_max;
    match &spec.kind {
        WeightKind::TwoKs { s } => {
            let levels = ks
                .clone()
                .map(|k| GridFunction::constant(dim, level, radius, (k as f64 * s).exp2()))
                .collect::<Result<Vec<_>>>()?;
            let alpha: Vec<f64> = ks.map(|k| (k as f64 * s).exp2()).collect();
            WeightSequence::new(levels, p, sigma1, sigma2, alpha.clone(), alpha, 0.0)
        }
        WeightKind::PowerTimes2ks { s, beta, center } => {
            let c = center.clone().unwrap_or_else(|| vec![0.0; dim]);
            if c.len() != dim {
                return invalid("center dimension");
            }
            let base = GridFunction::from_fn(dim, level, radius, |x| {
                let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                r2.sqrt().powf(*beta)
            })?;
            let levels: Vec<GridFunction> = ks.clone().map(|k| base.scaled((k as f64 * s).exp2())).collect();
            let alpha: Vec<f64> = ks.map(|k| (k as f64 * s).exp2()).collect();
            let a3 = fitted_neighbour_exponent(&levels, p)?;
            WeightSequence::new(levels, p, sigma1, sigma2, alpha.clone(), alpha, a3)
        }
        WeightKind::CustomGrid { paths } => {
            if paths.len() < k_max as usize + 1 {
                return invalid("custom grid needs one CSV per level");
            }
            let levels = paths[..=k_max as usize]
                .iter()
                .map(GridFunction::read_csv)
                .collect::<Result<Vec<_>>>()?;
            let a3 = fitted_neighbour_exponent(&levels, p)?;
            let ones = vec![1.0; levels.len()];
            WeightSequence::new(levels, p, sigma1, sigma2, ones.clone(), ones, a3)
        }
    }
}

/// JSON manifest: exponents, α-sequences and the levels as CSV paths or a generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightManifest {
    #[serde(with = "ext")]
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha3: Option<f64>,
    pub levels: LevelSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelSource {
    Paths(Vec<String>),
    Generator(GeneratorEntry),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    #[serde(flatten)]
    pub kind: WeightKind,
    #[serde(default = "default_r", with = "ext")]
    pub r: f64,
    pub dim: usize,
    #[serde(rename = "J")]
    pub level: u32,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "K")]
    pub k_max: u32,
}

impl WeightManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<WeightSequence> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let m: WeightManifest = serde_json::from_str(&text)?;
        m.build(path.parent())
    }

    pub fn build(&self, base: Option<&Path>) -> Result<WeightSequence> {
        let mut w = match &self.levels {
            LevelSource::Paths(paths) => {
                let levels = paths
                    .iter()
                    .map(|p| {
                        let pb = Path::new(p);
                        match base {
                            Some(b) if pb.is_relative() => GridFunction::read_csv(b.join(pb)),
                            _ => GridFunction::read_csv(pb),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                let ones = vec![1.0; levels.len()];
                let a3 = fitted_neighbour_exponent(&levels, self.p)?;
                WeightSequence::new(levels, self.p, self.p, self.p, ones.clone(), ones, a3)?
            }
            LevelSource::Generator(g) => {
                let spec = WeightSpec { kind: g.kind.clone(), p: self.p, r: g.r };
                make_weights(&spec, g.dim, g.level, g.radius, g.k_max)?
            }
        };
        if let Some(v) = self.sigma1 {
            w.sigma1 = v;
        }
        if let Some(v) = self.sigma2 {
            w.sigma2 = v;
        }
        if let Some(v) = &self.alpha1 {
            w.alpha1 = v.clone();
        }
        if let Some(v) = &self.alpha2 {
            w.alpha2 = v.clone();
        }
        if let Some(v) = self.alpha3 {
            w.alpha3 = v;
        }
        WeightSequence::new(w.levels, w.p, w.sigma1, w.sigma2, w.alpha1, w.alpha2, w.alpha3)
    }
}

/// Membership judged across resolutions: constants finite at `J`, `J+1`, `J+2` and at
/// `k_max + 2`, with relative growth per refinement at most `tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassXVerdict {
    pub reports: Vec<ClassReport>,
    pub growth: f64,
    pub member: bool,
}

pub fn class_x_verdict(
    spec: &WeightSpec,
    dim: usize,
    level: u32,
    radius: f64,
    k_max: u32,
    c: (f64, f64),
    tol: f64,
) -> Result<ClassXVerdict> {
    let mut reports = Vec::new();
    for (jj, kk) in [(level, k_max), (level + 1, k_max), (level + 2, k_max), (level + 2, k_max + 2)] {
        let t = make_weights(spec, dim, jj, radius, kk)?;
        reports.push(check_class_x(&t, kk, c.0, c.1)?);
    }
    let rel = |a: f64, b: f64| if a.is_finite() && b.is_finite() { (b - a) / a.max(1e-300) } else { f64::INFINITY };
    let mut growth = 0.0f64;
    for w in reports.windows(2) {
        growth = growth.max(rel(w[0].c1, w[1].c1)).max(rel(w[0].c2, w[1].c2));
    }
    let member = reports.iter().all(|r| r.c1.is_finite() && r.c2.is_finite() && r.c_alpha3.is_finite()) && growth <= tol;
    Ok(ClassXVerdict { reports, growth, member })
}
