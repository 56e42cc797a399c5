//! Experiment harness: hypothesis gating, norm-equivalence runs over a corpus, the
//! partial-sum convergence run and the trace run.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::conv::{conv_field, conv_norm, fourier_lp_norm, conv_lower_hypotheses};
use crate::corpus::{Corpus, CorpusConfig};
use crate::diff::{averaged_diff_norm, diff_norm, DiffParams};
use crate::error::{invalid, Error, Result};
use crate::ext;
use crate::grid::{cube_lp_norms, GridFunction};
use crate::hardy::{hardy_stability, ExponentPack, HardyDirection};
use crate::mollifier::{build_mollifier, Mollifier};
use crate::norm::{NormParams, NormValue};
use crate::par;
use crate::spline::{coeff_norm, spline_decompose};
use crate::trace::trace_experiment;
use crate::weights::{bar_transform, check_class_y, class_x_verdict, make_weights, WeightKind, WeightSequence, WeightSpec, YParams};

/// Relative growth per refinement tolerated by the class test.
pub const CLASS_X_TOL: f64 = 0.02;
/// Allowed relative change of the ratio spread under `J → J+1`.
pub const SPREAD_DRIFT_TOL: f64 = 0.15;
pub const TRACE_DRIFT_TOL: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "snake_case")]
pub enum NormSpec {
    Conv {
        m: u32,
        #[serde(default = "one")]
        support_radius: f64,
        /// Use `t̄_k` in place of `t_k`.
        #[serde(default)]
        bar: bool,
    },
    Diff { l: u32 },
    AveragedDiff { l: u32 },
    Spline { l: u32 },
    Fourier,
}

fn one() -> f64 {
    1.0
}

impl NormSpec {
    pub fn label(&self) -> String {
        match self {
            NormSpec::Conv { m, support_radius, bar } => {
                format!("conv{}(M={m},rho={support_radius})", if *bar { "_bar" } else { "" })
            }
            NormSpec::Diff { l } => format!("diff(l={l})"),
            NormSpec::AveragedDiff { l } => format!("avgdiff(l={l})"),
            NormSpec::Spline { l } => format!("spline(l={l})"),
            NormSpec::Fourier => "fourier".into(),
        }
    }
}

/// Experiment description (`"schema": 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub dim: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "J")]
    pub level: u32,
    #[serde(rename = "K")]
    pub k_max: u32,
    #[serde(with = "ext")]
    pub p: f64,
    #[serde(with = "ext")]
    pub q: f64,
    #[serde(default = "one", with = "ext")]
    pub r: f64,
    /// Defaults to `min{1, q, r}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub weights: WeightKind,
    pub corpus: CorpusConfig,
    pub norms: Vec<NormSpec>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return invalid(format!("unsupported config schema {}", self.schema));
        }
        if !(1..=3).contains(&self.dim) || !(self.radius > 0.0) {
            return invalid("dimension must be 1..=3 and R positive");
        }
        if !(self.p > 0.0 && self.q > 0.0 && self.r > 0.0) {
            return invalid("p, q, r must be positive");
        }
        Ok(())
    }

    pub fn weight_spec(&self) -> WeightSpec {
        WeightSpec { kind: self.weights.clone(), p: self.p, r: self.r }
    }

    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or(1f64.min(self.q).min(self.r))
    }

    pub fn exponents(&self) -> Result<ExponentPack> {
        ExponentPack::new(self.p, self.q, self.r, 1f64.min(self.r).min(self.p), self.mu())
    }

    pub fn weights_at(&self, level: u32) -> Result<WeightSequence> {
        make_weights(&self.weight_spec(), self.dim, level, self.radius, self.k_max)
    }
}

/// One unsatisfied hypothesis: which norm needs it and the condition in words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub norm: String,
    pub condition: String,
}

/// `log2 α_k` with the last step continued linearly beyond the stored levels.
fn log2_extended(alpha: &[f64]) -> impl Fn(usize) -> f64 + '_ {
    let n = alpha.len() - 1;
    let slope = if n > 0 { (alpha[n] / alpha[n - 1]).log2() } else { 0.0 };
    move |k| if k <= n { alpha[k].log2() } else { alpha[n].log2() + (k - n) as f64 * slope }
}

/// Smallest and largest per-level growth exponent of `α`.
pub fn alpha_exponents(alpha: &[f64]) -> (f64, f64) {
    if alpha.len() < 2 {
        return (0.0, 0.0);
    }
    alpha.windows(2).map(|w| (w[1] / w[0]).log2()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn hardy_gate<F: Fn(usize) -> f64>(
    norm: &str,
    log2_beta: F,
    s: f64,
    direction: HardyDirection,
    beta: &str,
) -> Result<Option<Violation>> {
    let v = hardy_stability(log2_beta, s, direction)?;
    if v.finite {
        return Ok(None);
    }
    let which = match direction {
        HardyDirection::Tail => "tail",
        HardyDirection::Head => "head",
    };
    Ok(Some(Violation {
        norm: norm.into(),
        condition: format!(
            "{which} Hardy sup diverges for beta_k = {beta}, s = {s} (truncated sups {:.4e} -> {:.4e})",
            v.value_128, v.value_256
        ),
    }))
}

fn sigma_gate(norm: &str, t: &WeightSequence, want: f64, what: &str) -> Option<Violation> {
    let ok = if want.is_infinite() || t.sigma1.is_infinite() { want == t.sigma1 } else { (want - t.sigma1).abs() <= 1e-9 * want };
    (!ok).then(|| Violation { norm: norm.into(), condition: format!("weight sigma1 = {} but {what} = {want}", t.sigma1) })
}

fn as_violation(norm: &str, r: Result<()>) -> Result<Option<Violation>> {
    match r {
        Ok(()) => Ok(None),
        Err(Error::Hypothesis(msg)) => Ok(Some(Violation { norm: norm.into(), condition: msg })),
        Err(e) => Err(e),
    }
}

/// Re-derives every hypothesis the configured comparison relies on and lists the failures.
pub fn check_hypotheses(cfg: &ExperimentConfig) -> Result<Vec<Violation>> {
    cfg.validate()?;
    let mut out = Vec::new();
    if cfg.r > cfg.p {
        out.push(Violation { norm: "all".into(), condition: format!("need r <= p, got r = {} and p = {}", cfg.r, cfg.p) });
        return Ok(out);
    }
    let exps = cfg.exponents()?;
    let t = cfg.weights_at(cfg.level)?;
    let verdict = class_x_verdict(&cfg.weight_spec(), cfg.dim, cfg.level, cfg.radius, cfg.k_max, (1.0, 1.0), CLASS_X_TOL)?;
    if !verdict.member {
        let last = verdict.reports.last().expect("four reports");
        out.push(Violation {
            norm: "weights".into(),
            condition: format!(
                "weight sequence fails the integral class test (constants {:.4e}, {:.4e}, relative growth {:.4} per refinement)",
                last.c1, last.c2, verdict.growth
            ),
        });
    }
    let mu = exps.mu;
    let s = exps.q_mu();
    let a1 = log2_extended(&t.alpha1);
    let a2 = log2_extended(&t.alpha2);
    let (a1_min, _) = alpha_exponents(&t.alpha1);
    let big_a = 1.0 + (-a1_min).max(0.0);
    for spec in &cfg.norms {
        let name = spec.label();
        match spec {
            NormSpec::Conv { m, support_radius, .. } => {
                let mol = build_mollifier(cfg.dim, *m, *support_radius)?;
                let lphi = mol.l_phi as f64;
                out.extend(as_violation(&name, conv_lower_hypotheses(&t, &exps, big_a).map(|_| ()))?);
                out.extend(hardy_gate(
                    &name,
                    |k| mu * (-(k as f64) * (1.0 + lphi) + a2(k)),
                    s,
                    HardyDirection::Head,
                    &format!("(2^(-k(1+L_phi)) alpha2_k)^mu with L_phi = {}", mol.l_phi),
                )?);
            }
            NormSpec::Diff { l } | NormSpec::AveragedDiff { l } | NormSpec::Spline { l } => {
                let want = exps.sigma1_from_r()?;
                out.extend(sigma_gate(&name, &t, want, "the difference and spline norms need r (p/r)'"));
                out.extend(hardy_gate(&name, |k| mu * a1(k), s, HardyDirection::Tail, "(alpha1_k)^mu")?);
                let lf = *l as f64;
                out.extend(hardy_gate(
                    &name,
                    |k| mu * (-(k as f64) * lf + a2(k)),
                    s,
                    HardyDirection::Head,
                    &format!("(2^(-kl) alpha2_k)^mu with l = {l}"),
                )?);
            }
            NormSpec::Fourier => {
                let (lo, _) = alpha_exponents(&t.alpha1);
                let (_, hi) = alpha_exponents(&t.alpha2);
                let rep = check_class_y(&t, YParams { alpha1: lo, alpha2: hi, alpha3: t.alpha3 }, cfg.k_max)?;
                if !rep.member {
                    out.push(Violation {
                        norm: name.clone(),
                        condition: format!("weights fail the pointwise ratio class (constants {:.4e}, {:.4e})", rep.c1, rep.c2),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// One norm of `f`, using `t` (or `t̄` when the spec asks for it).
pub fn evaluate_norm(f: &GridFunction, t: &WeightSequence, spec: &NormSpec, p: f64, q: f64, r: f64, k_max: u32) -> Result<NormValue> {
    let params = NormParams::new(p, q, k_max)?;
    match spec {
        NormSpec::Conv { m, support_radius, bar } => {
            let mol = build_mollifier(f.dim(), *m, *support_radius)?;
            if *bar {
                conv_norm(f, &bar_transform(t)?, &mol, &params)
            } else {
                conv_norm(f, t, &mol, &params)
            }
        }
        NormSpec::Diff { l } => diff_norm(f, t, &params, &DiffParams::new(*l, r)?),
        NormSpec::AveragedDiff { l } => averaged_diff_norm(f, t, &params, &DiffParams::new(*l, r)?),
        NormSpec::Spline { l } => coeff_norm(&spline_decompose(f, *l, k_max, r)?, t, p, q),
        NormSpec::Fourier => fourier_lp_norm(f, t, p, q, k_max),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryValues {
    pub id: String,
    /// Norm values at `J`, one per configured norm.
    pub values: Vec<f64>,
    /// The same at `J + 1`.
    pub values_refined: Vec<f64>,
    pub tail_fractions: Vec<f64>,
    pub tail_fractions_refined: Vec<f64>,
}

impl EntryValues {
    /// Relative change of each norm under `J → J+1`.
    pub fn refinement_deltas(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.values_refined)
            .map(|(a, b)| if *a == 0.0 && *b == 0.0 { 0.0 } else { (b - a).abs() / a.abs().max(b.abs()) })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStat {
    pub a: String,
    pub b: String,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max/min` of the ratio over the corpus at `J`.
    pub spread: f64,
    pub spread_refined: f64,
    /// `|spread_refined / spread − 1|`.
    pub drift: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub schema: u32,
    /// Set when hypotheses failed and the run was forced.
    #[serde(rename = "unsafe")]
    pub unsafe_run: bool,
    pub violations: Vec<Violation>,
    pub norms: Vec<String>,
    #[serde(rename = "J")]
    pub level: u32,
    #[serde(rename = "K")]
    pub k_max: u32,
    pub entries: Vec<EntryValues>,
    pub pairs: Vec<PairStat>,
    pub pass: bool,
}

/// `(min, max)` of `a_e / b_e` over entries; pairs that are both zero are skipped.
fn ratio_range(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        if *x == 0.0 && *y == 0.0 {
            continue;
        }
        let v = if *y == 0.0 { f64::INFINITY } else { x / y };
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn spread_of(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 && hi.is_finite() {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Evaluates every configured norm on every corpus entry at `J` and `J+1` and judges each
/// pair by refinement-stable ratio spread.
pub fn equivalence_run(corpus: &Corpus, cfg: &ExperimentConfig, force: bool) -> Result<EquivalenceReport> {
    cfg.validate()?;
    if corpus.dim != cfg.dim || corpus.radius != cfg.radius {
        return invalid("corpus dimension or box radius differs from the config");
    }
    if cfg.norms.len() < 2 {
        return invalid("an equivalence run needs at least two norms");
    }
    let violations = check_hypotheses(cfg)?;
    if !violations.is_empty() && !force {
        return Err(Error::Hypothesis(
            violations.iter().map(|v| format!("{}: {}", v.norm, v.condition)).collect::<Vec<_>>().join("; "),
        ));
    }
    let mut per_level = Vec::new();
    for level in [cfg.level, cfg.level + 1] {
        let fs = corpus.sample(level)?;
        let t = cfg.weights_at(level)?;
        let rows = par::map_slice(&fs, |(_, f)| {
            cfg.norms
                .iter()
                .map(|n| evaluate_norm(f, &t, n, cfg.p, cfg.q, cfg.r, cfg.k_max))
                .collect::<Result<Vec<_>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        per_level.push(rows);
    }
    let entries: Vec<EntryValues> = corpus
        .entries
        .iter()
        .zip(per_level[0].iter().zip(&per_level[1]))
        .map(|(e, (a, b))| EntryValues {
            id: e.id.clone(),
            values: a.iter().map(|v| v.value).collect(),
            values_refined: b.iter().map(|v| v.value).collect(),
            tail_fractions: a.iter().map(|v| v.tail_fraction).collect(),
            tail_fractions_refined: b.iter().map(|v| v.tail_fraction).collect(),
        })
        .collect();
    let col = |i: usize, refined: bool| -> Vec<f64> {
        entries.iter().map(|e| if refined { e.values_refined[i] } else { e.values[i] }).collect()
    };
    let labels: Vec<String> = cfg.norms.iter().map(NormSpec::label).collect();
    let mut pairs = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let (lo, hi) = ratio_range(&col(i, false), &col(j, false));
            let (lo2, hi2) = ratio_range(&col(i, true), &col(j, true));
            let spread = spread_of(lo, hi);
            let spread_refined = spread_of(lo2, hi2);
            let drift = (spread_refined / spread - 1.0).abs();
            let pass = spread.is_finite() && spread_refined.is_finite() && drift < SPREAD_DRIFT_TOL;
            pairs.push(PairStat { a: labels[i].clone(), b: labels[j].clone(), min_ratio: lo, max_ratio: hi, spread, spread_refined, drift, pass });
        }
    }
    let pass = pairs.iter().all(|p| p.pass);
    Ok(EquivalenceReport {
        schema: 1,
        unsafe_run: !violations.is_empty(),
        violations,
        norms: labels,
        level: cfg.level,
        k_max: cfg.k_max,
        entries,
        pairs,
        pass,
    })
}

impl EquivalenceReport {
    /// `function_id,norm_type,value,K,J,tail_fraction` for both resolutions.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("function_id,norm_type,value,K,J,tail_fraction\n");
        for (refined, level) in [(false, self.level), (true, self.level + 1)] {
            for e in &self.entries {
                let (vals, tails) = if refined { (&e.values_refined, &e.tail_fractions_refined) } else { (&e.values, &e.tail_fractions) };
                for ((n, v), tf) in self.norms.iter().zip(vals).zip(tails) {
                    s.push_str(&format!("{},{},{},{},{},{}\n", e.id, n, v, self.k_max, level, tf));
                }
            }
        }
        s
    }

    /// Human-readable summary, one line per pair.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        if self.unsafe_run {
            s.push_str("UNSAFE: hypotheses not satisfied, run forced\n");
            for v in &self.violations {
                s.push_str(&format!("  {}: {}\n", v.norm, v.condition));
            }
        }
        for p in &self.pairs {
            s.push_str(&format!(
                "{} {} vs {}: ratio in [{:.4e}, {:.4e}], spread {:.4} -> {:.4} (drift {:.3})\n",
                if p.pass { "PASS" } else { "FAIL" },
                p.a,
                p.b,
                p.min_ratio,
                p.max_ratio,
                p.spread,
                p.spread_refined,
                p.drift
            ));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeDecay {
    pub m: Vec<i64>,
    /// `‖Σ_{i=j}^{K} φ_i ∗ f‖_{L_r(Q_{0,m})}` for `j = 1..=K`.
    pub tails: Vec<f64>,
    /// `2^slope` of the least-squares line through `log2 tails`; `None` when fewer than three
    /// tails sit above the noise floor.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEntry {
    pub id: String,
    pub cubes: Vec<CubeDecay>,
    /// Largest fitted cube rate.
    pub rate: f64,
    /// `‖f − Σ_{j≤K} φ_j ∗ f‖_{L_r} / ‖f‖_{L_r}` over the box.
    pub reconstruction_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub schema: u32,
    #[serde(with = "ext")]
    pub r: f64,
    pub theta: f64,
    /// Smallest per-level growth exponent of `α¹`.
    pub alpha1: f64,
    /// `n (1/θ − 1/max{r,1})`, which `alpha1` must exceed.
    pub alpha1_bound: f64,
    #[serde(rename = "unsafe")]
    pub unsafe_run: bool,
    pub entries: Vec<EmbeddingEntry>,
    pub max_rate: f64,
}

const TAIL_FLOOR: f64 = 1e-10;

fn fitted_rate(tails: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = tails
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > floor)
        .map(|(j, v)| (j as f64, v.log2()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some((sxy / sxx).exp2())
}

/// Tail blocks of the dyadic series on unit cubes and their geometric decay rate. Refuses
/// unless `α₁ > n(1/θ − 1/max{r,1})` with `θ = min{1, r, p}`, `α₁` the smallest growth
/// exponent of `α¹`. Tails below `1e-10` of the largest one are treated as noise.
pub fn embedding_run(
    fs: &[(String, GridFunction)],
    t: &WeightSequence,
    mol: &Mollifier,
    r: f64,
    k_max: u32,
    force: bool,
) -> Result<EmbeddingReport> {
    if !(r > 0.0) {
        return invalid("r must be positive");
    }
    if k_max < 2 {
        return invalid("the convergence run needs K >= 2");
    }
    let theta = 1f64.min(r).min(t.p);
    let n = t.dim() as f64;
    let bound = n * (1.0 / theta - 1.0 / r.max(1.0));
    let (alpha1, _) = alpha_exponents(&t.alpha1);
    let ok = t.alpha1.len() >= 2 && alpha1 > bound;
    if !ok && !force {
        return Err(Error::Hypothesis(format!(
            "embedding into L_r needs alpha1 > n (1/theta - 1/max(r,1)) = {bound}, got {alpha1}"
        )));
    }
    let entries = par::map_slice(fs, |(id, f)| -> Result<EmbeddingEntry> {
        let cf = conv_field(f, mol, k_max)?;
        let mut acc = GridFunction::zeros(f.dim(), f.level(), f.radius())?;
        let mut tables = Vec::new();
        for j in (1..=k_max).rev() {
            acc.values_mut().iter_mut().zip(cf.layers[j as usize].values()).for_each(|(a, b)| *a += b);
            tables.push(cube_lp_norms(&acc, r, 0)?);
        }
        tables.reverse();
        let global = tables.iter().flat_map(|t| t.values.iter().copied()).fold(0.0, f64::max);
        let cubes: Vec<CubeDecay> = (0..tables[0].values.len())
            .map(|ci| {
                let tails: Vec<f64> = tables.iter().map(|t| t.values[ci]).collect();
                let rate = fitted_rate(&tails, TAIL_FLOOR * global);
                CubeDecay { m: tables[0].cube(ci).m, tails, rate }
            })
            .collect();
        let rate = cubes.iter().filter_map(|c| c.rate).fold(0.0, f64::max);
        acc.values_mut().iter_mut().zip(cf.layers[0].values()).for_each(|(a, b)| *a += b);
        let fnorm = f.lp_norm(r);
        let reconstruction_error = if fnorm == 0.0 { 0.0 } else { f.sub(&acc)?.lp_norm(r) / fnorm };
        Ok(EmbeddingEntry { id: id.clone(), cubes, rate, reconstruction_error })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_rate = entries.iter().map(|e| e.rate).fold(0.0, f64::max);
    Ok(EmbeddingReport { schema: 1, r, theta, alpha1, alpha1_bound: bound, unsafe_run: !ok, entries, max_rate })
}

/// Ambient weight of the trace experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gamma", rename_all = "snake_case")]
pub enum GammaSpec {
    One,
    /// `|x''|^β`, the distance to the trace plane raised to `β`.
    NormalPower { beta: f64 },
}

impl GammaSpec {
    pub fn grid(&self, dim: usize, level: u32, radius: f64, trace_dim: usize) -> Result<GridFunction> {
        match self {
            GammaSpec::One => GridFunction::constant(dim, level, radius, 1.0),
            GammaSpec::NormalPower { beta } => GridFunction::from_fn(dim, level, radius, |x| {
                x[trace_dim..].iter().map(|v| v * v).sum::<f64>().sqrt().powf(*beta)
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub id: String,
    pub ratio: f64,
    pub ratio_refined: f64,
    /// `|ratio_refined / ratio − 1|`.
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRunReport {
    pub schema: u32,
    pub gamma: GammaSpec,
    pub p: f64,
    pub l: u32,
    #[serde(rename = "J")]
    pub level: u32,
    #[serde(rename = "K")]
    pub k_max: u32,
    pub entries: Vec<TraceEntry>,
    pub max_ratio: f64,
    pub max_ratio_refined: f64,
    /// Largest drift among entries whose ratio is at least 1% of the largest one.
    pub max_drift: f64,
    pub pass: bool,
}

/// Trace ratio for every corpus entry at `J` and `J+1`. PASS: finite largest ratio, and every
/// entry carrying at least 1% of it moves by less than 25% under refinement.
pub fn trace_run(corpus: &Corpus, gamma: &GammaSpec, p: f64, l: u32, level: u32, k_max: u32, trace_dim: usize) -> Result<TraceRunReport> {
    let mut ratios = Vec::new();
    for lv in [level, level + 1] {
        let g = gamma.grid(corpus.dim, lv, corpus.radius, trace_dim)?;
        let fs = corpus.sample(lv)?;
        let rs = par::map_slice(&fs, |(_, f)| trace_experiment(f, &g, p, l, k_max, trace_dim).map(|r| r.ratio))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        ratios.push(rs);
    }
    let entries: Vec<TraceEntry> = corpus
        .entries
        .iter()
        .zip(ratios[0].iter().zip(&ratios[1]))
        .map(|(e, (a, b))| TraceEntry {
            id: e.id.clone(),
            ratio: *a,
            ratio_refined: *b,
            drift: if *a == 0.0 && *b == 0.0 { 0.0 } else { (b / a - 1.0).abs() },
        })
        .collect();
    let max_ratio = ratios[0].iter().copied().fold(0.0, f64::max);
    let max_ratio_refined = ratios[1].iter().copied().fold(0.0, f64::max);
    let max_drift = entries.iter().filter(|e| e.ratio >= 0.01 * max_ratio).map(|e| e.drift).fold(0.0, f64::max);
    let pass = max_ratio.is_finite() && max_ratio_refined.is_finite() && max_ratio > 0.0 && max_drift < TRACE_DRIFT_TOL;
    Ok(TraceRunReport {
        schema: 1,
        gamma: gamma.clone(),
        p,
        l,
        level,
        k_max,
        entries,
        max_ratio,
        max_ratio_refined,
        max_drift,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gen_corpus, Family};

    fn config(s: f64, norms: Vec<NormSpec>) -> ExperimentConfig {
        ExperimentConfig {
            schema: 1,
            dim: 1,
            radius: 2.0,
            level: 8,
            k_max: 4,
            p: 2.0,
            q: 2.0,
            r: 1.0,
            mu: None,
            weights: WeightKind::TwoKs { s },
            corpus: CorpusConfig { seed: 1, count: 4, families: vec![Family::Bumps], spline_degree: 2 },
            norms,
        }
    }

    #[test]
    fn config_json_round_trip() {
        let c = config(0.5, vec![NormSpec::Conv { m: 2, support_radius: 1.0, bar: false }, NormSpec::Diff { l: 2 }]);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"schema\":1"));
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn undersized_moments_refused_and_forced() {
        let c = config(3.0, vec![NormSpec::Conv { m: 0, support_radius: 1.0, bar: false }, NormSpec::Conv { m: 2, support_radius: 1.0, bar: false }]);
        let v = check_hypotheses(&c).unwrap();
        assert!(v.iter().any(|v| v.condition.contains("head Hardy") && v.condition.contains("L_phi = 1")), "{v:?}");
        let corpus = gen_corpus(1, 2.0, &c.corpus).unwrap();
        assert!(matches!(equivalence_run(&corpus, &c, false), Err(Error::Hypothesis(_))));
        let rep = equivalence_run(&corpus, &c, true).unwrap();
        assert!(rep.unsafe_run);
        assert!(rep.summary().starts_with("UNSAFE"));
    }

    #[test]
    fn admissible_config_has_no_violations() {
        let c = config(0.5, vec![NormSpec::Conv { m: 2, support_radius: 1.0, bar: false }, NormSpec::Diff { l: 2 }, NormSpec::Spline { l: 2 }]);
        assert!(check_hypotheses(&c).unwrap().is_empty());
    }

    #[test]
    fn report_is_reproducible() {
        let c = config(0.5, vec![NormSpec::Conv { m: 2, support_radius: 1.0, bar: false }, NormSpec::Conv { m: 2, support_radius: 1.0, bar: true }]);
        let corpus = gen_corpus(1, 2.0, &c.corpus).unwrap();
        let a = serde_json::to_string(&equivalence_run(&corpus, &c, false).unwrap()).unwrap();
        let b = serde_json::to_string(&equivalence_run(&corpus, &c, false).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_function_embedding() {
        let f = GridFunction::zeros(1, 8, 2.0).unwrap();
        let t = make_weights(&WeightSpec::two_ks(1.0, 2.0, 1.0), 1, 8, 2.0, 4).unwrap();
        let mol = build_mollifier(1, 2, 1.0).unwrap();
        let rep = embedding_run(&[("zero".into(), f)], &t, &mol, 1.0, 4, false).unwrap();
        assert!(rep.entries[0].cubes.iter().all(|c| c.tails.iter().all(|v| *v == 0.0)));
        assert_eq!(rep.entries[0].reconstruction_error, 0.0);
    }

    #[test]
    fn embedding_refuses_small_alpha() {
        let f = GridFunction::zeros(1, 8, 2.0).unwrap();
        let t = make_weights(&WeightSpec::two_ks(0.25, 2.0, 0.5), 1, 8, 2.0, 4).unwrap();
        let mol = build_mollifier(1, 2, 1.0).unwrap();
        // theta = 1/2, bound = 1
        assert!(matches!(embedding_run(&[("zero".into(), f)], &t, &mol, 0.5, 4, false), Err(Error::Hypothesis(_))));
    }
}
