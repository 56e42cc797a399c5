//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain binary so the lines
//! show up in `cargo test` output; exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};

use besov_core::conv::{conv_field, verify_maximal_inequality};
use besov_core::corpus::{gen_corpus, Corpus, CorpusConfig, Family};
use besov_core::diff::finite_difference;
use besov_core::harness::{
    alpha_exponents, check_hypotheses, embedding_run, equivalence_run, evaluate_norm, trace_run, EquivalenceReport,
    ExperimentConfig, GammaSpec, NormSpec, CLASS_X_TOL,
};
use besov_core::hardy::{hardy_condition, hardy_stability, hardy_verify, HardyDirection, PositiveSequence};
use besov_core::mollifier::build_mollifier;
use besov_core::spline::{cardinal_bspline, spline_decompose, SplineLayer};
use besov_core::trace::{sobolev_norm, trace_weights, SobolevParams};
use besov_core::weights::{bar_transform, check_class_x, class_x_verdict, make_weights, WeightKind, WeightSpec};
use besov_core::{local_lp_norm, DyadicCube, Error, GridFunction};

type Outcome = Result<(bool, String), Error>;

struct Checks {
    ok: bool,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks { ok: true, notes: Vec::new() }
    }
    fn check(&mut self, cond: bool, note: String) {
        if !cond {
            self.ok = false;
            self.notes.push(format!("[x] {note}"));
        } else {
            self.notes.push(note);
        }
    }
    fn done(self) -> Outcome {
        Ok((self.ok, self.notes.join("; ")))
    }
}

fn corpus(dim: usize, count: usize, families: &[Family]) -> Corpus {
    gen_corpus(dim, 2.0, &CorpusConfig { seed: 20240611, count, families: families.to_vec(), spline_degree: 2 }).unwrap()
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Trapezoid rule on `n` panels; spectrally accurate for smooth compactly supported integrands.
fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..=n).map(|i| f(a + i as f64 * h) * if i == 0 || i == n { 0.5 } else { 1.0 }).sum::<f64>() * h
}

fn criterion_1() -> Outcome {
    let mut c = Checks::new();
    for m in 0..=3u32 {
        // 1D: φ = φ₀ − 2^{-1}φ₀(·/2) integrated against x^b by independent quadrature
        let mol = build_mollifier(1, m, 1.0)?;
        let phi = |x: f64| mol.phi0(&[x]) - 0.5 * mol.phi0(&[x / 2.0]);
        let mut worst = 0.0f64;
        for b in 0..=m {
            worst = worst.max(trapezoid(|x| x.powi(b as i32) * phi(x), -2.0, 2.0, 200_000).abs());
            worst = worst.max(mol.layer_kernel(1, 10)?.moment(&[b]).abs());
        }
        // 2D: all multi-indices of order ≤ M, tensor trapezoid
        let mol2 = build_mollifier(2, m, 1.0)?;
        let phi2 = |x: f64, y: f64| mol2.phi0(&[x, y]) - 0.25 * mol2.phi0(&[x / 2.0, y / 2.0]);
        let n = 800;
        let h = 4.0 / n as f64;
        let samples: Vec<(f64, f64, f64)> = (0..=n)
            .flat_map(|i| (0..=n).map(move |j| (-2.0 + i as f64 * h, -2.0 + j as f64 * h)))
            .map(|(x, y)| (x, y, phi2(x, y)))
            .collect();
        let k2 = mol2.layer_kernel(1, 7)?;
        for b0 in 0..=m {
            for b1 in 0..=(m - b0) {
                let s: f64 = samples.iter().map(|(x, y, v)| x.powi(b0 as i32) * y.powi(b1 as i32) * v).sum::<f64>() * h * h;
                worst = worst.max(s.abs()).max(k2.moment(&[b0, b1]).abs());
            }
        }
        c.check(worst <= 1e-8, format!("M={m} max |moment| {worst:.1e}"));
    }
    // annihilation of degree-≤M polynomials by the layers k ≥ 1 away from the box edge
    for m in 0..=3u32 {
        let coeffs: Vec<f64> = (0..=m).map(|i| if i % 2 == 0 { 1.0 } else { -0.7 } / (i + 1) as f64).collect();
        let mol = build_mollifier(1, m, 0.5)?;
        let err = |level: u32| -> Result<f64, Error> {
            let f = GridFunction::from_fn(1, level, 2.0, |x| poly(&coeffs, x[0]))?;
            let cf = conv_field(&f, &mol, 4)?;
            let mut e = 0.0f64;
            for k in 1..=4usize {
                for (i, v) in cf.layers[k].values().iter().enumerate() {
                    if f.point(i)[0].abs() <= 1.4 {
                        e = e.max(v.abs());
                    }
                }
            }
            Ok(e)
        };
        let (e10, e11) = (err(10)?, err(11)?);
        // exact moments leave only round-off; below 1e-11 the refinement clause is moot
        let refines = e11 <= e10 / 4.0 || e11 <= 1e-11;
        c.check(e10 <= 1e-5 && refines, format!("M={m} annihilation J=10 {e10:.1e}, J=11 {e11:.1e}"));
    }
    c.done()
}

fn criterion_2() -> Outcome {
    let mut c = Checks::new();
    // Δ^l kills polynomials of degree < l
    let mut worst = 0.0f64;
    for l in 1..=4u32 {
        let coeffs: Vec<f64> = (0..l).map(|i| 0.9f64.powi(i as i32) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = GridFunction::from_fn(1, 10, 2.0, |x| poly(&coeffs, x[0]))?;
        let hs = 3.0 * f.spacing();
        let d = finite_difference(&f, &[hs], l)?;
        for (i, v) in d.values().iter().enumerate() {
            let x = f.point(i)[0];
            if x + l as f64 * hs < 1.99 {
                worst = worst.max(v.abs());
            }
        }
        let g = GridFunction::from_fn(2, 7, 2.0, |x| poly(&coeffs, 0.6 * x[0] - 0.3 * x[1]) + 0.5 * poly(&coeffs, x[1]))?;
        let h2 = [2.0 * g.spacing(), -g.spacing()];
        let d2 = finite_difference(&g, &h2, l)?;
        for (i, v) in d2.values().iter().enumerate() {
            let x = g.point(i);
            if x[0] + l as f64 * h2[0] < 1.99 && x[1] + l as f64 * h2[1] > -1.99 {
                worst = worst.max(v.abs());
            }
        }
    }
    c.check(worst <= 1e-12, format!("Δ^l on degree<l polys {worst:.1e}"));
    // Δ^l(h) x^l = l! h^l
    let mut worst = 0.0f64;
    for l in 1..=4u32 {
        let f = GridFunction::from_fn(1, 10, 2.0, |x| x[0].powi(l as i32))?;
        let hs = 8.0 * f.spacing();
        let d = finite_difference(&f, &[hs], l)?;
        let want = (1..=l).product::<u32>() as f64 * hs.powi(l as i32);
        for (i, v) in d.values().iter().enumerate() {
            if f.point(i)[0] + l as f64 * hs < 1.99 {
                worst = worst.max((v - want).abs());
            }
        }
    }
    c.check(worst <= 1e-10, format!("Δ^l x^l = l! h^l error {worst:.1e}"));
    // partition of unity, cardinal and tensor
    let mut worst = 0.0f64;
    for l in 0..=4u32 {
        for i in 0..1000 {
            let x = -3.0 + 6.0 * i as f64 / 997.0;
            let s: f64 = (-10..10).map(|m| cardinal_bspline(l, x - m as f64)).sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    for (l, k) in [(1u32, 1u32), (2, 2), (3, 1)] {
        let mut layer = SplineLayer::zeros(k, l, 2, 6, 2.0)?;
        layer.coeffs.iter_mut().for_each(|b| *b = 1.0);
        let g = layer.evaluate()?;
        worst = g.values().iter().fold(worst, |w, v| w.max((v - 1.0).abs()));
    }
    c.check(worst <= 1e-12, format!("partition of unity {worst:.1e}"));
    // bar transform is exactly idempotent
    for (dim, level) in [(1usize, 9u32), (2, 6)] {
        let t = make_weights(&WeightSpec::power(0.5, 0.25, 2.0, 1.0), dim, level, 2.0, 4)?;
        let b = bar_transform(&t)?;
        c.check(bar_transform(&b)? == b, format!("bar idempotent dim {dim}"));
    }
    // positive homogeneity of every norm
    let cp = corpus(1, 4, &Family::ALL);
    let t = make_weights(&WeightSpec::power(0.5, 0.25, 2.0, 1.0), 1, 9, 2.0, 5)?;
    let gamma = GridFunction::from_fn(1, 9, 2.0, |x| 1.0 + x[0] * x[0])?;
    // p >= 1 with generic λ; p < 1 only with power-of-two λ, since there |·|^p amplifies
    // round-off noise in cancelling regions (that error is reported, not gated)
    let gated = [(2.0, 2.0, 0.3), (2.0, 2.0, 7.5), (1.0, 0.5, 0.3), (1.0, 0.5, 7.5), (f64::INFINITY, 1.5, 0.3), (0.5, 1.0, 0.25), (0.5, 1.0, 8.0)];
    let reported = [(0.5, 1.0, 0.3), (0.5, 1.0, 7.5)];
    let mut worst: std::collections::BTreeMap<String, f64> = Default::default();
    let mut info = 0.0f64;
    for (_, f) in cp.sample(9)? {
        for (gate, (p, q, lambda)) in gated.iter().map(|x| (true, *x)).chain(reported.iter().map(|x| (false, *x))) {
            let g = f.scaled(lambda);
            let mut note = |name: &str, a: f64, b: f64| {
                let e = if a == 0.0 && b == 0.0 { 0.0 } else { (a - lambda * b).abs() / (lambda * b).abs() };
                if gate {
                    let w = worst.entry(format!("{name}(p={p})")).or_insert(0.0);
                    *w = w.max(e);
                } else {
                    info = info.max(e);
                }
            };
            for spec in [
                NormSpec::Conv { m: 2, support_radius: 1.0, bar: false },
                NormSpec::Diff { l: 2 },
                NormSpec::AveragedDiff { l: 2 },
                NormSpec::Spline { l: 2 },
                NormSpec::Fourier,
            ] {
                let a = evaluate_norm(&g, &t, &spec, p, q, 1.0, 5)?.value;
                let b = evaluate_norm(&f, &t, &spec, p, q, 1.0, 5)?.value;
                note(&spec.label(), a, b);
            }
            let cube = DyadicCube::new(1, vec![-1]);
            note("local_lp", local_lp_norm(&g, p, &cube, 2.0)?, local_lp_norm(&f, p, &cube, 2.0)?);
            if p > 1.0 && p.is_finite() {
                let sp = SobolevParams { l: 2, p, gamma: gamma.clone(), region: None };
                note("sobolev", sobolev_norm(&g, &sp)?, sobolev_norm(&f, &sp)?);
            }
        }
    }
    let max = worst.values().copied().fold(0.0, f64::max);
    let bad: Vec<String> = worst.iter().filter(|(_, v)| **v > 1e-12).map(|(k, v)| format!("{k} {v:.1e}")).collect();
    c.check(max <= 1e-12, format!("homogeneity rel error {max:.1e}{}", bad.iter().map(|b| format!(" {b}")).collect::<String>()));
    c.notes.push(format!("p=0.5 with non-dyadic scale factors {info:.1e} (not gated)"));

    c.done()
}

fn criterion_3() -> Outcome {
    let mut c = Checks::new();
    let a = PositiveSequence::geometric(1.0, 0.5, 40)?;
    let beta = PositiveSequence::geometric(1.0, 2f64.sqrt(), 40)?;
    let ratio = hardy_verify(&a, &beta, 2.0, HardyDirection::Tail)?;
    c.check((ratio - 2.0).abs() <= 1e-9, format!("geometric ratio {ratio:.12}"));
    // finite-condition cases: bounded under truncation doubling
    let growth = |n: usize| -> Result<f64, Error> {
        let a = PositiveSequence::from_terms(&(0..n).map(|k| 1.0 / ((k + 1) * (k + 1)) as f64).collect::<Vec<_>>())?;
        let b = PositiveSequence::from_terms(&(0..n).map(|k| (k as f64 / 4.0).exp2()).collect::<Vec<_>>())?;
        hardy_verify(&a, &b, 2.0, HardyDirection::Tail)
    };
    let (g64, g128) = (growth(64)?, growth(128)?);
    c.check(g128 < 2.0 * g64, format!("verify ratio {g64:.4} -> {g128:.4}"));
    let cases: [(fn(usize) -> f64, f64, HardyDirection); 3] = [
        (|k| k as f64, 1.0, HardyDirection::Tail),
        (|k| -(k as f64), 1.0, HardyDirection::Head),
        (|k| 0.5 * k as f64, 2.0, HardyDirection::Tail),
    ];
    for (i, (lb, s, dir)) in cases.iter().enumerate() {
        let v = hardy_stability(lb, *s, *dir)?;
        c.check(v.finite && v.value_256 < 2.0 * v.value_128, format!("finite case {i}: {:.6} -> {:.6}", v.value_128, v.value_256));
    }
    // β_k = 1, s = 2: the tail sup grows with the truncation length
    let cond = |n: usize| hardy_condition(&PositiveSequence::from_log2(vec![0.0; 2 * n])?, 2.0, HardyDirection::Tail, n);
    let (v, w) = (cond(64)?, cond(128)?);
    let neg = hardy_stability(|_| 0.0, 2.0, HardyDirection::Tail)?;
    c.check(w > 1.1 * v && neg.diverging, format!("negative control {v:.3} -> {w:.3}"));
    c.done()
}

fn criterion_4() -> Outcome {
    let mut c = Checks::new();
    for (dim, level, s) in [(1usize, 9u32, 0.5), (1, 9, -1.0), (2, 6, 1.0)] {
        let t = make_weights(&WeightSpec::two_ks(s, 2.0, 1.0), dim, level, 1.0, 4)?;
        let r = check_class_x(&t, 4, 1.0, 1.0)?;
        c.check(r.member && (r.c1 - 1.0).abs() <= 1e-9 && (r.c2 - 1.0).abs() <= 1e-9, format!("2^(ks) dim {dim} s={s}: C1={:.12} C2={:.12}", r.c1, r.c2));
    }
    let mut line = Vec::new();
    for beta in [-0.75, -0.5, -0.25, 0.0, 0.25] {
        let v = class_x_verdict(&WeightSpec::power(0.0, beta, 2.0, 1.0), 1, 8, 1.0, 4, (1.0, 1.0), CLASS_X_TOL)?;
        let expect = beta > -0.5;
        line.push(format!("{beta}:{}({:.3})", if v.member { "in" } else { "out" }, v.growth));
        c.check(v.member == expect, format!("beta={beta} member={} growth={:.4}", v.member, v.growth));
    }
    c.notes.push(format!("sweep {}", line.join(" ")));
    c.done()
}

fn criterion_5() -> Outcome {
    let mut c = Checks::new();
    let cp = corpus(1, 10, &Family::ALL);
    let mol = build_mollifier(1, 2, 0.5)?;
    let (f9, f10) = (cp.sample(9)?, cp.sample(10)?);
    for r in [0.5, 1.0, 2.0] {
        for a in [2.0, 4.0] {
            let fit = |fs: &[(String, GridFunction)]| -> Result<f64, Error> {
                let mut best = 0.0f64;
                for (_, f) in fs {
                    best = best.max(verify_maximal_inequality(f, &mol, r, 1.0, a, 5)?.constant);
                }
                Ok(best)
            };
            let (c9, c10) = (fit(&f9)?, fit(&f10)?);
            let drift = (c10 / c9 - 1.0).abs();
            c.check(c9.is_finite() && c10.is_finite() && drift < 0.2, format!("r={r} A={a}: C {c9:.4} -> {c10:.4}"));
        }
    }
    c.done()
}

fn base_config(dim: usize, level: u32, k_max: u32, weights: WeightKind, norms: Vec<NormSpec>, count: usize) -> ExperimentConfig {
    ExperimentConfig {
        schema: 1,
        dim,
        radius: 2.0,
        level,
        k_max,
        p: 2.0,
        q: 2.0,
        r: 1.0,
        mu: None,
        weights,
        corpus: CorpusConfig { seed: 20240611, count, families: Family::ALL.to_vec(), spline_degree: 2 },
        norms,
    }
}

fn run_equiv(cfg: &ExperimentConfig) -> Result<EquivalenceReport, Error> {
    let cp = gen_corpus(cfg.dim, cfg.radius, &cfg.corpus)?;
    equivalence_run(&cp, cfg, false)
}

fn pair_notes(tag: &str, rep: &EquivalenceReport, c: &mut Checks) {
    for p in &rep.pairs {
        c.check(p.pass, format!("{tag} {} / {}: spread {:.4} -> {:.4}", p.a, p.b, p.spread, p.spread_refined));
    }
}

fn power_quarter(s: f64) -> WeightKind {
    WeightKind::PowerTimes2ks { s, beta: 0.25, center: None }
}

fn criterion_6() -> Outcome {
    let mut c = Checks::new();
    let norms = vec![
        NormSpec::Conv { m: 0, support_radius: 1.0, bar: false },
        NormSpec::Conv { m: 2, support_radius: 0.75, bar: false },
    ];
    for (tag, w) in [("gamma=1", WeightKind::TwoKs { s: 0.5 }), ("gamma=|x|^1/4", power_quarter(0.5))] {
        let rep = run_equiv(&base_config(1, 9, 5, w, norms.clone(), 10))?;
        pair_notes(tag, &rep, &mut c);
    }
    // undersized moments: L_phi = 1 with t_k = 2^{3k}
    let bad = base_config(1, 9, 5, WeightKind::TwoKs { s: 3.0 }, norms, 10);
    let v = check_hypotheses(&bad)?;
    let refused = matches!(run_equiv(&bad), Err(Error::Hypothesis(_)));
    c.check(refused && v.iter().any(|v| v.condition.contains("L_phi = 1")), format!("negative control refused={refused}"));
    c.done()
}

fn criterion_7() -> Outcome {
    let mut c = Checks::new();
    for (tag, w) in [("gamma=1", WeightKind::TwoKs { s: 0.5 }), ("gamma=|x|^1/4", power_quarter(0.5))] {
        let norms = vec![
            NormSpec::Conv { m: 2, support_radius: 0.75, bar: false },
            NormSpec::Conv { m: 2, support_radius: 0.75, bar: true },
        ];
        let rep = run_equiv(&base_config(1, 9, 5, w, norms, 10))?;
        pair_notes(tag, &rep, &mut c);
    }
    c.done()
}

fn criterion_8() -> Outcome {
    let mut c = Checks::new();
    let cp = corpus(1, 10, &Family::ALL);
    let mol = build_mollifier(1, 2, 0.5)?;
    for r in [1.0, 2.0] {
        let t = make_weights(&WeightSpec::two_ks(1.0, 2.0, r), 1, 10, 2.0, 6)?;
        let rep = embedding_run(&cp.sample(10)?, &t, &mol, r, 6, false)?;
        let spline_err = rep
            .entries
            .iter()
            .zip(&cp.entries)
            .filter(|(_, e)| e.spec.family() == Family::RandomSplines)
            .map(|(x, _)| x.reconstruction_error)
            .fold(0.0, f64::max);
        c.check(
            rep.max_rate <= 0.75,
            format!("r={r}: alpha1={} > {}, max rate {:.3}, spline partial-sum error {spline_err:.1e}", rep.alpha1, rep.alpha1_bound, rep.max_rate),
        );
    }
    c.done()
}

fn criterion_9() -> Outcome {
    let mut c = Checks::new();
    let l = 2u32;
    let norms = vec![NormSpec::Conv { m: 2, support_radius: 0.75, bar: false }, NormSpec::Diff { l }, NormSpec::Spline { l }];
    for (tag, dim, level, k_max, w) in [
        ("1D gamma=1", 1usize, 9u32, 5u32, WeightKind::TwoKs { s: 0.5 }),
        ("1D gamma=|x|^1/4", 1, 9, 5, power_quarter(0.5)),
        ("2D gamma=1", 2, 6, 3, WeightKind::TwoKs { s: 0.5 }),
    ] {
        let cfg = base_config(dim, level, k_max, w, norms.clone(), 10);
        // explicit-exponent hypotheses: min{l, L_phi+1} > alpha2, alpha1 > n(1/theta − 1/max{r,1})
        let t = cfg.weights_at(level)?;
        let (a1, _) = alpha_exponents(&t.alpha1);
        let (_, a2) = alpha_exponents(&t.alpha2);
        let lphi = build_mollifier(dim, 2, 0.75)?.l_phi as f64;
        let theta = 1f64.min(cfg.r).min(cfg.p);
        let hyp = (l as f64).min(lphi + 1.0) > a2 && a1 > dim as f64 * (1.0 / theta - 1.0 / cfg.r.max(1.0));
        c.check(hyp, format!("{tag} exponent hypotheses"));
        let rep = run_equiv(&cfg)?;
        pair_notes(tag, &rep, &mut c);
    }
    // spline entries are reproduced exactly by the decomposition
    let cp = corpus(1, 8, &[Family::RandomSplines]);
    let mut worst = 0.0f64;
    for (_, f) in cp.sample(10)? {
        let dec = spline_decompose(&f, l, 6, 1.0)?;
        let rec = dec.reconstruct()?;
        worst = worst.max(f.sub(&rec)?.max_abs() / f.max_abs());
    }
    c.check(worst <= 1e-10, format!("spline reconstruction {worst:.1e}"));
    c.done()
}

fn criterion_10() -> Outcome {
    let mut c = Checks::new();
    for s in [0.5, 1.0] {
        let norms = vec![NormSpec::Conv { m: 2, support_radius: 0.75, bar: false }, NormSpec::Fourier];
        let rep = run_equiv(&base_config(1, 9, 5, WeightKind::TwoKs { s }, norms, 10))?;
        pair_notes(&format!("s={s}"), &rep, &mut c);
    }
    c.done()
}

fn criterion_11() -> Outcome {
    let mut c = Checks::new();
    let (p, k_max) = (2.0, 4u32);
    let gamma = GridFunction::constant(2, 7, 1.0, 1.0)?;
    let tw = trace_weights(&gamma, p, k_max, 1, 1)?;
    let mut worst = 0.0f64;
    for (k, g) in tw.levels.iter().enumerate() {
        let want = (-2.0 * k as f64 / p).exp2();
        worst = g.values().iter().fold(worst, |w, v| w.max((v - want).abs() / want));
    }
    c.check(worst <= 0.01, format!("shell volumes rel error {worst:.1e}"));
    let cp = corpus(2, 10, &Family::ALL);
    for g in [GammaSpec::One, GammaSpec::NormalPower { beta: 0.25 }] {
        let rep = trace_run(&cp, &g, p, 2, 6, 3, 1)?;
        c.check(
            rep.pass,
            format!("{g:?}: max ratio {:.4} -> {:.4}, max drift {:.3}", rep.max_ratio, rep.max_ratio_refined, rep.max_drift),
        );
    }
    c.done()
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("moment machinery", criterion_1),
        ("exact algebra", criterion_2),
        ("hardy suite", criterion_3),
        ("class checks", criterion_4),
        ("maximal inequality constant", criterion_5),
        ("mollifier independence", criterion_6),
        ("bar-weight equivalence", criterion_7),
        ("partial-sum convergence", criterion_8),
        ("conv/diff/spline equivalence", criterion_9),
        ("fourier cross-check", criterion_10),
        ("trace inequality", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let tag = format!("{}", i + 1);
        if !filter.is_empty() && !filter.contains(&tag) {
            continue;
        }
        let start = std::time::Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok((ok, d))) => (ok, d),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name} ({:.1}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
