//! `besov`: corpus and weight generation, single norms, class and Hardy checks, and the
//! equivalence, convergence and trace experiments. Thread count comes from `RAYON_NUM_THREADS`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use besov_core::corpus::{gen_corpus, CorpusConfig, Family};
use besov_core::ext;
use besov_core::hardy::{hardy_condition, hardy_stability, HardyDirection, PositiveSequence};
use besov_core::harness::{embedding_run, equivalence_run, trace_run, evaluate_norm, ExperimentConfig, GammaSpec, NormSpec};
use besov_core::mollifier::build_mollifier;
use besov_core::weights::{
    check_ap_loc, check_class_x, check_class_y, make_weights, LevelSource, WeightManifest, WeightSequence,
    WeightSpec, YParams,
};
use besov_core::{Error, GridFunction};

const CSV_HEADER: &str = "function_id,norm_type,value,K,J,tail_fraction\n";

#[derive(Parser)]
#[command(name = "besov", version, about = "Variable-smoothness Besov norms on sampled functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a corpus, a weight manifest or a mollifier.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Evaluate one norm of a sampled function.
    Norm(NormArgs),
    /// Weight-class, Hardy and local A_p checks.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Norm-equivalence experiment over a generated corpus.
    Equiv(EquivArgs),
    /// Partial-sum convergence on unit cubes.
    Embed(EmbedArgs),
    /// Trace inequality over the corpus.
    Trace(TraceArgs),
}

#[derive(Subcommand)]
enum GenCmd {
    Corpus(GenCorpusArgs),
    Weights(GenWeightsArgs),
    Mollifier(GenMollifierArgs),
}

/// Parses `inf`/`infinity` as well as plain numbers.
fn ext_value(s: &str) -> std::result::Result<f64, String> {
    ext::parse(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Comma-separated families (default: all).
    #[arg(long, value_delimiter = ',')]
    families: Vec<Family>,
    #[arg(long, default_value_t = 2)]
    spline_degree: u32,
    /// Sampling level `J` of the written CSV files.
    #[arg(long, default_value_t = 8)]
    level: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    TwoKs,
    Power,
}

#[derive(Args)]
struct WeightGenArgs {
    #[arg(long, value_enum, default_value = "two-ks")]
    kind: KindArg,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value = "2", value_parser = ext_value)]
    p: f64,
    #[arg(long, default_value = "1", value_parser = ext_value)]
    r: f64,
}

impl WeightGenArgs {
    fn spec(&self) -> WeightSpec {
        match self.kind {
            KindArg::TwoKs => WeightSpec::two_ks(self.s, self.p, self.r),
            KindArg::Power => WeightSpec::power(self.s, self.beta, self.p, self.r),
        }
    }
}

#[derive(Args)]
struct GenWeightsArgs {
    #[command(flatten)]
    w: WeightGenArgs,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    level: u32,
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    /// Finest level `K`.
    #[arg(long = "levels", default_value_t = 4)]
    k_max: u32,
    /// Output directory for `manifest.json` and `t_<k>.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenMollifierArgs {
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Requested number of vanishing moments.
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value_t = 1.0)]
    support_radius: f64,
    #[arg(long, default_value_t = 8)]
    level: u32,
    /// Output stem; writes `<stem>.json` and `<stem>.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Conv,
    Diff,
    AvgDiff,
    Spline,
    Fourier,
}

#[derive(Args)]
struct NormArgs {
    #[arg(value_enum)]
    kind: NormKind,
    #[arg(long)]
    input: PathBuf,
    /// Weight manifest; without it `t_k = 2^{ks}` on the input grid.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    #[arg(long, default_value = "2", value_parser = ext_value)]
    p: f64,
    #[arg(long, default_value = "2", value_parser = ext_value)]
    q: f64,
    #[arg(long, default_value = "1", value_parser = ext_value)]
    r: f64,
    #[arg(long, default_value_t = 2)]
    l: u32,
    #[arg(long = "levels", default_value_t = 4)]
    k_max: u32,
    /// Moments of the mollifier for `conv`.
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value_t = 1.0)]
    support_radius: f64,
    /// Use the bar-transformed weights for `conv`.
    #[arg(long)]
    bar: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCmd {
    ClassX(ClassXArgs),
    ClassY(ClassYArgs),
    Hardy(HardyArgs),
    ApLoc(ApLocArgs),
}

#[derive(Args)]
struct ClassXArgs {
    #[arg(long)]
    weights: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
}

#[derive(Args)]
struct ClassYArgs {
    #[arg(long)]
    weights: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    alpha1: f64,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha3: f64,
}

#[derive(Args)]
struct HardyArgs {
    /// `β_k = 2^{slope·k + offset}`; judged by the truncation-doubling rule.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "terms")]
    log2_slope: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    log2_offset: f64,
    /// Explicit comma-separated terms; the sup runs over all but the last.
    #[arg(long, value_delimiter = ',')]
    terms: Vec<f64>,
    #[arg(long, value_parser = ext_value)]
    s: f64,
    #[arg(long, default_value = "tail")]
    direction: HardyDirection,
}

#[derive(Args)]
struct ApLocArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = ext_value)]
    u: f64,
    #[arg(long, default_value_t = 1.0)]
    side_cap: f64,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run even when hypotheses fail; the report is marked UNSAFE.
    #[arg(long)]
    force: bool,
    /// Override `μ = min{1, q, r}`.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full JSON report.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value_t = 0.5)]
    support_radius: f64,
    #[arg(long)]
    force: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GammaArg {
    One,
    NormalPower,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "one")]
    gamma: GammaArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 2)]
    l: u32,
    /// Dimension of the trace plane.
    #[arg(long, default_value_t = 1)]
    trace_dim: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json(path: Option<&Path>, v: serde_json::Result<serde_json::Value>) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(&v?)?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn gen(cmd: GenCmd) -> Result<u8> {
    match cmd {
        GenCmd::Corpus(a) => {
            let families = if a.families.is_empty() { Family::ALL.to_vec() } else { a.families };
            let cfg = CorpusConfig { seed: a.seed, count: a.count, families, spline_degree: a.spline_degree };
            let corpus = gen_corpus(a.dim, a.radius, &cfg)?;
            corpus.write(&a.out, a.level)?;
            eprintln!("wrote {} entries to {}", corpus.entries.len(), a.out.display());
        }
        GenCmd::Weights(a) => {
            let t = make_weights(&a.w.spec(), a.dim, a.level, a.radius, a.k_max)?;
            std::fs::create_dir_all(&a.out)?;
            let mut paths = Vec::new();
            for (k, g) in t.levels.iter().enumerate() {
                let name = format!("t_{k}.csv");
                g.write_csv(a.out.join(&name))?;
                paths.push(name);
            }
            let manifest = WeightManifest {
                p: t.p,
                sigma1: Some(t.sigma1),
                sigma2: Some(t.sigma2),
                alpha1: Some(t.alpha1.clone()),
                alpha2: Some(t.alpha2.clone()),
                alpha3: Some(t.alpha3),
                levels: LevelSource::Paths(paths),
            };
            std::fs::write(a.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        }
        GenCmd::Mollifier(a) => {
            let mol = build_mollifier(a.dim, a.m, a.support_radius)?;
            mol.write(&a.out, a.level)?;
            eprintln!("L_phi = {}", mol.l_phi);
        }
    }
    Ok(0)
}

fn load_weights(path: Option<&Path>, f: &GridFunction, s: f64, p: f64, r: f64, k_max: u32) -> Result<WeightSequence> {
    match path {
        Some(p) => Ok(WeightManifest::load(p)?),
        None => Ok(make_weights(&WeightSpec::two_ks(s, p, r), f.dim(), f.level(), f.radius(), k_max)?),
    }
}

fn norm(a: NormArgs) -> Result<u8> {
    let f = GridFunction::read_csv(&a.input)?;
    let t = load_weights(a.weights.as_deref(), &f, a.s, a.p, a.r, a.k_max)?;
    let spec = match a.kind {
        NormKind::Conv => NormSpec::Conv { m: a.m, support_radius: a.support_radius, bar: a.bar },
        NormKind::Diff => NormSpec::Diff { l: a.l },
        NormKind::AvgDiff => NormSpec::AveragedDiff { l: a.l },
        NormKind::Spline => NormSpec::Spline { l: a.l },
        NormKind::Fourier => NormSpec::Fourier,
    };
    let v = evaluate_norm(&f, &t, &spec, a.p, a.q, a.r, a.k_max)?;
    let id = a.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let text = format!("{CSV_HEADER}{id},{},{},{},{},{}\n", spec.label(), v.value, a.k_max, f.level(), v.tail_fraction);
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn class_csv(rep: &besov_core::weights::ClassReport) -> String {
    format!("member,c1,c2,c_alpha3\n{},{},{},{}\n", rep.member, rep.c1, rep.c2, rep.c_alpha3)
}

fn check(cmd: CheckCmd) -> Result<u8> {
    match cmd {
        CheckCmd::ClassX(a) => {
            let t = WeightManifest::load(&a.weights)?;
            print!("{}", class_csv(&check_class_x(&t, t.k_max(), a.c1, a.c2)?));
        }
        CheckCmd::ClassY(a) => {
            let t = WeightManifest::load(&a.weights)?;
            let y = YParams { alpha1: a.alpha1, alpha2: a.alpha2, alpha3: a.alpha3 };
            print!("{}", class_csv(&check_class_y(&t, y, t.k_max())?));
        }
        CheckCmd::Hardy(a) => {
            let dir = match a.direction {
                HardyDirection::Tail => "tail",
                HardyDirection::Head => "head",
            };
            println!("direction,s,value,finite");
            if let Some(slope) = a.log2_slope {
                let v = hardy_stability(|k| slope * k as f64 + a.log2_offset, a.s, a.direction)?;
                println!("{dir},{},{:?},{}", a.s, v.value_256, v.finite);
            } else {
                if a.terms.len() < 2 {
                    bail!("give --log2-slope or at least two --terms");
                }
                let seq = PositiveSequence::from_terms(&a.terms)?;
                let v = hardy_condition(&seq, a.s, a.direction, a.terms.len() - 2)?;
                println!("{dir},{},{:?},{}", a.s, v, v.is_finite());
            }
        }
        CheckCmd::ApLoc(a) => {
            let w = GridFunction::read_csv(&a.input)?;
            println!("u,side_cap,constant\n{},{},{:?}", a.u, a.side_cap, check_ap_loc(&w, a.u, a.side_cap)?);
        }
    }
    Ok(0)
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn equiv(a: EquivArgs) -> Result<u8> {
    let mut cfg = load_config(&a.config)?;
    if a.mu.is_some() {
        cfg.mu = a.mu;
    }
    let corpus = gen_corpus(cfg.dim, cfg.radius, &cfg.corpus)?;
    let rep = equivalence_run(&corpus, &cfg, a.force)?;
    emit(a.out.as_deref(), &rep.to_csv())?;
    write_json(a.json.as_deref(), serde_json::to_value(&rep))?;
    eprint!("{}", rep.summary());
    Ok(if rep.pass { 0 } else { 1 })
}

fn embed(a: EmbedArgs) -> Result<u8> {
    let cfg = load_config(&a.config)?;
    let corpus = gen_corpus(cfg.dim, cfg.radius, &cfg.corpus)?;
    let t = cfg.weights_at(cfg.level)?;
    let mol = build_mollifier(cfg.dim, a.m, a.support_radius)?;
    let rep = embedding_run(&corpus.sample(cfg.level)?, &t, &mol, cfg.r, cfg.k_max, a.force)?;
    let mut text = String::from(CSV_HEADER);
    for e in &rep.entries {
        text.push_str(&format!("{},partial_sum_rate,{},{},{},\n", e.id, e.rate, cfg.k_max, cfg.level));
        text.push_str(&format!("{},reconstruction_error,{},{},{},\n", e.id, e.reconstruction_error, cfg.k_max, cfg.level));
    }
    emit(a.out.as_deref(), &text)?;
    write_json(a.json.as_deref(), serde_json::to_value(&rep))?;
    if rep.unsafe_run {
        eprintln!("UNSAFE: alpha1 = {} does not exceed {}, run forced", rep.alpha1, rep.alpha1_bound);
    }
    eprintln!("max rate {:.4}", rep.max_rate);
    Ok(0)
}

fn trace(a: TraceArgs) -> Result<u8> {
    let cfg = load_config(&a.config)?;
    let corpus = gen_corpus(cfg.dim, cfg.radius, &cfg.corpus)?;
    let gamma = match a.gamma {
        GammaArg::One => GammaSpec::One,
        GammaArg::NormalPower => GammaSpec::NormalPower { beta: a.beta },
    };
    let rep = trace_run(&corpus, &gamma, cfg.p, a.l, cfg.level, cfg.k_max, a.trace_dim)?;
    let mut text = String::from(CSV_HEADER);
    for (level, refined) in [(cfg.level, false), (cfg.level + 1, true)] {
        for e in &rep.entries {
            let v = if refined { e.ratio_refined } else { e.ratio };
            text.push_str(&format!("{},trace_ratio,{},{},{},\n", e.id, v, cfg.k_max, level));
        }
    }
    emit(a.out.as_deref(), &text)?;
    write_json(a.json.as_deref(), serde_json::to_value(&rep))?;
    eprintln!(
        "{} max ratio {:.4} -> {:.4}, max drift {:.3}",
        if rep.pass { "PASS" } else { "FAIL" },
        rep.max_ratio,
        rep.max_ratio_refined,
        rep.max_drift
    );
    Ok(if rep.pass { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Gen(c) => gen(c),
        Cmd::Norm(a) => norm(a),
        Cmd::Check(c) => check(c),
        Cmd::Equiv(a) => equiv(a),
        Cmd::Embed(a) => embed(a),
        Cmd::Trace(a) => trace(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if let Some(Error::Hypothesis(msg)) = e.downcast_ref::<Error>() {
                eprintln!("refused: hypotheses not satisfied: {msg}");
                return ExitCode::from(2);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
