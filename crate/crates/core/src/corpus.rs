//! Seeded test-function corpus. Every entry is an analytic description, so the same
//! function can be sampled at several resolutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{invalid, Result};
use crate::grid::GridFunction;
use crate::par;
use crate::spline::bspline_eval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bumps,
    ModulatedBumps,
    PiecewisePolys,
    RandomSplines,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Bumps, Family::ModulatedBumps, Family::PiecewisePolys, Family::RandomSplines];

    pub fn name(self) -> &'static str {
        match self {
            Family::Bumps => "bumps",
            Family::ModulatedBumps => "modulated_bumps",
            Family::PiecewisePolys => "piecewise_polys",
            Family::RandomSplines => "random_splines",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| crate::error::Error::InvalidParameter(format!("unknown family '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `a · exp(−1/(1−ρ²))`, `ρ = |x − c| / w`.
    Bump { center: Vec<f64>, width: f64, amplitude: f64 },
    /// A bump times `cos(2π ω·x + phase)`.
    ModulatedBump { center: Vec<f64>, width: f64, amplitude: f64, freq: Vec<f64>, phase: f64 },
    /// Tensor product of non-uniform B-splines of `degree` on per-axis knot vectors
    /// (`degree + 2` knots each): a compactly supported piecewise polynomial.
    PiecewisePoly { degree: u32, knots: Vec<Vec<f64>>, amplitude: f64 },
    /// `Σ β_m N^l_{k,m}`.
    Spline { k: u32, l: u32, coeffs: Vec<(Vec<i64>, f64)> },
}

fn bump(rho2: f64) -> f64 {
    if rho2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - rho2)).exp()
    }
}

/// Cox-de Boor value of the single B-spline with knots `t` (degree `t.len() − 2`).
fn nonuniform_bspline(t: &[f64], x: f64) -> f64 {
    let d = t.len() - 2;
    let mut b: Vec<f64> = (0..=d).map(|i| if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 }).collect();
    for deg in 1..=d {
        for i in 0..=d - deg {
            let left = if t[i + deg] > t[i] { (x - t[i]) / (t[i + deg] - t[i]) * b[i] } else { 0.0 };
            let right = if t[i + deg + 1] > t[i + 1] { (t[i + deg + 1] - x) / (t[i + deg + 1] - t[i + 1]) * b[i + 1] } else { 0.0 };
            b[i] = left + right;
        }
    }
    b[0]
}

impl FunctionSpec {
    pub fn family(&self) -> Family {
        match self {
            FunctionSpec::Bump { .. } => Family::Bumps,
            FunctionSpec::ModulatedBump { .. } => Family::ModulatedBumps,
            FunctionSpec::PiecewisePoly { .. } => Family::PiecewisePolys,
            FunctionSpec::Spline { .. } => Family::RandomSplines,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let dist2 = |c: &[f64], w: f64| x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (w * w);
        match self {
            FunctionSpec::Bump { center, width, amplitude } => amplitude * bump(dist2(center, *width)),
            FunctionSpec::ModulatedBump { center, width, amplitude, freq, phase } => {
                let arg: f64 = x.iter().zip(freq).map(|(a, w)| a * w).sum::<f64>();
                amplitude * bump(dist2(center, *width)) * (2.0 * std::f64::consts::PI * arg + phase).cos()
            }
            FunctionSpec::PiecewisePoly { knots, amplitude, .. } => {
                amplitude * x.iter().zip(knots).map(|(xi, t)| nonuniform_bspline(t, *xi)).product::<f64>()
            }
            FunctionSpec::Spline { k, l, coeffs } => coeffs.iter().map(|(m, b)| b * bspline_eval(*l, *k, m, x)).sum(),
        }
    }

    pub fn sample(&self, dim: usize, level: u32, radius: f64) -> Result<GridFunction> {
        GridFunction::from_fn(dim, level, radius, |x| self.eval(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    /// Generator family, seed and index.
    pub provenance: String,
    pub spec: FunctionSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub schema: u32,
    pub seed: u64,
    pub dim: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub entries: Vec<CorpusEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    pub families: Vec<Family>,
    /// Degree of the `random_splines` family.
    #[serde(default = "default_spline_degree")]
    pub spline_degree: u32,
}

fn default_spline_degree() -> u32 {
    2
}

fn draw_spec(rng: &mut ChaCha8Rng, family: Family, dim: usize, radius: f64, spline_degree: u32) -> FunctionSpec {
    let half = radius / 2.0;
    match family {
        Family::Bumps | Family::ModulatedBumps => {
            let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-half / 2.0..half / 2.0)).collect();
            let width = rng.gen_range(radius / 8.0..radius / 4.0);
            let amplitude = rng.gen_range(0.5..2.0);
            if family == Family::Bumps {
                FunctionSpec::Bump { center, width, amplitude }
            } else {
                let freq = (0..dim).map(|_| rng.gen_range(1.0..3.0)).collect();
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                FunctionSpec::ModulatedBump { center, width, amplitude, freq, phase }
            }
        }
        Family::PiecewisePolys => {
            let degree = rng.gen_range(1..=3u32);
            let knots = (0..dim)
                .map(|_| {
                    let lo = rng.gen_range(-half..-half / 4.0);
                    let hi = rng.gen_range(half / 4.0..half);
                    let mut t: Vec<f64> = (0..degree).map(|_| rng.gen_range(lo..hi)).collect();
                    t.push(lo);
                    t.push(hi);
                    t.sort_by(f64::total_cmp);
                    t
                })
                .collect();
            FunctionSpec::PiecewisePoly { degree, knots, amplitude: rng.gen_range(0.5..2.0) }
        }
        Family::RandomSplines => {
            let k = rng.gen_range(1..=2u32);
            let l = spline_degree;
            let s = (k as f64).exp2();
            let lo = (-half * s).ceil() as i64;
            let hi = (half * s).floor() as i64 - l as i64 - 1;
            let mut coeffs = Vec::new();
            let mut m = vec![lo; dim];
            if hi >= lo {
                'outer: loop {
                    coeffs.push((m.clone(), rng.gen_range(-1.0..1.0)));
                    for a in 0..dim {
                        m[a] += 1;
                        if m[a] <= hi {
                            continue 'outer;
                        }
                        m[a] = lo;
                    }
                    break;
                }
            }
            FunctionSpec::Spline { k, l, coeffs }
        }
    }
}

/// Entry `i` uses family `families[i % len]` and its own ChaCha stream, so entries do not
/// depend on `count`. Everything vanishes outside `[−R/2, R/2]^n`.
pub fn gen_corpus(dim: usize, radius: f64, cfg: &CorpusConfig) -> Result<Corpus> {
    if cfg.count == 0 {
        return invalid("corpus count must be at least 1");
    }
    if cfg.families.is_empty() {
        return invalid("at least one family is required");
    }
    if !(1..=3).contains(&dim) || !(radius > 0.0) {
        return invalid("dimension must be 1..=3 and R positive");
    }
    let entries = (0..cfg.count)
        .map(|i| {
            let family = cfg.families[i % cfg.families.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            CorpusEntry {
                id: format!("{}-{:03}", family.name(), i),
                provenance: format!("{}/seed={}/index={}", family.name(), cfg.seed, i),
                spec: draw_spec(&mut rng, family, dim, radius, cfg.spline_degree),
            }
        })
        .collect();
    Ok(Corpus { schema: 1, seed: cfg.seed, dim, radius, entries })
}

impl Corpus {
    pub fn sample(&self, level: u32) -> Result<Vec<(String, GridFunction)>> {
        par::map_slice(&self.entries, |e| e.spec.sample(self.dim, level, self.radius).map(|g| (e.id.clone(), g)))
            .into_iter()
            .collect()
    }

    /// Writes `corpus.json` and one `<id>.csv` per entry sampled at `level`.
    pub fn write(&self, dir: impl AsRef<Path>, level: u32) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("corpus.json"), serde_json::to_string_pretty(self)?)?;
        for (id, g) in self.sample(level)? {
            g.write_csv(dir.join(format!("{id}.csv")))?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Corpus> {
        let c: Corpus = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if c.schema != 1 {
            return invalid(format!("unsupported corpus schema {}", c.schema));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64, count: usize, families: Vec<Family>) -> CorpusConfig {
        CorpusConfig { seed, count, families, spline_degree: 2 }
    }

    #[test]
    fn deterministic_bytes() {
        let c = cfg(7, 6, Family::ALL.to_vec());
        let a = gen_corpus(1, 2.0, &c).unwrap();
        let b = gen_corpus(1, 2.0, &c).unwrap();
        let da = a.sample(8).unwrap();
        let db = b.sample(8).unwrap();
        for ((_, x), (_, y)) in da.iter().zip(&db) {
            assert_eq!(x.to_csv(), y.to_csv());
        }
        assert_ne!(gen_corpus(1, 2.0, &cfg(8, 6, Family::ALL.to_vec())).unwrap(), a);
    }

    #[test]
    fn bumps_vanish_on_outer_half() {
        let c = gen_corpus(2, 2.0, &cfg(3, 10, vec![Family::Bumps])).unwrap();
        let fs = c.sample(6).unwrap();
        let ids: std::collections::HashSet<_> = fs.iter().map(|(id, _)| id.clone()).collect();
        assert_eq!(ids.len(), 10);
        for (_, g) in &fs {
            assert!(g.max_abs() > 0.0);
            for i in 0..g.len() {
                let x = g.point(i);
                if x.iter().any(|v| v.abs() >= 1.0) {
                    assert_eq!(g.values()[i], 0.0);
                }
            }
        }
        for w in fs.windows(2) {
            assert_ne!(w[0].1, w[1].1);
        }
    }

    #[test]
    fn all_families_supported_inside() {
        for dim in [1, 2] {
            let c = gen_corpus(dim, 2.0, &cfg(11, 8, Family::ALL.to_vec())).unwrap();
            for (id, g) in c.sample(6).unwrap() {
                assert!(g.max_abs() > 0.0, "{id}");
                for i in 0..g.len() {
                    if g.point(i).iter().any(|v| v.abs() >= 1.0) {
                        assert_eq!(g.values()[i], 0.0, "{id}");
                    }
                }
            }
        }
    }

    #[test]
    fn nonuniform_bspline_partition() {
        // uniform knots reduce to the cardinal B-spline
        let t = [0.0, 1.0, 2.0, 3.0];
        for x in [0.25, 1.0, 1.5, 2.75] {
            assert!((nonuniform_bspline(&t, x) - crate::spline::cardinal_bspline(2, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn family_names_parse() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("sines".parse::<Family>().is_err());
    }
}
