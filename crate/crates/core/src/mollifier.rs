//! Radial mollifiers `φ₀` with vanishing moments, built from dilated smooth bumps,
//! and their dyadic layers `φ_k`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::kernel::Kernel;

const MAX_COND: f64 = 1e10;

fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Surface measure of the unit sphere in `R^n` (`n = 1` counts two points).
fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => unreachable!(),
    }
}

/// Composite Simpson rule on `[a, b]` with `2n` panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let m = 2 * n;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `C_n` with `∫_{R^n} C_n b(|x|) dx = 1`.
fn bump_constant(n: usize) -> f64 {
    let radial = simpson(|r| r.powi(n as i32 - 1) * bump_profile(r), 0.0, 1.0, 20_000);
    1.0 / (sphere_area(n) * radial)
}

/// Adds `Σ_γ a_γ w(u) u^γ` (even `γ`, `|γ| ≤ order`, `u = d / radius`) so that the discrete
/// sums `Σ u^β g` vanish for even `β` with `1 ≤ |β| ≤ order` and `Σ g = mass`.
/// Odd moments of the symmetric samples are already zero.
fn correct_moments(mut values: Vec<f64>, dim: usize, radius: usize, order: u32, mass: f64) -> Result<Vec<f64>> {
    let mut set: Vec<[u32; 3]> = Vec::new();
    let e = order / 2;
    for a in 0..=e {
        for b in 0..=(if dim > 1 { e - a } else { 0 }) {
            for c in 0..=(if dim > 2 { e - a - b } else { 0 }) {
                set.push([2 * a, 2 * b, 2 * c]);
            }
        }
    }
    let shape = crate::grid::Shape3::new(dim, 2 * radius + 1);
    let r = radius as f64;
    let coords: Vec<[f64; 3]> = (0..shape.len())
        .map(|idx| {
            let mi = shape.multi(idx);
            let mut u = [0.0; 3];
            for a in 0..dim {
                u[a] = (mi[a] as f64 - r) / r;
            }
            u
        })
        .collect();
    let mono = |u: &[f64; 3], b: &[u32; 3]| u[0].powi(b[0] as i32) * u[1].powi(b[1] as i32) * u[2].powi(b[2] as i32);
    let window: Vec<f64> = coords.iter().map(|u| bump_profile((u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt())).collect();
    let n = set.len();
    let gram = DMatrix::from_fn(n, n, |i, j| {
        coords.iter().zip(&window).map(|(u, w)| w * mono(u, &set[i]) * mono(u, &set[j])).sum()
    });
    let rhs = DVector::from_fn(n, |i, _| {
        let target = if i == 0 { mass } else { 0.0 };
        target - coords.iter().zip(&values).map(|(u, g)| g * mono(u, &set[i])).sum::<f64>()
    });
    let a = gram.lu().solve(&rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;
    for ((v, u), w) in values.iter_mut().zip(&coords).zip(&window) {
        *v += w * set.iter().zip(a.iter()).map(|(b, c)| c * mono(u, b)).sum::<f64>();
    }
    Ok(values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub dim: usize,
    /// Radius of `supp φ₀`.
    pub support_radius: f64,
    #[serde(rename = "L_phi")]
    pub l_phi: u32,
    #[serde(rename = "M_requested")]
    pub m_requested: u32,
    pub coeffs: Vec<f64>,
    pub dilations: Vec<f64>,
    #[serde(skip)]
    norm: f64,
}

/// `φ₀ = Σ c_i λ_i^{-n} b(|x|/λ_i)` with `Σ c_i = 1` and `Σ c_i λ_i^{2s} = 0` for `1 ≤ s ≤ ⌊M/2⌋`.
/// Odd moments vanish by symmetry, so every moment of order `1..=M` vanishes.
pub fn build_mollifier(dim: usize, m: u32, support_radius: f64) -> Result<Mollifier> {
    if !(1..=3).contains(&dim) {
        return invalid("dimension must be 1, 2 or 3");
    }
    if !(support_radius > 0.0 && support_radius.is_finite()) {
        return invalid("support radius must be positive");
    }
    let half = (m / 2) as usize;
    let dilations: Vec<f64> = (0..=half).map(|i| support_radius * (-(i as f64) / 2.0).exp2()).collect();
    let size = half + 1;
    let a = DMatrix::from_fn(size, size, |s, i| dilations[i].powi(2 * s as i32));
    let sv = a.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > MAX_COND {
        return Err(Error::IllConditioned(cond));
    }
    let mut rhs = DVector::zeros(size);
    rhs[0] = 1.0;
    let c = a.lu().solve(&rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;
    Ok(Mollifier {
        dim,
        support_radius,
        l_phi: 2 * half as u32 + 1,
        m_requested: m,
        coeffs: c.iter().copied().collect(),
        dilations,
        norm: bump_constant(dim),
    })
}

impl Mollifier {
    fn ensure_norm(&mut self) {
        if self.norm == 0.0 {
            self.norm = bump_constant(self.dim);
        }
    }

    /// Radial profile `φ₀(|x| = rho)`.
    pub fn phi0_radial(&self, rho: f64) -> f64 {
        let n = self.dim as i32;
        self.coeffs
            .iter()
            .zip(&self.dilations)
            .map(|(c, l)| c * l.powi(-n) * bump_profile(rho / l))
            .sum::<f64>()
            * self.norm
    }

    pub fn phi0(&self, x: &[f64]) -> f64 {
        self.phi0_radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `φ_k` at radius `rho`: `φ₀` for `k = 0`, else `2^{kn}φ₀(2^k·) − 2^{(k−1)n}φ₀(2^{k−1}·)`.
    pub fn layer_radial(&self, k: u32, rho: f64) -> f64 {
        let n = self.dim as f64;
        let fine = (k as f64 * n).exp2() * self.phi0_radial(rho * (k as f64).exp2());
        if k == 0 {
            return fine;
        }
        let km = k as f64 - 1.0;
        fine - (km * n).exp2() * self.phi0_radial(rho * km.exp2())
    }

    /// Support radius of `φ_k`.
    pub fn layer_support(&self, k: u32) -> f64 {
        let base = if k == 0 { self.support_radius } else { 2.0 * self.support_radius };
        base * (-(k as f64)).exp2()
    }

    /// `φ_k` sampled on the level-`level` node lattice.
    pub fn layer_kernel(&self, k: u32, level: u32) -> Result<Kernel> {
        let cells = self.layer_support(k) * (level as f64).exp2();
        if cells < 2.0 {
            return Err(Error::Resolution(k));
        }
        let rc = cells.ceil() as usize;
        let raw = Kernel::from_fn(self.dim, level, rc, |x| {
            self.layer_radial(k, x.iter().map(|v| v * v).sum::<f64>().sqrt())
        })?;
        let h = (-(level as f64)).exp2();
        let mass = if k == 0 { h.powi(-(self.dim as i32)) } else { 0.0 };
        let values = correct_moments(raw.values().to_vec(), self.dim, rc, 2 * (self.m_requested / 2), mass)?;
        Kernel::from_values(self.dim, level, rc, values)
    }

    pub fn phi0_kernel(&self, level: u32) -> Result<Kernel> {
        self.layer_kernel(0, level)
    }

    /// Writes `<stem>.json` metadata and `<stem>.csv` with `φ₀` sampled at `level`.
    pub fn write(&self, stem: impl AsRef<Path>, level: u32) -> Result<()> {
        let stem = stem.as_ref();
        std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(self)?)?;
        std::fs::write(stem.with_extension("csv"), self.phi0_kernel(level)?.to_csv())?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Mollifier> {
        let mut m: Mollifier = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if !(1..=3).contains(&m.dim) || m.coeffs.len() != m.dilations.len() || m.coeffs.is_empty() {
            return invalid("malformed mollifier metadata");
        }
        m.ensure_norm();
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_in_each_dim() {
        for (dim, level) in [(1, 10), (2, 7), (3, 5)] {
            let m = build_mollifier(dim, 0, 1.0).unwrap();
            let k = m.phi0_kernel(level).unwrap();
            assert!((k.mass() - 1.0).abs() < 1e-8, "dim {dim}: {}", k.mass());
        }
    }

    #[test]
    fn vanishing_moments_m2() {
        let m = build_mollifier(1, 2, 1.0).unwrap();
        assert_eq!(m.l_phi, 3);
        let phi = m.layer_kernel(1, 10).unwrap();
        for b in 0..=3 {
            assert!(phi.moment(&[b]).abs() < 1e-8, "moment {b}: {}", phi.moment(&[b]));
        }
        let phi0 = m.phi0_kernel(10).unwrap();
        assert!((phi0.mass() - 1.0).abs() < 1e-8);
        assert!(phi0.moment(&[2]).abs() < 1e-8);
        assert!(phi0.moment(&[1]).abs() < 1e-14);
    }

    #[test]
    fn ill_conditioned_rejected() {
        assert!(matches!(build_mollifier(1, 40, 1.0), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = build_mollifier(2, 2, 0.75).unwrap();
        m.write(dir.path().join("mol"), 6).unwrap();
        let back = Mollifier::read_json(dir.path().join("mol.json")).unwrap();
        assert_eq!(back.phi0(&[0.1, 0.2]), m.phi0(&[0.1, 0.2]));
        let csv = std::fs::read_to_string(dir.path().join("mol.csv")).unwrap();
        assert_eq!(Kernel::from_csv(&csv).unwrap(), m.phi0_kernel(6).unwrap());
    }
}
