//! Node-centred convolution kernels and the discrete convolution engine.
//!
//! A kernel of level `J` and radius `r` stores samples at the offsets `d·h`,
//! `d ∈ [-r, r]^n`. Convolving a cell-centred grid function with it keeps the
//! result on the same cell-centred grid.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Shape3};
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    dim: usize,
    level: u32,
    radius_cells: usize,
    values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvMethod {
    Auto,
    Direct,
    Fft,
}

impl Kernel {
    pub fn from_values(dim: usize, level: u32, radius_cells: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        let side = 2 * radius_cells + 1;
        if values.len() != side.pow(dim as u32) {
            return Err(Error::InvalidGrid("kernel sample count".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite kernel sample".into()));
        }
        Ok(Kernel { dim, level, radius_cells, values })
    }

    /// Samples `g` at the nodes `d·h`, `|d_i| <= radius_cells`.
    pub fn from_fn<F>(dim: usize, level: u32, radius_cells: usize, g: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let side = 2 * radius_cells + 1;
        let shape = Shape3::new(dim, side);
        let h = (-(level as f64)).exp2();
        let r = radius_cells as f64;
        let values = par::map_range(shape.len(), |idx| {
            let mi = shape.multi(idx);
            let mut x = [0.0f64; 3];
            for a in 0..dim {
                x[a] = (mi[a] as f64 - r) * h;
            }
            g(&x[..dim])
        });
        Self::from_values(dim, level, radius_cells, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn radius_cells(&self) -> usize {
        self.radius_cells
    }
    pub fn side(&self) -> usize {
        2 * self.radius_cells + 1
    }
    pub fn spacing(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }
    pub fn support_radius(&self) -> f64 {
        self.radius_cells as f64 * self.spacing()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn shape(&self) -> Shape3 {
        Shape3::new(self.dim, self.side())
    }

    /// Riemann sum `h^n Σ g`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing().powi(self.dim as i32)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sample at integer offset `d` (zero outside the stencil).
    pub fn at(&self, d: &[i64]) -> f64 {
        let r = self.radius_cells as i64;
        let mut mi = [0usize; 3];
        for (a, &v) in d.iter().enumerate() {
            if v.abs() > r {
                return 0.0;
            }
            mi[a] = (v + r) as usize;
        }
        self.values[self.shape().index(mi)]
    }

    /// Discrete moment `h^n Σ x^β g(x)`.
    pub fn moment(&self, beta: &[u32]) -> f64 {
        let shape = self.shape();
        let h = self.spacing();
        let r = self.radius_cells as f64;
        let mut acc = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let mi = shape.multi(idx);
            let mut w = *v;
            for (a, &b) in beta.iter().enumerate() {
                w *= ((mi[a] as f64 - r) * h).powi(b as i32);
            }
            acc += w;
        }
        acc * h.powi(self.dim as i32)
    }

    /// Exact discrete convolution of two kernels on the same level.
    pub fn convolve(&self, other: &Kernel) -> Result<Kernel> {
        if self.dim != other.dim || self.level != other.level {
            return Err(Error::GridMismatch("kernels on different grids".into()));
        }
        let r = self.radius_cells + other.radius_cells;
        let out_shape = Shape3::new(self.dim, 2 * r + 1);
        let (sa, sb) = (self.shape(), other.shape());
        let vol = self.spacing().powi(self.dim as i32);
        let ra = self.radius_cells as i64;
        let rb = other.radius_cells as i64;
        let dim = self.dim;
        let values = par::map_range(out_shape.len(), |idx| {
            let mi = out_shape.multi(idx);
            let mut off = [0i64; 3];
            for a in 0..dim {
                off[a] = mi[a] as i64 - r as i64;
            }
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for a in 0..3 {
                if a < dim {
                    lo[a] = (-ra).max(off[a] - rb);
                    hi[a] = ra.min(off[a] + rb);
                } else {
                    lo[a] = 0;
                    hi[a] = 0;
                }
            }
            let mut acc = 0.0;
            for d0 in lo[0]..=hi[0] {
                for d1 in lo[1]..=hi[1] {
                    for d2 in lo[2]..=hi[2] {
                        let d = [d0, d1, d2];
                        let mut ia = [0usize; 3];
                        let mut ib = [0usize; 3];
                        for a in 0..dim {
                            ia[a] = (d[a] + ra) as usize;
                            ib[a] = (off[a] - d[a] + rb) as usize;
                        }
                        acc += self.values[sa.index(ia)] * other.values[sb.index(ib)];
                    }
                }
            }
            acc * vol
        });
        Kernel::from_values(self.dim, self.level, r, values)
    }

    /// Header `dim,J,R` with `R` the support radius, then one sample per line.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{},{}\n", self.dim, self.level, self.support_radius());
        for v in &self.values {
            s.push_str(&format!("{v:?}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty kernel file".into()))?;
        let parts: Vec<&str> = header.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse("bad kernel header".into()));
        }
        let dim: usize = parts[0].parse().map_err(|_| Error::Parse("bad dim".into()))?;
        let level: u32 = parts[1].parse().map_err(|_| Error::Parse("bad J".into()))?;
        let radius: f64 = parts[2].parse().map_err(|_| Error::Parse("bad R".into()))?;
        let cells = radius * (level as f64).exp2();
        if cells.fract() != 0.0 || cells < 0.0 {
            return Err(Error::Parse("kernel radius not on the grid".into()));
        }
        let values = lines
            .map(|l| l.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value '{l}'"))))
            .collect::<Result<Vec<f64>>>()?;
        Self::from_values(dim, level, cells as usize, values)
    }
}

/// `g_j = 2^{jn} g(2^j ·)` by exact subsampling of the node samples; `j = 0` returns `g`.
pub fn rescale_kernel(g: &Kernel, j: u32) -> Result<Kernel> {
    if j == 0 {
        return Ok(g.clone());
    }
    let step = 1usize << j;
    let r = g.radius_cells / step;
    if r < 2 {
        return Err(Error::Resolution(j));
    }
    let scale = ((j * g.dim as u32) as f64).exp2();
    let shape = Shape3::new(g.dim, 2 * r + 1);
    let src = g.shape();
    let (rr, rg) = (r as i64, g.radius_cells as i64);
    let dim = g.dim;
    let values = (0..shape.len())
        .map(|idx| {
            let mi = shape.multi(idx);
            let mut si = [0usize; 3];
            for a in 0..dim {
                si[a] = ((mi[a] as i64 - rr) * step as i64 + rg) as usize;
            }
            scale * g.values[src.index(si)]
        })
        .collect();
    Kernel::from_values(g.dim, g.level, r, values)
}

/// `h^n Σ_d g(d h) f(x - d h)` with zero extension of `f` outside its box.
pub fn convolve(f: &GridFunction, g: &Kernel) -> Result<GridFunction> {
    convolve_with(f, g, ConvMethod::Auto)
}

pub fn convolve_with(f: &GridFunction, g: &Kernel, method: ConvMethod) -> Result<GridFunction> {
    if f.dim() != g.dim || f.level() != g.level {
        return Err(Error::GridMismatch(format!(
            "function (dim {}, J {}) vs kernel (dim {}, J {})",
            f.dim(),
            f.level(),
            g.dim,
            g.level
        )));
    }
    let method = match method {
        ConvMethod::Auto => {
            let direct = f.len() as f64 * g.values.len() as f64;
            let padded: f64 = (0..f.dim()).map(|_| fft_len(f.side(), g.radius_cells) as f64).product();
            if direct <= 40.0 * padded * padded.log2().max(1.0) {
                ConvMethod::Direct
            } else {
                ConvMethod::Fft
            }
        }
        m => m,
    };
    let values = match method {
        ConvMethod::Fft => convolve_fft(f, g),
        _ => convolve_direct(f, g),
    };
    GridFunction::from_values(f.dim(), f.level(), f.radius(), values)
}

fn convolve_direct(f: &GridFunction, g: &Kernel) -> Vec<f64> {
    let shape = f.shape();
    let ks = g.shape();
    let dim = f.dim();
    let r = g.radius_cells as i64;
    let n = shape.n.map(|v| v as i64);
    let vol = f.cell_volume();
    let fv = f.values();
    let slab = shape.n[1] * shape.n[2];
    let mut out = vec![0.0; shape.len()];
    par::for_each_chunk(&mut out, slab, |i0, chunk| {
        for (j, o) in chunk.iter_mut().enumerate() {
            let i = [i0 as i64, (j / shape.n[2]) as i64, (j % shape.n[2]) as i64];
            let mut lo = [0i64; 3];
            let mut hi = [0i64; 3];
            for a in 0..dim {
                // need 0 <= i - d < n
                lo[a] = (-r).max(i[a] - (n[a] - 1));
                hi[a] = r.min(i[a]);
            }
            let mut acc = 0.0;
            for d0 in lo[0]..=hi[0] {
                for d1 in lo[1]..=hi[1] {
                    let kb = ks.index([(d0 + r) as usize, if dim > 1 { (d1 + r) as usize } else { 0 }, 0]);
                    let fb = shape.index([(i[0] - d0) as usize, (i[1] - d1) as usize, 0]);
                    if dim > 2 {
                        for d2 in lo[2]..=hi[2] {
                            acc += g.values[kb + (d2 + r) as usize] * fv[fb + (i[2] - d2) as usize];
                        }
                    } else {
                        acc += g.values[kb] * fv[fb];
                    }
                }
            }
            *o = acc * vol;
        }
    });
    out
}

fn fft_len(n: usize, r: usize) -> usize {
    (n + r).next_power_of_two()
}

/// In-place n-dimensional FFT over a row-major array padded to three axes.
pub(crate) fn fft_nd(data: &mut [Complex<f64>], shape: Shape3, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..3 {
        let len = shape.n[axis];
        if len <= 1 {
            continue;
        }
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let stride: usize = shape.n[axis + 1..].iter().product();
        let outer: usize = shape.n[..axis].iter().product();
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * len * stride + s;
                for (t, b) in buf.iter_mut().enumerate() {
                    *b = data[base + t * stride];
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for (t, b) in buf.iter().enumerate() {
                    data[base + t * stride] = *b;
                }
            }
        }
    }
}

fn convolve_fft(f: &GridFunction, g: &Kernel) -> Vec<f64> {
    let dim = f.dim();
    let shape = f.shape();
    let r = g.radius_cells;
    let mut pdims = [1usize; 3];
    for p in pdims.iter_mut().take(dim) {
        *p = fft_len(f.side(), r);
    }
    let pshape = Shape3 { n: pdims };
    let zero = Complex::new(0.0, 0.0);
    let mut a = vec![zero; pshape.len()];
    let mut b = vec![zero; pshape.len()];
    for (idx, v) in f.values().iter().enumerate() {
        a[pshape.index(shape.multi(idx))] = Complex::new(*v, 0.0);
    }
    let ks = g.shape();
    for (idx, v) in g.values.iter().enumerate() {
        let mi = ks.multi(idx);
        let mut pi = [0usize; 3];
        for ax in 0..dim {
            let d = mi[ax] as i64 - r as i64;
            pi[ax] = d.rem_euclid(pdims[ax] as i64) as usize;
        }
        b[pshape.index(pi)] = Complex::new(*v, 0.0);
    }
    fft_nd(&mut a, pshape, false);
    fft_nd(&mut b, pshape, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    fft_nd(&mut a, pshape, true);
    let scale = f.cell_volume() / pshape.len() as f64;

    // the exact result vanishes outside the Minkowski sum of the supports
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for (idx, v) in f.values().iter().enumerate() {
        if *v != 0.0 {
            let mi = shape.multi(idx);
            for ax in 0..3 {
                lo[ax] = lo[ax].min(mi[ax]);
                hi[ax] = hi[ax].max(mi[ax]);
            }
        }
    }
    let mut out = vec![0.0; shape.len()];
    if lo[0] == usize::MAX {
        return out;
    }
    for (idx, o) in out.iter_mut().enumerate() {
        let mi = shape.multi(idx);
        let inside = (0..dim).all(|ax| mi[ax] + r >= lo[ax] && mi[ax] <= hi[ax] + r);
        if inside {
            *o = a[pshape.index(mi)].re * scale;
        }
    }
    out
}
