//! FFT helpers for periodic directions.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::grid::{TorusGrid, C64};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Signed frequency of FFT bin `k` out of `n`; the Nyquist bin is reported as `n/2`.
pub fn signed_freq(k: usize, n: usize) -> i64 {
    if 2 * k <= n {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub fn is_nyquist(k: usize, n: usize) -> bool {
    n % 2 == 0 && 2 * k == n
}

/// In-place unnormalized FFT along one axis of a row-major array.
pub fn fft_axis(data: &mut [C64], dims: &[usize], axis: usize, inverse: bool) {
    let n = dims[axis];
    if n <= 1 {
        return;
    }
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let fft = plan(n, inverse);
    if inner == 1 {
        fft.process(data);
        return;
    }
    let mut buf = vec![C64::default(); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for k in 0..n {
                buf[k] = data[base + k * inner];
            }
            fft.process(&mut buf);
            for k in 0..n {
                data[base + k * inner] = buf[k];
            }
        }
    }
}

/// Forward FFT over all axes, normalized so that the result holds Fourier coefficients.
pub fn forward_nd(data: &mut [C64], dims: &[usize]) {
    for a in 0..dims.len() {
        fft_axis(data, dims, a, false);
    }
    let s = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|v| *v *= s);
}

/// Inverse of [`forward_nd`].
pub fn inverse_nd(data: &mut [C64], dims: &[usize]) {
    for a in 0..dims.len() {
        fft_axis(data, dims, a, true);
    }
}

/// Spectral calculus on one torus slice (`iy·nx + ix` ordering).
#[derive(Clone, Debug)]
pub struct TorusSpectral {
    pub grid: TorusGrid,
}

impl TorusSpectral {
    pub fn new(grid: TorusGrid) -> Self {
        Self { grid }
    }

    fn dims(&self) -> [usize; 2] {
        [self.grid.ny, self.grid.nx]
    }

    fn scale(&self) -> f64 {
        2.0 * PI / self.grid.period
    }

    pub fn coeffs_real(&self, u: &[f64]) -> Vec<C64> {
        let mut c: Vec<C64> = u.iter().map(|&v| C64::new(v, 0.0)).collect();
        forward_nd(&mut c, &self.dims());
        c
    }

    pub fn coeffs(&self, u: &[C64]) -> Vec<C64> {
        let mut c = u.to_vec();
        forward_nd(&mut c, &self.dims());
        c
    }

    pub fn synth(&self, c: &[C64]) -> Vec<C64> {
        let mut u = c.to_vec();
        inverse_nd(&mut u, &self.dims());
        u
    }

    /// Apply a multiplier `m(kx, ky, odd_safe)` in frequency space. Frequencies are
    /// physical wavenumbers; on Nyquist bins `nyq_x`/`nyq_y` flag the ambiguity.
    pub fn multiply(&self, u: &[C64], m: impl Fn(f64, f64, bool, bool) -> C64) -> Vec<C64> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let s = self.scale();
        let mut c = self.coeffs(u);
        for iy in 0..ny {
            let ky = signed_freq(iy, ny) as f64 * s;
            let ny_flag = is_nyquist(iy, ny);
            for ix in 0..nx {
                let kx = signed_freq(ix, nx) as f64 * s;
                c[iy * nx + ix] *= m(kx, ky, is_nyquist(ix, nx), ny_flag);
            }
        }
        self.synth(&c)
    }

    /// `∂_x^ax ∂_y^ay u` for real `u`.
    pub fn deriv(&self, u: &[f64], ax: u32, ay: u32) -> Vec<f64> {
        let uc: Vec<C64> = u.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.deriv_c(&uc, ax, ay).iter().map(|v| v.re).collect()
    }

    pub fn deriv_c(&self, u: &[C64], ax: u32, ay: u32) -> Vec<C64> {
        let i = C64::new(0.0, 1.0);
        self.multiply(u, |kx, ky, qx, qy| {
            if (qx && ax % 2 == 1) || (qy && ay % 2 == 1) {
                return C64::default();
            }
            (i * kx).powu(ax) * (i * ky).powu(ay)
        })
    }

    /// `∂_z = (∂_x − i∂_y)/2`.
    pub fn dz(&self, u: &[C64]) -> Vec<C64> {
        let ux = self.deriv_c(u, 1, 0);
        let uy = self.deriv_c(u, 0, 1);
        ux.iter().zip(&uy).map(|(a, b)| (a - C64::i() * b) * 0.5).collect()
    }

    /// `∂_z̄ = (∂_x + i∂_y)/2`.
    pub fn dzbar(&self, u: &[C64]) -> Vec<C64> {
        let ux = self.deriv_c(u, 1, 0);
        let uy = self.deriv_c(u, 0, 1);
        ux.iter().zip(&uy).map(|(a, b)| (a + C64::i() * b) * 0.5).collect()
    }

    pub fn dz_real(&self, u: &[f64]) -> Vec<C64> {
        let uc: Vec<C64> = u.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.dz(&uc)
    }

    /// `∂_z∂_z̄ u = Δu/4` for real `u`.
    pub fn dzdzbar(&self, u: &[f64]) -> Vec<f64> {
        let uxx = self.deriv(u, 2, 0);
        let uyy = self.deriv(u, 0, 2);
        uxx.iter().zip(&uyy).map(|(a, b)| 0.25 * (a + b)).collect()
    }

    /// `∂_z∂_z u = (u_xx − u_yy − 2i u_xy)/4` for real `u`.
    pub fn dzdz(&self, u: &[f64]) -> Vec<C64> {
        let uxx = self.deriv(u, 2, 0);
        let uyy = self.deriv(u, 0, 2);
        let uxy = self.deriv(u, 1, 1);
        (0..u.len())
            .map(|j| C64::new(0.25 * (uxx[j] - uyy[j]), -0.5 * uxy[j]))
            .collect()
    }

    pub fn interp(&self, u: &[C64]) -> TrigInterp2 {
        TrigInterp2::from_coeffs(self.grid, self.coeffs(u))
    }

    pub fn interp_real(&self, u: &[f64]) -> TrigInterp2 {
        TrigInterp2::from_coeffs(self.grid, self.coeffs_real(u))
    }
}

/// Band-limited trigonometric interpolant of torus samples, evaluable anywhere.
///
/// Nyquist modes are symmetrized into cosines so real data interpolate to real values.
#[derive(Clone, Debug)]
pub struct TrigInterp2 {
    grid: TorusGrid,
    coeffs: Vec<C64>,
    kx: Vec<f64>,
    ky: Vec<f64>,
}

impl TrigInterp2 {
    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<C64>) -> Self {
        let s = 2.0 * PI / grid.period;
        let kx = (0..grid.nx).map(|k| signed_freq(k, grid.nx) as f64 * s).collect();
        let ky = (0..grid.ny).map(|k| signed_freq(k, grid.ny) as f64 * s).collect();
        Self { grid, coeffs, kx, ky }
    }

    fn basis(k: &[f64], n: usize, x: f64) -> (Vec<C64>, Vec<C64>) {
        let mut e = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        for (i, &kk) in k.iter().enumerate() {
            if is_nyquist(i, n) {
                e.push(C64::new((kk * x).cos(), 0.0));
                d.push(C64::new(-kk * (kk * x).sin(), 0.0));
            } else {
                let v = C64::from_polar(1.0, kk * x);
                e.push(v);
                d.push(C64::new(0.0, kk) * v);
            }
        }
        (e, d)
    }

    pub fn eval(&self, x: f64, y: f64) -> C64 {
        let (ex, _) = Self::basis(&self.kx, self.grid.nx, x);
        let (ey, _) = Self::basis(&self.ky, self.grid.ny, y);
        let nx = self.grid.nx;
        let mut acc = C64::default();
        for (iy, &ey) in ey.iter().enumerate() {
            let row = &self.coeffs[iy * nx..(iy + 1) * nx];
            let mut s = C64::default();
            for (c, e) in row.iter().zip(&ex) {
                s += c * e;
            }
            acc += s * ey;
        }
        acc
    }

    /// Value and gradient `(u, u_x, u_y)`.
    pub fn eval_grad(&self, x: f64, y: f64) -> (C64, C64, C64) {
        let (ex, dx) = Self::basis(&self.kx, self.grid.nx, x);
        let (ey, dy) = Self::basis(&self.ky, self.grid.ny, y);
        let nx = self.grid.nx;
        let (mut v, mut gx, mut gy) = (C64::default(), C64::default(), C64::default());
        for iy in 0..self.grid.ny {
            let row = &self.coeffs[iy * nx..(iy + 1) * nx];
            let (mut s, mut sd) = (C64::default(), C64::default());
            for ix in 0..nx {
                s += row[ix] * ex[ix];
                sd += row[ix] * dx[ix];
            }
            v += s * ey[iy];
            gx += sd * ey[iy];
            gy += s * dy[iy];
        }
        (v, gx, gy)
    }
}

/// Trigonometric interpolant of uniform samples of an `L`-periodic function of one variable.
#[derive(Clone, Debug)]
pub struct TrigInterp1 {
    n: usize,
    period: f64,
    coeffs: Vec<C64>,
}

impl TrigInterp1 {
    pub fn new(samples: &[C64], period: f64) -> Self {
        let mut c = samples.to_vec();
        forward_nd(&mut c, &[samples.len()]);
        Self { n: samples.len(), period, coeffs: c }
    }

    pub fn new_real(samples: &[f64], period: f64) -> Self {
        let c: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::new(&c, period)
    }

    pub fn eval(&self, s: f64) -> C64 {
        let w = 2.0 * PI / self.period;
        let mut acc = C64::default();
        for (k, c) in self.coeffs.iter().enumerate() {
            let f = signed_freq(k, self.n) as f64 * w;
            if is_nyquist(k, self.n) {
                acc += c * (f * s).cos();
            } else {
                acc += c * C64::from_polar(1.0, f * s);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_trig_polynomials() {
        let g = TorusGrid::new(16, 8);
        let sp = TorusSpectral::new(g);
        let u = g.sample(|x, y| (2.0 * x).sin() * y.cos());
        let ux = sp.deriv(&u, 1, 0);
        let uyy = sp.deriv(&u, 0, 2);
        for j in 0..g.len() {
            let (x, y) = g.point(j);
            assert!((ux[j] - 2.0 * (2.0 * x).cos() * y.cos()).abs() < 1e-12);
            assert!((uyy[j] + (2.0 * x).sin() * y.cos()).abs() < 1e-12);
        }
        let lap = sp.dzdzbar(&u);
        for j in 0..g.len() {
            assert!((lap[j] + 1.25 * u[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_reproduces_shifted_sine() {
        let g = TorusGrid::new(32, 1);
        let sp = TorusSpectral::new(g);
        let it = sp.interp_real(&g.sample(|x, _| (3.0 * x).sin()));
        for x in [0.1, 1.3, 4.0, 6.2] {
            let (v, vx, _) = it.eval_grad(x, 0.0);
            assert!((v.re - (3.0 * x).sin()).abs() < 1e-12);
            assert!((vx.re - 3.0 * (3.0 * x).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn one_dimensional_interp() {
        let n = 20;
        let l = 3.0;
        let s: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
        let it = TrigInterp1::new_real(&s, l);
        assert!((it.eval(0.4).re - (2.0 * PI * 0.4 / l).cos()).abs() < 1e-12);
    }
}
