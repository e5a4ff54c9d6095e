//! Periodic grids and FFT-based differentiation.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

/// Uniform periodic grid `[0, box_len)^dim` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub n: usize,
    pub box_len: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, box_len: f64) -> Result<Self, String> {
        if !(1..=3).contains(&dim) {
            return Err(format!("dimension {dim} not in 1..=3"));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(format!("points per axis {n} must be a power of two >= 4"));
        }
        if !(box_len > 0.0) || !box_len.is_finite() {
            return Err(format!("box length {box_len} must be positive"));
        }
        Ok(Self { dim, n, box_len })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(self.dim as i32)
    }

    /// Fundamental wavenumber `2π / box_len`.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len
    }

    /// Largest resolved wavenumber.
    pub fn k_max(&self) -> f64 {
        self.dk() * (self.n / 2) as f64
    }

    /// Per-axis indices of a linear (row-major) index.
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = idx;
        for a in (0..self.dim).rev() {
            out[a] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    pub fn linear_index(&self, m: [usize; 3]) -> usize {
        (0..self.dim).fold(0, |acc, a| acc * self.n + m[a])
    }

    /// Node coordinates; unused axes are zero.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.multi_index(idx);
        let h = self.dx();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = m[a] as f64 * h;
        }
        x
    }

    /// Signed integer frequency of an index along one axis.
    pub fn frequency(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        (values.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn l1_norm(&self, values: &[f64]) -> f64 {
        values.iter().map(|v| v.abs()).sum::<f64>() * self.cell_volume()
    }

    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.cell_volume()).powf(1.0 / p)
    }

    /// Minimum-image displacement between two nodes.
    pub fn displacement(&self, i: usize, j: usize) -> [f64; 3] {
        let (a, b) = (self.multi_index(i), self.multi_index(j));
        let h = self.dx();
        let mut d = [0.0; 3];
        for ax in 0..self.dim {
            let k = (a[ax] as i64 - b[ax] as i64).rem_euclid(self.n as i64);
            let k = if k > (self.n / 2) as i64 { k - self.n as i64 } else { k };
            d[ax] = k as f64 * h;
        }
        d
    }
}

/// FFT plans and wavenumber tables for one grid.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Wavenumbers for even-order operators.
    k: Vec<f64>,
    /// Wavenumbers for first derivatives, with the Nyquist mode removed.
    k_odd: Vec<f64>,
    k2: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let dk = grid.dk();
        let k: Vec<f64> = (0..grid.n).map(|i| grid.frequency(i) as f64 * dk).collect();
        let k_odd: Vec<f64> = (0..grid.n)
            .map(|i| if i == grid.n / 2 { 0.0 } else { k[i] })
            .collect();
        let k2 = (0..grid.len())
            .map(|idx| {
                let m = grid.multi_index(idx);
                (0..grid.dim).map(|a| k[m[a]] * k[m[a]]).sum()
            })
            .collect();
        Self {
            grid,
            fwd,
            inv,
            k,
            k_odd,
            k2,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `|k|²` per Fourier mode in FFT order.
    pub fn k_squared(&self) -> &[f64] {
        &self.k2
    }

    /// Wavenumber component of a mode along `axis`, for even-order multipliers.
    pub fn k_component(&self, idx: usize, axis: usize) -> f64 {
        self.k[self.grid.multi_index(idx)[axis]]
    }

    /// Wavenumber component for first derivatives (Nyquist removed).
    pub fn k_odd_component(&self, idx: usize, axis: usize) -> f64 {
        self.k_odd[self.grid.multi_index(idx)[axis]]
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        let dim = self.grid.dim;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let outer = n.pow(axis as u32);
            for o in 0..outer {
                for inner in 0..stride {
                    let start = o * n * stride + inner;
                    for j in 0..n {
                        line[j] = data[start + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for j in 0..n {
                        data[start + j * stride] = line[j];
                    }
                }
            }
        }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    /// Normalized inverse transform in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.forward(&mut d);
        d
    }

    /// Applies a real Fourier multiplier to a real field.
    pub fn apply_real(&self, values: &[f64], multiplier: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut d = self.forward_real(values);
        d.iter_mut().enumerate().for_each(|(i, z)| *z *= multiplier(i));
        self.inverse(&mut d);
        d.iter().map(|z| z.re).collect()
    }

    pub fn derivative(&self, values: &[Complex64], axis: usize) -> Vec<Complex64> {
        let mut d = values.to_vec();
        self.forward(&mut d);
        for (i, z) in d.iter_mut().enumerate() {
            *z *= Complex64::new(0.0, self.k_odd_component(i, axis));
        }
        self.inverse(&mut d);
        d
    }

    pub fn gradient(&self, values: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut hat = values.to_vec();
        self.forward(&mut hat);
        (0..self.grid.dim)
            .map(|axis| {
                let mut d: Vec<Complex64> = hat
                    .iter()
                    .enumerate()
                    .map(|(i, z)| z * Complex64::new(0.0, self.k_odd_component(i, axis)))
                    .collect();
                self.inverse(&mut d);
                d
            })
            .collect()
    }

    pub fn gradient_real(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let hat = self.forward_real(values);
        (0..self.grid.dim)
            .map(|axis| {
                let mut d: Vec<Complex64> = hat
                    .iter()
                    .enumerate()
                    .map(|(i, z)| z * Complex64::new(0.0, self.k_odd_component(i, axis)))
                    .collect();
                self.inverse(&mut d);
                d.iter().map(|z| z.re).collect()
            })
            .collect()
    }

    pub fn laplacian_real(&self, values: &[f64]) -> Vec<f64> {
        self.apply_real(values, |i| -self.k2[i])
    }

    /// Divergence of a real vector field.
    pub fn divergence(&self, field: &[Vec<f64>]) -> Vec<f64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (axis, comp) in field.iter().enumerate() {
            let hat = self.forward_real(comp);
            for (i, (a, z)) in acc.iter_mut().zip(&hat).enumerate() {
                *a += z * Complex64::new(0.0, self.k_odd_component(i, axis));
            }
        }
        self.inverse(&mut acc);
        acc.iter().map(|z| z.re).collect()
    }

    /// `‖∇ψ‖²_{L²}` via Parseval.
    pub fn gradient_norm_sq(&self, values: &[Complex64]) -> f64 {
        let mut hat = values.to_vec();
        self.forward(&mut hat);
        let s: f64 = hat.iter().zip(&self.k2).map(|(z, k2)| z.norm_sqr() * k2).sum();
        s * self.grid.volume() / (self.grid.len() as f64).powi(2)
    }

    /// `H^s` norm with weight `(1 + |k|²)^{s/2}`.
    pub fn sobolev_norm(&self, values: &[Complex64], s: f64) -> f64 {
        let mut hat = values.to_vec();
        self.forward(&mut hat);
        let acc: f64 = hat
            .iter()
            .zip(&self.k2)
            .map(|(z, k2)| z.norm_sqr() * (1.0 + k2).powf(s))
            .sum();
        (acc * self.grid.volume() / (self.grid.len() as f64).powi(2)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(4, 16, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
        assert!(Grid::new(1, 16, 0.0).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        for idx in [0, 5, 77, 511] {
            assert_eq!(g.linear_index(g.multi_index(idx)), idx);
        }
    }

    #[test]
    fn transform_round_trip_and_derivative() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let sp = Spectral::new(g);
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.point(i);
                (2.0 * x[0]).sin() * x[1].cos()
            })
            .collect();
        let grad = sp.gradient_real(&f);
        for i in 0..g.len() {
            let x = g.point(i);
            assert_abs_diff_eq!(grad[0][i], 2.0 * (2.0 * x[0]).cos() * x[1].cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(grad[1][i], -(2.0 * x[0]).sin() * x[1].sin(), epsilon = 1e-12);
        }
        let lap = sp.laplacian_real(&f);
        for i in 0..g.len() {
            assert_abs_diff_eq!(lap[i], -5.0 * f[i], epsilon = 1e-11);
        }
    }

    #[test]
    fn displacement_uses_minimum_image() {
        let g = Grid::new(1, 8, 8.0).unwrap();
        assert_eq!(g.displacement(7, 0)[0], -1.0);
        assert_eq!(g.displacement(1, 6)[0], 3.0);
    }
}
