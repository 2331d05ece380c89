//! Tensor-product collocation grid on the mapped disk.
//!
//! Radially: the positive half of a Chebyshev–Gauss–Lobatto grid of odd
//! degree M = 2·N_r − 1 on [−1, 1], i.e. t_j = cos(jπ/M) for j = 0 … N_r−1.
//! Odd M keeps the origin off the grid; the negative half is identified with
//! f(−t, θ) = f(t, θ+π), so fields live on N_r × N_θ nodes with the boundary
//! ring at j = 0 (t = 1). Angularly: uniform nodes θ_i = 2πi/N_θ, N_θ even so
//! the identification lands exactly on grid points.

use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, MapJet};
use ndarray::Array1;

#[derive(Debug, Clone)]
pub struct TensorGrid {
    pub nr: usize,
    pub ntheta: usize,
    /// Doubled-grid degree M = 2·nr − 1.
    pub m: usize,
    /// Kept radial nodes, decreasing from t_0 = 1.
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
}

impl TensorGrid {
    pub fn new(nr: usize, ntheta: usize, max_mode: u32) -> Result<Self> {
        if nr < 4 {
            return Err(Error::BadInput(format!("need N_r ≥ 4, got {nr}")));
        }
        if ntheta < 4 || ntheta % 2 != 0 {
            return Err(Error::BadInput(format!("N_θ must be even and ≥ 4, got {ntheta}")));
        }
        if (ntheta as u32) < 4 * max_mode {
            return Err(Error::BadInput(format!(
                "N_θ = {ntheta} does not resolve shape mode k = {max_mode} (need ≥ 4k)"
            )));
        }
        let m = 2 * nr - 1;
        let t = (0..nr)
            .map(|j| (j as f64 * std::f64::consts::PI / m as f64).cos())
            .collect();
        let theta = (0..ntheta)
            .map(|i| 2.0 * std::f64::consts::PI * i as f64 / ntheta as f64)
            .collect();
        Ok(TensorGrid { nr, ntheta, m, t, theta })
    }

    pub fn n_total(&self) -> usize {
        self.nr * self.ntheta
    }

    #[inline]
    pub fn idx(&self, j: usize, i: usize) -> usize {
        j * self.ntheta + i
    }

    /// Angular index of the parity partner (θ + π).
    #[inline]
    pub fn flip(&self, i: usize) -> usize {
        (i + self.ntheta / 2) % self.ntheta
    }

    /// Metric jets at every node, row-major (radial ring × angle).
    pub fn jets(&self, geom: &DomainGeometry) -> Vec<MapJet> {
        let mut out = Vec::with_capacity(self.n_total());
        for &tj in &self.t {
            for &th in &self.theta {
                out.push(geom.jet(tj, th));
            }
        }
        out
    }
}

/// Discrete scalar field on a tensor grid. Values are stored flattened,
/// radial-ring major: index = j·N_θ + i.
#[derive(Debug, Clone)]
pub struct Field {
    pub vals: Array1<f64>,
}

impl Field {
    pub fn new(vals: Array1<f64>, grid: &TensorGrid) -> Result<Self> {
        if vals.len() != grid.n_total() {
            return Err(Error::GridMismatch { got: vals.len(), expected: grid.n_total() });
        }
        if !vals.iter().all(|v| v.is_finite()) {
            return Err(Error::BadInput("field contains NaN/Inf".into()));
        }
        Ok(Field { vals })
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.vals.iter().fold(f64::INFINITY, |a, &v| a.min(v))
    }

    pub fn max(&self) -> f64 {
        self.vals.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
    }
}
