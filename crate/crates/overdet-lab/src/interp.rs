//! Off-grid evaluation of discrete fields.
//!
//! A point (x, y) is pulled back to map coordinates (t, θ); the field is then
//! interpolated first in the angle (periodic cardinal functions at every
//! ring) and then radially by barycentric interpolation on the *full*
//! diameter grid, with the antipodal rings supplying the t < 0 values through
//! the parity identification. Interpolating on the half-grid alone would be
//! unstable for the same reason half-grid quadrature weights are.

use crate::disc::Discretization;
use crate::error::Result;
use crate::grid::Field;

/// Periodic cardinal interpolation of ring values (uniform angles, even
/// count) at angle `theta`: p(θ) = Σ_i f_i · sin(N·d/2)·cot(d/2)/N with
/// d = θ − θ_i, exact for trigonometric polynomials of degree ≤ N/2.
fn eval_ring(vals: &[f64], theta: f64) -> f64 {
    let n = vals.len();
    let nf = n as f64;
    let h = 2.0 * std::f64::consts::PI / nf;
    let mut acc = 0.0;
    for (i, &v) in vals.iter().enumerate() {
        let mut d = theta - i as f64 * h;
        // Wrap to (−π, π].
        d -= (d / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
        if d.abs() < 1e-13 {
            return v;
        }
        acc += v * (nf * d / 2.0).sin() / (nf * (d / 2.0).tan());
    }
    acc
}

/// Barycentric interpolation on the Chebyshev–Gauss–Lobatto nodes
/// cos(jπ/M), j = 0..M, with weights (−1)^j·(½ at the ends).
fn eval_diameter(diam: &[f64], t: f64) -> f64 {
    let m = diam.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, &v) in diam.iter().enumerate() {
        let xj = (j as f64 * std::f64::consts::PI / m as f64).cos();
        if (t - xj).abs() < 1e-15 {
            return v;
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == m {
            w *= 0.5;
        }
        let r = w / (t - xj);
        num += r * v;
        den += r;
    }
    num / den
}

/// Evaluate a field at map coordinates (t, θ), t ∈ [0, 1].
pub fn eval_mapped(disc: &Discretization, f: &Field, t: f64, theta: f64) -> f64 {
    let (nr, nt, m) = (disc.grid.nr, disc.grid.ntheta, disc.grid.m);
    let mut diam = vec![0.0; m + 1];
    for j in 0..nr {
        let ring = &f.vals.as_slice().expect("fields are contiguous")[j * nt..(j + 1) * nt];
        diam[j] = eval_ring(ring, theta);
        diam[m - j] = eval_ring(ring, theta + std::f64::consts::PI);
    }
    eval_diameter(&diam, t)
}

/// Evaluate a field at a physical interior point.
pub fn eval_at(disc: &Discretization, f: &Field, x: f64, y: f64) -> Result<f64> {
    let r = x.hypot(y);
    let (t, theta) = if r < 1e-6 {
        // The map inversion is angularly degenerate at the pole; here the
        // radial coordinate is r itself up to O(ε·r²) < 1e−13.
        (r, y.atan2(x))
    } else {
        disc.geom.invert(x, y)?
    };
    Ok(eval_mapped(disc, f, t, theta))
}
