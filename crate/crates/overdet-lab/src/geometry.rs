//! Domain geometry: boundary trace, normals, interior map and its metric.
//!
//! The boundary is x(θ) = r(θ)·(cos θ, sin θ) with r = 1 + ε·ρ(θ). The
//! interior map extends it smoothly through the origin:
//!
//! ```text
//! Φ(t, θ) = t·(1 + p(t, θ))·(cos θ, sin θ),
//! p(t, θ) = ε·Σ_k t^k (a_k cos kθ + b_k sin kθ),
//! ```
//!
//! i.e. w = ζ·(1 + Re g(ζ)) with ζ = t·e^{iθ} and g(ζ) = ε·Σ (a_k − i b_k)ζ^k.
//! Each term t^k cos kθ, t^k sin kθ is a harmonic polynomial in (x, y), so Φ
//! is polynomial — C^∞ through the pole and exactly compatible with the
//! doubled-grid identification f(−t, θ) = f(t, θ+π). At t = 1 it reduces to
//! the boundary trace. A literal radial scaling t·r(θ) would break both
//! properties for odd modes.

use crate::error::{Error, Result};
use crate::shape::BoundaryShape;

/// First- and second-order data of the map and its inverse at one point.
/// `t_x … th_yy` are derivatives of the inverse coordinates t(x,y), θ(x,y),
/// which is everything a chain-rule differential operator needs.
#[derive(Debug, Clone, Copy)]
pub struct MapJet {
    pub x: f64,
    pub y: f64,
    pub det: f64,
    pub t_x: f64,
    pub t_y: f64,
    pub th_x: f64,
    pub th_y: f64,
    pub t_xx: f64,
    pub t_xy: f64,
    pub t_yy: f64,
    pub th_xx: f64,
    pub th_xy: f64,
    pub th_yy: f64,
}

#[derive(Debug, Clone)]
pub struct DomainGeometry {
    pub shape: BoundaryShape,
    /// |Ω| = ½∮r²dθ = π(1 + ε²·Σ(a_k²+b_k²)/2), exact for the series.
    pub area: f64,
}

/// Result of a boundary-extremum search (nearest/farthest boundary point).
#[derive(Debug, Clone, Copy)]
pub struct BoundaryExtremum {
    pub value: f64,
    pub theta: f64,
    /// First-order optimality |d/dθ ½|x(θ)−z|²| at the returned θ.
    pub stationarity: f64,
    /// True when Newton failed and the dense-scan value was kept.
    pub stalled: bool,
}

const SCAN_POINTS: usize = 512;
const NEWTON_MAX_STEPS: usize = 20;

pub fn build_domain(shape: BoundaryShape) -> Result<DomainGeometry> {
    // r > 0 was checked densely at shape construction; re-check here so a
    // hand-built BoundaryShape cannot sneak past.
    let mut min_r = f64::INFINITY;
    for i in 0..4096 {
        let th = 2.0 * std::f64::consts::PI * i as f64 / 4096.0;
        min_r = min_r.min(shape.r(th));
    }
    if min_r <= 0.0 {
        return Err(Error::NonStarShaped { min_r });
    }
    let sum_sq: f64 = shape.modes.iter().map(|m| m.a * m.a + m.b * m.b).sum();
    let area = std::f64::consts::PI * (1.0 + 0.5 * shape.epsilon * shape.epsilon * sum_sq);
    Ok(DomainGeometry { shape, area })
}

impl DomainGeometry {
    /// p(t,θ) and the partials the metric needs: (p, p_t, p_θ, p_tt, p_tθ, p_θθ).
    fn p_jet(&self, t: f64, theta: f64) -> (f64, f64, f64, f64, f64, f64) {
        let eps = self.shape.epsilon;
        let (mut p, mut pt, mut pth, mut ptt, mut ptth, mut pthth) =
            (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for m in &self.shape.modes {
            let k = m.k as f64;
            let (si, co) = (k * theta).sin_cos();
            let ang = m.a * co + m.b * si;
            let dang = k * (-m.a * si + m.b * co);
            let ddang = -k * k * ang;
            let tk = t.powi(m.k as i32);
            let tk1 = if m.k >= 1 { k * t.powi(m.k as i32 - 1) } else { 0.0 };
            let tk2 = if m.k >= 2 {
                k * (k - 1.0) * t.powi(m.k as i32 - 2)
            } else {
                0.0
            };
            p += tk * ang;
            pt += tk1 * ang;
            pth += tk * dang;
            ptt += tk2 * ang;
            ptth += tk1 * dang;
            pthth += tk * ddang;
        }
        (eps * p, eps * pt, eps * pth, eps * ptt, eps * ptth, eps * pthth)
    }

    /// Physical position of a map point.
    pub fn position(&self, t: f64, theta: f64) -> (f64, f64) {
        let (p, ..) = self.p_jet(t, theta);
        let a = t * (1.0 + p);
        (a * theta.cos(), a * theta.sin())
    }

    /// Full metric jet at (t, θ), t > 0.
    pub fn jet(&self, t: f64, theta: f64) -> MapJet {
        let (p, pt, pth, ptt, ptth, pthth) = self.p_jet(t, theta);
        let (s, c) = theta.sin_cos();
        // A(t,θ) = t(1+p) is the physical radius along the ray.
        let a = t * (1.0 + p);
        let a_t = 1.0 + p + t * pt;
        let a_th = t * pth;
        let a_tt = 2.0 * pt + t * ptt;
        let a_tth = pth + t * ptth;
        let a_thth = t * pthth;

        let x_t = a_t * c;
        let x_th = a_th * c - a * s;
        let y_t = a_t * s;
        let y_th = a_th * s + a * c;
        let det = a * a_t;
        let det_t = a_t * a_t + a * a_tt;
        let det_th = a_th * a_t + a * a_tth;

        let x_tt = a_tt * c;
        let x_tth = a_tth * c - a_t * s;
        let x_thth = a_thth * c - 2.0 * a_th * s - a * c;
        let y_tt = a_tt * s;
        let y_tth = a_tth * s + a_t * c;
        let y_thth = a_thth * s + 2.0 * a_th * c - a * s;

        let inv = 1.0 / det;
        let t_x = y_th * inv;
        let t_y = -x_th * inv;
        let th_x = -y_t * inv;
        let th_y = x_t * inv;

        // ∂/∂t and ∂/∂θ of the inverse-matrix entries (quotient rule on
        // adj(J)/det), then chain rule back to x, y.
        let inv2 = inv * inv;
        let tx_t = (y_tth * det - y_th * det_t) * inv2;
        let tx_th = (y_thth * det - y_th * det_th) * inv2;
        let ty_t = -(x_tth * det - x_th * det_t) * inv2;
        let ty_th = -(x_thth * det - x_th * det_th) * inv2;
        let thx_t = -(y_tt * det - y_t * det_t) * inv2;
        let thx_th = -(y_tth * det - y_t * det_th) * inv2;
        let thy_t = (x_tt * det - x_t * det_t) * inv2;
        let thy_th = (x_tth * det - x_t * det_th) * inv2;

        MapJet {
            x: a * c,
            y: a * s,
            det,
            t_x,
            t_y,
            th_x,
            th_y,
            t_xx: tx_t * t_x + tx_th * th_x,
            t_xy: tx_t * t_y + tx_th * th_y,
            t_yy: ty_t * t_y + ty_th * th_y,
            th_xx: thx_t * t_x + thx_th * th_x,
            th_xy: thx_t * t_y + thx_th * th_y,
            th_yy: thy_t * t_y + thy_th * th_y,
        }
    }

    /// Boundary point x(θ) = r(θ)(cos θ, sin θ).
    pub fn boundary_point(&self, theta: f64) -> (f64, f64) {
        let r = self.shape.r(theta);
        (r * theta.cos(), r * theta.sin())
    }

    /// dx/dθ along the boundary.
    pub fn boundary_tangent_raw(&self, theta: f64) -> (f64, f64) {
        let r = self.shape.r(theta);
        let rp = self.shape.r_deriv(theta, 1);
        let (s, c) = theta.sin_cos();
        (rp * c - r * s, rp * s + r * c)
    }

    /// d²x/dθ² along the boundary.
    pub fn boundary_second_deriv(&self, theta: f64) -> (f64, f64) {
        let r = self.shape.r(theta);
        let rp = self.shape.r_deriv(theta, 1);
        let rpp = self.shape.r_deriv(theta, 2);
        let (s, c) = theta.sin_cos();
        (rpp * c - 2.0 * rp * s - r * c, rpp * s + 2.0 * rp * c - r * s)
    }

    /// Outward unit normal at boundary angle θ.
    pub fn normal(&self, theta: f64) -> (f64, f64) {
        let (tx, ty) = self.boundary_tangent_raw(theta);
        let j = (tx * tx + ty * ty).sqrt();
        (ty / j, -tx / j)
    }

    /// Arclength Jacobian J(θ) = |dx/dθ| = √(r² + r'²).
    pub fn arclength_jacobian(&self, theta: f64) -> f64 {
        let r = self.shape.r(theta);
        let rp = self.shape.r_deriv(theta, 1);
        (r * r + rp * rp).sqrt()
    }

    /// Strict interior test (star-shaped about the origin).
    pub fn is_interior(&self, x: f64, y: f64) -> bool {
        let rad = (x * x + y * y).sqrt();
        rad < self.shape.r(y.atan2(x))
    }

    /// Nearest (minimize = true) or farthest boundary point from z:
    /// dense scan of ½|x(θ)−z|² followed by Newton on its θ-derivative.
    pub fn boundary_extremum(&self, z: (f64, f64), minimize: bool) -> BoundaryExtremum {
        let objective = |theta: f64| -> f64 {
            let (bx, by) = self.boundary_point(theta);
            let (dx, dy) = (bx - z.0, by - z.1);
            0.5 * (dx * dx + dy * dy)
        };
        let derivs = |theta: f64| -> (f64, f64) {
            let (bx, by) = self.boundary_point(theta);
            let (tx, ty) = self.boundary_tangent_raw(theta);
            let (cx, cy) = self.boundary_second_deriv(theta);
            let (dx, dy) = (bx - z.0, by - z.1);
            let g1 = dx * tx + dy * ty;
            let g2 = tx * tx + ty * ty + dx * cx + dy * cy;
            (g1, g2)
        };

        let mut best_theta = 0.0;
        let mut best_val = objective(0.0);
        for i in 1..SCAN_POINTS {
            let th = 2.0 * std::f64::consts::PI * i as f64 / SCAN_POINTS as f64;
            let v = objective(th);
            if (minimize && v < best_val) || (!minimize && v > best_val) {
                best_val = v;
                best_theta = th;
            }
        }

        let mut theta = best_theta;
        let mut stalled = true;
        for _ in 0..NEWTON_MAX_STEPS {
            let (g1, g2) = derivs(theta);
            if g1.abs() <= crate::tol::NEWTON_STATIONARITY {
                stalled = false;
                break;
            }
            if g2.abs() < 1e-14 {
                break;
            }
            let step = g1 / g2;
            // A jump past the scan spacing means Newton left the bracketed
            // extremum; treat as a stall rather than chase a different one.
            if step.abs() > 2.0 * std::f64::consts::PI / SCAN_POINTS as f64 {
                break;
            }
            theta -= step;
        }

        let refined = objective(theta);
        let keep_newton = !stalled
            && ((minimize && refined <= best_val) || (!minimize && refined >= best_val));
        let (theta, val, stalled) = if keep_newton {
            (theta, refined, false)
        } else {
            (best_theta, best_val, true)
        };
        BoundaryExtremum {
            value: (2.0 * val).sqrt(),
            theta,
            stationarity: derivs(theta).0.abs(),
            stalled,
        }
    }

    /// min_θ |x(θ) − x| for a strictly interior point.
    pub fn distance_to_boundary(&self, x: f64, y: f64) -> Result<f64> {
        if !self.is_interior(x, y) {
            return Err(Error::NotInterior { x, y });
        }
        Ok(self.boundary_extremum((x, y), true).value)
    }

    /// (ρ₁, ρ₂) = (min, max) of |x(θ) − z| about an interior point z.
    pub fn radii_about(&self, zx: f64, zy: f64) -> Result<(f64, f64)> {
        if !self.is_interior(zx, zy) {
            return Err(Error::NotInterior { x: zx, y: zy });
        }
        let lo = self.boundary_extremum((zx, zy), true);
        let hi = self.boundary_extremum((zx, zy), false);
        Ok((lo.value, hi.value))
    }

    /// Domain centroid via exact trapezoid quadrature of the polar moment
    /// (the integrand is a trigonometric polynomial).
    pub fn centroid(&self) -> (f64, f64) {
        let n = 4096;
        let (mut mx, mut my) = (0.0, 0.0);
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let r = self.shape.r(th);
            let w = r * r * r / 3.0;
            mx += w * th.cos();
            my += w * th.sin();
        }
        let h = 2.0 * std::f64::consts::PI / n as f64;
        (mx * h / self.area, my * h / self.area)
    }

    /// Invert the map: find (t, θ) with Φ(t, θ) = (x, y), t ∈ (0, 1].
    /// Newton with the analytic Jacobian; the map is a small perturbation of
    /// the identity, so convergence from the polar guess is immediate.
    pub fn invert(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let mut t = (x * x + y * y).sqrt();
        let mut theta = y.atan2(x);
        if t < 1e-300 {
            return Ok((0.0, 0.0));
        }
        t = (t / (1.0 + self.shape.epsilon * self.shape.rho(theta))).clamp(1e-8, 1.0);
        for _ in 0..50 {
            let jet = self.jet(t, theta);
            let (rx, ry) = (jet.x - x, jet.y - y);
            if rx.abs() + ry.abs() < 1e-14 {
                return Ok((t, theta));
            }
            // Newton step with the inverse Jacobian (already in the jet).
            t -= jet.t_x * rx + jet.t_y * ry;
            theta -= jet.th_x * rx + jet.th_y * ry;
            t = t.clamp(1e-12, 1.0);
        }
        let jet = self.jet(t, theta);
        if (jet.x - x).abs() + (jet.y - y).abs() < 1e-10 {
            Ok((t, theta))
        } else {
            Err(Error::NotInterior { x, y })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::Mode;
    use std::f64::consts::PI;

    fn cos2(eps: f64) -> DomainGeometry {
        build_domain(BoundaryShape::preset("cos2", eps).unwrap()).unwrap()
    }

    #[test]
    fn disk_geometry_is_polar() {
        let g = build_domain(BoundaryShape::disk()).unwrap();
        assert!((g.area - PI).abs() < 1e-15);
        let (nx, ny) = g.normal(0.7);
        assert!((nx - 0.7f64.cos()).abs() < 1e-15);
        assert!((ny - 0.7f64.sin()).abs() < 1e-15);
        assert!((g.arclength_jacobian(1.3) - 1.0).abs() < 1e-15);
        assert!((g.distance_to_boundary(0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((g.distance_to_boundary(0.3, 0.0).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn cos2_area_and_distance() {
        let g = cos2(0.05);
        assert!((g.area - PI * 1.00125).abs() < 1e-12);
        // min r = 0.95 at θ = π/2.
        assert!((g.distance_to_boundary(0.0, 0.0).unwrap() - 0.95).abs() < 1e-10);
        let (r1, r2) = g.radii_about(0.0, 0.0).unwrap();
        assert!((r1 - 0.95).abs() < 1e-10);
        assert!((r2 - 1.05).abs() < 1e-10);
    }

    #[test]
    fn radii_off_center_widen_gap() {
        // Oracle: dense 1e5-sample scan of |x(θ) − z|.
        let g = cos2(0.05);
        let z = (0.1, 0.0);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..100_000 {
            let th = 2.0 * PI * i as f64 / 1e5;
            let (bx, by) = g.boundary_point(th);
            let d = ((bx - z.0).powi(2) + (by - z.1).powi(2)).sqrt();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let (r1, r2) = g.radii_about(z.0, z.1).unwrap();
        assert!((r1 - lo).abs() < 1e-8, "ρ₁ {r1} vs scan {lo}");
        assert!((r2 - hi).abs() < 1e-8, "ρ₂ {r2} vs scan {hi}");
        assert!(r2 >= 1.05);
        assert!(r2 - r1 > 0.1);
    }

    #[test]
    fn distance_equals_inradius_and_newton_is_stationary() {
        let g = cos2(0.04);
        for &(x, y) in &[(0.0, 0.0), (0.2, 0.1), (-0.3, 0.25), (0.05, -0.4)] {
            let d = g.distance_to_boundary(x, y).unwrap();
            let (r1, _) = g.radii_about(x, y).unwrap();
            assert!((d - r1).abs() < 1e-10);
            let e = g.boundary_extremum((x, y), true);
            assert!(e.stationarity <= 1e-10, "stationarity {}", e.stationarity);
            assert!(!e.stalled);
        }
    }

    #[test]
    fn rejects_exterior_points() {
        let g = cos2(0.05);
        assert!(matches!(
            g.distance_to_boundary(0.0, 0.97),
            Err(Error::NotInterior { .. })
        ));
        assert!(g.radii_about(1.2, 0.0).is_err());
    }

    #[test]
    fn normals_are_orthonormal_on_shapes() {
        for name in ["cos1", "cos2", "cos3", "mixed"] {
            let g = build_domain(BoundaryShape::preset(name, 0.05).unwrap()).unwrap();
            for i in 0..64 {
                let th = 2.0 * PI * i as f64 / 64.0;
                let (nx, ny) = g.normal(th);
                let (tx, ty) = g.boundary_tangent_raw(th);
                assert!((nx * nx + ny * ny - 1.0).abs() < crate::tol::NORMAL_ORTHONORMAL);
                assert!(
                    (nx * tx + ny * ty).abs() < crate::tol::NORMAL_ORTHONORMAL
                        * (tx * tx + ty * ty).sqrt()
                );
            }
        }
    }

    #[test]
    fn closed_curve_normal_integral_vanishes() {
        // ∮ ν J dθ = 0 for a closed curve; trapezoid is exact for the series.
        let g = build_domain(BoundaryShape::preset("mixed", 0.05).unwrap()).unwrap();
        let n = 256;
        let (mut ix, mut iy) = (0.0, 0.0);
        for i in 0..n {
            let th = 2.0 * PI * i as f64 / n as f64;
            let (nx, ny) = g.normal(th);
            let j = g.arclength_jacobian(th);
            ix += nx * j;
            iy += ny * j;
        }
        let h = 2.0 * PI / n as f64;
        assert!((ix * h).abs() < 1e-12);
        assert!((iy * h).abs() < 1e-12);
    }

    #[test]
    fn map_boundary_matches_trace_and_jacobian_positive() {
        let g = build_domain(
            BoundaryShape::new(
                0.04,
                vec![Mode { k: 1, a: 0.4, b: 0.1 }, Mode { k: 3, a: 0.0, b: 0.6 }],
            )
            .unwrap(),
        )
        .unwrap();
        for i in 0..97 {
            let th = 2.0 * PI * i as f64 / 97.0;
            let (px, py) = g.position(1.0, th);
            let (bx, by) = g.boundary_point(th);
            assert!((px - bx).abs() < 1e-15 && (py - by).abs() < 1e-15);
        }
        for i in 0..50 {
            for j in 0..40 {
                let t = (i as f64 + 0.5) / 50.0;
                let th = 2.0 * PI * j as f64 / 40.0;
                assert!(g.jet(t, th).det > 0.0, "map must stay orientation-preserving");
            }
        }
    }

    #[test]
    fn metric_jet_matches_finite_differences() {
        let g = build_domain(
            BoundaryShape::new(
                0.05,
                vec![Mode { k: 2, a: 0.8, b: 0.3 }, Mode { k: 3, a: 0.2, b: -0.4 }],
            )
            .unwrap(),
        )
        .unwrap();
        let (t0, th0) = (0.62, 1.17);
        let jet = g.jet(t0, th0);
        // Differentiate the inverse map numerically in physical coordinates.
        let h = 1e-5;
        let probe = |x: f64, y: f64| g.invert(x, y).unwrap();
        let (xc, yc) = (jet.x, jet.y);
        let (tpx, thpx) = probe(xc + h, yc);
        let (tmx, thmx) = probe(xc - h, yc);
        let (tpy, thpy) = probe(xc, yc + h);
        let (tmy, thmy) = probe(xc, yc - h);
        let (tc, thc) = probe(xc, yc);
        assert!(((tpx - tmx) / (2.0 * h) - jet.t_x).abs() < 1e-8);
        assert!(((tpy - tmy) / (2.0 * h) - jet.t_y).abs() < 1e-8);
        assert!(((thpx - thmx) / (2.0 * h) - jet.th_x).abs() < 1e-8);
        assert!(((thpy - thmy) / (2.0 * h) - jet.th_y).abs() < 1e-8);
        assert!(((tpx - 2.0 * tc + tmx) / (h * h) - jet.t_xx).abs() < 1e-4);
        assert!(((tpy - 2.0 * tc + tmy) / (h * h) - jet.t_yy).abs() < 1e-4);
        assert!(((thpx - 2.0 * thc + thmx) / (h * h) - jet.th_xx).abs() < 1e-4);
        assert!(((thpy - 2.0 * thc + thmy) / (h * h) - jet.th_yy).abs() < 1e-4);
        // Mixed partial: symmetric difference in both directions.
        let (tpp, _) = probe(xc + h, yc + h);
        let (tpm, _) = probe(xc + h, yc - h);
        let (tmp, _) = probe(xc - h, yc + h);
        let (tmm, _) = probe(xc - h, yc - h);
        assert!(((tpp - tpm - tmp + tmm) / (4.0 * h * h) - jet.t_xy).abs() < 1e-4);
    }

    #[test]
    fn invert_roundtrip() {
        let g = build_domain(BoundaryShape::preset("mixed", 0.05).unwrap()).unwrap();
        for i in 0..30 {
            for j in 0..16 {
                let t = (i as f64 + 0.5) / 30.0;
                let th = 2.0 * PI * j as f64 / 16.0;
                let (x, y) = g.position(t, th);
                let (ti, thi) = g.invert(x, y).unwrap();
                let (xr, yr) = g.position(ti, thi);
                assert!((xr - x).abs() + (yr - y).abs() < 1e-12);
            }
        }
    }
}
