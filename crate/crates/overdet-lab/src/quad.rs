//! Quadrature on the mapped disk: half-range Clenshaw–Curtis weights in the
//! radial coordinate × trapezoid in the angle, with the exact map Jacobian in
//! volume integrals and the arclength Jacobian in boundary integrals.
//!
//! The radial grid keeps only the t > 0 half of a Chebyshev–Gauss–Lobatto
//! diameter grid; a node's antipode lives at the angle shifted by π.  Building
//! interpolatory weights from the kept half alone is unstable (the interval
//! [0, t_min] is pure extrapolation), so the weights here integrate the
//! degree-M interpolant on the *full* diameter over [0, 1] and fold the
//! negative-half contributions back onto kept nodes.  Any smooth integrand of
//! the form f · detJ extends across the pole with a sign flip and the angular
//! shift (detJ is odd under the antipodal identification), which makes the
//! folded weight of ring j exactly W[j] − W[M−j] with W the partial-range
//! Clenshaw–Curtis weights.  The folded weights come out strictly positive.

use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, MapJet};
use crate::grid::{Field, TensorGrid};

/// L^p index with p = ∞ admitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lp {
    Finite(f64),
    Infinity,
}

impl Lp {
    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Lp::Infinity);
        }
        let p: f64 = s
            .parse()
            .map_err(|_| Error::BadInput(format!("cannot parse L^p index `{s}`")))?;
        Lp::finite(p)
    }

    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidP { p });
        }
        Ok(Lp::Finite(p))
    }

    pub fn label(&self) -> String {
        match self {
            Lp::Finite(p) => {
                if (p - p.round()).abs() < 1e-12 {
                    format!("{}", p.round() as i64)
                } else {
                    format!("{p}")
                }
            }
            Lp::Infinity => "inf".into(),
        }
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] (Newton on the three-term
/// recurrence; used to integrate the Lagrange basis exactly).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and P'_n(x) by recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// T_k(0) = cos(kπ/2).
fn chebyshev_at_zero(k: usize) -> f64 {
    match k % 4 {
        0 => 1.0,
        2 => -1.0,
        _ => 0.0,
    }
}

/// Radial weights for the kept rings t_j = cos(jπ/M), j = 0..nr−1, M = 2nr−1:
/// fold of the partial-range Clenshaw–Curtis weights W (w_j = W[j] − W[M−j]),
/// so that Σ_j w_j G_j integrates the full-diameter degree-M interpolant of
/// the sign-extended integrand over [0, 1].  Exact on odd powers t^(2l+1) up
/// to degree M, the parity class every f · detJ integrand lives in.
pub fn half_range_chebyshev_weights(nr: usize) -> Vec<f64> {
    let m = 2 * nr - 1;
    let mf = m as f64;
    // γ_k = ∫₀¹ T_k(t) dt via the antiderivative (T_{k+1}' and T_{k−1}').
    let mut gamma = vec![0.0; m + 2];
    gamma[0] = 1.0;
    gamma[1] = 0.5;
    for k in 2..=m {
        let kf = k as f64;
        let hi = (1.0 - chebyshev_at_zero(k + 1)) / (2.0 * (kf + 1.0));
        let lo = (1.0 - chebyshev_at_zero(k - 1)) / (2.0 * (kf - 1.0));
        gamma[k] = hi - lo;
    }
    // Partial-range weights of the full grid: W[j] = (2/(M c_j)) Σ_k (γ_k/c_k) cos(kjπ/M),
    // with c_0 = c_M = 2 and c_k = 1 otherwise.  The cosine argument is
    // reduced mod 2M before the float divide so large k·j stays accurate.
    let c = |k: usize| if k == 0 || k == m { 2.0 } else { 1.0 };
    let mut w_full = vec![0.0; m + 1];
    for (j, wj) in w_full.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, &g) in gamma.iter().enumerate().take(m + 1) {
            let red = (k * j) % (2 * m);
            s += g / c(k) * (red as f64 * std::f64::consts::PI / mf).cos();
        }
        *wj = 2.0 * s / (mf * c(j));
    }
    (0..nr).map(|j| w_full[j] - w_full[m - j]).collect()
}

pub struct Quadrature {
    /// Radial weights against dt on [0, 1], one per kept ring.
    pub radial_w: Vec<f64>,
    pub dtheta: f64,
    /// Map Jacobian at every node.
    pub detj: Vec<f64>,
    /// Full volume weight per node: radial_w[j] · dθ · detJ.
    pub node_w: Vec<f64>,
    /// Arclength Jacobian at the boundary angles.
    pub bj: Vec<f64>,
    n_total: usize,
    ntheta: usize,
}

impl Quadrature {
    pub fn build(geom: &DomainGeometry, grid: &TensorGrid, jets: &[MapJet]) -> Result<Self> {
        let radial_w = half_range_chebyshev_weights(grid.nr);
        let dtheta = 2.0 * std::f64::consts::PI / grid.ntheta as f64;
        let detj: Vec<f64> = jets.iter().map(|j| j.det).collect();
        if detj.iter().any(|&d| d <= 0.0) {
            // The interior map folds over itself; no positive measure exists.
            return Err(Error::BadInput("map Jacobian not positive on the grid".into()));
        }
        let mut node_w = vec![0.0; grid.n_total()];
        for j in 0..grid.nr {
            for i in 0..grid.ntheta {
                let k = grid.idx(j, i);
                node_w[k] = radial_w[j] * dtheta * detj[k];
            }
        }
        let bj: Vec<f64> = grid.theta.iter().map(|&th| geom.arclength_jacobian(th)).collect();
        Ok(Quadrature {
            radial_w,
            dtheta,
            detj,
            node_w,
            bj,
            n_total: grid.n_total(),
            ntheta: grid.ntheta,
        })
    }

    pub fn volume_integral(&self, f: &Field) -> Result<f64> {
        if f.len() != self.n_total {
            return Err(Error::GridMismatch { got: f.len(), expected: self.n_total });
        }
        Ok(f.vals.iter().zip(self.node_w.iter()).map(|(&v, &w)| v * w).sum())
    }

    /// Discrete |Ω| (volume integral of 1).
    pub fn area(&self) -> f64 {
        self.node_w.iter().sum()
    }

    pub fn mean(&self, f: &Field) -> Result<f64> {
        Ok(self.volume_integral(f)? / self.area())
    }

    /// ‖f‖_{L^p(Ω)}; p = ∞ is the node max.
    pub fn volume_lp(&self, f: &Field, p: Lp) -> Result<f64> {
        if f.len() != self.n_total {
            return Err(Error::GridMismatch { got: f.len(), expected: self.n_total });
        }
        match p {
            Lp::Infinity => Ok(f.max_abs()),
            Lp::Finite(p) => {
                let s: f64 = f
                    .vals
                    .iter()
                    .zip(self.node_w.iter())
                    .map(|(&v, &w)| v.abs().powf(p) * w)
                    .sum();
                Ok(s.powf(1.0 / p))
            }
        }
    }

    /// ∮ g dS = ∫ g(θ) J(θ) dθ, trapezoid over the periodic angle.
    pub fn boundary_integral(&self, g: &[f64]) -> Result<f64> {
        if g.len() != self.ntheta {
            return Err(Error::GridMismatch { got: g.len(), expected: self.ntheta });
        }
        Ok(self.dtheta * g.iter().zip(self.bj.iter()).map(|(&v, &j)| v * j).sum::<f64>())
    }

    pub fn perimeter(&self) -> f64 {
        self.dtheta * self.bj.iter().sum::<f64>()
    }

    /// ‖g‖_{L^p(∂Ω)}; p = ∞ is the node max.
    pub fn boundary_lp(&self, g: &[f64], p: Lp) -> Result<f64> {
        if g.len() != self.ntheta {
            return Err(Error::GridMismatch { got: g.len(), expected: self.ntheta });
        }
        match p {
            Lp::Infinity => Ok(g.iter().fold(0.0f64, |m, &v| m.max(v.abs()))),
            Lp::Finite(p) => {
                let s: f64 = self.dtheta
                    * g.iter()
                        .zip(self.bj.iter())
                        .map(|(&v, &j)| v.abs().powf(p) * j)
                        .sum::<f64>();
                Ok(s.powf(1.0 / p))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_domain;
    use crate::shape::BoundaryShape;
    use ndarray::Array1;
    use std::f64::consts::PI;

    fn setup(name: &str, eps: f64, nr: usize, nt: usize) -> (Quadrature, Vec<MapJet>, TensorGrid, DomainGeometry) {
        let geom = build_domain(BoundaryShape::preset(name, eps).unwrap()).unwrap();
        let grid = TensorGrid::new(nr, nt, geom.shape.max_mode()).unwrap();
        let jets = grid.jets(&geom);
        let quad = Quadrature::build(&geom, &grid, &jets).unwrap();
        (quad, jets, grid, geom)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        // degree 15 exactness: ∫₋₁¹ t^14 dt = 2/15
        let s: f64 = x.iter().zip(w.iter()).map(|(&t, &wi)| t.powi(14) * wi).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn radial_weights_reproduce_odd_moments() {
        // Every volume integrand carries one factor of detJ, which is odd
        // under the antipodal identification, so exactness on odd powers up
        // to degree M = 2·nr − 1 is the full polynomial guarantee.
        for nr in 4..=128usize {
            let m = 2 * nr - 1;
            let t: Vec<f64> = (0..nr).map(|j| (j as f64 * PI / m as f64).cos()).collect();
            let w = half_range_chebyshev_weights(nr);
            assert!(w.iter().all(|&wi| wi > 0.0), "weights positive at nr = {nr}");
            for l in 0..nr {
                let k = 2 * l + 1;
                let s: f64 = w.iter().zip(t.iter()).map(|(&wi, &ti)| wi * ti.powi(k as i32)).sum();
                let exact = 1.0 / (k as f64 + 1.0);
                assert!(
                    (s - exact).abs() < 5e-13,
                    "moment {k} at nr = {nr}: {s} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn disk_area_and_radial_quartic() {
        let (quad, jets, grid, _) = setup("disk", 0.0, 32, 64);
        let one = Field::new(Array1::from_elem(grid.n_total(), 1.0), &grid).unwrap();
        assert!((quad.volume_integral(&one).unwrap() - PI).abs() < 1e-12);
        // ∫ u₀ = π/192 for u₀ = (r²−1)²/64 in the plane.
        let u0 = Field::new(
            Array1::from_iter(jets.iter().map(|j| {
                let r2 = j.x * j.x + j.y * j.y;
                (r2 - 1.0) * (r2 - 1.0) / 64.0
            })),
            &grid,
        )
        .unwrap();
        assert!((quad.volume_integral(&u0).unwrap() - PI / 192.0).abs() < 1e-14);
    }

    #[test]
    fn perturbed_area_matches_polar_formula() {
        let (quad, _, grid, geom) = setup("cos2", 0.05, 32, 64);
        let one = Field::new(Array1::from_elem(grid.n_total(), 1.0), &grid).unwrap();
        let a = quad.volume_integral(&one).unwrap();
        assert!((a - PI * 1.00125).abs() < 1e-12, "quadrature area {a}");
        assert!((a - geom.area).abs() < 1e-12);
    }

    #[test]
    fn boundary_integrals_on_disk() {
        let (quad, _, _, _) = setup("disk", 0.0, 8, 64);
        let ones = vec![1.0; 64];
        assert!((quad.boundary_integral(&ones).unwrap() - 2.0 * PI).abs() < 1e-13);
        // x·ν = 1 on the unit circle.
        assert!((quad.perimeter() - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn constant_lp_norm_on_any_shape() {
        let (quad, _, _, _) = setup("mixed", 0.05, 16, 64);
        let c = 0.37;
        let g = vec![c; 64];
        let n2 = quad.boundary_lp(&g, Lp::Finite(2.0)).unwrap();
        assert!((n2 - c * quad.perimeter().sqrt()).abs() < 1e-13);
        let ninf = quad.boundary_lp(&g, Lp::Infinity).unwrap();
        assert!((ninf - c).abs() < 1e-15);
    }

    #[test]
    fn lp_rejects_bad_p() {
        assert!(Lp::finite(0.5).is_err());
        assert!(Lp::parse("inf").is_ok());
        assert!(Lp::parse("2.5").is_ok());
        assert!(Lp::parse("zero").is_err());
    }

    #[test]
    fn boundary_lp_monotone_in_p_when_normalized() {
        // (avg |g|^p)^{1/p} nondecreasing in p on the |∂Ω|-normalized measure.
        let (quad, _, _, _) = setup("cos3", 0.04, 8, 64);
        let g: Vec<f64> = (0..64)
            .map(|i| (2.0 * PI * i as f64 / 64.0).sin() + 0.3)
            .collect();
        let per = quad.perimeter();
        let mut prev = 0.0;
        for &p in &[1.0, 1.5, 2.0, 3.0, 6.0, 12.0] {
            let norm = quad.boundary_lp(&g, Lp::Finite(p)).unwrap() / per.powf(1.0 / p);
            assert!(norm >= prev - 1e-12, "p = {p}: {norm} < {prev}");
            prev = norm;
        }
        let sup = quad.boundary_lp(&g, Lp::Infinity).unwrap();
        assert!(sup >= prev - 1e-12);
    }
}
