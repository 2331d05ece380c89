//! Spectral differentiation on the mapped disk.
//!
//! Radial derivatives come from the Chebyshev differentiation matrix of the
//! full doubled grid (degree M), folded onto the kept half through the parity
//! identification f(−t, θ) = f(t, θ+π): a folded operator has a `same` block
//! acting on the node's own angle and a `flip` block acting on θ+π. Angular
//! derivatives use the standard periodic (trigonometric) differentiation
//! matrices. Physical-space operators are assembled densely from the exact
//! chain rule through the map, with all metric coefficients analytic — the
//! inverse-coordinate fields t(x,y), θ(x,y) are not smooth through the pole,
//! so differentiating them spectrally would be wrong.

use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, MapJet};
use crate::grid::{Field, TensorGrid};
use ndarray::{Array1, Array2};

/// Chebyshev differentiation matrix on the M+1 Gauss–Lobatto nodes
/// cos(jπ/M), j = 0…M, with the negative-sum-trick diagonal.
pub fn chebyshev_diff(m: usize) -> Array2<f64> {
    let n = m + 1;
    let x: Vec<f64> = (0..n).map(|j| (j as f64 * std::f64::consts::PI / m as f64).cos()).collect();
    let c = |j: usize| if j == 0 || j == m { 2.0 } else { 1.0 };
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[[i, j]] = (c(i) / c(j)) * sign / (x[i] - x[j]);
            }
        }
    }
    for i in 0..n {
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| d[[i, j]]).sum();
        d[[i, i]] = -s;
    }
    d
}

/// Chebyshev second-derivative matrix D·D with the diagonal reset to the
/// negative row sum. The plain product loses exact annihilation of constants
/// to rounding, which the fourth-order compositions then amplify by ~M⁴.
pub fn chebyshev_diff2(m: usize) -> Array2<f64> {
    let d1 = chebyshev_diff(m);
    let mut d2 = d1.dot(&d1);
    for i in 0..=m {
        let s: f64 = (0..=m).filter(|&j| j != i).map(|j| d2[[i, j]]).sum();
        d2[[i, i]] = -s;
    }
    d2
}

/// First and second periodic differentiation matrices on N uniform nodes
/// (N even), spectrally exact for trigonometric polynomials of degree < N/2.
/// The second-derivative diagonal is the negative row sum (its closed form
/// −π²/(3h²) − 1/6, enforced exactly against the assembled off-diagonals).
pub fn fourier_diff(n: usize) -> (Array2<f64>, Array2<f64>) {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let mut d1 = Array2::<f64>::zeros((n, n));
    let mut d2 = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let k = i as isize - j as isize;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let half = 0.5 * k as f64 * h;
                d1[[i, j]] = 0.5 * sign / half.tan();
                d2[[i, j]] = -0.5 * sign / half.sin().powi(2);
            }
        }
    }
    for i in 0..n {
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| d2[[i, j]]).sum();
        d2[[i, i]] = -s;
    }
    (d1, d2)
}

/// Folded radial operator: (L f)(j, i) = Σ_j' same[j,j']·f(j', i)
/// + flip[j,j']·f(j', i+N/2).
struct Folded {
    same: Array2<f64>,
    flip: Array2<f64>,
}

fn fold(full: &Array2<f64>, nr: usize, m: usize) -> Folded {
    let mut same = Array2::<f64>::zeros((nr, nr));
    let mut flip = Array2::<f64>::zeros((nr, nr));
    for j in 0..nr {
        for jp in 0..nr {
            same[[j, jp]] = full[[j, jp]];
            flip[[j, jp]] = full[[j, m - jp]];
        }
    }
    Folded { same, flip }
}

/// Dense physical-space differentiation operators on the flattened grid.
pub struct DiffOps {
    pub n: usize,
    grid: TensorGrid,
    pub dx: Array2<f64>,
    pub dy: Array2<f64>,
    pub dxx: Array2<f64>,
    pub dxy: Array2<f64>,
    pub dyy: Array2<f64>,
    pub lap: Array2<f64>,
    /// Entrywise corrections `exact − stored` for dx, dy and the Laplacian,
    /// assembled in double-double (see [`crate::ddops`]). Checks that
    /// compose these operators to fourth order consume the (hi, lo) pairs;
    /// everything else uses the plain matrices.
    pub dx_lo: Array2<f64>,
    pub dy_lo: Array2<f64>,
    pub lap_lo: Array2<f64>,
    /// Corrections for the ring normal-derivative rows (row i ↔ boundary
    /// angle θ_i), matching [`DiffOps::normal_derivative_row`].
    pub nrow_lo: Array2<f64>,
}

/// Accumulate diag(coef)·(radial folded operator) into `out`.
fn add_radial(out: &mut Array2<f64>, coef: &[f64], op: &Folded, grid: &TensorGrid) {
    let (nr, nt) = (grid.nr, grid.ntheta);
    for j in 0..nr {
        for i in 0..nt {
            let row = grid.idx(j, i);
            let c = coef[row];
            if c == 0.0 {
                continue;
            }
            let fi = grid.flip(i);
            for jp in 0..nr {
                out[[row, grid.idx(jp, i)]] += c * op.same[[j, jp]];
                out[[row, grid.idx(jp, fi)]] += c * op.flip[[j, jp]];
            }
        }
    }
}

/// Accumulate diag(coef)·(angular operator) into `out`.
fn add_angular(out: &mut Array2<f64>, coef: &[f64], da: &Array2<f64>, grid: &TensorGrid) {
    let (nr, nt) = (grid.nr, grid.ntheta);
    for j in 0..nr {
        for i in 0..nt {
            let row = grid.idx(j, i);
            let c = coef[row];
            if c == 0.0 {
                continue;
            }
            for ip in 0..nt {
                out[[row, grid.idx(j, ip)]] += c * da[[i, ip]];
            }
        }
    }
}

/// Accumulate diag(coef)·(radial ∘ angular) into `out`. The two factors
/// commute exactly on the folded grid because the angular matrix is
/// shift-invariant, so the composition order is immaterial.
fn add_cross(out: &mut Array2<f64>, coef: &[f64], op: &Folded, da: &Array2<f64>, grid: &TensorGrid) {
    let (nr, nt) = (grid.nr, grid.ntheta);
    for j in 0..nr {
        for i in 0..nt {
            let row = grid.idx(j, i);
            let c = coef[row];
            if c == 0.0 {
                continue;
            }
            let fi = grid.flip(i);
            for jp in 0..nr {
                let cs = c * op.same[[j, jp]];
                let cf = c * op.flip[[j, jp]];
                if cs == 0.0 && cf == 0.0 {
                    continue;
                }
                for ip in 0..nt {
                    out[[row, grid.idx(jp, ip)]] += cs * da[[i, ip]] + cf * da[[fi, ip]];
                }
            }
        }
    }
}

impl DiffOps {
    pub fn build(geom: &DomainGeometry, grid: &TensorGrid, jets: &[MapJet]) -> Result<Self> {
        let n = grid.n_total();
        if jets.len() != n {
            return Err(Error::GridMismatch { got: jets.len(), expected: n });
        }
        if jets.iter().any(|j| j.det <= 0.0) {
            return Err(Error::BadInput(
                "interior map is not orientation-preserving at this amplitude".into(),
            ));
        }
        let d1_full = chebyshev_diff(grid.m);
        let d2_full = chebyshev_diff2(grid.m);
        let dt = fold(&d1_full, grid.nr, grid.m);
        let dtt = fold(&d2_full, grid.nr, grid.m);
        let (da1, da2) = fourier_diff(grid.ntheta);

        let pick = |f: fn(&MapJet) -> f64| -> Vec<f64> { jets.iter().map(f).collect() };

        let mut dx = Array2::<f64>::zeros((n, n));
        add_radial(&mut dx, &pick(|j| j.t_x), &dt, grid);
        add_angular(&mut dx, &pick(|j| j.th_x), &da1, grid);

        let mut dy = Array2::<f64>::zeros((n, n));
        add_radial(&mut dy, &pick(|j| j.t_y), &dt, grid);
        add_angular(&mut dy, &pick(|j| j.th_y), &da1, grid);

        let mut dxx = Array2::<f64>::zeros((n, n));
        add_radial(&mut dxx, &pick(|j| j.t_x * j.t_x), &dtt, grid);
        add_angular(&mut dxx, &pick(|j| j.th_x * j.th_x), &da2, grid);
        add_cross(&mut dxx, &pick(|j| 2.0 * j.t_x * j.th_x), &dt, &da1, grid);
        add_radial(&mut dxx, &pick(|j| j.t_xx), &dt, grid);
        add_angular(&mut dxx, &pick(|j| j.th_xx), &da1, grid);

        let mut dxy = Array2::<f64>::zeros((n, n));
        add_radial(&mut dxy, &pick(|j| j.t_x * j.t_y), &dtt, grid);
        add_angular(&mut dxy, &pick(|j| j.th_x * j.th_y), &da2, grid);
        add_cross(&mut dxy, &pick(|j| j.t_x * j.th_y + j.t_y * j.th_x), &dt, &da1, grid);
        add_radial(&mut dxy, &pick(|j| j.t_xy), &dt, grid);
        add_angular(&mut dxy, &pick(|j| j.th_xy), &da1, grid);

        let mut dyy = Array2::<f64>::zeros((n, n));
        add_radial(&mut dyy, &pick(|j| j.t_y * j.t_y), &dtt, grid);
        add_angular(&mut dyy, &pick(|j| j.th_y * j.th_y), &da2, grid);
        add_cross(&mut dyy, &pick(|j| 2.0 * j.t_y * j.th_y), &dt, &da1, grid);
        add_radial(&mut dyy, &pick(|j| j.t_yy), &dt, grid);
        add_angular(&mut dyy, &pick(|j| j.th_yy), &da1, grid);

        let lap = &dxx + &dyy;

        let tails = crate::ddops::build_tails(geom, grid, &dx, &dy, &lap);

        Ok(DiffOps {
            n,
            grid: grid.clone(),
            dx,
            dy,
            dxx,
            dxy,
            dyy,
            lap,
            dx_lo: tails.dx_lo,
            dy_lo: tails.dy_lo,
            lap_lo: tails.lap_lo,
            nrow_lo: tails.nrow_lo,
        })
    }

    fn apply(&self, m: &Array2<f64>, f: &Field) -> Result<Field> {
        if f.len() != self.n {
            return Err(Error::GridMismatch { got: f.len(), expected: self.n });
        }
        Field::new(m.dot(&f.vals), &self.grid)
    }

    pub fn ddx(&self, f: &Field) -> Result<Field> {
        self.apply(&self.dx, f)
    }

    pub fn ddy(&self, f: &Field) -> Result<Field> {
        self.apply(&self.dy, f)
    }

    pub fn laplacian(&self, f: &Field) -> Result<Field> {
        self.apply(&self.lap, f)
    }

    /// ∂^{i+j} f / ∂x^i ∂y^j for i + j ≤ 4, composed from the stored
    /// operators: second-order blocks where possible, then first-order.
    pub fn differentiate(&self, f: &Field, i: usize, j: usize) -> Result<Field> {
        if i + j > 4 {
            return Err(Error::OrderTooHigh { i, j });
        }
        if i == 1 && j == 1 {
            // The assembled analytic-metric mixed operator, not the
            // composition of first derivatives.
            return self.apply(&self.dxy, f);
        }
        let mut g = f.clone();
        let (mut i, mut j) = (i, j);
        while j >= 2 {
            g = self.apply(&self.dyy, &g)?;
            j -= 2;
        }
        if j == 1 {
            g = self.apply(&self.dy, &g)?;
        }
        while i >= 2 {
            g = self.apply(&self.dxx, &g)?;
            i -= 2;
        }
        if i == 1 {
            g = self.apply(&self.dx, &g)?;
        }
        Ok(g)
    }

    /// Row of the outward-normal derivative operator at boundary node i
    /// (flat index i, since the boundary ring is j = 0).
    pub fn normal_derivative_row(&self, geom: &DomainGeometry, i: usize) -> Array1<f64> {
        let th = self.grid.theta[i];
        let (nx, ny) = geom.normal(th);
        let mut row = Array1::<f64>::zeros(self.n);
        for c in 0..self.n {
            row[c] = nx * self.dx[[i, c]] + ny * self.dy[[i, c]];
        }
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_domain;
    use crate::shape::BoundaryShape;

    #[test]
    fn chebyshev_matrix_differentiates_polynomials() {
        let m = 9;
        let d = chebyshev_diff(m);
        let x: Vec<f64> =
            (0..=m).map(|j| (j as f64 * std::f64::consts::PI / m as f64).cos()).collect();
        let f = Array1::from_iter(x.iter().map(|&t| t.powi(4) - 2.0 * t));
        let df = d.dot(&f);
        for (j, &t) in x.iter().enumerate() {
            assert!((df[j] - (4.0 * t.powi(3) - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_matrices_differentiate_harmonics() {
        let n = 16;
        let (d1, d2) = fourier_diff(n);
        let th: Vec<f64> =
            (0..n).map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64).collect();
        let f = Array1::from_iter(th.iter().map(|&t| (3.0 * t).sin()));
        let df = d1.dot(&f);
        let ddf = d2.dot(&f);
        for (i, &t) in th.iter().enumerate() {
            assert!((df[i] - 3.0 * (3.0 * t).cos()).abs() < 1e-12);
            assert!((ddf[i] + 9.0 * (3.0 * t).sin()).abs() < 1e-11);
        }
    }

    fn make(name: &str, eps: f64, nr: usize, nt: usize) -> (DiffOps, Vec<MapJet>, TensorGrid, DomainGeometry) {
        let geom = build_domain(BoundaryShape::preset(name, eps).unwrap()).unwrap();
        let grid = TensorGrid::new(nr, nt, geom.shape.max_mode()).unwrap();
        let jets = grid.jets(&geom);
        let ops = DiffOps::build(&geom, &grid, &jets).unwrap();
        (ops, jets, grid, geom)
    }

    fn field_of(
        grid: &TensorGrid,
        jets: &[MapJet],
        f: impl Fn(f64, f64) -> f64,
    ) -> Field {
        Field::new(Array1::from_iter(jets.iter().map(|j| f(j.x, j.y))), grid).unwrap()
    }

    #[test]
    fn second_derivative_of_x_squared_on_disk() {
        let (ops, jets, grid, _) = make("disk", 0.0, 12, 24);
        let f = field_of(&grid, &jets, |x, _| x * x);
        let fxx = ops.differentiate(&f, 2, 0).unwrap();
        // Exact up to roundoff amplified by cond(D²) ~ M⁴·ε ≈ 3e−11 at M = 23.
        for &v in fxx.vals.iter() {
            assert!((v - 2.0).abs() < 1e-10, "∂²(x²)/∂x² = 2, got {v}");
        }
    }

    #[test]
    fn laplacian_of_r4_on_disk() {
        let (ops, jets, grid, _) = make("disk", 0.0, 16, 32);
        let f = field_of(&grid, &jets, |x, y| (x * x + y * y).powi(2));
        let lap = ops.laplacian(&f).unwrap();
        for (k, jet) in jets.iter().enumerate() {
            let exact = 16.0 * (jet.x * jet.x + jet.y * jet.y);
            assert!((lap.vals[k] - exact).abs() < 1e-10, "Δr⁴ = 16r², err at node {k}");
        }
    }

    #[test]
    fn exp_gradient_on_even_and_odd_shapes() {
        // Relative 1e−9 at the default resolution; the odd-mode families are
        // the regression for the pole-parity treatment.
        for name in ["cos2", "cos1", "cos3", "mixed"] {
            let (ops, jets, grid, _) = make(name, 0.05, 32, 64);
            let f = field_of(&grid, &jets, |x, _| x.exp());
            let fx = ops.differentiate(&f, 1, 0).unwrap();
            let fy = ops.differentiate(&f, 0, 1).unwrap();
            let mut worst = 0.0f64;
            for (k, jet) in jets.iter().enumerate() {
                let e = jet.x.exp();
                worst = worst.max(((fx.vals[k] - e) / e).abs());
                worst = worst.max((fy.vals[k] / e).abs());
            }
            assert!(worst < 1e-9, "{name}: relative gradient error {worst:e}");
        }
    }

    #[test]
    fn laplacian_on_perturbed_domain() {
        let (ops, jets, grid, _) = make("cos3", 0.04, 32, 64);
        // Δ(sin 2x · cosh y) = −3 sin 2x · cosh y
        let f = field_of(&grid, &jets, |x, y| (2.0 * x).sin() * y.cosh());
        let lap = ops.laplacian(&f).unwrap();
        let mut worst = 0.0f64;
        for (k, jet) in jets.iter().enumerate() {
            let exact = -3.0 * (2.0 * jet.x).sin() * jet.y.cosh();
            worst = worst.max((lap.vals[k] - exact).abs());
        }
        assert!(worst < 1e-8, "Laplacian error {worst:e}");
    }

    #[test]
    fn mixed_partials_commute() {
        let (ops, jets, grid, _) = make("mixed", 0.04, 24, 48);
        let f = field_of(&grid, &jets, |x, y| (x + 0.5 * y).exp() * (1.0 - x * x - y * y));
        let fxy = ops.ddy(&ops.ddx(&f).unwrap()).unwrap();
        let fyx = ops.ddx(&ops.ddy(&f).unwrap()).unwrap();
        let mut worst = 0.0f64;
        for k in 0..f.len() {
            worst = worst.max((fxy.vals[k] - fyx.vals[k]).abs());
        }
        assert!(worst < crate::tol::DERIVATIVE_COMMUTE, "commutator {worst:e}");
    }

    #[test]
    fn assembled_hessian_matches_composed_first_derivatives() {
        let (ops, jets, grid, _) = make("cos2", 0.05, 24, 48);
        let f = field_of(&grid, &jets, |x, y| (x * y + 0.3 * x).sin());
        let hxy = ops.differentiate(&f, 1, 1).unwrap();
        let composed = ops.ddx(&ops.ddy(&f).unwrap()).unwrap();
        let mut worst = 0.0f64;
        for k in 0..f.len() {
            worst = worst.max((hxy.vals[k] - composed.vals[k]).abs());
        }
        assert!(worst < 1e-9, "dxy assembly vs composition {worst:e}");
    }

    #[test]
    fn fourth_order_composition_on_disk() {
        let (ops, jets, grid, _) = make("disk", 0.0, 16, 32);
        // Δ²((1−r²)²/64) = 1 — the discrete version carries the rounding
        // noise of two Laplacian applications, so the gate is loose.
        let f = field_of(&grid, &jets, |x, y| (1.0 - x * x - y * y).powi(2) / 64.0);
        let l1 = ops.laplacian(&f).unwrap();
        let l2 = ops.laplacian(&l1).unwrap();
        for &v in l2.vals.iter() {
            assert!((v - 1.0).abs() < 1e-7, "Δ²u₀ = 1, got {v}");
        }
    }

    #[test]
    fn order_cap() {
        let (ops, jets, grid, _) = make("disk", 0.0, 8, 16);
        let f = field_of(&grid, &jets, |x, _| x);
        assert!(matches!(
            ops.differentiate(&f, 3, 2),
            Err(crate::error::Error::OrderTooHigh { .. })
        ));
    }

}
