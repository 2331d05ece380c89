//! Exact-entry differentiation operators, assembled in double-double.
//!
//! The f64 operators in [`crate::ops`] carry ~1 ulp of relative rounding per
//! entry from the node formulas, the metric jets, and the chain-rule
//! products. For first- and second-order checks that is invisible, but a
//! residual that applies the Laplacian twice amplifies entry-level noise by
//! roughly the product of the two row-sum scales — measured at ~4e−6 on the
//! default grid in otherwise exact arithmetic, far above the 1e−8 tolerance
//! of the fourth-order identity checks. This module rebuilds dx, dy and the
//! Laplacian in double-double on the same nodes and keeps the entrywise
//! corrections `lo = exact − stored`, so the plate solver can refine against
//! the exact-entry system and identity checks can apply the operator pair
//! (hi, lo) with compensated arithmetic.
//!
//! Model conventions: the radial grid is the stored f64 node set, symmetrized
//! exactly across the origin (the differentiation matrix is the exact
//! barycentric derivative of the interpolant through those nodes); the
//! angular grid is exactly uniform, θ_i = 2πi/N in double-double.

use crate::geometry::DomainGeometry;
use crate::grid::TensorGrid;
use crate::shape::BoundaryShape;
use ndarray::{s, Array2};
use twofloat::TwoFloat;

pub struct OpTails {
    pub dx_lo: Array2<f64>,
    pub dy_lo: Array2<f64>,
    pub lap_lo: Array2<f64>,
    /// Corrections for the boundary normal-derivative rows (ring row i acts
    /// on a full field). The plate solver refines against these so the
    /// solved fields satisfy the *exact-entry* boundary rows as well —
    /// otherwise the solution inherits a rough ~ulp deviation whose
    /// equation residuals spike at the ring and get amplified ~M⁴ by every
    /// further Laplacian.
    pub nrow_lo: Array2<f64>,
}

const ZERO: TwoFloat = TwoFloat::from_f64(0.0);
const ONE: TwoFloat = TwoFloat::from_f64(1.0);

/// Double-double reciprocal with the Newton residual formed by FMA.
///
/// `TwoFloat`'s own `/` and `recip` compute that residual as
/// `1.0 - b.hi * th` with a plain multiply, which rounds `b.hi·th ≈ 1` to
/// exactly 1.0 and destroys the correction term: their quotients are only
/// ~2⁻⁵⁴-accurate (the crate's own `recip` doctest asserts 1e-16). That is
/// the same size as the f64 rounding these operators exist to remove, so
/// every division here goes through this helper instead.
fn dd_recip(b: TwoFloat) -> TwoFloat {
    let th = b.hi().recip();
    let rh = f64::mul_add(-b.hi(), th, 1.0);
    let rl = -(b.lo() * th);
    let e = TwoFloat::new_add(rh, rl);
    e * th + th
}

/// Double-double quotient via [`dd_recip`]; relative error ~1e-31.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    a * dd_recip(b)
}

/// Angular node θ_i = 2πi/N in double-double, shared by every assembly in
/// this module so all operators reference the same model grid.
fn theta_dd(i: usize, n: usize) -> TwoFloat {
    dd_div(
        twofloat::consts::PI * TwoFloat::from(2.0 * i as f64),
        TwoFloat::from(n as f64),
    )
}

/// Full-diameter Chebyshev nodes: the stored kept-half values, reflected
/// exactly (ξ_{M−j} = −ξ_j holds bitwise by construction here, which makes
/// the parity folding exact).
fn full_nodes(grid: &TensorGrid) -> Vec<TwoFloat> {
    let m = grid.m;
    (0..=m)
        .map(|j| {
            if j < grid.nr {
                TwoFloat::from(grid.t[j])
            } else {
                TwoFloat::from(-grid.t[m - j])
            }
        })
        .collect()
}

/// Barycentric first-derivative matrix of the polynomial interpolant through
/// arbitrary distinct nodes: D_ij = (w_j/w_i)/(x_i − x_j), diagonal the
/// negative row sum.
fn barycentric_d1(nodes: &[TwoFloat]) -> Array2<TwoFloat> {
    let n = nodes.len();
    // Keep the node-difference products p_i = Π_{j≠i}(x_i − x_j) directly
    // (the barycentric weights are w_i = 1/p_i, so w_j/w_i = p_i/p_j); this
    // needs one division per entry instead of three.
    let mut p = vec![ONE; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i] *= nodes[i] - nodes[j];
            }
        }
    }
    let mut d = Array2::from_elem((n, n), ZERO);
    for i in 0..n {
        let mut s = ZERO;
        for j in 0..n {
            if i != j {
                let e = dd_div(p[i], p[j] * (nodes[i] - nodes[j]));
                d[[i, j]] = e;
                s += e;
            }
        }
        d[[i, i]] = -s;
    }
    d
}

/// D·D with the diagonal reset to the negative row sum, mirroring
/// [`crate::ops::chebyshev_diff2`].
fn compose_negsum(d: &Array2<TwoFloat>) -> Array2<TwoFloat> {
    let n = d.nrows();
    let mut out = Array2::from_elem((n, n), ZERO);
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += d[[i, k]] * d[[k, j]];
            }
            out[[i, j]] = s;
        }
    }
    for i in 0..n {
        let mut s = ZERO;
        for j in 0..n {
            if i != j {
                s += out[[i, j]];
            }
        }
        out[[i, i]] = -s;
    }
    out
}

/// Periodic differentiation matrices on N exactly uniform nodes, mirroring
/// [`crate::ops::fourier_diff`].
fn fourier_dd(n: usize) -> (Array2<TwoFloat>, Array2<TwoFloat>) {
    let mut d1 = Array2::from_elem((n, n), ZERO);
    let mut d2 = Array2::from_elem((n, n), ZERO);
    let half = TwoFloat::from(0.5);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let k = i as isize - j as isize;
                let sign = if k % 2 == 0 { ONE } else { -ONE };
                // k·h/2 = kπ/N
                let ang = dd_div(
                    twofloat::consts::PI * TwoFloat::from(k as f64),
                    TwoFloat::from(n as f64),
                );
                let (si, co) = ang.sin_cos();
                let inv_si = dd_recip(si);
                d1[[i, j]] = half * sign * co * inv_si;
                d2[[i, j]] = -half * sign * inv_si * inv_si;
            }
        }
    }
    for i in 0..n {
        let mut s = ZERO;
        for j in 0..n {
            if i != j {
                s += d2[[i, j]];
            }
        }
        d2[[i, i]] = -s;
    }
    (d1, d2)
}

struct FoldedDd {
    same: Array2<TwoFloat>,
    flip: Array2<TwoFloat>,
}

fn fold_dd(full: &Array2<TwoFloat>, nr: usize, m: usize) -> FoldedDd {
    let mut same = Array2::from_elem((nr, nr), ZERO);
    let mut flip = Array2::from_elem((nr, nr), ZERO);
    for j in 0..nr {
        for jp in 0..nr {
            same[[j, jp]] = full[[j, jp]];
            flip[[j, jp]] = full[[j, m - jp]];
        }
    }
    FoldedDd { same, flip }
}

/// Inverse-coordinate jet in double-double, mirroring
/// [`crate::geometry::DomainGeometry::jet`].
struct JetDd {
    t_x: TwoFloat,
    t_y: TwoFloat,
    th_x: TwoFloat,
    th_y: TwoFloat,
    t_xx: TwoFloat,
    t_yy: TwoFloat,
    th_xx: TwoFloat,
    th_yy: TwoFloat,
}

fn jet_dd(shape: &BoundaryShape, t: TwoFloat, theta: TwoFloat) -> JetDd {
    let eps = TwoFloat::from(shape.epsilon);
    let (mut p, mut pt, mut pth, mut ptt, mut ptth, mut pthth) =
        (ZERO, ZERO, ZERO, ZERO, ZERO, ZERO);
    for m in &shape.modes {
        let k = TwoFloat::from(m.k as f64);
        let (si, co) = (k * theta).sin_cos();
        let a = TwoFloat::from(m.a);
        let b = TwoFloat::from(m.b);
        let ang = a * co + b * si;
        let dang = k * (b * co - a * si);
        let ddang = -(k * k) * ang;
        let ki = m.k as i32;
        let tk = t.powi(ki);
        let tk1 = if m.k >= 1 { k * t.powi(ki - 1) } else { ZERO };
        let tk2 = if m.k >= 2 { k * (k - ONE) * t.powi(ki - 2) } else { ZERO };
        p += tk * ang;
        pt += tk1 * ang;
        pth += tk * dang;
        ptt += tk2 * ang;
        ptth += tk1 * dang;
        pthth += tk * ddang;
    }
    let (p, pt, pth, ptt, ptth, pthth) =
        (eps * p, eps * pt, eps * pth, eps * ptt, eps * ptth, eps * pthth);

    let (s, c) = theta.sin_cos();
    let a = t * (ONE + p);
    let a_t = ONE + p + t * pt;
    let a_th = t * pth;
    let a_tt = TwoFloat::from(2.0) * pt + t * ptt;
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
    let x_thth = a_thth * c - TwoFloat::from(2.0) * a_th * s - a * c;
    let y_tt = a_tt * s;
    let y_tth = a_tth * s + a_t * c;
    let y_thth = a_thth * s + TwoFloat::from(2.0) * a_th * c - a * s;

    let inv = dd_recip(det);
    let t_x = y_th * inv;
    let t_y = -x_th * inv;
    let th_x = -y_t * inv;
    let th_y = x_t * inv;

    let inv2 = inv * inv;
    let tx_t = (y_tth * det - y_th * det_t) * inv2;
    let tx_th = (y_thth * det - y_th * det_th) * inv2;
    let ty_t = -(x_tth * det - x_th * det_t) * inv2;
    let ty_th = -(x_thth * det - x_th * det_th) * inv2;
    let thx_t = -(y_tt * det - y_t * det_t) * inv2;
    let thx_th = -(y_tth * det - y_t * det_th) * inv2;
    let thy_t = (x_tt * det - x_t * det_t) * inv2;
    let thy_th = (x_tth * det - x_t * det_th) * inv2;

    JetDd {
        t_x,
        t_y,
        th_x,
        th_y,
        t_xx: tx_t * t_x + tx_th * th_x,
        t_yy: ty_t * t_y + ty_th * th_y,
        th_xx: thx_t * t_x + thx_th * th_x,
        th_yy: thy_t * t_y + thy_th * th_y,
    }
}

fn add_radial_dd(out: &mut Array2<TwoFloat>, coef: &[TwoFloat], op: &FoldedDd, grid: &TensorGrid) {
    let (nr, nt) = (grid.nr, grid.ntheta);
    for j in 0..nr {
        for i in 0..nt {
            let row = grid.idx(j, i);
            let c = coef[row];
            let fi = grid.flip(i);
            for jp in 0..nr {
                out[[row, grid.idx(jp, i)]] += c * op.same[[j, jp]];
                out[[row, grid.idx(jp, fi)]] += c * op.flip[[j, jp]];
            }
        }
    }
}

fn add_angular_dd(
    out: &mut Array2<TwoFloat>,
    coef: &[TwoFloat],
    da: &Array2<TwoFloat>,
    grid: &TensorGrid,
) {
    let (nr, nt) = (grid.nr, grid.ntheta);
    for j in 0..nr {
        for i in 0..nt {
            let row = grid.idx(j, i);
            let c = coef[row];
            for ip in 0..nt {
                out[[row, grid.idx(j, ip)]] += c * da[[i, ip]];
            }
        }
    }
}

fn add_cross_dd(
    out: &mut Array2<TwoFloat>,
    coef: &[TwoFloat],
    op: &FoldedDd,
    da: &Array2<TwoFloat>,
    grid: &TensorGrid,
) {
    let (nr, nt) = (grid.nr, grid.ntheta);
    for j in 0..nr {
        for i in 0..nt {
            let row = grid.idx(j, i);
            let c = coef[row];
            let fi = grid.flip(i);
            for jp in 0..nr {
                let cs = c * op.same[[j, jp]];
                let cf = c * op.flip[[j, jp]];
                for ip in 0..nt {
                    out[[row, grid.idx(jp, ip)]] += cs * da[[i, ip]] + cf * da[[fi, ip]];
                }
            }
        }
    }
}

/// Entrywise f64 correction `exact − stored`.
fn subtract(acc: &Array2<TwoFloat>, hi: &Array2<f64>) -> Array2<f64> {
    Array2::from_shape_fn(acc.dim(), |(i, j)| {
        let d = acc[[i, j]] - TwoFloat::from(hi[[i, j]]);
        d.hi() + d.lo()
    })
}

/// Outward unit boundary normal in double-double, mirroring
/// [`crate::geometry::DomainGeometry::normal`].
fn normal_dd(shape: &BoundaryShape, theta: TwoFloat) -> (TwoFloat, TwoFloat) {
    let eps = TwoFloat::from(shape.epsilon);
    let (mut rho, mut rhop) = (ZERO, ZERO);
    for m in &shape.modes {
        let k = TwoFloat::from(m.k as f64);
        let (si, co) = (k * theta).sin_cos();
        rho += TwoFloat::from(m.a) * co + TwoFloat::from(m.b) * si;
        rhop += k * (TwoFloat::from(m.b) * co - TwoFloat::from(m.a) * si);
    }
    let r = ONE + eps * rho;
    let rp = eps * rhop;
    let (si, co) = theta.sin_cos();
    let tx = rp * co - r * si;
    let ty = rp * si + r * co;
    let ji = dd_recip((tx * tx + ty * ty).sqrt());
    (ty * ji, -(tx * ji))
}

/// Build the entrywise corrections for dx, dy, the Laplacian and the
/// boundary normal-derivative rows against the already-assembled f64
/// operators.
pub fn build_tails(
    geom: &DomainGeometry,
    grid: &TensorGrid,
    dx_hi: &Array2<f64>,
    dy_hi: &Array2<f64>,
    lap_hi: &Array2<f64>,
) -> OpTails {
    let shape = &geom.shape;
    let n = grid.n_total();
    let nodes = full_nodes(grid);
    let d1_full = barycentric_d1(&nodes);
    let d2_full = compose_negsum(&d1_full);
    let dt = fold_dd(&d1_full, grid.nr, grid.m);
    let dtt = fold_dd(&d2_full, grid.nr, grid.m);
    let (da1, da2) = fourier_dd(grid.ntheta);

    let mut jets = Vec::with_capacity(n);
    for j in 0..grid.nr {
        let t = TwoFloat::from(grid.t[j]);
        for i in 0..grid.ntheta {
            jets.push(jet_dd(shape, t, theta_dd(i, grid.ntheta)));
        }
    }
    let pick = |f: &dyn Fn(&JetDd) -> TwoFloat| -> Vec<TwoFloat> { jets.iter().map(f).collect() };

    let mut acc = Array2::from_elem((n, n), ZERO);
    add_radial_dd(&mut acc, &pick(&|j| j.t_x), &dt, grid);
    add_angular_dd(&mut acc, &pick(&|j| j.th_x), &da1, grid);
    let dx_ring = acc.slice(s![0..grid.ntheta, ..]).to_owned();
    let dx_lo = subtract(&acc, dx_hi);

    acc.fill(ZERO);
    add_radial_dd(&mut acc, &pick(&|j| j.t_y), &dt, grid);
    add_angular_dd(&mut acc, &pick(&|j| j.th_y), &da1, grid);
    let dy_ring = acc.slice(s![0..grid.ntheta, ..]).to_owned();
    let dy_lo = subtract(&acc, dy_hi);

    acc.fill(ZERO);
    add_radial_dd(&mut acc, &pick(&|j| j.t_x * j.t_x + j.t_y * j.t_y), &dtt, grid);
    add_angular_dd(&mut acc, &pick(&|j| j.th_x * j.th_x + j.th_y * j.th_y), &da2, grid);
    add_cross_dd(
        &mut acc,
        &pick(&|j| TwoFloat::from(2.0) * (j.t_x * j.th_x + j.t_y * j.th_y)),
        &dt,
        &da1,
        grid,
    );
    add_radial_dd(&mut acc, &pick(&|j| j.t_xx + j.t_yy), &dt, grid);
    add_angular_dd(&mut acc, &pick(&|j| j.th_xx + j.th_yy), &da1, grid);
    let lap_lo = subtract(&acc, lap_hi);

    // Boundary normal-derivative rows: exact assembly minus a bitwise
    // re-run of the f64 assembly in ops::normal_derivative_row.
    let mut nrow_lo = Array2::<f64>::zeros((grid.ntheta, n));
    for i in 0..grid.ntheta {
        let (nx, ny) = normal_dd(shape, theta_dd(i, grid.ntheta));
        let (fx, fy) = geom.normal(grid.theta[i]);
        for c in 0..n {
            let exact = nx * dx_ring[[i, c]] + ny * dy_ring[[i, c]];
            let stored = fx * dx_hi[[i, c]] + fy * dy_hi[[i, c]];
            let d = exact - TwoFloat::from(stored);
            nrow_lo[[i, c]] = d.hi() + d.lo();
        }
    }

    OpTails { dx_lo, dy_lo, lap_lo, nrow_lo }
}
