//! Derived fields of the overdetermined problem: v = −Δu with its gradient
//! and Hessian, the Cauchy–Schwarz deficit, the anchor point z (argmax of v),
//! the quadratic Q, the harmonic difference h = v − Q, and the auxiliary
//! function q — everything the integral identities and the stability chain
//! consume.
//!
//! Conventions baked in here:
//!   Q(x) = (R² − |x − z|²)/(2n) with R² = 2n·v(z), so h(z) = 0;
//!   ∇h = ∇v + (x − z)/n and D²h = D²v + I/n are assembled algebraically
//!   from the v-derivatives (no extra differentiation);
//!   the boundary trace of Δu is −v|_∂Ω (the co-solved field), with the
//!   spectral recomputation Δu|_∂Ω kept as a consistency diagnostic.

use crate::disc::Discretization;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::interp::{eval_at, eval_mapped};
use crate::dense::{compensated_matvec, compensated_matvec_entry_dd, Dd};
use crate::quad::gauss_legendre;
use crate::rng::SplitMix64;
use crate::solve::{PlateSolution, SolveDiagnostics, TorsionDiagnostics, TorsionSolution};

/// Spatial dimension of the collocation laboratory. The exponent tables and
/// the radial reference handle general n; the solver grid is planar.
pub const PLANE_DIM: f64 = 2.0;

/// Which boundary constant c the reports use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CChoice {
    /// Surface average of Δu over ∂Ω (minimizes the L² deviation).
    SurfaceMean,
    /// The radial reference value c₀ = 1/(n(n+2)).
    Radial,
}

pub struct SolutionBundle {
    pub u: Field,
    pub v: Field,
    pub psi: Field,
    pub vx: Field,
    pub vy: Field,
    pub vxx: Field,
    pub vxy: Field,
    pub vyy: Field,
    /// δ(v) = |D²v|² − (Δv)²/n, with Δv = trace(D²v).
    pub deficit: Field,
    pub h: Field,
    pub hx: Field,
    pub hy: Field,
    /// q = v²/4 − ((n+2)/(2n))·u.
    pub q: Field,
    /// Anchor: argmax of v, Newton-refined on the spectral interpolant.
    pub z: (f64, f64),
    pub v_at_z: f64,
    /// R² = 2n·v(z).
    pub r_squared: f64,
    /// Active boundary constant per the configured choice.
    pub c: f64,
    pub c_mean: f64,
    pub c_radial: f64,
    /// |∇v| = |∇h| at the refined anchor.
    pub grad_h_at_z: f64,
    pub sup_h: f64,
    pub sup_grad_h: f64,
    pub min_deficit: f64,
    /// sup-norm residual of Δq = |∇v|²/2 + v/n.
    pub q_residual_first: f64,
    /// sup-norm residual of Δ²q = |D²v|² − 1/n, with Δ²q routed as
    /// Δ(|∇v|²/2 + v/n): applying Δ to the first identity keeps the check
    /// second-order and avoids the rounding noise of a raw fourth
    /// derivative.
    pub q_residual_second: f64,
    /// sup |trace(D²v) − Δv| over all nodes (two routes to the Laplacian).
    pub hessian_trace_residual: f64,
    /// sup |Δh| = sup |Δv + 1| over all nodes.
    pub harmonic_residual: f64,
    /// sup |δ(v) − |D²h|²| (equals (Δv+1)²/n in exact arithmetic).
    pub deficit_identity_residual: f64,
    /// sup over the boundary ring of |Δu + v|: agreement of the spectral
    /// recomputation with the co-solved trace.
    pub boundary_lap_consistency: f64,
    /// Distance to ∂Ω at every node.
    pub distance: Vec<f64>,
    /// Boundary traces at the ring angles.
    pub trace_lap_u: Vec<f64>,
    pub dv_dnu: Vec<f64>,
    pub dh_dnu: Vec<f64>,
    pub grad_h_trace: Vec<f64>,
    pub xz_nu: Vec<f64>,
    pub plate_diagnostics: SolveDiagnostics,
    pub torsion_diagnostics: TorsionDiagnostics,
}

/// Argmax node of v over the whole grid, ties broken by smaller |x|.
/// Boundary-ring winners are an error: the anchor must be interior.
fn argmax_node(disc: &Discretization, v: &Field) -> Result<usize> {
    let scale = v.max_abs().max(1e-300);
    let mut best = 0usize;
    for k in 1..v.len() {
        let (vb, vk) = (v.vals[best], v.vals[k]);
        let rb = disc.jets[best].x.powi(2) + disc.jets[best].y.powi(2);
        let rk = disc.jets[k].x.powi(2) + disc.jets[k].y.powi(2);
        if vk > vb + 1e-14 * scale || ((vk - vb).abs() <= 1e-14 * scale && rk < rb) {
            best = k;
        }
    }
    if best < disc.grid.ntheta {
        return Err(Error::MaxOnBoundary);
    }
    Ok(best)
}

/// Newton refinement of the anchor on the interpolated gradient/Hessian.
fn refine_anchor(
    disc: &Discretization,
    start: (f64, f64),
    vx: &Field,
    vy: &Field,
    vxx: &Field,
    vxy: &Field,
    vyy: &Field,
) -> Result<((f64, f64), f64)> {
    let mut z = start;
    let mut grad = f64::INFINITY;
    for _ in 0..12 {
        let gx = eval_at(disc, vx, z.0, z.1)?;
        let gy = eval_at(disc, vy, z.0, z.1)?;
        grad = gx.hypot(gy);
        if grad < crate::tol::NEWTON_STATIONARITY {
            break;
        }
        let a = eval_at(disc, vxx, z.0, z.1)?;
        let b = eval_at(disc, vxy, z.0, z.1)?;
        let d = eval_at(disc, vyy, z.0, z.1)?;
        let det = a * d - b * b;
        if det.abs() < 1e-12 {
            break;
        }
        let mut dx = -(d * gx - b * gy) / det;
        let mut dy = -(a * gy - b * gx) / det;
        // Keep the iterate interior; v is concave near its max, so a
        // shortened step still descends the gradient norm.
        let mut tries = 0;
        while !disc.geom.is_interior(z.0 + dx, z.1 + dy) && tries < 6 {
            dx *= 0.5;
            dy *= 0.5;
            tries += 1;
        }
        if tries == 6 {
            break;
        }
        z = (z.0 + dx, z.1 + dy);
        if dx.hypot(dy) < 1e-15 {
            grad = eval_at(disc, vx, z.0, z.1)?.hypot(eval_at(disc, vy, z.0, z.1)?);
            break;
        }
    }
    Ok((z, grad))
}

pub fn derive_fields(
    disc: &Discretization,
    plate: &PlateSolution,
    torsion: &TorsionSolution,
    c_choice: CChoice,
) -> Result<SolutionBundle> {
    let n = PLANE_DIM;
    let grid = &disc.grid;
    let nt = grid.ntheta;
    let u = plate.u.clone();
    let v = plate.v.clone();
    let psi = torsion.psi.clone();

    // Every derived field below feeds identity residuals that are certified
    // near 1e−8; the differentiation rows have absolute sums of order M⁴, so
    // the applications are evaluated with compensated dot products to keep
    // rounding at the few-ulp level instead of M⁴·ε.
    let deriv = |m: &ndarray::Array2<f64>, f: &Field| -> Result<Field> {
        Field::new(compensated_matvec(m, &f.vals), grid)
    };
    let vx = deriv(&disc.ops.dx, &v)?;
    let vy = deriv(&disc.ops.dy, &v)?;
    let vxx = deriv(&disc.ops.dxx, &v)?;
    let vxy = deriv(&disc.ops.dxy, &v)?;
    let vyy = deriv(&disc.ops.dyy, &v)?;
    let lap_v = deriv(&disc.ops.lap, &v)?;
    let lap_u = deriv(&disc.ops.lap, &u)?;

    let mut hessian_trace_residual = 0.0f64;
    let mut harmonic_residual = 0.0f64;
    for k in 0..v.len() {
        hessian_trace_residual =
            hessian_trace_residual.max((vxx.vals[k] + vyy.vals[k] - lap_v.vals[k]).abs());
        harmonic_residual = harmonic_residual.max((lap_v.vals[k] + 1.0).abs());
    }

    let start_node = argmax_node(disc, &v)?;
    let start = (disc.jets[start_node].x, disc.jets[start_node].y);
    let (z, grad_h_at_z) = refine_anchor(disc, start, &vx, &vy, &vxx, &vxy, &vyy)?;
    let v_at_z = eval_at(disc, &v, z.0, z.1)?;
    let r_squared = 2.0 * n * v_at_z;

    // c from the surface average of Δu = −v over ∂Ω.
    let ring_v: Vec<f64> = v.vals.as_slice().expect("contiguous")[..nt].to_vec();
    let c_mean = -disc.quad.boundary_integral(&ring_v)? / disc.quad.perimeter();
    let c_radial = 1.0 / (n * (n + 2.0));
    let c = match c_choice {
        CChoice::SurfaceMean => c_mean,
        CChoice::Radial => c_radial,
    };

    // h = v − Q and its gradient, assembled pointwise.
    let mut h = v.vals.clone();
    let mut hx = vx.vals.clone();
    let mut hy = vy.vals.clone();
    let mut sup_h = 0.0f64;
    let mut sup_grad_h = 0.0f64;
    for (k, jet) in disc.jets.iter().enumerate() {
        let dxz = jet.x - z.0;
        let dyz = jet.y - z.1;
        h[k] -= (r_squared - dxz * dxz - dyz * dyz) / (2.0 * n);
        hx[k] += dxz / n;
        hy[k] += dyz / n;
        sup_h = sup_h.max(h[k].abs());
        sup_grad_h = sup_grad_h.max(hx[k].hypot(hy[k]));
    }
    let h = Field::new(h, grid)?;
    let hx = Field::new(hx, grid)?;
    let hy = Field::new(hy, grid)?;

    // Deficit and the |D²h|² identity.
    let mut deficit = Vec::with_capacity(v.len());
    let mut min_deficit = f64::INFINITY;
    let mut deficit_identity_residual = 0.0f64;
    for k in 0..v.len() {
        let (a, b, d) = (vxx.vals[k], vxy.vals[k], vyy.vals[k]);
        let tr = a + d;
        let del = a * a + 2.0 * b * b + d * d - tr * tr / n;
        let hess_h = (a + 1.0 / n).powi(2) + 2.0 * b * b + (d + 1.0 / n).powi(2);
        deficit_identity_residual = deficit_identity_residual.max((del - hess_h).abs());
        min_deficit = min_deficit.min(del);
        deficit.push(del);
    }
    let deficit = Field::new(ndarray::Array1::from(deficit), grid)?;

    // Auxiliary q = v²/4 − ((n+2)/(2n))u and its two Laplacian identities.
    // The second identity applies the Laplacian twice, and its tolerance
    // sits below what the Laplacian's ~M⁴ row sums make of a single ulp of
    // intermediate rounding — including the rounding already frozen into the
    // stored operator entries. The whole chain therefore runs in
    // double-double: the solver tails extend u and v past f64, the pointwise
    // algebra uses error-free transforms, and every operator application
    // takes the exact-entry (hi, lo) matrix pair and keeps its result tail.
    let dd_field = |f: &Field, tail: &Field| -> Vec<Dd> {
        (0..f.len()).map(|k| Dd::new(f.vals[k], tail.vals[k])).collect()
    };
    let dd_matvec = |m: &ndarray::Array2<f64>, m_lo: &ndarray::Array2<f64>, f: &[Dd]| -> Vec<Dd> {
        let hi = ndarray::Array1::from_iter(f.iter().map(|d| d.hi));
        let lo = ndarray::Array1::from_iter(f.iter().map(|d| d.lo));
        let (rh, rl) = compensated_matvec_entry_dd(m, m_lo, &hi, &lo);
        (0..f.len()).map(|k| Dd { hi: rh[k], lo: rl[k] }).collect()
    };
    let u_dd = dd_field(&u, &plate.u_tail);
    let v_dd = dd_field(&v, &plate.v_tail);
    let vx_dd = dd_matvec(&disc.ops.dx, &disc.ops.dx_lo, &v_dd);
    let vy_dd = dd_matvec(&disc.ops.dy, &disc.ops.dy_lo, &v_dd);
    let kappa = (n + 2.0) / (2.0 * n);
    let q_dd: Vec<Dd> = (0..v.len())
        .map(|k| v_dd[k].mul(v_dd[k]).scale(0.25).sub(u_dd[k].scale(kappa)))
        .collect();
    let g_dd: Vec<Dd> = (0..v.len())
        .map(|k| {
            vx_dd[k]
                .mul(vx_dd[k])
                .add(vy_dd[k].mul(vy_dd[k]))
                .scale(0.5)
                .add(v_dd[k].scale(1.0 / n))
        })
        .collect();
    let lap_q_dd = dd_matvec(&disc.ops.lap, &disc.ops.lap_lo, &q_dd);
    let bilap_q_dd = dd_matvec(&disc.ops.lap, &disc.ops.lap_lo, &lap_q_dd);
    let q = Field::new(ndarray::Array1::from_iter(q_dd.iter().map(|d| d.value())), grid)?;
    let mut q_residual_first = 0.0f64;
    let mut q_residual_second = 0.0f64;
    for k in 0..v.len() {
        q_residual_first = q_residual_first.max(lap_q_dd[k].sub(g_dd[k]).value().abs());
        let hess2 = vxx.vals[k] * vxx.vals[k]
            + 2.0 * vxy.vals[k] * vxy.vals[k]
            + vyy.vals[k] * vyy.vals[k];
        q_residual_second =
            q_residual_second.max((bilap_q_dd[k].value() - (hess2 - 1.0 / n)).abs());
    }

    // Distance to the boundary at every node (0 on the ring).
    let mut distance = Vec::with_capacity(v.len());
    for (k, jet) in disc.jets.iter().enumerate() {
        if k < nt {
            distance.push(0.0);
        } else {
            distance.push(disc.geom.distance_to_boundary(jet.x, jet.y)?);
        }
    }

    // Boundary traces.
    let mut trace_lap_u = Vec::with_capacity(nt);
    let mut dv_dnu = Vec::with_capacity(nt);
    let mut dh_dnu = Vec::with_capacity(nt);
    let mut grad_h_trace = Vec::with_capacity(nt);
    let mut xz_nu = Vec::with_capacity(nt);
    let mut boundary_lap_consistency = 0.0f64;
    for i in 0..nt {
        let th = grid.theta[i];
        let (nx, ny) = disc.geom.normal(th);
        let (bx, by) = (disc.jets[i].x, disc.jets[i].y);
        trace_lap_u.push(-v.vals[i]);
        dv_dnu.push(nx * vx.vals[i] + ny * vy.vals[i]);
        dh_dnu.push(nx * hx.vals[i] + ny * hy.vals[i]);
        grad_h_trace.push(hx.vals[i].hypot(hy.vals[i]));
        xz_nu.push((bx - z.0) * nx + (by - z.1) * ny);
        boundary_lap_consistency =
            boundary_lap_consistency.max((lap_u.vals[i] + v.vals[i]).abs());
    }

    Ok(SolutionBundle {
        u,
        v,
        psi,
        vx,
        vy,
        vxx,
        vxy,
        vyy,
        deficit,
        h,
        hx,
        hy,
        q,
        z,
        v_at_z,
        r_squared,
        c,
        c_mean,
        c_radial,
        grad_h_at_z,
        sup_h,
        sup_grad_h,
        min_deficit,
        q_residual_first,
        q_residual_second,
        hessian_trace_residual,
        harmonic_residual,
        deficit_identity_residual,
        boundary_lap_consistency,
        distance,
        trace_lap_u,
        dv_dnu,
        dh_dnu,
        grad_h_trace,
        xz_nu,
        plate_diagnostics: plate.diagnostics.clone(),
        torsion_diagnostics: torsion.diagnostics.clone(),
    })
}

/// Harmonicity witness: for `trials` random disks fully inside Ω, compare the
/// area average of h over the disk with h at its center; returns the worst
/// deviation. Harmonic functions satisfy the solid mean-value property
/// exactly, so the deviation measures discretization error only.
pub fn mean_value_witness(
    disc: &Discretization,
    bundle: &SolutionBundle,
    seed: u64,
    trials: usize,
) -> Result<f64> {
    let mut rng = SplitMix64::new(seed);
    let (gx, gw) = gauss_legendre(8);
    let angles = 16usize;
    let mut worst = 0.0f64;
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < trials {
        attempts += 1;
        if attempts > 200 * trials {
            return Err(Error::BadInput(
                "could not place the requested number of interior disks".into(),
            ));
        }
        let cx = rng.uniform(-0.7, 0.7);
        let cy = rng.uniform(-0.7, 0.7);
        if !disc.geom.is_interior(cx, cy) {
            continue;
        }
        let dist = disc.geom.distance_to_boundary(cx, cy)?;
        if dist < 0.08 {
            continue;
        }
        let rho = rng.uniform(0.03, (dist - 0.03).min(0.3));
        // Solid average over the disk: GL in radius × uniform angles.
        let mut acc = 0.0;
        for (&xi, &wi) in gx.iter().zip(gw.iter()) {
            let r = 0.5 * rho * (xi + 1.0);
            let mut ring = 0.0;
            for a in 0..angles {
                let th = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
                ring += eval_at(disc, &bundle.h, cx + r * th.cos(), cy + r * th.sin())?;
            }
            // dA = r dr dθ; the common 2π/angles and the GL half-width scale
            // out in the normalization below.
            acc += wi * r * ring / angles as f64;
        }
        let avg = acc * rho / (rho * rho); // (Σ w r f̄)·(ρ/2)·2 / ρ²
        let center = eval_at(disc, &bundle.h, cx, cy)?;
        worst = worst.max((avg - center).abs());
        done += 1;
    }
    Ok(worst)
}

/// Gap reconstruction: at the extremal boundary angles found by geometry,
/// |x − z|² must equal R² + 2n·Δu + 2n·h with the traces interpolated there
/// (pure algebra once the bundle's fields are wired consistently). Returns
/// (ρ₁, ρ₂, |geometry − reconstruction| for ρ₂² − ρ₁²).
pub fn reconstruct_gap(disc: &Discretization, bundle: &SolutionBundle) -> Result<(f64, f64, f64)> {
    let n = PLANE_DIM;
    let (rho1, rho2) = disc.geom.radii_about(bundle.z.0, bundle.z.1)?;
    let near = disc.geom.boundary_extremum(bundle.z, true);
    let far = disc.geom.boundary_extremum(bundle.z, false);
    let mut recon = [0.0f64; 2];
    for (slot, ext) in [(0, &near), (1, &far)] {
        let h_b = eval_mapped(disc, &bundle.h, 1.0, ext.theta);
        let v_b = eval_mapped(disc, &bundle.v, 1.0, ext.theta);
        recon[slot] = bundle.r_squared + 2.0 * n * (-v_b) + 2.0 * n * h_b;
    }
    let gap2_geom = rho2 * rho2 - rho1 * rho1;
    let gap2_recon = recon[1] - recon[0];
    Ok((rho1, rho2, (gap2_geom - gap2_recon).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::BoundaryShape;
    use crate::solve::{solve_plate_unit, solve_torsion_unit};

    fn make(name: &str, eps: f64, nr: usize, nt: usize) -> (Discretization, SolutionBundle) {
        let disc = Discretization::new(BoundaryShape::preset(name, eps).unwrap(), nr, nt).unwrap();
        let plate = solve_plate_unit(&disc).unwrap();
        let torsion = solve_torsion_unit(&disc).unwrap();
        let bundle = derive_fields(&disc, &plate, &torsion, CChoice::SurfaceMean).unwrap();
        (disc, bundle)
    }

    #[test]
    fn disk_bundle_is_radial() {
        let (_, b) = make("disk", 0.0, 16, 32);
        assert!(b.z.0.hypot(b.z.1) < 1e-9, "z = {:?}", b.z);
        assert!((b.r_squared - 0.5).abs() < 1e-10, "R² = {}", b.r_squared);
        assert!((b.c_mean - 0.125).abs() < 1e-10, "c = {}", b.c_mean);
        assert_eq!(b.c_radial, 0.125);
        assert!(b.sup_h < 1e-10, "sup h = {:e}", b.sup_h);
        assert!(b.grad_h_at_z < 1e-10);
        // D²v = −I/2 at every node.
        for k in 0..b.v.len() {
            assert!((b.vxx.vals[k] + 0.5).abs() < 1e-9);
            assert!((b.vyy.vals[k] + 0.5).abs() < 1e-9);
            assert!(b.vxy.vals[k].abs() < 1e-9);
        }
        assert!(b.deficit.max_abs() < 1e-10, "δ ≡ 0 on the disk");
        assert!(b.q_residual_first < 1e-10);
        assert!(b.q_residual_second < 1e-9);
    }

    #[test]
    fn perturbed_bundle_invariants() {
        let (disc, b) = make("cos2", 0.05, 32, 64);
        assert!(b.z.0.hypot(b.z.1) < 0.02, "anchor close to center, z = {:?}", b.z);
        // First-order shape perturbation for ρ = cos kθ: the biharmonic
        // correction (r^k − r^{k+2})cos kθ/16 gives h|_∂Ω = ε(k+1)/4·cos kθ,
        // so sup|h| = 3ε/4 + O(ε²) for k = 2.
        let predicted = 0.75 * 0.05;
        assert!(
            (b.sup_h - predicted).abs() < 0.1 * predicted,
            "sup h = {} vs first-order {}",
            b.sup_h,
            predicted
        );
        println!(
            "hess {:.2e}  harm {:.2e}  q1 {:.2e}  q2 {:.2e}  defid {:.2e}  blap {:.2e}",
            b.hessian_trace_residual,
            b.harmonic_residual,
            b.q_residual_first,
            b.q_residual_second,
            b.deficit_identity_residual,
            b.boundary_lap_consistency
        );
        assert!(b.min_deficit > -crate::tol::NONNEGATIVE_SLACK, "{:e}", b.min_deficit);
        assert!(
            b.hessian_trace_residual < crate::tol::HESSIAN_TRACE,
            "hessian trace {:e}",
            b.hessian_trace_residual
        );
        assert!(
            b.harmonic_residual < crate::tol::HARMONIC_RESIDUAL,
            "Δh sup {:e}",
            b.harmonic_residual
        );
        assert!(b.grad_h_at_z < crate::tol::GRAD_H_AT_Z, "{:e}", b.grad_h_at_z);
        assert!(b.q_residual_first < crate::tol::AUX_IDENTITY, "{:e}", b.q_residual_first);
        assert!(b.q_residual_second < crate::tol::AUX_IDENTITY, "{:e}", b.q_residual_second);
        assert!(b.deficit_identity_residual < 1e-9, "{:e}", b.deficit_identity_residual);
        assert!(b.boundary_lap_consistency < 1e-7, "{:e}", b.boundary_lap_consistency);
        // First-order oracle for the weighted deficit: δ ≈ ε²|D²h₁|² with
        // h₁ = (3/4)r²cos 2θ harmonic, so |D²h₁|² = 9/2 identically and
        // ∫u·δ ≈ ε²·(9/2)·∫u₀ = ε²·9π/384 with an O(ε) relative remainder.
        let prod = Field::new(&b.u.vals * &b.deficit.vals, &disc.grid).unwrap();
        let lhs = disc.quad.volume_integral(&prod).unwrap();
        let predicted_int = 0.05f64.powi(2) * 9.0 * std::f64::consts::PI / 384.0;
        assert!(lhs > 0.0, "∫u·δ = {lhs:e} must be strictly positive off the disk");
        assert!(
            (lhs - predicted_int).abs() < 0.1 * predicted_int,
            "∫u·δ = {lhs:e} vs first-order {predicted_int:e}"
        );
    }

    #[test]
    fn anchor_is_stationary_even_for_odd_shapes() {
        // cos θ ≈ translation: the anchor moves ~ε but ∇h(z) must still
        // vanish after refinement.
        let (_, b) = make("cos1", 0.05, 24, 48);
        assert!(b.grad_h_at_z < crate::tol::GRAD_H_AT_Z);
        assert!(b.z.0.hypot(b.z.1) < 0.5, "|z| < 1/2, z = {:?}", b.z);
        assert!(b.z.0 > 0.01, "cos θ bulge pulls the anchor right");
    }

    /// Independent oracle for the derived traces: first-order shape
    /// perturbation of the disk. For ρ = cos kθ the clamped-plate correction
    /// is u₁ = ε(r^k − r^{k+2})cos kθ/16, hence
    ///   Δu|_∂Ω = 1/8 + ε(1−k)/4·cos kθ + O(ε²),
    ///   h|_∂Ω   = ε(k+1)/4·cos kθ + O(ε²).
    /// At ε = 0.01 the quadratic remainder sits near 1e−4·coeff, so the
    /// traces must match the formulas to a few times ε².
    #[test]
    fn first_order_perturbation_oracle_for_traces() {
        for (name, k) in [("cos2", 2.0f64), ("cos3", 3.0f64)] {
            let eps = 0.01;
            let (disc, b) = make(name, eps, 24, 64);
            let mut worst_trace = 0.0f64;
            let mut worst_h = 0.0f64;
            for (i, &th) in disc.grid.theta.iter().enumerate() {
                let predicted_lap = 0.125 + eps * (1.0 - k) / 4.0 * (k * th).cos();
                let predicted_h = eps * (k + 1.0) / 4.0 * (k * th).cos();
                worst_trace = worst_trace.max((b.trace_lap_u[i] - predicted_lap).abs());
                worst_h = worst_h.max((b.h.vals[i] - predicted_h).abs());
            }
            assert!(worst_trace < 25.0 * eps * eps, "{name}: Δu trace off by {worst_trace:e}");
            assert!(worst_h < 25.0 * eps * eps, "{name}: h trace off by {worst_h:e}");
            println!("{name}: trace err {worst_trace:.3e}, h err {worst_h:.3e}");
        }
    }

    #[test]
    fn mean_value_property_of_h() {
        let (disc, b) = make("cos3", 0.04, 24, 48);
        let worst = mean_value_witness(&disc, &b, 0x5eed, 20).unwrap();
        assert!(worst < 1e-7, "mean-value deviation {worst:e}");
    }

    #[test]
    fn gap_reconstruction_matches_geometry() {
        let (disc, b) = make("cos2", 0.05, 32, 64);
        let (rho1, rho2, err) = reconstruct_gap(&disc, &b).unwrap();
        assert!(rho2 > rho1);
        assert!(err < 1e-9, "reconstruction error {err:e}");
        // cos 2θ at ε = 0.05: radii near 0.95 / 1.05 about a near-center z.
        assert!((rho2 - 1.05).abs() < 0.01);
        assert!((rho1 - 0.95).abs() < 0.01);
    }

    #[test]
    fn boundary_argmax_is_rejected() {
        let disc = Discretization::new(BoundaryShape::disk(), 8, 16).unwrap();
        let plate = solve_plate_unit(&disc).unwrap();
        let torsion = solve_torsion_unit(&disc).unwrap();
        // Synthetic v with its max on the boundary ring.
        let mut fake = plate;
        fake.v = Field::new(
            ndarray::Array1::from_iter(disc.jets.iter().map(|j| j.x)),
            &disc.grid,
        )
        .unwrap();
        let err = derive_fields(&disc, &fake, &torsion, CChoice::SurfaceMean);
        assert!(matches!(err, Err(Error::MaxOnBoundary)));
    }

    #[test]
    fn c_choice_switches_reported_constant() {
        let disc = Discretization::new(BoundaryShape::preset("cos2", 0.03).unwrap(), 16, 32)
            .unwrap();
        let plate = solve_plate_unit(&disc).unwrap();
        let torsion = solve_torsion_unit(&disc).unwrap();
        let b1 = derive_fields(&disc, &plate, &torsion, CChoice::SurfaceMean).unwrap();
        let b2 = derive_fields(&disc, &plate, &torsion, CChoice::Radial).unwrap();
        assert_eq!(b1.c, b1.c_mean);
        assert_eq!(b2.c, 0.125);
        assert!((b1.c_mean - 0.125).abs() < 0.01, "mean c near c₀ for small ε");
        assert!(b1.c_mean != b2.c);
    }
}
