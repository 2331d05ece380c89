//! Closed-form reference solution on the unit ball in R^n and the exponent
//! tables of the stability theory.
//!
//! On the unit ball the clamped-plate and torsion problems are explicitly
//! solvable; every derived quantity (boundary Laplacian, anchor radius,
//! volume integral, both sides of the Pucci–Serrin identity) has a rational
//! closed form. These serve as exactness oracles for the collocation solver
//! and as the base point of the perturbation sweeps.

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Largest dimension the closed forms are exposed for. The formulas hold for
/// all n ≥ 2; the cap just keeps Γ(n/2) in the exactly-representable range.
pub const MAX_DIMENSION: u32 = 16;

/// Γ(n/2) for integer n ≥ 1: (k−1)! for n = 2k, (2k)!√π/(4^k k!) for n = 2k+1.
fn gamma_half(n: u32) -> f64 {
    if n % 2 == 0 {
        let k = n / 2;
        (1..k).map(|i| i as f64).product()
    } else {
        let k = (n - 1) / 2;
        let mut g = std::f64::consts::PI.sqrt();
        // Γ(x+1) = x·Γ(x) climbed from Γ(1/2).
        for i in 0..k {
            g *= i as f64 + 0.5;
        }
        g
    }
}

/// |S^{n−1}| = 2π^{n/2} / Γ(n/2).
pub fn sphere_area(n: u32) -> Result<f64> {
    if !(2..=MAX_DIMENSION).contains(&n) {
        return Err(Error::BadDimension { n: n.into() });
    }
    Ok(2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n))
}

/// The radial solution family on the unit ball.
#[derive(Debug, Clone, Copy)]
pub struct RadialReference {
    pub n: u32,
}

impl RadialReference {
    pub fn new(n: u32) -> Result<Self> {
        if !(2..=MAX_DIMENSION).contains(&n) {
            return Err(Error::BadDimension { n: n.into() });
        }
        Ok(RadialReference { n })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// u(r) = (1 − r²)² / (8n(n+2)), the clamped-plate solution of Δ²u = 1.
    pub fn u(&self, r: f64) -> f64 {
        let n = self.nf();
        let s = 1.0 - r * r;
        s * s / (8.0 * n * (n + 2.0))
    }

    /// Radial derivative u′(r) = −r(1 − r²) / (2n(n+2)).
    pub fn u_prime(&self, r: f64) -> f64 {
        let n = self.nf();
        -r * (1.0 - r * r) / (2.0 * n * (n + 2.0))
    }

    /// v(r) = −Δu = (n − (n+2) r²) / (2n(n+2)).
    pub fn v(&self, r: f64) -> f64 {
        let n = self.nf();
        (n - (n + 2.0) * r * r) / (2.0 * n * (n + 2.0))
    }

    /// v′(r) = −r/n.
    pub fn v_prime(&self, r: f64) -> f64 {
        -r / self.nf()
    }

    /// Torsion function ψ(r) = (1 − r²) / (2n), solving −Δψ = 1, ψ|_{r=1} = 0.
    pub fn psi(&self, r: f64) -> f64 {
        (1.0 - r * r) / (2.0 * self.nf())
    }

    /// Boundary Laplacian c = Δu|_{r=1} = −v(1) = 1/(n(n+2)).
    pub fn c(&self) -> f64 {
        let n = self.nf();
        1.0 / (n * (n + 2.0))
    }

    /// Anchor radius R² = 2n·v(0) = n/(n+2).
    pub fn r_squared(&self) -> f64 {
        self.nf() / (self.nf() + 2.0)
    }

    pub fn u_center(&self) -> f64 {
        self.u(0.0)
    }

    pub fn v_center(&self) -> f64 {
        // 1/(2(n+2))
        self.v(0.0)
    }

    pub fn psi_center(&self) -> f64 {
        self.psi(0.0)
    }

    /// ∫_B u dx = |S^{n−1}| / (n²(n+2)²(n+4)), exact.
    pub fn integral_u(&self) -> f64 {
        let n = self.nf();
        sphere_area(self.n).expect("dimension validated at construction")
            / (n * n * (n + 2.0) * (n + 2.0) * (n + 4.0))
    }

    /// The same integral by Gauss–Legendre quadrature of u(r)·r^{n−1}
    /// (degree ≤ n+3 ≤ 19, exact at 12 points) — an independent route used to
    /// cross-check the closed form.
    pub fn integral_u_quadrature(&self) -> f64 {
        let (x, w) = gauss_legendre(12);
        let mut s = 0.0;
        for (&xi, &wi) in x.iter().zip(w.iter()) {
            let r = 0.5 * (xi + 1.0);
            s += 0.5 * wi * self.u(r) * r.powi(self.n as i32 - 1);
        }
        sphere_area(self.n).expect("dimension validated at construction") * s
    }

    /// Both sides of the Pucci–Serrin identity (n+4)∫u = ∮(Δu)²(x·ν):
    /// equal to |S^{n−1}|/(n²(n+2)²) on the unit ball.
    pub fn pucci_serrin_sides(&self) -> (f64, f64) {
        let n = self.nf();
        let lhs = (n + 4.0) * self.integral_u();
        let du = -self.v(1.0); // Δu at the boundary
        let rhs = sphere_area(self.n).expect("dimension validated at construction") * du * du;
        (lhs, rhs)
    }
}

/// Interior stability exponent σ_p for ‖∇h‖_{L^p(∂Ω)} ≲ deficit^{σ_p}:
/// (n+2)p / (n(n+2p−1)) on 1 ≤ p < 3/2, then the constant 3/(2n).
pub fn sigma_exponent(n: u32, p: f64) -> Result<f64> {
    if !(2..=MAX_DIMENSION).contains(&n) {
        return Err(Error::BadDimension { n: n.into() });
    }
    if !p.is_finite() {
        return Ok(3.0 / (2.0 * n as f64));
    }
    if p < 1.0 {
        return Err(Error::InvalidP { p });
    }
    let nf = n as f64;
    if p < 1.5 {
        Ok((nf + 2.0) * p / (nf * (nf + 2.0 * p - 1.0)))
    } else {
        Ok(3.0 / (2.0 * nf))
    }
}

/// Boundary-gradient exponent β_p: 1/3 on 1 ≤ p ≤ 3, then (n+p−1)/((n+2)p),
/// with limit 1/(n+2) at p = ∞.
pub fn beta_exponent(n: u32, p: f64) -> Result<f64> {
    if !(2..=MAX_DIMENSION).contains(&n) {
        return Err(Error::BadDimension { n: n.into() });
    }
    if !p.is_finite() {
        return Ok(1.0 / (n as f64 + 2.0));
    }
    if p < 1.0 {
        return Err(Error::InvalidP { p });
    }
    let nf = n as f64;
    if p <= 3.0 {
        Ok(1.0 / 3.0)
    } else {
        Ok((nf + p - 1.0) / ((nf + 2.0) * p))
    }
}

/// One row of the exponent table.
#[derive(Debug, Clone, Copy)]
pub struct ExponentRow {
    pub p: f64,
    pub sigma: f64,
    pub beta: f64,
}

/// The exponent table at the standard probe points (both junctions included;
/// ∞ is encoded as f64::INFINITY).
pub fn exponent_table(n: u32) -> Result<Vec<ExponentRow>> {
    let ps = [1.0, 1.5, 2.0, 3.0, 6.0, f64::INFINITY];
    ps.iter()
        .map(|&p| {
            Ok(ExponentRow { p, sigma: sigma_exponent(n, p)?, beta: beta_exponent(n, p)? })
        })
        .collect()
}
