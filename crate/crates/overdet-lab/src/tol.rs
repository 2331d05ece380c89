//! Central numeric tolerances.
//!
//! Every nontrivial constant used by the verification suite lives here with a
//! note on where it comes from, so tests never bake in magic numbers.

/// Boundary nodes of the tensor grid must land on the analytic boundary trace
/// to this absolute error (pure round-off of the map evaluation).
pub const NODE_ON_BOUNDARY: f64 = 1e-14;

/// |ν| = 1 and ν·tangent = 0 at boundary nodes (round-off of the analytic
/// normal formula).
pub const NORMAL_ORTHONORMAL: f64 = 1e-13;

/// First-order stationarity residual for distance / radius Newton refinement.
pub const NEWTON_STATIONARITY: f64 = 1e-12;

/// Divergence-theorem consistency of quadrature + differentiation (relative).
pub const DIVERGENCE_THEOREM_REL: f64 = 1e-9;

/// Mixed second-derivative commutation ∂x∂y − ∂y∂x on resolved fields.
/// Zero in exact arithmetic; the bound is round-off amplified by the
/// second-derivative condition number, ~M⁴·ε ≈ 1e−9 at M = 47.
pub const DERIVATIVE_COMMUTE: f64 = 2e-9;

/// Interior residual of the mixed-system solve (Δu + v, Δv + f), sup-norm,
/// recomputed from the returned fields.
pub const SOLVE_INTERIOR: f64 = 1e-8;

/// Boundary-condition residual of a solve, sup-norm.
pub const SOLVE_BOUNDARY: f64 = 1e-10;

/// Fourth-order residual Δ(Δu) − f recomputed by composing the discrete
/// Laplacian twice. Carries the full rounding noise of fourth-order spectral
/// differentiation (measured ~1e−4 at the default resolution for unit-scale
/// fields), so it is certified loosely; the mixed residuals above are the
/// sharp certificate.
pub const SOLVE_BIHARMONIC: f64 = 5e-3;

/// Agreement of the disk solve with the closed-form radial solution.
pub const RADIAL_EXACTNESS: f64 = 1e-10;

/// trace(D²v) − Δv at every node. The two routes differ only in the
/// association order of the same matrix rows, so the residual is dgemv
/// rounding scaled by the second-derivative row sums, ~2e−10 at M = 63.
pub const HESSIAN_TRACE: f64 = 1e-9;

/// Sup-norm of Δh for the assembled harmonic difference h.
pub const HARMONIC_RESIDUAL: f64 = 1e-8;

/// |∇h(z)| after Newton refinement of the anchor z.
pub const GRAD_H_AT_Z: f64 = 1e-8;

/// Sup-norm residuals of the auxiliary-function identities
/// Δq = |∇v|²/2 + v/n and Δ²q = |D²v|² − 1/n.
pub const AUX_IDENTITY: f64 = 1e-8;

/// Zero-flux boundary integral ∮ {∂v/∂ν + (x−z)·ν/n} dS.
pub const ZERO_FLUX: f64 = 1e-9;

/// Relative residual of the Pucci–Serrin identity on perturbed shapes.
pub const PUCCI_SERRIN_REL: f64 = 1e-7;

/// Relative residual of the deficit identity (volume deficit integral vs
/// boundary flux) and of its harmonic rewriting on perturbed shapes.
pub const DEFICIT_IDENTITY_REL: f64 = 1e-6;

/// Agreement of the two equivalent left-hand sides ∫u·δ(v) and ∫u|D²h|².
pub const LHS_EQUIVALENCE: f64 = 1e-10;

/// Invariance of identity values under the free choices (z, c, R²).
pub const ANCHOR_INVARIANCE: f64 = 1e-9;

/// Pointwise lower bound slack: quantities that are nonnegative in exact
/// arithmetic (u, ψ, deficit, identity lhs) may dip this far below zero.
pub const NONNEGATIVE_SLACK: f64 = 1e-10;

/// Slack for the positivity certificate min(u − c_Ω ψ²).
pub const CERTIFICATE_SLACK: f64 = 1e-9;

/// Oscillation bound must hold up to this additive slack (exact algebra).
pub const OSCILLATION_SLACK: f64 = 1e-9;

/// Manufactured-solution error floor: once sup errors reach this level,
/// further refinement only shuffles round-off.
pub const MMS_FLOOR: f64 = 1e-11;

/// Required error-reduction factor per resolution doubling above the floor.
pub const MMS_RATE: f64 = 100.0;

/// Weighted Hessian integral below this is treated as exactly radial and the
/// trace ratio reports a sentinel instead of 0/0.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

/// Interior-node distance cutoff for the η = min u/d² scan (avoids boundary
/// 0/0; the near-boundary regime is covered by the certificate).
pub const ETA_DISTANCE_CUTOFF: f64 = 0.01;

/// Noise-floor multiplier: sweep points whose boundary-deviation norm is
/// below `multiplier × (deficit-identity rel_residual)` are excluded from
/// log–log exponent fits.
pub const NOISE_FLOOR_MULTIPLIER: f64 = 1e3;

/// Default subtractive margin applied to open-interval exponents (σ_p, β_p).
pub const EXPONENT_MARGIN: f64 = 0.02;

/// Default 2* used in the chain of inequalities for n = 2 (where any large
/// finite value is admissible).
pub const TWO_STAR_DEFAULT: f64 = 10.0;

/// Hard caps on the admissible shape family: ε·max|ρ| and the C⁴ surrogate
/// ε·max(k⁴·|coef|).
pub const AMPLITUDE_CAP: f64 = 0.05;
pub const CLOSENESS_CAP: f64 = 0.8;

/// Scale floor coefficient for relative identity residuals:
/// floor = 1e−12 · (n+4) · |Ω| · ‖u‖_∞.
pub const SCALE_FLOOR_COEFF: f64 = 1e-12;
