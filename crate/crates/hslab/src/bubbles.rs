//! Extremal profiles of the Euclidean Hardy-Sobolev inequality and the
//! constants attached to them.
//!
//! For dimension `n >= 3` and singularity exponent `s in [0, 2)` the critical
//! exponent is `2*(s) = 2(n-s)/(n-2)`. The radial profile
//!
//! ```text
//! u_c(X) = ( c^{2-s} / (c^{2-s} + |X - X0|^{2-s}) )^{(n-2)/(2-s)}
//! ```
//!
//! has unit value at its center and satisfies, with the positive Laplacian
//! `Delta = -div grad`,
//!
//! ```text
//! Delta u_c = (n-2)(n-s) c^{s-2} u_c^{2*(s)-1} / |X - X0|^s .
//! ```
//!
//! The sharp constant `mu_s` of the inequality is the Rayleigh quotient of any
//! member of the family (scale invariant); the member whose equation carries
//! exactly `mu_s` has scale `K` with `K^{2-s} mu_s = (n-2)(n-s)`, and that
//! member also has unit weighted `2*(s)` norm. Everything here is computed by
//! quadrature, never hard-coded, so the algebraic closures between `mu_s`,
//! `K`, `d_n` and the sphere volume act as end-to-end checks of the numerics.

use crate::quad::{self, QuadOutcome};
use crate::{HsError, Result};
use serde::{Deserialize, Serialize};

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 36.0 {
        x
    } else if x < -36.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Dimension and singularity exponent, with the derived critical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: u32,
    pub s: f64,
    pub two_star_s: f64,
}

impl ProblemParams {
    /// `n >= 3`, `0 <= s < 2`. `s = 0` is the classical limit.
    pub fn new(n: u32, s: f64) -> Result<Self> {
        if n < 3 {
            return Err(HsError::InvalidParams(format!("dimension n = {n} must be >= 3")));
        }
        if !(0.0..2.0).contains(&s) {
            return Err(HsError::InvalidParams(format!("exponent s = {s} must lie in [0, 2)")));
        }
        let two_star_s = 2.0 * (n as f64 - s) / (n as f64 - 2.0);
        Ok(ProblemParams { n, s, two_star_s })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Decay exponent of the profile denominator, `2 - s`.
    pub fn beta(&self) -> f64 {
        2.0 - self.s
    }

    /// Outer power of the profile, `(n-2)/(2-s)`.
    pub fn gamma(&self) -> f64 {
        (self.nf() - 2.0) / (2.0 - self.s)
    }
}

/// The critical Hardy-Sobolev exponent `2(n-s)/(n-2)`.
pub fn critical_exponent(params: &ProblemParams) -> f64 {
    params.two_star_s
}

/// The curvature coefficient `(n-2)(6-s) / (12 (2n-2-s))` multiplying the
/// scalar curvature in the existence threshold.
pub fn cns(params: &ProblemParams) -> f64 {
    let n = params.nf();
    (n - 2.0) * (6.0 - params.s) / (12.0 * (2.0 * n - 2.0 - params.s))
}

/// Adaptive radial quadrature configuration.
///
/// All radial integrals are evaluated after the substitution `rho = ln r`,
/// which turns both the `r^{-s}` singularity and the algebraic tail into
/// exponentially decaying integrands; full-line integrals then use the
/// trapezoidal rule with step halving ([`TransformKind::LogLine`]) and
/// truncated ranges use the tanh-sinh rule on the log interval
/// ([`TransformKind::TanhSinhLog`]).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RadialQuadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    LogLine,
    TanhSinhLog,
}

impl Default for RadialQuadrature {
    fn default() -> Self {
        RadialQuadrature { rel_tol: 1e-13, abs_tol: 1e-280, max_nodes: 1 << 20 }
    }
}

impl RadialQuadrature {
    /// `int_0^inf f(r) dr` where `g(rho) = r f(r)`, `r = e^rho`, is supplied
    /// by the caller (who can evaluate it stably in log space).
    pub fn integrate_line<F: Fn(f64) -> f64>(&self, g: F) -> QuadOutcome {
        quad::trapezoid_real_line(g, self.rel_tol)
    }

    /// `int_0^{exp(ln_upper)} f(r) dr` with `g` as in [`Self::integrate_line`].
    /// The lower truncation point is probed automatically from the decay of
    /// `g`, then the tanh-sinh rule is applied on the log interval.
    pub fn integrate_to<F: Fn(f64) -> f64>(&self, g: F, ln_upper: f64) -> QuadOutcome {
        // coarse scan downwards to find where the integrand has died off
        let step = 0.35;
        let mut max_abs: f64 = 0.0;
        let mut rho_min = ln_upper - 3.0;
        let mut quiet = 0usize;
        for k in 0..400 {
            let rho = ln_upper - k as f64 * step;
            let v = g(rho).abs();
            max_abs = max_abs.max(v);
            rho_min = rho;
            if max_abs > 0.0 && v < 1e-22 * max_abs {
                quiet += 1;
                if quiet >= 4 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if max_abs == 0.0 {
            return QuadOutcome { value: 0.0, err_est: 0.0, evals: 400 };
        }
        quad::tanh_sinh(g, rho_min, ln_upper, self.rel_tol)
    }
}

/// A member of the extremal family: scale `c0`, center, and the derived
/// constants of the parameter pair (all recomputed per `(n, s)`).
#[derive(Debug, Clone)]
pub struct Bubble {
    pub params: ProblemParams,
    /// Profile scale: denominator is `c0^{2-s} + |X - X0|^{2-s}`.
    pub c0: f64,
    /// Center `X0`.
    pub center: Vec<f64>,
    /// Value at the center.
    pub amplitude: f64,
    /// Scale of the unit-amplitude member with unit weighted norm:
    /// `K^{2-s} = (n-2)(n-s) / mu_s`.
    pub k: f64,
    /// Sharp constant of the Euclidean inequality, from quadrature.
    pub mu_s: f64,
    /// `mu_s * int u^{2*(s)-1} |X|^{-s} dX` for the normalized member.
    pub d_n: f64,
    /// Volume of the unit sphere `S^{n-1}`.
    pub omega_nm1: f64,
}

/// Derived constants of a parameter pair.
#[derive(Debug, Clone, Copy)]
pub struct FamilyConstants {
    pub mu_s: f64,
    pub k: f64,
    pub d_n: f64,
    pub omega_nm1: f64,
}

/// Computes `mu_s` as the Rayleigh quotient of the unit-scale member, then
/// the derived scale `K` and the constant `d_n`.
pub fn family_constants(params: &ProblemParams, rq: &RadialQuadrature) -> Result<FamilyConstants> {
    let mu_s = best_constant_quadrature(params, rq)?;
    let beta = params.beta();
    let n = params.nf();
    let k = ((n - 2.0) * (n - params.s) / mu_s).powf(1.0 / beta);
    let omega_nm1 = quad::unit_sphere_volume(params.n as usize);
    // d_n = mu_s * int u^{2*-1} |X|^{-s} dX over the K-scaled member
    let gamma = params.gamma();
    let p = params.two_star_s - 1.0;
    let ln_k = k.ln();
    let g = |rho: f64| {
        // r^{n-s} * profile^p, profile = (1 + (r/K)^beta)^{-gamma}
        let w = beta * (rho - ln_k);
        ((n - params.s) * rho - p * gamma * softplus(w)).exp()
    };
    let integral = rq.integrate_line(g).require(1e-11)?;
    let d_n = mu_s * omega_nm1 * integral;
    Ok(FamilyConstants { mu_s, k, d_n, omega_nm1 })
}

impl Bubble {
    /// The normalized member: scale `K`, unit amplitude, centered at 0. It
    /// solves the Euclidean equation with constant exactly `mu_s` and has unit
    /// weighted `2*(s)` norm.
    pub fn normalized(params: ProblemParams) -> Result<Bubble> {
        let rq = RadialQuadrature::default();
        let c = family_constants(&params, &rq)?;
        Ok(Bubble {
            params,
            c0: c.k,
            center: vec![0.0; params.n as usize],
            amplitude: 1.0,
            k: c.k,
            mu_s: c.mu_s,
            d_n: c.d_n,
            omega_nm1: c.omega_nm1,
        })
    }

    /// General-center, general-scale member, normalized so that the weighted
    /// `2*(s)` norm around its own center is 1. Its amplitude is
    /// `(K/c0)^{(n-2)/2}`.
    pub fn rescaled(params: ProblemParams, c0: f64, center: Vec<f64>) -> Result<Bubble> {
        if !(c0 > 0.0) {
            return Err(HsError::InvalidParams(format!("bubble scale c0 = {c0} must be > 0")));
        }
        if center.len() != params.n as usize {
            return Err(HsError::InvalidParams(format!(
                "center has dimension {}, expected {}",
                center.len(),
                params.n
            )));
        }
        let mut b = Bubble::normalized(params)?;
        b.amplitude = (b.k / c0).powf((params.nf() - 2.0) / 2.0);
        b.c0 = c0;
        b.center = center;
        Ok(b)
    }

    /// The member concentrated at scale `mu`: `c0 = mu K`, amplitude
    /// `mu^{-(n-2)/2}`, centered at 0. Equals `mu^{-(n-2)/2} u~(X/mu)` where
    /// `u~` is the normalized member.
    pub fn blowup(params: ProblemParams, mu: f64) -> Result<Bubble> {
        let b = Bubble::normalized(params)?;
        let c0 = mu * b.k;
        Bubble::rescaled(params, c0, vec![0.0; params.n as usize])
    }

    /// Profile value at distance `r` from the center.
    pub fn radial_value(&self, r: f64) -> f64 {
        let w = self.params.beta() * (r.ln() - self.c0.ln());
        if r == 0.0 {
            return self.amplitude;
        }
        self.amplitude * (-self.params.gamma() * softplus(w)).exp()
    }

    /// First radial derivative (strictly negative for `r > 0`).
    pub fn radial_d1(&self, r: f64) -> f64 {
        assert!(r > 0.0, "radial derivative is evaluated away from the center");
        let beta = self.params.beta();
        let gamma = self.params.gamma();
        let w = beta * (r.ln() - self.c0.ln());
        -self.amplitude * gamma * beta / r * (w - (gamma + 1.0) * softplus(w)).exp()
    }

    /// Second radial derivative.
    pub fn radial_d2(&self, r: f64) -> f64 {
        assert!(r > 0.0);
        let beta = self.params.beta();
        let gamma = self.params.gamma();
        let w = beta * (r.ln() - self.c0.ln());
        let e1 = (w - (gamma + 1.0) * softplus(w)).exp();
        let e2 = (2.0 * w - (gamma + 2.0) * softplus(w)).exp();
        -self.amplitude * gamma * beta / (r * r) * ((beta - 1.0) * e1 - (gamma + 1.0) * beta * e2)
    }

    /// Value at a point of `R^n`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x
            .iter()
            .zip(self.center.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        self.radial_value(r)
    }
}

/// Pointwise bubble evaluation.
pub fn bubble_eval(b: &Bubble, x: &[f64]) -> f64 {
    b.eval(x)
}

/// Rayleigh quotient of the scale-`c` unit-amplitude member:
/// `int |grad u|^2 dX / (int u^{2*(s)} |X|^{-s} dX)^{2/2*(s)}`.
pub fn rayleigh_quotient(params: &ProblemParams, c: f64, rq: &RadialQuadrature) -> Result<f64> {
    let n = params.nf();
    let s = params.s;
    let beta = params.beta();
    let gamma = params.gamma();
    let ln_c = c.ln();
    let omega = quad::unit_sphere_volume(params.n as usize);
    // r^n u'(r)^2 with u' = -(gamma beta / r) z (1+z)^{-gamma-1}, z = (r/c)^beta
    let g_num = |rho: f64| {
        let w = beta * (rho - ln_c);
        ((n - 2.0) * rho + 2.0 * (gamma * beta).ln() + 2.0 * w
            - 2.0 * (gamma + 1.0) * softplus(w))
        .exp()
    };
    // r^{n-s} u^{2*}
    let g_den = |rho: f64| {
        let w = beta * (rho - ln_c);
        ((n - s) * rho - params.two_star_s * gamma * softplus(w)).exp()
    };
    let num = rq.integrate_line(g_num).require(1e-11)?;
    let den = rq.integrate_line(g_den).require(1e-11)?;
    Ok(omega * num / (omega * den).powf(2.0 / params.two_star_s))
}

/// The sharp constant `mu_s(R^n)` by quadrature of the Rayleigh quotient at
/// unit scale.
pub fn best_constant_quadrature(params: &ProblemParams, rq: &RadialQuadrature) -> Result<f64> {
    rayleigh_quotient(params, 1.0, rq)
}

/// Weighted norm of the normalized member:
/// `int u~^{2*(s)} |X|^{-s} dX`, which must equal 1.
pub fn normalization_check(b: &Bubble, rq: &RadialQuadrature) -> Result<f64> {
    let params = b.params;
    let gamma = params.gamma();
    let beta = params.beta();
    let ln_c = b.c0.ln();
    let ln_a = b.amplitude.ln();
    let g = |rho: f64| {
        let w = beta * (rho - ln_c);
        ((params.nf() - params.s) * rho
            + params.two_star_s * (ln_a - gamma * softplus(w)))
        .exp()
    };
    let v = rq.integrate_line(g).require(1e-11)?;
    Ok(b.omega_nm1 * v)
}

/// Left side: quadrature of `int u~^{2*(s)-1} |X|^{-s} dX` for the normalized
/// member; right side: `K^{n-s} omega_{n-1} / (n-s)`.
pub fn gamma_integral_identity(
    params: &ProblemParams,
    rq: &RadialQuadrature,
) -> Result<(f64, f64)> {
    let b = Bubble::normalized(*params)?;
    let gamma = params.gamma();
    let beta = params.beta();
    let p = params.two_star_s - 1.0;
    let ln_k = b.k.ln();
    let g = |rho: f64| {
        let w = beta * (rho - ln_k);
        ((params.nf() - params.s) * rho - p * gamma * softplus(w)).exp()
    };
    let lhs = b.omega_nm1 * rq.integrate_line(g).require(1e-11)?;
    let rhs = b.k.powf(params.nf() - params.s) * b.omega_nm1 / (params.nf() - params.s);
    Ok((lhs, rhs))
}

/// `int u~^2 dX` for the normalized member; finite only for `n >= 5`.
pub fn bubble_l2_squared(params: &ProblemParams, rq: &RadialQuadrature) -> Result<f64> {
    if params.n < 5 {
        return Err(HsError::Integrability(format!(
            "int u^2 dX diverges at infinity for n = {} (needs n >= 5)",
            params.n
        )));
    }
    let b = Bubble::normalized(*params)?;
    let gamma = params.gamma();
    let beta = params.beta();
    let ln_k = b.k.ln();
    let g = |rho: f64| {
        let w = beta * (rho - ln_k);
        (params.nf() * rho - 2.0 * gamma * softplus(w)).exp()
    };
    Ok(b.omega_nm1 * rq.integrate_line(g).require(1e-11)?)
}

/// `int |X|^2 |grad u~|^2 dX` for the normalized member; finite only for
/// `n >= 5`.
pub fn bubble_weighted_gradient_sq(params: &ProblemParams, rq: &RadialQuadrature) -> Result<f64> {
    if params.n < 5 {
        return Err(HsError::Integrability(format!(
            "int |X|^2 |grad u|^2 dX diverges at infinity for n = {} (needs n >= 5)",
            params.n
        )));
    }
    let b = Bubble::normalized(*params)?;
    let gamma = params.gamma();
    let beta = params.beta();
    let ln_k = b.k.ln();
    let g = |rho: f64| {
        let w = beta * (rho - ln_k);
        ((params.nf() + 2.0) * rho + 2.0 * (gamma * beta).ln() - 2.0 * rho + 2.0 * w
            - 2.0 * (gamma + 1.0) * softplus(w))
        .exp()
    };
    Ok(b.omega_nm1 * rq.integrate_line(g).require(1e-11)?)
}

/// Left side: `int |X|^2 |grad u~|^2 dX / int u~^2 dX` by quadrature; right
/// side: `n(n-2)(n+2-s) / (2(2n-2-s))`. Rejects `n <= 4` where the integrals
/// diverge.
pub fn rayleigh_ratio_identity(
    params: &ProblemParams,
    rq: &RadialQuadrature,
) -> Result<(f64, f64)> {
    let num = bubble_weighted_gradient_sq(params, rq)?;
    let den = bubble_l2_squared(params, rq)?;
    let n = params.nf();
    let rhs = n * (n - 2.0) * (n + 2.0 - params.s) / (2.0 * (2.0 * n - 2.0 - params.s));
    Ok((num / den, rhs))
}

/// Relative residual of the Euclidean equation at radius `r`:
/// `|Delta u - mu_s u^{2*(s)-1} r^{-s}| / |mu_s u^{2*(s)-1} r^{-s}|`
/// with the analytic radial Laplacian `Delta u = -u'' - (n-1) u'/r`.
pub fn pde_residual(b: &Bubble, r: f64) -> f64 {
    assert!(r > 0.0);
    let n = b.params.nf();
    let lap = -b.radial_d2(r) - (n - 1.0) * b.radial_d1(r) / r;
    // the scale-c0 member solves the equation with constant (n-2)(n-s) c0^{s-2};
    // for the K-scaled member that constant is exactly mu_s
    let coeff = (n - 2.0) * (n - b.params.s) * b.c0.powf(b.params.s - 2.0);
    let rhs = coeff * b.radial_value(r).powf(b.params.two_star_s - 1.0) / r.powf(b.params.s);
    ((lap - rhs) / rhs).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: u32, s: f64) -> ProblemParams {
        ProblemParams::new(n, s).unwrap()
    }

    #[test]
    fn critical_exponent_spot_values() {
        assert_relative_eq!(critical_exponent(&params(3, 1.0)), 4.0);
        assert_relative_eq!(critical_exponent(&params(4, 0.0)), 4.0);
        assert_relative_eq!(critical_exponent(&params(6, 1.0)), 2.5);
    }

    #[test]
    fn cns_spot_values() {
        for s in [0.0, 0.5, 1.0, 1.5] {
            assert_relative_eq!(cns(&params(4, s)), 1.0 / 6.0, epsilon = 1e-15);
        }
        assert_relative_eq!(cns(&params(3, 0.0)), 1.0 / 8.0, epsilon = 1e-15);
        assert_relative_eq!(cns(&params(5, 1.0)), 5.0 / 28.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ProblemParams::new(2, 1.0).is_err());
        assert!(ProblemParams::new(4, 2.0).is_err());
        assert!(ProblemParams::new(4, -0.1).is_err());
    }

    #[test]
    fn center_and_half_denominator_values() {
        let b = Bubble::normalized(params(4, 1.0)).unwrap();
        assert_relative_eq!(b.radial_value(0.0), 1.0);
        // at r = c0 the denominator doubles
        let gamma = b.params.gamma();
        assert_relative_eq!(
            b.radial_value(b.c0),
            2f64.powf(-gamma),
            epsilon = 1e-13
        );
        // general-center member with its own amplitude
        let rb = Bubble::rescaled(params(4, 1.0), 0.3, vec![0.5, 0.0, 0.0, 0.0]).unwrap();
        let center_value = rb.eval(&[0.5, 0.0, 0.0, 0.0]);
        assert_relative_eq!(center_value, (rb.k / 0.3).powf(1.0), epsilon = 1e-13);
        let half = rb.eval(&[0.5 + 0.3, 0.0, 0.0, 0.0]);
        assert_relative_eq!(half, center_value * 2f64.powf(-rb.params.gamma()), epsilon = 1e-13);
    }

    #[test]
    fn tail_decay_recovers_k_power() {
        // |X|^{n-2} u~(X) -> K^{n-2} at large radius
        let b = Bubble::normalized(params(4, 1.0)).unwrap();
        let r = 1e6;
        let v = r.powf(2.0) * b.radial_value(r);
        assert_relative_eq!(v, b.k.powf(2.0), max_relative = 1e-5);
    }

    #[test]
    fn scale_invariance_of_rayleigh_quotient() {
        let rq = RadialQuadrature::default();
        for (n, s) in [(3, 1.0), (5, 0.5)] {
            let p = params(n, s);
            let q1 = rayleigh_quotient(&p, 0.5, &rq).unwrap();
            let q2 = rayleigh_quotient(&p, 2.0, &rq).unwrap();
            assert_relative_eq!(q1, q2, max_relative = 1e-10);
        }
    }

    #[test]
    fn defk_closure_spot_pairs() {
        let rq = RadialQuadrature::default();
        // K^{2-s} mu_s = (n-2)(n-s); for (3,1) the right side is 4
        for (n, s) in [(3u32, 1.0f64), (5, 0.5)] {
            let p = params(n, s);
            let mu = best_constant_quadrature(&p, &rq).unwrap();
            let b = Bubble::normalized(p).unwrap();
            let lhs = b.k.powf(p.beta()) * mu;
            let rhs = (p.nf() - 2.0) * (p.nf() - s);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
        }
    }

    #[test]
    fn normalization_is_one() {
        let rq = RadialQuadrature::default();
        for (n, s) in [(3u32, 1.0), (4, 1.0), (5, 0.5)] {
            let b = Bubble::normalized(params(n, s)).unwrap();
            let v = normalization_check(&b, &rq).unwrap();
            assert_relative_eq!(v, 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn gamma_identity_and_sphere_volume() {
        let rq = RadialQuadrature::default();
        let (lhs, rhs) = gamma_integral_identity(&params(3, 1.0), &rq).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
        let pi = std::f64::consts::PI;
        assert_relative_eq!(quad::unit_sphere_volume(4), 2.0 * pi * pi, epsilon = 1e-14);
    }

    #[test]
    fn dn_closed_form() {
        // d_n = (n-2) omega_{n-1} K^{n-2}
        for (n, s) in [(3u32, 1.0), (4, 0.5), (5, 1.5)] {
            let b = Bubble::normalized(params(n, s)).unwrap();
            let closed = (b.params.nf() - 2.0) * b.omega_nm1 * b.k.powf(b.params.nf() - 2.0);
            assert_relative_eq!(b.d_n, closed, max_relative = 1e-8);
        }
    }

    #[test]
    fn rayleigh_ratio_spot_values() {
        let rq = RadialQuadrature::default();
        let (lhs, rhs) = rayleigh_ratio_identity(&params(5, 1.0), &rq).unwrap();
        assert_relative_eq!(rhs, 45.0 / 7.0, epsilon = 1e-14);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
        let (lhs, rhs) = rayleigh_ratio_identity(&params(6, 0.0), &rq).unwrap();
        assert_relative_eq!(rhs, 9.6, epsilon = 1e-14);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-6);
        assert!(matches!(
            rayleigh_ratio_identity(&params(4, 1.0), &rq),
            Err(HsError::Integrability(_))
        ));
    }

    #[test]
    fn pde_residual_across_radii() {
        for (n, s) in [(3u32, 1.0), (4, 1.0), (5, 0.5), (6, 1.5)] {
            let b = Bubble::normalized(params(n, s)).unwrap();
            for r in [1e-3, 1.0, 1e3] {
                let res = pde_residual(&b, r);
                assert!(res <= 1e-8, "(n,s)=({n},{s}) r={r}: residual {res:e}");
            }
        }
    }

    #[test]
    fn blowup_member_is_rescaled_normalized_profile() {
        let p = params(4, 1.0);
        let mu = 1e-2;
        let b = Bubble::blowup(p, mu).unwrap();
        let nb = Bubble::normalized(p).unwrap();
        for r in [1e-4, 1e-2, 0.3, 2.0] {
            let direct = b.radial_value(r);
            let scaled = mu.powf(-1.0) * nb.radial_value(r / mu);
            assert_relative_eq!(direct, scaled, max_relative = 1e-12);
        }
    }
}
