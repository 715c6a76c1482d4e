//! Radial Green functions of `Delta_g + h` on round spheres, the parametrix
//! decomposition near the pole, and the mass at the singular point for
//! three-dimensional models.
//!
//! With geodesic polar coordinate `theta` from the pole and `x = theta / R`,
//! the zonal Green function solves
//!
//! ```text
//! G_xx + (n-1) cot(x) G_x - h R^2 G = 0     on (0, pi),
//! ```
//!
//! regular at the antipode and with the flat-parametrix singularity
//! `theta^{n-2} G -> 1/((n-2) omega_{n-1})` at the pole. The solver integrates
//! backwards from a series start at the antipode on a graded mesh and
//! normalizes through the weak delta identity
//! `int (grad G . grad phi + h G phi) dv = phi(pole)` with a smooth zonal test
//! function, so the singular-coefficient limit stays available as an
//! independent check. For `n = 3` the regular part `beta = G - 1/(4 pi theta)`
//! extends continuously to the pole and its value there is the mass.

use crate::geometry::{ManifoldModel, ModelKind};
use crate::quad::{self, gauss_legendre};
use crate::{HsError, Result};
use serde::{Deserialize, Serialize};

/// Zonal Green function profile on a round sphere.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    pub n: usize,
    pub radius: f64,
    /// Constant potential of the operator `Delta_g + h`.
    pub h: f64,
    /// Geodesic mesh, ascending, from near the pole to near the antipode.
    pub thetas: Vec<f64>,
    /// Profile values on the mesh.
    pub values: Vec<f64>,
    /// Profile derivative `dG/dtheta` on the mesh.
    pub derivs: Vec<f64>,
    /// The weak-identity integral the raw solution was divided by.
    pub normalization: f64,
}

fn require_sphere(m: &ManifoldModel) -> Result<f64> {
    match m.kind {
        ModelKind::Sphere { radius } => Ok(radius),
        _ => Err(HsError::InvalidParams(
            "Green-function solver requires the rotationally symmetric sphere model".into(),
        )),
    }
}

/// Builds the integration mesh in the angle variable `x = theta/R`:
/// log-graded near the pole, uniform through the bulk, log-graded in the
/// supplementary angle near the antipode.
fn angle_mesh() -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let mut xs = Vec::new();
    let (x_lo, x_mid) = (1e-5f64, 0.3f64);
    let n_log = 2200usize;
    for i in 0..n_log {
        let f = i as f64 / (n_log - 1) as f64;
        xs.push(x_lo * (x_mid / x_lo).powf(f));
    }
    let n_uni = 2600usize;
    let hi = pi - 0.3;
    for i in 1..=n_uni {
        let f = i as f64 / n_uni as f64;
        xs.push(x_mid + f * (hi - x_mid));
    }
    let (t_lo, t_hi) = (1e-4f64, 0.3f64);
    let n_anti = 600usize;
    for i in 1..n_anti {
        let f = i as f64 / (n_anti - 1) as f64;
        // descending tau = log-spaced from t_hi down to t_lo
        let tau = t_hi * (t_lo / t_hi).powf(f);
        xs.push(pi - tau);
    }
    xs
}

/// One RK4 step of the angular ODE written as a first-order system
/// `(G, G_x)`.
fn rk4_step(x: f64, g: f64, dg: f64, dx: f64, n: usize, hr2: f64) -> (f64, f64) {
    let f = |x: f64, g: f64, dg: f64| -> (f64, f64) {
        let cot = x.cos() / x.sin();
        (dg, -(n as f64 - 1.0) * cot * dg + hr2 * g)
    };
    let (k1g, k1d) = f(x, g, dg);
    let (k2g, k2d) = f(x + 0.5 * dx, g + 0.5 * dx * k1g, dg + 0.5 * dx * k1d);
    let (k3g, k3d) = f(x + 0.5 * dx, g + 0.5 * dx * k2g, dg + 0.5 * dx * k2d);
    let (k4g, k4d) = f(x + dx, g + dx * k3g, dg + dx * k3d);
    (
        g + dx / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
        dg + dx / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )
}

/// Solves for the Green function of `Delta_g + h` at the pole of the round
/// sphere model. `h` must keep the operator coercive (`h > 0` for constant
/// potentials: the lowest eigenvalue is `h` itself).
pub fn solve_green(m: &ManifoldModel, h: f64) -> Result<GreenFunction> {
    let radius = require_sphere(m)?;
    let n = m.n;
    if h <= 0.0 {
        return Err(HsError::NonCoercive(h));
    }
    let hr2 = h * radius * radius;
    let xs = angle_mesh();
    let count = xs.len();
    let mut values = vec![0.0; count];
    let mut derivs = vec![0.0; count];

    // Series start at the antipode: in tau = pi - x the regular branch is
    // G = g0 (1 + hr2 tau^2 / (2n) + O(tau^4)), and G_x = -dG/dtau.
    let pi = std::f64::consts::PI;
    let tau0 = pi - xs[count - 1];
    let g2 = hr2 / (2.0 * n as f64);
    let mut g = 1.0 + g2 * tau0 * tau0;
    let mut dg = -2.0 * g2 * tau0;
    values[count - 1] = g;
    derivs[count - 1] = dg;

    let substeps = 6;
    for i in (0..count - 1).rev() {
        let x1 = xs[i + 1];
        let x0 = xs[i];
        let dx = (x0 - x1) / substeps as f64;
        let mut x = x1;
        for _ in 0..substeps {
            let (gn, dgn) = rk4_step(x, g, dg, dx, n, hr2);
            g = gn;
            dg = dgn;
            x += dx;
        }
        values[i] = g;
        derivs[i] = dg;
    }

    // Normalize through the weak delta identity with phi = cos^2(x/2).
    let mut green = GreenFunction {
        n,
        radius,
        h,
        thetas: xs.iter().map(|x| x * radius).collect(),
        values,
        derivs: derivs.iter().map(|d| d / radius).collect(),
        normalization: 1.0,
    };
    let phi = |x: f64| ((0.5 * x).cos().powi(2), -0.5 * x.sin());
    let norm = weak_pairing(&green, &phi);
    if !(norm.is_finite() && norm != 0.0) {
        return Err(HsError::SolverDiverged { iterations: count, residual: norm });
    }
    for v in green.values.iter_mut() {
        *v /= norm;
    }
    for d in green.derivs.iter_mut() {
        *d /= norm;
    }
    green.normalization = norm;
    Ok(green)
}

impl GreenFunction {
    fn angle_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.thetas.iter().map(move |t| t / self.radius)
    }

    fn locate(&self, theta: f64) -> usize {
        match self.thetas.binary_search_by(|t| t.total_cmp(&theta)) {
            Ok(i) => i.min(self.thetas.len() - 2),
            Err(i) => i.clamp(1, self.thetas.len() - 1) - 1,
        }
    }

    /// Cubic Hermite evaluation of the profile at geodesic distance `theta`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.hermite(theta).0
    }

    /// Derivative `dG/dtheta`.
    pub fn eval_deriv(&self, theta: f64) -> f64 {
        self.hermite(theta).1
    }

    fn hermite(&self, theta: f64) -> (f64, f64) {
        let i = self.locate(theta);
        let (t0, t1) = (self.thetas[i], self.thetas[i + 1]);
        let hseg = t1 - t0;
        let s = ((theta - t0) / hseg).clamp(0.0, 1.0);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i] * hseg, self.derivs[i + 1] * hseg);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        let dv = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * d1)
            / hseg;
        (v, dv)
    }

    /// `theta^{n-2} G(theta)` at the smallest mesh node; tends to
    /// `1/((n-2) omega_{n-1})` at the pole.
    pub fn singularity_constant(&self) -> f64 {
        self.thetas[0].powf(self.n as f64 - 2.0) * self.values[0]
    }

    /// Maximum relative residual of the defining ODE over interior mesh
    /// nodes, from five-point finite differences on the graded mesh segments
    /// (independent of the integrator).
    pub fn ode_residual_max(&self) -> f64 {
        let n = self.n as f64;
        let hr2 = self.h * self.radius * self.radius;
        let xs: Vec<f64> = self.angle_nodes().collect();
        let mut worst: f64 = 0.0;
        // five-point stencil on a locally uniform coordinate w (log near the
        // pole, linear in the bulk), applied where the local spacing is
        // uniform to 1e-9 relative
        let coord = |x: f64, log: bool| if log { x.ln() } else { x };
        for seg in [(true, 3usize, 2100usize), (false, 2300usize, 4700usize)] {
            let (log, lo, hi) = seg;
            let mut k = lo;
            while k + 4 < hi.min(xs.len()) {
                let w: Vec<f64> = (0..5).map(|j| coord(xs[k + j], log)).collect();
                let dw = w[1] - w[0];
                let uniform = (2..5).all(|j| ((w[j] - w[j - 1]) / dw - 1.0).abs() < 1e-9);
                if uniform {
                    let y: Vec<f64> = (0..5).map(|j| self.values[k + j]).collect();
                    let d1 = (-y[4] + 8.0 * y[3] - 8.0 * y[1] + y[0]) / (12.0 * dw);
                    let d2 = (-y[4] + 16.0 * y[3] - 30.0 * y[2] + 16.0 * y[1] - y[0])
                        / (12.0 * dw * dw);
                    let x = xs[k + 2];
                    let (gx, gxx) = if log {
                        (d1 / x, (d2 - d1) / (x * x))
                    } else {
                        (d1, d2)
                    };
                    let cot = x.cos() / x.sin();
                    let terms = [gxx, (n - 1.0) * cot * gx, -hr2 * self.values[k + 2]];
                    let res = terms.iter().sum::<f64>().abs();
                    let scale = terms.iter().map(|t| t.abs()).sum::<f64>().max(1e-300);
                    worst = worst.max(res / scale);
                }
                k += 5;
            }
        }
        worst
    }
}

/// `int_M (grad G . grad phi + h G phi) dv` for a zonal test function given as
/// `phi(x) = (value, d/dx value)` in the angle variable. Equals `phi(pole)`
/// when `G` is the delta-normalized Green function.
pub fn weak_pairing(g: &GreenFunction, phi: &dyn Fn(f64) -> (f64, f64)) -> f64 {
    let n = g.n as f64;
    let r = g.radius;
    let omega = quad::unit_sphere_volume(g.n);
    let (gl_x, gl_w) = gauss_legendre(3);
    let xs: Vec<f64> = g.angle_nodes().collect();
    let mut total = 0.0;
    for i in 0..xs.len() - 1 {
        let (x0, x1) = (xs[i], xs[i + 1]);
        let mid = 0.5 * (x0 + x1);
        let half = 0.5 * (x1 - x0);
        for (q, w) in gl_x.iter().zip(gl_w.iter()) {
            let x = mid + half * q;
            let theta = x * r;
            let gv = g.eval(theta);
            let gd = g.eval_deriv(theta) * r; // dG/dx
            let (pv, pd) = phi(x);
            let sin_pow = x.sin().powf(n - 1.0);
            total += w * half * sin_pow * (gd * pd * r.powf(n - 2.0) + g.h * gv * pv * r.powf(n));
        }
    }
    omega * total
}

/// Deviation of the weak delta identity from `phi(pole)` for three
/// independent zonal test functions; all must vanish within quadrature
/// tolerance for a valid Green function.
pub fn weak_delta_residuals(g: &GreenFunction) -> [f64; 3] {
    let phi1 = |x: f64| ((0.5 * x).cos().powi(2), -0.5 * x.sin());
    let phi2 = |x: f64| {
        let c = (0.5 * x).cos();
        let s = (0.5 * x).sin();
        (c.powi(4), -2.0 * c.powi(3) * s)
    };
    let phi3 = |x: f64| {
        // (1 + cos x)(3 - (1 + cos x)) / 2, equal to 1 at the pole
        let u = 1.0 + x.cos();
        let du = -x.sin();
        ((u * (3.0 - u)) / 2.0, (3.0 * du - 2.0 * u * du) / 2.0)
    };
    [
        weak_pairing(g, &phi1) - 1.0,
        weak_pairing(g, &phi2) - 1.0,
        weak_pairing(g, &phi3) - 1.0,
    ]
}

/// `int_M G^2 dv`, the magnitude of the mass derivative in `h`.
pub fn green_l2_squared(g: &GreenFunction) -> f64 {
    let n = g.n as f64;
    let r = g.radius;
    let omega = quad::unit_sphere_volume(g.n);
    let (gl_x, gl_w) = gauss_legendre(3);
    let xs: Vec<f64> = g.angle_nodes().collect();
    let mut total = 0.0;
    for i in 0..xs.len() - 1 {
        let (x0, x1) = (xs[i], xs[i + 1]);
        let mid = 0.5 * (x0 + x1);
        let half = 0.5 * (x1 - x0);
        for (q, w) in gl_x.iter().zip(gl_w.iter()) {
            let x = mid + half * q;
            let gv = g.eval(x * r);
            total += w * half * x.sin().powf(n - 1.0) * gv * gv;
        }
    }
    omega * r.powf(n) * total
}

/// Mass extraction report for `n = 3`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassReport {
    pub h: f64,
    /// Extrapolated value of the regular part at the pole.
    pub mass: f64,
    /// Linear and quadratic fit coefficients of the regular part.
    pub c1: f64,
    pub c2: f64,
    /// Primary fit window in geodesic distance.
    pub window: (f64, f64),
    /// Mass refitted on the alternate window.
    pub mass_alt_window: f64,
    /// Error estimate: window discrepancy plus fit RMS.
    pub err_est: f64,
    /// Sampled `(theta, beta(theta))` pairs of the primary window.
    pub beta_samples: Vec<(f64, f64)>,
}

fn beta_fit(g: &GreenFunction, window: (f64, f64)) -> Result<(Vec<f64>, Vec<(f64, f64)>, f64)> {
    let samples = 48;
    let mut pts = Vec::with_capacity(samples);
    for i in 0..samples {
        let f = i as f64 / (samples - 1) as f64;
        let theta = window.0 * (window.1 / window.0).powf(f);
        let beta = g.eval(theta) - 1.0 / (4.0 * std::f64::consts::PI * theta);
        pts.push((theta, beta));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let coeffs = quad::polyfit(&xs, &ys, 2)
        .ok_or_else(|| HsError::UnstableFit("singular quadratic fit".into()))?;
    let rms = (pts
        .iter()
        .map(|(x, y)| {
            let fit = coeffs[0] + coeffs[1] * x + coeffs[2] * x * x;
            (y - fit) * (y - fit)
        })
        .sum::<f64>()
        / samples as f64)
        .sqrt();
    Ok((coeffs, pts, rms))
}

/// Extracts the mass `beta(pole)` of `Delta_g + h` on a three-dimensional
/// sphere model by quadratic extrapolation of the regular part, with a
/// window-independence check.
pub fn mass(m: &ManifoldModel, h: f64) -> Result<MassReport> {
    if m.n != 3 {
        return Err(HsError::InvalidParams(format!(
            "mass is defined for n = 3, got n = {}",
            m.n
        )));
    }
    let g = solve_green(m, h)?;
    let w1 = (1e-3, 1e-2);
    let w2 = (1e-2, 1e-1);
    let (c_primary, samples, rms1) = beta_fit(&g, w1)?;
    let (c_alt, _, rms2) = beta_fit(&g, w2)?;
    let mass = c_primary[0];
    let mass_alt = c_alt[0];
    let err = (mass - mass_alt).abs() + rms1 + rms2;
    if (mass - mass_alt).abs() > 1e-2 * (1.0 + mass.abs()) {
        return Err(HsError::UnstableFit(format!(
            "mass differs across fit windows: {mass:.6e} vs {mass_alt:.6e}"
        )));
    }
    Ok(MassReport {
        h,
        mass,
        c1: c_primary[1],
        c2: c_primary[2],
        window: w1,
        mass_alt_window: mass_alt,
        err_est: err,
        beta_samples: samples,
    })
}

/// Root of `h -> mass(h)` by bracketed bisection/secant; the mass is strictly
/// decreasing in `h` on the coercive range, so the root is unique.
pub fn mass_zero_root(m: &ManifoldModel) -> Result<f64> {
    let radius = require_sphere(m)?;
    let scale = 1.0 / (radius * radius);
    let (mut lo, mut hi) = (0.2 * scale, 1.6 * scale);
    let f = |h: f64| mass(m, h).map(|r| r.mass);
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    for _ in 0..8 {
        if flo.signum() != fhi.signum() {
            break;
        }
        if flo < 0.0 {
            lo *= 0.5;
            flo = f(lo)?;
        } else {
            hi *= 1.5;
            fhi = f(hi)?;
        }
    }
    if flo.signum() == fhi.signum() {
        return Err(HsError::NoSignChange { lo, hi, flo, fhi });
    }
    let root = quad::find_root(|h| mass(m, h).map(|r| r.mass).unwrap_or(f64::NAN), lo, hi,
        1e-7 * scale, 1e-5)?;
    // contract: the mass at the root is numerically zero
    let residual = mass(m, root)?.mass;
    if residual.abs() > 1e-4 {
        return Err(HsError::SolverDiverged { iterations: 0, residual });
    }
    Ok(root)
}

/// Zonal eigen-series evaluation of the `n = 3` Green function, retained as a
/// cross-check path for the shooting solver. The series is accelerated by
/// differencing against the closed-form profile of the conformal potential
/// `h = 3/4` on the unit sphere, `1/(8 pi sin(theta/2))` (scaled to radius
/// `R`), after which the coefficients decay cubically.
pub fn zonal_series_green_s3(radius: f64, h: f64, theta: f64, terms: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let x = theta / radius;
    // closed form for h0 = 3/4 R^{-2}: scaling G_R(theta) = R^{-1} G_1(theta/R)
    let closed = 1.0 / (8.0 * pi * radius * (0.5 * x).sin());
    let hr2 = h * radius * radius;
    let mut sum = 0.0;
    let sx = x.sin();
    for k in 0..terms {
        let kf = k as f64;
        let lam = kf * (kf + 2.0);
        // zonal kernel (k+1) U_k(cos x) / (2 pi^2 R) with U_k = sin((k+1)x)/sin x
        let z = (kf + 1.0) * (((kf + 1.0) * x).sin() / sx) / (2.0 * pi * pi);
        sum += z * (1.0 / (lam + hr2) - 1.0 / (lam + 0.75));
    }
    closed + sum / radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_s3() -> ManifoldModel {
        ManifoldModel::sphere(3, 1.0, 1.5)
    }

    #[test]
    fn conformal_potential_matches_closed_form() {
        let g = solve_green(&unit_s3(), 0.75).unwrap();
        let pi = std::f64::consts::PI;
        for theta in [1e-4, 1e-2, 0.5, 1.5, 2.5, 3.0] {
            let exact = 1.0 / (8.0 * pi * (0.5 * theta).sin());
            let got = g.eval(theta);
            assert_relative_eq!(got, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn ode_residual_small_on_interior() {
        for (n, h) in [(3usize, 0.6), (4, 1.3), (5, 2.0)] {
            let m = ManifoldModel::sphere(n, 1.0, 1.5);
            let g = solve_green(&m, h).unwrap();
            let res = g.ode_residual_max();
            assert!(res <= 1e-8, "n={n} h={h}: ODE residual {res:e}");
        }
    }

    #[test]
    fn singularity_constant_general_n() {
        for n in [3usize, 4, 5, 6] {
            let m = ManifoldModel::sphere(n, 1.0, 1.5);
            let g = solve_green(&m, 1.0).unwrap();
            let expected = 1.0 / ((n as f64 - 2.0) * quad::unit_sphere_volume(n));
            assert_relative_eq!(g.singularity_constant(), expected, max_relative = 1e-3);
        }
    }

    #[test]
    fn weak_delta_identity_three_test_functions() {
        let g = solve_green(&unit_s3(), 0.6).unwrap();
        let res = weak_delta_residuals(&g);
        // the first test function defines the normalization; the others are
        // genuine checks
        assert!(res[0].abs() < 1e-12);
        assert!(res[1].abs() < 1e-8, "{:?}", res);
        assert!(res[2].abs() < 1e-8, "{:?}", res);
    }

    #[test]
    fn positivity_on_grid() {
        for h in [0.1, 0.75, 2.0] {
            let g = solve_green(&unit_s3(), h).unwrap();
            assert!(g.values.iter().all(|v| *v > 0.0), "h={h}");
        }
    }

    #[test]
    fn non_coercive_rejected() {
        assert!(matches!(solve_green(&unit_s3(), -0.2), Err(HsError::NonCoercive(_))));
        assert!(matches!(mass(&unit_s3(), 0.0), Err(HsError::NonCoercive(_))));
    }

    #[test]
    fn mass_zero_at_conformal_potential() {
        let r = mass(&unit_s3(), 0.75).unwrap();
        assert!(r.mass.abs() <= 1e-3, "mass {:.3e}", r.mass);
        // analytic slope of the regular part for the closed-form profile
        assert_relative_eq!(r.c1, 1.0 / (96.0 * std::f64::consts::PI), max_relative = 1e-2);
    }

    #[test]
    fn mass_monotone_decreasing_in_h() {
        let ms: Vec<f64> = [0.5, 0.625, 0.75, 0.875, 1.0]
            .iter()
            .map(|&h| mass(&unit_s3(), h).unwrap().mass)
            .collect();
        for w in ms.windows(2) {
            assert!(w[0] > w[1], "{ms:?}");
        }
    }

    #[test]
    fn mass_derivative_matches_resolvent_identity() {
        // dm/dh = -int G^2 dv
        let h = 0.7;
        let eps = 1e-3;
        let mp = mass(&unit_s3(), h + eps).unwrap().mass;
        let mm = mass(&unit_s3(), h - eps).unwrap().mass;
        let fd = (mp - mm) / (2.0 * eps);
        let g = solve_green(&unit_s3(), h).unwrap();
        let exact = -green_l2_squared(&g);
        assert_relative_eq!(fd, exact, max_relative = 1e-3);
    }

    #[test]
    fn mass_diverges_like_inverse_h_volume() {
        // leading behaviour 1/(h Vol(S^3)) as h -> 0+
        let h = 1e-3;
        let m = mass(&unit_s3(), h).unwrap().mass;
        let lead = 1.0 / (h * 2.0 * std::f64::consts::PI * std::f64::consts::PI);
        assert_relative_eq!(m, lead, max_relative = 2e-2);
    }

    #[test]
    fn mass_root_is_conformal_and_scales_with_radius() {
        let root = mass_zero_root(&unit_s3()).unwrap();
        assert_relative_eq!(root, 0.75, max_relative = 0.05);
        let bigger = ManifoldModel::sphere(3, 2.0, 3.0);
        let root2 = mass_zero_root(&bigger).unwrap();
        assert_relative_eq!(root2, 0.75 / 4.0, max_relative = 0.05);
    }

    #[test]
    fn zonal_series_cross_checks_shooting() {
        for h in [0.5, 1.1] {
            let g = solve_green(&unit_s3(), h).unwrap();
            for theta in [0.7, 1.5, 2.4] {
                let series = zonal_series_green_s3(1.0, h, theta, 4000);
                assert_relative_eq!(g.eval(theta), series, max_relative = 1e-5);
            }
        }
    }
}
