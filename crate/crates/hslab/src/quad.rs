//! Quadrature kernels and small numerical utilities.
//!
//! Three integration rules cover every integral in the crate:
//!
//! * [`tanh_sinh`] — double-exponential rule on a finite interval, robust to
//!   endpoint singularities such as `r^{-s}`;
//! * [`trapezoid_real_line`] — the trapezoidal rule on the whole line with
//!   automatic step halving, spectrally accurate for analytic integrands with
//!   exponential decay (the form every radial integral takes after the
//!   substitution `rho = ln r`);
//! * [`SphereRule`] — product Gauss rule on the unit sphere `S^{n-1}`.
//!
//! The rest is shared plumbing: Gauss-Legendre nodes, a partially pivoted
//! tridiagonal solver, dense Gaussian elimination for small systems,
//! polynomial least squares and bracketed root finding.

use crate::{HsError, Result};

/// Outcome of an adaptive quadrature: value, error estimate from the last
/// refinement step, and the number of integrand evaluations.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    pub err_est: f64,
    pub evals: usize,
}

impl QuadOutcome {
    /// Converts to a hard error when the requested tolerance was missed.
    pub fn require(self, rel_tol: f64) -> Result<f64> {
        let scale = self.value.abs().max(1e-300);
        if self.err_est > rel_tol * scale.max(1.0) && self.err_est > rel_tol * scale {
            return Err(HsError::QuadratureNonConvergent {
                achieved: self.err_est / scale,
                requested: rel_tol,
            });
        }
        Ok(self.value)
    }
}

/// Tanh-sinh quadrature of `f` on `(a, b)`.
///
/// Nodes are passed to the integrand as signed distances from the endpoints
/// internally, so integrable endpoint singularities are evaluated without
/// cancellation. Refinement halves the step until two consecutive levels agree
/// to `rel_tol` (relative) or `max_level` is reached.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> QuadOutcome {
    debug_assert!(b > a);
    let half = 0.5 * (b - a);
    let pi_half = std::f64::consts::FRAC_PI_2;
    let mut evals = 0usize;

    // Level sums are accumulated over the full node set at each h, which keeps
    // the logic simple at the cost of re-evaluating coarse nodes.
    let mut prev = f64::NAN;
    let mut value = f64::NAN;
    let mut err = f64::INFINITY;
    let mut h = 1.0f64;
    for level in 0..=12 {
        let mut sum = 0.0;
        // center node t = 0: x = midpoint, weight pi/2
        sum += pi_half * f(a + half);
        evals += 1;
        let mut k = 1usize;
        loop {
            let t = k as f64 * h;
            let u = pi_half * t.sinh();
            if u > 710.0 {
                break;
            }
            // distance of the node pair from either endpoint: half*(1 -/+ tanh u)
            let d = (b - a) / ((2.0 * u).exp() + 1.0);
            let w = pi_half * t.cosh() / u.cosh().powi(2);
            if w * half < 1e-320 {
                break;
            }
            let fa = f(a + d);
            let fb = f(b - d);
            evals += 2;
            let term = w * (fa + fb);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() && k as f64 * h > 3.0 {
                break;
            }
            k += 1;
            if k > 400_000 {
                break;
            }
        }
        value = sum * h * half;
        if level > 0 {
            err = (value - prev).abs();
            if err <= rel_tol * value.abs().max(1e-300) {
                return QuadOutcome { value, err_est: err, evals };
            }
        }
        prev = value;
        h *= 0.5;
    }
    QuadOutcome { value, err_est: err, evals }
}

/// Trapezoidal rule for `int_{-inf}^{inf} g(t) dt`.
///
/// `g` must decay at least exponentially in both directions; the sum walks
/// outward from 0 until terms are negligible, then the step is halved until
/// two levels agree to `rel_tol`.
pub fn trapezoid_real_line<F: Fn(f64) -> f64>(g: F, rel_tol: f64) -> QuadOutcome {
    let mut evals = 0usize;
    let mut prev = f64::NAN;
    let mut value = f64::NAN;
    let mut err = f64::INFINITY;
    let mut h = 0.5f64;
    for level in 0..=10 {
        let mut sum = g(0.0);
        evals += 1;
        for dir in [1.0f64, -1.0] {
            let mut quiet = 0usize;
            let mut k = 1usize;
            loop {
                let t = dir * k as f64 * h;
                let term = g(t);
                evals += 1;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs().max(1e-300) {
                    quiet += 1;
                    if quiet >= 3 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
                k += 1;
                if k > 2_000_000 {
                    break;
                }
            }
        }
        value = sum * h;
        if level > 0 {
            err = (value - prev).abs();
            if err <= rel_tol * value.abs().max(1e-300) {
                return QuadOutcome { value, err_est: err, evals };
            }
        }
        prev = value;
        h *= 0.5;
    }
    QuadOutcome { value, err_est: err, evals }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative via recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Gauss-Legendre nodes and weights transported to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|&x| mid + half * x).collect(),
        ws.iter().map(|&w| w * half).collect(),
    )
}

/// Product quadrature rule on the unit sphere `S^{n-1}`, `n >= 2`.
///
/// Polar angles use Gauss-Legendre in the angle with the `sin^k` surface
/// factor folded into the weight (spectrally accurate for smooth integrands);
/// the azimuth uses the uniform trapezoidal rule, exact for trigonometric
/// polynomials below the node count. Node weights sum to the sphere volume
/// `omega_{n-1}`.
pub struct SphereRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n: usize, polar_points: usize, azimuth_points: usize) -> Self {
        assert!(n >= 2);
        // Start from the circle S^1.
        let mut nodes: Vec<Vec<f64>> = Vec::with_capacity(azimuth_points);
        let mut weights: Vec<f64> = Vec::with_capacity(azimuth_points);
        let dphi = 2.0 * std::f64::consts::PI / azimuth_points as f64;
        for j in 0..azimuth_points {
            let phi = (j as f64 + 0.5) * dphi;
            nodes.push(vec![phi.cos(), phi.sin()]);
            weights.push(dphi);
        }
        // Suspend: S^{d} from S^{d-1} with sigma = (cos t, sin t * sigma'),
        // surface factor sin^{d-1} t on t in (0, pi).
        for d in 2..n {
            let (ts, tws) = gauss_legendre_on(polar_points, 0.0, std::f64::consts::PI);
            let mut new_nodes = Vec::with_capacity(nodes.len() * polar_points);
            let mut new_weights = Vec::with_capacity(nodes.len() * polar_points);
            for (t, tw) in ts.iter().zip(tws.iter()) {
                let (st, ct) = t.sin_cos();
                let surf = st.powi((d - 1) as i32) * tw;
                for (node, w) in nodes.iter().zip(weights.iter()) {
                    let mut v = Vec::with_capacity(d + 1);
                    v.push(ct);
                    for x in node {
                        v.push(st * x);
                    }
                    new_nodes.push(v);
                    new_weights.push(surf * w);
                }
            }
            nodes = new_nodes;
            weights = new_weights;
        }
        SphereRule { nodes, weights }
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(s, w)| w * f(s))
            .sum()
    }
}

/// Volume of the unit sphere `S^{n-1}`: `2 pi^{n/2} / Gamma(n/2)`, evaluated
/// exactly for integer and half-integer arguments.
pub fn unit_sphere_volume(n: usize) -> f64 {
    assert!(n >= 1);
    let pi = std::f64::consts::PI;
    // Gamma(n/2) for n >= 1
    let gamma_half = |n: usize| -> f64 {
        if n % 2 == 0 {
            // Gamma(k) = (k-1)!
            let k = n / 2;
            (1..k).fold(1.0, |acc, j| acc * j as f64)
        } else {
            // Gamma(k + 1/2) = (2k)! sqrt(pi) / (4^k k!)
            let k = (n - 1) / 2;
            let mut v = pi.sqrt();
            for j in 0..k {
                v *= j as f64 + 0.5;
            }
            v
        }
    };
    2.0 * pi.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Tridiagonal LU with partial pivoting (fill-in limited to a second
/// super-diagonal). Stable for the indefinite systems produced by Newton
/// corrections near critical points.
pub struct TridiagLu {
    n: usize,
    low: Vec<f64>,
    diag: Vec<f64>,
    up1: Vec<f64>,
    up2: Vec<f64>,
    pivoted: Vec<bool>,
}

impl TridiagLu {
    /// Factors the matrix with sub-diagonal `a` (length n-1), diagonal `b`
    /// (length n) and super-diagonal `c` (length n-1).
    pub fn factor(a: &[f64], b: &[f64], c: &[f64]) -> Option<Self> {
        let n = b.len();
        assert_eq!(a.len(), n - 1);
        assert_eq!(c.len(), n - 1);
        let mut diag = b.to_vec();
        let mut up1 = vec![0.0; n];
        let mut up2 = vec![0.0; n];
        let mut low = vec![0.0; n];
        up1[..n - 1].copy_from_slice(c);
        let mut pivoted = vec![false; n];
        let mut sub = a.to_vec();
        for k in 0..n - 1 {
            let (piv, other) = (diag[k], sub[k]);
            if other.abs() > piv.abs() {
                pivoted[k] = true;
                // swap row k and k+1
                diag[k] = sub[k];
                sub[k] = piv;
                let t = up1[k];
                up1[k] = diag[k + 1];
                diag[k + 1] = t;
                if k + 1 < n - 1 {
                    up2[k] = up1[k + 1];
                    up1[k + 1] = 0.0;
                }
            }
            if diag[k] == 0.0 {
                return None;
            }
            let m = sub[k] / diag[k];
            low[k] = m;
            diag[k + 1] -= m * up1[k];
            if k + 1 < n - 1 {
                up1[k + 1] -= m * up2[k];
            }
        }
        if diag[n - 1] == 0.0 {
            return None;
        }
        Some(TridiagLu { n, low, diag, up1, up2, pivoted })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = rhs.to_vec();
        for k in 0..n - 1 {
            if self.pivoted[k] {
                x.swap(k, k + 1);
            }
            x[k + 1] -= self.low[k] * x[k];
        }
        x[n - 1] /= self.diag[n - 1];
        for k in (0..n - 1).rev() {
            let mut v = x[k] - self.up1[k] * x[k + 1];
            if k + 2 < n {
                v -= self.up2[k] * x[k + 2];
            }
            x[k] = v / self.diag[k];
        }
        x
    }
}

/// Dense Gaussian elimination with partial pivoting; meant for small systems
/// (metric inverses, least-squares normal equations, bordered Schur blocks).
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|row| row.clone()).collect();
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv, _) = m
            .iter()
            .enumerate()
            .skip(k)
            .map(|(i, row)| (i, row[k].abs()))
            .max_by(|p, q| p.1.total_cmp(&q.1))?;
        if m[piv][k] == 0.0 {
            return None;
        }
        m.swap(k, piv);
        x.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut v = x[k];
        for j in k + 1..n {
            v -= m[k][j] * x[j];
        }
        x[k] = v / m[k][k];
    }
    Some(x)
}

/// In-place inverse of a small dense matrix.
pub fn invert_dense(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(solve_dense(a, &e)?);
    }
    // transpose column solutions into rows
    let mut inv = vec![vec![0.0; n]; n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Least-squares polynomial fit `y ~ sum c_k x^k` of degree `deg`.
/// The abscissas are internally shifted/scaled to `[-1, 1]` for conditioning;
/// returned coefficients refer to the original variable.
pub fn polyfit(xs: &[f64], ys: &[f64], deg: usize) -> Option<Vec<f64>> {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() > deg);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let half = (0.5 * (hi - lo)).max(1e-300);
    let t: Vec<f64> = xs.iter().map(|&x| (x - mid) / half).collect();
    let m = deg + 1;
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    for (ti, yi) in t.iter().zip(ys.iter()) {
        let mut pows = vec![1.0; m];
        for k in 1..m {
            pows[k] = pows[k - 1] * ti;
        }
        for i in 0..m {
            atb[i] += pows[i] * yi;
            for j in 0..m {
                ata[i][j] += pows[i] * pows[j];
            }
        }
    }
    let c_scaled = solve_dense(&ata, &atb)?;
    // Expand sum c_k ((x-mid)/half)^k back to monomials in x via binomials.
    let mut coeffs = vec![0.0; m];
    for (k, &ck) in c_scaled.iter().enumerate() {
        // ((x - mid)/half)^k = sum_j C(k,j) x^j (-mid)^{k-j} / half^k
        let mut binom = 1.0;
        for j in 0..=k {
            if j > 0 {
                binom *= (k - j + 1) as f64 / j as f64;
            }
            coeffs[j] += ck * binom * (-mid).powi((k - j) as i32) / half.powi(k as i32);
        }
    }
    Some(coeffs)
}

/// Natural cubic spline interpolation with first and second derivatives;
/// arguments outside the knot range evaluate the boundary cubic.
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 3 && y.len() == n);
        let mut sub = vec![0.0; n - 1];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n - 1];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            sub[i - 1] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        // natural boundary rows: m_0 = m_{n-1} = 0
        sub[n - 2] = 0.0;
        sup[0] = 0.0;
        let lu = TridiagLu::factor(&sub, &diag, &sup).expect("spline system is regular");
        let m = lu.solve(&rhs);
        CubicSpline { x, y, m }
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.clamp(1, self.x.len() - 1) - 1,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.m[i] + b * self.m[i + 1]
    }
}

/// Bracketed root finding: bisection with a secant acceleration step.
pub fn find_root<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    ftol: f64,
) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(HsError::NoSignChange { lo, hi, flo: fa, fhi: fb });
    }
    for _ in 0..200 {
        // secant candidate, clipped to the bracket interior
        let mut m = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        if !m.is_finite() || m <= a.min(b) || m >= a.max(b) {
            m = mid;
        }
        // alternate with bisection to guarantee bracket shrinkage
        if (b - a).abs() < 4.0 * xtol {
            m = mid;
        }
        let fm = f(m);
        if fm.abs() <= ftol || (b - a).abs() <= xtol {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tanh_sinh_smooth_and_singular() {
        let r = tanh_sinh(|x| x * x, 0.0, 1.0, 1e-13);
        assert_relative_eq!(r.value, 1.0 / 3.0, epsilon = 1e-12);
        // inverse square root singularity at the left endpoint
        let r = tanh_sinh(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-13);
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-11);
        // log singularity
        let r = tanh_sinh(|x| -x.ln(), 0.0, 1.0, 1e-13);
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn real_line_gaussian() {
        let r = trapezoid_real_line(|t| (-t * t).exp(), 1e-13);
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn gauss_legendre_degree_exactness() {
        let (xs, ws) = gauss_legendre(8);
        // exact for polynomials of degree <= 15
        for p in 0..=15 {
            let num: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-13, "degree {p}: {num} vs {exact}");
        }
    }

    #[test]
    fn sphere_rule_total_mass() {
        for n in 2..=7 {
            let rule = SphereRule::new(n, 16, 32);
            let total: f64 = rule.weights.iter().sum();
            assert_relative_eq!(total, unit_sphere_volume(n), epsilon = 1e-11);
        }
    }

    #[test]
    fn unit_sphere_volumes_match_known_values() {
        let pi = std::f64::consts::PI;
        assert_relative_eq!(unit_sphere_volume(2), 2.0 * pi, epsilon = 1e-15);
        assert_relative_eq!(unit_sphere_volume(3), 4.0 * pi, epsilon = 1e-15);
        assert_relative_eq!(unit_sphere_volume(4), 2.0 * pi * pi, epsilon = 1e-15);
        assert_relative_eq!(unit_sphere_volume(5), 8.0 * pi * pi / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn tridiagonal_pivoting_solves_indefinite_system() {
        // diag intentionally tiny at one node to force pivoting
        let n = 50;
        let sub = vec![1.0; n - 1];
        let mut diag = vec![3.0; n];
        diag[20] = 1e-14;
        let sup = vec![1.2; n - 1];
        let lu = TridiagLu::factor(&sub, &diag, &sup).unwrap();
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        // rhs = A x
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = diag[i] * xs[i];
            if i > 0 {
                rhs[i] += sub[i - 1] * xs[i - 1];
            }
            if i + 1 < n {
                rhs[i] += sup[i] * xs[i + 1];
            }
        }
        let sol = lu.solve(&rhs);
        for (a, b) in sol.iter().zip(xs.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn polyfit_recovers_exact_quadratic() {
        let xs: Vec<f64> = (0..20).map(|i| 1e-3 + i as f64 * 5e-3).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.25 - 0.8 * x + 3.0 * x * x).collect();
        let c = polyfit(&xs, &ys, 2).unwrap();
        assert_relative_eq!(c[0], 0.25, epsilon = 1e-10);
        assert_relative_eq!(c[1], -0.8, epsilon = 1e-8);
        assert_relative_eq!(c[2], 3.0, epsilon = 1e-6);
    }

    #[test]
    fn root_finder_crosses_zero() {
        let r = find_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12, 0.0).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), epsilon = 1e-10);
    }
}
