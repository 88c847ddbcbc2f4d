//! Self-similar blow-up profiles φ_β.
//!
//! φ_β solves `(βz + ∫₀^z φ) φ' − φ² + φ = 0`, `φ(0) = 1`, and is computed
//! through the parametric representation
//!
//! ```text
//! z(ξ) = (β+1) ∫₀^ξ u^β/(1+u) du,   φ = 1/(1+ξ),   ∫₀^z φ = (β+1) ∫₀^ξ u^β/(1+u)² du
//! ```
//!
//! For β = 0 this is `φ = e^{-z}`.

use crate::error::{Error, Result};
use crate::par;
use crate::quad;

/// Parameter value where the power series hands over to quadrature.
const SERIES_SPLIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    beta: f64,
    quad_tol: f64,
    invert_tol: f64,
    xi_max: f64,
    z_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub z: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub psi: f64,
    pub residual: f64,
}

impl ProfileSpec {
    pub fn new(beta: f64) -> Result<Self> {
        Self::with_tolerances(beta, 1e-13, 1e-13, 1e12)
    }

    pub fn with_tolerances(beta: f64, quad_tol: f64, invert_tol: f64, xi_max: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::constraint("beta ≥ 0", format!("got beta = {beta}")));
        }
        for (name, v) in [("quad_tol > 0", quad_tol), ("invert_tol > 0", invert_tol)] {
            if !(v > 0.0) {
                return Err(Error::constraint(name, format!("got {v}")));
            }
        }
        if !(xi_max > 1.0 && xi_max.is_finite()) {
            return Err(Error::constraint("xi_max > 1", format!("got {xi_max}")));
        }
        let mut spec = Self { beta, quad_tol, invert_tol, xi_max, z_max: f64::INFINITY };
        if beta > 0.0 {
            spec.z_max = spec.z_of_xi(xi_max)?;
        }
        Ok(spec)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn invert_tol(&self) -> f64 {
        self.invert_tol
    }

    /// Largest parameter value ξ used before switching to the asymptotic tail.
    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    fn check_z(&self, z: f64) -> Result<()> {
        if z >= 0.0 && z.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("profile argument z = {z} must be finite and ≥ 0")))
        }
    }

    /// Largest z reachable without the tail asymptotics.
    pub fn z_max(&self) -> Result<f64> {
        Ok(self.z_max)
    }

    pub fn z_of_xi(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(Error::Domain(format!("ξ = {xi} must be finite and ≥ 0")));
        }
        if self.beta == 0.0 {
            return Ok(xi.ln_1p());
        }
        Ok((self.beta + 1.0) * moment(self.beta, 1, xi, self.quad_tol)?)
    }

    pub fn xi_of_z(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        if z == 0.0 {
            return Ok(0.0);
        }
        let b = self.beta;
        if b == 0.0 {
            let xi = z.exp_m1();
            if xi > self.xi_max {
                return Err(Error::Range(format!("z = {z} beyond z(xi_max)")));
            }
            return Ok(xi);
        }
        let zmax = self.z_max()?;
        if z > zmax {
            return Err(Error::Range(format!("z = {z} beyond z(xi_max) = {zmax:.6e}")));
        }
        let tol = self.invert_tol * z;
        let guess = if z < 1.0 {
            z.powf(1.0 / (b + 1.0))
        } else {
            (b * z / (b + 1.0)).powf(1.0 / b).max(1.0)
        }
        .min(self.xi_max);

        let mut lo = 0.0;
        let mut hi = guess;
        while self.z_of_xi(hi)? < z {
            lo = hi;
            if hi >= self.xi_max {
                return Err(Error::Range(format!("z = {z} not bracketed below xi_max")));
            }
            hi = (2.0 * hi).min(self.xi_max);
        }
        let mut xi = guess.clamp(lo, hi);
        for _ in 0..200 {
            let f = self.z_of_xi(xi)? - z;
            if f.abs() <= tol {
                return Ok(xi);
            }
            if f > 0.0 {
                hi = xi;
            } else {
                lo = xi;
            }
            let dz = (b + 1.0) * xi.powf(b) / (1.0 + xi);
            let mut next = xi - f / dz;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (hi - lo) <= 4.0 * f64::EPSILON * hi || next == xi {
                return Ok(next);
            }
            xi = next;
        }
        Err(Error::Precision(format!("inversion of z(ξ) = {z} did not converge")))
    }

    pub fn eval_phi(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        if self.beta == 0.0 {
            return Ok((-z).exp());
        }
        if z > self.z_max()? {
            return Ok(self.tail(z));
        }
        Ok(1.0 / (1.0 + self.xi_of_z(z)?))
    }

    pub fn eval_phi_prime(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        let b = self.beta;
        if b == 0.0 {
            return Ok(-(-z).exp());
        }
        if z == 0.0 {
            return Err(Error::Domain("φ' is singular at z = 0 for β > 0".into()));
        }
        if z > self.z_max()? {
            return Ok(-self.tail(z) / (b * z));
        }
        let xi = self.xi_of_z(z)?;
        Ok(-xi.powf(-b) / ((b + 1.0) * (1.0 + xi)))
    }

    /// `∫₀^z φ`.
    pub fn antideriv_phi(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        let b = self.beta;
        if b == 0.0 {
            return Ok(-(-z).exp_m1());
        }
        let zmax = self.z_max()?;
        if z > zmax {
            let d = tail_constant_closed_form(b);
            let e = 1.0 - 1.0 / b;
            let base = self.antideriv_phi(zmax)?;
            let extra = if (e).abs() < 1e-14 {
                d * (z / zmax).ln()
            } else {
                d * (z.powf(e) - zmax.powf(e)) / e
            };
            return Ok(base + extra);
        }
        let xi = self.xi_of_z(z)?;
        Ok((b + 1.0) * moment(b, 2, xi, self.quad_tol)?)
    }

    pub fn profile_residual(&self, z: f64) -> Result<f64> {
        Ok(self.point(z)?.residual)
    }

    /// All profile quantities at `z` from a single inversion.
    pub fn point(&self, z: f64) -> Result<ProfilePoint> {
        self.check_z(z)?;
        let b = self.beta;
        if b == 0.0 {
            let phi = (-z).exp();
            let psi = -(-z).exp_m1();
            let dphi = -phi;
            return Ok(ProfilePoint { z, phi, phi_prime: dphi, psi, residual: psi * dphi - phi * phi + phi });
        }
        if z == 0.0 || z > self.z_max()? {
            let phi = self.eval_phi(z)?;
            let psi = self.antideriv_phi(z)?;
            let dphi = if z == 0.0 { f64::NEG_INFINITY } else { self.eval_phi_prime(z)? };
            let residual = if z == 0.0 { 0.0 } else { (b * z + psi) * dphi - phi * phi + phi };
            return Ok(ProfilePoint { z, phi, phi_prime: dphi, psi, residual });
        }
        let xi = self.xi_of_z(z)?;
        let phi = 1.0 / (1.0 + xi);
        let dphi = -xi.powf(-b) / ((b + 1.0) * (1.0 + xi));
        let psi = (b + 1.0) * moment(b, 2, xi, self.quad_tol)?;
        let residual = (b * z + psi) * dphi - phi * phi + phi;
        Ok(ProfilePoint { z, phi, phi_prime: dphi, psi, residual })
    }

    fn tail(&self, z: f64) -> f64 {
        tail_constant_closed_form(self.beta) * z.powf(-1.0 / self.beta)
    }

    /// φ at many points; parallel when the `parallel` feature is on.
    pub fn eval_phi_batch(&self, zs: &[f64]) -> Result<Vec<f64>> {
        par::try_map(zs, |&z| self.eval_phi(z))
    }

    pub fn eval_phi_batch_seq(&self, zs: &[f64]) -> Result<Vec<f64>> {
        par::try_map_seq(zs, |&z| self.eval_phi(z))
    }

    pub fn point_batch(&self, zs: &[f64]) -> Result<Vec<ProfilePoint>> {
        par::try_map(zs, |&z| self.point(z))
    }
}

/// The rescaled profile `φ_β(z/ν̃)`, which solves the same equation.
#[derive(Debug, Clone, Copy)]
pub struct ScaledProfile {
    pub spec: ProfileSpec,
    pub nu_tilde: f64,
}

impl ScaledProfile {
    pub fn new(spec: ProfileSpec, nu_tilde: f64) -> Result<Self> {
        if !(nu_tilde > 0.0 && nu_tilde.is_finite()) {
            return Err(Error::constraint("nu_tilde > 0", format!("got {nu_tilde}")));
        }
        Ok(Self { spec, nu_tilde })
    }

    pub fn point(&self, z: f64) -> Result<ProfilePoint> {
        let p = self.spec.point(z / self.nu_tilde)?;
        let b = self.spec.beta;
        let phi = p.phi;
        let dphi = p.phi_prime / self.nu_tilde;
        let psi = self.nu_tilde * p.psi;
        let residual = if z == 0.0 { 0.0 } else { (b * z + psi) * dphi - phi * phi + phi };
        Ok(ProfilePoint { z, phi, phi_prime: dphi, psi, residual })
    }
}

/// `∫₀^ξ u^β (1+u)^{-m} du` for `m ∈ {1, 2, 3}`.
pub(crate) fn moment(beta: f64, m: u32, xi: f64, tol: f64) -> Result<f64> {
    if xi <= SERIES_SPLIT {
        return Ok(moment_series(beta, m, xi));
    }
    let head = moment_series(beta, m, SERIES_SPLIT);
    // Substituting u = e^t keeps the integrand smooth over many decades.
    let f = |t: f64| {
        let u = t.exp();
        ((beta + 1.0) * t).exp() / (1.0 + u).powi(m as i32)
    };
    let q = quad::integrate(f, SERIES_SPLIT.ln(), xi.ln(), tol * 0.1, tol * 0.1)?;
    Ok(head + q.value)
}

fn moment_series(beta: f64, m: u32, xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    // (1+u)^{-m} = Σ (-1)^j C(j+m-1, m-1) u^j
    let mut sum = 0.0;
    let mut pw = 1.0;
    for j in 0..400u32 {
        let c = match m {
            1 => 1.0,
            2 => (j + 1) as f64,
            _ => ((j + 1) * (j + 2)) as f64 * 0.5,
        };
        let term = c * pw / (beta + j as f64 + 1.0);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        pw *= xi;
    }
    xi.powf(beta + 1.0) * sum
}

/// The normalisation constant of the parametric map, `1/∫₀¹ u^β/(1+u) du`.
pub fn cbeta_parametric(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("cbeta_parametric needs β > 0, got {beta}")));
    }
    Ok(1.0 / moment(beta, 1, 1.0, 1e-15)?)
}

/// `C_β = 2 ∫₀^∞ φ_β²`.
pub fn pressure_constant(beta: f64) -> Result<f64> {
    pressure_constant_with(&ProfileSpec::new(beta)?)
}

pub fn pressure_constant_with(spec: &ProfileSpec) -> Result<f64> {
    let b = spec.beta;
    if b >= 2.0 {
        return Err(Error::Divergence(format!("∫φ_β² diverges for β = {b} ≥ 2")));
    }
    let xm = spec.xi_max;
    // dz = (β+1) u^β/(1+u) du and φ² = (1+u)^{-2}
    let body = (b + 1.0) * moment(b, 3, xm, spec.quad_tol)?;
    let tail = if b == 0.0 {
        0.5 / ((1.0 + xm) * (1.0 + xm))
    } else {
        let zm = spec.z_of_xi(xm)?;
        let d = tail_constant_closed_form(b);
        d * d * zm.powf(1.0 - 2.0 / b) / (2.0 / b - 1.0)
    };
    Ok(2.0 * (body + tail))
}

/// `d_β = ((β+1)/β)^{1/β}`, the coefficient in `φ_β(z) ~ d_β z^{-1/β}`.
pub fn tail_constant_closed_form(beta: f64) -> f64 {
    ((beta + 1.0) / beta).powf(1.0 / beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    /// Relative spread of the last three accelerated estimates.
    pub spread: f64,
    /// `(ξ, z, z^{1/β} φ, accelerated estimate)` along the sample sequence.
    pub samples: Vec<(f64, f64, f64, f64)>,
}

/// Numerical estimate of `lim z^{1/β} φ_β(z)`.
///
/// Samples `z^{1/β} φ` on ξ = 10^{k/4} and accelerates with Wynn's ε
/// algorithm; the estimate is accepted once three estimates a decade apart
/// agree to 1e-3.
pub fn tail_constant(beta: f64) -> Result<TailEstimate> {
    tail_constant_with(&ProfileSpec::new(beta)?)
}

pub fn tail_constant_with(spec: &ProfileSpec) -> Result<TailEstimate> {
    let b = spec.beta;
    if !(b > 0.0) {
        return Err(Error::Domain(format!("tail constant needs β > 0, got {b}")));
    }
    let mut raw = Vec::new();
    let mut samples: Vec<(f64, f64, f64, f64)> = Vec::new();
    for k in 0.. {
        let xi = 10f64.powf(k as f64 / 4.0);
        if xi > spec.xi_max {
            break;
        }
        let z = spec.z_of_xi(xi)?;
        let q = (z.ln() / b - xi.ln_1p()).exp();
        raw.push(q);
        let lo = raw.len().saturating_sub(9);
        let acc = wynn_epsilon(&raw[lo..]);
        samples.push((xi, z, q, acc));
        if k >= 12 {
            let n = samples.len();
            let three = [samples[n - 9].3, samples[n - 5].3, samples[n - 1].3];
            let spread = relative_spread(&three);
            if spread < 1e-3 {
                return Ok(TailEstimate { value: samples[n - 1].3, spread, samples });
            }
        }
    }
    Err(Error::Precision(format!(
        "tail constant for β = {b} not converged below xi_max = {:e}",
        spec.xi_max
    )))
}

pub(crate) fn relative_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max - min) / mean.abs()
}

/// Wynn ε acceleration; returns the deepest even-column entry.
fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    if n < 3 {
        return *s.last().expect("non-empty");
    }
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = *s.last().unwrap();
    for col in 1..n {
        let len = cur.len() - 1;
        let mut next = Vec::with_capacity(len);
        for i in 0..len {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 || !d.is_finite() {
                return best;
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        if col % 2 == 0 {
            match cur.last() {
                Some(v) if v.is_finite() => best = *v,
                _ => return best,
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const BETAS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

    #[test]
    fn beta_one_closed_forms() {
        let s = ProfileSpec::new(1.0).unwrap();
        // z(ξ) = 2(ξ − ln(1+ξ))
        for xi in [0.1, 0.5, 1.0, 7.0, 1e3] {
            let exact = 2.0 * (xi - f64::ln_1p(xi));
            assert_relative_eq!(s.z_of_xi(xi).unwrap(), exact, max_relative = 1e-12);
        }
        assert_relative_eq!(cbeta_parametric(1.0).unwrap(), 1.0 / (1.0 - 2f64.ln()), max_relative = 1e-13);
    }

    #[test]
    fn series_and_quadrature_agree_at_split() {
        for b in BETAS {
            for m in 1..=3 {
                let x = SERIES_SPLIT;
                let s = moment_series(b, m, x);
                let f = |u: f64| u.powf(b) / (1.0 + u).powi(m as i32);
                let q = quad::integrate(f, 0.0, x, 1e-15, 1e-14).unwrap().value;
                assert_relative_eq!(s, q, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn beta_zero_is_exponential() {
        let s = ProfileSpec::new(0.0).unwrap();
        for z in [0.0, 0.3, 2.0, 10.0] {
            assert_relative_eq!(s.eval_phi(z).unwrap(), (-z).exp(), max_relative = 1e-15);
            assert!(s.profile_residual(z).unwrap().abs() < 1e-15);
        }
        // the parametric map reproduces ln(1+ξ)
        assert_relative_eq!(s.z_of_xi(3.0).unwrap(), 4f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(moment(0.0, 1, 3.0, 1e-14).unwrap(), 4f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn residual_is_small_on_log_grid() {
        for b in BETAS {
            let s = ProfileSpec::new(b).unwrap();
            for i in 0..50 {
                let z = 10f64.powf(-3.0 + i as f64 * (50f64.log10() + 3.0) / 49.0);
                let r = s.profile_residual(z).unwrap();
                assert!(r.abs() < 1e-8, "β={b} z={z} residual {r}");
            }
        }
    }

    #[test]
    fn parametric_identity() {
        // βz + ψ = (β+1) ξ^{β+1}/(1+ξ)
        for b in BETAS {
            let s = ProfileSpec::new(b).unwrap();
            for xi in [1e-3, 0.2, 0.9, 5.0, 1e4] {
                let z = s.z_of_xi(xi).unwrap();
                let psi = (b + 1.0) * moment(b, 2, xi, 1e-14).unwrap();
                let rhs = (b + 1.0) * xi.powf(b + 1.0) / (1.0 + xi);
                assert_relative_eq!(b * z + psi, rhs, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn small_z_expansion_has_exact_second_coefficient() {
        // ξ = x + x²/(β+2) + O(x³) with x = z^{1/(β+1)}, so
        // (1−φ)/x = 1 − (β+1)/(β+2) x + O(x²)
        for b in BETAS {
            let s = ProfileSpec::new(b).unwrap();
            for z in [1e-4f64, 1e-6] {
                let x = z.powf(1.0 / (b + 1.0));
                let xi = s.xi_of_z(z).unwrap();
                let ratio = xi / (1.0 + xi) / x;
                let predicted = 1.0 - (b + 1.0) / (b + 2.0) * x;
                let err = (ratio - predicted).abs();
                assert!(err < 2.0 * x * x + 1e-12, "β={b} z={z} err={err:e} x²={:e}", x * x);
            }
        }
    }

    #[test]
    fn tail_constant_matches_closed_form() {
        for b in [0.5, 1.0, 2.0] {
            let t = tail_constant(b).unwrap();
            assert_relative_eq!(t.value, tail_constant_closed_form(b), max_relative = 1e-4);
        }
        assert_relative_eq!(tail_constant_closed_form(1.0), 2.0);
        assert_relative_eq!(tail_constant_closed_form(0.5), 9.0, max_relative = 1e-14);
    }

    #[test]
    fn pressure_constant_values() {
        assert_relative_eq!(pressure_constant(0.0).unwrap(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(pressure_constant(1.0).unwrap(), 2.0, max_relative = 1e-8);
        assert!(matches!(pressure_constant(2.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn domain_errors() {
        let s = ProfileSpec::new(1.0).unwrap();
        assert!(matches!(s.eval_phi(-1.0), Err(Error::Domain(_))));
        assert!(matches!(s.eval_phi_prime(0.0), Err(Error::Domain(_))));
        assert!(matches!(s.xi_of_z(1e300), Err(Error::Range(_))));
        assert!(matches!(cbeta_parametric(0.0), Err(Error::Domain(_))));
        assert!(ProfileSpec::new(-0.1).is_err());
    }

    #[test]
    fn scaled_profile_solves_same_equation() {
        let sp = ScaledProfile::new(ProfileSpec::new(0.5).unwrap(), 0.05).unwrap();
        for z in [1e-4, 0.01, 0.3] {
            assert!(sp.point(z).unwrap().residual.abs() < 1e-8);
        }
    }
}
