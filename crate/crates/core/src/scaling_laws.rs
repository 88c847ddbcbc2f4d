//! Blow-up time and scale-law fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupFit {
    #[serde(rename = "T")]
    pub t_blowup: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// RMS residual of `1/sup` about the fitted line.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LawMode {
    Power,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleLawFit {
    pub mode: LawMode,
    /// β̂ (power) or the tail mean of `ν|log(T−t)|` (log).
    pub exponent_or_limit: f64,
    /// ν̃_∞ (power mode only).
    pub nu_inf: f64,
    pub residual: f64,
    /// `(T−t, ν|log(T−t)|)` in log mode.
    pub trend: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayLaw {
    Exp,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r2, rms residual)`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Contract(format!("regression needs ≥ 2 paired samples, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::FitRejected("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - ssr / syy).clamp(0.0, 1.0) };
    Ok((slope, intercept, r2, (ssr / n as f64).sqrt()))
}

fn tail_len(n: usize, frac: f64) -> usize {
    ((n as f64 * frac).ceil() as usize).clamp(3.min(n), n)
}

/// Fits `1/sup = A + B t` on the last `window_frac` of samples; `T = −A/B`.
pub fn fit_blowup_time(ts: &[f64], sups: &[f64], window_frac: f64) -> Result<BlowupFit> {
    if ts.len() != sups.len() || ts.len() < 3 {
        return Err(Error::Contract("need ≥ 3 paired (t, sup) samples".into()));
    }
    if !(window_frac > 0.0 && window_frac <= 1.0) {
        return Err(Error::constraint("0 < window_frac ≤ 1", format!("got {window_frac}")));
    }
    if sups.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Contract("sup norms must be positive".into()));
    }
    let k = tail_len(ts.len(), window_frac);
    let (t, s) = (&ts[ts.len() - k..], &sups[sups.len() - k..]);
    if s[k - 1] <= s[0] {
        return Err(Error::FitRejected("sup norm does not grow over the tail window".into()));
    }
    let y: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    let (slope, intercept, r2, residual) = linear_regression(t, &y)?;
    if !(slope < 0.0) {
        return Err(Error::FitRejected(format!("1/sup has non-negative trend {slope:e}")));
    }
    let t_blowup = -intercept / slope;
    let window = (t[0], t[k - 1]);
    if !(t_blowup > window.1) {
        return Err(Error::FitRejected(format!("fitted T = {t_blowup} precedes the data")));
    }
    Ok(BlowupFit { t_blowup, slope, intercept, r2, residual, window, samples: k })
}

/// `ν` against `T − t`, in power mode (`ν = ν̃_∞ (T−t)^β`) or log mode (`ν ~ 1/|log(T−t)|`).
pub fn fit_nu_law(ts: &[f64], nus: &[f64], t_blowup: f64, mode: LawMode) -> Result<ScaleLawFit> {
    fit_nu_law_tail(ts, nus, t_blowup, mode, 0.25)
}

pub fn fit_nu_law_tail(ts: &[f64], nus: &[f64], t_blowup: f64, mode: LawMode, tail_frac: f64) -> Result<ScaleLawFit> {
    if ts.len() != nus.len() || ts.len() < 2 {
        return Err(Error::Contract("need ≥ 2 paired (t, ν) samples".into()));
    }
    let tmax = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(t_blowup > tmax) {
        return Err(Error::Contract(format!("T = {t_blowup} must exceed every sample time ({tmax})")));
    }
    if nus.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Contract("ν samples must be positive".into()));
    }
    match mode {
        LawMode::Power => {
            let x: Vec<f64> = ts.iter().map(|t| (t_blowup - t).ln()).collect();
            let y: Vec<f64> = nus.iter().map(|v| v.ln()).collect();
            let (slope, intercept, _, residual) = linear_regression(&x, &y)?;
            Ok(ScaleLawFit { mode, exponent_or_limit: slope, nu_inf: intercept.exp(), residual, trend: Vec::new() })
        }
        LawMode::Log => {
            let trend: Vec<(f64, f64)> =
                ts.iter().zip(nus).map(|(t, v)| (t_blowup - t, v * (t_blowup - t).ln().abs())).collect();
            let k = tail_len(trend.len(), tail_frac).max(1);
            let tail = &trend[trend.len() - k..];
            let mean = tail.iter().map(|p| p.1).sum::<f64>() / k as f64;
            let var = tail.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / k as f64;
            Ok(ScaleLawFit { mode, exponent_or_limit: mean, nu_inf: f64::NAN, residual: var.sqrt(), trend })
        }
    }
}

/// Slope of `log E` against `s` (exp law) or `log s` (power law).
pub fn fit_remainder_decay(ss: &[f64], energies: &[f64], law: DecayLaw) -> Result<DecayFit> {
    if ss.len() != energies.len() || ss.len() < 2 {
        return Err(Error::Contract("need ≥ 2 paired (s, E) samples".into()));
    }
    if energies.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Contract("energies must be positive".into()));
    }
    if ss.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Contract("self-similar times must increase".into()));
    }
    let x: Vec<f64> = match law {
        DecayLaw::Exp => ss.to_vec(),
        DecayLaw::Power => {
            if ss[0] <= 0.0 {
                return Err(Error::Contract("power-law decay needs s > 0".into()));
            }
            ss.iter().map(|s| s.ln()).collect()
        }
    };
    let y: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
    let (slope, intercept, _, residual) = linear_regression(&x, &y)?;
    Ok(DecayFit { slope, intercept, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseStudy {
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub max_rel_error: f64,
    pub rejected: usize,
}

/// Refits the blow-up time under multiplicative Gaussian noise.
///
/// Draw `i` uses its own ChaCha stream seeded from `(seed, i)`, so results do
/// not depend on scheduling.
pub fn noisy_blowup_study(
    ts: &[f64],
    sups: &[f64],
    rel_noise: f64,
    draws: usize,
    seed: u64,
    window_frac: f64,
    t_true: f64,
) -> Result<NoiseStudy> {
    noise_study_with(ts, sups, rel_noise, draws, seed, window_frac, t_true, false)
}

pub fn noisy_blowup_study_seq(
    ts: &[f64],
    sups: &[f64],
    rel_noise: f64,
    draws: usize,
    seed: u64,
    window_frac: f64,
    t_true: f64,
) -> Result<NoiseStudy> {
    noise_study_with(ts, sups, rel_noise, draws, seed, window_frac, t_true, true)
}

#[allow(clippy::too_many_arguments)]
fn noise_study_with(
    ts: &[f64],
    sups: &[f64],
    rel_noise: f64,
    draws: usize,
    seed: u64,
    window_frac: f64,
    t_true: f64,
    sequential: bool,
) -> Result<NoiseStudy> {
    let normal = Normal::new(0.0, rel_noise).map_err(|e| Error::Domain(e.to_string()))?;
    let ids: Vec<u64> = (0..draws as u64).collect();
    let one = |&i: &u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let noisy: Vec<f64> = sups.iter().map(|s| s * (1.0 + normal.sample(&mut rng))).collect();
        fit_blowup_time(ts, &noisy, window_frac).map(|f| f.t_blowup).ok()
    };
    let out = if sequential { par::map_seq(&ids, one) } else { par::map(&ids, one) };
    let estimates: Vec<f64> = out.iter().flatten().copied().collect();
    if estimates.is_empty() {
        return Err(Error::FitRejected("every noisy draw was rejected".into()));
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let max_rel_error = estimates.iter().map(|t| (t - t_true).abs() / t_true.abs()).fold(0.0, f64::max);
    Ok(NoiseStudy { rejected: draws - estimates.len(), estimates, mean, max_rel_error })
}
