//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` until the estimated error is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quad> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![Piece { a, b, value: v, error: e }];
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::Precision(format!("non-finite integrand on [{a}, {b}]")));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quad { value, error });
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Precision(format!(
                "quadrature on [{a}, {b}] stalled at error {error:.3e}"
            )));
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let p = pieces.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::Precision(format!("interval [{}, {}] cannot be split", p.a, p.b)));
        }
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        pieces.push(Piece { a: p.a, b: m, value: v1, error: e1 });
        pieces.push(Piece { a: m, b: p.b, value: v2, error: e2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert_relative_eq!(q.value, exact, max_relative = 1e-14);
    }

    #[test]
    fn peaked_integrand() {
        let q = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-13).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert_relative_eq!(q.value, exact, max_relative = 1e-11);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let f = |x: f64| x.exp();
        let a = integrate(f, 0.0, 1.0, 1e-14, 1e-14).unwrap().value;
        let b = integrate(f, 1.0, 0.0, 1e-14, 1e-14).unwrap().value;
        assert_relative_eq!(a, -b, max_relative = 1e-15);
    }
}
