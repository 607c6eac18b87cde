//! Small numerical building blocks shared by the other modules: smooth
//! steps and bumps, Gauss–Legendre quadrature, bracketing root finders.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("bisection interval [{lo}, {hi}] does not bracket a sign change (f(lo)={flo}, f(hi)={fhi})")]
    NotBracketed { lo: f64, hi: f64, flo: f64, fhi: f64 },
}

/// C^∞ step on [0,1], identically 0 for u ≤ 0 and 1 for u ≥ 1, flat to all
/// orders at both ends. `beta` controls how sharp the middle is: the slope at
/// u = 1/2 equals 2·beta.
pub fn smooth_step(beta: f64, u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let e = beta / u - beta / (1.0 - u);
        1.0 / (1.0 + e.exp())
    }
}

/// Derivative of [`smooth_step`] with respect to `u`.
pub fn smooth_step_d(beta: f64, u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let s = smooth_step(beta, u);
    if s == 0.0 || s == 1.0 {
        return 0.0;
    }
    let w = 1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u));
    s * (1.0 - s) * beta * w
}

/// Standard bump exp(1 − 1/(1−v²)) on (−1,1): even, peak value 1 only at 0,
/// supported in [−1,1].
pub fn bump(v: f64) -> f64 {
    let q = 1.0 - v * v;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

pub fn bump_d(v: f64) -> f64 {
    let q = 1.0 - v * v;
    if q <= 0.0 {
        0.0
    } else {
        bump(v) * (-2.0 * v / (q * q))
    }
}

/// Gauss–Legendre rule on [−1,1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Nodes and weights of the rule mapped to [a, b].
    pub fn points(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| (mid + half * x, w * half)).collect()
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + h * i as f64;
                self.integrate(&mut f, lo, lo + h)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Bisection for a sign change of `f` on [lo, hi]. Returns the midpoint of the
/// final bracket once its width is below `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64, NumericError> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(NumericError::NotBracketed { lo, hi, flo, fhi });
    }
    for _ in 0..400 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest `x` in [lo, hi] with `pred(x)` true, assuming `pred` holds on an
/// initial segment. Returns `None` when `pred(lo)` already fails.
pub fn bisect_predicate<F: FnMut(f64) -> bool>(mut pred: F, lo: f64, hi: f64, tol: f64) -> Option<f64> {
    if !pred(lo) {
        return None;
    }
    if pred(hi) {
        return Some(hi);
    }
    let (mut good, mut bad) = (lo, hi);
    while bad - good > tol {
        let mid = 0.5 * (good + bad);
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Reduce `x` into [0, period).
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Signed representative of `x` modulo `period` in [−period/2, period/2).
pub fn wrap_centered(x: f64, period: f64) -> f64 {
    let r = wrap(x + 0.5 * period, period) - 0.5 * period;
    if r.is_nan() {
        0.0
    } else {
        r
    }
}

/// ln(1 + e^x) without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Serde adapter for reals that may be infinite: non-finite values are
/// written as the strings "inf", "-inf" or "nan" instead of JSON null.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(|x| x.powi(14) + 3.0 * x.powi(3), -1.0, 2.0);
        let exact = (2f64.powi(15) + 1.0) / 15.0 + 0.75 * (16.0 - 1.0);
        assert_relative_eq!(v, exact, max_relative = 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_transcendental() {
        let gl = GaussLegendre::new(20);
        let v = gl.integrate_composite(|x| x.sin(), 0.0, std::f64::consts::PI, 4);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn smooth_step_symmetry_and_slope() {
        for beta in [0.5, 1.0, 2.0] {
            for i in 1..50 {
                let u = i as f64 / 50.0;
                let s = smooth_step(beta, u) + smooth_step(beta, 1.0 - u);
                assert_relative_eq!(s, 1.0, epsilon = 1e-14);
            }
            assert_relative_eq!(smooth_step_d(beta, 0.5), 2.0 * beta, max_relative = 1e-12);
            let h = 1e-6;
            let fd = (smooth_step(beta, 0.3 + h) - smooth_step(beta, 0.3 - h)) / (2.0 * h);
            assert_relative_eq!(smooth_step_d(beta, 0.3), fd, max_relative = 1e-7);
        }
        assert_eq!(smooth_step(1.0, 1e-300), 0.0);
        assert_eq!(smooth_step_d(1.0, 1e-300), 0.0);
    }

    #[test]
    fn bump_derivative_matches_differences() {
        let h = 1e-6;
        for v in [-0.7, -0.2, 0.0, 0.4, 0.9] {
            let fd = (bump(v + h) - bump(v - h)) / (2.0 * h);
            assert_relative_eq!(bump_d(v), fd, epsilon = 1e-8);
        }
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
    }

    #[test]
    fn bisection_finds_root_and_rejects_bad_bracket() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), epsilon = 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-14).is_err());
        let t = bisect_predicate(|x| x < 0.7, 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(t, 0.7, epsilon = 1e-11);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap(-0.25, 1.0), 0.75);
        assert_relative_eq!(wrap_centered(0.9, 1.0), -0.1, epsilon = 1e-15);
        assert_eq!(gcd(-12, 18), 6);
    }

    #[test]
    fn softplus_is_stable() {
        assert_relative_eq!(softplus(0.0), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(softplus(1e6), 1e6);
        assert!(softplus(-1e6) >= 0.0);
    }
}
