//! Closed-form bump functions of the semi-plug with exact first and second
//! derivatives, carried as 2-jets.

use std::ops::{Add, Mul, Neg, Sub};

/// Value with first and second derivative in one variable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet { v: 0.0, d: 0.0, dd: 0.0 };
    pub const ONE: Jet = Jet { v: 1.0, d: 0.0, dd: 0.0 };

    pub fn constant(v: f64) -> Self {
        Jet { v, d: 0.0, dd: 0.0 }
    }

    /// The identity jet at x.
    pub fn var(x: f64) -> Self {
        Jet { v: x, d: 1.0, dd: 0.0 }
    }

    /// (x − origin)/scale as a jet in x.
    pub fn affine(x: f64, origin: f64, scale: f64) -> Self {
        Jet { v: (x - origin) / scale, d: 1.0 / scale, dd: 0.0 }
    }

    /// f ∘ self, given f, f′, f″ at self.v.
    pub fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Jet { v: f, d: f1 * self.d, dd: f2 * self.d * self.d + f1 * self.dd }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet { v: c * self.v, d: c * self.d, dd: c * self.dd }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d: self.d + o.d, dd: self.dd + o.dd }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d: self.d - o.d, dd: self.dd - o.dd }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet { v: self.v * o.v, d: self.d * o.v + self.v * o.d, dd: self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd }
    }
}

/// Steepness of the logistic step; keeps its largest slope just below 1.5.
pub const STEP_BETA: f64 = 0.6;
/// Exponent beyond which logistic tails are treated as exact 0 or 1.
const TAIL: f64 = 700.0;

/// Smooth monotone step: 0 for u ≤ 0, 1 for u ≥ 1, σ(β(1/(1−u) − 1/u))
/// in between, with S(u) + S(1−u) = 1.
pub fn step(u: Jet) -> Jet {
    let x = u.v;
    if x <= 0.0 {
        return Jet::ZERO;
    }
    if x >= 1.0 {
        return Jet::ONE;
    }
    let y = STEP_BETA * (1.0 / (1.0 - x) - 1.0 / x);
    if y < -TAIL {
        return Jet::ZERO;
    }
    if y > TAIL {
        return Jet::ONE;
    }
    let y1 = STEP_BETA * (1.0 / ((1.0 - x) * (1.0 - x)) + 1.0 / (x * x));
    let y2 = STEP_BETA * (2.0 / (1.0 - x).powi(3) - 2.0 / x.powi(3));
    // σ(y) and 1 − σ(y) = σ(−y), each without cancellation
    let (s, sc) = if y >= 0.0 {
        let e = (-y).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = y.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    let s1 = s * sc;
    let s2 = s1 * (sc - s);
    // σ(y(u)) as a function of u, then through u's own jet
    let f1 = s1 * y1;
    let f2 = s2 * y1 * y1 + s1 * y2;
    u.chain(s, f1, f2)
}

/// Even bell exp(−v²/(1−v²)) on |v| < 1, zero outside; equals 1 only at 0
/// and falls off quadratically there.
pub fn bell(v: Jet) -> Jet {
    let x = v.v;
    if x.abs() >= 1.0 {
        return Jet::ZERO;
    }
    let m = 1.0 - x * x;
    let e = x * x / m;
    if e > TAIL {
        return Jet::ZERO;
    }
    let e1 = 2.0 * x / (m * m);
    let e2 = (2.0 + 6.0 * x * x) / (m * m * m);
    let b = (-e).exp();
    v.chain(b, -e1 * b, (e1 * e1 - e2) * b)
}

/// Plateau bump: 1 on [a, b], 0 outside (a − r, b + r).
pub fn plateau(x: Jet, a: f64, b: f64, r: f64) -> Jet {
    let up = step(Jet { v: (x.v - (a - r)) / r, d: x.d / r, dd: x.dd / r });
    let down = step(Jet { v: ((b + r) - x.v) / r, d: -x.d / r, dd: -x.dd / r });
    up * down
}

/// Fraction of ε (in units of x/ε) covered by the slope spike of 𝒳 around
/// x = ε; the spike has half-width ε·SPIKE_WIDTH·ε in x.
pub const SPIKE_WIDTH: f64 = 0.25;
/// cut falls from 1−ρ to 0 over [CUT_ON·ε², CUT_OFF·ε²].
pub const CUT_ON: f64 = 0.02;
pub const CUT_OFF: f64 = 0.48;

/// The bump functions of the plug for one ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bumps {
    pub epsilon: f64,
}

/// A function of (t, x) with its first and second partial derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Partials {
    pub v: f64,
    pub t: f64,
    pub x: f64,
    pub tt: f64,
    pub tx: f64,
    pub xx: f64,
}

impl Partials {
    /// f(t)·g(x).
    pub fn product(f: Jet, g: Jet) -> Self {
        Partials { v: f.v * g.v, t: f.d * g.v, x: f.v * g.d, tt: f.dd * g.v, tx: f.d * g.d, xx: f.v * g.dd }
    }
}

impl Bumps {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }

    /// φ(t): 1 on [−ε, ε], supported in [−2ε, 2ε].
    pub fn phi(&self, t: f64) -> Jet {
        let e = self.epsilon;
        plateau(Jet::var(t), -e, e, e)
    }

    /// Window of ψ: 1 on [ε/2, 3ε/2], supported in [ε/4, 7ε/4].
    pub fn window(&self, x: f64) -> Jet {
        let e = self.epsilon;
        plateau(Jet::var(x), 0.5 * e, 1.5 * e, 0.25 * e)
    }

    /// ψ(x) = (x − 7ε/4)·window(x): nonpositive, slope exactly 1 on the
    /// plateau of the window.
    pub fn psi(&self, x: f64) -> Jet {
        let shift = Jet { v: x - 1.75 * self.epsilon, d: 1.0, dd: 0.0 };
        shift * self.window(x)
    }

    /// 𝒜(t, x) = φ(t)ψ(x).
    pub fn a(&self, t: f64, x: f64) -> Partials {
        Partials::product(self.phi(t), self.psi(x))
    }

    /// 𝒯(t) = bell(t/ε).
    pub fn trans(&self, t: f64) -> Jet {
        bell(Jet::affine(t, 0.0, self.epsilon))
    }

    /// 𝒳(x) − x = ε²·(plateau envelope + odd spike) in u = (x − ε)/ε.
    pub fn excess(&self, x: f64) -> Jet {
        let e = self.epsilon;
        let w = SPIKE_WIDTH * e;
        let ramp = 0.5 - w;
        let u = Jet::affine(x, e, e);
        let envelope = plateau(u, -w, w, ramp);
        // spike −(w/ε)·τ(u/w), τ(v) = v·bell(v): slope −1/ε at u = 0 only
        let v = Jet { v: u.v / w, d: u.d / w, dd: u.dd / w };
        let spike = (v * bell(v)).scale(-w / e);
        (envelope + spike).scale(e * e)
    }

    /// 𝒳(x) = x + excess(x).
    pub fn xfun(&self, x: f64) -> Jet {
        Jet::var(x) + self.excess(x)
    }

    /// ℬ(t, x) − x = 𝒯(t)·(𝒳(x) − x).
    pub fn b_excess(&self, t: f64, x: f64) -> Partials {
        Partials::product(self.trans(t), self.excess(x))
    }

    /// ℬ(t, x) = (1 − 𝒯(t))x + 𝒯(t)𝒳(x).
    pub fn b(&self, t: f64, x: f64) -> Partials {
        let mut p = self.b_excess(t, x);
        p.v += x;
        p.x += 1.0;
        p
    }

    /// cut(ρ) = (1 − ρ)(1 − S((ρ − CUT_ON ε²)/((CUT_OFF − CUT_ON) ε²))).
    pub fn cut(&self, rho: f64) -> Jet {
        let e2 = self.epsilon * self.epsilon;
        // 1 − S(u) = S(1 − u), which keeps the tail accurate
        let fall = step(Jet::ONE - Jet::affine(rho, CUT_ON * e2, (CUT_OFF - CUT_ON) * e2));
        Jet { v: 1.0 - rho, d: -1.0, dd: 0.0 } * fall
    }
}
