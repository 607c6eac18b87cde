//! Dormand–Prince 5(4) with step-size control on the error per unit time and
//! the standard fourth-order continuous extension.

use nalgebra::DVector;

use super::DynamicsError;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step together with its dense-output polynomial.
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rcont: [DVector<f64>; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at time `t` inside the step.
    pub fn at(&self, t: f64) -> DVector<f64> {
        let th = if self.h == 0.0 { 0.0 } else { (t - self.t0) / self.h };
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        r1 + (r2 + (r3 + (r4 + r5 * th1) * th) * th1) * th
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    /// Local error allowed per unit time.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { tol: 1e-10, max_steps: 5_000_000 }
    }
}

impl Integrator {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Integrate the autonomous system y' = rhs(y) from 0 to `t_end`.
    /// `project` is applied after every accepted step; `observer` sees every
    /// accepted step and may stop the integration early by returning false.
    pub fn solve<R, P, O>(
        &self,
        mut rhs: R,
        y0: &DVector<f64>,
        t_end: f64,
        mut project: P,
        mut observer: O,
    ) -> Result<DVector<f64>, DynamicsError>
    where
        R: FnMut(&DVector<f64>) -> Result<DVector<f64>, DynamicsError>,
        P: FnMut(&mut DVector<f64>) -> bool,
        O: FnMut(&DenseStep) -> bool,
    {
        if !t_end.is_finite() {
            return Err(DynamicsError::InvalidInput(format!("non-finite integration time {t_end}")));
        }
        let mut y = y0.clone();
        if t_end == 0.0 {
            return Ok(y);
        }
        let dir = t_end.signum();
        let span = t_end.abs();
        let mut t = 0.0_f64;
        let mut k1 = rhs(&y)?;
        let mut h = (0.01 * span).min(0.01 / (1.0 + k1.amax()));
        let mut steps = 0usize;
        loop {
            let remaining = span - t;
            if remaining <= 0.0 {
                break;
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = dir * h;
            let y2 = &y + &k1 * (hs * A21);
            let k2 = rhs(&y2)?;
            let y3 = &y + (&k1 * A31 + &k2 * A32) * hs;
            let k3 = rhs(&y3)?;
            let y4 = &y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * hs;
            let k4 = rhs(&y4)?;
            let y5 = &y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * hs;
            let k5 = rhs(&y5)?;
            let y6 = &y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * hs;
            let k6 = rhs(&y6)?;
            let ynew = &y + (&k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * hs;
            let k7 = rhs(&ynew)?;
            let err = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * hs;
            let mut acc = 0.0;
            for i in 0..y.len() {
                let sc = self.tol * h * (1.0 + y[i].abs().max(ynew[i].abs()));
                let r = err[i] / sc;
                acc += r * r;
            }
            let en = (acc / y.len() as f64).sqrt();
            if !en.is_finite() {
                h *= 0.2;
                if h < 1e-14 * (1.0 + t) {
                    return Err(DynamicsError::StepUnderflow { t: dir * t, h });
                }
                continue;
            }
            if en <= 1.0 {
                let ydiff = &ynew - &y;
                let bspl = &k1 * hs - &ydiff;
                let r4 = &ydiff - &k7 * hs - &bspl;
                let r5 = (&k1 * D1 + &k3 * D3 + &k4 * D4 + &k5 * D5 + &k6 * D6 + &k7 * D7) * hs;
                let t_new = if last { span } else { t + h };
                let step = DenseStep { t0: dir * t, h: dir * (t_new - t), rcont: [y.clone(), ydiff, bspl, r4, r5] };
                y = ynew;
                t = t_new;
                k1 = if project(&mut y) { rhs(&y)? } else { k7 };
                steps += 1;
                if !observer(&step) {
                    return Ok(y);
                }
                if last {
                    break;
                }
                if steps >= self.max_steps {
                    return Err(DynamicsError::MaxSteps { t: dir * t });
                }
            }
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.25)).clamp(0.2, 5.0) };
            h *= fac;
            if h < 1e-14 * (1.0 + t) {
                return Err(DynamicsError::StepUnderflow { t: dir * t, h });
            }
        }
        Ok(y)
    }
}
