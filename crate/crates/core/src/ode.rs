//! Dormand–Prince 5(4) with step-size control and dense output.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options { rtol: 1e-10, atol: 1e-14, h0: None, max_steps: 1_000_000 }
    }
}

/// One accepted step with its continuous extension.
#[derive(Clone, Debug)]
struct Step {
    t0: f64,
    h: f64,
    rcont: [Vec<f64>; 5],
}

/// A dense solution on `[t_start, t_end]`.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    steps: Vec<Step>,
    pub rejected: usize,
}

impl OdeSolution {
    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("nonempty solution")
    }

    pub fn last(&self) -> &[f64] {
        self.y.last().expect("nonempty solution")
    }

    /// Dense output at any `t` inside the integration interval.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let (lo, hi) = (self.t_start().min(self.t_end()), self.t_start().max(self.t_end()));
        let slack = 1e-12 * (hi.abs() + 1.0);
        if t < lo - slack || t > hi + slack {
            return Err(Error::Domain(format!("t = {t} outside [{lo}, {hi}]")));
        }
        if self.steps.is_empty() {
            return Ok(self.y[0].clone());
        }
        let forward = self.steps[0].h > 0.0;
        // index of the last step starting at or before t
        let idx = self
            .steps
            .partition_point(|s| if forward { s.t0 <= t } else { s.t0 >= t })
            .saturating_sub(1);
        let s = &self.steps[idx];
        let theta = (t - s.t0) / s.h;
        let th1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &s.rcont;
        Ok((0..r1.len())
            .map(|i| r1[i] + theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i]))))
            .collect())
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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

fn lin(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        let ch = c * h;
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += ch * v;
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `accept` is called on every accepted state; returning an error aborts the
/// integration with the last good state intact in the error message.
pub fn dopri5<F, A>(mut f: F, t0: f64, y0: &[f64], t1: f64, opts: &Dopri5Options, mut accept: A) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    A: FnMut(f64, &[f64]) -> Result<()>,
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut sol = OdeSolution { t: vec![t0], y: vec![y0.to_vec()], steps: Vec::new(), rejected: 0 };
    if span == 0.0 {
        return Ok(sol);
    }
    let sc = |a: &[f64], b: &[f64], i: usize| opts.atol + opts.rtol * a[i].abs().max(b[i].abs());
    let norm = |e: &[f64], a: &[f64], b: &[f64]| -> f64 {
        (e.iter().enumerate().map(|(i, v)| (v / sc(a, b, i)).powi(2)).sum::<f64>() / n as f64).sqrt()
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y)?;
    let mut h = match opts.h0 {
        Some(h) => h.abs().min(span),
        None => {
            let d0 = norm(&y, &y, &y);
            let d1 = norm(&k1, &y, &y);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            let y1 = lin(&y, dir * h0, &[(1.0, &k1)]);
            let f1 = f(t + dir * h0, &y1)?;
            let diff: Vec<f64> = f1.iter().zip(&k1).map(|(a, b)| a - b).collect();
            let d2 = norm(&diff, &y, &y) / h0;
            let m = d1.max(d2);
            let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / m).powf(0.2) };
            (100.0 * h0).min(h1).min(span)
        }
    };
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    for _ in 0..opts.max_steps {
        let remaining = (t1 - t) * dir;
        if remaining <= 1e-15 * span.max(t.abs()) {
            return Ok(sol);
        }
        if h >= remaining {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(span) {
            return Err(Error::Integration { t, reason: format!("step size underflow (h = {h:e})") });
        }
        let hs = dir * h;
        let k2 = f(t + C2 * hs, &lin(&y, hs, &[(A21, &k1)]))?;
        let k3 = f(t + C3 * hs, &lin(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(t + C4 * hs, &lin(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(t + C5 * hs, &lin(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let ysti = lin(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = f(t + hs, &ysti)?;
        let ynew = lin(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + hs, &ynew)?;
        let errv: Vec<f64> = (0..n)
            .map(|i| hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]))
            .collect();
        let err = norm(&errv, &y, &ynew);
        // PI step control
        let fac11 = err.powf(0.2 - 0.04 * 0.75);
        let fac = (fac11 / facold.powf(0.04)) / 0.9;
        let fac = fac.clamp(0.1, 5.0);
        if err <= 1.0 {
            facold = err.max(1e-4);
            accept(t + hs, &ynew)?;
            let ydiff: Vec<f64> = (0..n).map(|i| ynew[i] - y[i]).collect();
            let bspl: Vec<f64> = (0..n).map(|i| hs * k1[i] - ydiff[i]).collect();
            let r4: Vec<f64> = (0..n).map(|i| ydiff[i] - hs * k7[i] - bspl[i]).collect();
            let r5: Vec<f64> = (0..n)
                .map(|i| hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
                .collect();
            sol.steps.push(Step { t0: t, h: hs, rcont: [y.clone(), ydiff, bspl, r4, r5] });
            t += hs;
            if (t1 - t) * dir < 0.0 {
                t = t1;
            }
            y = ynew;
            k1 = k7;
            sol.t.push(t);
            sol.y.push(y.clone());
            let mut hnew = h / fac;
            if last_rejected {
                hnew = hnew.min(h);
            }
            last_rejected = false;
            h = hnew;
        } else {
            sol.rejected += 1;
            h /= (fac11 / 0.9).min(10.0).max(1.0);
            last_rejected = true;
        }
    }
    Err(Error::Integration { t, reason: format!("exceeded {} steps", opts.max_steps) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let sol = dopri5(|_, y| Ok(vec![-y[0]]), 0.0, &[1.0], 5.0, &Dopri5Options::default(), |_, _| Ok(()))
            .unwrap();
        assert!((sol.last()[0] - (-5f64).exp()).abs() < 1e-11);
        for &t in &[0.3, 1.7, 4.99] {
            let v = sol.eval(t).unwrap()[0];
            assert!((v - (-t).exp()).abs() < 1e-9, "{t}: {v}");
        }
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let sol = dopri5(
            |_, y| Ok(vec![y[1], -y[0]]),
            2.0,
            &[2f64.cos(), -2f64.sin()],
            0.0,
            &Dopri5Options::default(),
            |_, _| Ok(()),
        )
        .unwrap();
        assert!((sol.last()[0] - 1.0).abs() < 1e-9);
        assert!(sol.last()[1].abs() < 1e-9);
    }

    #[test]
    fn rejection_hook_aborts() {
        let r = dopri5(|_, y| Ok(vec![-y[0]]), 0.0, &[1.0], 5.0, &Dopri5Options::default(), |t, _| {
            if t > 1.0 {
                Err(Error::Integration { t, reason: "stop".into() })
            } else {
                Ok(())
            }
        });
        assert!(matches!(r, Err(Error::Integration { .. })));
    }
}
