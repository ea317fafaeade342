//! Dormand–Prince 5(4) integrator with step-size control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Steps shorter than this fraction of the span count as underflow.
    pub min_step_fraction: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 1_000_000, min_step_fraction: 1e-14 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Dense-output weights of the continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrates `y' = f(t, y)` from `t0` and returns the state at each of the
/// increasing times `t_out` (all `>= t0`). Intermediate outputs come from the
/// fourth-order continuous extension; the last one is hit exactly.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_out: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(t_out.len());
    let Some(&t_end) = t_out.last() else {
        return Ok((out, stats));
    };
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out[0] < t0 {
        return Err(Error::InvalidParameter("output times must be increasing and not before t0".into()));
    }
    let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);
    let h_min = opts.min_step_fraction * span;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut next = 0;
    while next < t_out.len() && t_out[next] <= t0 {
        out.push(y.clone());
        next += 1;
    }
    if next == t_out.len() {
        return Ok((out, stats));
    }
    f(t, &y, &mut k[0])?;
    stats.evaluations += 1;

    let scale = |a: f64, b: f64| opts.atol + opts.rtol * a.abs().max(b.abs());
    // initial step from the first derivative
    let d0 = (y.iter().map(|v| (v / scale(*v, *v)).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt();
    let d1 = (k[0].iter().zip(&y).map(|(d, v)| (d / scale(*v, *v)).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h = h.min(span).max(h_min * 10.0);

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Stiffness { t });
        }
        let mut step = h.min(t_end - t);
        let last = step >= t_end - t;
        if last {
            step = t_end - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + step * acc;
            }
            f(t + C[s] * step, &ytmp, &mut k[s])?;
            stats.evaluations += 1;
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
        }
        let mut err = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            err += (step * e / scale(y[i], ynew[i])).powi(2);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            h = step * 0.2;
            stats.rejected += 1;
            if h < h_min {
                return Err(Error::Stiffness { t });
            }
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            stats.accepted += 1;
            let t_new = if last { t_end } else { t + step };
            while next < t_out.len() && (t_out[next] < t_new || (last && t_out[next] <= t_end)) {
                let tt = t_out[next];
                if tt == t_new {
                    out.push(ynew.clone());
                } else {
                    let th = (tt - t) / step;
                    let th1 = 1.0 - th;
                    let v: Vec<f64> = (0..n)
                        .map(|i| {
                            let dy = ynew[i] - y[i];
                            let b = step * k[0][i] - dy;
                            let c4 = dy - step * k[6][i] - b;
                            let c5 = step * D.iter().zip(&k).map(|(d, kj)| d * kj[i]).sum::<f64>();
                            y[i] + th * (dy + th1 * (b + th * (c4 + th1 * c5)))
                        })
                        .collect();
                    out.push(v);
                }
                next += 1;
            }
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            h = step * factor;
        } else {
            stats.rejected += 1;
            h = step * factor.min(1.0);
            if h < h_min {
                return Err(Error::Stiffness { t });
            }
        }
    }
    while out.len() < t_out.len() {
        out.push(y.clone());
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let (ys, _) = integrate(
            |_, y, d| {
                d[0] = -2.0 * y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            &[0.5, 1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((ys[1][0] - (-2.0f64).exp()).abs() < 1e-10);
        assert!((ys[0][0] - (-1.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_many_periods() {
        let t_end = 20.0 * std::f64::consts::PI;
        let (ys, stats) = integrate(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            &[t_end],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((ys[0][0] - 1.0).abs() < 1e-8);
        assert!(ys[0][1].abs() < 1e-8);
        assert!(stats.rejected < stats.accepted);
    }

    #[test]
    fn dense_output_matches() {
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0 * 3.0).collect();
        let (ys, stats) = integrate(
            |_, y, d| {
                d[0] = y[1];
                d[1] = -y[0];
                Ok(())
            },
            0.0,
            &[0.0, 1.0],
            &grid,
            &OdeOptions::default(),
        )
        .unwrap();
        assert!(stats.accepted < 200);
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - t.sin()).abs() < 1e-9, "{t}");
        }
    }

    #[test]
    fn rhs_errors_propagate() {
        let r = integrate(
            |t, _, _| if t > 0.5 { Err(Error::SingularPath { s: t }) } else { Ok(()) },
            0.0,
            &[0.0],
            &[1.0],
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::SingularPath { .. })));
    }
}
