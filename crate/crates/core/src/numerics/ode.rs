//! Dormand–Prince 5(4) with FSAL and fifth-order dense output.

use super::NumericsError;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OdeSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeSpec {
    fn default() -> Self {
        OdeSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_step: 1.0,
            max_steps: 5_000_000,
        }
    }
}

impl OdeSpec {
    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_step > 0.0) || self.max_steps == 0 {
            return Err(NumericsError::InvalidSpec(format!(
                "ode spec abs_tol={} rel_tol={} max_step={} max_steps={}",
                self.abs_tol, self.rel_tol, self.max_step, self.max_steps
            )));
        }
        Ok(())
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }
}

/// Returned by a right-hand side evaluated outside its domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutOfDomain;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    StepSizeCollapse { t: f64, h: f64 },
    DomainExit { t: f64 },
    BudgetExceeded { t: f64, steps: usize },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::StepSizeCollapse { .. } => "step_size_collapse",
            Termination::DomainExit { .. } => "domain_exit",
            Termination::BudgetExceeded { .. } => "budget_exceeded",
        }
    }

    pub fn into_error(self) -> Option<NumericsError> {
        match self {
            Termination::Completed => None,
            Termination::StepSizeCollapse { t, h } => Some(NumericsError::StepSizeCollapse { t, h }),
            Termination::DomainExit { t } => Some(NumericsError::DomainExit { t }),
            Termination::BudgetExceeded { t, steps } => Some(NumericsError::BudgetExceeded { t, steps }),
        }
    }
}

/// Dense samples plus the reason the integration stopped.
#[derive(Clone, Debug)]
pub struct OdeRun {
    pub samples: Vec<(f64, Vec<f64>)>,
    pub termination: Termination,
    /// Last accepted (t, y), which may lie past the last sample.
    pub last: (f64, Vec<f64>),
    pub steps: usize,
    pub rejected: usize,
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

fn eval<F>(rhs: &mut F, t: f64, y: &[f64], out: &mut [f64]) -> Result<(), OutOfDomain>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), OutOfDomain>,
{
    rhs(t, y, out)?;
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(OutOfDomain)
    }
}

/// Integrates from `t_span.0` to `t_span.1`, sampling at `output_times`
/// (sorted, inside the span). Stops early with a reason instead of failing.
pub fn integrate<F>(
    mut rhs: F,
    y0: &[f64],
    t_span: (f64, f64),
    spec: &OdeSpec,
    output_times: &[f64],
) -> Result<OdeRun, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), OutOfDomain>,
{
    spec.validate()?;
    let (t0, tend) = t_span;
    if !(tend > t0) {
        return Err(NumericsError::InvalidSpec(format!("time span ({t0}, {tend}) must increase")));
    }
    if output_times.windows(2).any(|w| w[1] < w[0])
        || output_times.iter().any(|&t| t < t0 || t > tend)
    {
        return Err(NumericsError::InvalidSpec("output times must be sorted and inside the span".into()));
    }
    let n = y0.len();
    let mut samples = Vec::with_capacity(output_times.len());
    let mut next_out = 0;
    while next_out < output_times.len() && output_times[next_out] == t0 {
        samples.push((t0, y0.to_vec()));
        next_out += 1;
    }

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k1 = vec![0.0; n];
    if eval(&mut rhs, t, &y, &mut k1).is_err() {
        return Ok(OdeRun {
            samples,
            termination: Termination::DomainExit { t },
            last: (t, y),
            steps: 0,
            rejected: 0,
        });
    }
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut rcont = vec![vec![0.0; n]; 5];

    let mut h = initial_step(&mut rhs, t, &y, &k1, spec, tend - t0);
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut errold: f64 = 1e-4;
    let mut last_rejected = false;
    // Attempts since the rhs last refused a state.
    let mut since_domain = usize::MAX;

    let termination = loop {
        if t >= tend {
            break Termination::Completed;
        }
        if steps + rejected >= spec.max_steps {
            break Termination::BudgetExceeded { t, steps };
        }
        let min_h = 16.0 * f64::EPSILON * t.abs().max(1e-3 * (tend - t0).abs()).max(f64::MIN_POSITIVE);
        if h < min_h {
            break if since_domain < 64 {
                Termination::DomainExit { t }
            } else {
                Termination::StepSizeCollapse { t, h }
            };
        }
        h = h.min(spec.max_step);
        let last_step = t + h >= tend;
        if last_step {
            h = tend - t;
        }

        let stage = (|| -> Result<(), OutOfDomain> {
            for i in 0..n {
                ytmp[i] = y[i] + h * A21 * k1[i];
            }
            eval(&mut rhs, t + C2 * h, &ytmp, &mut k2)?;
            for i in 0..n {
                ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            eval(&mut rhs, t + C3 * h, &ytmp, &mut k3)?;
            for i in 0..n {
                ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            eval(&mut rhs, t + C4 * h, &ytmp, &mut k4)?;
            for i in 0..n {
                ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            eval(&mut rhs, t + C5 * h, &ytmp, &mut k5)?;
            for i in 0..n {
                ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            eval(&mut rhs, t + h, &ytmp, &mut k6)?;
            for i in 0..n {
                ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            eval(&mut rhs, t + h, &ynew, &mut k7)?;
            Ok(())
        })();

        since_domain = since_domain.saturating_add(1);
        if stage.is_err() {
            since_domain = 0;
            rejected += 1;
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        let mut err = 0.0;
        for i in 0..n {
            let sk = spec.abs_tol + spec.rel_tol * y[i].abs().max(ynew[i].abs());
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err += (e / sk).powi(2);
        }
        err = (err / n as f64).sqrt();
        if !err.is_finite() {
            since_domain = 0;
            rejected += 1;
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        // Step size control with Lund stabilisation.
        let beta = 0.04;
        let expo1 = 0.2 - beta * 0.75;
        let fac11 = err.powf(expo1);
        let mut fac = fac11 / errold.powf(beta);
        fac = (fac / 0.9).clamp(1.0 / 10.0, 1.0 / 0.2);
        let hnew = h / fac;

        if err <= 1.0 {
            errold = err.max(1e-4);
            steps += 1;
            // Dense output coefficients.
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let tnew = if last_step { tend } else { t + h };
            while next_out < output_times.len() && output_times[next_out] <= tnew {
                let to = output_times[next_out];
                let th = (to - t) / h;
                let th1 = 1.0 - th;
                let yo: Vec<f64> = (0..n)
                    .map(|i| {
                        rcont[0][i]
                            + th * (rcont[1][i] + th1 * (rcont[2][i] + th * (rcont[3][i] + th1 * rcont[4][i])))
                    })
                    .collect();
                samples.push((to, if to == tnew { ynew.clone() } else { yo }));
                next_out += 1;
            }
            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut ynew);
            t = tnew;
            h = if last_rejected { hnew.min(h) } else { hnew };
            last_rejected = false;
        } else {
            rejected += 1;
            h /= (fac11 / 0.9).min(1.0 / 0.2);
            last_rejected = true;
        }
    };

    Ok(OdeRun {
        samples,
        termination,
        last: (t, y),
        steps,
        rejected,
    })
}

fn initial_step<F>(rhs: &mut F, t: f64, y: &[f64], f0: &[f64], spec: &OdeSpec, span: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), OutOfDomain>,
{
    let n = y.len();
    let sk = |i: usize| spec.abs_tol + spec.rel_tol * y[i].abs();
    let dnf = (0..n).map(|i| (f0[i] / sk(i)).powi(2)).sum::<f64>() / n as f64;
    let dny = (0..n).map(|i| (y[i] / sk(i)).powi(2)).sum::<f64>() / n as f64;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(spec.max_step).min(span);
    let y1: Vec<f64> = (0..n).map(|i| y[i] + h * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    if eval(rhs, t + h, &y1, &mut f1).is_err() {
        return h * 1e-3;
    }
    let der2 = ((0..n).map(|i| ((f1[i] - f0[i]) / sk(i)).powi(2)).sum::<f64>() / n as f64).sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(spec.max_step).min(span)
}

/// Solve and return samples at `output_times`; any early stop is an error.
pub fn ode_solve<F>(
    rhs: F,
    y0: &[f64],
    t_span: (f64, f64),
    spec: &OdeSpec,
    output_times: &[f64],
) -> Result<Vec<(f64, Vec<f64>)>, NumericsError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), OutOfDomain>,
{
    let run = integrate(rhs, y0, t_span, spec, output_times)?;
    match run.termination.into_error() {
        None => Ok(run.samples),
        Some(e) => Err(e),
    }
}

/// `count` equally spaced times from t0 to t1 inclusive.
pub fn linspace(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![t1];
    }
    (0..count)
        .map(|i| if i + 1 == count { t1 } else { t0 + (t1 - t0) * i as f64 / (count - 1) as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(_t: f64, y: &[f64], d: &mut [f64]) -> Result<(), OutOfDomain> {
        d[0] = y[1];
        d[1] = -y[0];
        Ok(())
    }

    #[test]
    fn oscillator_period() {
        let spec = OdeSpec::default();
        let out = ode_solve(oscillator, &[1.0, 0.0], (0.0, 2.0 * PI), &spec, &[2.0 * PI]).unwrap();
        let y = &out[0].1;
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8);
    }

    #[test]
    fn exponential_decay() {
        let spec = OdeSpec::default();
        let out = ode_solve(|_, y, d| {
            d[0] = -y[0];
            Ok(())
        }, &[1.0], (0.0, 1.0), &spec, &[0.5, 1.0])
        .unwrap();
        assert!((out[1].1[0] - (-1.0f64).exp()).abs() < 1e-10);
        assert!((out[0].1[0] - (-0.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn dense_output_accuracy() {
        let spec = OdeSpec { max_step: 10.0, ..OdeSpec::default() };
        let times = linspace(0.0, 10.0, 101);
        let out = ode_solve(oscillator, &[1.0, 0.0], (0.0, 10.0), &spec, &times).unwrap();
        assert_eq!(out.len(), 101);
        for (t, y) in out {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn finite_time_blowup_is_reported() {
        // y' = y^2 from y(0)=1 blows up at t=1.
        let spec = OdeSpec::default();
        let run = integrate(|_, y, d| {
            d[0] = y[0] * y[0];
            Ok(())
        }, &[1.0], (0.0, 2.0), &spec, &[]).unwrap();
        assert!(!run.termination.is_completed());
        assert!((run.last.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn singular_approach_collapses() {
        // y = sqrt(1 - t) has an infinite slope at t = 1.
        let spec = OdeSpec::default();
        let run = integrate(|_, y, d| {
            if y[0] <= 0.0 {
                return Err(OutOfDomain);
            }
            d[0] = -0.5 / y[0];
            Ok(())
        }, &[1.0], (0.0, 3.0), &spec, &[]).unwrap();
        assert!(!run.termination.is_completed());
        assert!((run.last.0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn domain_exit_is_reported() {
        // Smooth flow that the rhs refuses to continue below y = 0.5.
        let spec = OdeSpec::default();
        let run = integrate(|_, y, d| {
            if y[0] < 0.5 {
                return Err(OutOfDomain);
            }
            d[0] = -1.0;
            Ok(())
        }, &[1.0], (0.0, 3.0), &spec, &[]).unwrap();
        assert!(matches!(run.termination, Termination::DomainExit { .. }), "{:?}", run.termination);
        assert!((run.last.0 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn budget_exceeded() {
        let spec = OdeSpec { max_steps: 5, ..OdeSpec::default() };
        let r = ode_solve(oscillator, &[1.0, 0.0], (0.0, 100.0), &spec, &[]);
        assert!(matches!(r, Err(NumericsError::BudgetExceeded { .. })));
    }
}
