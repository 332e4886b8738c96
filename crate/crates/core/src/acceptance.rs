//! The twelve acceptance criteria, shared by `rmg check` and the
//! `acceptance` test target.
//!
//! Each criterion is a list of checks. Checks marked `companion` are
//! reported next to a literal check they accompany (same quantity at a
//! different momentum or by extrapolation) and do not affect the verdict.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{shipped_configs, RunConfig};
use crate::hyperbolic::{FieldMode, Mod2Metric};
use crate::kim_lee::{effective_field_f, singular_coefficient, BProfile};
use crate::numerics::{extrapolate_to_zero, find_root, OdeSpec, QuadratureSpec};
use crate::rat1::asymptotics::{f123_scaled, fit_leading_coefficients, lemma_bound_scan, log_grid};
use crate::rat1::dynamics::{accelerations, noether_accelerations, noether_backward_error};
use crate::rat1::reduced::{g_function, g_limit, h_function, reduced_energy};
use crate::rat1::{energy_and_momenta, evolve, LumpState, Rat1Metric, ESCAPE_RADIUS};
use crate::ratn::{PotentialMode, RatnEqGeometry, CHI_DOMAIN};
use crate::runs::{run_hyp2, run_rat1, run_ratn};

/// Criteria whose literal statement is known not to hold; see README.
pub const KNOWN_LITERAL_FAILURES: [u8; 4] = [5, 6, 9, 11];

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "speed conservation on shipped configs"),
    (2, "hyperbolic metric anchors"),
    (3, "Ricci-field asymptotics"),
    (4, "Kim-Lee singularity"),
    (5, "Rat1 charge conservation"),
    (6, "Rat1 identities"),
    (7, "large-lambda coefficients and lemma bound"),
    (8, "Rat1 completeness evidence"),
    (9, "equivariant n-lump limits"),
    (10, "regularity identities"),
    (11, "completeness dichotomy"),
    (12, "equivariance suite"),
];

#[derive(Clone, Copy, Debug, Default)]
pub struct CheckOptions {
    /// Shifts the integration constant of A(s), which must break criterion 2.
    pub tamper_a: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub passed: bool,
    pub companion: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub items: Vec<CheckItem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceReport {
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

impl AcceptanceReport {
    pub fn failing(&self) -> Vec<u8> {
        self.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect()
    }

    /// One line per criterion, followed by indented check lines.
    pub fn table(&self, verbose: bool) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            out.push_str(&format!(
                "{} criterion {:>2}: {} ({:.1} s)\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.title,
                c.seconds
            ));
            if let Some(e) = &c.error {
                out.push_str(&format!("       error: {e}\n"));
            }
            if verbose || !c.passed {
                for it in &c.items {
                    let tag = match (it.passed, it.companion) {
                        (true, false) => "ok  ",
                        (false, false) => "FAIL",
                        (true, true) => "ok* ",
                        (false, true) => "bad*",
                    };
                    let target = it.target.map(|t| format!(" (target {t:.6e})")).unwrap_or_default();
                    let note = it.note.as_ref().map(|n| format!(" [{n}]")).unwrap_or_default();
                    out.push_str(&format!("       {tag} {}: {:.6e}{target}{note}\n", it.name, it.value));
                }
            }
        }
        out
    }
}

struct Items(Vec<CheckItem>);

impl Items {
    fn new() -> Self {
        Items(Vec::new())
    }

    fn push(&mut self, name: impl Into<String>, value: f64, target: Option<f64>, passed: bool) -> &mut CheckItem {
        self.0.push(CheckItem {
            name: name.into(),
            value,
            target,
            passed: passed && value.is_finite(),
            companion: false,
            note: None,
        });
        self.0.last_mut().unwrap()
    }

    /// |value − target| ≤ tol·|target|.
    fn rel(&mut self, name: impl Into<String>, value: f64, target: f64, tol: f64) -> &mut CheckItem {
        let ok = (value - target).abs() <= tol * target.abs();
        self.push(name, value, Some(target), ok)
    }

    /// value ≤ bound.
    fn below(&mut self, name: impl Into<String>, value: f64, bound: f64) -> &mut CheckItem {
        self.push(name, value, Some(bound), value <= bound)
    }
}

impl CheckItem {
    fn companion(&mut self) -> &mut Self {
        self.companion = true;
        self
    }

    fn note(&mut self, n: impl Into<String>) -> &mut Self {
        self.note = Some(n.into());
        self
    }
}

type CriterionResult = Result<Items, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let angle = rng.random_range(0.0..PI);
    Rotation3::from_scaled_axis(axis.normalize() * angle).into_inner()
}

fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vector3<f64> {
    Vector3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

/// Random Rat₁ state with ‖λ‖ uniform in the given range.
pub fn random_lump_state(rng: &mut ChaCha8Rng, lambda_range: (f64, f64)) -> LumpState {
    let dir = loop {
        let v = random_vec(rng, 1.0);
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            break v / n;
        }
    };
    LumpState {
        o: random_rotation(rng),
        omega: random_vec(rng, 1.0),
        lambda: dir * rng.random_range(lambda_range.0..lambda_range.1),
        lambda_dot: random_vec(rng, 0.5),
    }
}

fn criterion_1() -> CriterionResult {
    let mut it = Items::new();
    let configs = shipped_configs().map_err(err)?;
    let results: Vec<_> = configs
        .into_par_iter()
        .map(|(name, cfg)| {
            let summary = match cfg {
                RunConfig::Hyp2(c) => run_hyp2(&c).map(|o| o.summary),
                RunConfig::Rat1(c) => run_rat1(&c).map(|o| o.summary),
                RunConfig::Ratn(c) => run_ratn(&c).map(|o| o.0.summary),
            };
            (name, summary)
        })
        .collect();
    for (name, s) in results {
        let s = s.map_err(|e| format!("{name}: {e}"))?;
        let ok = s.completed() && s.t_end >= 100.0 - 1e-9;
        it.below(format!("{name} speed drift"), s.speed_drift, 1e-7)
            .passed &= ok;
    }
    Ok(it)
}

fn criterion_2(opts: &CheckOptions) -> CriterionResult {
    let mut it = Items::new();
    let m = if opts.tamper_a {
        Mod2Metric::with_integration_constant(1.0)
    } else {
        Mod2Metric::l2()
    };
    it.rel("A(0)", m.a(0.0).map_err(err)?, 32.0 * PI, 1e-12);
    let mut worst_ratio = 0.0f64;
    let mut worst_a1 = 0.0f64;
    for k in 1..=60 {
        let s = 0.25 * k as f64;
        let c = m.metric_coefficients(s).map_err(err)?;
        let target = 16.0 * (0.5 * s).sinh().powi(2);
        worst_ratio = worst_ratio.max((c.a3 / c.a1 / target - 1.0).abs());
        let closed = Mod2Metric::a1_closed_form(s);
        worst_a1 = worst_a1.max((c.a1 / closed - 1.0).abs());
    }
    it.below("max |A3/(16 sinh^2(s/2) A1) - 1| on s in [0.25, 15]", worst_ratio, 1e-10);
    it.below("max |A1 chain / closed form - 1| on s in [0.25, 15]", worst_a1, 1e-10);
    Ok(it)
}

fn criterion_3() -> CriterionResult {
    let mut it = Items::new();
    let m = Mod2Metric::l2();
    let f = |s: f64, mode| m.magnetic_f(s, mode).map_err(err);
    let s = 0.05f64;
    it.rel("F_restricted(0.05)/s^3", f(s, FieldMode::Restricted)? / s.powi(3), -0.2, 0.02);
    it.rel("F_intrinsic(0.05)/s^3", f(s, FieldMode::Intrinsic)? / s.powi(3), 7.0 / 40.0, 0.02);
    let e = 15f64.exp();
    it.rel("F_restricted(30)/e^15", f(30.0, FieldMode::Restricted)? / e, -1.0, 0.01);
    it.rel("F_intrinsic(30)/e^15", f(30.0, FieldMode::Intrinsic)? / e, -0.5, 0.01);
    let root = find_root(|s| m.magnetic_f(s, FieldMode::Intrinsic).unwrap_or(f64::NAN), (1.0, 3.0), 1e-13)
        .map_err(err)?;
    it.push("root of F_intrinsic", root, None, (1.5..=1.9).contains(&root))
        .note("must lie in [1.5, 1.9]");
    Ok(it)
}

fn criterion_4() -> CriterionResult {
    let mut it = Items::new();
    let p = BProfile::TruncatedAsymptotic;
    let mut exact = true;
    for &kappa in &[0.5, 1.0, 2.3] {
        for &sigma in &[1e-3, 0.1, 0.5, 1.0, 1.4] {
            exact &= effective_field_f(&p, kappa, sigma).map_err(err)? == 1.5 * PI * kappa;
        }
    }
    it.push("f == (3/2) pi kappa exactly on grid", if exact { 1.0 } else { 0.0 }, Some(1.0), exact);
    let ws: Vec<f64> = (0..12).map(|k| 10f64.powi(-k)).collect();
    let vals: Vec<f64> = ws
        .iter()
        .map(|&w| singular_coefficient(&p, 1.0, w).map(|c| c * w))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let spread = vals.iter().map(|v| (v / vals[0] - 1.0).abs()).fold(0.0, f64::max);
    it.below("spread of |w| * blow-up coefficient, |w| in [1e-11, 1]", spread, 1e-12);
    Ok(it)
}

/// (E, P, Q) drifts and endpoint of a Rat₁ run, with ‖Q‖ at t = 0.
struct BatteryRun {
    drift: (f64, f64, f64),
    completed: bool,
    escaped: bool,
    q_norm: f64,
}

fn battery(states: &[LumpState], t_max: f64) -> Result<Vec<BatteryRun>, String> {
    let spec = OdeSpec::default().with_tolerances(1e-10, 1e-10);
    states
        .par_iter()
        .map(|st| {
            let tr = evolve(st, (0.0, t_max), &spec, 101).map_err(err)?;
            Ok(BatteryRun {
                drift: tr.charge_drift(),
                completed: tr.termination.is_completed(),
                escaped: tr.escaped(),
                q_norm: energy_and_momenta(st).q_vec().norm(),
            })
        })
        .collect()
}

fn criterion_5(opts: &CheckOptions) -> CriterionResult {
    let mut it = Items::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5);
    let states: Vec<LumpState> = (0..20).map(|_| random_lump_state(&mut rng, (0.1, 20.0))).collect();
    let runs = battery(&states, 100.0)?;
    let worst = |runs: &[BatteryRun], k: usize| {
        runs.iter()
            .map(|r| [r.drift.0, r.drift.1, r.drift.2][k])
            .fold(0.0, f64::max)
    };
    let done = runs.iter().filter(|r| r.completed).count();
    it.push("runs covering t in [0, 100]", done as f64, Some(20.0), done == 20)
        .note(format!("{} stopped at |lambda| = {ESCAPE_RADIUS}", runs.iter().filter(|r| r.escaped).count()));
    it.below("max relative E drift over each run's interval", worst(&runs, 0), 1e-6);
    it.below("max relative P drift", worst(&runs, 1), 1e-6);
    it.below("max relative Q drift", worst(&runs, 2), 1e-6);
    let q_min = runs
        .iter()
        .filter(|r| !r.completed)
        .map(|r| r.q_norm)
        .fold(f64::INFINITY, f64::min);
    it.push("min |Q| over runs that left the domain", q_min, Some(2.0), !(q_min <= 2.0))
        .companion();

    let mut bounded = Vec::new();
    while bounded.len() < 10 {
        let st = random_lump_state(&mut rng, (0.1, 20.0));
        if energy_and_momenta(&st).q_vec().norm() < 2.0 {
            bounded.push(st);
        }
    }
    let runs = battery(&bounded, 100.0)?;
    let done = runs.iter().filter(|r| r.completed).count();
    let d = (0..3).map(|k| worst(&runs, k)).fold(0.0, f64::max);
    it.push("|Q| < 2 battery: runs covering t in [0, 100]", done as f64, Some(10.0), done == 10)
        .companion();
    it.below("|Q| < 2 battery: max relative charge drift", d, 1e-6)
        .companion();

    let (mut fwd, mut fwd_far, mut backward) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..40 {
        // generic states where the oracle can resolve 1e-8, then the full range
        let range = if k < 20 { (0.1, 4.0) } else { (0.1, 20.0) };
        let st = random_lump_state(&mut rng, range);
        let (wd, ld) = accelerations(&st).map_err(err)?;
        let (wn, ln) = noether_accelerations(&st).ok_or("Noether solve failed")?;
        let scale = 1.0 + wd.norm().max(ld.norm());
        let e = (wd - wn).norm().max((ld - ln).norm()) / scale;
        if k < 20 {
            fwd = fwd.max(e);
        } else {
            fwd_far = fwd_far.max(e);
        }
        backward = backward.max(noether_backward_error(&st, &wd, &ld));
    }
    it.below("Noether-solve oracle vs equations of motion, |lambda| <= 4", fwd, 1e-8);
    it.below("same, |lambda| <= 20 (oracle conditioning ~ 1/B^2)", fwd_far, 1e-6)
        .companion();
    it.below("backward error of EOM accelerations in the Noether system", backward, 1e-10)
        .companion();
    Ok(it)
}

fn criterion_6(opts: &CheckOptions) -> CriterionResult {
    let mut it = Items::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let st = random_lump_state(&mut rng, (0.1, 20.0));
        let c = energy_and_momenta(&st);
        let e = reduced_energy(&st.lambda, &st.lambda_dot, &c.p_vec(), &c.q_vec()).map_err(err)?;
        worst = worst.max(((e - c.e) / c.e).abs());
    }
    it.below("reduced energy vs full energy (200 random states)", worst, 1e-9);
    let mut h_min = f64::INFINITY;
    for _ in 0..10_000 {
        let l = random_vec(&mut rng, 1.0).normalize() * 10f64.powf(rng.random_range(-2.0..4.0));
        let ld = random_vec(&mut rng, 1.0);
        h_min = h_min.min(h_function(&l, &ld).map_err(err)?);
    }
    it.push("min H over 1e4 samples", h_min, Some(0.0), h_min >= 0.0);

    let q = Vector3::new(0.4, -0.2, 1.0);
    let lam = 1e6f64;
    let l = Vector3::new(0.0, 0.0, lam);
    let target = g_limit(q.z);
    let g = g_function(&l, &q).map_err(err)? * lam.ln() / lam.powi(4);
    it.rel("(log l / l^4) G at l = 1e6, Q.l_hat = 1", g, target, 0.01)
        .note("approach is c/log(lambda); see README");
    // extrapolation of the same quantity in x = 1/log λ
    let xs: Vec<f64> = (1..=8).map(|k| 1.0 / (6.0 * k as f64 * 10f64.ln())).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let [f1, f2, f3] = f123_scaled((1.0 / x).exp());
            (f1 * q.z * q.z + f2 * q.z + f3) / x
        })
        .collect();
    let est = extrapolate_to_zero(&xs, &ys, 3).ok_or("extrapolation failed")?;
    it.rel("same quantity extrapolated from l in [1e6, 1e48]", est, target, 0.01)
        .companion();
    Ok(it)
}

fn criterion_7() -> CriterionResult {
    let mut it = Items::new();
    let xs: Vec<f64> = (0..8).map(|i| 0.1 / 1.5f64.powi(i)).collect();
    let [a1, b1, c1] = fit_leading_coefficients(&xs, 4).ok_or("fit failed")?;
    it.rel("a1 (fit)", a1, 4.0 / PI, 1e-4);
    it.rel("b1 (fit)", b1, 16.0 / PI, 1e-4);
    it.rel("c1 (fit)", c1, 16.0 / PI, 1e-4);
    let thetas: Vec<f64> = (0..721).map(|k| PI * k as f64 / 720.0).collect();
    let scan = lemma_bound_scan(&log_grid(1e2, 1e12, 201), &thetas);
    let c0 = scan.c0.unwrap_or(f64::NAN);
    it.push("lemma scan c0 on [1e2, 1e12]", c0, None, c0 > 0.0)
        .note(format!("lambda0 = {:.4e}", scan.lambda0.unwrap_or(f64::NAN)));
    Ok(it)
}

fn criterion_8() -> CriterionResult {
    let mut it = Items::new();
    let mut st = LumpState::at_rest(Vector3::new(0.0, 0.0, 5.0));
    st.lambda_dot = Vector3::new(0.0, 0.0, 1.0);
    let e = energy_and_momenta(&st).e;
    st.lambda_dot /= (2.0 * e).sqrt();
    let tr = evolve(&st, (0.0, 500.0), &OdeSpec::default(), 501).map_err(err)?;
    let max_l = tr.max_lambda();
    it.push("max |lambda| on outbound unit-speed run, t <= 500", max_l, None, max_l.is_finite() && max_l < 1e3)
        .note(tr.termination.label());
    if !tr.termination.is_completed() {
        it.0.last_mut().unwrap().passed = false;
    }
    let spec = QuadratureSpec::new(0.0, 1e-13, 4000).map_err(err)?;
    let lens: Vec<f64> = [1e3, 1e6, 1e9, 1e12]
        .iter()
        .map(|&l| Rat1Metric.radial_length(l, &spec))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let d1 = (lens[1] - lens[0]).abs();
    let d2 = (lens[2] - lens[1]).abs();
    let d3 = (lens[3] - lens[2]).abs();
    it.push("radial length at 1e12", lens[3], None, d2 < d1 && d3 < 1e-9)
        .note(format!("increments {d1:.2e}, {d2:.2e}, {d3:.2e}"));
    Ok(it)
}

fn criterion_9() -> CriterionResult {
    let mut it = Items::new();
    let report = RatnEqGeometry::new(2).map_err(err)?.limits_report().map_err(err)?;
    for l in &report.limits {
        let item = it.push(l.name.clone(), l.estimate, Some(l.target), l.passed);
        if l.companion {
            item.companion().note("P = -1/2");
        }
    }
    Ok(it)
}

fn criterion_10() -> CriterionResult {
    let mut it = Items::new();
    let g = RatnEqGeometry::new(5).map_err(err)?;
    let checks: Vec<_> = [0.2, 0.3, 0.5]
        .iter()
        .map(|&r| g.regularity_check(r))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    for c in &checks {
        it.rel(format!("const1 at rho = {}", c.rho), c.const1, 24.0, 5e-3);
    }
    let c2: Vec<f64> = checks.iter().map(|c| c.const2).collect();
    let mean = c2.iter().sum::<f64>() / c2.len() as f64;
    let spread = c2.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max);
    it.below("const2 relative spread over rho in {0.2, 0.3, 0.5}", spread, 5e-3);
    it.rel("const2 (mean)", mean, -192.0, 5e-3)
        .note("printed value -129 disagrees");
    Ok(it)
}

fn criterion_11() -> CriterionResult {
    let mut it = Items::new();
    let g = RatnEqGeometry::new(2).map_err(err)?;
    let spec = OdeSpec::default().with_tolerances(1e-10, 1e-10);
    let runs: Vec<_> = [
        (PotentialMode::Intrinsic, 0.5),
        (PotentialMode::Extrinsic, 0.0),
        (PotentialMode::Intrinsic, -0.5),
    ]
    .par_iter()
    .map(|&(mode, p)| g.inward_run(mode, p, 1.0, 50.0, &spec, 201))
    .collect();
    let runs: Vec<_> = runs.into_iter().collect::<Result<_, _>>().map_err(err)?;
    let r = &runs[0];
    it.push("intrinsic P = 1/2 reaches chi -> 0", r.chi_min, Some(CHI_DOMAIN.0), r.reached_boundary)
        .note(format!("{} at t = {:.3}", r.termination.label(), r.t_end));
    let r = &runs[1];
    let turned = r.termination.is_completed() && r.chi_min > 1e3 * CHI_DOMAIN.0;
    it.push("extrinsic P = 0 chi_min", r.chi_min, None, turned)
        .note(format!("{} at t = {:.3}", r.termination.label(), r.t_end));
    let r = &runs[2];
    it.push("intrinsic P = -1/2 reaches chi -> 0", r.chi_min, Some(CHI_DOMAIN.0), r.reached_boundary)
        .companion()
        .note(format!("{} at t = {:.3}", r.termination.label(), r.t_end));
    let drift = runs.iter().map(|r| r.momentum_drift).fold(0.0, f64::max);
    it.below("momentum P drift along the three runs", drift, 1e-7);
    Ok(it)
}

fn criterion_12(opts: &CheckOptions) -> CriterionResult {
    let mut it = Items::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xc);
    let spec = OdeSpec::default();
    let cases: Vec<(LumpState, Matrix3<f64>, Matrix3<f64>)> = (0..4)
        .map(|_| (random_lump_state(&mut rng, (0.3, 5.0)), random_rotation(&mut rng), random_rotation(&mut rng)))
        .collect();
    let diffs: Vec<Result<f64, String>> = cases
        .par_iter()
        .map(|(st, l, r)| {
            let a = evolve(st, (0.0, 20.0), &spec, 21).map_err(err)?;
            let b = evolve(&st.transformed(l, r), (0.0, 20.0), &spec, 21).map_err(err)?;
            if a.samples.len() != b.samples.len() {
                return Err("runs stopped at different times".into());
            }
            Ok(a.samples
                .iter()
                .zip(&b.samples)
                .map(|(x, y)| {
                    let tx = x.state.transformed(l, r).to_vec();
                    tx.iter().zip(y.state.to_vec()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max))
        })
        .collect();
    let worst = diffs.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().fold(0.0, f64::max);
    it.below("transformed runs vs runs of transformed data (4 cases, t <= 20)", worst, 1e-7);

    let axial = LumpState {
        o: Rotation3::from_axis_angle(&Vector3::z_axis(), 0.7).into_inner(),
        omega: Vector3::new(0.0, 0.0, 0.6),
        lambda: Vector3::new(0.0, 0.0, 1.3),
        lambda_dot: Vector3::new(0.0, 0.0, -0.2),
    };
    let tr = evolve(&axial, (0.0, 50.0), &spec, 101).map_err(err)?;
    let off = tr
        .samples
        .iter()
        .map(|s| {
            let st = &s.state;
            [st.lambda.x, st.lambda.y, st.lambda_dot.x, st.lambda_dot.y, st.omega.x, st.omega.y, st.o[(0, 2)], st.o[(1, 2)], st.o[(2, 0)], st.o[(2, 1)]]
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    it.below("axial data: largest off-axis component, t <= 50", off, 1e-9)
        .passed &= tr.termination.is_completed();
    Ok(it)
}

pub fn run_criterion(id: u8, opts: &CheckOptions) -> CriterionReport {
    let title = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
    let start = Instant::now();
    let result = match id {
        1 => criterion_1(),
        2 => criterion_2(opts),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(opts),
        6 => criterion_6(opts),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        12 => criterion_12(opts),
        _ => Err(format!("no criterion {id}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(items) => CriterionReport {
            id,
            title,
            passed: items.0.iter().filter(|i| !i.companion).all(|i| i.passed),
            items: items.0,
            error: None,
            seconds,
        },
        Err(e) => CriterionReport {
            id,
            title,
            passed: false,
            items: Vec::new(),
            error: Some(e),
            seconds,
        },
    }
}

/// Runs all criteria concurrently.
pub fn run_all(opts: &CheckOptions) -> AcceptanceReport {
    let mut criteria: Vec<CriterionReport> = CRITERIA.par_iter().map(|&(id, _)| run_criterion(id, opts)).collect();
    criteria.sort_by_key(|c| c.id);
    AcceptanceReport {
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}
