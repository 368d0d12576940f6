//! Flows of the radial mean-curvature field and their finite-time collapse.
//!
//! `dw/dt = X_w` is integrated with an embedded Dormand–Prince 5(4) pair.
//! The field blows up like `m⁺‖β‖²/u` at a wall, so each step is capped at
//! `max_step_frac · u_min / (‖X‖ ‖β‖_max)` and a step whose stages leave the
//! chamber is halved. Integration stops once the smallest gap drops below
//! `wall_eps`; the collapse time is then extrapolated from the local law
//! `u du/dt ≈ −m⁺‖β‖²`, never read off the last step.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::catalog::{ChamberModel, Gaps};
use crate::chamber::{self, StratumId, DEFAULT_STRATUM_TOL};
use crate::error::{Error, Result};
use crate::field;
use crate::linalg;
use crate::spectrum;

/// `‖X‖` below this is treated as a rest point.
pub const STATIONARY_TOL: f64 = 1e-12;

/// Slack allowed in the monotonicity of `ρ` between samples.
pub const RHO_SLACK: f64 = 1e-10;

/// Walls within this multiple of `wall_eps` at the stopping point count as
/// part of the limit stratum.
pub const CORNER_FACTOR: f64 = 10.0;

/// Gap window `[lo, hi]` of the samples used by the type-I fit.
pub const TYPE_ONE_WINDOW: (f64, f64) = (1e-4, 2e-2);

/// Other walls must be this many times farther away than the collapsing
/// one for a sample to enter the type-I fit.
pub const SEPARATION: f64 = 20.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub rtol: f64,
    pub max_step_frac: f64,
    pub wall_eps: f64,
    pub t_max: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            rtol: 1e-9,
            max_step_frac: 0.1,
            wall_eps: 1e-8,
            t_max: 1e3,
            max_steps: 200_000,
            seed: 0,
        }
    }
}

impl FlowOptions {
    pub fn check(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Options(format!("{name} must be positive, got {x}")))
            }
        };
        positive("rtol", self.rtol)?;
        positive("max_step_frac", self.max_step_frac)?;
        positive("wall_eps", self.wall_eps)?;
        positive("t_max", self.t_max)?;
        if self.max_step_frac >= 1.0 {
            return Err(Error::Options("max_step_frac must be below 1".into()));
        }
        if self.wall_eps < field::GAP_FLOOR {
            return Err(Error::Options(format!("wall_eps must be at least {:e}", field::GAP_FLOOR)));
        }
        if self.max_steps == 0 {
            return Err(Error::Options("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub w: Vec<f64>,
    pub rho: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum FlowStatus {
    /// Stopped inside the chamber by a caller-supplied condition.
    Interior,
    Collapsed {
        #[serde(rename = "T")]
        t_collapse: f64,
        w_limit: Vec<f64>,
        stratum: StratumId,
    },
    Stationary { w: Vec<f64> },
    /// `t_max` or `max_steps` reached.
    Budget,
}

impl FlowStatus {
    pub fn collapse_time(&self) -> Option<f64> {
        match self {
            FlowStatus::Collapsed { t_collapse, .. } => Some(*t_collapse),
            _ => None,
        }
    }

    pub fn limit(&self) -> Option<(&[f64], &StratumId)> {
        match self {
            FlowStatus::Collapsed { w_limit, stratum, .. } => Some((w_limit, stratum)),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FlowStatus::Interior => "Interior",
            FlowStatus::Collapsed { .. } => "Collapsed",
            FlowStatus::Stationary { .. } => "Stationary",
            FlowStatus::Budget => "Budget",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub status: FlowStatus,
    /// Stratum the flow runs on; open for interior flows.
    pub stratum: StratumId,
    /// Set for stratum flows of scenarios with minus radials, where the
    /// stratum potential need not be convex.
    pub convexity_warning: bool,
    pub steps: usize,
    pub rejected_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeOneReport {
    pub wall: usize,
    pub estimate: f64,
    pub predicted: f64,
    pub rel_error: f64,
    pub fit_window: (f64, f64),
    pub samples_used: usize,
    /// The radial data cannot confirm that the fibration onto the limit
    /// focal submanifold is spherical; the predicted constant assumes it.
    pub fibration_assumed: bool,
}

// Dormand–Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
}

struct FlowSystem<'a> {
    model: &'a ChamberModel,
    stratum: StratumId,
    projector: Option<DMatrix<f64>>,
    direction: Direction,
    beta_max: f64,
}

impl<'a> FlowSystem<'a> {
    fn new(model: &'a ChamberModel, stratum: StratumId, direction: Direction) -> Self {
        let projector = (!stratum.is_open()).then(|| {
            let normals: Vec<&[f64]> = stratum.walls().iter().map(|&i| model.radial(i).root.as_slice()).collect();
            linalg::complement_projector(&normals, model.rank())
        });
        FlowSystem {
            model,
            stratum,
            projector,
            direction,
            beta_max: model.max_root_norm().max(f64::MIN_POSITIVE),
        }
    }

    fn gaps(&self, w: &[f64]) -> Result<Gaps> {
        let g = self.model.gaps(w);
        field::check_gaps(self.model, &g, &self.stratum)?;
        Ok(g)
    }

    /// Field (projected onto the stratum, signed by direction) and potential.
    fn eval(&self, w: &[f64]) -> Result<(Vec<f64>, f64, Gaps)> {
        let g = self.gaps(w)?;
        let mut x = field::field_from_gaps(self.model, &g, &self.stratum);
        if let Some(p) = &self.projector {
            x = linalg::apply(p, &x);
        }
        if self.direction == Direction::Backward {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        let rho = field::potential_from_gaps(self.model, &g, &self.stratum);
        Ok((x, rho, g))
    }

    /// Smallest gap over walls outside the stratum, with its wall.
    fn min_gap(&self, g: &Gaps) -> Option<(usize, f64)> {
        self.model
            .walls()
            .filter(|r| !self.stratum.contains(r.id))
            .map(|r| (r.id, g.plus[r.id]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Moves `w` back onto the affine span of the stratum walls.
    fn snap(&self, w: &mut [f64], walls: &StratumId) {
        if walls.is_open() {
            return;
        }
        let g = self.model.gaps(w);
        let rows: Vec<&[f64]> = walls.walls().iter().map(|&i| self.model.radial(i).root.as_slice()).collect();
        let rhs: Vec<f64> = walls.walls().iter().map(|&i| g.plus[i]).collect();
        let delta = linalg::least_squares(&rows, &rhs, self.model.rank());
        for (wi, di) in w.iter_mut().zip(&delta) {
            *wi += di;
        }
    }

    fn projected_norm_sq(&self, root: &[f64]) -> f64 {
        match &self.projector {
            Some(p) => {
                let pr = linalg::apply(p, root);
                linalg::dot(&pr, root)
            }
            None => linalg::dot(root, root),
        }
    }
}

struct StepRecord {
    h: f64,
    u_min_sq: f64,
}

/// Compensated running time: steps near collapse fall far below one ulp of
/// `t`.
#[derive(Clone, Copy, Default)]
struct Clock {
    hi: f64,
    lo: f64,
}

impl Clock {
    fn add(&mut self, h: f64) {
        let y = h - self.lo;
        let s = self.hi + y;
        self.lo = (s - self.hi) - y;
        self.hi = s;
    }

    fn value(&self) -> f64 {
        self.hi - self.lo
    }

    fn plus(&self, extra: f64) -> f64 {
        self.hi + (extra - self.lo)
    }
}

fn run(
    sys: &FlowSystem<'_>,
    w0: &[f64],
    opts: &FlowOptions,
    mut stop: impl FnMut(&Sample) -> bool,
) -> Result<Trajectory> {
    opts.check()?;
    let model = sys.model;
    let n = model.rank();
    let mut w = w0.to_vec();
    sys.snap(&mut w, &sys.stratum);
    let (mut f, mut rho, mut gaps) = sys.eval(&w)?;

    let mut samples = vec![Sample {
        t: 0.0,
        w: w.clone(),
        rho,
        grad_norm: linalg::norm(&f),
    }];
    let mut clock = Clock::default();
    let mut history: Vec<StepRecord> = Vec::new();
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut h = f64::INFINITY;

    let finish = |samples: Vec<Sample>, status: FlowStatus, steps: usize, rejected: usize| Trajectory {
        samples,
        status,
        stratum: sys.stratum.clone(),
        convexity_warning: !sys.stratum.is_open() && model.has_minus_radials(),
        steps,
        rejected_steps: rejected,
    };

    loop {
        let f_norm = linalg::norm(&f);
        if f_norm < STATIONARY_TOL {
            return Ok(finish(samples, FlowStatus::Stationary { w }, steps, rejected));
        }
        let min_gap = sys.min_gap(&gaps);
        if sys.direction == Direction::Forward {
            if let Some((_, u)) = min_gap {
                if u <= opts.wall_eps {
                    let status = collapse(sys, &w, &f, &gaps, &clock, &history, opts);
                    return Ok(finish(samples, status, steps, rejected));
                }
            }
        }
        if stop(samples.last().expect("at least one sample")) {
            return Ok(finish(samples, FlowStatus::Interior, steps, rejected));
        }
        let t_now = clock.value();
        if steps >= opts.max_steps || t_now >= opts.t_max {
            return Ok(finish(samples, FlowStatus::Budget, steps, rejected));
        }

        let cap = match min_gap {
            Some((_, u)) => opts.max_step_frac * u / (f_norm * sys.beta_max),
            None => f64::INFINITY,
        };
        if !h.is_finite() {
            h = cap.min(0.01 * (1.0 + linalg::norm(&w)) / f_norm);
        }
        h = h.min(cap).min(opts.t_max - t_now);

        // One accepted step, retrying with smaller h as needed.
        loop {
            if h < f64::MIN_POSITIVE * 1e10 {
                return Ok(finish(samples, FlowStatus::Budget, steps, rejected));
            }
            match dp_step(sys, &w, &f, h) {
                Some((mut w_new, err_vec)) => {
                    let err = err_vec
                        .iter()
                        .zip(w.iter().zip(&w_new))
                        .map(|(e, (a, b))| {
                            let sc = opts.rtol * (1.0 + a.abs().max(b.abs()));
                            (e / sc).powi(2)
                        })
                        .sum::<f64>()
                        / n as f64;
                    // Near a wall the collapse time depends on the gap to
                    // relative accuracy, so the error is also measured
                    // against each gap.
                    let gaps_new = model.gaps(&w_new);
                    let gap_err = model
                        .walls()
                        .filter(|r| !sys.stratum.contains(r.id))
                        .map(|r| {
                            let u = gaps.plus[r.id].min(gaps_new.plus[r.id]);
                            (linalg::dot(&r.root, &err_vec) / (opts.rtol * u)).abs()
                        })
                        .fold(0.0, f64::max);
                    let err = err.sqrt().max(gap_err);
                    if err > 1.0 || err.is_nan() {
                        rejected += 1;
                        h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
                        continue;
                    }
                    sys.snap(&mut w_new, &sys.stratum);
                    let Ok((f_new, rho_new, gaps_new)) = sys.eval(&w_new) else {
                        rejected += 1;
                        h *= 0.5;
                        continue;
                    };
                    let monotone = match sys.direction {
                        Direction::Forward => rho_new >= rho - RHO_SLACK,
                        Direction::Backward => rho_new <= rho + RHO_SLACK,
                    };
                    if !monotone {
                        rejected += 1;
                        h *= 0.5;
                        continue;
                    }
                    clock.add(h);
                    steps += 1;
                    w = w_new;
                    f = f_new;
                    rho = rho_new;
                    gaps = gaps_new;
                    if let Some((_, u)) = sys.min_gap(&gaps) {
                        history.push(StepRecord { h, u_min_sq: u * u });
                    }
                    let t = clock.value();
                    if t > samples.last().expect("nonempty").t {
                        samples.push(Sample {
                            t,
                            w: w.clone(),
                            rho,
                            grad_norm: linalg::norm(&f),
                        });
                    }
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h *= grow;
                    break;
                }
                None => {
                    rejected += 1;
                    h *= 0.5;
                }
            }
        }
    }
}

/// One Dormand–Prince step. `None` if a stage leaves the domain.
fn dp_step(sys: &FlowSystem<'_>, w: &[f64], f0: &[f64], h: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = w.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(f0.to_vec());
    for row in &A {
        let mut y = w.to_vec();
        for (s, a) in row.iter().enumerate().take(k.len()) {
            if *a != 0.0 {
                for i in 0..n {
                    y[i] += h * a * k[s][i];
                }
            }
        }
        let (fy, _, _) = sys.eval(&y).ok()?;
        k.push(fy);
        if k.len() == 7 {
            let err = (0..n).map(|i| h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>()).collect();
            return Some((y, err));
        }
    }
    unreachable!("tableau has six rows")
}

fn collapse(
    sys: &FlowSystem<'_>,
    current: &[f64],
    f: &[f64],
    gaps: &Gaps,
    clock: &Clock,
    history: &[StepRecord],
    opts: &FlowOptions,
) -> FlowStatus {
    let model = sys.model;
    let active: Vec<usize> = model
        .walls()
        .filter(|r| !sys.stratum.contains(r.id) && gaps.plus[r.id] <= CORNER_FACTOR * opts.wall_eps)
        .map(|r| r.id)
        .collect();
    let remaining = if active.len() == 1 {
        let r = model.radial(active[0]);
        let u = gaps.plus[r.id];
        u * u / (2.0 * r.m_plus as f64 * sys.projected_norm_sq(&r.root))
    } else {
        corner_remaining(sys, f, gaps, history)
    };
    let t_collapse = clock.plus(remaining);

    let target = sys.stratum.union(&StratumId::new(active));
    let mut w_limit = current.to_vec();
    sys.snap(&mut w_limit, &target);
    let stratum = chamber::stratum_of(model, &w_limit, opts.wall_eps).unwrap_or(target);
    FlowStatus::Collapsed {
        t_collapse,
        w_limit,
        stratum,
    }
}

/// Remaining time at a corner approach: fit `u_min²` linearly in time over
/// the last steps and take its root.
fn corner_remaining(sys: &FlowSystem<'_>, f: &[f64], gaps: &Gaps, history: &[StepRecord]) -> f64 {
    const WINDOW: usize = 12;
    let (wall, u) = sys.min_gap(gaps).expect("collapse implies a wall");
    // Local rate from the field itself, used as fallback.
    let rate = linalg::dot(f, &sys.model.radial(wall).root);
    let local = if rate > 0.0 { u / (2.0 * rate) } else { 0.0 };
    if history.len() < 3 {
        return local;
    }
    let recent = &history[history.len().saturating_sub(WINDOW)..];
    // τ_k = time of record k relative to the final state (τ = 0).
    let mut tau = vec![0.0; recent.len()];
    for k in (0..recent.len() - 1).rev() {
        tau[k] = tau[k + 1] - recent[k + 1].h;
    }
    let m = recent.len() as f64;
    let (st, su) = (tau.iter().sum::<f64>() / m, recent.iter().map(|r| r.u_min_sq).sum::<f64>() / m);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, r) in tau.iter().zip(recent) {
        sxx += (t - st) * (t - st);
        sxy += (t - st) * (r.u_min_sq - su);
    }
    let slope = sxy / sxx;
    let intercept = su - slope * st;
    if slope < 0.0 && intercept > 0.0 && sxx > 0.0 {
        -intercept / slope
    } else {
        local
    }
}

/// Flow of `X` from an interior point.
pub fn integrate(model: &ChamberModel, w0: &[f64], opts: &FlowOptions) -> Result<Trajectory> {
    model.check_dim(w0)?;
    if !chamber::contains(model, w0)? {
        return Err(Error::NotInterior);
    }
    let sys = FlowSystem::new(model, StratumId::open(), Direction::Forward);
    run(&sys, w0, opts, |_| false)
}

/// Flow of the stratum field `X^σ` from a point of `σ_S`, constrained to
/// the affine span of the walls in `S`.
pub fn stratum_integrate(model: &ChamberModel, s: &StratumId, w0: &[f64], opts: &FlowOptions) -> Result<Trajectory> {
    model.check_dim(w0)?;
    s.check(model)?;
    if s.is_open() {
        return integrate(model, w0, opts);
    }
    let found = chamber::stratum_of(model, w0, DEFAULT_STRATUM_TOL)?;
    if &found != s {
        return Err(Error::NotOnStratum {
            expected: s.clone(),
            found,
        });
    }
    let sys = FlowSystem::new(model, s.clone(), Direction::Forward);
    run(&sys, w0, opts, |_| false)
}

/// Fits the limit of `(T − t) · max_{|v|=1} ‖A_v‖²_∞` over the late samples
/// of an open-face collapse and compares it with `1/(2 m⁺)`.
pub fn type_one_estimate(model: &ChamberModel, traj: &Trajectory) -> Result<TypeOneReport> {
    let FlowStatus::Collapsed {
        t_collapse, stratum, ..
    } = &traj.status
    else {
        return Err(Error::NotCollapsed);
    };
    let new_walls: Vec<usize> = stratum.walls().iter().copied().filter(|&i| !traj.stratum.contains(i)).collect();
    if new_walls.len() != 1 {
        return Err(Error::CornerCollapse(stratum.clone()));
    }
    let wall = new_walls[0];
    let (lo, hi) = TYPE_ONE_WINDOW;
    let mut us = Vec::new();
    let mut qs = Vec::new();
    let mut window = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &traj.samples {
        let g = model.gaps(&s.w);
        let u = g.plus[wall];
        let remaining = t_collapse - s.t;
        if !(lo..=hi).contains(&u) || remaining <= 0.0 {
            continue;
        }
        // Samples where another wall is still comparable belong to a
        // corner approach, not to the single-wall asymptotics.
        let crowded = model
            .walls()
            .any(|r| r.id != wall && !traj.stratum.contains(r.id) && g.plus[r.id] < SEPARATION * u);
        if crowded {
            continue;
        }
        let mut g_open = g.clone();
        for &i in traj.stratum.walls() {
            g_open.plus[i] = f64::INFINITY;
        }
        let sup = spectrum::sup_norm_sq_from_gaps(model, &g_open);
        us.push(u);
        qs.push(remaining * sup);
        window = (window.0.min(s.t), window.1.max(s.t));
    }
    if us.len() < 10 {
        return Err(Error::FitWindow(us.len()));
    }
    // q(u) = q₀ + q₁ u + q₂ u²; the linear term comes from the other walls.
    let a = DMatrix::from_fn(us.len(), 3, |i, j| us[i].powi(j as i32));
    let b = DVector::from_column_slice(&qs);
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|_| Error::FitWindow(us.len()))?;
    let estimate = coef[0];
    let predicted = 1.0 / (2.0 * model.radial(wall).m_plus as f64);
    Ok(TypeOneReport {
        wall,
        estimate,
        predicted,
        rel_error: (estimate - predicted).abs() / predicted,
        fit_window: window,
        samples_used: us.len(),
        fibration_assumed: true,
    })
}

/// Interior points whose flow ends at one boundary point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinCurve {
    pub target: Vec<f64>,
    pub stratum: StratumId,
    /// Unit vector pointing into the chamber along which the curve leaves
    /// the target.
    pub inward: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub status: FlowStatus,
}

/// Default decrease of `ρ` along a traced basin curve.
pub const DEFAULT_BASIN_SPAN: f64 = 20.0;

/// Inward direction along which flow lines reach `w_star`: the reversed
/// limit direction of `X` as the target is approached.
fn inward_direction(model: &ChamberModel, w_star: &[f64], s: &StratumId, eps: f64) -> Result<Vec<f64>> {
    if s.len() == 1 {
        let r = &model.radial(s.walls()[0]).root;
        return Ok(linalg::scale(r, -1.0 / linalg::norm(r)));
    }
    let mut d = vec![0.0; model.rank()];
    for &i in s.walls() {
        let r = model.radial(i);
        d = linalg::add_scaled(&d, -(r.m_plus as f64) / r.root_norm_sq().sqrt(), &r.root);
    }
    let mut d = linalg::scale(&d, 1.0 / linalg::norm(&d));
    for _ in 0..500 {
        let p = linalg::add_scaled(w_star, eps, &d);
        let x = match field::grad(model, &p) {
            Ok(x) => x,
            Err(_) => break,
        };
        let target = linalg::scale(&x, -1.0 / linalg::norm(&x));
        let mixed = linalg::add_scaled(&d, 1.0, &target);
        let next = linalg::scale(&mixed, 1.0 / linalg::norm(&mixed));
        let change = linalg::distance(&next, &d);
        d = next;
        if change < 1e-13 {
            break;
        }
    }
    Ok(d)
}

/// Traces the basin of `w_star` by running the flow backward from a point
/// `10·wall_eps` inside the chamber until `ρ` has dropped by `span`.
pub fn basin_curve(model: &ChamberModel, w_star: &[f64], opts: &FlowOptions, span: f64) -> Result<BasinCurve> {
    model.check_dim(w_star)?;
    opts.check()?;
    let s = chamber::stratum_of(model, w_star, DEFAULT_STRATUM_TOL.max(opts.wall_eps))?;
    if s.is_open() {
        return Err(Error::NotOnBoundary);
    }
    let open = FlowSystem::new(model, StratumId::open(), Direction::Backward);
    let mut target = w_star.to_vec();
    open.snap(&mut target, &s);
    let delta = 10.0 * opts.wall_eps;
    let inward = inward_direction(model, &target, &s, delta)?;
    let start = linalg::add_scaled(&target, delta, &inward);
    if !chamber::contains(model, &start)? {
        return Err(Error::NotInterior);
    }
    let rho0 = field::rho(model, &start)?;
    let traj = run(&open, &start, opts, |s| rho0 - s.rho >= span)?;
    Ok(BasinCurve {
        target,
        stratum: s,
        inward,
        points: traj.samples.into_iter().map(|s| s.w).collect(),
        status: traj.status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinCheck {
    pub start: Vec<f64>,
    pub w_limit: Option<Vec<f64>>,
    pub distance: f64,
    pub reached: bool,
}

/// Indices of `count` points spread evenly along `points`, skipping the
/// seed itself.
pub fn spread_indices(len: usize, count: usize) -> Vec<usize> {
    if len < 2 || count == 0 {
        return Vec::new();
    }
    let count = count.min(len - 1);
    (1..=count).map(|k| k * (len - 1) / count).collect()
}

fn forward_check(model: &ChamberModel, start: Vec<f64>, target: &[f64], opts: &FlowOptions) -> BasinCheck {
    let tol = 10.0 * opts.wall_eps;
    match integrate(model, &start, opts) {
        Ok(traj) => match traj.status.limit() {
            Some((w, _)) => {
                let distance = linalg::distance(w, target);
                BasinCheck {
                    w_limit: Some(w.to_vec()),
                    distance,
                    reached: distance <= tol,
                    start,
                }
            }
            None => BasinCheck {
                start,
                w_limit: None,
                distance: f64::INFINITY,
                reached: false,
            },
        },
        Err(_) => BasinCheck {
            start,
            w_limit: None,
            distance: f64::INFINITY,
            reached: false,
        },
    }
}

fn run_checks(model: &ChamberModel, starts: Vec<Vec<f64>>, target: &[f64], opts: &FlowOptions) -> Vec<BasinCheck> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = starts
            .into_iter()
            .map(|start| scope.spawn(move || forward_check(model, start, target, opts)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("flow worker panicked")).collect()
    })
}

/// Forward-flows `count` points of the curve and reports where they land.
pub fn verify_basin(model: &ChamberModel, curve: &BasinCurve, opts: &FlowOptions, count: usize) -> Vec<BasinCheck> {
    let starts = spread_indices(curve.points.len(), count)
        .into_iter()
        .map(|k| curve.points[k].clone())
        .collect();
    run_checks(model, starts, &curve.target, opts)
}

/// Displaces `count` curve points by `offset` orthogonally to the curve and
/// forward-flows them. Points off the curve should land away from the
/// target.
pub fn transversal_checks(
    model: &ChamberModel,
    curve: &BasinCurve,
    opts: &FlowOptions,
    count: usize,
    offset: f64,
) -> Vec<BasinCheck> {
    let pts = &curve.points;
    let mut starts = Vec::new();
    for (n, k) in spread_indices(pts.len(), count).into_iter().enumerate() {
        let a = &pts[k.saturating_sub(1)];
        let b = &pts[(k + 1).min(pts.len() - 1)];
        let tangent = linalg::sub(b, a);
        let tn = linalg::norm(&tangent);
        if tn == 0.0 {
            continue;
        }
        let tangent = linalg::scale(&tangent, 1.0 / tn);
        let Some(normal) = orthogonal_unit(&tangent) else { continue };
        // Alternate sides so both neighbours of the curve are exercised.
        let side = if n % 2 == 0 { offset } else { -offset };
        let p = linalg::add_scaled(&pts[k], side, &normal);
        if chamber::contains(model, &p).unwrap_or(false) {
            starts.push(p);
        } else {
            starts.push(linalg::add_scaled(&pts[k], -side, &normal));
        }
    }
    run_checks(model, starts, &curve.target, opts)
}

fn orthogonal_unit(t: &[f64]) -> Option<Vec<f64>> {
    (0..t.len())
        .map(|k| {
            let mut e = vec![0.0; t.len()];
            e[k] = 1.0;
            linalg::add_scaled(&e, -t[k], t)
        })
        .max_by(|a, b| linalg::norm(a).total_cmp(&linalg::norm(b)))
        .filter(|v| linalg::norm(v) > 1e-8)
        .map(|v| linalg::scale(&v, 1.0 / linalg::norm(&v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    #[test]
    fn clock_keeps_tiny_steps() {
        let mut c = Clock::default();
        c.add(0.4);
        for _ in 0..1000 {
            c.add(1e-19);
        }
        assert!(((c.plus(0.0) - 0.4) - 1e-16).abs() < 6e-17);
        let naive = (0..1000).fold(0.4, |t, _| t + 1e-19);
        assert_eq!(naive, 0.4);
    }

    #[test]
    fn options_are_checked() {
        let bad = FlowOptions {
            max_step_frac: 1.0,
            ..FlowOptions::default()
        };
        assert!(bad.check().is_err());
        assert!(FlowOptions::default().check().is_ok());
    }

    #[test]
    fn rank1_collapse_time() {
        let m = builtin("rank1", &[1.0, 0.0, 1.0]).unwrap();
        let traj = integrate(&m, &[0.0], &FlowOptions::default()).unwrap();
        let (w, s) = traj.status.limit().unwrap();
        assert!((traj.status.collapse_time().unwrap() - 0.433_780_830_483_027_2).abs() < 1e-8);
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert_eq!(s, &StratumId::new(vec![0]));
    }

    #[test]
    fn slab_is_stationary() {
        let m = builtin("slab", &[1.0, 1.0]).unwrap();
        let traj = integrate(&m, &[0.0], &FlowOptions::default()).unwrap();
        assert_eq!(traj.status, FlowStatus::Stationary { w: vec![0.0] });
    }

    #[test]
    fn rejects_exterior_start() {
        let m = builtin("rank1", &[]).unwrap();
        assert!(matches!(integrate(&m, &[1.5], &FlowOptions::default()), Err(Error::NotInterior)));
    }

    #[test]
    fn budget_status() {
        let m = builtin("rank1", &[]).unwrap();
        let opts = FlowOptions {
            max_steps: 3,
            ..FlowOptions::default()
        };
        assert_eq!(integrate(&m, &[0.0], &opts).unwrap().status, FlowStatus::Budget);
    }

    #[test]
    fn spread() {
        assert_eq!(spread_indices(11, 5), vec![2, 4, 6, 8, 10]);
        assert_eq!(spread_indices(3, 10), vec![1, 2]);
        assert!(spread_indices(1, 3).is_empty());
    }
}
