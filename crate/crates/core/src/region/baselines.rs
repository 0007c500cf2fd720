//! Monte Carlo, epsilon-constrained and radial-reconstruction baselines.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{hull_entry, AlgorithmConfig, Explorer, Found, Method, RegionError, RegionResult};
use crate::conic::SolveStatus;
use crate::formulation::{sweep_power_flow, BusState, DirectionObjective, PccBounds};
use crate::geometry::{hull_any, Point2};
use crate::grid::Network;

const SWEEP_TOL: f64 = 1e-10;
const SWEEP_MAX_ITER: usize = 500;
/// Slack allowed when checking sampled states against limits.
const LIMIT_TOL: f64 = 1e-9;

/// Accumulates points and their running hull into a [`RegionResult`].
struct HullBuilder {
    points: Vec<Point2>,
    trace: Vec<super::TraceEntry>,
    area: f64,
}

impl HullBuilder {
    fn new() -> Self {
        HullBuilder {
            points: Vec::new(),
            trace: Vec::new(),
            area: 0.0,
        }
    }

    fn push(&mut self, k: usize, found: Found) {
        self.points.push(found.point);
        let area = hull_any(&self.points).area();
        self.trace.push(hull_entry(k, self.area, area, found, true));
        self.area = area;
    }

    fn finish(
        self,
        method: Method,
        config: &AlgorithmConfig,
        explored: usize,
        solve_count: usize,
        status_counts: BTreeMap<String, usize>,
    ) -> Result<RegionResult, RegionError> {
        if self.points.is_empty() {
            return Err(RegionError::EmptyRegion(format!(
                "{method} found no feasible operating point"
            )));
        }
        Ok(RegionResult {
            method,
            formulation: config.formulation,
            polygon: hull_any(&self.points),
            trace: self.trace,
            explored,
            solve_count,
            status_counts,
        })
    }
}

/// Uniform draw on `[lo, hi]` from the top 53 bits of the next output.
fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + u * (hi - lo)
}

fn within_limits(network: &Network, st: &BusState) -> bool {
    let pcc = network.pcc();
    let voltages_ok = network.buses().iter().enumerate().all(|(i, b)| {
        i == pcc
            || (st.w[i] >= b.v_min * b.v_min - LIMIT_TOL
                && st.w[i] <= b.v_max * b.v_max + LIMIT_TOL)
    });
    let thermal_ok =
        network.branches().iter().enumerate().all(|(k, br)| {
            st.p[k] * st.p[k] + st.q[k] * st.q[k] <= br.s_max * br.s_max + LIMIT_TOL
        });
    voltages_ok && thermal_ok
}

/// Samples `k` generator setpoint vectors uniformly over the generator boxes,
/// keeps the power flows that respect every limit and returns their hull.
///
/// Randomness comes from ChaCha8 seeded with `config.seed`; the active and
/// reactive draws of generator `g` use streams `2g` and `2g + 1`.
pub fn monte_carlo_run(
    network: &Network,
    config: &AlgorithmConfig,
) -> Result<RegionResult, RegionError> {
    config.validate()?;
    let mut streams: Vec<(ChaCha8Rng, ChaCha8Rng)> = (0..network.generators().len() as u64)
        .map(|g| {
            let mut p = ChaCha8Rng::seed_from_u64(config.seed);
            p.set_stream(2 * g);
            let mut q = ChaCha8Rng::seed_from_u64(config.seed);
            q.set_stream(2 * g + 1);
            (p, q)
        })
        .collect();
    let mut hull = HullBuilder::new();
    let mut counts = BTreeMap::new();
    for i in 0..config.k {
        let setpoints: Vec<(f64, f64)> = network
            .generators()
            .iter()
            .zip(streams.iter_mut())
            .map(|(g, (rp, rq))| (uniform(rp, g.p_min, g.p_max), uniform(rq, g.q_min, g.q_max)))
            .collect();
        let key = match sweep_power_flow(network, &setpoints, SWEEP_TOL, SWEEP_MAX_ITER) {
            Err(_) => "nonconvergent",
            Ok(st) if !within_limits(network, &st) => "limit_violation",
            Ok(st) => {
                hull.push(
                    i + 1,
                    Found {
                        point: st.pcc,
                        primal: Vec::new(),
                    },
                );
                "feasible"
            }
        };
        *counts.entry(key.to_string()).or_insert(0) += 1;
    }
    hull.finish(Method::MonteCarlo, config, config.k, config.k, counts)
}

/// `n` equidistant values on `[a, b]`; the midpoint when `n == 1`.
fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Abscissae for the epsilon-constrained sweep: `ceil(k/4)` values on each
/// side of zero within `[lo, hi]`, range endpoints pulled inward by a hair so
/// the fixed-p problems keep an interior, and zero kept once.
fn ec_abscissae(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let n = k.div_ceil(4);
    let nudge = 1e-6 * (hi - lo);
    let mut xs = Vec::new();
    if lo < 0.0 {
        let b = if hi < 0.0 { hi - nudge } else { 0.0 };
        xs.extend(linspace(lo + nudge, b, n));
    }
    if hi > 0.0 {
        let a = if lo > 0.0 { lo + nudge } else { 0.0 };
        xs.extend(linspace(a, hi - nudge, n));
    }
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        if !out.iter().any(|&y| (y - x).abs() <= 1e-12) {
            out.push(x);
        }
    }
    out
}

/// Fixes `p1` at equidistant values across its range and extremizes `q1` at each.
pub fn epsilon_constrained_run(
    network: &Network,
    config: &AlgorithmConfig,
) -> Result<RegionResult, RegionError> {
    config.validate()?;
    let mut ex = Explorer::new(network, config);
    let mut hull = HullBuilder::new();
    let free = PccBounds::default();
    let lo = match ex.solve(&DirectionObjective::min_p(), &free)? {
        Ok(found) => found,
        Err(SolveStatus::Infeasible) => {
            return Err(RegionError::EmptyRegion(
                "the grid has no feasible operating point".into(),
            ))
        }
        Err(status) => {
            return Err(RegionError::EmptyRegion(format!(
                "p1 range could not be determined ({})",
                status.as_str()
            )))
        }
    };
    let (p_lo, lo_pt) = (lo.point.p, lo.point);
    hull.push(1, lo);
    let p_hi = match ex.solve(&DirectionObjective::max_p(), &free)? {
        Ok(found) => {
            let p = found.point.p;
            hull.push(2, found);
            p
        }
        Err(_) => lo_pt.p,
    };
    let mut explored = hull.trace.len();
    for x in ec_abscissae(p_lo, p_hi, config.k) {
        for objective in [DirectionObjective::max_q(), DirectionObjective::min_q()] {
            // an infeasible slice is simply skipped
            if let Ok(found) = ex.solve(&objective, &PccBounds::fix_p(x))? {
                explored += 1;
                hull.push(explored, found);
            }
        }
    }
    hull.finish(
        Method::EpsilonConstrained,
        config,
        explored,
        ex.solve_count,
        ex.status_counts,
    )
}

/// Maximizes `cos(t) p1 + sin(t) q1` for `k` evenly spaced angles `t`.
pub fn radial_reconstruction_run(
    network: &Network,
    config: &AlgorithmConfig,
) -> Result<RegionResult, RegionError> {
    config.validate()?;
    let mut ex = Explorer::new(network, config);
    let mut hull = HullBuilder::new();
    let mut explored = 0;
    for i in 0..config.k {
        let theta = 2.0 * PI * i as f64 / config.k as f64;
        let objective = DirectionObjective::new(-theta.cos(), -theta.sin())?;
        if let Ok(found) = ex.solve(&objective, &PccBounds::default())? {
            explored += 1;
            hull.push(explored, found);
        }
    }
    hull.finish(
        Method::RadialReconstruction,
        config,
        explored,
        ex.solve_count,
        ex.status_counts,
    )
}
