//! Flexibility-region construction: QuickFlex and the sampling/sweeping baselines.

mod baselines;
mod quickflex;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::conic::SolveStatus;
use crate::formulation::{
    build, solve_direction_with, DirectionObjective, FormulationError, FormulationKind,
    ModelInstance, PccBounds, SolveOptions,
};
use crate::geometry::{Point2, Polygon};
use crate::grid::Network;

pub use baselines::{epsilon_constrained_run, monte_carlo_run, radial_reconstruction_run};
pub use quickflex::quickflex_run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    QuickFlex,
    MonteCarlo,
    EpsilonConstrained,
    RadialReconstruction,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::QuickFlex,
        Method::MonteCarlo,
        Method::EpsilonConstrained,
        Method::RadialReconstruction,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::QuickFlex => "qf",
            Method::MonteCarlo => "mc",
            Method::EpsilonConstrained => "ec",
            Method::RadialReconstruction => "rr",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method '{s}' (expected qf, mc, ec or rr)"))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty flexibility region: {0}")]
    EmptyRegion(String),
    #[error("reference region is degenerate")]
    Degenerate,
    #[error(transparent)]
    Formulation(#[from] FormulationError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmConfig {
    pub method: Method,
    pub formulation: FormulationKind,
    /// QuickFlex area-increase tolerance.
    pub epsilon: f64,
    /// Point budget for MC/EC/RR; ignored by QuickFlex.
    pub k: usize,
    pub seed: u64,
    /// QuickFlex cap on explored points.
    pub max_points: usize,
    pub solve: SolveOptions,
}

impl AlgorithmConfig {
    pub fn new(method: Method, formulation: FormulationKind) -> Self {
        AlgorithmConfig {
            method,
            formulation,
            epsilon: 1e-3,
            k: 28,
            seed: 0,
            max_points: 500,
            solve: SolveOptions::default(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), RegionError> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(RegionError::InvalidConfig(
                "epsilon must be positive".into(),
            ));
        }
        match self.method {
            Method::RadialReconstruction if self.k < 3 => Err(RegionError::InvalidConfig(
                "k must be at least 3 for rr".into(),
            )),
            Method::MonteCarlo | Method::EpsilonConstrained if self.k == 0 => {
                Err(RegionError::InvalidConfig("k must be positive".into()))
            }
            Method::QuickFlex if self.max_points < 4 => Err(RegionError::InvalidConfig(
                "max_points must be at least 4".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// One explored operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// Number of points explored so far, this one included.
    pub k: usize,
    /// Region area after this point was considered.
    pub area: f64,
    /// Relative area increase this point produced (or would have produced).
    pub eps: f64,
    pub point: Point2,
    /// Whether the point became part of the region.
    pub accepted: bool,
    /// Optimizer primal vector behind the point; empty for sampled points.
    pub primal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionResult {
    pub method: Method,
    pub formulation: FormulationKind,
    pub polygon: Polygon,
    pub trace: Vec<TraceEntry>,
    /// Operating points explored (the `k` of the comparison tables).
    pub explored: usize,
    /// Optimization problems (or power flows, for MC) solved.
    pub solve_count: usize,
    pub status_counts: BTreeMap<String, usize>,
}

impl RegionResult {
    pub fn area(&self) -> f64 {
        self.polygon.area()
    }

    pub fn k(&self) -> usize {
        self.explored
    }

    /// Area increase of the last accepted point, or 0 when nothing was accepted.
    pub fn eps_final(&self) -> f64 {
        self.trace
            .iter()
            .rev()
            .find(|t| t.accepted)
            .map_or(0.0, |t| t.eps)
    }
}

/// Runs the method named in `config`.
pub fn run(network: &Network, config: &AlgorithmConfig) -> Result<RegionResult, RegionError> {
    match config.method {
        Method::QuickFlex => quickflex_run(network, config),
        Method::MonteCarlo => monte_carlo_run(network, config),
        Method::EpsilonConstrained => epsilon_constrained_run(network, config),
        Method::RadialReconstruction => radial_reconstruction_run(network, config),
    }
}

/// `area(candidate) / area(reference)`.
pub fn recovered_fraction(
    candidate: &RegionResult,
    reference: &RegionResult,
) -> Result<f64, RegionError> {
    let denom = reference.area();
    if !(denom > 0.0) {
        return Err(RegionError::Degenerate);
    }
    Ok(candidate.area() / denom)
}

fn status_key(status: SolveStatus) -> &'static str {
    status.as_str()
}

/// Directional solves with bookkeeping shared by the optimization-based methods.
pub(crate) struct Explorer<'a> {
    pub instance: ModelInstance<'a>,
    pub opts: SolveOptions,
    pub solve_count: usize,
    pub status_counts: BTreeMap<String, usize>,
}

/// Successful directional solve.
pub(crate) struct Found {
    pub point: Point2,
    pub primal: Vec<f64>,
}

impl<'a> Explorer<'a> {
    pub fn new(network: &'a Network, config: &AlgorithmConfig) -> Self {
        Explorer {
            instance: build(network, config.formulation),
            opts: config.solve,
            solve_count: 0,
            status_counts: BTreeMap::new(),
        }
    }

    fn bump(&mut self, key: &str) {
        *self.status_counts.entry(key.to_string()).or_insert(0) += 1;
    }

    /// Solves one direction. `Ok(Err(status))` reports a solve that produced no usable point.
    pub fn solve(
        &mut self,
        objective: &DirectionObjective,
        bounds: &PccBounds,
    ) -> Result<Result<Found, SolveStatus>, RegionError> {
        match solve_direction_with(&self.instance, objective, bounds, &self.opts) {
            Ok(r) => {
                self.solve_count += r.solves.max(1);
                self.bump(status_key(r.solution.status));
                if r.solution.is_optimal() && r.point.p.is_finite() && r.point.q.is_finite() {
                    Ok(Ok(Found {
                        point: r.point,
                        primal: r.solution.x,
                    }))
                } else {
                    Ok(Err(r.solution.status))
                }
            }
            Err(FormulationError::CcpStalled { iterations, .. }) => {
                self.solve_count += iterations;
                self.bump("ccp_stalled");
                Ok(Err(SolveStatus::NumericalFailure))
            }
            Err(e) => Err(e.into()),
        }
    }
}

/// Builds a trace entry for a hull-based method that always keeps the point set's hull.
pub(crate) fn hull_entry(
    k: usize,
    prev: f64,
    area: f64,
    found: Found,
    accepted: bool,
) -> TraceEntry {
    let eps = if area > 0.0 {
        (area - prev) / area
    } else {
        0.0
    };
    TraceEntry {
        k,
        area,
        eps,
        point: found.point,
        accepted,
        primal: found.primal,
    }
}
