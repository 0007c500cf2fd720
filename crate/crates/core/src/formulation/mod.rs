//! DistFlow-family optimization models over a radial [`Network`].
//!
//! Every branch `k` is oriented parent -> child and carries one sending-end flow
//! `P_k + jQ_k`. Squared voltages `w` live on buses, squared currents `l` on
//! branches (lossy models only).

mod exact;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{self, ConicError, ConicProblem, Solution, SolveStatus, SolverSettings};
use crate::geometry::Point2;
use crate::grid::Network;

pub use exact::{branch_tightness, solve_distflow_exact};
pub use sweep::{audit_state, sweep_power_flow, BusState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FormulationKind {
    DistFlowExact,
    SocDistFlow,
    LinDistFlow,
}

impl FormulationKind {
    pub const ALL: [FormulationKind; 3] = [
        FormulationKind::DistFlowExact,
        FormulationKind::SocDistFlow,
        FormulationKind::LinDistFlow,
    ];

    /// Name used on the command line and in output files.
    pub fn as_str(&self) -> &'static str {
        match self {
            FormulationKind::DistFlowExact => "distflow",
            FormulationKind::SocDistFlow => "soc",
            FormulationKind::LinDistFlow => "lindistflow",
        }
    }
}

impl std::fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FormulationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "distflow" => Ok(FormulationKind::DistFlowExact),
            "soc" => Ok(FormulationKind::SocDistFlow),
            "lindistflow" => Ok(FormulationKind::LinDistFlow),
            other => Err(format!(
                "unknown formulation '{other}' (expected distflow, soc or lindistflow)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulationError {
    #[error("direction (0, 0) has no objective")]
    ZeroDirection,
    #[error("direction coefficients must be finite")]
    NonFiniteDirection,
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("tightening loop stalled after {iterations} iterations (residual {residual:.3e})")]
    CcpStalled {
        point: Point2,
        residual: f64,
        iterations: usize,
    },
    #[error(
        "power flow sweep did not converge in {iterations} iterations (last change {delta:.3e})"
    )]
    NonConvergent { iterations: usize, delta: f64 },
    #[error("expected {expected} generator setpoints, got {got}")]
    SetpointCount { expected: usize, got: usize },
}

/// Linear objective `alpha * p1 + beta * q1`, minimized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionObjective {
    alpha: f64,
    beta: f64,
}

impl DirectionObjective {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, FormulationError> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(FormulationError::NonFiniteDirection);
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(FormulationError::ZeroDirection);
        }
        Ok(DirectionObjective { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn min_p() -> Self {
        DirectionObjective {
            alpha: 1.0,
            beta: 0.0,
        }
    }

    pub fn max_p() -> Self {
        DirectionObjective {
            alpha: -1.0,
            beta: 0.0,
        }
    }

    pub fn min_q() -> Self {
        DirectionObjective {
            alpha: 0.0,
            beta: 1.0,
        }
    }

    pub fn max_q() -> Self {
        DirectionObjective {
            alpha: 0.0,
            beta: -1.0,
        }
    }
}

/// Problem columns of every semantic variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarIndex {
    pub gen_p: Vec<usize>,
    pub gen_q: Vec<usize>,
    pub flow_p: Vec<usize>,
    pub flow_q: Vec<usize>,
    pub w: Vec<usize>,
    /// Empty for LinDistFlow.
    pub l: Vec<usize>,
    /// Per branch, head `(w + l)/2` and first tail entry `(w - l)/2` of the
    /// flow cone. Empty for LinDistFlow.
    pub cone_t: Vec<usize>,
    pub cone_d: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ModelInstance<'a> {
    pub kind: FormulationKind,
    pub network: &'a Network,
    pub problem: ConicProblem,
    pub var_index: VarIndex,
    pub pcc_p_col: usize,
    pub pcc_q_col: usize,
}

/// Optional box on the PCC exchange, intersected with the model's own bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PccBounds {
    pub p: (f64, f64),
    pub q: (f64, f64),
}

impl Default for PccBounds {
    fn default() -> Self {
        PccBounds {
            p: (f64::NEG_INFINITY, f64::INFINITY),
            q: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

impl PccBounds {
    pub fn fix_p(p: f64) -> Self {
        PccBounds {
            p: (p, p),
            ..Default::default()
        }
    }

    fn is_free(&self) -> bool {
        *self == PccBounds::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub solver: SolverSettings,
    pub ccp_tol: f64,
    pub ccp_max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: SolverSettings::default(),
            ccp_tol: 1e-6,
            ccp_max_iter: 20,
        }
    }
}

/// Outcome of one directional problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalSolve {
    pub solution: Solution,
    pub point: Point2,
    /// Largest `w_i l_ij - (p_ij^2 + q_ij^2)`; zero for LinDistFlow.
    pub tightness: f64,
    /// Conic solves spent (more than one only for the exact model).
    pub solves: usize,
}

impl<'a> ModelInstance<'a> {
    pub fn pcc_point(&self, x: &[f64]) -> Point2 {
        Point2::new(x[self.pcc_p_col], x[self.pcc_q_col])
    }

    /// `(p, q)` of every generator, in generator order.
    pub fn generator_setpoints(&self, x: &[f64]) -> Vec<(f64, f64)> {
        self.var_index
            .gen_p
            .iter()
            .zip(&self.var_index.gen_q)
            .map(|(&p, &q)| (x[p], x[q]))
            .collect()
    }

    /// Copy of the problem with `objective` installed and the PCC box applied.
    pub(crate) fn directional_problem(
        &self,
        objective: &DirectionObjective,
        bounds: &PccBounds,
    ) -> Result<Option<ConicProblem>, FormulationError> {
        let mut prob = self.problem.clone();
        let mut coefs = vec![(self.pcc_p_col, objective.alpha)];
        if self.pcc_q_col == self.pcc_p_col {
            coefs[0].1 += objective.beta;
        } else {
            coefs.push((self.pcc_q_col, objective.beta));
        }
        prob.set_objective(&coefs)?;
        if !bounds.is_free() {
            for (col, (lo, hi)) in [(self.pcc_p_col, bounds.p), (self.pcc_q_col, bounds.q)] {
                let (l0, h0) = prob.bounds(col);
                let (lo, hi) = (l0.max(lo), h0.min(hi));
                if lo > hi {
                    return Ok(None);
                }
                prob.set_bounds(col, lo, hi)?;
            }
        }
        Ok(Some(prob))
    }
}

/// Lossless linear model: a pure LP.
pub fn build_lindistflow(network: &Network) -> ModelInstance<'_> {
    build(network, FormulationKind::LinDistFlow)
}

/// Second-order cone relaxation of DistFlow.
pub fn build_soc_distflow(network: &Network) -> ModelInstance<'_> {
    build(network, FormulationKind::SocDistFlow)
}

/// Assembles the model for `kind`. The exact model shares the SOC problem;
/// its non-convex equality is enforced at solve time.
pub fn build(network: &Network, kind: FormulationKind) -> ModelInstance<'_> {
    let lossy = kind != FormulationKind::LinDistFlow;
    let mut prob = ConicProblem::new(0);
    let mut vi = VarIndex::default();

    for g in network.generators() {
        vi.gen_p.push(prob.add_var(g.p_min, g.p_max));
        vi.gen_q.push(prob.add_var(g.q_min, g.q_max));
    }
    for (k, br) in network.branches().iter().enumerate() {
        let s = br.s_max;
        // lossy models bound |s| with a cone instead of the per-component box
        let (lo, hi) = if lossy {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (-s, s)
        };
        vi.flow_p.push(prob.add_var(lo, hi));
        vi.flow_q.push(prob.add_var(lo, hi));
        if lossy {
            // any exact point has l = |s|^2 / w <= s_max^2 / v_min^2
            let vmin = network.buses()[network.branch_from(k)].v_min;
            vi.l.push(prob.add_var(0.0, s * s / (vmin * vmin)));
        }
    }
    let pcc = network.pcc();
    for (i, b) in network.buses().iter().enumerate() {
        let (lo, hi) = if i == pcc {
            (1.0, 1.0)
        } else {
            (b.v_min * b.v_min, b.v_max * b.v_max)
        };
        vi.w.push(prob.add_var(lo, hi));
    }

    let loads = network.bus_loads();
    let mut gens_at: Vec<Vec<usize>> = vec![Vec::new(); network.buses().len()];
    for g in 0..network.generators().len() {
        gens_at[network.generator_bus(g)].push(g);
    }

    // PCC exchange: alias the single root branch when nothing else sits at the PCC.
    let root_children = network.children_of(pcc);
    let alias = root_children.len() == 1 && gens_at[pcc].is_empty() && loads[pcc] == (0.0, 0.0);
    let (pcc_p_col, pcc_q_col) = if alias {
        let k = root_children[0].0;
        (vi.flow_p[k], vi.flow_q[k])
    } else {
        (
            prob.add_var(f64::NEG_INFINITY, f64::INFINITY),
            prob.add_var(f64::NEG_INFINITY, f64::INFINITY),
        )
    };

    // Nodal balance: inflow - losses + generation - load - outflow = 0.
    for (j, _) in network.buses().iter().enumerate() {
        if j == pcc && alias {
            continue;
        }
        let mut p_row = Vec::new();
        let mut q_row = Vec::new();
        match network.parent_branch(j) {
            Some(k) => {
                p_row.push((vi.flow_p[k], 1.0));
                q_row.push((vi.flow_q[k], 1.0));
                if lossy {
                    let br = &network.branches()[k];
                    p_row.push((vi.l[k], -br.r));
                    q_row.push((vi.l[k], -br.x));
                }
            }
            None => {
                p_row.push((pcc_p_col, 1.0));
                q_row.push((pcc_q_col, 1.0));
            }
        }
        for &g in &gens_at[j] {
            p_row.push((vi.gen_p[g], 1.0));
            q_row.push((vi.gen_q[g], 1.0));
        }
        for &(k, _) in network.children_of(j) {
            p_row.push((vi.flow_p[k], -1.0));
            q_row.push((vi.flow_q[k], -1.0));
        }
        prob.add_eq(p_row, loads[j].0).expect("balance row");
        prob.add_eq(q_row, loads[j].1).expect("balance row");
    }

    // Voltage drop along each branch.
    for (k, br) in network.branches().iter().enumerate() {
        let (i, j) = (network.branch_from(k), network.branch_to(k));
        let mut row = vec![
            (vi.w[i], 1.0),
            (vi.w[j], -1.0),
            (vi.flow_p[k], -2.0 * br.r),
            (vi.flow_q[k], -2.0 * br.x),
        ];
        if lossy {
            row.push((vi.l[k], br.r * br.r + br.x * br.x));
        }
        prob.add_eq(row, 0.0).expect("voltage row");
    }

    if lossy {
        for (k, br) in network.branches().iter().enumerate() {
            let i = network.branch_from(k);
            // p^2 + q^2 <= w l  <=>  (w + l)/2 >= ||((w - l)/2, p, q)||
            let t = prob.add_var(f64::NEG_INFINITY, f64::INFINITY);
            let d = prob.add_var(f64::NEG_INFINITY, f64::INFINITY);
            prob.add_eq(vec![(t, 1.0), (vi.w[i], -0.5), (vi.l[k], -0.5)], 0.0)
                .expect("cone aux");
            prob.add_eq(vec![(d, 1.0), (vi.w[i], -0.5), (vi.l[k], 0.5)], 0.0)
                .expect("cone aux");
            prob.add_soc(t, vec![d, vi.flow_p[k], vi.flow_q[k]])
                .expect("flow cone");
            vi.cone_t.push(t);
            vi.cone_d.push(d);
            let h = prob.add_var(br.s_max, br.s_max);
            prob.add_soc(h, vec![vi.flow_p[k], vi.flow_q[k]])
                .expect("thermal cone");
        }
    }

    ModelInstance {
        kind,
        network,
        problem: prob,
        var_index: vi,
        pcc_p_col,
        pcc_q_col,
    }
}

/// Solves one directional problem on `instance`.
pub fn solve_direction(
    instance: &ModelInstance<'_>,
    objective: &DirectionObjective,
) -> Result<DirectionalSolve, FormulationError> {
    solve_direction_with(
        instance,
        objective,
        &PccBounds::default(),
        &SolveOptions::default(),
    )
}

/// [`solve_direction`] with an extra PCC box and explicit options.
pub fn solve_direction_with(
    instance: &ModelInstance<'_>,
    objective: &DirectionObjective,
    bounds: &PccBounds,
    opts: &SolveOptions,
) -> Result<DirectionalSolve, FormulationError> {
    if instance.kind == FormulationKind::DistFlowExact {
        return exact::solve_exact_bounded(instance, objective, bounds, opts);
    }
    let Some(prob) = instance.directional_problem(objective, bounds)? else {
        return Ok(empty_box(instance));
    };
    let solution = conic::solve(&prob, &opts.solver)?;
    let point = instance.pcc_point(&solution.x);
    let tightness = if instance.kind == FormulationKind::SocDistFlow && solution.is_optimal() {
        branch_tightness(instance, &solution.x)
            .into_iter()
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(DirectionalSolve {
        solution,
        point,
        tightness,
        solves: 1,
    })
}

/// Result reported when the PCC box does not intersect the model bounds.
fn empty_box(instance: &ModelInstance<'_>) -> DirectionalSolve {
    DirectionalSolve {
        solution: Solution {
            status: SolveStatus::Infeasible,
            x: vec![f64::NAN; instance.problem.n_vars()],
            objective_value: f64::NAN,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            gap: f64::NAN,
            iterations: 0,
        },
        point: Point2::new(f64::NAN, f64::NAN),
        tightness: 0.0,
        solves: 0,
    }
}
