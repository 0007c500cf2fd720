//! Exact DistFlow through a convex-concave tightening loop on the SOC relaxation.

use super::sweep_power_flow;
use super::{
    empty_box, DirectionObjective, DirectionalSolve, FormulationError, FormulationKind,
    ModelInstance, PccBounds, SolveOptions,
};
use crate::conic::{self, check_solution, ConicProblem, Solution};

/// Per-branch residual `w_i l_ij - (p_ij^2 + q_ij^2)`; zero when the cone is tight.
/// Empty for models without current variables.
pub fn branch_tightness(instance: &ModelInstance<'_>, x: &[f64]) -> Vec<f64> {
    let vi = &instance.var_index;
    (0..vi.l.len())
        .map(|k| {
            let i = instance.network.branch_from(k);
            let (p, q) = (x[vi.flow_p[k]], x[vi.flow_q[k]]);
            x[vi.w[i]] * x[vi.l[k]] - (p * p + q * q)
        })
        .collect()
}

/// Solves one direction on the non-convex model. `instance` must be a lossy
/// model (SOC or exact). The SOC relaxation is solved first; branches whose
/// residual exceeds `opts.ccp_tol` then get their cone replaced by a convex
/// restriction of the reverse inequality, linearized at the incumbent and
/// re-linearized each iteration until residuals vanish and the objective is
/// stationary.
pub fn solve_distflow_exact(
    instance: &ModelInstance<'_>,
    objective: &DirectionObjective,
    opts: &SolveOptions,
) -> Result<DirectionalSolve, FormulationError> {
    solve_exact_bounded(instance, objective, &PccBounds::default(), opts)
}

/// Penalty on restriction slacks, relative to the direction norm.
const SLACK_PENALTY: f64 = 1e3;
/// Change in the directional objective below which the loop is stationary (pu).
const STATIONARY_TOL: f64 = 1e-7;

pub(super) fn solve_exact_bounded(
    instance: &ModelInstance<'_>,
    objective: &DirectionObjective,
    bounds: &PccBounds,
    opts: &SolveOptions,
) -> Result<DirectionalSolve, FormulationError> {
    debug_assert!(instance.kind != FormulationKind::LinDistFlow);
    let Some(base) = instance.directional_problem(objective, bounds)? else {
        return Ok(empty_box(instance));
    };
    let vi = &instance.var_index;
    let nb = vi.l.len();
    let penalty = SLACK_PENALTY * objective.alpha().hypot(objective.beta());
    let value = |x: &[f64]| {
        let pt = instance.pcc_point(x);
        objective.alpha() * pt.p + objective.beta() * pt.q
    };

    let mut solution = conic::solve(&base, &opts.solver)?;
    let mut solves = 1;
    if !solution.is_optimal() {
        // the relaxation itself failed: propagate the status
        return Ok(DirectionalSolve {
            point: instance.pcc_point(&solution.x),
            solution,
            tightness: f64::NAN,
            solves,
        });
    }
    let mut rho = branch_tightness(instance, &solution.x);
    let mut cut = vec![false; nb];
    // Branches the objective is nearly blind to: once cut, their current can
    // settle below the physical value. They get the relaxed cone back for good.
    let mut released = vec![false; nb];
    let mut previous = f64::INFINITY;

    loop {
        let worst = rho.iter().fold(0.0, |m: f64, r| m.max(r.abs()));
        let current = value(&solution.x);
        let settled = (previous - current).abs() <= STATIONARY_TOL;
        let stationary = !cut.contains(&true) || settled;
        if worst <= opts.ccp_tol && (stationary || solves >= opts.ccp_max_iter) {
            let point = instance.pcc_point(&solution.x);
            solution.objective_value = current;
            return Ok(DirectionalSolve {
                solution,
                point,
                tightness: worst,
                solves,
            });
        }
        // Settled with slack left on branches the objective barely sees (or
        // out of iterations): fall back to the power flow at these setpoints.
        if settled || solves >= opts.ccp_max_iter {
            if let Some(done) = projected(instance, &base, objective, solution.clone(), solves) {
                return Ok(done);
            }
        }
        if solves >= opts.ccp_max_iter {
            return Err(FormulationError::CcpStalled {
                point: instance.pcc_point(&solution.x),
                residual: worst,
                iterations: solves,
            });
        }
        for (k, &r) in rho.iter().enumerate() {
            if settled && cut[k] && r < -opts.ccp_tol {
                cut[k] = false;
                released[k] = true;
            }
            cut[k] |= r > opts.ccp_tol && !released[k];
        }

        // On every cut branch, swap the relaxed cone p^2 + q^2 <= w l for its
        // convex restriction: with t = (w + l)/2, d = (w - l)/2 and
        // u = (d, p, q), w l = t^2 - d^2 so the reverse inequality reads
        // t^2 <= |u|^2, and |u|^2 is replaced by its tangent at the incumbent.
        let mut prob = base.clone();
        let mut obj = vec![
            (instance.pcc_p_col, objective.alpha()),
            (instance.pcc_q_col, objective.beta()),
        ];
        let x = &solution.x;
        for k in (0..nb).filter(|&k| cut[k]) {
            let (t, d) = (vi.cone_t[k], vi.cone_d[k]);
            let (p, q) = (vi.flow_p[k], vi.flow_q[k]);
            prob.remove_soc(t);
            let (d0, p0, q0) = (x[d], x[p], x[q]);
            let h0 = d0 * d0 + p0 * p0 + q0 * q0;
            let slack = prob.add_var(0.0, f64::INFINITY);
            obj.push((slack, penalty));
            // t^2 <= m  with  m = 2 u0.u - |u0|^2 + slack,
            // as  (m + 1)/2 >= ||(t, (m - 1)/2)||
            let tangent = [(d, -d0), (p, -p0), (q, -q0), (slack, -0.5)];
            let head = prob.add_var(f64::NEG_INFINITY, f64::INFINITY);
            let tail = prob.add_var(f64::NEG_INFINITY, f64::INFINITY);
            let mut row = vec![(head, 1.0)];
            row.extend(tangent);
            prob.add_eq(row, (1.0 - h0) / 2.0)?;
            let mut row = vec![(tail, 1.0)];
            row.extend(tangent);
            prob.add_eq(row, (-1.0 - h0) / 2.0)?;
            prob.add_soc(head, vec![t, tail])?;
        }
        prob.set_objective(&obj)?;
        let next = conic::solve(&prob, &opts.solver)?;
        solves += 1;
        if !next.is_optimal() {
            if let Some(done) = projected(instance, &base, objective, solution.clone(), solves) {
                return Ok(done);
            }
            return Err(FormulationError::CcpStalled {
                point: instance.pcc_point(&solution.x),
                residual: worst,
                iterations: solves,
            });
        }
        previous = current;
        solution = next;
        solution.x.truncate(base.n_vars());
        rho = branch_tightness(instance, &solution.x);
    }
}

/// Largest violation of `prob` accepted for a power-flow projected point.
const PROJECTION_TOL: f64 = 1e-6;
const SWEEP_TOL: f64 = 1e-12;
const SWEEP_MAX_ITER: usize = 1000;

/// Re-solves the branch flows exactly for the generator setpoints in
/// `solution` and returns that operating point, provided it still satisfies
/// every limit of `prob` to within [`PROJECTION_TOL`].
fn projected(
    instance: &ModelInstance<'_>,
    prob: &ConicProblem,
    objective: &DirectionObjective,
    mut solution: Solution,
    solves: usize,
) -> Option<DirectionalSolve> {
    let net = instance.network;
    let vi = &instance.var_index;
    let setpoints = instance.generator_setpoints(&solution.x);
    let st = sweep_power_flow(net, &setpoints, SWEEP_TOL, SWEEP_MAX_ITER).ok()?;
    let x = &mut solution.x;
    for k in 0..vi.l.len() {
        let wi = st.w[net.branch_from(k)];
        x[vi.flow_p[k]] = st.p[k];
        x[vi.flow_q[k]] = st.q[k];
        x[vi.l[k]] = st.l[k];
        x[vi.cone_t[k]] = 0.5 * (wi + st.l[k]);
        x[vi.cone_d[k]] = 0.5 * (wi - st.l[k]);
    }
    for (i, &col) in vi.w.iter().enumerate() {
        x[col] = st.w[i];
    }
    x[instance.pcc_p_col] = st.pcc.p;
    x[instance.pcc_q_col] = st.pcc.q;
    if check_solution(prob, x).max() > PROJECTION_TOL {
        return None;
    }
    let tightness = branch_tightness(instance, x)
        .iter()
        .fold(0.0, |m: f64, r| m.max(r.abs()));
    solution.objective_value = objective.alpha() * st.pcc.p + objective.beta() * st.pcc.q;
    Some(DirectionalSolve {
        solution,
        point: st.pcc,
        tightness,
        solves,
    })
}
