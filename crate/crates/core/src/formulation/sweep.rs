//! Backward/forward sweep power flow for radial feeders.

use super::FormulationError;
use crate::geometry::Point2;
use crate::grid::Network;

/// Converged power-flow state. Bus vectors follow bus index order, branch
/// vectors follow branch order.
#[derive(Debug, Clone, PartialEq)]
pub struct BusState {
    pub w: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub l: Vec<f64>,
    pub pcc: Point2,
    pub iterations: usize,
}

fn net_demand(network: &Network, setpoints: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut d = network.bus_loads();
    for (g, &(p, q)) in setpoints.iter().enumerate() {
        let j = network.generator_bus(g);
        d[j].0 -= p;
        d[j].1 -= q;
    }
    d
}

/// Solves the DistFlow equations for fixed generator outputs, starting from a
/// flat profile. Stops once the largest change in `w`, `p` or `q` is within `tol`.
pub fn sweep_power_flow(
    network: &Network,
    setpoints: &[(f64, f64)],
    tol: f64,
    max_iter: usize,
) -> Result<BusState, FormulationError> {
    let ng = network.generators().len();
    if setpoints.len() != ng {
        return Err(FormulationError::SetpointCount {
            expected: ng,
            got: setpoints.len(),
        });
    }
    let demand = net_demand(network, setpoints);
    let nb = network.branches().len();
    let order = network.topological_order();
    let pcc = network.pcc();
    let mut w = vec![1.0; network.buses().len()];
    let mut p = vec![0.0; nb];
    let mut q = vec![0.0; nb];
    let mut l = vec![0.0; nb];
    let mut delta = f64::INFINITY;

    for iter in 1..=max_iter {
        delta = 0.0;
        for &j in order.iter().rev() {
            let Some(k) = network.parent_branch(j) else {
                continue;
            };
            let br = &network.branches()[k];
            let (mut pk, mut qk) = demand[j];
            for &(c, _) in network.children_of(j) {
                pk += p[c];
                qk += q[c];
            }
            pk += br.r * l[k];
            qk += br.x * l[k];
            delta = f64::max(delta, (pk - p[k]).abs().max((qk - q[k]).abs()));
            p[k] = pk;
            q[k] = qk;
        }
        for &j in order {
            let Some(k) = network.parent_branch(j) else {
                continue;
            };
            let br = &network.branches()[k];
            let i = network.branch_from(k);
            l[k] = (p[k] * p[k] + q[k] * q[k]) / w[i];
            let wj = w[i] - 2.0 * (br.r * p[k] + br.x * q[k]) + (br.r * br.r + br.x * br.x) * l[k];
            delta = delta.max((wj - w[j]).abs());
            w[j] = wj;
        }
        if !delta.is_finite() || w.iter().any(|&v| !(v > 0.0)) {
            return Err(FormulationError::NonConvergent {
                iterations: iter,
                delta,
            });
        }
        if delta <= tol {
            let (mut p1, mut q1) = demand[pcc];
            for &(c, _) in network.children_of(pcc) {
                p1 += p[c];
                q1 += q[c];
            }
            return Ok(BusState {
                w,
                p,
                q,
                l,
                pcc: Point2::new(p1, q1),
                iterations: iter,
            });
        }
    }
    Err(FormulationError::NonConvergent {
        iterations: max_iter,
        delta,
    })
}

/// Largest violation of the DistFlow equations (nodal balance with losses,
/// voltage drop, apparent-power identity) at `state`.
pub fn audit_state(network: &Network, setpoints: &[(f64, f64)], state: &BusState) -> f64 {
    let demand = net_demand(network, setpoints);
    let mut worst: f64 = 0.0;
    for (j, d) in demand.iter().enumerate() {
        let (mut inp, mut inq) = match network.parent_branch(j) {
            Some(k) => {
                let br = &network.branches()[k];
                (
                    state.p[k] - br.r * state.l[k],
                    state.q[k] - br.x * state.l[k],
                )
            }
            None => (state.pcc.p, state.pcc.q),
        };
        for &(c, _) in network.children_of(j) {
            inp -= state.p[c];
            inq -= state.q[c];
        }
        worst = worst.max((inp - d.0).abs()).max((inq - d.1).abs());
    }
    for (k, br) in network.branches().iter().enumerate() {
        let (i, j) = (network.branch_from(k), network.branch_to(k));
        let drop = state.w[i] - state.w[j] - 2.0 * (br.r * state.p[k] + br.x * state.q[k])
            + (br.r * br.r + br.x * br.x) * state.l[k];
        let s2 = state.p[k] * state.p[k] + state.q[k] * state.q[k];
        worst = worst
            .max(drop.abs())
            .max((state.w[i] * state.l[k] - s2).abs());
    }
    worst
}
