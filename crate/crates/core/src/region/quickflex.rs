use std::collections::VecDeque;

use super::{AlgorithmConfig, Explorer, Found, Method, RegionError, RegionResult, TraceEntry};
use crate::conic::SolveStatus;
use crate::formulation::{DirectionObjective, PccBounds};
use crate::geometry::{
    facet_objective, hull_any, insert_vertex, outward_distance, Point2, Polygon, Segment, MERGE_TOL,
};
use crate::grid::Network;

/// Weight of the tie-breaking objective added to each initial extreme.
const LEX_WEIGHT: f64 = 1e-3;

/// QuickFlex: four extreme problems, then facet-by-facet outward search
/// until every facet's best candidate adds at most `epsilon` relative area.
pub fn quickflex_run(
    network: &Network,
    config: &AlgorithmConfig,
) -> Result<RegionResult, RegionError> {
    config.validate()?;
    let mut ex = Explorer::new(network, config);
    let mut trace: Vec<TraceEntry> = Vec::new();

    // Initial hull. Each extreme direction is tilted slightly toward a second
    // objective so that flat faces resolve to the corner that comes first in
    // clockwise order.
    let plan = [
        (DirectionObjective::min_p(), DirectionObjective::max_q()),
        (DirectionObjective::max_q(), DirectionObjective::max_p()),
        (DirectionObjective::max_p(), DirectionObjective::min_q()),
        (DirectionObjective::min_q(), DirectionObjective::min_p()),
    ];
    let mut points: Vec<Point2> = Vec::new();
    let mut area = 0.0;
    for (primary, secondary) in plan {
        let objective = DirectionObjective::new(
            primary.alpha() + LEX_WEIGHT * secondary.alpha(),
            primary.beta() + LEX_WEIGHT * secondary.beta(),
        )?;
        let found = match ex.solve(&objective, &PccBounds::default())? {
            Ok(found) => found,
            Err(SolveStatus::Infeasible) => {
                return Err(RegionError::EmptyRegion(
                    "the grid has no feasible operating point".into(),
                ))
            }
            Err(_) => continue,
        };
        points.push(found.point);
        let new_area = hull_any(&points).area();
        trace.push(super::hull_entry(
            trace.len() + 1,
            area,
            new_area,
            found,
            true,
        ));
        area = new_area;
    }
    if points.is_empty() {
        return Err(RegionError::EmptyRegion(
            "no extreme problem could be solved".into(),
        ));
    }

    // Facet refinement.
    let mut poly = hull_any(&points);
    let mut queue: VecDeque<Segment> = poly.edges().into();
    while let Some(seg) = queue.pop_front() {
        if trace.len() >= config.max_points {
            *ex.status_counts.entry("point_cap".into()).or_insert(0) += 1;
            break;
        }
        // retired by an earlier insertion
        if poly.edge_index(&seg).is_none() {
            continue;
        }
        let Ok(objective) = facet_objective(&seg) else {
            continue;
        };
        let Ok(found) = ex.solve(&objective, &PccBounds::default())? else {
            continue;
        };
        let prev = poly.area();
        let k = trace.len() + 1;
        let distance = outward_distance(&seg, found.point).unwrap_or(0.0);
        if distance <= MERGE_TOL {
            trace.push(TraceEntry {
                k,
                area: prev,
                eps: 0.0,
                point: found.point,
                accepted: false,
                primal: found.primal,
            });
            continue;
        }
        let candidate = grow(&poly, &seg, found.point);
        let new_area = candidate.area();
        let eps = if new_area > 0.0 {
            (new_area - prev) / new_area
        } else {
            0.0
        };
        if eps > config.epsilon {
            // Normally the two halves of `seg`; a re-hull can reshape more.
            let mut fresh: Vec<Segment> = candidate
                .edges()
                .into_iter()
                .filter(|e| poly.edge_index(e).is_none())
                .collect();
            if let Some(i) = fresh
                .iter()
                .position(|e| e.b.dist(&found.point) <= MERGE_TOL)
            {
                fresh.rotate_left(i);
            }
            queue.extend(fresh);
            poly = candidate;
            trace.push(accepted_entry(k, new_area, eps, found));
        } else {
            trace.push(TraceEntry {
                k,
                area: prev,
                eps,
                point: found.point,
                accepted: false,
                primal: found.primal,
            });
        }
    }

    Ok(RegionResult {
        method: Method::QuickFlex,
        formulation: config.formulation,
        polygon: poly,
        explored: trace.len(),
        trace,
        solve_count: ex.solve_count,
        status_counts: ex.status_counts,
    })
}

fn accepted_entry(k: usize, area: f64, eps: f64, found: Found) -> TraceEntry {
    TraceEntry {
        k,
        area,
        eps,
        point: found.point,
        accepted: true,
        primal: found.primal,
    }
}

/// Splices `pt` into the hull across `seg`, re-hulling when solver noise would
/// otherwise leave a reflex vertex.
fn grow(poly: &Polygon, seg: &Segment, pt: Point2) -> Polygon {
    match insert_vertex(poly, seg, pt) {
        Ok((p, _, _)) if p.is_convex_clockwise() => p,
        _ => {
            let mut pts = poly.vertices().to_vec();
            pts.push(pt);
            hull_any(&pts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::tests::two_bus;
    use crate::formulation::FormulationKind;

    fn cfg(kind: FormulationKind) -> AlgorithmConfig {
        AlgorithmConfig::new(Method::QuickFlex, kind)
    }

    #[test]
    fn two_bus_lindistflow_rectangle() {
        let net = two_bus();
        let r = quickflex_run(&net, &cfg(FormulationKind::LinDistFlow)).unwrap();
        assert!((r.area() - 1.0).abs() < 1e-6, "{}", r.area());
        assert_eq!(r.polygon.len(), 4);
        assert!(r.solve_count <= 8, "{}", r.solve_count);
        let expect = [(-0.5, -0.3), (-0.5, 0.7), (0.5, 0.7), (0.5, -0.3)];
        for e in expect {
            let hit = r
                .polygon
                .vertices()
                .iter()
                .any(|v| v.dist(&Point2::new(e.0, e.1)) < 1e-6);
            assert!(hit, "{e:?} missing from {:?}", r.polygon.vertices());
        }
    }

    #[test]
    fn huge_epsilon_keeps_initial_hull() {
        let net = two_bus();
        let r = quickflex_run(&net, &cfg(FormulationKind::SocDistFlow).with_epsilon(1.0)).unwrap();
        assert!(r.trace.iter().skip(4).all(|t| !t.accepted));
        assert!(r.polygon.len() <= 4);
    }

    #[test]
    fn trace_is_monotone_and_covers_vertices() {
        let net = two_bus();
        let r = quickflex_run(&net, &cfg(FormulationKind::DistFlowExact)).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1].area >= w[0].area);
        }
        for v in r.polygon.vertices() {
            assert!(r.trace.iter().any(|t| t.point.dist(v) <= 1e-9));
        }
        assert!(r
            .trace
            .iter()
            .skip(4)
            .filter(|t| t.accepted)
            .all(|t| t.eps > 1e-3));
        assert!(r.polygon.is_convex_clockwise());
    }

    #[test]
    fn infeasible_grid_is_empty_region() {
        let mut data = crate::grid::tests::two_bus_data();
        // demand far beyond what the line can carry
        data.loads[0].p = 5.0;
        data.generators.clear();
        let net = Network::new(data).unwrap();
        let err = quickflex_run(&net, &cfg(FormulationKind::LinDistFlow)).unwrap_err();
        assert!(matches!(err, RegionError::EmptyRegion(_)), "{err:?}");
    }

    #[test]
    fn rejects_nonpositive_epsilon() {
        let net = two_bus();
        let err = quickflex_run(&net, &cfg(FormulationKind::LinDistFlow).with_epsilon(-1.0));
        assert_eq!(
            err.unwrap_err(),
            RegionError::InvalidConfig("epsilon must be positive".into())
        );
    }
}
