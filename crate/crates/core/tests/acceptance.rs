//! Acceptance suite. Runs sequentially (no libtest harness) and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

mod support;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use quickflex::conic::{check_solution, solve, SolveStatus, SolverSettings};
use quickflex::formulation::{build, sweep_power_flow, FormulationKind};
use quickflex::geometry::Point2;
use quickflex::grid::{Generator, Network};
use quickflex::io::{compare, write_comparison};
use quickflex::region::{quickflex_run, run, AlgorithmConfig, Method, RegionResult};
use support::{battery, fixture, FIXTURES};

const KINDS: [FormulationKind; 3] = [
    FormulationKind::DistFlowExact,
    FormulationKind::SocDistFlow,
    FormulationKind::LinDistFlow,
];
const LARGE: &str = "ieee13";

type Verdict = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;

/// QuickFlex results for every fixture and formulation, with wall time.
struct QfTable(BTreeMap<(&'static str, FormulationKind), (RegionResult, Duration)>);

impl QfTable {
    fn compute() -> Self {
        let mut table = BTreeMap::new();
        for name in FIXTURES {
            let net = fixture(name);
            for kind in KINDS {
                let start = Instant::now();
                let r = quickflex_run(&net, &AlgorithmConfig::new(Method::QuickFlex, kind))
                    .unwrap_or_else(|e| panic!("qf {name} {kind}: {e}"));
                table.insert((name, kind), (r, start.elapsed()));
            }
        }
        QfTable(table)
    }

    fn get(&self, name: &'static str, kind: FormulationKind) -> &(RegionResult, Duration) {
        &self.0[&(name, kind)]
    }
}

fn qf_config(kind: FormulationKind) -> AlgorithmConfig {
    AlgorithmConfig::new(Method::QuickFlex, kind)
}

fn two_bus_exactness() -> Verdict {
    let net = fixture("twobus");
    let start = Instant::now();
    let r =
        quickflex_run(&net, &qf_config(FormulationKind::LinDistFlow)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let corners = [(-0.5, -0.3), (-0.5, 0.7), (0.5, 0.7), (0.5, -0.3)];
    let corners_ok = corners.iter().all(|&(p, q)| {
        r.polygon
            .vertices()
            .iter()
            .any(|v| v.dist(&Point2::new(p, q)) <= 1e-6)
    });
    let detail = format!(
        "area {:.9}, {} vertices, {secs:.3}s",
        r.area(),
        r.polygon.len()
    );
    if (r.area() - 1.0).abs() <= 1e-6 && corners_ok && secs < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dense_direction_oracle(qf: &QfTable) -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in FIXTURES {
        let net = fixture(name);
        let mut total = Duration::ZERO;
        let mut worst: f64 = 0.0;
        for kind in KINDS {
            let (q, t) = qf.get(name, kind);
            let start = Instant::now();
            let rr = run(
                &net,
                &AlgorithmConfig::new(Method::RadialReconstruction, kind).with_k(360),
            )
            .map_err(|e| format!("rr {name} {kind}: {e}"))?;
            total += *t + start.elapsed();
            let rel = (q.area() - rr.area()).abs() / rr.area();
            worst = worst.max(rel);
        }
        ok &= worst <= 5e-3 && total.as_secs_f64() < 60.0;
        lines.push(format!(
            "{name}: worst gap {:.3}% in {:.1}s",
            100.0 * worst,
            total.as_secs_f64()
        ));
    }
    let detail = lines.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn relaxation_ordering(qf: &QfTable) -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in FIXTURES {
        let exact = qf.get(name, FormulationKind::DistFlowExact).0.area();
        let soc = qf.get(name, FormulationKind::SocDistFlow).0.area();
        let lin = qf.get(name, FormulationKind::LinDistFlow).0.area();
        let margin = (soc - exact) / exact;
        ok &= soc >= exact;
        if name == LARGE {
            ok &= margin > 0.01;
        }
        let mut line = format!("{name}: soc/exact {:+.2}%", 100.0 * margin);
        if lin <= exact {
            // an approximation, not a relaxation: reported only
            line.push_str(&format!(
                " (warning: lindistflow {:.4} <= exact {:.4})",
                lin, exact
            ));
        }
        lines.push(line);
    }
    let detail = lines.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn baseline_ordering() -> Verdict {
    let net = fixture(LARGE);
    let cmp = compare(&net, FormulationKind::DistFlowExact, 1e-3, 0).map_err(|e| e.to_string())?;
    let qf = cmp.qf.area();
    let (mc, ec, rr) = (cmp.mc.area() / qf, cmp.ec.area() / qf, cmp.rr.area() / qf);
    let detail = format!("k={} mc {mc:.4}, ec {ec:.4}, rr {rr:.4}", cmp.qf.k());
    let bounded = [mc, ec, rr].iter().all(|&f| f <= 1.0 + 1e-6);
    if mc < ec && mc < rr && bounded && mc < 0.8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Accepted points after the four initial extremes fall below 1e-2 within ten
/// acceptances; a run that converges with fewer acceptances has already
/// certified every remaining gain to be at most epsilon.
fn error_evolution(qf: &QfTable) -> Verdict {
    let mut failures = Vec::new();
    let mut firsts = Vec::new();
    for name in FIXTURES {
        for kind in KINDS {
            let r = &qf.get(name, kind).0;
            let monotone = r.trace.windows(2).all(|w| w[1].area >= w[0].area);
            let accepted: Vec<f64> = r
                .trace
                .iter()
                .skip(4)
                .filter(|t| t.accepted)
                .map(|t| t.eps)
                .collect();
            let first = accepted.iter().take(10).position(|&e| e < 1e-2);
            let capped = r.status_counts.contains_key("point_cap");
            let fast = first.is_some() || (accepted.len() < 10 && !capped);
            firsts.push(first.map_or(0, |i| i + 1));
            if !(monotone && fast) {
                failures.push(format!("{name}/{kind}"));
            }
        }
    }
    let worst = firsts.iter().max().copied().unwrap_or(0);
    let detail = format!("below 1e-2 by accepted point {worst} at the latest");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing: {}", failures.join(", ")))
    }
}

fn split_generators(net: &Network) -> Network {
    let mut data = net.to_data();
    data.generators = data
        .generators
        .iter()
        .flat_map(|g| {
            let half = Generator {
                p_min: g.p_min / 2.0,
                p_max: g.p_max / 2.0,
                q_min: g.q_min / 2.0,
                q_max: g.q_max / 2.0,
                ..g.clone()
            };
            [half.clone(), half]
        })
        .collect();
    Network::new(data).expect("split network is valid")
}

fn der_count_independence(qf: &QfTable) -> Verdict {
    let doubled = split_generators(&fixture(LARGE));
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in KINDS {
        let k1 = qf.get(LARGE, kind).0.k();
        let k2 = quickflex_run(&doubled, &qf_config(kind))
            .map_err(|e| e.to_string())?
            .k();
        let change = (k2 as f64 - k1 as f64) / k1 as f64;
        ok &= change.abs() <= 0.2;
        lines.push(format!("{kind} k {k1} -> {k2}"));
    }
    let detail = lines.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn solver_suite() -> Verdict {
    let settings = SolverSettings::default();
    let mut worst_obj: f64 = 0.0;
    let mut worst_feas: f64 = 0.0;
    let mut failures = Vec::new();
    let all = battery();
    for inst in &all {
        let sol = solve(&inst.problem, &settings).map_err(|e| e.to_string())?;
        let obj = (sol.objective_value - inst.optimum).abs();
        let feas = check_solution(&inst.problem, &sol.x).max();
        worst_obj = worst_obj.max(obj);
        worst_feas = worst_feas.max(feas);
        if sol.status != SolveStatus::Optimal || !(obj <= 1e-6) || !(feas <= 1e-7) {
            failures.push(inst.name.clone());
        }
    }
    let detail = format!(
        "{} instances, worst |obj - obj*| {worst_obj:.1e}, worst residual {worst_feas:.1e}",
        all.len()
    );
    if failures.is_empty() && all.len() == 20 {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing: {}", failures.join(", ")))
    }
}

/// Sending-end flow of a two-bus feeder with unit source voltage, solved in
/// closed form from the quadratic for the squared current.
fn two_bus_closed_form(r: f64, x: f64, p2: f64, q2: f64) -> (f64, f64) {
    let a = r * r + x * x;
    let b = 2.0 * (r * p2 + x * q2) - 1.0;
    let c = p2 * p2 + q2 * q2;
    let l = 2.0 * c / (-b + (b * b - 4.0 * a * c).sqrt());
    (p2 + r * l, q2 + x * l)
}

fn physics_audit(qf: &QfTable) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut vertices = 0;
    for name in FIXTURES {
        let net = fixture(name);
        let inst = build(&net, FormulationKind::DistFlowExact);
        let r = &qf.get(name, FormulationKind::DistFlowExact).0;
        for v in r.polygon.vertices() {
            let entry = r
                .trace
                .iter()
                .find(|t| t.point.dist(v) <= 1e-12 && !t.primal.is_empty())
                .ok_or_else(|| format!("{name}: vertex {v:?} has no stored solution"))?;
            let st = sweep_power_flow(&net, &inst.generator_setpoints(&entry.primal), 1e-12, 1000)
                .map_err(|e| format!("{name}: {e}"))?;
            worst = worst.max(st.pcc.dist(v));
            vertices += 1;
        }
    }

    let net = fixture("twobus");
    let br = &net.branches()[0];
    let load = &net.loads()[0];
    let mut closed: f64 = 0.0;
    for pg in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for qg in [-0.5, -0.1, 0.2, 0.5] {
            let st = sweep_power_flow(&net, &[(pg, qg)], 1e-14, 1000).map_err(|e| e.to_string())?;
            let (p, q) = two_bus_closed_form(br.r, br.x, load.p - pg, load.q - qg);
            closed = closed.max((st.pcc.p - p).abs()).max((st.pcc.q - q).abs());
        }
    }
    let detail = format!(
        "{vertices} vertices, worst mismatch {worst:.1e}; sweep vs closed form {closed:.1e}"
    );
    if worst <= 1e-4 && closed <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Verdict {
    let net = fixture(LARGE);
    let dirs = [tempfile::tempdir(), tempfile::tempdir()];
    let mut outputs = Vec::new();
    for d in &dirs {
        let d = d.as_ref().map_err(|e| e.to_string())?;
        let cmp =
            compare(&net, FormulationKind::DistFlowExact, 1e-3, 0).map_err(|e| e.to_string())?;
        write_comparison(&cmp, d.path()).map_err(|e| e.to_string())?;
        outputs.push(d.path().to_path_buf());
    }
    let mut files = 0;
    for sub in ["qf", "mc", "ec", "rr"] {
        for file in ["region.csv", "trace.csv", "metrics.json", "region.svg"] {
            let read = |root: &std::path::Path| std::fs::read(root.join(sub).join(file));
            let (a, b) = (read(&outputs[0]), read(&outputs[1]));
            match (a, b) {
                (Ok(a), Ok(b)) if a == b => files += 1,
                (Ok(_), Ok(_)) => return Err(format!("{sub}/{file} differs")),
                (Err(e), _) | (_, Err(e)) => return Err(format!("{sub}/{file}: {e}")),
            }
        }
    }
    for file in ["metrics.csv", "region.svg"] {
        let a = std::fs::read(outputs[0].join(file)).map_err(|e| e.to_string())?;
        let b = std::fs::read(outputs[1].join(file)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{file} differs"));
        }
        files += 1;
    }
    Ok(format!("{files} files byte-identical across two runs"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let qf = QfTable::compute();
    let criteria: Vec<(&str, Check)> = vec![
        ("two-bus LinDistFlow exactness", Box::new(two_bus_exactness)),
        (
            "dense-direction oracle",
            Box::new(|| dense_direction_oracle(&qf)),
        ),
        ("relaxation ordering", Box::new(|| relaxation_ordering(&qf))),
        ("baseline ordering", Box::new(baseline_ordering)),
        ("error evolution", Box::new(|| error_evolution(&qf))),
        (
            "DER-count independence",
            Box::new(|| der_count_independence(&qf)),
        ),
        ("solver unit suite", Box::new(solver_suite)),
        ("physics audit", Box::new(|| physics_audit(&qf))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
