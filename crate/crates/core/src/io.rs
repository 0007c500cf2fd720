//! Network files in, region artifacts out.
//!
//! Every number written to disk is rounded to 12 significant digits and then
//! printed in shortest form, so identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use crate::formulation::FormulationKind;
use crate::geometry::Polygon;
use crate::grid::{GridError, Network, NetworkData, ValidationReport};
use crate::region::{recovered_fraction, run, AlgorithmConfig, Method, RegionError, RegionResult};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed network JSON in {}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid network in {}:\n{report}", path.display())]
    Invalid {
        path: PathBuf,
        report: ValidationReport,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("nothing to plot: every polygon is degenerate")]
    NothingToPlot,
    #[error("{method}: {source}")]
    Region { method: Method, source: RegionError },
}

/// Reads, parses and validates a network file.
pub fn parse_network(path: impl AsRef<Path>) -> Result<Network, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.into(),
        source,
    })?;
    network_from_str(&text, path)
}

/// Parses network JSON; `origin` only labels diagnostics.
pub fn network_from_str(text: &str, origin: impl AsRef<Path>) -> Result<Network, IoError> {
    let path = origin.as_ref();
    let data: NetworkData = serde_json::from_str(text).map_err(|source| IoError::Json {
        path: path.into(),
        source,
    })?;
    Network::new(data).map_err(|e| match e {
        GridError::Invalid(report) => IoError::Invalid {
            path: path.into(),
            report,
        },
        // Network::new reports everything through validation
        GridError::UnknownBus(id) => IoError::Invalid {
            path: path.into(),
            report: ValidationReport {
                violations: vec![crate::grid::Violation {
                    kind: crate::grid::ViolationKind::UnknownBus,
                    path: String::new(),
                    message: format!("unknown bus id {id}"),
                }],
            },
        },
    })
}

pub fn network_to_string(network: &Network) -> String {
    // NetworkData is plain data; serialization cannot fail
    serde_json::to_string_pretty(&network.to_data()).expect("network serializes")
}

pub fn write_network(network: &Network, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_file(path.as_ref(), &(network_to_string(network) + "\n"))
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// 12-significant-digit text, shortest form; `-0` prints as `0`.
pub fn fmt_num(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x) + 0.0)
    } else {
        Value::Null
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Write {
        path: path.into(),
        source,
    })
}

pub fn region_csv(polygon: &Polygon) -> String {
    let mut s = String::from("p,q\n");
    for v in polygon.vertices() {
        let _ = writeln!(s, "{},{}", fmt_num(v.p), fmt_num(v.q));
    }
    s
}

pub fn trace_csv(result: &RegionResult) -> String {
    let mut s = String::from("k,area,eps_k,p,q,accepted\n");
    for t in &result.trace {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            t.k,
            fmt_num(t.area),
            fmt_num(t.eps),
            fmt_num(t.point.p),
            fmt_num(t.point.q),
            u8::from(t.accepted)
        );
    }
    s
}

/// Metrics document for one run. Timing is deliberately left out so the file
/// is reproducible.
pub fn metrics_json(result: &RegionResult, fraction: Option<f64>) -> Value {
    let mut m = json!({
        "method": result.method.as_str(),
        "formulation": result.formulation.as_str(),
        "k": result.k(),
        "vertices": result.polygon.len(),
        "area": json_num(result.area()),
        "eps_final": json_num(result.eps_final()),
        "solve_count": result.solve_count,
        "status_counts": result.status_counts,
    });
    if let Some(f) = fraction {
        m["recovered_fraction"] = json_num(f);
    }
    m
}

/// Writes region.csv, trace.csv, metrics.json and region.svg into `dir`.
pub fn write_run_output(
    result: &RegionResult,
    fraction: Option<f64>,
    dir: impl AsRef<Path>,
) -> Result<(), IoError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.into(),
        source,
    })?;
    write_file(&dir.join("region.csv"), &region_csv(&result.polygon))?;
    write_file(&dir.join("trace.csv"), &trace_csv(result))?;
    let metrics =
        serde_json::to_string_pretty(&metrics_json(result, fraction)).expect("metrics serialize");
    write_file(&dir.join("metrics.json"), &(metrics + "\n"))?;
    emit_svg(
        &[(
            result.method.as_str().to_uppercase(),
            result.polygon.clone(),
        )],
        dir.join("region.svg"),
    )
}

const SVG_SIZE: f64 = 640.0;
const SVG_MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Renders polygons over p/q axes. Degenerate polygons are skipped.
pub fn svg_string(regions: &[(String, Polygon)]) -> Result<String, IoError> {
    let drawn: Vec<&(String, Polygon)> =
        regions.iter().filter(|(_, p)| !p.is_degenerate()).collect();
    if drawn.is_empty() {
        return Err(IoError::NothingToPlot);
    }
    // bounding box, always including the origin so both axes show
    let (mut p0, mut p1, mut q0, mut q1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (_, poly) in &drawn {
        for v in poly.vertices() {
            p0 = p0.min(v.p);
            p1 = p1.max(v.p);
            q0 = q0.min(v.q);
            q1 = q1.max(v.q);
        }
    }
    let span = (p1 - p0).max(q1 - q0).max(1e-9) * 1.1;
    let (pc, qc) = (0.5 * (p0 + p1), 0.5 * (q0 + q1));
    let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / span;
    let sx = |p: f64| fmt_num(SVG_SIZE / 2.0 + (p - pc) * scale);
    let sy = |q: f64| fmt_num(SVG_SIZE / 2.0 - (q - qc) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        SVG_SIZE
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (lo, hi) = (
        fmt_num(SVG_MARGIN / 2.0),
        fmt_num(SVG_SIZE - SVG_MARGIN / 2.0),
    );
    let _ = writeln!(
        s,
        r##"<line x1="{lo}" y1="{y}" x2="{hi}" y2="{y}" stroke="#888" stroke-width="1"/>"##,
        y = sy(0.0)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{x}" y1="{lo}" x2="{x}" y2="{hi}" stroke="#888" stroke-width="1"/>"##,
        x = sx(0.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{hi}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="end">p1 (pu)</text>"#,
        y = fmt_num(SVG_SIZE / 2.0 - (0.0 - qc) * scale - 6.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{x}" y="{lo}" font-family="sans-serif" font-size="12">q1 (pu)</text>"#,
        x = fmt_num(SVG_SIZE / 2.0 + (0.0 - pc) * scale + 6.0)
    );
    for (i, (label, poly)) in drawn.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, v) in poly.vertices().iter().enumerate() {
            let _ = write!(
                d,
                "{}{} {} ",
                if j == 0 { "M" } else { "L" },
                sx(v.p),
                sy(v.q)
            );
        }
        d.push('Z');
        let _ = writeln!(
            s,
            r#"<path d="{d}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#
        );
        let y = SVG_MARGIN / 2.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{y}" width="12" height="12" fill="{color}"/><text x="{tx}" y="{ty}" font-family="sans-serif" font-size="12">{label}</text>"#,
            x = fmt_num(SVG_MARGIN / 2.0),
            y = fmt_num(y),
            tx = fmt_num(SVG_MARGIN / 2.0 + 18.0),
            ty = fmt_num(y + 11.0),
            label = xml_escape(label),
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn emit_svg(regions: &[(String, Polygon)], path: impl AsRef<Path>) -> Result<(), IoError> {
    let svg = svg_string(regions)?;
    write_file(path.as_ref(), &svg)
}

/// The four regions of a comparison on one network and formulation.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub qf: RegionResult,
    pub mc: RegionResult,
    pub ec: RegionResult,
    pub rr: RegionResult,
}

impl Comparison {
    pub fn results(&self) -> [&RegionResult; 4] {
        [&self.qf, &self.mc, &self.ec, &self.rr]
    }
}

/// Runs QuickFlex, then MC, EC and RR with its terminal point count.
pub fn compare(
    network: &Network,
    formulation: FormulationKind,
    epsilon: f64,
    seed: u64,
) -> Result<Comparison, IoError> {
    let go = |method: Method, k: usize| {
        let cfg = AlgorithmConfig::new(method, formulation)
            .with_epsilon(epsilon)
            .with_k(k)
            .with_seed(seed);
        run(network, &cfg).map_err(|source| IoError::Region { method, source })
    };
    let qf = go(Method::QuickFlex, 0)?;
    // RR needs three directions to span an area
    let k = qf.k().max(4);
    Ok(Comparison {
        mc: go(Method::MonteCarlo, k)?,
        ec: go(Method::EpsilonConstrained, k)?,
        rr: go(Method::RadialReconstruction, k)?,
        qf,
    })
}

/// Comparison table: one row per method, fractions relative to QuickFlex.
pub fn comparison_csv(cmp: &Comparison) -> String {
    let mut s = String::from("method,formulation,k,area,recovered_fraction,solve_count\n");
    for r in cmp.results() {
        let f = recovered_fraction(r, &cmp.qf).unwrap_or(f64::NAN);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.method,
            r.formulation,
            r.k(),
            fmt_num(r.area()),
            fmt_num(f),
            r.solve_count
        );
    }
    s
}

/// Writes one run directory per method plus `metrics.csv` and `region.svg`.
pub fn write_comparison(cmp: &Comparison, dir: impl AsRef<Path>) -> Result<(), IoError> {
    let dir = dir.as_ref();
    for r in cmp.results() {
        let f = recovered_fraction(r, &cmp.qf).ok();
        write_run_output(r, f, dir.join(r.method.as_str()))?;
    }
    write_file(&dir.join("metrics.csv"), &comparison_csv(cmp))?;
    let overlay: Vec<(String, Polygon)> = cmp
        .results()
        .iter()
        .map(|r| (r.method.as_str().to_uppercase(), r.polygon.clone()))
        .collect();
    emit_svg(&overlay, dir.join("region.svg"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{shoelace_area, Point2};

    fn square() -> Polygon {
        Polygon::from_clockwise(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
    }

    #[test]
    fn numbers_have_twelve_digits() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(123456.7890123456), "123456.789012");
        assert_eq!(fmt_num(2.5e-12), "0.0000000000025");
    }

    #[test]
    fn one_square_one_path() {
        let svg = svg_string(&[("A".into(), square())]).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        let d = svg.split("d=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(d.matches('L').count() + usize::from(d.ends_with('Z')), 4);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn nested_polygons_two_paths_two_labels() {
        let regions = || {
            let inner = square()
                .vertices()
                .iter()
                .map(|v| Point2::new(0.25 + 0.5 * v.p, 0.25 + 0.5 * v.q))
                .collect();
            vec![
                ("outer".to_string(), square()),
                ("inner".to_string(), Polygon::from_clockwise(inner)),
            ]
        };
        let svg = svg_string(&regions()).unwrap();
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains(">outer</text>") && svg.contains(">inner</text>"));
        assert_eq!(svg, svg_string(&regions()).unwrap());
    }

    #[test]
    fn degenerate_only_is_an_error() {
        let line = Polygon::from_clockwise(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]);
        assert!(matches!(
            svg_string(&[("x".into(), line)]),
            Err(IoError::NothingToPlot)
        ));
    }

    #[test]
    fn region_csv_reproduces_area() {
        let poly = Polygon::from_clockwise(vec![
            Point2::new(-0.123456789012345, 0.0),
            Point2::new(0.0, 0.987654321098765),
            Point2::new(0.55555555555555, 0.1),
        ]);
        let parsed: Vec<Point2> = region_csv(&poly)
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',').map(|x| x.parse::<f64>().unwrap());
                Point2::new(it.next().unwrap(), it.next().unwrap())
            })
            .collect();
        let back = shoelace_area(&Polygon::from_clockwise(parsed)).unwrap();
        assert!((back - poly.area()).abs() < 1e-9);
    }
}
