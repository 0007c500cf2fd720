//! Shared helpers for the integration tests: fixture loading and conic
//! instances whose optima are known from hand-built KKT points.
#![allow(dead_code)]

use std::path::PathBuf;

use quickflex::conic::ConicProblem;
use quickflex::grid::Network;
use quickflex::io::parse_network;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub const FIXTURES: [&str; 3] = ["twobus", "fivebus", "ieee13"];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> Network {
    parse_network(fixture_path(name)).expect("shipped fixture parses")
}

/// A problem together with its optimal value, known without solving it.
pub struct KnownInstance {
    pub name: String,
    pub problem: ConicProblem,
    pub optimum: f64,
}

struct Draw(ChaCha8Rng);

impl Draw {
    fn new(seed: u64) -> Self {
        Draw(ChaCha8Rng::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }
}

/// Builds `min c'x` with a known KKT point `(x*, y*, reduced costs)`.
///
/// Every column gets a complementary pair: a bounded column sits at a bound
/// with a reduced cost of the right sign, or strictly inside with zero reduced
/// cost; a cone block sits on the boundary against a boundary dual, inside
/// against a zero dual, or at the apex against an interior dual. Then
/// `c = A'y + r` and `c'x*` is optimal.
struct Builder {
    problem: ConicProblem,
    x: Vec<f64>,
    r: Vec<f64>,
    rng: Draw,
}

impl Builder {
    fn new(seed: u64) -> Self {
        Builder {
            problem: ConicProblem::new(0),
            x: Vec::new(),
            r: Vec::new(),
            rng: Draw::new(seed),
        }
    }

    fn column(&mut self, lo: f64, hi: f64, x: f64, r: f64) -> usize {
        self.x.push(x);
        self.r.push(r);
        self.problem.add_var(lo, hi)
    }

    fn bounded(&mut self) {
        let lo = -self.rng.range(0.5, 2.0);
        let hi = self.rng.range(0.5, 2.0);
        match self.rng.below(5) {
            0 => {
                let r = self.rng.range(0.1, 1.0);
                self.column(lo, hi, lo, r);
            }
            1 => {
                let r = -self.rng.range(0.1, 1.0);
                self.column(lo, hi, hi, r);
            }
            2 => {
                // one-sided, active
                let r = self.rng.range(0.1, 1.0);
                self.column(lo, f64::INFINITY, lo, r);
            }
            3 => {
                let x = self.rng.range(lo, hi);
                self.column(lo, hi, x, 0.0);
            }
            _ => {
                let x = self.rng.range(-1.0, 1.0);
                self.column(f64::NEG_INFINITY, f64::INFINITY, x, 0.0);
            }
        }
    }

    fn cone(&mut self) {
        let tail_len = 1 + self.rng.below(3);
        let u: Vec<f64> = (0..tail_len).map(|_| self.rng.range(-1.0, 1.0)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (x_head, x_tail, z_head, z_tail): (f64, Vec<f64>, f64, Vec<f64>) =
            match self.rng.below(3) {
                0 => {
                    let lambda = self.rng.range(0.2, 2.0);
                    (
                        norm,
                        u.clone(),
                        lambda,
                        u.iter().map(|v| -lambda * v / norm).collect(),
                    )
                }
                1 => (norm + self.rng.range(0.1, 1.0), u, 0.0, vec![0.0; tail_len]),
                _ => {
                    let z_head = norm + self.rng.range(0.1, 1.0);
                    (0.0, vec![0.0; tail_len], z_head, u)
                }
            };
        let free = (f64::NEG_INFINITY, f64::INFINITY);
        let head = self.column(free.0, free.1, x_head, z_head);
        let tail: Vec<usize> = x_tail
            .iter()
            .zip(&z_tail)
            .map(|(&x, &z)| self.column(free.0, free.1, x, z))
            .collect();
        self.problem.add_soc(head, tail).expect("valid cone block");
    }

    fn finish(mut self, name: String, rows: usize) -> KnownInstance {
        let n = self.x.len();
        let mut c = self.r.clone();
        for _ in 0..rows {
            let a: Vec<f64> = (0..n).map(|_| self.rng.range(-1.0, 1.0)).collect();
            let y = self.rng.range(-1.0, 1.0);
            let rhs: f64 = a.iter().zip(&self.x).map(|(a, x)| a * x).sum();
            for (cj, aj) in c.iter_mut().zip(&a) {
                *cj += y * aj;
            }
            self.problem
                .add_eq(a.into_iter().enumerate().collect(), rhs)
                .expect("valid row");
        }
        let coefs: Vec<(usize, f64)> = c.iter().copied().enumerate().collect();
        self.problem.set_objective(&coefs).expect("valid objective");
        KnownInstance {
            name,
            optimum: c.iter().zip(&self.x).map(|(c, x)| c * x).sum(),
            problem: self.problem,
        }
    }
}

/// Random LP with a known optimum.
pub fn lp_instance(seed: u64) -> KnownInstance {
    let mut b = Builder::new(seed);
    let n = 4 + b.rng.below(9);
    for _ in 0..n {
        b.bounded();
    }
    let rows = 1 + b.rng.below(n / 2);
    b.finish(format!("lp-{seed}"), rows)
}

/// Random SOCP (cones plus a few bounded columns) with a known optimum.
pub fn socp_instance(seed: u64) -> KnownInstance {
    let mut b = Builder::new(seed);
    let blocks = 1 + b.rng.below(4);
    for _ in 0..blocks {
        b.cone();
    }
    for _ in 0..b.rng.below(4) {
        b.bounded();
    }
    let rows = 1 + b.rng.below(b.x.len() / 2);
    b.finish(format!("socp-{seed}"), rows)
}

/// Twenty instances: three small textbook cases and seventeen generated ones.
pub fn battery() -> Vec<KnownInstance> {
    let mut out = Vec::new();

    // minimize x subject to x >= 1
    let mut p = ConicProblem::new(1);
    p.set_bounds(0, 1.0, f64::INFINITY).unwrap();
    p.set_objective(&[(0, 1.0)]).unwrap();
    out.push(KnownInstance {
        name: "active-bound".into(),
        problem: p,
        optimum: 1.0,
    });

    // minimize t with (t; 3, 4) in the cone
    let mut p = ConicProblem::new(3);
    p.set_bounds(1, 3.0, 3.0).unwrap();
    p.set_bounds(2, 4.0, 4.0).unwrap();
    p.add_soc(0, vec![1, 2]).unwrap();
    p.set_objective(&[(0, 1.0)]).unwrap();
    out.push(KnownInstance {
        name: "three-four-five".into(),
        problem: p,
        optimum: 5.0,
    });

    // box corner
    let mut p = ConicProblem::new(2);
    p.set_bounds(0, -0.5, 0.5).unwrap();
    p.set_bounds(1, -0.3, 0.7).unwrap();
    p.set_objective(&[(0, -1.0), (1, -1.0)]).unwrap();
    out.push(KnownInstance {
        name: "box-corner".into(),
        problem: p,
        optimum: -1.2,
    });

    out.extend((1..=8).map(lp_instance));
    out.extend((1..=9).map(socp_instance));
    out
}
