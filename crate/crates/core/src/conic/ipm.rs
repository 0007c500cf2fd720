//! Homogeneous self-dual primal-dual interior-point method with Mehrotra
//! predictor-corrector steps and Nesterov-Todd scaling.
//!
//! Internally the problem is rewritten as
//!
//! ```text
//!     minimize c'x   s.t.  A x = b,   G x + s = h,   s in K
//! ```
//!
//! after a presolve that drops fixed variables and substitutes out cost-free
//! auxiliaries defined by a single equality. Rows of `G` are sparse affine
//! images of the remaining variables, so `G' W^{-2} G` is assembled block by
//! block.

use nalgebra::{DMatrix, DVector};

use super::cone::{dot, ProductCone, Scaling};
use super::{ConicError, ConicProblem, Solution, SolveStatus, SolverSettings};

const STEP_FRACTION: f64 = 0.99;
const KKT_REG: f64 = 1e-11;
const REFINE_STEPS: usize = 3;
/// Iterations without improvement before giving up.
const STALL_ITERS: usize = 8;
/// `tau / kappa` below which the embedding is treated as collapsed.
const TAU_COLLAPSE: f64 = 1e-10;
/// Relaxed tolerance accepted for stalled runs and collapsed certificates.
const INACCURATE: f64 = 1e-6;

/// Original variable as an affine function of the reduced variables.
#[derive(Debug, Clone)]
struct Affine {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

impl Affine {
    fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, v)| v * x[j]).sum::<f64>()
    }
}

/// Pivot must be this large relative to its row before a variable is eliminated.
const PIVOT_RATIO: f64 = 0.1;
/// Tolerance on equality rows left with no free variable after presolve.
const EMPTY_ROW_TOL: f64 = 1e-9;

struct StandardForm {
    n: usize,
    c: Vec<f64>,
    a: DMatrix<f64>,
    b: Vec<f64>,
    /// Sparse rows of `G`.
    rows: Vec<Vec<(usize, f64)>>,
    h: Vec<f64>,
    cone: ProductCone,
    /// Maps reduced solutions back to the caller's variables.
    original: Vec<Affine>,
    /// Presolve found an equality with no free variable that cannot hold.
    inconsistent: bool,
}

#[derive(Clone, Copy)]
enum Role {
    Kept(usize),
    Fixed(f64),
    Defined(usize, f64),
}

fn merged(coefs: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(coefs.len());
    for &(j, v) in coefs {
        match out.iter_mut().find(|(k, _)| *k == j) {
            Some(e) => e.1 += v,
            None => out.push((j, v)),
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    out
}

impl StandardForm {
    /// Presolves `p` and rewrites it in standard form.
    ///
    /// Fixed variables become constants. A free variable with no cost that
    /// appears in exactly one equality is substituted out through that row,
    /// so auxiliary cone members cost nothing in the KKT system.
    fn from_problem(p: &ConicProblem) -> Self {
        let n0 = p.n_vars();
        let cost = p.objective();
        let eq: Vec<(Vec<(usize, f64)>, f64)> = p
            .eq_rows()
            .iter()
            .map(|r| (merged(&r.coefs), r.rhs))
            .collect();
        let mut occurrences = vec![0usize; n0];
        for (coefs, _) in &eq {
            for &(j, _) in coefs {
                occurrences[j] += 1;
            }
        }

        let mut role: Vec<Option<Role>> = (0..n0)
            .map(|j| {
                let (lo, hi) = p.bounds(j);
                (lo == hi).then_some(Role::Fixed(lo))
            })
            .collect();
        let mut used = vec![false; eq.len()];
        for (r, (coefs, _)) in eq.iter().enumerate() {
            let scale = coefs.iter().fold(0.0f64, |m, &(_, v)| m.max(v.abs()));
            let pivot = coefs.iter().find(|&&(j, v)| {
                let (lo, hi) = p.bounds(j);
                role[j].is_none()
                    && occurrences[j] == 1
                    && cost[j] == 0.0
                    && lo == f64::NEG_INFINITY
                    && hi == f64::INFINITY
                    && v.abs() >= PIVOT_RATIO * scale
            });
            if let Some(&(j, v)) = pivot {
                role[j] = Some(Role::Defined(r, v));
                used[r] = true;
            }
        }
        let mut n = 0;
        let role: Vec<Role> = role
            .into_iter()
            .map(|r| {
                r.unwrap_or_else(|| {
                    n += 1;
                    Role::Kept(n - 1)
                })
            })
            .collect();

        // kept and fixed first; a defined variable's row holds only those
        let mut original: Vec<Affine> = role
            .iter()
            .map(|r| match *r {
                Role::Kept(i) => Affine {
                    constant: 0.0,
                    terms: vec![(i, 1.0)],
                },
                Role::Fixed(v) => Affine {
                    constant: v,
                    terms: Vec::new(),
                },
                Role::Defined(..) => Affine {
                    constant: 0.0,
                    terms: Vec::new(),
                },
            })
            .collect();
        let substitute = |coefs: &[(usize, f64)], skip: Option<usize>, original: &[Affine]| {
            let mut constant = 0.0;
            let mut terms = Vec::new();
            for &(j, v) in coefs.iter().filter(|(j, _)| Some(*j) != skip) {
                constant += v * original[j].constant;
                terms.extend(original[j].terms.iter().map(|&(k, u)| (k, v * u)));
            }
            (constant, merged(&terms))
        };
        for j in 0..n0 {
            if let Role::Defined(r, pivot) = role[j] {
                let (coefs, rhs) = &eq[r];
                let (constant, terms) = substitute(coefs, Some(j), &original);
                original[j] = Affine {
                    constant: (rhs - constant) / pivot,
                    terms: terms.into_iter().map(|(k, v)| (k, -v / pivot)).collect(),
                };
            }
        }

        let mut inconsistent = false;
        let mut reduced_eq = Vec::new();
        for (r, (coefs, rhs)) in eq.iter().enumerate() {
            if used[r] {
                continue;
            }
            let (constant, terms) = substitute(coefs, None, &original);
            let rhs = rhs - constant;
            if terms.is_empty() {
                inconsistent |= rhs.abs() > EMPTY_ROW_TOL * (1.0 + constant.abs());
            } else {
                reduced_eq.push((terms, rhs));
            }
        }

        let mut rows = Vec::new();
        let mut h = Vec::new();
        for (j, r) in role.iter().enumerate() {
            let Role::Kept(i) = *r else { continue };
            let (lo, hi) = p.bounds(j);
            if lo.is_finite() {
                rows.push(vec![(i, -1.0)]);
                h.push(-lo);
            }
            if hi.is_finite() {
                rows.push(vec![(i, 1.0)]);
                h.push(hi);
            }
        }
        let lp_dim = rows.len();
        let mut soc_dims = Vec::new();
        for blk in p.soc_blocks() {
            // s = x_j = constant + terms . x  gives  G row = -terms, h = constant
            for &j in std::iter::once(&blk.head).chain(&blk.tail) {
                let e = &original[j];
                rows.push(e.terms.iter().map(|&(k, v)| (k, -v)).collect());
                h.push(e.constant);
            }
            soc_dims.push(blk.tail.len() + 1);
        }

        let mut a = DMatrix::zeros(reduced_eq.len(), n);
        let mut b = vec![0.0; reduced_eq.len()];
        for (i, (coefs, rhs)) in reduced_eq.into_iter().enumerate() {
            for (j, v) in coefs {
                a[(i, j)] += v;
            }
            b[i] = rhs;
        }
        let mut c = vec![0.0; n];
        for (j, r) in role.iter().enumerate() {
            if let Role::Kept(i) = *r {
                c[i] = cost[j];
            }
        }
        StandardForm {
            n,
            c,
            a,
            b,
            rows,
            h,
            cone: ProductCone::new(lp_dim, &soc_dims),
            original,
            inconsistent,
        }
    }

    fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.original.iter().map(|e| e.eval(x)).collect()
    }

    fn p(&self) -> usize {
        self.b.len()
    }

    fn g_mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    fn gt_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (row, &vr) in self.rows.iter().zip(v) {
            for &(j, g) in row {
                out[j] += g * vr;
            }
        }
        out
    }

    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.p())
            .map(|i| (0..self.n).map(|j| self.a[(i, j)] * x[j]).sum())
            .collect()
    }

    fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.p()).map(|i| self.a[(i, j)] * y[i]).sum())
            .collect()
    }
}

/// Factored reduced KKT system `[G'W^{-2}G  A'; A  0]`.
struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Kkt {
    /// `scaling = None` means `W = I`.
    fn factor(sf: &StandardForm, scaling: Option<&Scaling>) -> Option<Kkt> {
        let (n, p) = (sf.n, sf.p());
        let mut m = DMatrix::zeros(n + p, n + p);
        let cone = &sf.cone;
        for r in 0..cone.lp_dim {
            let w = scaling.map_or(1.0, |s| s.lp_winv2(r));
            for &(ja, va) in &sf.rows[r] {
                for &(jb, vb) in &sf.rows[r] {
                    m[(ja, jb)] += w * va * vb;
                }
            }
        }
        for (k, &(off, d)) in cone.soc.iter().enumerate() {
            let w2 = scaling.map(|sc| sc.soc_winv2(k));
            for a in 0..d {
                for b in 0..d {
                    let w = match &w2 {
                        Some(w2) => w2[a][b],
                        None if a == b => 1.0,
                        None => continue,
                    };
                    for &(ja, va) in &sf.rows[off + a] {
                        for &(jb, vb) in &sf.rows[off + b] {
                            m[(ja, jb)] += w * va * vb;
                        }
                    }
                }
            }
        }
        for i in 0..p {
            for j in 0..n {
                let v = sf.a[(i, j)];
                m[(n + i, j)] = v;
                m[(j, n + i)] = v;
            }
        }
        let mut reg = m;
        for j in 0..n {
            reg[(j, j)] += KKT_REG * reg[(j, j)].abs().max(1.0);
        }
        for i in 0..p {
            reg[(n + i, n + i)] -= KKT_REG;
        }
        let lu = reg.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Kkt { lu })
    }

    /// Solves `[0 A' G'; A 0 0; G 0 -W^2] (dx, dy, dz) = (r1, r2, r3)`, refining
    /// against the unreduced system.
    fn solve(
        &self,
        sf: &StandardForm,
        scaling: Option<&Scaling>,
        r1: &[f64],
        r2: &[f64],
        r3: &[f64],
    ) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (mut dx, mut dy, mut dz) = self.solve_once(sf, scaling, r1, r2, r3)?;
        let w2 = |v: &[f64]| -> Vec<f64> {
            match scaling {
                Some(sc) => sc.apply_w(&sf.cone, &sc.apply_w(&sf.cone, v)),
                None => v.to_vec(),
            }
        };
        for _ in 0..REFINE_STEPS {
            let aty = sf.at_mul(&dy);
            let gtz = sf.gt_mul(&dz);
            let e1: Vec<f64> = (0..sf.n).map(|j| r1[j] - aty[j] - gtz[j]).collect();
            let adx = sf.a_mul(&dx);
            let e2: Vec<f64> = (0..sf.p()).map(|i| r2[i] - adx[i]).collect();
            let gdx = sf.g_mul(&dx);
            let wwz = w2(&dz);
            let e3: Vec<f64> = (0..sf.cone.dim).map(|r| r3[r] - gdx[r] + wwz[r]).collect();
            let err = inf_norm(&e1).max(inf_norm(&e2)).max(inf_norm(&e3));
            if err == 0.0 {
                break;
            }
            let (cx, cy, cz) = self.solve_once(sf, scaling, &e1, &e2, &e3)?;
            axpy(&mut dx, 1.0, &cx);
            axpy(&mut dy, 1.0, &cy);
            axpy(&mut dz, 1.0, &cz);
        }
        Some((dx, dy, dz))
    }

    fn solve_once(
        &self,
        sf: &StandardForm,
        scaling: Option<&Scaling>,
        r1: &[f64],
        r2: &[f64],
        r3: &[f64],
    ) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (n, p) = (sf.n, sf.p());
        let winv2 = |v: &[f64]| -> Vec<f64> {
            match scaling {
                Some(sc) => sc.apply_winv(&sf.cone, &sc.apply_winv(&sf.cone, v)),
                None => v.to_vec(),
            }
        };
        let gw = sf.gt_mul(&winv2(r3));
        let mut rhs = DVector::zeros(n + p);
        for j in 0..n {
            rhs[j] = r1[j] + gw[j];
        }
        for i in 0..p {
            rhs[n + i] = r2[i];
        }
        let sol = self.lu.solve(&rhs)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dx: Vec<f64> = sol.rows(0, n).iter().copied().collect();
        let dy: Vec<f64> = sol.rows(n, p).iter().copied().collect();
        let gdx = sf.g_mul(&dx);
        let diff: Vec<f64> = gdx.iter().zip(r3).map(|(a, b)| a - b).collect();
        let dz = winv2(&diff);
        Some((dx, dy, dz))
    }
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Solves a conic problem. Errors only on malformed input; every numerical
/// outcome is reported through [`Solution::status`].
pub fn solve(problem: &ConicProblem, settings: &SolverSettings) -> Result<Solution, ConicError> {
    problem.validate()?;
    let sf = StandardForm::from_problem(problem);
    let mut sol = if sf.inconsistent {
        Solution {
            status: SolveStatus::Infeasible,
            x: vec![0.0; sf.n],
            objective_value: f64::NAN,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            gap: f64::INFINITY,
            iterations: 0,
        }
    } else if sf.n == 0 {
        // nothing left to optimize: the presolved point is the answer
        let x = sf.expand(&[]);
        let residual = super::check_solution(problem, &x).max();
        Solution {
            status: if residual <= settings.tol_feas {
                SolveStatus::Optimal
            } else {
                SolveStatus::Infeasible
            },
            x: Vec::new(),
            objective_value: 0.0,
            primal_residual: residual,
            dual_residual: 0.0,
            gap: 0.0,
            iterations: 0,
        }
    } else {
        run(&sf, settings)
    };
    sol.x = sf.expand(&sol.x);
    if sol.objective_value.is_finite() || sf.n == 0 {
        sol.objective_value = dot(problem.objective(), &sol.x);
    }
    Ok(sol)
}

fn run(sf: &StandardForm, settings: &SolverSettings) -> Solution {
    let (n, p, m) = (sf.n, sf.p(), sf.cone.dim);
    let cone = &sf.cone;
    let degree = cone.degree() as f64;
    let c_norm = inf_norm(&sf.c);

    let fail = |status: SolveStatus, x: Vec<f64>, iterations: usize| Solution {
        status,
        objective_value: dot(&sf.c, &x),
        x,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        gap: f64::INFINITY,
        iterations,
    };

    let Some(mut it) = initial_point(sf) else {
        return fail(SolveStatus::NumericalFailure, vec![0.0; n], 0);
    };

    let mut last = None;
    // best (score, iteration, solution) seen so far, for stalled runs
    let mut best: Option<(f64, usize, Solution)> = None;
    for iter in 0..=settings.max_iter {
        let Iterate {
            x,
            y,
            z,
            s,
            tau,
            kappa,
        } = &it;
        let (tau, kappa) = (*tau, *kappa);

        let ax = sf.a_mul(x);
        let gx = sf.g_mul(x);
        let aty = sf.at_mul(y);
        let gtz = sf.gt_mul(z);

        let r1: Vec<f64> = (0..n).map(|j| aty[j] + gtz[j] + sf.c[j] * tau).collect();
        let r2: Vec<f64> = (0..p).map(|i| -ax[i] + sf.b[i] * tau).collect();
        let r3: Vec<f64> = (0..m).map(|r| -gx[r] + sf.h[r] * tau - s[r]).collect();
        let cx = dot(&sf.c, x);
        let by = dot(&sf.b, y);
        let hz = dot(&sf.h, z);
        let r4 = -cx - by - hz - kappa;

        let sz = dot(s, z);
        let mu = (sz + tau * kappa) / (degree + 1.0);

        let pres = inf_norm(&r2).max(inf_norm(&r3)) / tau;
        let dres = inf_norm(&r1) / tau / (1.0 + c_norm);
        let pcost = cx / tau;
        let gap = sz / (tau * tau) / pcost.abs().max(1.0);
        let xs: Vec<f64> = x.iter().map(|v| v / tau).collect();

        let report = |status| Solution {
            status,
            x: xs.clone(),
            objective_value: pcost,
            primal_residual: pres,
            dual_residual: dres,
            gap,
            iterations: iter,
        };

        let score = (pres / settings.tol_feas)
            .max(dres / settings.tol_feas)
            .max(gap / settings.tol_gap);
        if score <= 1.0 {
            return report(SolveStatus::Optimal);
        }
        // Infeasibility certificates, meaningful once tau has collapsed relative to kappa.
        if tau < kappa {
            let collapsed = tau < TAU_COLLAPSE * kappa;
            let tol = if collapsed {
                INACCURATE
            } else {
                settings.tol_feas
            };
            let hz_by = hz + by;
            if hz_by < 0.0 {
                let cert: Vec<f64> = (0..n).map(|j| aty[j] + gtz[j]).collect();
                if inf_norm(&cert) / -hz_by <= tol {
                    return report(SolveStatus::Infeasible);
                }
            }
            if cx < 0.0 {
                let gxs: Vec<f64> = (0..m).map(|r| gx[r] + s[r]).collect();
                if inf_norm(&ax).max(inf_norm(&gxs)) / -cx <= tol {
                    return report(SolveStatus::Unbounded);
                }
            }
            if collapsed {
                break;
            }
        }
        if score.is_finite() && best.as_ref().is_none_or(|(b, _, _)| score < *b) {
            best = Some((score, iter, report(SolveStatus::Optimal)));
        }
        if let Some((_, at, _)) = &best {
            if iter >= at + STALL_ITERS || mu < 1e-300 {
                break;
            }
        }
        if iter == settings.max_iter {
            return match best.take() {
                Some((b, _, sol)) if b <= INACCURATE / settings.tol_feas => sol,
                _ => report(SolveStatus::MaxIter),
            };
        }
        last = Some(report(SolveStatus::NumericalFailure));

        let Some(scaling) = Scaling::new(cone, s, z) else {
            break;
        };
        let Some(kkt) = Kkt::factor(sf, Some(&scaling)) else {
            break;
        };
        let neg_c: Vec<f64> = sf.c.iter().map(|v| -v).collect();
        let Some((x1, y1, z1)) = kkt.solve(sf, Some(&scaling), &neg_c, &sf.b, &sf.h) else {
            break;
        };
        let q1 = dot(&sf.c, &x1) + dot(&sf.b, &y1) + dot(&sf.h, &z1);

        let lambda = &scaling.lambda;
        let direction = |eta: f64, ds_scaled: &[f64], rhs_kappa: f64| -> Option<Direction> {
            let w_ds = scaling.apply_w(cone, ds_scaled);
            let nr1: Vec<f64> = r1.iter().map(|v| -eta * v).collect();
            let nr2: Vec<f64> = r2.iter().map(|v| eta * v).collect();
            let nr3: Vec<f64> = (0..m).map(|r| eta * r3[r] - w_ds[r]).collect();
            let (x2, y2, z2) = kkt.solve(sf, Some(&scaling), &nr1, &nr2, &nr3)?;
            let q2 = dot(&sf.c, &x2) + dot(&sf.b, &y2) + dot(&sf.h, &z2);
            let dtau = (-eta * r4 + rhs_kappa / tau + q2) / (kappa / tau - q1);
            let mut dx = x2;
            axpy(&mut dx, dtau, &x1);
            let mut dy = y2;
            axpy(&mut dy, dtau, &y1);
            let mut dz = z2;
            axpy(&mut dz, dtau, &z1);
            // ds from the linear block keeps the primal residual contraction exact
            let gdx = sf.g_mul(&dx);
            let ds: Vec<f64> = (0..m)
                .map(|r| -gdx[r] + sf.h[r] * dtau + eta * r3[r])
                .collect();
            let dkappa = (rhs_kappa - kappa * dtau) / tau;
            let d = Direction {
                dx,
                dy,
                dz,
                ds,
                dtau,
                dkappa,
            };
            if d.dtau.is_finite() && d.dkappa.is_finite() {
                Some(d)
            } else {
                None
            }
        };
        let max_step = |d: &Direction| -> f64 {
            let mut a = cone.max_step(s, &d.ds).min(cone.max_step(z, &d.dz));
            if d.dtau < 0.0 {
                a = a.min(-tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-kappa / d.dkappa);
            }
            a
        };

        // predictor
        let neg_lambda: Vec<f64> = lambda.iter().map(|v| -v).collect();
        let Some(aff) = direction(1.0, &neg_lambda, -tau * kappa) else {
            break;
        };
        let alpha_aff = max_step(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3);

        // corrector
        let e = cone.identity();
        let winv_ds = scaling.apply_winv(cone, &aff.ds);
        let w_dz = scaling.apply_w(cone, &aff.dz);
        let cross = cone.jordan_prod(&winv_ds, &w_dz);
        let ll = cone.jordan_prod(lambda, lambda);
        let target: Vec<f64> = (0..m)
            .map(|r| -ll[r] + sigma * mu * e[r] - cross[r])
            .collect();
        let ds_scaled = cone.jordan_div(lambda, &target);
        let rhs_kappa = -tau * kappa + sigma * mu - aff.dtau * aff.dkappa;
        let Some(dir) = direction(1.0 - sigma, &ds_scaled, rhs_kappa) else {
            break;
        };
        let alpha = (STEP_FRACTION * max_step(&dir)).min(1.0);
        if !(alpha > 1e-13) {
            break;
        }

        axpy(&mut it.x, alpha, &dir.dx);
        axpy(&mut it.y, alpha, &dir.dy);
        axpy(&mut it.z, alpha, &dir.dz);
        axpy(&mut it.s, alpha, &dir.ds);
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
    }
    // Stalled: accept the best iterate at reduced accuracy, otherwise report failure.
    match best {
        Some((b, _, sol)) if b * settings.tol_feas <= INACCURATE => sol,
        _ => last.unwrap_or_else(|| fail(SolveStatus::NumericalFailure, vec![0.0; n], 0)),
    }
}

fn initial_point(sf: &StandardForm) -> Option<Iterate> {
    let (n, p, m) = (sf.n, sf.p(), sf.cone.dim);
    let cone = &sf.cone;
    let kkt = Kkt::factor(sf, None)?;
    // primal: least-squares fit of G x ~ h subject to A x = b
    let (x, _, zp) = kkt.solve(sf, None, &vec![0.0; n], &sf.b, &sf.h)?;
    let mut s: Vec<f64> = zp.iter().map(|v| -v).collect();
    // dual: least-norm z with A'y + G'z = -c
    let neg_c: Vec<f64> = sf.c.iter().map(|v| -v).collect();
    let (_, y, mut z) = kkt.solve(sf, None, &neg_c, &vec![0.0; p], &vec![0.0; m])?;
    let e = cone.identity();
    for v in [&mut s, &mut z] {
        if m == 0 {
            break;
        }
        let shift = -cone.min_eig(v);
        if shift >= 0.0 {
            axpy(v, 1.0 + shift, &e);
        }
    }
    Some(Iterate {
        x,
        y,
        z,
        s,
        tau: 1.0,
        kappa: 1.0,
    })
}
