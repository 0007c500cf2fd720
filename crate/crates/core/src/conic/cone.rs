//! Product cone `R+^m x Q^{n1} x ... x Q^{nk}` with Jordan algebra helpers and
//! Nesterov-Todd scaling.

#[derive(Debug, Clone)]
pub(super) struct ProductCone {
    pub lp_dim: usize,
    /// (offset, dimension) of each second-order cone block.
    pub soc: Vec<(usize, usize)>,
    pub dim: usize,
}

impl ProductCone {
    pub fn new(lp_dim: usize, soc_dims: &[usize]) -> Self {
        let mut soc = Vec::with_capacity(soc_dims.len());
        let mut off = lp_dim;
        for &d in soc_dims {
            soc.push((off, d));
            off += d;
        }
        ProductCone {
            lp_dim,
            soc,
            dim: off,
        }
    }

    /// Barrier degree.
    pub fn degree(&self) -> usize {
        self.lp_dim + self.soc.len()
    }

    pub fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[..self.lp_dim].iter_mut().for_each(|v| *v = 1.0);
        for &(off, _) in &self.soc {
            e[off] = 1.0;
        }
        e
    }

    /// Smallest "eigenvalue" over all blocks; positive iff `u` is interior.
    pub fn min_eig(&self, u: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for &v in &u[..self.lp_dim] {
            m = m.min(v);
        }
        for &(off, d) in &self.soc {
            let blk = &u[off..off + d];
            m = m.min(blk[0] - norm(&blk[1..]));
        }
        m
    }

    pub fn jordan_prod(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.lp_dim {
            out[i] = u[i] * v[i];
        }
        for &(off, d) in &self.soc {
            let (u0, v0) = (u[off], v[off]);
            out[off] = dot(&u[off..off + d], &v[off..off + d]);
            for i in 1..d {
                out[off + i] = u0 * v[off + i] + v0 * u[off + i];
            }
        }
        out
    }

    /// Solves `u o x = v` for `x`; `u` must be interior.
    pub fn jordan_div(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.lp_dim {
            out[i] = v[i] / u[i];
        }
        for &(off, d) in &self.soc {
            let ub = &u[off..off + d];
            let vb = &v[off..off + d];
            let det = ub[0] * ub[0] - dot(&ub[1..], &ub[1..]);
            let x0 = (ub[0] * vb[0] - dot(&ub[1..], &vb[1..])) / det;
            out[off] = x0;
            for i in 1..d {
                out[off + i] = (vb[i] - x0 * ub[i]) / ub[0];
            }
        }
        out
    }

    /// Largest `a >= 0` with `u + a * du` in the cone (`u` interior). Infinite when unrestricted.
    pub fn max_step(&self, u: &[f64], du: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.lp_dim {
            if du[i] < 0.0 {
                alpha = alpha.min(-u[i] / du[i]);
            }
        }
        for &(off, d) in &self.soc {
            let ub = &u[off..off + d];
            let db = &du[off..off + d];
            alpha = alpha.min(soc_step(ub, db));
        }
        alpha
    }
}

/// Smallest positive root of `(u0 + a d0)^2 - ||u1 + a d1||^2 = 0`.
fn soc_step(u: &[f64], d: &[f64]) -> f64 {
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = 2.0 * (u[0] * d[0] - dot(&u[1..], &d[1..]));
    let c = (u[0] * u[0] - dot(&u[1..], &u[1..])).max(0.0);
    if c == 0.0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    if a.abs() <= 1e-14 * (b.abs() + c) {
        if b < 0.0 {
            best = -c / b;
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            for r in [q / a, if q != 0.0 { c / q } else { f64::INFINITY }] {
                if r > 0.0 {
                    best = best.min(r);
                }
            }
        }
    }
    // A root may belong to the negative cone boundary only if the head turns
    // negative first; guard the head separately.
    if d[0] < 0.0 {
        best = best.min(-u[0] / d[0]);
    }
    best
}

#[derive(Debug, Clone)]
struct SocScaling {
    eta: f64,
    wbar: Vec<f64>,
}

/// Nesterov-Todd scaling `W` with `W z = W^{-1} s = lambda`.
#[derive(Debug, Clone)]
pub(super) struct Scaling {
    lp_w: Vec<f64>,
    soc: Vec<SocScaling>,
    pub lambda: Vec<f64>,
}

impl Scaling {
    /// Returns `None` if `s` or `z` is not strictly interior.
    pub fn new(cone: &ProductCone, s: &[f64], z: &[f64]) -> Option<Self> {
        let mut lp_w = Vec::with_capacity(cone.lp_dim);
        let mut lambda = vec![0.0; cone.dim];
        for i in 0..cone.lp_dim {
            if !(s[i] > 0.0 && z[i] > 0.0) {
                return None;
            }
            lp_w.push((s[i] / z[i]).sqrt());
            lambda[i] = (s[i] * z[i]).sqrt();
        }
        let mut soc = Vec::with_capacity(cone.soc.len());
        for &(off, d) in &cone.soc {
            let sb = &s[off..off + d];
            let zb = &z[off..off + d];
            let sn2 = sb[0] * sb[0] - dot(&sb[1..], &sb[1..]);
            let zn2 = zb[0] * zb[0] - dot(&zb[1..], &zb[1..]);
            if !(sb[0] > 0.0 && zb[0] > 0.0 && sn2 > 0.0 && zn2 > 0.0) {
                return None;
            }
            let (sn, zn) = (sn2.sqrt(), zn2.sqrt());
            let sbar: Vec<f64> = sb.iter().map(|v| v / sn).collect();
            let zbar: Vec<f64> = zb.iter().map(|v| v / zn).collect();
            let gamma = ((1.0 + dot(&sbar, &zbar)) / 2.0).sqrt();
            let mut wbar = vec![0.0; d];
            wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
            for i in 1..d {
                wbar[i] = (sbar[i] - zbar[i]) / (2.0 * gamma);
            }
            let eta = (sn / zn).sqrt();
            let sc = SocScaling { eta, wbar };
            let lz = sc.apply(zb);
            lambda[off..off + d].copy_from_slice(&lz);
            soc.push(sc);
        }
        Some(Scaling { lp_w, soc, lambda })
    }

    pub fn apply_w(&self, cone: &ProductCone, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; cone.dim];
        for i in 0..cone.lp_dim {
            out[i] = self.lp_w[i] * v[i];
        }
        for (sc, &(off, d)) in self.soc.iter().zip(&cone.soc) {
            out[off..off + d].copy_from_slice(&sc.apply(&v[off..off + d]));
        }
        out
    }

    pub fn apply_winv(&self, cone: &ProductCone, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; cone.dim];
        for i in 0..cone.lp_dim {
            out[i] = v[i] / self.lp_w[i];
        }
        for (sc, &(off, d)) in self.soc.iter().zip(&cone.soc) {
            out[off..off + d].copy_from_slice(&sc.apply_inv(&v[off..off + d]));
        }
        out
    }

    /// Diagonal entry `1/w^2` of an orthant row.
    pub fn lp_winv2(&self, i: usize) -> f64 {
        1.0 / (self.lp_w[i] * self.lp_w[i])
    }

    /// Dense `W^{-2}` of SOC block `k`.
    pub fn soc_winv2(&self, k: usize) -> Vec<Vec<f64>> {
        let sc = &self.soc[k];
        let d = sc.wbar.len();
        let mut u = sc.wbar.clone();
        for v in u.iter_mut().skip(1) {
            *v = -*v;
        }
        let inv_eta2 = 1.0 / (sc.eta * sc.eta);
        let mut m = vec![vec![0.0; d]; d];
        for a in 0..d {
            for b in 0..d {
                let j = if a != b {
                    0.0
                } else if a == 0 {
                    1.0
                } else {
                    -1.0
                };
                m[a][b] = (2.0 * u[a] * u[b] - j) * inv_eta2;
            }
        }
        m
    }
}

impl SocScaling {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let w = &self.wbar;
        let d = w.len();
        let w1v1 = dot(&w[1..], &v[1..]);
        let mut out = vec![0.0; d];
        out[0] = self.eta * (w[0] * v[0] + w1v1);
        let coef = w1v1 / (1.0 + w[0]) + v[0];
        for i in 1..d {
            out[i] = self.eta * (v[i] + coef * w[i]);
        }
        out
    }

    fn apply_inv(&self, v: &[f64]) -> Vec<f64> {
        let w = &self.wbar;
        let d = w.len();
        let w1v1 = dot(&w[1..], &v[1..]);
        let mut out = vec![0.0; d];
        out[0] = (w[0] * v[0] - w1v1) / self.eta;
        let coef = w1v1 / (1.0 + w[0]) - v[0];
        for i in 1..d {
            out[i] = (v[i] + coef * w[i]) / self.eta;
        }
        out
    }
}

pub(super) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(super) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
