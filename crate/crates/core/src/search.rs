//! Descent over the unitary group for a structure in which a Hamiltonian is
//! (approximately) K-local.
//!
//! The residual is the share of the non-constant Hilbert-Schmidt weight of
//! `V H V'` lying above weight `K` in the canonical product basis. Iterates move
//! along `V <- exp(-s G) V` with `G` the Riemannian gradient, so every iterate
//! is exactly unitary.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{raw_profile, ProductBasis};
use crate::error::{Error, Result};
use crate::hilbert::{expm_i, haar_unitary, CMatrix, Dims, HermitianOp, UnitaryOp, C64, I, ZERO};
use crate::locality::is_k_local;
use crate::rng::Stream;
use crate::tps::Tps;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
    pub stream: Stream,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            k: 2,
            restarts: 8,
            max_iters: 500,
            grad_tol: 1e-8,
            step_init: 1.0,
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
            stream: Stream::new(0),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("search config: {what}")));
        if self.k == 0 || self.restarts == 0 || self.max_iters == 0 {
            return bad("k, restarts and max_iters must be positive");
        }
        if !(self.grad_tol > 0.0) || !(self.step_init > 0.0) {
            return bad("grad_tol and step_init must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_ratio > 0.0 && self.backtrack_ratio < 1.0) {
            return bad("backtrack_ratio must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Structure with representative `V`, so `tps.pull(H) = V H V'`.
    pub tps: Tps,
    pub residual: f64,
    pub iterations: usize,
    pub trace: Vec<(usize, f64)>,
    pub converged: bool,
    /// Index of the restart that produced this result.
    pub restart: usize,
    pub restarts: Vec<RestartRecord>,
    /// Final structure of every restart, in restart order.
    pub restart_tps: Vec<Tps>,
}

/// Objective and gradient for one Hamiltonian, with the basis and the
/// normalization computed once.
struct Landscape<'a> {
    h: &'a HermitianOp,
    basis: ProductBasis,
    k: usize,
    n: usize,
    norm: f64,
}

impl<'a> Landscape<'a> {
    fn new(h: &'a HermitianOp, dims: &Dims, k: usize) -> Result<Self> {
        if h.dim() != dims.total() {
            return Err(Error::Shape {
                expected: dims.total(),
                found: h.dim(),
            });
        }
        if k < 1 || k > dims.n() {
            return Err(Error::KOutOfRange { k, n: dims.n() });
        }
        // |H|^2 - |tr H|^2 / D: invariant under conjugation
        let d = h.dim() as f64;
        let norm = h.hs_norm_sqr() - h.trace().powi(2) / d;
        if norm <= 1e-14 * h.hs_norm_sqr().max(f64::MIN_POSITIVE) {
            return Err(Error::UndefinedObjective);
        }
        Ok(Self {
            h,
            basis: ProductBasis::gell_mann(dims),
            k,
            n: dims.n(),
            norm,
        })
    }

    fn conjugated(&self, v: &UnitaryOp) -> CMatrix {
        let m = v.matrix();
        let hv = m * self.h.matrix() * m.adjoint();
        (&hv + hv.adjoint()).unscale(2.0)
    }

    fn value(&self, v: &UnitaryOp) -> f64 {
        let c = self
            .basis
            .coefficients(&self.conjugated(v))
            .expect("dimension checked at construction");
        raw_profile(&c, self.basis.weights(), self.n).tail(self.k) / self.norm
    }

    fn value_and_gradient(&self, v: &UnitaryOp) -> (f64, CMatrix) {
        let hv = self.conjugated(v);
        let mut c = self
            .basis
            .coefficients(&hv)
            .expect("dimension checked at construction");
        let value = raw_profile(&c, self.basis.weights(), self.n).tail(self.k) / self.norm;
        for (ci, &w) in c.iter_mut().zip(self.basis.weights()) {
            if w <= self.k {
                *ci = ZERO;
            }
        }
        let g = self.basis.synthesize(&c);
        let grad = (&g * &hv - &hv * &g) * C64::from(2.0 / self.norm);
        (value, grad)
    }
}

/// `exp(s X) V` for anti-Hermitian `X`.
pub fn retract(x: &CMatrix, s: f64, v: &UnitaryOp) -> UnitaryOp {
    // X = -i A with A = i X Hermitian, so exp(s X) = exp(-i s A)
    let a = HermitianOp::symmetrize(&(x * I));
    expm_i(&a, s).compose(v)
}

/// Share of the non-constant weight of `V H V'` above weight `k`.
pub fn objective(h: &HermitianOp, dims: &Dims, v: &UnitaryOp, k: usize) -> Result<f64> {
    Ok(Landscape::new(h, dims, k)?.value(v))
}

/// Gradient along curves `exp(s X) V`: the anti-Hermitian `G` with
/// `d/ds J = Re tr(G' X)`.
pub fn riemannian_gradient(
    h: &HermitianOp,
    dims: &Dims,
    v: &UnitaryOp,
    k: usize,
) -> Result<CMatrix> {
    Ok(Landscape::new(h, dims, k)?.value_and_gradient(v).1)
}

fn descend(land: &Landscape, start: UnitaryOp, cfg: &SearchConfig) -> (UnitaryOp, RestartRecord) {
    let mut v = start;
    let (mut value, mut grad) = land.value_and_gradient(&v);
    let mut trace = vec![(0, value)];
    let mut step = cfg.step_init;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=cfg.max_iters {
        let gnorm2 = grad.norm_squared();
        if gnorm2.sqrt() < cfg.grad_tol || value == 0.0 {
            converged = true;
            break;
        }
        // start one notch above the last accepted step, capped at step_init
        let mut s = (step / cfg.backtrack_ratio).min(cfg.step_init);
        let mut accepted = None;
        while s > 1e-16 {
            let cand = retract(&grad, -s, &v);
            let cv = land.value(&cand);
            if cv <= value - cfg.armijo_c * s * gnorm2 {
                accepted = Some((cand, s));
                break;
            }
            s *= cfg.backtrack_ratio;
        }
        let Some((cand, s)) = accepted else {
            break;
        };
        step = s;
        v = cand;
        let (nv, ng) = land.value_and_gradient(&v);
        value = nv;
        grad = ng;
        iterations = it;
        trace.push((it, value));
    }
    if !converged && grad.norm() < cfg.grad_tol {
        converged = true;
    }
    let residual = land.value(&v);
    let record = RestartRecord {
        restart: 0,
        residual,
        iterations,
        converged,
        trace,
    };
    (v, record)
}

/// Best of `cfg.restarts` descents; restart 0 starts at the identity, the
/// others at Haar-random unitaries drawn from `cfg.stream`.
pub fn search(h: &HermitianOp, dims: &Dims, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let land = Landscape::new(h, dims, cfg.k)?;
    let d = dims.total();
    let runs: Vec<(UnitaryOp, RestartRecord)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                UnitaryOp::identity(d)
            } else {
                haar_unitary(d, &cfg.stream.child(r as u64))
            };
            let (v, mut rec) = descend(&land, start, cfg);
            rec.restart = r;
            (v, rec)
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.1.residual.total_cmp(&b.1.residual).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let records: Vec<RestartRecord> = runs.iter().map(|(_, r)| r.clone()).collect();
    let restart_tps = runs
        .into_iter()
        .map(|(v, _)| Tps::new(dims.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    let rec = records[best].clone();
    Ok(SearchResult {
        tps: restart_tps[best].clone(),
        residual: rec.residual,
        iterations: rec.iterations,
        trace: rec.trace,
        converged: rec.converged,
        restart: best,
        restarts: records,
        restart_tps,
    })
}

/// Independent check of a search result with the locality predicate.
pub fn certify(h: &HermitianOp, result: &SearchResult, k: usize, tol: f64) -> Result<bool> {
    is_k_local(h, &result.tps, k, tol)
}
