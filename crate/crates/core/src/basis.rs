//! Orthonormal Hermitian operator bases and the weight-graded expansion of an
//! operator in the induced product basis.
//!
//! Every single-site basis starts with `I/sqrt(d)` and continues with
//! traceless Hermitian matrices, all of unit Hilbert-Schmidt norm. A product
//! basis element `O_1^{a_1} (x) ... (x) O_n^{a_n}` has *weight* equal to the
//! number of nonzero `a_k`; the squared coefficients summed per weight give
//! the [`WeightProfile`] that K-locality is read from.
//!
//! Coefficients are computed with one mode product per site on the
//! operator reshaped as an `n`-mode tensor of `(row, col)` index pairs, so a
//! full expansion costs `O(D^2 * sum d_k^2)` instead of `O(D^4)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, Dims, HermitianOp, UnitaryOp, C64, I, ONE, ZERO};
use crate::tps::Tps;

/// Coefficients with `|c| <= DUST * ||H||_HS` are treated as zero when grading.
pub const DUST: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SiteBasis {
    d: usize,
    ops: Vec<CMatrix>,
}

impl SiteBasis {
    /// Generalized Gell-Mann basis scaled to unit norm, preceded by `I/sqrt(d)`.
    ///
    /// Ordering: for each pair `j < k` the symmetric then antisymmetric
    /// off-diagonal element, then the `d - 1` diagonal elements. For `d = 2`
    /// this is `(I, X, Y, Z)/sqrt(2)`.
    pub fn gell_mann(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("site dimension {d} < 2")));
        }
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut ops = Vec::with_capacity(d * d);
        ops.push(CMatrix::identity(d, d).unscale((d as f64).sqrt()));
        for j in 0..d {
            for k in j + 1..d {
                let mut sym = CMatrix::zeros(d, d);
                sym[(j, k)] = C64::from(inv_sqrt2);
                sym[(k, j)] = C64::from(inv_sqrt2);
                ops.push(sym);
                let mut anti = CMatrix::zeros(d, d);
                anti[(j, k)] = -I * inv_sqrt2;
                anti[(k, j)] = I * inv_sqrt2;
                ops.push(anti);
            }
        }
        for l in 1..d {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut diag = CMatrix::zeros(d, d);
            for j in 0..l {
                diag[(j, j)] = C64::from(norm);
            }
            diag[(l, l)] = C64::from(-(l as f64) * norm);
            ops.push(diag);
        }
        Ok(Self { d, ops })
    }

    /// Validates a user-supplied basis: `d^2` orthonormal Hermitian matrices,
    /// the first proportional to the identity.
    pub fn from_ops(ops: Vec<CMatrix>) -> Result<Self> {
        let d = ops.first().map(|m| m.nrows()).unwrap_or(0);
        if d < 2 || ops.len() != d * d {
            return Err(Error::InvalidParameter(format!(
                "expected d^2 = {} operators of size {d}",
                d * d
            )));
        }
        let id = CMatrix::identity(d, d).unscale((d as f64).sqrt());
        if crate::hilbert::max_abs_diff(&ops[0], &id) > 1e-10 {
            return Err(Error::InvalidParameter(
                "first operator must be I/sqrt(d)".into(),
            ));
        }
        for (a, oa) in ops.iter().enumerate() {
            HermitianOp::new(oa.clone())?;
            for (b, ob) in ops.iter().enumerate() {
                let g = crate::hilbert::hs_inner(oa, ob)?;
                let expected = if a == b { ONE } else { ZERO };
                if (g - expected).norm() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "operators {a} and {b} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self { d, ops })
    }

    /// The basis `{U O U'}`; still valid since conjugation is an HS isometry
    /// fixing the identity.
    pub fn conjugated(&self, u: &UnitaryOp) -> Self {
        let um = u.matrix();
        let ops = self.ops.iter().map(|o| um * o * um.adjoint()).collect();
        Self { d: self.d, ops }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// Row `a` holds `conj(O_a)` flattened row-major, so that multiplying a
    /// flattened operator yields its HS coefficients.
    fn analysis_matrix(&self) -> CMatrix {
        let r = self.d * self.d;
        CMatrix::from_fn(r, r, |a, p| self.ops[a][(p / self.d, p % self.d)].conj())
    }
}

/// Per-site multi-index of a product basis element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&a| a != 0).count()
    }

    pub fn alphas(&self) -> &[usize] {
        &self.0
    }
}

/// A full product basis over `dims`, with the per-site transforms cached.
#[derive(Debug, Clone)]
pub struct ProductBasis {
    dims: Dims,
    sites: Vec<SiteBasis>,
    analysis: Vec<CMatrix>,
    synthesis: Vec<CMatrix>,
    weights: Vec<usize>,
}

impl ProductBasis {
    pub fn gell_mann(dims: &Dims) -> Self {
        let sites = dims
            .factors()
            .iter()
            .map(|&d| SiteBasis::gell_mann(d).expect("Dims guarantees d >= 2"))
            .collect();
        Self::from_sites(dims, sites).expect("site dimensions match by construction")
    }

    pub fn from_sites(dims: &Dims, sites: Vec<SiteBasis>) -> Result<Self> {
        if sites.len() != dims.n() || sites.iter().zip(dims.factors()).any(|(s, &d)| s.d != d) {
            return Err(Error::InvalidParameter(
                "site bases do not match the factor dimensions".into(),
            ));
        }
        let analysis: Vec<CMatrix> = sites.iter().map(SiteBasis::analysis_matrix).collect();
        let synthesis = analysis.iter().map(|a| a.adjoint()).collect();
        let len: usize = dims.factors().iter().map(|d| d * d).product();
        let weights = (0..len)
            .map(|flat| multi_index_of(dims, flat).weight())
            .collect();
        Ok(Self {
            dims: dims.clone(),
            sites,
            analysis,
            synthesis,
            weights,
        })
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn sites(&self) -> &[SiteBasis] {
        &self.sites
    }

    /// Weight of every flat coefficient index.
    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    /// HS coefficients of an operator already expressed in the canonical
    /// product space.
    pub fn coefficients(&self, m: &CMatrix) -> Result<Vec<C64>> {
        let total = self.dims.total();
        if m.nrows() != total || m.ncols() != total {
            return Err(Error::Shape {
                expected: total,
                found: m.nrows(),
            });
        }
        let mut t = to_pair_tensor(&self.dims, m);
        for (k, a) in self.analysis.iter().enumerate() {
            t = mode_product(&self.dims, &t, k, a);
        }
        Ok(t)
    }

    /// Inverse of [`coefficients`](Self::coefficients).
    pub fn synthesize(&self, coeffs: &[C64]) -> CMatrix {
        let mut t = coeffs.to_vec();
        for (k, b) in self.synthesis.iter().enumerate() {
            t = mode_product(&self.dims, &t, k, b);
        }
        from_pair_tensor(&self.dims, &t)
    }

    pub fn decompose_canonical(&self, h: &HermitianOp) -> Result<Decomposition> {
        Ok(Decomposition {
            dims: self.dims.clone(),
            coeffs: self.coefficients(h.matrix())?,
        })
    }

    pub fn reconstruct(&self, dec: &Decomposition) -> Result<HermitianOp> {
        if dec.dims != self.dims {
            return Err(Error::InvalidParameter(
                "decomposition dims differ from basis".into(),
            ));
        }
        Ok(HermitianOp::symmetrize(&self.synthesize(&dec.coeffs)))
    }
}

fn multi_index_of(dims: &Dims, mut flat: usize) -> MultiIndex {
    let mut alphas = vec![0; dims.n()];
    for k in (0..dims.n()).rev() {
        let r = dims.dim(k) * dims.dim(k);
        alphas[k] = flat % r;
        flat /= r;
    }
    MultiIndex(alphas)
}

fn flat_of(dims: &Dims, idx: &MultiIndex) -> Option<usize> {
    if idx.0.len() != dims.n() {
        return None;
    }
    let mut flat = 0;
    for (k, &a) in idx.0.iter().enumerate() {
        let r = dims.dim(k) * dims.dim(k);
        if a >= r {
            return None;
        }
        flat = flat * r + a;
    }
    Some(flat)
}

/// Reorders `M[i, j]` into the tensor `T[p_1, ..., p_n]`, `p_k = i_k d_k + j_k`.
fn to_pair_tensor(dims: &Dims, m: &CMatrix) -> Vec<C64> {
    let total = dims.total();
    let mut t = vec![ZERO; total * total];
    for i in 0..total {
        for j in 0..total {
            t[pair_flat(dims, i, j)] = m[(i, j)];
        }
    }
    t
}

fn from_pair_tensor(dims: &Dims, t: &[C64]) -> CMatrix {
    let total = dims.total();
    CMatrix::from_fn(total, total, |i, j| t[pair_flat(dims, i, j)])
}

fn pair_flat(dims: &Dims, i: usize, j: usize) -> usize {
    let mut flat = 0;
    for k in 0..dims.n() {
        let d = dims.dim(k);
        let s = dims.stride(k);
        let (ik, jk) = ((i / s) % d, (j / s) % d);
        flat = flat * d * d + ik * d + jk;
    }
    flat
}

/// `T'[.., a, ..] = sum_p A[a, p] T[.., p, ..]` along mode `k`.
fn mode_product(dims: &Dims, t: &[C64], k: usize, a: &CMatrix) -> Vec<C64> {
    let r = dims.dim(k) * dims.dim(k);
    let outer: usize = dims.factors()[..k].iter().map(|d| d * d).product();
    let inner: usize = dims.factors()[k + 1..].iter().map(|d| d * d).product();
    let mut out = vec![ZERO; t.len()];
    for o in 0..outer {
        let base = o * r * inner;
        for row in 0..r {
            for p in 0..r {
                let c = a[(row, p)];
                if c == ZERO {
                    continue;
                }
                let src = base + p * inner;
                let dst = base + row * inner;
                for q in 0..inner {
                    out[dst + q] += c * t[src + q];
                }
            }
        }
    }
    out
}

/// Dense coefficient array over every product-basis multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    dims: Dims,
    coeffs: Vec<C64>,
}

impl Decomposition {
    pub fn zero(dims: &Dims) -> Self {
        let len = dims.factors().iter().map(|d| d * d).product();
        Self {
            dims: dims.clone(),
            coeffs: vec![ZERO; len],
        }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn get(&self, idx: &MultiIndex) -> Option<C64> {
        flat_of(&self.dims, idx).map(|f| self.coeffs[f])
    }

    pub fn set(&mut self, idx: &MultiIndex, value: C64) -> Result<()> {
        let f = flat_of(&self.dims, idx).ok_or_else(|| {
            Error::InvalidParameter(format!("multi-index {:?} out of range", idx.0))
        })?;
        self.coeffs[f] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(f, &c)| (multi_index_of(&self.dims, f), c))
    }

    /// `sum |c|^2`, equal to `||H||_HS^2` by Parseval.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest imaginary part; zero up to rounding for Hermitian input.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.im.abs()))
    }

    pub fn to_json(&self) -> DecompositionJson {
        let cutoff = DUST * self.norm_sqr().sqrt();
        DecompositionJson {
            dims: self.dims.clone(),
            entries: self
                .iter()
                .filter(|(_, c)| c.norm() > cutoff)
                .map(|(alphas, c)| CoeffEntry {
                    alphas,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_json(json: &DecompositionJson) -> Result<Self> {
        let mut dec = Self::zero(&json.dims);
        for e in &json.entries {
            dec.set(&e.alphas, C64::new(e.re, e.im))?;
        }
        Ok(dec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub alphas: MultiIndex,
    pub re: f64,
    pub im: f64,
}

/// Interchange form of a [`Decomposition`]; dust coefficients are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub dims: Dims,
    pub entries: Vec<CoeffEntry>,
}

/// `w[k]` is the squared HS mass carried by weight-`k` product terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightProfile(pub Vec<f64>);

impl WeightProfile {
    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `sum_{k > K} w[k]`.
    pub fn tail(&self, k: usize) -> f64 {
        self.0.iter().skip(k + 1).sum()
    }

    pub fn max_abs_diff(&self, other: &WeightProfile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Decomposes `h` in the product basis of `tps`: coefficients of
/// `T h T^-1` against the Gell-Mann product basis.
pub fn decompose(h: &HermitianOp, tps: &Tps) -> Result<Decomposition> {
    let pulled = tps.pull(h)?;
    ProductBasis::gell_mann(tps.dims()).decompose_canonical(&pulled)
}

/// Rebuilds the operator in the canonical product space.
pub fn reconstruct(dec: &Decomposition) -> HermitianOp {
    ProductBasis::gell_mann(&dec.dims)
        .reconstruct(dec)
        .expect("basis built from the decomposition's own dims")
}

pub fn weight_profile(dec: &Decomposition) -> WeightProfile {
    let n = dec.dims.n();
    let cutoff = DUST * dec.norm_sqr().sqrt();
    let mut w = vec![0.0; n + 1];
    for (idx, c) in dec.iter() {
        if c.norm() > cutoff {
            w[idx.weight()] += c.norm_sqr();
        }
    }
    WeightProfile(w)
}

/// Profile from raw coefficients and a precomputed weight table, without the
/// dust cutoff. Used where smoothness matters more than crisp verdicts.
pub fn raw_profile(coeffs: &[C64], weights: &[usize], n: usize) -> WeightProfile {
    let mut w = vec![0.0; n + 1];
    for (c, &k) in coeffs.iter().zip(weights) {
        w[k] += c.norm_sqr();
    }
    WeightProfile(w)
}
