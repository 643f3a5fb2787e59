//! Tensor product structures and the decision procedure for their equality.
//!
//! A [`Tps`] is stored as one representative isomorphism `iso: H -> (x)_i H_i`,
//! written as a unitary relative to the canonical product basis. Two
//! representatives describe the same structure iff `T1 T2^-1` is a product of
//! single-factor unitaries, possibly composed with a permutation of
//! equal-dimension factors.
//!
//! Product operators are recognized by operator Schmidt rank: reshaped across
//! every one-factor-versus-rest cut, a product operator has exactly one
//! nonzero singular value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    haar_unitary, max_abs, max_abs_diff, svd_left, CMatrix, Dims, HermitianOp, StateVec, UnitaryOp,
    C64,
};
use crate::rng::Stream;

/// Second-to-first singular value ratio below which a cut counts as rank one.
pub const SCHMIDT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Tps {
    dims: Dims,
    iso: UnitaryOp,
}

impl Tps {
    pub fn new(dims: Dims, iso: UnitaryOp) -> Result<Self> {
        if iso.dim() != dims.total() {
            return Err(Error::Shape {
                expected: dims.total(),
                found: iso.dim(),
            });
        }
        Ok(Self { dims, iso })
    }

    pub fn canonical(dims: &Dims) -> Self {
        Self {
            dims: dims.clone(),
            iso: UnitaryOp::identity(dims.total()),
        }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn iso(&self) -> &UnitaryOp {
        &self.iso
    }

    fn check(&self, d: usize) -> Result<()> {
        if d != self.dims.total() {
            return Err(Error::Shape {
                expected: self.dims.total(),
                found: d,
            });
        }
        Ok(())
    }

    /// `T H T^-1`, the operator as seen on the canonical product space.
    pub fn pull(&self, h: &HermitianOp) -> Result<HermitianOp> {
        self.check(h.dim())?;
        Ok(h.conjugate_by(&self.iso))
    }

    /// `T |psi>`, the state as seen on the canonical product space.
    pub fn pull_state(&self, psi: &StateVec) -> Result<StateVec> {
        self.check(psi.dim())?;
        Ok(self.iso.apply(psi))
    }

    /// Group action `U . T` with representative `T U'`.
    pub fn act(&self, u: &UnitaryOp) -> Result<Self> {
        self.check(u.dim())?;
        Ok(Self {
            dims: self.dims.clone(),
            iso: self.iso.compose(&u.adjoint()),
        })
    }

    /// The unitary on `H` that acts as `U_1 (x) ... (x) U_n` in this structure,
    /// i.e. `T' (U_1 (x) ... (x) U_n) T`.
    pub fn local_unitary(&self, factors: &[UnitaryOp]) -> Result<UnitaryOp> {
        if factors.len() != self.dims.n()
            || factors
                .iter()
                .zip(self.dims.factors())
                .any(|(u, &d)| u.dim() != d)
        {
            return Err(Error::InvalidParameter(
                "local factors do not match the factor dimensions".into(),
            ));
        }
        let local = UnitaryOp::kron_all(factors);
        Ok(self.iso.adjoint().compose(&local).compose(&self.iso))
    }

    /// A random local unitary of this structure.
    pub fn random_local_unitary(&self, stream: &Stream) -> UnitaryOp {
        let factors: Vec<UnitaryOp> = self
            .dims
            .factors()
            .iter()
            .enumerate()
            .map(|(k, &d)| haar_unitary(d, &stream.child(k as u64)))
            .collect();
        self.local_unitary(&factors)
            .expect("factors sized from dims")
    }

    /// Product state `T^-1 (phi_1 (x) ... (x) phi_n)`.
    pub fn product_state(&self, factors: &[StateVec]) -> Result<StateVec> {
        let v = StateVec::product(factors);
        self.check(v.dim())?;
        Ok(self.iso.adjoint().apply(&v))
    }

    pub fn to_json(&self) -> TpsJson {
        TpsJson {
            dims: self.dims.clone(),
            iso: crate::io::matrix_to_pairs(self.iso.matrix()),
        }
    }

    pub fn from_json(json: &TpsJson) -> Result<Self> {
        let total = json.dims.total();
        let m = crate::io::pairs_to_matrix(&json.iso, total)?;
        Self::new(json.dims.clone(), UnitaryOp::new(m)?)
    }
}

/// Interchange form: row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TpsJson {
    pub dims: Dims,
    pub iso: Vec<[f64; 2]>,
}

pub fn canonical(dims: &Dims) -> Tps {
    Tps::canonical(dims)
}

pub fn act(u: &UnitaryOp, t: &Tps) -> Result<Tps> {
    t.act(u)
}

pub fn random_tps(dims: &Dims, stream: &Stream) -> Tps {
    Tps {
        dims: dims.clone(),
        iso: haar_unitary(dims.total(), stream),
    }
}

/// Evidence that an operator factorizes:
/// `W = P' (scale * factors[0] (x) ... (x) factors[n-1])` where `P` is the
/// factor permutation sending factor `k` to slot `permutation[k]`.
///
/// Each factor is normalized to Frobenius norm `sqrt(d_k)` (unitary when `W`
/// is) with its largest entry made real and positive.
#[derive(Debug, Clone)]
pub struct ProductOpCertificate {
    pub factors: Vec<CMatrix>,
    pub scale: C64,
    pub permutation: Vec<usize>,
    pub residual: f64,
}

impl ProductOpCertificate {
    pub fn reassemble(&self, dims: &Dims) -> CMatrix {
        let product = crate::hilbert::kron_all(self.factors.iter()) * self.scale;
        let p = UnitaryOp::factor_permutation(dims, &self.permutation)
            .expect("certificate permutations are dimension-preserving");
        p.matrix().adjoint() * product
    }
}

/// Row index of `W` reshaped as a `(d_k^2, (D/d_k)^2)` matrix, and the column.
fn realign(dims: &Dims, k: usize, w: &CMatrix) -> CMatrix {
    let d = dims.dim(k);
    let s = dims.stride(k);
    let rest = dims.total() / d;
    let mut r = CMatrix::zeros(d * d, rest * rest);
    let split = |x: usize| ((x / s) % d, (x / (s * d)) * s + x % s);
    for a in 0..dims.total() {
        let (ak, ar) = split(a);
        for b in 0..dims.total() {
            let (bk, br) = split(b);
            r[(ak * d + bk, ar * rest + br)] = w[(a, b)];
        }
    }
    r
}

struct Cut {
    ratio: f64,
    top: Vec<C64>,
}

fn analyze_cut(dims: &Dims, k: usize, w: &CMatrix) -> Cut {
    let (sv, u) = svd_left(&realign(dims, k, w));
    let first = sv[0];
    let second = sv.get(1).copied().unwrap_or(0.0);
    let ratio = if first > 0.0 { second / first } else { 0.0 };
    Cut {
        ratio,
        top: u.column(0).iter().copied().collect(),
    }
}

/// Second-to-first singular value ratio of `W` across each single-factor cut.
pub fn schmidt_ratios(w: &CMatrix, dims: &Dims) -> Result<Vec<f64>> {
    check_operator(w, dims)?;
    Ok((0..dims.n())
        .map(|k| analyze_cut(dims, k, w).ratio)
        .collect())
}

fn check_operator(w: &CMatrix, dims: &Dims) -> Result<()> {
    if w.nrows() != dims.total() || w.ncols() != dims.total() {
        return Err(Error::Shape {
            expected: dims.total(),
            found: w.nrows(),
        });
    }
    Ok(())
}

fn normalize_factor(top: &[C64], d: usize) -> CMatrix {
    let mut a = CMatrix::from_fn(d, d, |r, c| top[r * d + c]);
    let norm = a.norm();
    let max = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let pivot = *a
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("nonempty matrix");
    let phase = pivot.conj() / pivot.norm();
    a *= phase * ((d as f64).sqrt() / norm);
    a
}

/// Certificate iff `W` is a (scalar multiple of a) product of single-factor
/// operators, with no factor permutation.
pub fn is_product_operator(w: &CMatrix, dims: &Dims) -> Result<Option<ProductOpCertificate>> {
    check_operator(w, dims)?;
    let wmax = max_abs(w);
    if wmax == 0.0 {
        return Ok(None);
    }
    let mut factors = Vec::with_capacity(dims.n());
    for k in 0..dims.n() {
        let cut = analyze_cut(dims, k, w);
        if cut.ratio > SCHMIDT_TOL {
            return Ok(None);
        }
        factors.push(normalize_factor(&cut.top, dims.dim(k)));
    }
    let product = crate::hilbert::kron_all(factors.iter());
    let scale = crate::hilbert::hs_inner(&product, w)? / dims.total() as f64;
    let residual = max_abs_diff(&(product * scale), w);
    if residual > 1e-8 * wmax {
        return Ok(None);
    }
    Ok(Some(ProductOpCertificate {
        factors,
        scale,
        permutation: (0..dims.n()).collect(),
        residual,
    }))
}

/// All permutations of `0..n` that only exchange equal-dimension factors,
/// identity first.
pub fn admissible_permutations(dims: &Dims) -> Vec<Vec<usize>> {
    fn rec(dims: &Dims, prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let k = prefix.len();
        if k == dims.n() {
            out.push(prefix.clone());
            return;
        }
        for p in 0..dims.n() {
            if !used[p] && dims.dim(p) == dims.dim(k) {
                used[p] = true;
                prefix.push(p);
                rec(dims, prefix, used, out);
                prefix.pop();
                used[p] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(dims, &mut Vec::new(), &mut vec![false; dims.n()], &mut out);
    out
}

/// Decides `T1 = T2` and returns the certifying factorization of `T1 T2^-1`.
pub fn equal_with_certificate(t1: &Tps, t2: &Tps) -> Result<Option<ProductOpCertificate>> {
    if t1.dims != t2.dims {
        return Err(Error::InvalidParameter(format!(
            "cannot compare structures over {:?} and {:?}",
            t1.dims.factors(),
            t2.dims.factors()
        )));
    }
    let relative = t1.iso.matrix() * t2.iso.matrix().adjoint();
    for perm in admissible_permutations(&t1.dims) {
        let p = UnitaryOp::factor_permutation(&t1.dims, &perm)?;
        if let Some(mut cert) = is_product_operator(&(p.matrix() * &relative), &t1.dims)? {
            cert.permutation = perm;
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

pub fn equal(t1: &Tps, t2: &Tps) -> Result<bool> {
    Ok(equal_with_certificate(t1, t2)?.is_some())
}
