//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Every operator type here is a checked newtype over a dense
//! [`nalgebra::DMatrix`]: constructors verify the algebraic invariant
//! (Hermiticity, unitarity, normalization, positivity) once, and the rest of
//! the crate relies on it without re-checking.
//!
//! Factor ordering follows `kron`: site 0 is the most significant digit of a
//! canonical product-basis index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Absolute tolerance for algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Relative tolerance for spectral round trips.
pub const SPECTRAL_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of matrices, first factor most significant.
pub fn kron_all<'a, I>(factors: I) -> CMatrix
where
    I: IntoIterator<Item = &'a CMatrix>,
{
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, m| acc.kronecker(m))
}

// ---------------------------------------------------------------------------
// Dims

/// Ordered list of factor dimensions `d_1, ..., d_n` with `n >= 2`, `d_i >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Dims {
    factors: Vec<usize>,
}

impl Dims {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.len() < 2 || factors.iter().any(|&d| d < 2) {
            return Err(Error::InvalidDims(factors));
        }
        Ok(Self { factors })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn dim(&self, site: usize) -> usize {
        self.factors[site]
    }

    /// Stride of site `k` in a flat canonical index.
    pub fn stride(&self, site: usize) -> usize {
        self.factors[site + 1..].iter().product()
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: site,
                len: self.n(),
            });
        }
        Ok(())
    }

    fn check_total(&self, found: usize) -> Result<()> {
        if found != self.total() {
            return Err(Error::Shape {
                expected: self.total(),
                found,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Dims {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Dims> for Vec<usize> {
    fn from(d: Dims) -> Self {
        d.factors
    }
}

// ---------------------------------------------------------------------------
// Operators

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp(CMatrix);

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp(CMatrix);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVec(CVector);

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOp(CMatrix);

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: UnitaryOp,
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

fn unitarity_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    max_abs_diff(&(m.adjoint() * m), &CMatrix::identity(d, d))
}

impl HermitianOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, ALGEBRAIC_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        let deviation = hermitian_deviation(&m);
        if deviation > tol * (1.0 + max_abs(&m)) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(m))
    }

    /// Hermitian part `(M + M')/2`; never fails.
    pub fn symmetrize(m: &CMatrix) -> Self {
        Self((m + m.adjoint()).unscale(2.0))
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMatrix::zeros(d, d))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let diag = CVector::from_iterator(values.len(), values.iter().map(|&x| C64::from(x)));
        Self(CMatrix::from_diagonal(&diag))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.scale(c))
    }

    /// `U H U'`, re-symmetrized to remove rounding drift.
    pub fn conjugate_by(&self, u: &UnitaryOp) -> Self {
        Self::symmetrize(&(&u.0 * &self.0 * u.0.adjoint()))
    }

    pub fn hs_norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eigh(&self) -> Spectrum {
        eigh_matrix(&self.0)
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.eigh()
            .values
            .iter()
            .fold(0.0, |acc: f64, x| acc.max(x.abs()))
    }
}

fn eigh_matrix(m: &CMatrix) -> Spectrum {
    let d = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Spectrum {
        values,
        vectors: UnitaryOp(vectors),
    }
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.vectors.0.column(k).into_owned()
    }

    /// `V diag(f(lambda)) V'`.
    pub fn apply_fn<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let v = &self.vectors.0;
        let diag = CVector::from_iterator(self.dim(), self.values.iter().map(|&x| f(x)));
        v * CMatrix::from_diagonal(&diag) * v.adjoint()
    }

    /// Smallest gap between consecutive eigenvalues (infinite for D = 1).
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

impl UnitaryOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, ALGEBRAIC_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        check_square(&m)?;
        let residual = unitarity_residual(&m);
        if residual > tol {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is unitary by construction.
    pub(crate) fn trusted(m: CMatrix) -> Self {
        debug_assert!(unitarity_residual(&m) < 1e-8, "trusted unitary drifted");
        Self(m)
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self * other`.
    pub fn compose(&self, other: &UnitaryOp) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn kron(&self, other: &UnitaryOp) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn kron_all(factors: &[UnitaryOp]) -> Self {
        Self(kron_all(factors.iter().map(|u| &u.0)))
    }

    pub fn apply(&self, psi: &StateVec) -> StateVec {
        StateVec(&self.0 * &psi.0)
    }

    pub fn residual(&self) -> f64 {
        unitarity_residual(&self.0)
    }

    /// Permutation operator sending canonical factor `k` to slot `perm[k]`.
    pub fn factor_permutation(dims: &Dims, perm: &[usize]) -> Result<Self> {
        let n = dims.n();
        let mut seen = vec![false; n];
        let bad_len = perm.len() != n;
        for (k, &p) in perm.iter().enumerate() {
            if bad_len || p >= n || seen[p] || dims.dim(k) != dims.dim(p) {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a dimension-preserving permutation of {:?}",
                    dims.factors()
                )));
            }
            seen[p] = true;
        }
        let total = dims.total();
        let mut m = CMatrix::zeros(total, total);
        for x in 0..total {
            let mut y = 0;
            for k in 0..n {
                let digit = (x / dims.stride(k)) % dims.dim(k);
                y += digit * dims.stride(perm[k]);
            }
            m[(y, x)] = ONE;
        }
        Ok(Self(m))
    }
}

impl StateVec {
    pub fn new(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(v))
    }

    /// Normalizes `v`; fails only on a (numerically) zero vector.
    pub fn normalize(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 1e-300) {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(v.unscale(norm)))
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[k] = ONE;
        Self(v)
    }

    pub fn product(factors: &[StateVec]) -> Self {
        let v = factors
            .iter()
            .fold(CVector::from_element(1, ONE), |acc, f| acc.kronecker(&f.0));
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVec) -> C64 {
        self.0.dotc(&other.0)
    }
}

impl DensityOp {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let deviation = hermitian_deviation(&m);
        if deviation > ALGEBRAIC_TOL {
            return Err(Error::NotDensity(format!(
                "not Hermitian ({deviation:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > ALGEBRAIC_TOL {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let min = eigh_matrix(&m).values[0];
        if min < -ALGEBRAIC_TOL {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(m))
    }

    pub fn from_pure(psi: &StateVec) -> Self {
        Self(&psi.0 * psi.0.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(CMatrix::identity(d, d).unscale(d as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn conjugate_by(&self, u: &UnitaryOp) -> Self {
        let m = &u.0 * &self.0 * u.0.adjoint();
        Self((&m + m.adjoint()).unscale(2.0))
    }
}

// ---------------------------------------------------------------------------
// Operations

/// Hilbert-Schmidt inner product `tr(A' B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::Shape {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn eig_hermitian(h: &HermitianOp) -> Spectrum {
    h.eigh()
}

/// `exp(-i t H)`.
pub fn expm_i(h: &HermitianOp, t: f64) -> UnitaryOp {
    expm_i_spectrum(&h.eigh(), t)
}

/// `exp(-i t H)` from a precomputed spectrum of H.
pub fn expm_i_spectrum(spec: &Spectrum, t: f64) -> UnitaryOp {
    UnitaryOp::trusted(spec.apply_fn(|x| C64::from_polar(1.0, -t * x)))
}

/// Reduced state of factor `keep` (0-based), tracing out all others.
pub fn partial_trace(rho: &DensityOp, dims: &Dims, keep: usize) -> Result<DensityOp> {
    dims.check_total(rho.dim())?;
    dims.check_site(keep)?;
    let d = dims.dim(keep);
    let s = dims.stride(keep);
    let m = &rho.0;
    let mut out = CMatrix::zeros(d, d);
    for rest in (0..dims.total()).filter(|x| (x / s).is_multiple_of(d)) {
        for a in 0..d {
            for b in 0..d {
                out[(a, b)] += m[(rest + a * s, rest + b * s)];
            }
        }
    }
    Ok(DensityOp(out))
}

/// Reduced state of factor `keep` for a pure state, without forming `|psi><psi|`.
pub fn reduced_state(psi: &StateVec, dims: &Dims, keep: usize) -> Result<DensityOp> {
    dims.check_total(psi.dim())?;
    dims.check_site(keep)?;
    Ok(DensityOp(reduced_unchecked(&psi.0, dims, keep)))
}

fn reduced_unchecked(v: &CVector, dims: &Dims, keep: usize) -> CMatrix {
    let d = dims.dim(keep);
    let s = dims.stride(keep);
    let mut out = CMatrix::zeros(d, d);
    for rest in (0..dims.total()).filter(|x| (x / s).is_multiple_of(d)) {
        for a in 0..d {
            let va = v[rest + a * s];
            for b in 0..d {
                out[(a, b)] += va * v[rest + b * s].conj();
            }
        }
    }
    out
}

/// Von Neumann entropy in nats; eigenvalues are clamped to `[0, 1]` first.
pub fn vn_entropy(rho: &DensityOp) -> f64 {
    entropy_of_matrix(&rho.0)
}

fn entropy_of_matrix(m: &CMatrix) -> f64 {
    eigh_matrix(m)
        .values
        .iter()
        .map(|&x| x.clamp(0.0, 1.0))
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.ln())
        .sum()
}

/// Entropy of every single-site marginal of a pure state.
pub fn site_entropies(psi: &StateVec, dims: &Dims) -> Result<Vec<f64>> {
    dims.check_total(psi.dim())?;
    Ok((0..dims.n())
        .map(|k| entropy_of_matrix(&reduced_unchecked(&psi.0, dims, k)))
        .collect())
}

pub fn max_site_entropy(psi: &StateVec, dims: &Dims) -> Result<f64> {
    Ok(site_entropies(psi, dims)?.into_iter().fold(0.0, f64::max))
}

pub fn purity(rho: &DensityOp) -> f64 {
    // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    rho.0.iter().map(|z| z.norm_sqr()).sum()
}

/// Singular values (descending) of `a` with the matching left singular
/// vectors as columns.
///
/// One-sided Jacobi on the columns of `a'`, which keeps small singular values
/// accurate relative to the largest. nalgebra's complex SVD returned wrong
/// factorizations for some of the operator reshapes this crate produces.
pub fn svd_left(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let mut b = a.adjoint();
    let (rows, m) = b.shape();
    let mut v = CMatrix::identity(m, m);
    // columns below this are numerically zero; rotating them only amplifies noise
    let floor = (f64::EPSILON * b.norm()).powi(2);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha = b.column(p).norm_squared();
                let beta = b.column(q).norm_squared();
                let gamma = b.column(p).dotc(&b.column(q));
                let g = gamma.norm();
                if alpha.min(beta) <= floor || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)] * phase;
                    b[(i, p)] = bp * c - bq * s;
                    b[(i, q)] = bp * s + bq * c;
                }
                for i in 0..m {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)] * phase;
                    v[(i, p)] = vp * c - vq * s;
                    v[(i, q)] = vp * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..m).map(|j| b.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let values = order.iter().map(|&j| norms[j]).collect();
    let left = CMatrix::from_fn(m, m, |r, c| v[(r, order[c])]);
    (values, left)
}

// ---------------------------------------------------------------------------
// Sampling

fn ginibre(d: usize, rng: &mut impl Rng) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(d: usize, stream: &Stream) -> UnitaryOp {
    let mut rng = stream.rng();
    let qr = ginibre(d, &mut rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            ONE
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    UnitaryOp::trusted(q)
}

/// Haar-random unit vector.
pub fn haar_state(d: usize, stream: &Stream) -> StateVec {
    let mut rng = stream.rng();
    let v = CVector::from_fn(d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    StateVec::normalize(v).expect("gaussian vector is nonzero")
}

/// Product of independent Haar states, one per factor.
pub fn random_product_state(dims: &Dims, stream: &Stream) -> StateVec {
    let factors: Vec<StateVec> = dims
        .factors()
        .iter()
        .enumerate()
        .map(|(k, &d)| haar_state(d, &stream.child(k as u64)))
        .collect();
    StateVec::product(&factors)
}

/// Product of independent Haar unitaries, one per factor.
pub fn random_local_unitary(dims: &Dims, stream: &Stream) -> UnitaryOp {
    let factors: Vec<UnitaryOp> = dims
        .factors()
        .iter()
        .enumerate()
        .map(|(k, &d)| haar_unitary(d, &stream.child(k as u64)))
        .collect();
    UnitaryOp::kron_all(&factors)
}

/// GUE-style random Hermitian matrix `(G + G')/2`.
pub fn random_hermitian(d: usize, stream: &Stream) -> HermitianOp {
    let mut rng = stream.rng();
    HermitianOp::symmetrize(&ginibre(d, &mut rng))
}
