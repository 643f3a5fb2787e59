//! Unitary orbits of structured tuples ("kinds"): a Hamiltonian with a state,
//! families of vectors with fixed Gram matrix, and the entanglement
//! fingerprint that pins down a tensor product structure relative to a
//! Hamiltonian and a state.
//!
//! Orbit membership is decided by complete invariants and confirmed by an
//! explicit witness unitary.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Hypothesis, Result};
use crate::hilbert::{
    max_abs_diff, site_entropies, svd_left, CMatrix, CVector, HermitianOp, Spectrum, StateVec,
    UnitaryOp, C64, ONE, ZERO,
};
use crate::rng::Stream;
use crate::tps::{self, Tps};

/// Absolute tolerance for merging sorted eigenvalues into one eigenspace.
pub const GROUPING_TOL: f64 = 1e-9;
/// Minimum gap and minimum eigenspace weight for the witness and probe
/// constructions.
pub const HYPOTHESIS_TOL: f64 = 1e-8;
/// Probe states with smaller norm are skipped.
pub const SKIP_NORM: f64 = 1e-10;
/// Default entrywise tolerance when comparing fingerprints.
pub const FINGERPRINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectrumSpec {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectionSpec {
    pub lambdas: Vec<f64>,
}

/// Spectrum of `H` together with the weight of `psi` in each eigenspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindHsfSpec {
    pub sigma: SpectrumSpec,
    pub lambda: ProjectionSpec,
}

/// Runs of sorted values whose consecutive differences are within `tol`.
pub fn group_eigenvalues(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

fn amplitudes(spec: &Spectrum, psi: &StateVec) -> CVector {
    spec.vectors.matrix().adjoint() * psi.amplitudes()
}

fn projection_weights(groups: &[Range<usize>], amps: &CVector) -> Vec<f64> {
    groups
        .iter()
        .map(|g| g.clone().map(|k| amps[k].norm_sqr()).sum())
        .collect()
}

impl KindHsfSpec {
    pub fn new(sigma: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if sigma.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter(
                "sigma must be sorted ascending".into(),
            ));
        }
        let groups = group_eigenvalues(&sigma, GROUPING_TOL);
        if groups.len() != lambda.len() {
            return Err(Error::InvalidParameter(format!(
                "{} eigenspaces but {} projection weights",
                groups.len(),
                lambda.len()
            )));
        }
        let sum: f64 = lambda.iter().sum();
        if lambda.iter().any(|&l| l < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "projection weights must be non-negative and sum to 1 (sum {sum})"
            )));
        }
        Ok(Self {
            sigma: SpectrumSpec { values: sigma },
            lambda: ProjectionSpec { lambdas: lambda },
        })
    }

    /// The invariants of the pair `(h, psi)`.
    pub fn of(h: &HermitianOp, psi: &StateVec) -> Result<Self> {
        check_dim(h, psi)?;
        let spec = h.eigh();
        let groups = group_eigenvalues(&spec.values, GROUPING_TOL);
        let lambdas = projection_weights(&groups, &amplitudes(&spec, psi));
        Ok(Self {
            sigma: SpectrumSpec {
                values: spec.values,
            },
            lambda: ProjectionSpec { lambdas },
        })
    }
}

fn check_dim(h: &HermitianOp, psi: &StateVec) -> Result<()> {
    if h.dim() != psi.dim() {
        return Err(Error::Shape {
            expected: h.dim(),
            found: psi.dim(),
        });
    }
    Ok(())
}

/// Whether `(h, psi)` has spectrum `spec.sigma` and eigenspace weights
/// `spec.lambda`, each entrywise within `tol`. Mismatched dimensions are
/// simply not members.
pub fn hsf_membership(h: &HermitianOp, psi: &StateVec, spec: &KindHsfSpec, tol: f64) -> bool {
    if h.dim() != psi.dim() || h.dim() != spec.sigma.values.len() {
        return false;
    }
    let s = h.eigh();
    if s.values
        .iter()
        .zip(&spec.sigma.values)
        .any(|(a, b)| (a - b).abs() > tol)
    {
        return false;
    }
    let groups = group_eigenvalues(&spec.sigma.values, GROUPING_TOL);
    let lambdas = projection_weights(&groups, &amplitudes(&s, psi));
    lambdas.len() == spec.lambda.lambdas.len()
        && lambdas
            .iter()
            .zip(&spec.lambda.lambdas)
            .all(|(a, b)| (a - b).abs() <= tol)
}

fn check_hypotheses(spec: &Spectrum, amps: &CVector) -> Result<()> {
    let gap = spec.min_gap();
    if gap <= HYPOTHESIS_TOL {
        return Err(Error::Hypothesis {
            hypothesis: Hypothesis::NonDegenerate,
            detail: format!("smallest eigenvalue gap {gap:.3e}"),
        });
    }
    if let Some((k, a)) = amps
        .iter()
        .enumerate()
        .find(|(_, a)| a.norm() <= HYPOTHESIS_TOL)
    {
        return Err(Error::Hypothesis {
            hypothesis: Hypothesis::NonZeroProjections,
            detail: format!("overlap with eigenvector {k} is {:.3e}", a.norm()),
        });
    }
    Ok(())
}

/// A unitary `U` with `U h U' = h2` and `U psi = psi2`.
///
/// Eigenvectors are matched in sorted order, and each phase is fixed by
/// requiring the amplitudes of `psi` to map onto those of `psi2`; with a
/// simple spectrum and full support this leaves no freedom.
pub fn hsf_orbit_witness(
    h: &HermitianOp,
    psi: &StateVec,
    h2: &HermitianOp,
    psi2: &StateVec,
    tol: f64,
) -> Result<UnitaryOp> {
    let spec = KindHsfSpec::of(h, psi)?;
    if !hsf_membership(h2, psi2, &spec, tol) {
        return Err(Error::NoWitness(
            "spectra or eigenspace weights differ".into(),
        ));
    }
    let (s1, s2) = (h.eigh(), h2.eigh());
    let (a1, a2) = (amplitudes(&s1, psi), amplitudes(&s2, psi2));
    check_hypotheses(&s1, &a1)?;
    check_hypotheses(&s2, &a2)?;
    let d = h.dim();
    let phases = CVector::from_iterator(
        d,
        a1.iter()
            .zip(a2.iter())
            .map(|(c1, c2)| (c2 / c2.norm()) * (c1.conj() / c1.norm())),
    );
    let u = s2.vectors.matrix() * CMatrix::from_diagonal(&phases) * s1.vectors.matrix().adjoint();
    UnitaryOp::new(u)
}

/// Pairwise inner products `G_ij = <psi_i|psi_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpec {
    pub g: CMatrix,
}

impl GramSpec {
    /// Row-major rows of `[re, im]` pairs.
    pub fn to_json(&self) -> Vec<Vec<[f64; 2]>> {
        self.g
            .row_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect()
    }
}

pub fn gram_matrix(family: &[CVector]) -> GramSpec {
    let n = family.len();
    GramSpec {
        g: CMatrix::from_fn(n, n, |i, j| family[i].dotc(&family[j])),
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass. `keep[i]`
/// decides whether vector `i` contributes; `None` lets the routine decide.
fn orthonormalize(vectors: &[CVector], keep: Option<&[bool]>) -> (Vec<CVector>, Vec<bool>) {
    let mut basis: Vec<CVector> = Vec::new();
    let mut kept = Vec::with_capacity(vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        let mut r = v.clone();
        for _ in 0..2 {
            for e in &basis {
                let c = e.dotc(&r);
                r -= e * c;
            }
        }
        let norm = r.norm();
        let take = match keep {
            Some(k) => k[i],
            None => norm > 1e-8 * v.norm().max(1e-300) && norm > 1e-12,
        };
        if take {
            basis.push(r.unscale(norm));
        }
        kept.push(take);
    }
    (basis, kept)
}

/// Extends an orthonormal set to a basis with canonical basis vectors, taken
/// in order and kept when they add a direction.
fn complete(mut basis: Vec<CVector>, d: usize) -> CMatrix {
    for j in 0..d {
        if basis.len() == d {
            break;
        }
        let mut r = CVector::from_element(d, ZERO);
        r[j] = ONE;
        for _ in 0..2 {
            for e in &basis {
                let c = e.dotc(&r);
                r -= e * c;
            }
        }
        let norm = r.norm();
        if norm > 1e-6 {
            basis.push(r.unscale(norm));
        }
    }
    CMatrix::from_columns(&basis)
}

/// A unitary sending `family1[i]` to `family2[i]` for every `i`.
pub fn gram_orbit_witness(family1: &[CVector], family2: &[CVector], tol: f64) -> Result<UnitaryOp> {
    if family1.len() != family2.len() {
        return Err(Error::NoWitness(format!(
            "families have {} and {} members",
            family1.len(),
            family2.len()
        )));
    }
    let d = match family1.first() {
        Some(v) => v.len(),
        None => return Err(Error::InvalidParameter("empty family".into())),
    };
    if family1.iter().chain(family2).any(|v| v.len() != d) {
        return Err(Error::InvalidParameter(
            "vectors of different dimensions".into(),
        ));
    }
    let (g1, g2) = (gram_matrix(family1), gram_matrix(family2));
    let dev = max_abs_diff(&g1.g, &g2.g);
    if dev >= tol {
        return Err(Error::NoWitness(format!(
            "Gram matrices differ by {dev:.3e}"
        )));
    }
    let (b1, kept) = orthonormalize(family1, None);
    let (b2, _) = orthonormalize(family2, Some(&kept));
    let e1 = complete(b1, d);
    let e2 = complete(b2, d);
    UnitaryOp::new(e2 * e1.adjoint())
}

/// How a probe polynomial was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeProvenance {
    /// Lagrange polynomial equal to 1 at eigenvalue `target`, 0 at the others.
    Interpolation { target: usize },
    /// Rational coefficients drawn from the named stream.
    Random { seed: u64, stream: u64 },
}

/// Polynomials `R` (monomial coefficients, constant term first) whose probe
/// states `R(H) psi` span the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub polys: Vec<Vec<[f64; 2]>>,
    pub provenance: Vec<ProbeProvenance>,
}

fn poly_mul_linear(p: &[C64], root: f64) -> Vec<C64> {
    // p(x) * (x - root)
    let mut out = vec![ZERO; p.len() + 1];
    for (i, &c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c * root;
    }
    out
}

fn horner(coeffs: &[C64], x: f64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
}

fn lagrange(values: &[f64], k: usize) -> Vec<C64> {
    let mut p = vec![ONE];
    let mut denom = 1.0;
    for (j, &w) in values.iter().enumerate() {
        if j != k {
            p = poly_mul_linear(&p, w);
            denom *= values[k] - w;
        }
    }
    p.into_iter().map(|c| c / denom).collect()
}

fn to_pairs(p: &[C64]) -> Vec<[f64; 2]> {
    p.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(p: &[[f64; 2]]) -> Vec<C64> {
    p.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

/// `R(H) psi` through the eigendecomposition.
fn apply_poly(spec: &Spectrum, amps: &CVector, poly: &[C64]) -> CVector {
    let scaled = CVector::from_iterator(
        amps.len(),
        spec.values
            .iter()
            .zip(amps.iter())
            .map(|(&w, a)| horner(poly, w) * a),
    );
    spec.vectors.matrix() * scaled
}

/// The `D` interpolation polynomials followed by `count - D` random ones with
/// coefficients `(a + i b) / 1000`, `a, b` integers in `[-1000, 1000]`.
pub fn build_probe_set(
    h: &HermitianOp,
    psi: &StateVec,
    count: usize,
    stream: &Stream,
) -> Result<ProbeSet> {
    check_dim(h, psi)?;
    let d = h.dim();
    if count < d {
        return Err(Error::InvalidParameter(format!(
            "probe count {count} below dimension {d}"
        )));
    }
    let spec = h.eigh();
    let amps = amplitudes(&spec, psi);
    check_hypotheses(&spec, &amps)?;
    let mut polys = Vec::with_capacity(count);
    let mut provenance = Vec::with_capacity(count);
    for k in 0..d {
        polys.push(to_pairs(&lagrange(&spec.values, k)));
        provenance.push(ProbeProvenance::Interpolation { target: k });
    }
    for r in 0..count - d {
        let s = stream.child(r as u64);
        let mut rng = s.rng();
        let p: Vec<[f64; 2]> = (0..d)
            .map(|_| {
                let a: i32 = rng.random_range(-1000..=1000);
                let b: i32 = rng.random_range(-1000..=1000);
                [a as f64 / 1000.0, b as f64 / 1000.0]
            })
            .collect();
        polys.push(p);
        provenance.push(ProbeProvenance::Random {
            seed: s.seed,
            stream: s.id,
        });
    }
    let states: Vec<CVector> = polys
        .iter()
        .map(|p| apply_poly(&spec, &amps, &from_pairs(p)))
        .collect();
    let rank = probe_rank(&states);
    if rank < d {
        return Err(Error::InvalidParameter(format!(
            "probe states span only {rank} of {d} dimensions"
        )));
    }
    Ok(ProbeSet { polys, provenance })
}

fn probe_rank(states: &[CVector]) -> usize {
    let m = CMatrix::from_columns(states);
    let (sv, _) = svd_left(&m);
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > 1e-10 * top).count()
}

/// Site entropies of every normalized probe state, in the structure `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub probes: Vec<ProbeProvenance>,
    /// `(probe, site, entropy)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub skipped: Vec<usize>,
}

pub fn fingerprint(
    h: &HermitianOp,
    psi: &StateVec,
    t: &Tps,
    probes: &ProbeSet,
) -> Result<Fingerprint> {
    check_dim(h, psi)?;
    let spec = h.eigh();
    let amps = amplitudes(&spec, psi);
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (i, p) in probes.polys.iter().enumerate() {
        let v = apply_poly(&spec, &amps, &from_pairs(p));
        let norm = v.norm();
        if norm < SKIP_NORM {
            skipped.push(i);
            continue;
        }
        let state = StateVec::new(v.unscale(norm))?;
        let ent = site_entropies(&t.pull_state(&state)?, t.dims())?;
        entries.extend(ent.into_iter().enumerate().map(|(site, e)| (i, site, e)));
    }
    Ok(Fingerprint {
        probes: probes.provenance.clone(),
        entries,
        skipped,
    })
}

pub fn fingerprints_equal(f1: &Fingerprint, f2: &Fingerprint, tol: f64) -> Result<bool> {
    if f1.skipped != f2.skipped {
        return Err(Error::Incomparable(format!(
            "skipped probes {:?} vs {:?}",
            f1.skipped, f2.skipped
        )));
    }
    if f1.entries.len() != f2.entries.len()
        || f1
            .entries
            .iter()
            .zip(&f2.entries)
            .any(|(a, b)| (a.0, a.1) != (b.0, b.1))
    {
        return Err(Error::Incomparable("different probe or site layout".into()));
    }
    Ok(f1
        .entries
        .iter()
        .zip(&f2.entries)
        .all(|(a, b)| (a.2 - b.2).abs() <= tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Determination {
    SameTps,
    DifferentTps,
    /// The fingerprint and the product-operator test disagree.
    Inconsistent,
}

/// Cross-checks the fingerprint comparison against the direct equality test.
pub fn determines_check(
    h: &HermitianOp,
    psi: &StateVec,
    t1: &Tps,
    t2: &Tps,
    probes: &ProbeSet,
    tol: f64,
) -> Result<Determination> {
    let f1 = fingerprint(h, psi, t1, probes)?;
    let f2 = fingerprint(h, psi, t2, probes)?;
    let by_fingerprint = fingerprints_equal(&f1, &f2, tol)?;
    let by_operator = tps::equal(t1, t2)?;
    Ok(match (by_fingerprint, by_operator) {
        (true, true) => Determination::SameTps,
        (false, false) => Determination::DifferentTps,
        _ => Determination::Inconsistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{expm_i, haar_state, haar_unitary, random_hermitian, Dims, I};
    use crate::tps::random_tps;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn sz() -> HermitianOp {
        HermitianOp::diagonal(&[1.0, -1.0])
    }
    fn sx() -> HermitianOp {
        HermitianOp::new(CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])).unwrap()
    }
    fn plus() -> StateVec {
        StateVec::new(CVector::from_vec(vec![C64::from(FRAC_1_SQRT_2); 2])).unwrap()
    }

    #[test]
    fn grouping() {
        let g = group_eigenvalues(&[-1.0, -1.0 + 1e-12, 0.5, 2.0, 2.0], GROUPING_TOL);
        assert_eq!(g, vec![0..2, 2..3, 3..5]);
        assert!(group_eigenvalues(&[], 1e-9).is_empty());
    }

    #[test]
    fn membership_basics() {
        let spec = KindHsfSpec::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(hsf_membership(&sz(), &plus(), &spec, 1e-9));
        assert!(!hsf_membership(&sz(), &StateVec::basis(2, 0), &spec, 1e-9));
        assert!(KindHsfSpec::new(vec![1.0, -1.0], vec![0.5, 0.5]).is_err());
        assert!(KindHsfSpec::new(vec![-1.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(KindHsfSpec::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn membership_is_orbit_invariant() {
        let s = Stream::new(21);
        for i in 0..10 {
            let si = s.child(i);
            let h = random_hermitian(4, &si.child(0));
            let psi = haar_state(4, &si.child(1));
            let u = haar_unitary(4, &si.child(2));
            let spec = KindHsfSpec::of(&h, &psi).unwrap();
            assert!(hsf_membership(
                &h.conjugate_by(&u),
                &u.apply(&psi),
                &spec,
                1e-9
            ));
            let other = haar_state(4, &si.child(3));
            assert!(!hsf_membership(&h.conjugate_by(&u), &other, &spec, 1e-9));
        }
    }

    #[test]
    fn witness_construct_then_recover() {
        let s = Stream::new(22);
        for i in 0..10 {
            let si = s.child(i);
            let h = random_hermitian(6, &si.child(0));
            let psi = haar_state(6, &si.child(1));
            let v = haar_unitary(6, &si.child(2));
            let (h2, psi2) = (h.conjugate_by(&v), v.apply(&psi));
            let u = hsf_orbit_witness(&h, &psi, &h2, &psi2, 1e-9).unwrap();
            assert!(max_abs_diff(h.conjugate_by(&u).matrix(), h2.matrix()) < 1e-8);
            assert!((u.apply(&psi).amplitudes() - psi2.amplitudes()).norm() < 1e-8);
        }
    }

    #[test]
    fn witness_of_self_is_trivial() {
        let h = random_hermitian(5, &Stream::new(1));
        let psi = haar_state(5, &Stream::new(2));
        let u = hsf_orbit_witness(&h, &psi, &h, &psi, 1e-9).unwrap();
        let phase = u.matrix()[(0, 0)];
        assert!(max_abs_diff(u.matrix(), &(CMatrix::identity(5, 5) * phase)) < 1e-8);
    }

    #[test]
    fn witness_sz_to_sx() {
        let u = hsf_orbit_witness(&sz(), &plus(), &sx(), &StateVec::basis(2, 0), 1e-9).unwrap();
        assert!(max_abs_diff(sz().conjugate_by(&u).matrix(), sx().matrix()) < 1e-12);
        assert!(
            (u.apply(&plus()).amplitudes() - StateVec::basis(2, 0).amplitudes()).norm() < 1e-12
        );
    }

    #[test]
    fn witness_refusals() {
        let psi = haar_state(3, &Stream::new(3));
        let id = HermitianOp::identity(3);
        assert!(matches!(
            hsf_orbit_witness(&id, &psi, &id, &psi, 1e-9),
            Err(Error::Hypothesis {
                hypothesis: Hypothesis::NonDegenerate,
                ..
            })
        ));
        let h = HermitianOp::diagonal(&[0.0, 1.0, 2.0]);
        let e = StateVec::basis(3, 1);
        assert!(matches!(
            hsf_orbit_witness(&h, &e, &h, &e, 1e-9),
            Err(Error::Hypothesis {
                hypothesis: Hypothesis::NonZeroProjections,
                ..
            })
        ));
        let h2 = HermitianOp::diagonal(&[0.0, 1.0, 3.0]);
        assert!(matches!(
            hsf_orbit_witness(&h, &psi, &h2, &psi, 1e-9),
            Err(Error::NoWitness(_))
        ));
    }

    #[test]
    fn gram_examples() {
        let basis: Vec<CVector> = (0..3)
            .map(|k| StateVec::basis(3, k).into_vector())
            .collect();
        assert!(max_abs_diff(&gram_matrix(&basis).g, &CMatrix::identity(3, 3)) < 1e-15);
        let v = CVector::from_vec(vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0)]);
        let g = gram_matrix(&[v.clone(), v.clone()]).g;
        assert!(max_abs_diff(&g, &CMatrix::from_element(2, 2, C64::from(6.0))) < 1e-14);
        let fam: Vec<CVector> = (0..5)
            .map(|k| haar_state(4, &Stream::new(k)).into_vector() * C64::from(k as f64 + 0.5))
            .collect();
        let spec = HermitianOp::new(gram_matrix(&fam).g).unwrap().eigh();
        assert!(spec.values[0] >= -1e-12);
    }

    #[test]
    fn gram_witness_recovers_haar_image() {
        let s = Stream::new(23);
        for (i, n) in [1usize, 2, 4, 6, 8].into_iter().enumerate() {
            let si = s.child(i as u64);
            let mut fam: Vec<CVector> = (0..n)
                .map(|k| haar_state(5, &si.child(k as u64)).into_vector() * C64::new(0.3, 1.1))
                .collect();
            if n >= 4 {
                // a dependent member
                fam[3] = &fam[0] * C64::new(0.5, -0.2) + &fam[1] * I;
            }
            let v = haar_unitary(5, &si.child(99));
            let image: Vec<CVector> = fam.iter().map(|f| v.matrix() * f).collect();
            let u = gram_orbit_witness(&fam, &image, 1e-9).unwrap();
            for (f, g) in fam.iter().zip(&image) {
                assert!((u.matrix() * f - g).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn gram_mismatch_refused() {
        let a = vec![
            StateVec::basis(2, 0).into_vector(),
            StateVec::basis(2, 1).into_vector(),
        ];
        let b = vec![
            StateVec::basis(2, 0).into_vector(),
            StateVec::basis(2, 0).into_vector(),
        ];
        assert!(matches!(
            gram_orbit_witness(&a, &b, 1e-9),
            Err(Error::NoWitness(_))
        ));
    }

    #[test]
    fn lagrange_interpolates() {
        let vals = [-1.3, 0.2, 0.9, 2.5];
        for k in 0..4 {
            let p = lagrange(&vals, k);
            for (j, &w) in vals.iter().enumerate() {
                let expect = if j == k { ONE } else { ZERO };
                assert!((horner(&p, w) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn probe_set_hypotheses() {
        let psi = haar_state(4, &Stream::new(4));
        let err = build_probe_set(&HermitianOp::identity(4), &psi, 8, &Stream::new(0)).unwrap_err();
        assert!(err.to_string().contains("non-degenerate"), "{err}");
        let h = HermitianOp::diagonal(&[0.0, 1.0, 2.5, 4.0]);
        let err = build_probe_set(&h, &StateVec::basis(4, 2), 8, &Stream::new(0)).unwrap_err();
        assert!(err.to_string().contains("non-zero projections"), "{err}");
    }

    #[test]
    fn probe_set_spans() {
        let h = HermitianOp::diagonal(&[0.0, 1.0, 2.5, 4.0]);
        let psi = haar_state(4, &Stream::new(5));
        let set = build_probe_set(&h, &psi, 8, &Stream::new(6)).unwrap();
        assert_eq!(set.polys.len(), 8);
        let spec = h.eigh();
        let amps = amplitudes(&spec, &psi);
        let states: Vec<CVector> = set
            .polys
            .iter()
            .map(|p| apply_poly(&spec, &amps, &from_pairs(p)))
            .collect();
        assert_eq!(probe_rank(&states), 4);
        assert_eq!(probe_rank(&states[..4]), 4);
        for p in &set.polys[4..] {
            for c in p {
                assert_eq!((c[0] * 1000.0).round(), c[0] * 1000.0);
            }
        }
    }

    fn two_qubit_setup(seed: u64) -> (HermitianOp, StateVec, Tps, ProbeSet) {
        let s = Stream::new(seed);
        let dims = Dims::qubits(2).unwrap();
        let h = random_hermitian(4, &s.child(0));
        let psi = haar_state(4, &s.child(1));
        let t = random_tps(&dims, &s.child(2));
        let probes = build_probe_set(&h, &psi, 8, &s.child(3)).unwrap();
        (h, psi, t, probes)
    }

    #[test]
    fn fingerprint_bell_and_product() {
        // H diagonal in a basis containing a Bell state; the Lagrange probe
        // for that eigenvalue yields the Bell state itself
        let s = FRAC_1_SQRT_2;
        let bell = CMatrix::from_row_slice(
            4,
            4,
            &[
                C64::from(s),
                C64::from(s),
                ZERO,
                ZERO,
                ZERO,
                ZERO,
                ONE,
                ZERO,
                ZERO,
                ZERO,
                ZERO,
                ONE,
                C64::from(s),
                C64::from(-s),
                ZERO,
                ZERO,
            ],
        );
        let h = HermitianOp::diagonal(&[0.0, 1.0, 2.0, 3.0])
            .conjugate_by(&UnitaryOp::new(bell).unwrap());
        let psi =
            StateVec::normalize(CVector::from_vec(vec![ONE, ONE, ONE, C64::from(1.3)])).unwrap();
        let probes = build_probe_set(&h, &psi, 4, &Stream::new(0)).unwrap();
        let f = fingerprint(
            &h,
            &psi,
            &Tps::canonical(&Dims::qubits(2).unwrap()),
            &probes,
        )
        .unwrap();
        let at = |p: usize, site: usize| {
            f.entries
                .iter()
                .find(|e| e.0 == p && e.1 == site)
                .unwrap()
                .2
        };
        // eigenvalue 0 <-> (|00> + |11>)/sqrt 2, eigenvalue 2 <-> |01>
        assert!((at(0, 0) - LN_2).abs() < 1e-10 && (at(0, 1) - LN_2).abs() < 1e-10);
        assert!(at(2, 0) < 1e-10 && at(2, 1) < 1e-10);
    }

    #[test]
    fn fingerprint_joint_invariance() {
        let (h, psi, t, probes) = two_qubit_setup(31);
        let u = haar_unitary(4, &Stream::new(32));
        let f1 = fingerprint(&h, &psi, &t, &probes).unwrap();
        let f2 = fingerprint(
            &h.conjugate_by(&u),
            &u.apply(&psi),
            &t.act(&u).unwrap(),
            &probes,
        )
        .unwrap();
        assert!(fingerprints_equal(&f1, &f2, 1e-9).unwrap());
        assert!(fingerprints_equal(&f1, &f1, 0.0).unwrap());
    }

    #[test]
    fn determination_local_vs_evolved() {
        let (h, psi, t, probes) = two_qubit_setup(33);
        let l = t.random_local_unitary(&Stream::new(34));
        assert_eq!(
            determines_check(&h, &psi, &t, &t.act(&l).unwrap(), &probes, FINGERPRINT_TOL).unwrap(),
            Determination::SameTps
        );
        let e = expm_i(&h, 0.7);
        assert_eq!(
            determines_check(&h, &psi, &t, &t.act(&e).unwrap(), &probes, FINGERPRINT_TOL).unwrap(),
            Determination::DifferentTps
        );
        let f1 = fingerprint(&h, &psi, &t, &probes).unwrap();
        let f2 = fingerprint(&h, &psi, &t.act(&e).unwrap(), &probes).unwrap();
        let gap = f1
            .entries
            .iter()
            .zip(&f2.entries)
            .fold(0.0, |a: f64, (x, y)| a.max((x.2 - y.2).abs()));
        assert!(gap > 1e-3);
    }

    #[test]
    fn incomparable_layouts() {
        let (h, psi, t, probes) = two_qubit_setup(35);
        let f = fingerprint(&h, &psi, &t, &probes).unwrap();
        let mut g = f.clone();
        g.skipped.push(9);
        assert!(matches!(
            fingerprints_equal(&f, &g, 1e-9),
            Err(Error::Incomparable(_))
        ));
        let mut g = f.clone();
        g.entries.pop();
        assert!(matches!(
            fingerprints_equal(&f, &g, 1e-9),
            Err(Error::Incomparable(_))
        ));
    }

    #[test]
    fn fingerprint_json_shape() {
        let (h, psi, t, probes) = two_qubit_setup(36);
        let f = fingerprint(&h, &psi, &t, &probes).unwrap();
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v["probes"][0]["kind"], "interpolation");
        assert_eq!(v["entries"][0].as_array().unwrap().len(), 3);
        assert!(v["skipped"].as_array().unwrap().is_empty());
    }
}
