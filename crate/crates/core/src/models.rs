//! Reference Hamiltonians: the open transverse-field Ising chain, the
//! structure in which its Jordan-Wigner dual is local, and random K-local
//! instances with a known scrambler.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::ProductBasis;
use crate::error::{Error, Result};
use crate::hilbert::{
    haar_unitary, kron_all, site_entropies, CMatrix, CVector, Dims, HermitianOp, StateVec,
    UnitaryOp, C64, I, ONE, ZERO,
};
use crate::rng::Stream;
use crate::tps::Tps;

pub fn pauli(c: char) -> Result<CMatrix> {
    let e = match c {
        'I' => [ONE, ZERO, ZERO, ONE],
        'X' => [ZERO, ONE, ONE, ZERO],
        'Y' => [ZERO, -I, I, ZERO],
        'Z' => [ONE, ZERO, ZERO, -ONE],
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown Pauli letter {other:?}"
            )))
        }
    };
    Ok(CMatrix::from_row_slice(2, 2, &e))
}

/// Tensor product of Pauli letters, e.g. `"XZI"`; site 0 first.
pub fn pauli_string(s: &str) -> Result<CMatrix> {
    let ops = s.chars().map(pauli).collect::<Result<Vec<_>>>()?;
    Ok(kron_all(&ops))
}

/// `op` on qubit `site` of an `n`-qubit chain.
fn on_site(n: usize, site: usize, op: char) -> CMatrix {
    let s: String = (0..n).map(|k| if k == site { op } else { 'I' }).collect();
    pauli_string(&s).expect("fixed alphabet")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub n: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub h: f64,
}

/// `J sum_i Z_i Z_{i+1} + h sum_i X_i` on an open chain.
pub fn ising_chain(p: &IsingParams) -> Result<HermitianOp> {
    if p.n < 2 {
        return Err(Error::InvalidParameter(format!("chain length {} < 2", p.n)));
    }
    let n = p.n;
    let d = 1 << n;
    let mut m = CMatrix::zeros(d, d);
    for i in 0..n - 1 {
        m += on_site(n, i, 'Z') * on_site(n, i + 1, 'Z') * C64::from(p.j);
    }
    for i in 0..n {
        m += on_site(n, i, 'X') * C64::from(p.h);
    }
    HermitianOp::new(m)
}

/// Disorder string `mu_z(i) = X_0 X_1 ... X_i`.
pub fn mu_z(n: usize, i: usize) -> CMatrix {
    let s: String = (0..n).map(|k| if k <= i { 'X' } else { 'I' }).collect();
    pauli_string(&s).expect("fixed alphabet")
}

/// `mu_x(i) = Z_i Z_{i+1}` for `i < n - 1`; the last one is `Z_{n-1}` alone so
/// that it anticommutes with `mu_z(n-1)` and commutes with every other string.
pub fn mu_x(n: usize, i: usize) -> CMatrix {
    if i + 1 < n {
        on_site(n, i, 'Z') * on_site(n, i + 1, 'Z')
    } else {
        on_site(n, i, 'Z')
    }
}

/// The structure in which the `mu` operators are the single-site Paulis:
/// conjugation by its representative sends `mu_z(i)` to `Z_i` and `mu_x(i)`
/// to `X_i`.
pub fn jw_dual_tps(n: usize) -> Result<Tps> {
    let dims = Dims::qubits(n)?;
    let d = dims.total();
    let mut proj = CMatrix::identity(d, d);
    for i in 0..n {
        proj *= (CMatrix::identity(d, d) + mu_z(n, i)).unscale(2.0);
    }
    // lexicographically first basis vector with nonzero projection
    let col = (0..d)
        .map(|j| proj.column(j).into_owned())
        .find(|c| c.norm() > 1e-6)
        .expect("the mu_z strings have a joint +1 eigenvector");
    let lead = col
        .iter()
        .find(|z| z.norm() > 1e-12)
        .copied()
        .unwrap_or(ONE);
    let phi0: CVector = col.unscale(col.norm()) * (lead.conj() / lead.norm());
    let mut inv = CMatrix::zeros(d, d);
    for b in 0..d {
        let mut v = phi0.clone();
        for i in 0..n {
            if (b >> (n - 1 - i)) & 1 == 1 {
                v = mu_x(n, i) * v;
            }
        }
        inv.set_column(b, &v);
    }
    Tps::new(dims, UnitaryOp::new(inv.adjoint())?)
}

/// Hamiltonian with standard-normal coefficients on every Gell-Mann product
/// term of weight `1..=k` and nothing else.
pub fn random_klocal(dims: &Dims, k: usize, stream: &Stream) -> Result<HermitianOp> {
    if k < 1 || k > dims.n() {
        return Err(Error::KOutOfRange { k, n: dims.n() });
    }
    let basis = ProductBasis::gell_mann(dims);
    let mut rng = stream.rng();
    let coeffs: Vec<C64> = basis
        .weights()
        .iter()
        .map(|&w| {
            let x: f64 = rng.sample(StandardNormal);
            if (1..=k).contains(&w) {
                C64::from(x)
            } else {
                ZERO
            }
        })
        .collect();
    Ok(HermitianOp::symmetrize(&basis.synthesize(&coeffs)))
}

/// `(V H V', V)` with `H` from [`random_klocal`] and `V` Haar.
pub fn scrambled_klocal(
    dims: &Dims,
    k: usize,
    stream: &Stream,
) -> Result<(HermitianOp, UnitaryOp)> {
    let h = random_klocal(dims, k, &stream.child(0))?;
    let v = haar_unitary(dims.total(), &stream.child(1));
    Ok((h.conjugate_by(&v), v))
}

pub fn ground_state(h: &HermitianOp) -> StateVec {
    let spec = h.eigh();
    StateVec::normalize(spec.eigenvector(0)).expect("eigenvectors have unit norm")
}

/// Sorted single-site entropies of the ground state in two structures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateDiscriminator {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// Largest entrywise difference of the sorted lists.
    pub value: f64,
}

/// Unitary-invariant evidence that two structures are inequivalent with
/// respect to `h`: the multiset of site entropies of the ground state.
pub fn ground_state_discriminator(
    h: &HermitianOp,
    t1: &Tps,
    t2: &Tps,
) -> Result<GroundStateDiscriminator> {
    let g = ground_state(h);
    let sorted = |t: &Tps| -> Result<Vec<f64>> {
        let mut e = site_entropies(&t.pull_state(&g)?, t.dims())?;
        e.sort_by(f64::total_cmp);
        Ok(e)
    };
    let first = sorted(t1)?;
    let second = sorted(t2)?;
    let value = first
        .iter()
        .zip(&second)
        .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()));
    Ok(GroundStateDiscriminator {
        first,
        second,
        value,
    })
}
