//! Symmetries of a Hamiltonian that move a tensor product structure, and the
//! entropy curve along the time-evolved family of structures.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    expm_i_spectrum, max_abs, reduced_state, site_entropies, vn_entropy, Dims, HermitianOp,
    StateVec, UnitaryOp,
};
use crate::locality::check_product_probes;
use crate::tps::{self, Tps};

/// Largest allowed `|[U, H]|_max` for a returned symmetry.
pub const COMMUTATOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryDims {
    pub dims: Dims,
    /// Real dimension of the local-unitary stabilizer of a structure.
    pub stab_tps_dim: usize,
    /// Maximal dimension of a commutative subgroup of that stabilizer.
    pub abelian_bound: usize,
    /// Dimension of the torus of unitaries diagonal in an eigenbasis of H.
    pub hamiltonian_abelian_dim: usize,
    pub inequality: bool,
}

pub fn symmetry_dims(dims: &Dims) -> SymmetryDims {
    let n = dims.n();
    let f = dims.factors();
    let stab = f.iter().map(|d| d * d).sum::<usize>() - n + 1;
    let bound = f.iter().sum::<usize>() - (n - 1);
    let total = dims.total();
    SymmetryDims {
        dims: dims.clone(),
        stab_tps_dim: stab,
        abelian_bound: bound,
        hamiltonian_abelian_dim: total,
        inequality: total > bound,
    }
}

/// Checks `prod d_i > sum d_i - (n - 1)` for every tuple with
/// `2 <= n <= max_n` and `2 <= d_i <= max_d`.
pub fn inequality_sweep(max_n: usize, max_d: usize) -> Result<bool> {
    if max_n < 2 || max_d < 2 {
        return Err(Error::InvalidParameter(format!(
            "sweep bounds must be >= 2, got max_n={max_n}, max_d={max_d}"
        )));
    }
    let mut ok = true;
    for n in 2..=max_n {
        let mut tuple = vec![2usize; n];
        loop {
            let dims = Dims::new(tuple.clone())?;
            ok &= symmetry_dims(&dims).inequality;
            // odometer over 2..=max_d
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if tuple[i] < max_d {
                    tuple[i] += 1;
                    break;
                }
                tuple[i] = 2;
            }
            if tuple.iter().all(|&d| d == 2) {
                break;
            }
        }
    }
    Ok(ok)
}

/// A symmetry `U_t = exp(-i t H)` of `H` that does not fix the structure.
#[derive(Debug, Clone)]
pub struct NonlocalSymmetry {
    pub t_index: usize,
    pub t: f64,
    pub unitary: UnitaryOp,
    /// Largest site entropy reached by an evolved probe, if probes were given.
    pub witness_entropy: Option<f64>,
    pub commutator: f64,
}

/// First grid time whose evolution operator moves `t` out of its class.
/// Probes, when given, must be product in `t`; they supply an entanglement
/// witness alongside the product-operator decision.
pub fn find_nonlocal_symmetry(
    h: &HermitianOp,
    t: &Tps,
    t_grid: &[f64],
    probes: &[StateVec],
) -> Result<Option<NonlocalSymmetry>> {
    check_product_probes(t, probes)?;
    let spec = h.eigh();
    for (ti, &time) in t_grid.iter().enumerate() {
        let u = expm_i_spectrum(&spec, time);
        if tps::equal(&t.act(&u)?, t)? {
            continue;
        }
        let commutator = max_abs(&(u.matrix() * h.matrix() - h.matrix() * u.matrix()));
        assert!(
            commutator < COMMUTATOR_TOL * (1.0 + max_abs(h.matrix())),
            "evolution operator fails to commute with H: {commutator:e}"
        );
        let evolved = t.iso().compose(&u);
        let mut witness = None;
        for p in probes {
            let e = site_entropies(&evolved.apply(p), t.dims())?
                .into_iter()
                .fold(0.0, f64::max);
            witness = Some(witness.map_or(e, |w: f64| w.max(e)));
        }
        return Ok(Some(NonlocalSymmetry {
            t_index: ti,
            t: time,
            unitary: u,
            witness_entropy: witness,
            commutator,
        }));
    }
    Ok(None)
}

/// `points` times `j * end / points`, `j = 0..points`: uniform on `[0, end)`.
pub fn orbit_grid(end: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|j| end * j as f64 / points as f64)
        .collect()
}

/// Entropy of one site along the evolved structures `T exp(-i t H)`.
#[derive(Debug, Clone)]
pub struct OrbitCurve {
    pub t_values: Vec<f64>,
    pub entropies: Vec<f64>,
    pub site: usize,
    pub probe: StateVec,
}

impl OrbitCurve {
    /// `(t, entropy)` rows for tabular export.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t_values
            .iter()
            .copied()
            .zip(self.entropies.iter().copied())
    }

    pub fn peak(&self) -> Option<(usize, f64)> {
        self.entropies
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (i, e)| match best {
                Some((_, b)) if b >= e => best,
                _ => Some((i, e)),
            })
    }
}

pub fn entropy_orbit(
    h: &HermitianOp,
    t: &Tps,
    probe: &StateVec,
    site: usize,
    t_grid: &[f64],
) -> Result<OrbitCurve> {
    t.dims().check_site(site)?;
    check_product_probes(t, std::slice::from_ref(probe))?;
    let spec = h.eigh();
    let entropies = t_grid
        .iter()
        .map(|&time| {
            let u = t.iso().compose(&expm_i_spectrum(&spec, time));
            Ok(vn_entropy(&reduced_state(&u.apply(probe), t.dims(), site)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitCurve {
        t_values: t_grid.to_vec(),
        entropies,
        site,
        probe: probe.clone(),
    })
}

/// Number of distinct values after rounding each entropy to a multiple of `bin`.
pub fn distinct_value_count(curve: &OrbitCurve, bin: f64) -> Result<usize> {
    if !(bin > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bin must be positive, got {bin}"
        )));
    }
    let set: BTreeSet<i64> = curve
        .entropies
        .iter()
        .map(|e| (e / bin).round() as i64)
        .collect();
    Ok(set.len())
}
