//! K-locality of a Hamiltonian relative to a tensor product structure, and the
//! two dynamical checks tied to it: profiles are covariant under joint
//! conjugation, and a Hamiltonian keeps every product state product for all
//! times exactly when it is 1-local.

use serde::{Deserialize, Serialize};

use crate::basis::{decompose, weight_profile, WeightProfile};
use crate::error::{Error, Result};
use crate::hilbert::{expm_i_spectrum, max_site_entropy, HermitianOp, StateVec, UnitaryOp};
use crate::rng::Stream;
use crate::tps::Tps;

/// Default relative threshold on the weight above `K`.
pub const LOCALITY_TOL: f64 = 1e-9;
/// A probe counts as product when every site entropy is below this.
pub const PRODUCT_PROBE_TOL: f64 = 1e-9;
/// Entropy above which an evolved probe witnesses non-1-locality.
pub const WITNESS_ENTROPY: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub min_k: usize,
    pub tol: f64,
    #[serde(rename = "weights")]
    pub profile: WeightProfile,
}

pub fn profile(h: &HermitianOp, t: &Tps) -> Result<WeightProfile> {
    Ok(weight_profile(&decompose(h, t)?))
}

fn within(profile: &WeightProfile, k: usize, tol: f64, norm_sqr: f64) -> bool {
    profile.tail(k) <= tol * norm_sqr
}

pub fn is_k_local(h: &HermitianOp, t: &Tps, k: usize, tol: f64) -> Result<bool> {
    let n = t.dims().n();
    if k < 1 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let p = profile(h, t)?;
    Ok(within(&p, k, tol, h.hs_norm_sqr()))
}

pub fn locality_report(h: &HermitianOp, t: &Tps, tol: f64) -> Result<LocalityReport> {
    let p = profile(h, t)?;
    let norm = h.hs_norm_sqr();
    let n = t.dims().n();
    let min_k = (0..=n).find(|&k| within(&p, k, tol, norm)).unwrap_or(n);
    Ok(LocalityReport {
        min_k,
        tol,
        profile: p,
    })
}

/// Compares the profile of `(H, T)` with that of `(U H U', U . T)`.
/// Entries may differ by at most `tol * max(1, |H|^2)`.
pub fn conjugation_covariance_check(
    h: &HermitianOp,
    t: &Tps,
    u: &UnitaryOp,
    tol: f64,
) -> Result<bool> {
    let before = profile(h, t)?;
    let after = profile(&h.conjugate_by(u), &t.act(u)?)?;
    Ok(before.max_abs_diff(&after) <= tol * h.hs_norm_sqr().max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum EvolutionVerdict {
    OneLocalConsistent {
        max_entropy: f64,
    },
    Witness {
        t_index: usize,
        t: f64,
        probe_index: usize,
        entropy: f64,
    },
}

impl EvolutionVerdict {
    pub fn is_witness(&self) -> bool {
        matches!(self, Self::Witness { .. })
    }
}

pub(crate) fn check_product_probes(t: &Tps, probes: &[StateVec]) -> Result<()> {
    for (i, p) in probes.iter().enumerate() {
        let entropy = max_site_entropy(&t.pull_state(p)?, t.dims())?;
        if entropy >= PRODUCT_PROBE_TOL {
            return Err(Error::NotProductProbe { probe: i, entropy });
        }
    }
    Ok(())
}

/// Evolves every probe over the grid and looks for entanglement between the
/// factors of `t`. Scans `(t_index, probe_index)` in lexicographic order and
/// returns the first witness.
pub fn one_local_evolution_check(
    h: &HermitianOp,
    t: &Tps,
    t_grid: &[f64],
    probes: &[StateVec],
) -> Result<EvolutionVerdict> {
    check_product_probes(t, probes)?;
    let spec = h.eigh();
    let mut max_entropy = 0.0f64;
    for (ti, &time) in t_grid.iter().enumerate() {
        let u = t.iso().compose(&expm_i_spectrum(&spec, time));
        for (pi, p) in probes.iter().enumerate() {
            let entropy = max_site_entropy(&u.apply(p), t.dims())?;
            if entropy > WITNESS_ENTROPY {
                return Ok(EvolutionVerdict::Witness {
                    t_index: ti,
                    t: time,
                    probe_index: pi,
                    entropy,
                });
            }
            max_entropy = max_entropy.max(entropy);
        }
    }
    Ok(EvolutionVerdict::OneLocalConsistent { max_entropy })
}

/// `points` uniform times on `[0, 2 pi / r]`, `r` the spectral radius of `h`
/// (or `[0, 2 pi]` when `h = 0`).
pub fn default_time_grid(h: &HermitianOp, points: usize) -> Vec<f64> {
    let r = h.spectral_radius();
    let end = std::f64::consts::TAU / if r > 0.0 { r } else { 1.0 };
    uniform_grid(end, points)
}

/// `points` uniform times on `[0, end]`, endpoints included.
pub fn uniform_grid(end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|j| end * j as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Random product states of `t`.
pub fn random_product_probes(t: &Tps, count: usize, stream: &Stream) -> Vec<StateVec> {
    (0..count)
        .map(|i| {
            let s = stream.child(i as u64);
            let factors: Vec<StateVec> = t
                .dims()
                .factors()
                .iter()
                .enumerate()
                .map(|(k, &d)| crate::hilbert::haar_state(d, &s.child(k as u64)))
                .collect();
            t.product_state(&factors).expect("factors sized from dims")
        })
        .collect()
}
