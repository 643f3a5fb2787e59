//! Experiment configuration: JSON objects naming where every Hamiltonian,
//! structure and state comes from. All randomness is drawn from streams
//! derived from the run seed, one labelled child per role.

use std::fs;
use std::path::{Path, PathBuf};

use mereokit::hilbert::{expm_i, haar_state, haar_unitary, random_hermitian, CVector, C64};
use mereokit::io::{pairs_to_vector, MatrixFile, VectorFile};
use mereokit::models::{ising_chain, jw_dual_tps, pauli_string, random_klocal, IsingParams};
use mereokit::search::SearchConfig;
use mereokit::tps::TpsJson;
use mereokit::{Dims, HermitianOp, StateVec, Stream, Tps};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Stream labels. Each source draws from `run.child(label)`.
pub mod role {
    pub const HAMILTONIAN: u64 = 0;
    pub const TPS: u64 = 1;
    pub const STATE: u64 = 2;
    pub const PROBES: u64 = 3;
    pub const SEARCH: u64 = 4;
    pub const PARTNER: u64 = 5;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HamiltonianSource {
    Ising {
        n: usize,
        #[serde(rename = "J")]
        j: f64,
        h: f64,
    },
    /// Real combination of Pauli strings on qubits.
    PauliSum {
        terms: Vec<PauliTerm>,
    },
    Matrix {
        path: PathBuf,
    },
    Identity {
        dims: Dims,
    },
    /// Random dense Hermitian matrix.
    Random {
        dims: Dims,
    },
    RandomKlocal {
        dims: Dims,
        k: usize,
    },
    /// `V H V'` for a Haar `V`.
    Scrambled {
        of: Box<HamiltonianSource>,
    },
}

impl Default for HamiltonianSource {
    fn default() -> Self {
        Self::Ising {
            n: 3,
            j: 1.0,
            h: 1.0,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

impl HamiltonianSource {
    pub fn build(&self, stream: &Stream) -> Result<(HermitianOp, Dims), CliError> {
        Ok(match self {
            Self::Ising { n, j, h } => {
                let op = ising_chain(&IsingParams {
                    n: *n,
                    j: *j,
                    h: *h,
                })?;
                (op, Dims::qubits(*n)?)
            }
            Self::PauliSum { terms } => {
                let n = terms
                    .first()
                    .map(|t| t.ops.len())
                    .ok_or_else(|| CliError::Usage("pauli_sum needs at least one term".into()))?;
                if terms.iter().any(|t| t.ops.len() != n) {
                    return Err(CliError::Usage("Pauli strings of different lengths".into()));
                }
                let d = 1 << n;
                let mut m = mereokit::hilbert::CMatrix::zeros(d, d);
                for t in terms {
                    m += pauli_string(&t.ops)? * C64::from(t.coeff);
                }
                (HermitianOp::new(m)?, Dims::qubits(n)?)
            }
            Self::Matrix { path } => {
                let file = MatrixFile::parse(&read(path)?)
                    .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
                (file.hermitian()?, file.dims)
            }
            Self::Identity { dims } => (HermitianOp::identity(dims.total()), dims.clone()),
            Self::Random { dims } => (random_hermitian(dims.total(), stream), dims.clone()),
            Self::RandomKlocal { dims, k } => (random_klocal(dims, *k, stream)?, dims.clone()),
            Self::Scrambled { of } => {
                let (h, dims) = of.build(&stream.child(0))?;
                let v = haar_unitary(dims.total(), &stream.child(1));
                (h.conjugate_by(&v), dims)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TpsSource {
    #[default]
    Canonical,
    /// Haar-random representative.
    Random,
    /// The structure in which the Jordan-Wigner dual spins are local.
    JwDual,
    /// `exp(-i t H) . base`.
    Evolved {
        t: f64,
        #[serde(default)]
        base: Box<TpsSource>,
    },
    /// A random local unitary of `base` applied to `base`.
    Local {
        #[serde(default)]
        base: Box<TpsSource>,
    },
    File {
        path: PathBuf,
    },
}

impl TpsSource {
    /// Random draws come from `stream`; a nested base draws from the same
    /// stream, so `first` and `second` sources sharing a stream share their
    /// random bases.
    pub fn build(&self, h: &HermitianOp, dims: &Dims, stream: &Stream) -> Result<Tps, CliError> {
        self.build_at(h, dims, stream, 0)
    }

    fn build_at(
        &self,
        h: &HermitianOp,
        dims: &Dims,
        stream: &Stream,
        depth: u64,
    ) -> Result<Tps, CliError> {
        Ok(match self {
            Self::Canonical => Tps::canonical(dims),
            Self::Random => mereokit::tps::random_tps(dims, stream),
            Self::JwDual => {
                if dims.factors().iter().any(|&d| d != 2) {
                    return Err(CliError::Usage("jw_dual needs qubit factors".into()));
                }
                jw_dual_tps(dims.n())?
            }
            Self::Evolved { t, base } => base
                .build_at(h, dims, stream, depth + 1)?
                .act(&expm_i(h, *t))?,
            Self::Local { base } => {
                let b = base.build_at(h, dims, stream, depth + 1)?;
                let l = b.random_local_unitary(&stream.child(1000 + depth));
                b.act(&l)?
            }
            Self::File { path } => {
                let json: TpsJson = serde_json::from_str(&read(path)?)
                    .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
                let t = Tps::from_json(&json)?;
                if t.dims() != dims {
                    return Err(CliError::Usage(format!(
                        "structure file has dims {:?}, Hamiltonian has {:?}",
                        t.dims().factors(),
                        dims.factors()
                    )));
                }
                t
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateSource {
    /// Canonical basis vector of the underlying space.
    Basis {
        index: usize,
    },
    /// Basis vector of the structure's own product basis: `T^-1 |index>`.
    TpsBasis {
        index: usize,
    },
    #[default]
    Haar,
    /// Random product state of the structure.
    RandomProduct,
    /// Eigenvector `k` of H, eigenvalues ascending.
    Eigenvector {
        k: usize,
    },
    Amplitudes {
        values: Vec<[f64; 2]>,
    },
    File {
        path: PathBuf,
    },
}

impl StateSource {
    pub fn build(&self, h: &HermitianOp, t: &Tps, stream: &Stream) -> Result<StateVec, CliError> {
        let d = h.dim();
        let check = |i: usize| {
            if i >= d {
                Err(CliError::Usage(format!(
                    "index {i} out of range for dimension {d}"
                )))
            } else {
                Ok(())
            }
        };
        Ok(match self {
            Self::Basis { index } => {
                check(*index)?;
                StateVec::basis(d, *index)
            }
            Self::TpsBasis { index } => {
                check(*index)?;
                t.iso().adjoint().apply(&StateVec::basis(d, *index))
            }
            Self::Haar => haar_state(d, stream),
            Self::RandomProduct => {
                mereokit::locality::random_product_probes(t, 1, stream).remove(0)
            }
            Self::Eigenvector { k } => {
                check(*k)?;
                StateVec::normalize(h.eigh().eigenvector(*k))?
            }
            Self::Amplitudes { values } => {
                let v: CVector = pairs_to_vector(values);
                StateVec::new(v)?
            }
            Self::File { path } => {
                let file: VectorFile = serde_json::from_str(&read(path)?)
                    .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
                file.state()?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ProfileParams {
    pub hamiltonian: HamiltonianSource,
    pub tps: TpsSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// Grid end; defaults to `2 pi / spectral radius`.
    pub end: Option<f64>,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            end: None,
            points: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbitParams {
    pub hamiltonian: HamiltonianSource,
    pub tps: TpsSource,
    pub probe: StateSource,
    pub site: usize,
    pub grid: GridSpec,
    pub bin: f64,
}

impl Default for OrbitParams {
    fn default() -> Self {
        Self {
            hamiltonian: HamiltonianSource::PauliSum {
                terms: vec![PauliTerm {
                    coeff: 1.0,
                    ops: "XX".into(),
                }],
            },
            tps: TpsSource::Canonical,
            probe: StateSource::TpsBasis { index: 0 },
            site: 1,
            grid: GridSpec {
                end: Some(std::f64::consts::FRAC_PI_2),
                points: 256,
            },
            bin: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FingerprintParams {
    pub hamiltonian: HamiltonianSource,
    pub state: StateSource,
    pub first: TpsSource,
    pub second: TpsSource,
    /// Probe count; defaults to twice the dimension.
    pub probes: Option<usize>,
}

impl Default for FingerprintParams {
    fn default() -> Self {
        Self {
            hamiltonian: HamiltonianSource::Random {
                dims: Dims::qubits(2).expect("valid"),
            },
            state: StateSource::Haar,
            first: TpsSource::Random,
            second: TpsSource::Evolved {
                t: 0.7,
                base: Box::new(TpsSource::Random),
            },
            probes: None,
        }
    }
}

/// Search settings as they appear in a config; the stream comes from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        let d = SearchConfig::default();
        Self {
            k: d.k,
            restarts: d.restarts,
            max_iters: d.max_iters,
            grad_tol: d.grad_tol,
            step_init: d.step_init,
            armijo_c: d.armijo_c,
            backtrack_ratio: d.backtrack_ratio,
        }
    }
}

impl SearchSettings {
    pub fn with_stream(&self, stream: Stream) -> SearchConfig {
        SearchConfig {
            k: self.k,
            restarts: self.restarts,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            step_init: self.step_init,
            armijo_c: self.armijo_c,
            backtrack_ratio: self.backtrack_ratio,
            stream,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    pub hamiltonian: HamiltonianSource,
    pub search: SearchSettings,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            hamiltonian: HamiltonianSource::Scrambled {
                of: Box::new(HamiltonianSource::default()),
            },
            search: SearchSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PairPartner {
    /// `(V H V', V psi)` for a Haar `V`.
    Conjugated,
    Explicit {
        hamiltonian: HamiltonianSource,
        state: StateSource,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FamilySource {
    Explicit {
        vectors: Vec<Vec<[f64; 2]>>,
    },
    /// `count` Haar vectors of dimension `dim`, each scaled by `1 + index`.
    Haar {
        count: usize,
        dim: usize,
    },
}

impl FamilySource {
    pub fn build(&self, stream: &Stream) -> Result<Vec<CVector>, CliError> {
        Ok(match self {
            Self::Explicit { vectors } => vectors.iter().map(|v| pairs_to_vector(v)).collect(),
            Self::Haar { count, dim } => (0..*count)
                .map(|i| {
                    haar_state(*dim, &stream.child(i as u64)).into_vector()
                        * C64::from(1.0 + i as f64)
                })
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FamilyPartner {
    /// `V f_i` for a Haar `V`.
    Conjugated,
    Explicit {
        family: FamilySource,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KindsParams {
    Hsf {
        hamiltonian: HamiltonianSource,
        state: StateSource,
        partner: PairPartner,
    },
    Gram {
        family: FamilySource,
        partner: FamilyPartner,
    },
}

impl Default for KindsParams {
    fn default() -> Self {
        Self::Hsf {
            hamiltonian: HamiltonianSource::Random {
                dims: Dims::qubits(2).expect("valid"),
            },
            state: StateSource::Haar,
            partner: PairPartner::Conjugated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DualscanParams {
    pub dims: Dims,
    pub k: usize,
    /// Number of instances; instance `i` uses child stream `i` of the run seed.
    pub instances: usize,
    pub search: SearchSettings,
}

impl Default for DualscanParams {
    fn default() -> Self {
        Self {
            dims: Dims::qubits(3).expect("valid"),
            k: 2,
            instances: 4,
            search: SearchSettings::default(),
        }
    }
}

/// Everything that determines a run. Written back into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig<P> {
    pub seed: u64,
    pub tol: f64,
    pub format: Format,
    pub params: P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// The on-disk form, where every field is optional.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile<P> {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub params: Option<P>,
}

impl<P> Default for ConfigFile<P> {
    fn default() -> Self {
        Self {
            seed: None,
            tol: None,
            format: None,
            out: None,
            params: None,
        }
    }
}
