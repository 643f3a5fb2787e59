//! Matrix interchange format: a JSON object with a `dims` header and the
//! entries as row-major `[re, im]` pairs.
//!
//! ```json
//! {"dims": [2, 2], "entries": [[1.0, 0.0], [0.0, 0.0], ...]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, CVector, Dims, HermitianOp, StateVec, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dims: Dims,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub dims: Dims,
    pub amplitudes: Vec<[f64; 2]>,
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub fn pairs_to_matrix(pairs: &[[f64; 2]], d: usize) -> Result<CMatrix> {
    if pairs.len() != d * d {
        return Err(Error::Shape {
            expected: d * d,
            found: pairs.len(),
        });
    }
    Ok(CMatrix::from_fn(d, d, |r, c| {
        let [re, im] = pairs[r * d + c];
        C64::new(re, im)
    }))
}

pub fn vector_to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn pairs_to_vector(pairs: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|&[re, im]| C64::new(re, im)))
}

impl MatrixFile {
    pub fn from_matrix(dims: &Dims, m: &CMatrix) -> Self {
        Self {
            dims: dims.clone(),
            entries: matrix_to_pairs(m),
        }
    }

    pub fn matrix(&self) -> Result<CMatrix> {
        pairs_to_matrix(&self.entries, self.dims.total())
    }

    pub fn hermitian(&self) -> Result<HermitianOp> {
        HermitianOp::new(self.matrix()?)
    }

    /// Parses the JSON text; syntax errors carry serde's line/column.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl VectorFile {
    pub fn from_state(dims: &Dims, psi: &StateVec) -> Self {
        Self {
            dims: dims.clone(),
            amplitudes: vector_to_pairs(psi.amplitudes()),
        }
    }

    pub fn state(&self) -> Result<StateVec> {
        let v = pairs_to_vector(&self.amplitudes);
        if v.len() != self.dims.total() {
            return Err(Error::Shape {
                expected: self.dims.total(),
                found: v.len(),
            });
        }
        StateVec::new(v)
    }
}
