//! JSON state and chain-spec files.
//!
//! State files hold `{"dims": [dA, dB], "matrix": [[re, im], ...]}` with the
//! `(dA·dB)²` entries in row-major order.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::{ComplexMatrix, DensityMatrix};
use crate::models::XyzChainSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let (da, db) = rho.dims();
        Self { dims: [da, db], matrix: rho.matrix().as_slice().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let [da, db] = self.dims;
        let n = da.checked_mul(db).ok_or_else(|| Error::Format("dims overflow".into()))?;
        if n == 0 {
            return Err(Error::Format("dims must be positive".into()));
        }
        if self.matrix.len() != n * n {
            return Err(Error::Format(format!("{} entries for a {n}x{n} matrix", self.matrix.len())));
        }
        let data = self.matrix.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        DensityMatrix::new(ComplexMatrix::from_vec(n, n, data)?, (da, db))
    }
}

pub fn state_from_json(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Format(format!("state file: {e}")))?;
    file.to_density()
}

pub fn state_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&StateFile::from_density(rho)).expect("state file serializes")
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    state_from_json(&fs::read_to_string(path)?)
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    fs::write(path, state_to_json(rho))?;
    Ok(())
}

pub fn chain_spec_from_json(text: &str) -> Result<XyzChainSpec> {
    let spec: XyzChainSpec = serde_json::from_str(text).map_err(|e| Error::Format(format!("chain spec: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

pub fn read_chain_spec(path: &Path) -> Result<XyzChainSpec> {
    chain_spec_from_json(&fs::read_to_string(path)?)
}
