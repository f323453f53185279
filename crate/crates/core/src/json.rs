//! JSON encoding for complex matrices:
//! `{"rows": R, "cols": C, "data": [[re, im], ...]}` in row-major order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{ComplexMatrix, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.rows == 0 || self.cols == 0 || self.data.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix JSON declares {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(ComplexMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|[re, im]| C64::new(*re, *im)),
        ))
    }
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let encoded: MatrixJson = serde_json::from_str(text)?;
    encoded.to_matrix()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Result<String> {
    Ok(serde_json::to_string(&MatrixJson::from(m))?)
}
