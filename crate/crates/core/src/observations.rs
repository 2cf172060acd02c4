//! Observation files for `estimate`.
//!
//! JSON object `{"n": N, "t": T, "re": [...], "im": [...]}` where `re` and
//! `im` hold the `N×T` snapshot matrix flattened row-major (row = sensor).
//! An optional `tau` array carries the true texture draws when the file was
//! produced by the simulator.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::CMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSet {
    pub y: CMatrix<f64>,
    pub tau: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservationFile {
    n: usize,
    t: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<Vec<f64>>,
}

impl ObservationSet {
    pub fn new(y: CMatrix<f64>) -> Self {
        ObservationSet { y, tau: None }
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn t(&self) -> usize {
        self.y.ncols()
    }

    pub fn to_json(&self) -> Result<String> {
        let (n, t) = self.y.shape();
        let mut re = Vec::with_capacity(n * t);
        let mut im = Vec::with_capacity(n * t);
        for i in 0..n {
            for j in 0..t {
                re.push(self.y[(i, j)].re);
                im.push(self.y[(i, j)].im);
            }
        }
        let file = ObservationFile { n, t, re, im, tau: self.tau.clone() };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ObservationFile = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
        let (n, t) = (file.n, file.t);
        if n == 0 || t == 0 {
            return Err(Error::Dimension(format!("header declares an empty {n}×{t} matrix")));
        }
        let want = n.checked_mul(t).ok_or_else(|| Error::Dimension("n·t overflows".into()))?;
        for (name, len) in [("re", file.re.len()), ("im", file.im.len())] {
            if len != want {
                return Err(Error::Dimension(format!("header declares {n}×{t} = {want} entries but `{name}` has {len}")));
            }
        }
        if let Some(tau) = &file.tau {
            if tau.len() != t {
                return Err(Error::Dimension(format!("`tau` has {} entries, expected t = {t}", tau.len())));
            }
        }
        if file.re.iter().chain(&file.im).any(|x| !x.is_finite()) {
            return Err(Error::invalid("observations", "non-finite sample"));
        }
        let y = CMatrix::from_fn(n, t, |i, j| Complex::new(file.re[i * t + j], file.im[i * t + j]));
        Ok(ObservationSet { y, tau: file.tau })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

pub fn load_observations(path: &Path) -> Result<ObservationSet> {
    ObservationSet::from_json(&fs::read_to_string(path)?)
}

/// serde_json reports 1-based line/column; turn that into a byte offset.
fn parse_error(text: &str, e: &serde_json::Error) -> Error {
    let (line, col) = (e.line(), e.column());
    let offset = if line == 0 {
        0
    } else {
        let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
        (start + col.saturating_sub(1)).min(text.len())
    };
    Error::Parse { offset, message: e.to_string() }
}
