use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use unisynth::{ComplexMatrix, C64};

/// Unitary validation tolerance on `max |U^dag U - I|`.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Serialize, Deserialize)]
pub struct TargetFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TargetFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let dim = m.dim();
        let re = (0..dim).map(|r| (0..dim).map(|c| m[(r, c)].re).collect()).collect();
        let im = (0..dim).map(|r| (0..dim).map(|c| m[(r, c)].im).collect()).collect();
        Self { dim, re, im }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let dim = self.dim;
        if dim == 0 || !dim.is_power_of_two() {
            bail!("dim must be a power of two (got {dim})");
        }
        for (name, rows) in [("re", &self.re), ("im", &self.im)] {
            if rows.len() != dim {
                bail!("{name} has {} rows, expected {dim}", rows.len());
            }
            if let Some(r) = rows.iter().position(|row| row.len() != dim) {
                bail!("{name}[{r}] has {} entries, expected {dim}", rows[r].len());
            }
        }
        let data = (0..dim * dim).map(|k| C64::new(self.re[k / dim][k % dim], self.im[k / dim][k % dim])).collect();
        let m = ComplexMatrix::from_row_major(dim, data);
        let err = m.unitarity_error();
        if !(err <= UNITARITY_TOL) {
            bail!("target is not unitary: max|U^dag U - I| = {err:.3e} exceeds {UNITARITY_TOL:e}");
        }
        Ok(m)
    }
}

pub fn load_target(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: TargetFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.to_matrix().with_context(|| format!("invalid target {}", path.display()))
}
