use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Numerical tolerance discipline shared by every kernel operation.
///
/// `eps_zero` decides when a residual counts as zero; `eps_cluster` decides
/// when two eigenvalues belong to the same eigenspace. Keeping them separate
/// matters because the spectra we work with have exact rational gaps no
/// smaller than 1/24, so a clustering threshold of 1e-7 can never merge two
/// genuinely distinct eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps_zero: f64,
    pub eps_cluster: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_zero: 1e-9,
            eps_cluster: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn new(eps_zero: f64, eps_cluster: f64) -> Result<Self, Error> {
        let t = Tolerance {
            eps_zero,
            eps_cluster,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.eps_zero > 0.0 && self.eps_zero < self.eps_cluster && self.eps_cluster < 1e-3) {
            return Err(Error::Validation(format!(
                "tolerance must satisfy 0 < eps_zero < eps_cluster < 1e-3, got eps_zero={}, eps_cluster={}",
                self.eps_zero, self.eps_cluster
            )));
        }
        Ok(())
    }
}
