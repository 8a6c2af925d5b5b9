use crate::error::{Error, Result};

/// Monte Carlo settings shared by the sampling backends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    /// Retained draws (for Gibbs, transitions after burn-in).
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        McConfig { samples, burn_in: 0, seed }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("samples", "need at least one draw"));
        }
        Ok(())
    }
}
