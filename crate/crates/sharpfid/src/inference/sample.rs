use crate::error::{Error, Result};

/// Parameter draws with nonnegative importance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample<T = f64> {
    values: Vec<T>,
    weights: Vec<f64>,
}

impl<T> WeightedSample<T> {
    /// Fails on mismatched lengths, an empty sample, negative or non-finite
    /// weights, or weights that sum to zero.
    pub fn new(values: Vec<T>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::invalid(
                "weighted sample",
                format!("{} values but {} weights", values.len(), weights.len()),
            ));
        }
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights", "weights must be finite and nonnegative"));
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::ZeroMass("all weights are zero".into()));
        }
        Ok(WeightedSample { values, weights })
    }

    pub fn unweighted(values: Vec<T>) -> Result<Self> {
        let n = values.len();
        WeightedSample::new(values, vec![1.0; n])
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Kish effective sample size (Σw)²/Σw².
    pub fn ess(&self) -> f64 {
        crate::numerics::stats::ess_of(&self.weights)
    }

    /// Self-normalized weighted mean of `f`.
    pub fn mean_of(&self, f: impl Fn(&T) -> f64) -> f64 {
        let mut num = 0.0;
        for (v, w) in self.values.iter().zip(&self.weights) {
            if *w > 0.0 {
                num += w * f(v);
            }
        }
        num / self.total_weight()
    }

    /// New sample with each weight multiplied by `f(value)`.
    pub fn reweight(&self, f: impl Fn(&T) -> f64) -> Result<Self>
    where
        T: Clone,
    {
        let weights = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| if *w > 0.0 { w * f(v) } else { 0.0 })
            .collect();
        WeightedSample::new(self.values.clone(), weights)
    }

    /// Weights rescaled to sum to one.
    pub fn normalized(mut self) -> Self {
        let total = self.total_weight();
        for w in &mut self.weights {
            *w /= total;
        }
        self
    }

    /// A scalar projection of every draw, keeping the weights.
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> WeightedSample<U> {
        WeightedSample {
            values: self.values.iter().map(f).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<f64>) {
        (self.values, self.weights)
    }
}
