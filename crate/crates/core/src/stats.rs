//! Small Monte Carlo summaries: means with standard errors and batch means.

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and `sd / sqrt(len)` of i.i.d. observations.
    pub fn from_iid(values: &[f64]) -> Self {
        let len = values.len() as f64;
        let mean = values.iter().sum::<f64>() / len;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0).max(1.0);
        Self { mean, se: (var / len).sqrt() }
    }

    /// Batch-means estimate for a correlated stationary sequence.
    pub fn from_batch_means(values: &[f64], batches: usize) -> Self {
        let batches = batches.clamp(2, values.len().max(2));
        let size = values.len() / batches;
        if size == 0 {
            return Self::from_iid(values);
        }
        let means: Vec<f64> = values
            .chunks_exact(size)
            .take(batches)
            .map(|c| c.iter().sum::<f64>() / size as f64)
            .collect();
        let overall = values.iter().sum::<f64>() / values.len() as f64;
        Self { mean: overall, se: Self::from_iid(&means).se }
    }

    /// `|a - b| <= sigmas * sqrt(se_a^2 + se_b^2)`.
    pub fn agrees_with(&self, other: &Estimate, sigmas: f64) -> bool {
        (self.mean - other.mean).abs() <= sigmas * self.combined_se(other)
    }

    pub fn combined_se(&self, other: &Estimate) -> f64 {
        self.se.hypot(other.se)
    }
}
