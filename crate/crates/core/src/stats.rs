//! Sample mean and standard error.

/// Mean and standard error of a sample. `se` is the sample standard
/// deviation (Bessel-corrected) divided by `sqrt(count)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub count: u64,
}

impl MeanSe {
    /// Values are summed in iteration order.
    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut count = 0u64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for v in values {
            count += 1;
            sum += v;
            sum_sq += v * v;
        }
        if count == 0 {
            return MeanSe::default();
        }
        let n = count as f64;
        let mean = sum / n;
        let se = if count > 1 {
            let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        MeanSe { mean, se, count }
    }
}
