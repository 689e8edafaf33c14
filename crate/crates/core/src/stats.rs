//! Order-stable accumulation and Monte Carlo summaries.

/// Neumaier-compensated sum over values in the given order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

impl Estimate {
    /// Summarizes `samples` in order.  Fewer than two samples give a zero error.
    pub fn from_samples(samples: &[f64]) -> Self {
        let count = samples.len();
        if count == 0 {
            return Estimate { mean: f64::NAN, std_err: f64::NAN, count };
        }
        let mean = compensated_sum(samples.iter().copied()) / count as f64;
        if count < 2 {
            return Estimate { mean, std_err: 0.0, count };
        }
        let ss = compensated_sum(samples.iter().map(|&x| (x - mean) * (x - mean)));
        let var = ss / (count - 1) as f64;
        Estimate { mean, std_err: (var / count as f64).sqrt(), count }
    }

    /// `|mean - target| <= k * std_err`, with exact agreement accepted when
    /// the error is zero.
    pub fn within_sigmas(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err || self.mean == target
    }
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}
