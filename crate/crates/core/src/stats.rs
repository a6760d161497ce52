//! Batch-mean statistics and weighted slope fitting.

/// Sample mean / standard error from replica batch means.
///
/// Replicas are grouped into equal batches; the standard error of the grand
/// mean is estimated from the spread of the batch means, which stays valid
/// when samples inside a batch share low-level randomness.
#[derive(Debug, Clone)]
pub struct BatchStats {
    pub batch_means: Vec<f64>,
}

impl BatchStats {
    pub fn from_batch_means(batch_means: Vec<f64>) -> Self {
        Self { batch_means }
    }

    pub fn mean(&self) -> f64 {
        let n = self.batch_means.len() as f64;
        self.batch_means.iter().sum::<f64>() / n
    }

    pub fn stderr(&self) -> f64 {
        let n = self.batch_means.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let m = self.mean();
        let var = self.batch_means.iter().map(|b| (b - m) * (b - m)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

/// Weighted least-squares line fit; returns (slope, intercept).
///
/// Weights are inverse variances of the ordinates. Points with zero
/// variance are handled by flooring the variance at a tiny constant, so
/// exact data recovers the exact slope.
pub fn wls_line(ts: &[f64], ys: &[f64], vars: &[f64]) -> (f64, f64) {
    assert_eq!(ts.len(), ys.len());
    assert_eq!(ts.len(), vars.len());
    let vmax = vars.iter().cloned().fold(0.0f64, f64::max);
    let floor = if vmax > 0.0 { vmax * 1e-14 } else { 1.0 };
    let mut sw = 0.0;
    let mut swt = 0.0;
    let mut swy = 0.0;
    let mut swtt = 0.0;
    let mut swty = 0.0;
    for i in 0..ts.len() {
        let w = 1.0 / vars[i].max(floor);
        sw += w;
        swt += w * ts[i];
        swy += w * ys[i];
        swtt += w * ts[i] * ts[i];
        swty += w * ts[i] * ys[i];
    }
    let det = sw * swtt - swt * swt;
    let slope = (sw * swty - swt * swy) / det;
    let intercept = (swtt * swy - swt * swty) / det;
    (slope, intercept)
}

/// Jackknife standard error of an estimator computed from batches.
///
/// `estimate(skip)` must return the estimator with batch `skip` deleted;
/// `full` is the estimate on all batches.
pub fn jackknife_stderr<F: Fn(usize) -> f64>(n_batches: usize, full: f64, estimate: F) -> f64 {
    if n_batches < 2 {
        return 0.0;
    }
    let n = n_batches as f64;
    let mut sum_sq = 0.0;
    for k in 0..n_batches {
        let d = estimate(k) - full;
        sum_sq += d * d;
    }
    ((n - 1.0) / n * sum_sq).sqrt()
}

/// Chi-square statistic for a Bernoulli(p) sample of size n with k successes.
pub fn bernoulli_chi_square(k: usize, n: usize, p: f64) -> f64 {
    let e1 = n as f64 * p;
    let e0 = n as f64 * (1.0 - p);
    let o1 = k as f64;
    let o0 = (n - k) as f64;
    (o1 - e1) * (o1 - e1) / e1 + (o0 - e0) * (o0 - e0) / e0
}

/// 1% critical value of chi-square with one degree of freedom.
pub const CHI_SQUARE_1DF_CRIT_1PCT: f64 = 6.634896601021215;
