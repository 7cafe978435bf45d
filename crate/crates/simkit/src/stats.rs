//! Running means and standard errors over Monte Carlo samples.

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
}

pub fn summarize(samples: &[f64]) -> Summary {
    let n = samples.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = compensated_sum(samples.iter().copied()) / n as f64;
    let stderr = if n > 1 {
        let var = compensated_sum(samples.iter().map(|x| (x - mean).powi(2))) / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Summary { mean, stderr }
}

/// `mean(x) / mean(y)` with its delta-method standard error.
pub fn ratio_of_means(x: &[f64], y: &[f64]) -> Summary {
    assert_eq!(x.len(), y.len());
    let sx = summarize(x);
    let sy = summarize(y);
    let ratio = sx.mean / sy.mean;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - ratio * b).collect();
    let sr = summarize(&residuals);
    Summary {
        mean: ratio,
        stderr: sr.stderr / sy.mean.abs(),
    }
}
