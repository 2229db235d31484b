use std::fmt::Write as _;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::tensor::Image;

use super::Transfer;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub mean_s: f64,
    pub median_s: f64,
    /// Sample standard deviation; zero for a single repetition.
    pub std_s: f64,
    pub reps: usize,
    pub width: usize,
    pub height: usize,
    /// Individual call durations in seconds, in execution order.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

pub const BENCH_CSV_HEADER: &str = "method,mean_s,median_s,std_s,reps,width,height";

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(BENCH_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.method, r.mean_s, r.median_s, r.std_s, r.reps, r.width, r.height
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<12} {:>10} {:>10} {:>10} {:>6} {:>9}\n",
            "method", "mean s", "median s", "std s", "reps", "size"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>10.4} {:>10.4} {:>10.4} {:>6} {:>9}",
                r.method,
                r.mean_s,
                r.median_s,
                r.std_s,
                r.reps,
                format!("{}x{}", r.width, r.height)
            );
        }
        out
    }
}

/// Times `reps` calls of `method`, cycling through `pairs`, after one discarded warm-up
/// call on the first pair.
///
/// Runs on a dedicated single-thread pool, so every timed call uses exactly one core.
/// Images must already be in memory; only the transfer call itself is inside the timer.
pub fn benchmark(method: &dyn Transfer, pairs: &[(Image, Image)], reps: usize) -> Result<BenchRow> {
    Ok(benchmark_interleaved(&[method], pairs, reps)?.remove(0))
}

/// [`benchmark`] for several methods with their timed calls interleaved: repetition `i`
/// runs every method once before repetition `i + 1` starts, so slow drifts in machine
/// load hit all methods alike. Each method still gets one warm-up call first.
pub fn benchmark_interleaved(
    methods: &[&dyn Transfer],
    pairs: &[(Image, Image)],
    reps: usize,
) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::argument("benchmark needs at least one repetition"));
    }
    if pairs.is_empty() {
        return Err(Error::argument("benchmark needs at least one image pair"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::argument(format!("cannot start benchmark thread: {e}")))?;
    pool.install(|| {
        let mut sizes = Vec::with_capacity(methods.len());
        for method in methods {
            let warm = method.transfer(&pairs[0].0, &pairs[0].1)?;
            sizes.push((warm.width(), warm.height()));
        }
        let mut samples = vec![Vec::with_capacity(reps); methods.len()];
        for i in 0..reps {
            let (content, style) = &pairs[i % pairs.len()];
            for (method, out) in methods.iter().zip(&mut samples) {
                let start = Instant::now();
                let img = method.transfer(content, style)?;
                out.push(start.elapsed().as_secs_f64());
                drop(img);
            }
        }
        Ok(methods
            .iter()
            .zip(samples)
            .zip(sizes)
            .map(|((method, samples), (width, height))| {
                let (mean_s, median_s, std_s) = summarize(&samples);
                BenchRow { method: method.name().to_string(), mean_s, median_s, std_s, reps, width, height, samples }
            })
            .collect())
    })
}

/// `(mean, median, sample std)`.
pub(crate) fn summarize(samples: &[f64]) -> (f64, f64, f64) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let std =
        if n > 1 { (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    (mean, median, std)
}
