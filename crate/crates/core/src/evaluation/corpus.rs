use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imageio::{load_image, resize};
use crate::neuralnet::{EncoderLevel, Network};
use crate::pipeline::SIZE_MULTIPLE;
use crate::tensor::{to_matrix, Image};
use crate::transforms::{content_loss, gram, style_loss, GramPair, StyleLossWeights};

use super::ssim::{ssim, SsimParams};
use super::Transfer;

/// Named content and style images; evaluation runs over their cartesian product.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub contents: Vec<(String, Image)>,
    pub styles: Vec<(String, Image)>,
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

impl Corpus {
    pub fn new(contents: Vec<(String, Image)>, styles: Vec<(String, Image)>) -> Self {
        Self { contents, styles }
    }

    /// Loads every PNG/JPEG file in the two directories, sorted by file name.
    pub fn from_dirs(content_dir: impl AsRef<Path>, style_dir: impl AsRef<Path>) -> Result<Self> {
        Ok(Self { contents: load_dir(content_dir.as_ref())?, styles: load_dir(style_dir.as_ref())? })
    }

    pub fn pair_count(&self) -> usize {
        self.contents.len() * self.styles.len()
    }

    /// `content/style` identifiers in evaluation order.
    pub fn pair_ids(&self) -> Vec<String> {
        self.contents.iter().flat_map(|(c, _)| self.styles.iter().map(move |(s, _)| format!("{c}/{s}"))).collect()
    }
}

fn load_dir(dir: &Path) -> Result<Vec<(String, Image)>> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::Image(format!("{}: {e}", dir.display())))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, load_image(&p)?))
        })
        .collect()
}

/// Style distance over several encoder taps and content distance at one tap, computed
/// with the same network the methods run on.
pub struct LossMetric<'a> {
    net: &'a Network,
    style_levels: Vec<EncoderLevel>,
    content_level: EncoderLevel,
    weights: StyleLossWeights,
}

impl<'a> LossMetric<'a> {
    /// Uniform style weights over every available level up to relu5_1, content at relu4_1
    /// (or the deepest level if the encoder is shallower).
    pub fn new(net: &'a Network) -> Result<Self> {
        let style_levels: Vec<_> = EncoderLevel::all().take_while(|l| *l <= net.depth()).collect();
        let content_level = EncoderLevel::new(4)?.min(net.depth());
        let weights = StyleLossWeights::uniform(style_levels.len())?;
        Ok(Self { net, style_levels, content_level, weights })
    }

    pub fn with_levels(
        net: &'a Network,
        style_levels: Vec<EncoderLevel>,
        content_level: EncoderLevel,
        weights: StyleLossWeights,
    ) -> Result<Self> {
        if style_levels.len() != weights.layer_weights().len() {
            return Err(Error::argument("one style weight per style level is required"));
        }
        Ok(Self { net, style_levels, content_level, weights })
    }

    /// `(style_loss, content_loss)` of `output` against the targets. All three images must
    /// share one size.
    pub fn losses(&self, output: &Image, content: &Image, style: &Image) -> Result<(f64, f64)> {
        let same = |a: &Image| a.width() == output.width() && a.height() == output.height();
        if !same(content) || !same(style) {
            return Err(Error::shape("loss images must share one size"));
        }
        let mut out_levels = self.style_levels.clone();
        out_levels.push(self.content_level);
        let out_taps = self.net.encode_taps(&output.pad_to_multiple(SIZE_MULTIPLE), &out_levels)?;
        let style_taps = self.net.encode_taps(&style.pad_to_multiple(SIZE_MULTIPLE), &self.style_levels)?;
        let content_tap = self.net.encode_taps(&content.pad_to_multiple(SIZE_MULTIPLE), &[self.content_level])?;

        let pairs: Vec<GramPair> = out_taps
            .iter()
            .zip(&style_taps)
            .map(|(g, a)| GramPair {
                generated: gram(&to_matrix(g)),
                target: gram(&to_matrix(a)),
                channels: g.channels(),
                positions: g.plane_len(),
            })
            .collect();
        let style = style_loss(&pairs, &self.weights)?;
        let content = content_loss(&out_taps[self.style_levels.len()], &content_tap[0])?;
        Ok((style, content))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub method: String,
    pub style_ssim_mean: f64,
    pub content_ssim_mean: f64,
    pub style_loss_mean: f64,
    pub content_loss_mean: f64,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// `content/style` identifiers of every evaluated pair.
    pub corpus: Vec<String>,
    /// Seconds since the Unix epoch when the evaluation finished.
    pub timestamp: u64,
}

pub const EVAL_CSV_HEADER: &str = "method,style_ssim_mean,content_ssim_mean,style_loss_mean,content_loss_mean,n_pairs";

impl EvalReport {
    /// Machine-readable form; excludes the timestamp so equal inputs give equal bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(EVAL_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.method, r.style_ssim_mean, r.content_ssim_mean, r.style_loss_mean, r.content_loss_mean, r.n_pairs
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<12} {:>12} {:>12} {:>14} {:>14} {:>7}\n",
            "method", "style SSIM", "content SSIM", "style loss", "content loss", "pairs"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>12.6} {:>12.6} {:>14.6e} {:>14.6e} {:>7}",
                r.method, r.style_ssim_mean, r.content_ssim_mean, r.style_loss_mean, r.content_loss_mean, r.n_pairs
            );
        }
        let _ = writeln!(out, "pairs: {}  timestamp: {}", self.corpus.len(), self.timestamp);
        out
    }
}

struct PairScore {
    content: usize,
    style: usize,
    style_ssim: f64,
    content_ssim: f64,
    style_loss: f64,
    content_loss: f64,
}

/// Runs every method on every (content, style) pair and averages SSIM against the
/// resized inputs plus the loss distances.
///
/// `jobs` worker threads process pairs concurrently; results are reduced in a fixed
/// order, so the report does not depend on `jobs`.
pub fn evaluate_corpus(
    methods: &[&dyn Transfer],
    corpus: &Corpus,
    metric: &LossMetric<'_>,
    jobs: usize,
) -> Result<EvalReport> {
    if corpus.contents.is_empty() || corpus.styles.is_empty() {
        return Err(Error::argument("evaluation corpus needs at least one content and one style image"));
    }
    if methods.is_empty() {
        return Err(Error::argument("no methods to evaluate"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::argument(format!("cannot start {jobs} workers: {e}")))?;
    let pairs: Vec<(usize, usize)> =
        (0..corpus.contents.len()).flat_map(|c| (0..corpus.styles.len()).map(move |s| (c, s))).collect();

    let mut rows = Vec::with_capacity(methods.len());
    for method in methods {
        let mut scores = pool.install(|| {
            pairs.par_iter().map(|&(c, s)| score_pair(*method, corpus, metric, c, s)).collect::<Result<Vec<_>>>()
        })?;
        // Sum in name order so the means do not depend on corpus ordering.
        scores.sort_by(|a, b| {
            let key = |p: &PairScore| (corpus.contents[p.content].0.clone(), corpus.styles[p.style].0.clone());
            key(a).cmp(&key(b))
        });
        let n = scores.len() as f64;
        let mean = |f: fn(&PairScore) -> f64| scores.iter().map(f).sum::<f64>() / n;
        rows.push(EvalRow {
            method: method.name().to_string(),
            style_ssim_mean: mean(|p| p.style_ssim),
            content_ssim_mean: mean(|p| p.content_ssim),
            style_loss_mean: mean(|p| p.style_loss),
            content_loss_mean: mean(|p| p.content_loss),
            n_pairs: scores.len(),
        });
    }
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(EvalReport { rows, corpus: corpus.pair_ids(), timestamp })
}

fn score_pair(
    method: &dyn Transfer,
    corpus: &Corpus,
    metric: &LossMetric<'_>,
    c: usize,
    s: usize,
) -> Result<PairScore> {
    let (content, style) = (&corpus.contents[c].1, &corpus.styles[s].1);
    let out = method.transfer(content, style)?;
    let content = resize(content, out.width(), out.height())?;
    let style = resize(style, out.width(), out.height())?;
    let params = SsimParams::default();
    let (style_loss, content_loss) = metric.losses(&out, &content, &style)?;
    Ok(PairScore {
        content: c,
        style: s,
        style_ssim: ssim(&out, &style, &params)?,
        content_ssim: ssim(&out, &content, &params)?,
        style_loss,
        content_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo::{content_scene, demo_weights, style_texture};
    use crate::evaluation::Passthrough;

    fn tiny_net() -> Network {
        Network::from_store(&demo_weights([12; 5]).unwrap()).unwrap()
    }

    #[test]
    fn passthrough_scores_one_against_content() {
        let net = tiny_net();
        let metric = LossMetric::new(&net).unwrap();
        let corpus =
            Corpus::new(vec![("c".into(), content_scene(40, 32, 0))], vec![("s".into(), style_texture(40, 32, 0))]);
        let pass = Passthrough { output_size: (40, 32) };
        let report = evaluate_corpus(&[&pass], &corpus, &metric, 1).unwrap();
        let row = &report.rows[0];
        assert_eq!(row.n_pairs, 1);
        assert!((row.content_ssim_mean - 1.0).abs() < 1e-9);
        assert_eq!(row.content_loss_mean, 0.0);
        assert!(row.style_ssim_mean < 1.0);
        assert_eq!(report.corpus, vec!["c/s".to_string()]);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let net = tiny_net();
        let metric = LossMetric::new(&net).unwrap();
        let pass = Passthrough { output_size: (16, 16) };
        let corpus = Corpus::new(Vec::new(), vec![("s".into(), Image::filled(16, 16, [0.0; 3]))]);
        assert!(matches!(evaluate_corpus(&[&pass], &corpus, &metric, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn csv_layout() {
        let report = EvalReport {
            rows: vec![EvalRow {
                method: "adain".into(),
                style_ssim_mean: 0.25,
                content_ssim_mean: 0.5,
                style_loss_mean: 2.0,
                content_loss_mean: 3.5,
                n_pairs: 4,
            }],
            corpus: vec![],
            timestamp: 7,
        };
        assert_eq!(report.to_csv(), format!("{EVAL_CSV_HEADER}\nadain,0.25,0.5,2,3.5,4\n"));
        assert!(report.to_text().contains("adain"));
    }
}
