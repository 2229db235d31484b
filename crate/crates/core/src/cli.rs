//! The `nst` command-line tool.
//!
//! Exit codes: 0 success, 2 input error, 3 weight error, 64 usage error.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::demo::{demo_corpus, DemoNet};
use crate::error::Error;
use crate::evaluation::{
    benchmark_interleaved, evaluate_corpus, ssim_default, BenchReport, Corpus, LossMetric, MethodTransfer, Transfer,
};
use crate::imageio::{load_image, resize, save_png};
use crate::neuralnet::{load_weights, DecodeMode, EncoderLevel, Network};
use crate::pipeline::{Method, MethodConfig, Stylizer, SIZE_MULTIPLE};
use crate::tensor::Image;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_WEIGHTS: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "nst", version, about = "Feed-forward neural style transfer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stylize one content image with one style image.
    Stylize(StylizeArgs),
    /// Average SSIM and loss distances of methods over every content/style pair of two directories.
    Evaluate(EvaluateArgs),
    /// Time methods on in-memory image pairs.
    Bench(BenchArgs),
    /// Encode and decode an image at one level without any transform.
    Reconstruct(ReconstructArgs),
    /// Write the built-in demo weights and a synthetic image corpus.
    InitDemo(InitDemoArgs),
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// NSTW weight file.
    #[arg(long, env = "NST_WEIGHTS", value_name = "PATH")]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StylizeArgs {
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Blend weight of the transformed features; defaults to the method's own.
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = parse_size, default_value = "600x450", value_name = "WxH")]
    pub size: (usize, usize),
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, value_name = "PATH")]
    pub content: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub style: PathBuf,
    /// Output PNG.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Methods to evaluate; all five when omitted.
    #[arg(long, value_parser = parse_method, value_delimiter = ',')]
    pub method: Vec<Method>,
    /// Overrides every method's default blend weight.
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = parse_size, default_value = "600x450", value_name = "WxH")]
    pub size: (usize, usize),
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Directory of content images.
    #[arg(long, value_name = "DIR")]
    pub content: PathBuf,
    /// Directory of style images.
    #[arg(long, value_name = "DIR")]
    pub style: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    /// CSV report path; the CSV goes to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Methods to time; all five when omitted.
    #[arg(long, value_parser = parse_method, value_delimiter = ',')]
    pub method: Vec<Method>,
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = parse_size, default_value = "600x450", value_name = "WxH")]
    pub size: (usize, usize),
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Content image or directory of images.
    #[arg(long, value_name = "PATH")]
    pub content: PathBuf,
    /// Style image or directory of images; paired with the contents in name order.
    #[arg(long, value_name = "PATH")]
    pub style: PathBuf,
    /// Timed calls per method, after one warm-up call.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,
    /// CSV report path; the CSV goes to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Encoder level, 1 to 5.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    pub level: u8,
    /// Use the unpooling decoder instead of the upsampling one.
    #[arg(long)]
    pub unpool: bool,
    /// Resize the input first; keeps the input size when omitted.
    #[arg(long, value_parser = parse_size, value_name = "WxH")]
    pub size: Option<(usize, usize)>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, value_name = "PATH")]
    pub content: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InitDemoArgs {
    /// Directory that receives `weights.nstw`, `content/` and `style/`.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Images per directory.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u16).range(1..))]
    pub count: u16,
    #[arg(long, value_parser = parse_size, default_value = "600x450", value_name = "WxH")]
    pub size: (usize, usize),
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&a) {
        Ok(a)
    } else {
        Err(format!("alpha must be in [0, 1], got {a}"))
    }
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected WxH with positive integers, got `{s}`");
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

/// A failed command, classified by exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Weights(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Weights(_) => EXIT_WEIGHTS,
            Failure::Usage(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Weights(m) | Failure::Usage(m) => m,
        }
    }
}

fn input(e: Error) -> Failure {
    Failure::Input(e.to_string())
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Stylize(a) => stylize(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Bench(a) => bench(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::InitDemo(a) => init_demo(a),
    }
}

fn load_network(args: &WeightArgs) -> Result<Network, Failure> {
    let path = args
        .weights
        .as_ref()
        .ok_or_else(|| Failure::Weights("no weight file: pass --weights or set NST_WEIGHTS".into()))?;
    let store = load_weights(path).map_err(|e| Failure::Weights(format!("{}: {e}", path.display())))?;
    Network::from_store(&store).map_err(|e| Failure::Weights(format!("{}: {e}", path.display())))
}

/// Weight problems that only surface once a method asks for a missing decoder.
fn run_error(e: Error) -> Failure {
    match e {
        Error::Manifest(_) | Error::Format(_) | Error::UnsupportedDtype { .. } => Failure::Weights(e.to_string()),
        other => input(other),
    }
}

fn configs(methods: &[Method], alpha: Option<f64>, size: (usize, usize)) -> Vec<MethodConfig> {
    let methods = if methods.is_empty() { &Method::ALL[..] } else { methods };
    methods
        .iter()
        .map(|&m| {
            let cfg = MethodConfig::new(m).with_output_size(size.0, size.1);
            match alpha {
                Some(a) => cfg.with_alpha(a),
                None => cfg,
            }
        })
        .collect()
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn stylize(a: StylizeArgs) -> Result<(), Failure> {
    let content = load_image(&a.content).map_err(input)?;
    let style = load_image(&a.style).map_err(input)?;
    let net = load_network(&a.weights)?;
    let cfg = configs(&[a.method], a.alpha, a.size).remove(0);
    let out = Stylizer::new(&net).stylize(&content, &style, &cfg).map_err(run_error)?;
    save_png(&out, &a.out).map_err(input)
}

fn evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let corpus = Corpus::from_dirs(&a.content, &a.style).map_err(input)?;
    if corpus.contents.is_empty() {
        return Err(Failure::Input(format!("no PNG or JPEG images in {}", a.content.display())));
    }
    if corpus.styles.is_empty() {
        return Err(Failure::Input(format!("no PNG or JPEG images in {}", a.style.display())));
    }
    let net = load_network(&a.weights)?;
    let stylizer = Stylizer::new(&net);
    let transfers: Vec<MethodTransfer> =
        configs(&a.method, a.alpha, a.size).into_iter().map(|c| MethodTransfer::new(stylizer, c)).collect();
    let methods: Vec<&dyn Transfer> = transfers.iter().map(|t| t as &dyn Transfer).collect();
    let metric = LossMetric::new(&net).map_err(run_error)?;
    let report = evaluate_corpus(&methods, &corpus, &metric, usize::from(a.jobs)).map_err(run_error)?;
    if a.report.is_some() {
        print!("{}", report.to_text());
    }
    write_output(a.report.as_deref(), &report.to_csv())
}

fn load_images(path: &Path) -> Result<Vec<Image>, Failure> {
    if path.is_dir() {
        let corpus = Corpus::from_dirs(path, path).map_err(input)?;
        if corpus.contents.is_empty() {
            return Err(Failure::Input(format!("no PNG or JPEG images in {}", path.display())));
        }
        Ok(corpus.contents.into_iter().map(|(_, img)| img).collect())
    } else {
        Ok(vec![load_image(path).map_err(input)?])
    }
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let contents = load_images(&a.content)?;
    let styles = load_images(&a.style)?;
    let net = load_network(&a.weights)?;
    let (w, h) = a.size;
    let count = contents.len().max(styles.len());
    // Resizing happens here so the timed calls only stylize.
    let pairs = (0..count)
        .map(|i| Ok((resize(&contents[i % contents.len()], w, h)?, resize(&styles[i % styles.len()], w, h)?)))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(input)?;
    let stylizer = Stylizer::new(&net);
    let transfers: Vec<MethodTransfer> =
        configs(&a.method, a.alpha, a.size).into_iter().map(|c| MethodTransfer::new(stylizer, c)).collect();
    let methods: Vec<&dyn Transfer> = transfers.iter().map(|t| t as &dyn Transfer).collect();
    let rows = benchmark_interleaved(&methods, &pairs, a.reps as usize).map_err(run_error)?;
    let report = BenchReport { rows };
    if a.report.is_some() {
        print!("{}", report.to_text());
    }
    write_output(a.report.as_deref(), &report.to_csv())
}

fn reconstruct(a: ReconstructArgs) -> Result<(), Failure> {
    let mut img = load_image(&a.content).map_err(input)?;
    if let Some((w, h)) = a.size {
        img = resize(&img, w, h).map_err(input)?;
    }
    let net = load_network(&a.weights)?;
    let level = EncoderLevel::new(usize::from(a.level)).map_err(|e| Failure::Usage(e.to_string()))?;
    let mode = if a.unpool { DecodeMode::Unpool } else { DecodeMode::Upsample };
    net.require(level, mode).map_err(run_error)?;
    let (w, h) = (img.width(), img.height());
    let padded = img.pad_to_multiple(SIZE_MULTIPLE);
    let enc = net.encode(&padded, level).map_err(run_error)?;
    let out =
        net.decode(&enc.features, level, mode, Some(&enc.indices)).and_then(|o| o.crop(w, h)).map_err(run_error)?;
    save_png(&out, &a.out).map_err(input)?;
    if let Ok(score) = ssim_default(&out, &img) {
        println!("ssim {score:.6}");
    }
    Ok(())
}

fn init_demo(a: InitDemoArgs) -> Result<(), Failure> {
    let io = |p: &Path, e: &dyn std::fmt::Display| Failure::Input(format!("{}: {e}", p.display()));
    let content_dir = a.out.join("content");
    let style_dir = a.out.join("style");
    for dir in [&content_dir, &style_dir] {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, &e))?;
    }
    let weights = a.out.join("weights.nstw");
    DemoNet::default().weights().and_then(|store| store.write(&weights)).map_err(|e| io(&weights, &e))?;
    let (w, h) = a.size;
    let corpus = demo_corpus(w, h, usize::from(a.count));
    for (dir, images) in [(&content_dir, &corpus.contents), (&style_dir, &corpus.styles)] {
        for (name, img) in images {
            let path = dir.join(format!("{name}.png"));
            save_png(img, &path).map_err(input)?;
        }
    }
    println!("wrote {}", weights.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::DEFAULT_OUTPUT_SIZE;

    #[test]
    fn size_parsing() {
        assert_eq!(parse_size("600x450"), Ok((600, 450)));
        assert_eq!(parse_size("32X16"), Ok((32, 16)));
        assert!(parse_size("0x10").is_err());
        assert!(parse_size("600").is_err());
        assert!(parse_size("ax4").is_err());
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!(parse_alpha("0.6"), Ok(0.6));
        assert!(parse_alpha("1.5").is_err());
        assert!(parse_alpha("nan").is_err());
    }

    #[test]
    fn default_size_matches_pipeline() {
        let cli = Cli::try_parse_from([
            "nst",
            "stylize",
            "--method",
            "adain",
            "--content",
            "c",
            "--style",
            "s",
            "--out",
            "o",
        ])
        .unwrap();
        let Command::Stylize(a) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(a.size, DEFAULT_OUTPUT_SIZE);
        assert_eq!(a.alpha, None);
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(run(["nst", "stylize", "--method", "nope"]), EXIT_USAGE);
        assert_eq!(run(["nst", "reconstruct", "--level", "6", "--content", "c", "--out", "o"]), EXIT_USAGE);
        assert_eq!(run(["nst", "frobnicate"]), EXIT_USAGE);
    }
}
