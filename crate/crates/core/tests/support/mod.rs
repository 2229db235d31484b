//! Independent oracles and the criterion checks shared by the integration tests and the
//! acceptance binary.
#![allow(dead_code)]

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nst::demo::{demo_corpus, DemoNet};
use nst::evaluation::{benchmark_interleaved, ssim, ssim_default, MethodTransfer, SsimParams, Transfer};
use nst::neuralnet::{conv2d, Conv2d, EncoderLevel, Network, Tensor, WeightStore};
use nst::pipeline::{PassCounters, TransformKind};
use nst::tensor::to_matrix;
use nst::transforms::{
    adain, color, content_loss, gram, style_layer_loss, style_loss, sym_eig, total_loss, whiten, GramPair,
    StyleLossWeights,
};
use nst::{Error, FeatureMap, FeatureMatrix, FormatError, Image, Matrix, Method, MethodConfig, Stylizer};

/// Outcome of one criterion.
#[derive(Debug)]
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn demo_network() -> Network {
    Network::from_store(&DemoNet::default().weights().unwrap()).unwrap()
}

// ---- oracles -------------------------------------------------------------------------

pub fn naive_mean(row: &[f64]) -> f64 {
    row.iter().sum::<f64>() / row.len() as f64
}

/// Unbiased row covariance by double loop.
pub fn naive_covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = rows[0].len();
    let means: Vec<f64> = rows.iter().map(|r| naive_mean(r)).collect();
    let n = rows.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - means[i]) * (b - means[j])).sum();
            out[i][j] = s / (m - 1) as f64;
        }
    }
    out
}

pub fn naive_gram(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
        }
    }
    out
}

pub fn map_rows(f: &FeatureMap) -> Vec<Vec<f64>> {
    (0..f.channels()).map(|c| f.channel(c).iter().map(|&v| f64::from(v)).collect()).collect()
}

pub fn matrix_rows(m: &FeatureMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

pub fn naive_content_loss(f: &FeatureMap, p: &FeatureMap) -> f64 {
    let mut s = 0.0;
    for c in 0..f.channels() {
        for y in 0..f.height() {
            for x in 0..f.width() {
                let d = f64::from(f.at(c, y, x)) - f64::from(p.at(c, y, x));
                s += d * d;
            }
        }
    }
    s / 2.0
}

pub fn naive_layer_loss(g: &[Vec<f64>], a: &[Vec<f64>], n: usize, m: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..g.len() {
        for j in 0..g.len() {
            s += (g[i][j] - a[i][j]).powi(2);
        }
    }
    s / (4.0 * (n * n) as f64 * (m * m) as f64)
}

fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut j = i.rem_euclid(period);
    if j >= n {
        j = period - j;
    }
    j as usize
}

/// Stride-1 convolution with mirror padding by direct quadruple loop.
pub fn naive_conv(input: &FeatureMap, out_c: usize, k: usize, weight: &[f32], bias: &[f32]) -> Vec<f64> {
    let (in_c, h, w) = (input.channels(), input.height(), input.width());
    let pad = (k / 2) as isize;
    let mut out = vec![0.0; out_c * h * w];
    for o in 0..out_c {
        for y in 0..h {
            for x in 0..w {
                let mut s = f64::from(bias[o]);
                for i in 0..in_c {
                    for ky in 0..k {
                        for kx in 0..k {
                            let sy = mirror(y as isize + ky as isize - pad, h);
                            let sx = mirror(x as isize + kx as isize - pad, w);
                            let wv = weight[((o * in_c + i) * k + ky) * k + kx];
                            s += f64::from(wv) * f64::from(input.at(i, sy, sx));
                        }
                    }
                }
                out[(o * h + y) * w + x] = s;
            }
        }
    }
    out
}

/// SSIM from its definition: every valid window position weighted by the 2-D Gaussian.
pub fn naive_ssim(a: &Image, b: &Image, p: &SsimParams) -> f64 {
    let (w, h, k) = (a.width(), a.height(), p.window);
    let r = (k / 2) as f64;
    let mut win = vec![0.0; k * k];
    for y in 0..k {
        for x in 0..k {
            let (dy, dx) = (y as f64 - r, x as f64 - r);
            win[y * k + x] = (-(dx * dx + dy * dy) / (2.0 * p.sigma * p.sigma)).exp();
        }
    }
    let total: f64 = win.iter().sum();
    win.iter_mut().for_each(|v| *v /= total);
    let luma = |img: &Image, x: usize, y: usize| {
        let [r, g, b] = img.pixel(x, y);
        0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)
    };
    let (c1, c2) = ((p.k1 * p.dynamic_range).powi(2), (p.k2 * p.dynamic_range).powi(2));
    let mut sum = 0.0;
    let mut count = 0;
    for oy in 0..=h - k {
        for ox in 0..=w - k {
            let (mut mx, mut my) = (0.0, 0.0);
            for y in 0..k {
                for x in 0..k {
                    mx += win[y * k + x] * luma(a, ox + x, oy + y);
                    my += win[y * k + x] * luma(b, ox + x, oy + y);
                }
            }
            let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
            for y in 0..k {
                for x in 0..k {
                    let dx = luma(a, ox + x, oy + y) - mx;
                    let dy = luma(b, ox + x, oy + y) - my;
                    vx += win[y * k + x] * dx * dx;
                    vy += win[y * k + x] * dy * dy;
                    cov += win[y * k + x] * dx * dy;
                }
            }
            sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    sum / f64::from(count)
}

pub fn random_map(rng: &mut StdRng, c: usize, h: usize, w: usize) -> FeatureMap {
    FeatureMap::new(c, h, w, (0..c * h * w).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_image(rng: &mut StdRng, w: usize, h: usize) -> Image {
    Image::new(w, h, (0..w * h * 3).map(|_| rng.gen::<f32>()).collect()).unwrap()
}

/// Rows `mean_i + Σ_j A_ij z_j` with standard-normal-ish `z`, so the covariance is dense.
pub fn correlated_rows(rng: &mut StdRng, n: usize, m: usize, offset: f64) -> Vec<Vec<f64>> {
    let z: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(-1.7..1.7)).collect()).collect();
    // Small off-diagonal mixing keeps the covariance dense but well conditioned.
    let c = 0.3 / (n as f64).sqrt();
    let mix: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-c..c)).collect()).collect();
    (0..n)
        .map(|i| {
            let mean = offset + rng.gen_range(0.0..2.0);
            let scale = 1.0 + i as f64 / n as f64;
            (0..m).map(|k| mean + scale * (z[i][k] + (0..n).map(|j| mix[i][j] * z[j][k]).sum::<f64>())).collect()
        })
        .collect()
}

fn rel_frobenius(got: &[Vec<f64>], want: &[Vec<f64>]) -> f64 {
    let (mut d, mut nrm) = (0.0, 0.0);
    for (g, w) in got.iter().zip(want) {
        for (a, b) in g.iter().zip(w) {
            d += (a - b).powi(2);
            nrm += b * b;
        }
    }
    (d / nrm).sqrt()
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

// ---- criteria ------------------------------------------------------------------------

/// AdaIN moments, whitened identity covariance and colored style covariance on random
/// 64 x 1024 features, within the time budget.
pub fn transform_suite() -> Check {
    let start = Instant::now();
    let mut rng = rng(11);
    let (n, side) = (64, 32);
    let content_rows = correlated_rows(&mut rng, n, side * side, 0.5);
    let style_rows = correlated_rows(&mut rng, n, side * side, 2.0);
    let to_map =
        |rows: &[Vec<f64>]| FeatureMap::new(n, side, side, rows.iter().flatten().map(|&v| v as f32).collect()).unwrap();
    let (content_map, style_map) = (to_map(&content_rows), to_map(&style_rows));

    let out = adain(&content_map, &style_map).unwrap();
    let (mut mean_err, mut var_err) = (0.0f64, 0.0f64);
    for (got, want) in map_rows(&out).iter().zip(&map_rows(&style_map)) {
        let (gm, wm) = (naive_mean(got), naive_mean(want));
        let gv = got.iter().map(|v| (v - gm).powi(2)).sum::<f64>() / got.len() as f64;
        let wv = want.iter().map(|v| (v - wm).powi(2)).sum::<f64>() / want.len() as f64;
        mean_err = mean_err.max(rel(gm, wm));
        var_err = var_err.max(rel(gv, wv));
    }

    let fc = to_matrix(&content_map);
    let fs = to_matrix(&style_map);
    let whitened = whiten(&fc).unwrap();
    let wcov = naive_covariance(&matrix_rows(&whitened.features));
    let mut white_err = 0.0f64;
    for (i, row) in wcov.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            white_err = white_err.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let (colored, _) = color(&whitened.features, &fs).unwrap();
    let color_err = rel_frobenius(&naive_covariance(&matrix_rows(&colored)), &naive_covariance(&matrix_rows(&fs)));
    let elapsed = start.elapsed();

    let passed = mean_err < 1e-4
        && var_err < 1e-4
        && whitened.rank == n
        && white_err < 1e-4
        && color_err < 1e-3
        && elapsed < Duration::from_secs(10);
    Check::new(
        passed,
        format!(
            "adain mean {mean_err:.2e} var {var_err:.2e}; whitened cov {white_err:.2e} (rank {}); colored cov {color_err:.2e}; {:.2} s",
            whitened.rank,
            elapsed.as_secs_f64()
        ),
    )
}

/// Content, per-layer style, combined style and total losses against direct summation,
/// plus the hand cases.
pub fn loss_oracles() -> Check {
    let mut rng = rng(12);
    let mut worst = 0.0f64;
    for trial in 0..40 {
        let c = 1 + trial % 16;
        let (h, w) = (rng.gen_range(1..9), rng.gen_range(1..9));
        let f = random_map(&mut rng, c, h, w);
        let p = random_map(&mut rng, c, h, w);
        worst = worst.max(rel(content_loss(&f, &p).unwrap(), naive_content_loss(&f, &p)));

        let layers = 1 + trial % 3;
        let mut pairs = Vec::new();
        let mut oracle_layers = Vec::new();
        for _ in 0..layers {
            let ch = rng.gen_range(1..=16);
            let (lh, lw) = (rng.gen_range(1..7), rng.gen_range(1..7));
            let gen_map = random_map(&mut rng, ch, lh, lw);
            let tgt_map = random_map(&mut rng, ch, lh, lw);
            let (g, a) = (naive_gram(&map_rows(&gen_map)), naive_gram(&map_rows(&tgt_map)));
            let (lib_g, lib_a) = (gram(&to_matrix(&gen_map)), gram(&to_matrix(&tgt_map)));
            let m = lh * lw;
            let lib = style_layer_loss(&lib_g, &lib_a, ch, m).unwrap();
            let oracle = naive_layer_loss(&g, &a, ch, m);
            worst = worst.max(rel(lib, oracle));
            oracle_layers.push(oracle);
            pairs.push(GramPair { generated: lib_g, target: lib_a, channels: ch, positions: m });
        }
        let omega: Vec<f64> = (0..layers).map(|_| rng.gen_range(0.1..2.0)).collect();
        let (alpha, beta) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..1e3));
        let weights = StyleLossWeights::new(omega.clone(), alpha, beta).unwrap();
        let lib_style = style_loss(&pairs, &weights).unwrap();
        let oracle_style = 0.5 * omega.iter().zip(&oracle_layers).map(|(w, e)| w * e).sum::<f64>();
        worst = worst.max(rel(lib_style, oracle_style));
        let lc = naive_content_loss(&f, &p);
        worst = worst.max(rel(total_loss(lc, oracle_style, &weights), alpha * lc + beta * oracle_style));
    }

    let one = |v: f32| FeatureMap::new(1, 1, 1, vec![v]).unwrap();
    let m1 = |v: f64| Matrix::new(1, 1, vec![v]).unwrap();
    let f = random_map(&mut rng, 3, 4, 4);
    let hand = [
        (content_loss(&f, &f).unwrap(), 0.0),
        (content_loss(&one(2.0), &one(0.0)).unwrap(), 2.0),
        (style_layer_loss(&m1(2.0), &m1(0.0), 1, 1).unwrap(), 1.0),
        (style_layer_loss(&gram(&to_matrix(&f)), &gram(&to_matrix(&f)), 3, 16).unwrap(), 0.0),
        (
            style_loss(
                &[GramPair { generated: m1(12f64.sqrt()), target: m1(0.0), channels: 1, positions: 1 }],
                &StyleLossWeights::new(vec![2.0], 1.0, 1.0).unwrap(),
            )
            .unwrap(),
            3.0,
        ),
        (total_loss(1.0, 1.0, &StyleLossWeights::new(vec![1.0], 2.0, 3.0).unwrap()), 5.0),
    ];
    let hand_err = hand.iter().map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    Check::new(
        worst < 1e-6 && hand_err < 1e-9,
        format!("worst relative error {worst:.2e} over 40 random cases; hand cases {hand_err:.2e}"),
    )
}

/// `conv2d` against the quadruple loop on 50 random shapes up to 8x16x16.
pub fn conv_oracle() -> Check {
    let mut rng = rng(13);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let in_c = rng.gen_range(1..=8);
        let out_c = rng.gen_range(1..=8);
        let (h, w) = (rng.gen_range(1..=16), rng.gen_range(1..=16));
        let k = if rng.gen_bool(0.8) { 3 } else { 1 };
        let input = random_map(&mut rng, in_c, h, w);
        let weight: Vec<f32> = (0..out_c * in_c * k * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bias: Vec<f32> = (0..out_c).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let conv = Conv2d::new(out_c, in_c, k, weight.clone(), bias.clone()).unwrap();
        let got = conv2d(&input, &conv).unwrap();
        let want = naive_conv(&input, out_c, k, &weight, &bias);
        for (g, w) in got.data().iter().zip(&want) {
            worst = worst.max((f64::from(*g) - w).abs());
        }
    }
    Check::new(worst < 1e-5, format!("max abs difference {worst:.2e} over 50 shapes"))
}

/// Reconstruction and orthonormality of `sym_eig` on 100 random symmetric matrices.
pub fn sym_eig_suite() -> Check {
    let mut rng = rng(14);
    let (mut worst_res, mut worst_orth) = (0.0f64, 0.0f64);
    for trial in 0..100 {
        let n = if trial < 10 { trial + 1 } else { rng.gen_range(1..=64) };
        let mut s = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-10.0..10.0);
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        let eig = sym_eig(&s).unwrap();
        let e = &eig.vectors;
        let mut res = 0.0;
        let mut orth = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n).map(|k| e.get(i, k) * eig.values[k] * e.get(j, k)).sum();
                res += (rec - s.get(i, j)).powi(2);
                let dot: f64 = (0..n).map(|k| e.get(k, i) * e.get(k, j)).sum();
                orth = orth.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst_res = worst_res.max(res.sqrt() / s.frobenius_norm());
        worst_orth = worst_orth.max(orth);
    }
    Check::new(
        worst_res < 1e-4 && worst_orth < 1e-5,
        format!("residual {worst_res:.2e}, orthonormality {worst_orth:.2e} over 100 matrices"),
    )
}

/// Identity, definition oracle and symmetry of SSIM.
pub fn ssim_suite() -> Check {
    let mut rng = rng(15);
    let p = SsimParams::default();
    let (mut self_err, mut oracle_err, mut sym_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let a = random_image(&mut rng, 16, 16);
        let b = random_image(&mut rng, 16, 16);
        self_err = self_err.max((ssim(&a, &a, &p).unwrap() - 1.0).abs());
        let ab = ssim(&a, &b, &p).unwrap();
        oracle_err = oracle_err.max((ab - naive_ssim(&a, &b, &p)).abs());
        sym_err = sym_err.max((ab - ssim(&b, &a, &p).unwrap()).abs());
    }
    Check::new(
        self_err < 1e-9 && oracle_err < 1e-6 && sym_err < 1e-12,
        format!("|ssim(x,x)-1| {self_err:.2e}; vs oracle {oracle_err:.2e}; asymmetry {sym_err:.2e}"),
    )
}

/// Mean content SSIM of every method over the 5-pair demo corpus, plus the pipeline
/// contract details.
pub struct CorpusRun {
    pub content_ssim: Vec<(Method, f64)>,
    pub all_valid: bool,
    pub elapsed: Duration,
}

pub const CORPUS_PAIRS: usize = 5;

pub fn run_corpus(net: &Network) -> CorpusRun {
    let corpus = demo_corpus(600, 450, CORPUS_PAIRS);
    let stylizer = Stylizer::new(net);
    let start = Instant::now();
    let mut all_valid = true;
    let mut content_ssim = Vec::new();
    for method in Method::ALL {
        let cfg = MethodConfig::new(method);
        let mut sum = 0.0;
        for ((_, c), (_, s)) in corpus.contents.iter().zip(&corpus.styles) {
            let out = stylizer.stylize(c, s, &cfg).unwrap();
            all_valid &= (out.width(), out.height()) == (600, 450)
                && out.data().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v));
            sum += ssim_default(&out, c).unwrap();
        }
        content_ssim.push((method, sum / CORPUS_PAIRS as f64));
    }
    CorpusRun { content_ssim, all_valid, elapsed: start.elapsed() }
}

/// Lowest content SSIM at alpha 0 over methods and pairs, at a reduced size.
pub fn alpha_zero_min_ssim(net: &Network, width: usize, height: usize, pairs: usize) -> f64 {
    let corpus = demo_corpus(width, height, pairs);
    let stylizer = Stylizer::new(net);
    let mut worst = f64::INFINITY;
    for method in Method::ALL {
        let cfg = MethodConfig::new(method).with_alpha(0.0).with_output_size(width, height);
        for ((_, c), (_, s)) in corpus.contents.iter().zip(&corpus.styles) {
            let out = stylizer.stylize(c, s, &cfg).unwrap();
            worst = worst.min(ssim_default(&out, c).unwrap());
        }
    }
    worst
}

/// Encode and decode passes of a `[4, 3, 2, 1]` cascade.
pub fn four_level_passes(net: &Network) -> (usize, usize, Vec<usize>) {
    let counters = PassCounters::new();
    let img = demo_corpus(64, 48, 1);
    let levels: Vec<EncoderLevel> = [4, 3, 2, 1].map(|l| EncoderLevel::new(l).unwrap()).to_vec();
    Stylizer::new(net)
        .with_observer(&counters)
        .stylize_multilevel(&img.contents[0].1, &img.styles[0].1, &levels, TransformKind::Wct, 0.6)
        .unwrap();
    (counters.total_content_encodes(), counters.total_decodes(), counters.levels_touched())
}

pub fn pipeline_contracts(net: &Network, run: &CorpusRun) -> Check {
    let alpha0 = alpha_zero_min_ssim(net, 600, 450, CORPUS_PAIRS);
    let (encodes, decodes, touched) = four_level_passes(net);
    let passed = alpha0 > 0.8 && encodes == 4 && decodes == 4 && run.all_valid && run.elapsed < Duration::from_secs(60);
    Check::new(
        passed,
        format!(
            "alpha=0 min content SSIM {alpha0:.4}; [4,3,2,1] ran {encodes} encodes / {decodes} decodes on levels {touched:?}; \
             25 stylizations valid={} in {:.1} s",
            run.all_valid,
            run.elapsed.as_secs_f64()
        ),
    )
}

pub fn ssim_ordering(run: &CorpusRun) -> Check {
    let get = |m: Method| run.content_ssim.iter().find(|(x, _)| *x == m).map(|(_, v)| *v).unwrap();
    let photo = get(Method::PhotoR);
    let ust = [Method::UstAdaIn, Method::UstWct, Method::UstWct4];
    let passed = ust.iter().all(|&m| photo > get(m)) && get(Method::UstWct4) > get(Method::UstWct);
    let listing: Vec<String> = run.content_ssim.iter().map(|(m, v)| format!("{} {v:.4}", m.slug())).collect();
    Check::new(passed, format!("mean content SSIM: {}", listing.join(", ")))
}

pub const BENCH_REPS: usize = 20;

pub fn runtime_ordering(net: &Network) -> Check {
    let corpus = demo_corpus(600, 450, CORPUS_PAIRS);
    let pairs: Vec<(Image, Image)> =
        corpus.contents.into_iter().zip(corpus.styles).map(|((_, c), (_, s))| (c, s)).collect();
    let stylizer = Stylizer::new(net);
    let order = [Method::AdaIn, Method::UstAdaIn, Method::UstWct, Method::UstWct4];
    let transfers: Vec<MethodTransfer> =
        order.iter().map(|&m| MethodTransfer::new(stylizer, MethodConfig::new(m))).collect();
    let methods: Vec<&dyn Transfer> = transfers.iter().map(|t| t as &dyn Transfer).collect();
    let rows = benchmark_interleaved(&methods, &pairs, BENCH_REPS).unwrap();
    let mean = |i: usize| rows[i].mean_s;
    let passed = mean(0) < mean(1) && mean(1) < mean(2) && mean(3) < mean(2);
    let listing: Vec<String> = rows.iter().map(|r| format!("{} {:.3}", r.method, r.mean_s)).collect();
    Check::new(passed, format!("mean seconds over {BENCH_REPS} reps at 600x450: {}", listing.join(", ")))
}

/// Demo weights plus tensors with awkward bit patterns.
pub fn sample_store() -> WeightStore {
    let specials = vec![0.0, -0.0, f32::MIN_POSITIVE, f32::MAX, -1.5e-42, 1.0 / 3.0, f32::EPSILON, -7.25];
    let mut tensors: Vec<(String, Tensor)> =
        DemoNet::default().weights().unwrap().iter().map(|(n, t)| (n.to_string(), t.clone())).collect();
    tensors.push(("extra.bits".into(), Tensor::new(vec![2, 4], specials).unwrap()));
    tensors.push(("extra.scalar".into(), Tensor::new(vec![], vec![42.0]).unwrap()));
    tensors.into_iter().collect()
}

pub fn weight_format() -> Check {
    let store = sample_store();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.nstw");
    store.write(&path).unwrap();
    let loaded = nst::neuralnet::load_weights(&path).unwrap();
    let exact = loaded.len() == store.len()
        && store.iter().all(|(name, t)| {
            loaded.get(name).is_ok_and(|l| {
                l.shape() == t.shape() && l.data().iter().map(|v| v.to_bits()).eq(t.data().iter().map(|v| v.to_bits()))
            })
        });
    let bytes = std::fs::read(&path).unwrap();
    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    let magic_err = WeightStore::from_bytes(&bad_magic).err();
    let truncated_err = WeightStore::from_bytes(&bytes[..bytes.len() - 3]).err();
    let magic_ok = matches!(magic_err, Some(Error::Format(FormatError::BadMagic(_))));
    let trunc_ok = matches!(truncated_err, Some(Error::Format(FormatError::Truncated(_))));
    Check::new(
        exact && magic_ok && trunc_ok,
        format!(
            "{} tensors round-trip bit-exact={exact}; bad magic -> {}; truncated -> {}",
            store.len(),
            magic_err.map_or("accepted".into(), |e| e.to_string()),
            truncated_err.map_or("accepted".into(), |e| e.to_string())
        ),
    )
}
