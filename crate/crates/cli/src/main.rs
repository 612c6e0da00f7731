//! `lsid` command-line tool.
//!
//! Exit status: 0 on success, 1 on runtime failure, 2 on usage or
//! configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsid_core::baselines::downscale_box;
use lsid_core::bench::{self, BenchConfig, CONFIG_KEYS};
use lsid_core::cooc::{compute_profile, export_heatmap};
use lsid_core::lsid::{downscale_image_with_guide, DEFAULT_ALPHA, DEFAULT_K};
use lsid_core::metrics::{psnr, ssim};
use lsid_core::{load_image, save_image, Error, LsidParams, Method, Plane, Raster};

#[derive(Parser, Debug)]
#[command(name = "lsid", version, about = "Co-occurrence guided image downscaling")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Downscale one image.
    Downscale(DownscaleArgs),
    /// Export the co-occurrence heatmap (and raw counts) of one channel.
    Cooc(CoocArgs),
    /// Print PSNR and SSIM of a test image against a reference.
    Compare(CompareArgs),
    /// Run methods over a directory of images and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct DownscaleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Downscaling factor, > 1; may be fractional.
    #[arg(long)]
    factor: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Lsid)]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Also write the box-averaged guide image.
    #[arg(long)]
    dump_guide: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Lsid,
    Box,
    Bicubic,
    Lanczos,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lsid => Method::Lsid,
            MethodArg::Box => Method::Box,
            MethodArg::Bicubic => Method::Bicubic,
            MethodArg::Lanczos => Method::Lanczos,
        }
    }
}

#[derive(Args, Debug)]
struct CoocArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Output PNG, 256x256, log-scaled counts.
    #[arg(long)]
    heatmap: PathBuf,
    /// Raw counts CSV (default: heatmap path with a .csv extension).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Channel to profile; `gray` on an RGB image uses its luma.
    #[arg(long, value_enum, default_value_t = ChannelArg::Gray)]
    channel: ChannelArg,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ChannelArg {
    R,
    G,
    B,
    Gray,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Print SSIM multiplied by 100.
    #[arg(long)]
    percent: bool,
}

#[derive(Args, Debug)]
#[command(after_help = config_help())]
struct BenchArgs {
    /// key = value config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    hr_dir: Option<PathBuf>,
    #[arg(long)]
    gt_dir: Option<PathBuf>,
    /// Ground-truth / external file stem, e.g. `{stem}x{factor}`.
    #[arg(long)]
    gt_template: Option<String>,
    /// Comma-separated factors, e.g. `2,4,8.75`.
    #[arg(long)]
    factors: Option<String>,
    /// Comma-separated: lsid, box, bicubic, lanczos, external:<dir>.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// CSV report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional Markdown summary with per-method means.
    #[arg(long)]
    markdown: Option<PathBuf>,
}

fn config_help() -> String {
    format!(
        "Config file keys (one `key = value` per line, `#` comments): {}",
        CONFIG_KEYS.join(", ")
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("lsid: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("lsid: {e}");
            return ExitCode::from(1);
        }
    }

    let result = match cli.command {
        Command::Downscale(args) => cmd_downscale(args),
        Command::Cooc(args) => cmd_cooc(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lsid: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}

fn cmd_downscale(args: DownscaleArgs) -> Result<(), Error> {
    let params = LsidParams::new(args.factor).with_alpha(args.alpha).with_k(args.k);
    params.validate()?;
    let method = Method::from(args.method);
    let img = load_image(&args.input)?;

    let start = Instant::now();
    let (out, guide) = match method {
        Method::Lsid => {
            let r = downscale_image_with_guide(&img, &params)?;
            (r.image, Some(r.guide))
        }
        other => (other.run(&img, &params)?, None),
    };
    let elapsed = start.elapsed();
    save_image(&out, &args.output)?;

    if let Some(path) = &args.dump_guide {
        let guide = match guide {
            Some(g) => g,
            None => downscale_box(&img, args.factor)?,
        };
        save_image(&guide, path)?;
    }
    eprintln!(
        "{method}: {}x{} -> {}x{} in {:.1} ms",
        img.width(),
        img.height(),
        out.width(),
        out.height(),
        elapsed.as_secs_f64() * 1e3
    );
    Ok(())
}

/// BT.601 luma, rounded.
fn luma(img: &Raster) -> Plane {
    let data = img
        .data()
        .chunks_exact(3)
        .map(|px| (0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64).round() as u8)
        .collect();
    Plane::new(img.width(), img.height(), data).expect("same dimensions")
}

fn select_channel(img: &Raster, channel: ChannelArg) -> Result<Plane, Error> {
    match (channel, img.channels()) {
        (ChannelArg::Gray, 1) => Ok(img.channel(0)),
        (ChannelArg::Gray, _) => Ok(luma(img)),
        (c, 3) => Ok(img.channel(match c {
            ChannelArg::R => 0,
            ChannelArg::G => 1,
            _ => 2,
        })),
        (c, _) => Err(Error::Config(format!(
            "--channel {c:?} requested but the image is grayscale"
        ))),
    }
}

fn cmd_cooc(args: CoocArgs) -> Result<(), Error> {
    let img = load_image(&args.input)?;
    let plane = select_channel(&img, args.channel)?;
    let profile = compute_profile(&plane, args.k)?;
    let csv = export_heatmap(&profile, &args.heatmap, args.csv.as_deref())?;
    eprintln!(
        "k={}: max count {}, heatmap {}, counts {}",
        profile.k(),
        profile.max_count(),
        args.heatmap.display(),
        csv.display()
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Error> {
    let reference = load_image(&args.reference)?;
    let test = load_image(&args.test)?;
    let p = psnr(&reference, &test)?;
    let s = ssim(&reference, &test)?;
    let p = if p.is_infinite() { "inf".to_string() } else { format!("{p:.4}") };
    let s = if args.percent { s * 100.0 } else { s };
    println!("psnr_db={p} ssim={s:.6}");
    Ok(())
}

fn bench_config(args: &BenchArgs) -> Result<BenchConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => BenchConfig::load(path)?,
        None => BenchConfig::default(),
    };
    let path_str = |p: &Path| p.to_string_lossy().into_owned();
    let overrides = [
        ("hr_dir", args.hr_dir.as_deref().map(path_str)),
        ("gt_dir", args.gt_dir.as_deref().map(path_str)),
        ("gt_template", args.gt_template.clone()),
        ("factors", args.factors.clone()),
        ("methods", args.methods.clone()),
        ("alpha", args.alpha.map(|a| a.to_string())),
        ("k", args.k.map(|k| k.to_string())),
        ("out", args.out.as_deref().map(path_str)),
        ("markdown", args.markdown.as_deref().map(path_str)),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if cfg.hr_dir.as_os_str().is_empty() {
        return Err(Error::Config("hr_dir is required (--hr-dir or config file)".into()));
    }
    Ok(cfg)
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let cfg = bench_config(&args)?;
    let report = bench::run_bench(&cfg)?;
    bench::write_report(&report, &cfg.out)?;
    if let Some(md) = &cfg.markdown {
        bench::write_markdown(&report, md)?;
    }
    let errors = report.rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "{} rows ({errors} with errors) written to {}",
        report.rows.len(),
        cfg.out.display()
    );
    Ok(())
}
