use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use texnoise::filter::{adaptive_filter, distort, residual};
use texnoise::io::{read_mask, read_raster, write_raster};
use texnoise::noise::{identify_samples, NoiseEstimate};
use texnoise::pipeline::config::parse_recon_filter;
use texnoise::pipeline::synthetic::NoiseChoice;
use texnoise::pipeline::{generate_synthetic, run_assessment, RunConfig, SyntheticSpec, TextureKind};
use texnoise::raster::{extract_roi, Raster, RoiSpec};
use texnoise::recon::{forward_project, roundtrip, ScanGeometry};
use texnoise::texture::{extract, Method};
use texnoise::Error;

/// Noise susceptibility of texture measures in CT-like images.
#[derive(Parser, Debug)]
#[command(name = "texnoise", version, arg_required_else_help = true)]
struct Cli {
    /// Run configuration file (flat `key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct ReconArgs {
    /// Number of projection angles over 180 degrees.
    #[arg(long, value_name = "N")]
    recon_angles: Option<usize>,

    /// Reconstruction filter: ramp, shepp-logan, hamming or none.
    #[arg(long, value_name = "NAME")]
    recon_filter: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct NoiseArgs {
    /// Noise variance; estimated from --roi when omitted.
    #[arg(long, value_name = "VAR")]
    noise_variance: Option<f64>,

    /// Background ROI used to estimate the noise, as `x,y,side`.
    #[arg(long, value_name = "X,Y,SIDE", value_parser = parse_roi)]
    roi: Option<(usize, usize, usize)>,

    /// Body mask excluded from noise estimation (nonzero = body).
    #[arg(long, value_name = "PATH")]
    mask: Option<PathBuf>,

    /// Local window side (odd).
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus with a manifest and a run config.
    Synth {
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Number of cases.
        #[arg(long, default_value_t = 56)]
        cases: usize,
        /// Image side in pixels.
        #[arg(long, default_value_t = 128)]
        side: usize,
        /// Tumour texture: mrf, fbm or blend.
        #[arg(long, default_value = "blend")]
        texture: String,
        /// Noise family: mixed, gaussian, rayleigh or erlang.
        #[arg(long, default_value = "mixed")]
        noise: String,
        /// Standard deviation of the tumour texture in grey levels.
        #[arg(long)]
        texture_contrast: Option<f64>,
        /// Noise mean range as `lo,hi`.
        #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
        noise_mean: Option<(f64, f64)>,
        /// Noise variance range as `lo,hi`.
        #[arg(long, value_name = "LO,HI", value_parser = parse_range)]
        noise_variance: Option<(f64, f64)>,
    },
    /// Identify the noise family in a background region.
    EstimateNoise {
        image: PathBuf,
        /// Background ROI as `x,y,side`; the whole image when omitted.
        #[arg(long, value_name = "X,Y,SIDE", value_parser = parse_roi)]
        roi: Option<(usize, usize, usize)>,
        /// Body mask excluded from the sample (nonzero = body).
        #[arg(long, value_name = "PATH")]
        mask: Option<PathBuf>,
        /// Histogram bins.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Adaptive local noise reduction.
    Filter {
        image: PathBuf,
        /// Output image (.pgm, or .p2f/.txt for a float grid).
        #[arg(long, short, value_name = "PATH")]
        out: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Also write the noise residual `original - clean`.
        #[arg(long, value_name = "PATH")]
        residual: Option<PathBuf>,
    },
    /// Add the filter residual back to the original (doubling the noise).
    Distort {
        image: PathBuf,
        #[arg(long, short, value_name = "PATH")]
        out: PathBuf,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Simulate a parallel-beam scan and reconstruct by filtered backprojection.
    Recon {
        image: PathBuf,
        #[arg(long, short, value_name = "PATH")]
        out: PathBuf,
        #[command(flatten)]
        recon: ReconArgs,
        /// Also write the sinogram, one row per angle.
        #[arg(long, value_name = "PATH")]
        sinogram: Option<PathBuf>,
    },
    /// Extract texture features from an ROI as CSV rows.
    Features {
        image: PathBuf,
        /// Method name (GMRF, FD, CM, RLM, ACF, GF, WP) or `all`.
        #[arg(long, default_value = "all")]
        method: String,
        /// Tumour ROI as `x,y,side`.
        #[arg(long, value_name = "X,Y,SIDE", value_parser = parse_roi)]
        roi: (usize, usize, usize),
        /// Case identifier column; defaults to the file stem.
        #[arg(long)]
        case_id: Option<String>,
        /// Version column.
        #[arg(long, default_value = "original")]
        version: String,
        /// Print the CSV header first.
        #[arg(long)]
        header: bool,
    },
    /// Run the full assessment over a manifest.
    Assess {
        /// Manifest CSV; overrides the configured one.
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        /// Output directory; overrides the configured one.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        recon: ReconArgs,
    },
    /// Print the separability tables of a finished run.
    Report {
        /// Run output directory; defaults to the configured one.
        #[arg(long, value_name = "DIR")]
        dir: Option<PathBuf>,
    },
}

fn parse_roi(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y, side] => {
            let p = |v: &str| v.parse::<usize>().map_err(|_| format!("invalid ROI component {v:?}"));
            Ok((p(x)?, p(y)?, p(side)?))
        }
        _ => Err(format!("expected x,y,side, got {s:?}")),
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("invalid number {v:?}"));
    Ok((p(a)?, p(b)?))
}

/// Failure that maps to an exit code.
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult = Result<(), Failure>;

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn apply_recon(cfg: &mut RunConfig, args: &ReconArgs) -> CliResult {
    if let Some(n) = args.recon_angles {
        cfg.recon_angles = n;
    }
    if let Some(f) = &args.recon_filter {
        cfg.recon_filter = parse_recon_filter(f).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn roi_sample(img: &Raster, roi: Option<(usize, usize, usize)>, mask: Option<&Path>) -> Result<Vec<f64>, Failure> {
    let (x0, y0, side_w, side_h) = match roi {
        Some((x, y, s)) => {
            extract_roi(img, &RoiSpec::background(x, y, s)?)?;
            (x, y, s, s)
        }
        None => (0, 0, img.width(), img.height()),
    };
    let mask = match mask {
        Some(p) => {
            let m = read_mask(p)?;
            if m.len() != img.len() {
                return Err(Error::format(p, "mask size differs from the image").into());
            }
            Some(m)
        }
        None => None,
    };
    let mut out = Vec::new();
    for y in y0..y0 + side_h {
        for x in x0..x0 + side_w {
            if !mask.as_ref().is_some_and(|m| m[y * img.width() + x]) {
                out.push(img.get(x, y));
            }
        }
    }
    Ok(out)
}

fn noise_variance(img: &Raster, args: &NoiseArgs, cfg: &RunConfig) -> Result<f64, Failure> {
    if let Some(v) = args.noise_variance {
        return Ok(v);
    }
    if args.roi.is_none() {
        return Err(Failure::Usage("either --noise-variance or --roi is required".into()));
    }
    let sample = roi_sample(img, args.roi, args.mask.as_deref())?;
    Ok(identify_samples(&sample, cfg.noise_bins)?.sigma2)
}

fn clean_image(img: &Raster, args: &NoiseArgs, cfg: &RunConfig) -> Result<Raster, Failure> {
    let mut fc = cfg.filter_config(noise_variance(img, args, cfg)?);
    if let Some(w) = args.window {
        fc.window = w;
    }
    Ok(adaptive_filter(img, &fc)?)
}

fn run(cli: Cli) -> CliResult {
    let mut cfg = load_config(&cli)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Synth {
            out: dir,
            cases,
            side,
            texture,
            noise,
            texture_contrast,
            noise_mean,
            noise_variance,
        } => {
            let defaults = SyntheticSpec::default();
            let spec = SyntheticSpec {
                n_cases: cases,
                side,
                texture_kind: texture.parse::<TextureKind>().map_err(|e| Failure::Usage(e.to_string()))?,
                noise: noise.parse::<NoiseChoice>().map_err(|e| Failure::Usage(e.to_string()))?,
                texture_contrast: texture_contrast.unwrap_or(defaults.texture_contrast),
                noise_mean: noise_mean.unwrap_or(defaults.noise_mean),
                noise_variance: noise_variance.unwrap_or(defaults.noise_variance),
                seed: cfg.seed,
                ..defaults
            };
            let entries = generate_synthetic(&spec, &dir)?;
            let run_cfg = RunConfig {
                manifest: PathBuf::from("manifest.csv"),
                output_dir: PathBuf::from("results"),
                ..cfg
            };
            let cfg_path = dir.join("run.cfg");
            std::fs::write(&cfg_path, run_cfg.to_text()).map_err(|e| Error::io(&cfg_path, e))?;
            writeln!(out, "wrote {} cases to {}", entries.len(), dir.display()).ok();
            writeln!(out, "config: {}", cfg_path.display()).ok();
        }
        Command::EstimateNoise { image, roi, mask, bins } => {
            let img = read_raster(&image)?;
            let sample = roi_sample(&img, roi, mask.as_deref())?;
            let mut est: NoiseEstimate = identify_samples(&sample, bins.unwrap_or(cfg.noise_bins))?;
            if let Some((x, y, s)) = roi {
                est.source_roi = Some(RoiSpec::background(x, y, s)?);
            }
            write!(out, "{est}").ok();
        }
        Command::Filter {
            image,
            out: path,
            noise,
            residual: res_path,
        } => {
            let img = read_raster(&image)?;
            let clean = clean_image(&img, &noise, &cfg)?;
            write_raster(&path, &clean)?;
            if let Some(p) = res_path {
                write_raster(&p, &residual(&img, &clean)?)?;
            }
        }
        Command::Distort { image, out: path, noise } => {
            let img = read_raster(&image)?;
            let clean = clean_image(&img, &noise, &cfg)?;
            let eta = residual(&img, &clean)?;
            write_raster(&path, &distort(&img, &eta)?)?;
        }
        Command::Recon {
            image,
            out: path,
            recon,
            sinogram,
        } => {
            apply_recon(&mut cfg, &recon)?;
            let img = read_raster(&image)?;
            let n = img.width().max(img.height());
            let geom = ScanGeometry::covering(n, cfg.recon_angles, cfg.detector_spacing);
            if let Some(p) = sinogram {
                if img.width() != img.height() {
                    return Err(Failure::Usage("--sinogram needs a square image".into()));
                }
                write_raster(&p, &forward_project(&img, &geom)?.to_raster())?;
            }
            let rec = match cfg.recon_filter {
                Some(f) => roundtrip(&img, &geom, f)?,
                None => img,
            };
            write_raster(&path, &rec)?;
        }
        Command::Features {
            image,
            method,
            roi,
            case_id,
            version,
            header,
        } => {
            let methods: Vec<Method> = if method.eq_ignore_ascii_case("all") {
                Method::ALL.to_vec()
            } else {
                vec![method.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?]
            };
            let img = read_raster(&image)?;
            let spec = RoiSpec::tumour(roi.0, roi.1, roi.2)?;
            let patch = extract_roi(&img, &spec)?;
            let id = case_id.unwrap_or_else(|| {
                image.file_stem().map_or("case".into(), |s| s.to_string_lossy().into_owned())
            });
            if header {
                writeln!(out, "{}", texnoise::texture::FEATURE_CSV_HEADER).ok();
            }
            for m in methods {
                for row in extract(m, &patch, &cfg.texture)?.csv_rows(&id, &version) {
                    writeln!(out, "{row}").ok();
                }
            }
        }
        Command::Assess {
            manifest,
            out: dir,
            threads,
            recon,
        } => {
            apply_recon(&mut cfg, &recon)?;
            if let Some(m) = manifest {
                cfg.manifest = m;
            }
            if let Some(d) = dir {
                cfg.output_dir = d;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let result = run_assessment(&cfg)?;
            writeln!(
                out,
                "assessed {} cases ({} skipped); reports in {}",
                result.cases.len(),
                result.failures.len(),
                cfg.output_dir.display()
            )
            .ok();
            for f in &result.failures {
                eprintln!("skipped {}: {}", f.case_id, f.message);
            }
            write!(out, "{}", result.report.separability_csv()).ok();
        }
        Command::Report { dir } => {
            let dir = dir.unwrap_or(cfg.output_dir);
            for name in ["separability.csv", "ranking.csv"] {
                let p = dir.join(name);
                let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                writeln!(out, "== {name}").ok();
                print_table(&mut out, &text);
            }
        }
    }
    Ok(())
}

fn print_table(out: &mut impl std::io::Write, csv: &str) {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.len()).max().unwrap_or(0))
        .collect();
    for r in &rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        writeln!(out, "{}", line.join("  ").trim_end()).ok();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
