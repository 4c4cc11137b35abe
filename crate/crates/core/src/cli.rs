//! The `cimsim` command line.
//!
//! Results go to stdout (or the files named by flags); diagnostics go to
//! stderr. Exit status is 0 on success, 1 when the work failed and 2 for
//! usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dse::{
    summarize, write_plot_data, write_summary_csv, write_timing_csv, CsvSink, Sweep, SweepConfig,
};
use crate::error::{Error, Result};
use crate::mapping::MappingScheme;
use crate::nn::{
    host_inference, load_model, run_inference, BackendOptions, Dataset, EngineOptions,
    InferenceOptions, Layer, QuantizedModel,
};
use crate::xbar::{AdcConfig, CrossbarConfig, Resolution};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "CIMSIM_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "cimsim", version, about = "BNN/TNN inference on simulated RRAM crossbars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a dataset with a model mapped onto a crossbar.
    Infer(InferArgs),
    /// Run a parameter sweep described by a TOML file.
    Sweep(SweepArgs),
    /// Load and validate a model, print its layers and optionally check a dataset.
    VerifyModel(VerifyArgs),
    /// Print cycles, cells per weight and corrections of mapping schemes.
    MappingInfo(MappingInfoArgs),
}

#[derive(Debug, Args)]
struct CrossbarArgs {
    /// Physical rows per cell plane.
    #[arg(long, default_value_t = 256)]
    rows: usize,
    /// Physical columns per cell plane.
    #[arg(long, default_value_t = 256)]
    cols: usize,
    /// HRS read current, µA.
    #[arg(long, default_value_t = 5.0)]
    i_hrs: f64,
    /// LRS read current, µA.
    #[arg(long, default_value_t = 10.0)]
    i_lrs: f64,
    /// Standard deviation of HRS currents, µA.
    #[arg(long, default_value_t = 0.0)]
    sigma_hrs: f64,
    /// Standard deviation of LRS currents, µA.
    #[arg(long, default_value_t = 0.0)]
    sigma_lrs: f64,
    /// ADC resolution in bits, or `inf`.
    #[arg(long, default_value = "inf")]
    adc_bits: Resolution,
    /// ADC clipping factor in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Seed for cell variability.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tile size as `M,N` (outputs, inputs); default: the crossbar size.
    #[arg(long, value_parser = parse_tile)]
    tile: Option<(usize, usize)>,
}

impl CrossbarArgs {
    fn config(&self) -> Result<CrossbarConfig> {
        let cfg = CrossbarConfig {
            rows: self.rows,
            cols: self.cols,
            i_hrs: self.i_hrs,
            i_lrs: self.i_lrs,
            sigma_hrs: self.sigma_hrs,
            sigma_lrs: self.sigma_lrs,
            adc: AdcConfig::new(self.adc_bits, self.alpha)?,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_tile(s: &str) -> std::result::Result<(usize, usize), String> {
    let (m, n) = s
        .split_once(',')
        .ok_or_else(|| format!("expected M,N, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .ok()
            .filter(|&x| x > 0)
            .ok_or_else(|| format!("`{v}` is not a positive integer"))
    };
    Ok((parse(m)?, parse(n)?))
}

#[derive(Debug, Args)]
struct InferArgs {
    /// Model manifest (TOML).
    #[arg(long)]
    model: PathBuf,
    /// Dataset tensor file.
    #[arg(long)]
    dataset: PathBuf,
    /// Mapping scheme, e.g. `bnn-vi` or `tnn-iv+cycles`.
    #[arg(long, default_value = "bnn-vi")]
    mapping: MappingScheme,
    /// Use only the first N samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Run the first dense/conv layer on the host at full precision.
    #[arg(long)]
    host_first_layer: bool,
    /// Also report the exact host-arithmetic accuracy.
    #[arg(long)]
    compare_host: bool,
    /// Worker threads [default: $CIMSIM_WORKERS or all cores].
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    crossbar: CrossbarArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Results CSV. Summary, plot data and timings are written next to it
    /// as `<stem>.summary.csv`, `<stem>.dat` and `<stem>.timing.csv`.
    #[arg(long)]
    output: PathBuf,
    /// Worker threads [default: $CIMSIM_WORKERS or all cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Judge α windows against the exact host accuracy instead of each
    /// curve's `inf`-bit, α = 1 point.
    #[arg(long)]
    host_baseline: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Model manifest (TOML).
    #[arg(long)]
    model: PathBuf,
    /// Optional dataset to check shapes against and score on the host.
    #[arg(long)]
    dataset: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MappingInfoArgs {
    /// Mapping name; all schemes when omitted.
    name: Option<String>,
}

fn workers(flag: Option<usize>) -> Result<usize> {
    if let Some(w) = flag {
        return if w == 0 {
            Err(Error::Config("--workers must be at least 1".into()))
        } else {
            Ok(w)
        };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV}=`{v}` is not a positive integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn write_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Infer(a) => infer(a, out),
        Command::Sweep(a) => sweep(a, out, err),
        Command::VerifyModel(a) => verify_model(a, out),
        Command::MappingInfo(a) => mapping_info(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn in_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn infer(a: InferArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.crossbar.config()?;
    let workers = workers(a.workers)?;
    let model = load_model(&a.model)?;
    let mut dataset = Dataset::load(&a.dataset)?;
    if let Some(n) = a.samples {
        dataset = dataset.take(n);
    }
    if dataset.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no samples", a.dataset.display())));
    }
    let opts = InferenceOptions {
        engine: EngineOptions {
            host_first_layer: a.host_first_layer,
        },
        backend: BackendOptions {
            tile: a.crossbar.tile,
            analog_correction: true,
        },
        parallel: true,
    };
    let report = in_pool(workers, || run_inference(&model, &dataset, a.mapping, &cfg, &opts))??;
    let mut lines = vec![
        ("mapping", a.mapping.name()),
        ("samples", dataset.len().to_string()),
        ("correct", report.correct.to_string()),
        ("accuracy", format!("{:.6}", report.accuracy)),
        ("writes", report.stats.writes.to_string()),
        ("mvms", report.stats.mvms.to_string()),
        ("seed", cfg.seed.to_string()),
    ];
    if a.compare_host {
        let host = in_pool(workers, || host_inference(&model, &dataset, &opts))??;
        lines.push(("host_accuracy", format!("{:.6}", host.accuracy)));
    }
    for (k, v) in lines {
        writeln!(out, "{k:<14}{v}").map_err(write_err)?;
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = SweepConfig::load(&a.config)?;
    let workers = workers(a.workers)?;
    let sweep = Sweep::prepare(cfg)?;
    let mut sink = CsvSink::create(&a.output)?;
    let rows = sweep.run(workers, |row| sink.write(row))?;
    drop(sink);

    let timing = sibling(&a.output, ".timing.csv");
    let file = std::fs::File::create(&timing).map_err(|e| Error::io(&timing, e))?;
    write_timing_csv(&rows, file)?;

    let baseline = if a.host_baseline {
        let model = load_model(&sweep.config().model)?;
        let mut dataset = Dataset::load(&sweep.config().dataset)?;
        if let Some(n) = sweep.config().samples {
            dataset = dataset.take(n);
        }
        let opts = InferenceOptions {
            engine: EngineOptions {
                host_first_layer: sweep.config().host_first_layer,
            },
            ..InferenceOptions::default()
        };
        Some(host_inference(&model, &dataset, &opts)?.accuracy)
    } else {
        None
    };
    let summary = summarize(&rows, baseline)?;
    let summary_path = sibling(&a.output, ".summary.csv");
    let file = std::fs::File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    write_summary_csv(&summary, file)?;
    let plot_path = sibling(&a.output, ".dat");
    let file = std::fs::File::create(&plot_path).map_err(|e| Error::io(&plot_path, e))?;
    write_plot_data(&summary, file)?;

    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    let _ = writeln!(
        err,
        "{} rows ({} points x {} trials) -> {}; {failed} failed",
        rows.len(),
        sweep.points().len(),
        sweep.config().trials,
        a.output.display()
    );
    writeln!(
        out,
        "{:<16}{:<10}{:<10}{:<10}{:<10}{:<10}{:<10}{:<10}",
        "mapping", "adc_bits", "sigma_hrs", "sigma_lrs", "baseline", "alpha_lo", "alpha_hi", "alphas"
    )
    .map_err(write_err)?;
    for w in &summary.windows {
        let (lo, hi) = w
            .interval
            .map_or(("-".into(), "-".into()), |(l, h)| (l.to_string(), h.to_string()));
        writeln!(
            out,
            "{:<16}{:<10}{:<10}{:<10}{:<10.4}{:<10}{:<10}{:<10}",
            w.curve.mapping.name(),
            w.curve.adc_bits.to_string(),
            w.curve.sigma_hrs,
            w.curve.sigma_lrs,
            w.baseline,
            lo,
            hi,
            w.alphas
        )
        .map_err(write_err)?;
    }
    Ok(())
}

fn describe(layer: &Layer) -> String {
    match layer {
        Layer::Dense(d) => format!(
            "{} -> {}, {:?} weights",
            d.weights.cols(),
            d.weights.rows(),
            d.alphabet
        )
        .to_lowercase(),
        Layer::Conv2d(c) => format!(
            "{} filters {}x{}x{}, stride {}, {:?} padding, {:?} weights",
            c.filters, c.kernel.0, c.kernel.1, c.in_channels, c.stride, c.padding, c.alphabet
        )
        .to_lowercase(),
        Layer::MaxPool { size } => format!("{size}x{size}"),
        Layer::Affine { scale, .. } => format!("{} channels", scale.len()),
        Layer::Quantize(q) => format!("{q:?}").to_lowercase(),
        Layer::Flatten => String::new(),
    }
}

fn verify_model(a: VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let model: QuantizedModel = load_model(&a.model)?;
    let shapes = model.validate()?;
    writeln!(out, "input {:?}", model.input_shape).map_err(write_err)?;
    for (i, layer) in model.layers.iter().enumerate() {
        writeln!(
            out,
            "{i:>3}  {:<9}{:<16}{}",
            layer.name(),
            format!("{:?}", shapes[i + 1]),
            describe(layer)
        )
        .map_err(write_err)?;
    }
    if let Some(path) = a.dataset {
        let dataset = Dataset::load(&path)?;
        let report = host_inference(&model, &dataset, &InferenceOptions::default())?;
        writeln!(out, "samples {}", dataset.len()).map_err(write_err)?;
        writeln!(out, "host_accuracy {:.6}", report.accuracy).map_err(write_err)?;
    }
    writeln!(out, "ok").map_err(write_err)?;
    Ok(())
}

fn mapping_info(a: MappingInfoArgs, out: &mut dyn Write) -> Result<()> {
    let schemes = match a.name {
        Some(name) => vec![name.parse::<MappingScheme>()?],
        None => MappingScheme::all(),
    };
    writeln!(
        out,
        "{:<16}{:<8}{:<14}{:<10}{:<12}{:<26}readout scale",
        "mapping", "cycles", "cells/weight", "alphabet", "digital", "analog"
    )
    .map_err(write_err)?;
    for s in schemes {
        let c = s.correction();
        let dash = || "-".to_string();
        writeln!(
            out,
            "{:<16}{:<8}{:<14}{:<10}{:<12}{:<26}{}",
            s.name(),
            s.cycles(),
            s.cells_per_weight(),
            s.alphabet().label(),
            c.digital.map_or_else(dash, |t| t.label(false)),
            c.analog.map_or_else(dash, |t| t.label(true)),
            s.scale_label()
        )
        .map_err(write_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("cimsim").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn mapping_info_rows() {
        let (code, out, _) = call(&["mapping-info", "bnn-i"]);
        assert_eq!(code, 0);
        let row: Vec<&str> = out.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(&row[..3], ["bnn-i", "1", "2"]);

        let (_, out, _) = call(&["mapping-info", "tnn-i+cells"]);
        let row: Vec<&str> = out.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(&row[..3], ["tnn-i+cells", "1", "4"]);

        let (_, out, _) = call(&["mapping-info"]);
        assert_eq!(out.lines().count(), 20);
    }

    #[test]
    fn unknown_mapping_lists_valid_names() {
        let (code, out, err) = call(&["mapping-info", "bnn-vii"]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.contains("bnn-vii") && err.contains("tnn-v+cycles"), "{err}");
    }

    #[test]
    fn unknown_flags_are_usage_errors() {
        let (code, _, err) = call(&["mapping-info", "--frobnicate"]);
        assert_eq!(code, 2);
        assert!(err.contains("--frobnicate"));
    }

    #[test]
    fn missing_model_names_path() {
        let (code, out, err) = call(&[
            "infer",
            "--model",
            "/nonexistent/m.toml",
            "--dataset",
            "/nonexistent/d.bin",
        ]);
        assert_eq!(code, 1);
        assert!(out.is_empty());
        assert!(err.contains("/nonexistent/m.toml"), "{err}");
    }

    #[test]
    fn tile_flag_parses() {
        assert_eq!(parse_tile("8, 16"), Ok((8, 16)));
        assert!(parse_tile("8x16").is_err());
        assert!(parse_tile("0,4").is_err());
    }
}
