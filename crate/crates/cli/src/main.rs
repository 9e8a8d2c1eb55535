//! `jtcsim` command-line frontend.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use jtcsim::HardwareConfig;

use commands::INVALID;
use report::{Format, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "jtcsim", version, about = "Joint-transform-correlator CNN accelerator simulator")]
struct Cli {
    /// Hardware config: a preset (cg, ng) or a TOML file.
    #[arg(long, global = true, default_value = "cg")]
    config: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for report files (`<command>.json` plus CSV tables).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tiled 1D convolution against the sliding-window reference.
    ConvCheck(ConvCheckArgs),
    /// Network throughput, power and efficiency.
    Perf(PerfArgs),
    /// Dump a simulated correlator output plane.
    JtcDemo(JtcDemoArgs),
    /// Layer output error across temporal accumulation depths.
    FidelitySweep(FidelityArgs),
    /// Input broadcasting versus channel parallelization.
    Optimize(OptimizeArgs),
    /// Floorplan area, or a PFCU-count sweep under an area budget.
    Area(AreaArgs),
    /// Peak power breakdown.
    Power(PowerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PaddingArg {
    None,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Direct,
    Jtc,
}

#[derive(Args, Debug)]
pub struct ConvCheckArgs {
    /// Image side length.
    #[arg(long, default_value_t = 8)]
    pub size: usize,
    /// Kernel side length.
    #[arg(long, default_value_t = 3)]
    pub kernel: usize,
    #[arg(long, default_value_t = 80)]
    pub n_conv: usize,
    #[arg(long, value_enum, default_value_t = PaddingArg::Zero)]
    pub padding: PaddingArg,
    #[arg(long, value_enum, default_value_t = Backend::Direct)]
    pub backend: Backend,
    /// Draw small integers instead of uniform reals.
    #[arg(long)]
    pub integers: bool,
}

#[derive(Args, Debug)]
pub struct PerfArgs {
    /// Builtin network name, network TOML file, or `all`. Repeatable.
    #[arg(long, default_value = "vgg16")]
    pub network: Vec<String>,
    /// Report the optimization ladder instead of one configuration.
    #[arg(long)]
    pub ladder: bool,
    /// Add the nonlinear-material rung to the ladder.
    #[arg(long)]
    pub nonlinear: bool,
    /// Input broadcasting factor; optimized when omitted.
    #[arg(long)]
    pub ib: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    /// One impulse each in signal and kernel.
    Impulses,
    /// A row-tiled 256-sample input.
    Tiled256,
    /// Impulses whose two cross terms land on the same plane sample.
    Overlap,
}

#[derive(Args, Debug)]
pub struct JtcDemoArgs {
    #[arg(long, value_enum, default_value_t = Demo::Impulses)]
    pub demo: Demo,
    /// Signal samples (comma or whitespace separated).
    #[arg(long)]
    pub signal: Option<PathBuf>,
    /// Kernel samples.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    /// Plane size; automatic when omitted.
    #[arg(long)]
    pub plane: Option<usize>,
    #[arg(long)]
    pub offset_s: Option<usize>,
    #[arg(long)]
    pub offset_k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectionArg {
    Linear,
    Square,
    SquareDifference,
}

#[derive(Args, Debug)]
pub struct FidelityArgs {
    #[arg(long, default_value_t = 8)]
    pub size: usize,
    #[arg(long, default_value_t = 3)]
    pub kernel: usize,
    #[arg(long, default_value_t = 32)]
    pub in_channels: usize,
    #[arg(long, default_value_t = 2)]
    pub out_channels: usize,
    /// Number of random layers.
    #[arg(long, default_value_t = 100)]
    pub layers: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub depths: Vec<usize>,
    #[arg(long)]
    pub act_bits: Option<u32>,
    #[arg(long)]
    pub weight_bits: Option<u32>,
    #[arg(long)]
    pub adc_bits: Option<u32>,
    /// Detector SNR in dB; noiseless when omitted.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long, value_enum, default_value_t = DetectionArg::Linear)]
    pub detection: DetectionArg,
    /// 1D correlator size; the config's `n_i` when omitted.
    #[arg(long)]
    pub n_conv: Option<usize>,
    /// Exit 1 unless the error is non-increasing in depth.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n_pfcu: Option<usize>,
    #[arg(long)]
    pub n_ta: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AreaArgs {
    /// Sweep PFCU counts, giving each the most waveguides that fit.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 100.0)]
    pub budget_mm2: f64,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64")]
    pub pfcu_counts: Vec<usize>,
    /// Networks scored in the sweep.
    #[arg(long, default_value = "all")]
    pub network: Vec<String>,
}

#[derive(Args, Debug)]
pub struct PowerArgs {
    /// The single-PFCU machine without any optimization.
    #[arg(long)]
    pub baseline: bool,
    #[arg(long)]
    pub ib: Option<usize>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::ConvCheck(_) => "conv-check",
        Command::Perf(_) => "perf",
        Command::JtcDemo(_) => "jtc-demo",
        Command::FidelitySweep(_) => "fidelity-sweep",
        Command::Optimize(_) => "optimize",
        Command::Area(_) => "area",
        Command::Power(_) => "power",
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let manifest = RunManifest::new(command_name(&cli.command), &cli.config, cli.seed);
    let hw = || HardwareConfig::load(&cli.config);
    let mut report = match &cli.command {
        Command::ConvCheck(a) => commands::conv_check(manifest, a)?,
        Command::Perf(a) => commands::perf(manifest, &hw()?, a)?,
        Command::JtcDemo(a) => commands::jtc_demo(manifest, a)?,
        Command::FidelitySweep(a) => commands::fidelity_sweep(manifest, &hw()?, a)?,
        Command::Optimize(a) => commands::optimize(manifest, &hw()?, a)?,
        Command::Area(a) => commands::area(manifest, &hw()?, a)?,
        Command::Power(a) => commands::power(manifest, &hw()?, a)?,
    };
    if let Some(dir) = &cli.out {
        report.write_to(dir)?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(report.render(cli.format)?.as_bytes())?;
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INVALID as u8)
        }
    }
}
