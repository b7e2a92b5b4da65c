use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rgsm_scma_core::codebook::{default_codebook_set, validate};
use rgsm_scma_core::complexity::{Antennas, ComplexityParams, ACTIVE_ANTENNA_SCHEDULE};
use rgsm_scma_core::spatial::{generate_grouping_table, Mode};
use rgsm_scma_sim::codebook_file::{codebook_set_to_string, load_codebook_set, LoadOptions};
use rgsm_scma_sim::config::{parse_snr_grid, DetectorKind, SimConfig, System};
use rgsm_scma_sim::report::{antenna_savings_csv, exco_csv, grouping_table_text, operation_counts_csv};
use rgsm_scma_sim::results::{write_rows, CsvSink, Format, ResultRow};
use rgsm_scma_sim::sweep::run_ber_sweep;
use rgsm_scma_sim::table_file::{grouping_table_to_string, load_grouping_table};
use rgsm_scma_sim::trace::{trace_trial, write_trace};

#[derive(Parser)]
#[command(name = "rgsm-scma", version, about = "Uplink RGSM-SCMA link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep.
    Ber(BerArgs),
    /// Generate or inspect antenna grouping tables.
    #[command(subcommand)]
    Table(TableCommand),
    /// Closed-form operation counts, extra complexity and antenna savings as CSV.
    #[command(subcommand)]
    Complexity(ComplexityCommand),
    /// Generate or validate codebook files.
    #[command(subcommand)]
    Codebook(CodebookCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Sm,
    Gsm,
    Rgsm,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Sm => System::Sm,
            SystemArg::Gsm => System::Gsm,
            SystemArg::Rgsm => System::Rgsm,
        }
    }
}

impl From<SystemArg> for Mode {
    fn from(s: SystemArg) -> Self {
        System::from(s).mode()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorArg {
    Mpa,
    Ml,
    Map,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct BerArgs {
    /// TOML or JSON configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed of the random streams.
    #[arg(long)]
    seed: u64,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Systems to simulate, e.g. `rgsm,gsm,sm`.
    #[arg(long, value_enum, value_delimiter = ',')]
    system: Option<Vec<SystemArg>>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    resources: Option<usize>,
    #[arg(long)]
    codewords: Option<usize>,
    #[arg(long)]
    transmit_antennas: Option<usize>,
    #[arg(long)]
    active_antennas: Option<usize>,
    #[arg(long)]
    receive_antennas: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,
    /// Run message passing in the log domain.
    #[arg(long)]
    log_domain: bool,
    /// SNR grid in dB: `start:step:stop` or `a,b,c`.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    target_errors: Option<u64>,
    /// Trials between stopping checks.
    #[arg(long)]
    batch: Option<u64>,
    /// Codebook file instead of the built-in codebooks.
    #[arg(long)]
    codebook: Option<PathBuf>,
    /// Rescale the codebook file to unit energy.
    #[arg(long)]
    normalize_codebook: bool,
    /// Grouping table file for the system of the same mode.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Scale grouping vectors by 1/sqrt(N_a).
    #[arg(long)]
    normalize_power: bool,
    /// Worker threads (default: all cores). Does not affect results.
    #[arg(long)]
    threads: Option<usize>,
    /// Write MPA message traces of one trial per SNR point as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    trace_trial: u64,
    /// Suppress per-point progress on stderr.
    #[arg(long, short)]
    quiet: bool,
}

impl BerArgs {
    fn config(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::from_file(path)?,
            None => SimConfig::default(),
        };
        if let Some(s) = &self.system {
            cfg.systems = s.iter().map(|&s| s.into()).collect();
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        set!(
            users,
            resources,
            codewords,
            transmit_antennas,
            active_antennas,
            receive_antennas,
            iterations
        );
        set!(max_trials, target_errors, batch);
        if let Some(d) = self.detector {
            cfg.detector = match d {
                DetectorArg::Mpa => DetectorKind::Mpa,
                DetectorArg::Ml => DetectorKind::Ml,
                DetectorArg::Map => DetectorKind::Map,
            };
        }
        if let Some(snr) = &self.snr {
            cfg.snr_db = parse_snr_grid(snr)?;
        }
        if self.codebook.is_some() {
            cfg.codebook_path = self.codebook.clone();
        }
        if self.table.is_some() {
            cfg.table_path = self.table.clone();
        }
        cfg.log_domain |= self.log_domain;
        cfg.normalize_codebook |= self.normalize_codebook;
        cfg.normalize_power |= self.normalize_power;
        cfg.master_seed = Some(self.seed);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn ber(args: BerArgs) -> Result<()> {
    let cfg = args.config()?;
    let setups = cfg.build(args.seed)?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    if let Some(path) = &args.trace {
        if cfg.detector != DetectorKind::Mpa {
            bail!("--trace needs the mpa detector");
        }
        let mut out = output(Some(path))?;
        for setup in &setups {
            for &snr in &cfg.snr_db {
                let states = trace_trial(&setup.experiment, snr, args.trace_trial)?;
                write_trace(&mut out, setup.system, snr, args.trace_trial, &states)?;
            }
        }
        out.flush()?;
    }

    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let mut csv = match format {
        Format::Csv => Some(CsvSink::new(output(args.out.as_ref())?)),
        Format::Json => None,
    };
    let mut rows = Vec::new();
    let quiet = args.quiet;
    run_ber_sweep(&cfg, args.seed, |system, point| {
        let row = ResultRow::new(system, point, args.seed);
        if !quiet {
            eprintln!(
                "{system:>4} {:>7.2} dB  trials {:>9}  errors {:>7}  ber {}",
                point.snr_db,
                point.trials,
                point.bit_errors,
                row.ber.map_or("-".into(), |b| format!("{b:.3e}"))
            );
        }
        if let Some(sink) = csv.as_mut() {
            sink.push(&row)?;
        }
        rows.push(row);
        Ok(())
    })?;
    if format == Format::Json {
        let mut out = output(args.out.as_ref())?;
        write_rows(&rows, &mut out, Format::Json)?;
        out.flush()?;
    }
    Ok(())
}

#[derive(Subcommand)]
enum TableCommand {
    /// Build a table and print it; `--out` also saves it as JSON.
    Gen {
        #[arg(long, default_value_t = 5)]
        transmit: usize,
        #[arg(long, default_value_t = 2)]
        active: usize,
        #[arg(long, value_enum, default_value = "rgsm")]
        mode: SystemArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print JSON instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Load, validate and print a table file.
    Inspect { path: PathBuf },
}

fn table(cmd: TableCommand) -> Result<()> {
    match cmd {
        TableCommand::Gen {
            transmit,
            active,
            mode,
            out,
            json,
        } => {
            let t = generate_grouping_table(transmit, active, mode.into())?;
            if let Some(path) = out {
                std::fs::write(&path, grouping_table_to_string(&t))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if json {
                emit(&grouping_table_to_string(&t))?;
            } else {
                emit(&grouping_table_text(&t))?;
            }
        }
        TableCommand::Inspect { path } => emit(&grouping_table_text(&load_grouping_table(&path)?))?,
    }
    Ok(())
}

#[derive(Args, Clone, Copy)]
struct SystemShape {
    #[arg(long, default_value_t = 6)]
    users: u64,
    #[arg(long, default_value_t = 4)]
    resources: u64,
    #[arg(long, default_value_t = 4)]
    codewords: u64,
    #[arg(long, default_value_t = 2)]
    d_v: u64,
    #[arg(long, default_value_t = 3)]
    d_f: u64,
}

impl SystemShape {
    fn params(self, receive_antennas: u64, iterations: u64) -> ComplexityParams {
        ComplexityParams {
            resources: self.resources,
            d_f: self.d_f,
            d_v: self.d_v,
            users: self.users,
            codewords: self.codewords,
            receive_antennas,
            iterations,
            antennas: Antennas::Sm { transmit: 1 },
        }
    }
}

#[derive(Subcommand)]
enum ComplexityCommand {
    /// Operation counts of the SM and RGSM detectors.
    Ops {
        #[command(flatten)]
        shape: SystemShape,
        #[arg(long, default_value_t = 1)]
        receive_antennas: u64,
        #[arg(long, default_value_t = 2)]
        iterations: u64,
        /// Spatial bits; SM uses 2^eta_s antennas, RGSM 2^eta_s groups.
        #[arg(long, default_value_t = 3)]
        eta_s: u32,
        #[arg(long, default_value_t = 2)]
        active: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extra complexity of RGSM over SM over a grid.
    Exco {
        #[command(flatten)]
        shape: SystemShape,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7")]
        eta_s: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        receive_antennas: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8,9,10")]
        iterations: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transmit antennas SM and RGSM need per number of spatial bits.
    Antennas {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8,9,10")]
        eta_s: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "2,2,3,3,4,4,4,5,5")]
        active: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn complexity(cmd: ComplexityCommand) -> Result<()> {
    let (text, out) = match cmd {
        ComplexityCommand::Ops {
            shape,
            receive_antennas,
            iterations,
            eta_s,
            active,
            out,
        } => (
            operation_counts_csv(shape.params(receive_antennas, iterations), eta_s, active)?,
            out,
        ),
        ComplexityCommand::Exco {
            shape,
            eta_s,
            receive_antennas,
            iterations,
            out,
        } => {
            // N_a follows the antenna-savings schedule, which starts at eta_s = 2
            let active_for = |eta: u32| {
                eta.checked_sub(2)
                    .and_then(|i| ACTIVE_ANTENNA_SCHEDULE.get(i as usize))
                    .map(|&a| a as u64)
                    .ok_or_else(|| rgsm_scma_sim::Error::Config(format!("no active-antenna count for eta_s = {eta}")))
            };
            (
                exco_csv(shape.params(1, 1), &eta_s, active_for, &receive_antennas, &iterations)?,
                out,
            )
        }
        ComplexityCommand::Antennas { eta_s, active, out } => (antenna_savings_csv(&eta_s, &active)?, out),
    };
    let mut w = output(out.as_ref())?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

#[derive(Subcommand)]
enum CodebookCommand {
    /// Write the built-in codebooks as JSON.
    Gen {
        #[arg(long, default_value_t = 6)]
        users: usize,
        #[arg(long, default_value_t = 4)]
        resources: usize,
        #[arg(long, default_value_t = 4)]
        codewords: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a codebook file, check it and print its factor graph.
    Validate {
        path: PathBuf,
        /// Rescale to unit energy instead of rejecting off-energy codebooks.
        #[arg(long)]
        normalize: bool,
    },
}

fn codebook(cmd: CodebookCommand) -> Result<()> {
    match cmd {
        CodebookCommand::Gen {
            users,
            resources,
            codewords,
            out,
        } => {
            let set = default_codebook_set(users, resources, codewords)?;
            let mut w = output(out.as_ref())?;
            w.write_all(codebook_set_to_string(&set).as_bytes())?;
            w.flush()?;
        }
        CodebookCommand::Validate { path, normalize } => {
            let set = load_codebook_set(&path, LoadOptions { normalize })?;
            let graph = validate(&set)?;
            let mut text = format!(
                "U={} R={} M={} d_v={} d_f={}\n",
                set.users(),
                set.resources(),
                set.codewords(),
                graph.d_v().unwrap_or(0),
                graph.d_f().unwrap_or(0)
            );
            for (u, omega) in graph.omega.iter().enumerate() {
                text += &format!("user {u}: resources {omega:?}\n");
            }
            for (r, lambda) in graph.lambda.iter().enumerate() {
                text += &format!("resource {r}: users {lambda:?}\n");
            }
            emit(&text)?;
        }
    }
    Ok(())
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    let result = match Cli::parse().command {
        Command::Ber(args) => ber(args),
        Command::Table(cmd) => table(cmd),
        Command::Complexity(cmd) => complexity(cmd),
        Command::Codebook(cmd) => codebook(cmd),
    };
    match result {
        Err(e)
            if e.downcast_ref::<std::io::Error>().map(std::io::Error::kind) == Some(std::io::ErrorKind::BrokenPipe) =>
        {
            Ok(())
        }
        other => other,
    }
}
