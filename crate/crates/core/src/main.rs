use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use asmcap_core::cam::{
    distinguishable_states, energy_per_search, read_array_image, search, write_array_image, ArrayImage, EnergyScope,
    MatchMode,
};
use asmcap_core::config::RunConfig;
use asmcap_core::eval::{
    build_reads, read_f1_points, sweep_noise, write_sweep_csv, DatasetSpec, EvalReport, Evaluator,
};
use asmcap_core::genome::{
    load_fasta, read_reads_file, segment_reference, synthesize_genome, write_fasta, write_reads_file, EditKind,
    GenomeStore, ReadSet, Sequence,
};
use asmcap_core::oracle::{edit, hamming};
use asmcap_core::plot::render_f1_svg;
use asmcap_core::Error;

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "asmcap", version, about = "Capacitive CAM approximate string matching simulator")]
struct Cli {
    /// Config file of `section.key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Extra `section.key=value` override; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Cmd {
    /// Build reference, array image and reads from a FASTA file or a synthetic genome.
    Gen(GenArgs),
    /// Build an array image from a FASTA reference.
    Store(StoreArgs),
    /// Search one read against an array image.
    Search(SearchArgs),
    /// Evaluate strategies and write an F1 report.
    Eval(EvalArgs),
    /// Monte Carlo matchline variance sweep.
    Sweep(SweepArgs),
    /// Closed-form analyses.
    Analyze {
        #[command(subcommand)]
        kind: AnalyzeCmd,
    },
    /// Ground-truth distances between two sequences.
    Oracle {
        #[command(subcommand)]
        kind: OracleCmd,
    },
    /// Render a report CSV as an SVG chart.
    Plot(PlotArgs),
}

#[derive(Args, Default)]
struct DatasetFlags {
    /// Synthetic genome length in bases.
    #[arg(long)]
    synth: Option<usize>,
    /// Reference FASTA file.
    #[arg(long, conflicts_with = "synth")]
    fasta: Option<PathBuf>,
    /// Number of reads.
    #[arg(long)]
    reads: Option<usize>,
    /// A or B.
    #[arg(long)]
    condition: Option<String>,
    #[arg(long)]
    read_length: Option<usize>,
    /// Draw read origins anywhere instead of at row starts.
    #[arg(long)]
    unaligned: bool,
    #[arg(long)]
    e_s: Option<f64>,
    #[arg(long)]
    e_i: Option<f64>,
    #[arg(long)]
    e_d: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    data: DatasetFlags,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StoreArgs {
    #[arg(long)]
    fasta: PathBuf,
    #[arg(long)]
    read_length: Option<usize>,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::EdStar)]
    mode: ModeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "ed_star")]
    EdStar,
    #[value(name = "hd")]
    Hd,
}

impl From<ModeArg> for MatchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::EdStar => MatchMode::EdStar,
            ModeArg::Hd => MatchMode::Hamming,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    image: PathBuf,
    /// Read bases.
    #[arg(long, conflicts_with = "reads")]
    read: Option<String>,
    /// Reads file; use with --index.
    #[arg(long, requires = "index")]
    reads: Option<PathBuf>,
    #[arg(long)]
    index: Option<usize>,
    #[arg(short = 't', long)]
    threshold: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::EdStar)]
    mode: ModeArg,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print every row, not just matches.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Directory holding array.img and reads.tsv from `gen`.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, requires = "reads_file")]
    image: Option<PathBuf>,
    #[arg(long = "reads-file", requires = "image")]
    reads_file: Option<PathBuf>,
    #[command(flatten)]
    dataset: DatasetFlags,
    /// Comma list, e.g. plain_ed_star,hdac,tasr.
    #[arg(long)]
    strategies: Option<String>,
    /// Comma list or inclusive range, e.g. 1..10.
    #[arg(long)]
    thresholds: Option<String>,
    /// ideal, gaussian_formula, montecarlo_caps or gaussian_flat.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    distractors: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    hdac_disable_threshold: Option<f64>,
    #[arg(long)]
    n_rotations: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// left, right or both.
    #[arg(long)]
    direction: Option<String>,
    /// Report CSV path; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma list of sigma/mu values.
    #[arg(long)]
    sigmas: Option<String>,
    /// Comma list of mismatch counts.
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Distinguishable matchline levels for a capacitor spread.
    States {
        #[arg(long)]
        sigma: f64,
    },
    /// Same as `sweep`.
    Variance(SweepArgs),
    /// Search energy per mismatch count.
    Energy {
        /// Comma list; every count 0..=N when absent.
        #[arg(long)]
        nmis: Option<String>,
        #[arg(long)]
        per_array: bool,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    Ed { a: String, b: String },
    Hd { a: String, b: String },
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value = "F1 vs T")]
    title: String,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Internal(_) => EXIT_INTERNAL,
            CliError::Lib(e) => match e {
                Error::InvalidParameter(_) | Error::Config(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Internal(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INTERNAL);
        }
    }
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli)))
        .unwrap_or_else(|_| Err(CliError::Internal("internal error (panic)".into())));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::new();
    if let Some(p) = &cli.config {
        cfg.apply_file(p)?;
    }
    for s in &cli.sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {s:?}")))?;
        cfg.set(k.trim(), v)?;
    }
    Ok(cfg)
}

fn set_opt<T: ToString>(cfg: &mut RunConfig, key: &str, v: &Option<T>) -> CliResult {
    if let Some(v) = v {
        cfg.set(key, &v.to_string())?;
    }
    Ok(())
}

fn apply_dataset_flags(cfg: &mut RunConfig, d: &DatasetFlags) -> CliResult {
    set_opt(cfg, "dataset.synth", &d.synth)?;
    if let Some(f) = &d.fasta {
        cfg.dataset.fasta = Some(f.clone());
        cfg.dataset.synth = None;
    }
    if d.synth.is_some() {
        cfg.dataset.fasta = None;
    }
    set_opt(cfg, "dataset.reads", &d.reads)?;
    set_opt(cfg, "dataset.condition", &d.condition)?;
    set_opt(cfg, "dataset.read_length", &d.read_length)?;
    if d.unaligned {
        cfg.dataset.aligned = false;
    }
    set_opt(cfg, "errors.e_s", &d.e_s)?;
    set_opt(cfg, "errors.e_i", &d.e_i)?;
    set_opt(cfg, "errors.e_d", &d.e_d)?;
    Ok(())
}

fn run(cli: &Cli) -> CliResult {
    let mut cfg = load_config(cli)?;
    match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(&mut cfg, a),
        Cmd::Store(a) => cmd_store(&cfg, a),
        Cmd::Search(a) => cmd_search(&mut cfg, a),
        Cmd::Eval(a) => cmd_eval(&mut cfg, a),
        Cmd::Sweep(a) => cmd_sweep(&mut cfg, a),
        Cmd::Analyze { kind } => match kind {
            AnalyzeCmd::States { sigma } => {
                match distinguishable_states(*sigma)? {
                    Some(s) => println!("{s}"),
                    None => println!("unbounded"),
                }
                Ok(())
            }
            AnalyzeCmd::Variance(a) => cmd_sweep(&mut cfg, a),
            AnalyzeCmd::Energy { nmis, per_array } => cmd_energy(&cfg, nmis.as_deref(), *per_array),
        },
        Cmd::Oracle { kind } => cmd_oracle(kind),
        Cmd::Plot(a) => {
            let pts = read_f1_points(&a.report)?;
            fs::write(&a.out, render_f1_svg(&pts, &a.title))?;
            info!("wrote {}", a.out.display());
            Ok(())
        }
    }
}

fn reference_store(cfg: &RunConfig) -> CliResult<GenomeStore> {
    let m = cfg.dataset.read_length;
    let reference = match (&cfg.dataset.fasta, cfg.dataset.synth) {
        (Some(path), _) => {
            let load = load_fasta(path)?;
            if load.dropped > 0 {
                log::warn!("dropped {} non-ACGT symbols from {}", load.dropped, path.display());
            }
            load.sequence
        }
        (None, Some(n)) => synthesize_genome(n, cfg.dataset.seed)?,
        (None, None) => return Err(CliError::Usage("no reference given: pass --synth <LEN> or --fasta <PATH>".into())),
    };
    Ok(segment_reference(reference, m)?)
}

fn dataset_spec(cfg: &RunConfig) -> DatasetSpec {
    DatasetSpec {
        condition: cfg.dataset.condition,
        n_reads: cfg.dataset.reads,
        n_rows: 0,
        read_length: cfg.dataset.read_length,
        slack: cfg.dataset.slack,
        aligned: cfg.dataset.aligned,
        seed: cfg.dataset.seed,
    }
}

fn effective_config_text(cfg: &RunConfig) -> String {
    format!("# config_hash = {}\n{}", cfg.hash(), cfg.to_text())
}

fn cmd_gen(cfg: &mut RunConfig, a: &GenArgs) -> CliResult {
    apply_dataset_flags(cfg, &a.data)?;
    set_opt(cfg, "dataset.seed", &a.seed)?;
    if let Some(o) = &a.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    let store = reference_store(cfg)?;
    let reads = build_reads(&store, cfg.dataset.condition_label(), cfg.dataset.error_profile(), &dataset_spec(cfg))?;
    let image = ArrayImage::from_store(&store, cfg.array).with_defaults(MatchMode::EdStar, cfg.noise);

    let dir = &cfg.out_dir;
    fs::create_dir_all(dir)?;
    let mut fa = Vec::new();
    write_fasta(&mut fa, "reference", store.reference(), 80)?;
    fs::write(dir.join("reference.fa"), &fa)?;
    write_array_image(dir.join("array.img"), &image)?;
    write_reads_file(dir.join("reads.tsv"), &reads)?;
    fs::write(dir.join("gen.config"), effective_config_text(cfg).as_bytes())?;

    let count = |k| reads.reads.iter().map(|r| r.count(k)).sum::<usize>();
    let mut out = io::stdout().lock();
    writeln!(out, "segments\t{}", store.len())?;
    writeln!(out, "reads\t{}", reads.reads.len())?;
    writeln!(out, "substitutions\t{}", count(EditKind::Sub))?;
    writeln!(out, "insertions\t{}", count(EditKind::Ins))?;
    writeln!(out, "deletions\t{}", count(EditKind::Del))?;
    writeln!(out, "config_hash\t{}", cfg.hash())?;
    Ok(())
}

fn cmd_store(cfg: &RunConfig, a: &StoreArgs) -> CliResult {
    let m = a.read_length.unwrap_or(cfg.dataset.read_length);
    let load = load_fasta(&a.fasta)?;
    let store = segment_reference(load.sequence, m)?;
    let image = ArrayImage::from_store(&store, cfg.array).with_defaults(a.mode.into(), cfg.noise);
    write_array_image(&a.out, &image)?;
    println!("rows\t{}", image.len());
    println!("arrays\t{}", image.config().arrays_for(image.len()));
    Ok(())
}

fn parse_seq(s: &str) -> CliResult<Sequence> {
    s.parse::<Sequence>().map_err(CliError::from)
}

fn cmd_search(cfg: &mut RunConfig, a: &SearchArgs) -> CliResult {
    set_opt(cfg, "noise.mode", &a.noise)?;
    set_opt(cfg, "eval.seed", &a.seed)?;
    let image = read_array_image(&a.image)?;
    let (read, read_id) = match (&a.read, &a.reads, a.index) {
        (Some(r), _, _) => (parse_seq(r)?, 0u64),
        (None, Some(path), Some(i)) => {
            let set = read_reads_file(path, image.segments())?;
            let rec = set
                .reads
                .get(i)
                .ok_or(Error::IndexOutOfRange { index: i, len: set.reads.len() })?;
            (rec.read.clone(), i as u64)
        }
        _ => return Err(CliError::Usage("search needs --read <BASES> or --reads <FILE> --index <I>".into())),
    };
    let outcomes = search(&image, &read, a.threshold, a.mode.into(), &cfg.noise, cfg.eval.seed, read_id)?;
    let mut out = io::stdout().lock();
    writeln!(out, "row,offset,n_mis,v_ml,match")?;
    for o in outcomes.iter().filter(|o| a.all || o.decision) {
        writeln!(
            out,
            "{},{},{},{:.9},{}",
            o.row,
            image.segments()[o.row].offset,
            o.n_mis,
            o.v_ml,
            u8::from(o.decision)
        )?;
    }
    Ok(())
}

fn load_eval_data(cfg: &RunConfig, a: &EvalArgs) -> CliResult<(ArrayImage, ReadSet)> {
    let paths = match (&a.data, &a.image, &a.reads_file) {
        (Some(d), None, None) => Some((d.join("array.img"), d.join("reads.tsv"))),
        (None, Some(i), Some(r)) => Some((i.clone(), r.clone())),
        (None, None, None) => None,
        _ => return Err(CliError::Usage("use either --data <DIR> or --image with --reads-file".into())),
    };
    match paths {
        Some((img, reads)) => {
            let image = read_array_image(&img)?;
            let set = read_reads_file(&reads, image.segments())?;
            Ok((image, set))
        }
        None => {
            if cfg.dataset.synth.is_none() && cfg.dataset.fasta.is_none() {
                return Err(CliError::Usage(
                    "no dataset: pass --data <DIR>, --image/--reads-file, --synth <LEN> or --fasta <PATH>".into(),
                ));
            }
            let store = reference_store(cfg)?;
            let set = build_reads(&store, cfg.dataset.condition_label(), cfg.dataset.error_profile(), &dataset_spec(cfg))?;
            Ok((ArrayImage::from_store(&store, cfg.array), set))
        }
    }
}

fn cmd_eval(cfg: &mut RunConfig, a: &EvalArgs) -> CliResult {
    apply_dataset_flags(cfg, &a.dataset)?;
    set_opt(cfg, "eval.strategies", &a.strategies)?;
    set_opt(cfg, "eval.thresholds", &a.thresholds)?;
    set_opt(cfg, "noise.mode", &a.noise)?;
    set_opt(cfg, "noise.sigma_over_mu", &a.sigma)?;
    if let Some(s) = a.seed {
        cfg.eval.seed = s;
        cfg.dataset.seed = s;
    }
    set_opt(cfg, "eval.distractors", &a.distractors)?;
    set_opt(cfg, "hdac.alpha", &a.alpha)?;
    set_opt(cfg, "hdac.beta", &a.beta)?;
    set_opt(cfg, "hdac.disable_threshold", &a.hdac_disable_threshold)?;
    set_opt(cfg, "tasr.n_rotations", &a.n_rotations)?;
    set_opt(cfg, "tasr.gamma", &a.gamma)?;
    set_opt(cfg, "tasr.direction", &a.direction)?;
    cfg.validate()?;

    let (image, reads) = load_eval_data(cfg, a)?;
    let plan = cfg.eval_plan();
    let ev = Evaluator::new(&image, &reads, &plan)?;
    info!(
        "evaluating {} reads x {} rows, tasr lower bound {:?}, config {}",
        reads.reads.len(),
        image.len(),
        ev.lower_bound(),
        cfg.hash()
    );
    let report = ev.run()?;
    match &a.out {
        Some(path) => {
            report.write_csv(path)?;
            fs::write(sidecar(path, "config"), effective_config_text(cfg).as_bytes())?;
            fs::write(sidecar(path, "fired.csv"), fired_csv(&report).as_bytes())?;
            info!("wrote {}", path.display());
        }
        None => io::stdout().lock().write_all(report.to_csv().as_bytes())?,
    }
    Ok(())
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn fired_csv(report: &EvalReport) -> String {
    let mut s = String::from("condition,strategy,T,fired\n");
    for r in &report.rows {
        s.push_str(&format!("{},{},{},{}\n", r.condition, r.strategy, r.t, r.fired));
    }
    s
}

fn cmd_sweep(cfg: &mut RunConfig, a: &SweepArgs) -> CliResult {
    set_opt(cfg, "sweep.sigmas", &a.sigmas)?;
    set_opt(cfg, "sweep.points", &a.points)?;
    set_opt(cfg, "sweep.trials", &a.trials)?;
    set_opt(cfg, "sweep.seed", &a.seed)?;
    if cfg.sweep.trials < 1000 {
        return Err(CliError::Usage(format!("--trials must be >= 1000, got {}", cfg.sweep.trials)));
    }
    let rows = sweep_noise(&cfg.sweep.sigmas, &cfg.sweep.points, cfg.sweep.trials, cfg.sweep.seed, &cfg.array)?;
    let csv = write_sweep_csv(&rows);
    match &a.out {
        Some(p) => {
            fs::write(p, csv.as_bytes())?;
            fs::write(sidecar(p, "config"), effective_config_text(cfg).as_bytes())?;
        }
        None => io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn cmd_energy(cfg: &RunConfig, nmis: Option<&str>, per_array: bool) -> CliResult {
    let points: Vec<usize> = match nmis {
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| CliError::Usage(format!("bad --nmis entry {x:?}"))))
            .collect::<CliResult<_>>()?,
        None => (0..=cfg.array.cols).collect(),
    };
    let scope = if per_array { EnergyScope::PerArray } else { EnergyScope::PerRow };
    let mut out = io::stdout().lock();
    writeln!(out, "n_mis,N,energy_joules")?;
    for n in points {
        let e = energy_per_search(n, &cfg.array, &cfg.noise, scope)?;
        writeln!(out, "{n},{},{:.6e}", cfg.array.cols, e.joules_per_search)?;
    }
    Ok(())
}

fn cmd_oracle(kind: &OracleCmd) -> CliResult {
    let (d, name) = match kind {
        OracleCmd::Ed { a, b } => (edit(parse_seq(a)?.bases(), parse_seq(b)?.bases()), "ed"),
        OracleCmd::Hd { a, b } => (hamming(parse_seq(a)?.bases(), parse_seq(b)?.bases())?, "hd"),
    };
    info!("{name} computed");
    println!("{}", d.value);
    Ok(())
}
