use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use idschan_cli::ingest::{ingest_path, records_to_string, FrameFormat, FrameRecord, IngestOptions, Ingested};
use idschan_cli::pipeline::{
    dm_from_estimate, random_symbols, run_pipeline, GofOutcome, ModelKind, RunConfig,
};
use idschan_cli::report::{
    fit_json, gof_csv, gof_json, matrix_json_text, probs_json, runs_csv, GofLine, MatrixJson,
    FOUR_STATE_LABELS,
};
use idschan_core::{
    align_frames, apply_sync_seq, baum_welch_multi, binarize, compare, count_mle_segments,
    estimate_probs, fritchman_init, simulate_dm, simulate_iid, simulate_markov,
    validate_transition_matrix, Alphabet, BinaryErrorSequence, DmParams, ErrorCategory,
    FitOptions, GofError, IidParams, InitialState, MarkovModel, RunDistribution, RunKind,
    SyncErrorSequence, SyncState,
};

#[derive(Parser)]
#[command(name = "idschan", version, about = "Synchronisation error channel analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Jsonl,
    Tsv,
}

impl From<FormatArg> for FrameFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => FrameFormat::Jsonl,
            FormatArg::Tsv => FrameFormat::Tsv,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CategoryArg {
    AnyError,
    Sync,
    Subst,
    Ins,
    Del,
}

impl From<CategoryArg> for ErrorCategory {
    fn from(c: CategoryArg) -> Self {
        match c {
            CategoryArg::AnyError => ErrorCategory::AnyError,
            CategoryArg::Sync => ErrorCategory::SyncError,
            CategoryArg::Subst => ErrorCategory::Substitution,
            CategoryArg::Ins => ErrorCategory::Insertion,
            CategoryArg::Del => ErrorCategory::Deletion,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Dm,
    Iid,
    Fritchman,
    Markov4,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Efr,
    Er,
}

impl From<KindArg> for RunKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Efr => RunKind::ErrorFree,
            KindArg::Er => RunKind::Error,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Frame file to read
    #[arg(long)]
    input: PathBuf,
    /// Frame file layout
    #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
    format: FormatArg,
    /// Declared symbol alphabet; inferred from the data when omitted
    #[arg(long)]
    alphabet: Option<String>,
    /// Reject frames whose tx length differs from this
    #[arg(long)]
    frame_length: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    /// States of the good/bad model
    #[arg(long, default_value_t = 3)]
    states: usize,
    /// Good states of the good/bad model
    #[arg(long, default_value_t = 2)]
    good_count: usize,
    /// Estimation iteration budget
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Stop when the log-likelihood gain falls below this
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Recover each frame's event path from its tx/rx pair
    Align {
        #[command(flatten)]
        input: InputArgs,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pooled event probabilities of the aligned frames
    Probs {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-frame binary error sequences for one error category
    Binarize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = CategoryArg::AnyError)]
        category: CategoryArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a channel model to the frames
    Fit {
        #[command(flatten)]
        input: InputArgs,
        /// dm and iid read parameters off the aligned data; markov4 counts
        /// visible transitions; fritchman runs hidden-state estimation
        #[arg(long, value_enum, default_value_t = ModelArg::Markov4)]
        model: ModelArg,
        /// Error category for iid and fritchman fits
        #[arg(long, value_enum, default_value_t = CategoryArg::AnyError)]
        category: CategoryArg,
        #[command(flatten)]
        fit: FitArgs,
        /// Insertion cap reported with dm parameters
        #[arg(long, default_value_t = 2)]
        max_insertions: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw frames from a channel model described by a JSON config
    Simulate {
        /// JSON config: {"model": "dm"|"iid"|"markov", "params": {...},
        /// "n": length, "frames": count, "seed": n, "alphabet": "..."}
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Jsonl)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run length distribution of one error category
    Runs {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = CategoryArg::AnyError)]
        category: CategoryArg,
        #[arg(long, value_enum, default_value_t = KindArg::Efr)]
        kind: KindArg,
        /// Drop censored trailing runs instead of counting them
        #[arg(long)]
        exclude_censored: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chi-square comparison of two run distribution CSV files
    Gof {
        /// Observed run distribution
        #[arg(long)]
        observed: PathBuf,
        /// Expected run distribution
        #[arg(long)]
        expected: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        widths: Vec<u64>,
        #[arg(long, default_value_t = 0.01)]
        significance: f64,
        /// Emit JSON instead of CSV
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full analysis: align, estimate, fit, simulate and test
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = CategoryArg::AnyError)]
        category: CategoryArg,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        widths: Vec<u64>,
        #[arg(long, default_value_t = 0.01)]
        significance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comparison model: markov4 or fritchman
        #[arg(long, value_enum, default_value_t = ModelArg::Markov4)]
        model: ModelArg,
        #[command(flatten)]
        fit: FitArgs,
        /// Insertion cap of the memoryless comparison channel
        #[arg(long, default_value_t = 2)]
        max_insertions: u32,
        /// Drop censored trailing runs instead of counting them
        #[arg(long)]
        exclude_censored: bool,
        /// Report directory
        #[arg(long)]
        out: PathBuf,
    },
}

enum AppError {
    Input(String),
    Analysis(String),
}

impl AppError {
    fn input(err: impl ToString) -> Self {
        AppError::Input(err.to_string())
    }

    fn analysis(err: impl ToString) -> Self {
        AppError::Analysis(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Analysis(msg)) => {
            eprintln!("analysis error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(args: &InputArgs) -> Result<Ingested, AppError> {
    let opts = IngestOptions {
        declared_alphabet: args.alphabet.clone(),
        frame_length: args.frame_length,
    };
    ingest_path(&args.input, args.format.into(), &opts)
        .map_err(|e| AppError::Input(format!("{}: {e}", args.input.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), AppError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| AppError::Input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(AppError::input),
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Align { input, out } => {
            let ing = load(&input)?;
            let (results, _) = align_frames(&ing.frames).map_err(AppError::input)?;
            let mut text = String::from("frame_id,cost,path\n");
            for (rec, r) in ing.records.iter().zip(&results) {
                text.push_str(&format!("{},{},{}\n", rec.frame_id, r.cost, r.path.to_text()));
            }
            write_out(out.as_deref(), &text)
        }
        Command::Probs { input, out } => {
            let ing = load(&input)?;
            let (_, pooled) = align_frames(&ing.frames).map_err(AppError::input)?;
            let est = estimate_probs(&pooled).map_err(AppError::input)?;
            write_out(out.as_deref(), &probs_json(&est))
        }
        Command::Binarize { input, category, out } => {
            let ing = load(&input)?;
            let (results, _) = align_frames(&ing.frames).map_err(AppError::input)?;
            let mut text = String::from("frame_id,bits\n");
            for (rec, r) in ing.records.iter().zip(&results) {
                let bits = binarize(&r.path, category.into());
                text.push_str(&format!("{},{}\n", rec.frame_id, bits.to_text()));
            }
            write_out(out.as_deref(), &text)
        }
        Command::Fit { input, model, category, fit, max_insertions, seed, out } => {
            let text = cmd_fit(&input, model, category.into(), &fit, max_insertions, seed)?;
            write_out(out.as_deref(), &text)
        }
        Command::Simulate { config, format, out } => {
            let records = cmd_simulate(&config)?;
            write_out(out.as_deref(), &records_to_string(&records, format.into()))
        }
        Command::Runs { input, category, kind, exclude_censored, out } => {
            let ing = load(&input)?;
            let (results, _) = align_frames(&ing.frames).map_err(AppError::input)?;
            let bits: Vec<BinaryErrorSequence> =
                results.iter().map(|r| binarize(&r.path, category.into())).collect();
            let dist = idschan_core::runs_segmented(&bits, kind.into());
            let dist = if exclude_censored { dist } else { dist.with_censored_included() };
            write_out(out.as_deref(), &runs_csv(&dist))
        }
        Command::Gof { observed, expected, widths, significance, json, out } => {
            let text = cmd_gof(&observed, &expected, &widths, significance, json)?;
            write_out(out.as_deref(), &text)
        }
        Command::Report {
            input,
            category,
            widths,
            significance,
            seed,
            model,
            fit,
            max_insertions,
            exclude_censored,
            out,
        } => {
            let ing = load(&input)?;
            let model = match model {
                ModelArg::Markov4 => ModelKind::FourState,
                ModelArg::Fritchman => {
                    ModelKind::Fritchman { n_states: fit.states, good_count: fit.good_count }
                }
                ModelArg::Dm | ModelArg::Iid => {
                    return Err(AppError::Input(
                        "report compares against a fitted model; use --model markov4 or fritchman"
                            .into(),
                    ))
                }
            };
            let config = RunConfig {
                category: category.into(),
                widths,
                significance,
                seed,
                model,
                max_insertions,
                include_censored: !exclude_censored,
                fit_max_iters: fit.max_iters,
                fit_tol: fit.tol,
            };
            let bundle = run_pipeline(&ing.frames, &config).map_err(|e| {
                if e.is_input() {
                    AppError::input(e)
                } else {
                    AppError::analysis(e)
                }
            })?;
            let written = idschan_cli::report::emit_reports(&out, &bundle)
                .map_err(|e| AppError::Input(format!("cannot write {}: {e}", out.display())))?;
            let mut listing = String::new();
            for path in &written {
                listing.push_str(&format!("{}\n", path.display()));
            }
            write_out(None, &listing)
        }
    }
}

#[derive(Serialize)]
struct DmParamsJson {
    p_i: f64,
    p_d: f64,
    p_s: f64,
    max_insertions: u32,
}

#[derive(Serialize)]
struct IidFitJson {
    category: &'static str,
    p_e: f64,
}

fn cmd_fit(
    input: &InputArgs,
    model: ModelArg,
    category: ErrorCategory,
    fit: &FitArgs,
    max_insertions: u32,
    seed: u64,
) -> Result<String, AppError> {
    let ing = load(input)?;
    let (results, pooled) = align_frames(&ing.frames).map_err(AppError::input)?;
    let segments: Vec<SyncErrorSequence> = results.into_iter().map(|r| r.path).collect();
    match model {
        ModelArg::Markov4 => {
            let matrix = count_mle_segments(&segments).map_err(AppError::analysis)?;
            Ok(matrix_json_text(&matrix, &FOUR_STATE_LABELS))
        }
        ModelArg::Dm => {
            let est = estimate_probs(&pooled).map_err(AppError::input)?;
            let params = dm_from_estimate(&est, max_insertions);
            let row = DmParamsJson {
                p_i: params.p_i,
                p_d: params.p_d,
                p_s: params.p_s,
                max_insertions: params.max_insertions,
            };
            let mut text = serde_json::to_string_pretty(&row).expect("params serialize");
            text.push('\n');
            Ok(text)
        }
        ModelArg::Iid => {
            let bits: Vec<BinaryErrorSequence> =
                segments.iter().map(|s| binarize(s, category)).collect();
            let total: u64 = bits.iter().map(|b| b.len() as u64).sum();
            let ones: u64 = bits.iter().map(|b| b.ones()).sum();
            let p_e = if total > 0 { ones as f64 / total as f64 } else { 0.0 };
            let row = IidFitJson { category: category.cli_name(), p_e };
            let mut text = serde_json::to_string_pretty(&row).expect("params serialize");
            text.push('\n');
            Ok(text)
        }
        ModelArg::Fritchman => {
            let obs: Vec<Vec<usize>> = segments
                .iter()
                .map(|s| binarize(s, category))
                .filter(|b| b.len() >= 2)
                .map(|b| b.bits().iter().map(|&x| x as usize).collect())
                .collect();
            if obs.is_empty() {
                return Err(AppError::Analysis("no frame long enough to fit".into()));
            }
            let init =
                fritchman_init(fit.states, fit.good_count, seed).map_err(AppError::input)?;
            let opts =
                FitOptions { max_iters: fit.max_iters, tol: fit.tol, fit_emission: false };
            let report = baum_welch_multi(&init, &obs, &opts).map_err(AppError::analysis)?;
            Ok(fit_json(&report))
        }
    }
}

fn default_frames() -> usize {
    1
}

#[derive(Deserialize)]
struct SimConfig {
    model: String,
    params: serde_json::Value,
    n: usize,
    #[serde(default = "default_frames")]
    frames: usize,
    seed: u64,
    #[serde(default)]
    alphabet: Option<String>,
}

#[derive(Deserialize)]
struct DmConfigParams {
    p_i: f64,
    p_d: f64,
    p_s: f64,
    max_insertions: u32,
}

#[derive(Deserialize)]
struct IidConfigParams {
    p_e: f64,
}

#[derive(Deserialize)]
struct MarkovConfigParams {
    #[serde(flatten)]
    matrix: MatrixJson,
    #[serde(default)]
    good_count: Option<usize>,
}

/// Turns an error indicator sequence into an event path that realizes each
/// error as a substitution.
fn subst_path(bits: &BinaryErrorSequence) -> SyncErrorSequence {
    SyncErrorSequence::new(
        bits.bits()
            .iter()
            .map(|&b| if b == 1 { SyncState::Substitution } else { SyncState::Transmission })
            .collect(),
    )
}

fn cmd_simulate(config_path: &Path) -> Result<Vec<FrameRecord>, AppError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| AppError::Input(format!("{}: {e}", config_path.display())))?;
    let config: SimConfig = serde_json::from_str(&text)
        .map_err(|e| AppError::Input(format!("{}: {e}", config_path.display())))?;
    if config.frames == 0 {
        return Err(AppError::Input("frames must be positive".into()));
    }
    let alphabet = match &config.alphabet {
        Some(text) => Alphabet::new(text.chars()).map_err(AppError::input)?,
        None => Alphabet::binary(),
    };
    fn params<T: serde::de::DeserializeOwned>(value: serde_json::Value) -> Result<T, AppError> {
        serde_json::from_value(value).map_err(|e| AppError::Input(format!("bad params: {e}")))
    }

    let mut records = Vec::with_capacity(config.frames);
    let mut push = |f: usize, tx: &idschan_core::SymbolSequence, rx: &idschan_core::SymbolSequence| {
        records.push(FrameRecord { frame_id: f as u64, tx: tx.to_text(), rx: rx.to_text() });
    };
    match config.model.as_str() {
        "dm" => {
            let p: DmConfigParams = params(config.params)?;
            let dm = DmParams {
                p_i: p.p_i,
                p_d: p.p_d,
                p_s: p.p_s,
                max_insertions: p.max_insertions,
            };
            dm.validate().map_err(AppError::input)?;
            for f in 0..config.frames {
                let seed = config.seed.wrapping_add(f as u64);
                let tx = random_symbols(&alphabet, config.n, seed);
                let out = simulate_dm(&tx, &dm, seed).map_err(AppError::analysis)?;
                push(f, &tx, &out.received);
            }
        }
        "iid" => {
            let p: IidConfigParams = params(config.params)?;
            let iid = IidParams { p_e: p.p_e };
            iid.validate().map_err(AppError::input)?;
            for f in 0..config.frames {
                let seed = config.seed.wrapping_add(f as u64);
                let bits = simulate_iid(config.n, &iid, seed).map_err(AppError::analysis)?;
                let path = subst_path(&bits);
                let tx = random_symbols(&alphabet, config.n, seed);
                let rx = apply_sync_seq(&tx, &path, seed).map_err(AppError::analysis)?;
                push(f, &tx, &rx);
            }
        }
        "markov" => {
            let p: MarkovConfigParams = params(config.params)?;
            let matrix = validate_transition_matrix(&p.matrix.a, 1e-3).map_err(AppError::input)?;
            if let Some(good_count) = p.good_count {
                let model = MarkovModel::fritchman(matrix, good_count).map_err(AppError::input)?;
                for f in 0..config.frames {
                    let seed = config.seed.wrapping_add(f as u64);
                    let emission = simulate_markov(&model, config.n, InitialState::Fixed(0), seed)
                        .map_err(AppError::analysis)?;
                    let bits = emission.as_binary().expect("partitioned model");
                    let path = subst_path(bits);
                    let tx = random_symbols(&alphabet, config.n, seed);
                    let rx = apply_sync_seq(&tx, &path, seed).map_err(AppError::analysis)?;
                    push(f, &tx, &rx);
                }
            } else {
                if p.matrix.order != FOUR_STATE_LABELS {
                    return Err(AppError::Input(
                        "markov params need good_count or the event state order t,s,d,i".into(),
                    ));
                }
                let model = MarkovModel::ids(matrix).map_err(AppError::input)?;
                for f in 0..config.frames {
                    let seed = config.seed.wrapping_add(f as u64);
                    let emission = simulate_markov(&model, config.n, InitialState::Fixed(0), seed)
                        .map_err(AppError::analysis)?;
                    let path = emission.as_sync().expect("event-labelled model");
                    let [t, s, d, _] = {
                        let mut counts = [0u64; 4];
                        for st in path.states() {
                            counts[st.index()] += 1;
                        }
                        counts
                    };
                    let tx = random_symbols(&alphabet, (t + s + d) as usize, seed);
                    let rx = apply_sync_seq(&tx, path, seed).map_err(AppError::analysis)?;
                    push(f, &tx, &rx);
                }
            }
        }
        other => return Err(AppError::Input(format!("unknown model {other:?}"))),
    }
    Ok(records)
}

fn parse_runs_csv(path: &Path) -> Result<RunDistribution, AppError> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (ix, line) in text.lines().enumerate() {
        let lineno = ix + 1;
        if line.is_empty() || (lineno == 1 && line.starts_with("m,")) {
            continue;
        }
        let mut fields = line.split(',');
        let parse_field = |field: Option<&str>| -> Result<u64, AppError> {
            field
                .map(str::trim)
                .ok_or(())
                .and_then(|s| s.parse().map_err(|_| ()))
                .map_err(|()| {
                    AppError::Input(format!(
                        "{} line {lineno}: expected m,count_exact columns",
                        path.display()
                    ))
                })
        };
        let m = parse_field(fields.next())?;
        let count = parse_field(fields.next())?;
        pairs.push((m, count));
    }
    Ok(RunDistribution::from_counts(pairs))
}

fn cmd_gof(
    observed: &Path,
    expected: &Path,
    widths: &[u64],
    significance: f64,
    json: bool,
) -> Result<String, AppError> {
    if widths.is_empty() || widths.contains(&0) {
        return Err(AppError::Input("bin widths must be positive".into()));
    }
    if !significance.is_finite() || significance <= 0.0 || significance >= 1.0 {
        return Err(AppError::Input(format!("significance must lie in (0, 1), got {significance}")));
    }
    let obs = parse_runs_csv(observed)?;
    let exp = parse_runs_csv(expected)?;
    let outcomes: Vec<(u64, GofOutcome)> = widths
        .iter()
        .map(|&width| {
            let outcome = match compare(&obs, &exp, width, significance) {
                Ok(report) => GofOutcome::Tested(report),
                Err(GofError::EmptyObserved) => {
                    GofOutcome::Inconclusive("no complete runs in observed file".into())
                }
                Err(GofError::EmptyExpected) => {
                    GofOutcome::Inconclusive("no complete runs in expected file".into())
                }
                Err(GofError::ZeroExpectedBin { bin }) => {
                    GofOutcome::Inconclusive(format!("expected file has no mass in bin {bin}"))
                }
                Err(err) => GofOutcome::Inconclusive(err.to_string()),
            };
            (width, outcome)
        })
        .collect();
    let lines: Vec<GofLine> = outcomes
        .iter()
        .map(|(width, outcome)| GofLine {
            comparison: "observed-vs-expected",
            run_kind: "",
            width: *width,
            outcome,
        })
        .collect();
    Ok(if json { gof_json(&lines) } else { gof_csv(&lines) })
}
