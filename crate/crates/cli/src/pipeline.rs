//! End-to-end analysis: align measured frames, estimate channel
//! parameters, fit and simulate the candidate models, and compare run
//! distributions.

use thiserror::Error;

use idschan_core::{
    align_frames, baum_welch_multi, binarize, compare, count_mle_segments, estimate_probs,
    fritchman_init, rng_stream, runs_segmented, simulate_dm, simulate_iid, simulate_markov,
    Alphabet, BinaryErrorSequence, ChannelProbEstimate, DmParams, ErrorCategory, FitError,
    FitOptions, FitReport, GofError, GofReport, IidParams, InitialState, InputError, MarkovModel,
    RunDistribution, RunKind, SimulationError, SymbolSequence, SyncErrorSequence,
    TransitionMatrix, ValidationError,
};

// Stream id for synthesized transmit data; keeps these draws independent
// of the simulator streams under a shared seed.
const STREAM_TX: u64 = 101;

/// Uniform random symbols, used as transmit data for comparison streams.
pub fn random_symbols(alphabet: &Alphabet, len: usize, seed: u64) -> SymbolSequence {
    let mut rng = rng_stream(seed, STREAM_TX);
    let q = alphabet.size();
    let data: Vec<u32> = (0..len).map(|_| rng.next_index(q) as u32).collect();
    SymbolSequence::from_indices(alphabet.clone(), data).expect("indices in range")
}

/// Memoryless channel parameters matching pooled event fractions. The
/// channel decides substitution only on transmitted symbols, so the
/// per-event substitution fraction is conditioned on transmission;
/// insertion and deletion fractions carry over directly.
pub fn dm_from_estimate(probs: &ChannelProbEstimate, max_insertions: u32) -> DmParams {
    let p_s_given_t =
        if probs.p_s + probs.p_t > 0.0 { probs.p_s / (probs.p_s + probs.p_t) } else { 0.0 };
    DmParams { p_i: probs.p_i, p_d: probs.p_d, p_s: p_s_given_t, max_insertions }
}

/// Which fitted model backs the "model" comparison stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Fully visible four-state event chain, fitted by transition counts.
    FourState,
    /// Hidden good/bad partition fitted with Baum-Welch on the binarized
    /// category stream.
    Fritchman { n_states: usize, good_count: usize },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub category: ErrorCategory,
    pub widths: Vec<u64>,
    pub significance: f64,
    pub seed: u64,
    pub model: ModelKind,
    /// Insertion cap for the memoryless comparison channel.
    pub max_insertions: u32,
    /// Fold censored trailing runs into the distributions before binning.
    pub include_censored: bool,
    pub fit_max_iters: usize,
    pub fit_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            category: ErrorCategory::AnyError,
            widths: vec![1, 5, 10],
            significance: 0.01,
            seed: 0,
            model: ModelKind::FourState,
            max_insertions: 2,
            include_censored: true,
            fit_max_iters: 200,
            fit_tol: 1e-7,
        }
    }
}

/// The four per-frame-segmented binary streams under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Measured,
    Dm,
    Iid,
    Model,
}

impl Stream {
    pub const ALL: [Stream; 4] = [Stream::Measured, Stream::Dm, Stream::Iid, Stream::Model];

    pub fn name(self) -> &'static str {
        match self {
            Stream::Measured => "measured",
            Stream::Dm => "dm",
            Stream::Iid => "iid",
            Stream::Model => "model",
        }
    }
}

/// A row of the verdict table. The first operand is binned as observed,
/// the second as expected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    IidVsMeasured,
    IidVsDm,
    ModelVsMeasured,
    DmVsMeasured,
}

impl Comparison {
    pub const ALL: [Comparison; 4] = [
        Comparison::IidVsMeasured,
        Comparison::IidVsDm,
        Comparison::ModelVsMeasured,
        Comparison::DmVsMeasured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Comparison::IidVsMeasured => "iid-vs-measured",
            Comparison::IidVsDm => "iid-vs-dm",
            Comparison::ModelVsMeasured => "model-vs-measured",
            Comparison::DmVsMeasured => "dm-vs-measured",
        }
    }

    /// (observed, expected)
    pub fn operands(self) -> (Stream, Stream) {
        match self {
            Comparison::IidVsMeasured => (Stream::Iid, Stream::Measured),
            Comparison::IidVsDm => (Stream::Iid, Stream::Dm),
            Comparison::ModelVsMeasured => (Stream::Model, Stream::Measured),
            Comparison::DmVsMeasured => (Stream::Dm, Stream::Measured),
        }
    }
}

/// Outcome of one comparison at one width. A stream without complete runs
/// (or whose partner has none) cannot be tested and is marked rather than
/// failing the whole analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum GofOutcome {
    Tested(GofReport),
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GofRow {
    pub comparison: Comparison,
    pub run_kind: RunKind,
    pub width: u64,
    pub outcome: GofOutcome,
}

/// Error-free and error run distributions of one stream.
#[derive(Debug, Clone)]
pub struct StreamRuns {
    pub efr: RunDistribution,
    pub er: RunDistribution,
}

impl StreamRuns {
    pub fn get(&self, kind: RunKind) -> &RunDistribution {
        match kind {
            RunKind::ErrorFree => &self.efr,
            RunKind::Error => &self.er,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSet {
    pub measured: StreamRuns,
    pub dm: StreamRuns,
    pub iid: StreamRuns,
    pub model: StreamRuns,
}

impl RunSet {
    pub fn get(&self, stream: Stream, kind: RunKind) -> &RunDistribution {
        match stream {
            Stream::Measured => self.measured.get(kind),
            Stream::Dm => self.dm.get(kind),
            Stream::Iid => self.iid.get(kind),
            Stream::Model => self.model.get(kind),
        }
    }
}

/// Everything the pipeline produced: pooled probabilities, the simulation
/// parameters derived from them, fitted models, run distributions and the
/// verdict table.
#[derive(Debug, Clone)]
pub struct AnalysisBundle {
    pub category: ErrorCategory,
    pub significance: f64,
    pub frame_count: usize,
    pub probs: ChannelProbEstimate,
    pub dm_params: DmParams,
    pub iid_params: IidParams,
    pub four_state: TransitionMatrix,
    pub fit: Option<FitReport>,
    pub runs: RunSet,
    pub gof: Vec<GofRow>,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no frames to analyse")]
    NoFrames,
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("alignment failed: {0}")]
    Align(InputError),
    #[error("estimation failed: {0}")]
    Estimate(InputError),
    #[error("simulation failed: {0}")]
    Simulate(InputError),
    #[error("model walk failed: {0}")]
    Walk(SimulationError),
    #[error("model fit failed: {0}")]
    Fit(FitError),
    #[error("model construction failed: {0}")]
    Model(ValidationError),
}

impl PipelineError {
    /// True when the failure is the caller's input rather than the
    /// analysis itself.
    pub fn is_input(&self) -> bool {
        matches!(self, PipelineError::NoFrames | PipelineError::BadConfig(_) | PipelineError::Align(_))
    }
}

fn validate_config(config: &RunConfig) -> Result<(), PipelineError> {
    let bad = |msg: String| Err(PipelineError::BadConfig(msg));
    if config.widths.is_empty() {
        return bad("no bin widths given".into());
    }
    if let Some(&w) = config.widths.iter().find(|&&w| w == 0) {
        return bad(format!("bin width must be positive, got {w}"));
    }
    if !config.significance.is_finite() || config.significance <= 0.0 || config.significance >= 1.0 {
        return bad(format!("significance must lie in (0, 1), got {}", config.significance));
    }
    if config.fit_max_iters == 0 {
        return bad("fit_max_iters must be positive".into());
    }
    if !(config.fit_tol.is_finite() && config.fit_tol > 0.0) {
        return bad(format!("fit_tol must be positive, got {}", config.fit_tol));
    }
    if let ModelKind::Fritchman { n_states, good_count } = config.model {
        if good_count == 0 || good_count >= n_states {
            return bad(format!("good/bad partition {good_count}/{n_states} is invalid"));
        }
    }
    Ok(())
}

/// Per-frame seed; the purpose-specific stream ids keep draws for
/// different uses independent even under the same frame seed.
fn frame_seed(seed: u64, frame: usize) -> u64 {
    seed.wrapping_add(frame as u64)
}

fn model_stream(
    config: &RunConfig,
    segments: &[SyncErrorSequence],
    measured_bits: &[BinaryErrorSequence],
    four_state: &TransitionMatrix,
) -> Result<(Vec<BinaryErrorSequence>, Option<FitReport>), PipelineError> {
    match config.model {
        ModelKind::FourState => {
            let model = MarkovModel::ids(four_state.clone()).map_err(PipelineError::Model)?;
            let mut bits = Vec::with_capacity(segments.len());
            for (f, seg) in segments.iter().enumerate() {
                if seg.is_empty() {
                    bits.push(BinaryErrorSequence::default());
                    continue;
                }
                // Start each simulated frame where the measured frame
                // started.
                let first = seg.states()[0].index();
                let emission =
                    simulate_markov(&model, seg.len(), InitialState::Fixed(first), frame_seed(config.seed, f))
                        .map_err(PipelineError::Walk)?;
                let path = emission.as_sync().expect("event-labelled model");
                bits.push(binarize(path, config.category));
            }
            Ok((bits, None))
        }
        ModelKind::Fritchman { n_states, good_count } => {
            let init = fritchman_init(n_states, good_count, config.seed).map_err(PipelineError::Model)?;
            // Frames shorter than two bits carry no transition evidence.
            let obs: Vec<Vec<usize>> = measured_bits
                .iter()
                .filter(|b| b.len() >= 2)
                .map(|b| b.bits().iter().map(|&x| x as usize).collect())
                .collect();
            if obs.is_empty() {
                return Err(PipelineError::Fit(FitError::EmptyObservation));
            }
            let opts = FitOptions {
                max_iters: config.fit_max_iters,
                tol: config.fit_tol,
                fit_emission: false,
            };
            let fit = baum_welch_multi(&init, &obs, &opts).map_err(PipelineError::Fit)?;
            let mut bits = Vec::with_capacity(measured_bits.len());
            for (f, mb) in measured_bits.iter().enumerate() {
                if mb.is_empty() {
                    bits.push(BinaryErrorSequence::default());
                    continue;
                }
                let emission =
                    simulate_markov(&fit.model, mb.len(), InitialState::Stationary, frame_seed(config.seed, f))
                        .map_err(PipelineError::Walk)?;
                bits.push(emission.as_binary().cloned().expect("partitioned model"));
            }
            Ok((bits, Some(fit)))
        }
    }
}

/// Full analysis over ingested frames. Deterministic: identical frames and
/// config produce an identical bundle.
pub fn run_pipeline(
    frames: &[(SymbolSequence, SymbolSequence)],
    config: &RunConfig,
) -> Result<AnalysisBundle, PipelineError> {
    validate_config(config)?;
    if frames.is_empty() {
        return Err(PipelineError::NoFrames);
    }

    let (results, pooled) = align_frames(frames).map_err(PipelineError::Align)?;
    let segments: Vec<SyncErrorSequence> = results.into_iter().map(|r| r.path).collect();
    let probs = estimate_probs(&pooled).map_err(PipelineError::Estimate)?;
    let four_state = count_mle_segments(&segments).map_err(PipelineError::Estimate)?;

    let dm_params = dm_from_estimate(&probs, config.max_insertions);

    let measured_bits: Vec<BinaryErrorSequence> =
        segments.iter().map(|s| binarize(s, config.category)).collect();
    let total_bits: u64 = measured_bits.iter().map(|b| b.len() as u64).sum();
    let total_ones: u64 = measured_bits.iter().map(|b| b.ones()).sum();
    let iid_params = IidParams {
        p_e: if total_bits > 0 { total_ones as f64 / total_bits as f64 } else { 0.0 },
    };

    // Comparison streams mirror the measured data frame for frame: the
    // memoryless channel re-sends each frame's tx length, the others
    // reproduce each frame's event count.
    let alphabet = frames[0].0.alphabet().clone();
    let mut dm_bits = Vec::with_capacity(frames.len());
    for (f, (tx, _)) in frames.iter().enumerate() {
        let fseed = frame_seed(config.seed, f);
        let sim_tx = random_symbols(&alphabet, tx.len(), fseed);
        let out = simulate_dm(&sim_tx, &dm_params, fseed).map_err(PipelineError::Simulate)?;
        dm_bits.push(binarize(&out.truth, config.category));
    }

    let mut iid_bits = Vec::with_capacity(measured_bits.len());
    for (f, mb) in measured_bits.iter().enumerate() {
        let sim = simulate_iid(mb.len(), &iid_params, frame_seed(config.seed, f))
            .map_err(PipelineError::Simulate)?;
        iid_bits.push(sim);
    }

    let (model_bits, fit) = model_stream(config, &segments, &measured_bits, &four_state)?;

    let build = |bits: &[BinaryErrorSequence]| {
        let mk = |kind| {
            let d = runs_segmented(bits, kind);
            if config.include_censored {
                d.with_censored_included()
            } else {
                d
            }
        };
        StreamRuns { efr: mk(RunKind::ErrorFree), er: mk(RunKind::Error) }
    };
    let runs = RunSet {
        measured: build(&measured_bits),
        dm: build(&dm_bits),
        iid: build(&iid_bits),
        model: build(&model_bits),
    };

    let mut gof = Vec::with_capacity(Comparison::ALL.len() * 2 * config.widths.len());
    for comparison in Comparison::ALL {
        let (obs, exp) = comparison.operands();
        for kind in RunKind::ALL {
            for &width in &config.widths {
                let outcome = match compare(runs.get(obs, kind), runs.get(exp, kind), width, config.significance)
                {
                    Ok(report) => GofOutcome::Tested(report),
                    Err(GofError::EmptyObserved) => GofOutcome::Inconclusive(format!(
                        "no complete {} runs in {} stream",
                        kind.short_name(),
                        obs.name()
                    )),
                    Err(GofError::EmptyExpected) => GofOutcome::Inconclusive(format!(
                        "no complete {} runs in {} stream",
                        kind.short_name(),
                        exp.name()
                    )),
                    Err(GofError::ZeroExpectedBin { bin }) => GofOutcome::Inconclusive(format!(
                        "{} stream has no expected mass in bin {bin}",
                        exp.name()
                    )),
                    // Widths and significance were validated up front.
                    Err(err) => return Err(PipelineError::BadConfig(err.to_string())),
                };
                gof.push(GofRow { comparison, run_kind: kind, width, outcome });
            }
        }
    }

    Ok(AnalysisBundle {
        category: config.category,
        significance: config.significance,
        frame_count: frames.len(),
        probs,
        dm_params,
        iid_params,
        four_state,
        fit,
        runs,
        gof,
    })
}
