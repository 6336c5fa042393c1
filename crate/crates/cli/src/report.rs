//! Report writers. Every writer is a pure function of its inputs so the
//! emitted bytes are identical across runs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use idschan_core::{ChannelProbEstimate, RunDistribution, RunKind, TransitionMatrix};

use crate::pipeline::{AnalysisBundle, GofOutcome, Stream};

pub const FOUR_STATE_LABELS: [&str; 4] = ["t", "s", "d", "i"];

/// Rounds to 4 significant figures so serialized probabilities print
/// compactly.
pub fn round_sig4(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 3.0 - x.abs().log10().floor();
    let factor = 10f64.powf(scale);
    (x * factor).round() / factor
}

/// Probability in matrix-display style: 4 decimals down to 1e-3, scientific
/// with 4 significant figures below, bare zero for zero.
pub fn fmt_prob(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.abs() >= 1e-3 {
        format!("{x:.4}")
    } else {
        format!("{x:.3e}")
    }
}

/// Run distribution CSV: one row per observed length plus an explicit zero
/// row one past the largest.
pub fn runs_csv(dist: &RunDistribution) -> String {
    let mut out = String::from("m,count_exact,count_at_least,survival\n");
    let mut max_m = 0;
    for (&m, &count) in dist.complete_counts() {
        let at_least = dist.count_at_least(m);
        let survival = dist.survival(m);
        out.push_str(&format!("{m},{count},{at_least},{survival}\n"));
        max_m = m;
    }
    out.push_str(&format!("{},0,0,0\n", max_m + 1));
    out
}

/// One verdict-table row ready for serialization.
pub struct GofLine<'a> {
    pub comparison: &'a str,
    pub run_kind: &'a str,
    pub width: u64,
    pub outcome: &'a GofOutcome,
}

pub fn gof_csv(lines: &[GofLine]) -> String {
    let mut out = String::from("comparison,run_kind,bin_width,chi2,p_value,df,verdict,mse,k,note\n");
    for line in lines {
        match line.outcome {
            GofOutcome::Tested(r) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},\n",
                line.comparison,
                line.run_kind,
                line.width,
                r.chi2,
                round_sig4(r.p_value),
                r.df,
                r.verdict.as_str(),
                r.mse,
                r.k
            )),
            GofOutcome::Inconclusive(note) => out.push_str(&format!(
                "{},{},{},,,,inconclusive,,,{}\n",
                line.comparison, line.run_kind, line.width, note
            )),
        }
    }
    out
}

#[derive(Serialize)]
struct GofLineJson<'a> {
    comparison: &'a str,
    run_kind: &'a str,
    bin_width: u64,
    chi2: Option<f64>,
    p_value: Option<f64>,
    df: Option<u64>,
    verdict: &'a str,
    mse: Option<f64>,
    k: Option<usize>,
    note: &'a str,
}

pub fn gof_json(lines: &[GofLine]) -> String {
    let rows: Vec<GofLineJson> = lines
        .iter()
        .map(|line| match line.outcome {
            GofOutcome::Tested(r) => GofLineJson {
                comparison: line.comparison,
                run_kind: line.run_kind,
                bin_width: line.width,
                chi2: Some(r.chi2),
                p_value: Some(round_sig4(r.p_value)),
                df: Some(r.df),
                verdict: r.verdict.as_str(),
                mse: Some(r.mse),
                k: Some(r.k),
                note: "",
            },
            GofOutcome::Inconclusive(note) => GofLineJson {
                comparison: line.comparison,
                run_kind: line.run_kind,
                bin_width: line.width,
                chi2: None,
                p_value: None,
                df: None,
                verdict: "inconclusive",
                mse: None,
                k: None,
                note,
            },
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("rows serialize");
    text.push('\n');
    text
}

#[derive(Serialize, Deserialize, Default)]
pub struct MatrixFlags {
    pub unobserved_rows: Vec<usize>,
}

/// Transition matrix interchange form. Field names are fixed.
#[derive(Serialize, Deserialize)]
pub struct MatrixJson {
    pub order: Vec<String>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(default)]
    pub flags: MatrixFlags,
}

pub fn matrix_to_json(matrix: &TransitionMatrix, labels: &[&str]) -> MatrixJson {
    let n = matrix.n_states();
    MatrixJson {
        order: labels.iter().map(|s| s.to_string()).collect(),
        a: (0..n).map(|i| matrix.row(i).to_vec()).collect(),
        flags: MatrixFlags { unobserved_rows: matrix.unobserved_rows() },
    }
}

pub fn matrix_json_text(matrix: &TransitionMatrix, labels: &[&str]) -> String {
    let mut text = serde_json::to_string_pretty(&matrix_to_json(matrix, labels)).expect("matrix serializes");
    text.push('\n');
    text
}

/// Directed graph of the chain. Every nonzero transition becomes an edge
/// labelled with 4 decimal places; states without outgoing edges stay
/// isolated nodes.
pub fn matrix_dot(matrix: &TransitionMatrix, labels: &[&str]) -> String {
    let n = matrix.n_states();
    let mut out = String::from("digraph model {\n  rankdir=LR;\n");
    for (i, label) in labels.iter().enumerate().take(n) {
        out.push_str(&format!("  s{i} [label=\"{label}\"];\n"));
    }
    for i in 0..n {
        for j in 0..n {
            let p = matrix.get(i, j);
            if p > 0.0 {
                out.push_str(&format!("  s{i} -> s{j} [label=\"{p:.4}\"];\n"));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Matrix as a labelled grid for heatmap plotting.
pub fn matrix_heatmap_csv(matrix: &TransitionMatrix, labels: &[&str]) -> String {
    let n = matrix.n_states();
    let mut out = String::new();
    out.push(',');
    out.push_str(&labels[..n].join(","));
    out.push('\n');
    for (i, label) in labels.iter().enumerate().take(n) {
        out.push_str(label);
        for j in 0..n {
            out.push(',');
            out.push_str(&fmt_prob(matrix.get(i, j)));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ProbsJson {
    p_t: f64,
    p_s: f64,
    p_d: f64,
    p_i: f64,
    counts: [u64; 4],
    total_states: u64,
}

pub fn probs_json(est: &ChannelProbEstimate) -> String {
    let row = ProbsJson {
        p_t: round_sig4(est.p_t),
        p_s: round_sig4(est.p_s),
        p_d: round_sig4(est.p_d),
        p_i: round_sig4(est.p_i),
        counts: est.counts,
        total_states: est.total,
    };
    let mut text = serde_json::to_string_pretty(&row).expect("probs serialize");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct DmJson {
    p_i: f64,
    p_d: f64,
    p_s: f64,
    max_insertions: u32,
}

#[derive(Serialize)]
struct IidJson {
    p_e: f64,
}

#[derive(Serialize)]
struct BundleProbsJson {
    category: &'static str,
    p_t: f64,
    p_s: f64,
    p_d: f64,
    p_i: f64,
    counts: [u64; 4],
    total_states: u64,
    dm: DmJson,
    iid: IidJson,
}

pub fn bundle_probs_json(bundle: &AnalysisBundle) -> String {
    let row = BundleProbsJson {
        category: bundle.category.cli_name(),
        p_t: round_sig4(bundle.probs.p_t),
        p_s: round_sig4(bundle.probs.p_s),
        p_d: round_sig4(bundle.probs.p_d),
        p_i: round_sig4(bundle.probs.p_i),
        counts: bundle.probs.counts,
        total_states: bundle.probs.total,
        dm: DmJson {
            p_i: round_sig4(bundle.dm_params.p_i),
            p_d: round_sig4(bundle.dm_params.p_d),
            p_s: round_sig4(bundle.dm_params.p_s),
            max_insertions: bundle.dm_params.max_insertions,
        },
        iid: IidJson { p_e: round_sig4(bundle.iid_params.p_e) },
    };
    let mut text = serde_json::to_string_pretty(&row).expect("probs serialize");
    text.push('\n');
    text
}

#[derive(Serialize)]
struct FitJson {
    model: MatrixJson,
    good_count: Option<usize>,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

pub fn fit_json(fit: &idschan_core::FitReport) -> String {
    let labels: Vec<&str> = fit.model.labels().iter().map(|l| l.as_str()).collect();
    let row = FitJson {
        model: matrix_to_json(fit.model.transition(), &labels),
        good_count: fit.model.good_count(),
        log_likelihood: fit.log_likelihood,
        iterations: fit.iterations,
        converged: fit.converged,
        trace: fit.trace.clone(),
    };
    let mut text = serde_json::to_string_pretty(&row).expect("fit serializes");
    text.push('\n');
    text
}

/// Writes the full report set for one analysis into `dir` and returns the
/// paths written. Output depends only on the bundle.
pub fn emit_reports(dir: &Path, bundle: &AnalysisBundle) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let put = |name: String, contents: String, written: &mut Vec<PathBuf>| -> std::io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };

    put("probs.json".into(), bundle_probs_json(bundle), &mut written)?;
    for stream in Stream::ALL {
        for kind in RunKind::ALL {
            let name = format!("runs_{}_{}.csv", stream.name(), kind.short_name());
            put(name, runs_csv(bundle.runs.get(stream, kind)), &mut written)?;
        }
    }

    let lines: Vec<GofLine> = bundle
        .gof
        .iter()
        .map(|row| GofLine {
            comparison: row.comparison.name(),
            run_kind: row.run_kind.short_name(),
            width: row.width,
            outcome: &row.outcome,
        })
        .collect();
    put("gof.csv".into(), gof_csv(&lines), &mut written)?;
    put("gof.json".into(), gof_json(&lines), &mut written)?;

    put("matrix.json".into(), matrix_json_text(&bundle.four_state, &FOUR_STATE_LABELS), &mut written)?;
    put("model.dot".into(), matrix_dot(&bundle.four_state, &FOUR_STATE_LABELS), &mut written)?;
    put(
        "heatmap.csv".into(),
        matrix_heatmap_csv(&bundle.four_state, &FOUR_STATE_LABELS),
        &mut written,
    )?;

    if let Some(fit) = &bundle.fit {
        put("fit.json".into(), fit_json(fit), &mut written)?;
    }
    Ok(written)
}
