//! CSV and JSON report files for summarizer runs and bandit comparisons.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chatsumm_core::bandit::BanditReport;
use chatsumm_core::extractive::{Step, StepTimings};
use chatsumm_core::metrics::{aggregate, AggregateReport, MetricScores};
use chatsumm_core::transcript::ChannelKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::SummaryRecord;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| ReportError::Io {
            path: parent.to_owned(),
            source,
        })?;
    }
    fs::write(path, bytes).map_err(|source| ReportError::Io {
        path: path.to_owned(),
        source,
    })
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One summarizer line of the channel metric table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummarizerRow {
    pub name: String,
    pub aggregate: AggregateReport,
    pub wall_seconds: f64,
}

pub const SUMMARIZER_HEADER: [&str; 10] = [
    "summarizer",
    "customer_bleu",
    "customer_rouge1",
    "customer_rougeL",
    "customer_punct_accuracy",
    "agent_bleu",
    "agent_rouge1",
    "agent_rougeL",
    "agent_punct_accuracy",
    "total_seconds",
];

/// Per-channel mean BLEU, ROUGE-1 F1, ROUGE-L F1 and punctuation accuracy, one row per summarizer.
pub fn summarizer_table(rows: &[SummarizerRow]) -> Result<String, ReportError> {
    csv_string(
        &SUMMARIZER_HEADER,
        rows.iter().map(|r| {
            let mut out = vec![r.name.clone()];
            for kind in [ChannelKind::Customer, ChannelKind::Agent] {
                match r.aggregate.get(kind) {
                    Some(a) => out.extend([num(a.bleu), num(a.rouge1.f1), num(a.rouge_l.f1), opt(a.punct_accuracy)]),
                    None => out.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            out.push(format!("{:.3}", r.wall_seconds));
            out
        }),
    )
}

/// Aggregates the stored channel scores of summary records.
pub fn aggregate_records(records: &[SummaryRecord]) -> AggregateReport {
    aggregate(records.iter().flat_map(|r| {
        [(ChannelKind::Customer, &r.customer), (ChannelKind::Agent, &r.agent)]
            .into_iter()
            .filter_map(|(k, c)| c.scores.as_ref().map(|s| (k, s)))
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub id: String,
    pub channel: ChannelKind,
    pub scores: MetricScores,
}

pub fn item_table(items: &[ScoredItem]) -> Result<String, ReportError> {
    csv_string(
        &[
            "id",
            "channel",
            "bleu",
            "rouge1_precision",
            "rouge1_recall",
            "rouge1_f1",
            "rougeL_precision",
            "rougeL_recall",
            "rougeL_f1",
            "punct_accuracy",
        ],
        items.iter().map(|i| {
            let s = &i.scores;
            vec![
                i.id.clone(),
                i.channel.as_str().to_string(),
                num(s.bleu),
                num(s.rouge1.precision),
                num(s.rouge1.recall),
                num(s.rouge1.f1),
                num(s.rouge_l.precision),
                num(s.rouge_l.recall),
                num(s.rouge_l.f1),
                opt(s.punct_accuracy),
            ]
        }),
    )
}

/// `(name: pulls + name: pulls + ...)`, summed over `reports`.
pub fn pull_summary(reports: &[&BanditReport]) -> String {
    let Some(first) = reports.first() else {
        return "()".into();
    };
    let mut pulls = vec![0u64; first.arm_names.len()];
    for r in reports {
        for (p, n) in pulls.iter_mut().zip(&r.n_arm) {
            *p += n;
        }
    }
    let parts: Vec<String> = first
        .arm_names
        .iter()
        .zip(&pulls)
        .map(|(name, n)| format!("{name}: {n}"))
        .collect();
    format!("({})", parts.join(" + "))
}

struct PolicySummary<'a> {
    name: &'a str,
    reports: Vec<&'a BanditReport>,
    mean_ams: f64,
}

fn by_policy(reports: &[BanditReport]) -> Vec<PolicySummary<'_>> {
    let mut out: Vec<PolicySummary<'_>> = Vec::new();
    for r in reports {
        let name = r.policy.as_str();
        match out.iter_mut().find(|p| p.name == name) {
            Some(p) => p.reports.push(r),
            None => out.push(PolicySummary {
                name,
                reports: vec![r],
                mean_ams: 0.0,
            }),
        }
    }
    for p in &mut out {
        p.mean_ams = p.reports.iter().map(|r| r.ams).sum::<f64>() / p.reports.len() as f64;
    }
    out
}

pub const BANDIT_HEADER: [&str; 7] = ["policy", "seeds", "mean_ams", "min_ams", "max_ams", "best_arm", "pulls"];

/// One row per policy (AMS over seeds, most frequent best arm, pulls summed over seeds),
/// then a `components` row repeating the pull counts of the policy with the highest mean AMS.
pub fn bandit_table(reports: &[BanditReport]) -> Result<String, ReportError> {
    let groups = by_policy(reports);
    let mut rows: Vec<Vec<String>> = groups
        .iter()
        .map(|g| {
            let ams: Vec<f64> = g.reports.iter().map(|r| r.ams).collect();
            let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
            for r in &g.reports {
                *votes.entry(r.best_arm).or_default() += 1;
            }
            let best = votes
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&a, _)| a)
                .unwrap_or(0);
            vec![
                g.name.to_string(),
                g.reports.len().to_string(),
                num(g.mean_ams),
                num(ams.iter().copied().fold(f64::INFINITY, f64::min)),
                num(ams.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                g.reports[0].arm_names.get(best).cloned().unwrap_or_default(),
                pull_summary(&g.reports),
            ]
        })
        .collect();
    let winner = groups
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.mean_ams.total_cmp(&b.mean_ams).then(j.cmp(i)));
    if let Some((i, g)) = winner {
        let mut last = rows[i].clone();
        last[0] = format!("components:{}", g.name);
        rows.push(last);
    }
    csv_string(&BANDIT_HEADER, rows)
}

pub fn curves_csv(reports: &[BanditReport]) -> Result<String, ReportError> {
    csv_string(
        &["policy", "seed", "round", "arm", "reward", "ams"],
        reports.iter().flat_map(|r| {
            r.trajectory.iter().map(move |p| {
                vec![
                    r.policy.as_str().to_string(),
                    r.seed.to_string(),
                    p.round.to_string(),
                    r.arm_names[p.arm].clone(),
                    num(p.reward),
                    num(p.ams),
                ]
            })
        }),
    )
}

fn seed_tag(seeds: &[u64]) -> String {
    let parts: Vec<String> = seeds.iter().map(u64::to_string).collect();
    format!("seeds{}", parts.join("-"))
}

/// Files written for one bandit comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BanditFiles {
    pub reports: Vec<PathBuf>,
    pub curves: PathBuf,
    pub table: PathBuf,
}

/// One JSON file per report plus the curves CSV and the policy table. Every
/// file name carries `hash` (the short config hash) and the seed(s).
pub fn write_bandit_outputs(
    dir: &Path,
    hash: &str,
    seeds: &[u64],
    reports: &[BanditReport],
) -> Result<BanditFiles, ReportError> {
    let mut paths = Vec::with_capacity(reports.len());
    for r in reports {
        let path = dir.join(format!("bandit_{}_{hash}_seed{}.json", r.policy.as_str(), r.seed));
        let body = serde_json::to_vec_pretty(r).expect("reports serialize");
        write_file(&path, &body)?;
        paths.push(path);
    }
    let tag = seed_tag(seeds);
    let curves = dir.join(format!("curves_{hash}_{tag}.csv"));
    write_file(&curves, curves_csv(reports)?.as_bytes())?;
    let table = dir.join(format!("bandit_table_{hash}_{tag}.csv"));
    write_file(&table, bandit_table(reports)?.as_bytes())?;
    Ok(BanditFiles {
        reports: paths,
        curves,
        table,
    })
}

/// Timing and provenance of one summarization run, kept apart from the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub transcripts: usize,
    pub written: usize,
    pub skipped: usize,
    pub threads: usize,
    pub wall_seconds: f64,
    /// Per-step time summed over transcripts and threads.
    pub step_seconds: BTreeMap<String, f64>,
}

pub fn step_seconds(t: &StepTimings) -> BTreeMap<String, f64> {
    Step::ALL
        .iter()
        .map(|&s| (format!("{:02}_{}", s.number(), s.name()), t.get(s) as f64 / 1e9))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    write_file(path, &serde_json::to_vec_pretty(value).expect("values serialize"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), ReportError> {
    write_file(path, text.as_bytes())
}
