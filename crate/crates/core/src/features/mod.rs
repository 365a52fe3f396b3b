//! Monthly feature assembly, scaling, variable selection and group stats.
//!
//! Each project becomes a [`FeatureSequence`]: one 18-dimensional vector per
//! incubation month, in the frozen [`FEATURE_COLUMNS`] order, plus the
//! graduation label.

mod io;
mod stats;

pub use io::{load_feature_csv, load_manifest, write_feature_csv, write_manifest, ManifestEntry};
pub use stats::{compare_groups, lasso_select, student_t_cdf, LassoConfig, LassoFit};

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Datelike, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::identity::IdentityMap;
use crate::ingest::{CommitRecord, RawMessage};
use crate::networks::{
    author_index, build_social, build_technical, strip_branch_prefix, ClusteringMode,
};
use crate::types::{ContributorId, GradStatus, FEATURE_COLUMNS, NUM_FEATURES};

/// One month of predictors. Field order mirrors [`FEATURE_COLUMNS`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub num_act_devs: f64,
    pub num_commits: f64,
    pub num_emails: f64,
    pub num_files: f64,
    pub c_interruption: f64,
    pub e_interruption: f64,
    pub top_c_fract: f64,
    pub top_e_fract: f64,
    pub c_nodes: f64,
    pub c_edges: f64,
    pub c_c_coef: f64,
    pub c_long_tail: f64,
    pub c_mean_degree: f64,
    pub e_nodes: f64,
    pub e_edges: f64,
    pub e_c_coef: f64,
    pub e_long_tail: f64,
    pub e_mean_degree: f64,
}

impl FeatureVector {
    pub fn as_row(&self) -> [f64; NUM_FEATURES] {
        [
            self.num_act_devs,
            self.num_commits,
            self.num_emails,
            self.num_files,
            self.c_interruption,
            self.e_interruption,
            self.top_c_fract,
            self.top_e_fract,
            self.c_nodes,
            self.c_edges,
            self.c_c_coef,
            self.c_long_tail,
            self.c_mean_degree,
            self.e_nodes,
            self.e_edges,
            self.e_c_coef,
            self.e_long_tail,
            self.e_mean_degree,
        ]
    }

    pub fn from_row(row: &[f64]) -> FeatureVector {
        assert_eq!(row.len(), NUM_FEATURES, "feature row must have 18 columns");
        FeatureVector {
            num_act_devs: row[0],
            num_commits: row[1],
            num_emails: row[2],
            num_files: row[3],
            c_interruption: row[4],
            e_interruption: row[5],
            top_c_fract: row[6],
            top_e_fract: row[7],
            c_nodes: row[8],
            c_edges: row[9],
            c_c_coef: row[10],
            c_long_tail: row[11],
            c_mean_degree: row[12],
            e_nodes: row[13],
            e_edges: row[14],
            e_c_coef: row[15],
            e_long_tail: row[16],
            e_mean_degree: row[17],
        }
    }
}

/// A project's whole incubation as a months x 18 matrix plus outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSequence {
    pub project_id: String,
    pub label: GradStatus,
    pub months: Vec<FeatureVector>,
}

impl FeatureSequence {
    /// Per-feature mean over months: the project-level aggregate used for
    /// variable selection and group comparison.
    pub fn month_means(&self) -> [f64; NUM_FEATURES] {
        let mut sums = [0.0; NUM_FEATURES];
        for month in &self.months {
            for (sum, v) in sums.iter_mut().zip(month.as_row()) {
                *sum += v;
            }
        }
        let n = self.months.len().max(1) as f64;
        sums.iter_mut().for_each(|s| *s /= n);
        sums
    }
}

/// Normalized sum of the three longest gaps between successive events in a
/// window, including the lead-in before the first event and the tail after
/// the last. No events at all counts as total interruption (1.0).
pub fn interruption_score(events: &[DateTime<Utc>], window: (DateTime<Utc>, DateTime<Utc>)) -> f64 {
    let (start, end) = window;
    assert!(end > start, "window must have positive length");
    let span = (end - start).num_seconds() as f64;
    let mut inside: Vec<i64> = events
        .iter()
        .filter(|t| **t >= start && **t <= end)
        .map(|t| t.timestamp())
        .collect();
    if inside.is_empty() {
        return 1.0;
    }
    inside.sort_unstable();

    // Keep the three largest gaps in a single pass.
    let mut top = [0f64; 3];
    let mut push = |gap: f64| {
        if gap > top[0] {
            top = [gap, top[0], top[1]];
        } else if gap > top[1] {
            top = [top[0], gap, top[1]];
        } else if gap > top[2] {
            top[2] = gap;
        }
    };
    push((inside[0] - start.timestamp()) as f64);
    for pair in inside.windows(2) {
        push((pair[1] - pair[0]) as f64);
    }
    push((end.timestamp() - inside[inside.len() - 1]) as f64);
    (top[0] + top[1] + top[2]) / span
}

/// Share of total activity performed by the top 10% most active
/// contributors (k = ceil(0.1 * contributors), so small teams get k = 1).
/// Zero total activity yields 0.
pub fn top_fraction(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return 0.0;
    }
    let k = ((0.10 * counts.len() as f64).ceil() as usize).max(1);
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let top: u64 = sorted.iter().take(k).sum();
    top as f64 / total as f64
}

/// Zero-based month offset of `ts` relative to a calendar-month origin.
fn month_ordinal(ts: DateTime<Utc>) -> i32 {
    ts.year() * 12 + ts.month0() as i32
}

fn month_window(ordinal: i32) -> (DateTime<Utc>, DateTime<Utc>) {
    let start_year = ordinal.div_euclid(12);
    let start_month = ordinal.rem_euclid(12) as u32 + 1;
    let next = ordinal + 1;
    let end_year = next.div_euclid(12);
    let end_month = next.rem_euclid(12) as u32 + 1;
    (
        Utc.with_ymd_and_hms(start_year, start_month, 1, 0, 0, 0)
            .single()
            .expect("valid month start"),
        Utc.with_ymd_and_hms(end_year, end_month, 1, 0, 0, 0)
            .single()
            .expect("valid month end"),
    )
}

/// Knobs for feature assembly. Defaults follow the pipeline's standard
/// definitions; the alternatives exist for sensitivity runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct AssembleOptions {
    pub clustering: ClusteringMode,
    /// Count active developers cumulatively from incubation start instead of
    /// per month.
    pub cumulative_act_devs: bool,
}

/// Assemble the monthly feature sequence for one project from its filtered
/// human emails and source commits. Months run over UTC calendar months
/// from the first to the last activity event. Returns `None` for a project
/// with zero total activity.
pub fn assemble(
    project_id: &str,
    label: GradStatus,
    emails: &[RawMessage],
    commits: &[CommitRecord],
    identities: &IdentityMap,
    options: AssembleOptions,
) -> Option<FeatureSequence> {
    if emails.is_empty() && commits.is_empty() {
        return None;
    }
    let first = emails
        .iter()
        .map(|m| m.timestamp)
        .chain(commits.iter().map(|c| c.timestamp))
        .min()?;
    let last = emails
        .iter()
        .map(|m| m.timestamp)
        .chain(commits.iter().map(|c| c.timestamp))
        .max()?;
    let first_ord = month_ordinal(first);
    let last_ord = month_ordinal(last);

    let mut emails_by_month: BTreeMap<i32, Vec<&RawMessage>> = BTreeMap::new();
    for msg in emails {
        emails_by_month
            .entry(month_ordinal(msg.timestamp))
            .or_default()
            .push(msg);
    }
    let mut commits_by_month: BTreeMap<i32, Vec<&CommitRecord>> = BTreeMap::new();
    for commit in commits {
        commits_by_month
            .entry(month_ordinal(commit.timestamp))
            .or_default()
            .push(commit);
    }
    let authors = author_index(emails, identities);

    let mut months = Vec::with_capacity((last_ord - first_ord + 1) as usize);
    let mut cumulative_devs: BTreeSet<ContributorId> = BTreeSet::new();
    for ordinal in first_ord..=last_ord {
        let window = month_window(ordinal);
        let month_emails = emails_by_month.get(&ordinal).map_or(&[][..], |v| &v[..]);
        let month_commits = commits_by_month.get(&ordinal).map_or(&[][..], |v| &v[..]);

        let mut email_counts: BTreeMap<ContributorId, u64> = BTreeMap::new();
        let mut email_times: Vec<DateTime<Utc>> = Vec::new();
        for msg in month_emails {
            email_times.push(msg.timestamp);
            if let Some(id) = identities.lookup(&msg.sender_name, &msg.sender_email) {
                *email_counts.entry(id).or_insert(0) += 1;
            }
        }
        let mut commit_counts: BTreeMap<ContributorId, u64> = BTreeMap::new();
        let mut commit_times: Vec<DateTime<Utc>> = Vec::new();
        let mut files: BTreeSet<String> = BTreeSet::new();
        for commit in month_commits {
            commit_times.push(commit.timestamp);
            if let Some(id) = identities.lookup(&commit.author_name, &commit.author_email) {
                *commit_counts.entry(id).or_insert(0) += 1;
            }
            for file in &commit.files {
                files.insert(strip_branch_prefix(file).to_string());
            }
        }

        let mut active: BTreeSet<ContributorId> = BTreeSet::new();
        active.extend(email_counts.keys());
        active.extend(commit_counts.keys());
        let num_act_devs = if options.cumulative_act_devs {
            cumulative_devs.extend(active.iter());
            cumulative_devs.len()
        } else {
            active.len()
        };

        let social = build_social(month_emails, &authors, identities);
        let technical = build_technical(month_commits, identities);
        let e_metrics = social.graph.metrics(options.clustering);
        let c_metrics = technical.metrics(options.clustering);

        let commit_count_vec: Vec<u64> = commit_counts.values().copied().collect();
        let email_count_vec: Vec<u64> = email_counts.values().copied().collect();

        months.push(FeatureVector {
            num_act_devs: num_act_devs as f64,
            num_commits: month_commits.len() as f64,
            num_emails: month_emails.len() as f64,
            num_files: files.len() as f64,
            c_interruption: interruption_score(&commit_times, window),
            e_interruption: interruption_score(&email_times, window),
            top_c_fract: top_fraction(&commit_count_vec),
            top_e_fract: top_fraction(&email_count_vec),
            c_nodes: c_metrics.nodes as f64,
            c_edges: c_metrics.edges as f64,
            c_c_coef: c_metrics.clustering_coef,
            c_long_tail: c_metrics.long_tail as f64,
            c_mean_degree: c_metrics.mean_degree,
            e_nodes: e_metrics.nodes as f64,
            e_edges: e_metrics.edges as f64,
            e_c_coef: e_metrics.clustering_coef,
            e_long_tail: e_metrics.long_tail as f64,
            e_mean_degree: e_metrics.mean_degree,
        });
    }

    Some(FeatureSequence {
        project_id: project_id.to_string(),
        label,
        months,
    })
}

/// Interruption over a project's whole incubation window rather than a
/// single month; the per-project figure used in summary reports.
pub fn project_interruption(events: &[DateTime<Utc>], sequence_months: (i32, i32)) -> f64 {
    let (first_ord, last_ord) = sequence_months;
    let start = month_window(first_ord).0;
    let end = month_window(last_ord).1;
    interruption_score(events, (start, end))
}

/// Per-feature min/max learned on training projects only. Transforms clamp
/// to [0, 1], so unseen test values cannot leave the training range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Scaler {
    /// Fit over every month of every training sequence.
    pub fn fit<'a>(training: impl IntoIterator<Item = &'a FeatureSequence>) -> Scaler {
        let mut mins = vec![f64::INFINITY; NUM_FEATURES];
        let mut maxs = vec![f64::NEG_INFINITY; NUM_FEATURES];
        for seq in training {
            for month in &seq.months {
                for (i, v) in month.as_row().iter().enumerate() {
                    mins[i] = mins[i].min(*v);
                    maxs[i] = maxs[i].max(*v);
                }
            }
        }
        for i in 0..NUM_FEATURES {
            if !mins[i].is_finite() {
                mins[i] = 0.0;
                maxs[i] = 0.0;
            }
        }
        Scaler { mins, maxs }
    }

    /// x -> (x - min) / (max - min), clamped; constant features map to 0.
    pub fn transform_row(&self, row: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
        let mut out = [0.0; NUM_FEATURES];
        for i in 0..NUM_FEATURES {
            let range = self.maxs[i] - self.mins[i];
            out[i] = if range > 0.0 {
                ((row[i] - self.mins[i]) / range).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        out
    }

    pub fn transform_sequence(&self, seq: &FeatureSequence) -> FeatureSequence {
        FeatureSequence {
            project_id: seq.project_id.clone(),
            label: seq.label,
            months: seq
                .months
                .iter()
                .map(|m| FeatureVector::from_row(&self.transform_row(&m.as_row())))
                .collect(),
        }
    }

    /// Inverse of `transform_row` for in-range values.
    pub fn inverse_transform_row(&self, row: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
        let mut out = [0.0; NUM_FEATURES];
        for i in 0..NUM_FEATURES {
            let range = self.maxs[i] - self.mins[i];
            out[i] = self.mins[i] + row[i] * range;
        }
        out
    }
}

/// Fit a min-max scaler on training sequences (training projects only, so
/// forecasting unseen projects needs no test-set statistics).
pub fn fit_scaler(training: &[FeatureSequence]) -> Scaler {
    Scaler::fit(training)
}

/// Column names in report order, re-exported for report writers.
pub fn feature_names() -> &'static [&'static str; NUM_FEATURES] {
    &FEATURE_COLUMNS
}
