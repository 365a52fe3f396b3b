use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// The frozen predictor column order. Every feature matrix, checkpoint and
/// explanation file uses exactly this order; loading code rejects anything
/// else. Do not reorder.
pub const FEATURE_COLUMNS: [&str; 18] = [
    "num_act_devs",
    "num_commits",
    "num_emails",
    "num_files",
    "c_interruption",
    "e_interruption",
    "top_c_fract",
    "top_e_fract",
    "c_nodes",
    "c_edges",
    "c_c_coef",
    "c_long_tail",
    "c_mean_degree",
    "e_nodes",
    "e_edges",
    "e_c_coef",
    "e_long_tail",
    "e_mean_degree",
];

pub const NUM_FEATURES: usize = FEATURE_COLUMNS.len();

/// Index of a feature name in [`FEATURE_COLUMNS`], if present.
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_COLUMNS.iter().position(|c| *c == name)
}

/// Stable contributor identifier, dense within one project.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ContributorId(pub u32);

impl std::fmt::Display for ContributorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// What kind of activity an event records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivityKind {
    Email,
    Commit,
}

/// One commit or one email, timestamped and attributed to a resolved
/// contributor. This is the canonical unit the feature stage consumes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActivityEvent {
    pub contributor: ContributorId,
    pub timestamp: DateTime<Utc>,
    pub kind: ActivityKind,
    /// Source files touched; empty for emails.
    pub files: Vec<String>,
    /// Message id for emails; used to resolve reply edges.
    pub message_id: Option<String>,
    /// Message id this email replies to, if any.
    pub in_reply_to: Option<String>,
}

/// Binary sustainability outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradStatus {
    Retired,
    Graduated,
}

impl GradStatus {
    pub fn from_label(v: u8) -> Option<Self> {
        match v {
            0 => Some(GradStatus::Retired),
            1 => Some(GradStatus::Graduated),
            _ => None,
        }
    }

    pub fn as_label(self) -> u8 {
        match self {
            GradStatus::Retired => 0,
            GradStatus::Graduated => 1,
        }
    }
}
