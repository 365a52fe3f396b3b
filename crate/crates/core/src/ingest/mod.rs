//! Raw trace ingestion: mailing-list archives (mbox) and commit records.
//!
//! The input side of the pipeline. Archives are parsed into [`RawMessage`]s,
//! commit notifications and commit tables into [`CommitRecord`]s, with the
//! broadcast-bot filter and the non-source-file filter applied before
//! anything reaches the feature stage. Per-record problems are counted in an
//! [`IngestReport`] rather than aborting the run.

mod commits;
mod mbox;

pub use commits::{extract_commits, load_commit_table};
pub use mbox::{parse_mbox, write_mbox};

use std::collections::HashMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// One parsed mailing-list message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMessage {
    pub message_id: String,
    pub in_reply_to: Option<String>,
    pub references: Vec<String>,
    pub sender_name: String,
    pub sender_email: String,
    pub timestamp: DateTime<Utc>,
    pub subject: String,
    pub body: String,
}

/// One commit: author, instant, and the source files it touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub author_name: String,
    pub author_email: String,
    pub timestamp: DateTime<Utc>,
    pub files: Vec<String>,
}

/// Drop/keep tallies for one project's ingestion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub messages_parsed: u64,
    pub messages_dropped_broadcast: u64,
    pub messages_dropped_malformed: u64,
    /// Cross-posted duplicates (same message id seen again): first wins.
    pub messages_dropped_duplicate: u64,
    pub commits_parsed: u64,
    pub commits_dropped_nonsource: u64,
    pub commits_dropped_unparseable: u64,
}

impl IngestReport {
    pub fn merge(&mut self, other: &IngestReport) {
        self.messages_parsed += other.messages_parsed;
        self.messages_dropped_broadcast += other.messages_dropped_broadcast;
        self.messages_dropped_malformed += other.messages_dropped_malformed;
        self.messages_dropped_duplicate += other.messages_dropped_duplicate;
        self.commits_parsed += other.commits_parsed;
        self.commits_dropped_nonsource += other.commits_dropped_nonsource;
        self.commits_dropped_unparseable += other.commits_dropped_unparseable;
    }
}

/// File extensions excluded from the commit stream (data, configuration and
/// image files). Matched case-insensitively against the final dot-suffix
/// only, so `a.tar.jar` is excluded but `notes.txt.java` is kept.
pub const BLACKLISTED_EXTENSIONS: [&str; 14] = [
    "json", "xml", "yml", "yaml", "jar", "config", "info", "ini", "txt", "md", "jpg", "gif",
    "pdf", "png",
];

/// True if the path survives the extension filter.
pub fn is_source_path(path: &str) -> bool {
    let file_name = path.rsplit('/').next().unwrap_or(path);
    match file_name.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() => {
            let ext = ext.to_ascii_lowercase();
            !BLACKLISTED_EXTENSIONS.iter().any(|b| *b == ext)
        }
        _ => true,
    }
}

/// Heuristics identifying automated senders. The corpus spans JIRA, SVN and
/// Git eras, so both the subject prefixes and the sender local-parts are
/// configurable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BotPatterns {
    /// Case-insensitive subject prefixes of tool-generated mail.
    pub subject_prefixes: Vec<String>,
    /// Case-insensitive local parts (before `@`) of automated senders.
    pub sender_local_parts: Vec<String>,
}

impl Default for BotPatterns {
    fn default() -> Self {
        BotPatterns {
            subject_prefixes: vec![
                "svn commit:".into(),
                "[jira]".into(),
                "git commit:".into(),
            ],
            sender_local_parts: vec![
                "jira".into(),
                "buildbot".into(),
                "hudson".into(),
                "jenkins".into(),
                "noreply".into(),
            ],
        }
    }
}

impl BotPatterns {
    /// Does the message look tool-generated, regardless of replies?
    pub fn matches(&self, msg: &RawMessage) -> bool {
        let subject = msg.subject.to_lowercase();
        if self
            .subject_prefixes
            .iter()
            .any(|p| subject.starts_with(&p.to_lowercase()))
        {
            return true;
        }
        let local = msg
            .sender_email
            .split('@')
            .next()
            .unwrap_or("")
            .to_lowercase();
        self.sender_local_parts
            .iter()
            .any(|p| p.to_lowercase() == local)
    }
}

/// Map from message id to the number of replies it received, built over the
/// full archive set of one project before any filtering.
pub fn build_reply_index(messages: &[RawMessage]) -> HashMap<String, u32> {
    let mut index: HashMap<String, u32> = HashMap::new();
    for msg in messages {
        if let Some(parent) = &msg.in_reply_to {
            *index.entry(parent.clone()).or_insert(0) += 1;
        }
    }
    index
}

/// True iff the message is a broadcast from an automated sender that no one
/// replied to. A replied-to message is never classified as a bot broadcast,
/// whatever its sender looks like.
pub fn classify_bot_message(
    msg: &RawMessage,
    reply_index: &HashMap<String, u32>,
    patterns: &BotPatterns,
) -> bool {
    let replies = reply_index.get(&msg.message_id).copied().unwrap_or(0);
    replies == 0 && patterns.matches(msg)
}
