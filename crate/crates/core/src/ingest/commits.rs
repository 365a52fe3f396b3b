//! Commit recovery: bot notification messages and direct CSV exports.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};
use crate::ingest::{is_source_path, CommitRecord, RawMessage};

/// Subject prefixes of the commit-recording bots (case-insensitive).
const NOTIFICATION_PREFIXES: [&str; 2] = ["svn commit:", "git commit:"];

/// Outcome of extracting commits from one message set.
#[derive(Debug, Default, PartialEq)]
pub struct CommitExtraction {
    pub records: Vec<CommitRecord>,
    /// Every path was filtered out, so the record carried no source change.
    pub dropped_nonsource: u64,
    /// Notification body had no recoverable file list.
    pub unparseable: u64,
}

/// True if the message is a commit notification from the recording bot.
pub fn is_commit_notification(msg: &RawMessage) -> bool {
    let subject = msg.subject.to_lowercase();
    NOTIFICATION_PREFIXES
        .iter()
        .any(|p| subject.starts_with(p))
}

/// Parse commit-notification messages into commit records, applying the
/// source-file extension filter. Messages that are not notifications are
/// ignored; notifications without a recoverable path list are counted.
pub fn extract_commits(messages: &[RawMessage]) -> CommitExtraction {
    let mut out = CommitExtraction::default();
    for msg in messages {
        if !is_commit_notification(msg) {
            continue;
        }
        let (author, paths) = parse_notification_body(&msg.body);
        if paths.is_empty() {
            out.unparseable += 1;
            continue;
        }
        let files: Vec<String> = paths.into_iter().filter(|p| is_source_path(p)).collect();
        if files.is_empty() {
            out.dropped_nonsource += 1;
            continue;
        }
        out.records.push(CommitRecord {
            author_name: author.unwrap_or_else(|| msg.sender_name.clone()),
            author_email: msg.sender_email.clone(),
            timestamp: msg.timestamp,
            files,
        });
    }
    out
}

/// Recover the author login and the changed paths from an SVN/Git style
/// notification body:
///
/// ```text
/// Author: somelogin
/// New Revision: 12345
///
/// Added:
///    project/trunk/src/Foo.java
/// Modified:
///    project/trunk/src/Bar.java
/// ```
///
/// Paths are the indented lines under the file sections; other sections
/// (Log:, URL:, diffs) are skipped.
fn parse_notification_body(body: &str) -> (Option<String>, Vec<String>) {
    const FILE_SECTIONS: [&str; 4] = ["Added:", "Modified:", "Removed:", "Deleted:"];
    let mut author = None;
    let mut paths = Vec::new();
    let mut in_file_section = false;
    for line in body.lines() {
        let trimmed = line.trim();
        if author.is_none() {
            if let Some(rest) = trimmed.strip_prefix("Author:") {
                let value = rest.trim();
                if !value.is_empty() {
                    author = Some(value.to_string());
                }
            }
        }
        if FILE_SECTIONS.iter().any(|s| trimmed == *s) {
            in_file_section = true;
            continue;
        }
        if trimmed.is_empty() {
            in_file_section = false;
            continue;
        }
        let indented = line.starts_with(' ') || line.starts_with('\t');
        if in_file_section && indented {
            paths.push(trimmed.to_string());
        } else if !indented {
            in_file_section = false;
        }
    }
    (author, paths)
}

/// Result of loading a commit table.
#[derive(Debug, Default)]
pub struct CommitTable {
    pub records: Vec<CommitRecord>,
    pub dropped_nonsource: u64,
    /// Rows with an unparseable timestamp.
    pub skipped_rows: u64,
}

/// Load a CSV export with columns `timestamp,author_name,author_email,
/// file_path` (one row per file touched), grouping rows with the same
/// timestamp and author into one commit. Timestamps are RFC 3339.
pub fn load_commit_table(reader: impl Read, path: &Path) -> Result<CommitTable> {
    let mut csv = csv::ReaderBuilder::new().from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::UnreadableStream(e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
                path: path.to_path_buf(),
            })
    };
    let ts_col = col("timestamp")?;
    let name_col = col("author_name")?;
    let email_col = col("author_email")?;
    let file_col = col("file_path")?;

    let mut table = CommitTable::default();
    // Grouped by (timestamp, author), in first-appearance order.
    let mut order: Vec<(DateTime<Utc>, String, String)> = Vec::new();
    let mut groups: HashMap<(DateTime<Utc>, String, String), Vec<String>> = HashMap::new();

    for row in csv.records() {
        let row = row.map_err(|e| Error::UnreadableStream(e.to_string()))?;
        let raw_ts = row.get(ts_col).unwrap_or("");
        let Ok(ts) = DateTime::parse_from_rfc3339(raw_ts) else {
            table.skipped_rows += 1;
            continue;
        };
        let key = (
            ts.with_timezone(&Utc),
            row.get(name_col).unwrap_or("").to_string(),
            row.get(email_col).unwrap_or("").to_string(),
        );
        let file = row.get(file_col).unwrap_or("").to_string();
        let files = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            Vec::new()
        });
        if !file.is_empty() && !files.contains(&file) {
            files.push(file);
        }
    }

    for key in order {
        let files: Vec<String> = groups
            .remove(&key)
            .unwrap_or_default()
            .into_iter()
            .filter(|p| is_source_path(p))
            .collect();
        if files.is_empty() {
            table.dropped_nonsource += 1;
            continue;
        }
        table.records.push(CommitRecord {
            author_name: key.1,
            author_email: key.2,
            timestamp: key.0,
            files,
        });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use std::path::PathBuf;

    fn notification(subject: &str, body: &str) -> RawMessage {
        RawMessage {
            message_id: "n@x".into(),
            in_reply_to: None,
            references: vec![],
            sender_name: "Commit Bot".into(),
            sender_email: "dev@project.apache.org".into(),
            timestamp: Utc.with_ymd_and_hms(2010, 6, 1, 10, 0, 0).unwrap(),
            subject: subject.into(),
            body: body.into(),
        }
    }

    // Fixture read by eye before the parser was written: the body lists
    // exactly three paths (two Added, one Modified).
    #[test]
    fn notification_paths_recovered() {
        let body = "Author: jdoe\n\
Date: Tue Jun  1 10:00:00 2010\n\
New Revision: 951234\n\
\n\
Log:\n\
Fix the widget; see FOO-12.\n\
Not an indented path even though text.\n\
\n\
Added:\n\
   incubator/demo/trunk/src/main/Widget.java\n\
   incubator/demo/trunk/src/main/WidgetTest.java\n\
Modified:\n\
   incubator/demo/trunk/src/main/Core.java\n";
        let out = extract_commits(&[notification("svn commit: r951234 - in incubator/demo", body)]);
        assert_eq!(out.records.len(), 1);
        let rec = &out.records[0];
        assert_eq!(rec.author_name, "jdoe");
        assert_eq!(rec.author_email, "dev@project.apache.org");
        assert_eq!(
            rec.files,
            vec![
                "incubator/demo/trunk/src/main/Widget.java",
                "incubator/demo/trunk/src/main/WidgetTest.java",
                "incubator/demo/trunk/src/main/Core.java",
            ]
        );
    }

    #[test]
    fn nonsource_only_commit_dropped_entirely() {
        let body = "Author: jdoe\n\nModified:\n   demo/trunk/config.yml\n   demo/trunk/README.md\n";
        let out = extract_commits(&[notification("svn commit: r1 - demo", body)]);
        assert!(out.records.is_empty());
        assert_eq!(out.dropped_nonsource, 1);
    }

    #[test]
    fn mixed_commit_keeps_source_files_only() {
        let body = "Author: jdoe\n\nModified:\n   demo/trunk/Foo.java\n   demo/trunk/data.json\n";
        let out = extract_commits(&[notification("svn commit: r2 - demo", body)]);
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].files, vec!["demo/trunk/Foo.java"]);
    }

    #[test]
    fn body_without_paths_counts_unparseable() {
        let out = extract_commits(&[notification("svn commit: r3 - demo", "free text only\n")]);
        assert!(out.records.is_empty());
        assert_eq!(out.unparseable, 1);
    }

    #[test]
    fn non_notification_messages_ignored() {
        let out = extract_commits(&[notification("design discussion", "Added:\n   x/y.java\n")]);
        assert!(out.records.is_empty());
        assert_eq!(out.unparseable, 0);
    }

    #[test]
    fn commit_table_header_only_is_empty() {
        let csv = "timestamp,author_name,author_email,file_path\n";
        let table = load_commit_table(csv.as_bytes(), &PathBuf::from("t.csv")).unwrap();
        assert!(table.records.is_empty());
    }

    #[test]
    fn commit_table_groups_by_timestamp_and_author() {
        let csv = "timestamp,author_name,author_email,file_path\n\
2010-06-01T10:00:00Z,Ann,ann@x.org,src/A.java\n\
2010-06-01T10:00:00Z,Ann,ann@x.org,src/B.java\n\
2010-06-01T10:00:00Z,Bob,bob@x.org,src/A.java\n";
        let table = load_commit_table(csv.as_bytes(), &PathBuf::from("t.csv")).unwrap();
        assert_eq!(table.records.len(), 2);
        assert_eq!(table.records[0].files, vec!["src/A.java", "src/B.java"]);
        assert_eq!(table.records[1].author_name, "Bob");
    }

    // Five-row fixture grouped by hand before the loader was written:
    // rows 1+2 collapse (same instant, same author), row 3 is Bob, row 4 is
    // Ann again but one second later, row 5 has a bad timestamp.
    #[test]
    fn commit_table_matches_hand_grouping() {
        let csv = "timestamp,author_name,author_email,file_path\n\
2010-06-01T10:00:00Z,Ann,ann@x.org,src/A.java\n\
2010-06-01T10:00:00Z,Ann,ann@x.org,src/B.java\n\
2010-06-01T10:00:00Z,Bob,bob@x.org,src/C.java\n\
2010-06-01T10:00:01Z,Ann,ann@x.org,src/D.java\n\
not-a-time,Ann,ann@x.org,src/E.java\n";
        let table = load_commit_table(csv.as_bytes(), &PathBuf::from("t.csv")).unwrap();
        assert_eq!(table.skipped_rows, 1);
        let summary: Vec<(&str, usize)> = table
            .records
            .iter()
            .map(|r| (r.author_name.as_str(), r.files.len()))
            .collect();
        assert_eq!(summary, vec![("Ann", 2), ("Bob", 1), ("Ann", 1)]);
    }

    #[test]
    fn commit_table_missing_column_is_fatal() {
        let csv = "timestamp,author_name,file_path\n";
        let err = load_commit_table(csv.as_bytes(), &PathBuf::from("bad.csv")).unwrap_err();
        match err {
            Error::MissingColumn { column, .. } => assert_eq!(column, "author_email"),
            other => panic!("unexpected error: {other}"),
        }
    }
}
