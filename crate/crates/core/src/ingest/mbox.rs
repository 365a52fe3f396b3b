//! RFC 4155-style mbox reading and writing.
//!
//! Message framing (the `From ` separator lines) and mboxrd `>From `
//! quoting are handled here; the per-message header machinery (RFC 5322
//! folding, RFC 2047 encoded words, RFC 2822 dates) is delegated to
//! `mailparse`.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use chrono::{DateTime, TimeZone, Utc};
use mailparse::{MailHeaderMap, ParsedMail};

use crate::error::{Error, Result};
use crate::ingest::RawMessage;

/// Result of parsing one archive stream.
#[derive(Debug, Default)]
pub struct MboxParse {
    pub messages: Vec<RawMessage>,
    /// Dropped: unparseable date, missing message id, or unreadable headers.
    pub malformed: u64,
    /// Dropped: message id already seen in this archive (first wins).
    pub duplicates: u64,
}

/// Parse an mbox stream into messages, tolerating malformed entries.
pub fn parse_mbox(reader: impl BufRead) -> Result<MboxParse> {
    let mut out = MboxParse::default();
    let mut seen: HashSet<String> = HashSet::new();
    let mut current: Option<Vec<u8>> = None;

    let finish = |chunk: Option<Vec<u8>>, out: &mut MboxParse, seen: &mut HashSet<String>| {
        if let Some(bytes) = chunk {
            match parse_message(&bytes) {
                Some(msg) => {
                    if seen.insert(msg.message_id.clone()) {
                        out.messages.push(msg);
                    } else {
                        out.duplicates += 1;
                    }
                }
                None => out.malformed += 1,
            }
        }
    };

    for line in reader.split(b'\n') {
        let mut line = line.map_err(|e| Error::UnreadableStream(e.to_string()))?;
        if line.last() == Some(&b'\r') {
            line.pop();
        }
        if line.starts_with(b"From ") {
            finish(current.take(), &mut out, &mut seen);
            current = Some(Vec::new());
        } else if let Some(chunk) = current.as_mut() {
            chunk.extend_from_slice(&unstuff(&line));
            chunk.push(b'\n');
        }
        // Bytes before the first separator are junk; skip them.
    }
    finish(current.take(), &mut out, &mut seen);
    Ok(out)
}

/// mboxrd unquoting: a line of the form `>+From ` loses one `>`.
fn unstuff(line: &[u8]) -> Vec<u8> {
    let stripped = line.iter().take_while(|&&b| b == b'>').count();
    if stripped > 0 && line[stripped..].starts_with(b"From ") {
        line[1..].to_vec()
    } else {
        line.to_vec()
    }
}

fn parse_message(bytes: &[u8]) -> Option<RawMessage> {
    let mail = mailparse::parse_mail(bytes).ok()?;

    let message_id = extract_msg_id(&mail.headers.get_first_value("Message-ID")?)?;
    let timestamp = parse_date(&mail)?;

    let references: Vec<String> = mail
        .headers
        .get_first_value("References")
        .map(|v| all_msg_ids(&v))
        .unwrap_or_default();
    let in_reply_to = mail
        .headers
        .get_first_value("In-Reply-To")
        .and_then(|v| extract_msg_id(&v))
        .or_else(|| references.last().cloned());

    let (sender_name, sender_email) = parse_from(&mail);
    let subject = mail.headers.get_first_value("Subject").unwrap_or_default();
    let body = text_body(&mail);

    Some(RawMessage {
        message_id,
        in_reply_to,
        references,
        sender_name,
        sender_email,
        timestamp,
        subject,
        body,
    })
}

fn parse_date(mail: &ParsedMail) -> Option<DateTime<Utc>> {
    let raw = mail.headers.get_first_value("Date")?;
    let epoch = mailparse::dateparse(&raw).ok()?;
    Utc.timestamp_opt(epoch, 0).single()
}

/// First `<...>` token of a message-id header, or the trimmed value when the
/// angle brackets are missing.
fn extract_msg_id(value: &str) -> Option<String> {
    let id = match (value.find('<'), value.find('>')) {
        (Some(open), Some(close)) if close > open => value[open + 1..close].trim().to_string(),
        _ => value.trim().to_string(),
    };
    if id.is_empty() {
        None
    } else {
        Some(id)
    }
}

/// Every `<...>` token of a References header, in order.
fn all_msg_ids(value: &str) -> Vec<String> {
    let mut ids = Vec::new();
    let mut rest = value;
    while let (Some(open), Some(close)) = (rest.find('<'), rest.find('>')) {
        if close > open {
            let id = rest[open + 1..close].trim();
            if !id.is_empty() {
                ids.push(id.to_string());
            }
            rest = &rest[close + 1..];
        } else {
            break;
        }
    }
    if ids.is_empty() && !value.trim().is_empty() {
        ids.push(value.trim().to_string());
    }
    ids
}

fn parse_from(mail: &ParsedMail) -> (String, String) {
    let Some(raw) = mail.headers.get_first_value("From") else {
        return (String::new(), String::new());
    };
    match mailparse::addrparse(&raw) {
        Ok(list) => {
            for addr in list.iter() {
                match addr {
                    mailparse::MailAddr::Single(info) => {
                        return (
                            info.display_name.clone().unwrap_or_default(),
                            info.addr.clone(),
                        );
                    }
                    mailparse::MailAddr::Group(group) => {
                        if let Some(info) = group.addrs.first() {
                            return (
                                info.display_name.clone().unwrap_or_default(),
                                info.addr.clone(),
                            );
                        }
                    }
                }
            }
            (raw.trim().to_string(), String::new())
        }
        Err(_) => (raw.trim().to_string(), String::new()),
    }
}

/// Top-level text body, or the first text part of a multipart message. Full
/// MIME traversal is deliberately shallow: the pipeline only needs enough of
/// the body to recover commit file lists.
fn text_body(mail: &ParsedMail) -> String {
    if mail.subparts.is_empty() {
        return mail.get_body().unwrap_or_default();
    }
    for part in &mail.subparts {
        if part.ctype.mimetype == "text/plain" {
            return part.get_body().unwrap_or_default();
        }
    }
    for part in &mail.subparts {
        if part.ctype.mimetype.starts_with("text/") {
            return part.get_body().unwrap_or_default();
        }
    }
    String::new()
}

/// Serialize messages back to mboxrd. `parse_mbox` over the output yields
/// the same messages, which is what the synthetic-corpus generator and the
/// round-trip tests rely on.
pub fn write_mbox(messages: &[RawMessage], mut w: impl Write) -> std::io::Result<()> {
    for msg in messages {
        let sep_addr = if msg.sender_email.is_empty() {
            "-"
        } else {
            &msg.sender_email
        };
        writeln!(
            w,
            "From {} {}",
            sep_addr,
            msg.timestamp.format("%a %b %e %H:%M:%S %Y")
        )?;
        writeln!(w, "Message-ID: <{}>", msg.message_id)?;
        writeln!(w, "Date: {}", msg.timestamp.to_rfc2822())?;
        match (msg.sender_name.is_empty(), msg.sender_email.is_empty()) {
            (false, false) => writeln!(
                w,
                "From: \"{}\" <{}>",
                quote_name(&msg.sender_name),
                msg.sender_email
            )?,
            (true, false) => writeln!(w, "From: <{}>", msg.sender_email)?,
            (false, true) => writeln!(w, "From: {}", msg.sender_name)?,
            (true, true) => {}
        }
        writeln!(w, "Subject: {}", msg.subject)?;
        if let Some(parent) = &msg.in_reply_to {
            writeln!(w, "In-Reply-To: <{}>", parent)?;
        }
        if !msg.references.is_empty() {
            let refs: Vec<String> = msg.references.iter().map(|r| format!("<{r}>")).collect();
            writeln!(w, "References: {}", refs.join(" "))?;
        }
        writeln!(w)?;
        for line in msg.body.split('\n') {
            let stripped = line.trim_start_matches('>');
            if stripped.starts_with("From ") {
                writeln!(w, ">{}", line)?;
            } else {
                writeln!(w, "{}", line)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

fn quote_name(name: &str) -> String {
    name.replace('\\', "\\\\").replace('"', "\\\"")
}
