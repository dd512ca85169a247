//! Splitting a raw response into its Part segments.

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Default Part header: a markdown heading such as `### Part 2 : Create reusable components`.
pub const DEFAULT_HEADER: &str = r"^\s*#{1,6}\s*\**\s*Part\s*([1-9])\b";

#[derive(Clone, Debug)]
pub struct SplitConfig {
    /// Matches a header line; capture group 1 is the part number.
    pub header: Regex,
    pub expected: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            header: Regex::new(DEFAULT_HEADER).expect("default header regex"),
            expected: 4,
        }
    }
}

impl SplitConfig {
    pub fn with_header(pattern: &str, expected: usize) -> Result<SplitConfig, regex::Error> {
        Ok(SplitConfig {
            header: Regex::new(pattern)?,
            expected,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{}", describe(found, *expected))]
pub struct SplitError {
    /// Part numbers found, in response order.
    pub found: Vec<usize>,
    pub expected: usize,
}

fn describe(found: &[usize], expected: usize) -> String {
    let mut problems = Vec::new();
    let missing: Vec<String> = (1..=expected)
        .filter(|k| !found.contains(k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        let s = if missing.len() == 1 { "" } else { "s" };
        problems.push(format!("missing part{s} {}", missing.join(", ")));
    }
    let extra: Vec<String> = found.iter().filter(|k| **k > expected).map(|k| k.to_string()).collect();
    if !extra.is_empty() {
        problems.push(format!("unexpected part {}", extra.join(", ")));
    }
    let mut seen = Vec::new();
    for k in found {
        if seen.contains(k) {
            problems.push(format!("duplicate part {k}"));
        }
        seen.push(*k);
    }
    if problems.is_empty() {
        problems.push("parts out of order".into());
    }
    let list: Vec<String> = found.iter().map(|k| k.to_string()).collect();
    format!("{} (found: [{}])", problems.join("; "), list.join(", "))
}

/// Cut the response at Part headers outside fenced blocks. Each segment is
/// the text after its header line.
pub fn split_parts(response: &str, config: &SplitConfig) -> Result<Vec<String>, SplitError> {
    let mut found = Vec::new();
    let mut segments: Vec<String> = Vec::new();
    let mut in_fence = false;
    for line in response.lines() {
        if line.trim_start().starts_with("```") {
            in_fence = !in_fence;
        }
        let header = (!in_fence)
            .then(|| config.header.captures(line))
            .flatten()
            .and_then(|c| c.get(1)?.as_str().parse::<usize>().ok());
        match header {
            Some(k) => {
                found.push(k);
                segments.push(String::new());
            }
            None => {
                if let Some(seg) = segments.last_mut() {
                    seg.push_str(line);
                    seg.push('\n');
                }
            }
        }
    }
    let in_order = found.iter().copied().eq(1..=config.expected);
    if !in_order {
        return Err(SplitError {
            found,
            expected: config.expected,
        });
    }
    Ok(segments.into_iter().map(|s| s.trim().to_string()).collect())
}

/// The body of the first fenced block, or the whole text when there is none.
pub fn strip_fences(segment: &str) -> String {
    let mut body = Vec::new();
    let mut inside = false;
    for line in segment.lines() {
        if line.trim_start().starts_with("```") {
            if inside {
                return body.join("\n") + "\n";
            }
            inside = true;
            continue;
        }
        if inside {
            body.push(line);
        }
    }
    if inside {
        // Unterminated fence: keep what followed it.
        return body.join("\n") + "\n";
    }
    segment.to_string()
}
