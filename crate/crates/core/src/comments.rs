//! Structured comment blocks (`# Input:` / `# Goal:` / `# Output:` /
//! `# Core Knowledge:`) attached to solver code.

use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::script::ScriptLine;

/// The Core Knowledge categories blocks and steps may cite.
pub const CORE_KNOWLEDGE: [&str; 7] = [
    "Object cohesion",
    "Object persistence",
    "Object influence via contact",
    "Basic Geometry and Topology priors",
    "Numbers and Counting priors",
    "Goal-directedness prior",
    "Compositionality",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentBlock {
    pub inputs: String,
    pub goal: String,
    pub outputs: String,
    /// Category names with any parenthetical detail removed.
    pub core_knowledge: Vec<String>,
    /// The `Core Knowledge:` line as written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_knowledge_text: Option<String>,
    /// Targets of the code lines the block describes.
    pub attached_lines: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("incomplete comment block{}: missing {}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), missing.join(", "))]
pub struct IncompleteBlock {
    pub line: Option<usize>,
    pub missing: Vec<&'static str>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Input,
    Goal,
    Output,
    Knowledge,
}

const KEYS: [(&str, Field); 4] = [
    ("Input:", Field::Input),
    ("Goal:", Field::Goal),
    ("Output:", Field::Output),
    ("Core Knowledge:", Field::Knowledge),
];

/// Parse comment lines (without `#`) into a block. Comments that use none of
/// the keys are not a block and give `Ok(None)`.
pub fn parse_comment_block(comments: &[String]) -> Result<Option<CommentBlock>, IncompleteBlock> {
    let mut fields: [Option<String>; 4] = Default::default();
    let mut current: Option<usize> = None;
    for c in comments {
        let c = c.trim();
        if let Some((i, rest)) = KEYS
            .iter()
            .enumerate()
            .find_map(|(i, (k, _))| c.strip_prefix(k).map(|r| (i, r)))
        {
            let slot = fields[i].get_or_insert_with(String::new);
            append(slot, rest.trim());
            current = Some(i);
        } else if let Some(i) = current {
            // A wrapped line that lost its backslash: keep it with the field above.
            append(fields[i].get_or_insert_with(String::new), c);
        }
    }
    if fields.iter().all(Option::is_none) {
        return Ok(None);
    }
    let missing: Vec<&'static str> = KEYS[..3]
        .iter()
        .zip(&fields)
        .filter(|(_, f)| f.as_deref().is_none_or(str::is_empty))
        .map(|((k, _), _)| k.trim_end_matches(':'))
        .collect();
    if !missing.is_empty() {
        return Err(IncompleteBlock { line: None, missing });
    }
    let [inputs, goal, outputs, knowledge] = fields;
    Ok(Some(CommentBlock {
        inputs: inputs.unwrap_or_default(),
        goal: goal.unwrap_or_default(),
        outputs: outputs.unwrap_or_default(),
        core_knowledge: knowledge.as_deref().map(split_core_knowledge).unwrap_or_default(),
        core_knowledge_text: knowledge,
        attached_lines: Vec::new(),
    }))
}

fn append(slot: &mut String, text: &str) {
    if text.is_empty() {
        return;
    }
    if !slot.is_empty() {
        slot.push(' ');
    }
    slot.push_str(text);
}

/// `"A (x, y), B (z)."` → `["A", "B"]`.
pub fn split_core_knowledge(text: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | ';' if depth == 0 => {
                items.push(std::mem::take(&mut current));
                continue;
            }
            _ if depth == 0 => current.push(ch),
            _ => {}
        }
    }
    items.push(current);
    items
        .into_iter()
        .map(|s| s.trim().trim_end_matches('.').trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// The vocabulary entry a category name refers to, ignoring case.
pub fn core_knowledge_category(name: &str) -> Option<&'static str> {
    CORE_KNOWLEDGE
        .iter()
        .copied()
        .find(|c| c.eq_ignore_ascii_case(name.trim()))
}

/// Warnings for category names outside the vocabulary.
pub fn core_knowledge_warnings(names: &[String], line: Option<usize>) -> Vec<Diagnostic> {
    names
        .iter()
        .filter(|n| core_knowledge_category(n).is_none())
        .map(|n| Diagnostic::warning("unknown-core-knowledge", format!("`{n}` is not a Core Knowledge category"), line))
        .collect()
}

/// Group script lines under the comment blocks that precede them. A block
/// covers every following line up to the next block.
pub fn group_blocks(lines: &[ScriptLine]) -> Result<Vec<CommentBlock>, IncompleteBlock> {
    let mut blocks: Vec<CommentBlock> = Vec::new();
    for line in lines {
        let parsed = parse_comment_block(&line.comments).map_err(|e| IncompleteBlock {
            line: Some(line.line),
            ..e
        })?;
        if let Some(block) = parsed {
            blocks.push(block);
        }
        if let Some(b) = blocks.last_mut() {
            b.attached_lines.push(line.target.clone());
        }
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn full_block() {
        let b = parse_comment_block(&lines(&[
            "Input: I (Grid), the input grid.",
            "Goal: Find things.",
            "Output: x1 (Objects), things.",
            "Core Knowledge: Object influence via contact (bordering), Basic Geometry and Topology priors (relationships)",
        ]))
        .unwrap()
        .unwrap();
        assert_eq!(b.goal, "Find things.");
        assert_eq!(b.core_knowledge, ["Object influence via contact", "Basic Geometry and Topology priors"]);
        assert!(core_knowledge_warnings(&b.core_knowledge, None).is_empty());
    }

    #[test]
    fn incomplete_and_absent() {
        let err = parse_comment_block(&lines(&["Input: a", "Output: b"])).unwrap_err();
        assert_eq!(err.missing, ["Goal"]);
        assert!(err.to_string().starts_with("incomplete comment block"));
        assert_eq!(parse_comment_block(&lines(&["just a note"])).unwrap(), None);
    }

    #[test]
    fn vocabulary() {
        assert_eq!(split_core_knowledge("Object manipulation (painting/filling), Compositionality"), ["Object manipulation", "Compositionality"]);
        let w = core_knowledge_warnings(&lines(&["Object manipulation", "compositionality"]), Some(3));
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].rule, "unknown-core-knowledge");
    }
}
