//! Corpus-level views over accepted bundles: tactic frequencies and the
//! retrieval export.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::dsl::Registry;
use crate::script::referenced_functions;
use crate::script::solver::render_line;

use super::bundle::PartBundle;

/// Case-folded heading with punctuation turned into spaces.
pub fn tactic_key(heading: &str) -> String {
    let folded: String = heading
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticGroup {
    pub key: String,
    /// The most frequent spelling, ties broken by string order.
    pub heading: String,
    pub count: usize,
    pub task_ids: BTreeSet<String>,
    pub dsl_functions: BTreeSet<String>,
}

/// Group the tactics of accepted bundles by normalised heading.
pub fn aggregate_tactics(bundles: &[PartBundle]) -> Vec<TacticGroup> {
    let mut groups: BTreeMap<String, (TacticGroup, BTreeMap<String, usize>)> = BTreeMap::new();
    for b in bundles.iter().filter(|b| b.accepted) {
        for t in b.tactics().unwrap_or_default() {
            let key = tactic_key(&t.heading);
            let (g, spellings) = groups.entry(key.clone()).or_insert_with(|| {
                (
                    TacticGroup {
                        key,
                        heading: String::new(),
                        count: 0,
                        task_ids: BTreeSet::new(),
                        dsl_functions: BTreeSet::new(),
                    },
                    BTreeMap::new(),
                )
            });
            g.count += 1;
            g.task_ids.insert(b.task_id.clone());
            g.dsl_functions.extend(t.dsl_functions.iter().cloned());
            *spellings.entry(t.heading.trim().to_string()).or_default() += 1;
        }
    }
    let mut out: Vec<TacticGroup> = groups
        .into_values()
        .map(|(mut g, spellings)| {
            // BTreeMap order makes max_by_key pick the last maximum; reverse for the first.
            g.heading = spellings
                .into_iter()
                .rev()
                .max_by_key(|(_, n)| *n)
                .map(|(h, _)| h)
                .unwrap_or_default();
            g
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    CodeBlock,
    Subfunction,
    Tactic,
    Steps,
}

impl UnitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::CodeBlock => "code_block",
            UnitKind::Subfunction => "subfunction",
            UnitKind::Tactic => "tactic",
            UnitKind::Steps => "steps",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    /// `task_id/kind/name`, unique across the corpus.
    pub id: String,
    pub task_id: String,
    pub kind: UnitKind,
    pub name: String,
    pub text: String,
    pub fields: serde_json::Value,
    pub dsl_functions: Vec<String>,
}

fn record(
    task_id: &str,
    kind: UnitKind,
    name: String,
    text: String,
    fields: serde_json::Value,
    dsl_functions: Vec<String>,
) -> CorpusRecord {
    CorpusRecord {
        id: format!("{task_id}/{}/{name}", kind.as_str()),
        task_id: task_id.to_string(),
        kind,
        name,
        text,
        fields,
        dsl_functions,
    }
}

fn comment_lines(block: &crate::comments::CommentBlock) -> String {
    let mut s = format!("# Input: {}\n# Goal: {}\n# Output: {}\n", block.inputs, block.goal, block.outputs);
    if let Some(k) = &block.core_knowledge_text {
        s.push_str(&format!("# Core Knowledge: {k}\n"));
    }
    s
}

/// Retrieval records for accepted bundles, ordered by task id, then unit
/// kind, then source order. Skipped units come back as warnings.
pub fn export_corpus(bundles: &[PartBundle], registry: &Registry) -> (Vec<CorpusRecord>, Vec<Diagnostic>) {
    let mut warnings = Vec::new();
    let mut by_task: BTreeMap<&str, &PartBundle> = BTreeMap::new();
    for b in bundles {
        if !b.accepted {
            warnings.push(Diagnostic::warning("not-accepted", format!("{}: bundle not accepted, skipped", b.task_id), None));
        } else if by_task.insert(&b.task_id, b).is_some() {
            warnings.push(Diagnostic::warning("duplicate-task", format!("{}: duplicate bundle, later one kept", b.task_id), None));
        }
    }
    let mut out = Vec::new();
    for (task_id, b) in by_task {
        if let Some(c) = b.commented() {
            for (i, block) in c.blocks.iter().enumerate() {
                let lines: Vec<_> = c.block_lines(i).into_iter().cloned().collect();
                let code: String = lines.iter().map(|l| render_line(l) + "\n").collect();
                out.push(record(
                    task_id,
                    UnitKind::CodeBlock,
                    format!("block{}", i + 1),
                    comment_lines(block) + &code,
                    serde_json::to_value(block).expect("block serialises"),
                    referenced_functions(&lines),
                ));
            }
        }
        if let Some(p) = b.chunked() {
            for sub in &p.subfunctions {
                let Some(block) = &sub.comment_block else {
                    warnings.push(Diagnostic::warning(
                        "uncommented-subfunction",
                        format!("{task_id}: `{}` has no comment block, skipped", sub.name),
                        Some(sub.line),
                    ));
                    continue;
                };
                let dsl = sub.mentioned_functions().into_iter().filter(|f| registry.contains(f)).collect();
                out.push(record(
                    task_id,
                    UnitKind::Subfunction,
                    sub.name.clone(),
                    sub.source.clone(),
                    serde_json::json!({
                        "params": sub.params,
                        "returns": sub.returns,
                        "comment_block": block,
                    }),
                    dsl,
                ));
            }
        }
        let tactics = b.tactics().unwrap_or_default();
        let mut names = BTreeSet::new();
        for t in tactics {
            let base = tactic_key(&t.heading).replace(' ', "-");
            let mut name = base.clone();
            let mut n = 1;
            while !names.insert(name.clone()) {
                n += 1;
                name = format!("{base}-{n}");
            }
            out.push(record(
                task_id,
                UnitKind::Tactic,
                name,
                format!("{}: {}", t.heading, t.description),
                serde_json::to_value(t).expect("tactic serialises"),
                t.dsl_functions.iter().filter(|f| registry.contains(f)).cloned().collect(),
            ));
        }
        if let Some(steps) = b.steps() {
            let mut dsl: Vec<String> = Vec::new();
            for s in &steps.steps {
                let key = tactic_key(&s.tactic_used);
                for t in tactics.iter().filter(|t| tactic_key(&t.heading) == key) {
                    for f in &t.dsl_functions {
                        if registry.contains(f) && !dsl.contains(f) {
                            dsl.push(f.clone());
                        }
                    }
                }
            }
            let text = steps.steps.iter().enumerate().fold(
                format!("Input: {}\n", steps.input_description),
                |acc, (i, s)| acc + &format!("{}. {}\n", i + 1, s.text),
            ) + &format!("Output: {}\n", steps.output_description);
            out.push(record(
                task_id,
                UnitKind::Steps,
                "steps".into(),
                text,
                serde_json::to_value(steps).expect("steps serialise"),
                dsl,
            ));
        }
    }
    (out, warnings)
}

/// One JSON object per line.
pub fn corpus_jsonl(records: &[CorpusRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serialises") + "\n")
        .collect()
}
