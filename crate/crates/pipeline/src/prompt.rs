//! Prompt assembly.

use serde::{Deserialize, Serialize};

use arcdsl_core::dsl::{render_value, Registry};
use arcdsl_core::grid::render_grid;
use arcdsl_core::script::{pretty_print, SolverScript, Trace};
use arcdsl_core::{ColorTable, PairKind, TaskRecord};

/// Versioned prompt text. `v1` ships with the crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Templates {
    pub version: String,
    pub rubric: String,
    pub core_knowledge: String,
    /// Instruction blocks for Parts 1 to 4.
    pub parts: [String; 4],
}

impl Templates {
    pub fn builtin(version: &str) -> Option<Templates> {
        match version {
            "v1" => Some(Templates {
                version: "v1".into(),
                rubric: include_str!("../assets/v1/rubric.md").into(),
                core_knowledge: include_str!("../assets/v1/core_knowledge.md").into(),
                parts: [
                    include_str!("../assets/v1/part1.md").into(),
                    include_str!("../assets/v1/part2.md").into(),
                    include_str!("../assets/v1/part3.md").into(),
                    include_str!("../assets/v1/part4.md").into(),
                ],
            }),
            _ => None,
        }
    }
}

fn default_parts() -> Vec<u8> {
    vec![1, 2, 3, 4]
}

fn default_version() -> String {
    "v1".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptSpec {
    #[serde(default)]
    pub include_interim_values: bool,
    #[serde(default = "default_parts")]
    pub parts_requested: Vec<u8>,
    pub model_id: String,
    #[serde(default = "default_version")]
    pub template_version: String,
}

impl PromptSpec {
    pub fn new(model_id: &str) -> PromptSpec {
        PromptSpec {
            include_interim_values: false,
            parts_requested: default_parts(),
            model_id: model_id.into(),
            template_version: default_version(),
        }
    }

    /// Parts must be `1..=k` for some k in 1..=4, in any order.
    pub fn check(&self) -> Result<(), PromptError> {
        let mut parts = self.parts_requested.clone();
        parts.sort_unstable();
        let k = parts.len();
        if k == 0 || k > 4 || !parts.iter().copied().eq(1..=k as u8) {
            return Err(PromptError::Parts(self.parts_requested.clone()));
        }
        Ok(())
    }

    /// Number of parts requested, once checked.
    pub fn part_count(&self) -> usize {
        self.parts_requested.len()
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("parts_requested must be 1..=k for k in 1..=4, got {0:?}")]
    Parts(Vec<u8>),
    #[error("unknown template version `{0}`")]
    Templates(String),
    #[error("interim values requested but no trace was supplied")]
    MissingTrace,
    #[error("trace has no value for returned variable {0}")]
    MissingVariable(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Section {
    pub name: &'static str,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prompt {
    pub sections: Vec<Section>,
}

impl Prompt {
    pub fn text(&self) -> String {
        let mut out = self
            .sections
            .iter()
            .map(|s| s.text.trim_end())
            .collect::<Vec<_>>()
            .join("\n\n");
        out.push('\n');
        out
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

fn dsl_docs(registry: &Registry) -> String {
    let mut s = String::from("## DSL functions\n");
    for spec in registry.specs().iter().filter(|f| registry.is_implemented(&f.name)) {
        s.push_str(&format!("* `{}` : {}\n", spec.signature(), spec.doc));
    }
    s
}

fn grids(task: &TaskRecord, table: &ColorTable) -> String {
    let mut s = String::from("## Input / Output grids\n");
    for (kind, index, pair) in task.pairs() {
        let label = match kind {
            PairKind::Train => "Train",
            PairKind::Test => "Test",
        };
        s.push_str(&format!("\n{label} {} input:\n{}\n", index + 1, render_grid(&pair.input, table)));
        if kind == PairKind::Train {
            s.push_str(&format!("\n{label} {} output:\n{}\n", index + 1, render_grid(&pair.output, table)));
        }
    }
    s
}

fn interim(script: &SolverScript, trace: &Trace, table: &ColorTable) -> Result<String, PromptError> {
    let mut s = String::from("## Interim variable values\n");
    for name in script.returned_vars.iter().filter(|v| *v != "I" && *v != "O") {
        let value = trace.get(name).ok_or_else(|| PromptError::MissingVariable(name.clone()))?;
        s.push_str(&format!("\nVariable {name}:\n{}\n", render_value(value, table)));
    }
    Ok(s)
}

/// Assemble the prompt for one task. Equal inputs give identical text.
pub fn build_prompt(
    task: &TaskRecord,
    script: &SolverScript,
    trace: Option<&Trace>,
    spec: &PromptSpec,
    registry: &Registry,
    table: &ColorTable,
) -> Result<Prompt, PromptError> {
    spec.check()?;
    let templates =
        Templates::builtin(&spec.template_version).ok_or_else(|| PromptError::Templates(spec.template_version.clone()))?;
    let mut sections = vec![
        Section {
            name: "rubric",
            text: templates.rubric.clone(),
        },
        Section {
            name: "core_knowledge",
            text: templates.core_knowledge.clone(),
        },
        Section {
            name: "dsl",
            text: dsl_docs(registry),
        },
        Section {
            name: "solution",
            text: format!("## Problem solution\n```python\n{}```\n", pretty_print(script)),
        },
        Section {
            name: "grids",
            text: grids(task, table),
        },
    ];
    if spec.include_interim_values {
        let trace = trace.ok_or(PromptError::MissingTrace)?;
        sections.push(Section {
            name: "interim",
            text: interim(script, trace, table)?,
        });
    }
    let mut parts = spec.parts_requested.clone();
    parts.sort_unstable();
    let instructions = parts
        .iter()
        .map(|k| templates.parts[*k as usize - 1].trim_end())
        .collect::<Vec<_>>()
        .join("\n\n");
    sections.push(Section {
        name: "instructions",
        text: instructions,
    });
    Ok(Prompt { sections })
}
