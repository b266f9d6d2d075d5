use serde::{Deserialize, Serialize};

use crate::synthgen::{ItemKind, SynthError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RephraseRequest {
    pub passage: String,
    pub kind: ItemKind,
    pub max_items: usize,
}

impl RephraseRequest {
    pub fn validate(&self, ceiling: usize) -> Result<(), SynthError> {
        if self.passage.trim().is_empty() {
            return Err(SynthError::InvalidRequest("passage is empty".into()));
        }
        if self.max_items < 1 || self.max_items > ceiling {
            return Err(SynthError::InvalidRequest(format!("max_items {} outside [1, {ceiling}]", self.max_items)));
        }
        Ok(())
    }
}

/// Prompt templates. Placeholders: `{count}`, `{choices}` (mcq only) and
/// `{passage}`; the passage is substituted last and verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplates {
    pub qa: String,
    pub mcq: String,
    pub choices: usize,
}

pub const DEFAULT_QA_TEMPLATE: &str = "\
Rewrite the information in the passage below as {count} question-and-answer pair(s). \
Each answer must be supported by the passage.
Use exactly this layout for every pair and separate pairs with a blank line:
Q: <question>
A: <answer>

Passage:
{passage}
";

pub const DEFAULT_MCQ_TEMPLATE: &str = "\
Rewrite the information in the passage below as {count} multiple-choice question(s) \
with {choices} choices each. Exactly one choice must be correct.
Use exactly this layout for every question and separate questions with a blank line:
Q: <question>
(1) <choice>
(2) <choice>
...
A: (<number of the correct choice>) <text of the correct choice>

Passage:
{passage}
";

impl Default for PromptTemplates {
    fn default() -> Self {
        Self { qa: DEFAULT_QA_TEMPLATE.to_string(), mcq: DEFAULT_MCQ_TEMPLATE.to_string(), choices: 4 }
    }
}

pub fn make_rephrase_prompt(req: &RephraseRequest, templates: &PromptTemplates) -> String {
    let template = match req.kind {
        ItemKind::Qa => &templates.qa,
        ItemKind::Mcq => &templates.mcq,
    };
    let head = template
        .replace("{count}", &req.max_items.to_string())
        .replace("{choices}", &templates.choices.to_string());
    head.replace("{passage}", &req.passage)
}
