use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::SynthItem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Question,
    Answer,
    Choice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    EmptyField(Field),
    TooFewChoices,
    DuplicateChoices,
    AnswerOutOfRange,
    /// The question is the whole source passage copied verbatim.
    CopiesPassage,
}

/// Returns every invariant the item breaks. `passage` enables the
/// copied-passage check.
pub fn validate_item(item: &SynthItem, passage: Option<&str>) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let question = match item {
        SynthItem::Qa(qa) => {
            if qa.question.trim().is_empty() {
                violations.push(Violation::EmptyField(Field::Question));
            }
            if qa.answer.trim().is_empty() {
                violations.push(Violation::EmptyField(Field::Answer));
            }
            &qa.question
        }
        SynthItem::Mcq(mcq) => {
            if mcq.question.trim().is_empty() {
                violations.push(Violation::EmptyField(Field::Question));
            }
            if mcq.choices.len() < 2 {
                violations.push(Violation::TooFewChoices);
            }
            if mcq.choices.iter().any(|c| c.trim().is_empty()) {
                violations.push(Violation::EmptyField(Field::Choice));
            }
            let distinct: HashSet<&str> = mcq.choices.iter().map(|c| c.trim()).collect();
            if distinct.len() != mcq.choices.len() {
                violations.push(Violation::DuplicateChoices);
            }
            if mcq.answer_index >= mcq.choices.len() {
                violations.push(Violation::AnswerOutOfRange);
            }
            &mcq.question
        }
    };
    if let Some(p) = passage {
        if !p.trim().is_empty() && question.trim() == p.trim() {
            violations.push(Violation::CopiesPassage);
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
