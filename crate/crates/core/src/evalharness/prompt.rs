use crate::evalharness::{EvalError, EvalItem};

const MCQ_INSTRUCTION: &str = "Answer the following multiple-choice question with the number of the correct choice.";
const SENTIMENT_INSTRUCTION: &str =
    "Classify the sentiment expressed toward the target in the sentence as positive, negative or neutral.";

fn instruction(item: &EvalItem) -> &'static str {
    match item {
        EvalItem::Mcq(_) => MCQ_INSTRUCTION,
        EvalItem::Sentiment(_) => SENTIMENT_INSTRUCTION,
    }
}

fn body(item: &EvalItem) -> String {
    match item {
        EvalItem::Mcq(m) => {
            let mut out = format!("Question: {}\nChoices:", m.question);
            for (i, choice) in m.choices.iter().enumerate() {
                out.push_str(&format!("\n{}. {choice}", i + 1));
            }
            out.push_str("\nAnswer:");
            out
        }
        EvalItem::Sentiment(s) => format!("Sentence: {}\nTarget: {}\nSentiment:", s.sentence, s.target),
    }
}

fn gold(item: &EvalItem) -> String {
    match item {
        EvalItem::Mcq(m) => (m.gold_index + 1).to_string(),
        EvalItem::Sentiment(s) => s.gold_polarity.to_string(),
    }
}

/// The prompt for `item`: instruction, `fewshots` solved exemplars taken in
/// order from the same-kind items of `pool`, then the unanswered item.
pub fn build_prompt(item: &EvalItem, fewshots: usize, pool: &[EvalItem]) -> Result<String, EvalError> {
    let same_kind: Vec<&EvalItem> =
        pool.iter().filter(|p| p.metric() == item.metric() && p.id() != item.id()).collect();
    if fewshots > same_kind.len() {
        return Err(EvalError::MissingExemplars { requested: fewshots, available: same_kind.len() });
    }
    let mut out = format!("{}\n\n", instruction(item));
    for exemplar in &same_kind[..fewshots] {
        out.push_str(&format!("{} {}\n\n", body(exemplar), gold(exemplar)));
    }
    out.push_str(&body(item));
    Ok(out)
}
