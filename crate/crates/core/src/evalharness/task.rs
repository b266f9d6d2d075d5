use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::evalharness::EvalError;
use crate::jsonl::read_jsonl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    F1,
    Accuracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Positive, Polarity::Negative, Polarity::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McqEvalItem {
    #[serde(default)]
    pub id: String,
    pub question: String,
    pub choices: Vec<String>,
    pub gold_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentimentEvalItem {
    #[serde(default)]
    pub id: String,
    pub sentence: String,
    pub target: String,
    pub gold_polarity: Polarity,
}

/// One dataset line. The field set decides the kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvalItem {
    Mcq(McqEvalItem),
    Sentiment(SentimentEvalItem),
}

impl EvalItem {
    pub fn id(&self) -> &str {
        match self {
            EvalItem::Mcq(m) => &m.id,
            EvalItem::Sentiment(s) => &s.id,
        }
    }

    fn set_id(&mut self, id: String) {
        match self {
            EvalItem::Mcq(m) => m.id = id,
            EvalItem::Sentiment(s) => s.id = id,
        }
    }

    pub fn metric(&self) -> Metric {
        match self {
            EvalItem::Mcq(_) => Metric::Accuracy,
            EvalItem::Sentiment(_) => Metric::F1,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let fail = |reason: String| Err(EvalError::InvalidItem { id: self.id().to_string(), reason });
        match self {
            EvalItem::Mcq(m) => {
                if m.choices.len() < 2 {
                    return fail(format!("{} choice(s), need at least 2", m.choices.len()));
                }
                if m.gold_index >= m.choices.len() {
                    return fail(format!("gold_index {} out of range for {} choices", m.gold_index, m.choices.len()));
                }
                let distinct: HashSet<&str> = m.choices.iter().map(String::as_str).collect();
                if distinct.len() != m.choices.len() {
                    return fail("choices are not distinct".into());
                }
            }
            EvalItem::Sentiment(s) => {
                if s.target.is_empty() || !s.sentence.contains(&s.target) {
                    return fail(format!("target `{}` does not occur in the sentence", s.target));
                }
            }
        }
        Ok(())
    }
}

/// Task names and their metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskRegistry {
    tasks: BTreeMap<String, Metric>,
}

impl TaskRegistry {
    pub fn empty() -> Self {
        Self { tasks: BTreeMap::new() }
    }

    /// The five published financial benchmark tasks.
    pub fn financial() -> Self {
        let mut r = Self::empty();
        r.register("chabsa", Metric::F1);
        for name in ["cma_basics", "cpa_audit", "fp2", "security_sales_1"] {
            r.register(name, Metric::Accuracy);
        }
        r
    }

    pub fn register(&mut self, name: impl Into<String>, metric: Metric) {
        self.tasks.insert(name.into(), metric);
    }

    pub fn metric(&self, name: &str) -> Option<Metric> {
        self.tasks.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tasks.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

impl Default for TaskRegistry {
    fn default() -> Self {
        Self::financial()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalTask {
    pub name: String,
    pub metric: Metric,
    pub items: Vec<EvalItem>,
}

impl EvalTask {
    /// Checks the items against the registry: every item valid, of the kind
    /// the metric scores, and with a unique id (missing ids become
    /// `<task>-<line>`).
    pub fn new(name: impl Into<String>, mut items: Vec<EvalItem>, registry: &TaskRegistry) -> Result<Self, EvalError> {
        let name = name.into();
        let invalid = |reason: String| EvalError::InvalidTask { task: name.clone(), reason };
        let metric = registry.metric(&name).ok_or_else(|| invalid("not in the task registry".into()))?;
        if items.is_empty() {
            return Err(invalid("no items".into()));
        }
        let mut seen = HashSet::new();
        for (i, item) in items.iter_mut().enumerate() {
            if item.id().is_empty() {
                item.set_id(format!("{name}-{i}"));
            }
            if item.metric() != metric {
                return Err(invalid(format!("item `{}` does not match the task metric {metric:?}", item.id())));
            }
            item.validate()?;
            if !seen.insert(item.id().to_string()) {
                return Err(invalid(format!("duplicate item id `{}`", item.id())));
            }
        }
        Ok(Self { name, metric, items })
    }
}

/// Reads a JSONL task dataset.
pub fn load_task<R: BufRead>(name: &str, reader: R, registry: &TaskRegistry) -> Result<EvalTask, EvalError> {
    let items: Vec<EvalItem> = read_jsonl(reader)?;
    EvalTask::new(name, items, registry)
}
