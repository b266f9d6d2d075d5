//! Training-plan manifest handed to an external large-scale trainer.
//!
//! The manifest is a flat `key=value` text file whose keys are exactly the
//! [`TrainPlan`] field names. Lines starting with `#` are comments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("manifest line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("manifest is missing key `{0}`")]
    MissingKey(&'static str),
}

/// Accelerator model and count, written as `"<model> x<count>"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceSpec {
    pub model: String,
    pub count: usize,
}

impl fmt::Display for DeviceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x{}", self.model, self.count)
    }
}

impl FromStr for DeviceSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (model, count) = s
            .rsplit_once(" x")
            .ok_or_else(|| format!("device spec `{s}` is not of the form `<model> x<count>`"))?;
        let count = count
            .parse()
            .map_err(|_| format!("device count `{count}` is not an integer"))?;
        Ok(Self { model: model.trim().to_string(), count })
    }
}

impl Serialize for DeviceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DeviceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    LinearToZero,
}

impl Schedule {
    pub fn as_str(self) -> &'static str {
        match self {
            Schedule::LinearToZero => "linear_to_zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dtype {
    Bf16,
    Fp16,
    Fp32,
}

impl Dtype {
    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::Bf16 => "bf16",
            Dtype::Fp16 => "fp16",
            Dtype::Fp32 => "fp32",
        }
    }
}

/// Continual pre-training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainPlan {
    pub devices: DeviceSpec,
    pub lr_init: f64,
    pub schedule: Schedule,
    pub epochs: usize,
    pub global_batch: usize,
    pub per_device_batch: usize,
    pub max_seq_len: usize,
    pub dtype: Dtype,
    pub grad_accum: usize,
    pub grad_checkpointing: bool,
}

impl Default for TrainPlan {
    /// The published run: 4x A100 80GB, lr 5e-7 decayed linearly to 0,
    /// 5 epochs, batch 24 (6 per device), 2048-token sequences, bf16.
    fn default() -> Self {
        Self {
            devices: DeviceSpec { model: "A100 80GB".to_string(), count: 4 },
            lr_init: 5e-7,
            schedule: Schedule::LinearToZero,
            epochs: 5,
            global_batch: 24,
            per_device_batch: 6,
            max_seq_len: 2048,
            dtype: Dtype::Bf16,
            grad_accum: 1,
            grad_checkpointing: true,
        }
    }
}

const KEYS: [&str; 10] = [
    "devices",
    "lr_init",
    "schedule",
    "epochs",
    "global_batch",
    "per_device_batch",
    "max_seq_len",
    "dtype",
    "grad_accum",
    "grad_checkpointing",
];

impl TrainPlan {
    /// Checks the plan invariants, including `lr_init > 0`.
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.lr_init > 0.0) {
            return Err(PlanError::InvalidPlan(format!("lr_init must be positive, got {}", self.lr_init)));
        }
        self.validate_shape()
    }

    /// Checks everything except the sign of `lr_init`. The reference trainer
    /// accepts a zero learning rate as a no-update run.
    pub fn validate_shape(&self) -> Result<(), PlanError> {
        let invalid = |m: String| Err(PlanError::InvalidPlan(m));
        if !(self.lr_init.is_finite() && self.lr_init >= 0.0) {
            return invalid(format!("lr_init must be finite and non-negative, got {}", self.lr_init));
        }
        if self.epochs < 1 {
            return invalid("epochs must be at least 1".into());
        }
        if self.devices.count < 1 || self.per_device_batch < 1 || self.grad_accum < 1 {
            return invalid("device count, per_device_batch and grad_accum must be positive".into());
        }
        let expected = self.per_device_batch * self.devices.count * self.grad_accum;
        if self.global_batch != expected {
            return invalid(format!(
                "global_batch {} != per_device_batch {} x devices {} x grad_accum {} = {}",
                self.global_batch, self.per_device_batch, self.devices.count, self.grad_accum, expected
            ));
        }
        if self.max_seq_len < 1 {
            return invalid("max_seq_len must be at least 1".into());
        }
        Ok(())
    }

    /// Renders the `key=value` manifest. Fails on an invalid plan.
    pub fn to_manifest(&self) -> Result<String, PlanError> {
        self.validate()?;
        let values = [
            self.devices.to_string(),
            format!("{:e}", self.lr_init),
            self.schedule.as_str().to_string(),
            self.epochs.to_string(),
            self.global_batch.to_string(),
            self.per_device_batch.to_string(),
            self.max_seq_len.to_string(),
            self.dtype.as_str().to_string(),
            self.grad_accum.to_string(),
            self.grad_checkpointing.to_string(),
        ];
        let mut out = String::new();
        for (key, value) in KEYS.iter().zip(values) {
            out.push_str(key);
            out.push('=');
            out.push_str(&value);
            out.push('\n');
        }
        Ok(out)
    }

    /// Parses a manifest produced by [`TrainPlan::to_manifest`].
    pub fn from_manifest(text: &str) -> Result<Self, PlanError> {
        let mut values: [Option<(usize, String)>; 10] = Default::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| PlanError::Parse {
                line: line_no,
                message: "expected key=value".into(),
            })?;
            let key = key.trim();
            let slot = KEYS.iter().position(|k| *k == key).ok_or_else(|| PlanError::Parse {
                line: line_no,
                message: format!("unknown key `{key}`"),
            })?;
            if values[slot].is_some() {
                return Err(PlanError::Parse { line: line_no, message: format!("duplicate key `{key}`") });
            }
            values[slot] = Some((line_no, value.trim().to_string()));
        }

        let mut fields = values.into_iter().zip(KEYS);
        let mut next = || -> Result<(usize, String), PlanError> {
            let (value, key) = fields.next().expect("ten keys");
            value.ok_or(PlanError::MissingKey(key))
        };
        fn num<T: FromStr>(entry: (usize, String)) -> Result<T, PlanError> {
            entry.1.parse().map_err(|_| PlanError::Parse {
                line: entry.0,
                message: format!("`{}` is not a valid number", entry.1),
            })
        }
        let bad = |line: usize, message: String| PlanError::Parse { line, message };

        let devices = next()?;
        let devices = devices.1.parse().map_err(|m| bad(devices.0, m))?;
        let lr_init = num(next()?)?;
        let schedule = match next()? {
            (_, s) if s == "linear_to_zero" => Schedule::LinearToZero,
            (line, s) => return Err(bad(line, format!("unknown schedule `{s}`"))),
        };
        let epochs = num(next()?)?;
        let global_batch = num(next()?)?;
        let per_device_batch = num(next()?)?;
        let max_seq_len = num(next()?)?;
        let dtype = match next()? {
            (_, s) if s == "bf16" => Dtype::Bf16,
            (_, s) if s == "fp16" => Dtype::Fp16,
            (_, s) if s == "fp32" => Dtype::Fp32,
            (line, s) => return Err(bad(line, format!("unknown dtype `{s}`"))),
        };
        let grad_accum = num(next()?)?;
        let grad_checkpointing = match next()? {
            (_, s) if s == "true" => true,
            (_, s) if s == "false" => false,
            (line, s) => return Err(bad(line, format!("`{s}` is not a boolean"))),
        };
        let plan = TrainPlan {
            devices,
            lr_init,
            schedule,
            epochs,
            global_batch,
            per_device_batch,
            max_seq_len,
            dtype,
            grad_accum,
            grad_checkpointing,
        };
        plan.validate()?;
        Ok(plan)
    }
}
