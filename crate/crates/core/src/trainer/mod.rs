//! Tokenization, packing, the linear learning-rate schedule, the reference
//! trainer, loss-curve analysis and the plan manifest.

pub mod curve;
pub mod model;
pub mod pack;
pub mod plan;
pub mod schedule;
pub mod tokenizer;
pub mod train;

pub use curve::{analyze_curve, AnalyzeParams, CurveAnalysis, CurveEntry, CurveError, LossCurve};
pub use model::{Gradients, TinyLm};
pub use pack::{pack_records, pack_sequences, PackPolicy, PackedHeader, PackedSequence};
pub use plan::{DeviceSpec, Dtype, PlanError, Schedule, TrainPlan};
pub use schedule::{lr_at, total_steps, ScheduleError};
pub use train::{epoch_mean_losses, train_from, train_reference, ReferenceSettings, TrainError};
