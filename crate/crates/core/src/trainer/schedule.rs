//! Linear decay of the learning rate from its initial value to zero.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("step {step} outside [0, {total_steps}]")]
    StepOutOfRange { step: u64, total_steps: u64 },
    #[error("total_steps must be at least 1")]
    ZeroTotalSteps,
}

/// Learning rate after `step` of `total_steps` updates: `lr_init * (1 - step / total_steps)`.
///
/// `lr_at(0, ..)` is exactly `lr_init` and `lr_at(total_steps, ..)` is exactly zero.
pub fn lr_at(step: u64, total_steps: u64, lr_init: f64) -> Result<f64, ScheduleError> {
    if total_steps == 0 {
        return Err(ScheduleError::ZeroTotalSteps);
    }
    if step > total_steps {
        return Err(ScheduleError::StepOutOfRange { step, total_steps });
    }
    let remaining = (total_steps - step) as f64 / total_steps as f64;
    Ok(lr_init * remaining)
}

/// Number of optimizer steps for a run: every epoch walks all sequences in
/// batches of `global_batch`, the last batch possibly short.
pub fn total_steps(num_sequences: usize, global_batch: usize, epochs: usize) -> u64 {
    if global_batch == 0 {
        return 0;
    }
    (epochs * num_sequences.div_ceil(global_batch)) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints_are_exact() {
        assert_eq!(lr_at(0, 1000, 5e-7).unwrap(), 5e-7);
        assert_eq!(lr_at(1000, 1000, 5e-7).unwrap(), 0.0);
        assert_eq!(lr_at(500, 1000, 5e-7).unwrap(), 2.5e-7);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            lr_at(11, 10, 1.0),
            Err(ScheduleError::StepOutOfRange { step: 11, total_steps: 10 })
        );
        assert_eq!(lr_at(0, 0, 1.0), Err(ScheduleError::ZeroTotalSteps));
    }

    #[test]
    fn step_count_rounds_partial_batches_up() {
        assert_eq!(total_steps(25, 24, 5), 10);
        assert_eq!(total_steps(24, 24, 5), 5);
        assert_eq!(total_steps(0, 24, 5), 0);
    }

    proptest! {
        #[test]
        fn non_increasing_and_affine(total in 1u64..10_000, a in 0u64..10_000, b in 0u64..10_000) {
            let a = a % (total + 1);
            let b = b % (total + 1);
            let lr = 5e-7;
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(lr_at(hi, total, lr).unwrap() <= lr_at(lo, total, lr).unwrap());
            if (a + b) % 2 == 0 {
                let mid = lr_at((a + b) / 2, total, lr).unwrap();
                let sum = lr_at(a, total, lr).unwrap() + lr_at(b, total, lr).unwrap();
                prop_assert!((sum - 2.0 * mid).abs() <= 1e-12 * lr);
            }
        }
    }
}
