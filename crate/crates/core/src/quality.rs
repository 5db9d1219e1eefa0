//! Benchmark-relative scoring rubric.
//!
//! A benchmark model scores 20/20/20 on architectural completeness, accuracy
//! and complexity plus 10 on structural completeness (70 in total). Each
//! component type or modeling error relative to the benchmark moves a part by
//! 2 points; complexity moves by at most 10 either way. Parts are clamped to
//! their estimated ranges, which bounds the total to [38, 94].

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BENCHMARK_TOTAL: i32 = 70;
pub const TOTAL_MIN: i32 = 38;
pub const TOTAL_MAX: i32 = 94;

const ARCH_COMPLETENESS: (i32, i32, i32) = (20, 14, 24);
const ARCH_ACCURACY: (i32, i32, i32) = (20, 12, 24);
const ARCH_COMPLEXITY_BASE: i32 = 20;
const COMPLEXITY_CAP: i32 = 10;
const STRUCT_COMPLETENESS: (i32, i32, i32) = (10, 2, 16);
const POINTS_PER_ITEM: i32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssessmentInput {
    /// Component-type categories better (+) or worse (-) than the benchmark.
    pub arch_completeness_delta: i32,
    /// Modeling errors relative to the benchmark (more errors is positive).
    pub arch_error_delta: i32,
    pub complexity_adjustment: i32,
    pub struct_delta: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QualityScore {
    pub arch_completeness: i32,
    pub arch_accuracy: i32,
    pub arch_complexity: i32,
    pub struct_completeness: i32,
    pub total: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QualityError {
    #[error("complexity adjustment {0} exceeds ±10 points")]
    ComplexityOutOfRange(i32),
    #[error("score {0} is outside [38, 94]")]
    TotalOutOfRange(i32),
}

fn clamped(part: (i32, i32, i32), delta: i32) -> i32 {
    let (base, lo, hi) = part;
    base.saturating_add(delta.saturating_mul(POINTS_PER_ITEM)).clamp(lo, hi)
}

pub fn score(input: &AssessmentInput) -> Result<QualityScore, QualityError> {
    if input.complexity_adjustment.abs() > COMPLEXITY_CAP {
        return Err(QualityError::ComplexityOutOfRange(input.complexity_adjustment));
    }
    let arch_completeness = clamped(ARCH_COMPLETENESS, input.arch_completeness_delta);
    let arch_accuracy = clamped(ARCH_ACCURACY, input.arch_error_delta.saturating_neg());
    let arch_complexity = ARCH_COMPLEXITY_BASE + input.complexity_adjustment;
    let struct_completeness = clamped(STRUCT_COMPLETENESS, input.struct_delta);
    Ok(QualityScore {
        arch_completeness,
        arch_accuracy,
        arch_complexity,
        struct_completeness,
        total: arch_completeness + arch_accuracy + arch_complexity + struct_completeness,
    })
}

/// Finds an assessment whose score totals exactly `total`.
///
/// Complexity absorbs as much as it can (keeping the remainder even), and the
/// rest is spread over the 2-point parts in a fixed order.
pub fn assessment_for_total(total: i32) -> Result<AssessmentInput, QualityError> {
    if !(TOTAL_MIN..=TOTAL_MAX).contains(&total) {
        return Err(QualityError::TotalOutOfRange(total));
    }
    let diff = total - BENCHMARK_TOTAL;
    let mut complexity = diff.clamp(-COMPLEXITY_CAP, COMPLEXITY_CAP);
    if (diff - complexity) % 2 != 0 {
        complexity -= diff.signum();
    }
    let mut steps = (diff - complexity) / POINTS_PER_ITEM;
    let mut input = AssessmentInput { complexity_adjustment: complexity, ..Default::default() };
    // (room above, room below) in 2-point steps for completeness, accuracy, structure
    let rooms = [(2, 3), (2, 4), (3, 4)];
    for (k, (up, down)) in rooms.into_iter().enumerate() {
        let take = if steps > 0 { steps.min(up) } else { steps.max(-down) };
        steps -= take;
        match k {
            0 => input.arch_completeness_delta = take,
            1 => input.arch_error_delta = -take,
            _ => input.struct_delta = take,
        }
    }
    debug_assert_eq!(steps, 0);
    Ok(input)
}
