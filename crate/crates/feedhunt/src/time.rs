//! Epoch-second time primitives shared across the pipeline.
//!
//! All timestamps are UTC epoch seconds; no timezone arithmetic anywhere.

use serde::{Deserialize, Serialize};

pub const SECS_PER_DAY: i64 = 86_400;

/// Half-open interval `[start, end)` of UTC epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    /// Window covering all representable time.
    pub fn all() -> Self {
        Self { start: i64::MIN, end: i64::MAX }
    }

    pub fn contains(&self, t: i64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn is_valid(&self) -> bool {
        self.start < self.end
    }

    /// True when this window and `[start, end)` of the given day overlap.
    pub fn overlaps_day(&self, day: i64) -> bool {
        let day_start = day * SECS_PER_DAY;
        let day_end = day_start + SECS_PER_DAY;
        self.start < day_end && self.end > day_start
    }
}

/// UTC day index (days since the epoch), floor division so pre-1970
/// timestamps land on the correct day.
pub fn day_of(epoch_secs: i64) -> i64 {
    epoch_secs.div_euclid(SECS_PER_DAY)
}

/// Renders a day index as `YYYY-MM-DD` (proleptic Gregorian).
pub fn day_to_date(day: i64) -> String {
    // Howard Hinnant's civil_from_days.
    let z = day + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };
    format!("{y:04}-{m:02}-{d:02}")
}
