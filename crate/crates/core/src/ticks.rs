//! Millisecond tick timeline anchored at 0001-01-01T00:00:00 (proleptic Gregorian).
//!
//! Both log sources are converted onto this timeline so records can be merged
//! by plain integer comparison.

use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MS_PER_SECOND: u64 = 1_000;
pub const MS_PER_MINUTE: u64 = 60 * MS_PER_SECOND;
pub const MS_PER_DAY: u64 = 86_400_000;

/// Days between 0001-01-01 and 1970-01-01.
const DAYS_TO_UNIX_EPOCH: i64 = 719_162;

const MONTH_ABBREV: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// Milliseconds elapsed since 0001-01-01T00:00:00.000.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TickTime(pub u64);

impl TickTime {
    pub const EPOCH: TickTime = TickTime(0);

    pub fn as_millis(self) -> u64 {
        self.0
    }

    pub fn to_civil(self) -> CivilDateTime {
        from_ticks(self)
    }
}

impl fmt::Display for TickTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalendarField {
    Year,
    Month,
    Day,
    Hour,
    Minute,
    Second,
    Millisecond,
}

impl fmt::Display for CalendarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CalendarField::Year => "year",
            CalendarField::Month => "month",
            CalendarField::Day => "day",
            CalendarField::Hour => "hour",
            CalendarField::Minute => "minute",
            CalendarField::Second => "second",
            CalendarField::Millisecond => "millisecond",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CalendarError {
    #[error("{field} out of range: {value}")]
    OutOfRange { field: CalendarField, value: i64 },
    #[error("unrecognized timestamp syntax")]
    Syntax,
}

fn out_of_range(field: CalendarField, value: i64) -> CalendarError {
    CalendarError::OutOfRange { field, value }
}

/// A calendar date-time with millisecond precision and no timezone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CivilDateTime {
    pub year: i64,
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    pub second: u32,
    pub millis: u32,
}

impl CivilDateTime {
    pub fn new(
        year: i64,
        month: u32,
        day: u32,
        hour: u32,
        minute: u32,
        second: u32,
        millis: u32,
    ) -> Self {
        CivilDateTime { year, month, day, hour, minute, second, millis }
    }

    pub fn date(year: i64, month: u32, day: u32) -> Self {
        Self::new(year, month, day, 0, 0, 0, 0)
    }

    pub fn validate(&self) -> Result<(), CalendarError> {
        if self.year < 1 {
            return Err(out_of_range(CalendarField::Year, self.year));
        }
        if !(1..=12).contains(&self.month) {
            return Err(out_of_range(CalendarField::Month, self.month as i64));
        }
        if self.day < 1 || self.day > days_in_month(self.year, self.month) {
            return Err(out_of_range(CalendarField::Day, self.day as i64));
        }
        if self.hour > 23 {
            return Err(out_of_range(CalendarField::Hour, self.hour as i64));
        }
        if self.minute > 59 {
            return Err(out_of_range(CalendarField::Minute, self.minute as i64));
        }
        if self.second > 59 {
            return Err(out_of_range(CalendarField::Second, self.second as i64));
        }
        if self.millis > 999 {
            return Err(out_of_range(CalendarField::Millisecond, self.millis as i64));
        }
        Ok(())
    }

    fn ms_within_day(&self) -> u64 {
        ((self.hour as u64 * 60 + self.minute as u64) * 60 + self.second as u64) * MS_PER_SECOND
            + self.millis as u64
    }

    /// `DD-Mon-YYYY HH:MM:SS.mmm`, the journal timestamp form.
    pub fn journal_format(&self) -> JournalStamp {
        JournalStamp(*self)
    }

    /// `YYYY-MM-DDTHH:MM:SS.mmm`, the tracker timestamp form.
    pub fn iso_format(&self) -> IsoStamp {
        IsoStamp(*self)
    }
}

pub struct JournalStamp(CivilDateTime);

impl fmt::Display for JournalStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.0;
        write!(
            f,
            "{:02}-{}-{:04} {:02}:{:02}:{:02}.{:03}",
            c.day,
            MONTH_ABBREV[(c.month - 1) as usize],
            c.year,
            c.hour,
            c.minute,
            c.second,
            c.millis
        )
    }
}

pub struct IsoStamp(CivilDateTime);

impl fmt::Display for IsoStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.0;
        write!(
            f,
            "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}",
            c.year, c.month, c.day, c.hour, c.minute, c.second, c.millis
        )
    }
}

pub fn is_leap_year(year: i64) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

// Hinnant's days_from_civil, shifted so that 0001-01-01 is day 0.
fn days_since_epoch(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let m = month as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468 + DAYS_TO_UNIX_EPOCH
}

fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days - DAYS_TO_UNIX_EPOCH + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let year = yoe + era * 400 + if month <= 2 { 1 } else { 0 };
    (year, month, day)
}

/// Converts a calendar timestamp to ticks: `days × 86_400_000 + ms_within_day`.
pub fn to_ticks(dt: &CivilDateTime) -> Result<TickTime, CalendarError> {
    dt.validate()?;
    let days = days_since_epoch(dt.year, dt.month, dt.day) as u64;
    Ok(TickTime(days * MS_PER_DAY + dt.ms_within_day()))
}

pub fn from_ticks(t: TickTime) -> CivilDateTime {
    let days = (t.0 / MS_PER_DAY) as i64;
    let mut rem = t.0 % MS_PER_DAY;
    let (year, month, day) = civil_from_days(days);
    let millis = (rem % 1000) as u32;
    rem /= 1000;
    let second = (rem % 60) as u32;
    rem /= 60;
    let minute = (rem % 60) as u32;
    let hour = (rem / 60) as u32;
    CivilDateTime { year, month, day, hour, minute, second, millis }
}

fn parse_digits(s: &str, width: usize) -> Result<u32, CalendarError> {
    if s.len() != width || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CalendarError::Syntax);
    }
    s.parse().map_err(|_| CalendarError::Syntax)
}

fn parse_clock(s: &str) -> Result<(u32, u32, u32, u32), CalendarError> {
    // HH:MM:SS.mmm
    let (hms, ms) = s.split_once('.').ok_or(CalendarError::Syntax)?;
    let mut parts = hms.split(':');
    let h = parse_digits(parts.next().ok_or(CalendarError::Syntax)?, 2)?;
    let m = parse_digits(parts.next().ok_or(CalendarError::Syntax)?, 2)?;
    let sec = parse_digits(parts.next().ok_or(CalendarError::Syntax)?, 2)?;
    if parts.next().is_some() {
        return Err(CalendarError::Syntax);
    }
    Ok((h, m, sec, parse_digits(ms, 3)?))
}

/// Parses the pinned journal form `DD-Mon-YYYY HH:MM:SS.mmm` (English month names).
pub fn parse_journal_timestamp(s: &str) -> Result<CivilDateTime, CalendarError> {
    let (date, clock) = s.trim().split_once(' ').ok_or(CalendarError::Syntax)?;
    let mut parts = date.split('-');
    let day = parse_digits(parts.next().ok_or(CalendarError::Syntax)?, 2)?;
    let mon = parts.next().ok_or(CalendarError::Syntax)?;
    let year = parse_digits(parts.next().ok_or(CalendarError::Syntax)?, 4)?;
    if parts.next().is_some() {
        return Err(CalendarError::Syntax);
    }
    let month = MONTH_ABBREV
        .iter()
        .position(|m| *m == mon)
        .ok_or(CalendarError::Syntax)? as u32
        + 1;
    let (hour, minute, second, millis) = parse_clock(clock)?;
    let dt = CivilDateTime::new(year as i64, month, day, hour, minute, second, millis);
    dt.validate()?;
    Ok(dt)
}

/// Parses `YYYY-MM-DDTHH:MM:SS.mmm`.
pub fn parse_iso_timestamp(s: &str) -> Result<CivilDateTime, CalendarError> {
    let (date, clock) = s.trim().split_once('T').ok_or(CalendarError::Syntax)?;
    let mut parts = date.split('-');
    let year = parse_digits(parts.next().ok_or(CalendarError::Syntax)?, 4)?;
    let month = parse_digits(parts.next().ok_or(CalendarError::Syntax)?, 2)?;
    let day = parse_digits(parts.next().ok_or(CalendarError::Syntax)?, 2)?;
    if parts.next().is_some() {
        return Err(CalendarError::Syntax);
    }
    let (hour, minute, second, millis) = parse_clock(clock)?;
    let dt = CivilDateTime::new(year as i64, month, day, hour, minute, second, millis);
    dt.validate()?;
    Ok(dt)
}
