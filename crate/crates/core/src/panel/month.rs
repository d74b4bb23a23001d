use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A calendar month, the atomic time unit of every panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Month {
    year: i32,
    month: u8,
}

impl Month {
    pub fn new(year: i32, month: u8) -> Result<Self, Error> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidArgument(format!("month {month} out of range 1..=12")));
        }
        Ok(Self { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    /// Months elapsed since year 0, January.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        let year = ordinal.div_euclid(12);
        let month = ordinal.rem_euclid(12) + 1;
        Self { year: year as i32, month: month as u8 }
    }

    pub fn offset(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn succ(self) -> Self {
        self.offset(1)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: Month) -> i64 {
        other.ordinal() - self.ordinal()
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Accepts `YYYY-MM` or `YYYY-MM-DD`; the day is discarded.
impl FromStr for Month {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| Error::Parse { location: format!("date `{s}`"), message: msg.to_string() };
        let parts: Vec<&str> = s.trim().split('-').collect();
        if parts.len() != 2 && parts.len() != 3 {
            return Err(bad("expected YYYY-MM or YYYY-MM-DD"));
        }
        if parts[0].len() != 4 || parts[1].len() != 2 {
            return Err(bad("expected YYYY-MM or YYYY-MM-DD"));
        }
        let year: i32 = parts[0].parse().map_err(|_| bad("bad year"))?;
        let month: u8 = parts[1].parse().map_err(|_| bad("bad month"))?;
        if parts.len() == 3 {
            let day: u8 = parts[2].parse().map_err(|_| bad("bad day"))?;
            if !(1..=31).contains(&day) || parts[2].len() != 2 {
                return Err(bad("bad day"));
            }
        }
        Month::new(year, month).map_err(|_| bad("month out of range"))
    }
}
