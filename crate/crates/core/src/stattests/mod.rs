//! Unit-root and cointegration tests.

mod adf;
mod johansen;

pub use adf::{adf_p_value, adf_test, default_lag_order, AdfResult, RegressionKind, P_VALUE_CEIL, P_VALUE_FLOOR};
pub use johansen::{johansen_trace, JohansenResult, MAX_SERIES, TRACE_CRITICAL_5PCT};

/// Default lag order (in levels) for the Johansen test.
pub const DEFAULT_JOHANSEN_LAG: usize = 2;
