use thiserror::Error;

use crate::optimizer::PpsPoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid qubit state: {0}")]
    InvalidState(String),

    #[error("postselection probability {prob:e} is at or below the floor {floor:e}")]
    VanishingPostselection { prob: f64, floor: f64 },

    #[error("maximum is singular at coherence 1 with zero coupling")]
    SingularLimit,

    #[error("position grid too small: {0}")]
    GridTooSmall(String),

    #[error("objective returned non-finite value {value} at {point:?}")]
    NonFiniteObjective { value: f64, point: PpsPoint },
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "[0, inf)",
        })
    }
}
