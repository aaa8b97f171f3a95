use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::discriminant::DiscriminantTrace;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    Domain { what: &'static str, value: f64 },
    /// A parameter point does not have the dimension the evaluation needs.
    DimensionMismatch { expected: usize, found: usize },
    /// `theta(g)/pi` is not within tolerance of an integer.
    NotAGramPoint { t: f64, offset: f64 },
    /// A summation range falls outside `1..=max`.
    IndexRange { lo: usize, hi: usize, max: usize },
    /// Newton met a derivative too small to divide by.
    FlatPoint { t: f64, iterates: Vec<f64> },
    /// An iteration ran out of steps. Carries the history.
    NonConvergence { what: &'static str, iterates: Vec<f64> },
    /// Both AFE values at a Gram point are too small to trust their sign.
    Indeterminate { n: u64 },
    /// The discriminant changed sign before the requested parameter.
    Collision { r: f64, trace: Box<DiscriminantTrace> },
    /// Continuation of the extremum failed before the requested parameter.
    ContinuationLost { r: f64, trace: Box<DiscriminantTrace> },
    /// A partition list is not a valid cover of `1..=N`.
    InvalidPartition(&'static str),
    /// Any other malformed input.
    InvalidInput(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what}: argument {value} out of domain"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "parameter dimension {found}, expected {expected}")
            }
            Error::NotAGramPoint { t, offset } => {
                write!(f, "t = {t} is not a Gram point (theta/pi off by {offset})")
            }
            Error::IndexRange { lo, hi, max } => {
                write!(f, "index range {lo}..={hi} outside 1..={max}")
            }
            Error::FlatPoint { t, .. } => write!(f, "flat point at t = {t}"),
            Error::NonConvergence { what, iterates } => {
                write!(f, "{what} did not converge after {} iterates", iterates.len())
            }
            Error::Indeterminate { n } => write!(f, "sign of Z at Gram point {n} is indeterminate"),
            Error::Collision { r, .. } => write!(f, "collision at r = {r}"),
            Error::ContinuationLost { r, .. } => write!(f, "continuation lost at r = {r}"),
            Error::InvalidPartition(why) => write!(f, "invalid partition: {why}"),
            Error::InvalidInput(why) => write!(f, "invalid input: {why}"),
        }
    }
}

impl core::error::Error for Error {}
