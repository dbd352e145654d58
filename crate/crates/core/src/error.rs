use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cyclic data: {0}")]
    InvalidCyclicData(String),
    #[error("genus is not an integer: r(m-2) - sum f_i = {0} is odd")]
    NonIntegralGenus(i64),
    #[error("negative genus: r(m-2) - sum f_i = {0} < -2")]
    NegativeGenus(i64),
    #[error("problem spec is invalid: {0}")]
    InvalidSpec(String),
    #[error("order {ord} at index {index} is not congruent to xi = {xi} modulo r")]
    CongruenceViolated { index: usize, ord: i64, xi: u32 },
    #[error("theta characteristic hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("input polynomial is zero")]
    ZeroInput,
    #[error("invalid cover function: {0}")]
    InvalidCover(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("path {path} exceeded its step budget of {budget}")]
    TrackingBudgetExceeded { path: usize, budget: usize },
    #[error("ramification polynomial does not cancel above degree {b}: balance sum(ord) = {sum_ord} but t_inf - t_0 = {expected}")]
    BalanceViolated { b: usize, sum_ord: i64, expected: i64 },
    #[error("parse error: {0}")]
    Parse(String),
}
