//! Charger activation as a multidimensional 0-1 knapsack: instance
//! construction, exhaustive solvers, a greedy heuristic and the text format.

mod exact;
mod greedy;
mod instance;
mod io;

pub use exact::{solve_pi, solve_pii_exact, solve_pii_exact_with, MAX_EXACT_N};
pub use greedy::solve_pii_greedy;
pub use instance::{build_instance, Capacity, KnapsackInstance};
pub use io::{format_instance, parse_instance};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("instance shape: {0}")]
    Shape(String),
    #[error("non-finite entry {0}")]
    NonFinite(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("exact mode enumerates 2^n activations and is limited to n <= {max}; this instance has n = {n}. Use pii-greedy instead")]
    TooLarge { n: usize, max: usize },
}

/// An activation vector with its objective and per-row slack.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub c: Vec<bool>,
    pub value: f64,
    pub slack: Vec<f64>,
}

impl Solution {
    pub fn c_string(&self) -> String {
        self.c.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}
