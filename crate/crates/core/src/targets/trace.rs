//! Observable console behaviour shared by every executable artifact kind.

use std::fmt;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    /// A read found no more input; `read_index` is the zero-based read.
    InputExhausted {
        read_index: usize,
    },
    /// A read value lies outside the declared value set (specifications
    /// only): the input sequence is not admissible.
    Inadmissible {
        read_index: usize,
    },
    Error {
        message: String,
    },
}

/// Inputs consumed, outputs produced, and how the run ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub inputs: Vec<i64>,
    pub outputs: Vec<String>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn is_admissible(&self) -> bool {
        !matches!(self.outcome, Outcome::Inadmissible { .. })
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in {:?} out {:?}", self.inputs, self.outputs)?;
        match &self.outcome {
            Outcome::Completed => Ok(()),
            Outcome::InputExhausted { read_index } => write!(f, " (input exhausted at read {read_index})"),
            Outcome::Inadmissible { read_index } => write!(f, " (read {read_index} outside its value set)"),
            Outcome::Error { message } => write!(f, " (error: {message})"),
        }
    }
}
