use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Action;
use crate::error::Result;

/// One line of an episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub episode: u64,
    pub step: usize,
    pub instance: usize,
    pub action: Action,
    pub reward: f64,
    pub done: bool,
    pub mask: Vec<bool>,
}

/// Writes steps as JSON lines.
pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, step: &TraceStep) -> Result<()> {
        serde_json::to_writer(&mut self.out, step)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
