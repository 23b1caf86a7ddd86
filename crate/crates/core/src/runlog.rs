//! Per-step audit trail, written as JSON Lines.

use crate::verify::Action;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogRecord {
    pub t: usize,
    pub action: Option<Action>,
    pub contained: bool,
    pub pss_cells: usize,
    pub cage_center: [f64; 2],
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyRecord>,
}

/// Extra fields logged by the ball controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    #[serde(rename = "E_max")]
    pub e_max: f64,
    #[serde(rename = "max_E")]
    pub max_e: f64,
    pub h: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub entropy: f64,
    pub lost_mass: f64,
    pub dtheta: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub mass_loss_warning: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<RunLogRecord>,
}

impl RunLog {
    pub fn push(&mut self, record: RunLogRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}
