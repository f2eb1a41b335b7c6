//! Per-round metric records and the delimited output format.
//!
//! One CSV row per round, preceded by a single header line. Client-id
//! lists are packed into one field with `;` separators so the row stays
//! comma-delimited. Floats are written with the shortest round-trip
//! representation, which keeps repeated runs byte-identical.

use std::io::Write;

use crate::error::Error;
use crate::Result;

pub const HEADER: &str = "round,avg_accuracy,worst_accuracy,accuracy_std,round_energy_j,cumulative_energy_j,selected_clients,ascent_clients";

/// Metrics for one communication round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub avg_accuracy: f64,
    pub worst_accuracy: f64,
    pub accuracy_std: f64,
    pub round_energy_j: f64,
    pub cumulative_energy_j: f64,
    /// Descent-step clients `D^(t)`, ascending id order.
    pub selected_clients: Vec<usize>,
    /// Ascent-step clients `U^(t)`, ascending id order; empty for
    /// policies that do not maintain the robustness weights.
    pub ascent_clients: Vec<usize>,
}

impl RoundRecord {
    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.round,
            self.avg_accuracy,
            self.worst_accuracy,
            self.accuracy_std,
            self.round_energy_j,
            self.cumulative_energy_j,
            join_ids(&self.selected_clients),
            join_ids(&self.ascent_clients),
        )
    }
}

fn join_ids(ids: &[usize]) -> String {
    let mut s = String::new();
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        s.push_str(&id.to_string());
    }
    s
}

/// Appends round records to a sink, emitting the header exactly once.
pub struct RecordWriter<W: Write> {
    sink: W,
    header_written: bool,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(sink: W) -> Self {
        RecordWriter {
            sink,
            header_written: false,
        }
    }

    /// Writes one record as a delimited line in field order.
    pub fn write_round_record(&mut self, record: &RoundRecord) -> Result<()> {
        let io_err = |e| Error::io("<record sink>", e);
        if !self.header_written {
            writeln!(self.sink, "{HEADER}").map_err(io_err)?;
            self.header_written = true;
        }
        writeln!(self.sink, "{}", record.to_line()).map_err(io_err)
    }

    pub fn into_inner(self) -> W {
        self.sink
    }
}

/// Renders a full history to the output text format. Used by the CLI and
/// by determinism checks that compare whole runs.
pub fn render_history(history: &[RoundRecord]) -> String {
    let mut writer = RecordWriter::new(Vec::new());
    for record in history {
        writer
            .write_round_record(record)
            .expect("write to Vec cannot fail");
    }
    String::from_utf8(writer.into_inner()).expect("records are valid UTF-8")
}
