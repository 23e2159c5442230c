use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::hypergraph::Weight;

pub const EVENT_HEADER: [&str; 3] = ["time_s", "seed", "lambda_minus_one"];

/// A new best `λ−1` value found `time` seconds into the run with `seed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImprovementEvent {
    pub time: f64,
    pub seed: u64,
    pub value: Weight,
}

pub fn write_events_csv<W: Write>(out: W, events: &[ImprovementEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENT_HEADER)?;
    for e in events {
        w.write_record([e.time.to_string(), e.seed.to_string(), e.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events_csv<R: Read>(input: R) -> Result<Vec<ImprovementEvent>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(EVENT_HEADER) {
        return Err(Error::parse(1, format!("expected header {}", EVENT_HEADER.join(","))));
    }
    let mut events = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let field = |j: usize| record.get(j).map(str::trim).ok_or_else(|| Error::parse(line, "missing field"));
        let time: f64 = field(0)?.parse().map_err(|_| Error::parse(line, "bad time"))?;
        if !time.is_finite() || time < 0.0 {
            return Err(Error::parse(line, "time must be finite and non-negative"));
        }
        let seed = field(1)?.parse().map_err(|_| Error::parse(line, "bad seed"))?;
        let value = field(2)?.parse().map_err(|_| Error::parse(line, "bad lambda_minus_one"))?;
        events.push(ImprovementEvent { time, seed, value });
    }
    Ok(events)
}
