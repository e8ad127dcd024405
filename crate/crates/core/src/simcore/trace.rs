//! Job traces and reservation logs as CSV.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::netgraph::Network;
use crate::pathdisp::FlowPath;
use crate::schedulers::{Job, Reservation};

/// One row of a trace file: `job_id,src,dst,size_bits,arrival_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub job_id: u64,
    pub src: String,
    pub dst: String,
    pub size_bits: f64,
    pub arrival_s: f64,
}

fn trace_err(line: u64, msg: impl Into<String>) -> SimError {
    SimError::Trace {
        line,
        msg: msg.into(),
    }
}

/// Parses trace rows without resolving node names.
pub fn parse_trace_records(text: &str) -> Result<Vec<TraceRecord>, SimError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| trace_err(1, e.to_string()))?
        .clone();
    let expected = ["job_id", "src", "dst", "size_bits", "arrival_s"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(trace_err(
            1,
            format!("header must be {}", expected.join(",")),
        ));
    }
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for row in reader.deserialize::<TraceRecord>() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            trace_err(line, e.to_string())
        })?;
        let line = out.len() as u64 + 2;
        if !(row.size_bits.is_finite() && row.size_bits > 0.0) {
            return Err(trace_err(line, "size_bits must be positive"));
        }
        if !(row.arrival_s.is_finite() && row.arrival_s >= 0.0) {
            return Err(trace_err(line, "arrival_s must be finite and nonnegative"));
        }
        if !ids.insert(row.job_id) {
            return Err(trace_err(line, format!("duplicate job_id {}", row.job_id)));
        }
        out.push(row);
    }
    Ok(out)
}

/// Parses a trace and resolves node names against `net`. Rows are stably
/// sorted by arrival.
pub fn parse_trace(text: &str, net: &Network) -> Result<Vec<Job>, SimError> {
    let mut jobs = parse_trace_records(text)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i as u64 + 2;
            let source = net
                .node(&r.src)
                .ok_or_else(|| trace_err(line, format!("unknown node `{}`", r.src)))?;
            let destination = net
                .node(&r.dst)
                .ok_or_else(|| trace_err(line, format!("unknown node `{}`", r.dst)))?;
            if source == destination {
                return Err(trace_err(line, "src equals dst"));
            }
            Ok(Job {
                id: r.job_id,
                source,
                destination,
                size: r.size_bits,
                arrival: r.arrival_s,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    jobs.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
    Ok(jobs)
}

pub fn write_trace<W: Write>(net: &Network, jobs: &[Job], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    for j in jobs {
        w.serialize(TraceRecord {
            job_id: j.id,
            src: net.name(j.source).to_string(),
            dst: net.name(j.destination).to_string(),
            size_bits: j.size,
            arrival_s: j.arrival,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct LogRow<'a> {
    job_id: u64,
    src: &'a str,
    dst: &'a str,
    size_bits: f64,
    arrival_s: f64,
    start_s: f64,
    completion_s: f64,
    delay_s: f64,
    batch_or_slot_id: Option<u64>,
    num_paths: usize,
}

/// Reservation log, one row per job in the given order.
pub fn write_log<W: Write>(
    net: &Network,
    reservations: &[Reservation],
    out: W,
) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    if reservations.is_empty() {
        w.write_record([
            "job_id",
            "src",
            "dst",
            "size_bits",
            "arrival_s",
            "start_s",
            "completion_s",
            "delay_s",
            "batch_or_slot_id",
            "num_paths",
        ])?;
    }
    for r in reservations {
        w.serialize(LogRow {
            job_id: r.job.id,
            src: net.name(r.job.source),
            dst: net.name(r.job.destination),
            size_bits: r.job.size,
            arrival_s: r.job.arrival,
            start_s: r.start,
            completion_s: r.completion,
            delay_s: r.delay(),
            batch_or_slot_id: r.group,
            num_paths: r.num_paths,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Path dump: a `job <id>` line followed by one `a->b->c rate` line per path.
pub fn write_paths<W: Write>(
    net: &Network,
    reservations: &[Reservation],
    mut out: W,
) -> Result<(), SimError> {
    for r in reservations {
        writeln!(out, "job {}", r.job.id)?;
        out.write_all(render_paths(net, &r.paths).as_bytes())?;
    }
    Ok(())
}

pub fn render_paths(net: &Network, paths: &[FlowPath]) -> String {
    let mut s = String::new();
    for p in paths {
        let names: Vec<&str> = p.nodes.iter().map(|n| net.name(*n)).collect();
        s.push_str(&format!("{} {}\n", names.join("->"), p.rate));
    }
    s
}
