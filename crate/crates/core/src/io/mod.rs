//! File formats: finds and contexts CSV ingestion, result reports and plots.
//!
//! Finds CSV: `find_id,context_id,count,use_start,use_end`.
//! Contexts CSV: `context_id,duration,staffing` (staffing may be blank).
//! Both are UTF-8, comma separated, with a mandatory header row.

pub mod plot;
pub mod report;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::chronology::{ContextId, FindId, FindRecord};
use crate::error::{Error, Result};
use crate::intensity::ContextRecord;

pub const FINDS_HEADER: [&str; 5] = ["find_id", "context_id", "count", "use_start", "use_end"];
pub const CONTEXTS_HEADER: [&str; 3] = ["context_id", "duration", "staffing"];

struct Rows<'a> {
    source: &'a str,
    header: &'static [&'static str],
}

impl Rows<'_> {
    fn err(&self, line: u64, column: &str, message: impl Into<String>) -> Error {
        Error::Input {
            source_name: self.source.to_owned(),
            line,
            column: column.to_owned(),
            message: message.into(),
        }
    }

    fn read<R: Read>(&self, reader: R) -> Result<Vec<(u64, StringRecord)>> {
        let mut rdr = ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(Trim::All)
            .from_reader(reader);
        let mut out = Vec::new();
        let mut saw_header = false;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                self.err(line, "", e.to_string())
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if !saw_header {
                let got: Vec<&str> = rec.iter().collect();
                if got != self.header {
                    return Err(self.err(
                        line,
                        "",
                        format!("expected header `{}`, found `{}`", self.header.join(","), got.join(",")),
                    ));
                }
                saw_header = true;
                continue;
            }
            if rec.iter().all(str::is_empty) {
                continue;
            }
            out.push((line, rec));
        }
        if !saw_header {
            return Err(self.err(1, "", format!("missing header `{}`", self.header.join(","))));
        }
        Ok(out)
    }

    fn field<'r>(&self, rec: &'r StringRecord, line: u64, idx: usize) -> Result<&'r str> {
        match rec.get(idx) {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(self.err(line, self.header[idx], "missing value")),
        }
    }

    fn parse<T: std::str::FromStr>(&self, rec: &StringRecord, line: u64, idx: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.field(rec, line, idx)?;
        raw.parse()
            .map_err(|e: T::Err| self.err(line, self.header[idx], format!("cannot parse `{raw}`: {e}")))
    }

    fn check_width(&self, rec: &StringRecord, line: u64, min: usize) -> Result<()> {
        if rec.len() < min || rec.len() > self.header.len() {
            return Err(self.err(
                line,
                "",
                format!("expected {} fields, found {}", self.header.len(), rec.len()),
            ));
        }
        Ok(())
    }
}

pub fn read_finds<R: Read>(reader: R, source: &str) -> Result<Vec<FindRecord>> {
    let rows = Rows {
        source,
        header: &FINDS_HEADER,
    };
    let mut finds = Vec::new();
    for (line, rec) in rows.read(reader)? {
        rows.check_width(&rec, line, FINDS_HEADER.len())?;
        let count: f64 = rows.parse(&rec, line, 2)?;
        if !count.is_finite() || count < 0.0 {
            return Err(rows.err(line, "count", format!("count must be finite and >= 0, got {count}")));
        }
        let use_start: i64 = rows.parse(&rec, line, 3)?;
        let use_end: i64 = rows.parse(&rec, line, 4)?;
        if use_start > use_end {
            return Err(rows.err(line, "use_end", format!("use_end {use_end} precedes use_start {use_start}")));
        }
        finds.push(FindRecord {
            find_id: FindId(rows.field(&rec, line, 0)?.to_owned()),
            context_id: ContextId(rows.field(&rec, line, 1)?.to_owned()),
            count,
            use_start,
            use_end,
        });
    }
    Ok(finds)
}

pub fn read_contexts<R: Read>(reader: R, source: &str) -> Result<Vec<ContextRecord>> {
    let rows = Rows {
        source,
        header: &CONTEXTS_HEADER,
    };
    let mut contexts = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, rec) in rows.read(reader)? {
        rows.check_width(&rec, line, 2)?;
        let id = rows.field(&rec, line, 0)?.to_owned();
        let duration: f64 = rows.parse(&rec, line, 1)?;
        if !(duration.is_finite() && duration > 0.0) {
            return Err(rows.err(line, "duration", format!("duration must be finite and > 0, got {duration}")));
        }
        let staffing = match rec.get(2) {
            None | Some("") => 1.0,
            Some(_) => rows.parse::<f64>(&rec, line, 2)?,
        };
        if !(staffing.is_finite() && staffing > 0.0) {
            return Err(rows.err(line, "staffing", format!("staffing must be finite and > 0, got {staffing}")));
        }
        if !seen.insert(id.clone()) {
            return Err(rows.err(line, "context_id", format!("duplicate context id `{id}`")));
        }
        contexts.push(ContextRecord {
            context_id: ContextId(id),
            duration,
            staffing,
        });
    }
    Ok(contexts)
}

pub fn load_finds(path: &Path) -> Result<Vec<FindRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_finds(file, &path.display().to_string())
}

pub fn load_contexts(path: &Path) -> Result<Vec<ContextRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_contexts(file, &path.display().to_string())
}
