//! CSV metrics files.

use std::io::{Read, Write};

use crate::bench::MetricsRow;

pub const HEADER: [&str; 8] = ["seed", "step", "n_states", "n_naive", "n_aobs", "n_bdd", "ms_aobs", "ms_bdd"];

pub fn write_csv<W: Write>(rows: &[MetricsRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.step.to_string(),
            r.n_states.to_string(),
            r.n_naive.to_string(),
            r.n_aobs.to_string(),
            r.n_bdd.map(|b| b.to_string()).unwrap_or_default(),
            format!("{:.3}", r.ms_aobs),
            r.ms_bdd.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("line {line}: bad `{field}` value")]
    Field { line: u64, field: &'static str },
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<MetricsRow>, ReadError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(ReadError::Header(header));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str, ReadError> { rec.get(i).ok_or(ReadError::Field { line, field: HEADER[i] }) };
        fn parse<T: std::str::FromStr>(s: &str, line: u64, field: &'static str) -> Result<T, ReadError> {
            s.parse().map_err(|_| ReadError::Field { line, field })
        }
        let opt = |i: usize| -> Result<Option<&str>, ReadError> { field(i).map(|s| (!s.is_empty()).then_some(s)) };
        rows.push(MetricsRow {
            seed: parse(field(0)?, line, HEADER[0])?,
            step: parse(field(1)?, line, HEADER[1])?,
            n_states: parse(field(2)?, line, HEADER[2])?,
            n_naive: parse(field(3)?, line, HEADER[3])?,
            n_aobs: parse(field(4)?, line, HEADER[4])?,
            n_bdd: opt(5)?.map(|s| parse(s, line, HEADER[5])).transpose()?,
            ms_aobs: parse(field(6)?, line, HEADER[6])?,
            ms_bdd: opt(7)?.map(|s| parse(s, line, HEADER[7])).transpose()?,
        });
    }
    Ok(rows)
}
