use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{TimeSeries, YearMonth};
use crate::error::{Error, Result};

const MISSING_TOKENS: [&str; 6] = ["", "NA", "NaN", "nan", "null", "."];

/// Loads every non-date column of a monthly CSV as a [`TimeSeries`].
///
/// The first column is the date column unless `date_column` names another.
/// Months absent from the file become missing entries.
pub fn load_csv(path: impl AsRef<Path>, date_column: Option<&str>) -> Result<Vec<TimeSeries>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, date_column)
}

pub fn read_csv<R: Read>(reader: R, date_column: Option<&str>) -> Result<Vec<TimeSeries>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() {
        return Err(Error::Schema("header row is empty".into()));
    }
    let date_idx = match date_column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("date column {name:?} not found")))?,
        None => 0,
    };
    let value_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != date_idx).collect();

    let mut rows: BTreeMap<YearMonth, Vec<Option<f64>>> = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let record = record.map_err(|e| Error::Schema(format!("line {line}: {e}")))?;
        let date_cell = record.get(date_idx).unwrap_or("");
        let date: YearMonth = date_cell
            .parse()
            .map_err(|_| Error::Schema(format!("line {line}: unparseable date {date_cell:?}")))?;
        let mut values = Vec::with_capacity(value_cols.len());
        for &c in &value_cols {
            let cell = record.get(c).unwrap_or("").trim();
            if MISSING_TOKENS.contains(&cell) {
                values.push(None);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Cell {
                row: line,
                column: headers[c].clone(),
                message: format!("non-numeric value {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Cell {
                    row: line,
                    column: headers[c].clone(),
                    message: format!("non-finite value {cell:?}"),
                });
            }
            values.push(Some(v));
        }
        if rows.insert(date, values).is_some() {
            return Err(Error::Schema(format!("line {line}: duplicate date {date}")));
        }
    }
    let (&first, _) = rows
        .first_key_value()
        .ok_or_else(|| Error::Schema("no data rows".into()))?;
    let (&last, _) = rows.last_key_value().unwrap();
    let len = first.months_until(last) as usize + 1;

    value_cols
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let mut values = vec![None; len];
            for (date, row) in &rows {
                values[first.months_until(*date) as usize] = row[j];
            }
            TimeSeries::new(headers[c].clone(), first, values)
        })
        .collect()
}

/// Writes series sharing a calendar as `date,<name>...`; missing cells are
/// left empty.
pub fn write_series_csv<W: Write>(writer: W, series: &[&TimeSeries]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io {
        path: "<csv writer>".into(),
        source: std::io::Error::other(e),
    };
    if series.is_empty() {
        return Ok(());
    }
    let start = series.iter().map(|s| s.start()).min().unwrap();
    let end = series.iter().map(|s| s.end()).max().unwrap();
    let mut header = vec!["date".to_string()];
    header.extend(series.iter().map(|s| s.name().to_string()));
    wtr.write_record(&header).map_err(io)?;
    for k in 0..=start.months_until(end) {
        let date = start.add_months(k);
        let mut rec = vec![date.to_string()];
        rec.extend(series.iter().map(|s| s.get(date).map(|v| format!("{v}")).unwrap_or_default()));
        wtr.write_record(&rec).map_err(io)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<csv writer>".into(),
        source,
    })
}
