use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::DataError;
use crate::model::{DayProfile, ErrorSample};

pub const PROFILE_COLUMNS: [&str; 4] = ["L_E_kwh", "L_H_kwh", "S_W_kwh", "S_PV_kwh"];
pub const ERROR_COLUMNS: [&str; 4] = ["delta_E", "delta_H", "delta_W", "delta_PV"];

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> DataError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(path, source),
        other => DataError::Parse { path: path.to_path_buf(), line, message: format!("{other:?}") },
    }
}

fn write_table(path: &Path, columns: [&str; 4], days: &[[&[f64]; 4]]) -> Result<(), DataError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut out = String::with_capacity(64 * 1024);
    out.push_str("day,slot");
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (d, series) in days.iter().enumerate() {
        for t in 0..series[0].len() {
            out.push_str(&format!("{},{}", d + 1, t + 1));
            for s in series {
                // Display prints the shortest string that parses back to the same f64
                out.push_str(&format!(",{}", s[t]));
            }
            out.push('\n');
        }
        if out.len() > 60 * 1024 {
            w.write_all(out.as_bytes()).map_err(|e| io_err(path, e))?;
            out.clear();
        }
    }
    w.write_all(out.as_bytes()).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a `day,slot,<4 columns>` table into per-day series.
fn read_table(path: &Path, columns: [&str; 4], slots: usize, non_negative: bool) -> Result<Vec<[Vec<f64>; 4]>, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let wanted: Vec<&str> = ["day", "slot"].into_iter().chain(columns).collect();
    let missing: Vec<&str> = wanted.iter().copied().filter(|c| find(c).is_none()).collect();
    if !missing.is_empty() {
        return Err(DataError::Schema { path: path.to_path_buf(), message: format!("missing columns: {}", missing.join(", ")) });
    }
    let idx: Vec<usize> = wanted.iter().map(|c| find(c).unwrap()).collect();

    let schema = |message: String| DataError::Schema { path: path.to_path_buf(), message };
    let mut days: Vec<[Vec<f64>; 4]> = Vec::new();
    let mut current: Option<(u64, [Vec<f64>; 4])> = None;
    let finish = |day: u64, series: [Vec<f64>; 4], days: &mut Vec<[Vec<f64>; 4]>| {
        if series[0].len() != slots {
            return Err(schema(format!("day {day} has {} slots, expected {slots}", series[0].len())));
        }
        days.push(series);
        Ok(())
    };

    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| DataError::Parse { path: path.to_path_buf(), line, message };
        let cell = |k: usize| record.get(idx[k]).unwrap_or("");
        let day: u64 = cell(0).parse().map_err(|_| parse_err(format!("day '{}' is not an integer", cell(0))))?;
        let slot: usize = cell(1).parse().map_err(|_| parse_err(format!("slot '{}' is not an integer", cell(1))))?;
        let mut values = [0.0; 4];
        for (k, v) in values.iter_mut().enumerate() {
            let text = cell(k + 2);
            *v = text
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(format!("{} value '{text}' is not a finite number", columns[k])))?;
            if non_negative && *v < 0.0 {
                return Err(parse_err(format!("{} value {text} is negative", columns[k])));
            }
        }
        if current.as_ref().is_some_and(|(d, _)| *d != day) {
            let (d, series) = current.take().unwrap();
            finish(d, series, &mut days)?;
        }
        let (_, series) = current.get_or_insert_with(|| (day, Default::default()));
        let expected = series[0].len() + 1;
        if slot != expected {
            return Err(parse_err(format!("day {day}: slot {slot} found where slot {expected} was expected")));
        }
        for (s, v) in series.iter_mut().zip(values) {
            s.push(v);
        }
    }
    if let Some((d, series)) = current {
        finish(d, series, &mut days)?;
    }
    Ok(days)
}

pub fn save_profiles(path: &Path, days: &[DayProfile]) -> Result<(), DataError> {
    let rows: Vec<[&[f64]; 4]> = days.iter().map(|d| d.series()).collect();
    write_table(path, PROFILE_COLUMNS, &rows)
}

pub fn load_profiles(path: &Path, slots: usize) -> Result<Vec<DayProfile>, DataError> {
    Ok(read_table(path, PROFILE_COLUMNS, slots, true)?.into_iter().map(DayProfile::from_series).collect())
}

pub fn save_errors(path: &Path, samples: &[ErrorSample]) -> Result<(), DataError> {
    let rows: Vec<[&[f64]; 4]> = samples.iter().map(|e| e.series()).collect();
    write_table(path, ERROR_COLUMNS, &rows)
}

pub fn load_errors(path: &Path, slots: usize) -> Result<Vec<ErrorSample>, DataError> {
    Ok(read_table(path, ERROR_COLUMNS, slots, false)?.into_iter().map(ErrorSample::from_series).collect())
}
