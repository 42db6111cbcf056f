//! Long-format CSV ingestion with an optional companion split file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::dataset::{Split, TimeSeries, TimeSeriesSet};
use crate::error::{Error, Result};

/// Default test length (one seasonal cycle) when neither a companion split
/// file nor an explicit test length is given.
pub const DEFAULT_TEST_LEN: usize = 12;

/// Load a long-format CSV with header `series_id,period,value`.
///
/// Periods must be contiguous integers within each series. Splits come from
/// a companion file `<path>.splits` (columns
/// `series_id,train_end,val_end,test_end`, 1-based inclusive) when present;
/// otherwise auto splits are applied with `test_len` trailing points
/// (default one seasonal cycle) as the test span and the last 10% of the
/// remaining observations as validation.
pub fn load_csv(path: &Path, frequency: usize, test_len: Option<usize>) -> Result<TimeSeriesSet> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{} is empty", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["series_id", "period", "value"] {
        return Err(Error::Format(format!(
            "expected header 'series_id,period,value', got '{header}'"
        )));
    }

    // id -> (period -> value), insertion-ordered ids.
    let mut order: Vec<String> = Vec::new();
    let mut data: BTreeMap<String, BTreeMap<i64, f64>> = BTreeMap::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Format(format!(
                "line {}: expected 3 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let id = fields[0].to_string();
        let period: i64 = fields[1].parse().map_err(|_| {
            Error::Format(format!("line {}: bad period '{}'", lineno + 1, fields[1]))
        })?;
        let value: f64 = fields[2].parse().map_err(|_| {
            Error::Format(format!("line {}: bad value '{}'", lineno + 1, fields[2]))
        })?;
        let entry = data.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            BTreeMap::new()
        });
        if entry.insert(period, value).is_some() {
            return Err(Error::Gap(format!(
                "duplicate (series, period) = ({id}, {period})"
            )));
        }
    }
    if order.is_empty() {
        return Err(Error::Format(format!("{} has no data rows", path.display())));
    }

    let mut series = Vec::with_capacity(order.len());
    for id in &order {
        let points = &data[id];
        let first = *points.keys().next().unwrap();
        let last = *points.keys().next_back().unwrap();
        if (last - first + 1) as usize != points.len() {
            return Err(Error::Gap(format!(
                "series '{id}' has non-contiguous periods ({first}..{last} with {} rows)",
                points.len()
            )));
        }
        let values: Vec<f64> = points.values().copied().collect();
        let mut ts = TimeSeries::new(id.clone(), values, frequency)?;
        ts.start_index = first;
        series.push(ts);
    }

    let splits_path = companion_splits_path(path);
    if splits_path.exists() {
        let splits = load_splits(&splits_path, &series)?;
        TimeSeriesSet::new(series, splits)
    } else {
        TimeSeriesSet::with_auto_splits(series, test_len.unwrap_or(DEFAULT_TEST_LEN))
    }
}

/// `data.csv` -> `data.csv.splits`.
pub fn companion_splits_path(path: &Path) -> std::path::PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".splits");
    std::path::PathBuf::from(p)
}

fn load_splits(path: &Path, series: &[TimeSeries]) -> Result<Vec<Split>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{} is empty", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["series_id", "train_end", "val_end", "test_end"] {
        return Err(Error::Format(format!(
            "expected header 'series_id,train_end,val_end,test_end', got '{header}'"
        )));
    }
    let mut map: BTreeMap<String, Split> = BTreeMap::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!(
                "split line needs 4 fields: '{line}'"
            )));
        }
        let parse = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad split index '{s}'")))
        };
        // 1-based inclusive on disk, 0-based exclusive in memory: same number.
        map.insert(
            fields[0].to_string(),
            Split {
                train_end: parse(fields[1])?,
                val_end: parse(fields[2])?,
                test_end: parse(fields[3])?,
            },
        );
    }
    series
        .iter()
        .map(|s| {
            map.get(&s.id).copied().ok_or_else(|| {
                Error::Format(format!("split file missing series '{}'", s.id))
            })
        })
        .collect()
}
