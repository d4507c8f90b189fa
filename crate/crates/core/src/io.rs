//! CSV reading and writing for features, vectors and error functions.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::error_model::{ErrorModel, ExampleIds};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::from(e).in_file(path))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).in_file(path))
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source)
}

fn parse_cell(text: Option<&str>, row: usize, name: &str) -> Result<f64> {
    let text = text.ok_or_else(|| Error::parse(row, format!("missing field `{name}`")))?;
    match text.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::parse(row, format!("`{name}` = {text:?} is not a finite number"))),
    }
}

/// Reads `example_id,x1,...,xp`. Example ids get indices in row order.
pub fn read_features<R: Read>(source: R, ids: &mut ExampleIds) -> Result<Array2<f64>> {
    let mut input = reader(source);
    let header = input.headers()?.clone();
    if header.get(0) != Some("example_id") {
        return Err(Error::parse(0, "first column must be `example_id`"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if names.is_empty() {
        return Err(Error::parse(0, "no feature columns"));
    }
    let mut values = Vec::new();
    for (r, record) in input.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::parse(row, e.to_string()))?;
        let id = record.get(0).unwrap_or_default();
        if ids.get(id).is_some() {
            return Err(Error::parse(row, format!("duplicate example_id {id:?}")));
        }
        ids.intern(id);
        for (c, name) in names.iter().enumerate() {
            values.push(parse_cell(record.get(c + 1), row, name)?);
        }
    }
    if ids.is_empty() {
        return Err(Error::parse(0, "no examples"));
    }
    Ok(Array2::from_shape_vec((ids.len(), names.len()), values).expect("rows have equal length"))
}

/// Reads a single `value` column.
pub fn read_vector<R: Read>(source: R) -> Result<Array1<f64>> {
    let mut input = reader(source);
    let header = input.headers()?.clone();
    let col = header
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| Error::parse(0, "missing column `value` in header"))?;
    input
        .records()
        .enumerate()
        .map(|(r, record)| {
            let record = record.map_err(|e| Error::parse(r + 1, e.to_string()))?;
            parse_cell(record.get(col), r + 1, "value")
        })
        .collect()
}

pub fn write_vector<W: Write>(writer: W, values: ArrayView1<'_, f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["value"])?;
    for v in values {
        out.write_record([v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_features<W: Write>(writer: W, ids: &ExampleIds, features: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["example_id".to_owned()];
    header.extend((1..=features.ncols()).map(|j| format!("x{j}")));
    out.write_record(&header)?;
    for (i, row) in features.rows().into_iter().enumerate() {
        let mut record = vec![ids.id(i).to_owned()];
        record.extend(row.iter().map(f64::to_string));
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_breakpoints<W: Write>(writer: W, ids: &ExampleIds, model: &ErrorModel) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["example_id", "value", "delta_fp", "delta_fn"])?;
    for b in model.breakpoints() {
        out.write_record([
            ids.id(b.example).to_owned(),
            b.value.to_string(),
            b.delta_fp.to_string(),
            b.delta_fn.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_labels<W: Write>(writer: W, ids: &ExampleIds, labels: &[i8]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["example_id", "label"])?;
    for (i, y) in labels.iter().enumerate() {
        out.write_record([ids.id(i).to_owned(), y.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Ids `"1"` to `"n"`.
pub fn numbered_ids(n: usize) -> ExampleIds {
    (1..=n).map(|i| i.to_string()).collect()
}
