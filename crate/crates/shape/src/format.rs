//! Line-delimited JSON dataset files: a header line, then one record per line.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use shape_core::data::{validate_dataset, RawDataset, RawHeader, RawRecord};
use shape_core::Dataset;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing header line")]
    MissingHeader,
    #[error(transparent)]
    Invalid(#[from] shape_core::Error),
}

/// Parses a document without validating it against its header.
pub fn parse_raw(reader: impl BufRead) -> Result<RawDataset, FormatError> {
    let mut header: Option<RawHeader> = None;
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let parse = |message: String| FormatError::Parse { line: i + 1, message };
        let line = line.map_err(|e| parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(serde_json::from_str(&line).map_err(|e| parse(format!("header: {e}")))?);
        } else {
            let record: RawRecord = serde_json::from_str(&line).map_err(|e| parse(e.to_string()))?;
            records.push(record);
        }
    }
    let header = header.ok_or(FormatError::MissingHeader)?;
    Ok(RawDataset { header, records })
}

pub fn read_dataset_from(reader: impl BufRead) -> Result<Dataset, FormatError> {
    Ok(validate_dataset(&parse_raw(reader)?)?)
}

pub fn read_dataset(path: &Path) -> Result<Dataset, FormatError> {
    let file = File::open(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_dataset_from(BufReader::new(file))
}

pub fn write_dataset_to(dataset: &Dataset, mut writer: impl Write) -> io::Result<()> {
    let raw = dataset.to_raw();
    serde_json::to_writer(&mut writer, &raw.header)?;
    writer.write_all(b"\n")?;
    for record in &raw.records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_dataset_to(dataset, BufWriter::new(file)).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use shape_core::toybench::{generate, Regime, RegimeSpec};

    #[test]
    fn roundtrip_is_exact() {
        let ds = generate(&RegimeSpec::new(Regime::CorrelatedComplementary, 50, 3)).unwrap();
        let mut buf = Vec::new();
        write_dataset_to(&ds, &mut buf).unwrap();
        let back = read_dataset_from(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn reports_offending_sample() {
        let text = r#"{"schema":[{"id":"A","dim":1},{"id":"B","dim":2}],"num_classes":2,"dataset_id":"x"}
{"label":0,"features":{"A":[1.0],"B":[0.0,1.0]}}
{"label":1,"features":{"A":[1.0],"B":[0.0]}}
"#;
        let err = read_dataset_from(text.as_bytes()).unwrap_err();
        assert!(
            matches!(
                err,
                FormatError::Invalid(shape_core::Error::InvalidSample { sample: 1, .. })
            ),
            "{err}"
        );
    }

    #[test]
    fn bad_json_names_line() {
        let text = "{\"schema\":[],\"num_classes\":2,\"dataset_id\":\"x\"}\nnot json\n";
        let err = read_dataset_from(text.as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(read_dataset_from(&b""[..]), Err(FormatError::MissingHeader)));
    }
}
