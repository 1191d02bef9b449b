//! Reference evaluator speaking the wire protocol, backed by a toy model.

use std::io::{self, BufRead, Write};

use shape_core::toybench::ToyModel;
use shape_core::{Dataset, Sample};

use crate::protocol::{Request, Response, WireSample, PROTOCOL_VERSION};

fn send(out: &mut impl Write, response: &Response) -> io::Result<()> {
    serde_json::to_writer(&mut *out, response)?;
    out.write_all(b"\n")?;
    out.flush()
}

fn to_dataset(model: &ToyModel, samples: Vec<WireSample>) -> Result<Option<Dataset>, String> {
    if samples.is_empty() {
        return Ok(None);
    }
    let schema = model.schema();
    let samples = samples
        .into_iter()
        .enumerate()
        .map(|(i, mut s)| {
            let features = schema
                .ids()
                .map(|id| {
                    s.features
                        .remove(id)
                        .ok_or_else(|| format!("sample {i} lacks modality {id:?}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            // labels never cross the wire; any valid class will do here
            Ok(Sample { features, label: 0 })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Dataset::new(schema.clone(), samples, "wire")
        .map(Some)
        .map_err(|e| e.to_string())
}

/// Answers requests on `input` until it closes. Returns an error for a failed
/// handshake or an unreadable line; per-request problems are answered with an
/// error message and the loop goes on.
pub fn serve(model: &ToyModel, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    let mut ready = false;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: Request = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                let message = format!("malformed request: {e}");
                send(
                    &mut output,
                    &Response::Error {
                        request_id: None,
                        message: message.clone(),
                    },
                )?;
                return Err(io::Error::new(io::ErrorKind::InvalidData, message));
            }
        };
        match request {
            Request::Hello {
                version,
                schema,
                num_classes,
            } => {
                let problem = if version != PROTOCOL_VERSION {
                    Some(format!("unsupported protocol version {version}"))
                } else if schema != model.schema().modalities() || num_classes != model.schema().num_classes() {
                    Some("schema differs from the training data".to_string())
                } else {
                    None
                };
                if let Some(message) = problem {
                    send(
                        &mut output,
                        &Response::Error {
                            request_id: None,
                            message: message.clone(),
                        },
                    )?;
                    return Err(io::Error::new(io::ErrorKind::InvalidData, message));
                }
                ready = true;
                send(&mut output, &Response::Ready)?;
            }
            Request::Predict {
                request_id, samples, ..
            } => {
                let answer = if !ready {
                    Err("predict before hello".to_string())
                } else {
                    to_dataset(model, samples).and_then(|ds| match ds {
                        None => Ok(Vec::new()),
                        Some(ds) => model.predict(&ds).map_err(|e| e.to_string()),
                    })
                };
                let response = match answer {
                    Ok(labels) => Response::Predictions {
                        request_id,
                        labels: labels.into_iter().map(serde_json::Value::from).collect(),
                    },
                    Err(message) => Response::Error {
                        request_id: Some(request_id),
                        message,
                    },
                };
                send(&mut output, &response)?;
            }
        }
    }
    Ok(())
}
