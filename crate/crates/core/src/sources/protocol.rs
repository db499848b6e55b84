//! Evaluator wire protocol.
//!
//! One JSON object per line over the evaluator's stdin/stdout. The evaluator
//! first writes a [`Handshake`]; afterwards each [`Request`] line is answered,
//! in order, by exactly one [`Response`] line.
//!
//! ```text
//! <- {"protocol":1,"objectives":["mce","dsp"],"sources":[...]}
//! -> {"id":0,"source":1,"values":{"n_layers":2,...},"cv_seed":17}
//! <- {"id":0,"objectives":[0.21,0.05],"wall_seconds":3.2}
//! -> {"id":1,"source":2,"values":{...},"cv_seed":18}
//! <- {"id":1,"error":"training failed on fold 3"}
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::space::{Kind, SearchSpace};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub protocol: u32,
    pub objectives: Vec<String>,
    #[serde(default)]
    pub sources: Vec<Value>,
}

impl Handshake {
    pub fn new(objectives: &[&str], sources: Vec<Value>) -> Self {
        Handshake {
            protocol: PROTOCOL_VERSION,
            objectives: objectives.iter().map(|s| s.to_string()).collect(),
            sources,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub source: usize,
    pub values: Map<String, Value>,
    pub cv_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Response {
    Success {
        id: u64,
        objectives: Vec<f64>,
        wall_seconds: f64,
    },
    Failure {
        id: u64,
        error: String,
    },
}

impl Response {
    pub fn id(&self) -> u64 {
        match self {
            Response::Success { id, .. } | Response::Failure { id, .. } => *id,
        }
    }
}

/// Named native values in space order; integer dimensions as JSON integers.
pub fn encode_values(space: &SearchSpace, native: &[f64]) -> Map<String, Value> {
    space
        .dims()
        .iter()
        .zip(native)
        .map(|(dim, &v)| {
            let value = match dim.kind {
                Kind::Integer => Value::from(v as i64),
                Kind::Real => Value::from(v),
            };
            (dim.name.clone(), value)
        })
        .collect()
}

/// Native values in space order, checked against each dimension's domain.
pub fn decode_values(space: &SearchSpace, values: &Map<String, Value>) -> Result<Vec<f64>> {
    space
        .dims()
        .iter()
        .map(|dim| {
            let v = values
                .get(&dim.name)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Protocol(format!("missing numeric value `{}`", dim.name)))?;
            dim.encode(v)?;
            Ok(v)
        })
        .collect()
}

pub fn parse_handshake(line: &str) -> Result<Handshake> {
    let hs: Handshake = serde_json::from_str(line)
        .map_err(|e| Error::Protocol(format!("bad handshake `{}`: {e}", line.trim())))?;
    if hs.protocol != PROTOCOL_VERSION {
        return Err(Error::Protocol(format!(
            "unsupported protocol version {} (expected {PROTOCOL_VERSION})",
            hs.protocol
        )));
    }
    if hs.objectives.is_empty() {
        return Err(Error::Protocol("handshake lists no objectives".into()));
    }
    Ok(hs)
}

pub fn parse_response(line: &str) -> Result<Response> {
    serde_json::from_str(line)
        .map_err(|e| Error::Protocol(format!("malformed response `{}`: {e}", line.trim())))
}

/// Runs the evaluator side of the protocol until `input` closes.
///
/// Malformed requests and handler failures are answered with an error
/// response; the loop keeps serving.
pub fn serve<R, W, H>(input: R, mut output: W, handshake: &Handshake, mut handler: H) -> Result<usize>
where
    R: BufRead,
    W: Write,
    H: FnMut(&Request) -> std::result::Result<Vec<f64>, String>,
{
    writeln!(output, "{}", serde_json::to_string(handshake)?)?;
    output.flush()?;
    let mut served = 0;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Request>(&line) {
            Ok(req) => {
                let started = std::time::Instant::now();
                match handler(&req) {
                    Ok(objectives) => Response::Success {
                        id: req.id,
                        objectives,
                        wall_seconds: started.elapsed().as_secs_f64(),
                    },
                    Err(error) => Response::Failure { id: req.id, error },
                }
            }
            Err(e) => {
                let id = serde_json::from_str::<Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(Value::as_u64))
                    .unwrap_or(0);
                Response::Failure {
                    id,
                    error: format!("malformed request: {e}"),
                }
            }
        };
        writeln!(output, "{}", serde_json::to_string(&response)?)?;
        output.flush()?;
        served += 1;
    }
    Ok(served)
}
