//! Master/worker wire protocol.
//!
//! ```text
//! +---------------------+-------------------------------------------+
//! | length: u32 BE      | canonical JSON payload (UTF-8)            |
//! +---------------------+-------------------------------------------+
//! ```
//!
//! Canonical means object keys sorted lexicographically and no
//! insignificant whitespace, so equal messages always produce equal bytes.
//! The variant name travels in a `kind` field.

use std::io::{self, Read, Write};

use parlin_core::{GramPartial, ModelCoefficients, PartitionSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::CsvSchema;

pub const PROTOCOL_VERSION: u32 = 1;

/// Largest accepted payload: 64 MiB.
pub const MAX_PAYLOAD: usize = 64 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("payload of {0} bytes exceeds the {MAX_PAYLOAD}-byte limit")]
    TooLarge(usize),

    #[error("malformed frame: {0}")]
    Malformed(String),

    #[error("connection closed by peer")]
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Message {
    Hello {
        worker_rank: u32,
        protocol_version: u32,
    },
    HelloAck {
        job_id: u64,
    },
    Assign {
        dataset_path: String,
        schema: CsvSchema,
        /// Range of positions in the shuffled train index list.
        partition: PartitionSpec,
        /// Range of positions in the shuffled test index list.
        test_partition: PartitionSpec,
        n_records: u64,
        split_seed: u64,
        split_ratio: f64,
    },
    ComputeGram {
        scope: Scope,
    },
    GramResult {
        partial: GramPartial,
    },
    ComputeGradient {
        theta: ModelCoefficients,
    },
    GradientResult {
        grad_sum: Vec<f64>,
        n: u64,
    },
    ComputeSse {
        theta: ModelCoefficients,
    },
    SseResult {
        sse: f64,
        n: u64,
    },
    Done,
    Fail {
        reason: String,
    },
    Shutdown,
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "Hello",
            Message::HelloAck { .. } => "HelloAck",
            Message::Assign { .. } => "Assign",
            Message::ComputeGram { .. } => "ComputeGram",
            Message::GramResult { .. } => "GramResult",
            Message::ComputeGradient { .. } => "ComputeGradient",
            Message::GradientResult { .. } => "GradientResult",
            Message::ComputeSse { .. } => "ComputeSse",
            Message::SseResult { .. } => "SseResult",
            Message::Done => "Done",
            Message::Fail { .. } => "Fail",
            Message::Shutdown => "Shutdown",
        }
    }
}

/// Canonical JSON text of `msg`.
pub fn to_canonical_json(msg: &Message) -> Result<String, FrameError> {
    // `Value` objects are B-tree maps, so keys come out sorted.
    let value = serde_json::to_value(msg).map_err(|e| FrameError::Malformed(e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| FrameError::Malformed(e.to_string()))
}

pub fn encode_frame(msg: &Message) -> Result<Vec<u8>, FrameError> {
    let payload = to_canonical_json(msg)?;
    if payload.len() > MAX_PAYLOAD {
        return Err(FrameError::TooLarge(payload.len()));
    }
    let mut frame = Vec::with_capacity(4 + payload.len());
    frame.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    frame.extend_from_slice(payload.as_bytes());
    Ok(frame)
}

fn decode_payload(payload: &[u8]) -> Result<Message, FrameError> {
    if payload.is_empty() {
        return Err(FrameError::Malformed("zero-length payload".into()));
    }
    serde_json::from_slice(payload).map_err(|e| FrameError::Malformed(e.to_string()))
}

/// Decodes exactly one frame occupying all of `bytes`.
pub fn decode_frame(bytes: &[u8]) -> Result<Message, FrameError> {
    let Some((prefix, payload)) = bytes.split_first_chunk::<4>() else {
        return Err(FrameError::Malformed(format!("{} bytes is shorter than the length prefix", bytes.len())));
    };
    let len = u32::from_be_bytes(*prefix) as usize;
    if len > MAX_PAYLOAD {
        return Err(FrameError::TooLarge(len));
    }
    if payload.len() != len {
        return Err(FrameError::Malformed(format!(
            "length prefix says {len} bytes, frame carries {}",
            payload.len()
        )));
    }
    decode_payload(payload)
}

pub fn write_message<W: Write>(w: &mut W, msg: &Message) -> Result<(), FrameError> {
    w.write_all(&encode_frame(msg)?)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame. A clean end of stream before the prefix is `Closed`.
pub fn read_message<R: Read>(r: &mut R) -> Result<Message, FrameError> {
    let mut prefix = [0u8; 4];
    let mut filled = 0;
    while filled < 4 {
        match r.read(&mut prefix[filled..]) {
            Ok(0) if filled == 0 => return Err(FrameError::Closed),
            Ok(0) => return Err(FrameError::Malformed("truncated length prefix".into())),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(prefix) as usize;
    if len > MAX_PAYLOAD {
        return Err(FrameError::TooLarge(len));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FrameError::Malformed("truncated payload".into()),
        _ => FrameError::Io(e),
    })?;
    decode_payload(&payload)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hello_frame_bytes() {
        let payload = br#"{"kind":"Hello","protocol_version":1,"worker_rank":0}"#;
        let mut expected = vec![0x00, 0x00, 0x00, payload.len() as u8];
        expected.extend_from_slice(payload);
        let got = encode_frame(&Message::Hello {
            worker_rank: 0,
            protocol_version: 1,
        })
        .unwrap();
        assert_eq!(got, expected);
        assert_eq!(&got[..4], &[0x00, 0x00, 0x00, 0x35]);
    }

    #[test]
    fn zero_length_payload_is_malformed() {
        assert!(matches!(decode_frame(&[0, 0, 0, 0]), Err(FrameError::Malformed(_))));
        assert!(matches!(read_message(&mut &[0u8, 0, 0, 0][..]), Err(FrameError::Malformed(_))));
    }

    #[test]
    fn truncated_and_oversized_frames() {
        assert!(matches!(decode_frame(&[0, 0]), Err(FrameError::Malformed(_))));
        assert!(matches!(decode_frame(&[0, 0, 0, 5, b'{']), Err(FrameError::Malformed(_))));
        assert!(matches!(decode_frame(&[0xff, 0xff, 0xff, 0xff]), Err(FrameError::TooLarge(_))));
        assert!(matches!(read_message(&mut &[][..]), Err(FrameError::Closed)));
        assert!(matches!(read_message(&mut &[0u8, 0, 0, 9, b'{'][..]), Err(FrameError::Malformed(_))));
    }

    #[test]
    fn unknown_kind_is_malformed() {
        let payload = br#"{"kind":"Nope"}"#;
        let mut frame = (payload.len() as u32).to_be_bytes().to_vec();
        frame.extend_from_slice(payload);
        assert!(matches!(decode_frame(&frame), Err(FrameError::Malformed(_))));
    }

    #[test]
    fn unit_variants_carry_only_the_kind() {
        assert_eq!(to_canonical_json(&Message::Done).unwrap(), r#"{"kind":"Done"}"#);
        assert_eq!(to_canonical_json(&Message::Shutdown).unwrap(), r#"{"kind":"Shutdown"}"#);
    }

    #[test]
    fn stream_carries_consecutive_frames() {
        let mut buf = Vec::new();
        write_message(&mut buf, &Message::Done).unwrap();
        write_message(&mut buf, &Message::HelloAck { job_id: 7 }).unwrap();
        let mut r = &buf[..];
        assert_eq!(read_message(&mut r).unwrap(), Message::Done);
        assert_eq!(read_message(&mut r).unwrap(), Message::HelloAck { job_id: 7 });
        assert!(matches!(read_message(&mut r), Err(FrameError::Closed)));
    }
}
