//! Binary framing used by the socket transport.
//!
//! Every frame is a little-endian `u32` body length followed by the body.
//! The body starts with a one-byte tag; all integers are little-endian `u32`.
//!
//! | tag    | frame           | fields after the tag                                         |
//! |--------|-----------------|--------------------------------------------------------------|
//! | `0x01` | hello           | `rank`                                                       |
//! | `0x10` | row assignment  | `row`                                                        |
//! | `0x11` | terminate       | `sentinel_row`                                               |
//! | `0x12` | row result      | `row`, `cell_count`, `cell_count` × cell                     |
//! | `0x13` | block result    | `rank`, `row_count`, then per row: `cell_count`, cells       |
//! | `0x7f` | abort           | `byte_len`, UTF-8 reason                                     |
//!
//! `hello` is sent once by each worker right after connecting so the master
//! can map connections to ranks. `abort` reports a worker failure.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::WorkerMessage;
use crate::kernel::Iterations;

/// Upper bound on a frame body; guards against corrupt length prefixes.
pub const MAX_FRAME_LEN: usize = 1 << 30;

const TAG_HELLO: u8 = 0x01;
const TAG_ROW_ASSIGNMENT: u8 = 0x10;
const TAG_TERMINATE: u8 = 0x11;
const TAG_ROW_RESULT: u8 = 0x12;
const TAG_BLOCK_RESULT: u8 = 0x13;
const TAG_ABORT: u8 = 0x7f;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("value {0} does not fit in 32 bits")]
    Overflow(usize),
    #[error("frame of {0} bytes exceeds the {MAX_FRAME_LEN}-byte limit")]
    FrameTooLarge(usize),
    #[error("unknown frame tag {0:#04x}")]
    UnknownTag(u8),
    #[error("truncated frame: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("{0} trailing bytes after frame body")]
    TrailingBytes(usize),
    #[error("empty frame body")]
    Empty,
    #[error("abort reason is not valid UTF-8")]
    BadUtf8,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Hello { rank: usize },
    Message(WorkerMessage),
    Abort(String),
}

fn put_u32(buf: &mut Vec<u8>, v: usize) -> Result<(), WireError> {
    let v = u32::try_from(v).map_err(|_| WireError::Overflow(v))?;
    buf.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn put_cells(buf: &mut Vec<u8>, cells: &[Iterations]) -> Result<(), WireError> {
    put_u32(buf, cells.len())?;
    buf.reserve(cells.len() * 4);
    for c in cells {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    Ok(())
}

/// Encodes a frame body (tag and fields, no length prefix).
pub fn encode_body(frame: &Frame) -> Result<Vec<u8>, WireError> {
    let mut buf = Vec::new();
    match frame {
        Frame::Hello { rank } => {
            buf.push(TAG_HELLO);
            put_u32(&mut buf, *rank)?;
        }
        Frame::Message(WorkerMessage::RowAssignment { row }) => {
            buf.push(TAG_ROW_ASSIGNMENT);
            put_u32(&mut buf, *row)?;
        }
        Frame::Message(WorkerMessage::Terminate { sentinel_row }) => {
            buf.push(TAG_TERMINATE);
            put_u32(&mut buf, *sentinel_row)?;
        }
        Frame::Message(WorkerMessage::RowResult { row, cells }) => {
            buf.push(TAG_ROW_RESULT);
            put_u32(&mut buf, *row)?;
            put_cells(&mut buf, cells)?;
        }
        Frame::Message(WorkerMessage::BlockResult { rank, rows }) => {
            buf.push(TAG_BLOCK_RESULT);
            put_u32(&mut buf, *rank)?;
            put_u32(&mut buf, rows.len())?;
            for row in rows {
                put_cells(&mut buf, row)?;
            }
        }
        Frame::Abort(reason) => {
            buf.push(TAG_ABORT);
            put_u32(&mut buf, reason.len())?;
            buf.extend_from_slice(reason.as_bytes());
        }
    }
    if buf.len() > MAX_FRAME_LEN {
        return Err(WireError::FrameTooLarge(buf.len()));
    }
    Ok(buf)
}

/// Writes a length-prefixed frame.
pub fn write_frame<W: Write>(out: &mut W, frame: &Frame) -> Result<(), WireError> {
    let body = encode_body(frame)?;
    let mut framed = Vec::with_capacity(body.len() + 4);
    put_u32(&mut framed, body.len())?;
    framed.extend_from_slice(&body);
    out.write_all(&framed)?;
    out.flush()?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], WireError> {
        if self.bytes.len() < n {
            return Err(WireError::Truncated { needed: n - self.bytes.len() });
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn index(&mut self) -> Result<usize, WireError> {
        self.u32().map(|v| v as usize)
    }

    fn cells(&mut self) -> Result<Vec<Iterations>, WireError> {
        let count = self.index()?;
        let raw = self.take(count.checked_mul(4).ok_or(WireError::Overflow(count))?)?;
        Ok(raw.chunks_exact(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect())
    }
}

/// Decodes a frame body produced by [`encode_body`].
pub fn decode_body(body: &[u8]) -> Result<Frame, WireError> {
    let (&tag, rest) = body.split_first().ok_or(WireError::Empty)?;
    let mut cur = Cursor { bytes: rest };
    let frame = match tag {
        TAG_HELLO => Frame::Hello { rank: cur.index()? },
        TAG_ROW_ASSIGNMENT => Frame::Message(WorkerMessage::RowAssignment { row: cur.index()? }),
        TAG_TERMINATE => Frame::Message(WorkerMessage::Terminate { sentinel_row: cur.index()? }),
        TAG_ROW_RESULT => {
            let row = cur.index()?;
            Frame::Message(WorkerMessage::RowResult { row, cells: cur.cells()? })
        }
        TAG_BLOCK_RESULT => {
            let rank = cur.index()?;
            let count = cur.index()?;
            // each row needs at least its 4-byte length
            if count > cur.bytes.len() / 4 {
                return Err(WireError::Truncated { needed: count * 4 - cur.bytes.len() });
            }
            let rows = (0..count).map(|_| cur.cells()).collect::<Result<_, _>>()?;
            Frame::Message(WorkerMessage::BlockResult { rank, rows })
        }
        TAG_ABORT => {
            let len = cur.index()?;
            let text = cur.take(len)?;
            Frame::Abort(String::from_utf8(text.to_vec()).map_err(|_| WireError::BadUtf8)?)
        }
        other => return Err(WireError::UnknownTag(other)),
    };
    if !cur.bytes.is_empty() {
        return Err(WireError::TrailingBytes(cur.bytes.len()));
    }
    Ok(frame)
}

/// Reads one frame. Returns `Ok(None)` on a clean end of stream at a frame
/// boundary.
pub fn read_frame<R: Read>(input: &mut R) -> Result<Option<Frame>, WireError> {
    let mut len = [0u8; 4];
    let mut filled = 0;
    while filled < 4 {
        match input.read(&mut len[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(WireError::Truncated { needed: 4 - filled }),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_le_bytes(len) as usize;
    if len > MAX_FRAME_LEN {
        return Err(WireError::FrameTooLarge(len));
    }
    let mut body = vec![0u8; len];
    input.read_exact(&mut body).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => WireError::Truncated { needed: len },
        _ => WireError::Io(e),
    })?;
    decode_body(&body).map(Some)
}
