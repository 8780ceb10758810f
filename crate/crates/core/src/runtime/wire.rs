//! Length-prefixed wire frames for the sender/receiver protocol, plus an
//! in-process byte channel so the framed transport can be exercised without
//! real sockets.
//!
//! Frame layout (all little-endian): `u32` payload length, then the payload.
//! A seed payload is `u8 kind=1, u32 sender_rank, u32 order_index,
//! u32 seed_vertex, u32 covering_len, u32[] sample_ids`. A termination payload
//! is `u8 kind=2, u32 sender_rank, u32 seed_count, (u32 vertex, u64 marginal)*`.

use std::collections::VecDeque;
use std::sync::mpsc;

use crate::cover::Solution;
use crate::error::{Error, Result};
use crate::runtime::{Message, SeedMessage, TerminationMessage};
use crate::sampling::CoveringSet;

pub const KIND_SEED: u8 = 1;
pub const KIND_TERMINATE: u8 = 2;

/// Encode one message payload (no length prefix).
pub fn encode_message(msg: &Message) -> Vec<u8> {
    let mut out = Vec::new();
    match msg {
        Message::Seed(sm) => {
            out.push(KIND_SEED);
            out.extend_from_slice(&sm.sender_rank.to_le_bytes());
            out.extend_from_slice(&sm.order_index.to_le_bytes());
            out.extend_from_slice(&sm.seed.to_le_bytes());
            out.extend_from_slice(&(sm.covering.samples.len() as u32).to_le_bytes());
            for &id in &sm.covering.samples {
                out.extend_from_slice(&id.to_le_bytes());
            }
        }
        Message::Terminate(tm) => {
            out.push(KIND_TERMINATE);
            out.extend_from_slice(&tm.sender_rank.to_le_bytes());
            out.extend_from_slice(&(tm.local_solution.seeds.len() as u32).to_le_bytes());
            for (&v, &g) in tm.local_solution.seeds.iter().zip(&tm.local_solution.marginals) {
                out.extend_from_slice(&v.to_le_bytes());
                out.extend_from_slice(&g.to_le_bytes());
            }
        }
    }
    out
}

/// Prefix a payload with its length.
pub fn frame(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 4);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

/// Decode one payload. `universe_size` stamps decoded solutions, since the
/// frame intentionally does not carry it.
pub fn decode_message(payload: &[u8], universe_size: u64) -> Result<Message> {
    let mut cur = Cursor { buf: payload, pos: 0 };
    let kind = cur.u8()?;
    match kind {
        KIND_SEED => {
            let sender_rank = cur.u32()?;
            let order_index = cur.u32()?;
            let seed = cur.u32()?;
            let len = cur.u32()? as usize;
            let mut samples = Vec::with_capacity(len);
            for _ in 0..len {
                samples.push(cur.u32()?);
            }
            cur.finish()?;
            Ok(Message::Seed(SeedMessage {
                sender_rank,
                order_index,
                seed,
                covering: CoveringSet { vertex: seed, samples },
            }))
        }
        KIND_TERMINATE => {
            let sender_rank = cur.u32()?;
            let count = cur.u32()? as usize;
            let mut solution = Solution::empty(universe_size);
            for _ in 0..count {
                let vertex = cur.u32()?;
                let marginal = cur.u64()?;
                solution.seeds.push(vertex);
                solution.marginals.push(marginal);
                solution.coverage += marginal;
            }
            cur.finish()?;
            Ok(Message::Terminate(TerminationMessage { sender_rank, local_solution: solution }))
        }
        other => Err(Error::Protocol(format!("unknown frame kind {other}"))),
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Protocol("truncated frame payload".into()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Protocol("trailing bytes in frame payload".into()));
        }
        Ok(())
    }
}

/// Sending half of an in-process byte stream.
pub struct ByteTx {
    tx: mpsc::Sender<Vec<u8>>,
}

impl ByteTx {
    /// Frame and ship one message.
    pub fn send(&self, msg: &Message) -> Result<()> {
        let bytes = frame(&encode_message(msg));
        self.tx
            .send(bytes)
            .map_err(|_| Error::Transport("byte channel closed".into()))
    }
}

/// Receiving half: reassembles frames from whatever chunk boundaries the
/// transport produced.
pub struct ByteRx {
    rx: mpsc::Receiver<Vec<u8>>,
    buf: VecDeque<u8>,
    universe_size: u64,
    closed: bool,
}

/// What a non-blocking poll of an inbox produced.
pub enum Polled {
    Msg(Message),
    Pending,
    Closed,
}

impl ByteRx {
    pub fn poll(&mut self) -> Result<Polled> {
        loop {
            if let Some(msg) = self.try_frame()? {
                return Ok(Polled::Msg(msg));
            }
            if self.closed {
                if self.buf.is_empty() {
                    return Ok(Polled::Closed);
                }
                return Err(Error::Transport("stream ended mid-frame".into()));
            }
            match self.rx.try_recv() {
                Ok(chunk) => self.buf.extend(chunk),
                Err(mpsc::TryRecvError::Empty) => return Ok(Polled::Pending),
                Err(mpsc::TryRecvError::Disconnected) => self.closed = true,
            }
        }
    }

    fn try_frame(&mut self) -> Result<Option<Message>> {
        if self.buf.len() < 4 {
            return Ok(None);
        }
        let len_bytes: Vec<u8> = self.buf.iter().take(4).copied().collect();
        let len = u32::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
        if self.buf.len() < 4 + len {
            return Ok(None);
        }
        self.buf.drain(..4);
        let payload: Vec<u8> = self.buf.drain(..len).collect();
        decode_message(&payload, self.universe_size).map(Some)
    }
}

/// A paired framed transport endpoint.
pub fn byte_channel(universe_size: u64) -> (ByteTx, ByteRx) {
    let (tx, rx) = mpsc::channel();
    (ByteTx { tx }, ByteRx { rx, buf: VecDeque::new(), universe_size, closed: false })
}
