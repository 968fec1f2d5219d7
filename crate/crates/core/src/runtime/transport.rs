//! Point-to-point messaging between the master (rank 0) and its workers.
//!
//! A [`Transport`] hands out one [`Endpoint`] per rank. Edges exist only
//! between the master and each worker; workers never talk to each other.
//! Delivery per sender/receiver pair is reliable, exactly-once and FIFO.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::Arc;

use thiserror::Error;

use super::WorkerMessage;

pub type Rank = usize;

pub const MASTER: Rank = 0;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("rank {from} has no link to rank {to}")]
    NoRoute { from: Rank, to: Rank },
    #[error("link to rank {0} is closed")]
    Disconnected(Rank),
    #[error("all peers of rank {0} have disconnected")]
    AllDisconnected(Rank),
    #[error("rank {rank} aborted: {reason}")]
    PeerAborted { rank: Rank, reason: String },
    #[error("transport setup failed: {0}")]
    Setup(String),
    #[error("wire error: {0}")]
    Wire(#[from] super::wire::WireError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub trait Endpoint: Send {
    fn rank(&self) -> Rank;

    fn send(&mut self, dest: Rank, msg: WorkerMessage) -> Result<(), TransportError>;

    /// Blocks until a message from `src` arrives. Fails early if any peer
    /// aborts while waiting.
    fn recv_from(&mut self, src: Rank) -> Result<WorkerMessage, TransportError>;

    /// Blocks until a message from any peer arrives.
    fn recv_any(&mut self) -> Result<(Rank, WorkerMessage), TransportError>;

    /// Best-effort notice to the master that this task has failed.
    fn abort(&mut self, reason: &str);
}

/// Creates the endpoints for a run; index `r` of the result is rank `r`.
pub trait Transport {
    type Endpoint: Endpoint + 'static;

    fn endpoints(&self, num_tasks: usize) -> Result<Vec<Self::Endpoint>, TransportError>;
}

/// What a peer can put into a rank's inbox.
#[derive(Debug)]
pub(crate) enum Delivery {
    Message(WorkerMessage),
    Aborted(String),
    Closed,
}

/// Inbox shared by the transports: one queue fed by every peer, plus the
/// messages set aside while waiting for a specific sender.
pub(crate) struct Mailbox {
    owner: Rank,
    inbox: Receiver<(Rank, Delivery)>,
    pending: VecDeque<(Rank, Delivery)>,
}

impl Mailbox {
    pub(crate) fn new(owner: Rank, inbox: Receiver<(Rank, Delivery)>) -> Self {
        Mailbox { owner, inbox, pending: VecDeque::new() }
    }

    fn next(&mut self) -> Result<(Rank, Delivery), TransportError> {
        self.inbox.recv().map_err(|_| TransportError::AllDisconnected(self.owner))
    }

    pub(crate) fn recv_from(&mut self, src: Rank) -> Result<WorkerMessage, TransportError> {
        if let Some(aborted) = self.pending_abort() {
            return Err(aborted);
        }
        if let Some(pos) = self.pending.iter().position(|(from, _)| *from == src) {
            let (_, delivery) = self.pending.remove(pos).expect("position is in range");
            return into_message(src, delivery);
        }
        loop {
            let (from, delivery) = self.next().map_err(|_| TransportError::Disconnected(src))?;
            if from == src {
                return into_message(src, delivery);
            }
            if let Delivery::Aborted(reason) = delivery {
                return Err(TransportError::PeerAborted { rank: from, reason });
            }
            self.pending.push_back((from, delivery));
        }
    }

    pub(crate) fn recv_any(&mut self) -> Result<(Rank, WorkerMessage), TransportError> {
        loop {
            let (from, delivery) = match self.pending.pop_front() {
                Some(item) => item,
                None => self.next()?,
            };
            match delivery {
                Delivery::Message(msg) => return Ok((from, msg)),
                Delivery::Aborted(reason) => return Err(TransportError::PeerAborted { rank: from, reason }),
                Delivery::Closed => continue,
            }
        }
    }

    fn pending_abort(&mut self) -> Option<TransportError> {
        let pos = self.pending.iter().position(|(_, d)| matches!(d, Delivery::Aborted(_)))?;
        match self.pending.remove(pos) {
            Some((rank, Delivery::Aborted(reason))) => Some(TransportError::PeerAborted { rank, reason }),
            _ => unreachable!(),
        }
    }
}

fn into_message(src: Rank, delivery: Delivery) -> Result<WorkerMessage, TransportError> {
    match delivery {
        Delivery::Message(msg) => Ok(msg),
        Delivery::Aborted(reason) => Err(TransportError::PeerAborted { rank: src, reason }),
        Delivery::Closed => Err(TransportError::Disconnected(src)),
    }
}

/// In-process transport over `std::sync::mpsc` channels.
#[derive(Debug, Default, Clone, Copy)]
pub struct ChannelTransport;

pub struct ChannelEndpoint {
    rank: Rank,
    /// Indexed by destination rank; `None` where no edge exists.
    links: Vec<Option<Sender<(Rank, Delivery)>>>,
    mailbox: Mailbox,
}

impl Transport for ChannelTransport {
    type Endpoint = ChannelEndpoint;

    fn endpoints(&self, num_tasks: usize) -> Result<Vec<ChannelEndpoint>, TransportError> {
        if num_tasks == 0 {
            return Err(TransportError::Setup("at least one task is required".into()));
        }
        let (senders, receivers): (Vec<_>, Vec<_>) = (0..num_tasks).map(|_| mpsc::channel()).unzip();
        Ok(receivers
            .into_iter()
            .enumerate()
            .map(|(rank, inbox)| {
                let links = (0..num_tasks)
                    .map(|dest| {
                        let edge = dest != rank && (rank == MASTER || dest == MASTER);
                        edge.then(|| senders[dest].clone())
                    })
                    .collect();
                ChannelEndpoint { rank, links, mailbox: Mailbox::new(rank, inbox) }
            })
            .collect())
    }
}

impl ChannelEndpoint {
    fn deliver(&self, dest: Rank, delivery: Delivery) -> Result<(), TransportError> {
        let link = self
            .links
            .get(dest)
            .and_then(Option::as_ref)
            .ok_or(TransportError::NoRoute { from: self.rank, to: dest })?;
        link.send((self.rank, delivery)).map_err(|_| TransportError::Disconnected(dest))
    }
}

impl Endpoint for ChannelEndpoint {
    fn rank(&self) -> Rank {
        self.rank
    }

    fn send(&mut self, dest: Rank, msg: WorkerMessage) -> Result<(), TransportError> {
        self.deliver(dest, Delivery::Message(msg))
    }

    fn recv_from(&mut self, src: Rank) -> Result<WorkerMessage, TransportError> {
        self.mailbox.recv_from(src)
    }

    fn recv_any(&mut self) -> Result<(Rank, WorkerMessage), TransportError> {
        self.mailbox.recv_any()
    }

    fn abort(&mut self, reason: &str) {
        if self.rank != MASTER {
            let _ = self.deliver(MASTER, Delivery::Aborted(reason.to_string()));
        }
    }
}

impl Drop for ChannelEndpoint {
    fn drop(&mut self) {
        if self.rank != MASTER {
            let _ = self.deliver(MASTER, Delivery::Closed);
        }
    }
}

/// Message counters shared by every endpoint of one run.
#[derive(Debug, Default)]
pub struct MessageCounters {
    payload: AtomicU64,
    total: AtomicU64,
}

impl MessageCounters {
    /// Row-bearing messages: assignments, row results and block results.
    pub fn payload(&self) -> u64 {
        self.payload.load(Ordering::SeqCst)
    }

    /// Every message sent, termination sentinels included.
    pub fn total(&self) -> u64 {
        self.total.load(Ordering::SeqCst)
    }

    fn record(&self, payload: bool) {
        if payload {
            self.payload.fetch_add(1, Ordering::SeqCst);
        }
        self.total.fetch_add(1, Ordering::SeqCst);
    }
}

/// Wraps an endpoint and counts every successful send.
pub struct Counted<E> {
    inner: E,
    counters: Arc<MessageCounters>,
}

impl<E: Endpoint> Counted<E> {
    pub fn new(inner: E, counters: Arc<MessageCounters>) -> Self {
        Counted { inner, counters }
    }
}

impl<E: Endpoint> Endpoint for Counted<E> {
    fn rank(&self) -> Rank {
        self.inner.rank()
    }

    fn send(&mut self, dest: Rank, msg: WorkerMessage) -> Result<(), TransportError> {
        let payload = msg.is_payload();
        self.inner.send(dest, msg)?;
        self.counters.record(payload);
        Ok(())
    }

    fn recv_from(&mut self, src: Rank) -> Result<WorkerMessage, TransportError> {
        self.inner.recv_from(src)
    }

    fn recv_any(&mut self) -> Result<(Rank, WorkerMessage), TransportError> {
        self.inner.recv_any()
    }

    fn abort(&mut self, reason: &str) {
        self.inner.abort(reason)
    }
}
