//! TCP transport speaking the framing in [`super::wire`].
//!
//! The master listens; each worker connects and introduces itself with a
//! `hello` frame carrying its rank. Every connection gets a reader thread
//! that decodes frames into the owning endpoint's mailbox, so receives on
//! the master can wait on one rank or on any rank.
//!
//! [`SocketTransport`] wires up all ranks inside one process over loopback.
//! For separate processes use [`listen`] on the master and [`connect`] on
//! each worker.

use std::io::BufReader;
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Sender};
use std::thread;

use super::transport::{Delivery, Endpoint, Mailbox, Rank, Transport, TransportError, MASTER};
use super::wire::{read_frame, write_frame, Frame};
use super::WorkerMessage;

/// Loopback transport: every rank lives in this process, every message
/// crosses a real TCP connection.
#[derive(Debug, Clone)]
pub struct SocketTransport {
    bind: SocketAddr,
}

impl Default for SocketTransport {
    fn default() -> Self {
        SocketTransport { bind: SocketAddr::from(([127, 0, 0, 1], 0)) }
    }
}

impl SocketTransport {
    pub fn new(bind: SocketAddr) -> Self {
        SocketTransport { bind }
    }
}

impl Transport for SocketTransport {
    type Endpoint = SocketEndpoint;

    fn endpoints(&self, num_tasks: usize) -> Result<Vec<SocketEndpoint>, TransportError> {
        if num_tasks == 0 {
            return Err(TransportError::Setup("at least one task is required".into()));
        }
        let listener = TcpListener::bind(self.bind)?;
        let addr = listener.local_addr()?;
        // Connections complete against the listen backlog, so workers can
        // connect before the master accepts.
        let workers = (1..num_tasks).map(|rank| connect(addr, rank)).collect::<Result<Vec<_>, _>>()?;
        let master = accept_workers(&listener, num_tasks)?;
        Ok(std::iter::once(master).chain(workers).collect())
    }
}

pub struct SocketEndpoint {
    rank: Rank,
    /// Indexed by peer rank.
    links: Vec<Option<TcpStream>>,
    mailbox: Mailbox,
}

/// Binds `addr` and waits for `num_tasks − 1` workers to connect.
pub fn listen<A: ToSocketAddrs>(addr: A, num_tasks: usize) -> Result<SocketEndpoint, TransportError> {
    let listener = TcpListener::bind(addr)?;
    accept_workers(&listener, num_tasks)
}

fn accept_workers(listener: &TcpListener, num_tasks: usize) -> Result<SocketEndpoint, TransportError> {
    let (tx, rx) = mpsc::channel();
    let mut links: Vec<Option<TcpStream>> = (0..num_tasks).map(|_| None).collect();
    for _ in 1..num_tasks {
        let (stream, _) = listener.accept()?;
        stream.set_nodelay(true)?;
        let mut reader = BufReader::new(stream.try_clone()?);
        let rank = match read_frame(&mut reader)? {
            Some(Frame::Hello { rank }) => rank,
            other => return Err(TransportError::Setup(format!("expected hello frame, got {other:?}"))),
        };
        match links.get_mut(rank) {
            Some(slot @ None) if rank != MASTER => *slot = Some(stream),
            _ => return Err(TransportError::Setup(format!("unexpected or duplicate worker rank {rank}"))),
        }
        spawn_reader(rank, reader, tx.clone());
    }
    Ok(SocketEndpoint { rank: MASTER, links, mailbox: Mailbox::new(MASTER, rx) })
}

/// Connects worker `rank` to a master listening on `addr`.
pub fn connect<A: ToSocketAddrs>(addr: A, rank: Rank) -> Result<SocketEndpoint, TransportError> {
    if rank == MASTER {
        return Err(TransportError::Setup("rank 0 is the master and does not connect".into()));
    }
    let mut stream = TcpStream::connect(addr)?;
    stream.set_nodelay(true)?;
    write_frame(&mut stream, &Frame::Hello { rank })?;
    let (tx, rx) = mpsc::channel();
    spawn_reader(MASTER, BufReader::new(stream.try_clone()?), tx);
    let mut links: Vec<Option<TcpStream>> = vec![None];
    links[MASTER] = Some(stream);
    Ok(SocketEndpoint { rank, links, mailbox: Mailbox::new(rank, rx) })
}

fn spawn_reader(peer: Rank, mut reader: BufReader<TcpStream>, tx: Sender<(Rank, Delivery)>) {
    thread::spawn(move || loop {
        let delivery = match read_frame(&mut reader) {
            Ok(Some(Frame::Message(msg))) => Delivery::Message(msg),
            Ok(Some(Frame::Abort(reason))) => Delivery::Aborted(reason),
            Ok(Some(Frame::Hello { .. })) => Delivery::Aborted("unexpected hello frame".into()),
            Ok(None) => {
                let _ = tx.send((peer, Delivery::Closed));
                return;
            }
            Err(e) => {
                let _ = tx.send((peer, Delivery::Aborted(format!("undecodable frame: {e}"))));
                return;
            }
        };
        if tx.send((peer, delivery)).is_err() {
            return;
        }
    });
}

impl SocketEndpoint {
    fn write(&mut self, dest: Rank, frame: &Frame) -> Result<(), TransportError> {
        let from = self.rank;
        let stream =
            self.links.get_mut(dest).and_then(Option::as_mut).ok_or(TransportError::NoRoute { from, to: dest })?;
        write_frame(stream, frame).map_err(|e| match e {
            super::wire::WireError::Io(_) => TransportError::Disconnected(dest),
            other => TransportError::Wire(other),
        })
    }
}

impl Endpoint for SocketEndpoint {
    fn rank(&self) -> Rank {
        self.rank
    }

    fn send(&mut self, dest: Rank, msg: WorkerMessage) -> Result<(), TransportError> {
        self.write(dest, &Frame::Message(msg))
    }

    fn recv_from(&mut self, src: Rank) -> Result<WorkerMessage, TransportError> {
        self.mailbox.recv_from(src)
    }

    fn recv_any(&mut self) -> Result<(Rank, WorkerMessage), TransportError> {
        self.mailbox.recv_any()
    }

    fn abort(&mut self, reason: &str) {
        if self.rank != MASTER {
            let _ = self.write(MASTER, &Frame::Abort(reason.to_string()));
        }
    }
}

impl Drop for SocketEndpoint {
    fn drop(&mut self) {
        for stream in self.links.iter().flatten() {
            let _ = stream.shutdown(Shutdown::Both);
        }
    }
}
