//! Message passing over TCP loopback.
//!
//! First a hand-driven exchange between a master endpoint from `listen` and
//! a worker from `connect`, then a full FCFS run on `SocketTransport`.

use std::net::TcpListener;
use std::thread;

use mandelbrot_rows::runtime::socket::{connect, listen};
use mandelbrot_rows::runtime::{run_scheme, Endpoint, RunOptions, SocketTransport, WorkerMessage, MASTER};
use mandelbrot_rows::{RenderConfig, Scheme};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let addr = TcpListener::bind("127.0.0.1:0")?.local_addr()?;

    let worker = thread::spawn(move || -> Result<(), String> {
        let mut ep = loop {
            match connect(addr, 1) {
                Ok(ep) => break ep,
                Err(_) => thread::sleep(std::time::Duration::from_millis(10)),
            }
        };
        let config = RenderConfig::new(16, 8).map_err(|e| e.to_string())?;
        while let WorkerMessage::RowAssignment { row } = ep.recv_from(MASTER).map_err(|e| e.to_string())? {
            let cells = mandelbrot_rows::kernel::compute_row(row, &config).map_err(|e| e.to_string())?;
            ep.send(MASTER, WorkerMessage::RowResult { row, cells }).map_err(|e| e.to_string())?;
        }
        Ok(())
    });

    let mut master = listen(addr, 2)?;
    for row in [3, 0, 7] {
        master.send(1, WorkerMessage::RowAssignment { row })?;
        if let WorkerMessage::RowResult { row, cells } = master.recv_from(1)? {
            println!("row {row}: {cells:?}");
        }
    }
    master.send(1, WorkerMessage::Terminate { sentinel_row: 9 })?;
    worker.join().expect("worker panicked")?;

    let config = RenderConfig::new(200, 200)?;
    let r = run_scheme(Scheme::Fcfs, &config, 4, &SocketTransport::default(), None, &RunOptions::default())?;
    println!("fcfs over sockets: {} messages, rows/rank {:?}", r.messages_sent, r.stats.rows_per_rank);
    Ok(())
}
