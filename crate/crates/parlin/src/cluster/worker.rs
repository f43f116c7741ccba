use std::net::TcpStream;
use std::path::PathBuf;
use std::thread;
use std::time::{Duration, Instant};

use super::{ClusterError, Result, Shard};
use crate::protocol::{read_message, write_message, FrameError, Message, PROTOCOL_VERSION};

#[derive(Debug, Clone)]
pub struct WorkerOptions {
    /// How long to keep retrying the initial connection.
    pub connect_timeout: Duration,
    pub protocol_version: u32,
}

impl Default for WorkerOptions {
    fn default() -> Self {
        Self {
            connect_timeout: Duration::from_secs(10),
            protocol_version: PROTOCOL_VERSION,
        }
    }
}

fn connect(master_address: &str, timeout: Duration) -> Result<TcpStream> {
    let deadline = Instant::now() + timeout;
    loop {
        match TcpStream::connect(master_address) {
            Ok(s) => return Ok(s),
            Err(e) if Instant::now() >= deadline => return Err(e.into()),
            Err(e) => {
                log::debug!("connect to {master_address} failed ({e}); retrying");
                thread::sleep(Duration::from_millis(50));
            }
        }
    }
}

/// Joins the master as `rank` and serves requests until `Shutdown`.
pub fn worker_run(master_address: &str, rank: u32) -> Result<()> {
    worker_run_with(master_address, rank, &WorkerOptions::default())
}

pub fn worker_run_with(master_address: &str, rank: u32, opts: &WorkerOptions) -> Result<()> {
    let mut stream = connect(master_address, opts.connect_timeout)?;
    let _ = stream.set_nodelay(true);
    write_message(
        &mut stream,
        &Message::Hello {
            worker_rank: rank,
            protocol_version: opts.protocol_version,
        },
    )?;
    match read_message(&mut stream)? {
        Message::HelloAck { job_id } => log::info!("worker {rank}: joined job {job_id}"),
        Message::Fail { reason } => return Err(ClusterError::Rejected(reason)),
        other => return Err(unexpected(&mut stream, &other)),
    }

    let mut shard: Option<Shard> = None;
    loop {
        let request = match read_message(&mut stream) {
            Ok(m) => m,
            Err(FrameError::Closed) => {
                return Err(ClusterError::Rejected("master closed the connection".into()));
            }
            Err(e) => return Err(e.into()),
        };
        let reply = match request {
            Message::Shutdown => {
                log::info!("worker {rank}: shutdown");
                return Ok(());
            }
            Message::Assign {
                dataset_path,
                schema,
                partition,
                test_partition,
                n_records,
                split_seed,
                split_ratio,
            } => {
                let s = Shard::new(
                    PathBuf::from(dataset_path),
                    schema,
                    n_records,
                    split_seed,
                    split_ratio,
                    partition,
                    test_partition,
                );
                s.check_dataset().map(|()| {
                    shard = Some(s);
                    Message::Done
                })
            }
            Message::ComputeGram { scope } => {
                with_shard(&mut shard, |s| s.gram(scope)).map(|partial| Message::GramResult { partial })
            }
            Message::ComputeGradient { theta } => {
                with_shard(&mut shard, |s| s.gradient(&theta)).map(|(grad_sum, n)| Message::GradientResult { grad_sum, n })
            }
            Message::ComputeSse { theta } => {
                with_shard(&mut shard, |s| s.sse(&theta)).map(|(sse, n)| Message::SseResult { sse, n })
            }
            other => return Err(unexpected(&mut stream, &other)),
        };
        match reply {
            Ok(msg) => write_message(&mut stream, &msg)?,
            Err(e) => {
                log::error!("worker {rank}: {e}");
                let _ = write_message(&mut stream, &Message::Fail { reason: e.to_string() });
                return Err(e);
            }
        }
    }
}

fn with_shard<T>(shard: &mut Option<Shard>, f: impl FnOnce(&mut Shard) -> Result<T>) -> Result<T> {
    match shard {
        Some(s) => f(s),
        None => Err(ClusterError::InvalidJob("compute request before Assign".into())),
    }
}

fn unexpected(stream: &mut TcpStream, msg: &Message) -> ClusterError {
    let reason = format!("unexpected {} message", msg.kind());
    let _ = write_message(stream, &Message::Fail { reason: reason.clone() });
    ClusterError::Protocol(FrameError::Malformed(reason))
}
