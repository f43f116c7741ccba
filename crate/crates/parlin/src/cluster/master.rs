use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, Sender};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use parlin_core::{make_partitions, GramPartial, ModelCoefficients};

use super::pipeline::{merge_in_order, train_and_evaluate, Reducer};
use super::{split_sizes, Assignment, ClusterError, JobResult, JobSpec, Result};
use crate::data::{self, DataError};
use crate::protocol::{read_message, write_message, FrameError, Message, Scope, PROTOCOL_VERSION};

const ACCEPT_POLL: Duration = Duration::from_millis(2);
const SHUTDOWN_GRACE: Duration = Duration::from_secs(2);

/// A bound master socket. Binding separately from running lets callers
/// learn the port (e.g. after binding port 0) before spawning workers.
pub struct Master {
    listener: TcpListener,
}

impl Master {
    pub fn bind(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn run(self, job: &JobSpec) -> Result<JobResult> {
        job.validate()?;
        let k = job.expected_workers;
        if k == 0 {
            return Err(ClusterError::InvalidJob("a master needs at least one worker".into()));
        }
        let dataset_path = job.dataset_path.canonicalize().map_err(|source| DataError::Io {
            path: job.dataset_path.clone(),
            source,
        })?;
        let n_records = data::count_rows(&dataset_path, &job.schema)?;
        let (n_train, n_test) = split_sizes(n_records, job.split_ratio)?;
        let too_small = |e| ClusterError::InvalidJob(format!("cannot spread the split over {k} workers: {e}"));
        let train_parts = make_partitions(n_train, k).map_err(too_small)?;
        let test_parts = make_partitions(n_test, k).map_err(too_small)?;
        let assignments: Vec<Assignment> = train_parts
            .iter()
            .zip(&test_parts)
            .map(|(train, test)| Assignment {
                rank: train.partition_id,
                train: *train,
                test: *test,
            })
            .collect();

        let job_id = job_id();
        log::info!("job {job_id}: waiting for {k} workers on {}", self.local_addr()?);
        let streams = admit(self.listener, k, job.admission_timeout, job_id)?;

        let start = Instant::now();
        let mut cluster = Cluster::spawn(streams, job.schema.n_features());
        let outcome = (|| {
            cluster.round("Done", |rank| {
                let a = &assignments[rank as usize];
                Message::Assign {
                    dataset_path: dataset_path.display().to_string(),
                    schema: job.schema.clone(),
                    partition: a.train,
                    test_partition: a.test,
                    n_records,
                    split_seed: job.split_seed,
                    split_ratio: job.split_ratio,
                }
            })?;
            train_and_evaluate(&mut cluster, &job.train)
        })();
        let wall_seconds = start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
        cluster.shutdown();
        let trained = outcome?;
        log::info!("job {job_id}: finished in {wall_seconds:.3}s");

        Ok(JobResult {
            coefficients: trained.coefficients,
            eval: trained.eval,
            wall_seconds,
            environment_label: job.label(),
            workers_used: k,
            ridge_fallback: trained.ridge_fallback,
            assignments,
        })
    }
}

/// Binds `0.0.0.0:listen_port` and runs `job` to completion.
pub fn master_run(job: &JobSpec, listen_port: u16) -> Result<JobResult> {
    Master::bind(("0.0.0.0", listen_port))?.run(job)
}

fn job_id() -> u64 {
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos() as u64);
    nanos ^ (u64::from(std::process::id()) << 32)
}

fn reject(mut stream: TcpStream, reason: String) {
    log::warn!("rejecting {:?}: {reason}", stream.peer_addr().ok());
    let _ = write_message(&mut stream, &Message::Fail { reason });
}

/// Collects one Hello per rank `0..k`. Handshakes are read on their own
/// threads so a silent client cannot stall the others.
fn admit(listener: TcpListener, k: u32, timeout: Duration, job_id: u64) -> Result<Vec<TcpStream>> {
    listener.set_nonblocking(true)?;
    let started = Instant::now();
    let deadline = started + timeout;
    let (tx, rx) = mpsc::channel::<(TcpStream, Result<Message, FrameError>)>();
    let mut slots: Vec<Option<TcpStream>> = (0..k).map(|_| None).collect();
    let mut admitted = 0;

    while admitted < k {
        let now = Instant::now();
        if now >= deadline {
            for mut s in slots.into_iter().flatten() {
                let _ = write_message(&mut s, &Message::Shutdown);
            }
            return Err(ClusterError::AdmissionTimeout {
                admitted,
                expected: k,
                waited: now - started,
            });
        }
        match listener.accept() {
            Ok((stream, peer)) => {
                log::debug!("connection from {peer}");
                stream.set_nonblocking(false)?;
                stream.set_read_timeout(Some(deadline - now))?;
                let _ = stream.set_nodelay(true);
                let tx = tx.clone();
                thread::spawn(move || {
                    let mut stream = stream;
                    let hello = read_message(&mut stream);
                    let _ = tx.send((stream, hello));
                });
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {}
            Err(e) => return Err(e.into()),
        }
        while let Ok((mut stream, hello)) = rx.try_recv() {
            match hello {
                Ok(Message::Hello {
                    worker_rank,
                    protocol_version,
                }) => {
                    if protocol_version != PROTOCOL_VERSION {
                        reject(
                            stream,
                            format!("protocol version {protocol_version} does not match {PROTOCOL_VERSION}"),
                        );
                    } else if worker_rank >= k {
                        reject(stream, format!("rank {worker_rank} is out of range 0..{k}"));
                    } else if slots[worker_rank as usize].is_some() {
                        reject(stream, format!("rank {worker_rank} is already taken"));
                    } else if write_message(&mut stream, &Message::HelloAck { job_id }).is_ok() {
                        stream.set_read_timeout(None)?;
                        slots[worker_rank as usize] = Some(stream);
                        admitted += 1;
                        log::info!("admitted worker {worker_rank} ({admitted}/{k})");
                    }
                }
                Ok(other) => reject(stream, format!("expected Hello, got {}", other.kind())),
                Err(e) => log::warn!("handshake failed: {e}"),
            }
        }
        thread::sleep(ACCEPT_POLL);
    }
    Ok(slots.into_iter().flatten().collect())
}

type Reply = (u32, Result<Message, FrameError>);

/// Admitted workers, each served by one connection thread. Requests go out
/// to every rank and a round completes only when all ranks have replied.
struct Cluster {
    requests: Vec<Sender<Message>>,
    replies: Receiver<Reply>,
    handlers: Vec<(thread::JoinHandle<()>, Option<TcpStream>)>,
    n_features: usize,
}

impl Cluster {
    fn spawn(streams: Vec<TcpStream>, n_features: usize) -> Self {
        let (reply_tx, replies) = mpsc::channel();
        let mut requests = Vec::with_capacity(streams.len());
        let mut handlers = Vec::with_capacity(streams.len());
        for (rank, stream) in streams.into_iter().enumerate() {
            let (tx, rx) = mpsc::channel();
            let reply_tx = reply_tx.clone();
            let control = stream.try_clone().ok();
            handlers.push((
                thread::spawn(move || serve_connection(rank as u32, stream, rx, reply_tx)),
                control,
            ));
            requests.push(tx);
        }
        Self {
            requests,
            replies,
            handlers,
            n_features,
        }
    }

    /// One barrier round; replies are returned in ascending rank order.
    fn round(&mut self, expect: &str, request: impl Fn(u32) -> Message) -> Result<Vec<Message>> {
        for (rank, tx) in self.requests.iter().enumerate() {
            tx.send(request(rank as u32)).map_err(|_| ClusterError::WorkerFailed {
                rank: rank as u32,
                reason: "connection already closed".into(),
            })?;
        }
        let mut replies: Vec<Option<Message>> = vec![None; self.requests.len()];
        for _ in 0..self.requests.len() {
            let (rank, reply) = self.replies.recv().map_err(|_| ClusterError::WorkerFailed {
                rank: 0,
                reason: "all connections closed".into(),
            })?;
            let failed = |reason: String| ClusterError::WorkerFailed { rank, reason };
            match reply {
                Ok(Message::Fail { reason }) => return Err(failed(reason)),
                Ok(msg) if msg.kind() == expect => replies[rank as usize] = Some(msg),
                Ok(msg) => return Err(failed(format!("expected {expect}, got {}", msg.kind()))),
                Err(FrameError::Closed) => return Err(failed("disconnected".into())),
                Err(e) => return Err(failed(e.to_string())),
            }
        }
        Ok(replies.into_iter().flatten().collect())
    }

    /// Queues Shutdown for every worker and waits for the handlers to
    /// deliver it. Handlers still blocked on a silent worker after
    /// `SHUTDOWN_GRACE` have their socket closed under them.
    fn shutdown(&mut self) {
        for tx in self.requests.drain(..) {
            let _ = tx.send(Message::Shutdown);
        }
        let deadline = Instant::now() + SHUTDOWN_GRACE;
        while Instant::now() < deadline && self.handlers.iter().any(|(h, _)| !h.is_finished()) {
            thread::sleep(ACCEPT_POLL);
        }
        for (handle, control) in self.handlers.drain(..) {
            if !handle.is_finished() {
                if let Some(stream) = control {
                    let _ = stream.shutdown(std::net::Shutdown::Both);
                }
            }
            let _ = handle.join();
        }
    }
}

fn serve_connection(rank: u32, mut stream: TcpStream, requests: Receiver<Message>, replies: Sender<Reply>) {
    for request in requests {
        let last = request == Message::Shutdown;
        if let Err(e) = write_message(&mut stream, &request) {
            if !last {
                let _ = replies.send((rank, Err(e)));
            }
            return;
        }
        if last {
            return;
        }
        let reply = read_message(&mut stream);
        let broken = reply.is_err();
        // Keep draining after the master stops listening: a queued Shutdown
        // must still reach the worker.
        let _ = replies.send((rank, reply));
        if broken {
            return;
        }
    }
}

impl Reducer for Cluster {
    fn gram(&mut self, scope: Scope) -> Result<GramPartial> {
        let partials: Vec<GramPartial> = self
            .round("GramResult", |_| Message::ComputeGram { scope })?
            .into_iter()
            .filter_map(|m| match m {
                Message::GramResult { partial } => Some(partial),
                _ => None,
            })
            .collect();
        if let Some(rank) = partials
            .iter()
            .position(|p| !p.is_well_formed() || p.n_features() != self.n_features)
        {
            return Err(ClusterError::WorkerFailed {
                rank: rank as u32,
                reason: "malformed Gram partial".into(),
            });
        }
        merge_in_order(self.n_features, &partials)
    }

    fn gradient(&mut self, theta: &ModelCoefficients) -> Result<(Vec<f64>, u64)> {
        let replies = self.round("GradientResult", |_| Message::ComputeGradient { theta: theta.clone() })?;
        let mut total = vec![0.0; self.n_features + 1];
        let mut n_total = 0;
        for (rank, reply) in replies.into_iter().enumerate() {
            if let Message::GradientResult { grad_sum, n } = reply {
                if grad_sum.len() != total.len() {
                    return Err(ClusterError::WorkerFailed {
                        rank: rank as u32,
                        reason: "gradient has the wrong dimension".into(),
                    });
                }
                total.iter_mut().zip(&grad_sum).for_each(|(t, g)| *t += g);
                n_total += n;
            }
        }
        Ok((total, n_total))
    }

    fn sse(&mut self, theta: &ModelCoefficients) -> Result<(f64, u64)> {
        let replies = self.round("SseResult", |_| Message::ComputeSse { theta: theta.clone() })?;
        Ok(replies.into_iter().fold((0.0, 0), |(sse_total, n_total), reply| match reply {
            Message::SseResult { sse, n } => (sse_total + sse, n_total + n),
            _ => (sse_total, n_total),
        }))
    }
}
