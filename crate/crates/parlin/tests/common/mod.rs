#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::time::Duration;

use parlin::cluster::JobSpec;
use parlin::data::{generate_synthetic, DatasetSpec};
use parlin::protocol::{read_message, write_message, Message, PROTOCOL_VERSION};

pub fn dataset_spec(n_records: u64, seed: u64) -> DatasetSpec {
    DatasetSpec {
        n_records,
        seed,
        ..DatasetSpec::default()
    }
}

/// Writes a synthetic dataset into `dir` and returns its path.
pub fn dataset(dir: &Path, n_records: u64, seed: u64) -> PathBuf {
    let path = dir.join(format!("flights-{n_records}-{seed}.csv"));
    generate_synthetic(&dataset_spec(n_records, seed), &path).expect("generate dataset");
    path
}

pub fn job(path: &Path) -> JobSpec {
    let mut job = JobSpec::new(path, dataset_spec(2, 0).schema());
    job.split_seed = 11;
    job
}

pub fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

/// A hand-driven peer for poking at the master's side of the protocol.
pub struct RawPeer {
    pub stream: TcpStream,
}

impl RawPeer {
    pub fn connect(addr: SocketAddr) -> Self {
        for _ in 0..200 {
            if let Ok(stream) = TcpStream::connect(addr) {
                stream.set_read_timeout(Some(Duration::from_secs(20))).unwrap();
                return Self { stream };
            }
            std::thread::sleep(Duration::from_millis(25));
        }
        panic!("could not reach {addr}");
    }

    pub fn hello(addr: SocketAddr, rank: u32) -> (Self, Message) {
        let mut peer = Self::connect(addr);
        peer.send(&Message::Hello {
            worker_rank: rank,
            protocol_version: PROTOCOL_VERSION,
        });
        let reply = peer.recv();
        (peer, reply)
    }

    pub fn send(&mut self, msg: &Message) {
        write_message(&mut self.stream, msg).unwrap();
    }

    pub fn recv(&mut self) -> Message {
        read_message(&mut self.stream).unwrap()
    }

    /// Sends half a frame and hangs up, as a crashing process would.
    pub fn die_mid_frame(mut self) {
        let _ = self.stream.write_all(&[0, 0, 1]);
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }

    pub fn is_closed(&mut self) -> bool {
        let mut buf = [0u8; 1];
        matches!(self.stream.read(&mut buf), Ok(0) | Err(_))
    }
}
