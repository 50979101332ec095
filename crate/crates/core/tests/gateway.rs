mod common;

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::Arc;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use onepress::config::Config;
use onepress::gateway::{spawn_server, MenuLibrary};
use onepress::signal::{synthesize_trace, ForceSample, PressScript, Segment, SensorModel};

/// Medium press, then a hard press whose apex lands close to the dwell
/// deadline of the medium one.
fn dwell_edge_script(rng: &mut ChaCha8Rng) -> PressScript {
    PressScript::new(key("space"))
        .then(Segment::soft_hold(700, 0.8))
        .then(Segment::peak(rng.random_range(300..400), 1.6))
        .then(Segment::peak(rng.random_range(770..840), 1.6))
        .then(Segment::peak(400, 2.5))
        .then(Segment::idle(200))
}

fn trace(script: &PressScript, noise: f64, seed: u64) -> Vec<ForceSample> {
    synthesize_trace(script, &SensorModel::default().with_noise(noise), seed).unwrap()
}

#[test]
fn online_matches_offline_near_dwell_deadline() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..300 {
        let script = dwell_edge_script(&mut rng);
        let samples = trace(&script, 0.03, seed);
        assert_eq!(online_wire(&samples), offline_wire(&samples), "{script:?}");
    }
    // Noiseless sweep: some gaps put the hard apex one sample before the
    // dwell deadline, resolved on the sample where the deadline passes.
    for gap in 760..860 {
        let script = PressScript::new(key("space"))
            .then(Segment::soft_hold(700, 0.8))
            .then(Segment::peak(gap, 1.6))
            .then(Segment::peak(400, 2.5))
            .then(Segment::idle(200));
        let mut samples = trace(&script, 0.0, 0);
        // Another key sampled at the same instants is fed first.
        let other = PressScript::new(key("f4")).then(Segment::soft_hold(3000, 0.8));
        samples.extend(trace(&other, 0.0, 0));
        assert_eq!(online_wire(&samples), offline_wire(&samples), "gap {gap}");
    }
}

#[test]
fn online_matches_offline_on_random_corpus() {
    for t in random_corpus(200, 5) {
        let samples = t.samples();
        assert_eq!(online_wire(&samples), offline_wire(&samples));
    }
}

#[test]
fn streamed_perfect_attempt_ends_with_commit_of_item_8() {
    let samples = trace(&perfect_subject_script(1), 0.0, 0);
    let out = online_wire(&samples);
    let last_directive = out
        .iter()
        .rev()
        .find(|l| l.contains("\"type\":\"directive\"") && !l.contains("\"Warning\""))
        .unwrap();
    assert!(last_directive.contains("\"directive\":\"CommitOutput\""), "{last_directive}");
    assert!(last_directive.contains("\"cursor\":8"));
}

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(addr: std::net::SocketAddr) -> Self {
        let stream = TcpStream::connect(addr).unwrap();
        Client {
            reader: BufReader::new(stream.try_clone().unwrap()),
            writer: stream,
        }
    }

    fn send(&mut self, line: &str) {
        self.writer.write_all(line.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
    }

    /// Closes the write side and collects everything the server sends.
    fn finish(mut self) -> Vec<String> {
        self.writer.shutdown(std::net::Shutdown::Write).unwrap();
        let mut out = Vec::new();
        let mut line = String::new();
        while self.reader.read_line(&mut line).unwrap() > 0 {
            out.push(line.trim_end().to_string());
            line.clear();
        }
        out
    }
}

fn server() -> std::net::SocketAddr {
    spawn_server("127.0.0.1:0", Arc::new(MenuLibrary::builtin()), Config::default())
        .unwrap()
        .addr
}

#[test]
fn tcp_errors_keep_connection_open() {
    let mut c = Client::connect(server());
    c.send(r#"{"type":"sample","key":"space","t_ms":0,"force_n":0.5}"#);
    c.send("not json");
    c.send(r#"{"type":"config","menu":"missing"}"#);
    c.send(r#"{"type":"config"}"#);
    c.send(r#"{"type":"sample","key":"space","t_ms":10,"force_n":0.5}"#);
    c.send(r#"{"type":"sample","key":"space","t_ms":5,"force_n":0.5}"#);
    c.send(r#"{"type":"sample","key":"bad key","t_ms":20,"force_n":0.5}"#);
    let out = c.finish();
    let codes: Vec<String> = out
        .iter()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["type"] == "error")
        .map(|v| v["code"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        codes,
        ["unconfigured", "malformed", "invalid-config", "non-monotonic", "invalid-sample"]
    );
    // The accepted sample leaves a contact open, closed when the client hangs up.
    assert!(out.last().unwrap().contains("ClassicalRelease"), "{out:?}");
}

#[test]
fn concurrent_sessions_are_isolated() {
    let addr = server();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let traces: Vec<Vec<ForceSample>> = (0..6)
        .map(|i| {
            let script = if i % 2 == 0 {
                perfect_subject_script(2)
            } else {
                dwell_edge_script(&mut rng)
            };
            trace(&script, 0.04, i)
        })
        .collect();
    let handles: Vec<_> = traces
        .iter()
        .cloned()
        .map(|samples| {
            thread::spawn(move || {
                let mut c = Client::connect(addr);
                c.send(r#"{"type":"config"}"#);
                for line in sample_lines(&samples) {
                    c.send(&line);
                }
                c.send(r#"{"type":"end"}"#);
                c.finish()
            })
        })
        .collect();
    for (h, samples) in handles.into_iter().zip(&traces) {
        assert_eq!(h.join().unwrap(), offline_wire(samples));
    }
}
