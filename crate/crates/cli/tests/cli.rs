//! The `pumpwatch` binary end to end.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::thread;

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pumpwatch"));
    c.env_remove("PUMPWATCH_CONFIG");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code plus the parsed stderr error object.
fn fails(dir: &Path, args: &[&str]) -> (i32, Value) {
    let out = run(dir, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err: Value = serde_json::from_slice(&out.stderr).unwrap_or_else(|_| {
        panic!("stderr is not JSON: {}", String::from_utf8_lossy(&out.stderr))
    });
    assert_eq!(err["exit_code"].as_i64(), out.status.code().map(i64::from));
    (out.status.code().unwrap(), err)
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

const CONFIG: &str = r#"
[forest]
n_trees = 40
[boost]
n_rounds = 20
[evaluate]
slice = { kind = "around", before_secs = 46800, after_secs = 10800 }
"#;

/// Six standard suite scenarios with trades under `trades/` and combined
/// ground truth in `events.csv`.
fn corpus() -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("cfg.toml"), CONFIG).unwrap();
    let mut events = String::new();
    for i in 0..6 {
        let idx = i.to_string();
        let out = format!("trades/SYN{i:03}BTC.csv");
        let truth = format!("truth{i}.csv");
        ok(d, &["synth", "--preset", "standard", "--index", &idx, "--seed", "7", "--out", &out, "--truth", &truth]);
        let t = read(d.join(&truth));
        let mut lines = t.lines();
        let header = lines.next().unwrap();
        if events.is_empty() {
            events = format!("{header}\n");
        }
        for l in lines {
            events.push_str(l);
            events.push('\n');
        }
    }
    std::fs::write(d.join("events.csv"), events).unwrap();
    let cfg = d.join("cfg.toml");
    (dir, cfg)
}

fn signal(events_csv: &str, pair: &str) -> i64 {
    events_csv
        .lines()
        .find(|l| l.starts_with(pair))
        .and_then(|l| l.split(',').nth(1))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn empty_trade_file_gives_zero_feature_rows() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    let summary: Value = serde_json::from_str(&ok(dir.path(), &["ingest", "--in", "empty.csv", "--features-out", "f.csv"])).unwrap();
    assert_eq!(summary["chunks"], 0);
    let f = read(dir.path().join("f.csv"));
    assert_eq!(f.lines().count(), 1);
    assert!(f.starts_with("chunk_start,warm_up,std_rush_orders"));
}

#[test]
fn synth_train_detect_finds_the_injected_pump() {
    let (dir, cfg) = corpus();
    let d = dir.path();
    let cfg = cfg.to_str().unwrap();
    let events = read(d.join("events.csv"));
    let mut feats = Vec::new();
    for i in 0..4 {
        let f = format!("f{i}.csv");
        ok(d, &["ingest", "--in", &format!("trades/SYN{i:03}BTC.csv"), "--features-out", &f]);
        feats.push(f);
    }
    let mut args = vec!["--config", cfg, "train", "--events", "events.csv", "--model", "rf", "--seed", "3", "--out", "model.bin", "--features"];
    args.extend(feats.iter().map(String::as_str));
    ok(d, &args);

    for pair in ["SYN004BTC", "SYN005BTC"] {
        let stdout = ok(d, &["detect", "--model", "model.bin", "--in", &format!("trades/{pair}.csv")]);
        let alerts: Vec<Value> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        let t0 = signal(&events, pair);
        let lag: Vec<i64> = alerts.iter().map(|a| a["chunk_start_ms"].as_i64().unwrap() - t0).collect();
        assert!(
            lag.iter().any(|&l| (-25_000..=75_000).contains(&l)),
            "{pair}: alerts {lag:?} ms from the signal"
        );
        assert!(alerts.iter().all(|a| a["pair"] == pair && a["detector"] == "random_forest"));
    }
}

#[test]
fn same_seed_same_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for tag in ["a", "b"] {
        ok(d, &["synth", "--preset", "standard", "--index", "3", "--seed", "11", "--out", &format!("t{tag}.csv"), "--truth", &format!("e{tag}.csv")]);
        ok(d, &["ingest", "--in", &format!("t{tag}.csv"), "--pair", "SYN003BTC", "--events", &format!("e{tag}.csv"), "--features-out", &format!("f{tag}.csv")]);
        ok(d, &["train", "--features", &format!("f{tag}.csv"), "--model", "ada", "--seed", "5", "--out", &format!("m{tag}.bin")]);
    }
    for stem in ["t", "e", "f", "m"] {
        let ext = if stem == "m" { "bin" } else { "csv" };
        assert_eq!(read(d.join(format!("{stem}a.{ext}"))), read(d.join(format!("{stem}b.{ext}"))), "{stem}");
    }
    ok(d, &["synth", "--preset", "standard", "--index", "3", "--seed", "12", "--out", "tc.csv"]);
    assert_ne!(read(d.join("ta.csv")), read(d.join("tc.csv")));
}

#[test]
fn evaluate_reports_every_fold() {
    let (dir, cfg) = corpus();
    let d = dir.path();
    let cfg = cfg.to_str().unwrap();
    let base = ["--config", cfg, "evaluate", "--events", "events.csv", "--trades-dir", "trades", "--k", "3"];
    let rf: Value = serde_json::from_str(&ok(d, &[&base[..], &["--model", "rf", "--json", "--report-out", "rf.json"]].concat())).unwrap();
    assert_eq!(rf["folds"].as_array().unwrap().len(), 3);
    assert_eq!(rf["total"]["n_events"], 6);
    assert_eq!(rf["chunk_seconds"], 25);
    assert!(rf["total"]["f1"].as_f64().unwrap() >= 0.8);
    assert_eq!(serde_json::from_str::<Value>(&read(d.join("rf.json"))).unwrap(), rf);

    let kamps: Value = serde_json::from_str(&ok(d, &[&base[..], &["--model", "kamps", "--preset", "strict", "--json"]].concat())).unwrap();
    assert_eq!(kamps["chunk_seconds"], 3600);
    assert_eq!(kamps["detector"], "kamps-strict");

    let table = ok(d, &[&base[..], &["--model", "threshold", "--match-tolerance-chunks", "0", "--averaging", "macro"]].concat());
    assert!(table.contains("tolerance 0 chunks"), "{table}");
    assert!(table.lines().any(|l| l.trim_start().starts_with("all")));
}

#[test]
fn crowd_mode_runs_on_wide_chunks() {
    let (dir, cfg) = corpus();
    let d = dir.path();
    let cfg = cfg.to_str().unwrap();
    let mut args = vec!["--config", cfg, "train", "--events", "events.csv", "--mask", "no-time", "--out", "crowd.bin", "--features"];
    let feats: Vec<String> = (0..6).map(|i| format!("f{i}.csv")).collect();
    for (i, f) in feats.iter().enumerate() {
        ok(d, &["ingest", "--in", &format!("trades/SYN{i:03}BTC.csv"), "--features-out", f]);
    }
    args.extend(feats.iter().map(String::as_str));
    ok(d, &args);
    ok(d, &["synth", "--preset", "crowd", "--index", "0", "--seed", "9", "--out", "crowd.csv", "--truth", "crowd_truth.csv"]);
    let t0 = signal(&read(d.join("crowd_truth.csv")), "CRD000BTC");
    let summary: Value = serde_json::from_str(&ok(d, &["detect", "--model", "crowd.bin", "--in", "crowd.csv", "--pair", "CRD000BTC", "--crowd", "--alerts-out", "alerts.jsonl"])).unwrap();
    let alerts: Vec<Value> = read(d.join("alerts.jsonl")).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(summary["alerts"].as_u64().unwrap() as usize, alerts.len());
    for a in &alerts {
        assert_eq!(a["detector"], "crowd_pump");
        assert_eq!(a["chunk_start_ms"].as_i64().unwrap() % 600_000, 0);
    }
    assert!(
        alerts.iter().any(|a| (a["chunk_start_ms"].as_i64().unwrap() - t0).abs() < 3_600_000),
        "no crowd alert near {t0}: {alerts:?}"
    );
}

#[test]
fn replay_speed_paces_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Two seconds of market time at 4x.
    std::fs::write(d.join("t.csv"), "1000000000000,1,1,buy\n1000000001000,1,1,sell\n1000000002000,1,1,buy\n").unwrap();
    let started = std::time::Instant::now();
    ok(d, &["detect", "--threshold", "1", "--chunk", "1", "--window", "10", "--in", "t.csv", "--replay-speed", "4"]);
    let took = started.elapsed().as_secs_f64();
    assert!((0.45..3.0).contains(&took), "took {took}s");
    let (code, err) = fails(d, &["detect", "--threshold", "1", "--in", "t.csv", "--replay-speed", "0"]);
    assert_eq!((code, err["error"].as_str()), (2, Some("usage")));
}

#[test]
fn time_flags_accept_epoch_ms_and_iso() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("t.csv"), "1536512410000,0.0001,5,buy\n1536512410000,0.0001,5,buy\n").unwrap();
    ok(d, &["ingest", "--in", "t.csv", "--start", "1536512400000", "--end", "1536512500000", "--features-out", "a.csv"]);
    ok(d, &["ingest", "--in", "t.csv", "--start", "2018-09-09T17:00:00Z", "--end", "2018-09-09T17:01:40Z", "--features-out", "b.csv"]);
    assert_eq!(read(d.join("a.csv")), read(d.join("b.csv")));
    assert_eq!(read(d.join("a.csv")).lines().count(), 1 + 4);
    let (code, _) = fails(d, &["ingest", "--in", "t.csv", "--start", "noon", "--features-out", "c.csv"]);
    assert_eq!(code, 2);
}

#[test]
fn errors_are_json_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, err) = fails(d, &["train", "--out", "m.bin"]);
    assert_eq!((code, err["error"].as_str()), (2, Some("usage")));

    std::fs::write(d.join("bad.csv"), "1000,0.1,1,buy\n999,0.1,1,sell\n").unwrap();
    let (code, err) = fails(d, &["ingest", "--in", "bad.csv", "--features-out", "f.csv"]);
    assert_eq!(code, 3);
    assert!(err["message"].as_str().unwrap().contains("bad.csv"));

    std::fs::write(d.join("model.bin"), "{\"format\":\"pumpwatch-model\",\"version\":99}").unwrap();
    std::fs::write(d.join("t.csv"), "1000,0.1,1,buy\n").unwrap();
    let (code, err) = fails(d, &["detect", "--model", "model.bin", "--in", "t.csv"]);
    assert_eq!((code, err["error"].as_str()), (3, Some("model")));

    let closed = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    std::fs::write(d.join("net.toml"), format!("[exchange]\nbase_url = \"http://{closed}\"\nmax_retries = 0\n")).unwrap();
    let args = ["--config", "net.toml", "fetch", "--pair", "X", "--start", "2018-01-01", "--end", "2018-01-02", "--out", "t.csv"];
    let (code, err) = fails(d, &args);
    assert_eq!((code, err["error"].as_str()), (4, Some("network")));
    let (code, _) = fails(d, &["--config", "net.toml", "fetch", "--pair", "X", "--start", "2018-01-02", "--end", "2018-01-01", "--out", "t.csv"]);
    assert_eq!(code, 2);
}

#[test]
fn config_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("t.csv"), "1536512410000,0.0001,5,buy\n1536512470000,0.0001,5,buy\n").unwrap();
    std::fs::write(d.join("c.toml"), "[features]\nchunk_seconds = 60\nwindow = \"10m\"\n").unwrap();
    let out = bin().current_dir(d).env("PUMPWATCH_CONFIG", "c.toml").args(["ingest", "--in", "t.csv", "--features-out", "f.csv"]).output().unwrap();
    assert!(out.status.success());
    let s: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((s["window"]["chunk_seconds"].as_u64(), s["window"]["window_seconds"].as_u64()), (Some(60), Some(600)));

    std::fs::write(d.join("c.toml"), "[features]\nchunk = 60\n").unwrap();
    let out = bin().current_dir(d).env("PUMPWATCH_CONFIG", "c.toml").args(["ingest", "--in", "t.csv", "--features-out", "f.csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
}

/// Serves `n` trades one second apart in the Binance endpoint shape.
fn mock_exchange(n: u64, t0: i64) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request = String::new();
            reader.read_line(&mut request).unwrap();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let path = request.split_whitespace().nth(1).unwrap_or("/");
            let param = |k: &str| -> i64 {
                let q = path.split_once('?').map(|(_, q)| q).unwrap_or("");
                q.split('&').find_map(|kv| kv.strip_prefix(&format!("{k}="))).unwrap().parse().unwrap()
            };
            let body = if path.starts_with("/api/v3/aggTrades") {
                let first = (param("startTime") - t0).max(0);
                if first < n as i64 * 1000 && param("endTime") >= t0 {
                    format!("[{{\"a\":1,\"f\":{}}}]", (first + 999) / 1000)
                } else {
                    "[]".into()
                }
            } else {
                let from = param("fromId");
                let rows: Vec<String> = (from..(from + param("limit")).min(n as i64))
                    .map(|id| {
                        format!(
                            "{{\"id\":{id},\"price\":\"0.0001\",\"qty\":\"2\",\"time\":{},\"isBuyerMaker\":{}}}",
                            t0 + id * 1000,
                            id % 2 == 0
                        )
                    })
                    .collect();
                format!("[{}]", rows.join(","))
            };
            let _ = write!(stream, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}", body.len());
        }
    });
    url
}

#[test]
fn fetch_writes_trades_and_manifest() {
    let t0 = 1_536_512_400_000;
    let url = mock_exchange(50, t0);
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let summary: Value = serde_json::from_str(&ok(
        d,
        &["fetch", "--pair", "VIBBTC", "--start", "2018-09-09T17:00:00Z", "--end", "1536512430000", "--out", "out/VIBBTC.csv", "--base-url", &url, "--page-size", "7"],
    ))
    .unwrap();
    assert_eq!(summary["trades"], 30);
    let csv = read(d.join("out/VIBBTC.csv"));
    assert_eq!(csv.lines().count(), 31);
    let manifest: Value = serde_json::from_str(&read(d.join("out/VIBBTC.csv.manifest.json"))).unwrap();
    assert_eq!(manifest["pair"], "VIBBTC");
    assert_eq!(manifest["window_start"], t0);
    assert_eq!(manifest["source"], "exchange_api");
    assert_eq!(manifest["checksum"].as_str().unwrap().len(), 64);
    ok(d, &["ingest", "--in", "out/VIBBTC.csv", "--features-out", "f.csv"]);
}
