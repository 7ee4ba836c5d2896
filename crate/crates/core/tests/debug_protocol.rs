//! The debugger protocol over newline-delimited JSON on stdio and over a
//! websocket.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use serde_json::{json, Value as Json};
use stopkit::debug::{serve_websocket, DebugServer};
use stopkit::instrument::CompileOptions;
use stopkit::interp::InterpConfig;
use tungstenite::Message;

const FIB: &str = "function fib(n) {\n  if (n < 2) {\n    return n;\n  }\n  return fib(n - 1) + fib(n - 2);\n}\nprint(fib(5));\nfib(7);\n";
const FOREVER: &str = "let i = 0;\nwhile (true) {\n  i = i + 1;\n}\n";

/// Something that exchanges protocol messages.
trait Client {
    fn send(&mut self, j: Json);
    fn recv(&mut self) -> Json;

    /// Receive until a message of type `ty` arrives; return everything seen.
    fn until(&mut self, ty: &str) -> Vec<Json> {
        let mut seen = Vec::new();
        loop {
            let m = self.recv();
            let done = m["type"] == ty;
            seen.push(m);
            if done {
                return seen;
            }
        }
    }
}

struct StdioClient {
    child: std::process::Child,
    rx: mpsc::Receiver<String>,
}

impl StdioClient {
    fn start() -> Self {
        let mut child = Command::new(env!("CARGO_BIN_EXE_stopkit"))
            .args(["debug", "--transport", "stdio"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        let out = BufReader::new(child.stdout.take().unwrap());
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for l in out.lines() {
                if tx.send(l.unwrap()).is_err() {
                    break;
                }
            }
        });
        StdioClient { child, rx }
    }
}

impl Client for StdioClient {
    fn send(&mut self, j: Json) {
        let stdin = self.child.stdin.as_mut().unwrap();
        writeln!(stdin, "{j}").unwrap();
        stdin.flush().unwrap();
    }

    fn recv(&mut self) -> Json {
        let l = self.rx.recv_timeout(Duration::from_secs(30)).expect("no reply");
        serde_json::from_str(&l).unwrap()
    }
}

impl Drop for StdioClient {
    fn drop(&mut self) {
        drop(self.child.stdin.take());
        let _ = self.child.wait();
    }
}

struct Ws {
    ws: tungstenite::WebSocket<tungstenite::stream::MaybeTlsStream<std::net::TcpStream>>,
    server: Option<std::thread::JoinHandle<()>>,
}

impl Ws {
    fn start() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = std::thread::spawn(move || {
            let mut s = DebugServer::new(CompileOptions::for_debugging(), InterpConfig::default());
            serve_websocket(&mut s, listener, Some(1)).unwrap();
        });
        let (ws, _) = tungstenite::connect(format!("ws://{addr}")).unwrap();
        Ws {
            ws,
            server: Some(server),
        }
    }
}

impl Client for Ws {
    fn send(&mut self, j: Json) {
        self.ws.send(Message::text(j.to_string())).unwrap();
    }

    fn recv(&mut self) -> Json {
        loop {
            if let Message::Text(t) = self.ws.read().unwrap() {
                return serde_json::from_str(&t).unwrap();
            }
        }
    }
}

impl Drop for Ws {
    fn drop(&mut self) {
        let _ = self.ws.close(None);
        while self.ws.read().is_ok() {}
        if let Some(h) = self.server.take() {
            h.join().unwrap();
        }
    }
}

fn load(c: &mut dyn Client, src: &str) {
    c.send(json!({"type": "loadProgram", "source": src}));
    assert_eq!(c.recv(), json!({"type": "loaded"}));
}

fn breakpoints_and_stepping(c: &mut dyn Client) {
    load(c, FIB);
    c.send(json!({"type": "setBreakpoints", "lines": [3]}));
    assert_eq!(c.recv(), json!({"type": "breakpoints", "lines": [3]}));
    c.send(json!({"type": "run"}));
    let p = c.until("paused");
    assert_eq!(
        p.last().unwrap(),
        &json!({"type": "paused", "line": 3, "column": 4, "reason": "breakpoint"})
    );
    c.send(json!({"type": "status"}));
    assert_eq!(
        c.recv(),
        json!({"type": "status", "status": "paused", "line": 3, "column": 4})
    );
    // fib(5) reaches `return n` eight times.
    let mut hits = 1;
    loop {
        c.send(json!({"type": "resume"}));
        let seen = c.until("paused");
        if seen.iter().any(|m| m["type"] == "output") {
            assert_eq!(seen[0], json!({"type": "output", "value": "5"}));
            break;
        }
        hits += 1;
    }
    assert_eq!(hits, 8);
    // Now inside fib(7): clear the breakpoints and single-step.
    c.send(json!({"type": "setBreakpoints", "lines": []}));
    c.until("breakpoints");
    c.send(json!({"type": "step"}));
    let s = c.until("paused");
    assert_eq!(s.last().unwrap()["reason"], "step");
    // From `return n` in fib(1), the caller goes on to call fib(0).
    assert_eq!(s.last().unwrap()["line"], 2);
    c.send(json!({"type": "resume"}));
    let end = c.until("done");
    assert_eq!(end.last().unwrap(), &json!({"type": "done", "result": "13"}));
}

fn pause_a_running_loop(c: &mut dyn Client) {
    load(c, FOREVER);
    c.send(json!({"type": "run"}));
    c.send(json!({"type": "pause"}));
    let p = c.until("paused");
    let p = p.last().unwrap();
    assert_eq!(p["reason"], "pause");
    assert!((2..=3).contains(&p["line"].as_u64().unwrap()), "{p}");
    for _ in 0..3 {
        c.send(json!({"type": "resume"}));
        c.send(json!({"type": "pause"}));
        assert_eq!(c.until("paused").last().unwrap()["reason"], "pause");
    }
}

fn protocol_errors(c: &mut dyn Client) {
    c.send(json!({"type": "run"}));
    assert_eq!(c.recv(), json!({"type": "error", "message": "no program loaded"}));
    c.send(json!({"type": "fly"}));
    let e = c.recv();
    assert_eq!(e["type"], "error");
    assert!(e["message"].as_str().unwrap().starts_with("malformed request"));
    c.send(json!({"type": "loadProgram", "source": "let = ;"}));
    assert_eq!(c.recv()["type"], "error");
    load(c, "print(\"hi\");\nthrow 3;\n");
    c.send(json!({"type": "run"}));
    let seen = c.until("error");
    assert_eq!(seen[0], json!({"type": "output", "value": "hi"}));
    assert!(seen[1]["message"].as_str().unwrap().contains('3'));
    c.send(json!({"type": "resume"}));
    assert_eq!(c.recv()["type"], "error");
}

#[test]
fn stdio_breakpoints_and_stepping() {
    breakpoints_and_stepping(&mut StdioClient::start());
}

#[test]
fn stdio_pause() {
    pause_a_running_loop(&mut StdioClient::start());
}

#[test]
fn stdio_errors() {
    protocol_errors(&mut StdioClient::start());
}

#[test]
fn websocket_breakpoints_and_stepping() {
    breakpoints_and_stepping(&mut Ws::start());
}

#[test]
fn websocket_pause() {
    pause_a_running_loop(&mut Ws::start());
}

#[test]
fn websocket_errors() {
    protocol_errors(&mut Ws::start());
}
