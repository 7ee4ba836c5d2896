//! Newline-delimited JSON over stdio, and websocket text frames.

use std::io::{self, BufRead, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use tungstenite::{Message, WebSocket};

use super::DebugServer;

pub enum Incoming {
    Text(String),
    Nothing,
    Closed,
}

pub trait Transport {
    /// Wait up to `wait` for the next request.
    fn poll(&mut self, wait: Duration) -> Incoming;
    fn send(&mut self, text: &str) -> io::Result<()>;
}

/// Serve one client until it disconnects, then reset the server.
pub fn serve(server: &mut DebugServer, t: &mut dyn Transport) -> io::Result<()> {
    loop {
        let wait = if server.is_running() {
            Duration::from_millis(1)
        } else {
            Duration::from_millis(50)
        };
        match t.poll(wait) {
            Incoming::Text(s) if s.trim().is_empty() => {}
            Incoming::Text(s) => server.handle_text(&s),
            Incoming::Nothing => {}
            Incoming::Closed => {
                server.reset();
                return Ok(());
            }
        }
        server.pump();
        for e in server.take_output() {
            t.send(&e.to_string())?;
        }
    }
}

pub struct StdioTransport<W: Write> {
    lines: mpsc::Receiver<String>,
    out: W,
}

impl<W: Write> StdioTransport<W> {
    /// Read request lines from `input` on a background thread.
    pub fn new<R: BufRead + Send + 'static>(input: R, out: W) -> Self {
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in input.lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        StdioTransport { lines, out }
    }
}

impl<W: Write> Transport for StdioTransport<W> {
    fn poll(&mut self, wait: Duration) -> Incoming {
        match self.lines.recv_timeout(wait) {
            Ok(l) => Incoming::Text(l),
            Err(mpsc::RecvTimeoutError::Timeout) => Incoming::Nothing,
            Err(mpsc::RecvTimeoutError::Disconnected) => Incoming::Closed,
        }
    }

    fn send(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.out, "{text}")?;
        self.out.flush()
    }
}

pub fn serve_stdio(server: &mut DebugServer) -> io::Result<()> {
    let mut t = StdioTransport::new(io::BufReader::new(io::stdin()), io::stdout());
    serve(server, &mut t)
}

struct WsTransport {
    ws: WebSocket<TcpStream>,
}

impl Transport for WsTransport {
    fn poll(&mut self, wait: Duration) -> Incoming {
        if self.ws.get_mut().set_read_timeout(Some(wait)).is_err() {
            return Incoming::Closed;
        }
        match self.ws.read() {
            Ok(Message::Text(t)) => Incoming::Text(t.to_string()),
            Ok(Message::Close(_)) => Incoming::Closed,
            Ok(_) => Incoming::Nothing,
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) =>
            {
                Incoming::Nothing
            }
            Err(_) => Incoming::Closed,
        }
    }

    fn send(&mut self, text: &str) -> io::Result<()> {
        self.ws.send(Message::text(text)).map_err(io::Error::other)
    }
}

/// Accept websocket clients one at a time. Stops after `max_clients`
/// clients if given.
pub fn serve_websocket(
    server: &mut DebugServer,
    listener: TcpListener,
    max_clients: Option<usize>,
) -> io::Result<()> {
    let mut served = 0;
    for stream in listener.incoming() {
        let stream = stream?;
        match tungstenite::accept(stream) {
            Ok(ws) => {
                // A client that vanishes mid-write is just a disconnect.
                let _ = serve(server, &mut WsTransport { ws });
                server.reset();
            }
            Err(e) => eprintln!("websocket handshake failed: {e}"),
        }
        served += 1;
        if max_clients.is_some_and(|m| served >= m) {
            break;
        }
    }
    Ok(())
}
