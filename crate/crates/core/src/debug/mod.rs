//! The debugger protocol: JSON requests in, JSON events out.
//!
//! [`DebugServer`] owns at most one [`Session`] and is transport-agnostic.
//! A transport feeds it request text and forwards the events it produces;
//! between requests the server runs a bounded number of event-loop turns,
//! so pause requests are noticed at the next yield.

mod transport;

pub use transport::{serve, serve_stdio, serve_websocket, Incoming, StdioTransport, Transport};

use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::instrument::CompileOptions;
use crate::interp::InterpConfig;
use crate::runtime::{Event, Session, Status, Stop};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "camelCase", deny_unknown_fields)]
pub enum Request {
    Run,
    Pause,
    Resume,
    Step,
    SetBreakpoints {
        lines: Vec<u32>,
    },
    LoadProgram {
        source: String,
        #[serde(default)]
        options: Option<CompileOptions>,
    },
    Status,
}

pub struct DebugServer {
    session: Option<Session>,
    cfg: InterpConfig,
    defaults: CompileOptions,
    /// Turns run per [`DebugServer::pump`] call.
    pub turns_per_pump: u64,
    out: Vec<Json>,
}

fn event_json(e: &Event) -> Json {
    serde_json::to_value(e).expect("events serialize")
}

fn error(message: impl Into<String>) -> Json {
    json!({"type": "error", "message": message.into()})
}

impl DebugServer {
    /// `defaults` applies to programs loaded without options. Debugging
    /// needs statement-level suspend points, so those are always used.
    pub fn new(defaults: CompileOptions, cfg: InterpConfig) -> Self {
        DebugServer {
            session: None,
            cfg,
            defaults,
            turns_per_pump: 64,
            out: Vec::new(),
        }
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    pub fn is_running(&self) -> bool {
        self.session
            .as_ref()
            .is_some_and(|s| s.status() == Status::Running)
    }

    /// Handle one request line. Its events appear in [`Self::take_output`]
    /// after the next [`Self::pump`].
    pub fn handle_text(&mut self, text: &str) {
        match serde_json::from_str::<Request>(text) {
            Ok(r) => self.handle(r),
            Err(e) => self.out.push(error(format!("malformed request: {e}"))),
        }
    }

    pub fn handle(&mut self, r: Request) {
        if let Request::LoadProgram { source, options } = r {
            let opts = CompileOptions {
                suspend_granularity: crate::instrument::Granularity::Statements,
                ..options.unwrap_or_else(|| self.defaults.clone())
            };
            self.session = None;
            match Session::from_source(&source, &opts, self.cfg.clone()) {
                Ok(s) => {
                    self.session = Some(s);
                    self.out.push(json!({"type": "loaded"}));
                }
                Err(e) => self.out.push(error(e.to_string())),
            }
            return;
        }
        let Some(s) = &mut self.session else {
            self.out.push(error("no program loaded"));
            return;
        };
        match r {
            Request::Run => s.run(),
            Request::Pause => s.pause(),
            Request::Resume => s.resume(),
            Request::Step => s.step(),
            Request::SetBreakpoints { lines } => s.set_breakpoints(lines),
            Request::Status => {
                let mut st = json!({"type": "status", "status": s.status()});
                if let Some((loc, _)) = s.paused_at() {
                    st["line"] = json!(loc.line);
                    st["column"] = json!(loc.column);
                }
                self.out.push(st);
            }
            Request::LoadProgram { .. } => unreachable!(),
        }
    }

    /// Run up to `turns_per_pump` turns and collect the resulting events.
    pub fn pump(&mut self) -> Stop {
        let Some(s) = &mut self.session else {
            return Stop::Idle;
        };
        let stop = s.run_until_idle(s.turns() + self.turns_per_pump);
        self.out.extend(s.take_events().iter().map(event_json));
        stop
    }

    pub fn take_output(&mut self) -> Vec<Json> {
        std::mem::take(&mut self.out)
    }

    /// Back to the state of a fresh server, as after a client disconnects.
    pub fn reset(&mut self) {
        self.session = None;
        self.out.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn server() -> DebugServer {
        DebugServer::new(CompileOptions::default(), InterpConfig::default())
    }

    fn exchange(s: &mut DebugServer, req: &str) -> Vec<Json> {
        s.handle_text(req);
        while s.pump() == Stop::TurnBudgetExhausted {}
        s.take_output()
    }

    #[test]
    fn malformed_json_yields_error_event() {
        let mut s = server();
        let out = exchange(&mut s, "{not json");
        assert_eq!(out.len(), 1);
        assert_eq!(out[0]["type"], "error");
    }

    #[test]
    fn request_before_load_is_an_error() {
        let mut s = server();
        assert_eq!(exchange(&mut s, r#"{"type":"run"}"#)[0]["type"], "error");
    }

    #[test]
    fn breakpoint_then_resume() {
        let mut s = server();
        let src = "let x = 1;\nx = x + 1;\nprint(x);\n";
        let load = json!({"type": "loadProgram", "source": src}).to_string();
        assert_eq!(exchange(&mut s, &load)[0]["type"], "loaded");
        let bp = exchange(&mut s, r#"{"type":"setBreakpoints","lines":[2]}"#);
        assert_eq!(bp[0], json!({"type": "breakpoints", "lines": [2]}));
        let run = exchange(&mut s, r#"{"type":"run"}"#);
        assert_eq!(run[0]["type"], "paused");
        assert_eq!(run[0]["line"], 2);
        assert_eq!(run[0]["reason"], "breakpoint");
        let rest = exchange(&mut s, r#"{"type":"resume"}"#);
        assert_eq!(rest[0], json!({"type": "output", "value": "2"}));
        assert_eq!(rest[1]["type"], "done");
    }
}
