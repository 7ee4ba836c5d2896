//! Drive the debugger protocol in-process: the same JSON messages a client
//! sends over stdio or a websocket.

use stopkit::debug::DebugServer;
use stopkit::runtime::Stop;
use stopkit::{CompileOptions, InterpConfig};

fn main() {
    let mut server = DebugServer::new(CompileOptions::for_debugging(), InterpConfig::default());
    let src = "let a = 1;\nlet b = a + 1;\nprint(a, b);\na * b;\n";
    let load = serde_json::json!({"type": "loadProgram", "source": src}).to_string();
    for req in [
        load.as_str(),
        r#"{"type":"setBreakpoints","lines":[2]}"#,
        r#"{"type":"run"}"#,
        r#"{"type":"status"}"#,
        r#"{"type":"step"}"#,
        r#"{"type":"resume"}"#,
        r#"{"type":"jump"}"#,
    ] {
        println!("> {req}");
        server.handle_text(req);
        while server.pump() == Stop::TurnBudgetExhausted {}
        for reply in server.take_output() {
            println!("< {reply}");
        }
    }
}
