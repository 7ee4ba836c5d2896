//! The `stopkit` command line.

use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{load_dir, run_bench, Sweep};
use crate::debug::{serve_stdio, serve_websocket, DebugServer};
use crate::frontend::{parse, parse_generated};
use crate::instrument::{
    compile, ArgsMode, CompileOptions, CtorMode, Granularity, Implicits, Stacks,
};
use crate::interp::{eval_program, Clock, InterpConfig, Metrics};
use crate::runtime::{Event, Session, Stop, Strategy, TimerKind};

/// Exit status when a run stops because its turn budget ran out.
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "stopkit", version, about = "Pausable, resumable MiniScript")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Print the instrumented program.
    Compile {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "instrumented")]
        emit: Emit,
        #[command(flatten)]
        opts: OptArgs,
    },
    /// Compile and run a program, printing its output and final value.
    Run {
        input: PathBuf,
        #[command(flatten)]
        opts: OptArgs,
        #[command(flatten)]
        interp: InterpArgs,
        /// Run the source directly, without instrumentation.
        #[arg(long)]
        plain: bool,
        /// The input is the output of `compile`; option flags are ignored.
        #[arg(long, conflicts_with = "plain")]
        compiled: bool,
        #[arg(long, value_enum)]
        metrics: Option<MetricsFormat>,
        #[arg(long, default_value_t = 1_000_000)]
        max_turns: u64,
    },
    /// Run every `.ms` file of a directory under a sweep of options.
    Bench {
        dir: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',')]
        cont: Vec<Strategy>,
        #[arg(long, value_enum, value_delimiter = ',')]
        ctor: Vec<CtorMode>,
        #[arg(long, value_enum, value_delimiter = ',')]
        timer: Vec<TimerKind>,
        #[arg(long, value_enum, value_delimiter = ',')]
        implicits: Vec<Implicits>,
        #[arg(long, value_enum, value_delimiter = ',')]
        args: Vec<ArgsMode>,
        #[arg(long, value_enum, value_delimiter = ',')]
        stacks: Vec<Stacks>,
        #[arg(long, default_value_t = 100.0)]
        yield_interval: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: ReportFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        interp: InterpArgs,
        #[arg(long, default_value_t = 1_000_000)]
        max_turns: u64,
    },
    /// Serve the debugger protocol.
    Debug {
        #[arg(long, value_enum, default_value = "stdio")]
        transport: TransportKind,
        #[arg(long, default_value_t = 9229)]
        port: u16,
        #[command(flatten)]
        opts: OptArgs,
        #[command(flatten)]
        interp: InterpArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Emit {
    Instrumented,
    Anf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MetricsFormat {
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TransportKind {
    Stdio,
    Websocket,
}

#[derive(Args, Debug)]
pub struct OptArgs {
    #[arg(long, value_enum)]
    cont: Option<Strategy>,
    #[arg(long, value_enum)]
    ctor: Option<CtorMode>,
    #[arg(long, value_enum)]
    timer: Option<TimerKind>,
    /// Target time between yields, in milliseconds.
    #[arg(long)]
    yield_interval: Option<f64>,
    #[arg(long, value_enum)]
    stacks: Option<Stacks>,
    /// Frames allowed before a deep-stack capture.
    #[arg(long)]
    depth_limit: Option<u32>,
    #[arg(long, value_enum)]
    implicits: Option<Implicits>,
    #[arg(long, value_enum)]
    args: Option<ArgsMode>,
    #[arg(long, value_enum)]
    granularity: Option<Granularity>,
    /// Clock reads per yield interval for the approximate timer.
    #[arg(long)]
    resample: Option<f64>,
    #[arg(long)]
    countdown: Option<u64>,
    /// Bounce tail calls through the caller, for hosts without proper tail calls.
    #[arg(long)]
    trampoline: bool,
}

impl OptArgs {
    pub fn apply(&self, mut o: CompileOptions) -> CompileOptions {
        if let Some(v) = self.cont {
            o.cont = v;
        }
        if let Some(v) = self.ctor {
            o.ctor = v;
        }
        if let Some(v) = self.timer {
            o.timer = v;
        }
        if let Some(v) = self.yield_interval {
            o.yield_interval_ms = v;
        }
        if let Some(v) = self.stacks {
            o.stacks = v;
        }
        if let Some(v) = self.depth_limit {
            o.stack_depth_limit = v;
        }
        if let Some(v) = self.implicits {
            o.implicits = v;
        }
        if let Some(v) = self.args {
            o.args = v;
        }
        if let Some(v) = self.granularity {
            o.suspend_granularity = v;
        }
        if let Some(v) = self.resample {
            o.resample_target = v;
        }
        if let Some(v) = self.countdown {
            o.countdown_n = v;
        }
        o.trampoline |= self.trampoline;
        o
    }
}

#[derive(Args, Debug)]
pub struct InterpArgs {
    /// Live activations the interpreter allows before a stack overflow.
    #[arg(long, default_value_t = 1000)]
    stack_limit: usize,
    /// Disable proper tail calls; instrumented code trampolines instead.
    #[arg(long)]
    no_ptc: bool,
    /// Virtual microseconds charged per evaluation step.
    #[arg(long, default_value_t = 1.0)]
    step_cost: f64,
    /// Use the wall clock instead of virtual time.
    #[arg(long)]
    real_clock: bool,
}

impl InterpArgs {
    fn config(&self) -> InterpConfig {
        let mut c = InterpConfig::default().with_stack_limit(self.stack_limit);
        c.proper_tail_calls = !self.no_ptc;
        c.clock = if self.real_clock {
            Clock::Real
        } else {
            Clock::Virtual {
                step_cost_micros: self.step_cost,
            }
        };
        c
    }
}

/// Parse `args` (program name first) and run. Returns the exit status.
pub fn main_with(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

pub fn main() -> i32 {
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    main_with(std::env::args().collect(), &mut out, &mut err)
}

fn read(p: &PathBuf) -> Result<String, String> {
    fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn io(e: std::io::Error) -> String {
    e.to_string()
}

fn execute(cmd: Cmd, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    match cmd {
        Cmd::Compile {
            input,
            output,
            emit,
            opts,
        } => {
            let c = compile(&read(&input)?, &opts.apply(CompileOptions::default()))
                .map_err(|e| e.to_string())?;
            let text = match emit {
                Emit::Instrumented => c.text(),
                Emit::Anf => c.anf_text(),
            };
            match output {
                Some(p) => fs::write(&p, text).map_err(io)?,
                None => write!(out, "{text}").map_err(io)?,
            }
            Ok(0)
        }
        Cmd::Run {
            input,
            opts,
            interp,
            plain,
            compiled,
            metrics,
            max_turns,
        } => {
            let src = read(&input)?;
            let cfg = interp.config();
            if plain {
                let p = parse(&src).map_err(|e| e.to_string())?;
                let o = eval_program(&p, &cfg);
                for l in &o.outputs {
                    writeln!(out, "{l}").map_err(io)?;
                }
                let code = finish_run(o.result.map(|v| v.to_string()), out, err)?;
                print_metrics(metrics, &o.metrics, out)?;
                return Ok(code);
            }
            let mut o = opts.apply(CompileOptions::default());
            o.trampoline |= interp.no_ptc;
            let mut s = if compiled {
                let p = parse_generated(&src).map_err(|e| e.to_string())?;
                Session::new(&p, cfg).map_err(|e| e.to_string())?
            } else {
                Session::from_source(&src, &o, cfg).map_err(|e| e.to_string())?
            };
            s.run();
            let mut code = 0;
            loop {
                let turns = s.turns();
                let stop = s.run_until_idle((turns + 256).min(max_turns));
                for e in s.take_events() {
                    match e {
                        Event::Output { value } => writeln!(out, "{value}").map_err(io)?,
                        Event::Done { result } => writeln!(out, "{result}").map_err(io)?,
                        Event::Error { message } => {
                            writeln!(err, "error: {message}").map_err(io)?;
                            code = 1;
                        }
                        Event::Paused { .. } | Event::Breakpoints { .. } => {}
                    }
                }
                if stop == Stop::Idle {
                    break;
                }
                if s.turns() >= max_turns {
                    writeln!(err, "turn budget exhausted after {max_turns} turns").map_err(io)?;
                    code = EXIT_BUDGET;
                    break;
                }
            }
            print_metrics(metrics, &s.metrics(), out)?;
            Ok(code)
        }
        Cmd::Bench {
            dir,
            cont,
            ctor,
            timer,
            implicits,
            args,
            stacks,
            yield_interval,
            format,
            output,
            interp,
            max_turns,
        } => {
            let programs = load_dir(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let mut sweep = Sweep::default();
            sweep.base.yield_interval_ms = yield_interval;
            sweep.base.trampoline = interp.no_ptc;
            sweep.conts = or(cont, sweep.conts);
            sweep.ctors = or(ctor, sweep.ctors);
            sweep.timers = or(timer, sweep.timers);
            sweep.implicits = or(implicits, sweep.implicits);
            sweep.args = or(args, sweep.args);
            sweep.stacks = or(stacks, sweep.stacks);
            let report = run_bench(&programs, &sweep, &interp.config(), max_turns);
            let text = match format {
                ReportFormat::Csv => report.to_csv(),
                ReportFormat::Json => report.to_json() + "\n",
            };
            match output {
                Some(p) => fs::write(&p, text).map_err(io)?,
                None => write!(out, "{text}").map_err(io)?,
            }
            Ok(0)
        }
        Cmd::Debug {
            transport,
            port,
            opts,
            interp,
        } => {
            let mut defaults = opts.apply(CompileOptions::for_debugging());
            defaults.trampoline |= interp.no_ptc;
            let mut server = DebugServer::new(defaults, interp.config());
            match transport {
                TransportKind::Stdio => serve_stdio(&mut server).map_err(io)?,
                TransportKind::Websocket => {
                    let l = TcpListener::bind(("127.0.0.1", port)).map_err(io)?;
                    writeln!(err, "listening on ws://{}", l.local_addr().map_err(io)?)
                        .map_err(io)?;
                    serve_websocket(&mut server, l, None).map_err(io)?;
                }
            }
            Ok(0)
        }
    }
}

fn or<T>(v: Vec<T>, d: Vec<T>) -> Vec<T> {
    if v.is_empty() {
        d
    } else {
        v
    }
}

fn finish_run(
    r: Result<String, crate::interp::RuntimeError>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, String> {
    match r {
        Ok(v) => {
            writeln!(out, "{v}").map_err(io)?;
            Ok(0)
        }
        Err(e) => {
            writeln!(err, "error: {e}").map_err(io)?;
            Ok(1)
        }
    }
}

fn print_metrics(
    f: Option<MetricsFormat>,
    m: &Metrics,
    out: &mut dyn Write,
) -> Result<(), String> {
    if let Some(MetricsFormat::Json) = f {
        let j = serde_json::to_string(m).map_err(|e| e.to_string())?;
        writeln!(out, "{j}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let argv = std::iter::once("stopkit")
            .chain(args.iter().copied())
            .map(String::from)
            .collect();
        let code = main_with(argv, &mut o, &mut e);
        (
            code,
            String::from_utf8(o).unwrap(),
            String::from_utf8(e).unwrap(),
        )
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, _, err) = run(&["run", "x.ms", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("--bogus"));
    }

    #[test]
    fn bad_enum_value_is_a_usage_error() {
        assert_eq!(run(&["compile", "x.ms", "--cont", "nope"]).0, 2);
    }

    #[test]
    fn missing_file_fails() {
        let (code, _, err) = run(&["run", "/nonexistent/file.ms"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error:"));
    }
}
