//! The `stopkit` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn stopkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stopkit"))
        .args(args)
        .output()
        .unwrap()
}

fn program(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("programs")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn temp_program(dir: &Path, name: &str, src: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, src).unwrap();
    p
}

#[test]
fn run_prints_outputs_then_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let p = temp_program(dir.path(), "p.ms", "print(1, \"a\");\nprint(2);\n40 + 2;\n");
    let o = stopkit(&["run", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1 a\n2\n42\n");
}

#[test]
fn control_examples() {
    for (file, want) in [("control-abort.ms", "0\n"), ("control-resume.ms", "11\n")] {
        for cont in ["checked", "exceptional", "eager"] {
            let o = stopkit(&["run", &program(file), "--cont", cont, "--ctor", "wrapped"]);
            assert_eq!(stdout(&o), want, "{file} {cont}");
        }
    }
}

#[test]
fn plain_and_instrumented_agree() {
    for f in ["fib.ms", "objects.ms", "nested-calls.ms", "arith.ms"] {
        let a = stopkit(&["run", "--plain", &program(f)]);
        let b = stopkit(&["run", &program(f), "--yield-interval", "1"]);
        assert!(a.status.success());
        assert_eq!(stdout(&a), stdout(&b), "{f}");
    }
}

#[test]
fn deep_recursion_needs_deep_stacks() {
    let o = stopkit(&["run", &program("deep.ms")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stack overflow"), "{}", stderr(&o));
    let o = stopkit(&["run", &program("deep.ms"), "--stacks", "deep", "--depth-limit", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "100000\n");
}

#[test]
fn trampolined_tail_calls_without_host_support() {
    let dir = tempfile::tempdir().unwrap();
    let p = temp_program(
        dir.path(),
        "t.ms",
        "function go(n, a) { if (n == 0) { return a; } return go(n - 1, a + 2); }\ngo(50000, 0);\n",
    );
    let o = stopkit(&["run", p.to_str().unwrap(), "--no-ptc", "--metrics", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("100000"));
    let m: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(m["maxHostDepth"].as_u64().unwrap() <= 8, "{m}");
    // Without the trampoline the same host overflows.
    let o = stopkit(&["run", "--plain", "--no-ptc", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn metrics_report() {
    let o = stopkit(&["run", &program("sum-loop.ms"), "--metrics", "json", "--timer", "exact"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("19999900000"));
    let m: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(m["steps"].as_u64().unwrap() > 0);
    let intervals = m["intervals"].as_array().unwrap();
    assert_eq!(intervals.len() as u64 + 1, m["yieldCount"].as_u64().unwrap());
    for i in intervals {
        let i = i.as_f64().unwrap();
        assert!((100.0..115.0).contains(&i), "{i}");
    }
}

#[test]
fn turn_budget_exit_status() {
    let o = stopkit(&["run", &program("forever.ms"), "--max-turns", "20"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("turn budget"));
}

#[test]
fn compile_emits_instrumented_and_anf_text() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.ms");
    let o = stopkit(&["compile", &program("fib.ms"), "-o", out.to_str().unwrap(), "--cont", "eager"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("$rt.configure({cont: \"eager\""), "{text}");
    assert!(text.contains("$rt.pushFrame"));

    let o = stopkit(&["compile", &program("fib.ms"), "--emit", "anf"]);
    let anf = stdout(&o);
    assert!(!anf.contains("$rt."));
    assert!(anf.contains("function fib(n)"));
}

#[test]
fn strict_arity_is_checked_at_compile_time() {
    let dir = tempfile::tempdir().unwrap();
    let p = temp_program(dir.path(), "a.ms", "function f() { return arguments.length; }\nf(1);\n");
    let o = stopkit(&["compile", p.to_str().unwrap(), "--args", "false"]);
    assert_eq!(o.status.code(), Some(1));
    let o = stopkit(&["run", p.to_str().unwrap(), "--args", "varargs"]);
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn errors_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    let bad = temp_program(dir.path(), "bad.ms", "let = 3;\n");
    let o = stopkit(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1:"), "{}", stderr(&o));

    let o = stopkit(&["run", &program("fib.ms"), "--cont", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    let o = stopkit(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = stopkit(&["run", "/nonexistent/x.ms"]);
    assert_eq!(o.status.code(), Some(1));

    let thrown = temp_program(dir.path(), "t.ms", "print(\"before\");\nthrow \"up\";\n");
    let o = stopkit(&["run", thrown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "before\n");
    assert!(stderr(&o).contains("up"));
}

#[test]
fn bench_sweep_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    temp_program(dir.path(), "a.ms", "let i = 0; while (i < 3000) { i = i + 1; } i;\n");
    temp_program(dir.path(), "b.ms", "function f(n) { if (n < 2) { return n; } return f(n - 1) + f(n - 2); } f(12);\n");
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let d = dir.path().to_str().unwrap();

    let o = stopkit(&["bench", d, "--cont", "checked,eager", "--implicits", "true,false", "--yield-interval", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("benchmark,cont,ctor,timer,implicits,args,stacks,steps,slowdown,intervalMeanMs,intervalStdMs")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    for r in &rows {
        assert!(r[0] == "a" || r[0] == "b", "{r:?}");
        let slowdown: f64 = r[8].parse().unwrap();
        assert!(slowdown > 1.0, "{r:?}");
    }

    let out = dir.path().join("r.json");
    let o = stopkit(&["bench", d, "--format", "json", "-o", out.to_str().unwrap(), "--cont", "exceptional"]);
    assert!(o.status.success());
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let rows = j["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["cont"] == "exceptional" && r["steps"].as_u64().unwrap() > 0));
}

#[test]
fn compiled_output_reparses_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let fib = temp_program(
        dir.path(),
        "fib.ms",
        "function fib(n) {\n  if (n < 2) { return n; }\n  return fib(n - 1) + fib(n - 2);\n}\nfib(10);\n",
    );
    let out = dir.path().join("out.ms");
    let o = stopkit(&["compile", fib.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = stopkit(&["run", "--compiled", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "55\n");
}

#[test]
fn wrapped_constructors_leave_no_new() {
    let o = stopkit(&["compile", &program("objects.ms"), "--cont", "eager", "--ctor", "wrapped"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.split(|c: char| !c.is_alphanumeric()).any(|w| w == "new"), "{text}");
    let o = stopkit(&["compile", &program("objects.ms"), "--ctor", "direct"]);
    assert!(stdout(&o).contains("new Point"));
}

#[test]
fn empty_bench_dir_gives_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = stopkit(&["bench", dir.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["rows"], serde_json::json!([]));
}
