//! Exhaust-up-to-c queries against an external SMT-LIB2 solver.
//!
//! The counted bits are those of one designated output term. XOR variable
//! `v` is bit `v - 1` of the output (bit 0 is the least significant), so the
//! same draws mean the same constraints in CNF and SMT mode.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;
use wait_timeout::ChildExt;

use crate::backend::{BackendError, CountingBackend};
use crate::cnf::Var;
use crate::sat::QueryOutcome;
use crate::xor::XorConstraint;

/// Environment variable holding the solver command line.
pub const SOLVER_ENV: &str = "XORCOUNT_SMT_SOLVER";

/// Name of the bit-vector view declared for floating-point outputs.
pub const FLOAT_VIEW_NAME: &str = "xorcount__output_bits";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmtError {
    #[error("syntax error in SMT-LIB input: {0}")]
    Syntax(String),
    #[error("output `{0}` is not declared in the script")]
    OutputNotDeclared(String),
    #[error("output `{name}` has sort {sort}, expected a bit-vector of width {width}")]
    OutputSort {
        name: String,
        sort: String,
        width: usize,
    },
    #[error("floating-point output `{0}` needs a bit-vector view; enable IEEE conversion or declare one")]
    FloatViewUnavailable(String),
    #[error("output width must be at least 1")]
    ZeroWidth,
    #[error("could not start solver `{command}`: {message}")]
    Spawn { command: String, message: String },
    #[error("solver exited unexpectedly{}", if stderr.is_empty() { String::new() } else { format!(": {stderr}") })]
    Crashed { stderr: String },
    #[error("solver reported an error: {0}")]
    Solver(String),
    #[error("unexpected solver response: {0}")]
    Protocol(String),
    #[error("solver answered `unknown`; counting cannot continue soundly")]
    Unknown,
    #[error("query exceeded the time limit after {found} solutions")]
    Timeout { found: u64 },
    #[error("cap must be at least 1")]
    ZeroCap,
}

/// A parsed S-expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }
}

impl std::fmt::Display for Sexp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parses a sequence of top-level S-expressions, returning each with its
/// byte span in `text`. Comments, string literals and quoted symbols are
/// handled; quoted symbols keep their bars.
pub fn parse_sexps(text: &str) -> Result<Vec<(Sexp, std::ops::Range<usize>)>, SmtError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'(' => {
                stack.push((Vec::new(), i));
                i += 1;
                continue;
            }
            b')' => {
                let (items, start) = stack
                    .pop()
                    .ok_or_else(|| SmtError::Syntax(format!("unbalanced `)` at byte {i}")))?;
                i += 1;
                let e = Sexp::List(items);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(e),
                    None => out.push((e, start..i)),
                }
                continue;
            }
            _ if b.is_ascii_whitespace() => {
                i += 1;
                continue;
            }
            _ => {}
        }
        let start = i;
        if b == b'"' {
            i += 1;
            loop {
                match bytes.get(i) {
                    None => return Err(SmtError::Syntax("unterminated string literal".into())),
                    Some(b'"') if bytes.get(i + 1) == Some(&b'"') => i += 2,
                    Some(b'"') => {
                        i += 1;
                        break;
                    }
                    Some(_) => i += 1,
                }
            }
        } else if b == b'|' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'|' {
                i += 1;
            }
            if i == bytes.len() {
                return Err(SmtError::Syntax("unterminated quoted symbol".into()));
            }
            i += 1;
        } else {
            while i < bytes.len()
                && !bytes[i].is_ascii_whitespace()
                && !matches!(bytes[i], b'(' | b')' | b';' | b'"' | b'|')
            {
                i += 1;
            }
        }
        let e = Sexp::Atom(text[start..i].to_string());
        match stack.last_mut() {
            Some((parent, _)) => parent.push(e),
            None => out.push((e, start..i)),
        }
    }
    if !stack.is_empty() {
        return Err(SmtError::Syntax("unbalanced `(`".into()));
    }
    Ok(out)
}

fn unquote(sym: &str) -> &str {
    sym.strip_prefix('|')
        .and_then(|s| s.strip_suffix('|'))
        .unwrap_or(sym)
}

/// Sort of the designated output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputSort {
    BitVec,
    /// IEEE float with exponent and significand widths; counted by bit
    /// pattern through a bit-vector view.
    Float { eb: u32, sb: u32 },
}

fn sort_of(s: &Sexp) -> Option<(OutputSort, usize)> {
    match s {
        Sexp::Atom(a) => {
            let (eb, sb) = match a.as_str() {
                "Float16" => (5, 11),
                "Float32" => (8, 24),
                "Float64" => (11, 53),
                "Float128" => (15, 113),
                _ => return None,
            };
            Some((OutputSort::Float { eb, sb }, (eb + sb) as usize))
        }
        Sexp::List(items) => {
            let atoms: Option<Vec<&str>> = items.iter().map(Sexp::atom).collect();
            match atoms?.as_slice() {
                ["_", "BitVec", w] => Some((OutputSort::BitVec, w.parse().ok()?)),
                ["_", "FloatingPoint", eb, sb] => {
                    let (eb, sb): (u32, u32) = (eb.parse().ok()?, sb.parse().ok()?);
                    Some((OutputSort::Float { eb, sb }, (eb + sb) as usize))
                }
                _ => None,
            }
        }
    }
}

/// A user script with one designated output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtProblem {
    /// Declarations and assertions, with solver-interaction commands removed.
    pub script: String,
    pub output_name: String,
    pub output_width: usize,
    pub logic: Option<String>,
    pub sort: OutputSort,
}

const DROPPED_COMMANDS: &[&str] = &["check-sat", "check-sat-assuming", "exit", "echo", "reset"];

impl SmtProblem {
    /// Parses `text`, locates the declaration of `output_name`, and checks
    /// its sort against `output_width`.
    pub fn parse(text: &str, output_name: &str, output_width: usize) -> Result<Self, SmtError> {
        if output_width == 0 {
            return Err(SmtError::ZeroWidth);
        }
        let wanted = unquote(output_name);
        let mut kept = Vec::new();
        let mut logic = None;
        let mut found = None;
        for (cmd, span) in parse_sexps(text)? {
            let Sexp::List(items) = &cmd else {
                return Err(SmtError::Syntax(format!("stray atom `{cmd}` at top level")));
            };
            let head = items.first().and_then(Sexp::atom).unwrap_or("");
            if DROPPED_COMMANDS.contains(&head) || head.starts_with("get-") {
                continue;
            }
            if head == "set-option" && items.get(1).and_then(Sexp::atom) == Some(":print-success") {
                continue;
            }
            match head {
                "set-logic" => logic = items.get(1).and_then(Sexp::atom).map(str::to_string),
                "declare-fun" | "define-fun" | "declare-const" => {
                    let name = items.get(1).and_then(Sexp::atom).map(unquote);
                    if name == Some(wanted) {
                        let sort = match (head, items.len()) {
                            ("declare-const", 3) => items.get(2),
                            ("declare-fun", 4) if items[2] == Sexp::List(vec![]) => items.get(3),
                            ("define-fun", 5) if items[2] == Sexp::List(vec![]) => items.get(3),
                            _ => None,
                        };
                        found = Some(sort.cloned().ok_or_else(|| SmtError::OutputSort {
                            name: wanted.to_string(),
                            sort: "a function with arguments".into(),
                            width: output_width,
                        })?);
                    }
                }
                _ => {}
            }
            kept.push(&text[span]);
        }
        let sort_expr = found.ok_or_else(|| SmtError::OutputNotDeclared(wanted.to_string()))?;
        let sort = match sort_of(&sort_expr) {
            Some((s, w)) if w == output_width => s,
            _ => {
                return Err(SmtError::OutputSort {
                    name: wanted.to_string(),
                    sort: sort_expr.to_string(),
                    width: output_width,
                })
            }
        };
        Ok(SmtProblem {
            script: kept.join("\n"),
            output_name: output_name.to_string(),
            output_width,
            logic,
            sort,
        })
    }

    /// The bit-vector term whose value is counted.
    pub fn counted_term(&self) -> &str {
        match self.sort {
            OutputSort::BitVec => &self.output_name,
            OutputSort::Float { .. } => FLOAT_VIEW_NAME,
        }
    }

    /// The script up to the first `check-sat`: options, the user script,
    /// the bit-vector view for float outputs, and one assertion per XOR.
    pub fn render(&self, cfg: &SolverProcessConfig, xors: &[XorConstraint]) -> Result<String, SmtError> {
        let mut s = String::new();
        s.push_str("(set-option :print-success false)\n(set-option :produce-models true)\n");
        for opt in &cfg.options {
            s.push_str(opt);
            s.push('\n');
        }
        s.push_str(&self.script);
        s.push('\n');
        if let OutputSort::Float { .. } = self.sort {
            if !cfg.ieee_bv_conversion {
                return Err(SmtError::FloatViewUnavailable(self.output_name.clone()));
            }
            s.push_str(&format!(
                "(declare-fun {FLOAT_VIEW_NAME} () (_ BitVec {}))\n(assert (= {FLOAT_VIEW_NAME} (fp.to_ieee_bv {})))\n",
                self.output_width, self.output_name
            ));
        }
        for x in xors {
            s.push_str(&self.xor_assertion(x));
            s.push('\n');
        }
        Ok(s)
    }

    /// `(assert (= (bvxor bit_i ...) #bP))` over single-bit extracts.
    pub fn xor_assertion(&self, x: &XorConstraint) -> String {
        let term = self.counted_term();
        let parity = if x.parity { "#b1" } else { "#b0" };
        let bits: Vec<String> = x
            .vars
            .iter()
            .map(|&v| {
                assert!(v >= 1 && v as usize <= self.output_width, "XOR bit {v} out of range");
                let i = v - 1;
                format!("((_ extract {i} {i}) {term})")
            })
            .collect();
        match bits.len() {
            0 if x.parity => "(assert false)".into(),
            0 => "(assert true)".into(),
            1 => format!("(assert (= {} {parity}))", bits[0]),
            _ => format!("(assert (= (bvxor {}) {parity}))", bits.join(" ")),
        }
    }

    /// `(assert (not (= out value)))`.
    pub fn blocking_assertion(&self, value: &BitValue) -> String {
        format!("(assert (not (= {} {})))", self.counted_term(), value.to_literal())
    }
}

/// A bit-vector value, least significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitValue(pub Vec<bool>);

impl BitValue {
    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// `#b` literal, most significant bit first.
    pub fn to_literal(&self) -> String {
        let mut s = String::with_capacity(self.0.len() + 2);
        s.push_str("#b");
        for &b in self.0.iter().rev() {
            s.push(if b { '1' } else { '0' });
        }
        s
    }

    /// The low 64 bits.
    pub fn to_u64(&self) -> u64 {
        self.0
            .iter()
            .take(64)
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    /// Parses `#b...`, `#x...` or `(_ bvN w)`.
    pub fn from_sexp(e: &Sexp) -> Result<Self, SmtError> {
        let bad = || SmtError::Protocol(format!("not a bit-vector literal: {e}"));
        match e {
            Sexp::Atom(a) => {
                if let Some(bin) = a.strip_prefix("#b") {
                    bin.chars()
                        .rev()
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            _ => Err(bad()),
                        })
                        .collect::<Result<Vec<_>, _>>()
                        .map(BitValue)
                } else if let Some(hex) = a.strip_prefix("#x") {
                    let mut bits = Vec::with_capacity(hex.len() * 4);
                    for c in hex.chars().rev() {
                        let d = c.to_digit(16).ok_or_else(bad)?;
                        bits.extend((0..4).map(|i| d >> i & 1 == 1));
                    }
                    Ok(BitValue(bits))
                } else {
                    Err(bad())
                }
            }
            Sexp::List(items) => {
                let atoms: Option<Vec<&str>> = items.iter().map(Sexp::atom).collect();
                match atoms.as_deref() {
                    Some(["_", bv, w]) if bv.starts_with("bv") => {
                        let width: usize = w.parse().map_err(|_| bad())?;
                        let digits = &bv[2..];
                        if digits.is_empty() || !digits.bytes().all(|d| d.is_ascii_digit()) {
                            return Err(bad());
                        }
                        Ok(BitValue(decimal_to_bits(digits, width).ok_or_else(bad)?))
                    }
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// Converts a decimal string to `width` bits, failing if it does not fit.
fn decimal_to_bits(digits: &str, width: usize) -> Option<Vec<bool>> {
    // Repeated halving of the decimal digit string.
    let mut num: Vec<u8> = digits.bytes().map(|d| d - b'0').collect();
    let mut bits = Vec::with_capacity(width);
    while num.iter().any(|&d| d != 0) {
        let mut rem = 0u8;
        for d in num.iter_mut() {
            let cur = rem * 10 + *d;
            *d = cur / 2;
            rem = cur % 2;
        }
        bits.push(rem == 1);
    }
    if bits.len() > width {
        return None;
    }
    bits.resize(width, false);
    Some(bits)
}

/// Extracts the single value from a `get-value` response `((term value))`.
pub fn parse_get_value(response: &str) -> Result<BitValue, SmtError> {
    let exprs = parse_sexps(response)?;
    match exprs.as_slice() {
        [(Sexp::List(pairs), _)] if pairs.len() == 1 => match &pairs[0] {
            Sexp::List(pair) if pair.len() == 2 => BitValue::from_sexp(&pair[1]),
            _ => Err(SmtError::Protocol(response.trim().to_string())),
        },
        _ => Err(SmtError::Protocol(response.trim().to_string())),
    }
}

/// When the solver process is replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RestartPolicy {
    /// A fresh process for every query (every search iteration).
    #[default]
    PerQuery,
    /// Also restart after this many `check-sat` calls within a query,
    /// replaying the blocking assertions found so far.
    EveryChecks(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverProcessConfig {
    /// Program and arguments; the program must read SMT-LIB2 on stdin.
    pub command: Vec<String>,
    /// Wall-clock limit for one whole exhaust query.
    pub query_timeout: Option<Duration>,
    pub restart: RestartPolicy,
    /// Extra commands sent before the user script, for solver tuning.
    pub options: Vec<String>,
    /// Whether the solver understands `fp.to_ieee_bv`.
    pub ieee_bv_conversion: bool,
}

impl SolverProcessConfig {
    pub fn new<I, S>(command: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SolverProcessConfig {
            command: command.into_iter().map(Into::into).collect(),
            query_timeout: None,
            restart: RestartPolicy::PerQuery,
            options: Vec::new(),
            ieee_bv_conversion: true,
        }
    }

    /// Splits a command line on whitespace.
    pub fn from_command_line(line: &str) -> Option<Self> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        (!parts.is_empty()).then(|| Self::new(parts))
    }

    /// The solver named by `XORCOUNT_SMT_SOLVER`, else `z3 -in` when `z3`
    /// is on the `PATH`.
    pub fn from_env() -> Option<Self> {
        if let Ok(line) = std::env::var(SOLVER_ENV) {
            return Self::from_command_line(&line);
        }
        find_on_path("z3").map(|p| Self::new([p.to_string_lossy().into_owned(), "-in".into()]))
    }
}

fn find_on_path(program: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
}

/// A running solver process.
struct SolverProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    stderr: Arc<Mutex<String>>,
}

impl SolverProcess {
    fn spawn(cfg: &SolverProcessConfig) -> Result<Self, SmtError> {
        let (program, args) = cfg.command.split_first().ok_or_else(|| SmtError::Spawn {
            command: String::new(),
            message: "empty command".into(),
        })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SmtError::Spawn {
                command: cfg.command.join(" "),
                message: e.to_string(),
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut err_pipe = child.stderr.take().expect("piped stderr");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = Arc::clone(&stderr);
        thread::spawn(move || {
            let mut buf = String::new();
            let _ = err_pipe.read_to_string(&mut buf);
            sink.lock().map(|mut s| s.push_str(&buf)).ok();
        });
        Ok(SolverProcess {
            child,
            stdin,
            lines,
            stderr,
        })
    }

    fn crashed(&mut self) -> SmtError {
        let _ = self.child.wait_timeout(Duration::from_millis(200));
        let stderr = self.stderr.lock().map(|s| s.trim().to_string()).unwrap_or_default();
        SmtError::Crashed { stderr }
    }

    fn send(&mut self, text: &str) -> Result<(), SmtError> {
        log::trace!("smt> {text}");
        if self
            .stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.write_all(b"\n"))
            .and_then(|_| self.stdin.flush())
            .is_err()
        {
            return Err(self.crashed());
        }
        Ok(())
    }

    /// Reads one complete response (balanced parentheses).
    fn response(&mut self, deadline: Option<Instant>, found: u64) -> Result<String, SmtError> {
        let mut buf = String::new();
        let mut depth = 0i64;
        loop {
            let line = match deadline {
                Some(d) => {
                    let left = d.saturating_duration_since(Instant::now());
                    match self.lines.recv_timeout(left) {
                        Ok(l) => l,
                        Err(RecvTimeoutError::Timeout) => return Err(SmtError::Timeout { found }),
                        Err(RecvTimeoutError::Disconnected) => return Err(self.crashed()),
                    }
                }
                None => match self.lines.recv() {
                    Ok(l) => l,
                    Err(_) => return Err(self.crashed()),
                },
            };
            log::trace!("smt< {line}");
            for c in line.chars() {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    _ => {}
                }
            }
            buf.push_str(&line);
            buf.push('\n');
            if depth <= 0 && !buf.trim().is_empty() {
                return Ok(buf);
            }
        }
    }

    fn check_sat(&mut self, deadline: Option<Instant>, found: u64) -> Result<bool, SmtError> {
        self.send("(check-sat)")?;
        let r = self.response(deadline, found)?;
        match r.trim() {
            "sat" => Ok(true),
            "unsat" => Ok(false),
            "unknown" => Err(SmtError::Unknown),
            other if other.starts_with("(error") => Err(SmtError::Solver(error_message(other))),
            other => Err(SmtError::Protocol(other.to_string())),
        }
    }

    fn get_value(&mut self, term: &str, deadline: Option<Instant>, found: u64) -> Result<BitValue, SmtError> {
        self.send(&format!("(get-value ({term}))"))?;
        let r = self.response(deadline, found)?;
        if r.trim_start().starts_with("(error") {
            return Err(SmtError::Solver(error_message(r.trim())));
        }
        parse_get_value(&r)
    }
}

fn error_message(resp: &str) -> String {
    match parse_sexps(resp).ok().as_deref() {
        Some([(Sexp::List(items), _)]) if items.len() == 2 => {
            let msg = items[1].to_string();
            msg.trim_matches('"').to_string()
        }
        _ => resp.to_string(),
    }
}

impl Drop for SolverProcess {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.stdin.flush();
        if let Ok(None) = self.child.wait_timeout(Duration::from_millis(100)) {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

/// Enumerates distinct output values under `xors`, stopping at `cap`,
/// and calls `on_value` for each.
pub fn smt_exhaust_with<F: FnMut(&BitValue)>(
    p: &SmtProblem,
    cfg: &SolverProcessConfig,
    xors: &[XorConstraint],
    cap: u64,
    mut on_value: F,
) -> Result<QueryOutcome, SmtError> {
    if cap == 0 {
        return Err(SmtError::ZeroCap);
    }
    let deadline = cfg.query_timeout.map(|t| Instant::now() + t);
    let prefix = p.render(cfg, xors)?;
    let mut proc = SolverProcess::spawn(cfg)?;
    proc.send(&prefix)?;
    let mut blocks: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut calls = 0u64;
    let mut checks_since_start = 0u64;
    loop {
        if let RestartPolicy::EveryChecks(n) = cfg.restart {
            if n > 0 && checks_since_start == n {
                proc = SolverProcess::spawn(cfg)?;
                proc.send(&prefix)?;
                for b in &blocks {
                    proc.send(b)?;
                }
                checks_since_start = 0;
            }
        }
        let found = seen.len() as u64;
        calls += 1;
        checks_since_start += 1;
        if !proc.check_sat(deadline, found)? {
            break;
        }
        let v = proc.get_value(p.counted_term(), deadline, found)?;
        if v.width() != p.output_width {
            return Err(SmtError::Protocol(format!(
                "value {} has width {}, expected {}",
                v.to_literal(),
                v.width(),
                p.output_width
            )));
        }
        if !seen.insert(v.clone()) {
            return Err(SmtError::Protocol(format!(
                "solver returned blocked value {}",
                v.to_literal()
            )));
        }
        on_value(&v);
        if seen.len() as u64 == cap {
            break;
        }
        let b = p.blocking_assertion(&v);
        proc.send(&b)?;
        blocks.push(b);
    }
    let n = seen.len() as u64;
    let saturated = n == cap;
    Ok(QueryOutcome {
        n_sat: n,
        saturated,
        solver_calls: calls,
    })
}

/// Exhaust-up-to-c over the output bits of `p`.
pub fn smt_exhaust_up_to_c(
    p: &SmtProblem,
    cfg: &SolverProcessConfig,
    xors: &[XorConstraint],
    cap: u64,
) -> Result<QueryOutcome, SmtError> {
    smt_exhaust_with(p, cfg, xors, cap, |_| {})
}

/// SMT counting backend; one solver process per query.
#[derive(Debug, Clone)]
pub struct SmtBackend {
    problem: SmtProblem,
    config: SolverProcessConfig,
    domain: Vec<Var>,
}

impl SmtBackend {
    pub fn new(problem: SmtProblem, config: SolverProcessConfig) -> Self {
        let domain = (1..=problem.output_width as Var).collect();
        SmtBackend {
            problem,
            config,
            domain,
        }
    }

    pub fn problem(&self) -> &SmtProblem {
        &self.problem
    }
}

impl CountingBackend for SmtBackend {
    fn width(&self) -> usize {
        self.problem.output_width
    }

    fn xor_domain(&self) -> &[Var] {
        &self.domain
    }

    fn exhaust(&mut self, xors: &[XorConstraint], cap: u64) -> Result<QueryOutcome, BackendError> {
        Ok(smt_exhaust_up_to_c(&self.problem, &self.config, xors, cap)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AND_MASK: &str = "(set-logic QF_BV)
(declare-fun x () (_ BitVec 8))
(declare-fun y () (_ BitVec 8))
(assert (= y (bvand x #x0F)))
(check-sat)
(get-model)
(exit)
";

    #[test]
    fn sexp_parsing() {
        let e = parse_sexps("(a (b \"x)\" |q r|) ; c )\n d)").unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].0.to_string(), "(a (b \"x)\" |q r|) d)");
        assert!(parse_sexps("(a").is_err());
        assert!(parse_sexps("a)").is_err());
    }

    #[test]
    fn problem_strips_interaction_commands() {
        let p = SmtProblem::parse(AND_MASK, "y", 8).unwrap();
        assert_eq!(p.logic.as_deref(), Some("QF_BV"));
        assert_eq!(p.sort, OutputSort::BitVec);
        assert!(!p.script.contains("check-sat"));
        assert!(!p.script.contains("get-model"));
        assert!(!p.script.contains("exit"));
        assert!(p.script.contains("bvand"));
    }

    #[test]
    fn problem_validates_output() {
        assert_eq!(
            SmtProblem::parse(AND_MASK, "z", 8),
            Err(SmtError::OutputNotDeclared("z".into()))
        );
        assert!(matches!(
            SmtProblem::parse(AND_MASK, "y", 4),
            Err(SmtError::OutputSort { .. })
        ));
        assert_eq!(SmtProblem::parse(AND_MASK, "y", 0), Err(SmtError::ZeroWidth));
        let p = SmtProblem::parse("(declare-const |my out| (_ BitVec 3))", "|my out|", 3).unwrap();
        assert_eq!(p.counted_term(), "|my out|");
        let f = SmtProblem::parse("(declare-fun f () Float32)", "f", 32).unwrap();
        assert_eq!(f.sort, OutputSort::Float { eb: 8, sb: 24 });
        assert_eq!(f.counted_term(), FLOAT_VIEW_NAME);
        let mut cfg = SolverProcessConfig::new(["z3", "-in"]);
        assert!(f.render(&cfg, &[]).unwrap().contains("fp.to_ieee_bv f"));
        cfg.ieee_bv_conversion = false;
        assert!(matches!(f.render(&cfg, &[]), Err(SmtError::FloatViewUnavailable(_))));
    }

    #[test]
    fn xor_assertions() {
        let p = SmtProblem::parse(AND_MASK, "y", 8).unwrap();
        assert_eq!(
            p.xor_assertion(&XorConstraint::new(vec![1, 3], true)),
            "(assert (= (bvxor ((_ extract 0 0) y) ((_ extract 2 2) y)) #b1))"
        );
        assert_eq!(
            p.xor_assertion(&XorConstraint::new(vec![8], false)),
            "(assert (= ((_ extract 7 7) y) #b0))"
        );
        assert_eq!(p.xor_assertion(&XorConstraint::new(vec![], true)), "(assert false)");
        assert_eq!(p.xor_assertion(&XorConstraint::new(vec![], false)), "(assert true)");
        let cfg = SolverProcessConfig::new(["z3", "-in"]);
        let s = p.render(&cfg, &[XorConstraint::new(vec![2], true)]).unwrap();
        assert!(s.starts_with("(set-option :print-success false)"));
        assert!(s.trim_end().ends_with("(assert (= ((_ extract 1 1) y) #b1))"));
    }

    #[test]
    fn value_literals() {
        let v = parse_get_value("((y #b00000101))").unwrap();
        assert_eq!(v.width(), 8);
        assert_eq!(v.to_u64(), 5);
        assert_eq!(v.to_literal(), "#b00000101");
        let v = parse_get_value("((y #x0a))\n").unwrap();
        assert_eq!((v.width(), v.to_u64()), (8, 10));
        let v = parse_get_value("((y (_ bv300 12)))").unwrap();
        assert_eq!((v.width(), v.to_u64()), (12, 300));
        assert!(parse_get_value("((y (_ bv300 8)))").is_err());
        assert!(parse_get_value("((y 5))").is_err());
        assert!(parse_get_value("sat").is_err());
    }

    #[test]
    fn wide_decimal_values() {
        let v = parse_get_value("((y (_ bv18446744073709551617 65)))").unwrap();
        assert_eq!(v.width(), 65);
        assert!(v.0[0] && v.0[64]);
        assert_eq!(v.0.iter().filter(|&&b| b).count(), 2);
    }

    #[test]
    fn missing_solver_binary() {
        let p = SmtProblem::parse(AND_MASK, "y", 8).unwrap();
        let cfg = SolverProcessConfig::new(["/nonexistent/solver-binary"]);
        assert!(matches!(
            smt_exhaust_up_to_c(&p, &cfg, &[], 4),
            Err(SmtError::Spawn { .. })
        ));
    }
}
