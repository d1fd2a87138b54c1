//! CNF formulas with a projection scope, and the DIMACS reader.
//!
//! Literals use the DIMACS convention: a nonzero `i32` whose absolute value
//! is the 1-based variable identifier. The projection lists the variables
//! over which distinct solutions are counted; `c ind v1 v2 ... 0` comment
//! lines declare it, and it defaults to every variable.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read;

use thiserror::Error;

pub type Lit = i32;
pub type Var = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("number of variables must be positive")]
    NoVariables,
    #[error("literal {lit} out of range (num_vars = {num_vars})")]
    LiteralOutOfRange { lit: i64, num_vars: u32 },
    #[error("empty clause at index {0}")]
    EmptyClause(usize),
    #[error("projection must be nonempty")]
    EmptyProjection,
    #[error("projection variable {var} out of range (num_vars = {num_vars})")]
    ProjectionOutOfRange { var: i64, num_vars: u32 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("duplicate `p cnf` header")]
    DuplicateHeader,
    #[error("invalid token `{0}`")]
    InvalidToken(String),
    #[error("literal out of range: {lit} (num_vars = {num_vars})")]
    LiteralOutOfRange { lit: i64, num_vars: u32 },
    #[error("empty clause")]
    EmptyClause,
    #[error("clause count mismatch: header declares {declared}, found {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    UnterminatedClause,
    #[error("empty formula")]
    EmptyFormula,
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("read failure: {0}")]
    Io(String),
}

/// A clause database over `num_vars` variables plus the counted variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    projection: Vec<Var>,
}

impl CnfFormula {
    /// Builds a formula, checking every invariant. `projection = None` means
    /// all variables.
    pub fn new(
        num_vars: u32,
        clauses: Vec<Vec<Lit>>,
        projection: Option<Vec<Var>>,
    ) -> Result<Self, CnfError> {
        if num_vars == 0 {
            return Err(CnfError::NoVariables);
        }
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(CnfError::EmptyClause(i));
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() > num_vars {
                    return Err(CnfError::LiteralOutOfRange {
                        lit: lit as i64,
                        num_vars,
                    });
                }
            }
        }
        let projection = match projection {
            None => (1..=num_vars).collect(),
            Some(p) => {
                let set: BTreeSet<Var> = p.into_iter().collect();
                if set.is_empty() {
                    return Err(CnfError::EmptyProjection);
                }
                if let Some(&v) = set.iter().find(|&&v| v == 0 || v > num_vars) {
                    return Err(CnfError::ProjectionOutOfRange {
                        var: v as i64,
                        num_vars,
                    });
                }
                set.into_iter().collect()
            }
        };
        Ok(CnfFormula {
            num_vars,
            clauses,
            projection,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Counted variables, sorted ascending without duplicates.
    pub fn projection(&self) -> &[Var] {
        &self.projection
    }

    pub fn width(&self) -> usize {
        self.projection.len()
    }

    /// Whether a full assignment (`assignment[v - 1]` is the value of `v`)
    /// satisfies every clause.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[(l.unsigned_abs() - 1) as usize] == (l > 0))
        })
    }

    /// Serializes to DIMACS, including one `c ind` line for the projection.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        out.push_str("c ind");
        for v in &self.projection {
            let _ = write!(out, " {v}");
        }
        out.push_str(" 0\n");
        for clause in &self.clauses {
            for l in clause {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }
}

pub fn parse_dimacs_str(text: &str) -> Result<CnfFormula, ParseError> {
    let err = |line, kind| ParseError { line, kind };

    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut projection: Option<Vec<Var>> = None;
    // Projection literals are range-checked once the header is known.
    let mut pending_ind: Vec<(usize, i64)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('%') {
            // SATLIB end-of-data marker.
            break;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let mut toks = rest.split_whitespace();
            if rest.starts_with(char::is_whitespace) && toks.next() == Some("ind") {
                let proj = projection.get_or_insert_with(Vec::new);
                for tok in toks {
                    let v: i64 = tok
                        .parse()
                        .map_err(|_| err(lineno, ParseErrorKind::InvalidToken(tok.into())))?;
                    if v == 0 {
                        break;
                    }
                    if v < 0 {
                        return Err(err(
                            lineno,
                            ParseErrorKind::InvalidToken(tok.to_string()),
                        ));
                    }
                    pending_ind.push((lineno, v));
                    proj.push(v as Var);
                }
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, ParseErrorKind::DuplicateHeader));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                return Err(err(lineno, ParseErrorKind::MalformedHeader(line.into())));
            }
            let nv: u32 = toks[2]
                .parse()
                .map_err(|_| err(lineno, ParseErrorKind::MalformedHeader(line.into())))?;
            let nc: usize = toks[3]
                .parse()
                .map_err(|_| err(lineno, ParseErrorKind::MalformedHeader(line.into())))?;
            if nv == 0 {
                return Err(err(
                    lineno,
                    ParseErrorKind::MalformedHeader("variable count must be positive".into()),
                ));
            }
            header = Some((nv, nc));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(err(lineno, ParseErrorKind::MissingHeader));
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| err(lineno, ParseErrorKind::InvalidToken(tok.into())))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(err(lineno, ParseErrorKind::EmptyClause));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() > num_vars as u64 {
                    return Err(err(
                        lineno,
                        ParseErrorKind::LiteralOutOfRange { lit, num_vars },
                    ));
                }
                current.push(lit as Lit);
            }
        }
    }

    let Some((num_vars, declared)) = header else {
        let kind = if last_line == 0 {
            ParseErrorKind::EmptyFormula
        } else {
            ParseErrorKind::MissingHeader
        };
        return Err(err(last_line.max(1), kind));
    };
    if !current.is_empty() {
        return Err(err(last_line, ParseErrorKind::UnterminatedClause));
    }
    if clauses.len() != declared {
        return Err(err(
            last_line,
            ParseErrorKind::ClauseCountMismatch {
                declared,
                found: clauses.len(),
            },
        ));
    }
    for (line, v) in pending_ind {
        if v as u64 > num_vars as u64 {
            return Err(err(
                line,
                ParseErrorKind::LiteralOutOfRange { lit: v, num_vars },
            ));
        }
    }
    // An `ind` line with no variables leaves the default projection.
    let projection = projection.filter(|p| !p.is_empty());
    CnfFormula::new(num_vars, clauses, projection).map_err(|e| {
        err(
            last_line,
            ParseErrorKind::MalformedHeader(e.to_string()),
        )
    })
}

/// Reads DIMACS CNF from a byte stream.
pub fn parse_dimacs<R: Read>(mut input: R) -> Result<CnfFormula, ParseError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| ParseError {
        line: 0,
        kind: ParseErrorKind::Io(e.to_string()),
    })?;
    let text = String::from_utf8(bytes).map_err(|_| ParseError {
        line: 0,
        kind: ParseErrorKind::InvalidUtf8,
    })?;
    parse_dimacs_str(&text)
}
