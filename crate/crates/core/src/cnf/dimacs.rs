use std::fmt::Write as _;

use thiserror::Error;

use super::{CnfFormula, Constraint, ExtendedFormula, Lit};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing problem line")]
    MissingHeader,
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

/// Ordered `key=value` pairs carried in `c` comment lines ahead of the
/// problem line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metadata(pub Vec<(String, String)>);

impl Metadata {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.0.push((key.into(), value.into()));
    }

    fn write(&self, out: &mut String) {
        for (k, v) in &self.0 {
            let _ = writeln!(out, "c {k}={v}");
        }
    }
}

fn write_lits(out: &mut String, lits: impl IntoIterator<Item = Lit>) {
    for l in lits {
        let _ = write!(out, "{l} ");
    }
}

pub fn write_dimacs(formula: &CnfFormula, meta: &Metadata) -> String {
    let mut out = String::new();
    meta.write(&mut out);
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars, formula.clauses.len());
    for clause in &formula.clauses {
        write_lits(&mut out, clause.iter().copied());
        out.push_str("0\n");
    }
    out
}

/// Extended format: `p ext V C`, then one `g <var> t <hex> i <lits>` line
/// per constraint and a final `a <lit>` output assertion. `C` counts the
/// constraints plus the assertion.
pub fn write_extended(formula: &ExtendedFormula, meta: &Metadata) -> String {
    let mut out = String::new();
    meta.write(&mut out);
    let _ = writeln!(
        out,
        "p ext {} {}",
        formula.num_vars,
        formula.constraints.len() + 1
    );
    for c in &formula.constraints {
        let _ = write!(out, "g {} t {:02x} i", c.var, c.table);
        for l in &c.inputs {
            let _ = write!(out, " {l}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "a {}", formula.output);
    out
}

type NumberedLines<'a> = Vec<(usize, &'a str)>;

struct Header {
    meta: Metadata,
    num_vars: u32,
    count: usize,
}

/// Reads comments and the problem line; returns the header and the
/// remaining numbered lines.
fn read_header<'a>(text: &'a str, kind: &str) -> Result<(Header, NumberedLines<'a>), FormatError> {
    let mut meta = Metadata::default();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    for (n, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push(k.trim(), v.trim());
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "p" || fields[1] != kind {
            return Err(syntax(n, format!("expected `p {kind} <vars> <count>`")));
        }
        let num_vars = fields[2]
            .parse()
            .map_err(|_| syntax(n, "bad variable count"))?;
        let count = fields[3].parse().map_err(|_| syntax(n, "bad count"))?;
        let header = Header {
            meta,
            num_vars,
            count,
        };
        let body = lines
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('c'))
            .collect();
        return Ok((header, body));
    }
    Err(FormatError::MissingHeader)
}

fn parse_lit(n: usize, token: &str, num_vars: u32) -> Result<Lit, FormatError> {
    let v: i32 = token
        .parse()
        .map_err(|_| syntax(n, format!("bad literal `{token}`")))?;
    if v == 0 || v.unsigned_abs() > num_vars {
        return Err(syntax(n, format!("literal {v} out of range")));
    }
    Ok(Lit::new(v))
}

pub fn read_dimacs(text: &str) -> Result<(CnfFormula, Metadata), FormatError> {
    let (header, body) = read_header(text, "cnf")?;
    let mut clauses = Vec::with_capacity(header.count);
    let mut current = Vec::new();
    let mut last_line = 0;
    for (n, line) in body {
        last_line = n;
        for token in line.split_whitespace() {
            if token == "0" {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(parse_lit(n, token, header.num_vars)?);
            }
        }
    }
    if !current.is_empty() {
        return Err(syntax(last_line, "unterminated clause"));
    }
    if clauses.len() != header.count {
        return Err(FormatError::ClauseCount {
            declared: header.count,
            found: clauses.len(),
        });
    }
    let formula = CnfFormula {
        num_vars: header.num_vars,
        clauses,
    };
    Ok((formula, header.meta))
}

pub fn read_extended(text: &str) -> Result<(ExtendedFormula, Metadata), FormatError> {
    let (header, body) = read_header(text, "ext")?;
    let nv = header.num_vars;
    let mut constraints = Vec::new();
    let mut output = None;
    for (n, line) in body {
        if output.is_some() {
            return Err(syntax(n, "content after output assertion"));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["a", lit] => output = Some(parse_lit(n, lit, nv)?),
            ["g", var, "t", table, "i", inputs @ ..] => {
                if inputs.len() > 3 {
                    return Err(syntax(n, "more than three inputs"));
                }
                let var = parse_lit(n, var, nv)?;
                if !var.is_positive() {
                    return Err(syntax(n, "gate variable must be positive"));
                }
                let table = u8::from_str_radix(table, 16)
                    .map_err(|_| syntax(n, format!("bad truth table `{table}`")))?;
                if inputs.len() < 3 && table >> (1 << inputs.len()) != 0 {
                    return Err(syntax(n, "truth table wider than its arity"));
                }
                let inputs = inputs
                    .iter()
                    .map(|t| parse_lit(n, t, nv))
                    .collect::<Result<_, _>>()?;
                constraints.push(Constraint {
                    var: var.var(),
                    table,
                    inputs,
                });
            }
            _ => return Err(syntax(n, "expected a `g` or `a` line")),
        }
    }
    let output = output.ok_or_else(|| syntax(0, "missing output assertion"))?;
    if constraints.len() + 1 != header.count {
        return Err(FormatError::ClauseCount {
            declared: header.count,
            found: constraints.len() + 1,
        });
    }
    let formula = ExtendedFormula {
        num_vars: nv,
        constraints,
        output,
    };
    Ok((formula, header.meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_round_trip_is_byte_exact() {
        let f = CnfFormula {
            num_vars: 3,
            clauses: vec![vec![Lit::pos(1), Lit::neg(2)], vec![], vec![Lit::pos(3)]],
        };
        let mut meta = Metadata::default();
        meta.push("l", "2");
        meta.push("mode", "crt");
        let text = write_dimacs(&f, &meta);
        assert_eq!(text, "c l=2\nc mode=crt\np cnf 3 3\n1 -2 0\n0\n3 0\n");
        let (g, m) = read_dimacs(&text).unwrap();
        assert_eq!((&g, &m), (&f, &meta));
        assert_eq!(write_dimacs(&g, &m), text);
    }

    #[test]
    fn extended_round_trip() {
        let f = ExtendedFormula {
            num_vars: 4,
            constraints: vec![
                Constraint {
                    var: 3,
                    table: 0x8,
                    inputs: vec![Lit::pos(1), Lit::pos(2)],
                },
                Constraint {
                    var: 4,
                    table: 0x1,
                    inputs: vec![],
                },
            ],
            output: Lit::pos(3),
        };
        let text = write_extended(&f, &Metadata::default());
        assert_eq!(text, "p ext 4 3\ng 3 t 08 i 1 2\ng 4 t 01 i\na 3\n");
        let (g, _) = read_extended(&text).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn reports_line_numbers() {
        let err = read_dimacs("c x=1\np cnf 2 1\n1 5 0\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 3, .. }));
        assert_eq!(read_dimacs("c only\n"), Err(FormatError::MissingHeader));
        assert!(matches!(
            read_dimacs("p cnf 2 2\n1 0\n"),
            Err(FormatError::ClauseCount {
                declared: 2,
                found: 1
            })
        ));
        assert!(matches!(
            read_dimacs("p cnf 2 1\n1 2\n"),
            Err(FormatError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            read_extended("p ext 3 2\ng 3 t 1ff i 1 2\na 3\n"),
            Err(FormatError::Syntax { line: 2, .. })
        ));
    }
}
