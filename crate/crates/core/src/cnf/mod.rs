//! Circuit-to-formula encoding.
//!
//! [`tseitin_extended`] introduces one variable per gate: inputs take
//! variables `1..=n` in circuit input order and gate `k` takes `n + 1 + k`.
//! Each gate becomes one constraint on at most four variables, and the
//! output variable is asserted true. [`to_4cnf`] expands every constraint
//! into clauses over the same variables.

mod dimacs;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::circuit::{tt, Circuit};

pub use dimacs::{read_dimacs, read_extended, write_dimacs, write_extended, FormatError, Metadata};

/// A DIMACS literal: positive for a variable, negative for its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn new(dimacs: i32) -> Self {
        assert!(dimacs != 0, "literal 0 is reserved");
        Lit(dimacs)
    }

    pub fn pos(var: u32) -> Self {
        Lit::new(var as i32)
    }

    pub fn neg(var: u32) -> Self {
        Lit::new(-(var as i32))
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Truth value under a 0-indexed assignment (`assignment[var - 1]`).
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var() as usize - 1] == self.is_positive()
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("circuit has {0} outputs; exactly one is required")]
    OutputCount(usize),
    #[error("circuit output is a constant wire")]
    ConstantOutput,
    #[error("assignment covers {actual} variables, formula has {expected}")]
    AssignmentLength { expected: usize, actual: usize },
}

/// `var <-> table(inputs)`, where bit `r` of `table` is the value for the
/// input row whose bit `j` is the value of `inputs[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub var: u32,
    pub table: u8,
    pub inputs: Vec<Lit>,
}

impl Constraint {
    pub fn holds(&self, assignment: &[bool]) -> bool {
        let row = self.inputs.iter().enumerate().fold(0usize, |acc, (j, l)| {
            acc | (l.eval(assignment) as usize) << j
        });
        tt::lookup(self.table, row) == assignment[self.var as usize - 1]
    }
}

/// Formula in extended conjunctive form: gate constraints plus one
/// asserted output literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedFormula {
    pub num_vars: u32,
    pub constraints: Vec<Constraint>,
    pub output: Lit,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
}

/// Common evaluation surface of both formula kinds.
pub trait Formula {
    fn num_vars(&self) -> u32;

    /// Index of the first unsatisfied clause or constraint, if any.
    fn violation(&self, assignment: &[bool]) -> Option<usize>;

    fn first_violation(&self, assignment: &[bool]) -> Result<Option<usize>, CnfError> {
        if assignment.len() != self.num_vars() as usize {
            return Err(CnfError::AssignmentLength {
                expected: self.num_vars() as usize,
                actual: assignment.len(),
            });
        }
        Ok(self.violation(assignment))
    }

    fn eval(&self, assignment: &[bool]) -> Result<bool, CnfError> {
        self.first_violation(assignment).map(|v| v.is_none())
    }
}

impl Formula for CnfFormula {
    fn num_vars(&self) -> u32 {
        self.num_vars
    }

    fn violation(&self, assignment: &[bool]) -> Option<usize> {
        self.clauses
            .iter()
            .position(|c| !c.iter().any(|l| l.eval(assignment)))
    }
}

impl Formula for ExtendedFormula {
    fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Constraint indices first, then `constraints.len()` for the output
    /// assertion.
    fn violation(&self, assignment: &[bool]) -> Option<usize> {
        self.constraints
            .iter()
            .position(|c| !c.holds(assignment))
            .or_else(|| (!self.output.eval(assignment)).then_some(self.constraints.len()))
    }
}

pub fn tseitin_extended(circuit: &Circuit) -> Result<ExtendedFormula, CnfError> {
    if circuit.outputs.len() != 1 {
        return Err(CnfError::OutputCount(circuit.outputs.len()));
    }
    let n = circuit.num_inputs;
    let var_of = |w: crate::circuit::Wire| -> Option<u32> {
        if circuit.is_constant(w) {
            None
        } else if w.index() < n {
            Some(w.0 + 1)
        } else {
            Some(w.0 - 1)
        }
    };
    let output = var_of(circuit.outputs[0]).ok_or(CnfError::ConstantOutput)?;

    let constraints = circuit
        .gates
        .iter()
        .enumerate()
        .map(|(k, gate)| {
            // Constant inputs are substituted into the table.
            let mut inputs = Vec::with_capacity(3);
            let mut sources = Vec::with_capacity(3);
            for &w in gate.inputs() {
                match var_of(w) {
                    Some(v) => {
                        sources.push(Err(inputs.len()));
                        inputs.push(Lit::pos(v));
                    }
                    None => sources.push(Ok(w == circuit.true_wire())),
                }
            }
            let table = tt::from_fn(inputs.len(), |bits| {
                let row = sources.iter().enumerate().fold(0usize, |acc, (j, s)| {
                    let bit = match *s {
                        Ok(c) => c,
                        Err(i) => bits[i],
                    };
                    acc | (bit as usize) << j
                });
                tt::lookup(gate.table, row)
            });
            Constraint {
                var: (n + 1 + k) as u32,
                table,
                inputs,
            }
        })
        .collect();

    Ok(ExtendedFormula {
        num_vars: (n + circuit.gates.len()) as u32,
        constraints,
        output: Lit::pos(output),
    })
}

/// A conjunction of fixed variable values: bit `i` of `mask` marks variable
/// `i` as fixed to bit `i` of `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Cube {
    mask: u8,
    value: u8,
}

impl Cube {
    fn covers(self, minterm: u8) -> bool {
        minterm & self.mask == self.value
    }
}

/// Prime implicants of a set of minterms over `nvars` variables, merging
/// cubes that differ in one fixed variable until no merge applies.
fn prime_implicants(minterms: &[u8], nvars: usize) -> Vec<Cube> {
    let full = ((1u16 << nvars) - 1) as u8;
    let mut current: Vec<Cube> = minterms
        .iter()
        .map(|&m| Cube {
            mask: full,
            value: m,
        })
        .collect();
    let mut primes = Vec::new();
    while !current.is_empty() {
        let mut merged = vec![false; current.len()];
        let mut next = Vec::new();
        for i in 0..current.len() {
            for j in i + 1..current.len() {
                let (a, b) = (current[i], current[j]);
                let diff = a.value ^ b.value;
                if a.mask == b.mask && diff.count_ones() == 1 {
                    merged[i] = true;
                    merged[j] = true;
                    next.push(Cube {
                        mask: a.mask & !diff,
                        value: a.value & !diff,
                    });
                }
            }
        }
        primes.extend(
            current
                .iter()
                .zip(&merged)
                .filter(|(_, &m)| !m)
                .map(|(c, _)| *c),
        );
        next.sort();
        next.dedup();
        current = next;
    }
    primes.sort_by_key(|c| (c.mask.count_ones(), c.mask, c.value));
    primes
}

/// A cover of the minterms by prime implicants: essential primes first, then
/// greedily by the number of newly covered minterms.
fn cover(minterms: &[u8], nvars: usize) -> Vec<Cube> {
    let primes = prime_implicants(minterms, nvars);
    let mut chosen: Vec<Cube> = Vec::new();
    let mut uncovered: Vec<u8> = minterms.to_vec();
    for &m in minterms {
        let covering: Vec<&Cube> = primes.iter().filter(|p| p.covers(m)).collect();
        if covering.len() == 1 && !chosen.contains(covering[0]) {
            chosen.push(*covering[0]);
        }
    }
    uncovered.retain(|&m| !chosen.iter().any(|c| c.covers(m)));
    while !uncovered.is_empty() {
        let best = *primes
            .iter()
            .max_by_key(|p| {
                (
                    uncovered.iter().filter(|&&m| p.covers(m)).count(),
                    std::cmp::Reverse((p.mask.count_ones(), p.mask, p.value)),
                )
            })
            .expect("every minterm has a prime implicant");
        chosen.push(best);
        uncovered.retain(|&m| !best.covers(m));
    }
    chosen.sort_by_key(|c| (c.mask.count_ones(), c.mask, c.value));
    chosen
}

/// Clauses (as cubes to rule out) for `g <-> table(x_0..x_{k-1})`. Variable
/// `k` of each cube is `g`.
fn gate_cubes(arity: usize, table: u8) -> Vec<Cube> {
    let minterms: Vec<u8> = (0..(1u8 << arity))
        .map(|row| {
            let out = tt::lookup(table, row as usize);
            row | ((!out as u8) << arity)
        })
        .collect();
    cover(&minterms, arity + 1)
}

/// Number of rows of `g <-> table(inputs)` that falsify the constraint;
/// one per input row.
pub fn falsifying_rows(arity: usize) -> usize {
    1 << arity
}

pub fn to_4cnf(formula: &ExtendedFormula) -> CnfFormula {
    let mut cache: HashMap<(usize, u8), Vec<Cube>> = HashMap::new();
    let mut clauses = Vec::new();
    for c in &formula.constraints {
        let arity = c.inputs.len();
        let cubes = cache
            .entry((arity, c.table))
            .or_insert_with(|| gate_cubes(arity, c.table));
        let vars: Vec<Lit> = c.inputs.iter().copied().chain([Lit::pos(c.var)]).collect();
        for cube in cubes.iter() {
            let mut clause: Vec<Lit> = Vec::with_capacity(4);
            for (i, &lit) in vars.iter().enumerate() {
                if cube.mask >> i & 1 == 1 {
                    let fixed_true = cube.value >> i & 1 == 1;
                    clause.push(if fixed_true { !lit } else { lit });
                }
            }
            clause.dedup();
            let tautology = clause.iter().any(|&l| clause.contains(&!l));
            if !tautology {
                clauses.push(clause);
            }
        }
    }
    clauses.push(vec![formula.output]);
    CnfFormula {
        num_vars: formula.num_vars,
        clauses,
    }
}
