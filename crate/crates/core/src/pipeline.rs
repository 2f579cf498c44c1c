//! End-to-end instance generation: target, plan, circuit, formula text and
//! optional witness.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use thiserror::Error;

use crate::cnf::{self, Formula, Metadata};
use crate::crt::{self, CrtPlan, PlanError};
use crate::numgen::{self, NumgenError, Witness};
use crate::reducer::{self, ReduceError, Reduction};
use crate::GENERATOR_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Crt,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Dimacs,
    Extended,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Crt => "crt",
            Mode::Naive => "naive",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "crt" => Ok(Mode::Crt),
            "naive" => Ok(Mode::Naive),
            _ => Err(format!("unknown mode `{s}` (expected crt or naive)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerateConfig {
    pub l: usize,
    pub mode: Mode,
    pub seed: u64,
    pub format: OutputFormat,
    pub negate: bool,
    pub witness: bool,
    pub x_override: Option<BigUint>,
    pub plan_override: Option<CrtPlan>,
}

impl GenerateConfig {
    pub fn new(l: usize, mode: Mode, seed: u64) -> Self {
        GenerateConfig {
            l,
            mode,
            seed,
            format: OutputFormat::Dimacs,
            negate: false,
            witness: false,
            x_override: None,
            plan_override: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Numgen(#[from] NumgenError),
    #[error(transparent)]
    Cnf(#[from] cnf::CnfError),
    #[error("plan is for l={plan}, but l={requested} was requested")]
    PlanLength { plan: usize, requested: usize },
    #[error("negated instances are only written in DIMACS format")]
    NegateNeedsDimacs,
    #[error("negation and witness output are mutually exclusive")]
    NegateWithWitness,
    #[error("x={0:x} has no factorization into two l-bit numbers")]
    NoFactorization(BigUint),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    pub l: usize,
    pub mode: Mode,
    pub variables: u32,
    pub clauses: usize,
    pub g3: usize,
    pub g2: usize,
    pub plan: Option<CrtPlan>,
    pub estimated_variables: u64,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "l={} mode={} variables={} clauses={} gates=[{}]+{} estimate={}",
            self.l,
            self.mode,
            self.variables,
            self.clauses,
            self.g3,
            self.g2,
            self.estimated_variables
        )?;
        if let Some(p) = &self.plan {
            write!(f, " plan=\"{p}\"")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub text: String,
    pub witness: Option<Witness>,
    pub summary: Summary,
    pub reduction: Reduction,
}

/// Factor pairs the circuit accepts: the generated pair, or every pair of
/// `l`-bit operands found by trial division for an overridden target.
fn factor_pairs(
    x: &BigUint,
    l: usize,
    known: Option<(BigUint, BigUint)>,
) -> Result<Vec<(BigUint, BigUint)>, PipelineError> {
    match known {
        Some(pair) => Ok(vec![pair]),
        None => Ok(numgen::factor_pairs_within(x, l)?),
    }
}

pub fn build_reduction(config: &GenerateConfig, x: &BigUint) -> Result<Reduction, PipelineError> {
    Ok(match config.mode {
        Mode::Crt => {
            let plan = match &config.plan_override {
                Some(p) if p.l != config.l => {
                    return Err(PipelineError::PlanLength {
                        plan: p.l,
                        requested: config.l,
                    })
                }
                Some(p) => p.clone(),
                None => crt::preset_or_plan(config.l)?,
            };
            reducer::build_crt_test_circuit(x, &plan)?
        }
        Mode::Naive => reducer::build_naive_test_circuit(x, config.l)?,
    })
}

pub fn generate(config: &GenerateConfig) -> Result<Generated, PipelineError> {
    if config.negate && config.format != OutputFormat::Dimacs {
        return Err(PipelineError::NegateNeedsDimacs);
    }
    if config.negate && config.witness {
        return Err(PipelineError::NegateWithWitness);
    }
    let (x, known) = match &config.x_override {
        Some(x) => (x.clone(), None),
        None => {
            let inst = numgen::make_instance(config.l, config.seed)?;
            (inst.x, Some((inst.p, inst.q)))
        }
    };
    let reduction = build_reduction(config, &x)?;
    let ext = cnf::tseitin_extended(&reduction.circuit)?;

    let mut meta = Metadata::default();
    meta.push("l", config.l.to_string());
    meta.push("x-hex", format!("{x:x}"));
    meta.push("mode", config.mode.to_string());
    meta.push("seed", config.seed.to_string());
    meta.push("generator-version", GENERATOR_VERSION);

    let need_factors = config.negate || config.witness;
    let factors = if need_factors {
        factor_pairs(&x, config.l, known)?
    } else {
        Vec::new()
    };
    let first_pair = || {
        factors
            .first()
            .cloned()
            .ok_or_else(|| PipelineError::NoFactorization(x.clone()))
    };

    let (text, clauses, witness) = match config.format {
        OutputFormat::Dimacs => {
            let mut formula = cnf::to_4cnf(&ext);
            let mut witness = None;
            if config.negate {
                for (p, q) in &factors {
                    formula = numgen::negate_solutions(&formula, &reduction, p, q)?;
                }
            } else if config.witness {
                let (p, q) = first_pair()?;
                witness = Some(numgen::extract_witness(&reduction, &formula, &p, &q)?);
            }
            (
                cnf::write_dimacs(&formula, &meta),
                formula.clauses.len(),
                witness,
            )
        }
        OutputFormat::Extended => {
            let witness = if config.witness {
                let (p, q) = first_pair()?;
                Some(numgen::extract_witness(&reduction, &ext, &p, &q)?)
            } else {
                None
            };
            let clauses = ext.constraints.len() + 1;
            (cnf::write_extended(&ext, &meta), clauses, witness)
        }
    };

    let size = reduction.size();
    let estimated_variables = match reduction.plan() {
        Some(p) => reducer::estimate_crt_size(p).variables,
        None => reducer::estimate_naive_size(config.l).variables,
    };
    let summary = Summary {
        l: config.l,
        mode: config.mode,
        variables: ext.num_vars(),
        clauses,
        g3: size.g3,
        g2: size.g2,
        plan: reduction.plan().cloned(),
        estimated_variables,
    };
    Ok(Generated {
        text,
        witness,
        summary,
        reduction,
    })
}

/// Outcome of checking a witness against a formula file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    /// Index and text of the first violated clause or constraint.
    Violated(usize, String),
    /// Witness and formula disagree on the number of variables.
    LengthMismatch {
        formula: usize,
        witness: usize,
    },
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("formula: {0}")]
    Formula(#[from] cnf::FormatError),
    #[error(transparent)]
    Witness(#[from] NumgenError),
}

/// Checks `witness_text` against a DIMACS or extended formula, detected from
/// its problem line.
pub fn verify(formula_text: &str, witness_text: &str) -> Result<Verdict, VerifyError> {
    let witness = Witness::from_text(witness_text)?;
    let a = &witness.assignment;
    let is_ext = formula_text
        .lines()
        .map(str::trim)
        .find(|l| l.starts_with('p'))
        .is_some_and(|l| l.split_whitespace().nth(1) == Some("ext"));
    let check = |num_vars: u32, violation: &dyn Fn() -> Option<(usize, String)>| {
        if num_vars as usize != a.len() {
            Verdict::LengthMismatch {
                formula: num_vars as usize,
                witness: a.len(),
            }
        } else {
            match violation() {
                None => Verdict::Satisfied,
                Some((i, s)) => Verdict::Violated(i, s),
            }
        }
    };
    Ok(if is_ext {
        let (f, _) = cnf::read_extended(formula_text)?;
        check(f.num_vars, &|| {
            f.violation(a).map(|i| {
                let text = match f.constraints.get(i) {
                    Some(c) => {
                        let inputs: Vec<String> = c.inputs.iter().map(|l| l.to_string()).collect();
                        format!("g {} t {:02x} i {}", c.var, c.table, inputs.join(" "))
                    }
                    None => format!("a {}", f.output),
                };
                (i, text)
            })
        })
    } else {
        let (f, _) = cnf::read_dimacs(formula_text)?;
        check(f.num_vars, &|| {
            f.violation(a).map(|i| {
                let lits: Vec<String> = f.clauses[i].iter().map(|l| l.to_string()).collect();
                (i, format!("{} 0", lits.join(" ")))
            })
        })
    })
}
