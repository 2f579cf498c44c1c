//! Instance generation and small-scale oracles: seeded prime generation,
//! witnesses for generated formulas, blocking of known solutions, and
//! exhaustive search for tiny parameters.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{CnfError, CnfFormula, Formula, Lit};
use crate::reducer::Reduction;

pub const MILLER_RABIN_ROUNDS: usize = 64;
const TRIAL_DIVISION_LIMIT: usize = 16;
const FACTOR_GUARD_BITS: u64 = 40;
const ENUMERATION_GUARD_BITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NumgenError {
    #[error("bit length {0} is below the minimum of 2")]
    LengthTooSmall(usize),
    #[error("{p} * {q} is not the target {x}")]
    NotAFactorization { p: BigUint, q: BigUint, x: BigUint },
    #[error("witness violates constraint {0}")]
    Unsatisfied(usize),
    #[error("{what} needs at most {limit} bits, got {actual}")]
    GuardExceeded {
        what: &'static str,
        limit: u64,
        actual: u64,
    },
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error("witness line {line}: {message}")]
    WitnessFormat { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorInstance {
    pub l: usize,
    pub p: BigUint,
    pub q: BigUint,
    pub x: BigUint,
    pub seed: u64,
}

fn trial_division(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    (2..)
        .take_while(|d| d * d <= n)
        .all(|d| !n.is_multiple_of(d))
}

fn random_below(bound: &BigUint, rng: &mut impl RngCore) -> BigUint {
    let bytes = (bound.bits() as usize).div_ceil(8) + 8;
    let mut buf = vec![0u8; bytes];
    rng.fill_bytes(&mut buf);
    BigUint::from_bytes_le(&buf) % bound
}

/// Miller-Rabin with bases drawn from `rng`; exact for `n < 2^16`.
pub fn is_probable_prime(n: &BigUint, rng: &mut impl RngCore) -> bool {
    if let Some(small) = n.to_u64().filter(|&v| v < 1 << 16) {
        return trial_division(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().expect("n > 1");
    let d = &n_minus_1 >> s;
    let span = n - 3u32;
    'rounds: for _ in 0..MILLER_RABIN_ROUNDS {
        let a = random_below(&span, rng) + 2u32;
        let mut y = a.modpow(&d, n);
        if y == one || y == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            y = &y * &y % n;
            if y == n_minus_1 {
                continue 'rounds;
            }
        }
        return false;
    }
    true
}

/// An `l`-bit prime: the top bit is always set.
pub fn gen_prime(l: usize, rng: &mut impl RngCore) -> Result<BigUint, NumgenError> {
    if l < 2 {
        return Err(NumgenError::LengthTooSmall(l));
    }
    if l <= TRIAL_DIVISION_LIMIT {
        let (lo, hi) = (1u64 << (l - 1), 1u64 << l);
        loop {
            let c = rng.gen_range(lo..hi);
            if trial_division(c) {
                return Ok(BigUint::from(c));
            }
        }
    }
    let top = BigUint::one() << (l - 1);
    loop {
        let c = random_below(&top, rng) | &top | BigUint::one();
        if is_probable_prime(&c, rng) {
            return Ok(c);
        }
    }
}

pub fn make_instance(l: usize, seed: u64) -> Result<FactorInstance, NumgenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gen_prime(l, &mut rng)?;
    let b = gen_prime(l, &mut rng)?;
    let (p, q) = if a <= b { (a, b) } else { (b, a) };
    let x = &p * &q;
    Ok(FactorInstance { l, p, q, x, seed })
}

/// Full assignment (one bit per variable, variable 1 first) obtained by
/// simulating the reduction circuit on `(u, v)`.
pub fn propagate(reduction: &Reduction, u: &BigUint, v: &BigUint) -> Vec<bool> {
    let circuit = &reduction.circuit;
    let (_, trace) = circuit
        .eval(&reduction.input_bits(u, v))
        .expect("input width is 2l");
    let n = circuit.num_inputs;
    let mut assignment = trace[..n].to_vec();
    assignment.extend_from_slice(&trace[n + 2..]);
    assignment
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub x: BigUint,
    pub assignment: Vec<bool>,
}

impl Witness {
    const PER_LINE: usize = 16;

    pub fn to_text(&self) -> String {
        let mut out = format!("c witness x={:x}\n", self.x);
        let lits: Vec<i64> = self
            .assignment
            .iter()
            .enumerate()
            .map(|(i, &b)| if b { i as i64 + 1 } else { -(i as i64 + 1) })
            .collect();
        let chunks: Vec<&[i64]> = lits.chunks(Self::PER_LINE).collect();
        for (k, chunk) in chunks.iter().enumerate() {
            out.push('v');
            for l in chunk.iter() {
                let _ = write!(out, " {l}");
            }
            if k + 1 == chunks.len() {
                out.push_str(" 0");
            }
            out.push('\n');
        }
        if chunks.is_empty() {
            out.push_str("v 0\n");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, NumgenError> {
        let err = |line: usize, message: &str| NumgenError::WitnessFormat {
            line,
            message: message.to_string(),
        };
        let mut x = None;
        let mut values: Vec<Option<bool>> = Vec::new();
        let mut done = false;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix("c") {
                if let Some(hex) = rest.trim().strip_prefix("witness x=") {
                    let parsed = BigUint::parse_bytes(hex.trim().as_bytes(), 16)
                        .ok_or_else(|| err(n, "bad hex target"))?;
                    x = Some(parsed);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let rest = line
                .strip_prefix('v')
                .ok_or_else(|| err(n, "expected a `v` line"))?;
            for token in rest.split_whitespace() {
                if done {
                    return Err(err(n, "literal after terminating 0"));
                }
                let lit: i64 = token.parse().map_err(|_| err(n, "bad literal"))?;
                if lit == 0 {
                    done = true;
                    continue;
                }
                let var = lit.unsigned_abs() as usize;
                if var > values.len() {
                    values.resize(var, None);
                }
                if values[var - 1].replace(lit > 0).is_some() {
                    return Err(err(n, "variable assigned twice"));
                }
            }
        }
        if !done {
            return Err(err(0, "missing terminating 0"));
        }
        let x = x.ok_or_else(|| err(0, "missing `c witness x=` line"))?;
        let assignment = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| err(0, &format!("variable {} unassigned", i + 1))))
            .collect::<Result<_, _>>()?;
        Ok(Witness { x, assignment })
    }
}

fn check_factorization(reduction: &Reduction, p: &BigUint, q: &BigUint) -> Result<(), NumgenError> {
    if p * q != reduction.x || p.bits() > reduction.l as u64 || q.bits() > reduction.l as u64 {
        return Err(NumgenError::NotAFactorization {
            p: p.clone(),
            q: q.clone(),
            x: reduction.x.clone(),
        });
    }
    Ok(())
}

/// Witness for `formula` (built from `reduction`) with inputs `(p, q)`.
/// The result is checked against the formula before it is returned.
pub fn extract_witness(
    reduction: &Reduction,
    formula: &impl Formula,
    p: &BigUint,
    q: &BigUint,
) -> Result<Witness, NumgenError> {
    check_factorization(reduction, p, q)?;
    let assignment = propagate(reduction, p, q);
    if let Some(i) = formula.first_violation(&assignment)? {
        return Err(NumgenError::Unsatisfied(i));
    }
    Ok(Witness {
        x: reduction.x.clone(),
        assignment,
    })
}

fn blocking_clause(reduction: &Reduction, u: &BigUint, v: &BigUint) -> Vec<Lit> {
    reduction
        .input_bits(u, v)
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let var = i as u32 + 1;
            if b {
                Lit::neg(var)
            } else {
                Lit::pos(var)
            }
        })
        .collect()
}

/// Appends clauses forbidding the input patterns `(p, q)` and `(q, p)`.
pub fn negate_solutions(
    formula: &CnfFormula,
    reduction: &Reduction,
    p: &BigUint,
    q: &BigUint,
) -> Result<CnfFormula, NumgenError> {
    check_factorization(reduction, p, q)?;
    let mut out = formula.clone();
    out.clauses.push(blocking_clause(reduction, p, q));
    if p != q {
        out.clauses.push(blocking_clause(reduction, q, p));
    }
    Ok(out)
}

/// Smallest nontrivial factorization `(p, q)` with `p <= q`, if any.
pub fn brute_force_factor(x: &BigUint) -> Result<Option<(BigUint, BigUint)>, NumgenError> {
    if x.bits() > FACTOR_GUARD_BITS {
        return Err(NumgenError::GuardExceeded {
            what: "brute-force factoring",
            limit: FACTOR_GUARD_BITS,
            actual: x.bits(),
        });
    }
    let x = x.to_u64().expect("guarded");
    Ok((2..)
        .take_while(|d| d * d <= x)
        .find(|&d| x.is_multiple_of(d))
        .map(|d| (BigUint::from(d), BigUint::from(x / d))))
}

/// All factorizations `x = p * q` with `p <= q < 2^l`.
pub fn factor_pairs_within(x: &BigUint, l: usize) -> Result<Vec<(BigUint, BigUint)>, NumgenError> {
    if x.bits() > FACTOR_GUARD_BITS {
        return Err(NumgenError::GuardExceeded {
            what: "brute-force factoring",
            limit: FACTOR_GUARD_BITS,
            actual: x.bits(),
        });
    }
    let x = x.to_u64().expect("guarded");
    let limit = 1u64 << l.min(63);
    Ok((1..)
        .take_while(|d| d * d <= x)
        .filter(|&d| x.is_multiple_of(d) && x / d < limit)
        .map(|d| (BigUint::from(d), BigUint::from(x / d)))
        .collect())
}

/// Every `(u, v)` the reduction circuit accepts, in increasing `(u, v)` order.
pub fn brute_force_sat_inputs(reduction: &Reduction) -> Result<Vec<(u64, u64)>, NumgenError> {
    let width = 2 * reduction.l;
    if width > ENUMERATION_GUARD_BITS {
        return Err(NumgenError::GuardExceeded {
            what: "input enumeration",
            limit: ENUMERATION_GUARD_BITS as u64,
            actual: width as u64,
        });
    }
    let l = reduction.l;
    let mut accepted = Vec::new();
    let mut bits = vec![false; width];
    for u in 0..1u64 << l {
        for v in 0..1u64 << l {
            for (j, b) in bits.iter_mut().enumerate() {
                let word = if j < l { u >> j } else { v >> (j - l) };
                *b = word & 1 == 1;
            }
            let (out, _) = reduction.circuit.eval(&bits).expect("width 2l");
            if out[0] {
                accepted.push((u, v));
            }
        }
    }
    Ok(accepted)
}

/// Whether `formula` is satisfiable, assuming every non-input variable is
/// determined by the inputs through `reduction`'s circuit. Enumerates all
/// input patterns.
pub fn satisfiable_by_propagation(
    formula: &CnfFormula,
    reduction: &Reduction,
) -> Result<bool, NumgenError> {
    let l = reduction.l;
    if 2 * l > ENUMERATION_GUARD_BITS {
        return Err(NumgenError::GuardExceeded {
            what: "input enumeration",
            limit: ENUMERATION_GUARD_BITS as u64,
            actual: 2 * l as u64,
        });
    }
    for u in 0..1u64 << l {
        for v in 0..1u64 << l {
            let a = propagate(reduction, &BigUint::from(u), &BigUint::from(v));
            if formula.eval(&a)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{to_4cnf, tseitin_extended};
    use crate::reducer::build_naive_test_circuit;

    #[test]
    fn small_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = gen_prime(2, &mut rng).unwrap();
            assert!(p == BigUint::from(2u32) || p == BigUint::from(3u32));
        }
        assert_eq!(gen_prime(1, &mut rng), Err(NumgenError::LengthTooSmall(1)));
    }

    #[test]
    fn miller_rabin_agrees_with_known_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m61 = (BigUint::one() << 61) - 1u32;
        assert!(is_probable_prime(&m61, &mut rng));
        assert!(!is_probable_prime(&(m61.clone() * 3u32), &mut rng));
        // Carmichael number above the trial-division range.
        assert!(!is_probable_prime(&BigUint::from(75361u32), &mut rng));
        assert!(is_probable_prime(&BigUint::from(65537u32), &mut rng));
    }

    #[test]
    fn witness_text_round_trip() {
        let w = Witness {
            x: BigUint::from(77u32),
            assignment: (0..37).map(|i| i % 3 == 0).collect(),
        };
        let text = w.to_text();
        assert!(text.starts_with("c witness x=4d\nv 1 -2 -3 4"));
        assert!(text.ends_with(" 0\n"));
        assert_eq!(Witness::from_text(&text).unwrap(), w);
        assert!(Witness::from_text("c witness x=4d\nv 1 -2\n").is_err());
    }

    #[test]
    fn witness_rejects_wrong_factors() {
        let r = build_naive_test_circuit(&BigUint::from(77u32), 4).unwrap();
        let cnf = to_4cnf(&tseitin_extended(&r.circuit).unwrap());
        let five = BigUint::from(5u32);
        assert!(matches!(
            extract_witness(&r, &cnf, &five, &five),
            Err(NumgenError::NotAFactorization { .. })
        ));
    }
}
