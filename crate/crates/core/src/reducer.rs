//! Test circuits accepting exactly the pairs `(u, v)` of `l`-bit numbers
//! with `u * v = x`: the residue-based construction and the schoolbook
//! baseline, plus closed-form size estimates for both.
//!
//! Inputs are the `l` bits of `u` followed by the `l` bits of `v`, least
//! significant first. The single output is the acceptance bit.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::blocks::{self, BlockError};
use crate::circuit::{Circuit, CircuitBuilder, Signal, SizeReport};
use crate::crt::{self, CrtPlan, PlanViolation};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("invalid plan: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidPlan(Vec<PlanViolation>),
    #[error("x has {bits} bits; expected {min}..={max} for l={l}")]
    TargetOutOfRange {
        bits: u64,
        min: u64,
        max: u64,
        l: usize,
    },
    #[error("bit length must be at least 1")]
    ZeroLength,
    #[error(transparent)]
    Block(#[from] BlockError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionKind {
    Crt(CrtPlan),
    Naive,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub l: usize,
    pub x: BigUint,
    pub kind: ReductionKind,
    pub circuit: Circuit,
    /// Extra comparator gates spent on zero-class aliases.
    pub zero_alias_surcharge: usize,
}

impl Reduction {
    pub fn size(&self) -> SizeReport {
        self.circuit.size()
    }

    pub fn plan(&self) -> Option<&CrtPlan> {
        match &self.kind {
            ReductionKind::Crt(p) => Some(p),
            ReductionKind::Naive => None,
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self.kind {
            ReductionKind::Crt(_) => "crt",
            ReductionKind::Naive => "naive",
        }
    }

    /// Circuit input bits for the pair `(u, v)`.
    pub fn input_bits(&self, u: &BigUint, v: &BigUint) -> Vec<bool> {
        let l = self.l as u64;
        (0..l)
            .map(|j| u.bit(j))
            .chain((0..l).map(|j| v.bit(j)))
            .collect()
    }

    pub fn accepts(&self, u: &BigUint, v: &BigUint) -> bool {
        let (out, _) = self
            .circuit
            .eval(&self.input_bits(u, v))
            .expect("input width is 2l");
        out[0]
    }
}

fn check_product_range(x: &BigUint, l: usize) -> Result<(), ReduceError> {
    let bits = x.bits();
    let (min, max) = ((2 * l - 1) as u64, 2 * l as u64);
    if bits < min || bits > max {
        return Err(ReduceError::TargetOutOfRange { bits, min, max, l });
    }
    Ok(())
}

/// Residue-based test circuit: per exponent `e_i` both operands are reduced
/// modulo `2^e_i - 1` and `2^e_i + 1`, multiplied in each ring and compared
/// with the residues of `x`; the low `e_0` bits are multiplied modulo
/// `2^e_0`. All `2k + 1` flags are conjoined.
pub fn build_crt_test_circuit(x: &BigUint, plan: &CrtPlan) -> Result<Reduction, ReduceError> {
    crt::validate_plan(plan).map_err(ReduceError::InvalidPlan)?;
    let l = plan.l;
    check_product_range(x, l)?;
    let res = crt::residues(x, plan).expect("range checked above");

    let mut b = CircuitBuilder::new(2 * l);
    let u = b.inputs(0..l);
    let v = b.inputs(l..2 * l);

    let mut surcharge = 0;
    let mut flags = Vec::with_capacity(2 * plan.k() + 1);
    for (&e, (x_m, x_f)) in plan.exponents.iter().zip(&res.pairs) {
        let ru = blocks::dual_mod(&mut b, &u, e);
        let rv = blocks::dual_mod(&mut b, &v, e);

        let w = blocks::mult_mersenne(&mut b, &ru.mersenne, &rv.mersenne);
        let alias = x_m.is_zero().then(|| crt::mersenne(e));
        if alias.is_some() {
            surcharge += e;
        }
        flags.push(blocks::eq_const(&mut b, &w, x_m, alias.as_ref())?);

        let w = blocks::mult_fermat(&mut b, &ru.fermat, &rv.fermat);
        flags.push(blocks::eq_const(&mut b, &w, x_f, None)?);
    }

    let low = |s: &[Signal]| -> Vec<Signal> {
        (0..plan.e0)
            .map(|j| s.get(j).copied().unwrap_or(Signal::FALSE))
            .collect()
    };
    let w = blocks::mult_low(&mut b, &low(&u), &low(&v));
    flags.push(blocks::eq_const(&mut b, &w, &res.x0, None)?);

    let accept = conjoin(&mut b, &flags);
    Ok(Reduction {
        l,
        x: x.clone(),
        kind: ReductionKind::Crt(plan.clone()),
        circuit: b.finish(&[accept]),
        zero_alias_surcharge: surcharge,
    })
}

/// AND of all flags using 3-input gates, with a 2-input gate for a
/// leftover pair.
fn conjoin(b: &mut CircuitBuilder, flags: &[Signal]) -> Signal {
    let mut acc = flags.first().copied().unwrap_or(Signal::TRUE);
    for chunk in flags[1.min(flags.len())..].chunks(2) {
        acc = match *chunk {
            [a, c] => b.and3(acc, a, c),
            [a] => b.and2(acc, a),
            _ => unreachable!(),
        };
    }
    acc
}

/// Schoolbook test circuit: `l^2` partial products, `l - 1` full-width
/// ripple adders and a `2l`-bit comparison with `x`. Built without constant
/// folding so every adder keeps its full `[2l]` cost.
pub fn build_naive_test_circuit(x: &BigUint, l: usize) -> Result<Reduction, ReduceError> {
    if l == 0 {
        return Err(ReduceError::ZeroLength);
    }
    if x.bits() > 2 * l as u64 {
        return Err(ReduceError::TargetOutOfRange {
            bits: x.bits(),
            min: 0,
            max: 2 * l as u64,
            l,
        });
    }
    let mut b = CircuitBuilder::unfolded(2 * l);
    let u = b.inputs(0..l);
    let v = b.inputs(l..2 * l);

    let mut product = Vec::with_capacity(2 * l);
    let row: Vec<Signal> = u.iter().map(|&a| b.and2(a, v[0])).collect();
    product.push(row[0]);
    let mut high = row[1..].to_vec();
    high.push(Signal::FALSE);
    for &vi in &v[1..] {
        let pp: Vec<Signal> = u.iter().map(|&a| b.and2(a, vi)).collect();
        let (sum, carry) = blocks::add(&mut b, &high, &pp, Signal::FALSE);
        product.push(sum[0]);
        high = sum[1..].to_vec();
        high.push(carry);
    }
    product.extend(high);

    let accept = blocks::eq_const(&mut b, &product, x, None)?;
    Ok(Reduction {
        l,
        x: x.clone(),
        kind: ReductionKind::Naive,
        circuit: b.finish(&[accept]),
        zero_alias_surcharge: 0,
    })
}

/// Upper bound on the residue circuit's gate counts, before any zero-alias
/// surcharge.
pub fn gate_bound(plan: &CrtPlan) -> SizeReport {
    let (l, k, e0) = (plan.l, plan.k(), plan.e0);
    let mut g3 = e0 * e0 - e0 + 4 * k * l + k;
    let mut g2 = e0 * (e0 + 1) / 2;
    for (&e, lp) in plan.exponents.iter().zip(plan.l_primes()) {
        g3 += 4 * e * e + 3 * e;
        g2 += 2 * e * e + 16 * e + 2 * lp;
    }
    SizeReport { g3, g2: g2 - 2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrtEstimate {
    pub variables: u64,
    pub ext_clauses: u64,
    pub cnf_clauses: u64,
}

/// Closed-form size bounds for the formula derived from the residue
/// circuit: variables `2l + g3 + g2`, 4-CNF clauses `8 g3 + 4 g2`, over the
/// gate bound of [`gate_bound`].
pub fn estimate_crt_size(plan: &CrtPlan) -> CrtEstimate {
    let b = gate_bound(plan);
    let (g3, g2) = (b.g3 as u64, b.g2 as u64);
    CrtEstimate {
        variables: 2 * plan.l as u64 + g3 + g2,
        ext_clauses: g3 + g2 + 1,
        cnf_clauses: 8 * g3 + 4 * g2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NaiveEstimate {
    pub variables: u64,
    pub cnf_clauses: u64,
}

/// `(3l^2 + 2l - 1, 20l^2 - 8l - 4)`.
pub fn estimate_naive_size(l: usize) -> NaiveEstimate {
    let l = l as u64;
    NaiveEstimate {
        variables: 3 * l * l + 2 * l - 1,
        cnf_clauses: (20 * l * l).saturating_sub(8 * l + 4),
    }
}

/// Exact naive gate counts `([2(l-1)l], l^2 + 2l - 1)`.
pub fn naive_gate_counts(l: usize) -> SizeReport {
    SizeReport {
        g3: 2 * (l - 1) * l,
        g2: l * l + 2 * l - 1,
    }
}

/// Smallest product of two `l`-bit numbers.
pub fn min_product(l: usize) -> BigUint {
    BigUint::one() << (2 * l - 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn closed_forms_at_presets() {
        let e = estimate_crt_size(&crt::preset_plan(50).unwrap());
        assert_eq!((e.variables, e.cnf_clauses), (5455, 34168));
        let e = estimate_crt_size(&crt::preset_plan(30).unwrap());
        assert_eq!(e.variables, 2645);
        assert!(e.ext_clauses <= e.variables);
    }

    #[test]
    fn naive_formulas() {
        let e = estimate_naive_size(50);
        assert_eq!((e.variables, e.cnf_clauses), (7599, 49596));
        assert_eq!(estimate_naive_size(256).variables, 197119);
        assert_eq!(estimate_naive_size(256).cnf_clauses, 1308668);
        assert_eq!(estimate_naive_size(30).variables, 2759);
        assert_eq!(estimate_naive_size(30).cnf_clauses, 17756);
    }

    #[test]
    fn adding_an_exponent_increases_estimates() {
        let a = estimate_crt_size(&CrtPlan::new(50, 27, vec![5, 7, 8, 9]));
        let b = estimate_crt_size(&CrtPlan::new(50, 27, vec![5, 7, 8, 9, 11]));
        assert!(a.variables < b.variables);
        assert!(a.ext_clauses < b.ext_clauses);
        assert!(a.cnf_clauses < b.cnf_clauses);
    }

    #[test]
    fn x77_accept_set() {
        let plan = crt::plan(4).unwrap();
        for red in [
            build_crt_test_circuit(&n(77), &plan).unwrap(),
            build_naive_test_circuit(&n(77), 4).unwrap(),
        ] {
            let mut accepted = Vec::new();
            for u in 0..16u64 {
                for v in 0..16u64 {
                    if red.accepts(&n(u), &n(v)) {
                        accepted.push((u, v));
                    }
                }
            }
            assert_eq!(accepted, vec![(7, 11), (11, 7)], "{}", red.mode_name());
            assert!(!red.accepts(&n(5), &n(5)));
        }
    }

    #[test]
    fn naive_counts_exact() {
        for l in 1..=8 {
            let r = build_naive_test_circuit(&n(1), l).unwrap();
            assert_eq!(r.size(), naive_gate_counts(l), "l={l}");
        }
    }

    #[test]
    fn range_errors() {
        let plan = crt::plan(4).unwrap();
        assert!(matches!(
            build_crt_test_circuit(&n(256), &plan),
            Err(ReduceError::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            build_crt_test_circuit(&n(63), &plan),
            Err(ReduceError::TargetOutOfRange { .. })
        ));
        assert!(build_naive_test_circuit(&n(256), 4).is_err());
        let bad = CrtPlan::new(4, 1, vec![2, 4]);
        assert!(matches!(
            build_crt_test_circuit(&n(77), &bad),
            Err(ReduceError::InvalidPlan(_))
        ));
    }
}
