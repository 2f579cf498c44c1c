//! Arithmetic sub-circuits used by the test circuits.
//!
//! Each operation comes in two forms: a function that appends gates to a
//! [`CircuitBuilder`] and returns output signals (used when composing the
//! full reduction), and a `build_*` constructor that wraps the same
//! function into a standalone [`Block`] with named input and output ports.
//! Operand bit vectors are least-significant bit first throughout.
//!
//! Gate budgets, with `[n]` counting fan-in-3 gates:
//!
//! | block            | budget                              |
//! |------------------|-------------------------------------|
//! | increment(e)     | 2e (exact)                          |
//! | add(e), sub(e)   | [2e] (exact)                        |
//! | dual_mod(l, e)   | [2l + 2e] + 4e + 2l'                |
//! | mult_mersenne(e) | [2(e-1)e] + e^2 + 2e                |
//! | mult_fermat(e)   | [2e^2 + e + 1] + e^2 + 4e           |
//! | mult_low(e0)     | [(e0-1)e0] + (e0-1)e0/2             |

use num_bigint::BigUint;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitBuilder, Signal, SizeReport, Wire};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("{block}: parameter {param}={value} must be at least {min}")]
    ParameterTooSmall {
        block: &'static str,
        param: &'static str,
        value: usize,
        min: usize,
    },
    #[error("dual_mod: input width {l} is smaller than modulus exponent {e}")]
    InputNarrowerThanModulus { l: usize, e: usize },
    #[error("eq_const: constant {constant} does not fit in {width} bits")]
    ConstantOutOfRange { constant: BigUint, width: usize },
}

fn at_least(
    block: &'static str,
    param: &'static str,
    value: usize,
    min: usize,
) -> Result<(), BlockError> {
    if value < min {
        Err(BlockError::ParameterTooSmall {
            block,
            param,
            value,
            min,
        })
    } else {
        Ok(())
    }
}

/// Ripple increment: `result + 2^e * carry_out = u + carry_in`.
pub fn increment(b: &mut CircuitBuilder, u: &[Signal], carry_in: Signal) -> (Vec<Signal>, Signal) {
    let mut carry = carry_in;
    let result = u
        .iter()
        .map(|&bit| {
            let sum = b.xor2(bit, carry);
            carry = b.and2(bit, carry);
            sum
        })
        .collect();
    (result, carry)
}

/// Ripple-carry addition with one sum and one majority gate per bit; the
/// carry-in enters bit 0's gates directly.
pub fn add(
    b: &mut CircuitBuilder,
    u: &[Signal],
    v: &[Signal],
    carry_in: Signal,
) -> (Vec<Signal>, Signal) {
    assert_eq!(u.len(), v.len(), "adder operands must have equal width");
    let mut carry = carry_in;
    let sum = u
        .iter()
        .zip(v)
        .map(|(&x, &y)| {
            let s = b.xor3(x, y, carry);
            carry = b.maj3(x, y, carry);
            s
        })
        .collect();
    (sum, carry)
}

/// Ripple-borrow subtraction: returns `(u - v - borrow_in) mod 2^e` and the
/// sign bit, which is set iff `u - v - borrow_in < 0`.
pub fn subtract(
    b: &mut CircuitBuilder,
    u: &[Signal],
    v: &[Signal],
    borrow_in: Signal,
) -> (Vec<Signal>, Signal) {
    assert_eq!(
        u.len(),
        v.len(),
        "subtractor operands must have equal width"
    );
    let mut borrow = borrow_in;
    let diff = u
        .iter()
        .zip(v)
        .map(|(&x, &y)| {
            let d = b.xor3(x, y, borrow);
            borrow = b.maj3(!x, y, borrow);
            d
        })
        .collect();
    (diff, borrow)
}

/// `(u + c) mod (2^e - 1)` for `u + c <= 2^(e+1) - 1` written as `u` plus an
/// end-around carry `c`. The one overflowing case (`u` all ones, `c` set)
/// wraps to 1 through an extra OR on bit 0.
fn increment_end_around(b: &mut CircuitBuilder, u: &[Signal], c: Signal) -> Vec<Signal> {
    let (mut bits, overflow) = increment(b, u, c);
    bits[0] = b.or2(bits[0], overflow);
    bits
}

/// Increment handling two bits per step: the low bit is `a0 ^ c`, the high
/// bit `a1 ^ (a0 & c)` and the carry `a0 & a1 & c`, so each pair costs one
/// fan-in-2 and two fan-in-3 gates.
fn increment_paired(
    b: &mut CircuitBuilder,
    u: &[Signal],
    carry_in: Signal,
) -> (Vec<Signal>, Signal) {
    let mut carry = carry_in;
    let mut result = Vec::with_capacity(u.len());
    for pair in u.chunks(2) {
        if let [a0, a1] = *pair {
            result.push(b.xor2(a0, carry));
            result.push(b.gate_fn(&[a0, a1, carry], |v| v[1] ^ (v[0] & v[2])));
            carry = b.and3(a0, a1, carry);
        } else {
            result.push(b.xor2(pair[0], carry));
            carry = b.and2(pair[0], carry);
        }
    }
    (result, carry)
}

/// `u - borrow_in` as the complement of `!u + borrow_in`; the borrow out is
/// set iff `u` is zero and `borrow_in` is set.
fn decrement_paired(
    b: &mut CircuitBuilder,
    u: &[Signal],
    borrow_in: Signal,
) -> (Vec<Signal>, Signal) {
    let inverted: Vec<Signal> = u.iter().map(|&s| !s).collect();
    let (r, borrow) = increment_paired(b, &inverted, borrow_in);
    (r.into_iter().map(|s| !s).collect(), borrow)
}

/// One column of `x + (a AND y) + c`. When `x` or `c` is constant the
/// partial-product AND is fused into the two 3-input gates.
fn pp_add_bit(
    b: &mut CircuitBuilder,
    x: Signal,
    a: Signal,
    y: Signal,
    c: Signal,
) -> (Signal, Signal) {
    match fusable(x, c) {
        Some((k, s)) => {
            let sum = b.gate_fn(&[a, y, s], |v| (v[0] & v[1]) ^ v[2] ^ k);
            let carry = b.gate_fn(&[a, y, s], |v| {
                if k {
                    (v[0] & v[1]) | v[2]
                } else {
                    v[0] & v[1] & v[2]
                }
            });
            (sum, carry)
        }
        None => {
            let pp = b.and2(a, y);
            (b.xor3(x, pp, c), b.maj3(x, pp, c))
        }
    }
}

/// Like [`pp_add_bit`] without the carry-out.
fn pp_sum_bit(b: &mut CircuitBuilder, x: Signal, a: Signal, y: Signal, c: Signal) -> Signal {
    match fusable(x, c) {
        Some((k, s)) => b.gate_fn(&[a, y, s], |v| (v[0] & v[1]) ^ v[2] ^ k),
        None => {
            let pp = b.and2(a, y);
            b.xor3(x, pp, c)
        }
    }
}

fn fusable(x: Signal, c: Signal) -> Option<(bool, Signal)> {
    match (x, c) {
        (Signal::Const(k), s) | (s, Signal::Const(k)) => Some((k, s)),
        _ => None,
    }
}

/// Residues of an `l`-bit value `u` modulo `2^e - 1` (`e` bits, zero class
/// as either 0 or all ones) and modulo `2^e + 1` (`e + 1` bits, exact).
#[derive(Clone, Debug)]
pub struct DualResidue {
    pub mersenne: Vec<Signal>,
    pub fermat: Vec<Signal>,
}

/// Splits `u` into base-`2^e` digits and folds even-indexed digits into one
/// running sum and odd-indexed digits into another. The carry out of each
/// addition moves to the other chain: a carry from the even chain is worth
/// `2^e` (an odd-position unit) and a carry from the odd chain is worth
/// `2^(2e)`, which is 1 modulo both `2^e - 1` and `2^e + 1`. The chains are
/// interleaved so the last addition lands on the even chain, leaving
/// `u = even + 2^e (odd + pending)` modulo `2^(2e) - 1`.
pub fn dual_mod(b: &mut CircuitBuilder, u: &[Signal], e: usize) -> DualResidue {
    assert!(e >= 2 && u.len() >= e);
    let h = u.len().div_ceil(e);
    if h == 2 && u.len() < 2 * e {
        return dual_mod_short(b, u, e);
    }
    let digit = |i: usize| -> Vec<Signal> {
        (0..e)
            .map(|j| u.get(i * e + j).copied().unwrap_or(Signal::FALSE))
            .collect()
    };
    let mut acc = [digit(0), digit(1)];
    let mut next = [2usize, 3usize];
    let additions = h.saturating_sub(2);
    let mut chain = if additions % 2 == 1 { 0 } else { 1 };
    let mut pending = Signal::FALSE;
    for _ in 0..additions {
        let d = digit(next[chain]);
        next[chain] += 2;
        let (sum, carry) = add(b, &acc[chain], &d, pending);
        acc[chain] = sum;
        pending = carry;
        chain ^= 1;
    }
    debug_assert!(next[0] >= h && next[1] >= h);
    let [even, odd] = acc;

    let (s, c_plus) = add(b, &even, &odd, pending);
    let mersenne = increment_end_around(b, &s, c_plus);

    let (d, c_minus) = subtract(b, &even, &odd, pending);
    let (mut fermat, top) = increment(b, &d, c_minus);
    fermat.push(top);

    DualResidue { mersenne, fermat }
}

/// Two digits with a high digit of `w < e` bits. Above bit `w` both chains
/// only propagate a carry or borrow, so they and the final increments use
/// the paired form, keeping the fan-in-2 count within budget.
fn dual_mod_short(b: &mut CircuitBuilder, u: &[Signal], e: usize) -> DualResidue {
    let (low, high) = u.split_at(e);
    let w = high.len();

    let (mut s, c) = add(b, &low[..w], high, Signal::FALSE);
    let (s_high, c_plus) = increment_paired(b, &low[w..], c);
    s.extend(s_high);
    let (mut mersenne, overflow) = increment_paired(b, &s, c_plus);
    mersenne[0] = b.or2(mersenne[0], overflow);

    let (mut d, bo) = subtract(b, &low[..w], high, Signal::FALSE);
    let (d_high, c_minus) = decrement_paired(b, &low[w..], bo);
    d.extend(d_high);
    let (mut fermat, top) = increment_paired(b, &d, c_minus);
    fermat.push(top);

    DualResidue { mersenne, fermat }
}

/// `u * v mod (2^e - 1)` from rotated partial products folded with
/// end-around carries.
pub fn mult_mersenne(b: &mut CircuitBuilder, u: &[Signal], v: &[Signal]) -> Vec<Signal> {
    let e = u.len();
    assert!(e >= 2 && v.len() == e);
    let mut acc: Vec<Signal> = u.iter().map(|&a| b.and2(a, v[0])).collect();
    let mut carry = Signal::FALSE;
    for (i, &vi) in v.iter().enumerate().skip(1) {
        acc = (0..e)
            .map(|j| {
                let a = u[(j + e - i) % e];
                let (s, c) = pp_add_bit(b, acc[j], a, vi, carry);
                carry = c;
                s
            })
            .collect();
    }
    increment_end_around(b, &acc, carry)
}

/// Schoolbook `2e`-bit product of two `e`-bit operands.
fn full_product(b: &mut CircuitBuilder, u: &[Signal], v: &[Signal]) -> Vec<Signal> {
    let e = u.len();
    let mut out = Vec::with_capacity(2 * e);
    let row: Vec<Signal> = u.iter().map(|&a| b.and2(a, v[0])).collect();
    out.push(row[0]);
    let mut high: Vec<Signal> = row[1..].to_vec();
    high.push(Signal::FALSE);
    for &vi in &v[1..] {
        let mut carry = Signal::FALSE;
        let sums: Vec<Signal> = (0..e)
            .map(|j| {
                let (s, c) = pp_add_bit(b, high[j], u[j], vi, carry);
                carry = c;
                s
            })
            .collect();
        out.push(sums[0]);
        high = sums[1..].to_vec();
        high.push(carry);
    }
    out.extend(high);
    out
}

/// `u * v mod (2^e + 1)` for `(e+1)`-bit operands valued in `[0, 2^e]`.
///
/// With `u = u' + 2^e a_e` and `v = v' + 2^e b_e` the product is
/// `u'v' - (u' b_e + v' a_e) + a_e b_e`. At most one of the high half of
/// `u'v'`, `u' b_e`, `v' a_e` is nonzero, so their sum is a bitwise OR.
pub fn mult_fermat(b: &mut CircuitBuilder, u: &[Signal], v: &[Signal]) -> Vec<Signal> {
    let e = u.len() - 1;
    assert!(e >= 2 && v.len() == e + 1);
    let (u_low, a_top) = (&u[..e], u[e]);
    let (v_low, b_top) = (&v[..e], v[e]);
    let product = full_product(b, u_low, v_low);
    let (low, high) = product.split_at(e);
    let merged: Vec<Signal> = (0..e)
        .map(|j| {
            let uu = b.and2(u_low[j], b_top);
            let vv = b.and2(v_low[j], a_top);
            b.or3(high[j], uu, vv)
        })
        .collect();
    let (diff, negative) = subtract(b, low, &merged, Signal::FALSE);
    let (mut w, top) = increment(b, &diff, negative);
    // a_e = b_e = 1 forces every other term to zero; the result is 1.
    w[0] = b.gate_fn(&[w[0], a_top, b_top], |x| x[0] | (x[1] & x[2]));
    w.push(top);
    w
}

/// `u * v mod 2^e0`, keeping only the partial products below bit `e0`.
pub fn mult_low(b: &mut CircuitBuilder, u: &[Signal], v: &[Signal]) -> Vec<Signal> {
    let e0 = u.len();
    assert!(e0 >= 1 && v.len() == e0);
    match e0 {
        1 => return vec![b.and2(u[0], v[0])],
        2 => {
            // bit 1 = u1 v0 ^ u0 v1, split across two 3-input gates via u0.
            let low = b.and2(u[0], v[0]);
            let t = b.gate_fn(&[u[1], v[0], u[0]], |x| (x[0] & x[1]) ^ x[2]);
            let high = b.gate_fn(&[t, u[0], v[1]], |x| x[0] ^ x[1] ^ (x[1] & x[2]));
            return vec![low, high];
        }
        _ => {}
    }
    let top = e0 - 1;
    // The top partial product of row 0 is folded into row 1's top column.
    let mut acc: Vec<Signal> = (0..e0)
        .map(|p| {
            if p < top {
                b.and2(u[p], v[0])
            } else {
                Signal::FALSE
            }
        })
        .collect();
    for i in 1..e0 {
        let width = e0 - i;
        let mut carry = Signal::FALSE;
        for j in 0..width {
            let pos = i + j;
            if j + 1 < width {
                let (s, c) = pp_add_bit(b, acc[pos], u[j], v[i], carry);
                acc[pos] = s;
                carry = c;
            } else if i == 1 {
                let t = b.gate_fn(&[u[top], v[0], carry], |x| (x[0] & x[1]) ^ x[2]);
                acc[pos] = b.gate_fn(&[t, u[j], v[1]], |x| x[0] ^ (x[1] & x[2]));
            } else {
                acc[pos] = pp_sum_bit(b, acc[pos], u[j], v[i], carry);
            }
        }
    }
    acc
}

fn and_chain(b: &mut CircuitBuilder, lits: &[Signal]) -> Signal {
    let mut iter = lits.iter().copied();
    let first = iter.next().unwrap_or(Signal::TRUE);
    iter.fold(first, |acc, l| b.and2(acc, l))
}

fn matching_literals(bits: &[Signal], value: &BigUint) -> Vec<Signal> {
    bits.iter()
        .enumerate()
        .map(|(j, &s)| if value.bit(j as u64) { s } else { !s })
        .collect()
}

/// Flag set iff `bits` equals `constant` (or `zero_alias`, when given).
/// A `w`-bit comparison costs `w - 1` fan-in-2 gates; the alias form costs
/// at most `2w - 1`.
pub fn eq_const(
    b: &mut CircuitBuilder,
    bits: &[Signal],
    constant: &BigUint,
    zero_alias: Option<&BigUint>,
) -> Result<Signal, BlockError> {
    for value in std::iter::once(constant).chain(zero_alias) {
        if value.bits() > bits.len() as u64 {
            return Err(BlockError::ConstantOutOfRange {
                constant: value.clone(),
                width: bits.len(),
            });
        }
    }
    let eq = and_chain(b, &matching_literals(bits, constant));
    Ok(match zero_alias {
        Some(alias) => {
            let eq_alias = and_chain(b, &matching_literals(bits, alias));
            b.or2(eq, eq_alias)
        }
        None => eq,
    })
}

/// A named group of wires, least-significant bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: &'static str,
    pub wires: Vec<Wire>,
}

/// A standalone sub-circuit with named operand ports.
#[derive(Clone, Debug)]
pub struct Block {
    pub circuit: Circuit,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
}

impl Block {
    fn assemble(
        b: CircuitBuilder,
        inputs: &[(&'static str, usize)],
        outputs: Vec<(&'static str, Vec<Signal>)>,
    ) -> Block {
        let mut next = 0u32;
        let inputs = inputs
            .iter()
            .map(|&(name, width)| {
                let wires = (next..next + width as u32).map(Wire).collect();
                next += width as u32;
                Port { name, wires }
            })
            .collect();
        let flat: Vec<Signal> = outputs
            .iter()
            .flat_map(|(_, s)| s.iter().copied())
            .collect();
        let circuit = b.finish(&flat);
        let mut pos = 0;
        let outputs = outputs
            .into_iter()
            .map(|(name, signals)| {
                let wires = circuit.outputs[pos..pos + signals.len()].to_vec();
                pos += signals.len();
                Port { name, wires }
            })
            .collect();
        Block {
            circuit,
            inputs,
            outputs,
        }
    }

    pub fn size(&self) -> SizeReport {
        self.circuit.size()
    }

    /// Evaluates the block on one integer per input port, returning one
    /// integer per output port. Ports wider than 64 bits are not supported.
    pub fn eval(&self, operands: &[u64]) -> Vec<u64> {
        assert_eq!(
            operands.len(),
            self.inputs.len(),
            "one operand per input port"
        );
        let mut bits = vec![false; self.circuit.num_inputs];
        for (port, &value) in self.inputs.iter().zip(operands) {
            for (j, w) in port.wires.iter().enumerate() {
                bits[w.index()] = j < 64 && (value >> j) & 1 == 1;
            }
        }
        let (_, trace) = self.circuit.eval(&bits).expect("input width matches ports");
        self.outputs
            .iter()
            .map(|port| {
                port.wires
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, w)| acc | (trace[w.index()] as u64) << j)
            })
            .collect()
    }
}

fn operands(b: &CircuitBuilder, widths: &[usize]) -> Vec<Vec<Signal>> {
    let mut next = 0;
    widths
        .iter()
        .map(|&w| {
            let group = b.inputs(next..next + w);
            next += w;
            group
        })
        .collect()
}

pub fn build_inc(e: usize) -> Result<Block, BlockError> {
    at_least("inc", "e", e, 1)?;
    let mut b = CircuitBuilder::new(e + 1);
    let ops = operands(&b, &[e, 1]);
    let (result, carry) = increment(&mut b, &ops[0], ops[1][0]);
    Ok(Block::assemble(
        b,
        &[("u", e), ("carry_in", 1)],
        vec![("result", result), ("carry_out", vec![carry])],
    ))
}

pub fn build_add(e: usize) -> Result<Block, BlockError> {
    at_least("add", "e", e, 1)?;
    let mut b = CircuitBuilder::new(2 * e + 1);
    let ops = operands(&b, &[e, e, 1]);
    let (sum, carry) = add(&mut b, &ops[0], &ops[1], ops[2][0]);
    Ok(Block::assemble(
        b,
        &[("u", e), ("v", e), ("carry_in", 1)],
        vec![("sum", sum), ("carry_out", vec![carry])],
    ))
}

pub fn build_sub(e: usize) -> Result<Block, BlockError> {
    at_least("sub", "e", e, 1)?;
    let mut b = CircuitBuilder::new(2 * e + 1);
    let ops = operands(&b, &[e, e, 1]);
    let (diff, sign) = subtract(&mut b, &ops[0], &ops[1], ops[2][0]);
    Ok(Block::assemble(
        b,
        &[("u", e), ("v", e), ("borrow_in", 1)],
        vec![("difference", diff), ("sign", vec![sign])],
    ))
}

pub fn build_dual_mod(l: usize, e: usize) -> Result<Block, BlockError> {
    at_least("dual_mod", "e", e, 2)?;
    if l < e {
        return Err(BlockError::InputNarrowerThanModulus { l, e });
    }
    let mut b = CircuitBuilder::new(l);
    let u = b.inputs(0..l);
    let r = dual_mod(&mut b, &u, e);
    Ok(Block::assemble(
        b,
        &[("u", l)],
        vec![("s", r.mersenne), ("t", r.fermat)],
    ))
}

pub fn build_mult_mersenne(e: usize) -> Result<Block, BlockError> {
    at_least("mult_mersenne", "e", e, 2)?;
    let mut b = CircuitBuilder::new(2 * e);
    let ops = operands(&b, &[e, e]);
    let w = mult_mersenne(&mut b, &ops[0], &ops[1]);
    Ok(Block::assemble(b, &[("u", e), ("v", e)], vec![("w", w)]))
}

pub fn build_mult_fermat(e: usize) -> Result<Block, BlockError> {
    at_least("mult_fermat", "e", e, 2)?;
    let mut b = CircuitBuilder::new(2 * (e + 1));
    let ops = operands(&b, &[e + 1, e + 1]);
    let w = mult_fermat(&mut b, &ops[0], &ops[1]);
    Ok(Block::assemble(
        b,
        &[("u", e + 1), ("v", e + 1)],
        vec![("w", w)],
    ))
}

pub fn build_mult_low(e0: usize) -> Result<Block, BlockError> {
    at_least("mult_low", "e0", e0, 1)?;
    let mut b = CircuitBuilder::new(2 * e0);
    let ops = operands(&b, &[e0, e0]);
    let w = mult_low(&mut b, &ops[0], &ops[1]);
    Ok(Block::assemble(b, &[("u", e0), ("v", e0)], vec![("w", w)]))
}

pub fn build_eq_const(
    width: usize,
    constant: &BigUint,
    zero_alias: Option<&BigUint>,
) -> Result<Block, BlockError> {
    let mut b = CircuitBuilder::new(width);
    let bits = b.inputs(0..width);
    let flag = eq_const(&mut b, &bits, constant, zero_alias)?;
    Ok(Block::assemble(
        b,
        &[("bits", width)],
        vec![("flag", vec![flag])],
    ))
}

/// Closed-form gate budgets for each block, as `(g3, g2)` upper bounds.
pub mod budget {
    use crate::circuit::SizeReport;

    pub fn inc(e: usize) -> SizeReport {
        SizeReport { g3: 0, g2: 2 * e }
    }

    pub fn add(e: usize) -> SizeReport {
        SizeReport { g3: 2 * e, g2: 0 }
    }

    pub fn sub(e: usize) -> SizeReport {
        add(e)
    }

    pub fn dual_mod(l: usize, e: usize) -> SizeReport {
        let l_prime = l - l % e;
        SizeReport {
            g3: 2 * l + 2 * e,
            g2: 4 * e + 2 * l_prime,
        }
    }

    pub fn mult_mersenne(e: usize) -> SizeReport {
        SizeReport {
            g3: 2 * (e - 1) * e,
            g2: e * e + 2 * e,
        }
    }

    pub fn mult_fermat(e: usize) -> SizeReport {
        SizeReport {
            g3: 2 * e * e + e + 1,
            g2: e * e + 4 * e,
        }
    }

    pub fn mult_low(e0: usize) -> SizeReport {
        SizeReport {
            g3: (e0 - 1) * e0,
            g2: ((e0 - 1) * e0).div_ceil(2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let inc = build_inc(3).unwrap();
        assert_eq!(inc.eval(&[7, 1]), vec![0, 1]);
        assert_eq!(inc.eval(&[5, 0]), vec![5, 0]);

        let add = build_add(3).unwrap();
        assert_eq!(add.eval(&[5, 6, 0]), vec![3, 1]);
        assert_eq!(add.eval(&[0, 0, 0]), vec![0, 0]);

        let sub = build_sub(3).unwrap();
        assert_eq!(sub.eval(&[6, 2, 0]), vec![4, 0]);
        assert_eq!(sub.eval(&[2, 6, 0]), vec![4, 1]);

        let m = build_dual_mod(8, 3).unwrap();
        let out = m.eval(&[200]);
        assert_eq!(out[0] % 7, 200 % 7);
        assert_eq!(out[1], 2);
        let m = build_dual_mod(6, 3).unwrap();
        let out = m.eval(&[0]);
        assert!(out[0] == 0 || out[0] == 7);
        assert_eq!(out[1], 0);

        let mm = build_mult_mersenne(3).unwrap();
        assert_eq!(mm.eval(&[5, 4])[0] % 7, 6);
        assert_eq!(mm.eval(&[1, 1])[0], 1);

        let mf = build_mult_fermat(3).unwrap();
        assert_eq!(mf.eval(&[8, 8]), vec![1]);
        assert_eq!(mf.eval(&[0, 5]), vec![0]);

        let ml = build_mult_low(4).unwrap();
        assert_eq!(ml.eval(&[7, 7]), vec![1]);
        assert_eq!(ml.eval(&[1, 13]), vec![13]);
    }

    #[test]
    fn exact_sizes() {
        assert_eq!(build_inc(4).unwrap().size(), SizeReport { g3: 0, g2: 8 });
        assert_eq!(build_add(4).unwrap().size(), SizeReport { g3: 8, g2: 0 });
        assert_eq!(build_sub(4).unwrap().size(), SizeReport { g3: 8, g2: 0 });
    }

    #[test]
    fn eq_const_examples() {
        let c = build_eq_const(3, &BigUint::from(5u8), None).unwrap();
        assert_eq!(c.eval(&[5]), vec![1]);
        assert_eq!(c.eval(&[4]), vec![0]);
        assert_eq!(c.size(), SizeReport { g3: 0, g2: 2 });

        let seven = BigUint::from(7u8);
        let c = build_eq_const(3, &BigUint::from(0u8), Some(&seven)).unwrap();
        assert_eq!(c.eval(&[7]), vec![1]);
        assert_eq!(c.eval(&[0]), vec![1]);
        assert_eq!(c.eval(&[3]), vec![0]);
        assert!(c.size().total() <= 5);

        assert!(matches!(
            build_eq_const(3, &BigUint::from(8u8), None),
            Err(BlockError::ConstantOutOfRange { .. })
        ));
    }

    #[test]
    fn parameter_errors() {
        assert!(build_inc(0).is_err());
        assert!(build_add(0).is_err());
        assert!(build_sub(0).is_err());
        assert!(build_dual_mod(8, 1).is_err());
        assert_eq!(
            build_dual_mod(3, 4).unwrap_err(),
            BlockError::InputNarrowerThanModulus { l: 3, e: 4 }
        );
        assert!(build_mult_mersenne(1).is_err());
        assert!(build_mult_fermat(1).is_err());
        assert!(build_mult_low(0).is_err());
    }

    #[test]
    fn fermat_top_bit_corner_cases() {
        // a_e = 1 and/or b_e = 1 exercise the OR merge.
        let e = 4;
        let m = 17u64;
        let blk = build_mult_fermat(e).unwrap();
        for v in 0..=16u64 {
            assert_eq!(blk.eval(&[16, v])[0], 16 * v % m, "u=16 v={v}");
            assert_eq!(blk.eval(&[v, 16])[0], 16 * v % m, "u={v} v=16");
        }
    }
}
