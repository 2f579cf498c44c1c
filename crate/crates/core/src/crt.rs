//! Modulus planning for the residue test: exponents `e_0; e_1..e_k` select
//! the moduli `2^e_0`, `2^e_i - 1` and `2^e_i + 1`, whose lcm must cover
//! every product of two `l`-bit numbers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

/// Bit lengths with a built-in parameter row.
pub const PRESET_LENGTHS: [usize; 7] = [30, 40, 50, 60, 70, 128, 256];

const PRESETS: [(usize, usize, &[usize]); 7] = [
    (30, 16, &[4, 5, 7, 9]),
    (40, 16, &[7, 8, 9, 11]),
    (50, 27, &[5, 7, 8, 9, 11]),
    (60, 23, &[5, 7, 8, 9, 11, 13]),
    (70, 27, &[5, 7, 9, 11, 13, 16]),
    (128, 27, &[7, 11, 13, 15, 16, 17, 19, 23]),
    (256, 62, &[7, 11, 13, 17, 19, 23, 25, 27, 29, 31, 32]),
];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no preset parameter row for l={0}")]
    NoPreset(usize),
    #[error("bit length l={0} is below the minimum of 2")]
    LengthTooSmall(usize),
    #[error("x has {bits} bits, exceeding 2l={limit}")]
    TargetOutOfRange { bits: u64, limit: usize },
    #[error("cannot parse plan: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlanViolation {
    #[error("l={0} is below 2")]
    LengthTooSmall(usize),
    #[error("e0={0} must be at least 1")]
    PowerExponentTooSmall(usize),
    #[error("exponent e{index}={value} must be at least 2")]
    ExponentTooSmall { index: usize, value: usize },
    #[error("exponent {value} exceeds l={l}")]
    ExponentExceedsLength { value: usize, l: usize },
    #[error("exponents {a} and {b} share the factor {gcd}")]
    NotCoprime { a: usize, b: usize, gcd: usize },
    #[error("gcd({a}, {b}) = {gcd}, expected 1 or 3")]
    ModulusGcd {
        a: BigUint,
        b: BigUint,
        gcd: BigUint,
    },
    #[error("stored lcm ({stored_bits} bits) differs from recomputed lcm ({actual_bits} bits)")]
    LcmMismatch { stored_bits: u64, actual_bits: u64 },
    #[error("lcm is below 2^{required_bits}")]
    InsufficientCapacity { required_bits: usize },
}

/// A choice of moduli for testing `u * v = x` with `u, v < 2^l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtPlan {
    pub l: usize,
    pub e0: usize,
    pub exponents: Vec<usize>,
    /// Least common multiple of all `2k + 1` moduli.
    pub lcm: BigUint,
}

pub fn mersenne(e: usize) -> BigUint {
    (BigUint::one() << e) - 1u32
}

pub fn fermat(e: usize) -> BigUint {
    (BigUint::one() << e) + 1u32
}

impl CrtPlan {
    pub fn new(l: usize, e0: usize, exponents: Vec<usize>) -> Self {
        let mut plan = CrtPlan {
            l,
            e0,
            exponents,
            lcm: BigUint::zero(),
        };
        plan.lcm = lcm_by_folding(&plan.moduli());
        plan
    }

    pub fn k(&self) -> usize {
        self.exponents.len()
    }

    pub fn power_modulus(&self) -> BigUint {
        BigUint::one() << self.e0
    }

    /// `m_0`, then `m_i = 2^e_i - 1` and `m'_i = 2^e_i + 1` for each i.
    pub fn moduli(&self) -> Vec<BigUint> {
        std::iter::once(self.power_modulus())
            .chain(
                self.exponents
                    .iter()
                    .flat_map(|&e| [mersenne(e), fermat(e)]),
            )
            .collect()
    }

    /// `l'_i = l - (l mod e_i)`.
    pub fn l_primes(&self) -> Vec<usize> {
        self.exponents
            .iter()
            .map(|&e| self.l - self.l % e)
            .collect()
    }

    pub fn capacity_bits(&self) -> u64 {
        self.lcm.bits()
    }

    pub fn has_capacity(&self) -> bool {
        self.lcm >= BigUint::one() << (2 * self.l)
    }

    /// Logarithmic capacity estimate `2(e_1 + ... + e_k) + e_0 - k log 3`.
    pub fn heuristic_capacity(&self) -> f64 {
        let sum: usize = self.exponents.iter().sum();
        (2 * sum + self.e0) as f64 - self.k() as f64 * 3f64.log2()
    }
}

impl fmt::Display for CrtPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.exponents.iter().map(|e| e.to_string()).collect();
        write!(f, "l={} e0={} e={}", self.l, self.e0, e.join(","))
    }
}

impl FromStr for CrtPlan {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut l = None;
        let mut e0 = None;
        let mut exps = None;
        for field in s.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| PlanError::Parse(format!("field {field:?} is not key=value")))?;
            let num = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| PlanError::Parse(format!("bad number {v:?} for {key}")))
            };
            match key {
                "l" => l = Some(num(value)?),
                "e0" => e0 = Some(num(value)?),
                "e" => {
                    exps = Some(if value.is_empty() {
                        Vec::new()
                    } else {
                        value.split(',').map(num).collect::<Result<Vec<_>, _>>()?
                    })
                }
                _ => return Err(PlanError::Parse(format!("unknown key {key:?}"))),
            }
        }
        match (l, e0, exps) {
            (Some(l), Some(e0), Some(exps)) => Ok(CrtPlan::new(l, e0, exps)),
            _ => Err(PlanError::Parse("expected l=, e0= and e= fields".into())),
        }
    }
}

/// lcm by pairwise folding.
pub fn lcm_by_folding(moduli: &[BigUint]) -> BigUint {
    moduli.iter().fold(BigUint::one(), |acc, m| acc.lcm(m))
}

/// lcm as the product of the 3-free parts times the largest power of 3.
/// Valid when the 3-free parts are pairwise coprime, which holds for the
/// moduli of a plan with pairwise coprime exponents.
pub fn lcm_by_three_adic(moduli: &[BigUint]) -> BigUint {
    let three = BigUint::from(3u32);
    let mut product = BigUint::one();
    let mut max_power = 0u32;
    for m in moduli {
        let mut rest = m.clone();
        let mut power = 0;
        while !rest.is_zero() && (&rest % &three).is_zero() {
            rest /= &three;
            power += 1;
        }
        max_power = max_power.max(power);
        product *= rest;
    }
    product * three.pow(max_power)
}

pub fn preset_plan(l: usize) -> Result<CrtPlan, PlanError> {
    PRESETS
        .iter()
        .find(|(pl, _, _)| *pl == l)
        .map(|&(l, e0, exps)| CrtPlan::new(l, e0, exps.to_vec()))
        .ok_or(PlanError::NoPreset(l))
}

/// Preset row when one exists, greedy plan otherwise.
pub fn preset_or_plan(l: usize) -> Result<CrtPlan, PlanError> {
    preset_plan(l).or_else(|_| plan(l))
}

fn min_power_exponent(l: usize, odd_lcm: &BigUint) -> usize {
    let target = BigUint::one() << (2 * l);
    let mut e0 = (2 * l).saturating_sub(odd_lcm.bits() as usize).max(1);
    while e0 > 1 && (odd_lcm << (e0 - 1)) >= target {
        e0 -= 1;
    }
    while (odd_lcm << e0) < target {
        e0 += 1;
    }
    e0
}

/// Greedy planner. For every starting exponent `s <= l` it accumulates the
/// smallest exponents `>= s` coprime to those already chosen; every prefix
/// gets the smallest `e_0 <= l` reaching `lcm >= 2^(2l)`. The prefix with
/// the smallest estimated variable count wins, ties going to smaller
/// exponents.
pub fn plan(l: usize) -> Result<CrtPlan, PlanError> {
    if l < 2 {
        return Err(PlanError::LengthTooSmall(l));
    }
    let target = BigUint::one() << (2 * l);
    let mut best: Option<(u64, CrtPlan)> = None;
    for start in 2..=l {
        let mut chosen: Vec<usize> = Vec::new();
        let mut odd_lcm = BigUint::one();
        for e in start..=l {
            if chosen.iter().any(|&c| c.gcd(&e) != 1) {
                continue;
            }
            chosen.push(e);
            odd_lcm = odd_lcm.lcm(&mersenne(e)).lcm(&fermat(e));
            let e0 = min_power_exponent(l, &odd_lcm);
            if e0 <= l {
                let candidate = CrtPlan::new(l, e0, chosen.clone());
                let cost = crate::reducer::estimate_crt_size(&candidate).variables;
                if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    best = Some((cost, candidate));
                }
            }
            if odd_lcm >= target {
                break;
            }
        }
    }
    let (_, plan) = best.expect("l >= 2 admits the plan e=2, e0=1 or better");
    debug_assert!(validate_plan(&plan).is_ok());
    Ok(plan)
}

/// Checks every plan invariant, reporting each violation separately.
pub fn validate_plan(plan: &CrtPlan) -> Result<(), Vec<PlanViolation>> {
    let mut v = Vec::new();
    if plan.l < 2 {
        v.push(PlanViolation::LengthTooSmall(plan.l));
    }
    if plan.e0 < 1 {
        v.push(PlanViolation::PowerExponentTooSmall(plan.e0));
    }
    for (i, &e) in plan.exponents.iter().enumerate() {
        if e < 2 {
            v.push(PlanViolation::ExponentTooSmall {
                index: i + 1,
                value: e,
            });
        }
        if e > plan.l {
            v.push(PlanViolation::ExponentExceedsLength {
                value: e,
                l: plan.l,
            });
        }
    }
    for (i, &a) in plan.exponents.iter().enumerate() {
        for &b in &plan.exponents[i + 1..] {
            let g = a.gcd(&b);
            if g != 1 {
                v.push(PlanViolation::NotCoprime { a, b, gcd: g });
            }
        }
    }

    // Pairwise gcd of the odd moduli is 1 or 3, and m_0 is coprime to all.
    let one = BigUint::one();
    let three = BigUint::from(3u32);
    let moduli = plan.moduli();
    for (i, a) in moduli.iter().enumerate() {
        for b in &moduli[i + 1..] {
            let g = a.gcd(b);
            let allowed = if i == 0 {
                g == one
            } else {
                g == one || g == three
            };
            if !allowed {
                v.push(PlanViolation::ModulusGcd {
                    a: a.clone(),
                    b: b.clone(),
                    gcd: g,
                });
            }
        }
    }

    let actual = lcm_by_folding(&moduli);
    if actual != plan.lcm {
        v.push(PlanViolation::LcmMismatch {
            stored_bits: plan.lcm.bits(),
            actual_bits: actual.bits(),
        });
    }
    if actual < BigUint::one() << (2 * plan.l) {
        v.push(PlanViolation::InsufficientCapacity {
            required_bits: 2 * plan.l,
        });
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Residues of the target `x` under each modulus of a plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueSet {
    /// `x mod 2^e0`.
    pub x0: BigUint,
    /// `(x mod (2^e_i - 1), x mod (2^e_i + 1))` per exponent.
    pub pairs: Vec<(BigUint, BigUint)>,
}

pub fn residues(x: &BigUint, plan: &CrtPlan) -> Result<ResidueSet, PlanError> {
    if x.bits() > 2 * plan.l as u64 {
        return Err(PlanError::TargetOutOfRange {
            bits: x.bits(),
            limit: 2 * plan.l,
        });
    }
    Ok(ResidueSet {
        x0: x % plan.power_modulus(),
        pairs: plan
            .exponents
            .iter()
            .map(|&e| (x % mersenne(e), x % fermat(e)))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_rows() {
        let p = preset_plan(50).unwrap();
        assert_eq!((p.e0, p.exponents.clone()), (27, vec![5, 7, 8, 9, 11]));
        let p = preset_plan(30).unwrap();
        assert_eq!((p.e0, p.exponents.clone()), (16, vec![4, 5, 7, 9]));
        let p = preset_plan(256).unwrap();
        assert_eq!(p.e0, 62);
        assert_eq!(p.exponents, vec![7, 11, 13, 17, 19, 23, 25, 27, 29, 31, 32]);
        assert_eq!(preset_plan(33), Err(PlanError::NoPreset(33)));
    }

    #[test]
    fn serialization() {
        let p = preset_plan(50).unwrap();
        assert_eq!(p.to_string(), "l=50 e0=27 e=5,7,8,9,11");
        assert_eq!("l=50 e0=27 e=5,7,8,9,11".parse::<CrtPlan>().unwrap(), p);
        assert!("l=50 e0=27".parse::<CrtPlan>().is_err());
        assert!("l=50 e0=x e=5".parse::<CrtPlan>().is_err());
        assert_eq!("l=2 e0=4 e=".parse::<CrtPlan>().unwrap().k(), 0);
    }

    #[test]
    fn non_coprime_exponents_rejected() {
        let p = CrtPlan::new(40, 30, vec![4, 6]);
        let errs = validate_plan(&p).unwrap_err();
        assert!(errs.contains(&PlanViolation::NotCoprime { a: 4, b: 6, gcd: 2 }));
    }

    #[test]
    fn tampered_lcm_detected() {
        let mut p = preset_plan(30).unwrap();
        p.lcm += 1u32;
        assert!(matches!(
            validate_plan(&p).unwrap_err()[0],
            PlanViolation::LcmMismatch { .. }
        ));
    }

    #[test]
    fn insufficient_capacity_detected() {
        let p = CrtPlan::new(30, 1, vec![2, 3]);
        assert_eq!(
            validate_plan(&p),
            Err(vec![PlanViolation::InsufficientCapacity {
                required_bits: 60
            }])
        );
    }

    #[test]
    fn residues_of_143() {
        let p = CrtPlan::new(4, 4, vec![2, 3]);
        let r = residues(&BigUint::from(143u32), &p).unwrap();
        assert_eq!(r.x0, BigUint::from(15u32));
        let pairs: Vec<(u32, u32)> = r
            .pairs
            .iter()
            .map(|(a, b)| (a.try_into().unwrap(), b.try_into().unwrap()))
            .collect();
        assert_eq!(pairs, vec![(2, 3), (3, 8)]);
        let zero = residues(&BigUint::zero(), &p).unwrap();
        assert!(zero.x0.is_zero() && zero.pairs.iter().all(|(a, b)| a.is_zero() && b.is_zero()));
        assert!(residues(&BigUint::from(256u32), &p).is_err());
    }

    #[test]
    fn heuristic_understates_l50_row() {
        let p = preset_plan(50).unwrap();
        assert!(p.heuristic_capacity() < 100.0);
        assert!(p.has_capacity());
    }

    #[test]
    fn tiny_plans() {
        for l in 2..=8 {
            let p = plan(l).unwrap();
            assert_eq!(validate_plan(&p), Ok(()), "{p}");
            assert!(p.k() >= 1);
        }
        assert_eq!(plan(1), Err(PlanError::LengthTooSmall(1)));
    }
}
