use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crtsat::cnf::{self, CnfFormula, Formula};
use crtsat::crt;
use crtsat::numgen::{self, NumgenError};
use crtsat::reducer::{self, Reduction};

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn instance(x: u64) -> (Reduction, CnfFormula) {
    let r = reducer::build_crt_test_circuit(&big(x), &crt::preset_or_plan(4).unwrap()).unwrap();
    let f = cnf::to_4cnf(&cnf::tseitin_extended(&r.circuit).unwrap());
    (r, f)
}

#[test]
fn primes_are_reproducible_and_prime() {
    let a = numgen::gen_prime(8, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    let b = numgen::gen_prime(8, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    assert_eq!(a, b);
    assert!(a >= big(128) && a <= big(255));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for l in 2..=20 {
        for _ in 0..5 {
            let p = numgen::gen_prime(l, &mut rng).unwrap();
            let p64: u64 = (&p).try_into().unwrap();
            assert!(is_prime(p64), "l={l}: {p64}");
            assert_eq!(p.bits(), l as u64);
        }
    }
    let big_prime = numgen::gen_prime(256, &mut rng).unwrap();
    assert_eq!(big_prime.bits(), 256);
}

#[test]
fn instances() {
    for seed in 0..200 {
        let inst = numgen::make_instance(4, seed).unwrap();
        assert!(inst.p <= inst.q);
        assert!([big(11), big(13)].contains(&inst.p) && [big(11), big(13)].contains(&inst.q));
        assert!([big(121), big(143), big(169)].contains(&inst.x));
    }
    assert_eq!(numgen::make_instance(64, 5), numgen::make_instance(64, 5));
    for seed in 0..100 {
        let l = 2 + seed as usize % 40;
        let inst = numgen::make_instance(l, seed).unwrap();
        let bits = inst.x.bits();
        assert!(bits == 2 * l as u64 || bits == 2 * l as u64 - 1, "l={l}");
    }
}

#[test]
fn brute_force_factoring() {
    assert_eq!(
        numgen::brute_force_factor(&big(77)).unwrap(),
        Some((big(7), big(11)))
    );
    assert_eq!(numgen::brute_force_factor(&big(13)).unwrap(), None);
    assert_eq!(numgen::brute_force_factor(&big(1)).unwrap(), None);
    assert!(matches!(
        numgen::brute_force_factor(&(big(1) << 41)),
        Err(NumgenError::GuardExceeded { .. })
    ));
    for l in 2..=16 {
        let inst = numgen::make_instance(l, l as u64).unwrap();
        assert_eq!(
            numgen::brute_force_factor(&inst.x).unwrap(),
            Some((inst.p, inst.q))
        );
    }
}

#[test]
fn sat_input_enumeration() {
    let set =
        |x: u64| -> Vec<(u64, u64)> { numgen::brute_force_sat_inputs(&instance(x).0).unwrap() };
    assert_eq!(set(77), vec![(7, 11), (11, 7)]);
    assert_eq!(set(121), vec![(11, 11)]);
    assert_eq!(set(97), vec![]);
    let inst = numgen::make_instance(11, 0).unwrap();
    let r = reducer::build_naive_test_circuit(&inst.x, 11).unwrap();
    assert!(numgen::brute_force_sat_inputs(&r).is_err());
}

#[test]
fn witnesses() {
    let (r, f) = instance(77);
    let w1 = numgen::extract_witness(&r, &f, &big(7), &big(11)).unwrap();
    let w2 = numgen::extract_witness(&r, &f, &big(11), &big(7)).unwrap();
    assert!(f.eval(&w1.assignment).unwrap() && f.eval(&w2.assignment).unwrap());
    assert_ne!(w1, w2);
    let ext = cnf::tseitin_extended(&r.circuit).unwrap();
    assert!(numgen::extract_witness(&r, &ext, &big(7), &big(11)).is_ok());
    assert!(numgen::extract_witness(&r, &f, &big(5), &big(5)).is_err());
    assert_eq!(numgen::Witness::from_text(&w1.to_text()).unwrap(), w1);
}

#[test]
fn negation() {
    let (r, f) = instance(77);
    let negated = numgen::negate_solutions(&f, &r, &big(7), &big(11)).unwrap();
    assert_eq!(negated.clauses.len(), f.clauses.len() + 2);
    assert!(!numgen::satisfiable_by_propagation(&negated, &r).unwrap());
    let w = numgen::extract_witness(&r, &f, &big(7), &big(11)).unwrap();
    let falsified: Vec<usize> = (f.clauses.len()..negated.clauses.len())
        .filter(|&i| !negated.clauses[i].iter().any(|l| l.eval(&w.assignment)))
        .collect();
    assert_eq!(falsified.len(), 1);

    let (r, f) = instance(121);
    let negated = numgen::negate_solutions(&f, &r, &big(11), &big(11)).unwrap();
    assert_eq!(negated.clauses.len(), f.clauses.len() + 1);
    assert!(!numgen::satisfiable_by_propagation(&negated, &r).unwrap());
    assert!(numgen::negate_solutions(&f, &r, &big(11), &big(13)).is_err());
}

#[test]
fn solution_set_law() {
    for l in 2..=6usize {
        let primes: Vec<u64> = (1u64 << (l - 1)..1 << l).filter(|&n| is_prime(n)).collect();
        for (i, &p) in primes.iter().enumerate() {
            for &q in &primes[i..] {
                let r =
                    reducer::build_crt_test_circuit(&big(p * q), &crt::preset_or_plan(l).unwrap())
                        .unwrap();
                let found: BTreeSet<_> = numgen::brute_force_sat_inputs(&r)
                    .unwrap()
                    .into_iter()
                    .collect();
                let expected: BTreeSet<_> = [(p, q), (q, p)].into_iter().collect();
                assert_eq!(found, expected, "l={l} {p}*{q}");
            }
        }
    }
}
