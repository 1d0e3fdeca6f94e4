//! Decision diagram canonicity and the one-hot action pipeline.

mod common;

use aobs_core::acting::apply_action;
use aobs_core::bdd::{Bdd, BddRef, OneHot};
use aobs_core::Store;
use common::*;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const NV: u32 = 6;

#[derive(Debug, Clone)]
enum Formula {
    Var(u32),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    fn eval(&self, bits: u32) -> bool {
        match self {
            Formula::Var(i) => bits >> i & 1 == 1,
            Formula::Not(f) => !f.eval(bits),
            Formula::And(a, b) => a.eval(bits) && b.eval(bits),
            Formula::Or(a, b) => a.eval(bits) || b.eval(bits),
        }
    }

    fn build(&self, bdd: &mut Bdd) -> BddRef {
        match self {
            Formula::Var(i) => bdd.var(*i),
            Formula::Not(f) => {
                let x = f.build(bdd);
                bdd.not(x)
            }
            Formula::And(a, b) => {
                let (x, y) = (a.build(bdd), b.build(bdd));
                bdd.and(x, y)
            }
            Formula::Or(a, b) => {
                let (x, y) = (a.build(bdd), b.build(bdd));
                bdd.or(x, y)
            }
        }
    }

    fn table(&self) -> u64 {
        (0..1u32 << NV).fold(0, |t, bits| t | (u64::from(self.eval(bits)) << bits))
    }
}

fn gen_formula(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return Formula::Var(rng.random_range(0..NV));
    }
    match rng.random_range(0..3) {
        0 => Formula::Not(Box::new(gen_formula(rng, depth - 1))),
        1 => Formula::And(Box::new(gen_formula(rng, depth - 1)), Box::new(gen_formula(rng, depth - 1))),
        _ => Formula::Or(Box::new(gen_formula(rng, depth - 1)), Box::new(gen_formula(rng, depth - 1))),
    }
}

proptest! {
    #[test]
    fn equal_functions_share_a_node(seed: u64) {
        let mut r = rng(seed);
        let mut bdd = Bdd::new();
        let fs: Vec<Formula> = (0..12).map(|_| gen_formula(&mut r, 5)).collect();
        let refs: Vec<BddRef> = fs.iter().map(|f| f.build(&mut bdd)).collect();
        for (i, f) in fs.iter().enumerate() {
            for bits in 0..1u32 << NV {
                prop_assert_eq!(bdd.eval(refs[i], |v| bits >> v & 1 == 1), f.eval(bits));
            }
            for j in 0..i {
                prop_assert_eq!(refs[i] == refs[j], f.table() == fs[j].table());
            }
        }
    }

    #[test]
    fn support_tracks_oracle(seed: u64, n in 1u32..5, nv in 2i64..4, depth in 0u32..3, steps in 1usize..6) {
        let mut r = rng(seed);
        let t = gen_tree(&mut r, &all_vars(n), nv, depth);
        let mut st = Store::new();
        let mut s = build_aobs(&mut st, &t);
        let mut oracle = tree_pbs(&t);
        let enc = OneHot::new(nv as u32);
        let mut bdd = Bdd::new();
        let mut b = enc.encode_support(&mut bdd, &oracle.support()).unwrap();
        for _ in 0..steps {
            let c = random_condition(&mut r, n, nv, 1);
            let a = random_action(&mut r, n, nv);
            s = apply_action(&mut st, &s, &c, &a).unwrap().state;
            oracle = oracle.apply_action(&c, &a).unwrap();
            let (bc, ba) = (enc.encode_condition(&mut bdd, &c).unwrap(), enc.encode_action(&mut bdd, &a).unwrap());
            b = bdd.apply_action(b, bc, ba, &enc.action_bools(&a));
            let from_oracle = enc.encode_support(&mut bdd, &oracle.support()).unwrap();
            prop_assert_eq!(b, from_oracle);
            let from_aobs = enc.encode_support(&mut bdd, &st.enumerate_states(s.root).unwrap().support()).unwrap();
            prop_assert_eq!(b, from_aobs);
        }
    }
}
