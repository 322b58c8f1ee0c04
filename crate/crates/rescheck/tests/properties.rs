use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use rescheck::automata::{
    glue_dfa, history_dfa, lift_to_joint, pad_pair, product, restrict, to_dfa, to_nfa, Track,
};
use rescheck::checkers::{same_env_until_divergence, Checker, EnvModel};
use rescheck::games::{agent_win_region, env_forcing_region, GameArena};
use rescheck::ltlf::{history_to_env_spec, parse, prime_copy, render, satisfies, AtomPartition, Letter};
use rescheck::oracle::gen;
use rescheck::responsibility::{Kind, Responsibility};
use rescheck::strategies::{env_transducer_dfa, is_play_of, strategy_dfa, History};
use rescheck::Automaton;

fn wr() -> AtomPartition {
    AtomPartition::new(&["w"], &["r"]).unwrap()
}

fn words(p: &AtomPartition, max: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for l in 0..p.num_letters() as Letter {
                let mut v: Vec<Letter> = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_then_parse_gives_core_form(seed in any::<u64>()) {
        let p = AtomPartition::new(&["a", "b"], &["x"]).unwrap();
        let f = gen::formula(&mut rng(seed), &p, 12);
        let g = parse(&render(&f), &p).unwrap();
        prop_assert_eq!(&g, &f.expand());
        prop_assert_eq!(parse(&render(&g), &p).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn priming_keeps_size(seed in any::<u64>()) {
        let p = wr();
        let f = gen::formula(&mut rng(seed), &p, 10);
        prop_assert_eq!(prime_copy(&f, &p).size(), f.size());
    }

    #[test]
    fn dfa_agrees_with_semantics(seed in any::<u64>()) {
        let p = wr();
        let f = gen::formula(&mut rng(seed), &p, 8);
        let d = to_dfa(&f, &p);
        let n = to_nfa(&f, &p);
        for w in words(&p, 4).into_iter().filter(|w| !w.is_empty()) {
            let truth = satisfies(&f, &p, &w).unwrap();
            prop_assert_eq!(d.accepts(&w), truth, "{} on {:?}", render(&f), w);
            prop_assert_eq!(n.accepts(&w), truth);
        }
    }

    #[test]
    fn product_is_intersection(seed in any::<u64>()) {
        let p = wr();
        let mut r = rng(seed);
        let (f, g) = (gen::formula(&mut r, &p, 6), gen::formula(&mut r, &p, 6));
        let (a, b) = (to_nfa(&f, &p), to_dfa(&g, &p));
        let prod = product(&a, &b).unwrap();
        prop_assert!(prod.pairs.len() <= a.num_states() * b.num_states());
        for w in words(&p, 3) {
            prop_assert_eq!(prod.automaton.accepts(&w), a.accepts(&w) && b.accepts(&w));
        }
    }

    #[test]
    fn restricted_walks_stay_in_region(seed in any::<u64>()) {
        let p = wr();
        let mut r = rng(seed);
        let spec = gen::formula(&mut r, &p, 6);
        let env = EnvModel::new(&spec, &p);
        let kept = restrict(&env.raw, &env.region);
        for _ in 0..20 {
            let mut s = kept.dfa.initial();
            let mut raw = env.raw.initial();
            for _ in 0..6 {
                let l = r.gen_range(0..p.num_letters() as Letter);
                let Some(t) = kept.dfa.step(s, l) else { break };
                raw = env.raw.step(raw, l).unwrap();
                prop_assert!(env.region[raw]);
                s = t;
            }
        }
    }

    #[test]
    fn history_dfa_matches_env_spec(seed in any::<u64>()) {
        let p = wr();
        let mut r = rng(seed);
        let a = gen::strategy(&mut r, &p, 4);
        let h = gen::history(&mut r, &p, &a);
        let d = history_dfa(&h, &p);
        prop_assert!(d.num_states() <= h.len() + 3);
        let eh = history_to_env_spec(&h, &p).unwrap();
        for w in words(&p, h.len() + 2).into_iter().filter(|w| !w.is_empty()) {
            let every_prefix = (1..=w.len()).all(|k| satisfies(&eh, &p, &w[..k]).unwrap());
            prop_assert_eq!(d.accepts(&w), every_prefix);
        }
    }

    #[test]
    fn strategy_dfa_accepts_exactly_the_plays(seed in any::<u64>()) {
        let p = wr();
        let a = gen::strategy(&mut rng(seed), &p, 4);
        let d = strategy_dfa(&a, &p);
        for w in words(&p, a.max_play_length() + 1) {
            prop_assert_eq!(d.accepts(&w), is_play_of(&w, &a));
        }
    }

    #[test]
    fn env_machine_dfa_accepts_its_answers(seed in any::<u64>()) {
        let p = wr();
        let e = gen::env_machine(&mut rng(seed), &p, 3);
        let d = env_transducer_dfa(&e, &p);
        for w in words(&p, 3).into_iter().filter(|w| !w.is_empty()) {
            let mut s = e.initial();
            let mut follows = true;
            for &l in &w {
                let (y, x) = p.split(l);
                let (answer, next) = e.respond(s, y);
                follows &= answer == x;
                s = next;
            }
            prop_assert_eq!(d.accepts(&w), follows);
        }
    }

    #[test]
    fn lifted_automaton_reads_its_track(seed in any::<u64>()) {
        let p = wr();
        let mut r = rng(seed);
        let f = gen::formula(&mut r, &p, 6);
        let d = to_dfa(&f, &p);
        let (l0, l1) = (
            lift_to_joint(&d, &p, Track::Unprimed),
            lift_to_joint(&d, &p, Track::Primed),
        );
        let ws = words(&p, 2);
        for a in &ws {
            for b in &ws {
                if a.is_empty() && b.is_empty() {
                    continue;
                }
                let joint = pad_pair(&p, a, b);
                prop_assert_eq!(l0.accepts(&joint), !a.is_empty() && d.accepts(a));
                prop_assert_eq!(l1.accepts(&joint), !b.is_empty() && d.accepts(b));
            }
        }
    }

    #[test]
    fn determinacy_on_random_arenas(seed in any::<u64>()) {
        let p = wr();
        let mut r = rng(seed);
        let d = gen::arena(&mut r, &p, 12);
        let goals: Vec<bool> = d.finals().to_vec();
        let g = GameArena::with_goals(d.clone(), goals);
        let (win, force) = (agent_win_region(&g), env_forcing_region(&g));
        let reach = d.reachable();
        for s in 0..d.num_states() {
            if reach[s] {
                prop_assert!(win[s] != force[s], "state {}", s);
            }
        }
    }
}

#[test]
fn glue_accepts_pairs_sharing_the_environment_until_divergence() {
    let p = wr();
    let g = glue_dfa(&p);
    let ws: Vec<_> = words(&p, 3).into_iter().filter(|w| !w.is_empty()).collect();
    for a in &ws {
        for b in &ws {
            let expected = a == b || same_env_until_divergence(&p, a, b);
            assert_eq!(g.accepts(&pad_pair(&p, a, b)), expected, "{a:?} {b:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn strategy_classes_form_a_chain(seed in any::<u64>()) {
        let p = wr();
        let mut r = rng(seed);
        let goal = gen::formula(&mut r, &p, 8);
        let spec = gen::spec(&mut r, &p, 4);
        let a = gen::strategy(&mut r, &p, 4);
        let c = Checker::new(&p, &spec).unwrap();
        let win = c.check_win(&goal, &a).unwrap().decision;
        let dom = c.check_dom(&goal, &a).unwrap().decision;
        let be = c.check_be(&goal, &a).unwrap().decision;
        let weak = c.check_weak(&goal, &a).unwrap().decision;
        let exists = c.exists_weak(&goal).unwrap().decision;
        prop_assert!(!win || dom);
        prop_assert!(!dom || be);
        prop_assert!(!weak || exists);
        prop_assert!(!win || weak);
    }

    #[test]
    fn inexcusable_implies_passive(seed in any::<u64>()) {
        let p = wr();
        let mut r = rng(seed);
        let goal = gen::formula(&mut r, &p, 8);
        let spec = gen::spec(&mut r, &p, 4);
        let a = gen::strategy(&mut r, &p, 4);
        let h = gen::history(&mut r, &p, &a);
        let resp = Responsibility::new(&p, &spec).unwrap();
        let ipr = resp.evaluate(Kind::IprAnt, &goal, &a, None, None).unwrap().decision;
        let pr = resp.evaluate(Kind::PrAnt, &goal, &a, None, None).unwrap().decision;
        prop_assert!(!ipr || pr);
        if let (Ok(ipr), Ok(pr)) = (
            resp.evaluate(Kind::IprAttr, &goal, &a, Some(&h), None),
            resp.evaluate(Kind::PrAttr, &goal, &a, Some(&h), None),
        ) {
            prop_assert!(!ipr.decision || pr.decision);
        }
    }
}

#[test]
fn history_dfa_stays_linear() {
    let p = wr();
    let h = History::new((0..200).map(|i| (i % 2, (i / 3) % 2)).collect()).unwrap();
    assert_eq!(history_dfa(&h, &p).num_states(), 203);
}
