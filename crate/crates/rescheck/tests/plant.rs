use rescheck::checkers::{Checker, Witness};
use rescheck::plant::*;
use rescheck::responsibility::Responsibility;
use rescheck::Formula;

fn not(f: Formula) -> Formula {
    Formula::not(f)
}

#[test]
fn strategy_classes() {
    let c = Checker::new(&partition(), &e1()).unwrap();
    assert!(c.check_win(&phi1(), &sigma1()).unwrap().decision);
    let v = c.check_win(&phi1(), &sigma3()).unwrap();
    assert!(!v.decision);
    match v.witness {
        Some(Witness::Trace(t)) => assert!(t.iter().all(|&l| l == 0)),
        other => panic!("unexpected witness {other:?}"),
    }
    assert!(c.check_weak(&not(phi1()), &sigma3()).unwrap().decision);
    assert!(c.check_weak(&phi3(), &sigma3()).unwrap().decision);
    assert!(!c.check_weak(&phi3(), &sigma1()).unwrap().decision);
    assert!(c.check_dom(&phi3(), &sigma3()).unwrap().decision);
    assert!(!c.check_dom(&phi2(), &sigma2()).unwrap().decision);
    assert!(c.check_be(&phi2(), &sigma2()).unwrap().decision);
    assert!(c.check_be(&phi2(), &sigma3()).unwrap().decision);
    assert!(!c.check_be(&phi3(), &sigma1()).unwrap().decision);
    assert!(c.exists_weak(&not(phi1())).unwrap().decision);
}

#[test]
fn responsibility_verdicts() {
    let r = Responsibility::new(&partition(), &e1()).unwrap();
    assert!(!r.anticipate_inexcusable(&not(phi2()), &sigma2()).unwrap().decision);
    assert!(!r.anticipate_inexcusable(&not(phi2()), &sigma3()).unwrap().decision);
    assert!(r.anticipate_inexcusable(&not(phi3()), &sigma1()).unwrap().decision);
    assert!(r.anticipate_passive(&not(phi2()), &sigma2()).unwrap().decision);
    assert!(!r.anticipate_passive(&not(phi3()), &sigma3()).unwrap().decision);
    assert!(r.active(&phi1(), &sigma1()).unwrap().decision);
    assert!(!r.active(&phi1(), &sigma3()).unwrap().decision);
    assert!(!r.active(&Formula::True, &sigma1()).unwrap().decision);
    assert!(r
        .attribute_passive_vs_env(&not(phi2()), &sigma2(), &rain_evening_only())
        .unwrap()
        .decision);
    let h = history_sigma2_evening_rain();
    assert!(r.attribute_passive(&not(phi2()), &sigma2(), &h).unwrap().decision);
}
