mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use qcheck::frontends::{parse_ql, parse_qosfsa, serialize_ql, serialize_qosfsa};
use qcheck::gchor::Chor;
use qcheck::ql::Formula;

#[test]
fn fixtures_are_fixpoints() {
    for f in ["example1.qosfsa", "intro.qosfsa", "model_extraction.qosfsa", "aws_pop.qosfsa"] {
        let sys = parse_qosfsa(&fixture(f)).unwrap();
        let text = serialize_qosfsa(&sys);
        assert_eq!(parse_qosfsa(&text).unwrap(), sys, "{f}");
        assert_eq!(serialize_qosfsa(&parse_qosfsa(&text).unwrap()), text, "{f}");
    }
}

#[test]
fn repeat_and_false_sugar() {
    let f = parse_ql("[ repeat { A -> B : m } ] false").unwrap();
    let Formula::Necessarily(g, body) = &f else { panic!("{f:?}") };
    assert!(matches!(g, Chor::Seq(_, b) if matches!(**b, Chor::Star(_))));
    assert_eq!(**body, Formula::not(Formula::True));
    assert_eq!(parse_ql(&serialize_ql(&f)).unwrap(), f);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_systems_round_trip(seed in any::<u64>()) {
        let rs = random_system(&mut ChaCha8Rng::seed_from_u64(seed));
        let sys = parse_qosfsa(&rs.text).unwrap();
        prop_assert_eq!(parse_qosfsa(&serialize_qosfsa(&sys)).unwrap(), sys);
    }

    #[test]
    fn random_formulas_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rs = random_system(&mut rng);
        let f = random_formula(&mut rng, &rs, 4);
        let text = serialize_ql(&f);
        prop_assert_eq!(parse_ql(&text).unwrap(), f, "{}", text);
    }
}
