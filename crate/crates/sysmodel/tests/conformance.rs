#[path = "support/conformance.rs"]
mod conformance;

use conformance::{conforms, corpus, Step};

#[test]
fn corpus_has_twelve_of_each() {
    let c = corpus();
    for step in [Step::ClassToClass, Step::StateToState, Step::SequenceToState] {
        let of = |accept: bool| c.iter().filter(|k| k.step == step && k.expect.is_empty() == accept).count();
        assert_eq!((of(true), of(false)), (12, 12), "{}", step.label());
    }
}

#[test]
fn every_case_yields_its_rule_codes() {
    let failures: Vec<String> = corpus().iter().filter_map(|c| conforms(c).err()).collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
