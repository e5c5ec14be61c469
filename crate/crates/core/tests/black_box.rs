use proptest::prelude::*;
use sysmodel_core::black_box;
use sysmodel_testkit::gen::black_box_case;
use sysmodel_testkit::oracles::black_box_oracle;
use sysmodel_testkit::rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_path_enumeration(seed in any::<u64>()) {
        let case = black_box_case(&mut rng(seed));
        let got = black_box(&case.automaton, &case.init, &case.inputs, case.bound, 1_000_000).ok();
        let want = black_box_oracle(&case.automaton, &case.init, &case.inputs, case.bound);
        prop_assert_eq!(got, want, "{}", case.text);
    }

    #[test]
    fn every_stream_has_bound_ticks(seed in any::<u64>()) {
        let case = black_box_case(&mut rng(seed));
        if let Ok(set) = black_box(&case.automaton, &case.init, &case.inputs, case.bound, 1_000_000) {
            prop_assert!(!set.is_empty());
            prop_assert!(set.iter().all(|s| s.ticks() == case.bound));
        }
    }
}

#[test]
fn short_bound_is_refused() {
    let case = black_box_case(&mut rng(3));
    if !case.inputs.is_empty() {
        assert!(black_box(&case.automaton, &case.init, &case.inputs, case.inputs.len() - 1, 100).is_err());
    }
}
