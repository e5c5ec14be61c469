use proptest::prelude::*;
use sysmodel_testkit::gen::{probe_mutant, refinement_pair, sd_family};
use sysmodel_testkit::rng;

const SEMANTIC: [&str; 2] = ["R-SD-RETARGET", "R-SD-NEWTRANS"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn accepted_steps_include_traces(seed in any::<u64>(), legal in any::<bool>()) {
        let pair = refinement_pair(&mut rng(seed), legal);
        let v = pair.syntactic();
        if v.accepted {
            for rounds in 2..=6 {
                let t = pair.semantic(rounds);
                prop_assert!(t.accepted, "ops {:?} rounds {}\n{}\n{:?}", pair.ops, rounds, t, pair);
            }
        } else {
            prop_assert!(!legal || v.rules().iter().all(|r| !SEMANTIC.contains(r)) || pair.ops.contains(&"silent-loop"), "{}", v);
        }
    }

    #[test]
    fn illegal_edits_are_rejected(seed in any::<u64>()) {
        let pair = refinement_pair(&mut rng(seed), false);
        let v = pair.syntactic();
        prop_assert!(!v.accepted, "ops {:?}\n{:?}", pair.ops, pair);
    }

    #[test]
    fn inclusion_is_reflexive_and_sees_new_outputs(seed in any::<u64>()) {
        let f = sd_family(&mut rng(seed), true);
        prop_assert!(f.check_against_old(&f.old, 3).accepted);
        let v = f.check_against_old(&probe_mutant(&f), 3);
        prop_assert!(!v.accepted);
        prop_assert!(v.witness.as_deref().is_some_and(|w| w.contains("probe()")), "{}", v);
    }
}

#[test]
fn legal_edits_are_mostly_accepted() {
    let accepted = (0..100u64).filter(|s| refinement_pair(&mut rng(*s), true).syntactic().accepted).count();
    assert!(accepted >= 80, "{accepted}");
}
