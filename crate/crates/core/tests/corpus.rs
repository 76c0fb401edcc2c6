//! Every bundle's recorded verdicts, one test per bundle.

use causal_abstraction::corpus;
use causal_abstraction::report::CheckKind;
use causal_abstraction::Limits;

const KINDS: [CheckKind; 5] =
    [CheckKind::Exact, CheckKind::Uniform, CheckKind::TauAbstraction, CheckKind::Strong, CheckKind::Constructive];

fn verdicts_match(name: &str) {
    let b = corpus::by_name(name).unwrap();
    let limits = Limits::default();
    let mut wrong = Vec::new();
    for kind in KINDS {
        let Some(expected) = b.expected.get(kind) else { continue };
        let r = b.check(kind, &limits).unwrap().expect("bundle carries the inputs its expectations need");
        if r.holds != expected {
            wrong.push(format!("expected {expected}, got {}", r.summary(b.low.signature(), b.high.signature())));
        }
    }
    assert!(wrong.is_empty(), "{name}: {}", wrong.join("; "));
}

macro_rules! bundle_tests {
    ($($test:ident => $name:literal),* $(,)?) => {
        $(#[test] fn $test() { verdicts_match($name) })*

        #[test]
        fn every_bundle_has_a_test() {
            let covered = [$($name),*];
            assert_eq!(covered.len(), corpus::NAMES.len());
            for n in corpus::NAMES {
                assert!(covered.contains(n), "{n}");
            }
        }
    };
}

bundle_tests! {
    example3 => "example3",
    example3_reverse => "example3-reverse",
    example4_omega12 => "example4-omega12",
    example4_omega21 => "example4-omega21",
    example4_identity => "example4-identity",
    example5 => "example5",
    appendix_induced => "appendix-induced",
    appendix_x3 => "appendix-x3",
    pixel_two_counter => "pixel-two-counter",
    pixel_merged => "pixel-merged",
    voting => "voting",
    energy => "energy",
    averaging => "averaging",
}

#[test]
fn every_expectation_is_checkable() {
    for b in corpus::all().unwrap() {
        for kind in KINDS {
            if b.expected.get(kind).is_some() {
                assert!(b.check(kind, &Limits::default()).unwrap().is_some(), "{} {}", b.name, kind.name());
            }
        }
    }
}

#[test]
fn energy_fails_on_the_abstraction_condition() {
    let b = corpus::build_energy().unwrap();
    let r = b.check(CheckKind::Strong, &Limits::default()).unwrap().unwrap();
    assert_eq!(r.failed, Some(causal_abstraction::report::Condition::Correspondence));
}
