//! The acceptance suite: one PASS/FAIL line per criterion, nonzero exit if
//! any fails.

mod common;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use causal_abstraction::abstraction::{
    check_constructive, check_strong_abstraction, check_tau_abstraction, compute_induced_sets, derive_omega_tau,
    restrict_to_induced, search_constructive_partition,
};
use causal_abstraction::corpus::{self, build_pixel, build_voting, PixelVariant};
use causal_abstraction::intervention::{enumerate_all, natural_leq};
use causal_abstraction::model::{check_uev, AllowedInterventions};
use causal_abstraction::prob::{equivalent, to_uev};
use causal_abstraction::random::{random_chain, random_model, random_quadruple, ModelShape};
use causal_abstraction::report::{CheckKind, Condition, Counterexample};
use causal_abstraction::transform::{
    check_uniform, compose_transformations, correspondents, find_compatible_tau_u, random_distribution,
    uniform_distribution_probe,
};
use causal_abstraction::{Intervention, InterventionMap, Result};

use common::{correspondent_exists, limits, omega_tau_brute};

/// Collects the failed expectations of one criterion.
#[derive(Default)]
struct Findings(Vec<String>);

impl Findings {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.0.push(what.into());
        }
    }
}

fn criterion(n: usize, title: &str, budget: Duration, body: impl FnOnce(&mut Findings) -> Result<()>) -> bool {
    let mut f = Findings::default();
    let start = Instant::now();
    let outcome = body(&mut f);
    let elapsed = start.elapsed();
    if let Err(e) = outcome {
        f.0.push(format!("error: {e}"));
    }
    f.expect(elapsed <= budget, format!("took {elapsed:.2?}, budget {budget:.0?}"));
    if f.0.is_empty() {
        println!("PASS {n:>2} {title} ({elapsed:.2?})");
        true
    } else {
        println!("FAIL {n:>2} {title} ({elapsed:.2?}): {}", f.0.join("; "));
        false
    }
}

fn holds(b: &corpus::Bundle, kind: CheckKind) -> Result<bool> {
    Ok(b.check(kind, &limits())?.expect("bundle has the inputs for this check").holds)
}

fn c1(f: &mut Findings) -> Result<()> {
    let (a, b) = corpus::build_example3()?;
    for bundle in [&a, &b] {
        f.expect(holds(bundle, CheckKind::Exact)?, format!("{}: exact transformation does not hold", bundle.name));
        let uniform = bundle.check(CheckKind::Uniform, &limits())?.unwrap();
        if uniform.holds {
            let tau_u = uniform.witness.tau_u.as_ref().unwrap();
            let sig = bundle.low.signature();
            let rows: Vec<String> = sig
                .context_space()
                .iter()
                .map(|u| format!("{}↦{:?}", sig.format_context(&u), tau_u.apply(&u).unwrap()))
                .collect();
            f.expect(false, format!("{}: uniform holds, compatible context map {}", bundle.name, rows.join(", ")));
        }
    }
    Ok(())
}

fn c2(f: &mut Findings) -> Result<()> {
    let e = corpus::build_example4()?;
    f.expect(holds(&e.omega12, CheckKind::Uniform)?, "uniform fails with the forward map");
    f.expect(holds(&e.omega21, CheckKind::Uniform)?, "uniform fails with the backward map");
    f.expect(!holds(&e.identity, CheckKind::Uniform)?, "uniform holds with the identity map");
    for b in [&e.omega12, &e.omega21, &e.identity] {
        f.expect(!holds(b, CheckKind::TauAbstraction)?, format!("{}: tau-abstraction holds", b.name));
    }
    Ok(())
}

fn c3(f: &mut Findings) -> Result<()> {
    let bases = [corpus::example4_m1(AllowedInterventions::All)?, corpus::example4_m2(AllowedInterventions::All)?];
    for seed in 0..10u64 {
        let base = &bases[seed as usize % 2];
        let b = corpus::build_example5_xstar(base, Some(seed))?;
        f.expect(holds(&b, CheckKind::Uniform)?, format!("seed {seed}: uniform fails"));
        let r = check_tau_abstraction(&b.low, &b.high, &b.tau, &limits())?;
        f.expect(
            !r.holds && r.failed == Some(Condition::TauSurjective),
            format!("seed {seed}: tau-abstraction verdict {:?} / {:?}", r.holds, r.failed),
        );
    }
    Ok(())
}

fn c4(f: &mut Findings) -> Result<()> {
    let (first, second) = corpus::build_appendix_example()?;
    let l = limits().with_cross_check();
    let sets = compute_induced_sets(&first.low, &first.high, &first.tau, &l)?;
    let all_low = enumerate_all(&first.low, &l)?;
    let x12 = Intervention::from_named(first.low.signature(), [("X1", 0), ("X2", 0)])?;
    let claimed: Vec<Intervention> = all_low.iter().filter(|i| **i != x12).cloned().collect();
    let ls = first.low.signature();
    for i in &all_low {
        let brute = omega_tau_brute(&first.low, &first.high, &first.tau, i);
        f.expect(
            sets.omega.get(i).cloned() == brute,
            format!("induced map disagrees with brute force on {}", i.display(ls)),
        );
    }
    if sets.low.len() != claimed.len() {
        let extra: Vec<String> =
            sets.undefined.iter().filter(|i| **i != x12).map(|i| i.display(ls).to_string()).collect();
        f.expect(
            false,
            format!(
                "induced low set has {} interventions, not {}; also undefined: {}",
                sets.low.len(),
                claimed.len(),
                extra.join(", ")
            ),
        );
    }
    f.expect(sets.high.len() == 9, format!("induced high set has {} interventions", sets.high.len()));
    f.expect(!holds(&first, CheckKind::TauAbstraction)?, "tau-abstraction holds with the induced low set");
    f.expect(holds(&second, CheckKind::TauAbstraction)?, "tau-abstraction fails with the X3←0 low set");
    Ok(())
}

fn c5(f: &mut Findings) -> Result<()> {
    let two = build_pixel(2, PixelVariant::TwoCounter)?;
    let (ls, hs) = (two.low.signature(), two.high.signature());
    let r = check_tau_abstraction(&two.low, &two.high, &two.tau, &limits())?;
    if !r.holds {
        f.expect(false, format!("two-counter is not a tau-abstraction: {}", r.summary(ls, hs)));
    }
    let s = check_strong_abstraction(&two.low, &two.high, &two.tau, &limits())?;
    let solo = |i: &Intervention| i.len() == 1;
    let names_solo = matches!(&s.counterexample, Some(Counterexample::MissingHighInterventions { missing }) if missing.iter().any(solo));
    f.expect(!s.holds && names_solo, format!("two-counter strong: {}", s.summary(ls, hs)));

    let merged = build_pixel(2, PixelVariant::Merged)?;
    f.expect(holds(&merged, CheckKind::Strong)?, "merged is not strong");
    let searched = search_constructive_partition(&merged.low, &merged.high, &merged.tau, &limits())?;
    f.expect(searched.holds, "merged: no constructive partition found");
    let found = searched.witness.partition.as_ref().map(|(p, _)| p.clone());
    f.expect(found.as_ref() == merged.partition.as_ref(), format!("merged: searched partition {found:?}"));
    Ok(())
}

fn c6(f: &mut Findings) -> Result<()> {
    let b = build_voting(4, 2, 1)?;
    f.expect(holds(&b, CheckKind::Uniform)?, "uniform fails on ad interventions");
    let p = b.partition.as_ref().unwrap();
    let r = check_constructive(&b.low, &b.high, &b.tau, p, None, &limits())?;
    f.expect(r.holds, format!("constructive: {}", r.summary(b.low.signature(), b.high.signature())));
    let x1 = Intervention::from_named(b.low.signature(), [("X1", 1)])?;
    f.expect(derive_omega_tau(&b.low, &b.high, &b.tau, &x1, &limits())?.is_none(), "X1←1 is induced");
    Ok(())
}

fn c7(f: &mut Findings) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 0..100 {
        let m = random_model(&mut rng, ModelShape::default());
        let points: Vec<_> = m.signature().context_space().iter().collect();
        let d = random_distribution(&points, 64, &mut rng);
        let (u, du) = to_uev(&m, &d, &limits())?;
        f.expect(check_uev(&u, &limits())?.holds, format!("model {n}: rewrite is not uev"));
        f.expect(equivalent(&m, &d, &u, &du, None, &limits())?.holds, format!("model {n}: not equivalent"));
    }
    Ok(())
}

fn c8(f: &mut Findings) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut found, mut missing) = (0, 0);
    for n in 0..100u64 {
        let q = random_quadruple(&mut rng, ModelShape::default(), &limits())?;
        let r = find_compatible_tau_u(&q.low, &q.high, &q.tau, &q.omega, false, &limits())?;
        if r.holds {
            found += 1;
            let tau_u = r.witness.tau_u.as_ref().unwrap();
            let p = uniform_distribution_probe(&q.low, &q.high, &q.tau, &q.omega, tau_u, 25, n, &limits())?;
            f.expect(p.holds, format!("quadruple {n}: probe fails with the found context map"));
        } else {
            missing += 1;
            let Some(Counterexample::NoCorrespondent { context, .. }) = &r.counterexample else {
                f.expect(false, format!("quadruple {n}: unexpected failure {:?}", r.failed));
                continue;
            };
            let i_l = q.low.allowed_list(&limits())?;
            f.expect(
                !correspondent_exists(&q.low, &q.high, &q.tau, &q.omega, &i_l, context),
                format!("quadruple {n}: brute force finds a correspondent"),
            );
            let best = correspondents(&q.low, &q.high, &q.tau, &q.omega, &limits())?.best_effort_map();
            let p = uniform_distribution_probe(&q.low, &q.high, &q.tau, &q.omega, &best, 25, n, &limits())?;
            f.expect(!p.holds, format!("quadruple {n}: probe passes without a compatible context map"));
        }
    }
    f.expect(found > 10 && missing > 10, format!("unbalanced sample: {found} found, {missing} missing"));
    Ok(())
}

fn c9(f: &mut Findings) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut chains = 0;
    let mut tried = 0;
    while chains < 50 && tried < 1000 {
        tried += 1;
        let c = random_chain(&mut rng, ModelShape::default(), &limits())?;
        if !check_uniform(&c.m1, &c.m2, &c.tau1, &c.omega1, &limits())?.holds
            || !check_uniform(&c.m2, &c.m3, &c.tau2, &c.omega2, &limits())?.holds
        {
            continue;
        }
        chains += 1;
        let (tau, omega) = compose_transformations(&c.m1, (&c.tau1, &c.omega1), (&c.tau2, &c.omega2), &limits())?;
        f.expect(
            check_uniform(&c.m1, &c.m3, &tau, &omega, &limits())?.holds,
            format!("chain {chains}: composition fails"),
        );
    }
    f.expect(chains == 50, format!("only {chains} uniform chains generated"));
    Ok(())
}

fn c10(f: &mut Findings) -> Result<()> {
    let l = limits();
    for b in corpus::all()? {
        let (ls, hs) = (b.low.signature(), b.high.signature());
        let surjective = b.tau.unreached(ls.endogenous(), hs.endogenous(), &l)?.is_empty();
        if surjective {
            let sets = compute_induced_sets(&b.low, &b.high, &b.tau, &l)?;
            let empty = Intervention::empty();
            f.expect(sets.omega.get(&empty) == Some(&empty), format!("{}: ∅ not mapped to ∅", b.name));
            for v in ls.state_space().iter() {
                let image = Intervention::full(&b.tau.apply(&v)?);
                f.expect(
                    sets.omega.get(&Intervention::full(&v)) == Some(&image),
                    format!("{}: full state {} not mapped to its image", b.name, ls.format_state(&v)),
                );
            }
            for i1 in &sets.low {
                for i2 in &sets.low {
                    if natural_leq(i1, i2) {
                        let (j1, j2) = (sets.omega.get(i1).unwrap(), sets.omega.get(i2).unwrap());
                        f.expect(
                            natural_leq(j1, j2),
                            format!("{}: order not preserved on {} ≼ {}", b.name, i1.display(ls), i2.display(ls)),
                        );
                    }
                }
            }
        }

        // constructive ⇒ strong ⇒ τ-abstraction ⇒ uniform with ω_τ
        let constructive = b.check(CheckKind::Constructive, &l)?.unwrap().holds;
        let strong = check_strong_abstraction(&b.low, &b.high, &b.tau, &l)?.holds;
        f.expect(!constructive || strong, format!("{}: constructive but not strong", b.name));
        if strong {
            let sets = compute_induced_sets(&b.low, &b.high, &b.tau, &l)?;
            let (rl, rh) = restrict_to_induced(&b.low, &b.high, &sets);
            f.expect(
                check_tau_abstraction(&rl, &rh, &b.tau, &l)?.holds,
                format!("{}: strong but the restricted models are not a tau-abstraction", b.name),
            );
        }
        if check_tau_abstraction(&b.low, &b.high, &b.tau, &l)?.holds {
            let i_l = b.low.allowed_list(&l)?;
            let omega: InterventionMap = i_l
                .iter()
                .map(|i| Ok((i.clone(), derive_omega_tau(&b.low, &b.high, &b.tau, i, &l)?.expect("defined on I_L"))))
                .collect::<Result<_>>()?;
            f.expect(
                check_uniform(&b.low, &b.high, &b.tau, &omega, &l)?.holds,
                format!("{}: tau-abstraction but not uniform with the induced map", b.name),
            );
        }
    }
    Ok(())
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "constant maps: exact in both directions, not uniform", s(1), c1),
        criterion(2, "copy versus independent: uniform depends on the intervention map", s(1), c2),
        criterion(3, "switch variable: uniform for every branch, tau not surjective", s(5), c3),
        criterion(4, "or-coarsening: induced sets and tau-abstraction", s(5), c4),
        criterion(5, "pixel counters: tau-abstraction, strong and constructive", s(30), c5),
        criterion(6, "voting blocs: uniform and constructive", s(60), c6),
        criterion(7, "uev rewrite on 100 random models", s(120), c7),
        criterion(8, "context maps agree with distribution probes on 100 quadruples", s(300), c8),
        criterion(9, "composition of 50 uniform chains", s(120), c9),
        criterion(10, "induced-map structure and hierarchy over the corpus", s(120), c10),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
