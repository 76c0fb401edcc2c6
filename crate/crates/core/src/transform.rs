//! Exact and uniform transformations, compatible context maps, and
//! composition of transformations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::intervention::{check_omega, Intervention, InterventionMap};
use crate::limits::Limits;
use crate::maps::{decl_space, AssignmentMap, ContextMap, StateMap};
use crate::model::{ensure_valid, CausalModel, EndoState};
use crate::prob::{interventional_dist, tau_pushforward, ContextDistribution, Distribution};
use crate::report::{CheckKind, CheckReport, Condition, Counterexample, Witness};
use crate::Value;

/// Checks the models and `τ`, and returns both allowed sets.
pub(crate) fn prepare(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    limits: &Limits,
) -> Result<(Vec<Intervention>, Vec<Intervention>)> {
    ensure_valid(low, limits)?;
    ensure_valid(high, limits)?;
    tau.check(low.signature().endogenous(), high.signature().endogenous(), limits)?;
    Ok((low.allowed_list(limits)?, high.allowed_list(limits)?))
}

fn require_omega(omega: &InterventionMap, i_l: &[Intervention], i_h: &[Intervention]) -> Result<()> {
    let r = check_omega(omega, i_l, i_h)?;
    if !r.surjective {
        return Err(Error::input(format!(
            "intervention map is not surjective onto the allowed high interventions ({} unreached)",
            r.unreached.len()
        )));
    }
    if !r.order_preserving {
        return Err(Error::input(format!(
            "intervention map is not order-preserving ({} violating pairs)",
            r.order_violations.len()
        )));
    }
    Ok(())
}

/// `Pr_H^{ω(i)} = τ(Pr_L^i)` for every allowed low intervention `i`.
pub fn check_exact(
    low: &CausalModel,
    dl: &ContextDistribution,
    high: &CausalModel,
    dh: &ContextDistribution,
    tau: &StateMap,
    omega: &InterventionMap,
    limits: &Limits,
) -> Result<CheckReport> {
    let (i_l, i_h) = prepare(low, high, tau, limits)?;
    require_omega(omega, &i_l, &i_h)?;
    exact_on(low, dl, high, dh, tau, omega, &i_l)
}

fn exact_on(
    low: &CausalModel,
    dl: &ContextDistribution,
    high: &CausalModel,
    dh: &ContextDistribution,
    tau: &StateMap,
    omega: &InterventionMap,
    i_l: &[Intervention],
) -> Result<CheckReport> {
    for i in i_l {
        let hi = omega.get(i).expect("omega checked total");
        let ph = interventional_dist(high, dh, hi)?;
        let pushed = tau_pushforward(tau, &interventional_dist(low, dl, i)?)?;
        if ph != pushed {
            let states: BTreeSet<&Vec<Value>> = ph.support().chain(pushed.support()).collect();
            let state = states.into_iter().find(|s| ph.get(s) != pushed.get(s)).expect("distributions differ");
            return Ok(CheckReport::fail(
                CheckKind::Exact,
                Condition::DistributionsAgree,
                Counterexample::DistributionMismatch {
                    intervention: i.clone(),
                    high_intervention: hi.clone(),
                    state: state.clone(),
                    high: ph.get(state),
                    pushed: pushed.get(state),
                },
            ));
        }
    }
    Ok(CheckReport::pass(CheckKind::Exact, Witness::default()))
}

/// `τ(M_L(u_L, i)) = M_H(τ_U(u_L), ω(i))` for every low context and every
/// allowed low intervention.
pub fn check_compatible(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    tau_u: &ContextMap,
    limits: &Limits,
) -> Result<CheckReport> {
    let (i_l, _) = prepare(low, high, tau, limits)?;
    omega.apply_all(&i_l)?;
    tau_u.check(low.signature().exogenous(), high.signature().exogenous(), limits)?;
    for u in low.signature().context_space().iter() {
        let uh = tau_u.apply(&u)?;
        for i in &i_l {
            let abstracted = tau.apply(&low.solve_under(&u, i)?)?;
            let hs = high.solve_under(&uh, omega.get(i).unwrap())?;
            if abstracted != hs {
                return Ok(CheckReport::fail(
                    CheckKind::Compatible,
                    Condition::Compatible,
                    Counterexample::Incompatible {
                        context: u,
                        high_context: uh,
                        intervention: i.clone(),
                        abstracted,
                        high: hs,
                    },
                ));
            }
        }
    }
    Ok(CheckReport::pass(CheckKind::Compatible, Witness { tau_u: Some(tau_u.clone()), ..Witness::default() }))
}

/// For each low context, every high context that corresponds to it: the
/// two agree, through `τ` and `ω`, on every allowed low intervention.
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub low_contexts: Vec<Vec<Value>>,
    pub high_contexts: Vec<Vec<Value>>,
    pub interventions: Vec<Intervention>,
    /// Indices into `high_contexts`, ascending, per low context.
    pub candidates: Vec<Vec<usize>>,
    /// `high_states[i][h]` is `M_H(u_H, ω(i))`.
    high_states: Vec<Vec<EndoState>>,
    low_images: Vec<Vec<EndoState>>,
}

pub fn correspondents(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    limits: &Limits,
) -> Result<Correspondence> {
    let (i_l, _) = prepare(low, high, tau, limits)?;
    correspondents_on(low, high, tau, omega, &i_l, limits)
}

fn correspondents_on(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    i_l: &[Intervention],
    limits: &Limits,
) -> Result<Correspondence> {
    let images = omega.apply_all(i_l)?;
    let ls = low.signature().context_space();
    let hs = high.signature().context_space();
    limits.check_assignments("low context space", ls.size())?;
    limits.check_assignments("high context space", hs.size())?;
    let low_contexts: Vec<Vec<Value>> = ls.iter().collect();
    let high_contexts: Vec<Vec<Value>> = hs.iter().collect();

    let mut by_high: BTreeMap<&Intervention, Vec<EndoState>> = BTreeMap::new();
    for hi in &images {
        if !by_high.contains_key(hi) {
            let states = high_contexts.iter().map(|u| high.solve_under(u, hi)).collect::<Result<_>>()?;
            by_high.insert(hi, states);
        }
    }
    let high_states: Vec<Vec<EndoState>> = images.iter().map(|hi| by_high[hi].clone()).collect();

    let mut classes: HashMap<Vec<&EndoState>, Vec<usize>> = HashMap::new();
    for h in 0..high_contexts.len() {
        let profile: Vec<&EndoState> = high_states.iter().map(|col| &col[h]).collect();
        classes.entry(profile).or_default().push(h);
    }

    let mut low_images = Vec::with_capacity(low_contexts.len());
    let mut candidates = Vec::with_capacity(low_contexts.len());
    for u in &low_contexts {
        let profile: Vec<EndoState> = i_l.iter().map(|i| tau.apply(&low.solve_under(u, i)?)).collect::<Result<_>>()?;
        let key: Vec<&EndoState> = profile.iter().collect();
        candidates.push(classes.get(&key).cloned().unwrap_or_default());
        low_images.push(profile);
    }
    Ok(Correspondence { low_contexts, high_contexts, interventions: i_l.to_vec(), candidates, high_states, low_images })
}

impl Correspondence {
    /// A minimal set of interventions on which no high context matches low
    /// context `l`, found by deletion.
    pub fn conflicting_interventions(&self, l: usize) -> Vec<Intervention> {
        let words = self.high_contexts.len().div_ceil(64);
        let rows: Vec<Vec<u64>> = (0..self.interventions.len())
            .map(|i| {
                let mut bits = vec![0u64; words];
                for (h, s) in self.high_states[i].iter().enumerate() {
                    if *s == self.low_images[l][i] {
                        bits[h / 64] |= 1 << (h % 64);
                    }
                }
                bits
            })
            .collect();
        let unsat = |set: &[usize]| {
            let mut acc = vec![u64::MAX; words];
            if let Some(last) = acc.last_mut() {
                let rem = self.high_contexts.len() % 64;
                if rem != 0 {
                    *last = (1u64 << rem) - 1;
                }
            }
            for &i in set {
                for (a, b) in acc.iter_mut().zip(&rows[i]) {
                    *a &= b;
                }
            }
            acc.iter().all(|w| *w == 0)
        };
        let mut set: Vec<usize> = (0..self.interventions.len()).collect();
        let mut k = 0;
        while k < set.len() {
            let mut trial = set.clone();
            trial.remove(k);
            if unsat(&trial) {
                set = trial;
            } else {
                k += 1;
            }
        }
        set.into_iter().map(|i| self.interventions[i].clone()).collect()
    }

    /// Maps each low context to a high context agreeing with it on the most
    /// interventions, first one on ties. Compatible whenever one exists.
    pub fn best_effort_map(&self) -> ContextMap {
        let table = (0..self.low_contexts.len())
            .map(|l| {
                let score = |h: usize| {
                    (0..self.interventions.len()).filter(|&i| self.high_states[i][h] == self.low_images[l][i]).count()
                };
                let best = (0..self.high_contexts.len()).rev().max_by_key(|&h| score(h)).unwrap_or(0);
                (self.low_contexts[l].clone(), self.high_contexts[best].clone())
            })
            .collect();
        AssignmentMap::table(table)
    }

    /// Assigns every low context a correspondent so that every high context
    /// is used, or returns the high contexts a maximum matching leaves out.
    pub fn surjective_assignment(&self) -> std::result::Result<Vec<usize>, Vec<usize>> {
        let n_high = self.high_contexts.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_high];
        for (l, cands) in self.candidates.iter().enumerate() {
            for &h in cands {
                adj[h].push(l);
            }
        }
        let mut low_match: Vec<Option<usize>> = vec![None; self.low_contexts.len()];
        let mut uncovered = Vec::new();
        for h in 0..n_high {
            let mut seen = vec![false; self.low_contexts.len()];
            if !augment(h, &adj, &mut low_match, &mut seen) {
                uncovered.push(h);
            }
        }
        if !uncovered.is_empty() {
            return Err(uncovered);
        }
        Ok(low_match.iter().zip(&self.candidates).map(|(m, c)| m.unwrap_or(c[0])).collect())
    }
}

/// Kuhn's augmenting path search from high context `h`.
fn augment(h: usize, adj: &[Vec<usize>], low_match: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &l in &adj[h] {
        if seen[l] {
            continue;
        }
        seen[l] = true;
        if low_match[l].is_none() || augment(low_match[l].unwrap(), adj, low_match, seen) {
            low_match[l] = Some(h);
            return true;
        }
    }
    false
}

/// Looks for a context map compatible with `τ` and `ω` on the allowed low
/// interventions. Each low context takes its first correspondent; with
/// `require_surjective`, a matching first covers every high context.
pub fn find_compatible_tau_u(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    require_surjective: bool,
    limits: &Limits,
) -> Result<CheckReport> {
    let (i_l, _) = prepare(low, high, tau, limits)?;
    find_on(low, high, tau, omega, &i_l, require_surjective, limits)
}

pub(crate) fn find_on(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    i_l: &[Intervention],
    require_surjective: bool,
    limits: &Limits,
) -> Result<CheckReport> {
    let c = correspondents_on(low, high, tau, omega, i_l, limits)?;
    if let Some(l) = c.candidates.iter().position(|v| v.is_empty()) {
        return Ok(CheckReport::fail(
            CheckKind::Compatible,
            Condition::Correspondence,
            Counterexample::NoCorrespondent {
                context: c.low_contexts[l].clone(),
                conflicting: c.conflicting_interventions(l),
            },
        ));
    }
    let choice = if require_surjective {
        match c.surjective_assignment() {
            Ok(v) => v,
            Err(uncovered) => {
                return Ok(CheckReport::fail(
                    CheckKind::Compatible,
                    Condition::SurjectiveContextMap,
                    Counterexample::NonSurjectiveContextMap {
                        uncovered: uncovered.into_iter().map(|h| c.high_contexts[h].clone()).collect(),
                    },
                ))
            }
        }
    } else {
        c.candidates.iter().map(|v| v[0]).collect()
    };
    let table = c.low_contexts.iter().zip(choice).map(|(u, h)| (u.clone(), c.high_contexts[h].clone())).collect();
    Ok(CheckReport::pass(
        CheckKind::Compatible,
        Witness { tau_u: Some(AssignmentMap::table(table)), omega: Some(omega.restrict(i_l)?), partition: None },
    ))
}

/// Uniform transformation, decided by the existence of a compatible
/// context map.
pub fn check_uniform(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    limits: &Limits,
) -> Result<CheckReport> {
    let (i_l, i_h) = prepare(low, high, tau, limits)?;
    require_omega(omega, &i_l, &i_h)?;
    Ok(find_on(low, high, tau, omega, &i_l, false, limits)?.lift(CheckKind::Uniform))
}

/// A random distribution with denominator at most `max_denominator`,
/// placed by dropping unit masses on uniformly chosen points.
pub fn random_distribution(points: &[Vec<Value>], max_denominator: u32, rng: &mut impl Rng) -> Distribution {
    let d = rng.gen_range(1..=max_denominator.max(1));
    let mut counts: BTreeMap<usize, i64> = BTreeMap::new();
    for _ in 0..d {
        *counts.entry(rng.gen_range(0..points.len())).or_default() += 1;
    }
    Distribution::new(counts.into_iter().map(|(k, c)| (points[k].clone(), crate::prob::ratio(c, d as i64))))
        .expect("unit masses sum to one")
}

pub const DEFAULT_PROBE_DENOMINATOR: u32 = 64;

/// Samples low distributions and checks that pushing each through `τ_U`
/// gives an exact transformation.
#[allow(clippy::too_many_arguments)]
pub fn uniform_distribution_probe(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    omega: &InterventionMap,
    tau_u: &ContextMap,
    samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<CheckReport> {
    let (i_l, i_h) = prepare(low, high, tau, limits)?;
    require_omega(omega, &i_l, &i_h)?;
    let ls = low.signature().context_space();
    limits.check_assignments("low context space", ls.size())?;
    let points: Vec<Vec<Value>> = ls.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for sample in 0..samples {
        let dl = random_distribution(&points, DEFAULT_PROBE_DENOMINATOR, &mut rng);
        let dh = dl.pushforward(|u| tau_u.apply(u))?;
        let r = exact_on(low, &dl, high, &dh, tau, omega, &i_l)?;
        if !r.holds {
            return Ok(CheckReport::fail(
                CheckKind::Probe,
                Condition::DistributionsAgree,
                Counterexample::ProbeFailure {
                    sample,
                    distribution: dl,
                    inner: Box::new(r.counterexample.expect("failing report has a counterexample")),
                },
            ));
        }
    }
    Ok(CheckReport::pass(CheckKind::Probe, Witness { tau_u: Some(tau_u.clone()), ..Witness::default() }))
}

/// Chains a low→middle transformation with a middle→high one. The state
/// map is tabulated over the low model's states.
pub fn compose_transformations(
    low: &CausalModel,
    lower: (&StateMap, &InterventionMap),
    upper: (&StateMap, &InterventionMap),
    limits: &Limits,
) -> Result<(StateMap, InterventionMap)> {
    let space = decl_space(low.signature().endogenous());
    let table = lower.0.then(upper.0, &space, limits)?.to_table(&space, limits)?;
    Ok((AssignmentMap::table(table), lower.1.then(upper.1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervention::enumerate_all;
    use crate::model::{ModelBuilder, VariableDecl};
    use crate::prob::ratio;

    fn m1(allowed_x1: bool) -> CausalModel {
        let b = ModelBuilder::new()
            .exo(VariableDecl::binary("U1"))
            .exo(VariableDecl::binary("U2"))
            .endo(VariableDecl::binary("X1"), "U1")
            .endo(VariableDecl::binary("X2"), "X1");
        if allowed_x1 {
            b.allow(&[("X1", 0)]).allow(&[("X1", 1)]).build().unwrap()
        } else {
            b.build().unwrap()
        }
    }

    fn m2(allowed: &[&[(&str, Value)]]) -> CausalModel {
        let mut b = ModelBuilder::new()
            .exo(VariableDecl::binary("U1"))
            .exo(VariableDecl::binary("U2"))
            .endo(VariableDecl::binary("X1"), "U1")
            .endo(VariableDecl::binary("X2"), "U2")
            .allow_none();
        for a in allowed {
            b = b.allow(a);
        }
        b.build().unwrap()
    }

    fn iv(m: &CausalModel, pairs: &[(&str, Value)]) -> Intervention {
        Intervention::from_named(m.signature(), pairs.iter().copied()).unwrap()
    }

    #[test]
    fn identity_is_exact_and_uniform() {
        let m = m1(false);
        let l = Limits::default();
        let all = enumerate_all(&m, &l).unwrap();
        let id = InterventionMap::identity(&all);
        let tau = AssignmentMap::identity(2);
        let d = Distribution::new(vec![(vec![0, 0], ratio(1, 3)), (vec![1, 1], ratio(2, 3))]).unwrap();
        assert!(check_exact(&m, &d, &m, &d, &tau, &id, &l).unwrap().holds);
        let r = check_uniform(&m, &m, &tau, &id, &l).unwrap();
        assert!(r.holds);
        let tu = r.witness.tau_u.unwrap();
        // U2 is irrelevant, so the first correspondent has U2 = 0
        for u in m.signature().context_space().iter() {
            assert_eq!(tu.apply(&u).unwrap(), vec![u[0], 0]);
        }
    }

    #[test]
    fn example4_uniform_with_joint_omega() {
        let low = m1(true);
        let high = m2(&[&[("X1", 0), ("X2", 0)], &[("X1", 1), ("X2", 1)]]);
        let omega: InterventionMap =
            [0, 1].iter().map(|&x| (iv(&low, &[("X1", x)]), iv(&high, &[("X1", x), ("X2", x)]))).collect();
        let l = Limits::default();
        let r = check_uniform(&low, &high, &AssignmentMap::identity(2), &omega, &l).unwrap();
        assert!(r.holds, "{r:?}");
        let tu = r.witness.tau_u.unwrap();
        let probe =
            uniform_distribution_probe(&low, &high, &AssignmentMap::identity(2), &omega, &tu, 50, 7, &l).unwrap();
        assert!(probe.holds);
    }

    #[test]
    fn example4_identity_omega_fails() {
        let low = m1(true);
        let high = m2(&[&[("X1", 0)], &[("X1", 1)]]);
        let omega = InterventionMap::identity(&low.allowed_list(&Limits::default()).unwrap());
        let r = check_uniform(&low, &high, &AssignmentMap::identity(2), &omega, &Limits::default()).unwrap();
        assert!(!r.holds);
        assert_eq!(r.failed, Some(Condition::Correspondence));
        match r.counterexample.unwrap() {
            Counterexample::NoCorrespondent { context, conflicting } => {
                assert_eq!(context, vec![0, 0]);
                assert_eq!(conflicting, vec![iv(&low, &[("X1", 0)]), iv(&low, &[("X1", 1)])]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn omega_precondition_is_an_input_error() {
        let low = m1(true);
        let high = m2(&[&[("X1", 0)], &[("X1", 1)], &[("X2", 0)]]);
        let omega = InterventionMap::identity(&low.allowed_list(&Limits::default()).unwrap());
        assert!(matches!(
            check_uniform(&low, &high, &AssignmentMap::identity(2), &omega, &Limits::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn compatibility_counterexample() {
        let low = m1(true);
        let high = m2(&[&[("X1", 0)], &[("X1", 1)]]);
        let omega = InterventionMap::identity(&low.allowed_list(&Limits::default()).unwrap());
        let tu = AssignmentMap::identity(2);
        let r = check_compatible(&low, &high, &AssignmentMap::identity(2), &omega, &tu, &Limits::default()).unwrap();
        assert!(!r.holds);
        assert!(matches!(r.counterexample, Some(Counterexample::Incompatible { .. })));
    }

    #[test]
    fn surjective_matching_beats_greedy() {
        // U=1 and U=2 both correspond to W=1 and W=2; taking the first
        // correspondent leaves W=2 unused.
        let low = ModelBuilder::new()
            .exo(VariableDecl::range("U", 3))
            .endo(VariableDecl::range("X", 3), "U")
            .allow_none()
            .allow(&[])
            .build()
            .unwrap();
        let high = ModelBuilder::new()
            .exo(VariableDecl::range("W", 3))
            .endo(VariableDecl::binary("Y"), "ite(W == 0, 0, 1)")
            .allow_none()
            .allow(&[])
            .build()
            .unwrap();
        let tau = AssignmentMap::exprs(vec![crate::expr::parse("ite(X == 0, 0, 1)", &|s| {
            (s == "X").then_some(crate::expr::VarRef::Endo(0))
        })
        .unwrap()]);
        let omega = InterventionMap::identity(&[Intervention::empty()]);
        let l = Limits::default();
        let greedy = find_compatible_tau_u(&low, &high, &tau, &omega, false, &l).unwrap();
        let g = greedy.witness.tau_u.unwrap();
        assert_eq!(g.apply(&[1]).unwrap(), vec![1]);
        assert_eq!(g.apply(&[2]).unwrap(), vec![1]);
        let surj = find_compatible_tau_u(&low, &high, &tau, &omega, true, &l).unwrap();
        assert!(surj.holds);
        let s = surj.witness.tau_u.unwrap();
        let image: BTreeSet<_> = (0..3).map(|u| s.apply(&[u]).unwrap()).collect();
        assert_eq!(image.len(), 3);
    }

    #[test]
    fn random_distributions_are_normalised_and_reproducible() {
        let pts: Vec<Vec<Value>> = (0..5).map(|k| vec![k]).collect();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_distribution(&pts, 64, &mut a);
            assert_eq!(x.total(), ratio(1, 1));
            assert!(x.iter().all(|(_, p)| *p.denom() <= 64.into()));
            assert_eq!(x, random_distribution(&pts, 64, &mut b));
        }
    }
}
