//! Exact rational distributions over contexts and states, pushforwards,
//! interventional distributions, model equivalence, and the uev encoding.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::{Expr, VarRef};
use crate::intervention::{enumerate_all, Intervention};
use crate::limits::Limits;
use crate::maps::StateMap;
use crate::model::{CausalModel, EndoState, Signature, VariableDecl};
use crate::Value;

/// A finitely supported probability measure on assignments. Zero masses
/// are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Distribution {
    masses: BTreeMap<Vec<Value>, BigRational>,
}

/// A distribution on contexts, `Pr` on `R(U)`.
pub type ContextDistribution = Distribution;
/// A distribution on endogenous states.
pub type StateDistribution = Distribution;

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

impl Distribution {
    /// Validates non-negativity, distinct points and total mass exactly 1.
    pub fn new(entries: impl IntoIterator<Item = (Vec<Value>, BigRational)>) -> Result<Self> {
        let mut masses = BTreeMap::new();
        for (x, p) in entries {
            if p.is_negative() {
                return Err(Error::input(format!("negative probability {p} at {x:?}")));
            }
            if masses.contains_key(&x) {
                return Err(Error::input(format!("point {x:?} listed twice")));
            }
            masses.insert(x, p);
        }
        masses.retain(|_, p| !p.is_zero());
        let d = Distribution { masses };
        let total = d.total();
        if !total.is_one() {
            return Err(Error::input(format!("probabilities sum to {total}, not 1")));
        }
        Ok(d)
    }

    /// Sums the masses of repeated points. Does not check the total.
    pub(crate) fn accumulate(entries: impl IntoIterator<Item = (Vec<Value>, BigRational)>) -> Self {
        let mut masses: BTreeMap<Vec<Value>, BigRational> = BTreeMap::new();
        for (x, p) in entries {
            if !p.is_zero() {
                *masses.entry(x).or_insert_with(BigRational::zero) += p;
            }
        }
        masses.retain(|_, p| !p.is_zero());
        Distribution { masses }
    }

    pub fn point(x: Vec<Value>) -> Self {
        Distribution { masses: [(x, BigRational::one())].into_iter().collect() }
    }

    /// Equal mass on each distinct point.
    pub fn uniform(points: impl IntoIterator<Item = Vec<Value>>) -> Result<Self> {
        let set: BTreeSet<Vec<Value>> = points.into_iter().collect();
        if set.is_empty() {
            return Err(Error::input("uniform distribution over an empty set"));
        }
        let p = ratio(1, set.len() as i64);
        Ok(Distribution { masses: set.into_iter().map(|x| (x, p.clone())).collect() })
    }

    pub fn get(&self, x: &[Value]) -> BigRational {
        self.masses.get(x).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Value>, &BigRational)> {
        self.masses.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Vec<Value>> {
        self.masses.keys()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total(&self) -> BigRational {
        self.masses.values().fold(BigRational::zero(), |a, b| a + b)
    }

    /// The image measure under `f`.
    pub fn pushforward(&self, mut f: impl FnMut(&[Value]) -> Result<Vec<Value>>) -> Result<Self> {
        let mut entries = Vec::with_capacity(self.masses.len());
        for (x, p) in &self.masses {
            entries.push((f(x)?, p.clone()));
        }
        Ok(Self::accumulate(entries))
    }

    /// `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Distribution, w: &BigRational) -> Result<Self> {
        if w.is_negative() || *w > BigRational::one() {
            return Err(Error::input(format!("mixture weight {w} outside [0, 1]")));
        }
        let rest = BigRational::one() - w;
        Ok(Self::accumulate(
            self.iter().map(|(x, p)| (x.clone(), p * w)).chain(other.iter().map(|(x, p)| (x.clone(), p * &rest))),
        ))
    }

    /// Checks that every supported point is a well-typed assignment.
    pub fn check_over(&self, decls: &[VariableDecl]) -> Result<()> {
        for x in self.support() {
            let ok = x.len() == decls.len() && decls.iter().zip(x).all(|(d, v)| d.domain.contains(v));
            if !ok {
                return Err(Error::input(format!("distribution puts mass on ill-typed point {x:?}")));
            }
        }
        Ok(())
    }
}

/// `Pr(v) = Pr({u : M(u) = v})`.
pub fn push_to_states(model: &CausalModel, d: &ContextDistribution) -> Result<StateDistribution> {
    interventional_dist(model, d, &Intervention::empty())
}

/// `Pr^{X←x}(v) = Pr({u : M(u, X←x) = v})`.
pub fn interventional_dist(
    model: &CausalModel,
    d: &ContextDistribution,
    i: &Intervention,
) -> Result<StateDistribution> {
    d.check_over(model.signature().exogenous())?;
    i.check(model.signature().endogenous())?;
    d.pushforward(|u| model.solve_under(u, i))
}

/// `τ(Pr)(v_H) = Pr({v_L : τ(v_L) = v_H})`.
pub fn tau_pushforward(tau: &StateMap, sd: &StateDistribution) -> Result<StateDistribution> {
    sd.pushforward(|v| tau.apply(v))
}

/// The joint outcome of a context under every intervention of a list.
pub type Profile = Vec<EndoState>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub holds: bool,
    /// Interventions compared, as interventions of the first model.
    pub interventions: Vec<Intervention>,
    pub counterexample: Option<ProfileMismatch>,
}

/// A joint outcome with different probability under the two models. States
/// are in the first model's declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileMismatch {
    pub profile: Profile,
    pub left: BigRational,
    pub right: BigRational,
}

/// Position in `b` of each endogenous variable of `a`, after checking that
/// both declare the same names with the same domains.
pub fn match_endogenous(a: &Signature, b: &Signature) -> Result<Vec<usize>> {
    let mismatch = |msg: String| Error::input(format!("endogenous variables differ: {msg}"));
    if a.endogenous().len() != b.endogenous().len() {
        return Err(mismatch(format!("{} versus {} variables", a.endogenous().len(), b.endogenous().len())));
    }
    a.endogenous()
        .iter()
        .map(|d| {
            let j = b.endo_index(&d.name).ok_or_else(|| mismatch(format!("`{}` is missing", d.name)))?;
            let da: BTreeSet<_> = d.domain.iter().collect();
            let db: BTreeSet<_> = b.endogenous()[j].domain.iter().collect();
            if da != db {
                return Err(mismatch(format!("`{}` has different domains", d.name)));
            }
            Ok(j)
        })
        .collect()
}

fn profile_distribution(
    model: &CausalModel,
    d: &ContextDistribution,
    interventions: &[Intervention],
    reorder: impl Fn(EndoState) -> EndoState,
) -> Result<Distribution> {
    d.check_over(model.signature().exogenous())?;
    let mut out: BTreeMap<Profile, BigRational> = BTreeMap::new();
    for (u, p) in d.iter() {
        let profile =
            interventions.iter().map(|i| model.solve_under(u, i).map(&reorder)).collect::<Result<Profile>>()?;
        *out.entry(profile).or_insert_with(BigRational::zero) += p;
    }
    Ok(Distribution { masses: out.into_iter().map(|(k, v)| (k.concat(), v)).collect() })
}

/// Decides `(M1, Pr1) ∼ (M2, Pr2)` by comparing the distributions of the
/// joint outcome under all listed interventions (default: every
/// intervention). Equal profile distributions give every causal formula
/// over those interventions the same probability.
pub fn equivalent(
    m1: &CausalModel,
    d1: &ContextDistribution,
    m2: &CausalModel,
    d2: &ContextDistribution,
    interventions: Option<&[Intervention]>,
    limits: &Limits,
) -> Result<EquivalenceReport> {
    let pos = match_endogenous(m1.signature(), m2.signature())?;
    let list = match interventions {
        Some(l) => l.to_vec(),
        None => enumerate_all(m1, limits)?,
    };
    let translated: Vec<Intervention> = list
        .iter()
        .map(|i| Intervention::from_pairs(i.pairs().iter().map(|&(x, v)| (pos[x], v))))
        .collect::<Result<_>>()?;
    let n = pos.len();
    let p1 = profile_distribution(m1, d1, &list, |s| s)?;
    let p2 = profile_distribution(m2, d2, &translated, |s| pos.iter().map(|&j| s[j]).collect())?;
    if p1 == p2 {
        return Ok(EquivalenceReport { holds: true, interventions: list, counterexample: None });
    }
    let one_sided =
        p1.support().filter(|x| p2.get(x).is_zero()).chain(p2.support().filter(|x| p1.get(x).is_zero())).min().cloned();
    let key = one_sided
        .unwrap_or_else(|| p1.support().find(|x| p1.get(x) != p2.get(x)).cloned().expect("distributions differ"));
    let profile = if n == 0 { vec![vec![]; list.len()] } else { key.chunks(n).map(|c| c.to_vec()).collect() };
    Ok(EquivalenceReport {
        holds: false,
        interventions: list,
        counterexample: Some(ProfileMismatch { left: p1.get(&key), right: p2.get(&key), profile }),
    })
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    let mut name = format!("U_{base}");
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

/// Re-encodes `(M, Pr)` as an equivalent model with unique exogenous
/// variables: each endogenous `Y` gets a private copy `U_Y` of the whole
/// context, coded `0..|R(U)|` in enumeration order, and the distribution
/// sits on the diagonal.
pub fn to_uev(
    model: &CausalModel,
    d: &ContextDistribution,
    limits: &Limits,
) -> Result<(CausalModel, ContextDistribution)> {
    let sig = model.signature();
    d.check_over(sig.exogenous())?;
    let space = sig.context_space();
    let n_ctx = limits.check_assignments("context space", space.size())?;
    let contexts: Vec<Vec<Value>> = space.iter().collect();

    let mut taken: BTreeSet<String> = sig.exogenous().iter().chain(sig.endogenous()).map(|v| v.name.clone()).collect();
    let mut exogenous = Vec::new();
    for y in sig.endogenous() {
        let name = fresh_name(&y.name, &taken);
        taken.insert(name.clone());
        exogenous.push(VariableDecl::range(name, n_ctx));
    }

    let equations = model
        .equations()
        .iter()
        .enumerate()
        .map(|(i, eq)| {
            eq.substitute(&|r| match r {
                VarRef::Exo(j) => Some(Expr::Table {
                    vars: vec![VarRef::Exo(i)],
                    rows: contexts.iter().enumerate().map(|(code, u)| (vec![code as Value], u[j])).collect(),
                }),
                VarRef::Endo(_) => None,
            })
        })
        .collect();
    let new_sig = Signature::new(exogenous, sig.endogenous().to_vec())?;
    let out = CausalModel::new(new_sig, equations, model.allowed().clone())?;
    let k = sig.endogenous().len();
    let dist = d.pushforward(|u| {
        let code = space.index_of(u).expect("context checked against the signature") as Value;
        Ok(vec![code; k])
    })?;
    Ok((out, dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::AssignmentMap;
    use crate::model::{check_uev, ModelBuilder};

    fn m1() -> CausalModel {
        ModelBuilder::new()
            .exo(VariableDecl::binary("U1"))
            .exo(VariableDecl::binary("U2"))
            .endo(VariableDecl::binary("X1"), "U1")
            .endo(VariableDecl::binary("X2"), "X1")
            .build()
            .unwrap()
    }

    fn m2() -> CausalModel {
        ModelBuilder::new()
            .exo(VariableDecl::binary("U1"))
            .exo(VariableDecl::binary("U2"))
            .endo(VariableDecl::binary("X1"), "U1")
            .endo(VariableDecl::binary("X2"), "U2")
            .build()
            .unwrap()
    }

    fn fair(m: &CausalModel) -> Distribution {
        Distribution::uniform(m.signature().context_space().iter()).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(Distribution::new(vec![(vec![0], ratio(1, 2))]).is_err());
        assert!(Distribution::new(vec![(vec![0], ratio(3, 2)), (vec![1], ratio(-1, 2))]).is_err());
        assert!(Distribution::new(vec![(vec![0], ratio(1, 2)), (vec![0], ratio(1, 2))]).is_err());
        let d = Distribution::new(vec![(vec![0], ratio(1, 1)), (vec![1], ratio(0, 1))]).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn fair_coins_through_m1() {
        let m = m1();
        let sd = push_to_states(&m, &fair(&m)).unwrap();
        assert_eq!(sd.len(), 2);
        assert_eq!(sd.get(&[0, 0]), ratio(1, 2));
        assert_eq!(sd.get(&[1, 1]), ratio(1, 2));
        assert_eq!(sd.total(), ratio(1, 1));
    }

    #[test]
    fn intervening_on_x1_fixes_both() {
        let m = m1();
        let i = Intervention::from_named(m.signature(), [("X1", 1)]).unwrap();
        let sd = interventional_dist(&m, &fair(&m), &i).unwrap();
        assert_eq!(sd, Distribution::point(vec![1, 1]));
    }

    #[test]
    fn appendix_tau_pushforward_of_uniform() {
        let names = ["X1", "X2", "X3"];
        let resolve = |s: &str| names.iter().position(|n| *n == s).map(VarRef::Endo);
        let tau = AssignmentMap::exprs(vec![
            crate::expr::parse("X1 || X3", &resolve).unwrap(),
            crate::expr::parse("X2 || X3", &resolve).unwrap(),
        ]);
        let states = crate::space::Space::new(vec![vec![0, 1]; 3]);
        let sd = Distribution::uniform(states.iter()).unwrap();
        let out = tau_pushforward(&tau, &sd).unwrap();
        assert_eq!(out.get(&[0, 0]), ratio(1, 8));
        assert_eq!(out.get(&[1, 0]), ratio(1, 8));
        assert_eq!(out.get(&[0, 1]), ratio(1, 8));
        assert_eq!(out.get(&[1, 1]), ratio(5, 8));
    }

    #[test]
    fn m1_and_m2_differ_on_the_empty_intervention() {
        let (a, b) = (m1(), m2());
        let r = equivalent(&a, &fair(&a), &b, &fair(&b), Some(&[Intervention::empty()]), &Limits::default()).unwrap();
        assert!(!r.holds);
        let c = r.counterexample.unwrap();
        assert_eq!(c.profile, vec![vec![0, 1]]);
        assert_eq!(c.left, ratio(0, 1));
        assert_eq!(c.right, ratio(1, 4));
    }

    #[test]
    fn equivalence_is_insensitive_to_declaration_order() {
        let a = m2();
        let b = ModelBuilder::new()
            .exo(VariableDecl::binary("U1"))
            .exo(VariableDecl::binary("U2"))
            .endo(VariableDecl::binary("X2"), "U2")
            .endo(VariableDecl::binary("X1"), "U1")
            .build()
            .unwrap();
        let r = equivalent(&a, &fair(&a), &b, &fair(&b), None, &Limits::default()).unwrap();
        assert!(r.holds);
        assert_eq!(r.interventions.len(), 9);
    }

    #[test]
    fn mismatched_variables_are_an_error() {
        let a = m1();
        let b = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .endo(VariableDecl::binary("X1"), "U")
            .endo(VariableDecl::range("X2", 3), "U")
            .build()
            .unwrap();
        assert!(equivalent(&a, &fair(&a), &b, &fair(&b), None, &Limits::default()).is_err());
    }

    #[test]
    fn shared_exogenous_to_uev() {
        let m = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .endo(VariableDecl::binary("X1"), "U")
            .endo(VariableDecl::binary("X2"), "U")
            .build()
            .unwrap();
        let l = Limits::default();
        assert!(!check_uev(&m, &l).unwrap().holds);
        let d = fair(&m);
        let (mu, du) = to_uev(&m, &d, &l).unwrap();
        let names: Vec<_> = mu.signature().exogenous().iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["U_X1", "U_X2"]);
        assert!(mu.signature().exogenous().iter().all(|v| v.domain == vec![0, 1]));
        assert_eq!(du.get(&[0, 0]), ratio(1, 2));
        assert_eq!(du.get(&[1, 1]), ratio(1, 2));
        assert_eq!(du.len(), 2);
        assert!(check_uev(&mu, &l).unwrap().holds);
        assert!(equivalent(&m, &d, &mu, &du, None, &l).unwrap().holds);
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let m = ModelBuilder::new()
            .exo(VariableDecl::binary("U_X"))
            .endo(VariableDecl::binary("X"), "U_X")
            .build()
            .unwrap();
        let (mu, _) = to_uev(&m, &fair(&m), &Limits::default()).unwrap();
        assert_eq!(mu.signature().exogenous()[0].name, "U_X_");
    }

    #[test]
    fn mixing_commutes_with_pushforward() {
        let tau = AssignmentMap::exprs(vec![Expr::binary(
            crate::expr::BinaryOp::Add,
            Expr::Var(VarRef::Endo(0)),
            Expr::Var(VarRef::Endo(1)),
        )]);
        let a = Distribution::new(vec![(vec![0, 1], ratio(1, 3)), (vec![1, 1], ratio(2, 3))]).unwrap();
        let b = Distribution::point(vec![1, 0]);
        let w = ratio(1, 4);
        let lhs = tau_pushforward(&tau, &a.mix(&b, &w).unwrap()).unwrap();
        let rhs = tau_pushforward(&tau, &a).unwrap().mix(&tau_pushforward(&tau, &b).unwrap(), &w).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.get(&[1]), ratio(1, 12) + ratio(3, 4));
    }
}
