//! Seeded generators of small models and transformations, for property
//! tests and the acceptance suite.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::expr::{Expr, VarRef};
use crate::intervention::{enumerate_all, Intervention, InterventionMap};
use crate::limits::Limits;
use crate::maps::{AssignmentMap, ContextMap, StateMap};
use crate::model::{AllowedInterventions, CausalModel, Signature, VariableDecl};
use crate::space::Space;
use crate::Value;

#[derive(Debug, Clone, Copy)]
pub struct ModelShape {
    pub max_exogenous: usize,
    pub max_endogenous: usize,
    pub domain_size: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape { max_exogenous: 2, max_endogenous: 3, domain_size: 2 }
    }
}

fn table_over(vars: Vec<VarRef>, sig: &Signature, out: impl FnMut(&[Value]) -> Value) -> Expr {
    let mut out = out;
    if vars.is_empty() {
        return Expr::Lit(out(&[]));
    }
    let space = Space::new(vars.iter().map(|r| sig.decl(*r).domain.clone()).collect());
    let rows: BTreeMap<Vec<Value>, Value> = space
        .iter()
        .map(|k| {
            let v = out(&k);
            (k, v)
        })
        .collect();
    Expr::Table { vars, rows }
}

/// An acyclic model whose equations are random lookup tables. Variables are
/// declared in a random order relative to the causal one; every allowed
/// intervention is permitted.
pub fn random_model(rng: &mut impl Rng, shape: ModelShape) -> CausalModel {
    let n_exo = rng.gen_range(1..=shape.max_exogenous.max(1));
    let n_endo = rng.gen_range(1..=shape.max_endogenous.max(1));
    let d = shape.domain_size.max(1);
    let exo = (1..=n_exo).map(|k| VariableDecl::range(format!("U{k}"), d)).collect();
    let endo = (1..=n_endo).map(|k| VariableDecl::range(format!("X{k}"), d)).collect();
    let sig = Signature::new(exo, endo).expect("generated names are valid");
    let mut order: Vec<usize> = (0..n_endo).collect();
    order.shuffle(rng);
    let mut equations = vec![Expr::Lit(0); n_endo];
    for (pos, &x) in order.iter().enumerate() {
        let mut vars: Vec<VarRef> = (0..n_exo).filter(|_| rng.gen_bool(0.5)).map(VarRef::Exo).collect();
        let mut earlier: Vec<usize> = order[..pos].iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        earlier.sort();
        vars.extend(earlier.into_iter().map(VarRef::Endo));
        equations[x] = table_over(vars, &sig, |_| rng.gen_range(0..d as Value));
    }
    CausalModel::new(sig, equations, AllowedInterventions::All).expect("generated model is well formed")
}

/// A random subset of all interventions, each kept with probability `p`.
pub fn random_interventions(
    rng: &mut impl Rng,
    model: &CausalModel,
    p: f64,
    limits: &Limits,
) -> Result<Vec<Intervention>> {
    Ok(enumerate_all(model, limits)?.into_iter().filter(|_| rng.gen_bool(p)).collect())
}

/// A low model, a high model, `τ` and `ω`, with the allowed sets set so that
/// `ω` is onto the high ones.
#[derive(Debug, Clone)]
pub struct Quadruple {
    pub low: CausalModel,
    pub high: CausalModel,
    pub tau: StateMap,
    pub omega: InterventionMap,
}

/// A high model read off `low` by keeping an ancestrally closed set of
/// variables and relabeling every value by a random bijection, together
/// with the induced `τ`, `ω` (on `low_allowed`) and a compatible `τ_U`.
#[derive(Debug, Clone)]
pub struct Derived {
    pub high: CausalModel,
    pub tau: StateMap,
    pub omega: InterventionMap,
    pub tau_u: ContextMap,
    pub kept: Vec<usize>,
}

fn random_perm(rng: &mut impl Rng, domain: &[Value]) -> BTreeMap<Value, Value> {
    let mut image = domain.to_vec();
    image.shuffle(rng);
    domain.iter().copied().zip(image).collect()
}

fn invert(p: &BTreeMap<Value, Value>) -> BTreeMap<Value, Value> {
    p.iter().map(|(a, b)| (*b, *a)).collect()
}

pub fn derive_high(rng: &mut impl Rng, low: &CausalModel, low_allowed: &[Intervention]) -> Result<Derived> {
    let sig = low.signature();
    let n = sig.endogenous().len();
    let mut kept: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
    if kept.is_empty() {
        kept.insert(rng.gen_range(0..n));
    }
    // close under syntactic endogenous parents
    let mut stack: Vec<usize> = kept.iter().copied().collect();
    while let Some(k) = stack.pop() {
        for r in low.equations()[k].refs() {
            if let VarRef::Endo(p) = r {
                if kept.insert(p) {
                    stack.push(p);
                }
            }
        }
    }
    let kept: Vec<usize> = kept.into_iter().collect();
    let pos: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let sigma: Vec<BTreeMap<Value, Value>> = sig.exogenous().iter().map(|d| random_perm(rng, &d.domain)).collect();
    let pi: BTreeMap<usize, BTreeMap<Value, Value>> =
        kept.iter().map(|&k| (k, random_perm(rng, &sig.endogenous()[k].domain))).collect();

    let exo: Vec<VariableDecl> =
        sig.exogenous().iter().map(|d| VariableDecl::new(format!("W{}", &d.name[1..]), d.domain.clone())).collect();
    let endo: Vec<VariableDecl> = kept
        .iter()
        .map(|&k| VariableDecl::new(format!("Y{}", pos[&k] + 1), sig.endogenous()[k].domain.clone()))
        .collect();
    let high_sig = Signature::new(exo, endo)?;
    let mut equations = Vec::new();
    for &k in &kept {
        let eq = &low.equations()[k];
        let refs: Vec<VarRef> = eq.refs().into_iter().collect();
        let high_refs: Vec<VarRef> = refs
            .iter()
            .map(|r| match *r {
                VarRef::Exo(j) => VarRef::Exo(j),
                VarRef::Endo(p) => VarRef::Endo(pos[&p]),
            })
            .collect();
        let mut exo_vals = vec![0; sig.exogenous().len()];
        let mut endo_vals = vec![0; n];
        let mut failure = None;
        let e = table_over(high_refs, &high_sig, |key| {
            for (r, v) in refs.iter().zip(key) {
                match *r {
                    VarRef::Exo(j) => exo_vals[j] = invert(&sigma[j])[v],
                    VarRef::Endo(p) => endo_vals[p] = invert(&pi[&p])[v],
                }
            }
            match eq.eval(&exo_vals, &endo_vals) {
                Ok(out) => pi[&k].get(&out).copied().unwrap_or(out),
                Err(err) => {
                    failure.get_or_insert(err);
                    0
                }
            }
        });
        if let Some(err) = failure {
            return Err(crate::error::Error::Eval { var: sig.endogenous()[k].name.clone(), source: err });
        }
        equations.push(e);
    }

    let relabel = |i: &Intervention| {
        Intervention::from_pairs(
            i.pairs().iter().filter(|(k, _)| pos.contains_key(k)).map(|&(k, v)| (pos[&k], pi[&k][&v])),
        )
    };
    let mut omega = InterventionMap::new();
    for i in low_allowed {
        omega.insert(i.clone(), relabel(i)?);
    }
    let mut high_allowed: Vec<Intervention> = omega.iter().map(|(_, h)| h.clone()).collect();
    high_allowed.sort();
    high_allowed.dedup();
    let high = CausalModel::new(high_sig, equations, AllowedInterventions::List(high_allowed))?;
    let tau = AssignmentMap::exprs(
        kept.iter()
            .map(|&k| Expr::Table {
                vars: vec![VarRef::Endo(k)],
                rows: pi[&k].iter().map(|(a, b)| (vec![*a], *b)).collect(),
            })
            .collect(),
    );
    let tau_u = AssignmentMap::exprs(
        sigma
            .iter()
            .enumerate()
            .map(|(j, s)| Expr::Table {
                vars: vec![VarRef::Exo(j)],
                rows: s.iter().map(|(a, b)| (vec![*a], *b)).collect(),
            })
            .collect(),
    );
    Ok(Derived { high, tau, omega, tau_u, kept })
}

/// Changes one output row of one equation of `m` to a different value.
pub fn perturb(rng: &mut impl Rng, m: &CausalModel) -> Result<CausalModel> {
    let sig = m.signature();
    let k = rng.gen_range(0..sig.endogenous().len());
    let domain = &sig.endogenous()[k].domain;
    let mut equations = m.equations().to_vec();
    let refs: Vec<VarRef> = equations[k].refs().into_iter().collect();
    let old = equations[k].clone();
    let mut exo_vals = vec![0; sig.exogenous().len()];
    let mut endo_vals = vec![0; sig.endogenous().len()];
    let space = Space::new(refs.iter().map(|r| sig.decl(*r).domain.clone()).collect());
    let target = rng.gen_range(0..space.size().unwrap_or(1).max(1) as usize);
    let shift = rng.gen_range(1..domain.len().max(2));
    let mut row = 0;
    let mut failure = None;
    equations[k] = table_over(refs.clone(), sig, |key| {
        for (r, v) in refs.iter().zip(key) {
            match *r {
                VarRef::Exo(j) => exo_vals[j] = *v,
                VarRef::Endo(p) => endo_vals[p] = *v,
            }
        }
        let out = old.eval(&exo_vals, &endo_vals).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            domain[0]
        });
        let this = row;
        row += 1;
        if this == target && domain.len() > 1 {
            let at = domain.iter().position(|d| *d == out).unwrap_or(0);
            domain[(at + shift) % domain.len()]
        } else {
            out
        }
    });
    if let Some(err) = failure {
        return Err(crate::error::Error::Eval { var: sig.endogenous()[k].name.clone(), source: err });
    }
    CausalModel::new(sig.clone(), equations, m.allowed().clone())
}

/// One of three constructions, chosen at random: a derived high model, a
/// perturbed derived one, or an unrelated random high model read through a
/// projection.
pub fn random_quadruple(rng: &mut impl Rng, shape: ModelShape, limits: &Limits) -> Result<Quadruple> {
    let low_all = random_model(rng, shape);
    let mut allowed = random_interventions(rng, &low_all, 0.3, limits)?;
    if allowed.is_empty() {
        allowed.push(Intervention::empty());
    }
    let low = low_all.with_allowed(AllowedInterventions::List(allowed.clone()));
    match rng.gen_range(0..3) {
        0 => {
            let d = derive_high(rng, &low, &allowed)?;
            Ok(Quadruple { low, high: d.high, tau: d.tau, omega: d.omega })
        }
        1 => {
            let d = derive_high(rng, &low, &allowed)?;
            Ok(Quadruple { low, high: perturb(rng, &d.high)?, tau: d.tau, omega: d.omega })
        }
        _ => {
            let d = derive_high(rng, &low, &allowed)?;
            let other = random_model(rng, ModelShape { max_endogenous: 1, ..shape });
            // an unrelated model over the same signature as the derived one
            let n = d.high.signature().endogenous().len();
            let mut equations = d.high.equations().to_vec();
            let sig = d.high.signature().clone();
            let j = rng.gen_range(0..n);
            let refs_ok =
                other.equations()[0].refs().iter().all(|r| matches!(r, VarRef::Exo(x) if *x < sig.exogenous().len()));
            if refs_ok && sig.endogenous()[j].domain == other.signature().endogenous()[0].domain {
                equations[j] = other.equations()[0].clone();
            }
            let high = CausalModel::new(sig, equations, d.high.allowed().clone())?;
            Ok(Quadruple { low, high, tau: d.tau, omega: d.omega })
        }
    }
}

/// Two composable transformations `M1 → M2 → M3`, each built as a derived
/// model (and sometimes perturbed), with the allowed set of `M2` equal to
/// the image of the first `ω`.
#[derive(Debug, Clone)]
pub struct Chain {
    pub m1: CausalModel,
    pub m2: CausalModel,
    pub m3: CausalModel,
    pub tau1: StateMap,
    pub omega1: InterventionMap,
    pub tau2: StateMap,
    pub omega2: InterventionMap,
}

pub fn random_chain(rng: &mut impl Rng, shape: ModelShape, limits: &Limits) -> Result<Chain> {
    let m1_all = random_model(rng, shape);
    let mut allowed = random_interventions(rng, &m1_all, 0.4, limits)?;
    if allowed.is_empty() {
        allowed.push(Intervention::empty());
    }
    let m1 = m1_all.with_allowed(AllowedInterventions::List(allowed.clone()));
    let first = derive_high(rng, &m1, &allowed)?;
    let m2 = if rng.gen_bool(0.2) { perturb(rng, &first.high)? } else { first.high };
    let m2_allowed = m2.allowed_list(limits)?;
    let second = derive_high(rng, &m2, &m2_allowed)?;
    let m3 = if rng.gen_bool(0.2) { perturb(rng, &second.high)? } else { second.high };
    Ok(Chain { m1, m2, m3, tau1: first.tau, omega1: first.omega, tau2: second.tau, omega2: second.omega })
}
