//! Executable encodings of the worked examples, at desk scale.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstraction::{
    check_constructive, check_strong_abstraction, check_tau_abstraction, compute_induced_sets,
    search_constructive_partition,
};
use crate::error::{Error, Result};
use crate::expr::{BinaryOp, Expr, VarRef};
use crate::intervention::{enumerate_all, Intervention, InterventionMap};
use crate::limits::Limits;
use crate::maps::{AssignmentMap, StateMap};
use crate::model::{AllowedInterventions, CausalModel, ModelBuilder, Signature, VariableDecl};
use crate::prob::Distribution;
use crate::report::{CheckKind, CheckReport, Partition};
use crate::space::Space;
use crate::transform::{check_exact, check_uniform};
use crate::Value;

/// Claimed verdicts; `None` where a bundle makes no claim.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Expected {
    pub exact: Option<bool>,
    pub uniform: Option<bool>,
    pub abstraction: Option<bool>,
    pub strong: Option<bool>,
    pub constructive: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub name: String,
    pub description: String,
    pub low: CausalModel,
    pub high: CausalModel,
    pub tau: StateMap,
    pub omega: Option<InterventionMap>,
    pub dists: Option<(Distribution, Distribution)>,
    pub partition: Option<Partition>,
    pub expected: Expected,
}

impl Expected {
    pub fn get(&self, kind: CheckKind) -> Option<bool> {
        match kind {
            CheckKind::Exact => self.exact,
            CheckKind::Uniform | CheckKind::Compatible | CheckKind::Probe => self.uniform,
            CheckKind::TauAbstraction => self.abstraction,
            CheckKind::Strong => self.strong,
            CheckKind::Constructive => self.constructive,
        }
    }
}

impl Bundle {
    /// Runs one check on the bundle; `None` when the bundle lacks an input
    /// the check needs (distributions for exact, `ω` for exact and uniform).
    pub fn check(&self, kind: CheckKind, limits: &Limits) -> Result<Option<CheckReport>> {
        let (low, high, tau) = (&self.low, &self.high, &self.tau);
        Ok(Some(match kind {
            CheckKind::Exact => {
                let (Some(omega), Some((dl, dh))) = (&self.omega, &self.dists) else { return Ok(None) };
                check_exact(low, dl, high, dh, tau, omega, limits)?
            }
            CheckKind::Uniform | CheckKind::Compatible | CheckKind::Probe => {
                let Some(omega) = &self.omega else { return Ok(None) };
                check_uniform(low, high, tau, omega, limits)?
            }
            CheckKind::TauAbstraction => check_tau_abstraction(low, high, tau, limits)?,
            CheckKind::Strong => check_strong_abstraction(low, high, tau, limits)?,
            CheckKind::Constructive => match &self.partition {
                Some(p) => check_constructive(low, high, tau, p, None, limits)?,
                None => search_constructive_partition(low, high, tau, limits)?,
            },
        }))
    }
}

pub const NAMES: &[&str] = &[
    "example3",
    "example3-reverse",
    "example4-omega12",
    "example4-omega21",
    "example4-identity",
    "example5",
    "appendix-induced",
    "appendix-x3",
    "pixel-two-counter",
    "pixel-merged",
    "voting",
    "energy",
    "averaging",
];

pub fn by_name(name: &str) -> Result<Bundle> {
    Ok(match name {
        "example3" => build_example3()?.0,
        "example3-reverse" => build_example3()?.1,
        "example4-omega12" => build_example4()?.omega12,
        "example4-omega21" => build_example4()?.omega21,
        "example4-identity" => build_example4()?.identity,
        "example5" => build_example5_xstar(&example4_m1(AllowedInterventions::All)?, None)?,
        "appendix-induced" => build_appendix_example()?.0,
        "appendix-x3" => build_appendix_example()?.1,
        "pixel-two-counter" => build_pixel(2, PixelVariant::TwoCounter)?,
        "pixel-merged" => build_pixel(2, PixelVariant::Merged)?,
        "voting" => build_voting(4, 2, 1)?,
        "energy" => build_energy()?,
        "averaging" => build_averaging()?,
        other => return Err(Error::input(format!("unknown corpus bundle `{other}`"))),
    })
}

pub fn all() -> Result<Vec<Bundle>> {
    NAMES.iter().map(|n| by_name(n)).collect()
}

fn named_iv(m: &CausalModel, pairs: &[(&str, Value)]) -> Result<Intervention> {
    Intervention::from_named(m.signature(), pairs.iter().copied())
}

fn endo_exprs(sig: &Signature, srcs: &[&str]) -> Result<StateMap> {
    Ok(AssignmentMap::exprs(srcs.iter().map(|s| sig.parse_endo_expr(s)).collect::<Result<_>>()?))
}

fn just_empty() -> AllowedInterventions {
    AllowedInterventions::List(vec![Intervention::empty()])
}

/// Two unrelated one-variable models with point-mass distributions and a
/// constant `τ` in each direction.
pub fn build_example3() -> Result<(Bundle, Bundle)> {
    let m1 = ModelBuilder::new()
        .exo(VariableDecl::binary("U"))
        .endo(VariableDecl::binary("X"), "U")
        .build()?
        .with_allowed(just_empty());
    let m2 = ModelBuilder::new()
        .exo(VariableDecl::binary("W"))
        .endo(VariableDecl::binary("Y"), "1 - W")
        .build()?
        .with_allowed(just_empty());
    let (u1, u2) = (vec![0], vec![0]);
    let v1 = m1.solve(&u1)?;
    let v2 = m2.solve(&u2)?;
    let d1 = Distribution::point(u1);
    let d2 = Distribution::point(u2);
    let omega = InterventionMap::identity(&[Intervention::empty()]);
    let expected = Expected { exact: Some(true), uniform: Some(false), ..Expected::default() };
    let forward = Bundle {
        name: "example3".into(),
        description: "two unrelated models, constant tau: exact but not uniform".into(),
        low: m1.clone(),
        high: m2.clone(),
        tau: AssignmentMap::constant(v2),
        omega: Some(omega.clone()),
        dists: Some((d1.clone(), d2.clone())),
        partition: None,
        expected,
    };
    let reverse = Bundle {
        name: "example3-reverse".into(),
        description: "the same pair in the other direction".into(),
        low: m2,
        high: m1,
        tau: AssignmentMap::constant(v1),
        omega: Some(omega),
        dists: Some((d2, d1)),
        partition: None,
        expected,
    };
    Ok((forward, reverse))
}

/// `X1 = U1, X2 = X1`, with `U2` unused.
pub fn example4_m1(allowed: AllowedInterventions) -> Result<CausalModel> {
    Ok(ModelBuilder::new()
        .exo(VariableDecl::binary("U1"))
        .exo(VariableDecl::binary("U2"))
        .endo(VariableDecl::binary("X1"), "U1")
        .endo(VariableDecl::binary("X2"), "X1")
        .build()?
        .with_allowed(allowed))
}

/// `X1 = U1, X2 = U2`.
pub fn example4_m2(allowed: AllowedInterventions) -> Result<CausalModel> {
    Ok(ModelBuilder::new()
        .exo(VariableDecl::binary("U1"))
        .exo(VariableDecl::binary("U2"))
        .endo(VariableDecl::binary("X1"), "U1")
        .endo(VariableDecl::binary("X2"), "U2")
        .build()?
        .with_allowed(allowed))
}

pub struct Example4 {
    pub omega12: Bundle,
    pub omega21: Bundle,
    pub identity: Bundle,
}

pub fn build_example4() -> Result<Example4> {
    let probe = example4_m1(AllowedInterventions::All)?;
    let single: Vec<Intervention> = [0, 1].iter().map(|&x| named_iv(&probe, &[("X1", x)])).collect::<Result<_>>()?;
    let double: Vec<Intervention> =
        [0, 1].iter().map(|&x| named_iv(&probe, &[("X1", x), ("X2", x)])).collect::<Result<_>>()?;
    let m1 = example4_m1(AllowedInterventions::List(single.clone()))?;
    let m2 = example4_m2(AllowedInterventions::List(double.clone()))?;
    let omega12: InterventionMap = single.iter().cloned().zip(double.iter().cloned()).collect();
    let omega21: InterventionMap = double.iter().cloned().zip(single.iter().cloned()).collect();
    let tau = AssignmentMap::identity(2);
    let expected = Expected { uniform: Some(true), abstraction: Some(false), ..Expected::default() };
    Ok(Example4 {
        omega12: Bundle {
            name: "example4-omega12".into(),
            description: "X2 = X1 against independent X2, single interventions mapped to joint ones".into(),
            low: m1.clone(),
            high: m2.clone(),
            tau: tau.clone(),
            omega: Some(omega12),
            dists: None,
            partition: None,
            expected,
        },
        omega21: Bundle {
            name: "example4-omega21".into(),
            description: "independent X2 against X2 = X1, joint interventions mapped to single ones".into(),
            low: m2,
            high: m1.clone(),
            tau: tau.clone(),
            omega: Some(omega21),
            dists: None,
            partition: None,
            expected,
        },
        identity: Bundle {
            name: "example4-identity".into(),
            description: "X2 = X1 against independent X2 with the identity intervention map".into(),
            low: m1,
            high: example4_m2(AllowedInterventions::List(single.clone()))?,
            tau,
            omega: Some(InterventionMap::identity(&single)),
            dists: None,
            partition: None,
            expected: Expected { uniform: Some(false), abstraction: Some(false), ..Expected::default() },
        },
    })
}

/// Extends `base` with a switch `X* = U*` that every other equation
/// consults: `X* = 1` keeps the original equation, `X* = 0` uses an
/// all-zero table or, with a seed, a random one over the same inputs.
pub fn build_example5_xstar(base: &CausalModel, branch_seed: Option<u64>) -> Result<Bundle> {
    let sig = base.signature();
    for name in ["Ustar", "Xstar"] {
        if sig.resolve(name).is_some() {
            return Err(Error::input(format!("base model already declares `{name}`")));
        }
    }
    let mut exogenous = sig.exogenous().to_vec();
    exogenous.push(VariableDecl::binary("Ustar"));
    let mut endogenous = sig.endogenous().to_vec();
    endogenous.push(VariableDecl::binary("Xstar"));
    let u_star = VarRef::Exo(exogenous.len() - 1);
    let x_star = VarRef::Endo(endogenous.len() - 1);
    let ext = Signature::new(exogenous, endogenous)?;

    let mut rng = branch_seed.map(ChaCha8Rng::seed_from_u64);
    let mut equations = Vec::new();
    for (x, eq) in base.equations().iter().enumerate() {
        let vars: Vec<VarRef> = eq.refs().into_iter().collect();
        let inputs = Space::new(vars.iter().map(|r| ext.decl(*r).domain.clone()).collect());
        let domain = &sig.endogenous()[x].domain;
        let rows: BTreeMap<Vec<Value>, Value> = inputs
            .iter()
            .map(|k| {
                let out = match rng.as_mut() {
                    Some(r) => domain[r.gen_range(0..domain.len())],
                    None if domain.contains(&0) => 0,
                    None => domain[0],
                };
                (k, out)
            })
            .collect();
        let other = if vars.is_empty() { Expr::Lit(rows[&Vec::new()]) } else { Expr::Table { vars, rows } };
        let switch = Expr::binary(BinaryOp::Eq, Expr::Var(x_star), Expr::Lit(1));
        equations.push(Expr::ite(switch, eq.clone(), other));
    }
    equations.push(Expr::Var(u_star));
    let allowed = AllowedInterventions::List(base.allowed_list(&Limits::default())?);
    let high = CausalModel::new(ext, equations, allowed.clone())?;
    let low = base.clone().with_allowed(allowed.clone());

    let n = sig.endogenous().len();
    let mut outs: Vec<Expr> = (0..n).map(|k| Expr::Var(VarRef::Endo(k))).collect();
    outs.push(Expr::Lit(1));
    let AllowedInterventions::List(list) = allowed else { unreachable!() };
    Ok(Bundle {
        name: "example5".into(),
        description: match branch_seed {
            Some(s) => format!("switch variable added to the high model, random X*=0 branch (seed {s})"),
            None => "switch variable added to the high model, all-zero X*=0 branch".into(),
        },
        low,
        high,
        tau: AssignmentMap::exprs(outs),
        omega: Some(InterventionMap::identity(&list)),
        dists: None,
        partition: None,
        expected: Expected { uniform: Some(true), abstraction: Some(false), ..Expected::default() },
    })
}

fn appendix_models() -> Result<(CausalModel, CausalModel, StateMap)> {
    let low = ModelBuilder::new()
        .exo(VariableDecl::binary("U1"))
        .exo(VariableDecl::binary("U2"))
        .exo(VariableDecl::binary("U3"))
        .endo(VariableDecl::binary("X1"), "U1")
        .endo(VariableDecl::binary("X2"), "U2")
        .endo(VariableDecl::binary("X3"), "U3")
        .build()?;
    let high = ModelBuilder::new()
        .exo(VariableDecl::binary("W1"))
        .exo(VariableDecl::binary("W2"))
        .endo(VariableDecl::binary("Y1"), "W1")
        .endo(VariableDecl::binary("Y2"), "W2")
        .build()?;
    let tau = endo_exprs(low.signature(), &["X1 || X3", "X2 || X3"])?;
    Ok((low, high, tau))
}

/// Three independent bits mapped by `(x1 ∨ x3, x2 ∨ x3)`: once with the
/// induced low interventions, once with those that set `X3 = 0`.
pub fn build_appendix_example() -> Result<(Bundle, Bundle)> {
    let (low, high, tau) = appendix_models()?;
    let limits = Limits::default();
    let induced = compute_induced_sets(&low, &high, &tau, &limits)?;
    let all_high = enumerate_all(&high, &limits)?;
    let high = high.with_allowed(AllowedInterventions::List(all_high));
    let with_x3: Vec<Intervention> =
        enumerate_all(&low, &limits)?.into_iter().filter(|i| i.get(2) == Some(0)).collect();
    let first = Bundle {
        name: "appendix-induced".into(),
        description: "or-coarsening of three bits, all induced low interventions".into(),
        low: low.clone().with_allowed(AllowedInterventions::List(induced.low)),
        high: high.clone(),
        tau: tau.clone(),
        omega: None,
        dists: None,
        partition: None,
        expected: Expected {
            abstraction: Some(false),
            strong: Some(false),
            constructive: Some(false),
            ..Expected::default()
        },
    };
    let second = Bundle {
        name: "appendix-x3".into(),
        description: "or-coarsening of three bits, low interventions that set X3 = 0".into(),
        low: low.with_allowed(AllowedInterventions::List(with_x3)),
        high,
        tau,
        omega: None,
        dists: None,
        partition: None,
        expected: Expected { abstraction: Some(true), ..Expected::default() },
    };
    Ok((first, second))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelVariant {
    /// Counts of black pixels in the upper half and in the left half.
    TwoCounter,
    /// One count over the union of the two halves.
    Merged,
}

/// An `n × n` grid of independent pixels (`n` even). Row `i`, column `j`
/// is `X{i}{j}`, counted from 1; the upper half is rows `1..=n/2` and the
/// left half columns `1..=n/2`.
pub fn build_pixel(n: usize, variant: PixelVariant) -> Result<Bundle> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::input("pixel grid side must be even and positive"));
    }
    let name = |i: usize, j: usize| if n < 10 { format!("X{i}{j}") } else { format!("X{i}_{j}") };
    let mut b = ModelBuilder::new();
    for i in 1..=n {
        for j in 1..=n {
            b = b.exo(VariableDecl::binary(format!("U{}", &name(i, j)[1..])));
        }
    }
    let (mut upper, mut left, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for i in 1..=n {
        for j in 1..=n {
            let x = name(i, j);
            b = b.endo(VariableDecl::binary(x.clone()), format!("U{}", &x[1..]));
            let k = (i - 1) * n + (j - 1);
            if i <= n / 2 {
                upper.push(k);
            }
            if j <= n / 2 {
                left.push(k);
            }
            if i > n / 2 && j > n / 2 {
                rest.push(k);
            }
        }
    }
    let low_all = b.build()?;
    let sum = |cells: &[usize]| Expr::sum(cells.iter().map(|&k| Expr::Var(VarRef::Endo(k))));
    let half = n * n / 2;
    let slack = (n * n / 4) as Value;

    // the restricted low interventions: empty, or every counted pixel set
    let counted: Vec<usize> = (0..n * n).filter(|k| !rest.contains(k)).collect();
    let limits = Limits::default();
    let mut restricted = vec![Intervention::empty()];
    let counted_space = Space::new(vec![vec![0, 1]; counted.len()]);
    let rest_decls: Vec<VariableDecl> = rest.iter().map(|&k| low_all.signature().endogenous()[k].clone()).collect();
    let rest_ivs = crate::intervention::enumerate_over(&rest_decls, &limits)?;
    for values in counted_space.iter() {
        for r in &rest_ivs {
            let pairs =
                counted.iter().copied().zip(values.iter().copied()).chain(r.pairs().iter().map(|&(p, v)| (rest[p], v)));
            restricted.push(Intervention::from_pairs(pairs)?);
        }
    }

    match variant {
        PixelVariant::TwoCounter => {
            let pairs: Vec<(Value, Value)> = (0..=half as Value)
                .flat_map(|m| (0..=half as Value).map(move |m2| (m, m2)))
                .filter(|(m, m2)| (m - m2).abs() <= slack)
                .collect();
            let rows = |pick: fn(&(Value, Value)) -> Value| -> BTreeMap<Vec<Value>, Value> {
                pairs.iter().enumerate().map(|(w, p)| (vec![w as Value], pick(p))).collect()
            };
            let exo = vec![VariableDecl::range("W", pairs.len())];
            let endo = vec![VariableDecl::range("UH", half + 1), VariableDecl::range("LH", half + 1)];
            let sig = Signature::new(exo, endo)?;
            let equations = vec![
                Expr::Table { vars: vec![VarRef::Exo(0)], rows: rows(|p| p.0) },
                Expr::Table { vars: vec![VarRef::Exo(0)], rows: rows(|p| p.1) },
            ];
            let tau = AssignmentMap::exprs(vec![sum(&upper), sum(&left)]);
            let mut omega = InterventionMap::new();
            for i in &restricted {
                let image = if i.is_empty() {
                    Intervention::empty()
                } else {
                    let count = |cells: &[usize]| cells.iter().map(|&k| i.get(k).unwrap()).sum::<Value>();
                    Intervention::from_pairs([(0, count(&upper)), (1, count(&left))])?
                };
                omega.insert(i.clone(), image);
            }
            let mut high_allowed: Vec<Intervention> = omega.iter().map(|(_, h)| h.clone()).collect();
            high_allowed.sort();
            high_allowed.dedup();
            let high = CausalModel::new(sig, equations, AllowedInterventions::List(high_allowed))?;
            Ok(Bundle {
                name: "pixel-two-counter".into(),
                description: format!("{n}x{n} pixels, upper-half and left-half counts, restricted interventions"),
                low: low_all.with_allowed(AllowedInterventions::List(restricted)),
                high,
                tau,
                omega: Some(omega),
                dists: None,
                partition: None,
                expected: Expected {
                    uniform: Some(true),
                    abstraction: Some(true),
                    strong: Some(false),
                    ..Expected::default()
                },
            })
        }
        PixelVariant::Merged => {
            let mut union = upper.clone();
            union.extend(left.iter().filter(|k| !upper.contains(k)));
            union.sort();
            let exo = vec![VariableDecl::range("W", union.len() + 1)];
            let endo = vec![VariableDecl::range("ULH", union.len() + 1)];
            let high = CausalModel::new(
                Signature::new(exo, endo)?,
                vec![Expr::Var(VarRef::Exo(0))],
                AllowedInterventions::All,
            )?;
            Ok(Bundle {
                name: "pixel-merged".into(),
                description: format!("{n}x{n} pixels, one count over the upper and left halves"),
                low: low_all,
                high,
                tau: AssignmentMap::exprs(vec![sum(&union)]),
                omega: None,
                dists: None,
                partition: Some(Partition { cells: vec![union], marginal: rest }),
                expected: Expected { strong: Some(true), constructive: Some(true), ..Expected::default() },
            })
        }
    }
}

/// Voters respond to the ads through a response function picked by their
/// exogenous variable; the high model tracks per-group vote sums through a
/// group response function and a strict-majority winner bit.
pub fn build_voting(n_voters: usize, n_groups: usize, n_ads: usize) -> Result<Bundle> {
    if n_groups == 0 || !n_voters.is_multiple_of(n_groups) {
        return Err(Error::input("voters must split evenly into groups"));
    }
    if n_ads == 0 || n_ads > 3 {
        return Err(Error::input("between one and three ads are supported"));
    }
    let size = n_voters / n_groups;
    let ad_space = Space::new(vec![vec![0, 1]; n_ads]);
    let ad_settings: Vec<Vec<Value>> = ad_space.iter().collect();
    let n_settings = ad_settings.len();
    let ads: Vec<String> = (1..=n_ads).map(|a| format!("A{a}")).collect();

    // low model: U_i indexes a function from ad settings to a vote
    let n_responses = 1usize << n_settings;
    let mut exo: Vec<VariableDecl> =
        (1..=n_voters).map(|i| VariableDecl::range(format!("U{i}"), n_responses)).collect();
    exo.extend(ads.iter().map(|a| VariableDecl::binary(format!("U{a}"))));
    let mut endo: Vec<VariableDecl> = (1..=n_voters).map(|i| VariableDecl::binary(format!("X{i}"))).collect();
    endo.extend(ads.iter().map(|a| VariableDecl::binary(a.clone())));
    endo.push(VariableDecl::range("T", n_voters + 1));
    let low_sig = Signature::new(exo, endo)?;
    let ad_refs = |base: usize| (0..n_ads).map(move |a| VarRef::Endo(base + a));
    let mut equations = Vec::new();
    for i in 0..n_voters {
        let mut vars = vec![VarRef::Exo(i)];
        vars.extend(ad_refs(n_voters));
        let mut rows = BTreeMap::new();
        for code in 0..n_responses {
            for (s, setting) in ad_settings.iter().enumerate() {
                let mut key = vec![code as Value];
                key.extend(setting);
                rows.insert(key, ((code >> s) & 1) as Value);
            }
        }
        equations.push(Expr::Table { vars, rows });
    }
    for a in 0..n_ads {
        equations.push(Expr::Var(VarRef::Exo(n_voters + a)));
    }
    equations.push(Expr::sum((0..n_voters).map(|i| Expr::Var(VarRef::Endo(i)))));
    let ad_only = |sig: &Signature, base: usize| -> Result<Vec<Intervention>> {
        let decls: Vec<VariableDecl> = (0..n_ads).map(|a| sig.endogenous()[base + a].clone()).collect();
        let ivs = crate::intervention::enumerate_over(&decls, &Limits::default())?;
        ivs.iter().map(|i| Intervention::from_pairs(i.pairs().iter().map(|&(a, v)| (base + a, v)))).collect()
    };
    let low_allowed = ad_only(&low_sig, n_voters)?;
    let low = CausalModel::new(low_sig, equations, AllowedInterventions::List(low_allowed.clone()))?;

    // high model: W_k indexes a function from ad settings to a group sum
    let per_group = size + 1;
    let n_group_responses = per_group.checked_pow(n_settings as u32).ok_or_else(|| Error::input("too many ads"))?;
    let mut exo: Vec<VariableDecl> =
        (1..=n_groups).map(|k| VariableDecl::range(format!("W{k}"), n_group_responses)).collect();
    exo.extend(ads.iter().map(|a| VariableDecl::binary(format!("W{a}"))));
    let mut hendo: Vec<VariableDecl> =
        (1..=n_groups).map(|k| VariableDecl::range(format!("G{k}"), per_group)).collect();
    hendo.extend(ads.iter().map(|a| VariableDecl::binary(a.clone())));
    hendo.push(VariableDecl::binary("Win"));
    let high_sig = Signature::new(exo, hendo)?;
    let mut hequations = Vec::new();
    for k in 0..n_groups {
        let mut vars = vec![VarRef::Exo(k)];
        vars.extend(ad_refs(n_groups));
        let mut rows = BTreeMap::new();
        for code in 0..n_group_responses {
            for (s, setting) in ad_settings.iter().enumerate() {
                let mut key = vec![code as Value];
                key.extend(setting);
                // digit s of code in base per_group, most significant first
                let digit = (code / per_group.pow((n_settings - 1 - s) as u32)) % per_group;
                rows.insert(key, digit as Value);
            }
        }
        hequations.push(Expr::Table { vars, rows });
    }
    for a in 0..n_ads {
        hequations.push(Expr::Var(VarRef::Exo(n_groups + a)));
    }
    let total = Expr::sum((0..n_groups).map(|k| Expr::Var(VarRef::Endo(k))));
    let majority = Expr::Lit((n_voters / 2) as Value);
    hequations.push(Expr::ite(Expr::binary(BinaryOp::Lt, majority.clone(), total), Expr::Lit(1), Expr::Lit(0)));
    let high_allowed = ad_only(&high_sig, n_groups)?;
    let high = CausalModel::new(high_sig, hequations, AllowedInterventions::List(high_allowed.clone()))?;

    let mut outs: Vec<Expr> =
        (0..n_groups).map(|k| Expr::sum((k * size..(k + 1) * size).map(|i| Expr::Var(VarRef::Endo(i))))).collect();
    outs.extend((0..n_ads).map(|a| Expr::Var(VarRef::Endo(n_voters + a))));
    let t = Expr::Var(VarRef::Endo(n_voters + n_ads));
    outs.push(Expr::ite(Expr::binary(BinaryOp::Lt, majority, t), Expr::Lit(1), Expr::Lit(0)));
    let omega: InterventionMap = low_allowed.into_iter().zip(high_allowed).collect();

    let mut cells: Vec<Vec<usize>> = (0..n_groups).map(|k| (k * size..(k + 1) * size).collect()).collect();
    cells.extend((0..n_ads).map(|a| vec![n_voters + a]));
    cells.push(vec![n_voters + n_ads]);
    Ok(Bundle {
        name: "voting".into(),
        description: format!("{n_voters} voters in {n_groups} groups, {n_ads} ad(s)"),
        low,
        high,
        tau: AssignmentMap::exprs(outs),
        omega: Some(omega),
        dists: None,
        partition: Some(Partition { cells, marginal: Vec::new() }),
        expected: Expected { uniform: Some(true), constructive: Some(true), ..Expected::default() },
    })
}

/// Velocity, height and mass on small grids; kinetic and potential energy
/// as products modulo 3, so that fixing the mass alone fixes nothing.
pub fn build_energy() -> Result<Bundle> {
    let low = ModelBuilder::new()
        .exo(VariableDecl::range("UV", 3))
        .exo(VariableDecl::range("UH", 3))
        .exo(VariableDecl::new("UM", vec![1, 2]))
        .endo(VariableDecl::range("V", 3), "UV")
        .endo(VariableDecl::range("H", 3), "UH")
        .endo(VariableDecl::new("M", vec![1, 2]), "UM")
        .build()?;
    let high = ModelBuilder::new()
        .exo(VariableDecl::range("UK", 3))
        .exo(VariableDecl::range("UP", 3))
        .endo(VariableDecl::range("K", 3), "UK")
        .endo(VariableDecl::range("P", 3), "UP")
        .build()?;
    let modulo = |e: &str| {
        // m·x mod 3 for m in {1, 2}, x in {0, 1, 2}
        format!("ite(M == 1, {e}, ite({e} == 0, 0, 3 - {e}))")
    };
    let tau = endo_exprs(low.signature(), &[&modulo("V"), &modulo("H")])?;
    Ok(Bundle {
        name: "energy".into(),
        description: "discretized energy: mass interventions collapse to the empty intervention".into(),
        low,
        high,
        tau,
        omega: None,
        dists: None,
        partition: None,
        expected: Expected { strong: Some(false), ..Expected::default() },
    })
}

/// Two causes and two effects with a column-balanced coefficient matrix,
/// aggregated by sums.
pub fn build_averaging() -> Result<Bundle> {
    let b = ModelBuilder::new()
        .exo(VariableDecl::binary("U1"))
        .exo(VariableDecl::binary("U2"))
        .exo(VariableDecl::binary("V1"))
        .exo(VariableDecl::binary("V2"))
        .endo(VariableDecl::binary("X1"), "U1")
        .endo(VariableDecl::binary("X2"), "U2")
        .endo(VariableDecl::range("Y1", 4), "X1 + X2 + V1")
        .endo(VariableDecl::binary("Y2"), "V2");
    let probe = b.clone().build()?;
    let ls = probe.signature();
    let lx: Vec<usize> = vec![0, 1];
    let ly: Vec<usize> = vec![2, 3];
    let block = |vars: &[usize]| -> Vec<Vec<(usize, Value)>> {
        let decls: Vec<&VariableDecl> = vars.iter().map(|&k| &ls.endogenous()[k]).collect();
        Space::new(decls.iter().map(|d| d.domain.clone()).collect())
            .iter()
            .map(|vals| vars.iter().copied().zip(vals).collect())
            .collect()
    };
    let mut low_allowed = vec![Intervention::empty()];
    for x in block(&lx) {
        low_allowed.push(Intervention::from_pairs(x)?);
    }
    for y in block(&ly) {
        low_allowed.push(Intervention::from_pairs(y)?);
    }
    for x in block(&lx) {
        for y in block(&ly) {
            low_allowed.push(Intervention::from_pairs(x.iter().chain(&y).copied())?);
        }
    }
    let low = probe.with_allowed(AllowedInterventions::List(low_allowed.clone()));
    let high = ModelBuilder::new()
        .exo(VariableDecl::range("UBar", 3))
        .exo(VariableDecl::range("VBar", 3))
        .endo(VariableDecl::range("XBar", 3), "UBar")
        .endo(VariableDecl::range("YBar", 5), "XBar + VBar")
        .build()?;
    let tau = endo_exprs(low.signature(), &["X1 + X2", "Y1 + Y2"])?;
    let mut omega = InterventionMap::new();
    for i in &low_allowed {
        let s = |vars: &[usize]| vars.iter().map(|&k| i.get(k)).sum::<Option<Value>>();
        let mut pairs = Vec::new();
        if let Some(x) = s(&lx) {
            pairs.push((0, x));
        }
        if let Some(y) = s(&ly) {
            pairs.push((1, y));
        }
        omega.insert(i.clone(), Intervention::from_pairs(pairs)?);
    }
    let mut high_allowed: Vec<Intervention> = omega.iter().map(|(_, h)| h.clone()).collect();
    high_allowed.sort();
    high_allowed.dedup();
    Ok(Bundle {
        name: "averaging".into(),
        description: "linear aggregation of causes and effects, by sums".into(),
        low,
        high: high.with_allowed(AllowedInterventions::List(high_allowed)),
        tau,
        omega: Some(omega),
        dists: None,
        partition: None,
        expected: Expected { uniform: Some(true), ..Expected::default() },
    })
}
