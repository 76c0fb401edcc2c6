//! The induced intervention map `ω_τ` and the abstraction hierarchy:
//! τ-abstraction, strong abstraction and constructive abstraction.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::intervention::{enumerate_all, enumerate_over, Intervention, InterventionMap};
use crate::limits::Limits;
use crate::maps::{decl_space, StateMap};
use crate::model::{AllowedInterventions, CausalModel, VariableDecl};
use crate::report::{CheckKind, CheckReport, ComponentMaps, Condition, Counterexample, Partition};
use crate::space::Space;
use crate::transform::{find_on, prepare};
use crate::Value;

/// `Rst(V, x)`: every total state that extends the partial assignment.
pub fn rst(decls: &[VariableDecl], partial: &Intervention) -> Space {
    let domains: Vec<Vec<Value>> = decls.iter().map(|d| d.domain.clone()).collect();
    restrict(&domains, partial)
}

fn restrict(domains: &[Vec<Value>], partial: &Intervention) -> Space {
    Space::new(
        domains
            .iter()
            .enumerate()
            .map(|(k, d)| match partial.get(k) {
                Some(v) => vec![v],
                None => d.clone(),
            })
            .collect(),
    )
}

/// `τ` tabulated over all low states, in enumeration order.
struct TauTable {
    space: Space,
    images: Vec<Vec<Value>>,
}

impl TauTable {
    fn new(low: &CausalModel, tau: &StateMap, limits: &Limits) -> Result<Self> {
        let space = decl_space(low.signature().endogenous());
        limits.check_assignments("low state space", space.size())?;
        let images = space.iter().map(|v| tau.apply(&v)).collect::<Result<_>>()?;
        Ok(TauTable { space, images })
    }

    fn image_of(&self, set: &Space) -> BTreeSet<&Vec<Value>> {
        set.iter().map(|v| &self.images[self.space.index_of(&v).expect("subset of the low space")]).collect()
    }
}

fn omega_from_table(
    table: &TauTable,
    high: &[VariableDecl],
    i: &Intervention,
    limits: &Limits,
) -> Result<Option<Intervention>> {
    let image = table.image_of(&restrict(table.space.domains(), i));
    let first = image.iter().next().expect("Rst is never empty");
    let fixed: Vec<(usize, Value)> =
        (0..high.len()).filter(|&j| image.iter().all(|s| s[j] == first[j])).map(|j| (j, first[j])).collect();
    let candidate = Intervention::from_pairs(fixed)?;
    let target = rst(high, &candidate);
    let defined = image.len() as u128 == target.size().unwrap_or(u128::MAX) && image.iter().all(|s| target.contains(s));
    let result = defined.then_some(candidate);
    if limits.cross_check {
        let mut hits = Vec::new();
        for y in enumerate_over(high, limits)? {
            let r = rst(high, &y);
            let r_set: BTreeSet<Vec<Value>> = r.iter().collect();
            if r_set.len() == image.len() && image.iter().all(|s| r_set.contains(*s)) {
                hits.push(y);
            }
        }
        if hits.len() > 1 || hits.first() != result.as_ref() {
            return Err(Error::Model(format!(
                "induced intervention disagrees with brute force on {i:?}: {result:?} versus {hits:?}"
            )));
        }
    }
    Ok(result)
}

/// `ω_τ(i)`: the unique high intervention whose restriction set is the
/// `τ`-image of the restriction set of `i`, if there is one.
pub fn derive_omega_tau(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    i: &Intervention,
    limits: &Limits,
) -> Result<Option<Intervention>> {
    i.check(low.signature().endogenous())?;
    tau.check(low.signature().endogenous(), high.signature().endogenous(), limits)?;
    let table = TauTable::new(low, tau, limits)?;
    omega_from_table(&table, high.signature().endogenous(), i, limits)
}

/// Low interventions on which `ω_τ` is defined, their images, and the map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSets {
    pub low: Vec<Intervention>,
    /// The image of `ω_τ`, sorted.
    pub high: Vec<Intervention>,
    pub omega: InterventionMap,
    pub undefined: Vec<Intervention>,
}

/// `ω_τ` over every low intervention.
pub fn compute_induced_sets(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    limits: &Limits,
) -> Result<InducedSets> {
    tau.check(low.signature().endogenous(), high.signature().endogenous(), limits)?;
    let all = enumerate_all(low, limits)?;
    induced_on(low, high, tau, &all, limits)
}

fn induced_on(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    interventions: &[Intervention],
    limits: &Limits,
) -> Result<InducedSets> {
    let table = TauTable::new(low, tau, limits)?;
    let hd = high.signature().endogenous();
    let mut out =
        InducedSets { low: Vec::new(), high: Vec::new(), omega: InterventionMap::new(), undefined: Vec::new() };
    let mut image = BTreeSet::new();
    for i in interventions {
        match omega_from_table(&table, hd, i, limits)? {
            Some(h) => {
                out.low.push(i.clone());
                image.insert(h.clone());
                out.omega.insert(i.clone(), h);
            }
            None => out.undefined.push(i.clone()),
        }
    }
    out.high = image.into_iter().collect();
    Ok(out)
}

/// τ-abstraction of `(M_L, I_L)` into `(M_H, I_H)`, the allowed sets of
/// the two models. Conditions are checked in order: `τ` surjective, `ω_τ`
/// defined on `I_L`, a surjective compatible `τ_U` exists, `I_H = ω_τ(I_L)`.
pub fn check_tau_abstraction(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    limits: &Limits,
) -> Result<CheckReport> {
    let kind = CheckKind::TauAbstraction;
    let (i_l, i_h) = prepare(low, high, tau, limits)?;
    let unreached = tau.unreached(low.signature().endogenous(), high.signature().endogenous(), limits)?;
    if let Some(first) = unreached.first() {
        return Ok(CheckReport::fail(
            kind,
            Condition::TauSurjective,
            Counterexample::TauNotSurjective { missing: first.clone(), missing_count: unreached.len() },
        ));
    }
    let induced = induced_on(low, high, tau, &i_l, limits)?;
    if let Some(i) = induced.undefined.first() {
        return Ok(CheckReport::fail(
            kind,
            Condition::OmegaDefined,
            Counterexample::OmegaUndefined { intervention: i.clone() },
        ));
    }
    let compat = find_on(low, high, tau, &induced.omega, &i_l, true, limits)?;
    if !compat.holds {
        return Ok(compat.lift(kind));
    }
    let allowed: BTreeSet<&Intervention> = i_h.iter().collect();
    let image: BTreeSet<&Intervention> = induced.high.iter().collect();
    if allowed != image {
        return Ok(CheckReport::fail(
            kind,
            Condition::InterventionSetsMatch,
            Counterexample::InterventionSetMismatch {
                unreached: allowed.difference(&image).map(|i| (*i).clone()).collect(),
                unexpected: image.difference(&allowed).map(|i| (*i).clone()).collect(),
            },
        ));
    }
    Ok(compat.lift(kind))
}

/// Strong τ-abstraction: every high intervention is induced, and the models
/// restricted to the induced sets form a τ-abstraction.
pub fn check_strong_abstraction(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    limits: &Limits,
) -> Result<CheckReport> {
    let induced = compute_induced_sets(low, high, tau, limits)?;
    let all_high = enumerate_all(high, limits)?;
    let image: BTreeSet<&Intervention> = induced.high.iter().collect();
    let missing: Vec<Intervention> = all_high.iter().filter(|h| !image.contains(h)).cloned().collect();
    if !missing.is_empty() {
        return Ok(CheckReport::fail(
            CheckKind::Strong,
            Condition::AllHighInterventions,
            Counterexample::MissingHighInterventions { missing },
        ));
    }
    let (low_r, high_r) = restrict_to_induced(low, high, &induced);
    Ok(check_tau_abstraction(&low_r, &high_r, tau, limits)?.lift(CheckKind::Strong))
}

/// Copies of the models whose allowed sets are `I_L^τ` and `I_H^τ`.
pub fn restrict_to_induced(low: &CausalModel, high: &CausalModel, induced: &InducedSets) -> (CausalModel, CausalModel) {
    (
        low.clone().with_allowed(AllowedInterventions::List(induced.low.clone())),
        high.clone().with_allowed(AllowedInterventions::List(induced.high.clone())),
    )
}

impl Partition {
    /// Disjoint, covering, and one non-empty cell per high variable.
    pub fn check(&self, n_low: usize, n_high: usize) -> Result<()> {
        if self.cells.len() != n_high {
            return Err(Error::input(format!("partition has {} cells for {n_high} high variables", self.cells.len())));
        }
        if let Some(j) = self.cells.iter().position(|c| c.is_empty()) {
            return Err(Error::input(format!("partition cell {j} is empty")));
        }
        let mut seen = vec![false; n_low];
        for &k in self.cells.iter().flatten().chain(&self.marginal) {
            if k >= n_low {
                return Err(Error::input(format!("partition mentions low variable #{k}")));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::input(format!("low variable #{k} is in two cells")));
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::input(format!("low variable #{k} is in no cell")));
        }
        Ok(())
    }
}

/// Derives `τ_j` on each cell, or the first pair of states showing that
/// `τ` does not factor through the partition.
pub fn factor_tau(
    low: &CausalModel,
    tau: &StateMap,
    partition: &Partition,
    limits: &Limits,
) -> Result<std::result::Result<ComponentMaps, Counterexample>> {
    let table = TauTable::new(low, tau, limits)?;
    Ok(factor_with(&table, partition))
}

#[allow(clippy::result_large_err)]
fn factor_with(table: &TauTable, partition: &Partition) -> std::result::Result<ComponentMaps, Counterexample> {
    let mut comps: ComponentMaps = vec![BTreeMap::new(); partition.cells.len()];
    let mut first_state: Vec<BTreeMap<Vec<Value>, Vec<Value>>> = vec![BTreeMap::new(); partition.cells.len()];
    for (v, img) in table.space.iter().zip(&table.images) {
        for (j, cell) in partition.cells.iter().enumerate() {
            let z: Vec<Value> = cell.iter().map(|&k| v[k]).collect();
            match comps[j].get(&z) {
                Some(&y) if y != img[j] => {
                    return Err(Counterexample::FactoringFails { cell: j, states: (first_state[j][&z].clone(), v) })
                }
                Some(_) => {}
                None => {
                    comps[j].insert(z.clone(), img[j]);
                    first_state[j].insert(z, v.clone());
                }
            }
        }
    }
    Ok(comps)
}

/// Constructive abstraction: `τ` factors as the given component maps (or,
/// when `components` is `None`, through the partition at all) and the
/// abstraction is strong.
pub fn check_constructive(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    partition: &Partition,
    components: Option<&ComponentMaps>,
    limits: &Limits,
) -> Result<CheckReport> {
    let kind = CheckKind::Constructive;
    partition.check(low.signature().endogenous().len(), high.signature().endogenous().len())?;
    tau.check(low.signature().endogenous(), high.signature().endogenous(), limits)?;
    let table = TauTable::new(low, tau, limits)?;
    let comps = match components {
        Some(given) => {
            if given.len() != partition.cells.len() {
                return Err(Error::input("one component map per cell is required"));
            }
            for (v, expected) in table.space.iter().zip(&table.images) {
                let got = partition
                    .cells
                    .iter()
                    .zip(given)
                    .map(|(cell, t)| {
                        let z: Vec<Value> = cell.iter().map(|&k| v[k]).collect();
                        t.get(&z).copied().ok_or_else(|| Error::input(format!("component map has no entry for {z:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if &got != expected {
                    return Ok(CheckReport::fail(
                        kind,
                        Condition::Factoring,
                        Counterexample::ComponentMismatch { state: v, expected: expected.clone(), got },
                    ));
                }
            }
            given.clone()
        }
        None => match factor_with(&table, partition) {
            Ok(c) => c,
            Err(cx) => return Ok(CheckReport::fail(kind, Condition::Factoring, cx)),
        },
    };
    let mut r = check_strong_abstraction(low, high, tau, limits)?.lift(kind);
    if r.holds {
        r.witness.partition = Some((partition.clone(), comps));
    }
    Ok(r)
}

/// Low variables each output coordinate of `τ` actually depends on.
fn tau_support(table: &TauTable, n_high: usize) -> Vec<BTreeSet<usize>> {
    let mut support = vec![BTreeSet::new(); n_high];
    let domains = table.space.domains();
    for (v, img) in table.space.iter().zip(&table.images) {
        for (k, d) in domains.iter().enumerate() {
            let mut w = v.clone();
            for &alt in d {
                w[k] = alt;
                let other = &table.images[table.space.index_of(&w).unwrap()];
                for j in 0..n_high {
                    if other[j] != img[j] {
                        support[j].insert(k);
                    }
                }
            }
        }
    }
    support
}

/// Searches labelings of the low variables (first variable most
/// significant, labels ordered marginal, then high variables in
/// declaration order) for the first partition through which `τ` factors,
/// and checks the strong condition once.
pub fn search_constructive_partition(
    low: &CausalModel,
    high: &CausalModel,
    tau: &StateMap,
    limits: &Limits,
) -> Result<CheckReport> {
    let kind = CheckKind::Constructive;
    let n_low = low.signature().endogenous().len();
    let n_high = high.signature().endogenous().len();
    if n_low > limits.max_partition_variables {
        return Err(Error::SizeCap {
            what: "partition search over low variables".into(),
            size: n_low as u128,
            cap: limits.max_partition_variables as u128,
        });
    }
    tau.check(low.signature().endogenous(), high.signature().endogenous(), limits)?;
    let table = TauTable::new(low, tau, limits)?;
    let support = tau_support(&table, n_high);
    let mut forced: Vec<Option<usize>> = vec![None; n_low];
    for (j, s) in support.iter().enumerate() {
        for &k in s {
            if let Some(prev) = forced[k] {
                return Ok(CheckReport::fail(
                    kind,
                    Condition::Factoring,
                    Counterexample::NoPartition { conflict: Some((k, prev, j)) },
                ));
            }
            forced[k] = Some(j);
        }
    }

    // label 0 is the marginal cell, label j + 1 is high variable j
    let choices: Vec<Vec<usize>> =
        forced.iter().map(|f| f.map_or_else(|| (0..=n_high).collect(), |j| vec![j + 1])).collect();
    let mut found = None;
    let mut digits = vec![0usize; n_low];
    'search: loop {
        let labels: Vec<usize> = digits.iter().zip(&choices).map(|(&d, c)| c[d]).collect();
        let mut partition = Partition { cells: vec![Vec::new(); n_high], marginal: Vec::new() };
        for (k, &l) in labels.iter().enumerate() {
            if l == 0 {
                partition.marginal.push(k);
            } else {
                partition.cells[l - 1].push(k);
            }
        }
        if partition.cells.iter().all(|c| !c.is_empty()) {
            if let Ok(comps) = factor_with(&table, &partition) {
                found = Some((partition, comps));
                break 'search;
            }
        }
        let mut k = n_low;
        loop {
            if k == 0 {
                break 'search;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < choices[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
    let Some((partition, comps)) = found else {
        return Ok(CheckReport::fail(kind, Condition::Factoring, Counterexample::NoPartition { conflict: None }));
    };
    let mut r = check_strong_abstraction(low, high, tau, limits)?.lift(kind);
    if r.holds {
        r.witness.partition = Some((partition, comps));
    }
    Ok(r)
}
