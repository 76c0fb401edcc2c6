//! Interventions, the natural partial order, and explicit intervention maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::model::{CausalModel, Signature, VariableDecl};
use crate::Value;

/// A partial assignment to endogenous variables, keyed by declaration
/// index and kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Intervention(Vec<(usize, Value)>);

impl Intervention {
    pub fn empty() -> Self {
        Intervention(Vec::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Value)>) -> Result<Self> {
        let mut v: Vec<(usize, Value)> = pairs.into_iter().collect();
        v.sort_by_key(|p| p.0);
        if v.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::input("intervention sets the same variable twice"));
        }
        Ok(Intervention(v))
    }

    /// Sets every endogenous variable to the given full state.
    pub fn full(state: &[Value]) -> Self {
        Intervention(state.iter().copied().enumerate().collect())
    }

    /// Resolves variable names against `sig`. Values are not range-checked
    /// here; see [`Intervention::check`].
    pub fn from_named<'a>(sig: &Signature, pairs: impl IntoIterator<Item = (&'a str, Value)>) -> Result<Self> {
        let resolved = pairs
            .into_iter()
            .map(|(name, v)| {
                sig.endo_index(name)
                    .map(|i| (i, v))
                    .ok_or_else(|| Error::input(format!("`{name}` is not an endogenous variable")))
            })
            .collect::<Result<Vec<_>>>()?;
        Intervention::from_pairs(resolved)
    }

    pub fn pairs(&self) -> &[(usize, Value)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, var: usize) -> Option<Value> {
        self.0.iter().find(|p| p.0 == var).map(|p| p.1)
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|p| p.0)
    }

    /// One slot per endogenous variable, `Some` where intervened.
    pub fn overrides(&self, n: usize) -> Vec<Option<Value>> {
        let mut out = vec![None; n];
        for &(i, v) in &self.0 {
            if i < n {
                out[i] = Some(v);
            }
        }
        out
    }

    /// Union of two interventions; fails if they disagree on a variable.
    pub fn union(&self, other: &Intervention) -> Result<Intervention> {
        let mut map: BTreeMap<usize, Value> = self.0.iter().copied().collect();
        for &(i, v) in &other.0 {
            if let Some(prev) = map.insert(i, v) {
                if prev != v {
                    return Err(Error::input("interventions disagree on a shared variable"));
                }
            }
        }
        Ok(Intervention(map.into_iter().collect()))
    }

    /// Checks variables and values against the endogenous declarations.
    pub fn check(&self, endogenous: &[VariableDecl]) -> Result<()> {
        for &(i, v) in &self.0 {
            let decl =
                endogenous.get(i).ok_or_else(|| Error::input(format!("intervention refers to variable #{i}")))?;
            if !decl.domain.contains(&v) {
                return Err(Error::input(format!("intervention sets {} to {v}, outside its domain", decl.name)));
            }
        }
        Ok(())
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayIntervention { i: self, sig }
    }

    pub fn to_named(&self, sig: &Signature) -> BTreeMap<String, Value> {
        self.0.iter().map(|&(i, v)| (sig.endogenous()[i].name.clone(), v)).collect()
    }
}

struct DisplayIntervention<'a> {
    i: &'a Intervention,
    sig: &'a Signature,
}

impl fmt::Display for DisplayIntervention<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.i.is_empty() {
            return write!(f, "∅");
        }
        let vars: Vec<&str> = self.i.vars().map(|k| self.sig.endogenous()[k].name.as_str()).collect();
        let vals: Vec<String> = self.i.pairs().iter().map(|p| p.1.to_string()).collect();
        if vars.len() == 1 {
            write!(f, "{}←{}", vars[0], vals[0])
        } else {
            write!(f, "({})←({})", vars.join(","), vals.join(","))
        }
    }
}

/// `i1 ≼ i2`: `i2` extends `i1` as a partial assignment.
pub fn natural_leq(i1: &Intervention, i2: &Intervention) -> bool {
    i1.pairs().iter().all(|&(k, v)| i2.get(k) == Some(v))
}

pub fn natural_lt(i1: &Intervention, i2: &Intervention) -> bool {
    i1.len() < i2.len() && natural_leq(i1, i2)
}

/// Closed-form size of the full intervention space, `∏ (|domain| + 1)`.
pub fn count_all(endogenous: &[VariableDecl]) -> Option<u128> {
    endogenous.iter().try_fold(1u128, |acc, d| acc.checked_mul(d.domain.len() as u128 + 1))
}

/// Every partial assignment over the endogenous variables, the empty one
/// first. Variables are digits (first declared most significant), each
/// running through "unset" and then its domain.
pub fn enumerate_all(model: &CausalModel, limits: &Limits) -> Result<Vec<Intervention>> {
    enumerate_over(model.signature().endogenous(), limits)
}

pub fn enumerate_over(endogenous: &[VariableDecl], limits: &Limits) -> Result<Vec<Intervention>> {
    let n = limits.check_interventions("intervention space", count_all(endogenous))?;
    let mut out = Vec::with_capacity(n);
    let mut digits = vec![0usize; endogenous.len()];
    loop {
        out.push(Intervention(
            digits.iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, &d)| (i, endogenous[i].domain[d - 1])).collect(),
        ));
        let mut k = digits.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] <= endogenous[k].domain.len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// An explicit finite table of interventions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InterventionMap {
    table: BTreeMap<Intervention, Intervention>,
}

impl InterventionMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(interventions: &[Intervention]) -> Self {
        interventions.iter().map(|i| (i.clone(), i.clone())).collect()
    }

    pub fn insert(&mut self, from: Intervention, to: Intervention) -> Option<Intervention> {
        self.table.insert(from, to)
    }

    pub fn get(&self, i: &Intervention) -> Option<&Intervention> {
        self.table.get(i)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Intervention, &Intervention)> {
        self.table.iter()
    }

    /// Maps each of `domain`, failing on the first element without an entry.
    pub fn apply_all(&self, domain: &[Intervention]) -> Result<Vec<Intervention>> {
        domain
            .iter()
            .map(|i| {
                self.get(i).cloned().ok_or_else(|| Error::input(format!("intervention map has no entry for {i:?}")))
            })
            .collect()
    }

    pub fn restrict(&self, domain: &[Intervention]) -> Result<InterventionMap> {
        Ok(domain.iter().cloned().zip(self.apply_all(domain)?).collect())
    }

    /// `second ∘ self`, over the domain of `self`.
    pub fn then(&self, second: &InterventionMap) -> Result<InterventionMap> {
        self.table
            .iter()
            .map(|(from, mid)| {
                second
                    .get(mid)
                    .cloned()
                    .map(|to| (from.clone(), to))
                    .ok_or_else(|| Error::input("intervention maps do not chain: missing intermediate entry"))
            })
            .collect()
    }
}

impl FromIterator<(Intervention, Intervention)> for InterventionMap {
    fn from_iter<T: IntoIterator<Item = (Intervention, Intervention)>>(iter: T) -> Self {
        InterventionMap { table: iter.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaReport {
    pub surjective: bool,
    pub order_preserving: bool,
    /// Elements of the target set that nothing maps to.
    pub unreached: Vec<Intervention>,
    /// Pairs `i1 ≺ i2` whose images are not ordered `ω(i1) ≼ ω(i2)`.
    pub order_violations: Vec<(Intervention, Intervention)>,
}

impl OmegaReport {
    pub fn holds(&self) -> bool {
        self.surjective && self.order_preserving
    }
}

/// Checks that `omega` is a surjective, order-preserving map from `low` onto
/// `high`. A strict comparability `i1 ≺ i2` must map to `ω(i1) ≼ ω(i2)`;
/// collapsing both onto one high intervention is allowed.
pub fn check_omega(omega: &InterventionMap, low: &[Intervention], high: &[Intervention]) -> Result<OmegaReport> {
    let images = omega.apply_all(low)?;
    let high_set: BTreeSet<&Intervention> = high.iter().collect();
    if let Some(bad) = images.iter().find(|i| !high_set.contains(i)) {
        return Err(Error::input(format!("intervention map sends an element outside the target set: {bad:?}")));
    }
    let image_set: BTreeSet<&Intervention> = images.iter().collect();
    let unreached: Vec<Intervention> = high.iter().filter(|h| !image_set.contains(h)).cloned().collect();

    let mut order_violations = Vec::new();
    for (a, ia) in low.iter().enumerate() {
        for (b, ib) in low.iter().enumerate() {
            if a != b && natural_lt(ia, ib) && !natural_leq(&images[a], &images[b]) {
                order_violations.push((ia.clone(), ib.clone()));
            }
        }
    }
    Ok(OmegaReport {
        surjective: unreached.is_empty(),
        order_preserving: order_violations.is_empty(),
        unreached,
        order_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decls(sizes: &[usize]) -> Vec<VariableDecl> {
        sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| VariableDecl::new(format!("X{}", i + 1), (0..n as Value).collect()))
            .collect()
    }

    fn iv(pairs: &[(usize, Value)]) -> Intervention {
        Intervention::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let l = Limits::default();
        let one = enumerate_over(&decls(&[2]), &l).unwrap();
        assert_eq!(one, vec![iv(&[]), iv(&[(0, 0)]), iv(&[(0, 1)])]);
        assert_eq!(enumerate_over(&decls(&[2, 2, 2]), &l).unwrap().len(), 27);
        assert_eq!(enumerate_over(&decls(&[2, 2, 2, 2]), &l).unwrap().len(), 81);
        assert_eq!(enumerate_over(&decls(&[3, 5]), &l).unwrap().len(), 4 * 6);
        let all = enumerate_over(&decls(&[2, 3]), &l).unwrap();
        let distinct: BTreeSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn enumeration_respects_cap() {
        let l = Limits { max_interventions: 26, ..Limits::default() };
        assert!(matches!(enumerate_over(&decls(&[2, 2, 2]), &l), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn natural_order_examples() {
        assert!(natural_leq(&iv(&[]), &iv(&[(0, 1), (1, 0)])));
        assert!(natural_leq(&iv(&[(0, 0)]), &iv(&[(0, 0), (1, 1)])));
        assert!(!natural_leq(&iv(&[(0, 0)]), &iv(&[(0, 1), (1, 1)])));
        assert!(natural_leq(&iv(&[(0, 0)]), &iv(&[(0, 0)])));
        assert!(!natural_lt(&iv(&[(0, 0)]), &iv(&[(0, 0)])));
    }

    #[test]
    fn natural_order_is_a_partial_order() {
        let all = enumerate_over(&decls(&[2, 2, 3]), &Limits::default()).unwrap();
        for a in &all {
            assert!(natural_leq(a, a));
            for b in &all {
                if natural_leq(a, b) && natural_leq(b, a) {
                    assert_eq!(a, b);
                }
                for c in &all {
                    if natural_leq(a, b) && natural_leq(b, c) {
                        assert!(natural_leq(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn omega_identity_holds() {
        let all = enumerate_over(&decls(&[2, 2]), &Limits::default()).unwrap();
        let r = check_omega(&InterventionMap::identity(&all), &all, &all).unwrap();
        assert!(r.holds());
    }

    #[test]
    fn omega_collapse_and_violation() {
        // ∅ ↦ ∅, X1←0 and (X1,X2)←(0,0) both ↦ h: allowed (h ≼ h).
        let low = vec![iv(&[]), iv(&[(0, 0)]), iv(&[(0, 0), (1, 0)])];
        let h = iv(&[(0, 1)]);
        let collapse: InterventionMap =
            vec![(low[0].clone(), iv(&[])), (low[1].clone(), h.clone()), (low[2].clone(), h.clone())]
                .into_iter()
                .collect();
        let r = check_omega(&collapse, &low, &[iv(&[]), h.clone()]).unwrap();
        assert!(r.holds());

        // images not ordered: X1←0 ↦ X1←1 but (X1,X2)←(0,0) ↦ X1←0
        let bad: InterventionMap =
            vec![(low[0].clone(), iv(&[])), (low[1].clone(), h.clone()), (low[2].clone(), iv(&[(0, 0)]))]
                .into_iter()
                .collect();
        let r = check_omega(&bad, &low, &[iv(&[]), h, iv(&[(0, 0)])]).unwrap();
        assert!(r.surjective);
        assert!(!r.order_preserving);
        assert_eq!(r.order_violations, vec![(low[1].clone(), low[2].clone())]);
    }

    #[test]
    fn omega_outside_target_is_an_error() {
        let low = vec![iv(&[])];
        let m: InterventionMap = vec![(iv(&[]), iv(&[(0, 1)]))].into_iter().collect();
        assert!(check_omega(&m, &low, &[iv(&[])]).is_err());
        assert!(check_omega(&InterventionMap::new(), &low, &[iv(&[])]).is_err());
    }

    #[test]
    fn omega_not_surjective() {
        let low = vec![iv(&[])];
        let m = InterventionMap::identity(&low);
        let r = check_omega(&m, &low, &[iv(&[]), iv(&[(0, 0)])]).unwrap();
        assert!(!r.surjective);
        assert_eq!(r.unreached, vec![iv(&[(0, 0)])]);
    }
}
