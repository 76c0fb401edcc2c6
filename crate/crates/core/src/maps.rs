//! Total maps between assignment spaces: `τ` on endogenous states and
//! `τ_U` on contexts.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::expr::{Expr, VarRef};
use crate::limits::Limits;
use crate::model::VariableDecl;
use crate::space::Space;
use crate::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapRepr {
    Table(BTreeMap<Vec<Value>, Vec<Value>>),
    /// One expression per output variable. Inputs are read by position, so
    /// `VarRef::Endo(k)` and `VarRef::Exo(k)` both mean input coordinate `k`.
    Exprs(Vec<Expr>),
}

/// A map from assignments of one variable list to assignments of another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentMap {
    repr: MapRepr,
}

/// `τ : R_L(V_L) → R_H(V_H)`.
pub type StateMap = AssignmentMap;
/// `τ_U : R_L(U_L) → R_H(U_H)`.
pub type ContextMap = AssignmentMap;

impl AssignmentMap {
    pub fn table(table: BTreeMap<Vec<Value>, Vec<Value>>) -> Self {
        AssignmentMap { repr: MapRepr::Table(table) }
    }

    pub fn exprs(exprs: Vec<Expr>) -> Self {
        AssignmentMap { repr: MapRepr::Exprs(exprs) }
    }

    pub fn identity(n: usize) -> Self {
        Self::exprs((0..n).map(|k| Expr::Var(VarRef::Endo(k))).collect())
    }

    /// Ignores its input and always returns `out`.
    pub fn constant(out: Vec<Value>) -> Self {
        Self::exprs(out.into_iter().map(Expr::Lit).collect())
    }

    /// Keeps the listed input coordinates, in order.
    pub fn projection(coords: &[usize]) -> Self {
        Self::exprs(coords.iter().map(|&k| Expr::Var(VarRef::Endo(k))).collect())
    }

    pub fn repr(&self) -> &MapRepr {
        &self.repr
    }

    pub fn apply(&self, input: &[Value]) -> Result<Vec<Value>> {
        match &self.repr {
            MapRepr::Table(t) => {
                t.get(input).cloned().ok_or_else(|| Error::input(format!("map is undefined on {input:?}")))
            }
            MapRepr::Exprs(es) => es
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    e.eval(input, input).map_err(|source| Error::Eval { var: format!("map output #{j}"), source })
                })
                .collect(),
        }
    }

    /// The map as an explicit table over `domain`.
    pub fn to_table(&self, domain: &Space, limits: &Limits) -> Result<BTreeMap<Vec<Value>, Vec<Value>>> {
        limits.check_assignments("map domain", domain.size())?;
        domain.iter().map(|x| self.apply(&x).map(|y| (x, y))).collect()
    }

    /// Checks that the map is defined on every input and lands in `to`.
    pub fn check(&self, from: &[VariableDecl], to: &[VariableDecl], limits: &Limits) -> Result<()> {
        let space = decl_space(from);
        limits.check_assignments("map domain", space.size())?;
        let target = decl_space(to);
        for x in space.iter() {
            let y = self.apply(&x)?;
            if !target.contains(&y) {
                return Err(Error::input(format!("map sends {x:?} to {y:?}, which is not well-typed")));
            }
        }
        Ok(())
    }

    /// Target points that no input reaches, in enumeration order.
    pub fn unreached(&self, from: &[VariableDecl], to: &[VariableDecl], limits: &Limits) -> Result<Vec<Vec<Value>>> {
        let space = decl_space(from);
        limits.check_assignments("map domain", space.size())?;
        let target = decl_space(to);
        limits.check_assignments("map codomain", target.size())?;
        let image: BTreeSet<Vec<Value>> = space.iter().map(|x| self.apply(&x)).collect::<Result<_>>()?;
        Ok(target.iter().filter(|y| !image.contains(y)).collect())
    }

    /// `second ∘ self`. Two expression maps compose symbolically; anything
    /// else is tabulated over `domain`.
    pub fn then(&self, second: &AssignmentMap, domain: &Space, limits: &Limits) -> Result<AssignmentMap> {
        if let (MapRepr::Exprs(first), MapRepr::Exprs(outer)) = (&self.repr, &second.repr) {
            let lookup = |r: VarRef| {
                let k = match r {
                    VarRef::Exo(k) | VarRef::Endo(k) => k,
                };
                first.get(k).cloned()
            };
            return Ok(Self::exprs(outer.iter().map(|e| e.substitute(&lookup)).collect()));
        }
        limits.check_assignments("map domain", domain.size())?;
        let table = domain
            .iter()
            .map(|x| {
                let mid = self.apply(&x)?;
                Ok((x, second.apply(&mid)?))
            })
            .collect::<Result<_>>()?;
        Ok(Self::table(table))
    }

    /// Output coordinate `j` alone, as a map to one-element assignments.
    pub fn component(&self, j: usize, domain: &Space, limits: &Limits) -> Result<AssignmentMap> {
        match &self.repr {
            MapRepr::Exprs(es) => Ok(Self::exprs(vec![es[j].clone()])),
            MapRepr::Table(_) => {
                let t = self.to_table(domain, limits)?;
                Ok(Self::table(t.into_iter().map(|(x, y)| (x, vec![y[j]])).collect()))
            }
        }
    }
}

pub(crate) fn decl_space(decls: &[VariableDecl]) -> Space {
    Space::new(decls.iter().map(|d| d.domain.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn bits(names: &[&str]) -> Vec<VariableDecl> {
        names.iter().map(|n| VariableDecl::binary(*n)).collect()
    }

    fn parse_over(names: &[&str], srcs: &[&str]) -> AssignmentMap {
        let resolve = |s: &str| names.iter().position(|n| *n == s).map(VarRef::Endo);
        AssignmentMap::exprs(srcs.iter().map(|s| parse(s, &resolve).unwrap()).collect())
    }

    #[test]
    fn expression_map_applies_and_tabulates() {
        let low = bits(&["X1", "X2", "X3"]);
        let tau = parse_over(&["X1", "X2", "X3"], &["X1 || X3", "X2 || X3"]);
        assert_eq!(tau.apply(&[1, 0, 0]).unwrap(), vec![1, 0]);
        assert_eq!(tau.apply(&[0, 0, 1]).unwrap(), vec![1, 1]);
        tau.check(&low, &bits(&["A", "B"]), &Limits::default()).unwrap();
        assert!(tau.unreached(&low, &bits(&["A", "B"]), &Limits::default()).unwrap().is_empty());
        let table = tau.to_table(&decl_space(&low), &Limits::default()).unwrap();
        assert_eq!(table.len(), 8);
    }

    #[test]
    fn ill_typed_outputs_are_rejected() {
        let tau = parse_over(&["X1", "X2"], &["X1 + X2"]);
        assert!(tau.check(&bits(&["X1", "X2"]), &bits(&["S"]), &Limits::default()).is_err());
        let sum = vec![VariableDecl::range("S", 3)];
        tau.check(&bits(&["X1", "X2"]), &sum, &Limits::default()).unwrap();
    }

    #[test]
    fn missing_table_row_is_an_error() {
        let t = AssignmentMap::table([(vec![0], vec![1])].into_iter().collect());
        assert!(t.apply(&[1]).is_err());
        assert!(t.check(&bits(&["X"]), &bits(&["Y"]), &Limits::default()).is_err());
    }

    #[test]
    fn composition_symbolic_and_tabulated_agree() {
        let names = ["X1", "X2"];
        let first = parse_over(&names, &["X1 + X2", "X1"]);
        let second = parse_over(&["S", "A"], &["S * 2 + A"]);
        let space = decl_space(&bits(&names));
        let l = Limits::default();
        let sym = first.then(&second, &space, &l).unwrap();
        assert!(matches!(sym.repr(), MapRepr::Exprs(_)));
        let tab = AssignmentMap::table(first.to_table(&space, &l).unwrap()).then(&second, &space, &l).unwrap();
        for x in space.iter() {
            assert_eq!(sym.apply(&x).unwrap(), tab.apply(&x).unwrap());
            let direct = 2 * (x[0] + x[1]) + x[0];
            assert_eq!(sym.apply(&x).unwrap(), vec![direct]);
        }
    }

    #[test]
    fn unreached_points_are_listed() {
        let low = bits(&["X"]);
        let c = AssignmentMap::constant(vec![1, 0]);
        let unreached = c.unreached(&low, &bits(&["A", "B"]), &Limits::default()).unwrap();
        assert_eq!(unreached, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
    }
}
