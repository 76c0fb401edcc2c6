//! Finite-domain recursive causal models: signatures, structural equations,
//! solving under interventions, causal formulas, and the uev test.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{self, Expr, VarRef};
use crate::intervention::{enumerate_all, Intervention};
use crate::limits::Limits;
use crate::space::Space;
use crate::Value;

/// Total assignment to the exogenous variables, in declaration order.
pub type Context = Vec<Value>;
/// Total assignment to the endogenous variables, in declaration order.
pub type EndoState = Vec<Value>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Vec<Value>,
}

impl VariableDecl {
    pub fn new(name: impl Into<String>, domain: Vec<Value>) -> Self {
        VariableDecl { name: name.into(), domain }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self::new(name, vec![0, 1])
    }

    /// Domain `{0, 1, ..., n-1}`.
    pub fn range(name: impl Into<String>, n: usize) -> Self {
        Self::new(name, (0..n as Value).collect())
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "ite"
        && s != "table"
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    exogenous: Vec<VariableDecl>,
    endogenous: Vec<VariableDecl>,
}

impl Signature {
    pub fn new(exogenous: Vec<VariableDecl>, endogenous: Vec<VariableDecl>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for d in exogenous.iter().chain(&endogenous) {
            if !is_identifier(&d.name) {
                return Err(Error::Signature(format!("`{}` is not a valid identifier", d.name)));
            }
            if !seen.insert(d.name.as_str()) {
                return Err(Error::Signature(format!("variable `{}` declared twice", d.name)));
            }
            if d.domain.is_empty() {
                return Err(Error::Signature(format!("variable `{}` has an empty domain", d.name)));
            }
            let distinct: BTreeSet<_> = d.domain.iter().collect();
            if distinct.len() != d.domain.len() {
                return Err(Error::Signature(format!("variable `{}` lists a domain value twice", d.name)));
            }
        }
        Ok(Signature { exogenous, endogenous })
    }

    pub fn exogenous(&self) -> &[VariableDecl] {
        &self.exogenous
    }

    pub fn endogenous(&self) -> &[VariableDecl] {
        &self.endogenous
    }

    pub fn exo_index(&self, name: &str) -> Option<usize> {
        self.exogenous.iter().position(|d| d.name == name)
    }

    pub fn endo_index(&self, name: &str) -> Option<usize> {
        self.endogenous.iter().position(|d| d.name == name)
    }

    pub fn resolve(&self, name: &str) -> Option<VarRef> {
        self.endo_index(name).map(VarRef::Endo).or_else(|| self.exo_index(name).map(VarRef::Exo))
    }

    pub fn decl(&self, r: VarRef) -> &VariableDecl {
        match r {
            VarRef::Exo(i) => &self.exogenous[i],
            VarRef::Endo(i) => &self.endogenous[i],
        }
    }

    pub fn name_of(&self, r: VarRef) -> String {
        self.decl(r).name.clone()
    }

    pub fn context_space(&self) -> Space {
        Space::new(self.exogenous.iter().map(|d| d.domain.clone()).collect())
    }

    pub fn state_space(&self) -> Space {
        Space::new(self.endogenous.iter().map(|d| d.domain.clone()).collect())
    }

    pub fn check_context(&self, ctx: &[Value]) -> Result<()> {
        check_assignment("context", &self.exogenous, ctx)
    }

    pub fn check_state(&self, state: &[Value]) -> Result<()> {
        check_assignment("state", &self.endogenous, state)
    }

    /// Parses an expression over this signature's variables.
    pub fn parse_expr(&self, src: &str) -> Result<Expr> {
        Ok(expr::parse(src, &|n| self.resolve(n))?)
    }

    /// Parses an expression that may only mention endogenous variables.
    pub fn parse_endo_expr(&self, src: &str) -> Result<Expr> {
        Ok(expr::parse(src, &|n| self.endo_index(n).map(VarRef::Endo))?)
    }

    /// Parses an expression that may only mention exogenous variables.
    pub fn parse_exo_expr(&self, src: &str) -> Result<Expr> {
        Ok(expr::parse(src, &|n| self.exo_index(n).map(VarRef::Exo))?)
    }

    pub fn render_expr(&self, e: &Expr) -> String {
        e.render(&|r| self.name_of(r))
    }

    /// `name=value` pairs, in declaration order.
    pub fn format_state(&self, state: &[Value]) -> String {
        format_pairs(&self.endogenous, state)
    }

    pub fn format_context(&self, ctx: &[Value]) -> String {
        format_pairs(&self.exogenous, ctx)
    }
}

fn format_pairs(decls: &[VariableDecl], values: &[Value]) -> String {
    decls.iter().zip(values).map(|(d, v)| format!("{}={}", d.name, v)).collect::<Vec<_>>().join(", ")
}

fn check_assignment(what: &str, decls: &[VariableDecl], values: &[Value]) -> Result<()> {
    if values.len() != decls.len() {
        return Err(Error::input(format!(
            "{what} has {} values but there are {} variables",
            values.len(),
            decls.len()
        )));
    }
    for (d, v) in decls.iter().zip(values) {
        if !d.domain.contains(v) {
            return Err(Error::input(format!("{what} sets {} to {v}, outside its domain", d.name)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllowedInterventions {
    /// Every partial assignment to the endogenous variables.
    All,
    List(Vec<Intervention>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DependencyOrder {
    /// Topological order of endogenous variables, ties broken by declaration.
    Acyclic(Vec<usize>),
    /// A dependency cycle, first variable repeated at the end.
    Cycle(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalModel {
    signature: Signature,
    equations: Vec<Expr>,
    allowed: AllowedInterventions,
    order: DependencyOrder,
}

impl CausalModel {
    /// Builds a model from resolved equations, one per endogenous variable.
    /// Cycles and out-of-domain equations are accepted here and reported by
    /// [`validate`].
    pub fn new(signature: Signature, equations: Vec<Expr>, allowed: AllowedInterventions) -> Result<Self> {
        if equations.len() != signature.endogenous().len() {
            return Err(Error::Model(format!(
                "{} equations for {} endogenous variables",
                equations.len(),
                signature.endogenous().len()
            )));
        }
        for (x, e) in equations.iter().enumerate() {
            for r in e.refs() {
                let ok = match r {
                    VarRef::Exo(i) => i < signature.exogenous().len(),
                    VarRef::Endo(i) => i < signature.endogenous().len() && i != x,
                };
                if !ok {
                    return Err(Error::Model(format!(
                        "equation for `{}` has an invalid reference {r}",
                        signature.endogenous()[x].name
                    )));
                }
            }
        }
        let order = compute_order(&equations);
        Ok(CausalModel { signature, equations, allowed, order })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn equations(&self) -> &[Expr] {
        &self.equations
    }

    pub fn allowed(&self) -> &AllowedInterventions {
        &self.allowed
    }

    pub fn with_allowed(mut self, allowed: AllowedInterventions) -> Self {
        self.allowed = allowed;
        self
    }

    /// The allowed interventions as an explicit list.
    pub fn allowed_list(&self, limits: &Limits) -> Result<Vec<Intervention>> {
        match &self.allowed {
            AllowedInterventions::All => enumerate_all(self, limits),
            AllowedInterventions::List(v) => Ok(v.clone()),
        }
    }

    pub fn dependency_order(&self) -> &DependencyOrder {
        &self.order
    }

    /// Endogenous variables mentioned in the equation for `x`.
    pub fn endogenous_parents(&self, x: usize) -> Vec<usize> {
        self.equations[x]
            .refs()
            .into_iter()
            .filter_map(|r| match r {
                VarRef::Endo(i) => Some(i),
                VarRef::Exo(_) => None,
            })
            .collect()
    }

    /// The unique solution of the equations in `ctx`.
    pub fn solve(&self, ctx: &[Value]) -> Result<EndoState> {
        self.solve_with(ctx, &vec![None; self.equations.len()])
    }

    /// The unique solution after replacing the equations of the intervened
    /// variables by constants.
    pub fn solve_under(&self, ctx: &[Value], i: &Intervention) -> Result<EndoState> {
        i.check(self.signature.endogenous())?;
        self.solve_with(ctx, &i.overrides(self.equations.len()))
    }

    pub(crate) fn solve_with(&self, ctx: &[Value], overrides: &[Option<Value>]) -> Result<EndoState> {
        self.signature.check_context(ctx)?;
        let order = match &self.order {
            DependencyOrder::Acyclic(o) => o,
            DependencyOrder::Cycle(_) => return Err(Error::Model("the dependency graph has a cycle".into())),
        };
        let mut state = vec![0; self.equations.len()];
        for &x in order {
            state[x] = match overrides[x] {
                Some(v) => v,
                None => self.eval_equation(x, ctx, &state)?,
            };
        }
        Ok(state)
    }

    fn eval_equation(&self, x: usize, ctx: &[Value], state: &[Value]) -> Result<Value> {
        let decl = &self.signature.endogenous()[x];
        let v = self.equations[x].eval(ctx, state).map_err(|source| Error::Eval { var: decl.name.clone(), source })?;
        if !decl.domain.contains(&v) {
            return Err(Error::OutOfDomain { var: decl.name.clone(), value: v });
        }
        Ok(v)
    }

    /// The model `M_{X←x}`: intervened equations become constants.
    pub fn apply_intervention(&self, i: &Intervention) -> Result<CausalModel> {
        i.check(self.signature.endogenous())?;
        let mut equations = self.equations.clone();
        for &(x, v) in i.pairs() {
            equations[x] = Expr::Lit(v);
        }
        CausalModel::new(self.signature.clone(), equations, self.allowed.clone())
    }

    /// `(M, u) ⊨ [Y←y]φ`.
    pub fn eval_formula(&self, ctx: &[Value], f: &CausalFormula) -> Result<bool> {
        f.body.check(self.signature.endogenous())?;
        let state = self.solve_under(ctx, &f.prefix)?;
        Ok(f.body.holds(&state))
    }
}

fn compute_order(equations: &[Expr]) -> DependencyOrder {
    let n = equations.len();
    let parents: Vec<BTreeSet<usize>> = equations
        .iter()
        .map(|e| {
            e.refs()
                .into_iter()
                .filter_map(|r| match r {
                    VarRef::Endo(i) => Some(i),
                    VarRef::Exo(_) => None,
                })
                .collect()
        })
        .collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&x| !placed[x] && parents[x].iter().all(|&p| placed[p]));
        match next {
            Some(x) => {
                placed[x] = true;
                order.push(x);
            }
            None => {
                // every unplaced variable has an unplaced parent: walk until a repeat
                let mut path = vec![(0..n).find(|&x| !placed[x]).unwrap()];
                loop {
                    let cur = *path.last().unwrap();
                    let p = *parents[cur].iter().find(|&&p| !placed[p]).unwrap();
                    if let Some(pos) = path.iter().position(|&x| x == p) {
                        let mut cycle = path[pos..].to_vec();
                        cycle.push(p);
                        return DependencyOrder::Cycle(cycle);
                    }
                    path.push(p);
                }
            }
        }
    }
    DependencyOrder::Acyclic(order)
}

/// Boolean combination of primitive events `X = x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Event { var: usize, value: Value },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn event(var: usize, value: Value) -> Self {
        Formula::Event { var, value }
    }

    pub fn negate(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn holds(&self, state: &[Value]) -> bool {
        match self {
            Formula::Event { var, value } => state[*var] == *value,
            Formula::Not(f) => !f.holds(state),
            Formula::And(a, b) => a.holds(state) && b.holds(state),
            Formula::Or(a, b) => a.holds(state) || b.holds(state),
        }
    }

    fn check(&self, endogenous: &[VariableDecl]) -> Result<()> {
        match self {
            Formula::Event { var, value } => match endogenous.get(*var) {
                None => Err(Error::input(format!("formula refers to unknown variable #{var}"))),
                Some(d) if !d.domain.contains(value) => {
                    Err(Error::input(format!("formula tests {} = {value}, outside its domain", d.name)))
                }
                Some(_) => Ok(()),
            },
            Formula::Not(f) => f.check(endogenous),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.check(endogenous)?;
                b.check(endogenous)
            }
        }
    }
}

/// `[Y←y]φ`; an empty prefix is the plain formula `φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalFormula {
    pub prefix: Intervention,
    pub body: Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Cycle,
    OutOfDomain,
    EvaluationError,
    InvalidIntervention,
    TooLargeToVerify,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Reports every violated model invariant. An empty result means the model
/// is acyclic, every equation stays inside its variable's domain on every
/// assignment of the variables it mentions, and every listed allowed
/// intervention is well-typed.
pub fn validate(model: &CausalModel, limits: &Limits) -> Vec<Diagnostic> {
    let sig = model.signature();
    let mut out = Vec::new();
    if let DependencyOrder::Cycle(c) = model.dependency_order() {
        let path: Vec<&str> = c.iter().map(|&x| sig.endogenous()[x].name.as_str()).collect();
        out.push(Diagnostic { kind: DiagnosticKind::Cycle, message: format!("cycle: {}", path.join("→")) });
    }
    for (x, eq) in model.equations().iter().enumerate() {
        let decl = &sig.endogenous()[x];
        let refs: Vec<VarRef> = eq.refs().into_iter().collect();
        let space = Space::new(refs.iter().map(|r| sig.decl(*r).domain.clone()).collect());
        if let Err(e) = limits.check_assignments("equation input space", space.size()) {
            out.push(Diagnostic {
                kind: DiagnosticKind::TooLargeToVerify,
                message: format!("equation for {}: {e}", decl.name),
            });
            continue;
        }
        let mut exo = vec![0; sig.exogenous().len()];
        let mut endo = vec![0; sig.endogenous().len()];
        for point in space.iter() {
            for (r, v) in refs.iter().zip(&point) {
                match r {
                    VarRef::Exo(i) => exo[*i] = *v,
                    VarRef::Endo(i) => endo[*i] = *v,
                }
            }
            let witness = || {
                refs.iter()
                    .zip(&point)
                    .map(|(r, v)| format!("{}={}", sig.name_of(*r), v))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            match eq.eval(&exo, &endo) {
                Ok(v) if decl.domain.contains(&v) => {}
                Ok(v) => {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::OutOfDomain,
                        message: format!("equation for {} yields {v}, outside its domain, at {}", decl.name, witness()),
                    });
                    break;
                }
                Err(e) => {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::EvaluationError,
                        message: format!("equation for {} fails at {}: {e}", decl.name, witness()),
                    });
                    break;
                }
            }
        }
    }
    if let AllowedInterventions::List(list) = model.allowed() {
        for i in list {
            if let Err(e) = i.check(sig.endogenous()) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::InvalidIntervention,
                    message: format!("allowed intervention {i:?}: {e}"),
                });
            }
        }
    }
    out
}

/// Fails with the first diagnostic if the model does not validate.
pub fn ensure_valid(model: &CausalModel, limits: &Limits) -> Result<()> {
    match validate(model, limits).into_iter().next() {
        None => Ok(()),
        Some(d) => Err(Error::Model(d.message)),
    }
}

/// Variables whose value actually changes the equation's output for some
/// assignment of the other mentioned variables.
pub fn semantic_support(model: &CausalModel, x: usize, limits: &Limits) -> Result<BTreeSet<VarRef>> {
    let sig = model.signature();
    let eq = &model.equations()[x];
    let refs: Vec<VarRef> = eq.refs().into_iter().collect();
    let space = Space::new(refs.iter().map(|r| sig.decl(*r).domain.clone()).collect());
    limits.check_assignments("equation input space", space.size())?;
    let mut support = BTreeSet::new();
    let mut exo = vec![0; sig.exogenous().len()];
    let mut endo = vec![0; sig.endogenous().len()];
    let mut eval = |point: &[Value]| -> Result<Value> {
        for (r, v) in refs.iter().zip(point) {
            match r {
                VarRef::Exo(i) => exo[*i] = *v,
                VarRef::Endo(i) => endo[*i] = *v,
            }
        }
        eq.eval(&exo, &endo).map_err(|source| Error::Eval { var: sig.endogenous()[x].name.clone(), source })
    };
    for (k, r) in refs.iter().enumerate() {
        let domain = &sig.decl(*r).domain;
        'points: for point in space.iter() {
            // visit each assignment of the other variables once
            if point[k] != domain[0] {
                continue;
            }
            let base = eval(&point)?;
            let mut p = point.clone();
            for &alt in &domain[1..] {
                p[k] = alt;
                if eval(&p)? != base {
                    support.insert(*r);
                    break 'points;
                }
            }
        }
    }
    Ok(support)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UevViolation {
    /// The equation depends on more than one exogenous variable.
    SeveralExogenous { var: usize, exogenous: Vec<usize> },
    /// Two endogenous variables depend on the same exogenous variable.
    Shared { exogenous: usize, vars: (usize, usize) },
    /// Not enough exogenous variables to give each endogenous one its own.
    TooFewExogenous { unassigned: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UevReport {
    pub holds: bool,
    /// The private exogenous variable chosen for each endogenous variable.
    pub assignment: Vec<Option<usize>>,
    pub violation: Option<UevViolation>,
}

/// Unique exogenous variables: an injective choice `X ↦ U_X` such that
/// `U_X` is the only exogenous variable the equation of `X` depends on.
/// Dependence is semantic (see [`semantic_support`]) and direct; endogenous
/// parents do not pass their exogenous dependence on.
pub fn check_uev(model: &CausalModel, limits: &Limits) -> Result<UevReport> {
    let n = model.signature().endogenous().len();
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut owner: Vec<Option<usize>> = vec![None; model.signature().exogenous().len()];
    let fail = |assignment, v| Ok(UevReport { holds: false, assignment, violation: Some(v) });
    for x in 0..n {
        let exos: Vec<usize> = semantic_support(model, x, limits)?
            .into_iter()
            .filter_map(|r| match r {
                VarRef::Exo(u) => Some(u),
                VarRef::Endo(_) => None,
            })
            .collect();
        match exos.as_slice() {
            [] => {}
            [u] => {
                if let Some(y) = owner[*u] {
                    return fail(assignment, UevViolation::Shared { exogenous: *u, vars: (y, x) });
                }
                owner[*u] = Some(x);
                assignment[x] = Some(*u);
            }
            _ => return fail(assignment, UevViolation::SeveralExogenous { var: x, exogenous: exos }),
        }
    }
    let mut free = (0..owner.len()).filter(|&u| owner[u].is_none());
    for x in 0..n {
        if assignment[x].is_none() {
            match free.next() {
                Some(u) => assignment[x] = Some(u),
                None => return fail(assignment, UevViolation::TooFewExogenous { unassigned: x }),
            }
        }
    }
    Ok(UevReport { holds: true, assignment, violation: None })
}

/// Declares variables and equations by name; equations are parsed when the
/// model is built, so they may mention variables declared later.
#[derive(Debug, Clone, Default)]
pub struct ModelBuilder {
    exogenous: Vec<VariableDecl>,
    endogenous: Vec<(VariableDecl, String)>,
    allowed: Option<Vec<Vec<(String, Value)>>>,
}

impl ModelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn exo(mut self, decl: VariableDecl) -> Self {
        self.exogenous.push(decl);
        self
    }

    pub fn endo(mut self, decl: VariableDecl, equation: impl Into<String>) -> Self {
        self.endogenous.push((decl, equation.into()));
        self
    }

    pub fn allow_all(mut self) -> Self {
        self.allowed = None;
        self
    }

    /// Adds one allowed intervention, as `(variable, value)` pairs.
    pub fn allow(mut self, pairs: &[(&str, Value)]) -> Self {
        self.allowed.get_or_insert_with(Vec::new).push(pairs.iter().map(|(n, v)| (n.to_string(), *v)).collect());
        self
    }

    /// Starts an explicit (possibly empty) list of allowed interventions.
    pub fn allow_none(mut self) -> Self {
        self.allowed = Some(Vec::new());
        self
    }

    pub fn build(self) -> Result<CausalModel> {
        let (decls, sources): (Vec<_>, Vec<_>) = self.endogenous.into_iter().unzip();
        let sig = Signature::new(self.exogenous, decls)?;
        let equations = sources.iter().map(|s| sig.parse_expr(s)).collect::<Result<Vec<_>>>()?;
        let allowed = match self.allowed {
            None => AllowedInterventions::All,
            Some(list) => AllowedInterventions::List(
                list.iter()
                    .map(|pairs| Intervention::from_named(&sig, pairs.iter().map(|(n, v)| (n.as_str(), *v))))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        CausalModel::new(sig, equations, allowed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example4_m1() -> CausalModel {
        ModelBuilder::new()
            .exo(VariableDecl::binary("U1"))
            .exo(VariableDecl::binary("U2"))
            .endo(VariableDecl::binary("X1"), "U1")
            .endo(VariableDecl::binary("X2"), "X1")
            .allow(&[("X1", 0)])
            .allow(&[("X1", 1)])
            .build()
            .unwrap()
    }

    fn three_independent() -> CausalModel {
        ModelBuilder::new()
            .exo(VariableDecl::binary("U1"))
            .exo(VariableDecl::binary("U2"))
            .exo(VariableDecl::binary("U3"))
            .endo(VariableDecl::binary("X1"), "U1")
            .endo(VariableDecl::binary("X2"), "U2")
            .endo(VariableDecl::binary("X3"), "U3")
            .build()
            .unwrap()
    }

    fn iv(m: &CausalModel, pairs: &[(&str, Value)]) -> Intervention {
        Intervention::from_named(m.signature(), pairs.iter().copied()).unwrap()
    }

    #[test]
    fn cycle_is_diagnosed() {
        let m = ModelBuilder::new()
            .endo(VariableDecl::binary("X1"), "X2")
            .endo(VariableDecl::binary("X2"), "X1")
            .build()
            .unwrap();
        let d = validate(&m, &Limits::default());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Cycle);
        assert_eq!(d[0].message, "cycle: X1→X2→X1");
        assert!(m.solve(&[]).is_err());
    }

    #[test]
    fn out_of_domain_is_diagnosed_with_witness() {
        let m = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .endo(VariableDecl::binary("X"), "U + 1")
            .build()
            .unwrap();
        let d = validate(&m, &Limits::default());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::OutOfDomain);
        assert!(d[0].message.ends_with("at U=1"), "{}", d[0].message);
        assert!(matches!(m.solve(&[1]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn malformed_allowed_intervention_is_diagnosed() {
        let m = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .endo(VariableDecl::binary("X"), "U")
            .allow(&[("X", 7)])
            .build()
            .unwrap();
        let d = validate(&m, &Limits::default());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::InvalidIntervention);
    }

    #[test]
    fn independent_model_validates() {
        assert!(validate(&three_independent(), &Limits::default()).is_empty());
    }

    #[test]
    fn signature_rejects_duplicates_and_empty_domains() {
        assert!(Signature::new(vec![VariableDecl::binary("A")], vec![VariableDecl::binary("A")]).is_err());
        assert!(Signature::new(vec![], vec![VariableDecl::new("X", vec![])]).is_err());
        assert!(Signature::new(vec![], vec![VariableDecl::new("X", vec![1, 1])]).is_err());
        assert!(Signature::new(vec![], vec![VariableDecl::binary("ite")]).is_err());
    }

    #[test]
    fn unknown_variable_is_a_build_error() {
        let r = ModelBuilder::new().endo(VariableDecl::binary("X"), "Q").build();
        assert!(matches!(r, Err(Error::Parse(_))));
    }

    #[test]
    fn solve_examples() {
        let m = example4_m1();
        assert_eq!(m.solve(&[1, 0]).unwrap(), vec![1, 1]);
        assert_eq!(m.solve_under(&[0, 0], &iv(&m, &[("X1", 1)])).unwrap(), vec![1, 1]);
        let a = three_independent();
        assert_eq!(a.solve_under(&[0, 0, 1], &iv(&a, &[("X3", 0)])).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn full_intervention_and_empty_intervention() {
        let m = example4_m1();
        for ctx in m.signature().context_space().iter() {
            assert_eq!(m.solve_under(&ctx, &Intervention::empty()).unwrap(), m.solve(&ctx).unwrap());
            for v in m.signature().state_space().iter() {
                assert_eq!(m.solve_under(&ctx, &Intervention::full(&v)).unwrap(), v);
            }
        }
    }

    #[test]
    fn apply_intervention_replaces_equations() {
        let m = example4_m1();
        assert_eq!(m.apply_intervention(&Intervention::empty()).unwrap(), m);
        let mi = m.apply_intervention(&iv(&m, &[("X1", 0)])).unwrap();
        assert_eq!(mi.equations()[0], Expr::Lit(0));
        assert_eq!(mi.equations()[1], m.equations()[1]);
        assert_eq!(mi.allowed(), m.allowed());
        let all = m.apply_intervention(&iv(&m, &[("X1", 1), ("X2", 0)])).unwrap();
        assert!(all.equations().iter().all(|e| matches!(e, Expr::Lit(_))));
        assert!(m.apply_intervention(&iv(&m, &[("X1", 3)])).is_err());
    }

    #[test]
    fn formulas() {
        let m = example4_m1();
        let f = CausalFormula { prefix: iv(&m, &[("X1", 0)]), body: Formula::event(1, 0) };
        assert!(m.eval_formula(&[1, 0], &f).unwrap());
        let taut = CausalFormula {
            prefix: iv(&m, &[("X2", 1)]),
            body: Formula::event(0, 1).or(Formula::event(0, 1).negate()),
        };
        assert!(m.eval_formula(&[0, 1], &taut).unwrap());
        let a = three_independent();
        let g = CausalFormula { prefix: Intervention::empty(), body: Formula::event(0, 1).and(Formula::event(1, 0)) };
        assert!(a.eval_formula(&[1, 0, 0], &g).unwrap());
        let bad = CausalFormula { prefix: Intervention::empty(), body: Formula::event(9, 0) };
        assert!(a.eval_formula(&[1, 0, 0], &bad).is_err());
    }

    #[test]
    fn dependency_orders() {
        assert_eq!(example4_m1().dependency_order(), &DependencyOrder::Acyclic(vec![0, 1]));
        assert_eq!(three_independent().dependency_order(), &DependencyOrder::Acyclic(vec![0, 1, 2]));
        let m = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .endo(VariableDecl::binary("A"), "B")
            .endo(VariableDecl::binary("B"), "C")
            .endo(VariableDecl::binary("C"), "U")
            .build()
            .unwrap();
        assert_eq!(m.dependency_order(), &DependencyOrder::Acyclic(vec![2, 1, 0]));
    }

    #[test]
    fn uev() {
        let l = Limits::default();
        assert!(check_uev(&example4_m1(), &l).unwrap().holds);
        let shared = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .endo(VariableDecl::binary("X1"), "U")
            .endo(VariableDecl::binary("X2"), "U")
            .build()
            .unwrap();
        let r = check_uev(&shared, &l).unwrap();
        assert!(!r.holds);
        assert_eq!(r.violation, Some(UevViolation::Shared { exogenous: 0, vars: (0, 1) }));
        // syntactic mention without semantic dependence does not count
        let fake = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .exo(VariableDecl::binary("W"))
            .endo(VariableDecl::binary("X1"), "U")
            .endo(VariableDecl::binary("X2"), "W + U - U")
            .build()
            .unwrap();
        assert!(check_uev(&fake, &l).unwrap().holds);
        let two = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .exo(VariableDecl::binary("W"))
            .endo(VariableDecl::binary("X"), "U * W")
            .build()
            .unwrap();
        assert!(matches!(check_uev(&two, &l).unwrap().violation, Some(UevViolation::SeveralExogenous { var: 0, .. })));
        let starved = ModelBuilder::new()
            .exo(VariableDecl::binary("U"))
            .endo(VariableDecl::binary("X1"), "U")
            .endo(VariableDecl::binary("X2"), "X1")
            .build()
            .unwrap();
        assert!(!check_uev(&starved, &l).unwrap().holds);
    }
}
