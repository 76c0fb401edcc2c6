//! Verdicts, witnesses and counterexamples produced by the checks.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde_json::{json, Map, Value as Json};

use crate::intervention::{Intervention, InterventionMap};
use crate::maps::ContextMap;
use crate::model::{Signature, VariableDecl};
use crate::prob::Distribution;
use crate::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    Exact,
    Compatible,
    Uniform,
    Probe,
    TauAbstraction,
    Strong,
    Constructive,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Exact => "exact",
            CheckKind::Compatible => "compatible",
            CheckKind::Uniform => "uniform",
            CheckKind::Probe => "probe",
            CheckKind::TauAbstraction => "abstraction",
            CheckKind::Strong => "strong",
            CheckKind::Constructive => "constructive",
        }
    }
}

/// The condition a failing check stopped at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Interventional distributions agree after pushing through `τ`.
    DistributionsAgree,
    /// The given `τ_U` commutes with solving.
    Compatible,
    /// Every low context has a high correspondent.
    Correspondence,
    /// Correspondents can be chosen to cover every high context.
    SurjectiveContextMap,
    TauSurjective,
    /// `ω_τ` is defined on every allowed low intervention.
    OmegaDefined,
    /// The allowed high interventions are exactly the image of `ω_τ`.
    InterventionSetsMatch,
    /// Every high intervention is induced by some low one.
    AllHighInterventions,
    Factoring,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::DistributionsAgree => "distributions-agree",
            Condition::Compatible => "compatible",
            Condition::Correspondence => "correspondence",
            Condition::SurjectiveContextMap => "surjective-context-map",
            Condition::TauSurjective => "tau-surjective",
            Condition::OmegaDefined => "omega-defined",
            Condition::InterventionSetsMatch => "intervention-sets-match",
            Condition::AllHighInterventions => "all-high-interventions",
            Condition::Factoring => "factoring",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    /// `Pr_H^{ω(i)}(state) ≠ τ(Pr_L^i)(state)`.
    DistributionMismatch {
        intervention: Intervention,
        high_intervention: Intervention,
        state: Vec<Value>,
        high: BigRational,
        pushed: BigRational,
    },
    /// `τ(M_L(u_L, i)) ≠ M_H(τ_U(u_L), ω(i))`.
    Incompatible {
        context: Vec<Value>,
        high_context: Vec<Value>,
        intervention: Intervention,
        abstracted: Vec<Value>,
        high: Vec<Value>,
    },
    /// No high context reproduces this low context on all of `conflicting`,
    /// a minimal such set of low interventions.
    NoCorrespondent {
        context: Vec<Value>,
        conflicting: Vec<Intervention>,
    },
    /// High contexts left uncovered by a maximum matching of correspondents.
    NonSurjectiveContextMap {
        uncovered: Vec<Vec<Value>>,
    },
    TauNotSurjective {
        missing: Vec<Value>,
        missing_count: usize,
    },
    OmegaUndefined {
        intervention: Intervention,
    },
    InterventionSetMismatch {
        unreached: Vec<Intervention>,
        unexpected: Vec<Intervention>,
    },
    MissingHighInterventions {
        missing: Vec<Intervention>,
    },
    /// Two low states agree on a cell but `τ` gives different values for
    /// that cell's high variable.
    FactoringFails {
        cell: usize,
        states: (Vec<Value>, Vec<Value>),
    },
    /// The given component maps disagree with `τ` on a state.
    ComponentMismatch {
        state: Vec<Value>,
        expected: Vec<Value>,
        got: Vec<Value>,
    },
    /// No partition of the low variables factors `τ`.
    NoPartition {
        conflict: Option<(usize, usize, usize)>,
    },
    /// A sampled low distribution for which the pushed-forward high
    /// distribution is not an exact transformation.
    ProbeFailure {
        sample: usize,
        distribution: Distribution,
        inner: Box<Counterexample>,
    },
}

/// A partition of the low endogenous variables: one non-empty cell per high
/// endogenous variable, plus a marginalized remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub cells: Vec<Vec<usize>>,
    pub marginal: Vec<usize>,
}

/// Per-cell maps `τ_j : R_L(Z_j) → R_H(Y_j)`.
pub type ComponentMaps = Vec<BTreeMap<Vec<Value>, Value>>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witness {
    pub tau_u: Option<ContextMap>,
    pub omega: Option<InterventionMap>,
    pub partition: Option<(Partition, ComponentMaps)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub kind: CheckKind,
    pub holds: bool,
    pub failed: Option<Condition>,
    pub witness: Witness,
    pub counterexample: Option<Counterexample>,
}

impl CheckReport {
    pub fn pass(kind: CheckKind, witness: Witness) -> Self {
        CheckReport { kind, holds: true, failed: None, witness, counterexample: None }
    }

    pub fn fail(kind: CheckKind, failed: Condition, counterexample: Counterexample) -> Self {
        CheckReport {
            kind,
            holds: false,
            failed: Some(failed),
            witness: Witness::default(),
            counterexample: Some(counterexample),
        }
    }

    /// Relabels a sub-check's report as this check's.
    pub(crate) fn lift(mut self, kind: CheckKind) -> Self {
        self.kind = kind;
        self
    }

    /// One line for humans.
    pub fn summary(&self, low: &Signature, high: &Signature) -> String {
        let verdict = if self.holds { "holds" } else { "fails" };
        let mut s = format!("{}: {verdict}", self.kind.name());
        if let Some(c) = self.failed {
            s.push_str(&format!(" ({})", c.name()));
        }
        if let Some(cx) = &self.counterexample {
            s.push_str(": ");
            s.push_str(&describe(cx, low, high));
        }
        s
    }

    pub fn to_json(&self, low: &Signature, high: &Signature) -> Json {
        let mut obj = Map::new();
        obj.insert("check".into(), json!(self.kind.name()));
        obj.insert("holds".into(), json!(self.holds));
        obj.insert("failed".into(), json!(self.failed.map(Condition::name)));
        let mut w = Map::new();
        if let Some(t) = &self.witness.tau_u {
            w.insert("tau_u".into(), context_map_json(t, low, high));
        }
        if let Some(o) = &self.witness.omega {
            w.insert("omega".into(), omega_json(o, low, high));
        }
        if let Some((p, comps)) = &self.witness.partition {
            w.insert("partition".into(), partition_json(p, low, high));
            w.insert("components".into(), components_json(p, comps, low, high));
        }
        obj.insert("witness".into(), Json::Object(w));
        obj.insert(
            "counterexample".into(),
            self.counterexample.as_ref().map_or(Json::Null, |c| counterexample_json(c, low, high)),
        );
        Json::Object(obj)
    }
}

/// `p/q`, including for integers.
pub fn rational_string(p: &BigRational) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

pub fn named(decls: &[VariableDecl], values: &[Value]) -> Json {
    Json::Object(decls.iter().zip(values).map(|(d, v)| (d.name.clone(), json!(v))).collect())
}

pub fn intervention_json(i: &Intervention, sig: &Signature) -> Json {
    json!(i.to_named(sig))
}

pub fn omega_json(o: &InterventionMap, low: &Signature, high: &Signature) -> Json {
    Json::Array(
        o.iter().map(|(a, b)| json!({"from": intervention_json(a, low), "to": intervention_json(b, high)})).collect(),
    )
}

fn context_map_json(t: &ContextMap, low: &Signature, high: &Signature) -> Json {
    let rows = match t.repr() {
        crate::maps::MapRepr::Table(rows) => rows
            .iter()
            .map(|(a, b)| json!({"from": named(low.exogenous(), a), "to": named(high.exogenous(), b)}))
            .collect(),
        crate::maps::MapRepr::Exprs(_) => Vec::new(),
    };
    json!({ "table": rows })
}

pub fn partition_json(p: &Partition, low: &Signature, high: &Signature) -> Json {
    let names = |vs: &[usize]| -> Vec<String> { vs.iter().map(|&k| low.endogenous()[k].name.clone()).collect() };
    let cells: Map<String, Json> =
        p.cells.iter().enumerate().map(|(j, c)| (high.endogenous()[j].name.clone(), json!(names(c)))).collect();
    json!({"cells": cells, "marginal": names(&p.marginal)})
}

fn components_json(p: &Partition, comps: &ComponentMaps, low: &Signature, high: &Signature) -> Json {
    let obj: Map<String, Json> = p
        .cells
        .iter()
        .zip(comps)
        .enumerate()
        .map(|(j, (cell, table))| {
            let decls: Vec<VariableDecl> = cell.iter().map(|&k| low.endogenous()[k].clone()).collect();
            let rows: Vec<Json> = table.iter().map(|(z, y)| json!({"from": named(&decls, z), "to": y})).collect();
            (high.endogenous()[j].name.clone(), Json::Array(rows))
        })
        .collect();
    Json::Object(obj)
}

fn counterexample_json(c: &Counterexample, low: &Signature, high: &Signature) -> Json {
    let li = |i: &Intervention| intervention_json(i, low);
    match c {
        Counterexample::DistributionMismatch { intervention, high_intervention, state, high: ph, pushed } => json!({
            "kind": "distribution-mismatch",
            "intervention": li(intervention),
            "high_intervention": intervention_json(high_intervention, high),
            "state": named(high.endogenous(), state),
            "high_probability": rational_string(ph),
            "pushed_probability": rational_string(pushed),
        }),
        Counterexample::Incompatible { context, high_context, intervention, abstracted, high: hs } => json!({
            "kind": "incompatible",
            "context": named(low.exogenous(), context),
            "high_context": named(high.exogenous(), high_context),
            "intervention": li(intervention),
            "abstracted_low_state": named(high.endogenous(), abstracted),
            "high_state": named(high.endogenous(), hs),
        }),
        Counterexample::NoCorrespondent { context, conflicting } => json!({
            "kind": "no-correspondent",
            "context": named(low.exogenous(), context),
            "conflicting_interventions": conflicting.iter().map(li).collect::<Vec<_>>(),
        }),
        Counterexample::NonSurjectiveContextMap { uncovered } => json!({
            "kind": "non-surjective-context-map",
            "uncovered_high_contexts": uncovered.iter().map(|u| named(high.exogenous(), u)).collect::<Vec<_>>(),
        }),
        Counterexample::TauNotSurjective { missing, missing_count } => json!({
            "kind": "tau-not-surjective",
            "missing_state": named(high.endogenous(), missing),
            "missing_count": missing_count,
        }),
        Counterexample::OmegaUndefined { intervention } => json!({
            "kind": "omega-undefined",
            "intervention": li(intervention),
        }),
        Counterexample::InterventionSetMismatch { unreached, unexpected } => json!({
            "kind": "intervention-set-mismatch",
            "unreached": unreached.iter().map(|i| intervention_json(i, high)).collect::<Vec<_>>(),
            "unexpected": unexpected.iter().map(|i| intervention_json(i, high)).collect::<Vec<_>>(),
        }),
        Counterexample::MissingHighInterventions { missing } => json!({
            "kind": "missing-high-interventions",
            "missing": missing.iter().map(|i| intervention_json(i, high)).collect::<Vec<_>>(),
        }),
        Counterexample::FactoringFails { cell, states } => json!({
            "kind": "factoring-fails",
            "high_variable": high.endogenous()[*cell].name,
            "states": [named(low.endogenous(), &states.0), named(low.endogenous(), &states.1)],
        }),
        Counterexample::ComponentMismatch { state, expected, got } => json!({
            "kind": "component-mismatch",
            "state": named(low.endogenous(), state),
            "tau": named(high.endogenous(), expected),
            "components": named(high.endogenous(), got),
        }),
        Counterexample::NoPartition { conflict } => json!({
            "kind": "no-partition",
            "conflict": conflict.map(|(k, a, b)| json!({
                "low_variable": low.endogenous()[k].name,
                "high_variables": [high.endogenous()[a].name, high.endogenous()[b].name],
            })),
        }),
        Counterexample::ProbeFailure { sample, distribution, inner } => json!({
            "kind": "probe-failure",
            "sample": sample,
            "distribution": distribution
                .iter()
                .map(|(u, p)| json!({"context": named(low.exogenous(), u), "p": rational_string(p)}))
                .collect::<Vec<_>>(),
            "inner": counterexample_json(inner, low, high),
        }),
    }
}

fn describe(c: &Counterexample, low: &Signature, high: &Signature) -> String {
    let li = |i: &Intervention| i.display(low).to_string();
    let hi = |i: &Intervention| i.display(high).to_string();
    let list = |v: &[Intervention], f: &dyn Fn(&Intervention) -> String| {
        v.iter().take(5).map(f).collect::<Vec<_>>().join(", ") + if v.len() > 5 { ", ..." } else { "" }
    };
    match c {
        Counterexample::DistributionMismatch { intervention, high_intervention, state, high: ph, pushed } => format!(
            "under {} / {}, state ({}) has high probability {} but pushed probability {}",
            li(intervention),
            hi(high_intervention),
            high.format_state(state),
            rational_string(ph),
            rational_string(pushed)
        ),
        Counterexample::Incompatible { context, intervention, abstracted, high: hs, .. } => format!(
            "context ({}) under {}: tau gives ({}), high model gives ({})",
            low.format_context(context),
            li(intervention),
            high.format_state(abstracted),
            high.format_state(hs)
        ),
        Counterexample::NoCorrespondent { context, conflicting } => format!(
            "low context ({}) has no high correspondent; conflicting interventions: {}",
            low.format_context(context),
            list(conflicting, &li)
        ),
        Counterexample::NonSurjectiveContextMap { uncovered } => format!(
            "{} high context(s) cannot be covered, first ({})",
            uncovered.len(),
            uncovered.first().map(|u| high.format_context(u)).unwrap_or_default()
        ),
        Counterexample::TauNotSurjective { missing, missing_count } => {
            format!("{missing_count} high state(s) not in the image of tau, first ({})", high.format_state(missing))
        }
        Counterexample::OmegaUndefined { intervention } => {
            format!("induced intervention map is undefined on {}", li(intervention))
        }
        Counterexample::InterventionSetMismatch { unreached, unexpected } => format!(
            "allowed high interventions not reached: [{}]; reached but not allowed: [{}]",
            list(unreached, &hi),
            list(unexpected, &hi)
        ),
        Counterexample::MissingHighInterventions { missing } => {
            format!("{} high intervention(s) are not induced, e.g. {}", missing.len(), list(missing, &hi))
        }
        Counterexample::FactoringFails { cell, states } => format!(
            "{} is not a function of its cell: ({}) and ({})",
            high.endogenous()[*cell].name,
            low.format_state(&states.0),
            low.format_state(&states.1)
        ),
        Counterexample::ComponentMismatch { state, expected, got } => format!(
            "at ({}) tau gives ({}) but the components give ({})",
            low.format_state(state),
            high.format_state(expected),
            high.format_state(got)
        ),
        Counterexample::NoPartition { conflict: Some((k, a, b)) } => format!(
            "{} influences both {} and {}",
            low.endogenous()[*k].name,
            high.endogenous()[*a].name,
            high.endogenous()[*b].name
        ),
        Counterexample::NoPartition { conflict: None } => "no partition factors tau".to_string(),
        Counterexample::ProbeFailure { sample, inner, .. } => {
            format!("sample {sample}: {}", describe(inner, low, high))
        }
    }
}
