//! JSON file formats for models, distributions, maps and partitions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::corpus::Bundle;
use crate::error::{Error, Result};
use crate::intervention::{Intervention, InterventionMap};
use crate::maps::{AssignmentMap, ContextMap, MapRepr, StateMap};
use crate::model::{AllowedInterventions, CausalModel, Signature, VariableDecl};
use crate::prob::Distribution;
use crate::report::{self, Partition};
use crate::Value;

type Named = BTreeMap<String, Value>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExoFile {
    pub name: String,
    pub domain: Vec<Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndoFile {
    pub name: String,
    pub domain: Vec<Value>,
    pub equation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AllowedFile {
    Keyword(String),
    List(Vec<Named>),
}

impl Default for AllowedFile {
    fn default() -> Self {
        AllowedFile::Keyword("all".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub exogenous: Vec<ExoFile>,
    pub endogenous: Vec<EndoFile>,
    #[serde(default)]
    pub allowed_interventions: AllowedFile,
}

impl ModelFile {
    pub fn from_model(m: &CausalModel) -> Self {
        let sig = m.signature();
        ModelFile {
            exogenous: sig
                .exogenous()
                .iter()
                .map(|d| ExoFile { name: d.name.clone(), domain: d.domain.clone() })
                .collect(),
            endogenous: sig
                .endogenous()
                .iter()
                .zip(m.equations())
                .map(|(d, e)| EndoFile { name: d.name.clone(), domain: d.domain.clone(), equation: sig.render_expr(e) })
                .collect(),
            allowed_interventions: match m.allowed() {
                AllowedInterventions::All => AllowedFile::default(),
                AllowedInterventions::List(l) => AllowedFile::List(l.iter().map(|i| i.to_named(sig)).collect()),
            },
        }
    }

    pub fn into_model(self) -> Result<CausalModel> {
        let exo = self.exogenous.into_iter().map(|d| VariableDecl::new(d.name, d.domain)).collect();
        let (endo, srcs): (Vec<_>, Vec<_>) =
            self.endogenous.into_iter().map(|d| (VariableDecl::new(d.name, d.domain), d.equation)).unzip();
        let sig = Signature::new(exo, endo)?;
        let equations = srcs.iter().map(|s| sig.parse_expr(s)).collect::<Result<Vec<_>>>()?;
        let allowed = match self.allowed_interventions {
            AllowedFile::Keyword(k) if k == "all" => AllowedInterventions::All,
            AllowedFile::Keyword(k) => {
                return Err(Error::input(format!("allowed_interventions must be \"all\" or a list, got \"{k}\"")))
            }
            AllowedFile::List(l) => {
                AllowedInterventions::List(l.iter().map(|i| intervention_from_named(&sig, i)).collect::<Result<_>>()?)
            }
        };
        CausalModel::new(sig, equations, allowed)
    }
}

fn intervention_from_named(sig: &Signature, i: &Named) -> Result<Intervention> {
    let i = Intervention::from_named(sig, i.iter().map(|(k, v)| (k.as_str(), *v)))?;
    i.check(sig.endogenous())?;
    Ok(i)
}

/// Reads a total assignment to `decls` from a name → value object.
fn assignment(decls: &[VariableDecl], obj: &Named, what: &str) -> Result<Vec<Value>> {
    if let Some(extra) = obj.keys().find(|k| !decls.iter().any(|d| &d.name == *k)) {
        return Err(Error::input(format!("{what} names unknown variable `{extra}`")));
    }
    decls
        .iter()
        .map(|d| {
            let v = *obj.get(&d.name).ok_or_else(|| Error::input(format!("{what} does not assign `{}`", d.name)))?;
            if !d.domain.contains(&v) {
                return Err(Error::OutOfDomain { var: d.name.clone(), value: v });
            }
            Ok(v)
        })
        .collect()
}

fn named_map(decls: &[VariableDecl], values: &[Value]) -> Named {
    decls.iter().zip(values).map(|(d, v)| (d.name.clone(), *v)).collect()
}

pub fn parse_model(src: &str) -> Result<CausalModel> {
    serde_json::from_str::<ModelFile>(src)?.into_model()
}

pub fn model_to_json(m: &CausalModel) -> Json {
    serde_json::to_value(ModelFile::from_model(m)).expect("model files serialize")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistEntry {
    context: Named,
    p: String,
}

/// A distribution over the contexts of `sig`.
pub fn parse_distribution(sig: &Signature, src: &str) -> Result<Distribution> {
    let entries: Vec<DistEntry> = serde_json::from_str(src)?;
    let masses = entries
        .iter()
        .map(|e| {
            let p: BigRational =
                e.p.trim().parse().map_err(|_| Error::input(format!("probability `{}` is not a rational p/q", e.p)))?;
            Ok((assignment(sig.exogenous(), &e.context, "distribution entry")?, p))
        })
        .collect::<Result<Vec<_>>>()?;
    Distribution::new(masses)
}

pub fn distribution_to_json(d: &Distribution, sig: &Signature) -> Json {
    Json::Array(
        d.iter()
            .map(|(c, p)| json!({"context": named_map(sig.exogenous(), c), "p": report::rational_string(p)}))
            .collect(),
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    from: Named,
    to: Named,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum MapFile {
    Table(Vec<Row>),
    Exprs(BTreeMap<String, String>),
}

fn parse_map(
    from: &[VariableDecl],
    to: &[VariableDecl],
    parse: &dyn Fn(&str) -> Result<crate::expr::Expr>,
    src: &str,
) -> Result<AssignmentMap> {
    match serde_json::from_str::<MapFile>(src)? {
        MapFile::Table(rows) => {
            let mut table = BTreeMap::new();
            for r in &rows {
                let a = assignment(from, &r.from, "map row")?;
                let b = assignment(to, &r.to, "map row")?;
                if table.insert(a, b).is_some() {
                    return Err(Error::input("map table has two rows for the same input"));
                }
            }
            Ok(AssignmentMap::table(table))
        }
        MapFile::Exprs(exprs) => {
            if let Some(extra) = exprs.keys().find(|k| !to.iter().any(|d| &d.name == *k)) {
                return Err(Error::input(format!("map names unknown output variable `{extra}`")));
            }
            let outs = to
                .iter()
                .map(|d| {
                    let s = exprs
                        .get(&d.name)
                        .ok_or_else(|| Error::input(format!("map gives no expression for `{}`", d.name)))?;
                    parse(s)
                })
                .collect::<Result<_>>()?;
            Ok(AssignmentMap::exprs(outs))
        }
    }
}

fn map_to_json(
    m: &AssignmentMap,
    from: &[VariableDecl],
    to: &[VariableDecl],
    render: &dyn Fn(&crate::expr::Expr) -> String,
) -> Json {
    match m.repr() {
        MapRepr::Table(t) => json!({
            "table": t.iter().map(|(a, b)| json!({"from": named_map(from, a), "to": named_map(to, b)})).collect::<Vec<_>>()
        }),
        MapRepr::Exprs(es) => {
            json!({"exprs": to.iter().zip(es).map(|(d, e)| (d.name.clone(), render(e))).collect::<BTreeMap<_, _>>()})
        }
    }
}

/// `τ` from low endogenous states to high ones.
pub fn parse_state_map(low: &Signature, high: &Signature, src: &str) -> Result<StateMap> {
    parse_map(low.endogenous(), high.endogenous(), &|s| low.parse_endo_expr(s), src)
}

pub fn state_map_to_json(t: &StateMap, low: &Signature, high: &Signature) -> Json {
    map_to_json(t, low.endogenous(), high.endogenous(), &|e| low.render_expr(e))
}

/// `τ_U` from low contexts to high ones.
pub fn parse_context_map(low: &Signature, high: &Signature, src: &str) -> Result<ContextMap> {
    parse_map(low.exogenous(), high.exogenous(), &|s| low.parse_exo_expr(s), src)
}

pub fn context_map_to_json(t: &ContextMap, low: &Signature, high: &Signature) -> Json {
    map_to_json(t, low.exogenous(), high.exogenous(), &|e| low.render_expr(e))
}

pub fn parse_intervention(sig: &Signature, src: &str) -> Result<Intervention> {
    intervention_from_named(sig, &serde_json::from_str(src)?)
}

/// Reads `X1=0,X2=1` (or an empty string) as an intervention.
pub fn parse_assignment_list(sig: &Signature, src: &str) -> Result<Intervention> {
    let pairs = src
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::input(format!("expected NAME=VALUE, got `{p}`")))?;
            let v: Value = v.trim().parse().map_err(|_| Error::input(format!("`{}` is not an integer", v.trim())))?;
            Ok((k.trim(), v))
        })
        .collect::<Result<Vec<_>>>()?;
    let i = Intervention::from_named(sig, pairs)?;
    i.check(sig.endogenous())?;
    Ok(i)
}

pub fn parse_omega(low: &Signature, high: &Signature, src: &str) -> Result<InterventionMap> {
    let rows: Vec<Row> = serde_json::from_str(src)?;
    let mut omega = InterventionMap::new();
    for r in &rows {
        let from = intervention_from_named(low, &r.from)?;
        if omega.insert(from.clone(), intervention_from_named(high, &r.to)?).is_some() {
            return Err(Error::input(format!("intervention map lists {} twice", from.display(low))));
        }
    }
    Ok(omega)
}

pub fn omega_to_json(o: &InterventionMap, low: &Signature, high: &Signature) -> Json {
    report::omega_json(o, low, high)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionFile {
    cells: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    marginal: Vec<String>,
}

pub fn parse_partition(low: &Signature, high: &Signature, src: &str) -> Result<Partition> {
    let f: PartitionFile = serde_json::from_str(src)?;
    if let Some(extra) = f.cells.keys().find(|k| high.endo_index(k).is_none()) {
        return Err(Error::input(format!("partition names unknown high variable `{extra}`")));
    }
    let index = |n: &String| {
        low.endo_index(n).ok_or_else(|| Error::input(format!("partition names unknown low variable `{n}`")))
    };
    let cells = high
        .endogenous()
        .iter()
        .map(|d| f.cells.get(&d.name).map_or(Ok(Vec::new()), |c| c.iter().map(index).collect()))
        .collect::<Result<Vec<Vec<usize>>>>()?;
    let marginal = f.marginal.iter().map(index).collect::<Result<_>>()?;
    let p = Partition { cells, marginal };
    p.check(low.endogenous().len(), high.endogenous().len())?;
    Ok(p)
}

pub fn partition_to_json(p: &Partition, low: &Signature, high: &Signature) -> Json {
    report::partition_json(p, low, high)
}

fn write_json(dir: &Path, name: &str, value: &Json, out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    out.push(path);
    Ok(())
}

/// Writes a bundle as a directory of files in the formats above, plus a
/// `bundle.json` manifest. Returns the paths written.
pub fn emit_bundle(b: &Bundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let (ls, hs) = (b.low.signature(), b.high.signature());
    let mut out = Vec::new();
    let mut files = serde_json::Map::new();
    let mut put = |key: &str, file: &str, value: Json, out: &mut Vec<PathBuf>| -> Result<()> {
        write_json(dir, file, &value, out)?;
        files.insert(key.into(), json!(file));
        Ok(())
    };
    put("low", "low.json", model_to_json(&b.low), &mut out)?;
    put("high", "high.json", model_to_json(&b.high), &mut out)?;
    put("tau", "tau.json", state_map_to_json(&b.tau, ls, hs), &mut out)?;
    if let Some(o) = &b.omega {
        put("omega", "omega.json", omega_to_json(o, ls, hs), &mut out)?;
    }
    if let Some((dl, dh)) = &b.dists {
        put("dist_low", "dist_low.json", distribution_to_json(dl, ls), &mut out)?;
        put("dist_high", "dist_high.json", distribution_to_json(dh, hs), &mut out)?;
    }
    if let Some(p) = &b.partition {
        put("partition", "partition.json", partition_to_json(p, ls, hs), &mut out)?;
    }
    let e = &b.expected;
    let manifest = json!({
        "name": b.name,
        "description": b.description,
        "files": files,
        "expected": {
            "exact": e.exact,
            "uniform": e.uniform,
            "abstraction": e.abstraction,
            "strong": e.strong,
            "constructive": e.constructive,
        },
    });
    write_json(dir, "bundle.json", &manifest, &mut out)?;
    Ok(out)
}
