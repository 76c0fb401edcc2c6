//! The `cak` command line: JSON reports on stdout, a summary on stderr,
//! exit code 0 (holds), 1 (fails) or 2 (input error).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::abstraction::{
    check_constructive, check_strong_abstraction, check_tau_abstraction, compute_induced_sets, derive_omega_tau,
    search_constructive_partition,
};
use crate::error::{Error, Result};
use crate::format;
use crate::intervention::enumerate_all;
use crate::limits::Limits;
use crate::model::{check_uev, CausalModel};
use crate::prob::equivalent;
use crate::report::{self, CheckReport};
use crate::transform::{check_exact, check_uniform};
use crate::{corpus, prob};

#[derive(Debug, Parser)]
#[command(name = "cak", version, about = "Check transformations and abstractions between finite causal models")]
pub struct Cli {
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Cap on enumerated interventions (also CAK_MAX_INTERVENTIONS).
    #[arg(long, global = true)]
    pub max_interventions: Option<u128>,
    /// Cap on enumerated contexts and states (also CAK_MAX_CONTEXTS).
    #[arg(long, global = true)]
    pub max_contexts: Option<u128>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Exact,
    Uniform,
    Abstraction,
    Strong,
    Constructive,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a model in one context, optionally under an intervention.
    Solve {
        model: PathBuf,
        /// Context as `U1=0,U2=1`.
        #[arg(long)]
        context: String,
        /// Intervention as `X1=0,X2=1`.
        #[arg(long)]
        intervene: Option<String>,
    },
    /// Check one relation between a low and a high model.
    Check {
        #[arg(value_enum)]
        kind: Kind,
        low: PathBuf,
        high: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long)]
        omega: Option<PathBuf>,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        dist_low: Option<PathBuf>,
        #[arg(long)]
        dist_high: Option<PathBuf>,
        /// Include the witness in the report.
        #[arg(long)]
        witness: bool,
    },
    /// The intervention map induced by `τ`, for one low intervention or all.
    DeriveOmega {
        low: PathBuf,
        high: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        /// Low intervention as `X1=0,X2=1`; empty string for the empty one.
        #[arg(long)]
        intervention: Option<String>,
    },
    /// Rewrite a model and distribution so every endogenous variable has a
    /// private exogenous parent, and confirm equivalence.
    ToUev {
        model: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        out_model: Option<PathBuf>,
        #[arg(long)]
        out_dist: Option<PathBuf>,
    },
    /// The built-in example bundles.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    List,
    Emit {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    /// SHA-256 of every input file, by role.
    pub inputs: BTreeMap<String, String>,
    pub verdict: String,
    pub report: Json,
    pub timing_ms: u128,
}

struct Outcome {
    kind: Option<String>,
    verdict: &'static str,
    code: i32,
    report: Json,
    summary: String,
}

struct Inputs(BTreeMap<String, String>);

impl Inputs {
    fn read(&mut self, role: &str, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(format!("cannot read {role} file {}: {e}", path.display())))?;
        self.0.insert(role.into(), format!("{:x}", Sha256::digest(text.as_bytes())));
        Ok(text)
    }

    fn model(&mut self, role: &str, path: &Path) -> Result<CausalModel> {
        format::parse_model(&self.read(role, path)?)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let command = match &cli.command {
        Command::Solve { .. } => "solve",
        Command::Check { .. } => "check",
        Command::DeriveOmega { .. } => "derive-omega",
        Command::ToUev { .. } => "to-uev",
        Command::Corpus { .. } => "corpus",
    };
    let start = Instant::now();
    let mut inputs = Inputs(BTreeMap::new());
    let result = limits(&cli).and_then(|l| dispatch(&cli.command, &l, &mut inputs));
    let outcome = result.unwrap_or_else(|e| Outcome {
        kind: None,
        verdict: "error",
        code: 2,
        report: json!({"error": e.to_string()}),
        summary: format!("error: {e}"),
    });
    let run = RunReport {
        command: command.into(),
        kind: outcome.kind,
        inputs: inputs.0,
        verdict: outcome.verdict.into(),
        report: outcome.report,
        timing_ms: start.elapsed().as_millis(),
    };
    let text = serde_json::to_string_pretty(&run).expect("reports serialize");
    let _ = writeln!(stdout, "{text}");
    if !cli.quiet {
        let _ = writeln!(stderr, "{}", outcome.summary);
    }
    outcome.code
}

fn limits(cli: &Cli) -> Result<Limits> {
    let mut l = Limits::from_env()?;
    if let Some(n) = cli.max_interventions {
        l.max_interventions = n;
    }
    if let Some(n) = cli.max_contexts {
        l.max_contexts = n;
    }
    Ok(l)
}

fn verdict(holds: bool) -> (&'static str, i32) {
    if holds {
        ("holds", 0)
    } else {
        ("fails", 1)
    }
}

fn dispatch(command: &Command, limits: &Limits, inputs: &mut Inputs) -> Result<Outcome> {
    match command {
        Command::Solve { model, context, intervene } => {
            let m = inputs.model("model", model)?;
            let sig = m.signature();
            let ctx = parse_context(sig, context)?;
            let i = match intervene {
                Some(s) => format::parse_assignment_list(sig, s)?,
                None => crate::Intervention::empty(),
            };
            crate::model::ensure_valid(&m, limits)?;
            let state = m.solve_under(&ctx, &i)?;
            Ok(Outcome {
                kind: None,
                verdict: "ok",
                code: 0,
                report: json!({
                    "context": report::named(sig.exogenous(), &ctx),
                    "intervention": report::intervention_json(&i, sig),
                    "state": report::named(sig.endogenous(), &state),
                }),
                summary: sig.format_state(&state),
            })
        }
        Command::Check { kind, low, high, tau, omega, partition, dist_low, dist_high, witness } => {
            let l = inputs.model("low", low)?;
            let h = inputs.model("high", high)?;
            let (ls, hs) = (l.signature(), h.signature());
            let t = format::parse_state_map(ls, hs, &inputs.read("tau", tau)?)?;
            let read_omega = |inputs: &mut Inputs| -> Result<_> {
                let path = omega.as_ref().ok_or_else(|| Error::input("this check needs --omega"))?;
                format::parse_omega(ls, hs, &inputs.read("omega", path)?)
            };
            let r: CheckReport = match kind {
                Kind::Exact => {
                    let o = read_omega(inputs)?;
                    let (Some(pl), Some(ph)) = (dist_low, dist_high) else {
                        return Err(Error::input("the exact check needs --dist-low and --dist-high"));
                    };
                    let dl = format::parse_distribution(ls, &inputs.read("dist_low", pl)?)?;
                    let dh = format::parse_distribution(hs, &inputs.read("dist_high", ph)?)?;
                    check_exact(&l, &dl, &h, &dh, &t, &o, limits)?
                }
                Kind::Uniform => {
                    let o = read_omega(inputs)?;
                    check_uniform(&l, &h, &t, &o, limits)?
                }
                Kind::Abstraction => check_tau_abstraction(&l, &h, &t, limits)?,
                Kind::Strong => check_strong_abstraction(&l, &h, &t, limits)?,
                Kind::Constructive => match partition {
                    Some(p) => {
                        let p = format::parse_partition(ls, hs, &inputs.read("partition", p)?)?;
                        check_constructive(&l, &h, &t, &p, None, limits)?
                    }
                    None => search_constructive_partition(&l, &h, &t, limits)?,
                },
            };
            let mut body = r.to_json(ls, hs);
            if !witness {
                if let Some(obj) = body.as_object_mut() {
                    obj.remove("witness");
                }
            }
            let (v, code) = verdict(r.holds);
            Ok(Outcome {
                kind: Some(kind_name(*kind).into()),
                verdict: v,
                code,
                report: body,
                summary: r.summary(ls, hs),
            })
        }
        Command::DeriveOmega { low, high, tau, intervention } => {
            let l = inputs.model("low", low)?;
            let h = inputs.model("high", high)?;
            let (ls, hs) = (l.signature(), h.signature());
            let t = format::parse_state_map(ls, hs, &inputs.read("tau", tau)?)?;
            match intervention {
                Some(src) => {
                    let i = format::parse_assignment_list(ls, src)?;
                    let image = derive_omega_tau(&l, &h, &t, &i, limits)?;
                    let summary = match &image {
                        Some(j) => format!("{} ↦ {}", i.display(ls), j.display(hs)),
                        None => format!("{} ↦ undefined", i.display(ls)),
                    };
                    Ok(Outcome {
                        kind: None,
                        verdict: if image.is_some() { "defined" } else { "undefined" },
                        code: 0,
                        report: json!({
                            "intervention": report::intervention_json(&i, ls),
                            "image": image.as_ref().map(|j| report::intervention_json(j, hs)),
                        }),
                        summary,
                    })
                }
                None => {
                    let sets = compute_induced_sets(&l, &h, &t, limits)?;
                    let all_high = enumerate_all(&h, limits)?.len();
                    let ivs = |v: &[crate::Intervention], s| {
                        v.iter().map(|i| report::intervention_json(i, s)).collect::<Vec<_>>()
                    };
                    Ok(Outcome {
                        kind: None,
                        verdict: "ok",
                        code: 0,
                        summary: format!(
                            "{} of {} low interventions induced; {} of {} high interventions reached",
                            sets.low.len(),
                            sets.low.len() + sets.undefined.len(),
                            sets.high.len(),
                            all_high
                        ),
                        report: json!({
                            "omega": format::omega_to_json(&sets.omega, ls, hs),
                            "low": ivs(&sets.low, ls),
                            "high": ivs(&sets.high, hs),
                            "undefined": ivs(&sets.undefined, ls),
                        }),
                    })
                }
            }
        }
        Command::ToUev { model, dist, out_model, out_dist } => {
            let m = inputs.model("model", model)?;
            let d = format::parse_distribution(m.signature(), &inputs.read("dist", dist)?)?;
            crate::model::ensure_valid(&m, limits)?;
            let (um, ud) = prob::to_uev(&m, &d, limits)?;
            let uev = check_uev(&um, limits)?;
            let eq = equivalent(&m, &d, &um, &ud, None, limits)?;
            let model_json = format::model_to_json(&um);
            let dist_json = format::distribution_to_json(&ud, um.signature());
            let mut body = json!({
                "uev": uev.holds,
                "equivalent": eq.holds,
                "interventions_compared": eq.interventions.len(),
            });
            if let Some(c) = &eq.counterexample {
                body["counterexample"] = json!({
                    "profile": c.profile.iter().map(|s| report::named(m.signature().endogenous(), s)).collect::<Vec<_>>(),
                    "left": report::rational_string(&c.left),
                    "right": report::rational_string(&c.right),
                });
            }
            for (out, value, key) in [(out_model, &model_json, "model"), (out_dist, &dist_json, "distribution")] {
                match out {
                    Some(p) => {
                        std::fs::write(p, serde_json::to_string_pretty(value)? + "\n")?;
                        body[key] = json!(p.display().to_string());
                    }
                    None => body[key] = value.clone(),
                }
            }
            let holds = uev.holds && eq.holds;
            let (v, code) = verdict(holds);
            Ok(Outcome {
                kind: None,
                verdict: v,
                code,
                report: body,
                summary: format!(
                    "uev: {}, equivalent on {} interventions: {}",
                    uev.holds,
                    eq.interventions.len(),
                    if eq.holds { "OK" } else { "MISMATCH" }
                ),
            })
        }
        Command::Corpus { action: CorpusAction::List } => {
            let bundles: Vec<Json> = corpus::NAMES
                .iter()
                .map(|n| {
                    let b = corpus::by_name(n)?;
                    let e = b.expected;
                    Ok(json!({
                        "name": b.name,
                        "description": b.description,
                        "expected": {
                            "exact": e.exact, "uniform": e.uniform, "abstraction": e.abstraction,
                            "strong": e.strong, "constructive": e.constructive,
                        },
                    }))
                })
                .collect::<Result<_>>()?;
            Ok(Outcome {
                kind: None,
                verdict: "ok",
                code: 0,
                report: json!({ "bundles": bundles }),
                summary: corpus::NAMES.join("\n"),
            })
        }
        Command::Corpus { action: CorpusAction::Emit { name, out } } => {
            let b = corpus::by_name(name)?;
            let files = format::emit_bundle(&b, out)?;
            Ok(Outcome {
                kind: None,
                verdict: "ok",
                code: 0,
                summary: format!("wrote {} files to {}", files.len(), out.display()),
                report: json!({ "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() }),
            })
        }
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Exact => "exact",
        Kind::Uniform => "uniform",
        Kind::Abstraction => "abstraction",
        Kind::Strong => "strong",
        Kind::Constructive => "constructive",
    }
}

fn parse_context(sig: &crate::Signature, src: &str) -> Result<Vec<crate::Value>> {
    let mut values: BTreeMap<String, crate::Value> = BTreeMap::new();
    for part in src.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| Error::input(format!("expected NAME=VALUE, got `{part}`")))?;
        let v = v.trim().parse().map_err(|_| Error::input(format!("`{}` is not an integer", v.trim())))?;
        if values.insert(k.trim().to_string(), v).is_some() {
            return Err(Error::input(format!("`{}` assigned twice", k.trim())));
        }
    }
    if let Some(extra) = values.keys().find(|k| sig.exo_index(k).is_none()) {
        return Err(Error::input(format!("unknown exogenous variable `{extra}`")));
    }
    let ctx = sig
        .exogenous()
        .iter()
        .map(|d| {
            values.get(&d.name).copied().ok_or_else(|| Error::input(format!("context does not assign `{}`", d.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    sig.check_context(&ctx)?;
    Ok(ctx)
}
