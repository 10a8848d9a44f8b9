//! Runs the queries of a problem file and renders the results as text or
//! JSON. Output is collected in memory so a file that fails to parse prints
//! nothing on standard output.

use std::path::PathBuf;

use serde_json::{json, Value};

use crate::coherence::{check_coherence, CoherenceVerdict, Interval};
use crate::compound::{
    coherence_problem, conjoin_families, constituent_classes, frechet_bounds, prevision_interval,
    ConjValue, Family, PrevisionAssessment,
};
use crate::dsl::{parse_problem, EntailsTarget, Problem, Query};
use crate::entailment::{
    full_report, is_p_consistent, rule, Certificate, EntailmentQuery, EntailmentReport,
    VerificationConfig, DEFAULT_SEED,
};
use crate::error::{Error, Result};
use crate::event::{AtomContext, ConditionalEvent, Trivalent};
use crate::iterated::{
    build_iterated, product_rule_check, self_iterate_is_one, verify_equivalent_forms, Mu,
};
use crate::rational::{format_rational, midpoint, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Run a library rule instead of a file.
    pub rule: Option<String>,
    pub format: OutputFormat,
    pub seed: u64,
    pub verbose: bool,
    /// Exit 1 when a coherence or p-consistency verdict is negative.
    pub assert: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            rule: None,
            format: OutputFormat::Text,
            seed: DEFAULT_SEED,
            verbose: false,
            assert: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(config: &RunConfig) -> RunOutcome {
    let text = if let Some(name) = &config.rule {
        format!("query p-entails rule={name}\n")
    } else if let Some(path) = &config.input {
        match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                return RunOutcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: format!("{}: {e}\n", path.display()),
                }
            }
        }
    } else {
        return RunOutcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: "no input: give a problem file or --rule\n".into(),
        };
    };
    let source = config
        .input
        .as_ref()
        .map_or_else(|| "<rule>".to_string(), |p| p.display().to_string());
    run_source(&text, &source, config)
}

pub fn run_source(text: &str, source: &str, config: &RunConfig) -> RunOutcome {
    let problem = match parse_problem(text) {
        Ok(p) => p,
        Err(e) => {
            return RunOutcome {
                code: EXIT_USAGE,
                stdout: String::new(),
                stderr: format!("{source}:{}:{}: {}\n", e.line, e.column, e.kind),
            }
        }
    };
    let runner = Runner {
        problem: &problem,
        cfg: VerificationConfig {
            seed: config.seed,
            ..VerificationConfig::default()
        },
        verbose: config.verbose,
    };
    let mut code = EXIT_OK;
    let mut text_out = String::new();
    let mut json_out = Vec::new();
    let mut stderr = String::new();
    for (line, query) in &problem.queries {
        match runner.query(query) {
            Ok(result) => {
                if config.assert && result.negative {
                    code = EXIT_FAILURE;
                }
                text_out.push_str(&result.text);
                json_out.push(result.json);
            }
            Err(e) => {
                code = EXIT_FAILURE;
                let q = crate::dsl::print_query(query);
                stderr.push_str(&format!("{source}:{line}: query {q}: {e}\n"));
                text_out.push_str(&format!("{q}: error: {e}\n"));
                json_out.push(json!({ "query": q, "error": e.to_string() }));
            }
        }
    }
    let stdout = match config.format {
        OutputFormat::Text => text_out,
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&json!({ "results": json_out }))
                .expect("serialisable");
            s.push('\n');
            s
        }
    };
    RunOutcome {
        code,
        stdout,
        stderr,
    }
}

/// Coherence of every assessment in a parsed problem, taken together.
pub fn problem_is_coherent(problem: &Problem) -> Result<bool> {
    let runner = Runner {
        problem,
        cfg: VerificationConfig::default(),
        verbose: false,
    };
    let Some(family) = runner.working_family(&[])? else {
        return Ok(true);
    };
    let a = match runner.assessment(&family) {
        Err(Error::Incoherent) => return Ok(false),
        other => other?,
    };
    let problem = coherence_problem(&a).map_err(|e| describe_error(e, &family))?;
    Ok(check_coherence(&problem).coherent)
}

/// `{"num": p, "den": q}`; integers beyond 64 bits are written as strings.
pub fn rational_json(x: &Rational) -> Value {
    let part = |n: &num_bigint::BigInt| {
        i64::try_from(n).map_or_else(|_| Value::String(n.to_string()), Value::from)
    };
    json!({ "num": part(x.numer()), "den": part(x.denom()) })
}

fn interval_json(iv: &Interval) -> Value {
    json!({ "lo": rational_json(&iv.lo), "hi": rational_json(&iv.hi) })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn label(ce: &ConditionalEvent) -> String {
    ce.label().unwrap_or("?").to_string()
}

fn subset_name(f: &Family, mask: u32) -> String {
    f.members()
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, m)| label(m))
        .collect::<Vec<_>>()
        .join(" & ")
}

fn subset_symbol(f: &Family, mask: u32) -> String {
    format!("x{{{}}}", subset_name(f, mask).replace(" & ", ","))
}

fn describe_error(e: Error, f: &Family) -> Error {
    match e {
        Error::MissingPrevision(m) if m <= f.full_mask() => {
            Error::MissingNamedPrevision(subset_name(f, m))
        }
        e => e,
    }
}

struct QueryResult {
    text: String,
    json: Value,
    /// A negative coherence or p-consistency verdict.
    negative: bool,
}

struct Runner<'p> {
    problem: &'p Problem,
    cfg: VerificationConfig,
    verbose: bool,
}

impl Runner<'_> {
    fn ctx(&self) -> Result<&AtomContext> {
        self.problem.context.as_ref().ok_or(Error::NoAtoms)
    }

    fn conds(&self, names: &[String]) -> Vec<ConditionalEvent> {
        names
            .iter()
            .map(|n| {
                self.problem
                    .conditional(n)
                    .expect("parser checked names")
                    .clone()
            })
            .collect()
    }

    /// Every conditional that appears in an assessment, plus `extra`.
    fn working_family(&self, extra: &[ConditionalEvent]) -> Result<Option<Family>> {
        let mut members: Vec<ConditionalEvent> = extra.to_vec();
        for a in &self.problem.assessments {
            members.extend(self.conds(&a.names));
        }
        if members.is_empty() {
            return Ok(None);
        }
        Family::new(members).map(Some)
    }

    fn assessment(&self, family: &Family) -> Result<PrevisionAssessment> {
        let mut a = PrevisionAssessment::new(family.clone());
        for decl in &self.problem.assessments {
            let sub = Family::new(self.conds(&decl.names))?;
            let Ok(mask) = family.mask_of(&sub) else {
                continue;
            };
            match a.get(mask) {
                Some(v) if *v != decl.value => return Err(Error::Incoherent),
                _ => a.set(mask, decl.value.clone())?,
            }
        }
        Ok(a)
    }

    /// Fills the unassessed subsets of `mask` (itself included when
    /// `include_self`) with interval midpoints, smallest first.
    fn fill(
        &self,
        a: &mut PrevisionAssessment,
        mask: u32,
        include_self: bool,
    ) -> Result<Vec<(u32, Rational)>> {
        let mut filled = Vec::new();
        for s in a.family().subsets_by_size() {
            if s & mask != s || (s == mask && !include_self) || a.get(s).is_some() {
                continue;
            }
            let iv = prevision_interval(a, s)?;
            let x = midpoint(&iv.lo, &iv.hi);
            a.set(s, x.clone())?;
            filled.push((s, x));
        }
        Ok(filled)
    }

    fn query(&self, q: &Query) -> Result<QueryResult> {
        match q {
            Query::Coherence => self.coherence(),
            Query::Bounds(names) => self.bounds(names),
            Query::Table(names) => self.table(names),
            Query::PConsistent(names) => self.p_consistent(names),
            Query::PEntails(target) => self.p_entails(target),
            Query::Iterate {
                consequent,
                antecedent,
            } => self.iterate(consequent, antecedent),
        }
    }

    fn coherence(&self) -> Result<QueryResult> {
        let ctx = self.ctx()?;
        let Some(family) = self.working_family(&[])? else {
            return Ok(QueryResult {
                text: "coherence: coherent (nothing assessed)\n".into(),
                json: json!({ "query": "coherence", "coherent": true, "layers": [] }),
                negative: false,
            });
        };
        let a = match self.assessment(&family) {
            Err(Error::Incoherent) => {
                return Ok(QueryResult {
                    text: "coherence: incoherent (conflicting assessments)\n".into(),
                    json: json!({ "query": "coherence", "coherent": false, "layers": [] }),
                    negative: true,
                })
            }
            other => other?,
        };
        let problem = coherence_problem(&a).map_err(|e| describe_error(e, &family))?;
        let masks: Vec<u32> = a.assessed().map(|(m, _)| m).collect();
        let verdict = check_coherence(&problem);
        let items: Vec<String> = masks
            .iter()
            .map(|&m| format!("P({})", subset_name(&family, m)))
            .collect();
        let mut text = format!(
            "coherence: {}\n",
            if verdict.coherent {
                "coherent"
            } else {
                "incoherent"
            }
        );
        text.push_str(&render_layers(ctx, &verdict, &items));
        Ok(QueryResult {
            text,
            json: json!({
                "query": "coherence",
                "coherent": verdict.coherent,
                "layers": layers_json(ctx, &verdict, &items),
            }),
            negative: !verdict.coherent,
        })
    }

    fn bounds(&self, names: &[String]) -> Result<QueryResult> {
        let target = Family::new(self.conds(names))?;
        let family = self
            .working_family(target.members())?
            .expect("target present");
        let mut a = self.assessment(&family)?;
        let mask = family.mask_of(&target)?;
        let filled = self.fill(&mut a, mask, false)?;
        let iv = prevision_interval(&a, mask).map_err(|e| describe_error(e, &family))?;
        let singles: Vec<Rational> = (0..family.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| a.get(1 << i).cloned().expect("filled"))
            .collect();
        let frechet = frechet_bounds(&singles);
        let title = subset_name(&family, mask);
        let mut text = format!("bounds {title}: {iv}\n");
        if target.len() > 1 {
            text.push_str(&format!("  frechet: {frechet}\n"));
        }
        text.push_str(&render_filled(&family, &filled));
        Ok(QueryResult {
            text,
            json: json!({
                "query": "bounds",
                "target": title,
                "interval": interval_json(&iv),
                "frechet": interval_json(&frechet),
                "filled": filled_json(&family, &filled),
            }),
            negative: false,
        })
    }

    fn table(&self, names: &[String]) -> Result<QueryResult> {
        let target = Family::new(self.conds(names))?;
        let family = self
            .working_family(target.members())?
            .expect("target present");
        let a = self.assessment(&family)?.restrict(&target)?;
        let mut text = format!("table {}\n", subset_name(&target, target.full_mask()));
        text.push_str(&self.legend(&target));
        let mut rows = Vec::new();
        for class in constituent_classes(&target) {
            let value = match class.value {
                ConjValue::One => "1".to_string(),
                ConjValue::Zero => "0".to_string(),
                ConjValue::Prev(v) => a
                    .get(v)
                    .map(format_rational)
                    .unwrap_or_else(|| subset_symbol(&target, v)),
            };
            let literals = literals(&class.outcomes);
            text.push_str(&format!("  {literals} : {value}\n"));
            rows.push(json!({ "class": literals, "value": value }));
        }
        Ok(QueryResult {
            text,
            json: json!({
                "query": "table",
                "members": target.members().iter().map(label).collect::<Vec<_>>(),
                "rows": rows,
            }),
            negative: false,
        })
    }

    fn legend(&self, f: &Family) -> String {
        f.members()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let name = label(m);
                match self.problem.cond(&name) {
                    Some(d) => format!(
                        "  E{k}H{k} = {name}: {} given {}\n",
                        d.consequent,
                        d.antecedent,
                        k = i + 1,
                    ),
                    None => format!("  E{k}H{k} = {name}\n", k = i + 1),
                }
            })
            .collect()
    }

    fn p_consistent(&self, names: &[String]) -> Result<QueryResult> {
        let members = if names.is_empty() {
            self.problem.conds.iter().map(|c| c.event.clone()).collect()
        } else {
            self.conds(names)
        };
        let family = Family::new(members)?;
        let verdict = is_p_consistent(&family)?;
        let title = subset_name(&family, family.full_mask()).replace(" & ", ", ");
        Ok(QueryResult {
            text: format!("p-consistent {{{title}}}: {}\n", yes_no(verdict)),
            json: json!({
                "query": "p-consistent",
                "family": family.members().iter().map(label).collect::<Vec<_>>(),
                "p_consistent": verdict,
            }),
            negative: !verdict,
        })
    }

    fn p_entails(&self, target: &EntailsTarget) -> Result<QueryResult> {
        let (ctx, q, title) = match target {
            EntailsTarget::Rule(name) => {
                let (ctx, q) = rule(name)?;
                (ctx, q, format!("rule {name}"))
            }
            EntailsTarget::Explicit {
                premises,
                conclusion,
            } => {
                let ctx = self.ctx()?.clone();
                let f = Family::new(self.conds(premises))?;
                let c = self.conds(std::slice::from_ref(conclusion)).remove(0);
                (ctx, EntailmentQuery::new(f, c)?, String::new())
            }
        };
        let report = full_report(&q, &self.cfg)?;
        let premises: Vec<String> = q.premises().members().iter().map(label).collect();
        let conclusion = label(q.conclusion());
        let heading = if title.is_empty() {
            format!("p-entails {{{}}} => {conclusion}", premises.join(", "))
        } else {
            format!(
                "p-entails {title}: {{{}}} => {conclusion}",
                premises.join(", ")
            )
        };
        let mut text = format!("{heading}\n");
        text.push_str(&render_report(&ctx, &report, self.verbose, self.cfg.seed));
        Ok(QueryResult {
            text,
            json: report_json(&ctx, &report, &premises, &conclusion),
            negative: !report.p_consistent,
        })
    }

    fn iterate(&self, consequent: &[String], antecedent: &[String]) -> Result<QueryResult> {
        let f2 = Family::new(self.conds(consequent))?;
        let f1 = Family::new(self.conds(antecedent))?;
        let union = conjoin_families(&f1, &f2)?;
        let family = self
            .working_family(union.members())?
            .expect("families present");
        let mut a = self.assessment(&family)?;
        let union_mask = family.mask_of(&union)?;
        let filled = self.fill(&mut a, union_mask, true)?;
        let ua = a.restrict(&union)?;
        let ic = build_iterated(&f1, &f2, &ua)?;
        let equivalent_forms = verify_equivalent_forms(&f1, &f2, &ua)?;
        let self_iteration = self_iterate_is_one(&f1, &ua)?;
        let product = product_rule_check(&f1, &f2, &ua)?;

        let names = |f: &Family| f.members().iter().map(label).collect::<Vec<_>>();
        let mut text = format!(
            "iterate [{}] given [{}]\n",
            names(&f2).join(", "),
            names(&f1).join(", ")
        );
        text.push_str(&render_filled(&family, &filled));
        text.push_str(&self.legend(&union));
        let mut rows = Vec::new();
        for class in constituent_classes(&union) {
            let v = ic.table().get(class.constituents[0]);
            let literals = literals(&class.outcomes);
            text.push_str(&format!("  {literals} : {v}\n"));
            rows.push(json!({
                "class": literals,
                "constant": rational_json(&v.constant),
                "mu_coeff": rational_json(&v.coeff),
            }));
        }
        let mu_json = match ic.mu() {
            Mu::Unique(m) => json!({ "unique": rational_json(m) }),
            Mu::Interval(iv) => json!({ "interval": interval_json(iv) }),
        };
        text.push_str(&format!("  {}", ic.mu()));
        if matches!(ic.mu(), Mu::Interval(_)) {
            text.push_str(" (not unique)");
        }
        text.push('\n');
        text.push_str(&format!(
            "  equivalent forms: {}\n",
            pass_fail(equivalent_forms)
        ));
        text.push_str(&format!(
            "  self iteration: {}\n",
            pass_fail(self_iteration)
        ));
        text.push_str(&format!("  product rule: {}\n", pass_fail(product)));
        Ok(QueryResult {
            text,
            json: json!({
                "query": "iterate",
                "consequent": names(&f2),
                "antecedent": names(&f1),
                "filled": filled_json(&family, &filled),
                "rows": rows,
                "mu": mu_json,
                "equivalent_forms": equivalent_forms,
                "self_iteration": self_iteration,
                "product_rule": product,
            }),
            negative: false,
        })
    }
}

fn literals(outcomes: &[Trivalent]) -> String {
    outcomes
        .iter()
        .enumerate()
        .map(|(i, t)| match t {
            Trivalent::True => format!("E{0}H{0}", i + 1),
            Trivalent::False => format!("~E{0}H{0}", i + 1),
            Trivalent::Void => format!("~H{}", i + 1),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn render_filled(f: &Family, filled: &[(u32, Rational)]) -> String {
    filled
        .iter()
        .map(|(m, x)| {
            format!(
                "  filled P({}) = {} (midpoint)\n",
                subset_name(f, *m),
                format_rational(x)
            )
        })
        .collect()
}

fn filled_json(f: &Family, filled: &[(u32, Rational)]) -> Value {
    Value::Array(
        filled
            .iter()
            .map(|(m, x)| json!({ "subset": subset_name(f, *m), "value": rational_json(x) }))
            .collect(),
    )
}

fn render_layers(ctx: &AtomContext, v: &CoherenceVerdict, items: &[String]) -> String {
    let mut out = String::new();
    for (k, layer) in v.layers.iter().enumerate() {
        let names: Vec<&str> = layer.items.iter().map(|&i| items[i].as_str()).collect();
        let masses: Vec<String> = layer
            .masses
            .iter()
            .map(|(c, m)| {
                format!(
                    "{} = {}",
                    ctx.describe(ctx.constituent(*c)),
                    format_rational(m)
                )
            })
            .collect();
        out.push_str(&format!(
            "  layer {k} [{}]: {}\n",
            names.join(", "),
            masses.join("; ")
        ));
    }
    out
}

fn layers_json(ctx: &AtomContext, v: &CoherenceVerdict, items: &[String]) -> Value {
    Value::Array(
        v.layers
            .iter()
            .map(|layer| {
                json!({
                    "items": layer.items.iter().map(|&i| items[i].clone()).collect::<Vec<_>>(),
                    "masses": layer.masses.iter().map(|(c, m)| json!({
                        "constituent": ctx.describe(ctx.constituent(*c)),
                        "index": c,
                        "mass": rational_json(m),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn render_report(ctx: &AtomContext, r: &EntailmentReport, verbose: bool, seed: u64) -> String {
    let mut out = format!("  p-consistent: {}\n", yes_no(r.p_consistent));
    let Some(v) = r.verdicts else {
        out.push_str("  p-valid: n/a (premises are not p-consistent)\n");
        return out;
    };
    let iv = r.interval.as_ref().expect("present with verdicts");
    out.push_str(&format!("  conclusion with premises at 1: {iv}\n"));
    out.push_str(&format!("  by forcing: {}\n", yes_no(v.by_forcing)));
    out.push_str(&format!("  by conjunction: {}\n", yes_no(v.by_conjunction)));
    out.push_str(&format!("  by iterated: {}\n", yes_no(v.by_iterated)));
    if verbose {
        out.push_str(&format!(
            "  verification set: {} assessments, {}\n",
            r.assessments_checked,
            if r.exhaustive {
                "all vertices".to_string()
            } else {
                format!("vertices and samples, seed {seed}")
            }
        ));
    }
    match r.certificate.as_ref().expect("present with verdicts") {
        Certificate::Forced { .. } => out.push_str("  p-valid: yes (forced z = 1)\n"),
        Certificate::Counterexample {
            conclusion_value,
            witness,
        } => {
            out.push_str(&format!(
                "  p-valid: no (premises at 1 with z = {} is coherent)\n",
                format_rational(conclusion_value)
            ));
            let n = witness.layers.first().map_or(0, |l| l.items.len());
            let items: Vec<String> = (0..n)
                .map(|i| {
                    if i + 1 == n {
                        "conclusion".to_string()
                    } else {
                        format!("premise {}", i + 1)
                    }
                })
                .collect();
            out.push_str(&render_layers(ctx, witness, &items));
        }
    }
    out
}

fn report_json(
    ctx: &AtomContext,
    r: &EntailmentReport,
    premises: &[String],
    conclusion: &str,
) -> Value {
    let mut obj = json!({
        "query": "p-entails",
        "premises": premises,
        "conclusion": conclusion,
        "p_consistent": r.p_consistent,
    });
    if let Some(v) = r.verdicts {
        obj["p_valid"] = json!(v.by_forcing);
        obj["verdicts"] = json!({
            "by_forcing": v.by_forcing,
            "by_conjunction": v.by_conjunction,
            "by_iterated": v.by_iterated,
        });
        obj["interval"] = interval_json(r.interval.as_ref().expect("present"));
        obj["assessments_checked"] = json!(r.assessments_checked);
        obj["exhaustive"] = json!(r.exhaustive);
        if let Some(Certificate::Counterexample {
            conclusion_value,
            witness,
        }) = &r.certificate
        {
            let n = witness.layers.first().map_or(0, |l| l.items.len());
            let items: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            obj["counterexample"] = json!({
                "conclusion_value": rational_json(conclusion_value),
                "layers": layers_json(ctx, witness, &items),
            });
        }
    }
    obj
}
