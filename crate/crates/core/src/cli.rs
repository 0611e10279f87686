//! The `prov-obda` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::entail::{entails_with, perfect_ref, translate_tr, EntailOptions, Strategy, Witness};
use crate::error::{Error, Result};
use crate::kb::{check_satisfiability, AnnotatedOBDAInstance};
use crate::oracle::{chase, ChaseConfig};
use crate::parse::{load_instance, load_query, QuerySpec};
use crate::provcalc::{compute_prov_with, star_rewritings};
use crate::query::ProvBCQ;
use crate::rewrite::Limits;
use crate::semiring::{Polynomial, SemiringMode};

#[derive(Parser, Debug)]
#[command(
    name = "prov-obda",
    version,
    about = "Provenance-annotated ontology-based data access over DL-Lite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report whether the instance is satisfiable (SAT or UNSAT).
    Check(Common),
    /// Decide whether the query is entailed with its WITH polynomial.
    /// Exits with 0 when entailed and 1 when not.
    Entail(Common),
    /// Print the provenance polynomial of a standard query.
    Prov(Common),
    /// Print the translated queries for the WITH polynomial.
    Translate(Common),
    /// Print the PerfectRef closure of the query.
    Rewrite(Common),
    /// Print the chased model, one annotated tuple per line.
    Chase(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    ontology: Option<PathBuf>,
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    query: Option<PathBuf>,
    /// free, midem or fidem. Defaults to fidem for `prov` and free otherwise.
    #[arg(long)]
    mode: Option<SemiringMode>,
    /// Maximum number of queries produced by a rewriting or translation.
    #[arg(long, default_value_t = Limits::default().max_pr)]
    max_pr: usize,
    /// Maximum number of rewriting steps.
    #[arg(long, default_value_t = Limits::default().max_iterations)]
    max_iter: usize,
    /// Chase depth bound; `chase` under the free semiring defaults to 8.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// With `entail`, print the witnessing rewritings and matches.
    #[arg(long)]
    explain: bool,
    #[arg(long, value_enum, default_value_t = StrategyArg::Lazy)]
    strategy: StrategyArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Lazy,
    Eager,
}

impl Common {
    fn mode(&self, default: SemiringMode) -> SemiringMode {
        self.mode.unwrap_or(default)
    }

    fn limits(&self) -> Limits {
        Limits {
            max_pr: self.max_pr,
            max_iterations: self.max_iter,
            ..Limits::default()
        }
    }

    fn instance(&self, mode: SemiringMode) -> Result<AnnotatedOBDAInstance> {
        load_instance(
            self.ontology.as_deref(),
            self.mapping.as_deref(),
            self.data.as_deref(),
            mode,
        )
    }

    fn query(&self, mode: SemiringMode) -> Result<QuerySpec> {
        let path = self
            .query
            .as_deref()
            .ok_or_else(|| Error::Invalid("this command needs --query".into()))?;
        load_query(path, mode)
    }
}

/// Runs the command line and returns the process exit status: 0 on success
/// (or entailed), 1 for a negative answer, 2 on errors.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Check(c) => cmd_check(c, out),
        Command::Entail(c) => cmd_entail(c, out),
        Command::Prov(c) => cmd_prov(c, out),
        Command::Translate(c) => cmd_translate(c, out),
        Command::Rewrite(c) => cmd_rewrite(c, out),
        Command::Chase(c) => cmd_chase(c, out),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io {
        path: "<output>".into(),
        source: e,
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(io)
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    emit(out, &format!("{text}\n"))
}

fn cmd_check(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let inst = c.instance(c.mode(SemiringMode::Free))?;
    let sat = check_satisfiability(&inst)?;
    match c.format {
        Format::Text => emit(out, if sat { "SAT\n" } else { "UNSAT\n" })?,
        Format::Json => emit_json(out, &json!({ "satisfiable": sat }))?,
    }
    Ok(if sat { 0 } else { 1 })
}

fn witness_json(w: &Witness) -> serde_json::Value {
    json!({
        "target": w.target.as_ref().map(ToString::to_string),
        "rewriting": w.rewriting,
        "matched": w.matched,
        "marked": w.marked.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "original": w.original.iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

fn cmd_entail(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let mode = c.mode(SemiringMode::Free);
    let inst = c.instance(mode)?;
    let spec = c.query(mode)?;
    let opts = EntailOptions {
        limits: c.limits(),
        strategy: match c.strategy {
            StrategyArg::Lazy => Strategy::Lazy,
            StrategyArg::Eager => Strategy::Eager,
        },
    };
    let report = entails_with(&inst, &spec.query, &spec.target, &opts)?;
    match c.format {
        Format::Text => {
            let mut text = String::from(if report.entailed {
                "ENTAILED\n"
            } else {
                "NOT ENTAILED\n"
            });
            if c.explain {
                if !report.satisfiable {
                    text.push_str("the instance is unsatisfiable\n");
                }
                for w in &report.witnesses {
                    text.push_str(&w.to_string());
                }
            }
            emit(out, &text)?;
        }
        Format::Json => {
            let mut v = json!({
                "entailed": report.entailed,
                "satisfiable": report.satisfiable,
            });
            if c.explain {
                v["witnesses"] = report.witnesses.iter().map(witness_json).collect();
            }
            emit_json(out, &v)?;
        }
    }
    Ok(if report.entailed { 0 } else { 1 })
}

/// The JSON form of a polynomial: its rendering and its monomials as sorted
/// variable arrays.
pub fn polynomial_json(p: &Polynomial) -> serde_json::Value {
    json!({
        "polynomial": p.to_string(),
        "monomials": p.sorted_monomials(),
    })
}

fn cmd_prov(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let mode = c.mode(SemiringMode::FullyIdempotent);
    if mode != SemiringMode::FullyIdempotent {
        return Err(Error::Mode(format!(
            "`prov` needs the fully idempotent semiring (fidem), not `{mode}`"
        )));
    }
    let inst = c.instance(mode)?;
    let spec = c.query(mode)?;
    let p = compute_prov_with(&spec.query, &inst, &c.limits())?;
    match c.format {
        Format::Text => emit(out, &format!("{p}\n"))?,
        Format::Json => emit_json(out, &polynomial_json(&p))?,
    }
    Ok(0)
}

fn cmd_translate(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let mode = c.mode(SemiringMode::Free);
    let spec = c.query(mode)?;
    let mut lines = Vec::new();
    for q in translate_tr(&spec.query, &spec.target, mode)? {
        if lines.len() >= c.max_pr {
            return Err(Error::CapExceeded {
                what: "translated queries",
                limit: c.max_pr,
            });
        }
        lines.push(q.to_string());
    }
    print_queries(c, out, &lines)
}

fn print_queries(c: &Common, out: &mut dyn Write, lines: &[String]) -> Result<i32> {
    match c.format {
        Format::Text => emit(out, &lines.iter().map(|l| format!("{l}\n")).collect::<String>())?,
        Format::Json => emit_json(out, &json!({ "queries": lines }))?,
    }
    Ok(0)
}

fn cmd_rewrite(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let mode = c.mode(SemiringMode::Free);
    let inst = c.instance(mode)?;
    let spec = c.query(mode)?;
    let limits = c.limits();
    let render = |qs: Vec<ProvBCQ>| qs.iter().map(ToString::to_string).collect::<Vec<_>>();
    let lines = if mode == SemiringMode::FullyIdempotent && spec.query.is_standard() {
        render(star_rewritings(&spec.query, &inst, &limits)?)
    } else {
        let incs = crate::kb::normalize_inverses(&inst.ontology)
            .iter()
            .filter_map(|a| a.positive())
            .collect::<Vec<_>>();
        let has_var = spec
            .query
            .atoms
            .iter()
            .any(|a| matches!(a.ann, crate::query::ProvTerm::Var(_)));
        if has_var && spec.target.is_zero() {
            return Err(Error::Invalid(
                "rewriting a query with provenance variables needs a WITH polynomial or --mode fidem"
                    .into(),
            ));
        }
        if has_var {
            let mut lines = Vec::new();
            for q in translate_tr(&spec.query, &spec.target, mode)? {
                lines.push(format!("# {q}"));
                lines.extend(render(perfect_ref(&q, &incs, mode, &limits)?));
            }
            lines
        } else {
            render(perfect_ref(&spec.query, &incs, mode, &limits)?)
        }
    };
    print_queries(c, out, &lines)
}

fn cmd_chase(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let mode = c.mode(SemiringMode::Free);
    let inst = c.instance(mode)?;
    let mut cfg = ChaseConfig::new(mode);
    cfg.depth_bound = c.depth.or((!mode.mult_idempotent()).then_some(8));
    let model = chase(&inst, &cfg)?;
    let mut tuples = model.dump();
    tuples.sort();
    match c.format {
        Format::Text => {
            let mut text: String = tuples.iter().map(|t| format!("{t}\n")).collect();
            if model.truncated {
                text.push_str("# truncated at the depth bound\n");
            }
            emit(out, &text)?;
        }
        Format::Json => emit_json(
            out,
            &json!({ "tuples": tuples, "truncated": model.truncated }),
        )?,
    }
    Ok(0)
}
