//! Command driver. Every subcommand returns its exit code and output text,
//! so the binary and the tests share one entry point.

use std::ffi::OsString;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::evaluator::{EvalContext, NegationPolicy};
use crate::fidel::FidelStructure;
use crate::frontend::parser::{parse_formula, ParseError};
use crate::frontend::pretty::print_formula;
use crate::frontend::structure_file::{load_file, to_file, StructureFileError};
use crate::names::{enumerate_universe, NameError, NameStore, Universe, DEFAULT_CEILING};
use crate::proplogic::{check_schema, find_paraconsistency_witness, Schema, SchemaVerdict};
use crate::zfcheck::{
    check_axiom, check_leibniz, check_leibniz_sampled, generate_templates, Axiom, AxiomOptions, Report, Sampler,
    DEFAULT_SEED,
};

pub const EXIT_VALID: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CEILING: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "fidelset",
    version,
    about = "Finite models of paraconsistent set theory over Fidel structures"
)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Refuse to build a universe with more names than this.
    #[arg(long, global = true, default_value_t = DEFAULT_CEILING)]
    ceiling: u128,
    /// Seed for every sampled check.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the generalized Heyting algebra laws of a structure file.
    CheckAlgebra { file: String },
    /// Print the saturated structure over the file's algebra.
    Saturate { file: String },
    /// Check the two structure conditions on the negation family.
    CheckStructure { file: String },
    /// Check propositional axiom schemas under every admissible valuation.
    PropAxioms {
        file: String,
        /// a1..a10, gN or l; repeatable.
        #[arg(long)]
        schema: Vec<String>,
        /// A1..A10 together with L.
        #[arg(long)]
        all: bool,
        /// Substitute compound formulas up to this depth for metavariables.
        #[arg(long, default_value_t = 0)]
        depth: usize,
    },
    /// Search for a valuation refuting explosion.
    Paraconsistent { file: String },
    /// Enumerate V_<=K.
    Universe {
        file: String,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// Counts only.
        #[arg(long)]
        stats: bool,
    },
    /// Evaluate a closed formula.
    Eval {
        file: String,
        formula: String,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long, default_value = "standard")]
        policy: NegationPolicy,
    },
    /// Check Leibniz's law over a template family.
    Leibniz {
        file: String,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value = "standard")]
        policy: NegationPolicy,
        /// Sample this many triples instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Check the set-theoretic axioms.
    Zf {
        file: String,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long)]
        axiom: Option<Axiom>,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value = "standard")]
        policy: NegationPolicy,
    },
}

/// Exit code plus what the command wrote.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutput {
    fn ok(code: i32, stdout: String) -> Self {
        CommandOutput {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: String) -> Self {
        CommandOutput {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

struct Failure(i32, String);

impl From<StructureFileError> for Failure {
    fn from(e: StructureFileError) -> Self {
        Failure(EXIT_USAGE, format!("error: {e}"))
    }
}

impl From<NameError> for Failure {
    fn from(e: NameError) -> Self {
        let code = if matches!(e, NameError::UniverseTooLarge { .. }) {
            EXIT_CEILING
        } else {
            EXIT_USAGE
        };
        Failure(code, format!("error: {e}"))
    }
}

fn parse_failure(src: &str, e: &ParseError) -> Failure {
    let col = src[..e.span.start.min(src.len())].chars().count();
    let width = src[e.span.start.min(src.len())..e.span.end.min(src.len())]
        .chars()
        .count()
        .max(1);
    Failure(
        EXIT_USAGE,
        format!(
            "error: formula: {e}\n  {src}\n  {}{}",
            " ".repeat(col),
            "^".repeat(width)
        ),
    )
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run_command<I, T>(argv: I) -> CommandOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_VALID };
            let text = e.render().to_string();
            return if code == EXIT_VALID {
                CommandOutput::ok(code, text)
            } else {
                CommandOutput::fail(code, text)
            };
        }
    };
    match dispatch(&cli) {
        Ok(out) => out,
        Err(Failure(code, msg)) => CommandOutput::fail(code, msg + "\n"),
    }
}

fn structure(file: &str) -> Result<FidelStructure, Failure> {
    Ok(load_file(file)?.structure()?)
}

fn context(file: &str, rank: usize, ceiling: u128, policy: NegationPolicy) -> Result<EvalContext, Failure> {
    let s = Arc::new(structure(file)?);
    let store = Arc::new(NameStore::new(s.algebra().clone()));
    let universe = Arc::new(enumerate_universe(&store, rank, ceiling)?);
    EvalContext::new(s, store, universe, policy).map_err(|e| Failure(EXIT_USAGE, format!("error: {file}: {e}")))
}

fn emit(format: Format, text: String, doc: Value) -> String {
    match format {
        Format::Text => text,
        Format::Json => doc.to_string() + "\n",
    }
}

fn emit_reports(format: Format, reports: &[Report]) -> String {
    reports
        .iter()
        .map(|r| match format {
            Format::Text => r.to_text(),
            Format::Json => serde_json::to_string(r).expect("reports serialize") + "\n",
        })
        .collect()
}

fn code_for(valid: bool) -> i32 {
    if valid {
        EXIT_VALID
    } else {
        EXIT_COUNTEREXAMPLE
    }
}

fn dispatch(cli: &Cli) -> Result<CommandOutput, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::CheckAlgebra { file } => {
            let loaded = load_file(file)?;
            let report = loaded.check_algebra()?;
            let labels: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            let text = if report.is_empty() {
                format!(
                    "{file}: generalized Heyting algebra ({} elements)\n",
                    loaded.file.carrier.len()
                )
            } else {
                format!("{file}: {} law violations\n{report}", report.violations.len())
            };
            let doc = json!({"file": file, "valid": report.is_empty(), "violations": labels});
            Ok(CommandOutput::ok(code_for(report.is_empty()), emit(format, text, doc)))
        }
        Command::Saturate { file } => {
            let alg = load_file(file)?.algebra()?;
            let mut out = to_file(&FidelStructure::saturate(alg));
            out.name = Some(format!("saturated {file}"));
            let text = serde_json::to_string_pretty(&out).expect("structure files serialize") + "\n";
            Ok(CommandOutput::ok(EXIT_VALID, text))
        }
        Command::CheckStructure { file } => {
            let s = structure(file)?;
            let report = s.validate();
            let alg = s.algebra();
            let text = if report.is_empty() {
                format!("{file}: valid structure\n{s}\n")
            } else {
                format!("{file}: {} violations\n{}", report.violations.len(), report.render(alg))
            };
            let doc = json!({"file": file, "valid": report.is_empty(), "violations": report.render(alg).lines().map(str::trim).collect::<Vec<_>>()});
            Ok(CommandOutput::ok(code_for(report.is_empty()), emit(format, text, doc)))
        }
        Command::PropAxioms {
            file,
            schema,
            all,
            depth,
        } => {
            let s = structure(file)?;
            let mut schemas: Vec<Schema> = schema
                .iter()
                .map(|x| x.parse())
                .collect::<Result<_, String>>()
                .map_err(|e| Failure(EXIT_USAGE, format!("error: {e}")))?;
            if *all {
                schemas = Schema::c_omega();
                schemas.push(Schema::L);
            } else if schemas.is_empty() {
                schemas = Schema::c_omega();
            }
            let alg = s.algebra();
            let mut out = String::new();
            let mut valid = true;
            for sc in schemas {
                let verdict = check_schema(sc, &s, *depth);
                valid &= verdict.is_valid();
                let (text, doc) = match &verdict {
                    SchemaVerdict::Valid { instances, valuations } => (
                        format!(
                            "{}: valid ({instances} instances, {valuations} valuations)\n",
                            sc.label()
                        ),
                        json!({"schema": sc.label(), "verdict": "valid", "instances": instances, "valuations": valuations}),
                    ),
                    SchemaVerdict::Countermodel {
                        instance,
                        valuation,
                        value,
                    } => (
                        format!(
                            "{}: countermodel\n  instance: {instance}\n  valuation: {}\n  value: {}\n",
                            sc.label(),
                            valuation.render(&s),
                            alg.label(*value)
                        ),
                        json!({"schema": sc.label(), "verdict": "counterexample", "instance": instance.to_string(),
                               "valuation": valuation.render(&s), "value": alg.label(*value)}),
                    ),
                };
                out.push_str(&emit(format, text, doc));
            }
            Ok(CommandOutput::ok(code_for(valid), out))
        }
        Command::Paraconsistent { file } => {
            let s = structure(file)?;
            let alg = s.algebra();
            let (text, doc, code) = match find_paraconsistency_witness(&s) {
                Some(w) => (
                    format!(
                        "paraconsistent: {} = {} under {}\n",
                        w.formula,
                        alg.label(w.value),
                        w.valuation.render(&s)
                    ),
                    json!({"paraconsistent": true, "formula": w.formula.to_string(), "valuation": w.valuation.render(&s), "value": alg.label(w.value)}),
                    EXIT_VALID,
                ),
                None => (
                    "explosive: (~a & a) -> b is top under every valuation\n".to_string(),
                    json!({"paraconsistent": false}),
                    EXIT_COUNTEREXAMPLE,
                ),
            };
            Ok(CommandOutput::ok(code, emit(format, text, doc)))
        }
        Command::Universe { file, rank, stats } => {
            let s = structure(file)?;
            let store = NameStore::new(s.algebra().clone());
            let uni = enumerate_universe(&store, *rank, cli.ceiling)?;
            Ok(CommandOutput::ok(
                EXIT_VALID,
                universe_output(format, &store, &uni, *stats),
            ))
        }
        Command::Eval {
            file,
            formula,
            rank,
            policy,
        } => {
            let ctx = context(file, *rank, cli.ceiling, *policy)?;
            let parsed = parse_formula(formula, ctx.store()).map_err(|e| parse_failure(formula, &e))?;
            let value = ctx
                .eval(&parsed.formula)
                .map_err(|e| Failure(EXIT_USAGE, format!("error: formula: {e}")))?;
            let alg = ctx.algebra();
            let label = alg.label(value).to_string();
            let violations = ctx.constraint_violations();
            let mut stderr = String::new();
            for v in &violations {
                stderr.push_str(&format!(
                    "warning: negation value {} is not in N_{} for {}\n",
                    alg.label(v.negation_value),
                    alg.label(v.body_value),
                    print_formula(&v.formula, &|id| ctx.store().literal(id))
                ));
            }
            let doc = json!({"value": label, "policy": policy.label(), "rank": rank, "violations": violations.len()});
            Ok(CommandOutput {
                code: EXIT_VALID,
                stdout: emit(format, format!("{label}\n"), doc),
                stderr,
            })
        }
        Command::Leibniz {
            file,
            rank,
            depth,
            policy,
            samples,
        } => {
            let ctx = context(file, *rank, cli.ceiling, *policy)?;
            let (verdict, seed) = match samples {
                Some(n) => {
                    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
                    (check_leibniz_sampled(&ctx, *depth, *n, seed), Some(seed))
                }
                None => (
                    check_leibniz(&ctx, &generate_templates(*depth, ctx.universe().names())),
                    None,
                ),
            };
            let report = verdict.report(&ctx, seed);
            Ok(CommandOutput::ok(
                code_for(verdict.is_valid()),
                emit_reports(format, &[report]),
            ))
        }
        Command::Zf {
            file,
            rank,
            axiom,
            depth,
            samples,
            policy,
        } => {
            let ctx = context(file, *rank, cli.ceiling, *policy)?;
            let options = AxiomOptions {
                depth: *depth,
                sampler: samples.map(|n| Sampler {
                    samples: n,
                    seed: cli.seed.unwrap_or(DEFAULT_SEED),
                }),
                ..AxiomOptions::default()
            };
            let axioms: Vec<Axiom> = axiom.map_or_else(|| Axiom::ALL.to_vec(), |a| vec![a]);
            let results: Vec<_> = axioms.iter().map(|&a| check_axiom(a, &ctx, &options)).collect();
            let valid = results.iter().all(|r| r.is_valid());
            let reports: Vec<Report> = results.iter().map(|r| r.report(&ctx)).collect();
            Ok(CommandOutput::ok(code_for(valid), emit_reports(format, &reports)))
        }
    }
}

fn universe_output(format: Format, store: &NameStore, uni: &Universe, stats: bool) -> String {
    let counts = uni.counts();
    let per_rank = uni.rank_counts();
    match format {
        Format::Json => {
            let mut doc = json!({"rank": uni.bound(), "cumulative": counts, "per_rank": per_rank});
            if !stats {
                doc["names"] = uni.names().iter().map(|&n| Value::String(store.literal(n))).collect();
            }
            doc.to_string() + "\n"
        }
        Format::Text => {
            let mut out = String::new();
            for (k, (c, r)) in counts.iter().zip(&per_rank).enumerate() {
                out.push_str(&format!("V_<={}: {c} names ({r} of rank {})\n", k + 1, k + 1));
            }
            if !stats {
                for &n in uni.names() {
                    out.push_str(&format!("{}\n", store.literal(n)));
                }
            }
            out
        }
    }
}
