//! `denomkit` command-line tool.
//!
//! Exit codes: 0 on success, 2 when a budget ran out and the output is
//! partial, 1 on invalid input or any other failure.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use denomkit::arith::GaussMatrix;
use denomkit::cartan::{
    as_integer, direct_coset_count, double_coset_size, AffineWeylElement, OracleGroup, RootSystem,
};
use denomkit::enumerate::{csv_row, solve_scaled_isometry, stream_solutions, DetFilter, EnumerateOptions};
use denomkit::experiments::{run_equidist_sweep, run_genus_compare, run_local_global_scan, ExperimentConfig, NFilter};
use denomkit::forms::{Form, FormKind};
use denomkit::locals::{local_profile, local_solvable, LocalOptions};
use denomkit::so3::rotation_numerators;

#[derive(Parser)]
#[command(name = "denomkit", version, about = "Rational points of given denominator in compact groups")]
struct Cli {
    /// Worker threads for enumeration.
    #[arg(long, global = true, env = "DENOMKIT_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// List the integral M with M*·G·M = n²·G and content 1.
    Enumerate {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        n: u64,
        /// Stop after this many solutions (in canonical order).
        #[arg(long)]
        limit: Option<usize>,
        /// Keep every determinant, not only det = n^k.
        #[arg(long)]
        any_det: bool,
        /// Add wall time to the JSON report.
        #[arg(long)]
        timing: bool,
    },
    /// Local solvability at the primes dividing n, or at one prime.
    LocalCheck {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 200_000)]
        budget: u64,
        #[arg(long)]
        max_precision: Option<u32>,
    },
    /// Rotations with denominator n from quaternions of norm n (odd n).
    QuatGen {
        #[arg(long)]
        n: u64,
    },
    /// Discrepancy of each level against Haar measure, one record per n.
    Equidist {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long)]
        degree: Option<u32>,
        /// Monte Carlo samples for the Haar reference.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Card(U·a·U / U) from the length formula, optionally checked by
    /// counting lattices.
    CosetVolume {
        #[arg(long, value_enum)]
        system: System,
        /// Coroot vector, e.g. 2,-2 or 1,0,-1.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        translation: Vec<i64>,
        /// Residue field size (a prime for the oracle).
        #[arg(long)]
        q: u64,
        /// Also count lattices directly (dominant translations of the
        /// shape (m,-m) or (m,0,-m)).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1 << 24)]
        budget: u64,
    },
    /// Local-global comparison over a range of n.
    Scan {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Genus verdict for two forms, then their counts side by side.
    GenusCompare {
        #[command(flatten)]
        form: FormArgs,
        /// JSON file of the second form.
        #[arg(long)]
        second: Option<PathBuf>,
        /// Second Gram matrix inline.
        #[arg(long)]
        second_gram: Option<String>,
        #[command(flatten)]
        range: RangeArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    A1,
    A2,
}

#[derive(Args)]
struct FormArgs {
    /// JSON file {"kind": "quadratic"|"hermitian", "gram": [[...]]}.
    #[arg(long)]
    form: Option<PathBuf>,
    /// Gram matrix inline, e.g. '[[1,0],[0,1]]'; hermitian entries as [re, im].
    #[arg(long, conflicts_with = "form")]
    gram: Option<String>,
    #[arg(long, requires = "gram")]
    hermitian: bool,
    /// Shorthand for the identity form of this rank.
    #[arg(long, conflicts_with_all = ["form", "gram"])]
    identity: Option<usize>,
}

#[derive(Args)]
struct RangeArgs {
    /// JSON experiment config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_min: Option<u64>,
    #[arg(long)]
    n_max: Option<u64>,
    /// Explicit levels, e.g. 3,101,1009.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    /// all, odd, prime, or coprime:N.
    #[arg(long)]
    filter: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count_cap: Option<usize>,
    /// Seconds before remaining levels are reported unknown.
    #[arg(long)]
    time_budget: Option<u64>,
}

enum Outcome {
    Done,
    Partial,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<denomkit::Error>(), Some(denomkit::Error::BudgetExceeded(_))));
            ExitCode::from(if budget { 2 } else { 1 })
        }
    }
}

fn parse_json(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).with_context(|| format!("{what} is not valid JSON"))
}

fn read_form(path: &PathBuf) -> Result<Form> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Form::from_json(&parse_json(&text, "form file")?)?)
}

fn inline_form(gram: &str, hermitian: bool) -> Result<Form> {
    let kind = if hermitian { "hermitian" } else { "quadratic" };
    Ok(Form::from_json(&json!({ "kind": kind, "gram": parse_json(gram, "--gram")? }))?)
}

impl FormArgs {
    fn resolve(&self, fallback: Option<&str>) -> Result<Form> {
        if let Some(k) = self.identity {
            return Ok(Form::identity(FormKind::Quadratic, k)?);
        }
        if let Some(g) = &self.gram {
            return inline_form(g, self.hermitian);
        }
        match (&self.form, fallback) {
            (Some(p), _) => read_form(p),
            (None, Some(p)) => read_form(&PathBuf::from(p)),
            (None, None) => bail!("no form given: use --form, --gram or --identity"),
        }
    }
}

fn parse_filter(s: &str) -> Result<NFilter> {
    Ok(match s {
        "all" => NFilter::All,
        "odd" => NFilter::Odd,
        "prime" => NFilter::Prime,
        _ => match s.strip_prefix("coprime:") {
            Some(m) => NFilter::CoprimeTo(m.parse().with_context(|| format!("bad modulus in {s:?}"))?),
            None => bail!("unknown filter {s:?}"),
        },
    })
}

impl RangeArgs {
    fn config(&self, workers: Option<usize>) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.n_min {
            cfg.n_min = v;
        }
        if let Some(v) = self.n_max {
            cfg.n_max = v;
        }
        if let Some(v) = &self.n {
            cfg.n_list = Some(v.clone());
        }
        if let Some(f) = &self.filter {
            cfg.filter = parse_filter(f)?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.count_cap {
            cfg.count_cap = Some(v);
        }
        if let Some(v) = self.time_budget {
            cfg.time_budget_secs = Some(v);
        }
        if workers.is_some() {
            cfg.workers = workers;
        }
        Ok(cfg)
    }
}

fn ndjson(out: &mut (dyn Write + Send), v: &Value) -> Result<()> {
    serde_json::to_writer(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    let sink: Box<dyn Write + Send> = match &cli.out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut out = BufWriter::new(sink);
    let outcome = dispatch(&cli, &mut out)?;
    out.flush()?;
    Ok(outcome)
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let csv = cli.format == Format::Csv;
    match &cli.command {
        Command::Enumerate { form, n, limit, any_det, timing } => {
            let form = form.resolve(None)?;
            let opts = EnumerateOptions {
                det: if *any_det { DetFilter::Any } else { DetFilter::Special },
                limit: *limit,
                workers: cli.workers,
                ..Default::default()
            };
            if csv {
                stream_solutions(&form, *n, opts, |m: &GaussMatrix| {
                    writeln!(out, "{}", csv_row(m, *n)).map_err(|e| e.to_string())
                })?;
            } else {
                let set = solve_scaled_isometry(&form, *n, opts)?;
                ndjson(out, &set.to_json(*timing))?;
            }
            Ok(Outcome::Done)
        }
        Command::LocalCheck { form, n, p, budget, max_precision } => {
            let form = form.resolve(None)?;
            let opts = LocalOptions { budget: *budget, max_e: *max_precision, ..Default::default() };
            let verdicts = match p {
                Some(p) => vec![local_solvable(&form, *n, *p, opts)?],
                None => local_profile(&form, *n, opts)?.verdicts,
            };
            let unknown = verdicts.iter().any(|v| !v.is_yes() && !v.is_no());
            if csv {
                writeln!(out, "n,p,verdict")?;
                for v in &verdicts {
                    writeln!(out, "{},{},{}", n, v.p, v.label())?;
                }
            } else {
                let member = if unknown { Value::Null } else { json!(verdicts.iter().all(|v| v.is_yes())) };
                let v = json!({
                    "form": form.to_json(),
                    "n": n,
                    "member": member,
                    "verdicts": verdicts.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
                });
                ndjson(out, &v)?;
            }
            Ok(if unknown { Outcome::Partial } else { Outcome::Done })
        }
        Command::QuatGen { n } => {
            let rots = rotation_numerators(*n)?;
            if csv {
                for r in &rots {
                    let cells: Vec<String> = r.iter().map(i64::to_string).collect();
                    writeln!(out, "{},{}", cells.join(","), n)?;
                }
            } else {
                let mats: Vec<Value> = rots.iter().map(|r| json!([&r[0..3], &r[3..6], &r[6..9]])).collect();
                ndjson(out, &json!({ "n": n, "count": rots.len(), "matrices": mats }))?;
            }
            Ok(Outcome::Done)
        }
        Command::Equidist { form, range, degree, samples } => {
            let mut cfg = range.config(cli.workers)?;
            if let Some(d) = degree {
                cfg.degree = *d;
            }
            if let Some(s) = samples {
                cfg.haar_samples = *s;
            }
            let form = form.resolve(cfg.form.as_deref())?;
            let report = run_equidist_sweep(&form, &cfg)?;
            if csv {
                writeln!(out, "n,nonempty,size,method,sup_gap")?;
                for r in &report.records {
                    let gap = r.sup_gap.map(|g| format!("{g:e}")).unwrap_or_default();
                    writeln!(out, "{},{},{},{},{}", r.n, r.nonempty, r.size, r.method, gap)?;
                }
            } else {
                for r in &report.records {
                    ndjson(out, &json!({ "record": "level", "level": r }))?;
                }
                ndjson(
                    out,
                    &json!({
                        "record": "summary",
                        "form": report.form,
                        "degree": report.degree,
                        "haar_samples": report.haar_samples,
                        "seed": report.seed,
                        "reference_std_error": report.reference_std_error,
                        "non_increasing": report.non_increasing,
                        "partial": report.partial,
                    }),
                )?;
            }
            Ok(if report.partial { Outcome::Partial } else { Outcome::Done })
        }
        Command::CosetVolume { system, translation, q, oracle, budget } => {
            let system = match system {
                System::A1 => RootSystem::A1,
                System::A2 => RootSystem::A2,
            };
            let w = AffineWeylElement::translation(system, translation)?;
            let size = double_coset_size(&w, *q)?;
            let direct = if *oracle {
                let mut t = translation.clone();
                t.sort_unstable_by(|a, b| b.cmp(a));
                let (group, m) = match (system, t.as_slice()) {
                    (RootSystem::A1, &[m, _]) => (OracleGroup::SL2, m),
                    (RootSystem::A2, &[m, 0, _]) => (OracleGroup::SL3, m),
                    _ => bail!("the lattice count supports translations (m,-m) and (m,0,-m) only"),
                };
                Some(direct_coset_count(*q, m as u32, group, *budget)?)
            } else {
                None
            };
            if csv {
                writeln!(out, "q,length,size,direct")?;
                let d = direct.map(|d| d.to_string()).unwrap_or_default();
                writeln!(out, "{},{},{},{}", q, w.length(), size, d)?;
            } else {
                let v = json!({
                    "system": format!("{system:?}"),
                    "translation": translation,
                    "q": q,
                    "length": w.length(),
                    "size": size.to_string(),
                    "direct": direct,
                    "agree": direct.map(|d| as_integer(&size).map(|s| s.to_string()) == Some(d.to_string())),
                });
                ndjson(out, &v)?;
            }
            Ok(Outcome::Done)
        }
        Command::Scan { form, range } => {
            let cfg = range.config(cli.workers)?;
            let form = form.resolve(cfg.form.as_deref())?;
            let report = run_local_global_scan(&form, &cfg)?;
            if csv {
                writeln!(out, "n,local,count,capped,agreement")?;
                for r in &report.rows {
                    let local = r.local_member.map(|b| b.to_string()).unwrap_or_else(|| "unknown".into());
                    let agreement = serde_json::to_value(r.agreement)?;
                    let agreement = agreement.as_str().unwrap_or_default();
                    writeln!(out, "{},{},{},{},{}", r.n, local, r.global_count, r.count_capped, agreement)?;
                }
            } else {
                for r in &report.rows {
                    ndjson(out, &json!({ "record": "level", "level": r }))?;
                }
                ndjson(
                    out,
                    &json!({
                        "record": "summary",
                        "form": report.form,
                        "exceptions": report.exceptions,
                        "contradictions": report.contradictions,
                        "partial": report.partial,
                    }),
                )?;
            }
            Ok(if report.partial { Outcome::Partial } else { Outcome::Done })
        }
        Command::GenusCompare { form, second, second_gram, range } => {
            let cfg = range.config(cli.workers)?;
            let first = form.resolve(cfg.form.as_deref())?;
            let second = match (second, second_gram, &cfg.second_form) {
                (Some(p), _, _) => read_form(p)?,
                (None, Some(g), _) => inline_form(g, first.kind() == FormKind::Hermitian)?,
                (None, None, Some(p)) => read_form(&PathBuf::from(p))?,
                _ => bail!("no second form: use --second or --second-gram"),
            };
            let report = run_genus_compare(&first, &second, &cfg)?;
            if csv {
                writeln!(out, "n,count_first,count_second,capped,exception")?;
                for r in &report.rows {
                    writeln!(out, "{},{},{},{},{}", r.n, r.count_first, r.count_second, r.capped, r.exception)?;
                }
            } else {
                ndjson(out, &json!({ "record": "verdict", "first": report.first, "second": report.second, "verdict": report.verdict }))?;
                for r in &report.rows {
                    ndjson(out, &json!({ "record": "level", "level": r }))?;
                }
                ndjson(out, &json!({ "record": "summary", "exceptions": report.exceptions, "partial": report.partial }))?;
            }
            Ok(if report.partial { Outcome::Partial } else { Outcome::Done })
        }
    }
}
