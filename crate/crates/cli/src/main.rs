//! `nanomu`: compute mu-bar invariants of nanophrases, expand words, run moves
//! and fuzz campaigns.
//!
//! Exit status: 0 on success, 1 on a domain error or failed check, 2 on a
//! usage error.

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use nanomu::fixtures::{fixture_text, FIXTURE_NAMES};
use nanomu::fuzz::{replay_counterexample, run_fuzz, Counterexample, FuzzConfig};
use nanomu::homotopy::parse_homotopy_data;
use nanomu::invariants::{IndexSequence, InvariantEngine, StabilizationPolicy};
use nanomu::magnus::SignedPhrase;
use nanomu::moves::{apply_move, enumerate_sites, fresh_letters, MoveKind, MoveSite};
use nanomu::walk::{random_walk, WalkConfig, WalkVariant};
use nanomu::{
    builtin_virtual, builtin_welded, parse_nanophrase, render_nanophrase, validate, HomotopyData, Nanophrase, Symbol,
};

#[derive(Parser)]
#[command(name = "nanomu", version, about = "Nanophrases, their moves, and mu-bar invariants")]
struct Cli {
    /// Machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Homotopy data: `virtual`, `welded`, or a data file.
    #[arg(long, global = true)]
    data: Option<String>,
    /// Seed for walks and fuzzing.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// mu, Delta and mu-bar for one index sequence.
    Compute {
        /// Phrase file, `-` for stdin, or `examples:<name>`.
        phrase: String,
        /// Comma separated indices, target last (e.g. 2,3,1).
        #[arg(long, value_parser = parse_indices)]
        indices: IndexSequence,
        /// Evaluate at this expansion stage instead of searching for stability.
        #[arg(long)]
        q: Option<usize>,
    },
    /// Signed component, its expansion, eta image and Magnus series.
    Expand {
        phrase: String,
        #[arg(short = 'i', long)]
        component: usize,
        #[arg(short = 'q', long, default_value_t = 3)]
        q: usize,
        /// Series truncation degree.
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// List, apply, or randomly walk rewriting moves.
    #[command(subcommand)]
    Moves(MovesCommand),
    /// Randomized move-invariance campaign.
    Fuzz(FuzzArgs),
    /// Print a worked example phrase; without a name, list them.
    Examples { name: Option<String> },
    /// Check the Gauss condition and projections.
    Validate { phrase: String },
}

#[derive(Subcommand)]
enum MovesCommand {
    /// Enumerate applicable sites, numbered from 1.
    List {
        phrase: String,
        /// Restrict to these kinds (H1_remove, H3, Shift, ...).
        #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
        kinds: Vec<MoveKind>,
    },
    /// Apply the site with the given number from `moves list`.
    Apply {
        phrase: String,
        #[arg(long)]
        site: usize,
        #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
        kinds: Vec<MoveKind>,
        /// |A| for insertions.
        #[arg(long, default_value = "a+")]
        projection: String,
    },
    /// Seeded random walk; prints the trace.
    Walk {
        phrase: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value = "M", value_parser = parse_variant)]
        variant: WalkVariant,
        #[arg(long, default_value_t = 12)]
        size_cap: usize,
    },
}

#[derive(Args)]
struct FuzzArgs {
    /// open_M, M, welded_M, or all.
    #[arg(long, default_value = "all")]
    variant: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Longest index sequence checked, target included.
    #[arg(long, default_value_t = 3)]
    max_len: usize,
    /// Directory for counterexample bundles.
    #[arg(long, default_value = "fuzz-counterexamples")]
    out: PathBuf,
    /// Re-check a saved counterexample bundle instead of fuzzing.
    #[arg(long)]
    replay: Option<PathBuf>,
}

fn parse_indices(s: &str) -> Result<IndexSequence, String> {
    s.parse().map_err(|e: nanomu::InvariantError| e.to_string())
}

fn parse_kind(s: &str) -> Result<MoveKind, String> {
    MoveKind::from_name(s).ok_or_else(|| format!("unknown move kind {s:?}"))
}

fn parse_variant(s: &str) -> Result<WalkVariant, String> {
    s.parse()
}

fn load_data(choice: Option<&str>, default: HomotopyData) -> Result<HomotopyData> {
    match choice {
        None => Ok(default),
        Some("virtual") => Ok(builtin_virtual()),
        Some("welded") => Ok(builtin_welded()),
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading homotopy data {path}"))?;
            Ok(parse_homotopy_data(&text)?)
        }
    }
}

fn read_source(source: &str) -> Result<String> {
    if let Some(name) = source.strip_prefix("examples:") {
        return fixture_text(name).ok_or_else(|| anyhow!("unknown example {name:?}"));
    }
    if source == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(source).with_context(|| format!("reading phrase {source}"))
}

/// Text format, or the JSON form when the input starts with `{`.
fn load_phrase(source: &str) -> Result<Nanophrase> {
    let text = read_source(source)?;
    if text.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(&text)?);
    }
    Ok(parse_nanophrase(&text)?)
}

fn emit(json: bool, value: &impl Serialize, text: impl FnOnce() -> String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", text());
    }
    Ok(())
}

fn compute(cli: &Cli, phrase: &str, s: &IndexSequence, q: Option<usize>) -> Result<ExitCode> {
    let p = load_phrase(phrase)?;
    let h = load_data(cli.data.as_deref(), builtin_virtual())?;
    if let Some(v) = validate(&p, &h).first() {
        bail!("phrase is not valid over {}: {v}", h.name());
    }
    if !s.is_distinct() {
        eprintln!("warning: indices {s} repeat; mu-bar is only an invariant for pairwise distinct indices");
    }
    let policy = StabilizationPolicy {
        fixed_q: q,
        ..Default::default()
    };
    let report = InvariantEngine::with_policy(&p, policy)?.report(s)?;
    emit(cli.json, &report, || {
        format!(
            "mu={} delta={} mubar={} (mod {}) q_used={}\n",
            report.mu, report.delta, report.mubar.value, report.mubar.modulus, report.q_used
        )
    })?;
    Ok(ExitCode::SUCCESS)
}

fn expand(cli: &Cli, phrase: &str, i: usize, q: usize, degree: usize) -> Result<ExitCode> {
    let p = load_phrase(phrase)?;
    let sp = SignedPhrase::new(&p)?;
    let signed = sp.signed_component(i)?;
    let rho = sp.rho_expand(i, q)?;
    let eta = sp.eta_word(&rho)?;
    let series = sp.component_series(i, q, degree)?;
    let terms: Vec<_> = series
        .terms()
        .into_iter()
        .map(|(m, c)| json!({"monomial": m.0, "coefficient": c}))
        .collect();
    let value = json!({
        "component": i,
        "q": q,
        "signed": signed.to_string(),
        "rho": rho.to_string(),
        "eta": eta.to_string(),
        "degree": degree,
        "series": terms,
    });
    emit(cli.json, &value, || {
        format!("w_{i}^eps = {signed}\nrho^{q} = {rho}\neta = {eta}\nseries (degree <= {degree}):\n{series}")
    })?;
    Ok(ExitCode::SUCCESS)
}

fn listed_sites(p: &Nanophrase, h: &HomotopyData, kinds: &[MoveKind]) -> Vec<MoveSite> {
    let kinds = if kinds.is_empty() { &MoveKind::ALL[..] } else { kinds };
    enumerate_sites(p, h, kinds)
}

fn moves(cli: &Cli, cmd: &MovesCommand) -> Result<ExitCode> {
    match cmd {
        MovesCommand::List { phrase, kinds } => {
            let p = load_phrase(phrase)?;
            let h = load_data(cli.data.as_deref(), builtin_virtual())?;
            let sites = listed_sites(&p, &h, kinds);
            let value: Vec<_> = sites
                .iter()
                .enumerate()
                .map(|(k, s)| json!({"id": k + 1, "site": s}))
                .collect();
            emit(cli.json, &value, || {
                sites.iter().enumerate().map(|(k, s)| format!("#{} {s}\n", k + 1)).collect()
            })?;
        }
        MovesCommand::Apply {
            phrase,
            site,
            kinds,
            projection,
        } => {
            let p = load_phrase(phrase)?;
            let h = load_data(cli.data.as_deref(), builtin_virtual())?;
            let sites = listed_sites(&p, &h, kinds);
            let chosen = site
                .checked_sub(1)
                .and_then(|k| sites.get(k))
                .ok_or_else(|| anyhow!("no site #{site} ({} sites listed)", sites.len()))?
                .clone();
            let chosen = match chosen.kind {
                MoveKind::H1Insert => chosen.bind(fresh_letters(&p, 1), Symbol::new(projection.as_str())?),
                MoveKind::H2Insert => chosen.bind(fresh_letters(&p, 2), Symbol::new(projection.as_str())?),
                _ => chosen,
            };
            let q = apply_move(&p, &h, &chosen)?;
            emit(cli.json, &json!({"site": chosen, "phrase": q}), || render_nanophrase(&q) + "\n")?;
        }
        MovesCommand::Walk {
            phrase,
            steps,
            variant,
            size_cap,
        } => {
            let p = load_phrase(phrase)?;
            let h = variant.restrict(&load_data(cli.data.as_deref(), variant.homotopy_data())?);
            let cfg = WalkConfig {
                steps: *steps,
                seed: cli.seed,
                size_cap: *size_cap,
                ..Default::default()
            };
            let (q, trace) = random_walk(&p, &h, *variant, &cfg)?;
            emit(cli.json, &json!({"trace": trace, "phrase": q}), || {
                let mut out = String::new();
                for (k, s) in trace.steps.iter().enumerate() {
                    let site = s.site.as_ref().map_or("no applicable site".to_string(), |x| x.to_string());
                    out += &format!("{:>3} {site} -> {}\n", k + 1, &s.result_hash[..12]);
                }
                out + &render_nanophrase(&q) + "\n"
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_bundle(dir: &Path, c: &Counterexample, k: usize) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}-{}-{k}.json", c.variant, c.seed));
    fs::write(&path, serde_json::to_string_pretty(c)?)?;
    Ok(path)
}

fn fuzz(cli: &Cli, args: &FuzzArgs) -> Result<ExitCode> {
    if let Some(path) = &args.replay {
        let c: Counterexample = serde_json::from_str(&fs::read_to_string(path)?)?;
        let h = c.variant.restrict(&load_data(cli.data.as_deref(), c.variant.homotopy_data())?);
        let result = replay_counterexample(&c, &h);
        let value = match &result {
            Ok(checked) => json!({"reproduced": false, "sequences_checked": checked}),
            Err(f) => json!({"reproduced": true, "failure": f}),
        };
        emit(cli.json, &value, || match &result {
            Ok(_) => "replay: no violation\n".to_string(),
            Err(f) => format!("replay: step {} {:?} {} {}\n", f.step, f.kind, f.check, f.detail),
        })?;
        return Ok(if result.is_ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    let variants = if args.variant.eq_ignore_ascii_case("all") {
        WalkVariant::ALL.to_vec()
    } else {
        vec![args.variant.parse::<WalkVariant>().map_err(|e| anyhow!(e))?]
    };
    let mut reports = Vec::new();
    let mut text = String::new();
    let mut failed = false;
    for variant in variants {
        let h = variant.restrict(&load_data(cli.data.as_deref(), variant.homotopy_data())?);
        let cfg = FuzzConfig {
            variant,
            trials: args.trials,
            steps: args.steps,
            seed: cli.seed,
            max_len: args.max_len,
            ..Default::default()
        };
        let report = run_fuzz(&cfg, &h);
        let moves: Vec<String> = report.moves.iter().map(|(k, v)| format!("{k}={v}")).collect();
        text += &format!(
            "{variant}: {} trials x {} steps, {} sequence checks, {} violations\n  {}\n",
            report.trials,
            report.steps,
            report.sequences_checked,
            report.counterexamples.len(),
            moves.join(" ")
        );
        for (k, c) in report.counterexamples.iter().enumerate() {
            let path = write_bundle(&args.out, c, k)?;
            text += &format!("  {} at step {}: {} (saved {})\n", c.failure.check, c.failure.step, c.failure.detail, path.display());
            failed = true;
        }
        reports.push(report);
    }
    emit(cli.json, &reports, || text)?;
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn examples(cli: &Cli, name: Option<&str>) -> Result<ExitCode> {
    let Some(name) = name else {
        emit(cli.json, &FIXTURE_NAMES, || FIXTURE_NAMES.join("\n") + "\n")?;
        return Ok(ExitCode::SUCCESS);
    };
    let text = fixture_text(name).ok_or_else(|| anyhow!("unknown example {name:?}"))?;
    let p = parse_nanophrase(&text)?;
    emit(cli.json, &json!({"name": name, "phrase": p}), || text.clone())?;
    Ok(ExitCode::SUCCESS)
}

fn validate_cmd(cli: &Cli, phrase: &str) -> Result<ExitCode> {
    let text = read_source(phrase)?;
    let p = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text)?
    } else {
        parse_nanophrase(&text)?
    };
    let h = load_data(cli.data.as_deref(), builtin_virtual())?;
    let violations = validate(&p, &h);
    emit(cli.json, &json!({"valid": violations.is_empty(), "violations": violations}), || {
        if violations.is_empty() {
            format!("ok: {} components, {} letters\n", p.component_count(), p.letter_count())
        } else {
            violations.iter().map(|v| format!("{v}\n")).collect()
        }
    })?;
    Ok(if violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Compute { phrase, indices, q } => compute(cli, phrase, indices, *q),
        Command::Expand {
            phrase,
            component,
            q,
            degree,
        } => expand(cli, phrase, *component, *q, *degree),
        Command::Moves(cmd) => moves(cli, cmd),
        Command::Fuzz(args) => fuzz(cli, args),
        Command::Examples { name } => examples(cli, name.as_deref()),
        Command::Validate { phrase } => validate_cmd(cli, phrase),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            let message = format!("{e:#}");
            if cli.json {
                println!("{}", json!({"error": {"message": message}}));
            }
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
