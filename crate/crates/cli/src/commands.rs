use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use serde_json::json;
use wyckit::codec::{encode_coords, encode_wyckoff, parse_coords, parse_wyckoff, reconstruct, ErrorKind};
use wyckit::geometry::{dedupe, structural_validity, MatchTolerances, ReferenceIndex};
use wyckit::rlip::plugin::{from_jsonl, lookup, replay, to_jsonl, ReplayEntry, SampleRequest, ScoreRequest, ScoreResponse};
use wyckit::rlip::{build_pairs, round_metrics, run_round, PairMode, RoundError, Sample};
use wyckit::symcore::SpaceGroupDb;
use wyckit::thermo::{
    build_hull, classify_stability, compositional_validity, parse_formula, read_hull_entries, Composition,
    MissingPolicy, OxidationTable,
};
use wyckit::{Crystal, Element, Exec};

use crate::input::{blocks, read, Sink};
use crate::{config, io, usage, BlockFormat, Cli, Command, Failure, HullAction, MetricsMode, RoundArgs, TolArgs};

type Outcome = Result<bool, Failure>;

#[derive(Serialize)]
struct RecordError {
    index: usize,
    kind: &'static str,
    error: String,
}

fn kind_name(k: ErrorKind) -> &'static str {
    match k {
        ErrorKind::Lexical => "lexical",
        ErrorKind::Semantic => "semantic",
    }
}

/// Wyckoff block (second line `Spacegroup:`) or coordinate block.
fn parse_any(index: usize, text: &str) -> Result<Crystal, RecordError> {
    let fail = |kind, error: String| RecordError { index, kind, error };
    let wyckoff = text.lines().nth(1).is_some_and(|l| l.trim_start().starts_with("Spacegroup:"));
    if wyckoff {
        let record = parse_wyckoff(text).map_err(|e| fail(kind_name(e.kind()), e.to_string()))?;
        reconstruct(&record).map_err(|e| fail("semantic", e.to_string()))
    } else {
        parse_coords(text).map_err(|e| fail(kind_name(e.kind()), e.to_string()))
    }
}

fn report(e: &RecordError) {
    eprintln!("record {}: {} error: {}", e.index, e.kind, e.error);
}

fn read_blocks(path: &Path) -> Result<Vec<String>, Failure> {
    Ok(blocks(&read(path).map_err(io)?))
}

fn parse_all(path: &Path) -> Result<Vec<Result<Crystal, RecordError>>, Failure> {
    Ok(read_blocks(path)?.iter().enumerate().map(|(i, b)| parse_any(i, b)).collect())
}

fn exec(jobs: Option<usize>) -> Exec {
    if jobs == Some(1) {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn tolerances(base: MatchTolerances, args: &TolArgs) -> Result<MatchTolerances, Failure> {
    let t = MatchTolerances {
        ltol: args.ltol.unwrap_or(base.ltol),
        stol: args.stol.unwrap_or(base.stol),
        angle_tol: args.angle_tol.unwrap_or(base.angle_tol),
    };
    if !(t.ltol > 0.0 && t.stol > 0.0 && t.angle_tol > 0.0) {
        return Err(usage(anyhow!("tolerances must be positive")));
    }
    Ok(t)
}

fn sym_tol(flag: Option<f64>, base: f64) -> Result<f64, Failure> {
    let t = flag.unwrap_or(base);
    if !(t > 0.0) {
        return Err(usage(anyhow!("--sym-tol must be positive")));
    }
    Ok(t)
}

pub fn run(cli: Cli) -> Outcome {
    let cfg = config::load(cli.config.as_deref()).map_err(usage)?;
    let exec = exec(cli.jobs);
    match cli.command {
        Command::Encode { input, format, sym_tol: tol, out } => {
            encode(&input, format, sym_tol(tol, cfg.sym_tol)?, out.as_deref())
        }
        Command::Decode { input, out } => decode(&input, out.as_deref()),
        Command::Validate { input, out } => validate(&input, out.as_deref()),
        Command::Detect { input, sym_tol: tol, out } => detect(&input, sym_tol(tol, cfg.sym_tol)?, out.as_deref()),
        Command::Match { input, corpus, tol, out } => {
            let tol = tolerances(cfg.match_tolerances, &tol)?;
            matching(&input, corpus.as_deref(), tol, exec, out.as_deref())
        }
        Command::Hull { action: HullAction::Query { hull, formula, energy, out } } => {
            hull_query(&hull, &formula, &energy, &cfg.thresholds, out.as_deref())
        }
        Command::Pairs { samples, seed, non_tiered, out } => {
            let mode = if non_tiered { PairMode::NonTiered } else { cfg.pair_mode };
            pairs(&samples, seed.unwrap_or(cfg.seed), mode, out.as_deref())
        }
        Command::Metrics { samples, mode, target, out } => metrics(&samples, mode, &target, out.as_deref()),
        Command::Round(args) => round(cfg, args, exec),
        Command::ReplaySampler { file } => replay_sampler(&file),
        Command::LookupScorer { file } => lookup_scorer(&file),
    }
}

fn encode(input: &Path, format: BlockFormat, tol: f64, out: Option<&Path>) -> Outcome {
    let text = read(input).map_err(io)?;
    let crystals: Vec<Result<Crystal, RecordError>> = if text.trim_start().starts_with('{') {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| RecordError { index: i, kind: "lexical", error: e.to_string() })
            })
            .collect()
    } else {
        blocks(&text).iter().enumerate().map(|(i, b)| parse_any(i, b)).collect()
    };
    let mut sink = Sink::open(out).map_err(io)?;
    let mut ok = true;
    let mut first = true;
    for (i, c) in crystals.into_iter().enumerate() {
        let block = c.and_then(|c| match format {
            BlockFormat::Coords => Ok(encode_coords(&c)),
            BlockFormat::Wyckoff => {
                encode_wyckoff(&c, tol).map_err(|e| RecordError { index: i, kind: "semantic", error: e.to_string() })
            }
        });
        match block {
            Ok(b) => {
                if !first {
                    sink.text("\n").map_err(io)?;
                }
                first = false;
                sink.text(&b).map_err(io)?;
            }
            Err(e) => {
                report(&e);
                ok = false;
            }
        }
    }
    sink.finish().map_err(io)?;
    Ok(ok)
}

fn per_record<T: Serialize>(
    input: &Path,
    out: Option<&Path>,
    f: impl Fn(usize, &Crystal) -> T,
) -> Outcome {
    let mut sink = Sink::open(out).map_err(io)?;
    let mut ok = true;
    for (i, parsed) in parse_all(input)?.into_iter().enumerate() {
        match parsed {
            Ok(c) => sink.line(&f(i, &c)).map_err(io)?,
            Err(e) => {
                report(&e);
                sink.line(&e).map_err(io)?;
                ok = false;
            }
        }
    }
    sink.finish().map_err(io)?;
    Ok(ok)
}

fn decode(input: &Path, out: Option<&Path>) -> Outcome {
    per_record(input, out, |i, c| json!({ "index": i, "crystal": c }))
}

fn validate(input: &Path, out: Option<&Path>) -> Outcome {
    let table = OxidationTable::standard();
    per_record(input, out, |i, c| {
        let composition = Composition::of_crystal(c).ok();
        let chemical = composition.as_ref().is_some_and(|x| compositional_validity(x, table, MissingPolicy::Strict));
        let structural = structural_validity(c);
        json!({
            "index": i,
            "formula": composition.map(|x| x.to_string()),
            "atoms": c.len(),
            "structural": structural,
            "compositional": chemical,
            "valid": structural && chemical,
        })
    })
}

fn detect(input: &Path, tol: f64, out: Option<&Path>) -> Outcome {
    let db = SpaceGroupDb::standard();
    per_record(input, out, |i, c| {
        let d = db.detect(c, tol);
        let symbol = db.group(d.number.into()).map(|g| g.symbol.clone()).unwrap_or_default();
        json!({ "index": i, "spacegroup": d.number, "symbol": symbol })
    })
}

fn matching(input: &Path, corpus: Option<&Path>, tol: MatchTolerances, exec: Exec, out: Option<&Path>) -> Outcome {
    let parsed = parse_all(input)?;
    let mut ok = true;
    let mut good: Vec<(usize, Crystal)> = Vec::new();
    for (i, p) in parsed.into_iter().enumerate() {
        match p {
            Ok(c) => good.push((i, c)),
            Err(e) => {
                report(&e);
                ok = false;
            }
        }
    }
    let mut sink = Sink::open(out).map_err(io)?;
    match corpus {
        None => {
            let crystals: Vec<Crystal> = good.iter().map(|(_, c)| c.clone()).collect();
            let classes: Vec<Vec<usize>> = dedupe(&crystals, &tol, exec)
                .into_iter()
                .map(|class| class.into_iter().map(|k| good[k].0).collect())
                .collect();
            sink.pretty(&json!({ "classes": classes })).map_err(io)?;
        }
        Some(path) => {
            let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display())).map_err(io)?;
            let index = ReferenceIndex::from_jsonl(std::io::BufReader::new(file), tol, exec).map_err(usage)?;
            for (i, c) in &good {
                let found = index.find_match(c);
                sink.line(&json!({ "index": i, "novel": found.is_none(), "match": found })).map_err(io)?;
            }
        }
    }
    sink.finish().map_err(io)?;
    Ok(ok)
}

fn hull_query(
    hull_path: &Path,
    formulas: &[String],
    energies: &[f64],
    thresholds: &wyckit::thermo::Thresholds,
    out: Option<&Path>,
) -> Outcome {
    if !energies.is_empty() && energies.len() != formulas.len() {
        return Err(usage(anyhow!("give one --energy per --formula or none")));
    }
    let file = std::fs::File::open(hull_path).with_context(|| format!("opening {}", hull_path.display())).map_err(io)?;
    let entries = read_hull_entries(std::io::BufReader::new(file)).map_err(usage)?;
    let compositions: Vec<Composition> = formulas
        .iter()
        .map(|f| parse_formula(f).with_context(|| format!("formula {f:?}")))
        .collect::<anyhow::Result<_>>()
        .map_err(usage)?;
    let mut elements: BTreeSet<Element> = entries.iter().flat_map(|e| e.composition.elements()).collect();
    elements.extend(compositions.iter().flat_map(|c| c.elements()));
    let elements: Vec<Element> = elements.into_iter().collect();
    let hull = build_hull(entries, &elements).map_err(usage)?;
    let mut sink = Sink::open(out).map_err(io)?;
    for (k, c) in compositions.iter().enumerate() {
        let h = hull.hull_energy(c).map_err(usage)?;
        let row = match energies.get(k) {
            Some(&e) => json!({
                "formula": c.to_string(),
                "hull_energy": h,
                "energy_per_atom": e,
                "e_hull": e - h,
                "stability": classify_stability(e - h, thresholds),
            }),
            None => json!({ "formula": c.to_string(), "hull_energy": h }),
        };
        sink.line(&row).map_err(io)?;
    }
    sink.finish().map_err(io)?;
    Ok(true)
}

fn read_samples(path: &Path) -> Result<Vec<Sample>, Failure> {
    let text = read(path).map_err(io)?;
    from_jsonl(text.as_bytes()).map_err(|(line, msg)| usage(anyhow!("{} line {line}: {msg}", path.display())))
}

fn pairs(samples: &Path, seed: u64, mode: PairMode, out: Option<&Path>) -> Outcome {
    let samples = read_samples(samples)?;
    let set = build_pairs(&samples, seed, mode);
    for w in &set.warnings {
        eprintln!("warning: {w}");
    }
    let mut sink = Sink::open(out).map_err(io)?;
    for p in &set.pairs {
        sink.line(p).map_err(io)?;
    }
    sink.finish().map_err(io)?;
    eprintln!("{} pairs", set.pairs.len());
    Ok(true)
}

fn metrics(samples: &Path, mode: MetricsMode, targets: &[u16], out: Option<&Path>) -> Outcome {
    let samples = read_samples(samples)?;
    let targets: Vec<u16> = if targets.is_empty() {
        samples.iter().filter_map(|s| s.target_sg).collect::<BTreeSet<_>>().into_iter().collect()
    } else {
        targets.to_vec()
    };
    let m = round_metrics(&samples, &targets);
    let mut sink = Sink::open(out).map_err(io)?;
    match mode {
        MetricsMode::Sun => {
            eprintln!("stability {:.2}%  S.U.N. {:.2}%", m.sun.stability_rate, m.sun.sun_rate);
            sink.pretty(&m.sun).map_err(io)?;
        }
        MetricsMode::Ssun => {
            for r in &m.ssun {
                eprintln!("group {}: S.S.U.N. {:.2}%", r.target_sg, r.ssun_rate);
            }
            sink.pretty(&m.ssun).map_err(io)?;
        }
    }
    sink.finish().map_err(io)?;
    Ok(true)
}

fn round(mut cfg: wyckit::rlip::RoundConfig, args: RoundArgs, exec: Exec) -> Outcome {
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.temp_base {
        cfg.temperature.base = v;
    }
    if let Some(v) = args.temp_step {
        cfg.temperature.step = v;
    }
    if args.non_tiered {
        cfg.pair_mode = PairMode::NonTiered;
    }
    if let Some(v) = args.rmax {
        cfg.rmax = v;
    }
    if let Some(v) = args.hull {
        cfg.hull = v;
    }
    if let Some(v) = args.novelty_corpus {
        cfg.novelty_corpus = Some(v);
    }
    if let Some(v) = args.sampler {
        cfg.sampler = v;
    }
    if let Some(v) = args.scorer {
        cfg.scorer = v;
    }
    if let Some(v) = args.unconditional {
        cfg.unconditional = v;
    }
    if let Some(v) = args.per_spacegroup {
        cfg.per_spacegroup = v;
    }
    if let Some(v) = args.spacegroups {
        cfg.spacegroups = v;
    }
    config::check_files(&cfg).map_err(usage)?;
    match run_round(&cfg, args.iteration, &args.out, exec) {
        Ok(m) => {
            let pairs: usize = m.pair_counts.values().sum();
            eprintln!(
                "iteration {} at temperature {}: {} prompts, {} sampler requests, {pairs} pairs",
                m.iteration, m.temperature, m.prompts, m.sampler_requests
            );
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            Ok(true)
        }
        Err(e @ (RoundError::Config(_) | RoundError::Input(_))) => Err(usage(e)),
        Err(e) => Err(io(e)),
    }
}

fn read_jsonl_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, Failure> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display())).map_err(io)?;
    from_jsonl(&bytes).map_err(|(line, msg)| usage(anyhow!("{} line {line}: {msg}", path.display())))
}

fn stdin_rows<T: serde::de::DeserializeOwned>() -> Result<Vec<T>, Failure> {
    let mut bytes = Vec::new();
    for line in std::io::stdin().lock().lines() {
        bytes.extend(line.map_err(io)?.into_bytes());
        bytes.push(b'\n');
    }
    from_jsonl(&bytes).map_err(|(line, msg)| usage(anyhow!("request line {line}: {msg}")))
}

fn emit(bytes: &[u8]) -> Outcome {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes).map_err(io)?;
    out.flush().map_err(io)?;
    Ok(true)
}

fn replay_sampler(file: &Path) -> Outcome {
    let entries: Vec<ReplayEntry> = read_jsonl_file(file)?;
    let requests: Vec<SampleRequest> = stdin_rows()?;
    emit(&to_jsonl(&replay(&requests, &entries)))
}

fn lookup_scorer(file: &Path) -> Outcome {
    let table: Vec<ScoreResponse> = read_jsonl_file(file)?;
    let requests: Vec<ScoreRequest> = stdin_rows()?;
    let scores = lookup(&requests, &table).map_err(|id| io(anyhow!("no energy listed for id {id}")))?;
    emit(&to_jsonl(&scores))
}
