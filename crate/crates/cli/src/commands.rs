//! Subcommand bodies.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde_json::Value;
use specbench::fingerprints::similarity;
use specbench::geometry::{analyze_record, GeometryReport, StructureFormat};
use specbench::molgraph::parse_smiles;
use specbench::nmr_metrics::{score_carbon, score_proton, MatchScore};
use specbench::seq_metrics::{score_pair, PairScore};
use specbench::spectra::{parse_spectrum, serialize, Modality, Spectrum};
use specbench::taskgen::{self, check_record, Format, MoleculeRecord, Task, TemplateSet};
use specbench::vec_metrics::{cosine_similarity, vectorize_spectrum};

use crate::config::RunConfig;
use crate::corpus::{io_error, load_corpus, read_file, CorpusItem, CorpusKind};
use crate::report::{error_row, Command, Conversion, EvalReport, Row, VectorScore};
use crate::{manual, CliError, Common, PairInput, SingleInput, StructureFormatArg, Sub};

type Warnings = BTreeMap<String, usize>;

pub fn dispatch(
    sub: Sub,
    env: Vec<(String, String)>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let (command, common, cfg, rows_and_warnings) = match sub {
        Sub::Manual => {
            stdout.write_all(manual().as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
            return Ok(0);
        }
        Sub::Report { merge, out } => return merge_reports(&merge, out.as_deref(), stdout),
        Sub::Serialize { input, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            (
                Command::Serialize,
                common.clone(),
                cfg.clone(),
                single(&input, Some("spectrum"), &common, &cfg, serialize_one)?,
            )
        }
        Sub::Parse { input, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            (Command::Parse, common.clone(), cfg.clone(), single(&input, Some("spectrum"), &common, &cfg, parse_one)?)
        }
        Sub::ScoreNmr13c { input, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            (Command::ScoreNmr13c, common.clone(), cfg.clone(), paired(&input, "spectrum", &common, &cfg, nmr13c_one)?)
        }
        Sub::ScoreNmr1h { input, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            (Command::ScoreNmr1h, common.clone(), cfg.clone(), paired(&input, "spectrum", &common, &cfg, nmr1h_one)?)
        }
        Sub::ScoreIr { input, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            (
                Command::ScoreIr,
                common.clone(),
                cfg.clone(),
                paired(&input, "spectrum", &common, &cfg, |p, t, c| vector_one(p, t, c, false))?,
            )
        }
        Sub::ScoreMs { input, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            (
                Command::ScoreMs,
                common.clone(),
                cfg.clone(),
                paired(&input, "spectrum", &common, &cfg, |p, t, c| vector_one(p, t, c, true))?,
            )
        }
        Sub::ScoreSeq { input, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            (Command::ScoreSeq, common.clone(), cfg.clone(), paired(&input, "text", &common, &cfg, seq_one)?)
        }
        Sub::Fpsim { input, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            (Command::Fpsim, common.clone(), cfg.clone(), paired(&input, "smiles", &common, &cfg, fpsim_one)?)
        }
        Sub::Geom { input, format, common } => {
            let cfg = setup(&common, &env, &[], stderr)?;
            let params = cfg.geometry.params()?;
            let format = match format {
                StructureFormatArg::Auto => StructureFormat::Auto,
                StructureFormatArg::Sdf => StructureFormat::Sdf,
                StructureFormatArg::Text => StructureFormat::Text,
            };
            let one = move |v: &Value, _: &RunConfig| -> Result<GeometryReport, String> {
                Ok(analyze_record(as_text(v)?, format, &params))
            };
            (Command::Geom, common.clone(), cfg.clone(), single(&input, Some("structure"), &common, &cfg, one)?)
        }
        Sub::Taskgen { input, task, format, split, seed, common } => {
            let extra: Vec<String> = seed.map(|s| format!("seed={s}")).into_iter().collect();
            let cfg = setup(&common, &env, &extra, stderr)?;
            let result = taskgen_rows(&input, &task, &format, split, &cfg)?;
            (Command::Taskgen, common, cfg, result)
        }
    };
    finish(command, &common, cfg, rows_and_warnings, stdout, stderr)
}

fn setup(
    common: &Common,
    env: &[(String, String)],
    extra: &[String],
    stderr: &mut dyn Write,
) -> Result<RunConfig, CliError> {
    let mut sets = common.set.clone();
    sets.extend_from_slice(extra);
    let cfg = RunConfig::resolve(common.config.as_deref(), env.to_vec(), &sets)?;
    for w in cfg.validate()? {
        let _ = writeln!(stderr, "warning: {w}");
    }
    Ok(cfg)
}

fn finish(
    command: Command,
    common: &Common,
    cfg: RunConfig,
    (rows, warnings): (Vec<Value>, Warnings),
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let report = EvalReport::build(command, cfg, rows, warnings)?;
    match &common.records {
        Some(path) => {
            let f = File::create(path).map_err(|e| io_error(path, e))?;
            write_rows(&report.per_record, &mut BufWriter::new(f)).map_err(|e| io_error(path, e))?;
        }
        None => write_rows(&report.per_record, stdout).map_err(|e| CliError::Io(e.to_string()))?,
    }
    if let Some(path) = &common.out {
        write_json(path, &report)?;
    }
    for (k, v) in &report.warnings {
        let _ = writeln!(stderr, "warning: {k} = {v}");
    }
    let _ = writeln!(stderr, "{command}: {} records, {} errors", report.per_record.len(), report.record_errors());
    Ok(if common.strict && report.record_errors() > 0 { 1 } else { 0 })
}

fn write_rows(rows: &[Value], out: &mut dyn Write) -> std::io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

fn merge_reports(paths: &[std::path::PathBuf], out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let reports = paths
        .iter()
        .map(|p| {
            serde_json::from_str::<EvalReport>(&read_file(p)?)
                .map_err(|e| CliError::Report(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let merged = EvalReport::merge(reports)?;
    match out {
        Some(p) => write_json(p, &merged)?,
        None => {
            serde_json::to_writer_pretty(&mut *stdout, &merged).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(stdout).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(0)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| CliError::Usage(format!("--jobs: {e}")))
}

fn as_text(v: &Value) -> Result<&str, String> {
    v.as_str().ok_or_else(|| "expected a string".to_string())
}

fn single<T, F>(
    input: &SingleInput,
    field: Option<&'static str>,
    common: &Common,
    cfg: &RunConfig,
    f: F,
) -> Result<(Vec<Value>, Warnings), CliError>
where
    T: serde::Serialize,
    F: Fn(&Value, &RunConfig) -> Result<T, String> + Sync,
{
    let items: Vec<CorpusItem> =
        load_corpus(&input.input, input.input_kind, field_for(input.input_kind, &input.input, field)?)?.collect();
    let rows = pool(common.jobs)?.install(|| {
        items
            .par_iter()
            .map(|item| match &item.payload {
                Err(e) => error_row(&item.id, e),
                Ok(v) => match f(v, cfg) {
                    Ok(m) => Row::ok(&item.id, m),
                    Err(e) => error_row(&item.id, e),
                },
            })
            .collect()
    });
    Ok((rows, Warnings::new()))
}

/// Directory corpora carry the payload as the whole file, so no field is selected.
fn field_for(
    kind: Option<CorpusKind>,
    path: &Path,
    field: Option<&'static str>,
) -> Result<Option<&'static str>, CliError> {
    let kind = match kind {
        Some(k) => k,
        None => crate::corpus::detect_kind(path)?,
    };
    Ok(if kind == CorpusKind::Jsonl { field } else { None })
}

fn paired<T, F>(
    input: &PairInput,
    field: &'static str,
    common: &Common,
    cfg: &RunConfig,
    f: F,
) -> Result<(Vec<Value>, Warnings), CliError>
where
    T: serde::Serialize,
    F: Fn(&Value, &Value, &RunConfig) -> Result<T, String> + Sync,
{
    let mut warnings = Warnings::new();
    let preds: Vec<CorpusItem> =
        load_corpus(&input.pred, input.pred_kind, field_for(input.pred_kind, &input.pred, Some(field))?)?.collect();
    let mut truth: HashMap<String, Result<Value, String>> = HashMap::new();
    let mut truth_order = Vec::new();
    for item in load_corpus(&input.truth, input.truth_kind, field_for(input.truth_kind, &input.truth, Some(field))?)? {
        if truth.contains_key(&item.id) {
            *warnings.entry("duplicate_truth_ids".into()).or_insert(0) += 1;
            continue;
        }
        truth_order.push(item.id.clone());
        truth.insert(item.id, item.payload);
    }
    let mut seen = std::collections::HashSet::new();
    for p in &preds {
        if !seen.insert(p.id.as_str()) {
            *warnings.entry("duplicate_pred_ids".into()).or_insert(0) += 1;
        }
    }
    let unmatched = truth_order.iter().filter(|id| !seen.contains(id.as_str())).count();
    if unmatched > 0 {
        warnings.insert("unmatched_truth".into(), unmatched);
    }
    let rows = pool(common.jobs)?.install(|| {
        preds
            .par_iter()
            .map(|item| {
                let pred = match &item.payload {
                    Ok(v) => v,
                    Err(e) => return error_row(&item.id, format!("prediction: {e}")),
                };
                let t = match truth.get(&item.id) {
                    Some(Ok(v)) => v,
                    Some(Err(e)) => return error_row(&item.id, format!("reference: {e}")),
                    None => return error_row(&item.id, "no reference with this id"),
                };
                match f(pred, t, cfg) {
                    Ok(m) => Row::ok(&item.id, m),
                    Err(e) => error_row(&item.id, e),
                }
            })
            .collect()
    });
    Ok((rows, warnings))
}

fn parse_as(v: &Value, side: &str) -> Result<Spectrum, String> {
    parse_spectrum(as_text(v).map_err(|e| format!("{side}: {e}"))?).map(|(s, _)| s).map_err(|e| format!("{side}: {e}"))
}

fn nmr13c_one(p: &Value, t: &Value, cfg: &RunConfig) -> Result<MatchScore, String> {
    match (parse_as(p, "prediction")?, parse_as(t, "reference")?) {
        (Spectrum::Carbon(p), Spectrum::Carbon(t)) => Ok(score_carbon(&p, &t, &cfg.nmr)),
        (p, t) => Err(format!("expected 13C_NMR on both sides, got {} and {}", p.modality(), t.modality())),
    }
}

fn nmr1h_one(p: &Value, t: &Value, cfg: &RunConfig) -> Result<MatchScore, String> {
    match (parse_as(p, "prediction")?, parse_as(t, "reference")?) {
        (Spectrum::Proton(p), Spectrum::Proton(t)) => Ok(score_proton(&p, &t, &cfg.nmr)),
        (p, t) => Err(format!("expected 1H_NMR on both sides, got {} and {}", p.modality(), t.modality())),
    }
}

fn vector_one(p: &Value, t: &Value, cfg: &RunConfig, mass: bool) -> Result<VectorScore, String> {
    let (p, t) = (parse_as(p, "prediction")?, parse_as(t, "reference")?);
    let wanted = |s: &Spectrum| if mass { matches!(s, Spectrum::Mass(_)) } else { matches!(s, Spectrum::Waveform(_)) };
    if !wanted(&p) || !wanted(&t) {
        let kind = if mass { "mass" } else { "IR, Raman or UV" };
        return Err(format!("expected {kind} spectra, got {} and {}", p.modality(), t.modality()));
    }
    if p.modality() != t.modality() {
        return Err(format!("modality mismatch: {} vs {}", p.modality(), t.modality()));
    }
    let grid = cfg.binning.for_spectrum(&t).expect("vectorized modality");
    let vp = vectorize_spectrum(&p, grid).map_err(|e| e.to_string())?;
    let vt = vectorize_spectrum(&t, grid).map_err(|e| e.to_string())?;
    Ok(VectorScore {
        modality: t.modality().to_string(),
        cosine: cosine_similarity(&vp, &vt).map_err(|e| e.to_string())?,
        dropped_pred: vp.dropped(),
        dropped_truth: vt.dropped(),
    })
}

fn seq_one(p: &Value, t: &Value, cfg: &RunConfig) -> Result<PairScore, String> {
    score_pair(as_text(t)?, as_text(p)?, cfg.sequence.scheme, cfg.sequence.canonicalizer).map_err(|e| e.to_string())
}

fn fpsim_one(p: &Value, t: &Value, cfg: &RunConfig) -> Result<specbench::fingerprints::FpSimilarity, String> {
    let p = parse_smiles(as_text(p)?.trim()).map_err(|e| format!("prediction: {e}"))?;
    let t = parse_smiles(as_text(t)?.trim()).map_err(|e| format!("reference: {e}"))?;
    Ok(similarity(&p, &t, &cfg.fingerprint))
}

fn serialize_one(v: &Value, _: &RunConfig) -> Result<Conversion, String> {
    let s: Spectrum = match v {
        Value::String(text) => serde_json::from_str(text).map_err(|e| e.to_string())?,
        other => serde_json::from_value(other.clone()).map_err(|e| e.to_string())?,
    };
    Ok(Conversion { modality: s.modality().to_string(), output: Value::String(serialize(&s)) })
}

fn parse_one(v: &Value, _: &RunConfig) -> Result<Conversion, String> {
    let (s, m): (Spectrum, Modality) = parse_spectrum(as_text(v)?).map_err(|e| e.to_string())?;
    Ok(Conversion { modality: m.to_string(), output: serde_json::to_value(&s).map_err(|e| e.to_string())? })
}

fn choices<T: Copy + std::str::FromStr<Err = String>>(text: &str, all: &[T]) -> Result<Vec<T>, CliError> {
    if text == "all" {
        return Ok(all.to_vec());
    }
    text.split(',').map(|t| t.trim().parse::<T>().map_err(CliError::Usage)).collect()
}

fn taskgen_rows(
    input: &SingleInput,
    task: &str,
    format: &str,
    with_split: bool,
    cfg: &RunConfig,
) -> Result<(Vec<Value>, Warnings), CliError> {
    let tasks = choices(task, Task::ALL)?;
    let formats = choices(format, Format::ALL)?;
    let templates = match &cfg.taskgen.templates {
        Some(p) => TemplateSet::from_toml(&read_file(p)?).map_err(|e| CliError::Config(e.to_string()))?,
        None => TemplateSet::default(),
    };
    let mut rows = Vec::new();
    let mut warnings = Warnings::new();
    let mut records: Vec<MoleculeRecord> = Vec::new();
    for item in load_corpus(&input.input, input.input_kind.or(Some(CorpusKind::Jsonl)), None)? {
        let record = item.payload.and_then(|v| serde_json::from_value::<MoleculeRecord>(v).map_err(|e| e.to_string()));
        match record {
            Ok(r) if records.iter().any(|x| x.id == r.id) => {
                rows.push(error_row(&item.id, format!("duplicate record id '{}'", r.id)))
            }
            Ok(r) => records.push(r),
            Err(e) => rows.push(error_row(&item.id, e)),
        }
    }

    let seed = cfg.seed;
    let parts: Vec<(Option<&str>, Vec<&MoleculeRecord>, TemplateSet)> = if with_split {
        let ids: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
        let split = taskgen::split(&ids, cfg.taskgen.fractions, seed).map_err(|e| CliError::Config(e.to_string()))?;
        let sets = if cfg.taskgen.partition_templates {
            templates.partition(cfg.taskgen.fractions, seed).map_err(|e| CliError::Config(e.to_string()))?
        } else {
            [templates.clone(), templates.clone(), templates.clone()]
        };
        let [train_t, val_t, test_t] = sets;
        let pick = |ids: &[String]| records.iter().filter(|r| ids.contains(&r.id)).collect::<Vec<_>>();
        vec![
            (Some("train"), pick(&split.train), train_t),
            (Some("val"), pick(&split.val), val_t),
            (Some("test"), pick(&split.test), test_t),
        ]
    } else {
        vec![(None, records.iter().collect(), templates)]
    };
    let train: Vec<&MoleculeRecord> = if with_split { parts[0].1.clone() } else { Vec::new() };

    for &t in &tasks {
        for &f in &formats {
            for (label, members, set) in &parts {
                let mut ok = Vec::new();
                for r in members {
                    match check_record(r, t) {
                        Ok(()) => ok.push((*r).clone()),
                        Err(e) => rows.push(error_row(&r.id, e)),
                    }
                }
                if ok.is_empty() {
                    continue;
                }
                // Evaluation splits may borrow training answers as distractors, never the reverse.
                let extra: Vec<MoleculeRecord> = match label {
                    Some("val") | Some("test") => {
                        train.iter().filter(|r| check_record(r, t).is_ok()).map(|r| (*r).clone()).collect()
                    }
                    _ => Vec::new(),
                };
                match taskgen::generate_with_distractors(&ok, &extra, t, f, set, seed) {
                    Ok(insts) => {
                        for inst in insts {
                            let mut v = serde_json::to_value(&inst).expect("instruction serializes");
                            if let (Some(l), Value::Object(m)) = (label, &mut v) {
                                m.insert("split".into(), Value::String(l.to_string()));
                            }
                            rows.push(v);
                        }
                    }
                    Err(e) => {
                        *warnings.entry(format!("skipped_{t}_{f}")).or_insert(0) += ok.len();
                        for r in &ok {
                            rows.push(error_row(&r.id, format!("{t}/{f}: {e}")));
                        }
                    }
                }
            }
        }
    }
    Ok((rows, warnings))
}
