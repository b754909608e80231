//! Instruction records for the six task families, built from molecule records
//! and template pools, plus molecule-level dataset splits.
//!
//! Answers always come from this crate's own writers (canonical SMILES, tagged
//! spectrum text, structure text, Hill formula), so every answer parses back.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprints::fnv1a64;
use crate::geometry::{parse_candidate, StructureFormat};
use crate::molgraph::{canonical_smiles, parse_smiles, MoleculeGraph};
use crate::nmr_metrics::{score_carbon, score_proton, NmrConfig};
use crate::spectra::{parse_spectrum, parse_structure_text, serialize, write_structure_text, Spectrum};
use crate::vec_metrics::{cosine, vectorize_spectrum, BinningConfig};

const DEFAULT_TEMPLATES: &str = include_str!("../data/templates.toml");
const TEMPLATE_VERSION: u32 = 1;
const PLACEHOLDERS: [&str; 6] = ["smiles", "iupac", "spectrum", "modality", "options", "candidate"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error("record '{record}' lacks {field}, needed for {task}")]
    MissingField { task: Task, record: String, field: &'static str },
    #[error("no templates for {0} / {1}")]
    EmptyTemplatePool(Task, Format),
    #[error("invalid template file: {0}")]
    BadTemplate(String),
    #[error("record '{0}': {1}")]
    BadRecord(String, String),
    #[error("duplicate record id '{0}'")]
    DuplicateId(String),
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    BadFractions([f64; 3]),
    #[error("{task}: need 3 distinct distractor answers, corpus offers {available}")]
    NotEnoughDistractors { task: Task, available: usize },
    #[error("answer failed its self-check: {0}")]
    SelfCheck(String),
}

macro_rules! named_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $name::ALL.iter().copied().find(|v| v.as_str() == s).ok_or_else(|| format!("unknown {} '{s}'", stringify!($name)))
            }
        }
    };
}

named_enum!(Task {
    MoleculeQa => "molecule_qa",
    StructureGen => "structure_gen",
    IupacToSmiles => "iupac_to_smiles",
    SmilesToIupac => "smiles_to_iupac",
    SpectrumToSmiles => "spectrum_to_smiles",
    SmilesToSpectrum => "smiles_to_spectrum",
});

named_enum!(Format {
    FreeForm => "free_form",
    MultipleChoice => "multiple_choice",
    TrueFalse => "true_false",
});

/// Input record. In JSON, `structure` is a 3D structure block or an SDF molfile
/// and `spectra` are tagged spectrum texts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MoleculeRecordJson", into = "MoleculeRecordJson")]
pub struct MoleculeRecord {
    pub id: String,
    pub smiles: String,
    pub iupac: Option<String>,
    pub graph: Option<MoleculeGraph>,
    pub spectra: Vec<Spectrum>,
    mol: MoleculeGraph,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoleculeRecordJson {
    id: String,
    smiles: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    iupac: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    structure: Option<String>,
    #[serde(default)]
    spectra: Vec<String>,
}

impl TryFrom<MoleculeRecordJson> for MoleculeRecord {
    type Error = TaskError;
    fn try_from(j: MoleculeRecordJson) -> Result<Self, Self::Error> {
        let bad = |what: String| TaskError::BadRecord(j.id.clone(), what);
        let graph = match &j.structure {
            Some(s) => Some(parse_candidate(s, StructureFormat::Auto).map_err(|e| bad(format!("structure: {e}")))?),
            None => None,
        };
        let spectra = j
            .spectra
            .iter()
            .map(|s| parse_spectrum(s).map(|(sp, _)| sp).map_err(|e| bad(format!("spectrum: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        MoleculeRecord::new(j.id.clone(), j.smiles.clone(), j.iupac.clone(), graph, spectra)
    }
}

impl From<MoleculeRecord> for MoleculeRecordJson {
    fn from(r: MoleculeRecord) -> Self {
        MoleculeRecordJson {
            structure: r.graph.as_ref().map(write_structure_text),
            spectra: r.spectra.iter().map(serialize).collect(),
            id: r.id,
            smiles: r.smiles,
            iupac: r.iupac,
        }
    }
}

impl MoleculeRecord {
    pub fn new(
        id: String,
        smiles: String,
        iupac: Option<String>,
        graph: Option<MoleculeGraph>,
        spectra: Vec<Spectrum>,
    ) -> Result<Self, TaskError> {
        let mol = parse_smiles(&smiles).map_err(|e| TaskError::BadRecord(id.clone(), format!("smiles: {e}")))?;
        if let Some(g) = &graph {
            if !g.has_positions() {
                return Err(TaskError::BadRecord(id, "structure has no coordinates".into()));
            }
        }
        Ok(MoleculeRecord { id, smiles, iupac, graph, spectra, mol })
    }

    /// Graph parsed from `smiles`, hydrogens explicit.
    pub fn molecule(&self) -> &MoleculeGraph {
        &self.mol
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub text: String,
}

/// Template pools keyed by (task, format), each sorted by template id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pools: BTreeMap<(Task, Format), Vec<Template>>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet::from_toml(DEFAULT_TEMPLATES).expect("shipped templates are valid")
    }
}

impl TemplateSet {
    /// Parses a template file: `[task.format]` tables mapping template ids to texts.
    pub fn from_toml(text: &str) -> Result<Self, TaskError> {
        let bad = |m: String| TaskError::BadTemplate(m);
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        match doc.remove("version") {
            Some(toml::Value::Integer(v)) if v == TEMPLATE_VERSION as i64 => {}
            other => return Err(bad(format!("expected version = {TEMPLATE_VERSION}, got {other:?}"))),
        }
        let mut pools = BTreeMap::new();
        let mut seen_ids = BTreeSet::new();
        for (task_name, formats) in doc {
            let task: Task = task_name.parse().map_err(bad)?;
            let formats = formats.as_table().ok_or_else(|| bad(format!("[{task_name}] must be a table")))?;
            for (format_name, entries) in formats {
                let format: Format = format_name.parse().map_err(bad)?;
                let entries =
                    entries.as_table().ok_or_else(|| bad(format!("[{task_name}.{format_name}] must be a table")))?;
                let mut pool = Vec::new();
                for (id, text) in entries {
                    let text = text.as_str().ok_or_else(|| bad(format!("template {id} must be a string")))?;
                    check_placeholders(id, text, task, format)?;
                    if !seen_ids.insert(id.clone()) {
                        return Err(bad(format!("template id {id} is used twice")));
                    }
                    pool.push(Template { id: id.clone(), text: text.to_string() });
                }
                pool.sort_by(|a, b| a.id.cmp(&b.id));
                pools.insert((task, format), pool);
            }
        }
        Ok(TemplateSet { pools })
    }

    pub fn pool(&self, task: Task, format: Format) -> &[Template] {
        self.pools.get(&(task, format)).map_or(&[], Vec::as_slice)
    }

    /// Splits every pool into three disjoint parts (train, val, test). Each part
    /// gets one template first when the pool has at least three; the rest follow
    /// the fractions by largest remainder. Assignment is seeded.
    pub fn partition(&self, fractions: [f64; 3], seed: u64) -> Result<[TemplateSet; 3], TaskError> {
        check_fractions(fractions)?;
        let mut parts: [BTreeMap<(Task, Format), Vec<Template>>; 3] = Default::default();
        for (key, pool) in &self.pools {
            let mut shuffled = pool.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(fnv1a64(seed, format!("{}.{}", key.0, key.1).as_bytes()));
            shuffled.shuffle(&mut rng);
            let base = if pool.len() >= 3 { 1 } else { 0 };
            let extra = largest_remainder(pool.len() - 3 * base, fractions);
            let mut it = shuffled.into_iter();
            for (k, part) in parts.iter_mut().enumerate() {
                let mut chunk: Vec<Template> = it.by_ref().take(base + extra[k]).collect();
                chunk.sort_by(|a, b| a.id.cmp(&b.id));
                part.insert(*key, chunk);
            }
        }
        Ok(parts.map(|pools| TemplateSet { pools }))
    }
}

fn check_placeholders(id: &str, text: &str, task: Task, format: Format) -> Result<(), TaskError> {
    let bad = |m: String| TaskError::BadTemplate(format!("template {id}: {m}"));
    let mut rest = text;
    let mut found = BTreeSet::new();
    while let Some(open) = rest.find('{') {
        let close = rest[open..].find('}').ok_or_else(|| bad("unclosed '{'".into()))? + open;
        let name = &rest[open + 1..close];
        if !PLACEHOLDERS.contains(&name) {
            return Err(bad(format!("unknown placeholder {{{name}}}")));
        }
        found.insert(name);
        rest = &rest[close + 1..];
    }
    let required = match format {
        Format::FreeForm => None,
        Format::MultipleChoice => Some("options"),
        Format::TrueFalse => Some("candidate"),
    };
    if let Some(r) = required {
        if !found.contains(r) {
            return Err(bad(format!("{format} templates need {{{r}}}")));
        }
    }
    for (name, allowed) in [("options", Format::MultipleChoice), ("candidate", Format::TrueFalse)] {
        if found.contains(name) && format != allowed {
            return Err(bad(format!("{{{name}}} is only valid in {allowed} templates")));
        }
    }
    let input = match task {
        Task::MoleculeQa | Task::StructureGen | Task::SmilesToIupac | Task::SmilesToSpectrum => "smiles",
        Task::IupacToSmiles => "iupac",
        Task::SpectrumToSmiles => "spectrum",
    };
    if !found.contains(input) {
        return Err(bad(format!("{task} templates need {{{input}}}")));
    }
    Ok(())
}

fn fill(template: &str, values: &BTreeMap<&str, String>) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..].find('}').expect("validated template") + open;
        let name = &rest[open + 1..close];
        out.push_str(values.get(name).map_or("", String::as_str));
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub task: Task,
    pub format: Format,
    pub prompt: String,
    pub answer: String,
    pub source_id: String,
    pub template_id: String,
    /// Multiple choice only; `answer` is one of these.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<String>>,
    /// True/false only: the statement's proposed answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<String>,
}

fn canonical(record: &MoleculeRecord) -> Result<String, TaskError> {
    canonical_smiles(record.molecule()).map_err(|e| TaskError::BadRecord(record.id.clone(), e.to_string()))
}

fn missing(task: Task, record: &MoleculeRecord, field: &'static str) -> TaskError {
    TaskError::MissingField { task, record: record.id.clone(), field }
}

/// Correct answer and placeholder values for one record, before format-specific parts.
fn task_parts(
    record: &MoleculeRecord,
    task: Task,
    rng: &mut ChaCha8Rng,
) -> Result<(String, BTreeMap<&'static str, String>), TaskError> {
    let mut values = BTreeMap::new();
    values.insert("smiles", record.smiles.clone());
    if let Some(name) = &record.iupac {
        values.insert("iupac", name.clone());
    }
    let answer = match task {
        Task::MoleculeQa => record.molecule().formula(),
        Task::StructureGen => {
            write_structure_text(record.graph.as_ref().ok_or_else(|| missing(task, record, "structure"))?)
        }
        Task::IupacToSmiles => {
            record.iupac.as_ref().ok_or_else(|| missing(task, record, "iupac"))?;
            canonical(record)?
        }
        Task::SmilesToIupac => {
            let name = record.iupac.as_ref().ok_or_else(|| missing(task, record, "iupac"))?;
            name.trim().to_string()
        }
        Task::SpectrumToSmiles => {
            if record.spectra.is_empty() {
                return Err(missing(task, record, "spectra"));
            }
            let block: Vec<String> = record.spectra.iter().map(serialize).collect();
            values.insert("spectrum", block.join("\n"));
            canonical(record)?
        }
        Task::SmilesToSpectrum => {
            let s = record.spectra.choose(rng).ok_or_else(|| missing(task, record, "spectra"))?;
            values.insert("modality", s.modality().to_string());
            serialize(s)
        }
    };
    if answer.is_empty() {
        return Err(TaskError::BadRecord(record.id.clone(), format!("empty {task} answer")));
    }
    Ok((answer, values))
}

/// Whether `record` carries what `task` needs; the error names the missing field.
pub fn check_record(record: &MoleculeRecord, task: Task) -> Result<(), TaskError> {
    task_parts(record, task, &mut ChaCha8Rng::seed_from_u64(0)).map(|_| ())
}

fn record_rng(seed: u64, record: &MoleculeRecord, task: Task, format: Format) -> ChaCha8Rng {
    let key = format!("{}\u{0}{task}\u{0}{format}", record.id);
    ChaCha8Rng::seed_from_u64(fnv1a64(seed, key.as_bytes()))
}

const OPTION_LABELS: [char; 4] = ['A', 'B', 'C', 'D'];

/// Builds one instruction per record. Output is a pure function of the inputs and `seed`.
///
/// Distractors for multiple choice and false statements are other records' answers
/// for the same task; for `smiles_to_spectrum` same-modality answers come first and
/// other modalities only fill what is missing.
pub fn generate(
    records: &[MoleculeRecord],
    task: Task,
    format: Format,
    templates: &TemplateSet,
    seed: u64,
) -> Result<Vec<InstructionRecord>, TaskError> {
    generate_with_distractors(records, &[], task, format, templates, seed)
}

/// Like [`generate`], with `extra` records whose answers may serve as distractors
/// but which get no instructions of their own. Used to let evaluation splits draw
/// distractors from the training split without the reverse.
pub fn generate_with_distractors(
    records: &[MoleculeRecord],
    extra: &[MoleculeRecord],
    task: Task,
    format: Format,
    templates: &TemplateSet,
    seed: u64,
) -> Result<Vec<InstructionRecord>, TaskError> {
    let pool = templates.pool(task, format);
    if pool.is_empty() {
        return Err(TaskError::EmptyTemplatePool(task, format));
    }
    let mut ids = BTreeSet::new();
    for r in records {
        if !ids.insert(r.id.as_str()) {
            return Err(TaskError::DuplicateId(r.id.clone()));
        }
    }

    let mut prepared = Vec::with_capacity(records.len());
    for r in records {
        let mut rng = record_rng(seed, r, task, format);
        let (answer, values) = task_parts(r, task, &mut rng)?;
        prepared.push((rng, answer, values));
    }
    let mut answers: Vec<(String, Option<String>)> =
        prepared.iter().map(|(_, a, v)| (a.clone(), v.get("modality").cloned())).collect();
    for r in extra {
        let (a, v) = task_parts(r, task, &mut record_rng(seed, r, task, format))?;
        answers.push((a, v.get("modality").cloned()));
    }

    let mut out = Vec::with_capacity(records.len());
    for (record, (mut rng, answer, mut values)) in records.iter().zip(prepared) {
        let template = pool.choose(&mut rng).expect("pool is not empty");
        let modality = values.get("modality").cloned();
        // Other answers, preferring those of the same spectrum modality.
        let pick = |rng: &mut ChaCha8Rng, need: usize| -> Result<Vec<String>, usize> {
            let mut same = BTreeSet::new();
            let mut other = BTreeSet::new();
            for (a, m) in &answers {
                if *a != answer {
                    if *m == modality {
                        same.insert(a)
                    } else {
                        other.insert(a)
                    };
                }
            }
            let other: Vec<&String> = other.difference(&same).copied().collect();
            let same: Vec<&String> = same.into_iter().collect();
            let mut chosen: Vec<String> =
                same.choose_multiple(rng, need.min(same.len())).map(|a| (*a).clone()).collect();
            if chosen.len() < need {
                chosen.extend(other.choose_multiple(rng, need - chosen.len()).map(|a| (*a).clone()));
            }
            if chosen.len() == need {
                Ok(chosen)
            } else {
                Err(same.len() + other.len())
            }
        };
        let (options, candidate, final_answer) = match format {
            Format::FreeForm => (None, None, answer.clone()),
            Format::MultipleChoice => {
                let mut opts =
                    pick(&mut rng, 3).map_err(|available| TaskError::NotEnoughDistractors { task, available })?;
                opts.push(answer.clone());
                opts.shuffle(&mut rng);
                let listed: Vec<String> = opts.iter().zip(OPTION_LABELS).map(|(o, l)| format!("{l}. {o}")).collect();
                values.insert("options", listed.join("\n"));
                (Some(opts), None, answer.clone())
            }
            Format::TrueFalse => {
                let false_candidate =
                    if rng.gen_bool(0.5) { None } else { pick(&mut rng, 1).ok().map(|mut v| v.remove(0)) };
                let truthful = false_candidate.is_none();
                let candidate = false_candidate.unwrap_or_else(|| answer.clone());
                values.insert("candidate", candidate.clone());
                (None, Some(candidate), if truthful { "True".to_string() } else { "False".to_string() })
            }
        };
        out.push(InstructionRecord {
            task,
            format,
            prompt: fill(&template.text, &values),
            answer: final_answer,
            source_id: record.id.clone(),
            template_id: template.id.clone(),
            options,
            candidate,
        });
    }
    Ok(out)
}

/// Parses an answer with the matching reader and checks that it scores perfectly
/// against itself. True/false answers check their candidate instead.
pub fn self_check(inst: &InstructionRecord) -> Result<(), TaskError> {
    let fail = |m: String| Err(TaskError::SelfCheck(m));
    if inst.format == Format::TrueFalse {
        if inst.answer != "True" && inst.answer != "False" {
            return fail(format!("true/false answer is '{}'", inst.answer));
        }
        return match &inst.candidate {
            Some(c) => check_task_answer(inst.task, c),
            None => fail("true/false record without candidate".into()),
        };
    }
    if let Some(opts) = &inst.options {
        if opts.len() != 4 || opts.iter().filter(|o| **o == inst.answer).count() != 1 {
            return fail("multiple choice needs 4 options with exactly one correct".into());
        }
        for o in opts {
            check_task_answer(inst.task, o)?;
        }
    }
    check_task_answer(inst.task, &inst.answer)
}

fn check_task_answer(task: Task, answer: &str) -> Result<(), TaskError> {
    let fail = |m: String| Err(TaskError::SelfCheck(format!("{task}: {m}")));
    match task {
        Task::MoleculeQa => match parse_formula(answer) {
            Some(_) => Ok(()),
            None => fail(format!("'{answer}' is not a formula")),
        },
        Task::StructureGen => {
            let g = match parse_structure_text(answer) {
                Ok(g) => g,
                Err(e) => return fail(e.to_string()),
            };
            if write_structure_text(&g) != answer {
                return fail("structure text does not reproduce".into());
            }
            Ok(())
        }
        Task::IupacToSmiles | Task::SpectrumToSmiles => {
            let g = match parse_smiles(answer) {
                Ok(g) => g,
                Err(e) => return fail(e.to_string()),
            };
            match canonical_smiles(&g) {
                Ok(c) if c == answer => Ok(()),
                Ok(c) => fail(format!("'{answer}' is not canonical ('{c}')")),
                Err(e) => fail(e.to_string()),
            }
        }
        Task::SmilesToIupac => {
            if answer.trim().is_empty() || answer.trim() != answer {
                return fail("name is empty or padded".into());
            }
            Ok(())
        }
        Task::SmilesToSpectrum => {
            let (s, _) = match parse_spectrum(answer) {
                Ok(p) => p,
                Err(e) => return fail(e.to_string()),
            };
            if serialize(&s) != answer {
                return fail("spectrum text does not reproduce".into());
            }
            let cfg = NmrConfig::default();
            let perfect = match &s {
                Spectrum::Carbon(c) => {
                    let m = score_carbon(c, c, &cfg);
                    m.f1 == 1.0 && m.mae == Some(0.0)
                }
                Spectrum::Proton(h) => {
                    let m = score_proton(h, h, &cfg);
                    m.f1 == 1.0 && m.mae == Some(0.0) && m.jaccard == Some(1.0)
                }
                Spectrum::Waveform(_) | Spectrum::Mass(_) => {
                    let grid = if matches!(s, Spectrum::Mass(_)) {
                        BinningConfig::ms_default()
                    } else {
                        BinningConfig::ir_default()
                    };
                    let v = vectorize_spectrum(&s, &grid).expect("waveform or mass");
                    v.values().iter().all(|x| *x == 0.0) || cosine(v.values(), v.values()) == 1.0
                }
            };
            if perfect {
                Ok(())
            } else {
                fail("self-score is not perfect".into())
            }
        }
    }
}

/// Element counts of a Hill-style formula such as `C2H6O`; `None` if malformed.
pub fn parse_formula(text: &str) -> Option<BTreeMap<String, usize>> {
    let mut counts = BTreeMap::new();
    let b = text.as_bytes();
    let mut i = 0;
    while i < b.len() {
        if !b[i].is_ascii_uppercase() {
            return None;
        }
        let mut j = i + 1;
        while j < b.len() && b[j].is_ascii_lowercase() {
            j += 1;
        }
        let symbol = &text[i..j];
        symbol.parse::<crate::molgraph::Element>().ok()?;
        let mut k = j;
        while k < b.len() && b[k].is_ascii_digit() {
            k += 1;
        }
        let n = if k > j { text[j..k].parse().ok().filter(|n| *n >= 2)? } else { 1 };
        if counts.insert(symbol.to_string(), n).is_some() {
            return None;
        }
        i = k;
    }
    (!counts.is_empty()).then_some(counts)
}

fn check_fractions(f: [f64; 3]) -> Result<(), TaskError> {
    let ok = f.iter().all(|x| x.is_finite() && *x >= 0.0) && (f.iter().sum::<f64>() - 1.0).abs() < 1e-9;
    if ok {
        Ok(())
    } else {
        Err(TaskError::BadFractions(f))
    }
}

/// Apportions `n` items by largest remainder; ties go to the earlier part.
fn largest_remainder(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let quotas = fractions.map(|f| f * n as f64);
    let mut sizes = quotas.map(|q| q.floor() as usize);
    let mut left = n - sizes.iter().sum::<usize>();
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[k] += 1;
        left -= 1;
    }
    sizes
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl Split {
    pub fn part_of(&self, id: &str) -> Option<&'static str> {
        [("train", &self.train), ("val", &self.val), ("test", &self.test)]
            .into_iter()
            .find(|(_, ids)| ids.iter().any(|x| x == id))
            .map(|(name, _)| name)
    }
}

/// Splits molecule ids into train/val/test. The result does not depend on the
/// order of `ids`; sizes follow the fractions by largest remainder.
pub fn split<S: AsRef<str>>(ids: &[S], fractions: [f64; 3], seed: u64) -> Result<Split, TaskError> {
    check_fractions(fractions)?;
    let mut sorted: Vec<String> = ids.iter().map(|s| s.as_ref().to_string()).collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(TaskError::DuplicateId(w[0].clone()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sorted.shuffle(&mut rng);
    let sizes = largest_remainder(sorted.len(), fractions);
    let mut it = sorted.into_iter();
    let mut take = |n: usize| {
        let mut part: Vec<String> = it.by_ref().take(n).collect();
        part.sort();
        part
    };
    Ok(Split { train: take(sizes[0]), val: take(sizes[1]), test: take(sizes[2]) })
}
