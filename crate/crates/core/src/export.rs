//! Dataset directories: JSONL records with PNG images, flat tensor files,
//! the vocabulary and a manifest of content digests; plus validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Number, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::instancegen::{mix64, DatasetSpec, Instance, Split};
use crate::language::{parse, realize, tokenize, vocabulary, Token};
use crate::raster::Image;
use crate::semantics::{evaluate, Caption};
use crate::worldgen::WorldModel;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const VOCAB_FILE: &str = "vocab.txt";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {detail}", path.display())]
    Corrupt { path: PathBuf, detail: String },
    #[error("{} holds a different dataset; pass force to overwrite", path.display())]
    Exists { path: PathBuf },
    #[error("cannot export: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ExportError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    #[serde(rename = "jsonl+png")]
    JsonlPng,
    #[serde(rename = "tensor")]
    Tensor,
    #[serde(rename = "both")]
    Both,
}

impl Format {
    pub fn jsonl(self) -> bool {
        matches!(self, Format::JsonlPng | Format::Both)
    }

    pub fn tensor(self) -> bool {
        matches!(self, Format::Tensor | Format::Both)
    }

    fn name(self) -> &'static str {
        match self {
            Format::JsonlPng => "jsonl+png",
            Format::Tensor => "tensor",
            Format::Both => "both",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [Format::JsonlPng, Format::Tensor, Format::Both]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown format `{s}` (expected jsonl+png, tensor or both)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dataset: String,
    /// Dataset config as TOML; enough to regenerate every instance.
    pub config: String,
    pub seed: u64,
    pub format: Format,
    pub counts: BTreeMap<String, u64>,
    /// Padded caption length per split in the tensor files.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub caption_lengths: BTreeMap<String, usize>,
    pub vocabulary: String,
    pub vocabulary_size: usize,
    /// SHA-256 of every emitted file except the manifest.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn read(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| ExportError::Corrupt {
            path,
            detail: e.to_string(),
        })
    }

    pub fn spec(&self) -> std::result::Result<DatasetSpec, String> {
        DatasetSpec::from_toml(&self.config)
    }
}

pub fn png_name(split: Split, index: u64) -> String {
    format!("{split}_{index}.png")
}

pub fn jsonl_name(split: Split) -> String {
    format!("{split}.jsonl")
}

pub fn tensor_names(split: Split) -> [String; 3] {
    [
        format!("{split}_images.u8"),
        format!("{split}_captions.u32"),
        format!("{split}_labels.u8"),
    ]
}

fn fixed6(x: f64) -> Number {
    let text = format!("{x:.6}");
    let text = match text.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => text,
    };
    text.parse().expect("formatted float parses as a JSON number")
}

/// Rewrites every non-integer number to six decimal places.
fn canonical_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("finite");
            *n = fixed6(x);
        }
        Value::Array(items) => items.iter_mut().for_each(canonical_floats),
        Value::Object(map) => map.values_mut().for_each(canonical_floats),
        _ => {}
    }
}

pub fn world_json(world: &WorldModel) -> Value {
    let mut value = serde_json::to_value(world).expect("world serializes");
    canonical_floats(&mut value);
    value
}

/// One JSONL line: compact, alphabetical keys, floats at six decimals.
pub fn record_json(inst: &Instance) -> String {
    let value = json!({
        "ast": serde_json::to_value(&inst.caption).expect("caption serializes"),
        "caption": inst.caption_text,
        "index": inst.index,
        "label": u8::from(inst.label),
        "partition_tag": inst.partition_tag,
        "partition_tags": inst.partition_tags,
        "split": inst.split.name(),
        "sub_seed": inst.sub_seed,
        "world": world_json(&inst.world),
    });
    serde_json::to_string(&value).expect("record serializes")
}

/// Stored form of a JSONL line.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Record {
    pub ast: Caption,
    pub caption: String,
    pub index: u64,
    pub label: u8,
    pub partition_tag: String,
    pub partition_tags: Vec<String>,
    pub split: Split,
    pub sub_seed: u64,
    pub world: WorldModel,
}

pub fn token_ids(text: &str) -> std::result::Result<Vec<u32>, String> {
    tokenize(text).map(|t| t.into_iter().map(Token::id).collect()).map_err(|e| e.to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn by_split(instances: &[Instance]) -> BTreeMap<Split, Vec<&Instance>> {
    let mut out: BTreeMap<Split, Vec<&Instance>> = BTreeMap::new();
    for inst in instances {
        out.entry(inst.split).or_default().push(inst);
    }
    out
}

/// Files of one emission, held in memory until the directory is written.
struct Emission {
    files: BTreeMap<String, Vec<u8>>,
    caption_lengths: BTreeMap<String, usize>,
}

fn emit(instances: &[Instance], format: Format) -> Result<Emission> {
    let mut files = BTreeMap::new();
    let mut caption_lengths = BTreeMap::new();
    for (split, group) in by_split(instances) {
        if group.iter().enumerate().any(|(i, inst)| inst.index != i as u64) {
            return Err(ExportError::Invalid(format!("{split} instances must be indices 0..n in order")));
        }
        if format.jsonl() {
            let mut jsonl = String::new();
            for inst in &group {
                jsonl.push_str(&record_json(inst));
                jsonl.push('\n');
                files.insert(png_name(split, inst.index), inst.image.to_png());
            }
            files.insert(jsonl_name(split), jsonl.into_bytes());
        }
        if format.tensor() {
            let tokens = group
                .iter()
                .map(|inst| token_ids(&inst.caption_text))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(ExportError::Invalid)?;
            let width = tokens.iter().map(Vec::len).max().unwrap_or(0);
            let [images, captions, labels] = tensor_names(split);
            let mut image_bytes = Vec::new();
            let mut caption_bytes = Vec::with_capacity(group.len() * width * 4);
            for (inst, ids) in group.iter().zip(&tokens) {
                image_bytes.extend_from_slice(inst.image.as_bytes());
                for i in 0..width {
                    caption_bytes.extend_from_slice(&ids.get(i).copied().unwrap_or(0).to_le_bytes());
                }
            }
            files.insert(images, image_bytes);
            files.insert(captions, caption_bytes);
            files.insert(labels, group.iter().map(|inst| u8::from(inst.label)).collect());
            caption_lengths.insert(split.to_string(), width);
        }
    }
    if !instances.is_empty() {
        let mut vocab = vocabulary().join("\n");
        vocab.push('\n');
        files.insert(VOCAB_FILE.to_string(), vocab.into_bytes());
    }
    Ok(Emission { files, caption_lengths })
}

/// Writes `instances` (from one generation run of `spec` with `seed`) to
/// `dir`. An existing directory is only replaced when it holds the same
/// manifest, or when `force` is set.
pub fn write_dataset_dir(
    instances: &[Instance],
    dir: &Path,
    format: Format,
    spec: &DatasetSpec,
    seed: u64,
    force: bool,
) -> Result<Manifest> {
    let emission = emit(instances, format)?;
    let mut counts: BTreeMap<String, u64> = Split::ALL.iter().map(|s| (s.to_string(), 0)).collect();
    for inst in instances {
        *counts.get_mut(inst.split.name()).expect("all splits present") += 1;
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        dataset: spec.name.clone(),
        config: spec.to_toml(),
        seed,
        format,
        counts,
        caption_lengths: emission.caption_lengths,
        vocabulary: VOCAB_FILE.to_string(),
        vocabulary_size: vocabulary().len(),
        files: emission.files.iter().map(|(name, bytes)| (name.clone(), sha256_hex(bytes))).collect(),
    };
    prepare_dir(dir, &manifest, force)?;
    for (name, bytes) in &emission.files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))?;
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()).map_err(io_err(&path))?;
    Ok(manifest)
}

fn prepare_dir(dir: &Path, manifest: &Manifest, force: bool) -> Result<()> {
    if !dir.exists() {
        return fs::create_dir_all(dir).map_err(io_err(dir));
    }
    let mut entries = fs::read_dir(dir).map_err(io_err(dir))?;
    if entries.next().is_none() {
        return Ok(());
    }
    let old = Manifest::read(dir).ok();
    if old.as_ref() == Some(manifest) {
        return Ok(());
    }
    if !force {
        return Err(ExportError::Exists { path: dir.to_path_buf() });
    }
    // drop the previous emission so no stale files survive
    if let Some(old) = old {
        for name in old.files.keys().map(String::as_str).chain([MANIFEST_FILE]) {
            let path = dir.join(name);
            if path.is_file() {
                fs::remove_file(&path).map_err(io_err(&path))?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    MissingFile,
    DigestMismatch,
    MalformedRecord,
    LabelMismatch,
    CaptionParse,
    CaptionMismatch,
    SeedMismatch,
    ImageMismatch,
    TensorMismatch,
    CountMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Files the violation implicates.
    pub files: Vec<String>,
    pub index: Option<u64>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} in {}", self.kind, self.files.join(", "))?;
        if let Some(i) = self.index {
            write!(f, " at index {i}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub records_checked: u64,
    pub files_checked: usize,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, files: &[&str], index: Option<u64>, detail: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            files: files.iter().map(|f| f.to_string()).collect(),
            index,
            detail: detail.into(),
        });
    }
}

fn read_file(dir: &Path, name: &str) -> Option<Vec<u8>> {
    fs::read(dir.join(name)).ok()
}

/// Re-checks a dataset directory: every record's label against the
/// interpreter, every caption against the parser, tensors against the
/// records, and file digests. A digest mismatch is reported only when no
/// finer-grained violation already implicates that file, so one corrupted
/// byte yields one violation.
pub fn validate_dataset(dir: &Path) -> Result<Report> {
    let manifest = Manifest::read(dir)?;
    let mut report = Report::default();
    for split in Split::ALL {
        let expected = manifest.counts.get(split.name()).copied().unwrap_or(0);
        if expected == 0 {
            continue;
        }
        let truth = if manifest.format.jsonl() {
            Some(check_jsonl(dir, split, expected, manifest.seed, &mut report))
        } else {
            None
        };
        if manifest.format.tensor() {
            check_tensors(dir, split, expected, &manifest, truth.as_deref(), &mut report);
        }
    }
    let implicated: BTreeSet<String> = report.violations.iter().flat_map(|v| v.files.clone()).collect();
    for (name, digest) in &manifest.files {
        report.files_checked += 1;
        match read_file(dir, name) {
            None => report.push(ViolationKind::MissingFile, &[name], None, "listed in the manifest"),
            Some(bytes) if sha256_hex(&bytes) != *digest && !implicated.contains(name) => {
                report.push(ViolationKind::DigestMismatch, &[name], None, "content differs from the manifest digest")
            }
            Some(_) => {}
        }
    }
    report.violations.sort_by(|a, b| (&a.files, a.index, a.kind).cmp(&(&b.files, b.index, b.kind)));
    report.violations.dedup();
    Ok(report)
}

/// Ground truth recovered from a record: (tokens of the realized caption,
/// label, decoded image).
type Truth = (Vec<u32>, bool, Option<Image>);

fn check_jsonl(dir: &Path, split: Split, expected: u64, seed: u64, report: &mut Report) -> Vec<Option<Truth>> {
    let name = jsonl_name(split);
    let mut truths: Vec<Option<Truth>> = vec![None; expected as usize];
    let Some(bytes) = read_file(dir, &name) else {
        // reported by the digest pass
        return truths;
    };
    let before = report.violations.len();
    let text = String::from_utf8_lossy(&bytes);
    let mut seen = BTreeSet::new();
    let mut seed_mismatches = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        report.records_checked += 1;
        let record: Record = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                report.push(ViolationKind::MalformedRecord, &[&name], None, format!("line {line_no}: {e}"));
                continue;
            }
        };
        let index = record.index;
        if index >= expected || record.split != split || !seen.insert(index) {
            report.push(
                ViolationKind::MalformedRecord,
                &[&name],
                Some(index),
                format!("line {line_no} holds an unexpected or repeated {} index", record.split),
            );
            continue;
        }
        if record.sub_seed != mix64(seed, split.id(), index) {
            seed_mismatches.push(index);
        }
        let actual = evaluate(&record.ast, &record.world);
        if record.label > 1 || (record.label == 1) != actual {
            report.push(
                ViolationKind::LabelMismatch,
                &[&name],
                Some(index),
                format!("stored label {}, caption evaluates to {actual}", record.label),
            );
        }
        match parse(&record.caption) {
            Err(e) => report.push(ViolationKind::CaptionParse, &[&name], Some(index), e.to_string()),
            Ok(ast) if ast != record.ast => report.push(
                ViolationKind::CaptionMismatch,
                &[&name],
                Some(index),
                format!("`{}` does not parse to the stored ast", record.caption),
            ),
            Ok(_) => {}
        }
        let png = png_name(split, index);
        let image = match read_file(dir, &png).map(|b| Image::from_png(&b)) {
            None => None,
            Some(Err(e)) => {
                report.push(ViolationKind::ImageMismatch, &[&png], Some(index), e);
                None
            }
            Some(Ok(img)) if img.size() != record.world.image_size => {
                report.push(
                    ViolationKind::ImageMismatch,
                    &[&png],
                    Some(index),
                    format!("{0}x{0} image for a {1}px world", img.size(), record.world.image_size),
                );
                None
            }
            Some(Ok(img)) => Some(img),
        };
        let tokens = token_ids(&realize(&record.ast)).unwrap_or_default();
        truths[index as usize] = Some((tokens, actual, image));
    }
    if !seed_mismatches.is_empty() {
        report.push(
            ViolationKind::SeedMismatch,
            &[&name, MANIFEST_FILE],
            seed_mismatches.first().copied().filter(|_| seed_mismatches.len() == 1),
            format!("{} records disagree with the manifest seed", seed_mismatches.len()),
        );
    }
    // missing records are only news when nothing else went wrong in the file
    let file_clean = report.violations[before..].iter().all(|v| !v.files.contains(&name));
    if file_clean && seen.len() as u64 != expected {
        report.push(
            ViolationKind::CountMismatch,
            &[&name],
            None,
            format!("{} records, manifest says {expected}", seen.len()),
        );
    }
    truths
}

fn check_tensors(
    dir: &Path,
    split: Split,
    expected: u64,
    manifest: &Manifest,
    truth: Option<&[Option<Truth>]>,
    report: &mut Report,
) {
    let [images_name, captions_name, labels_name] = tensor_names(split);
    let n = expected as usize;
    let width = manifest.caption_lengths.get(split.name()).copied().unwrap_or(0);
    let (Some(images), Some(captions), Some(labels)) = (
        read_file(dir, &images_name),
        read_file(dir, &captions_name),
        read_file(dir, &labels_name),
    ) else {
        return;
    };
    let image_len = images.len().checked_div(n).unwrap_or(0);
    for (name, actual, wanted) in [
        (&captions_name, captions.len(), n * width * 4),
        (&labels_name, labels.len(), n),
        (&images_name, images.len(), n * image_len),
    ] {
        if actual != wanted {
            report.push(ViolationKind::CountMismatch, &[name], None, format!("{actual} bytes, expected {wanted}"));
            return;
        }
    }
    let vocab_size = manifest.vocabulary_size as u32;
    for i in 0..n {
        let index = Some(i as u64);
        let ids: Vec<u32> = captions[i * width * 4..(i + 1) * width * 4]
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if let Some(bad) = ids.iter().find(|&&id| id >= vocab_size) {
            report.push(ViolationKind::TensorMismatch, &[&captions_name], index, format!("token id {bad} out of range"));
        }
        if labels[i] > 1 {
            report.push(ViolationKind::TensorMismatch, &[&labels_name], index, format!("label byte {}", labels[i]));
        }
        let Some(Some((tokens, label, image))) = truth.map(|t| t.get(i)).unwrap_or(None) else {
            continue;
        };
        let unpadded: Vec<u32> = ids.iter().copied().take_while(|&id| id != 0).collect();
        if unpadded != *tokens || ids[unpadded.len()..].iter().any(|&id| id != 0) {
            report.push(
                ViolationKind::TensorMismatch,
                &[&captions_name],
                index,
                "token ids differ from the stored caption",
            );
        }
        if labels[i] <= 1 && (labels[i] == 1) != *label {
            report.push(ViolationKind::TensorMismatch, &[&labels_name], index, "label differs from evaluation");
        }
        if let Some(image) = image {
            if images[i * image_len..(i + 1) * image_len] != *image.as_bytes() {
                let png = png_name(split, i as u64);
                report.push(
                    ViolationKind::ImageMismatch,
                    &[&images_name, &png],
                    index,
                    "tensor pixels differ from the PNG",
                );
            }
        }
    }
}

/// The stored record at `index` of `split` (or of the first non-empty split).
pub fn inspect(dir: &Path, split: Option<Split>, index: u64) -> Result<Value> {
    let manifest = Manifest::read(dir)?;
    if !manifest.format.jsonl() {
        return Err(ExportError::Invalid("inspect needs JSONL records (format jsonl+png or both)".into()));
    }
    let split = split
        .or_else(|| Split::ALL.into_iter().find(|s| manifest.counts.get(s.name()).is_some_and(|&c| c > 0)))
        .ok_or_else(|| ExportError::Invalid("the dataset is empty".into()))?;
    let path = dir.join(jsonl_name(split));
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let line = text.lines().nth(index as usize).ok_or_else(|| ExportError::Invalid(format!(
        "{split} has {} records, no index {index}",
        text.lines().count()
    )))?;
    serde_json::from_str(line).map_err(|e| ExportError::Corrupt {
        path,
        detail: e.to_string(),
    })
}
