//! Dataset directories: layout, tensor consistency, validation and overwrite
//! protection.

use std::fs;
use std::path::Path;

use microworld::export::{self, validate_dataset, write_dataset_dir, ExportError, Format, Manifest, ViolationKind};
use microworld::instancegen::{dataset, generate_split, Instance, Split};
use microworld::language::{tokenize, vocabulary, Token};
use microworld::raster::Image;

fn oneshape(split: Split, n: u64) -> Vec<Instance> {
    generate_split(&dataset::oneshape(), split, n, 5).unwrap()
}

fn write(insts: &[Instance], dir: &Path, format: Format) -> Manifest {
    write_dataset_dir(insts, dir, format, &dataset::oneshape(), 5, false).unwrap()
}

#[test]
fn jsonl_png_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let insts = oneshape(Split::Train, 10);
    let manifest = write(&insts, tmp.path(), Format::JsonlPng);
    let pngs = fs::read_dir(tmp.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "png"))
        .count();
    assert_eq!(pngs, 10);
    let jsonl = fs::read_to_string(tmp.path().join("train.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 10);
    assert_eq!(manifest.counts["train"], 10);
    assert!(tmp.path().join("manifest.json").is_file());
    let vocab = fs::read_to_string(tmp.path().join("vocab.txt")).unwrap();
    assert_eq!(vocab.lines().next(), Some("<pad>"));
    assert_eq!(vocab.lines().count(), vocabulary().len());
}

#[test]
fn records_are_canonical() {
    let tmp = tempfile::tempdir().unwrap();
    write(&oneshape(Split::Train, 3), tmp.path(), Format::JsonlPng);
    let jsonl = fs::read_to_string(tmp.path().join("train.jsonl")).unwrap();
    let line = jsonl.lines().next().unwrap();
    assert!(line.starts_with(r#"{"ast":{"predicate":"#), "{line}");
    let value: serde_json::Value = serde_json::from_str(line).unwrap();
    assert_eq!(serde_json::to_string(&value).unwrap(), line, "compact with sorted keys");
    let keys = ["\"ast\"", "\"caption\"", "\"index\"", "\"label\"", "\"partition_tag\"", "\"partition_tags\"", "\"split\"", "\"sub_seed\"", "\"world\""];
    let positions: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    let size = line.split("\"size\":").nth(1).unwrap();
    let digits = size.split(['}', ',']).next().unwrap();
    assert_eq!(digits.split('.').nth(1).unwrap().len(), 6, "{digits}");
}

#[test]
fn empty_emission_writes_only_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write(&[], tmp.path(), Format::Both);
    assert!(manifest.counts.values().all(|&c| c == 0));
    let names: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec!["manifest.json"]);
    assert!(validate_dataset(tmp.path()).unwrap().is_clean());
}

#[test]
fn tensor_layout_matches_the_captions() {
    let tmp = tempfile::tempdir().unwrap();
    let insts = oneshape(Split::Validation, 25);
    let manifest = write(&insts, tmp.path(), Format::Both);
    let width = insts.iter().map(|i| tokenize(&i.caption_text).unwrap().len()).max().unwrap();
    assert_eq!(manifest.caption_lengths["validation"], width);
    let captions = fs::read(tmp.path().join("validation_captions.u32")).unwrap();
    assert_eq!(captions.len(), 25 * width * 4);
    let images = fs::read(tmp.path().join("validation_images.u8")).unwrap();
    assert_eq!(images.len(), 25 * 64 * 64 * 3);
    let labels = fs::read(tmp.path().join("validation_labels.u8")).unwrap();
    let vocab: Vec<String> = fs::read_to_string(tmp.path().join("vocab.txt")).unwrap().lines().map(String::from).collect();
    for (i, inst) in insts.iter().enumerate() {
        assert_eq!(labels[i], u8::from(inst.label));
        let ids: Vec<u32> = captions[i * width * 4..(i + 1) * width * 4]
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        assert!(ids.iter().all(|&id| (id as usize) < vocab.len()));
        let decoded: Vec<&str> = ids.iter().filter(|&&id| id != 0).map(|&id| vocab[id as usize].as_str()).collect();
        let expected: Vec<&str> = tokenize(&inst.caption_text).unwrap().into_iter().map(Token::as_str).collect();
        assert_eq!(decoded, expected);
        assert_eq!(&images[i * 12288..(i + 1) * 12288], inst.image.as_bytes());
        let png = fs::read(tmp.path().join(format!("validation_{i}.png"))).unwrap();
        assert_eq!(Image::from_png(&png).unwrap(), inst.image);
    }
}

#[test]
fn fresh_datasets_validate_clean() {
    let tmp = tempfile::tempdir().unwrap();
    write(&oneshape(Split::Test, 20), tmp.path(), Format::Both);
    let report = validate_dataset(tmp.path()).unwrap();
    assert!(report.is_clean(), "{:?}", report.violations);
    assert_eq!(report.records_checked, 20);
}

#[test]
fn flipped_label_is_one_label_mismatch() {
    let tmp = tempfile::tempdir().unwrap();
    write(&oneshape(Split::Train, 8), tmp.path(), Format::JsonlPng);
    let path = tmp.path().join("train.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[3] = if lines[3].contains("\"label\":1") {
        lines[3].replace("\"label\":1", "\"label\":0")
    } else {
        lines[3].replace("\"label\":0", "\"label\":1")
    };
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let report = validate_dataset(tmp.path()).unwrap();
    assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
    assert_eq!(report.violations[0].kind, ViolationKind::LabelMismatch);
    assert_eq!(report.violations[0].index, Some(3));
}

#[test]
fn out_of_grammar_caption_is_a_parse_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let insts = oneshape(Split::Train, 6);
    write(&insts, tmp.path(), Format::JsonlPng);
    let path = tmp.path().join("train.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let edited = text.replacen(&insts[2].caption_text, "Colorless green ideas sleep.", 1);
    fs::write(&path, edited).unwrap();
    let report = validate_dataset(tmp.path()).unwrap();
    assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
    assert_eq!(report.violations[0].kind, ViolationKind::CaptionParse);
    assert_eq!(report.violations[0].index, Some(2));
}

#[test]
fn tampered_tensor_label_is_caught() {
    let tmp = tempfile::tempdir().unwrap();
    write(&oneshape(Split::Train, 6), tmp.path(), Format::Both);
    let path = tmp.path().join("train_labels.u8");
    let mut labels = fs::read(&path).unwrap();
    labels[4] ^= 1;
    fs::write(&path, labels).unwrap();
    let report = validate_dataset(tmp.path()).unwrap();
    assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
    assert_eq!(report.violations[0].kind, ViolationKind::TensorMismatch);
}

#[test]
fn deleted_file_is_reported_missing() {
    let tmp = tempfile::tempdir().unwrap();
    write(&oneshape(Split::Train, 4), tmp.path(), Format::Tensor);
    fs::remove_file(tmp.path().join("train_images.u8")).unwrap();
    let report = validate_dataset(tmp.path()).unwrap();
    assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
    assert_eq!(report.violations[0].kind, ViolationKind::MissingFile);
}

#[test]
fn overwriting_needs_a_matching_manifest_or_force() {
    let tmp = tempfile::tempdir().unwrap();
    let ten = oneshape(Split::Train, 10);
    write(&ten, tmp.path(), Format::JsonlPng);
    // identical emission rewrites quietly
    write(&ten, tmp.path(), Format::JsonlPng);
    let three = oneshape(Split::Train, 3);
    let err = write_dataset_dir(&three, tmp.path(), Format::JsonlPng, &dataset::oneshape(), 5, false).unwrap_err();
    assert!(matches!(err, ExportError::Exists { .. }));
    write_dataset_dir(&three, tmp.path(), Format::JsonlPng, &dataset::oneshape(), 5, true).unwrap();
    assert!(!tmp.path().join("train_9.png").exists(), "stale files removed");
    assert!(validate_dataset(tmp.path()).unwrap().is_clean());
}

#[test]
fn manifest_config_regenerates_the_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let insts = oneshape(Split::Validation, 5);
    let manifest = write(&insts, tmp.path(), Format::JsonlPng);
    let spec = Manifest::read(tmp.path()).unwrap().spec().unwrap();
    let again = generate_split(&spec, Split::Validation, 5, manifest.seed).unwrap();
    assert_eq!(again, insts);
}

#[test]
fn inspect_returns_the_record() {
    let tmp = tempfile::tempdir().unwrap();
    let insts = oneshape(Split::Test, 4);
    write(&insts, tmp.path(), Format::JsonlPng);
    let record = export::inspect(tmp.path(), None, 2).unwrap();
    assert_eq!(record["caption"], insts[2].caption_text.as_str());
    assert!(export::inspect(tmp.path(), Some(Split::Train), 0).is_err());
    assert!(export::inspect(tmp.path(), None, 9).is_err());
}
