mod common;

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unidial::ingest::{build_manifest, ManifestError};
use unidial::scheduler::{CorpusIndex, StreamError};
use unidial::schema::{Split, UnifiedRecord};

fn write_jsonl(path: &Path, records: &[UnifiedRecord]) {
    let body: String = records.iter().map(|r| r.to_json_line() + "\n").collect();
    std::fs::write(path, body).unwrap();
}

fn corpus(dir: &Path, seed: u64, name: &str, n: usize) -> (PathBuf, Vec<UnifiedRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records: Vec<UnifiedRecord> = (0..n)
        .map(|_| {
            let mut r = common::supervised_record(&mut rng);
            r.dataset = name.to_string();
            r
        })
        .collect();
    let path = dir.join(format!("{name}.jsonl"));
    write_jsonl(&path, &records);
    (path, records)
}

#[test]
fn counts_match_records() {
    let dir = tempfile::tempdir().unwrap();
    let (a, ra) = corpus(dir.path(), 1, "alpha", 300);
    let (b, rb) = corpus(dir.path(), 2, "beta", 200);
    let m = build_manifest(&[&a, &b]).unwrap();
    assert_eq!(m.total(), 500);
    for e in &m.entries {
        let all = if e.dataset == "alpha" { &ra } else { &rb };
        let n = all.iter().filter(|r| r.task == e.task && r.split == e.split).count() as u64;
        assert_eq!(n, e.count, "{e:?}");
    }
}

#[test]
fn input_order_does_not_matter() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = corpus(dir.path(), 1, "alpha", 50);
    let (b, _) = corpus(dir.path(), 2, "beta", 50);
    assert_eq!(build_manifest(&[&a, &b]).unwrap(), build_manifest(&[&b, &a]).unwrap());
}

#[test]
fn group_split_across_files_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (a, ra) = corpus(dir.path(), 1, "alpha", 20);
    let b = dir.path().join("copy.jsonl");
    write_jsonl(&b, &ra[..1]);
    assert!(matches!(build_manifest(&[&a, &b]), Err(ManifestError::DuplicateEntry { .. })));
}

#[test]
fn invalid_record_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let (a, ra) = corpus(dir.path(), 1, "alpha", 3);
    let mut body = std::fs::read_to_string(&a).unwrap();
    let mut bad = ra[0].clone();
    bad.target.clear();
    body.push_str(&(bad.to_json_line() + "\n"));
    std::fs::write(&a, body).unwrap();
    match build_manifest(&[&a]) {
        Err(ManifestError::ValidationFailure { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
}

#[test]
fn stale_manifest_is_detected_by_the_index() {
    let dir = tempfile::tempdir().unwrap();
    let (a, ra) = corpus(dir.path(), 1, "alpha", 40);
    let m = build_manifest(&[&a]).unwrap();
    assert!(CorpusIndex::open(&m, Split::Train).is_ok());
    write_jsonl(&a, &ra[..30]);
    assert!(matches!(CorpusIndex::open(&m, Split::Train), Err(StreamError::ManifestMismatch(_))));
}
