use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isocrf::corpus::write_corpus;
use isocrf::synthetic::{to_corpus, PlantedModel, SyntheticConfig};

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn path(&self, name: &str) -> String {
        self.root.join(name).to_string_lossy().into_owned()
    }
}

/// A small corpus, seed list and trained lexicon shared by every test.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let planted = PlantedModel::generate(&SyntheticConfig::default(), &mut rng).unwrap();
        let corpus = to_corpus(&planted.sample(80, &mut rng), 8, 5);
        write_corpus(File::create(root.join("corpus.jsonl")).unwrap(), &corpus).unwrap();
        let mut seeds = String::new();
        for w in planted.positive.iter().take(8) {
            seeds.push_str(&format!("{w}\tpositive\n"));
        }
        for w in planted.negative.iter().take(8) {
            seeds.push_str(&format!("{w}\tnegative\n"));
        }
        std::fs::write(root.join("seeds.tsv"), seeds).unwrap();
        let f = Fixture { _dir: dir, root };
        let out = isocrf(&[
            "lexicon-build",
            "--corpus",
            &f.path("corpus.jsonl"),
            "--seeds-mpqa",
            &f.path("seeds.tsv"),
            "--min-discussions",
            "2",
            "--out",
            &f.path("lexicon.tsv"),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        f
    })
}

fn isocrf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isocrf"))
        .args(args)
        .env_remove("ISOCRF_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn summary(bytes: &[u8]) -> serde_json::Value {
    let text = String::from_utf8_lossy(bytes);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("a JSON summary line");
    serde_json::from_str(line).unwrap()
}

fn lines(path: &str) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

fn train(f: &Fixture, out: &str, extra: &[&str]) {
    let corpus = f.path("corpus.jsonl");
    let model = f.path(out);
    let mut args = vec!["train", "--corpus", &corpus, "--max-iterations", "40"];
    args.extend_from_slice(&["--out", &model]);
    args.extend_from_slice(extra);
    let r = isocrf(&args);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let s = summary(&r.stdout);
    assert_eq!(s["command"], "train");
    assert!(s["sequences"].as_u64().unwrap() > 0);
}

#[test]
fn usage_exit_codes() {
    assert_eq!(code(&isocrf(&["frobnicate"])), 2);
    assert_eq!(code(&isocrf(&["train"])), 3);
    assert_eq!(code(&isocrf(&["lexicon-build", "--corpus", "x", "--iters", "ten"])), 3);
    assert_eq!(code(&isocrf(&["--help"])), 0);
    assert_eq!(code(&isocrf(&["--version"])), 0);
    let f = fixture();
    let eval_ds = isocrf(&[
        "eval",
        "--gold",
        &f.path("corpus.jsonl"),
        "--pred",
        &f.path("corpus.jsonl"),
        "--downsample",
    ]);
    assert_eq!(code(&eval_ds), 3);
    let iso_without_lexicon = isocrf(&["train", "--corpus", &f.path("corpus.jsonl"), "--isotonic", "--out", "m"]);
    assert_eq!(code(&iso_without_lexicon), 3);
    let zero_threads = isocrf(&[
        "--threads",
        "0",
        "tag",
        "--model",
        "m",
        "--corpus",
        &f.path("corpus.jsonl"),
    ]);
    assert_eq!(code(&zero_threads), 3);
}

#[test]
fn unreadable_inputs_exit_four() {
    let f = fixture();
    let missing = f.path("does-not-exist.jsonl");
    assert_eq!(
        code(&isocrf(&["train", "--corpus", &missing, "--out", &f.path("never.bin")])),
        4
    );
    assert!(!Path::new(&f.path("never.bin")).exists());
    assert_eq!(
        code(&isocrf(&[
            "tag",
            "--model",
            &missing,
            "--corpus",
            &f.path("corpus.jsonl")
        ])),
        4
    );
    assert_eq!(
        code(&isocrf(&[
            "baseline",
            "--lexicon",
            &missing,
            "--corpus",
            &f.path("corpus.jsonl")
        ])),
        4
    );
}

#[test]
fn malformed_data_exits_five() {
    let f = fixture();
    let bad = f.path("bad.jsonl");
    std::fs::write(&bad, "{\"id\": \"x\"\n").unwrap();
    let r = isocrf(&["train", "--corpus", &bad, "--out", &f.path("bad.bin")]);
    assert_eq!(code(&r), 5);
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 1"));
}

#[test]
fn lexicon_header_records_parameters() {
    let f = fixture();
    let lex = lines(&f.path("lexicon.tsv"));
    let header = &lex[0];
    assert!(header.starts_with("# "));
    for key in [
        "iterations=10",
        "theta=0.2",
        "min_participants=5",
        "min_discussions=2",
        "top_k=50",
    ] {
        assert!(header.contains(key), "{key} missing from {header}");
    }
    assert!(lex.len() > 1);
    for row in &lex[1..] {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols.len(), 3, "{row}");
        let score: f64 = cols[2].parse().unwrap();
        assert!(score.abs() >= 0.2 && score.abs() <= 1.0);
    }

    let stdout = isocrf(&[
        "lexicon-build",
        "--corpus",
        &f.path("corpus.jsonl"),
        "--seeds-mpqa",
        &f.path("seeds.tsv"),
        "--min-discussions",
        "2",
    ]);
    assert_eq!(code(&stdout), 0);
    assert_eq!(
        String::from_utf8(stdout.stdout).unwrap().lines().collect::<Vec<_>>(),
        lex
    );
    assert_eq!(summary(&stdout.stderr)["command"], "lexicon-build");
}

#[test]
fn train_tag_eval_round_trip() {
    let f = fixture();
    train(
        f,
        "iso.bin",
        &["--lexicon", &f.path("lexicon.tsv"), "--isotonic", "--downsample"],
    );

    let tag = isocrf(&[
        "tag",
        "--model",
        &f.path("iso.bin"),
        "--corpus",
        &f.path("corpus.jsonl"),
        "--out",
        &f.path("iso.tsv"),
    ]);
    assert_eq!(code(&tag), 0, "{}", String::from_utf8_lossy(&tag.stderr));
    let units = summary(&tag.stdout)["units"].as_u64().unwrap();
    let rows = lines(&f.path("iso.tsv"));
    assert_eq!(rows[0].split('\t').count(), 10);
    assert_eq!(rows.len() as u64 - 1, units);
    let corpus_units: usize = std::fs::read_to_string(f.path("corpus.jsonl"))
        .unwrap()
        .lines()
        .map(|l| {
            let d: isocrf::Discussion = serde_json::from_str(l).unwrap();
            d.turns.iter().map(|t| t.units.len()).sum::<usize>()
        })
        .sum();
    assert_eq!(units as usize, corpus_units);
    for row in &rows[1..] {
        let p: f64 = row.split('\t').skip(5).map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((p - 1.0).abs() < 1e-9);
    }

    for mode in ["strict", "soft"] {
        let report = f.path(&format!("report-{mode}.tsv"));
        let table = f.path(&format!("table-{mode}.txt"));
        let ev = isocrf(&[
            "eval",
            "--gold",
            &f.path("corpus.jsonl"),
            "--pred",
            &f.path("iso.tsv"),
            "--mode",
            mode,
            "--out",
            &report,
            "--table",
            &table,
        ]);
        assert_eq!(code(&ev), 0, "{}", String::from_utf8_lossy(&ev.stderr));
        let s = summary(&ev.stdout);
        assert_eq!(s["mode"], mode);
        assert!((0.0..=1.0).contains(&s["macro_f1"].as_f64().unwrap()));
        let r = lines(&report);
        assert_eq!(r[0], "class\tprecision\trecall\tf1\tmode");
        assert_eq!(r.len(), 4);
        assert!(r[1..].iter().all(|l| l.ends_with(mode)));
        assert!(!std::fs::read_to_string(&table).unwrap().is_empty());
    }

    // predictions missing a unit cannot be scored
    let short = f.path("short.tsv");
    std::fs::write(&short, rows[..rows.len() - 1].join("\n")).unwrap();
    assert_eq!(
        code(&isocrf(&["eval", "--gold", &f.path("corpus.jsonl"), "--pred", &short])),
        5
    );
}

#[test]
fn tag_writes_to_stdout_without_out() {
    let f = fixture();
    train(f, "plain.bin", &["--families", "lexical,discourse"]);
    let tag = isocrf(&[
        "tag",
        "--model",
        &f.path("plain.bin"),
        "--corpus",
        &f.path("corpus.jsonl"),
    ]);
    assert_eq!(code(&tag), 0);
    let text = String::from_utf8(tag.stdout).unwrap();
    assert!(text.starts_with("discussion_id\t"));
    assert_eq!(summary(&tag.stderr)["command"], "tag");
}

#[test]
fn features_dump_and_chi2() {
    let f = fixture();
    let out = f.path("features.tsv");
    let chi2 = f.path("chi2.tsv");
    let r = isocrf(&[
        "features",
        "--corpus",
        &f.path("corpus.jsonl"),
        "--lexicon",
        &f.path("lexicon.tsv"),
        "--out",
        &out,
        "--chi2",
        &chi2,
        "--per-class",
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let s = summary(&r.stdout);
    assert_eq!(s["command"], "features");
    let dump = lines(&out);
    assert!(dump.iter().all(|l| l.split('\t').count() == 2));
    assert!(dump.iter().any(|l| l.contains("\tsent:")));
    let ranked = lines(&chi2);
    assert_eq!(ranked[0], "rank\tfeature\tchi2\tclass");
    assert_eq!(ranked.len() as u64 - 1, s["chi2_entries"].as_u64().unwrap());
    assert_eq!((ranked.len() - 1) as u64, 3 * s["distinct_features"].as_u64().unwrap());
    let values: Vec<f64> = ranked[1..]
        .iter()
        .map(|l| l.split('\t').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] >= w[1]));

    let no_chi2 = isocrf(&[
        "features",
        "--corpus",
        &f.path("corpus.jsonl"),
        "--out",
        &out,
        "--per-class",
    ]);
    assert_eq!(code(&no_chi2), 3);
    let bad_family = isocrf(&[
        "features",
        "--corpus",
        &f.path("corpus.jsonl"),
        "--out",
        &out,
        "--families",
        "lexical,bogus",
    ]);
    assert_eq!(code(&bad_family), 3);
}

#[test]
fn baseline_predictions_evaluate() {
    let f = fixture();
    let pred = f.path("baseline.tsv");
    let r = isocrf(&[
        "baseline",
        "--lexicon",
        &f.path("lexicon.tsv"),
        "--corpus",
        &f.path("corpus.jsonl"),
        "--out",
        &pred,
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let s = summary(&r.stdout);
    let total = s["agreement"].as_u64().unwrap() + s["disagreement"].as_u64().unwrap() + s["neutral"].as_u64().unwrap();
    assert_eq!(total, s["units"].as_u64().unwrap());
    assert_eq!(lines(&pred)[0], "discussion_id\tturn_id\tunit_index\tlabel_3way");
    let ev = isocrf(&["eval", "--gold", &f.path("corpus.jsonl"), "--pred", &pred]);
    assert_eq!(code(&ev), 0);
    assert_eq!(summary(&ev.stdout)["units"].as_u64().unwrap(), total);
}
