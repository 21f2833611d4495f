//! End-to-end checks of the command-line binary: golden output, pipeline
//! identities, exit-code conventions, and determinism under `--seed`.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SAMPLE_TREE: &str =
    "(S (NP (DT The) (NN public)) (VP (VBZ is) (ADVP (RB still)) (ADJP (JJ cautious))) (. .))";

const SAMPLE_GOLDEN: &str =
    "SH NT(NP) SH RE(NP) NT(S) SH NT(VP) SH NT(ADVP) RE(ADVP) SH NT(ADJP) RE(ADJP) RE(VP) SH. RE(S) FI";

const TINY_CONFIG: &str = "\
scheme = td-sr
pretrained_dim = 2
word_dim = 3
pos_dim = 2
label_dim = 2
action_dim = 3
enc_input = 4
enc_hidden = 3
enc_layers = 1
dec_hidden = 5
att_hidden = 3
epochs = 2
singleton_unk = 0.0
";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeseq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).expect("write test file");
}

fn path_str(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().to_string()
}

/// Generates a small treebank plus its sentence file and returns their
/// paths.
fn synthetic_corpus(dir: &TempDir, seed: &str, trees: usize) -> (String, String) {
    let trees_path = path_str(dir, "corpus.trees");
    let snt_path = path_str(dir, "corpus.snt");
    run_ok(&[
        "gen-synthetic",
        "--trees",
        &trees.to_string(),
        "--seed",
        seed,
        "--out",
        &trees_path,
        "--sentences",
        &snt_path,
    ]);
    (trees_path, snt_path)
}

#[test]
fn linearize_emits_the_documented_golden() {
    let dir = TempDir::new().unwrap();
    let trees = path_str(&dir, "one.trees");
    write(Path::new(&trees), &format!("{SAMPLE_TREE}\n"));
    let out = run_ok(&["linearize", "--scheme", "inorder-sr-enriched", &trees]);
    assert_eq!(out.trim_end(), SAMPLE_GOLDEN);
}

#[test]
fn linearize_then_strict_delinearize_is_identity() {
    let dir = TempDir::new().unwrap();
    let (trees, snt) = synthetic_corpus(&dir, "4", 8);
    let original = fs::read_to_string(&trees).unwrap();
    for scheme in [
        "td-bracket",
        "td-sr",
        "td-sr-enriched",
        "inorder-sr",
        "inorder-sr-enriched",
    ] {
        let seq = path_str(&dir, &format!("{scheme}.seq"));
        run_ok(&["linearize", "--scheme", scheme, &trees, "--out", &seq]);
        let back = run_ok(&[
            "delinearize",
            "--scheme",
            scheme,
            "--sentences",
            &snt,
            &seq,
        ]);
        assert_eq!(back, original, "pipeline identity broke under {scheme}");
    }
}

#[test]
fn delinearize_repair_mode_accepts_garbage() {
    let dir = TempDir::new().unwrap();
    let snt = path_str(&dir, "one.snt");
    let seq = path_str(&dir, "one.seq");
    write(Path::new(&snt), "hello_NN world_NN\n");
    write(Path::new(&seq), "RE FI NT(S) blorp\n");
    let out = run_ok(&[
        "delinearize",
        "--scheme",
        "inorder-sr",
        "--mode",
        "repair",
        "--sentences",
        &snt,
        &seq,
    ]);
    assert!(out.contains("(NN hello)") && out.contains("(NN world)"), "{out}");

    // The same input in strict mode is a data error.
    let strict = run(&[
        "delinearize",
        "--scheme",
        "inorder-sr",
        "--sentences",
        &snt,
        &seq,
    ]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn oracle_agrees_with_linearize() {
    let dir = TempDir::new().unwrap();
    let (trees, _) = synthetic_corpus(&dir, "11", 6);
    let from_oracle = run_ok(&[
        "oracle", "--system", "inorder", "--labeled", "--lex", &trees,
    ]);
    let from_linearize = run_ok(&["linearize", "--scheme", "inorder-sr-enriched", &trees]);
    assert_eq!(from_oracle, from_linearize);
}

#[test]
fn eval_of_identical_files_is_perfect() {
    let dir = TempDir::new().unwrap();
    let (trees, _) = synthetic_corpus(&dir, "5", 10);
    let out = run_ok(&["eval", "--gold", &trees, "--pred", &trees]);
    assert!(out.contains("precision=100.0 recall=100.0"), "{out}");
    assert!(out.lines().any(|l| l == "F1=100.0"), "{out}");
}

#[test]
fn trained_model_parses_and_beam_one_matches_default() {
    let dir = TempDir::new().unwrap();
    let (trees, snt) = synthetic_corpus(&dir, "6", 8);
    let cfg = path_str(&dir, "tiny.cfg");
    write(Path::new(&cfg), TINY_CONFIG);
    let ckpt = path_str(&dir, "model.ckpt");
    let log = run_ok(&["train", "--config", &cfg, "--out", &ckpt, &trees]);
    assert!(log.contains("epoch=2"), "{log}");
    assert!(log.contains("saved"), "{log}");

    let default_out = run_ok(&["parse", "--model", &ckpt, &snt]);
    let beam_one = run_ok(&["parse", "--model", &ckpt, "--beam", "1", &snt]);
    assert_eq!(default_out, beam_one, "--beam 1 must equal the greedy default");
    assert_eq!(
        default_out.lines().count(),
        fs::read_to_string(&snt).unwrap().lines().count(),
        "one output tree per input sentence"
    );

    // Each subcommand that consumes the checkpoint runs on it.
    let bench = run_ok(&[
        "bench", "--model", &ckpt, "--count", "2", "--len", "5", "--warmup", "1", "--runs", "1",
    ]);
    assert!(bench.contains("sents_per_sec="), "{bench}");
    let stats = run_ok(&["stats", "--model", &ckpt, &snt]);
    assert!(stats.contains("adjacent="), "{stats}");
}

#[test]
fn train_is_deterministic_given_seed() {
    let dir = TempDir::new().unwrap();
    let (trees, _) = synthetic_corpus(&dir, "6", 6);
    let cfg = path_str(&dir, "tiny.cfg");
    write(Path::new(&cfg), TINY_CONFIG);
    let first = path_str(&dir, "a.ckpt");
    let second = path_str(&dir, "b.ckpt");
    run_ok(&["train", "--config", &cfg, "--seed", "3", "--out", &first, &trees]);
    run_ok(&["train", "--config", &cfg, "--seed", "3", "--out", &second, &trees]);
    assert_eq!(
        fs::read(&first).unwrap(),
        fs::read(&second).unwrap(),
        "same seed must give identical checkpoints"
    );
}

#[test]
fn gen_synthetic_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, _) = synthetic_corpus(&dir, "7", 5);
    let first = fs::read_to_string(&a).unwrap();
    fs::remove_file(&a).unwrap();
    let (b, _) = synthetic_corpus(&dir, "7", 5);
    assert_eq!(first, fs::read_to_string(&b).unwrap());
    fs::remove_file(&b).unwrap();
    let (c, _) = synthetic_corpus(&dir, "8", 5);
    assert_ne!(first, fs::read_to_string(&c).unwrap());
}

#[test]
fn parallel_jobs_do_not_change_output() {
    let dir = TempDir::new().unwrap();
    let (trees, _) = synthetic_corpus(&dir, "9", 12);
    let serial = run_ok(&["linearize", "--scheme", "inorder-sr", &trees]);
    let parallel = run_ok(&["linearize", "--scheme", "inorder-sr", "--jobs", "4", &trees]);
    assert_eq!(serial, parallel);
}

#[test]
fn exit_codes_distinguish_usage_from_data_errors() {
    // Usage errors: unknown subcommand, unknown flag, bad enum value.
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["linearize", "--scheme", "td-sr", "--bogus", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["linearize", "--scheme", "not-a-scheme", "x"]).status.code(),
        Some(2)
    );

    // Data errors: missing file, malformed treebank.
    assert_eq!(
        run(&["linearize", "--scheme", "td-sr", "/nonexistent/x.trees"]).status.code(),
        Some(1)
    );
    let dir = TempDir::new().unwrap();
    let bad = path_str(&dir, "bad.trees");
    write(Path::new(&bad), "(S (NP broken\n");
    let out = run(&["linearize", "--scheme", "td-sr", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("error"),
        "data errors explain themselves on stderr"
    );
}
