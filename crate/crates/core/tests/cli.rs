mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::data;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jointseg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_owned()
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn trained_model(&self) -> String {
        let model = self.path("model.txt");
        let o = run(&[
            "train",
            "--corpus",
            s(&data("toy_gold.txt")),
            "--lexicon",
            s(&data("toy_lexicon.txt")),
            "--model",
            &model,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        model
    }
}

#[test]
fn missing_lexicon_is_a_usage_error() {
    let f = Fixture::new();
    let o = run(&[
        "make-training",
        "--corpus",
        s(&data("toy_gold.txt")),
        "--lexicon",
        "/nonexistent/lex.txt",
        "--output",
        &f.path("t.txt"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lexicon not found: /nonexistent/lex.txt"));
    assert!(!Path::new(&f.path("t.txt")).exists());
}

#[test]
fn empty_inputs_are_rejected() {
    let f = Fixture::new();
    let empty = f.write("empty.txt", "\n\n");
    let o = run(&[
        "make-training",
        "--corpus",
        &empty,
        "--lexicon",
        s(&data("toy_lexicon.txt")),
        "--output",
        &f.path("t.txt"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("corpus is empty"));

    let comments = f.write("lex.txt", "# nothing\n");
    let o = run(&[
        "mmseg",
        "--lexicon",
        &comments,
        "--input",
        s(&data("toy_raw.txt")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let o = run(&["train", "--input", &empty, "--model", &f.path("m.txt")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn template_errors() {
    let f = Fixture::new();
    let train = f.path("train.txt");
    let o = run(&[
        "make-training",
        "--corpus",
        s(&data("toy_gold.txt")),
        "--lexicon",
        s(&data("toy_lexicon.txt")),
        "--output",
        &train,
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("20"));

    let o = run(&[
        "train",
        "--input",
        &train,
        "--preset",
        "exp9",
        "--model",
        &f.path("m"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exp1"), "{}", stderr(&o));

    let wide = f.write("wide.tpl", "U00:%x[0,5]\nB\n");
    let o = run(&[
        "train",
        "--input",
        &train,
        "--template",
        &wide,
        "--model",
        &f.path("m"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column"), "{}", stderr(&o));

    let bad = f.write("bad.tpl", "U00:%x[0,0\n");
    let o = run(&[
        "train",
        "--input",
        &train,
        "--template",
        &bad,
        "--model",
        &f.path("m"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));

    let o = run(&[
        "train",
        "--input",
        &train,
        "--l2-sigma",
        "0",
        "--model",
        &f.path("m"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!Path::new(&f.path("m")).exists());
}

#[test]
fn corrupted_model_is_rejected() {
    let f = Fixture::new();
    let model = f.trained_model();
    let text = fs::read_to_string(&model).unwrap();
    let cut = f.write("cut.txt", &text[..text.len() / 2]);
    let o = run(&[
        "segment",
        "--model",
        &cut,
        "--lexicon",
        s(&data("toy_lexicon.txt")),
        "--input",
        s(&data("toy_raw.txt")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model"), "{}", stderr(&o));

    let o = run(&[
        "segment",
        "--model",
        &f.path("absent"),
        "--lexicon",
        s(&data("toy_lexicon.txt")),
        "--input",
        s(&data("toy_raw.txt")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model not found:"));
}

#[test]
fn segment_writes_stdout_and_handles_blank_lines() {
    let f = Fixture::new();
    let model = f.trained_model();
    let input = f.write("in.txt", "中共中央总书记\n\n国家 主席\n");
    let o = run(&[
        "segment",
        "--model",
        &model,
        "--lexicon",
        s(&data("toy_lexicon.txt")),
        "--input",
        &input,
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "中共中央 总书记");
    assert_eq!(lines[1], "");
    assert_eq!(lines[2].replace(' ', ""), "国家主席");

    let o = run(&[
        "segment",
        "--model",
        &model,
        "--lexicon",
        s(&data("toy_lexicon.txt")),
        "--input",
        &input,
        "--threads",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_utf8_input_reports_the_line() {
    let f = Fixture::new();
    let p = f.path("bad.txt");
    fs::write(&p, b"ok\n\xff\xfe\n").unwrap();
    let o = run(&["mmseg", "--input", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn mmseg_without_lexicon_splits_characters() {
    let f = Fixture::new();
    let input = f.write("in.txt", "中国人\n");
    let o = run(&["mmseg", "--input", &input]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "中 国 人\n");
    let lex = f.write("lex.txt", "中国\n");
    let o = run(&[
        "mmseg",
        "--input",
        &input,
        "--lexicon",
        &lex,
        "--output",
        &f.path("o.txt"),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(f.path("o.txt")).unwrap(), "中国 人\n");
}

#[test]
fn eval_reports_and_rejects_misaligned_files() {
    let f = Fixture::new();
    let gold = f.write("gold.txt", "ab c\nd\n");
    let pred = f.write("pred.txt", "a bc\nd\n");
    let json = f.path("r.json");
    let o = run(&["eval", &gold, &pred, "--output", &json]);
    assert!(o.status.success());
    assert!(
        stdout(&o).starts_with("P: 33.33 R: 33.33 F: 33.33"),
        "{}",
        stdout(&o)
    );
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["correct_words"], 1);
    assert_eq!(v["per_line_mismatch"], serde_json::json!([1]));

    let short = f.write("short.txt", "ab c\n");
    let o = run(&["eval", &gold, &short]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let other = f.write("other.txt", "ab c\nx\n");
    let o = run(&["eval", &gold, &other]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corpus_and_training_file_give_the_same_model() {
    let f = Fixture::new();
    let via_corpus = f.trained_model();
    let train = f.path("train.txt");
    let lex = data("toy_lexicon.txt");
    assert!(run(&[
        "make-training",
        "--corpus",
        s(&data("toy_gold.txt")),
        "--lexicon",
        s(&lex),
        "--output",
        &train
    ])
    .status
    .success());
    let via_file = f.path("m2.txt");
    let o = run(&[
        "train",
        "--input",
        &train,
        "--model",
        &via_file,
        "--threads",
        "2",
    ]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("iter"));
    assert_eq!(fs::read(via_corpus).unwrap(), fs::read(via_file).unwrap());
}

#[test]
fn help_and_unknown_flags() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for cmd in ["make-training", "train", "segment", "mmseg", "eval"] {
        assert!(stdout(&o).contains(cmd));
    }
    assert_eq!(run(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}
