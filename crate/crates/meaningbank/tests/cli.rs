use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use meaningbank::formats::read_drs_layer;
use meaningbank_core::drs::{drs_alpha_equal, Condition, Drs, Ref};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_meaningbank"));
    c.env_remove("MEANINGBANK_HOME").env_remove("MEANINGBANK_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin().args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}\n{}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fig2_drs() -> Drs<Ref> {
    let (x, y, e, s, t1, t2) = (Ref::x(1), Ref::x(2), Ref::e(1), Ref::s(1), Ref::t(1), Ref::t(2));
    Drs::new(
        vec![x, y, e, s, t1, t2],
        vec![
            Condition::Pred1("come".into(), e),
            Condition::Role("Time".into(), e, t2),
            Condition::Role("Theme".into(), e, x),
            Condition::Role("Manner".into(), e, s),
            Condition::Pred2("at".into(), e, y),
            Condition::Pred1("time".into(), y),
            Condition::Now(t1),
            Condition::TemporalBefore(t2, t1),
            Condition::Pred1("male".into(), x),
            Condition::Pred1("back".into(), s),
            Condition::Value(y, "17:00".into()),
        ],
    )
}

/// Runs every English stage into `dir`.
fn english_stages(dir: &Path) {
    fs::write(dir.join("en.raw"), "He came back at 5 o'clock").unwrap();
    let d = dir.to_str().unwrap();
    for stage in ["segment", "semtag", "symbolize", "parse", "interpret"] {
        ok(&run(&["--lang", "en", stage, "--dir", d]));
    }
}

#[test]
fn empty_input_segments_to_nothing() {
    let o = run_stdin(&["segment"], "");
    assert_eq!(ok(&o), "");
}

#[test]
fn stages_write_layer_files() {
    let dir = tempfile::tempdir().unwrap();
    english_stages(dir.path());
    let read = |ext: &str| fs::read_to_string(dir.path().join(format!("en.{}", ext))).unwrap();
    let tok = read("tok");
    let surfaces: Vec<&str> = tok.lines().map(|l| l.split('\t').nth(3).unwrap()).collect();
    assert_eq!(surfaces, ["He", "came", "back", "at", "5~o'clock"]);
    assert_eq!(read("semtag"), "0\tPRO\n1\tEPS\n2\tIST\n3\tREL\n4\tCLO\n");
    assert_eq!(read("sym"), "0\tmale\n1\tcome\n2\tback\n3\tat\n4\t17:00\n");
    assert!(read("der").contains("(empty NP/N DIS)"));
    let drs = read_drs_layer(&read("drs")).unwrap();
    assert_eq!(drs.len(), 1);
    assert!(drs_alpha_equal(drs[0].as_ref().unwrap(), &fig2_drs()));
}

#[test]
fn interpret_from_explicit_files_and_from_derivations() {
    let dir = tempfile::tempdir().unwrap();
    english_stages(dir.path());
    let p = |ext: &str| dir.path().join(format!("en.{}", ext)).to_str().unwrap().to_string();
    let from_layers = ok(&run(&[
        "interpret",
        "--tokens",
        &p("tok"),
        "--semtags",
        &p("semtag"),
        "--symbols",
        &p("sym"),
    ]));
    let from_der = ok(&run(&["interpret", "--derivations", &p("der")]));
    for out in [&from_layers, &from_der] {
        let drs = read_drs_layer(out).unwrap();
        assert!(drs_alpha_equal(drs[0].as_ref().unwrap(), &fig2_drs()), "{}", out);
    }
}

#[test]
fn outputs_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    english_stages(a.path());
    english_stages(b.path());
    for ext in ["tok", "semtag", "sym", "der", "drs"] {
        let name = format!("en.{}", ext);
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{}", name);
    }
}

#[test]
fn projection_verifies_the_translation() {
    let dir = tempfile::tempdir().unwrap();
    english_stages(dir.path());
    fs::write(dir.path().join("de.raw"), "Er kam um fünf Uhr zurück").unwrap();
    fs::write(dir.path().join("de.align"), "0-0 1-1 2-4 3-2 4-3\n").unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(ok(&run(&["--lang", "de", "project", "--dir", d, "--verify"])), "Verified\n");
    let de = read_drs_layer(&fs::read_to_string(dir.path().join("de.drs")).unwrap()).unwrap();
    assert!(drs_alpha_equal(de[0].as_ref().unwrap(), &fig2_drs()));
    assert_eq!(fs::read_to_string(dir.path().join("de.semtag")).unwrap(), "0\tPRO\n1\tEPS\n2\tREL\n3\tCLO\n4\tIST\n");

    // one missing link: the projection fails and the exit code says so
    fs::write(dir.path().join("de.align"), "0-0 1-1 3-2 4-3\n").unwrap();
    let o = run(&["--lang", "de", "project", "--dir", d, "--verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("Failed"));
}

#[test]
fn usage_errors_exit_with_two() {
    let o = run(&["segment", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--frobnicate"));
    assert_eq!(run(&["semtag"]).status.code(), Some(2));
    assert_eq!(run(&["--lang", "xx", "segment"]).status.code(), Some(2));
    assert_eq!(run(&["--lang", "en", "project", "--dir", "."]).status.code(), Some(2));
    assert_eq!(run(&["stats"]).status.code(), Some(2));
}

#[test]
fn pipeline_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("en.raw"), "He came back").unwrap();
    let d = dir.path().to_str().unwrap();
    for stage in ["segment", "semtag", "symbolize"] {
        ok(&run(&[stage, "--dir", d]));
    }
    // a category sequence with no derivation
    fs::write(dir.path().join("en.cat"), "0\tN\n1\tN\n2\tN\n").unwrap();
    let o = run(&["parse", "--dir", d]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_to_string(dir.path().join("en.der")).unwrap(), "-\n");
    // a layer of the wrong length
    fs::write(dir.path().join("en.semtag"), "0\tPRO\n").unwrap();
    assert_eq!(run(&["interpret", "--dir", d]).status.code(), Some(1));
}

#[test]
fn bank_commands() {
    let home = tempfile::tempdir().unwrap();
    let h = home.path().to_str().unwrap();
    let src = home.path().join("in.txt");
    fs::write(&src, "He came back at 5 o'clock.").unwrap();
    let s = src.to_str().unwrap();
    ok(&run(&["--lang", "en", "import", "--bank", h, "--doc", "00/3178", s]));
    ok(&run(&["--lang", "en", "reannotate", "--bank", h, "--doc", "00/3178"]));
    let status = ok(&bin().env("MEANINGBANK_HOME", h).args(["status", "--doc", "00/3178"]).output().unwrap());
    assert!(status.contains("en\tsemtag\tBronze\n"), "{}", status);
    let gold = ok(&run(&["--lang", "en", "status", "--bank", h, "--doc", "00/3178", "--layer", "tok", "--gold"]));
    assert_eq!(gold, "en\ttok\tGold\n");
    let stats = ok(&run(&["stats", "--bank", h]));
    let mut lines = stats.lines();
    assert_eq!(lines.next(), Some("Layer\tLang\tGold\tSilver\tBronze"));
    assert_eq!(lines.next(), Some("Tokens\ten\t1\t0\t0"));
    assert_eq!(stats.lines().count(), 1 + 5 * 4);
    assert_eq!(run(&["status", "--bank", h, "--doc", "3178"]).status.code(), Some(2));
    assert_eq!(run(&["status", "--bank", h, "--doc", "00/1"]).status.code(), Some(1));
}

#[test]
fn trained_models_plug_into_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    ok(&run(&["--lang", "en", "train-segmenter", "--synthetic", "60", "--output", &p("en.seg")]));
    fs::write(p("tags.tsv"), "en\tHe\tPRO\nen\tcame\tEPS\nen\tback\tIST\nen\tback\tIST\nen\tback\tREL\n").unwrap();
    ok(&run(&["train-lexicon", &p("tags.tsv"), "--output", &p("lexicon.tsv")]));
    fs::write(p("bad.tsv"), "en\tback\tDIR\n").unwrap();
    assert_eq!(run(&["train-lexicon", &p("bad.tsv")]).status.code(), Some(1));
    let lexicon = fs::read_to_string(p("lexicon.tsv")).unwrap();
    assert!(lexicon.contains("en\tback\tIST\t2"), "{}", lexicon);
    fs::write(p("pipeline.toml"), "language = \"en\"\n[models]\nsegmenter = \"en.seg\"\nlexicon = \"lexicon.tsv\"\n").unwrap();
    let tok = ok(&run_stdin(&["--config", &p("pipeline.toml"), "segment"], "He came back."));
    assert_eq!(tok.lines().count(), 4);
    fs::write(p("en.tok"), tok).unwrap();
    let tags = ok(&run(&["--config", &p("pipeline.toml"), "semtag", "--tokens", &p("en.tok")]));
    assert!(tags.starts_with("0\tPRO\n1\tEPS\n2\tIST\n"), "{}", tags);

    fs::write(p("bad.toml"), "language = \"en\"\nflavour = 1\n").unwrap();
    assert_eq!(run(&["--config", &p("bad.toml"), "segment"]).status.code(), Some(2));
}
