use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn cyberrel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyberrel")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn gaz() -> String {
    p(&data("gazetteers")).to_string()
}

fn relations(path: &Path) -> Vec<(String, String, String)> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["relations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let s = |k: &str| r[k].as_str().unwrap().to_string();
            (s("relation"), s("subject"), s("object"))
        })
        .collect()
}

fn bootstrap(corpus: &Path, seeds: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["bootstrap", "--corpus", p(corpus), "--seeds", p(seeds), "--out", p(out)];
    let g = gaz();
    args.extend(["--gazetteers", &g]);
    args.extend_from_slice(extra);
    cyberrel(&args)
}

#[test]
fn tag_prints_mentions_per_document() {
    let g = gaz();
    let o = cyberrel(&["tag", "--corpus", p(&data("fixtures/corpus")), "--gazetteers", &g]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_object().unwrap().len(), 20);
    let doc1 = v["doc01"].as_array().unwrap();
    assert!(doc1.iter().any(|m| m["canonical"] == "Adobe" && m["entity_type"] == "SW_Vendor"), "{doc1:?}");

    let empty = tempfile::tempdir().unwrap();
    let o = cyberrel(&["tag", "--corpus", p(empty.path()), "--gazetteers", &g]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "{}");
}

#[test]
fn input_errors_exit_2() {
    let empty = tempfile::tempdir().unwrap();
    let o = cyberrel(&["tag", "--corpus", p(&data("fixtures/corpus")), "--gazetteers", p(empty.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing gazetteer for SW_Vendor"), "{}", stderr(&o));

    let o = cyberrel(&["eval", "--extracted", "/nonexistent/x.json", "--gold", "/nonexistent/y.json"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"accept_fraction": 1.5}"#).unwrap();
    let o = bootstrap(&data("fixtures/two_hop/corpus"), &data("fixtures/two_hop/seeds.json"), dir.path(), &["--config", p(&config)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("accept_fraction"), "{}", stderr(&o));

    let bad_seeds = dir.path().join("seeds.json");
    std::fs::write(&bad_seeds, "{\n  \"relations\": [\n").unwrap();
    let o = bootstrap(&data("fixtures/two_hop/corpus"), &bad_seeds, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn two_hop_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = bootstrap(&data("fixtures/two_hop/corpus"), &data("fixtures/two_hop/seeds.json"), out, &["--oracle", "auto"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let rels = relations(&a.join("extracted.json"));
    assert!(rels.contains(&("is_vendor_of".into(), "Adobe".into(), "Acrobat".into())), "{rels:?}");
    assert!(rels.contains(&("is_vendor_of".into(), "Microsoft".into(), "Internet Explorer".into())));
    for f in ["extracted.json", "state/is_vendor_of.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn scripted_no_keeps_only_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let script = format!("scripted:{}", p(&data("fixtures/all_no.json")));
    let o = bootstrap(&data("fixtures/corpus"), &data("seeds"), dir.path(), &["--oracle", &script]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut seeds = Vec::new();
    for e in std::fs::read_dir(data("seeds")).unwrap() {
        seeds.extend(relations(&e.unwrap().path()));
    }
    let mut got = relations(&dir.path().join("extracted.json"));
    let norm = |v: &mut Vec<(String, String, String)>| {
        for r in v.iter_mut() {
            *r = (r.0.clone(), r.1.to_lowercase(), r.2.to_lowercase());
        }
        v.sort();
        v.dedup();
    };
    norm(&mut seeds);
    norm(&mut got);
    assert_eq!(got, seeds);
}

#[test]
fn generate_bootstrap_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = gaz();
    let o = cyberrel(&["generate", "--out", p(dir.path()), "--gazetteers", &g, "--num-docs", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("20 documents, 40 planted relations"), "{}", stdout(&o));
    let out = dir.path().join("run");
    let o = bootstrap(&dir.path().join("corpus"), &dir.path().join("seeds.json"), &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));

    let gold = dir.path().join("gold.json");
    let extracted = out.join("extracted.json");
    let o = cyberrel(&["eval", "--extracted", p(&extracted), "--gold", p(&gold), "--labeled", p(&gold), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["precision"], 1.0);
    assert_eq!(report["recall"]["recall"], 1.0);

    let o = cyberrel(&["eval", "--extracted", p(&extracted), "--gold", p(&gold)]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.contains("Totals") && l.trim_end().ends_with("1.00")), "{text}");
}

#[test]
fn gate_training_and_filtering() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    let mut labels = serde_json::Map::new();
    for i in 0..6 {
        let relevant = format!("Adobe patched a buffer overflow in Acrobat {i}.0 tracked as CVE-2014-{:04}.", 1000 + i);
        let irrelevant = format!("The weather in spring number {i} was pleasant and the parks were full.");
        std::fs::write(corpus.join(format!("r{i}.txt")), relevant).unwrap();
        std::fs::write(corpus.join(format!("n{i}.txt")), irrelevant).unwrap();
        labels.insert(format!("r{i}"), Value::Bool(true));
        labels.insert(format!("n{i}"), Value::Bool(false));
    }
    let labels_path = dir.path().join("labels.json");
    std::fs::write(&labels_path, Value::Object(labels).to_string()).unwrap();
    let model = dir.path().join("gate.json");
    let g = gaz();
    let o = cyberrel(&["train-gate", "--corpus", p(&corpus), "--gazetteers", &g, "--labels", p(&labels_path), "--out", p(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("trained on 12 labeled documents, 12 classified correctly"), "{}", stdout(&o));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"ghost": true}"#).unwrap();
    let o = cyberrel(&["train-gate", "--corpus", p(&corpus), "--gazetteers", &g, "--labels", p(&bad), "--out", p(&model)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ghost"));

    let o = bootstrap(&corpus, &data("seeds"), &dir.path().join("run"), &["--relevance", p(&model), "-v"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("kept 6 documents, dropped 6"), "{}", stderr(&o));
}

#[test]
fn busy_port_exits_3() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let dir = tempfile::tempdir().unwrap();
    let o = bootstrap(
        &data("fixtures/two_hop/corpus"),
        &data("fixtures/two_hop/seeds.json"),
        dir.path(),
        &["--oracle", "serve", "--bind", &addr],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
