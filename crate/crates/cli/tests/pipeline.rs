use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mediagraph::graph::{load_graph, save_graph};
use mediagraph::linkpred::LinkModel;
use mediagraph::synthetic::{temporal_planted, TemporalFixture};
use mediagraph::EntityType;

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_mediagraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const GAZETTEER: &str = "name,aliases,type
Narendra Modi,Shri Narendra Modi,POL
Rahul Gandhi,Gandhi,POL
Amit Shah,Shah,POL
Tata Group,Tata,ORG
";

const CORPUS: &str = r#"{"article_id":"1","source":"x","publish_date":"2021-01-04","title":"Election rally","text":"Narendra Modi and Amit Shah met Tata Group leaders before the election."}
{"article_id":"2","source":"x","publish_date":"2021-01-09T08:00:00Z","title":"Poll","text":"Shri Narendra Modi spoke after Rahul Gandhi criticised the election schedule."}
{"article_id":"3","source":"x","publish_date":"2021-02-01","title":"Markets","text":"Tata shares rose while Amit Shah toured the north."}
{"article_id":"4","source":"x","publish_date":"2021-02-11","title":"Election","text":"Rahul Gandhi and Amit Shah traded barbs on election day.","mentions":["Rahul Gandhi","Amit Shah"]}
not json
"#;

#[test]
fn corpus_to_graph_and_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("gaz.csv"), GAZETTEER).unwrap();
    fs::write(d.join("corpus.jsonl"), CORPUS).unwrap();
    fs::write(d.join("keys.txt"), "election\n").unwrap();

    run(
        d,
        &[
            "ingest",
            "--corpus",
            "corpus.jsonl",
            "--gazetteer",
            "gaz.csv",
            "--keyphrases",
            "keys.txt",
            "--truncate",
            "9",
            "--out",
            "ingested.jsonl",
        ],
    );
    let ingested = fs::read_to_string(d.join("ingested.jsonl")).unwrap();
    // article 3 lacks the keyphrase; article 1 loses "election" to truncation but matched before it
    assert_eq!(ingested.lines().count(), 3);
    assert!(ingested
        .lines()
        .next()
        .unwrap()
        .contains(r#""mentions":["Narendra Modi","Amit Shah","Tata Group"]"#));

    run(
        d,
        &[
            "resolve",
            "--mentions",
            "ingested.jsonl",
            "--gazetteer",
            "gaz.csv",
            "--out",
            "clusters.jsonl",
        ],
    );
    let clusters = fs::read_to_string(d.join("clusters.jsonl")).unwrap();
    assert!(clusters.contains(r#""canonical":"Shri Narendra Modi","aliases":["Narendra Modi","Shri Narendra Modi"]"#));

    run(
        d,
        &[
            "build",
            "--resolved",
            "clusters.jsonl",
            "--corpus",
            "ingested.jsonl",
            "--person-only",
            "--out",
            "graph.json",
        ],
    );
    let g = load_graph(d.join("graph.json")).unwrap();
    assert!(g.nodes().all(|(_, t)| t != EntityType::Org));
    assert_eq!(g.edge("Amit Shah", "Rahul Gandhi").unwrap().weight, 1);
    assert!(g.has_edge("Rahul Gandhi", "Shri Narendra Modi"));
    assert_eq!(g.node_count(), 3);

    let stats = stdout(&run(d, &["stats", "graph.json"]));
    assert!(stats.starts_with(&format!("nodes\t{}\nedges\t{}\n", g.node_count(), g.edge_count())));

    let csv = stdout(&run(
        d,
        &[
            "analyze",
            "graph.json",
            "--centrality",
            "betweenness,eigenvector",
            "--top",
            "2",
            "--communities",
            "1",
            "--leaders",
            "1",
        ],
    ));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("axis,community,rank,entity,score"));
    let axes: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        axes,
        [
            "betweenness",
            "betweenness",
            "eigenvector",
            "eigenvector",
            "community_leader"
        ]
    );

    let mut ann = String::from("cluster_id,member,valid\n");
    for (i, line) in clusters.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for m in v["aliases"].as_array().unwrap() {
            ann.push_str(&format!("{i},{},1\n", m.as_str().unwrap()));
        }
    }
    fs::write(d.join("ann.csv"), ann).unwrap();
    let report = stdout(&run(
        d,
        &[
            "er-eval",
            "--clusters",
            "clusters.jsonl",
            "--annotations",
            "ann.csv",
            "--fn",
            "1",
            "--tp",
            "9",
        ],
    ));
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["accuracy_pct"], 100.0);
    assert!((report["fmp"].as_f64().unwrap() - 0.1).abs() < 1e-12);
}

const EXPERIMENT: &str = r#"
outlet = "fixture"
graph = "planted.json"
[split]
train_end = "2020-12-31"
val_end = "2021-02-28"
test_end = "2021-12-31"
[model]
experiments = ["1A"]
[model.sage]
hidden_dim = 8
decoder_hidden = 8
epochs = 5
[model.search]
hidden_dim = []
layers = []
dropout = []
lr = []
weight_decay = []
decoder_hidden = []
budget = 1
[features.walk]
walk_length = 10
walks_per_node = 4
window = 3
[features.skipgram]
dim = 8
epochs = 1
[thresholds]
min_weights = [1]
[bootstrap]
resamples = 50
"#;

#[test]
fn embedding_training_and_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = temporal_planted(&TemporalFixture::default()).graph;
    save_graph(&g, d.join("planted.json")).unwrap();
    fs::write(d.join("exp.toml"), EXPERIMENT).unwrap();

    run(
        d,
        &[
            "embed",
            "planted.json",
            "--dim",
            "8",
            "--walk-length",
            "10",
            "--walks",
            "4",
            "--window",
            "3",
            "--epochs",
            "1",
            "--out",
            "emb.json",
        ],
    );
    run(
        d,
        &[
            "train",
            "--graph",
            "planted.json",
            "--features",
            "emb.json",
            "--mode",
            "unsupervised",
            "--structural",
            "--config",
            "exp.toml",
            "--out",
            "model.bin",
        ],
    );
    let model = LinkModel::load(d.join("model.bin")).unwrap();
    assert_eq!(model.pair_feature_dim(), 2 * 8 + 5);

    let csv = stdout(&run(
        d,
        &[
            "baseline",
            "--graph",
            "planted.json",
            "--mode",
            "random",
            "--config",
            "exp.toml",
        ],
    ));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("RANDOM,ONE_TIME,one-time,All Weights,"));

    run(d, &["experiment", "--config", "exp.toml", "--out", "report.csv"]);
    let report = fs::read_to_string(d.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(report
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("fixture,1A,ONE_TIME,All Weights,"));
    assert!(d.join("report.json").exists());
}
