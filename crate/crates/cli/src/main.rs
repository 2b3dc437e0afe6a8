use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mediagraph::analytics::{analysis_rows, leiden, CentralityKind, DEFAULT_RESOLUTION};
use mediagraph::corpus::{
    extract_all, load_articles, truncate_article, EntityIndex, KeyphraseQuery, DEFAULT_WORD_BUDGET,
};
use mediagraph::embeddings::{node2vec, EmbeddingTable, SkipGramConfig, WalkConfig};
use mediagraph::graph::{build_graph, density, load_graph, resolve_articles, save_graph, MediaGraph};
use mediagraph::harness::{run_baselines_on, run_experiment, ExperimentConfig};
use mediagraph::linkpred::{train_supervised, train_unsupervised, NodeFeatureTable};
use mediagraph::resolver::{
    er_evaluate, load_annotations, load_clusters, resolve_all, save_clusters, AliasMap, MatchConfig,
};

#[derive(Parser)]
#[command(
    name = "mediagraph",
    version,
    about = "Entity co-occurrence graphs from news corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter, truncate and extract mentions; writes JSON Lines articles.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        gazetteer: PathBuf,
        /// One keyphrase per line.
        #[arg(long)]
        keyphrases: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WORD_BUDGET)]
        truncate: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster the mentions of an ingested corpus.
    Resolve {
        /// Ingested articles (output of `ingest`).
        #[arg(long)]
        mentions: PathBuf,
        #[arg(long)]
        gazetteer: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score annotated clusters.
    ErEval {
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        /// False misses, for the false-miss percentage.
        #[arg(long = "fn")]
        false_misses: Option<u64>,
        #[arg(long)]
        tp: Option<u64>,
    },
    /// Build the co-occurrence graph.
    Build {
        /// Clusters from `resolve`.
        #[arg(long)]
        resolved: PathBuf,
        /// Ingested articles.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        person_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print node count, edge count and density.
    Stats { graph: PathBuf },
    /// Centrality rankings and community leaders as CSV.
    Analyze {
        graph: PathBuf,
        /// `all` or a comma-separated list of weighted_degree, betweenness,
        /// eigenvector, pagerank.
        #[arg(long, default_value = "all")]
        centrality: String,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[arg(long, default_value_t = 3)]
        communities: usize,
        #[arg(long, default_value_t = 5)]
        leaders: usize,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Node2Vec embeddings as a `{node: [f64]}` JSON table.
    Embed {
        graph: PathBuf,
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        walk_length: usize,
        #[arg(long, default_value_t = 300)]
        walks: usize,
        #[arg(long, default_value_t = 15)]
        window: usize,
        /// Return parameter.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// In-out parameter.
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a link predictor on a training graph.
    Train {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        structural: bool,
        /// Experiment config; its `model` section supplies the settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Validation graph. Without it the latest tenth of the edges, by
        /// first date, is held out.
        #[arg(long)]
        val: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the experiment grid and write the report CSV and JSON sidecar.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random or community baselines over the configured splits.
    Baseline {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        mode: BaselineMode,
        /// Score every training non-edge instead of the balanced set.
        #[arg(long)]
        all_pairs: bool,
        /// Experiment config for splits, thresholds and seed.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Supervised,
    Unsupervised,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMode {
    Random,
    Community,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest {
            corpus,
            gazetteer,
            keyphrases,
            truncate,
            out,
        } => ingest(&corpus, &gazetteer, keyphrases.as_deref(), truncate, &out),
        Command::Resolve {
            mentions,
            gazetteer,
            out,
        } => {
            let corpus = load_articles(&mentions, None)?;
            let index = EntityIndex::from_csv(&gazetteer)?;
            let names: Vec<String> = corpus
                .articles
                .iter()
                .flat_map(|a| a.mentions.iter().cloned())
                .collect();
            let clusters = resolve_all(&names, Some(&index), &MatchConfig::default());
            save_clusters(&out, &clusters)?;
            eprintln!("{} names in {} clusters", names.len(), clusters.len());
            Ok(())
        }
        Command::ErEval {
            clusters,
            annotations,
            false_misses,
            tp,
        } => {
            let clusters = load_clusters(&clusters)?;
            let annotations = load_annotations(&annotations)?;
            let report = er_evaluate(&clusters, &annotations, false_misses, tp)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Build {
            resolved,
            corpus,
            person_only,
            out,
        } => {
            let clusters = load_clusters(&resolved)?;
            let articles = load_articles(&corpus, None)?.articles;
            let mentions: Vec<Vec<String>> = articles.iter().map(|a| a.mentions.clone()).collect();
            let resolved = resolve_articles(&articles, &mentions, &AliasMap::new(&clusters));
            let g = build_graph(&resolved, person_only);
            save_graph(&g, &out)?;
            print_stats(&g)
        }
        Command::Stats { graph } => print_stats(&load_graph(&graph)?),
        Command::Analyze {
            graph,
            centrality,
            top,
            communities,
            leaders,
            resolution,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let kinds = parse_kinds(&centrality)?;
            let part = leiden(&g, resolution, seed)?;
            let rows = analysis_rows(&g, &kinds, top, &part, communities, leaders)?;
            write_csv(out.as_deref(), &rows)
        }
        Command::Embed {
            graph,
            dim,
            walk_length,
            walks,
            window,
            p,
            q,
            epochs,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let walk = WalkConfig {
                walk_length,
                walks_per_node: walks,
                window,
                return_p: p,
                inout_q: q,
                seed,
            };
            let sg = SkipGramConfig {
                dim,
                epochs,
                ..SkipGramConfig::default()
            };
            let (table, result) = node2vec(&g, &walk, &sg)?;
            table.save(&out)?;
            if let Some(loss) = result.epoch_loss.last() {
                eprintln!("{} vectors, final epoch loss {loss:.4}", table.len());
            }
            Ok(())
        }
        Command::Train {
            graph,
            features,
            mode,
            structural,
            config,
            val,
            out,
        } => train(
            &graph,
            &features,
            mode,
            structural,
            config.as_deref(),
            val.as_deref(),
            &out,
        ),
        Command::Experiment { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_experiment(&cfg)?;
            let sidecar = report.write(&out)?;
            eprintln!(
                "{} rows; wrote {} and {}",
                report.rows.len(),
                out.display(),
                sidecar.display()
            );
            Ok(())
        }
        Command::Baseline {
            graph,
            mode,
            all_pairs,
            config,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            cfg.baselines.random = matches!(mode, BaselineMode::Random);
            cfg.baselines.community = matches!(mode, BaselineMode::Community);
            cfg.baselines.all_pairs = all_pairs;
            let g = load_graph(&graph)?;
            let rows = run_baselines_on(&g, &cfg)?;
            write_csv(out.as_deref(), &rows)
        }
    }
}

fn ingest(corpus: &Path, gazetteer: &Path, keyphrases: Option<&Path>, budget: usize, out: &Path) -> Result<()> {
    if budget == 0 {
        bail!("--truncate must be positive");
    }
    let query = keyphrases.map(KeyphraseQuery::from_file).transpose()?;
    let loaded = load_articles(corpus, query.as_ref())?;
    let index = EntityIndex::from_csv(gazetteer)?;
    let mut articles: Vec<_> = loaded.articles.iter().map(|a| truncate_article(a, budget)).collect();
    let mentions = extract_all(&articles, &index);
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = BufWriter::new(file);
    for (a, m) in articles.iter_mut().zip(mentions) {
        a.mentions = m;
        serde_json::to_writer(&mut w, a)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    eprintln!(
        "{} articles kept, {} malformed lines skipped",
        articles.len(),
        loaded.malformed
    );
    Ok(())
}

fn print_stats(g: &MediaGraph) -> Result<()> {
    println!("nodes\t{}", g.node_count());
    println!("edges\t{}", g.edge_count());
    match density(g) {
        Ok(d) => println!("density\t{d:.6e}"),
        Err(e) => println!("density\tundefined ({e})"),
    }
    Ok(())
}

fn parse_kinds(spec: &str) -> Result<Vec<CentralityKind>> {
    let all = [
        CentralityKind::WeightedDegree,
        CentralityKind::Betweenness,
        CentralityKind::Eigenvector,
        CentralityKind::Pagerank,
    ];
    if spec.trim() == "all" {
        return Ok(all.to_vec());
    }
    spec.split(',')
        .map(|s| {
            let s = s.trim();
            all.into_iter()
                .find(|k| k.as_str() == s)
                .with_context(|| format!("unknown centrality `{s}`"))
        })
        .collect()
}

fn write_csv<T: Serialize>(out: Option<&Path>, rows: &[T]) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Holds out the most recent tenth of the edges by first date.
fn temporal_holdout(g: &MediaGraph) -> Result<(MediaGraph, MediaGraph)> {
    let mut keys: Vec<_> = g.edges().map(|(k, a)| (a.first, k.clone())).collect();
    keys.sort();
    let held = keys.len() / 10;
    if held == 0 {
        bail!("graph has too few edges to hold out a validation set; pass --val");
    }
    let val_keys: BTreeSet<_> = keys[keys.len() - held..].iter().map(|(_, k)| k.clone()).collect();
    let mut train = g.filter_edges(|k, _| !val_keys.contains(k));
    for (n, t) in g.nodes() {
        train.add_node(n, t);
    }
    Ok((train, g.filter_edges(|k, _| val_keys.contains(k))))
}

fn train(
    graph: &Path,
    features: &Path,
    mode: Mode,
    structural: bool,
    config: Option<&Path>,
    val: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let model_cfg = match config {
        Some(p) => ExperimentConfig::load(p)?.model,
        None => ExperimentConfig::default().model,
    };
    let g = load_graph(graph)?;
    let (train_g, val_g) = match val {
        Some(p) => (g, load_graph(p)?),
        None => temporal_holdout(&g)?,
    };
    let feats = NodeFeatureTable::new(EmbeddingTable::load(features)?);
    let model = match mode {
        Mode::Supervised => train_supervised(&train_g, &val_g, &feats, &model_cfg.sage, &model_cfg.search, structural)?,
        Mode::Unsupervised => {
            train_unsupervised(&train_g, &val_g, &feats, &model_cfg.sage, &model_cfg.search, structural)?
        }
    };
    model.save(out)?;
    eprintln!(
        "validation loss {:.4}, {} trials",
        model.validation_loss,
        model.trials.len()
    );
    Ok(())
}
