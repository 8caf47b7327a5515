use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{anyhow, Context};
use cyberrel::bootstrap::{extracted_relations, load_seeds, run_pipeline, BootstrapConfig, PipelineOutput, SeedFile};
use cyberrel::corpus::{load_corpus, write_corpus, CorpusFormat, Document};
use cyberrel::entity::{tag_document, EntityMention, Gazetteers};
use cyberrel::evalgen::{evaluate, generate_corpus, SynthSpec};
use cyberrel::oracle::{AnswerBook, AutoDontKnow, Interactive, Oracle, OracleMode, OracleQueue, Scripted, Service};
use cyberrel::relation::{RelationInstance, RelationProvenance};
use cyberrel::relevance::{train, EntityCounts, FeatureExtractor, RelevanceModel, TrainConfig};
use log::info;

use crate::{service, BootstrapArgs, EvalArgs, GenerateArgs, TagArgs, TrainGateArgs};

/// A failed command. Bad input exits with 2, a failing environment
/// (unwritable output, busy port) with 3.
#[derive(Debug)]
pub struct Failure {
    pub error: anyhow::Error,
    pub environment: bool,
}

impl Failure {
    pub fn code(&self) -> u8 {
        if self.environment {
            3
        } else {
            2
        }
    }
}

trait Classify<T> {
    fn input(self) -> Result<T, Failure>;
    fn environment(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { error: e.into(), environment: false })
    }

    fn environment(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { error: e.into(), environment: true })
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let content = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).input()?;
    serde_json::from_str(&content).with_context(|| format!("parsing {}", path.display())).input()
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).environment()?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display())).environment()
}

fn load_inputs(corpus: &Path, format: CorpusFormat, gazetteers: &Path) -> Result<(Vec<Document>, Gazetteers), Failure> {
    let gaz = Gazetteers::load_dir(gazetteers).input()?;
    let docs = load_corpus(corpus, format).input()?;
    Ok((docs, gaz))
}

pub fn tag(args: &TagArgs) -> Result<(), Failure> {
    let (docs, gaz) = load_inputs(&args.corpus, args.format, &args.gazetteers)?;
    let mentions: BTreeMap<&str, Vec<EntityMention>> = docs.iter().map(|d| (d.id.as_str(), tag_document(d, &gaz))).collect();
    let json = serde_json::to_string_pretty(&mentions).expect("mentions serialize") + "\n";
    match &args.out {
        Some(path) => write_file(path, &json)?,
        None => print!("{json}"),
    }
    info!("tagged {} documents, {} mentions", docs.len(), mentions.values().map(Vec::len).sum::<usize>());
    Ok(())
}

fn relative_to(base: Option<&Path>, mode: OracleMode) -> OracleMode {
    match (mode, base.and_then(Path::parent)) {
        (OracleMode::Scripted(p), Some(dir)) if p.is_relative() => OracleMode::Scripted(dir.join(p)),
        (mode, _) => mode,
    }
}

pub fn bootstrap(args: &BootstrapArgs) -> Result<(), Failure> {
    let config = match &args.config {
        Some(path) => BootstrapConfig::load(path).input()?,
        None => BootstrapConfig::default(),
    };
    let mode = match &args.oracle {
        Some(mode) => mode.clone(),
        None => relative_to(args.config.as_deref(), config.oracle_mode()),
    };
    let timeout = match args.answer_timeout {
        Some(s) if !(s.is_finite() && s >= 0.0) => {
            return Err(anyhow!("--answer-timeout must be a non-negative number of seconds")).input()
        }
        s => s.map(Duration::from_secs_f64),
    };
    let (docs, gaz) = load_inputs(&args.corpus, args.format, &args.gazetteers)?;
    let seeds = load_seeds(&args.seeds, config.window_cap).input()?;
    let relevance: Option<RelevanceModel> = args.relevance.as_deref().map(read_json).transpose()?;
    if let Some(model) = &relevance {
        model.validate().with_context(|| "relevance model").input()?;
    }
    let run = |oracle: &mut dyn Oracle| run_pipeline(docs, &gaz, relevance.as_ref(), &seeds, &config, oracle);

    let output = match mode {
        OracleMode::Auto => run(&mut AutoDontKnow).input()?,
        OracleMode::Scripted(path) => {
            let book = AnswerBook::load(&path).input()?;
            run(&mut Scripted::new(book)).input()?
        }
        OracleMode::Interactive => {
            let stdin = std::io::stdin();
            run(&mut Interactive::new(stdin.lock(), std::io::stderr())).input()?
        }
        OracleMode::Serve => serve(args, timeout, run)?,
    };
    write_outputs(&args.out, &output)
}

fn serve<F>(args: &BootstrapArgs, timeout: Option<Duration>, run: F) -> Result<PipelineOutput, Failure>
where
    F: FnOnce(&mut dyn Oracle) -> Result<PipelineOutput, cyberrel::pattern::PatternError> + Send,
{
    let listener = std::net::TcpListener::bind(&args.bind)
        .with_context(|| format!("binding {}", args.bind))
        .environment()?;
    listener.set_nonblocking(true).environment()?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().environment()?;
    let queue = OracleQueue::new();
    let app = service::router(queue.clone(), args.ui.as_deref());
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = runtime.spawn(async move {
        let listener = tokio::net::TcpListener::from_std(listener)?;
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                stopped.await.ok();
            })
            .await
    });
    eprintln!("review service listening on http://{}", args.bind);
    let result = std::thread::scope(|s| s.spawn(|| run(&mut Service::new(queue, timeout))).join())
        .map_err(|_| anyhow!("bootstrap thread panicked"))
        .environment()?;
    if args.keep_serving {
        eprintln!("run finished; serving until interrupted");
        runtime.block_on(async { tokio::signal::ctrl_c().await.ok() });
    }
    stop.send(()).ok();
    runtime.block_on(server).environment()?.environment()?;
    result.input()
}

fn write_outputs(out: &Path, output: &PipelineOutput) -> Result<(), Failure> {
    for (relation, state) in &output.states {
        write_file(&out.join("state").join(format!("{}.json", relation.name())), &state.to_json())?;
    }
    let extracted = SeedFile { patterns: Vec::new(), relations: extracted_relations(output.states.values()) };
    let json = serde_json::to_string_pretty(&extracted).expect("relations serialize") + "\n";
    write_file(&out.join("extracted.json"), &json)?;
    for (relation, state) in &output.states {
        println!(
            "{}: {} iterations, {} relations, {} patterns",
            relation,
            state.iteration,
            state.known_relations.len(),
            state.known_patterns.len()
        );
    }
    for relation in &output.skipped {
        println!("{relation}: skipped, no seeds");
    }
    println!("kept {} documents, dropped {}", output.kept.len(), output.dropped.len());
    Ok(())
}

fn relation_file(path: &Path) -> Result<Vec<RelationInstance>, Failure> {
    let file: SeedFile = read_json(path)?;
    Ok(file.relations.into_iter().map(|r| r.into_instance(RelationProvenance::Bootstrap)).collect())
}

pub fn eval(args: &EvalArgs) -> Result<(), Failure> {
    let extracted = relation_file(&args.extracted)?;
    let gold = relation_file(&args.gold)?;
    let labeled = args.labeled.as_deref().map(relation_file).transpose()?;
    let report = evaluate(&extracted, &gold, labeled.as_deref());
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.render_text());
    }
    Ok(())
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

pub fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let gaz = Gazetteers::load_dir(&args.gazetteers).input()?;
    let spec = SynthSpec {
        num_docs: args.num_docs,
        relations_per_doc: args.relations_per_doc,
        noise_sentence_rate: args.noise_rate,
        template_set: args.template_set.clone(),
        rng_seed: args.seed,
    };
    let corpus = generate_corpus(&spec, &gaz).input()?;
    let corpus_dir = args.out.join("corpus");
    write_corpus(&corpus_dir, &corpus.documents).with_context(|| format!("writing {}", corpus_dir.display())).environment()?;
    write_file(&args.out.join("seeds.json"), &pretty(&corpus.seed_file()))?;
    write_file(&args.out.join("gold.json"), &pretty(&corpus.gold_file()))?;
    println!(
        "{} documents, {} planted relations, {} noise sentences",
        corpus.documents.len(),
        corpus.gold.len(),
        corpus.noise_sentences
    );
    Ok(())
}

fn labeled_error(what: impl Display) -> Failure {
    Failure { error: anyhow!("{what}"), environment: false }
}

pub fn train_gate(args: &TrainGateArgs) -> Result<(), Failure> {
    let (docs, gaz) = load_inputs(&args.corpus, args.format, &args.gazetteers)?;
    let labels: BTreeMap<String, bool> = match &args.labels {
        Some(path) => read_json(path)?,
        None => BTreeMap::new(),
    };
    if let Some(id) = labels.keys().find(|id| !docs.iter().any(|d| &d.id == *id)) {
        return Err(labeled_error(format_args!("label for unknown document {id:?}")));
    }
    let data: Vec<_> = docs
        .iter()
        .filter_map(|d| {
            let label = labels.get(&d.id).copied().or(d.relevance_label)?;
            Some((EntityCounts.features(d, &tag_document(d, &gaz)), label))
        })
        .collect();
    let config = TrainConfig { l2: args.l2, epochs: args.epochs, learning_rate: args.learning_rate, threshold: args.threshold };
    let model = train(&data, &config).input()?;
    write_file(&args.out, &pretty(&model))?;
    let correct = data.iter().filter(|(x, y)| model.is_relevant(x) == *y).count();
    println!("trained on {} labeled documents, {} classified correctly", data.len(), correct);
    Ok(())
}

