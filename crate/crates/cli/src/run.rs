use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use meshsuggest_core::eval::{
    apply_date_file, compare, format_report, format_significance, resolve_dataset, run_pipeline,
    score, EvalError, PipelineConfig, Qrels, Run, RunMethod,
};
use meshsuggest_core::http::{RecordingTransport, ReplayTransport, ReqwestTransport, Transport};
use meshsuggest_core::pubmed::{Clock, FakeClock, PubmedClient, SystemClock};
use meshsuggest_core::suggest::{LoadError, Method, ResourceSpec};
use meshsuggest_core::{MethodRegistry, Resources};
use serde_json::{json, Map, Value};

use crate::args::Args;
use crate::UsageError;

const HTTP_TIMEOUT: Duration = Duration::from_secs(60);
/// Contact address sent when replaying without --email; replay ignores it.
const REPLAY_EMAIL: &str = "replay@localhost";

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!(EvalError::MissingFile(format!("{what} {}", path.display())));
    }
    Ok(())
}

/// The HTTP layer chosen by --replay / --record, with the recorder kept so
/// its cassette can be saved once the run is over.
struct Network {
    transport: Arc<dyn Transport>,
    recorder: Option<(Arc<RecordingTransport<ReqwestTransport>>, PathBuf)>,
    clock: Arc<dyn Clock>,
    offline: bool,
}

impl Network {
    fn from_args(args: &Args) -> Result<Self> {
        if let Some(path) = &args.replay {
            require_file(path, "cassette")?;
            let replay = ReplayTransport::from_file(path)
                .with_context(|| format!("loading cassette {}", path.display()))?;
            return Ok(Self {
                transport: Arc::new(replay),
                recorder: None,
                clock: Arc::new(FakeClock::new()),
                offline: true,
            });
        }
        let live = ReqwestTransport::new(HTTP_TIMEOUT).context("creating HTTP client")?;
        if let Some(path) = &args.record {
            let rec = Arc::new(RecordingTransport::new(live));
            return Ok(Self {
                transport: rec.clone(),
                recorder: Some((rec, path.clone())),
                clock: Arc::new(SystemClock::new()),
                offline: false,
            });
        }
        Ok(Self {
            transport: Arc::new(live),
            recorder: None,
            clock: Arc::new(SystemClock::new()),
            offline: false,
        })
    }

    fn save(&self) -> Result<()> {
        if let Some((rec, path)) = &self.recorder {
            rec.cassette()
                .save(path)
                .with_context(|| format!("writing cassette {}", path.display()))?;
            info!("recorded cassette to {}", path.display());
        }
        Ok(())
    }
}

fn encoder_config(args: &Args) -> Map<String, Value> {
    let mut config = Map::new();
    if let Some(t) = &args.tokenizer_name_or_path {
        config.insert("tokenizer_name_or_path".into(), json!(t));
    }
    if let Some(n) = args.q_max_len {
        config.insert("q_max_len".into(), json!(n));
    }
    if let Some(n) = args.p_max_len {
        config.insert("p_max_len".into(), json!(n));
    }
    config
}

fn resource_spec(args: &Args, mesh_file: &Path) -> ResourceSpec {
    ResourceSpec {
        mesh_file: mesh_file.to_path_buf(),
        mesh_encoding: args.mesh_encoding.clone(),
        model: args.model_dir.clone(),
        semantic_model_path: args.semantic_model_path.clone(),
        metamap: args.metamap.clone(),
        encoder_config: encoder_config(args),
        tau: args.tau,
    }
}

/// Keeps only what `method` uses, so unrelated flags cost nothing and a
/// missing one is a usage error.
fn narrow(spec: ResourceSpec, method: &RunMethod) -> Result<ResourceSpec> {
    let m = match method {
        RunMethod::Original => {
            return Ok(ResourceSpec {
                mesh_file: spec.mesh_file,
                ..ResourceSpec::default()
            })
        }
        RunMethod::Suggest(m) => m,
    };
    if let Some(field) = spec.missing_for(m) {
        let flag = if field == "model" { "model_dir" } else { field };
        return Err(usage(format!("--{flag} is required for {m}")));
    }
    let neural = matches!(
        m,
        Method::AtomicBert | Method::FragmentBert | Method::SemanticBert
    );
    Ok(ResourceSpec {
        mesh_encoding: spec.mesh_encoding.filter(|_| neural),
        model: spec.model.filter(|_| neural),
        semantic_model_path: spec
            .semantic_model_path
            .filter(|_| *m == Method::SemanticBert),
        metamap: spec.metamap.filter(|_| *m == Method::MetaMap),
        ..spec
    })
}

fn load_resources(spec: &ResourceSpec, transport: Arc<dyn Transport>) -> Result<Resources> {
    spec.load(transport).map_err(|e| match e {
        LoadError::MissingFile { what, path } => {
            EvalError::MissingFile(format!("{what} {}", path.display())).into()
        }
        other => other.into(),
    })
}

pub fn suggest(args: &Args) -> Result<ExitCode> {
    let method_name = args
        .method
        .as_deref()
        .ok_or_else(|| usage("--method is required"))?;
    let dataset = args
        .dataset
        .as_deref()
        .ok_or_else(|| usage("--dataset is required"))?;
    let output = args
        .output_file
        .as_deref()
        .ok_or_else(|| usage("--output_file is required"))?;
    let mesh_file = args
        .mesh_file
        .as_deref()
        .ok_or_else(|| usage("--mesh_file is required"))?;
    if args.depth == 0 || args.interpolation_depth == 0 || args.depth > args.interpolation_depth {
        return Err(usage(format!(
            "need 1 <= --depth ({}) <= --interpolation_depth ({})",
            args.depth, args.interpolation_depth
        )));
    }
    let method = RunMethod::parse(method_name).map_err(|e| usage(e.to_string()))?;
    let registry = MethodRegistry::new();
    if let RunMethod::Suggest(m) = &method {
        if !registry.resolves(m) {
            return Err(usage(format!(
                "unknown method {m}; choose one of Original, {}",
                registry.names().join(", ")
            )));
        }
    }
    if args.replay.is_none() && args.email.as_deref().unwrap_or("").trim().is_empty() {
        return Err(usage("--email is required when querying PubMed"));
    }
    let email = match args.email.as_deref().map(str::trim) {
        Some(e) if !e.is_empty() => e.to_string(),
        _ => REPLAY_EMAIL.to_string(),
    };

    let source = resolve_dataset(dataset, args.data_dir.as_deref())?;
    let set = source.load_topics()?;
    for w in &set.warnings {
        warn!("{w}");
    }
    let mut topics = set.topics;
    if let Some(path) = &args.date_file {
        apply_date_file(&mut topics, path)?;
    }

    let spec = narrow(resource_spec(args, mesh_file), &method)?;
    let net = Network::from_args(args)?;
    let pubmed = Arc::new(PubmedClient::from_env(
        net.transport.clone(),
        net.clock.clone(),
    ));
    let resources =
        load_resources(&spec, net.transport.clone())?.with_pubmed(pubmed.clone(), &email);
    let vocab = resources.vocab();

    let config = PipelineConfig {
        depth: args.depth,
        interpolation_depth: args.interpolation_depth,
        email,
    };
    let out = run_pipeline(&topics, &method, &registry, &resources, &pubmed, &config);
    out.write(output)
        .with_context(|| format!("writing {}", output.display()))?;
    let meta = json!({
        "method": method.name(),
        "dataset": dataset,
        "mesh_edition": vocab.edition(),
        "mesh_terms": vocab.len(),
        "depth": args.depth,
        "interpolation_depth": args.interpolation_depth,
        "tau": args.tau,
        "offline": net.offline,
        "topics": out.outcomes.len(),
        "succeeded": out.succeeded(),
        "failed": out.outcomes.iter().filter(|o| !o.succeeded())
            .map(|o| json!({"topic": o.topic, "error": o.error})).collect::<Vec<_>>(),
        "skipped": set.warnings,
    });
    let meta_path = output.with_extension("meta.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")
        .with_context(|| format!("writing {}", meta_path.display()))?;
    net.save()?;

    if out.succeeded() == 0 {
        bail!(EvalError::AllTopicsFailed(out.failed()));
    }
    eprintln!(
        "{}: {} topics retrieved, {} failed; run written to {}",
        method.name(),
        out.succeeded(),
        out.failed(),
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn evaluate(args: &Args) -> Result<ExitCode> {
    let run_path = args
        .output_file
        .as_deref()
        .ok_or_else(|| usage("--output_file is required with --evaluate_run"))?;
    let qrel_path = args
        .qrel_file
        .as_deref()
        .ok_or_else(|| usage("--qrel_file is required with --evaluate_run"))?;
    if args.comparisons == 0 {
        return Err(usage("--comparisons must be at least 1"));
    }
    require_file(run_path, "run")?;
    require_file(qrel_path, "qrels")?;
    let qrels = Qrels::load(qrel_path)?;
    let evaluation = score(&Run::load(run_path)?, &qrels)?;
    print!("{}", format_report(&evaluation));
    if let Some(base_path) = &args.baseline_run {
        require_file(base_path, "baseline run")?;
        let baseline = score(&Run::load(base_path)?, &qrels)?;
        print!(
            "{}",
            format_significance(&compare(&evaluation, &baseline, args.comparisons))
        );
    }
    Ok(ExitCode::SUCCESS)
}
