use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use citerank::corpus::{
    synth_corpus, AffiliationStrategy, CacheEntry, CitationGraph, CoordinateCache, GeographicModel, SynthConfig,
};
use citerank::geo::BinFilter;
use citerank::hon::{build_transition_matrix, HigherOrderGraph, HonConfig, MinSupport, Weighting};
use citerank::pipeline::{
    compare_score_files, geo_stage, hon_stage, ingest_stage, rank_stage, report, run_pipeline, ArtifactLayout,
    GeoConfig, IngestConfig, PipelineConfig, PipelineError, RankConfig,
};

#[derive(Parser)]
#[command(
    name = "citerank",
    version,
    about = "Geographically weighted, higher-order quantum PageRank for citation networks"
)]
struct Cli {
    /// error, warn, info, debug or trace; RUST_LOG overrides.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse papers, resolve institution coordinates and build the citation graph.
    Ingest {
        #[arg(long)]
        papers: PathBuf,
        #[arg(long)]
        coords: Option<PathBuf>,
        /// Query the HTTP geocoder for institutions missing from the cache.
        #[arg(long)]
        geocode: bool,
        #[arg(long, default_value = "first")]
        strategy: AffiliationStrategy,
        #[arg(long, default_value = "artifacts")]
        out: PathBuf,
    },
    /// Distance-binned citation counts, decay fit and institution clusters.
    GeoAnalyze {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        bin_width: f64,
        #[arg(long, default_value = "all")]
        filter: BinFilter,
        /// DBSCAN parameters as `eps_km,min_pts`.
        #[arg(long, value_parser = parse_dbscan)]
        dbscan: Option<(f64, usize)>,
        #[arg(long)]
        fit: bool,
        #[arg(long, default_value = "artifacts")]
        out: PathBuf,
    },
    /// Sample citation chains and build the higher-order network.
    HonBuild {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 100)]
        walks: usize,
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        /// A count, or `inf` to disable higher-order nodes.
        #[arg(long, default_value = "50")]
        min_support: MinSupport,
        /// Damping used to check that the network yields a valid transition matrix.
        #[arg(long, default_value_t = 0.85)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "geographic")]
        weighting: Weighting,
        /// Keep only the most-cited papers.
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long, default_value = "artifacts")]
        out: PathBuf,
    },
    /// Classical and quantum rankings of a higher-order network file.
    Rank {
        /// Higher-order network JSON written by `hon-build`.
        #[arg(long)]
        matrix: PathBuf,
        /// Citation graph JSON, used for the self-citation report.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 0.85)]
        alpha: f64,
        #[arg(long)]
        emit_series: bool,
        #[arg(long, default_value_t = 1e-12)]
        tie_tol: f64,
        #[arg(long, default_value_t = citerank::rank::DEFAULT_MAX_NODES)]
        max_nodes: usize,
        #[arg(long, default_value = "artifacts")]
        out: PathBuf,
    },
    /// Tie groups of one score column against another.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tie_tol: f64,
        #[arg(long)]
        column_a: Option<String>,
        #[arg(long)]
        column_b: Option<String>,
    },
    /// Print the summary of an artifact directory.
    Report {
        #[arg(long, default_value = "artifacts")]
        dir: PathBuf,
    },
    /// Write a synthetic corpus with distance-decaying citations.
    Synth {
        #[arg(long, default_value_t = 500)]
        papers: usize,
        #[arg(long, default_value_t = 50)]
        institutions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        y0: Option<f64>,
        #[arg(long)]
        a1: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long)]
        intensity: Option<f64>,
        /// Directory receiving papers.jsonl and coords.csv.
        #[arg(long, default_value = "synth")]
        out: PathBuf,
    },
    /// Run every stage from a configuration file.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        min_support: Option<MinSupport>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        weighting: Option<Weighting>,
    },
}

fn parse_dbscan(s: &str) -> Result<(f64, usize), String> {
    let (eps, min_pts) = s.split_once(',').ok_or("expected eps_km,min_pts")?;
    let eps: f64 = eps.trim().parse().map_err(|e| format!("eps: {e}"))?;
    let min_pts: usize = min_pts.trim().parse().map_err(|e| format!("min_pts: {e}"))?;
    Ok((eps, min_pts))
}

fn read_graph(path: &PathBuf) -> Result<CitationGraph, PipelineError> {
    let f = File::open(path).map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
    Ok(CitationGraph::read_json(BufReader::new(f))?)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialise"));
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Ingest { papers, coords, geocode, strategy, out } => {
            let cfg = IngestConfig { papers: Some(papers), coords, geocode, strategy, ..Default::default() };
            let (_, report) = ingest_stage(&cfg, 0, &ArtifactLayout::new(out))?;
            print_json(&report);
        }
        Command::GeoAnalyze { graph, bin_width, filter, dbscan, fit, out } => {
            let (eps, min_pts) =
                dbscan.unwrap_or((GeoConfig::default().dbscan_eps_km, GeoConfig::default().dbscan_min_pts));
            let cfg = GeoConfig { bin_width_km: bin_width, dbscan_eps_km: eps, dbscan_min_pts: min_pts, fit };
            let report = geo_stage(&read_graph(&graph)?, &cfg, &[filter], dbscan.is_some(), &ArtifactLayout::new(out))?;
            print_json(&report);
        }
        Command::HonBuild { graph, order, walks, max_len, min_support, alpha, seed, weighting, top_k, out } => {
            let cfg = HonConfig {
                order,
                walks_per_node: walks,
                max_len,
                min_support,
                weighting,
                top_k,
                ..Default::default()
            };
            let (hog, report) = hon_stage(&read_graph(&graph)?, &cfg, seed, &ArtifactLayout::new(out))?;
            build_transition_matrix(&hog, alpha)?.validate()?;
            print_json(&report);
        }
        Command::Rank { matrix, graph, steps, alpha, emit_series, tie_tol, max_nodes, out } => {
            let cfg = RankConfig { alpha, steps, emit_series, tie_tol, max_nodes, ..Default::default() };
            if !(alpha > 0.0 && alpha <= 1.0) || steps == 0 {
                return Err(PipelineError::Config("alpha must lie in (0, 1] and steps be at least 1".into()));
            }
            let f = File::open(&matrix).map_err(|e| PipelineError::Data(format!("{}: {e}", matrix.display())))?;
            let hog = HigherOrderGraph::read_json(BufReader::new(f))?;
            let citations = graph.as_ref().map(read_graph).transpose()?;
            let report = rank_stage(&hog, citations.as_ref(), &cfg, &ArtifactLayout::new(out))?;
            print_json(&report);
        }
        Command::Compare { a, b, tie_tol, column_a, column_b } => {
            if tie_tol.is_nan() || tie_tol < 0.0 {
                return Err(PipelineError::Config("tie-tol must be non-negative".into()));
            }
            let (ids, ties) = compare_score_files(&a, column_a.as_deref(), &b, column_b.as_deref(), tie_tol)?;
            println!(
                "{} tie groups covering {} entries; {} differentiated by the second ranking",
                ties.groups.len(),
                ties.tied_entries(),
                ties.differentiated()
            );
            for g in &ties.groups {
                let members: Vec<&str> = g.members.iter().map(|&i| ids[i].as_str()).collect();
                println!("  score {:.6e}  spread {:.3e}  {}", g.score_a, g.spread_b, members.join(" "));
            }
        }
        Command::Report { dir } => print!("{}", report(&dir)?),
        Command::Synth { papers, institutions, seed, y0, a1, t1, intensity, out } => {
            let d = GeographicModel::default();
            let model = GeographicModel {
                y0: y0.unwrap_or(d.y0),
                a1: a1.unwrap_or(d.a1),
                t1_km: t1.unwrap_or(d.t1_km),
                intensity: intensity.unwrap_or(d.intensity),
            };
            let cfg = SynthConfig { n_papers: papers, n_institutions: institutions, model, seed, ..Default::default() };
            let corpus = synth_corpus(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| PipelineError::Data(format!("{}: {e}", out.display())))?;
            let papers_path = out.join("papers.jsonl");
            let f = File::create(&papers_path)
                .map_err(|e| PipelineError::Data(format!("{}: {e}", papers_path.display())))?;
            corpus
                .write_jsonl(std::io::BufWriter::new(f))
                .map_err(|e| PipelineError::Data(format!("{}: {e}", papers_path.display())))?;
            let cache = CoordinateCache::load(out.join("coords.csv"))?;
            for inst in &corpus.institutions {
                cache.insert(
                    &inst.institution_id,
                    CacheEntry { name: inst.name.clone(), location: inst.location, country: inst.country.clone() },
                );
            }
            cache.persist()?;
            println!("{} papers, {} citations written to {}", corpus.papers.len(), corpus.edge_count(), out.display());
        }
        Command::Pipeline { config, out, seed, resume, alpha, order, min_support, steps, weighting } => {
            let mut cfg = match config {
                Some(path) => PipelineConfig::load(path)?,
                None => PipelineConfig::default(),
            };
            if let Some(v) = out {
                cfg.output_dir = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            cfg.resume |= resume;
            if let Some(v) = alpha {
                cfg.rank.alpha = v;
            }
            if let Some(v) = order {
                cfg.hon.order = v;
            }
            if let Some(v) = min_support {
                cfg.hon.min_support = v;
            }
            if let Some(v) = steps {
                cfg.rank.steps = v;
            }
            if let Some(v) = weighting {
                cfg.hon.weighting = v;
            }
            let manifest = run_pipeline(&cfg)?;
            println!("artifacts written to {}", cfg.output_dir.display());
            for s in &manifest.stages {
                println!("  {:<7} {:?}", s.name, s.status);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log_level).parse_default_env().init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
