use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use womgraph::authority::{compute_scores, top_k, Method, RankedList};
use womgraph::campaign::{
    best_promotion_window, coverage_estimate, extract_popular_topics, monthly_activity_profile, profiles_to_tsv,
    ProfileEvent, RankBand,
};
use womgraph::config::Config;
use womgraph::eval::{
    correlation_report, mean_average_precision, ndcg, topic_correlations_to_tsv, topic_mi_vs_correlation, EvalContext,
    RelevanceLabels,
};
use womgraph::graph::{
    build_interaction_graph, degree_distribution, export_graph, parse_edge_list, DegreeMode, ExportFormat,
    InteractionGraph,
};
use womgraph::ingest::{parse_activity_log, GroupActivityLog};
use womgraph::pipeline::{run_campaign, with_workers};
use womgraph::relevance::{build_relatedness_table, Corpus, RelatednessTable, TopicQuery, TopicScorer};
use womgraph::structure::{bowtie_decompose, weakly_connected_components};
use womgraph::synth::{synth_generate, SynthesisParams};
use womgraph::text::TextPipeline;
use womgraph::Error;

#[derive(Parser, Debug)]
#[command(
    name = "womgraph",
    version,
    about = "Find topic-sensitive influencers in online groups"
)]
struct Cli {
    /// Flat key=value config file.
    #[arg(long, global = true, env = "WOMGRAPH_CONFIG")]
    config: Option<PathBuf>,
    /// Activity log (JSON lines).
    #[arg(long, global = true)]
    log: Option<PathBuf>,
    /// Text corpus, one document per line, for the relatedness table.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Precomputed relatedness table (TSV).
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    /// Precomputed interaction graph (edge list).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Topic words.
    #[arg(long, global = true)]
    topic: Option<String>,
    #[arg(long, global = true, default_value = "pagerank")]
    method: Method,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    r: Option<usize>,
    #[arg(long, global = true)]
    th: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file (directory for `campaign`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate an activity log; optionally re-emit it canonically.
    IngestValidate {
        #[arg(long)]
        canonical: bool,
    },
    /// Build the word relatedness table.
    BuildTable,
    /// Relevance and boost of every content item for the topic.
    Relevance,
    /// Build the interaction graph, or its degree histogram.
    Graph {
        #[arg(long)]
        degree: Option<DegreeMode>,
    },
    /// Rank users by authority.
    Rank {
        /// Keep only the best N users.
        #[arg(long)]
        top: Option<usize>,
    },
    /// Bow-tie decomposition.
    Bowtie {
        #[arg(long)]
        per_user: bool,
    },
    /// Weakly connected sub-groups.
    Wcc,
    /// Full campaign plan; writes artifacts into the --out directory.
    Campaign,
    /// Share of members reached by a set of users.
    Coverage {
        /// File with one user id per line.
        #[arg(long)]
        users: PathBuf,
    },
    /// Monthly activity profile per rank band.
    Profile {
        /// Ranking TSV; computed from the graph when absent.
        #[arg(long)]
        ranking: Option<PathBuf>,
        #[arg(long)]
        bands: Option<String>,
        #[arg(long, default_value = "posts")]
        event: String,
    },
    /// Correlation with votes, or MAP/NDCG against labels.
    Eval {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "pagerank,hits,zscore,eigen,betweenness,closeness"
        )]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',', default_value = "10,20,50")]
        ks: Vec<usize>,
        #[arg(long)]
        rank_based: bool,
        /// Graded relevance labels (user<TAB>grade).
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        ranking: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        cutoff: usize,
    },
    /// Popular topics, optionally correlated against the group topic.
    Topics {
        #[arg(long, default_value_t = 20)]
        top_n: usize,
        #[arg(long)]
        correlate: bool,
    },
    /// Generate a synthetic activity log.
    Synth {
        #[arg(long)]
        users: Option<usize>,
        #[arg(long)]
        posts: Option<usize>,
        #[arg(long)]
        strength: Option<f64>,
    },
    /// Export the graph.
    Export {
        #[arg(long, default_value = "edge-list")]
        format: ExportFormat,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(Error::BudgetInfeasible { partial, .. }) = e.downcast_ref::<Error>() {
                eprint!("{}", partial.to_report());
            }
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p).with_context(|| format!("config {}", p.display()))?,
        None => Config::default(),
    };
    if let Some(a) = cli.alpha {
        cfg.alpha = a;
    }
    if let Some(k) = cli.k {
        cfg.k = k;
    }
    if let Some(r) = cli.r {
        cfg.r = r;
    }
    if let Some(th) = cli.th {
        cfg.th = th;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(t) = &cli.topic {
        cfg.group_topic = Some(t.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let ctx = Ctx {
        cli,
        cfg: &cfg,
        pipeline: cfg.text_pipeline()?,
    };
    with_workers(cfg.workers, || ctx.dispatch())?
}

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: &'a Config,
    pipeline: TextPipeline,
}

impl Ctx<'_> {
    fn log(&self) -> Result<GroupActivityLog> {
        let path = self.cli.log.as_ref().context("--log is required")?;
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        parse_activity_log(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
    }

    fn topic_text(&self) -> Result<&str> {
        self.cfg
            .group_topic
            .as_deref()
            .context("--topic (or group_topic in the config) is required")
    }

    fn topic(&self) -> Result<TopicQuery> {
        Ok(TopicQuery::from_text(self.topic_text()?, &self.pipeline)?)
    }

    fn corpus(&self, log: Option<&GroupActivityLog>) -> Result<Corpus> {
        if let Some(path) = &self.cli.corpus {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            return Ok(Corpus::from_reader(BufReader::new(file), &self.pipeline)?);
        }
        match log {
            Some(log) => Ok(Corpus::from_log(log, &self.pipeline)?),
            None => Ok(Corpus::from_log(&self.log()?, &self.pipeline)?),
        }
    }

    fn table(&self, log: Option<&GroupActivityLog>) -> Result<RelatednessTable> {
        if let Some(path) = &self.cli.table {
            return Ok(RelatednessTable::from_tsv(&read(path)?)?);
        }
        let corpus = self.corpus(log)?;
        Ok(build_relatedness_table(
            &corpus,
            self.cfg.min_pair_count,
            self.cfg.top_n_per_word,
        )?)
    }

    /// The graph from `--graph`, or built from the log and topic.
    fn graph(&self, log: Option<&GroupActivityLog>) -> Result<InteractionGraph> {
        if let Some(path) = &self.cli.graph {
            return parse_edge_list(&read(path)?).with_context(|| format!("reading {}", path.display()));
        }
        let owned;
        let log = match log {
            Some(l) => l,
            None => {
                owned = self.log()?;
                &owned
            }
        };
        let table = self.table(Some(log))?;
        let topic = self.topic()?;
        let scorer = TopicScorer::new(&topic, &table, &self.pipeline, self.cfg.alpha)?;
        Ok(build_interaction_graph(log, &scorer, &self.cfg.weights))
    }

    /// Log when given; an empty one otherwise, for graph-only methods.
    fn optional_log(&self) -> Result<GroupActivityLog> {
        if self.cli.log.is_some() {
            return self.log();
        }
        if self.cli.method == Method::ZScore {
            bail!("method zscore needs --log");
        }
        Ok(GroupActivityLog::from_records(std::iter::empty())?)
    }

    fn ranking(&self, graph: &InteractionGraph, log: &GroupActivityLog) -> Result<RankedList> {
        let scores = compute_scores(self.cli.method, graph, log, &self.cfg.authority())?;
        Ok(top_k(&scores, scores.len()))
    }

    fn emit(&self, contents: String) -> Result<()> {
        match &self.cli.out {
            Some(path) => write_atomic(path, contents.as_bytes()),
            None => {
                io::stdout().lock().write_all(contents.as_bytes())?;
                Ok(())
            }
        }
    }

    fn dispatch(&self) -> Result<()> {
        match &self.cli.command {
            Command::IngestValidate { canonical } => {
                let log = self.log()?;
                if *canonical {
                    self.emit(log.to_jsonl())
                } else {
                    self.emit(format!(
                        "users\t{}\ncontents\t{}\nreactions\t{}\n",
                        log.users().len(),
                        log.contents().len(),
                        log.reactions().len()
                    ))
                }
            }
            Command::BuildTable => self.emit(self.table(None)?.to_tsv()),
            Command::Relevance => {
                let log = self.log()?;
                let table = self.table(Some(&log))?;
                let topic = self.topic()?;
                let scorer = TopicScorer::new(&topic, &table, &self.pipeline, self.cfg.alpha)?;
                let mut out = String::from("content\trelevance\tboost\n");
                for (c, (rel, boost)) in log.contents().iter().zip(scorer.score_contents(&log)) {
                    let _ = writeln!(out, "{}\t{rel}\t{boost}", c.content_id);
                }
                self.emit(out)
            }
            Command::Graph { degree } => {
                let graph = self.graph(None)?;
                match degree {
                    Some(mode) => self.emit(degree_distribution(&graph, *mode).to_tsv()),
                    None => self.emit(export_graph(&graph, ExportFormat::EdgeList)),
                }
            }
            Command::Rank { top } => {
                let log = self.optional_log()?;
                let graph = self.graph(Some(&log))?;
                let scores = compute_scores(self.cli.method, &graph, &log, &self.cfg.authority())?;
                self.emit(top_k(&scores, top.unwrap_or(scores.len())).to_tsv())
            }
            Command::Bowtie { per_user } => {
                let graph = self.graph(None)?;
                self.emit(bowtie_decompose(&graph).to_tsv(*per_user))
            }
            Command::Wcc => {
                let graph = self.graph(None)?;
                let mut out = String::from("subgroup\tsize\tmembers\n");
                for g in weakly_connected_components(&graph) {
                    let members: Vec<&str> = g.members().iter().map(|u| u.as_str()).collect();
                    let _ = writeln!(out, "{}\t{}\t{}", g.label(), g.size(), members.join(","));
                }
                self.emit(out)
            }
            Command::Campaign => self.campaign(),
            Command::Coverage { users } => {
                let graph = self.graph(None)?;
                let selected = read(users)?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(womgraph::ingest::UserId::new)
                    .collect::<womgraph::Result<BTreeSet<_>>>()?;
                let c = coverage_estimate(&graph, &selected)?;
                self.emit(format!("selected\t{}\ncoverage\t{c}\n", selected.len()))
            }
            Command::Profile { ranking, bands, event } => {
                let log = self.log()?;
                let ranked = match ranking {
                    Some(p) => RankedList::from_tsv(self.cli.method, &read(p)?)?,
                    None => self.ranking(&self.graph(Some(&log))?, &log)?,
                };
                let bands = match bands {
                    Some(b) => RankBand::parse_list(b)?,
                    None => self.cfg.bands.clone(),
                };
                let event = match event.as_str() {
                    "posts" => ProfileEvent::Posts,
                    "reactions" => ProfileEvent::ReactionsReceived,
                    other => bail!("unknown event `{other}` (posts|reactions)"),
                };
                let profiles = monthly_activity_profile(&log, &ranked, &bands, event)?;
                let months = best_promotion_window(&profiles, self.cfg.promotion_months)?;
                let months: Vec<String> = months.iter().map(u32::to_string).collect();
                self.emit(format!("{}months\t{}\n", profiles_to_tsv(&profiles), months.join("\t")))
            }
            Command::Eval {
                methods,
                ks,
                rank_based,
                labels,
                ranking,
                cutoff,
            } => {
                if let Some(labels) = labels {
                    let labels = RelevanceLabels::from_tsv(&read(labels)?)?;
                    let ranked = match ranking {
                        Some(p) => RankedList::from_tsv(self.cli.method, &read(p)?)?,
                        None => {
                            let log = self.optional_log()?;
                            self.ranking(&self.graph(Some(&log))?, &log)?
                        }
                    };
                    let map = mean_average_precision(&ranked, &labels, *cutoff)?;
                    let nd = ndcg(&ranked, &labels, *cutoff)?;
                    return self.emit(format!("metric\tvalue\nmap\t{map}\nndcg\t{nd}\n"));
                }
                let log = self.log()?;
                let table = self.table(Some(&log))?;
                let topic = self.topic()?;
                let scorer = TopicScorer::new(&topic, &table, &self.pipeline, self.cfg.alpha)?;
                let graph = build_interaction_graph(&log, &scorer, &self.cfg.weights);
                let authority = self.cfg.authority();
                let ctx = EvalContext {
                    log: &log,
                    table: &table,
                    pipeline: &self.pipeline,
                    weights: &self.cfg.weights,
                    alpha: self.cfg.alpha,
                    authority: &authority,
                    rank_based: *rank_based,
                };
                self.emit(correlation_report(&ctx, &graph, &topic, methods, ks)?.to_tsv())
            }
            Command::Topics { top_n, correlate } => {
                let log = self.log()?;
                let popular = extract_popular_topics(&log, &self.pipeline, *top_n);
                if !correlate {
                    let mut out = String::from("topic\tcount\n");
                    for (t, n) in &popular {
                        let _ = writeln!(out, "{t}\t{n}");
                    }
                    return self.emit(out);
                }
                let table = self.table(Some(&log))?;
                let group = self.topic()?;
                let topics = popular
                    .iter()
                    .map(|(t, _)| TopicQuery::new(t.split(' ')))
                    .collect::<womgraph::Result<Vec<_>>>()?;
                let authority = self.cfg.authority();
                let ctx = EvalContext {
                    log: &log,
                    table: &table,
                    pipeline: &self.pipeline,
                    weights: &self.cfg.weights,
                    alpha: self.cfg.alpha,
                    authority: &authority,
                    rank_based: false,
                };
                let rows = topic_mi_vs_correlation(&ctx, &group, &topics, self.cli.method, self.cfg.k)?;
                self.emit(topic_correlations_to_tsv(&rows))
            }
            Command::Synth { users, posts, strength } => {
                let mut p = SynthesisParams {
                    seed: self.cfg.seed,
                    ..SynthesisParams::default()
                };
                if let Some(u) = users {
                    p.n_users = *u;
                }
                if let Some(n) = posts {
                    p.n_posts = *n;
                }
                if let Some(s) = strength {
                    p.pa_strength = *s;
                }
                self.emit(synth_generate(&p)?.to_jsonl())
            }
            Command::Export { format } => self.emit(export_graph(&self.graph(None)?, *format)),
        }
    }

    fn campaign(&self) -> Result<()> {
        let log = self.log()?;
        let corpus = match &self.cli.corpus {
            Some(_) => Some(self.corpus(None)?),
            None => None,
        };
        let artifacts = run_campaign(self.cfg, &log, corpus.as_ref(), self.topic_text()?, self.cli.method)?;
        match &self.cli.out {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for (name, body) in artifacts.files() {
                    write_atomic(&dir.join(name), body.as_bytes())?;
                }
                Ok(())
            }
            None => {
                io::stdout().lock().write_all(artifacts.plan.to_report().as_bytes())?;
                Ok(())
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Write through a temporary file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("writing {}", path.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
