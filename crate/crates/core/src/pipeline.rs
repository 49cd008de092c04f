//! End-to-end campaign run: relatedness table, topical graph, authority
//! ranking, reinforced plan and promotion months.

use crate::authority::{compute_scores, top_k, Method, RankedList, ScoreVector};
use crate::campaign::{
    best_promotion_window, monthly_activity_profile, profiles_to_tsv, reinforced_selection, CampaignPlan, ProfileEvent,
};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::{build_interaction_graph, export_graph, ExportFormat, InteractionGraph};
use crate::ingest::GroupActivityLog;
use crate::relevance::{build_relatedness_table, Corpus, RelatednessTable, TopicQuery, TopicScorer};

/// Everything a campaign run produces, already rendered where it is text.
#[derive(Debug, Clone)]
pub struct CampaignArtifacts {
    pub table: RelatednessTable,
    pub graph: InteractionGraph,
    pub scores: ScoreVector,
    pub ranking: RankedList,
    pub plan: CampaignPlan,
    pub profile_tsv: String,
}

impl CampaignArtifacts {
    /// `(file name, contents)` pairs in a fixed order.
    pub fn files(&self) -> Vec<(&'static str, String)> {
        vec![
            ("table.tsv", self.table.to_tsv()),
            ("graph.tsv", export_graph(&self.graph, ExportFormat::EdgeList)),
            ("scores.tsv", self.ranking.to_tsv()),
            ("plan.txt", self.plan.to_report()),
            ("profile.tsv", self.profile_tsv.clone()),
        ]
    }
}

/// Run `f` on a pool of `workers` threads (0 = runtime default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Full pipeline. The relatedness table comes from `corpus` when given,
/// otherwise from the log's own contents.
pub fn run_campaign(
    config: &Config,
    log: &GroupActivityLog,
    corpus: Option<&Corpus>,
    topic: &str,
    method: Method,
) -> Result<CampaignArtifacts> {
    config.validate()?;
    with_workers(config.workers, || run_inner(config, log, corpus, topic, method))?
}

fn run_inner(
    config: &Config,
    log: &GroupActivityLog,
    corpus: Option<&Corpus>,
    topic: &str,
    method: Method,
) -> Result<CampaignArtifacts> {
    let pipeline = config.text_pipeline()?;
    let owned;
    let corpus = match corpus {
        Some(c) => c,
        None => {
            owned = Corpus::from_log(log, &pipeline)?;
            &owned
        }
    };
    let table = build_relatedness_table(corpus, config.min_pair_count, config.top_n_per_word)?;
    let query = TopicQuery::from_text(topic, &pipeline)?;
    let scorer = TopicScorer::new(&query, &table, &pipeline, config.alpha)?;
    let graph = build_interaction_graph(log, &scorer, &config.weights);
    let scores = compute_scores(method, &graph, log, &config.authority())?;
    let ranking = top_k(&scores, scores.len());
    let mut plan = reinforced_selection(&graph, &scores, &config.reinforcement()?)?;
    let profiles = monthly_activity_profile(log, &ranking, &config.bands, ProfileEvent::Posts)?;
    plan.recommended_months = best_promotion_window(&profiles, config.promotion_months)?;
    Ok(CampaignArtifacts {
        table,
        graph,
        scores,
        ranking,
        plan,
        profile_tsv: profiles_to_tsv(&profiles),
    })
}
