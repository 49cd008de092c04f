//! Seeded synthetic activity logs.
//!
//! A small pool of authors writes the posts; everybody else only reacts.
//! Authors join one by one as the run progresses. Post authorship and
//! reaction targets are drawn by preferential attachment among the authors
//! present so far: an author is picked with probability proportional to
//! `(count + c) ^ strength`, where `count` is the number of posts written
//! (for authorship) or reactions received (for reactions) and `c` is
//! `attractiveness` times the mean of that count per author. Post months
//! follow the seasonality weights and reactions arrive within three days of
//! their post.

use chrono::{Datelike, NaiveDate};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{GroupActivityLog, ReactionRecord, Record};

#[derive(Debug, Clone, PartialEq)]
pub struct TopicMix {
    pub name: String,
    pub words: Vec<String>,
    pub weight: f64,
}

impl TopicMix {
    pub fn new(name: &str, words: &[&str], weight: f64) -> Self {
        TopicMix {
            name: name.to_string(),
            words: words.iter().map(|w| w.to_string()).collect(),
            weight,
        }
    }
}

const FILLER: &[&str] = &[
    "help", "problem", "code", "error", "please", "thanks", "question", "work", "need", "example", "issue", "solution",
    "idea", "project", "start", "learn", "share", "good", "best", "simple",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisParams {
    pub n_users: usize,
    pub n_posts: usize,
    /// Mean reactions per post (likes, comments, shares, likes on comments).
    pub reactions_per_post: f64,
    /// Preferential-attachment exponent; 0 is uniform.
    pub pa_strength: f64,
    /// Weight of a newly joined author, as a multiple of the mean count per
    /// author. Larger values thin the tail of the degree distribution.
    pub attractiveness: f64,
    /// React-only members per author.
    pub react_only_ratio: f64,
    /// Probability that a reaction comes from an author rather than from
    /// a member drawn uniformly from the whole group.
    pub author_reaction_share: f64,
    pub comment_fraction: f64,
    pub share_fraction: f64,
    pub like_on_comment_fraction: f64,
    pub topics: Vec<TopicMix>,
    /// Topic words per post; the rest of the text is filler.
    pub topic_words_per_post: usize,
    pub filler_words_per_post: usize,
    /// Month weights, January first; must sum to 1.
    pub seasonality: [f64; 12],
    pub start_year: i32,
    pub years: u32,
    pub seed: u64,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        SynthesisParams {
            n_users: 5000,
            n_posts: 2000,
            reactions_per_post: 2.5,
            pa_strength: 1.0,
            attractiveness: 3.0,
            react_only_ratio: 9.0,
            author_reaction_share: 0.3,
            comment_fraction: 0.25,
            share_fraction: 0.05,
            like_on_comment_fraction: 0.1,
            topics: vec![
                TopicMix::new("java", &["java", "jvm", "spring", "maven", "thread", "class"], 0.5),
                TopicMix::new(
                    "database",
                    &["sql", "database", "query", "index", "join", "schema"],
                    0.3,
                ),
                TopicMix::new("web", &["html", "css", "javascript", "browser", "server"], 0.2),
            ],
            topic_words_per_post: 3,
            filler_words_per_post: 4,
            seasonality: [1.0 / 12.0; 12],
            start_year: 2018,
            years: 3,
            seed: 42,
        }
    }
}

impl SynthesisParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_users < 2 {
            return bad(format!("n_users must be >= 2, got {}", self.n_users));
        }
        let sum: f64 = self.seasonality.iter().sum();
        if self.seasonality.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return bad(format!("seasonality weights must be >= 0 and sum to 1, sum is {sum}"));
        }
        for (name, v) in [
            ("reactions_per_post", self.reactions_per_post),
            ("pa_strength", self.pa_strength),
            ("attractiveness", self.attractiveness),
            ("react_only_ratio", self.react_only_ratio),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.author_reaction_share) {
            return bad(format!(
                "author_reaction_share must be in [0, 1], got {}",
                self.author_reaction_share
            ));
        }
        let fr = [
            self.comment_fraction,
            self.share_fraction,
            self.like_on_comment_fraction,
        ];
        if fr.iter().any(|f| !(*f >= 0.0)) || fr.iter().sum::<f64>() > 1.0 {
            return bad("reaction fractions must be >= 0 and sum to <= 1".into());
        }
        if self.topics.is_empty()
            || self.topics.iter().any(|t| t.words.is_empty() || !(t.weight >= 0.0))
            || self.topics.iter().all(|t| t.weight == 0.0)
        {
            return bad("topic mixture needs nonempty word lists and positive total weight".into());
        }
        if self.years == 0 {
            return bad("years must be >= 1".into());
        }
        Ok(())
    }

    pub fn author_count(&self) -> usize {
        let a = (self.n_users as f64 / (1.0 + self.react_only_ratio)).round() as usize;
        a.clamp(1, self.n_users)
    }
}

/// Preferential picker over a fixed population with growing counts.
struct Attachment {
    counts: Vec<u64>,
    eligible: Vec<bool>,
    strength: f64,
    offset: f64,
}

impl Attachment {
    /// `offset` is the attractiveness of a newcomer with no events yet.
    fn new(n: usize, strength: f64, offset: f64) -> Self {
        Attachment {
            counts: vec![0; n],
            eligible: vec![false; n],
            strength,
            offset: offset.max(1.0),
        }
    }

    fn weight(&self, i: usize) -> f64 {
        if self.eligible[i] {
            (self.counts[i] as f64 + self.offset).powf(self.strength)
        } else {
            0.0
        }
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        let total: f64 = (0..self.counts.len()).map(|i| self.weight(i)).sum();
        if total <= 0.0 {
            return None;
        }
        let mut x = rng.gen::<f64>() * total;
        let mut last = None;
        for i in 0..self.counts.len() {
            let w = self.weight(i);
            if w > 0.0 {
                last = Some(i);
                if x < w {
                    return Some(i);
                }
                x -= w;
            }
        }
        last
    }
}

fn days_in_month(year: i32, month: u32) -> u32 {
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    };
    next.expect("valid date").pred_opt().expect("valid date").day()
}

pub fn user_id(i: usize) -> String {
    format!("u{i:05}")
}

/// Generate a log; identical params give identical logs.
pub fn synth_generate(params: &SynthesisParams) -> Result<GroupActivityLog> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_users;
    let n_authors = params.author_count();

    let mut user_order: Vec<usize> = (0..n).collect();
    user_order.shuffle(&mut rng);
    let authors: Vec<usize> = user_order[..n_authors].to_vec();

    let month_dist = WeightedIndex::new(params.seasonality).expect("validated seasonality");
    let topic_dist = WeightedIndex::new(params.topics.iter().map(|t| t.weight)).expect("validated topics");

    let mut records: Vec<Record> = (0..n).map(|i| Record::User { id: user_id(i) }).collect();

    let text = |rng: &mut ChaCha8Rng| -> String {
        let topic = &params.topics[topic_dist.sample(rng)];
        let mut words: Vec<&str> = Vec::new();
        for _ in 0..params.topic_words_per_post {
            words.push(topic.words.choose(rng).expect("nonempty"));
        }
        for _ in 0..params.filler_words_per_post {
            words.push(FILLER.choose(rng).expect("nonempty"));
        }
        words.shuffle(rng);
        words.join(" ")
    };

    let mut comments: Vec<(String, u64)> = Vec::new();
    // The author pool grows over the run: each post comes from a newcomer
    // with the probability that spreads the remaining authors evenly over
    // the remaining posts, otherwise from an active author.
    // Newcomers start with a multiple of the mean count, so with strength 1
    // the counts grow a power-law tail instead of piling onto the first few.
    let per_author = |total: f64| params.attractiveness * total / n_authors.min(params.n_posts.max(1)) as f64;
    let total_reactions = params.n_posts as f64 * params.reactions_per_post;
    let mut authorship = Attachment::new(n_authors, params.pa_strength, per_author(params.n_posts as f64));
    let mut popularity = Attachment::new(n_authors, params.pa_strength, per_author(total_reactions));
    let mut posts_of: Vec<Vec<(String, u64)>> = vec![Vec::new(); n_authors];
    let mut active = 0;
    let mut owed = 0.0;
    for p in 0..params.n_posts {
        let joins = active < n_authors
            && (active == 0 || rng.gen::<f64>() < (n_authors - active) as f64 / (params.n_posts - p) as f64);
        let a = if joins {
            active += 1;
            authorship.eligible[active - 1] = true;
            active - 1
        } else {
            authorship.pick(&mut rng).expect("active authors exist")
        };
        authorship.counts[a] += 1;
        popularity.eligible[a] = true;
        let year = params.start_year + rng.gen_range(0..params.years) as i32;
        let month = month_dist.sample(&mut rng) as u32 + 1;
        let day = rng.gen_range(1..=days_in_month(year, month));
        let date = NaiveDate::from_ymd_opt(year, month, day).expect("valid date");
        let ts = date.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp() as u64 + rng.gen_range(0..86_400);
        let id = format!("p{p:06}");
        records.push(Record::Post {
            id: id.clone(),
            author: user_id(authors[a]),
            text: text(&mut rng),
            timestamp: ts,
        });
        posts_of[a].push((id, ts));

        // reactions arriving while this post is the newest
        owed += params.reactions_per_post;
        while owed >= 1.0 {
            owed -= 1.0;
            let t = popularity.pick(&mut rng).expect("some author has posts");
            let author = authors[t];
            let (post_id, post_ts) = posts_of[t]
                .choose(&mut rng)
                .expect("eligible authors have posts")
                .clone();
            let mut reactor = if n_authors > 1 && rng.gen::<f64>() < params.author_reaction_share {
                authors[rng.gen_range(0..n_authors)]
            } else {
                rng.gen_range(0..n)
            };
            if reactor == author {
                reactor = (reactor + 1 + rng.gen_range(0..n - 1)) % n;
            }
            let ts = post_ts + rng.gen_range(0..3 * 86_400);
            let roll: f64 = rng.gen();
            let rr = |target: String| ReactionRecord {
                user: user_id(reactor),
                target,
                timestamp: ts,
            };
            if roll < params.comment_fraction {
                let id = format!("c{:06}", comments.len());
                records.push(Record::Comment {
                    id: id.clone(),
                    author: user_id(reactor),
                    parent: post_id,
                    text: text(&mut rng),
                    timestamp: ts,
                });
                comments.push((id, ts));
            } else if roll < params.comment_fraction + params.share_fraction {
                records.push(Record::Share(rr(post_id)));
            } else if roll < params.comment_fraction + params.share_fraction + params.like_on_comment_fraction
                && !comments.is_empty()
            {
                let (cid, cts) = comments.choose(&mut rng).expect("nonempty").clone();
                records.push(Record::LikeOnComment(ReactionRecord {
                    user: user_id(reactor),
                    target: cid,
                    timestamp: ts.max(cts),
                }));
                continue;
            } else {
                records.push(Record::Like(rr(post_id)));
            }
            popularity.counts[t] += 1;
        }
    }

    GroupActivityLog::from_records(records.into_iter().enumerate().map(|(i, r)| (i + 1, r)))
}
