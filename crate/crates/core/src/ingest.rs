//! Group activity log model and its line-delimited record format.
//!
//! Each line of a log is a flat JSON object with a `type` field:
//!
//! ```text
//! {"type":"user","id":"u9"}
//! {"type":"post","id":"p1","author":"u1","text":"...","timestamp":1500000000}
//! {"type":"comment","id":"c1","author":"u2","parent":"p1","text":"...","timestamp":1500000100}
//! {"type":"like","user":"u3","target":"p1","timestamp":1500000200}
//! {"type":"like_on_comment","user":"u3","target":"c1","timestamp":1500000300}
//! {"type":"share","user":"u4","target":"p1","timestamp":1500000400}
//! ```
//!
//! Users are registered by `user` records and implicitly by appearing as an
//! author or reactor. A comment record yields both a content item and the
//! paired `comment_reaction` of its author toward the parent post. Record
//! order in the file is irrelevant; the parsed log is stored in canonical
//! order so that `parse(serialize(log)) == log`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Member identifier. Ordered lexicographically; used for all tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        validate_id(&id)?;
        Ok(UserId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for UserId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        UserId::new(s)
    }
}

impl std::borrow::Borrow<str> for UserId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

// Ids end up in tab-separated outputs, so whitespace and control characters
// are rejected.
fn validate_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::InvalidParameter("empty id".into()));
    }
    if id.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(Error::InvalidParameter(format!(
            "id `{}` contains whitespace or control characters",
            id.escape_debug()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContentKind {
    Post,
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentItem {
    pub content_id: String,
    pub author: UserId,
    pub kind: ContentKind,
    /// Parent post, present iff `kind == Comment`.
    pub parent: Option<String>,
    pub text: String,
    pub timestamp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReactionKind {
    LikeOnComment,
    Like,
    CommentReaction,
    Share,
}

impl ReactionKind {
    pub const ALL: [ReactionKind; 4] = [
        ReactionKind::LikeOnComment,
        ReactionKind::Like,
        ReactionKind::CommentReaction,
        ReactionKind::Share,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReactionKind::LikeOnComment => "like_on_comment",
            ReactionKind::Like => "like",
            ReactionKind::CommentReaction => "comment",
            ReactionKind::Share => "share",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reaction {
    pub reactor: UserId,
    pub target: String,
    pub kind: ReactionKind,
    pub timestamp: u64,
    /// For `CommentReaction`: the comment that produced this reaction.
    pub via_comment: Option<String>,
}

/// Validated, canonically ordered activity of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupActivityLog {
    users: BTreeSet<UserId>,
    contents: Vec<ContentItem>,
    reactions: Vec<Reaction>,
    index: HashMap<String, usize>,
}

impl GroupActivityLog {
    pub fn users(&self) -> &BTreeSet<UserId> {
        &self.users
    }

    pub fn contents(&self) -> &[ContentItem] {
        &self.contents
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn content(&self, id: &str) -> Option<&ContentItem> {
        self.index.get(id).map(|&i| &self.contents[i])
    }

    pub fn posts(&self) -> impl Iterator<Item = &ContentItem> {
        self.contents.iter().filter(|c| c.kind == ContentKind::Post)
    }

    /// Author of the content a reaction targets.
    pub fn target_author(&self, reaction: &Reaction) -> &UserId {
        &self.content(&reaction.target).expect("validated target").author
    }

    /// Reactions whose reactor is not the author of the target content.
    pub fn foreign_reactions(&self) -> impl Iterator<Item = &Reaction> {
        self.reactions
            .iter()
            .filter(move |r| &r.reactor != self.target_author(r))
    }

    /// Assemble a log from records, validating referential integrity.
    ///
    /// Line numbers are carried so that every rejection names its record.
    pub fn from_records<I>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Record)>,
    {
        let mut users = BTreeSet::new();
        let mut contents: Vec<(usize, ContentItem)> = Vec::new();
        let mut reactions: Vec<(usize, Reaction)> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();

        let id = |line: usize, s: String| -> Result<UserId> {
            UserId::new(s).map_err(|e| Error::MalformedRecord {
                line,
                reason: e.to_string(),
            })
        };
        let content_id = |line: usize, s: &str| -> Result<()> {
            validate_id(s).map_err(|e| Error::MalformedRecord {
                line,
                reason: e.to_string(),
            })
        };

        for (line, record) in records {
            match record {
                Record::User { id: u } => {
                    users.insert(id(line, u)?);
                }
                Record::Post {
                    id: cid,
                    author,
                    text,
                    timestamp,
                } => {
                    content_id(line, &cid)?;
                    let author = id(line, author)?;
                    users.insert(author.clone());
                    if index.insert(cid.clone(), contents.len()).is_some() {
                        return Err(Error::DuplicateContentId { line, id: cid });
                    }
                    contents.push((
                        line,
                        ContentItem {
                            content_id: cid,
                            author,
                            kind: ContentKind::Post,
                            parent: None,
                            text,
                            timestamp,
                        },
                    ));
                }
                Record::Comment {
                    id: cid,
                    author,
                    parent,
                    text,
                    timestamp,
                } => {
                    content_id(line, &cid)?;
                    let author = id(line, author)?;
                    users.insert(author.clone());
                    if index.insert(cid.clone(), contents.len()).is_some() {
                        return Err(Error::DuplicateContentId { line, id: cid });
                    }
                    reactions.push((
                        line,
                        Reaction {
                            reactor: author.clone(),
                            target: parent.clone(),
                            kind: ReactionKind::CommentReaction,
                            timestamp,
                            via_comment: Some(cid.clone()),
                        },
                    ));
                    contents.push((
                        line,
                        ContentItem {
                            content_id: cid,
                            author,
                            kind: ContentKind::Comment,
                            parent: Some(parent),
                            text,
                            timestamp,
                        },
                    ));
                }
                Record::Like(r) => reactions.push((line, r.into_reaction(line, ReactionKind::Like)?)),
                Record::LikeOnComment(r) => reactions.push((line, r.into_reaction(line, ReactionKind::LikeOnComment)?)),
                Record::Share(r) => reactions.push((line, r.into_reaction(line, ReactionKind::Share)?)),
            }
        }

        for (line, c) in &contents {
            if let Some(parent) = &c.parent {
                match index.get(parent.as_str()).map(|&i| &contents[i].1) {
                    None => {
                        return Err(Error::DanglingReference {
                            line: *line,
                            record: format!("comment `{}`", c.content_id),
                            missing: parent.clone(),
                        })
                    }
                    Some(p) if p.kind != ContentKind::Post => {
                        return Err(Error::InvalidTarget {
                            line: *line,
                            reason: format!("comment `{}` has parent `{}` which is not a post", c.content_id, parent),
                        })
                    }
                    Some(_) => {}
                }
            }
        }

        for (line, r) in &mut reactions {
            let Some(&i) = index.get(r.target.as_str()) else {
                return Err(Error::DanglingReference {
                    line: *line,
                    record: format!("{} by `{}`", r.kind.name(), r.reactor),
                    missing: r.target.clone(),
                });
            };
            let target_kind = contents[i].1.kind;
            let expected = match r.kind {
                ReactionKind::LikeOnComment => ContentKind::Comment,
                _ => ContentKind::Post,
            };
            if target_kind != expected {
                return Err(Error::InvalidTarget {
                    line: *line,
                    reason: format!(
                        "{} must target a {}, `{}` is a {}",
                        r.kind.name(),
                        kind_name(expected),
                        r.target,
                        kind_name(target_kind)
                    ),
                });
            }
            users.insert(r.reactor.clone());
        }

        let mut contents: Vec<ContentItem> = contents.into_iter().map(|(_, c)| c).collect();
        contents.sort_by(|a, b| (a.timestamp, &a.content_id).cmp(&(b.timestamp, &b.content_id)));
        let mut reactions: Vec<Reaction> = reactions.into_iter().map(|(_, r)| r).collect();
        reactions.sort_by(|a, b| reaction_key(a).cmp(&reaction_key(b)));
        let index = contents
            .iter()
            .enumerate()
            .map(|(i, c)| (c.content_id.clone(), i))
            .collect();

        Ok(GroupActivityLog {
            users,
            contents,
            reactions,
            index,
        })
    }

    /// Records in canonical order: users, contents, then reactions that are
    /// not implied by a comment.
    pub fn to_records(&self) -> Vec<Record> {
        let mut out: Vec<Record> = self.users.iter().map(|u| Record::User { id: u.0.clone() }).collect();
        for c in &self.contents {
            out.push(match c.kind {
                ContentKind::Post => Record::Post {
                    id: c.content_id.clone(),
                    author: c.author.0.clone(),
                    text: c.text.clone(),
                    timestamp: c.timestamp,
                },
                ContentKind::Comment => Record::Comment {
                    id: c.content_id.clone(),
                    author: c.author.0.clone(),
                    parent: c.parent.clone().expect("comment has parent"),
                    text: c.text.clone(),
                    timestamp: c.timestamp,
                },
            });
        }
        for r in &self.reactions {
            let rec = ReactionRecord {
                user: r.reactor.0.clone(),
                target: r.target.clone(),
                timestamp: r.timestamp,
            };
            match r.kind {
                ReactionKind::CommentReaction => continue,
                ReactionKind::Like => out.push(Record::Like(rec)),
                ReactionKind::LikeOnComment => out.push(Record::LikeOnComment(rec)),
                ReactionKind::Share => out.push(Record::Share(rec)),
            }
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for rec in self.to_records() {
            serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

fn kind_name(k: ContentKind) -> &'static str {
    match k {
        ContentKind::Post => "post",
        ContentKind::Comment => "comment",
    }
}

fn reaction_key(r: &Reaction) -> (u64, &UserId, &str, ReactionKind, Option<&str>) {
    (
        r.timestamp,
        &r.reactor,
        r.target.as_str(),
        r.kind,
        r.via_comment.as_deref(),
    )
}

/// One line of the activity log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Record {
    User {
        id: String,
    },
    Post {
        id: String,
        author: String,
        text: String,
        timestamp: u64,
    },
    Comment {
        id: String,
        author: String,
        parent: String,
        text: String,
        timestamp: u64,
    },
    Like(ReactionRecord),
    LikeOnComment(ReactionRecord),
    Share(ReactionRecord),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionRecord {
    pub user: String,
    pub target: String,
    pub timestamp: u64,
}

impl ReactionRecord {
    fn into_reaction(self, line: usize, kind: ReactionKind) -> Result<Reaction> {
        let reactor = UserId::new(self.user).map_err(|e| Error::MalformedRecord {
            line,
            reason: e.to_string(),
        })?;
        Ok(Reaction {
            reactor,
            target: self.target,
            kind,
            timestamp: self.timestamp,
            via_comment: None,
        })
    }
}

/// Parse a line-delimited activity log. Blank lines are skipped.
pub fn parse_activity_log<R: BufRead>(reader: R) -> Result<GroupActivityLog> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        records.push((line_no, rec));
    }
    GroupActivityLog::from_records(records)
}

pub fn parse_activity_log_str(src: &str) -> Result<GroupActivityLog> {
    parse_activity_log(src.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"type":"post","id":"p1","author":"u1","text":"hello","timestamp":10}
{"type":"like","user":"u2","target":"p1","timestamp":20}
"#;

    #[test]
    fn minimal_log() {
        let log = parse_activity_log_str(MINIMAL).unwrap();
        assert_eq!(log.users().len(), 2);
        assert_eq!(log.contents().len(), 1);
        assert_eq!(log.reactions().len(), 1);
        assert_eq!(log.reactions()[0].kind, ReactionKind::Like);
    }

    #[test]
    fn dangling_reaction() {
        let src = r#"{"type":"post","id":"p1","author":"u1","text":"x","timestamp":1}
{"type":"share","user":"u2","target":"p99","timestamp":2}"#;
        match parse_activity_log_str(src) {
            Err(Error::DanglingReference { line, missing, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(missing, "p99");
            }
            other => panic!("expected DanglingReference, got {other:?}"),
        }
    }

    #[test]
    fn comment_pairs_with_reaction() {
        let src = r#"{"type":"post","id":"p1","author":"u1","text":"x","timestamp":1}
{"type":"comment","id":"c1","author":"u2","parent":"p1","text":"y","timestamp":5}"#;
        let log = parse_activity_log_str(src).unwrap();
        assert_eq!(log.contents().len(), 2);
        assert_eq!(log.reactions().len(), 1);
        let r = &log.reactions()[0];
        assert_eq!(r.kind, ReactionKind::CommentReaction);
        assert_eq!(r.reactor.as_str(), "u2");
        assert_eq!(r.target, "p1");
        assert_eq!(r.timestamp, 5);
        assert_eq!(r.via_comment.as_deref(), Some("c1"));
    }

    #[test]
    fn duplicate_content() {
        let src = r#"{"type":"post","id":"p1","author":"u1","text":"x","timestamp":1}
{"type":"post","id":"p1","author":"u2","text":"y","timestamp":2}"#;
        assert!(matches!(
            parse_activity_log_str(src),
            Err(Error::DuplicateContentId { line: 2, .. })
        ));
    }

    #[test]
    fn malformed_lines() {
        for (src, bad_line) in [
            ("not json", 1),
            (r#"{"type":"post","id":"p1","author":"u1","text":"x"}"#, 1),
            (
                r#"{"type":"post","id":"p1","author":"u1","text":"x","timestamp":-4}"#,
                1,
            ),
            (r#"{"type":"vote","id":"p1"}"#, 1),
            (
                "{\"type\":\"user\",\"id\":\"u1\"}\n{\"type\":\"user\",\"id\":\"u1\",\"extra\":1}",
                2,
            ),
            (r#"{"type":"user","id":"a b"}"#, 1),
            (r#"{"type":"user","id":""}"#, 1),
        ] {
            match parse_activity_log_str(src) {
                Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, bad_line, "{src}"),
                other => panic!("{src}: expected MalformedRecord, got {other:?}"),
            }
        }
    }

    #[test]
    fn target_kind_checks() {
        let base = r#"{"type":"post","id":"p1","author":"u1","text":"x","timestamp":1}
{"type":"comment","id":"c1","author":"u2","parent":"p1","text":"y","timestamp":2}
"#;
        for bad in [
            r#"{"type":"like_on_comment","user":"u3","target":"p1","timestamp":3}"#,
            r#"{"type":"like","user":"u3","target":"c1","timestamp":3}"#,
            r#"{"type":"share","user":"u3","target":"c1","timestamp":3}"#,
            r#"{"type":"comment","id":"c2","author":"u3","parent":"c1","text":"z","timestamp":3}"#,
        ] {
            let src = format!("{base}{bad}\n");
            assert!(
                matches!(parse_activity_log_str(&src), Err(Error::InvalidTarget { line: 3, .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn comment_with_missing_parent() {
        let src = r#"{"type":"comment","id":"c1","author":"u2","parent":"p7","text":"y","timestamp":2}"#;
        assert!(matches!(
            parse_activity_log_str(src),
            Err(Error::DanglingReference { line: 1, .. })
        ));
    }

    #[test]
    fn order_independent_and_explicit_users() {
        let src = r#"{"type":"like","user":"u2","target":"p1","timestamp":20}
{"type":"user","id":"u9"}
{"type":"post","id":"p1","author":"u1","text":"hello","timestamp":10}"#;
        let log = parse_activity_log_str(src).unwrap();
        let ids: Vec<_> = log.users().iter().map(UserId::as_str).collect();
        assert_eq!(ids, ["u1", "u2", "u9"]);
    }

    #[test]
    fn serialize_golden() {
        let src = r#"{"type":"comment","id":"c1","author":"u2","parent":"p1","text":"re: sql","timestamp":15}
{"type":"like_on_comment","user":"u1","target":"c1","timestamp":30}
{"type":"post","id":"p1","author":"u1","text":"sql joins","timestamp":10}
{"type":"user","id":"u3"}
{"type":"share","user":"u3","target":"p1","timestamp":40}
"#;
        let log = parse_activity_log_str(src).unwrap();
        let expected = r#"{"type":"user","id":"u1"}
{"type":"user","id":"u2"}
{"type":"user","id":"u3"}
{"type":"post","id":"p1","author":"u1","text":"sql joins","timestamp":10}
{"type":"comment","id":"c1","author":"u2","parent":"p1","text":"re: sql","timestamp":15}
{"type":"like_on_comment","user":"u1","target":"c1","timestamp":30}
{"type":"share","user":"u3","target":"p1","timestamp":40}
"#;
        assert_eq!(log.to_jsonl(), expected);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_log() -> impl Strategy<Value = GroupActivityLog> {
            (
                1usize..6,
                0usize..5,
                0usize..5,
                prop::collection::vec((0u8..4, 0usize..8, 0usize..20, 0u64..1000), 0..20),
            )
                .prop_map(|(n_users, n_posts, n_comments, acts)| {
                    let mut recs = Vec::new();
                    let u = |i: usize| format!("u{}", i % n_users);
                    for i in 0..n_users {
                        recs.push(Record::User { id: u(i) });
                    }
                    for p in 0..n_posts {
                        recs.push(Record::Post {
                            id: format!("p{p}"),
                            author: u(p * 7),
                            text: format!("post \"{p}\" é"),
                            timestamp: p as u64,
                        });
                    }
                    if n_posts > 0 {
                        for c in 0..n_comments {
                            recs.push(Record::Comment {
                                id: format!("c{c}"),
                                author: u(c * 3 + 1),
                                parent: format!("p{}", c % n_posts),
                                text: "ok".into(),
                                timestamp: 50 + c as u64,
                            });
                        }
                    }
                    for (kind, who, tgt, ts) in acts {
                        let rr = |target: String| ReactionRecord {
                            user: u(who),
                            target,
                            timestamp: ts,
                        };
                        match kind {
                            0 if n_posts > 0 => recs.push(Record::Like(rr(format!("p{}", tgt % n_posts)))),
                            1 if n_posts > 0 => recs.push(Record::Share(rr(format!("p{}", tgt % n_posts)))),
                            2 if n_posts > 0 && n_comments > 0 => {
                                recs.push(Record::LikeOnComment(rr(format!("c{}", tgt % n_comments))))
                            }
                            _ => {}
                        }
                    }
                    GroupActivityLog::from_records(recs.into_iter().enumerate()).unwrap()
                })
        }

        proptest! {
            #[test]
            fn parse_serialize_roundtrip(log in arb_log()) {
                let text = log.to_jsonl();
                let back = parse_activity_log_str(&text).unwrap();
                prop_assert_eq!(&back, &log);
                prop_assert_eq!(back.to_jsonl(), text);
            }

            #[test]
            fn every_comment_has_one_paired_reaction(log in arb_log()) {
                for c in log.contents().iter().filter(|c| c.kind == ContentKind::Comment) {
                    let n = log.reactions().iter()
                        .filter(|r| r.via_comment.as_deref() == Some(c.content_id.as_str()))
                        .count();
                    prop_assert_eq!(n, 1);
                }
            }
        }
    }
}
