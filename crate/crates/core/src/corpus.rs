//! Article corpora: loading, keyphrase filtering, truncation and gazetteer
//! mention extraction.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{EntityType, Error, Result};

/// Default number of leading words kept per article.
pub const DEFAULT_WORD_BUDGET: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub article_id: String,
    pub source: String,
    pub publish_date: NaiveDate,
    pub title: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mentions: Vec<String>,
}

#[derive(Deserialize)]
struct RawArticle {
    article_id: String,
    source: String,
    publish_date: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    text: String,
    #[serde(default)]
    mentions: Vec<String>,
}

/// Parses `YYYY-MM-DD`, also accepting a trailing time component
/// (`2021-01-05T10:00:00Z`, `2021-01-05 10:00:00`).
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    let head = s.split(['T', ' ']).next().unwrap_or(s);
    NaiveDate::parse_from_str(head, "%Y-%m-%d").ok()
}

impl TryFrom<RawArticle> for ArticleRecord {
    type Error = String;

    fn try_from(raw: RawArticle) -> std::result::Result<Self, String> {
        let publish_date =
            parse_date(&raw.publish_date).ok_or_else(|| format!("invalid publish_date `{}`", raw.publish_date))?;
        Ok(ArticleRecord {
            article_id: raw.article_id,
            source: raw.source,
            publish_date,
            title: raw.title,
            text: raw.text,
            mentions: raw.mentions,
        })
    }
}

/// OR-query over lowercase phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyphraseQuery {
    phrases: Vec<String>,
}

impl KeyphraseQuery {
    pub fn new<I, S>(phrases: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let phrases: Vec<String> = phrases.into_iter().map(|p| p.as_ref().trim().to_lowercase()).collect();
        if phrases.is_empty() {
            return Err(Error::Invalid("keyphrase query has no phrases".into()));
        }
        if phrases.iter().any(|p| p.is_empty()) {
            return Err(Error::Invalid("keyphrase query contains an empty phrase".into()));
        }
        Ok(KeyphraseQuery { phrases })
    }

    /// One phrase per line; blank lines and `#` comments are ignored and
    /// surrounding double quotes are stripped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let phrases: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.trim_matches('"'))
            .collect();
        KeyphraseQuery::new(phrases)
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    /// Substring match on lowercased `title + " " + text`.
    pub fn matches(&self, article: &ArticleRecord) -> bool {
        let haystack = format!("{} {}", article.title, article.text).to_lowercase();
        self.phrases.iter().any(|p| haystack.contains(p.as_str()))
    }
}

/// Articles read from a corpus file plus the number of lines that failed to
/// parse.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub articles: Vec<ArticleRecord>,
    pub malformed: usize,
}

/// Reads a JSON Lines corpus in file order. Malformed lines are counted and
/// skipped. When `query` is given, only matching articles are kept.
pub fn load_articles(path: impl AsRef<Path>, query: Option<&KeyphraseQuery>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut corpus = Corpus::default();
    let mut parsed = 0usize;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str::<RawArticle>(&line)
            .map_err(|e| e.to_string())
            .and_then(ArticleRecord::try_from);
        match record {
            Ok(article) => {
                parsed += 1;
                if query.is_none_or(|q| q.matches(&article)) {
                    corpus.articles.push(article);
                }
            }
            Err(_) => corpus.malformed += 1,
        }
    }
    if parsed == 0 {
        return Err(Error::EmptyCorpus {
            path: path.to_path_buf(),
            skipped: corpus.malformed,
        });
    }
    Ok(corpus)
}

/// Keeps the first `budget` whitespace-delimited tokens of the body text.
/// Text already within budget is returned untouched.
pub fn truncate_article(article: &ArticleRecord, budget: usize) -> ArticleRecord {
    assert!(budget >= 1, "word budget must be positive");
    let mut out = article.clone();
    let mut tokens = article.text.split_whitespace();
    let kept: Vec<&str> = tokens.by_ref().take(budget).collect();
    if tokens.next().is_some() {
        out.text = kept.join(" ");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub name: String,
    pub aliases: BTreeSet<String>,
    pub entity_type: EntityType,
}

impl EntityRecord {
    pub fn new<I, S>(name: impl Into<String>, aliases: I, entity_type: EntityType) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let mut aliases: BTreeSet<String> = aliases
            .into_iter()
            .map(Into::into)
            .filter(|a: &String| !a.trim().is_empty())
            .collect();
        aliases.insert(name.clone());
        EntityRecord {
            name,
            aliases,
            entity_type,
        }
    }
}

/// Gazetteer of named entities with a case-insensitive alias lookup.
#[derive(Debug, Clone, Default)]
pub struct EntityIndex {
    records: Vec<EntityRecord>,
    by_alias: HashMap<String, usize>,
    // first lowercase word -> aliases starting with it, longest first
    by_first_word: HashMap<String, Vec<(String, usize)>>,
}

impl EntityIndex {
    pub fn new(records: Vec<EntityRecord>) -> Self {
        let mut by_alias = HashMap::new();
        let mut by_first_word: HashMap<String, Vec<(String, usize)>> = HashMap::new();
        for (i, rec) in records.iter().enumerate() {
            for alias in &rec.aliases {
                let lower = alias.to_lowercase();
                by_alias.entry(lower.clone()).or_insert(i);
                if let Some(first) = lower.split_whitespace().next() {
                    let entry = by_first_word.entry(first.to_string()).or_default();
                    if !entry.iter().any(|(a, _)| *a == lower) {
                        entry.push((lower.clone(), i));
                    }
                }
            }
        }
        for list in by_first_word.values_mut() {
            list.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        }
        EntityIndex {
            records,
            by_alias,
            by_first_word,
        }
    }

    /// Loads a CSV with header `name,aliases,type`; aliases are `|`-separated.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let mut records = Vec::new();
        for (i, row) in reader.records().enumerate() {
            let row = row?;
            let line = i + 2;
            let name = row.get(0).unwrap_or("").to_string();
            if name.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty entity name".into(),
                });
            }
            let aliases = row.get(1).unwrap_or("").split('|').map(str::trim);
            let entity_type = row
                .get(2)
                .unwrap_or("")
                .parse::<EntityType>()
                .map_err(|message| Error::Parse { line, message })?;
            records.push(EntityRecord::new(name, aliases, entity_type));
        }
        Ok(EntityIndex::new(records))
    }

    pub fn records(&self) -> &[EntityRecord] {
        &self.records
    }

    pub fn lookup(&self, alias: &str) -> Option<&EntityRecord> {
        self.by_alias
            .get(&alias.trim().to_lowercase())
            .map(|&i| &self.records[i])
    }

    pub fn type_of(&self, alias: &str) -> Option<EntityType> {
        self.lookup(alias).map(|r| r.entity_type)
    }
}

/// A gazetteer hit inside the lowercased `title + " " + text` haystack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MentionSpan {
    pub start: usize,
    pub end: usize,
    pub alias: String,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn at_word_boundary(text: &str, pos: usize) -> bool {
    text[..pos].chars().next_back().is_none_or(|c| !is_word_char(c))
}

fn ends_at_word_boundary(text: &str, end: usize) -> bool {
    text[end..].chars().next().is_none_or(|c| !is_word_char(c))
}

/// The haystack that mention extraction scans.
pub fn mention_haystack(article: &ArticleRecord) -> String {
    format!("{} {}", article.title, article.text).to_lowercase()
}

/// Non-overlapping alias spans, scanning left to right and taking the
/// longest alias at each word start.
pub fn extract_mention_spans(haystack: &str, index: &EntityIndex) -> Vec<MentionSpan> {
    let mut spans = Vec::new();
    let mut pos = 0;
    while pos < haystack.len() {
        let c = haystack[pos..].chars().next().unwrap();
        if !is_word_char(c) || !at_word_boundary(haystack, pos) {
            pos += c.len_utf8();
            continue;
        }
        let word_end = haystack[pos..]
            .char_indices()
            .find(|&(_, ch)| !is_word_char(ch))
            .map_or(haystack.len(), |(i, _)| pos + i);
        let word = &haystack[pos..word_end];
        let hit = index.by_first_word.get(word).and_then(|cands| {
            cands.iter().find(|(alias, _)| {
                haystack[pos..].starts_with(alias.as_str()) && ends_at_word_boundary(haystack, pos + alias.len())
            })
        });
        match hit {
            Some((alias, rec)) => {
                let end = pos + alias.len();
                let original = index.records[*rec]
                    .aliases
                    .iter()
                    .find(|a| a.to_lowercase() == *alias)
                    .cloned()
                    .unwrap_or_else(|| alias.clone());
                spans.push(MentionSpan {
                    start: pos,
                    end,
                    alias: original,
                });
                pos = end;
            }
            None => pos = word_end,
        }
    }
    spans
}

/// Mentions for one article. Pre-extracted mentions win; otherwise the
/// gazetteer is matched against title and text, deduplicated in order of
/// first occurrence.
pub fn extract_mentions(article: &ArticleRecord, index: &EntityIndex) -> Vec<String> {
    if !article.mentions.is_empty() {
        return article.mentions.clone();
    }
    let haystack = mention_haystack(article);
    let mut seen = HashSet::new();
    extract_mention_spans(&haystack, index)
        .into_iter()
        .filter_map(|s| seen.insert(s.alias.clone()).then_some(s.alias))
        .collect()
}

/// [`extract_mentions`] over a whole corpus, in parallel, preserving order.
pub fn extract_all(articles: &[ArticleRecord], index: &EntityIndex) -> Vec<Vec<String>> {
    articles.par_iter().map(|a| extract_mentions(a, index)).collect()
}
