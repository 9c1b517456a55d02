//! Local paper corpus loading and prompt payload assembly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Paper, Section};
use crate::par::{self, Execution};

pub const CORPUS_EXTENSION: &str = ".paper.json";
pub const DEFAULT_TOKEN_BUDGET: usize = 1500;

pub fn default_keywords() -> Vec<String> {
    ["experiment", "dataset", "data", "evaluation", "benchmark", "setup"]
        .into_iter()
        .map(String::from)
        .collect()
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("corpus directory {0} not found")]
    CorpusNotFound(PathBuf),
    #[error("reading corpus directory {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A corpus file that could not be turned into a [`Paper`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub papers: Vec<Paper>,
    pub skipped: Vec<SkipRecord>,
}

#[derive(Deserialize)]
struct CorpusFile {
    paper_id: String,
    #[serde(default)]
    title: String,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    sections: Vec<Section>,
}

fn parse_corpus_file(path: &Path) -> Result<Paper, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let file: CorpusFile = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    if file.paper_id.trim().is_empty() {
        return Err("empty paper_id".into());
    }
    Ok(Paper {
        paper_id: file.paper_id,
        title: file.title,
        abstract_text: file.abstract_text,
        sections: file.sections,
        source_path: path.display().to_string(),
    })
}

/// Load every `*.paper.json` file under `root` (not recursive), sorted by
/// file name. Unparseable files and duplicate ids land in the skip report.
pub fn load_corpus(root: &Path, exec: Execution) -> Result<Corpus, IngestError> {
    if !root.is_dir() {
        return Err(IngestError::CorpusNotFound(root.to_path_buf()));
    }
    let io_err = |source| IngestError::Io { path: root.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let is_paper = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with(CORPUS_EXTENSION));
        if is_paper && path.is_file() {
            files.push(path);
        }
    }
    files.sort();

    let parsed = par::map(exec, &files, |p| parse_corpus_file(p));
    let mut corpus = Corpus::default();
    let mut seen = std::collections::BTreeSet::new();
    for (path, result) in files.iter().zip(parsed) {
        match result {
            Ok(paper) if !seen.insert(paper.paper_id.clone()) => corpus.skipped.push(SkipRecord {
                path: path.display().to_string(),
                reason: format!("duplicate paper_id {:?}", paper.paper_id),
            }),
            Ok(paper) => corpus.papers.push(paper),
            Err(reason) => {
                tracing::warn!(path = %path.display(), %reason, "skipping corpus file");
                corpus.skipped.push(SkipRecord { path: path.display().to_string(), reason });
            }
        }
    }
    Ok(corpus)
}

/// Sections whose lowercased heading contains any keyword, in paper order.
pub fn select_sections<'a>(paper: &'a Paper, keywords: &[String]) -> Vec<&'a Section> {
    paper
        .sections
        .iter()
        .filter(|s| {
            let heading = s.heading.to_lowercase();
            keywords.iter().any(|k| heading.contains(k.as_str()))
        })
        .collect()
}

/// Word-count based token estimate: `ceil(words * 4 / 3)`.
pub fn estimate_tokens(text: &str) -> usize {
    tokens_for_words(text.split_whitespace().count())
}

fn tokens_for_words(words: usize) -> usize {
    (words * 4).div_ceil(3)
}

/// Largest word count whose estimate fits in `budget` tokens.
pub fn words_within_budget(budget: usize) -> usize {
    budget * 3 / 4
}

/// Cut `text` after its first `max_words` whitespace-delimited words,
/// keeping the original spacing. Words are never split.
pub fn truncate_words(text: &str, max_words: usize) -> &str {
    if max_words == 0 {
        return "";
    }
    let mut count = 0;
    let mut in_word = false;
    for (idx, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if in_word {
                in_word = false;
                if count == max_words {
                    return &text[..idx];
                }
            }
        } else if !in_word {
            in_word = true;
            count += 1;
        }
    }
    text
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    TruncatedSections,
    FullText,
    Agentic,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "truncated" | "truncated_sections" => Ok(Strategy::TruncatedSections),
            "full" | "full_text" => Ok(Strategy::FullText),
            "agentic" => Ok(Strategy::Agentic),
            other => Err(format!("unknown strategy {other:?} (expected truncated|full|agentic)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPayload {
    pub paper_id: String,
    pub strategy: Strategy,
    pub text: String,
    pub estimated_tokens: usize,
}

#[derive(Debug, Clone)]
pub struct PayloadOptions {
    pub budget: usize,
    pub keywords: Vec<String>,
}

impl Default for PayloadOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_TOKEN_BUDGET, keywords: default_keywords() }
    }
}

/// Title and abstract, always sent whole.
pub fn title_and_abstract(paper: &Paper) -> String {
    join_nonempty([paper.title.as_str(), paper.abstract_text.as_str()])
}

fn join_nonempty<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    parts
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub fn render_sections<'a>(sections: impl IntoIterator<Item = &'a Section>) -> String {
    join_nonempty(
        sections
            .into_iter()
            .map(|s| format!("{}\n{}", s.heading, s.body))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str),
    )
}

pub fn build_payload(paper: &Paper, strategy: Strategy, opts: &PayloadOptions) -> PromptPayload {
    assert!(opts.budget > 0, "token budget must be positive");
    let head = title_and_abstract(paper);
    let text = match strategy {
        Strategy::TruncatedSections => {
            let sections = render_sections(select_sections(paper, &opts.keywords));
            let kept = truncate_words(&sections, words_within_budget(opts.budget));
            join_nonempty([head.as_str(), kept])
        }
        Strategy::FullText => join_nonempty([head.as_str(), render_sections(&paper.sections).as_str()]),
        // Section choice happens during extraction; carry the head only.
        Strategy::Agentic => head,
    };
    PromptPayload {
        paper_id: paper.paper_id.clone(),
        strategy,
        estimated_tokens: estimate_tokens(&text),
        text,
    }
}

pub fn build_payloads(
    papers: &[Paper],
    strategy: Strategy,
    opts: &PayloadOptions,
    exec: Execution,
) -> Vec<PromptPayload> {
    par::map(exec, papers, |p| build_payload(p, strategy, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Strategy;
    use proptest::prelude::*;

    fn paper(sections: &[(&str, &str)]) -> Paper {
        Paper {
            paper_id: "p".into(),
            title: "A Title".into(),
            abstract_text: "Short abstract here.".into(),
            sections: sections
                .iter()
                .map(|(h, b)| Section { heading: h.to_string(), body: b.to_string() })
                .collect(),
            source_path: String::new(),
        }
    }

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn estimator_calibration() {
        assert_eq!(estimate_tokens(&words(1125)), 1500);
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("one two three"), 4);
        assert_eq!(estimate_tokens("one"), 2);
        assert_eq!(words_within_budget(1500), 1125);
    }

    #[test]
    fn selects_by_heading_substring() {
        let p = paper(&[("Introduction", "a"), ("Experiments", "b"), ("Conclusion", "c")]);
        let sel = select_sections(&p, &["experiment".to_string()]);
        assert_eq!(sel.iter().map(|s| s.heading.as_str()).collect::<Vec<_>>(), ["Experiments"]);

        let p = paper(&[("Data Description", "x")]);
        assert_eq!(select_sections(&p, &["data".to_string()]).len(), 1);
        assert!(select_sections(&p, &["zzz".to_string()]).is_empty());
    }

    #[test]
    fn truncation_respects_budget() {
        let p = paper(&[("Experiments", &words(1600))]);
        let payload = build_payload(&p, Strategy::TruncatedSections, &PayloadOptions::default());
        let head = title_and_abstract(&p);
        assert!(payload.estimated_tokens - estimate_tokens(&head) <= 1500);
        assert!(payload.text.starts_with("A Title"));
        // the heading counts as one word of the sections portion
        assert!(payload.text.ends_with("w1123"));
    }

    #[test]
    fn short_sections_unmodified() {
        let body = words(75);
        let p = paper(&[("Experiments", &body), ("Related Work", "ImageNet")]);
        let payload = build_payload(&p, Strategy::TruncatedSections, &PayloadOptions::default());
        assert!(payload.text.ends_with(&format!("Experiments\n{body}")));
        assert!(!payload.text.contains("ImageNet"));
    }

    #[test]
    fn full_text_is_untruncated() {
        let p = paper(&[("Intro", &words(3000)), ("Experiments", &words(10))]);
        let payload = build_payload(&p, Strategy::FullText, &PayloadOptions::default());
        assert_eq!(payload.estimated_tokens, estimate_tokens(&payload.text));
        assert_eq!(payload.text.split_whitespace().count(), 2 + 3 + 1 + 3000 + 1 + 10);
    }

    #[test]
    fn no_matching_sections_yields_head_only() {
        let p = paper(&[("Introduction", "text")]);
        let payload = build_payload(&p, Strategy::TruncatedSections, &PayloadOptions::default());
        assert_eq!(payload.text, title_and_abstract(&p));
    }

    #[test]
    fn truncate_keeps_spacing() {
        assert_eq!(truncate_words("a  b\nc d", 3), "a  b\nc");
        assert_eq!(truncate_words("  a b", 1), "  a");
        assert_eq!(truncate_words("a b", 5), "a b");
        assert_eq!(truncate_words("a b", 0), "");
    }

    proptest! {
        #[test]
        fn truncation_never_splits_words(text in "[a-z \n]{0,200}", n in 0usize..40) {
            let cut = truncate_words(&text, n);
            prop_assert!(text.starts_with(cut));
            let kept: Vec<&str> = cut.split_whitespace().collect();
            let all: Vec<&str> = text.split_whitespace().collect();
            prop_assert_eq!(&all[..kept.len()], &kept[..]);
            prop_assert_eq!(kept.len(), n.min(all.len()));
        }

        #[test]
        fn selection_is_subsequence(heads in proptest::collection::vec("[A-Za-z ]{0,12}", 0..8)) {
            let secs: Vec<(&str, &str)> = heads.iter().map(|h| (h.as_str(), "")).collect();
            let p = paper(&secs);
            let sel = select_sections(&p, &default_keywords());
            let mut it = p.sections.iter();
            for s in sel {
                prop_assert!(it.any(|x| std::ptr::eq(x, s)));
            }
        }

        #[test]
        fn payload_budget_invariant(n in 0usize..3000, budget in 1usize..2000) {
            let p = paper(&[("Dataset", &words(n)), ("Setup", "x y z")]);
            let opts = PayloadOptions { budget, keywords: default_keywords() };
            let payload = build_payload(&p, Strategy::TruncatedSections, &opts);
            prop_assert!(payload.estimated_tokens <= estimate_tokens(&title_and_abstract(&p)) + budget);
        }
    }
}
