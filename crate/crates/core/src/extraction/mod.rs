//! Dataset-description extraction through a completion client.

pub mod client;
mod parse;
mod prompt;
mod repair;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use client::{ClientError, CompletionClient, ReplayClient, ScriptedClient};
pub use parse::{parse_descriptions, ParseError};
pub use prompt::{
    render_extraction_prompt, render_prompt, render_select_prompt, render_summarize_prompt,
    template_overhead_tokens, OUTPUT_FIELDS, SUMMARY_WORD_LIMIT,
};
pub use repair::{
    drop_extraneous_lines, fix_commas, fix_escapes, is_strict_json, repair_output, split_top_level,
};

use crate::ingestion::{
    build_payload, estimate_tokens, render_sections, select_sections, title_and_abstract,
    truncate_words, PayloadOptions, Strategy,
};
use crate::model::{DatasetDescription, Paper};
use crate::par::{self, Execution};

/// One intermediate call of the agentic strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentStep {
    pub role: AgentRole,
    pub prompt: String,
    pub raw_output: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Summarizer,
    Selector,
}

/// Provenance of one paper's extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRun {
    pub paper_id: String,
    pub strategy: Strategy,
    pub prompt_text: String,
    pub raw_output: String,
    pub repaired_output: String,
    pub parse_ok: bool,
    pub description_count: usize,
    pub estimated_cost_tokens: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agent_steps: Vec<AgentStep>,
    /// Section indices the selector chose (agentic only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_sections: Option<Vec<usize>>,
}

impl ExtractionRun {
    fn new(paper_id: &str, strategy: Strategy) -> Self {
        Self {
            paper_id: paper_id.to_string(),
            strategy,
            prompt_text: String::new(),
            raw_output: String::new(),
            repaired_output: String::new(),
            parse_ok: false,
            description_count: 0,
            estimated_cost_tokens: 0,
            error: None,
            agent_steps: Vec::new(),
            selected_sections: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("extraction for paper {paper_id} unavailable: {source}")]
    Unavailable {
        paper_id: String,
        #[source]
        source: ClientError,
        /// The run as far as it got; retrying is safe.
        run: Box<ExtractionRun>,
    },
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub payload: PayloadOptions,
    /// Completion attempts per paper while the output fails to parse.
    pub max_attempts: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { payload: PayloadOptions::default(), max_attempts: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct PaperExtraction {
    pub run: ExtractionRun,
    pub descriptions: Vec<DatasetDescription>,
}

fn call(
    client: &dyn CompletionClient,
    prompt: &str,
    run: &mut ExtractionRun,
) -> Result<String, ClientError> {
    run.estimated_cost_tokens += estimate_tokens(prompt);
    client.complete(prompt)
}

fn unavailable(mut run: ExtractionRun, source: ClientError) -> ExtractError {
    run.error = Some(source.to_string());
    ExtractError::Unavailable { paper_id: run.paper_id.clone(), source, run: Box::new(run) }
}

/// Send `prompt`, repair and parse, retrying while parsing fails.
fn complete_and_parse(
    client: &dyn CompletionClient,
    paper_id: &str,
    prompt: String,
    mut run: ExtractionRun,
    max_attempts: usize,
) -> Result<PaperExtraction, ExtractError> {
    run.prompt_text = prompt;
    let mut descriptions = Vec::new();
    for _ in 0..max_attempts.max(1) {
        let raw = match call(client, &run.prompt_text.clone(), &mut run) {
            Ok(raw) => raw,
            Err(e) => return Err(unavailable(run, e)),
        };
        run.repaired_output = repair_output(&raw);
        run.raw_output = raw;
        match parse_descriptions(&run.repaired_output, paper_id) {
            Ok(ds) => {
                run.parse_ok = true;
                run.error = None;
                descriptions = ds;
                break;
            }
            Err(e) => {
                run.parse_ok = false;
                run.error = Some(e.to_string());
            }
        }
    }
    run.description_count = descriptions.len();
    Ok(PaperExtraction { run, descriptions })
}

/// Parse the selector's answer: a JSON array of section indices.
pub fn parse_selection(raw: &str, section_count: usize) -> Option<Vec<usize>> {
    let repaired = repair_output(raw);
    let value: serde_json::Value = serde_json::from_str(&repaired).ok().or_else(|| {
        // the array may share a line with prose
        let start = raw.find('[')?;
        let end = raw[start..].find(']')? + start;
        serde_json::from_str(&raw[start..=end]).ok()
    })?;
    let mut picked: Vec<usize> = value
        .as_array()?
        .iter()
        .filter_map(|v| v.as_u64().or_else(|| v.as_str().and_then(|s| s.trim().parse().ok())))
        .map(|v| v as usize)
        .filter(|&i| i < section_count)
        .collect();
    picked.sort_unstable();
    picked.dedup();
    Some(picked)
}

fn extract_agentic(
    paper: &Paper,
    client: &dyn CompletionClient,
    opts: &ExtractOptions,
) -> Result<PaperExtraction, ExtractError> {
    let mut run = ExtractionRun::new(&paper.paper_id, Strategy::Agentic);
    let mut chosen: Vec<usize> = Vec::new();
    if !paper.sections.is_empty() {
        let mut summaries = Vec::with_capacity(paper.sections.len());
        for (idx, section) in paper.sections.iter().enumerate() {
            let prompt = render_summarize_prompt(&paper.title, section);
            let raw = match call(client, &prompt, &mut run) {
                Ok(raw) => raw,
                Err(e) => return Err(unavailable(run, e)),
            };
            let summary = truncate_words(raw.trim(), SUMMARY_WORD_LIMIT).to_string();
            summaries.push((idx, section.heading.clone(), summary));
            run.agent_steps.push(AgentStep { role: AgentRole::Summarizer, prompt, raw_output: raw });
        }
        let prompt = render_select_prompt(&paper.title, &summaries);
        let raw = match call(client, &prompt, &mut run) {
            Ok(raw) => raw,
            Err(e) => return Err(unavailable(run, e)),
        };
        chosen = parse_selection(&raw, paper.sections.len()).unwrap_or_else(|| {
            tracing::warn!(paper_id = %paper.paper_id, "selector output unusable; falling back to keyword selection");
            let kept = select_sections(paper, &opts.payload.keywords);
            paper
                .sections
                .iter()
                .enumerate()
                .filter(|(_, s)| kept.iter().any(|k| std::ptr::eq(*k, *s)))
                .map(|(i, _)| i)
                .collect()
        });
        run.agent_steps.push(AgentStep { role: AgentRole::Selector, prompt, raw_output: raw });
    }
    let head = title_and_abstract(paper);
    let body = render_sections(chosen.iter().map(|&i| &paper.sections[i]));
    let text = [head, body].into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>().join("\n\n");
    run.selected_sections = Some(chosen);
    let prompt = render_extraction_prompt(&text);
    complete_and_parse(client, &paper.paper_id, prompt, run, opts.max_attempts)
}

/// Extract dataset descriptions from one paper.
pub fn extract_paper(
    paper: &Paper,
    client: &dyn CompletionClient,
    strategy: Strategy,
    opts: &ExtractOptions,
) -> Result<PaperExtraction, ExtractError> {
    match strategy {
        Strategy::Agentic => extract_agentic(paper, client, opts),
        Strategy::TruncatedSections | Strategy::FullText => {
            let payload = build_payload(paper, strategy, &opts.payload);
            let run = ExtractionRun::new(&paper.paper_id, strategy);
            complete_and_parse(client, &paper.paper_id, render_prompt(&payload), run, opts.max_attempts)
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CorpusExtraction {
    /// One run per paper, in corpus order.
    pub runs: Vec<ExtractionRun>,
    pub descriptions: Vec<DatasetDescription>,
    /// Papers whose backend was unavailable (their runs are in `runs`).
    pub unavailable: Vec<String>,
}

/// Extract every paper, at most `parallelism` at a time (0 = pool default).
pub fn extract_corpus(
    papers: &[Paper],
    client: &dyn CompletionClient,
    strategy: Strategy,
    opts: &ExtractOptions,
    parallelism: usize,
    exec: Execution,
) -> CorpusExtraction {
    let results = par::with_threads(parallelism, || {
        par::map(exec, papers, |p| extract_paper(p, client, strategy, opts))
    });
    let mut out = CorpusExtraction::default();
    for result in results {
        match result {
            Ok(PaperExtraction { run, descriptions }) => {
                out.runs.push(run);
                out.descriptions.extend(descriptions);
            }
            Err(ExtractError::Unavailable { paper_id, source, run }) => {
                tracing::warn!(%paper_id, error = %source, "extraction unavailable");
                out.unavailable.push(paper_id);
                out.runs.push(*run);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Section;

    fn paper(sections: &[(&str, &str)]) -> Paper {
        Paper {
            paper_id: "2401.00001".into(),
            title: "Graph Things".into(),
            abstract_text: "We study graphs.".into(),
            sections: sections
                .iter()
                .map(|(h, b)| Section { heading: h.to_string(), body: b.to_string() })
                .collect(),
            source_path: String::new(),
        }
    }

    #[test]
    fn truncated_single_call() {
        let p = paper(&[("Experiments", "We use Cora and CiteSeer.")]);
        let client = ScriptedClient::constant(
            "Here you go:\n[{\"dataset name\": \"Cora\"},\n{\"dataset name\": \"CiteSeer\",}]",
        );
        let out = extract_paper(&p, &client, Strategy::TruncatedSections, &ExtractOptions::default()).unwrap();
        assert_eq!(client.calls().len(), 1);
        assert!(out.run.parse_ok);
        assert_eq!(out.descriptions.len(), 2);
        assert_eq!(out.run.description_count, 2);
        assert!(out.run.prompt_text.contains("We use Cora"));
        assert_eq!(out.run.estimated_cost_tokens, estimate_tokens(&out.run.prompt_text));
        assert!(is_strict_json(&out.run.repaired_output));
    }

    #[test]
    fn related_work_only_mention() {
        let p = paper(&[("Related Work", "Prior work used ImageNet."), ("Conclusion", "Done.")]);
        let client = ScriptedClient::constant("[]").rule("ImageNet", "[{\"dataset name\": \"ImageNet\"}]");
        let out = extract_paper(&p, &client, Strategy::TruncatedSections, &ExtractOptions::default()).unwrap();
        assert!(!out.run.prompt_text.contains("ImageNet"));
        assert!(out.descriptions.is_empty());
        assert!(out.run.parse_ok);
    }

    #[test]
    fn agentic_flow() {
        let p = paper(&[("Related Work", "Prior work used ImageNet."), ("Method", "We propose X.")]);
        let client = ScriptedClient::constant("[]")
            .rule("Summarize the following section", "A short summary.")
            .rule("Answer with a JSON array of section numbers", "Sections: [0]")
            .rule("Prior work used ImageNet", "[{\"dataset name\": \"ImageNet\"}]");
        let out = extract_paper(&p, &client, Strategy::Agentic, &ExtractOptions::default()).unwrap();
        // two summaries, one selection, one extraction
        assert_eq!(client.calls().len(), 4);
        assert_eq!(out.run.agent_steps.len(), 3);
        assert_eq!(out.run.selected_sections, Some(vec![0]));
        assert_eq!(out.descriptions.len(), 1);
        let total: usize = client.calls().iter().map(|c| estimate_tokens(c)).sum();
        assert_eq!(out.run.estimated_cost_tokens, total);
    }

    #[test]
    fn agentic_selector_fallback() {
        let p = paper(&[("Intro", "a"), ("Experimental Setup", "b")]);
        let client = ScriptedClient::constant("[]")
            .rule("Summarize the following section", "s")
            .rule("Answer with a JSON array of section numbers", "I think the second one.");
        let out = extract_paper(&p, &client, Strategy::Agentic, &ExtractOptions::default()).unwrap();
        assert_eq!(out.run.selected_sections, Some(vec![1]));
    }

    #[test]
    fn empty_sections_paper() {
        let p = paper(&[]);
        let client = ScriptedClient::constant("[]");
        for strategy in [Strategy::TruncatedSections, Strategy::Agentic] {
            let out = extract_paper(&p, &client, strategy, &ExtractOptions::default()).unwrap();
            assert!(out.run.prompt_text.contains("Graph Things\n\nWe study graphs."));
            assert!(out.run.parse_ok);
        }
    }

    #[test]
    fn transport_failure_is_retriable_error() {
        let p = paper(&[("Data", "x")]);
        let err = extract_paper(&p, &ScriptedClient::unavailable(), Strategy::TruncatedSections, &ExtractOptions::default())
            .unwrap_err();
        let ExtractError::Unavailable { run, .. } = err;
        assert!(!run.parse_ok);
        assert!(run.error.is_some());
    }

    #[test]
    fn parse_failure_recorded_after_retries() {
        let p = paper(&[("Data", "x")]);
        let client = ScriptedClient::constant("I could not find any datasets.");
        let opts = ExtractOptions { max_attempts: 3, ..ExtractOptions::default() };
        let out = extract_paper(&p, &client, Strategy::TruncatedSections, &opts).unwrap();
        assert_eq!(client.calls().len(), 3);
        assert!(!out.run.parse_ok);
        assert_eq!(out.run.description_count, 0);
        assert!(out.descriptions.is_empty());
    }

    #[test]
    fn corpus_extraction_keeps_order() {
        let papers: Vec<Paper> = (0..8)
            .map(|i| Paper { paper_id: format!("p{i}"), ..paper(&[("Data", &format!("uses D{i}"))]) })
            .collect();
        let mut client = ScriptedClient::constant("[]");
        for i in 0..8 {
            client = client.rule(format!("uses D{i}"), format!("{{\"dataset name\": \"D{i}\"}}"));
        }
        let out = extract_corpus(&papers, &client, Strategy::TruncatedSections, &ExtractOptions::default(), 3, Execution::Parallel);
        assert_eq!(out.runs.iter().map(|r| r.paper_id.as_str()).collect::<Vec<_>>(),
                   papers.iter().map(|p| p.paper_id.as_str()).collect::<Vec<_>>());
        assert_eq!(out.descriptions.len(), 8);
        assert_eq!(out.descriptions[5].description_id, "p5#0");
    }

    #[test]
    fn selection_parsing() {
        assert_eq!(parse_selection("[2, 0, 2, 9]", 3), Some(vec![0, 2]));
        assert_eq!(parse_selection("Answer:\n[\"1\"]", 3), Some(vec![1]));
        assert_eq!(parse_selection("none", 3), None);
    }
}
