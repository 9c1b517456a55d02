//! Regenerate the replay directory of a fixture tree.
//!
//! ```text
//! cargo run -p pdnet-core --example build_replay -- fixtures
//! ```
//!
//! Reads `corpus/` and `completions/<paper_id>.txt`, runs every extraction
//! strategy against a stand-in backend, and records each prompt/answer
//! pair under `replay/`. Summaries are the first words of each section and
//! the section choice follows the keyword rule, so the agentic replays are
//! deterministic too.

use std::path::{Path, PathBuf};

use pdnet_core::extraction::client::RecordingClient;
use pdnet_core::extraction::{extract_paper, ClientError, CompletionClient, ExtractOptions};
use pdnet_core::ingestion::{default_keywords, load_corpus, select_sections, truncate_words, Strategy};
use pdnet_core::{Execution, Paper};

struct FixtureBackend<'a> {
    paper: &'a Paper,
    completion: String,
}

impl CompletionClient for FixtureBackend<'_> {
    fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        if prompt.contains("Summarize the following section") {
            let section = self
                .paper
                .sections
                .iter()
                .find(|s| prompt.contains(&format!("## Section: {}\n{}", s.heading, s.body)))
                .ok_or_else(|| ClientError::Transport("unknown section".into()))?;
            return Ok(truncate_words(&section.body, 30).to_string());
        }
        if prompt.contains("Answer with a JSON array of section numbers") {
            let keep = select_sections(self.paper, &default_keywords());
            let picked: Vec<usize> = self
                .paper
                .sections
                .iter()
                .enumerate()
                .filter(|(_, s)| keep.iter().any(|k| std::ptr::eq(*k, *s)))
                .map(|(i, _)| i)
                .collect();
            return Ok(serde_json::to_string(&picked).expect("indices serialize"));
        }
        Ok(self.completion.clone())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let replay = root.join("replay");
    if replay.exists() {
        std::fs::remove_dir_all(&replay)?;
    }
    let corpus = load_corpus(&root.join("corpus"), Execution::Sequential)?;
    let mut files = 0;
    for paper in &corpus.papers {
        let completion = read_completion(&root, &paper.paper_id)?;
        let backend = FixtureBackend { paper, completion };
        let client = RecordingClient::new(backend, &replay);
        for strategy in [Strategy::TruncatedSections, Strategy::FullText, Strategy::Agentic] {
            let out = extract_paper(paper, &client, strategy, &ExtractOptions::default())?;
            files += 1 + out.run.agent_steps.len();
        }
    }
    println!("recorded {files} completions for {} papers into {}", corpus.papers.len(), replay.display());
    Ok(())
}

fn read_completion(root: &Path, paper_id: &str) -> std::io::Result<String> {
    std::fs::read_to_string(root.join("completions").join(format!("{paper_id}.txt")))
}
