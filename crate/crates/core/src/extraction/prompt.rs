//! Fixed prompt templates.

use crate::ingestion::{estimate_tokens, PromptPayload};
use crate::model::Section;

/// JSON keys the model is asked to produce, one object per dataset.
pub const OUTPUT_FIELDS: [&str; 13] = [
    "paper id",
    "paper title",
    "dataset name",
    "dataset summary",
    "data type",
    "task",
    "location",
    "time",
    "scale",
    "dataset provider",
    "dataset url",
    "publicly available",
    "other info",
];

const ROLE: &str = "You are a computer science researcher. You read academic papers carefully \
and record which datasets each paper uses in its own work.";

const TASK: &str = "## Task Requirements\n\
Identify every dataset that the paper uses (for training, evaluation, benchmarking or analysis). \
Ignore datasets that are only mentioned in passing, for example in related work. \
A paper may involve multiple datasets: generate a separate JSON description for each dataset.";

fn output_spec() -> String {
    let mut spec = String::from(
        "## Output Format\n\
Answer with JSON only, no commentary. Emit one JSON object per dataset, each with exactly these fields:\n{\n",
    );
    for (i, field) in OUTPUT_FIELDS.iter().enumerate() {
        let comma = if i + 1 < OUTPUT_FIELDS.len() { "," } else { "" };
        spec.push_str(&format!("  \"{field}\": \"...\"{comma}\n"));
    }
    spec.push_str(
        "}\nUse null for any field the paper does not state. \
If several datasets are used, return a JSON array of such objects.",
    );
    spec
}

fn prompt_prefix() -> String {
    format!("{ROLE}\n\n## Paper Information\n")
}

fn prompt_suffix() -> String {
    format!("\n\n{TASK}\n\n{}\n", output_spec())
}

/// Render the extraction prompt around the payload's paper text.
pub fn render_prompt(payload: &PromptPayload) -> String {
    render_extraction_prompt(&payload.text)
}

pub fn render_extraction_prompt(paper_information: &str) -> String {
    format!("{}{}{}", prompt_prefix(), paper_information, prompt_suffix())
}

/// Estimated tokens contributed by the template alone.
pub fn template_overhead_tokens() -> usize {
    estimate_tokens(&prompt_prefix()) + estimate_tokens(&prompt_suffix())
}

pub const SUMMARY_WORD_LIMIT: usize = 50;

pub fn render_summarize_prompt(paper_title: &str, section: &Section) -> String {
    format!(
        "{ROLE}\n\nSummarize the following section of the paper \"{paper_title}\" in at most \
{SUMMARY_WORD_LIMIT} words. Mention any datasets the section uses or describes.\n\n\
## Section: {}\n{}\n\nAnswer with the summary only.\n",
        section.heading, section.body
    )
}

pub fn render_select_prompt(paper_title: &str, summaries: &[(usize, String, String)]) -> String {
    let mut listing = String::new();
    for (idx, heading, summary) in summaries {
        listing.push_str(&format!("[{idx}] {heading}: {summary}\n"));
    }
    format!(
        "{ROLE}\n\nBelow are numbered section summaries of the paper \"{paper_title}\". \
Select the sections that likely describe datasets the paper actually uses.\n\n{listing}\n\
Answer with a JSON array of section numbers only, for example [1, 3].\n"
    )
}
