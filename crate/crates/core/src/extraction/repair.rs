//! Repairs for the three recurring defects in model-emitted JSON: stray
//! prose lines, invalid escape sequences, and trailing or missing commas.
//!
//! The repairs run in that fixed order; comma repair relies on the line
//! structure left by the first two steps.

/// Repair `raw`. Input that already parses as strict JSON is returned
/// unchanged. The result may still be unparseable.
pub fn repair_output(raw: &str) -> String {
    if is_strict_json(raw) {
        return raw.to_string();
    }
    let text = drop_extraneous_lines(raw);
    let text = fix_escapes(&text);
    let text = fix_commas(&text);
    wrap_value_stream(text)
}

pub fn is_strict_json(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text).is_ok()
}

fn keeps_line(line: &str) -> bool {
    matches!(line.trim_start().chars().next(), Some('{' | '}' | '"' | '[' | ']'))
}

/// Drop every line whose first non-blank character cannot start or close
/// a JSON object, array, or member.
pub fn drop_extraneous_lines(text: &str) -> String {
    text.lines().filter(|l| keeps_line(l)).collect::<Vec<_>>().join("\n")
}

/// Inside string literals, double any backslash that does not begin a
/// valid escape and escape raw control characters.
pub fn fix_escapes(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len() + 8);
    let mut in_string = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !in_string {
            if c == '"' {
                in_string = true;
            }
            out.push(c);
            i += 1;
            continue;
        }
        match c {
            '"' => {
                in_string = false;
                out.push(c);
                i += 1;
            }
            '\\' => match chars.get(i + 1) {
                Some(&n @ ('"' | '\\' | '/' | 'b' | 'f' | 'n' | 'r' | 't')) => {
                    out.push('\\');
                    out.push(n);
                    i += 2;
                }
                Some('u') if chars.len() >= i + 6 && chars[i + 2..i + 6].iter().all(char::is_ascii_hexdigit) => {
                    out.extend(&chars[i..i + 6]);
                    i += 6;
                }
                _ => {
                    out.push_str("\\\\");
                    i += 1;
                }
            },
            '\n' => {
                out.push_str("\\n");
                i += 1;
            }
            '\r' => {
                out.push_str("\\r");
                i += 1;
            }
            '\t' => {
                out.push_str("\\t");
                i += 1;
            }
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
                i += 1;
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

/// Remove commas directly before `}`/`]` and add commas between a line
/// that ends a value and a following line that starts a member or object.
pub fn fix_commas(text: &str) -> String {
    let without_trailing = remove_trailing_commas(text);
    let lines: Vec<&str> = without_trailing.lines().collect();
    let mut out = String::with_capacity(without_trailing.len() + 8);
    for (i, line) in lines.iter().enumerate() {
        out.push_str(line);
        if let Some(next) = lines.get(i + 1) {
            if ends_value(line) && starts_member(next) {
                out.push(',');
            }
            out.push('\n');
        }
    }
    out
}

fn ends_value(line: &str) -> bool {
    let t = line.trim_end();
    t.ends_with(['"', '}', ']'])
        || t.ends_with(|c: char| c.is_ascii_digit())
        || t.ends_with("true")
        || t.ends_with("false")
        || t.ends_with("null")
}

fn starts_member(line: &str) -> bool {
    matches!(line.trim_start().chars().next(), Some('"' | '{'))
}

fn remove_trailing_commas(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            out.push(c);
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            ',' => {
                let next = chars[i + 1..].iter().find(|c| !c.is_whitespace() && **c != ',');
                if !matches!(next, Some('}' | ']')) {
                    out.push(c);
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// If `text` is a sequence of two or more strict JSON values, join them
/// into one array.
fn wrap_value_stream(text: String) -> String {
    if is_strict_json(&text) {
        return text;
    }
    match split_top_level(&text) {
        Ok(spans) if spans.len() >= 2 && spans.iter().all(|s| is_strict_json(s)) => {
            format!("[\n{}\n]", spans.join(",\n"))
        }
        _ => text,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitError {
    pub offset: usize,
    pub message: &'static str,
}

/// Split a stream of top-level objects/arrays by bracket balancing outside
/// string literals. Whitespace and commas between values are skipped.
pub fn split_top_level(text: &str) -> Result<Vec<&str>, SplitError> {
    let mut spans = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' if depth > 0 => in_string = true,
            '{' | '[' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            '}' | ']' => {
                if depth == 0 {
                    return Err(SplitError { offset: i, message: "unbalanced closing bracket" });
                }
                depth -= 1;
                if depth == 0 {
                    spans.push(&text[start..=i]);
                }
            }
            c if depth == 0 && !(c.is_whitespace() || c == ',') => {
                return Err(SplitError { offset: i, message: "unexpected text between values" });
            }
            _ => {}
        }
    }
    if depth != 0 || in_string {
        return Err(SplitError { offset: text.len(), message: "unterminated value" });
    }
    Ok(spans)
}
