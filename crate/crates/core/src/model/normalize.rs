//! Identity-key normalization for dataset names and URLs.
//!
//! Normalized keys are derived on demand and never written back into the
//! raw description fields.

use std::collections::BTreeSet;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("name {0:?} is empty after normalization")]
    NormalizationEmpty(String),
    #[error("cannot parse {raw:?} as a URL: {reason}")]
    UrlParseError { raw: String, reason: String },
}

/// Lowercase, NFC, collapse whitespace, drop hyphens and underscores.
pub fn normalize_name(raw: &str) -> Result<String, NormalizeError> {
    let composed: String = raw.nfc().collect::<String>().to_lowercase();
    let stripped: String = composed.chars().filter(|c| *c != '-' && *c != '_').collect();
    let key = stripped.split_whitespace().collect::<Vec<_>>().join(" ");
    if key.is_empty() {
        return Err(NormalizeError::NormalizationEmpty(raw.to_string()));
    }
    Ok(key)
}

/// Reduce a URL to `host[:port][/path][?query]`.
///
/// The scheme, a leading `www.`, trailing slashes and the fragment are
/// dropped; the query string is kept. Scheme-less input is accepted.
pub fn normalize_url(raw: &str) -> Result<String, NormalizeError> {
    let fail = |reason: &str| NormalizeError::UrlParseError {
        raw: raw.to_string(),
        reason: reason.to_string(),
    };
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.chars().any(char::is_whitespace) {
        return Err(fail("empty or contains whitespace"));
    }
    let candidate = if trimmed.contains("://") {
        trimmed.to_string()
    } else {
        format!("http://{trimmed}")
    };
    let parsed = Url::parse(&candidate).map_err(|e| fail(&e.to_string()))?;
    let host = parsed
        .host_str()
        .ok_or_else(|| fail("no host"))?
        .to_lowercase();
    if !host.contains('.') && host != "localhost" {
        return Err(fail("host is not a domain name"));
    }
    let host = host.strip_prefix("www.").unwrap_or(&host).to_string();
    if host.is_empty() {
        return Err(fail("no host"));
    }

    let mut key = host;
    if let Some(port) = parsed.port() {
        key.push(':');
        key.push_str(&port.to_string());
    }
    let path = parsed.path().trim_end_matches('/');
    key.push_str(path);
    if let Some(query) = parsed.query().filter(|q| !q.is_empty()) {
        key.push('?');
        key.push_str(query);
    }
    Ok(key)
}

/// Host part of a normalized URL key (port included).
pub fn url_host(key: &str) -> &str {
    let end = key.find(['/', '?']).unwrap_or(key.len());
    &key[..end]
}

/// Number of non-empty path segments of a normalized URL key.
pub fn url_path_depth(key: &str) -> usize {
    let rest = &key[url_host(key).len()..];
    let path = rest.split('?').next().unwrap_or("");
    path.split('/').filter(|s| !s.is_empty()).count()
}

/// A URL key is generic when it points at the front page of a data
/// warehouse host, e.g. `kaggle.com`.
pub fn is_generic_url(key: &str, warehouse_hosts: &BTreeSet<String>) -> bool {
    let host = url_host(key);
    let bare_host = host.split(':').next().unwrap_or(host);
    (warehouse_hosts.contains(host) || warehouse_hosts.contains(bare_host))
        && url_path_depth(key) == 0
}

/// Warehouse hosts shipped with the crate, one per line.
pub const DEFAULT_WAREHOUSE_HOSTS: &str = include_str!("../../data/warehouse_hosts.txt");

/// Parse a plain-text host list: one host per line, `#` starts a comment.
pub fn parse_host_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let l = l.to_lowercase();
            l.strip_prefix("www.").map(str::to_string).unwrap_or(l)
        })
        .collect()
}

pub fn default_warehouse_hosts() -> BTreeSet<String> {
    parse_host_list(DEFAULT_WAREHOUSE_HOSTS)
}
