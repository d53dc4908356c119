//! Plain `key = value` configuration blocks.
//!
//! One assignment per line; blank lines and lines starting with `#` are
//! ignored; trailing `# ...` comments are stripped. Keys are lowercase
//! identifiers (`[a-z0-9_]+`, dashes are normalized to underscores).
//! A key may appear at most once per block.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A parsed value with the 1-based line it came from (0 for command-line values).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, Entry>,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = KeyValues::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = normalize_key(key);
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Config { line, msg: format!("malformed key `{}`", key) });
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(Error::Config { line, msg: format!("empty value for key `{key}`") });
            }
            if let Some(prev) = out.entries.get(&key) {
                return Err(Error::Config {
                    line,
                    msg: format!("duplicate key `{key}` (first set on line {}, again on line {line})", prev.line),
                });
            }
            out.entries.insert(key, Entry { value: value.to_string(), line });
        }
        Ok(out)
    }

    /// Insert or override a value (used for command-line flags).
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(normalize_key(key), Entry { value: value.into(), line: 0 });
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn remove(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Entry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merge `other` on top of `self`; values in `other` win.
    pub fn overlay(&mut self, other: &KeyValues) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    /// Parse `key` with `FromStr`, reporting the source line on failure.
    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| self.error_at(key, format!("cannot parse `{}` for key `{key}`", e.value))),
        }
    }

    /// Config error attributed to the line `key` was set on.
    pub fn error_at(&self, key: &str, msg: impl Into<String>) -> Error {
        let msg = msg.into();
        match self.entries.get(key) {
            Some(e) if e.line > 0 => Error::Config { line: e.line, msg },
            _ => Error::ConfigGeneral(msg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let kv = KeyValues::parse("# header\nfamily = rademacher  # trailing\n\n master-seed=7\n").unwrap();
        assert_eq!(kv.value("family"), Some("rademacher"));
        assert_eq!(kv.get("master_seed").unwrap().line, 4);
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let err = KeyValues::parse("n = 8\nr = 3\nn = 9\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn malformed_line_is_rejected() {
        let err = KeyValues::parse("n 8\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
    }

    #[test]
    fn overlay_prefers_flags() {
        let mut kv = KeyValues::parse("n = 8\n").unwrap();
        let mut flags = KeyValues::new();
        flags.set("n", "16");
        kv.overlay(&flags);
        assert_eq!(kv.parse_value::<usize>("n").unwrap(), Some(16));
    }
}
