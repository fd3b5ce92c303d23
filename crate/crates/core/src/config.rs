//! Minimal INI reader used by the code and channel configuration files.
//!
//! Lines are `key = value`, `[section]`, blank, or comments starting with
//! `#` or `;`. Every entry keeps its 1-based line number so that callers can
//! report the offending line.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub section: Option<String>,
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse_ini(text: &str) -> Result<Vec<Entry>> {
    let mut section = None;
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::config(Some(line), "unterminated section header"))?
                .trim();
            if name.is_empty() {
                return Err(Error::config(Some(line), "empty section name"));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::config(Some(line), format!("expected `key = value`, got `{trimmed}`")))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::config(Some(line), "missing key"));
        }
        if entries.iter().any(|e| e.key == key && e.section == section) {
            return Err(Error::config(Some(line), format!("duplicate key `{key}`")));
        }
        entries.push(Entry {
            section: section.clone(),
            key,
            value: value.trim().to_string(),
            line,
        });
    }
    Ok(entries)
}

/// Checks that every entry lives in `section` (or no section) and uses one of `keys`.
pub(crate) fn check_keys(entries: &[Entry], section: &str, keys: &[&str]) -> Result<()> {
    for e in entries {
        if let Some(s) = &e.section {
            if s != section {
                return Err(Error::config(
                    Some(e.line),
                    format!("unexpected section `[{s}]` (expected `[{section}]`)"),
                ));
            }
        }
        if !keys.contains(&e.key.as_str()) {
            return Err(Error::config(Some(e.line), format!("unknown key `{}`", e.key)));
        }
    }
    Ok(())
}

pub(crate) fn find<'a>(entries: &'a [Entry], key: &str) -> Option<&'a Entry> {
    entries.iter().find(|e| e.key == key)
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: Some(path.to_path_buf()),
        line: None,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let text = "# comment\n[code]\nmemory = 2\n; other\ngenerators_octal = 7, 5\n";
        let entries = parse_ini(text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].section.as_deref(), Some("code"));
        assert_eq!(entries[1].value, "7, 5");
        assert_eq!(entries[1].line, 5);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_ini("[code]\nmemory 2\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(2), .. }));
        let err = parse_ini("a = 1\na = 2\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(2), .. }));
    }
}
