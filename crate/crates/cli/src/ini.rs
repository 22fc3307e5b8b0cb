//! Strict reading of INI documents.
//!
//! Grammar: `[section]` headers, `key = value` lines, and comment lines
//! starting with `;` or `#`. Values may be quoted. Every key must sit inside
//! a section; sections and keys may each appear once; and every key must be
//! consumed by the reader, so misspelt keys are reported instead of ignored.

use std::collections::BTreeSet;
use std::str::FromStr;

use ini::{Ini, ParseOption};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let opt = ParseOption {
            enabled_quote: true,
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| CliError::config(format!("INI syntax: {e}")))?;
        let mut sections: Vec<Section> = Vec::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(CliError::config(format!("key `{key}` appears before any [section]")));
                }
                continue;
            };
            if sections.iter().any(|s| s.name == name) {
                return Err(CliError::config(format!("section [{name}] appears twice")));
            }
            let mut entries: Vec<(String, String)> = Vec::new();
            for (key, value) in props.iter() {
                if entries.iter().any(|(k, _)| k == key) {
                    return Err(CliError::config(format!("key `{key}` appears twice in [{name}]")));
                }
                entries.push((key.to_string(), value.trim().to_string()));
            }
            sections.push(Section {
                name: name.to_string(),
                entries,
            });
        }
        Ok(Document { sections })
    }

    /// Rejects sections outside `allowed`.
    pub fn check_sections(&self, allowed: &[&str]) -> Result<()> {
        match self.sections.iter().find(|s| !allowed.contains(&s.name.as_str())) {
            Some(s) => Err(CliError::config(format!(
                "unknown section [{}]; expected one of {}",
                s.name,
                allowed.iter().map(|a| format!("[{a}]")).collect::<Vec<_>>().join(", ")
            ))),
            None => Ok(()),
        }
    }

    /// Reader over a section; an absent section reads as empty.
    pub fn reader(&self, name: &'static str) -> Reader<'_> {
        Reader {
            section: name,
            entries: self
                .sections
                .iter()
                .find(|s| s.name == name)
                .map(|s| &s.entries[..])
                .unwrap_or(&[]),
            used: BTreeSet::new(),
        }
    }
}

/// Typed, consuming access to one section's keys.
pub struct Reader<'a> {
    section: &'static str,
    entries: &'a [(String, String)],
    used: BTreeSet<&'a str>,
}

impl<'a> Reader<'a> {
    pub fn raw(&mut self, key: &str) -> Option<&'a str> {
        let (k, v) = self.entries.iter().find(|(k, _)| k == key)?;
        self.used.insert(k.as_str());
        Some(v.as_str())
    }

    fn invalid(&self, key: &str, value: &str, what: impl std::fmt::Display) -> CliError {
        CliError::config(format!("[{}] {key} = {value:?}: {what}", self.section))
    }

    pub fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| self.invalid(key, v, e)),
        }
    }

    pub fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(|item| item.trim().parse::<T>().map_err(|e| self.invalid(key, v, e)))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// A list whose single-element form is broadcast to `len` entries.
    pub fn broadcast(&mut self, key: &str, len: usize, default: f64) -> Result<Vec<f64>> {
        match self.list::<f64>(key)? {
            None => Ok(vec![default; len]),
            Some(v) if v.len() == 1 => Ok(vec![v[0]; len]),
            Some(v) if v.len() == len => Ok(v),
            Some(v) => Err(CliError::config(format!(
                "[{}] {key} has {} entries; expected 1 or {len}",
                self.section,
                v.len()
            ))),
        }
    }

    /// Fails on keys that were never read.
    pub fn finish(self) -> Result<()> {
        let unknown: Vec<&str> = self
            .entries
            .iter()
            .map(|(k, _)| k.as_str())
            .filter(|k| !self.used.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::config(format!(
                "unknown key(s) in [{}]: {}",
                self.section,
                unknown.join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_quotes() {
        let doc = Document::parse("; note\n[a]\nx = 1\n# other\ny = \"two words\"\n[b]\n").unwrap();
        assert_eq!(doc.sections.len(), 2);
        assert_eq!(
            doc.sections[0].entries,
            vec![("x".into(), "1".into()), ("y".into(), "two words".into())]
        );
        assert!(doc.sections[1].entries.is_empty());
    }

    #[test]
    fn rejects_duplicates_and_orphans() {
        assert!(Document::parse("[a]\nx = 1\nx = 2\n").is_err());
        assert!(Document::parse("[a]\n[a]\n").is_err());
        assert!(Document::parse("x = 1\n[a]\n").is_err());
    }

    #[test]
    fn reader_reports_unused_keys() {
        let doc = Document::parse("[a]\nx = 1\ntypo = 2\n").unwrap();
        let mut r = doc.reader("a");
        assert_eq!(r.get::<u32>("x").unwrap(), Some(1));
        let err = r.finish().unwrap_err().to_string();
        assert!(err.contains("typo"), "{err}");
    }

    #[test]
    fn typed_errors_name_the_key() {
        let doc = Document::parse("[a]\nn = many\nv = 1, x\n").unwrap();
        let mut r = doc.reader("a");
        assert!(r.get::<usize>("n").unwrap_err().to_string().contains("n = \"many\""));
        assert!(r.list::<f64>("v").is_err());
    }

    #[test]
    fn broadcast_expands_scalars_and_checks_lengths() {
        let doc = Document::parse("[a]\ns = 2\nl = 1, 2, 3\nbad = 1, 2\n").unwrap();
        let mut r = doc.reader("a");
        assert_eq!(r.broadcast("s", 3, 0.0).unwrap(), vec![2.0; 3]);
        assert_eq!(r.broadcast("l", 3, 0.0).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(r.broadcast("missing", 2, 7.0).unwrap(), vec![7.0; 2]);
        assert!(r.broadcast("bad", 3, 0.0).is_err());
    }

    #[test]
    fn unknown_sections_are_rejected() {
        let doc = Document::parse("[solver]\n[solvr]\n").unwrap();
        assert!(doc
            .check_sections(&["solver"])
            .unwrap_err()
            .to_string()
            .contains("[solvr]"));
    }
}
