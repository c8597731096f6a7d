use std::collections::BTreeMap;
use std::path::Path;

use super::Language;
use crate::transforms::{ArgumentKind, TaskKind};

const EN: &str = include_str!("../../resources/prompts/en.txt");
const DE: &str = include_str!("../../resources/prompts/de.txt");

const LABELS: [&str; 3] = ["examples", "input", "output"];
const WORDS: [&str; 6] = ["Offs", "RelTool", "after_start", "before_end", "axis", "and"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResourceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing @{kind} {key}")]
    Missing { kind: &'static str, key: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Natural-language strings of one prompt language.
///
/// Resource files consist of entries introduced by `@kind key` lines; the
/// text of an entry runs to the next entry. Lines starting with `#` are
/// comments. Kinds: `rule` (shared system rules, in order), `task_rule`
/// (keyed by task), `label`, `user` (instruction sentences keyed by argument
/// kind or `offset`) and `word`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptResources {
    language: Language,
    rules: Vec<String>,
    task_rules: BTreeMap<TaskKind, Vec<String>>,
    labels: BTreeMap<String, String>,
    users: BTreeMap<String, String>,
    words: BTreeMap<String, String>,
}

impl PromptResources {
    /// Resources compiled into the library.
    pub fn builtin(language: Language) -> Self {
        let text = match language {
            Language::En => EN,
            Language::De => DE,
        };
        Self::parse(text, language).expect("built-in prompt resources are complete")
    }

    pub fn from_file(path: &Path, language: Language) -> Result<Self, ResourceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ResourceError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text, language)
    }

    pub fn parse(text: &str, language: Language) -> Result<Self, ResourceError> {
        let mut out = Self {
            language,
            rules: Vec::new(),
            task_rules: BTreeMap::new(),
            labels: BTreeMap::new(),
            users: BTreeMap::new(),
            words: BTreeMap::new(),
        };
        let mut current: Option<(usize, String, String, Vec<&str>)> = None;
        let finish = |out: &mut Self, entry: Option<(usize, String, String, Vec<&str>)>| -> Result<(), ResourceError> {
            let Some((line, kind, key, mut body)) = entry else { return Ok(()) };
            while body.last().is_some_and(|l| l.trim().is_empty()) {
                body.pop();
            }
            let text = body.join("\n");
            if text.trim().is_empty() {
                return Err(ResourceError::Syntax { line, message: format!("@{kind} {key} has no text") });
            }
            match kind.as_str() {
                "rule" => out.rules.push(text),
                "task_rule" => {
                    let task: TaskKind = key.parse().map_err(|message| ResourceError::Syntax { line, message })?;
                    out.task_rules.entry(task).or_default().push(text);
                }
                "label" => {
                    out.labels.insert(key, text);
                }
                "user" => {
                    out.users.insert(key, text);
                }
                "word" => {
                    out.words.insert(key, text);
                }
                other => return Err(ResourceError::Syntax { line, message: format!("unknown entry kind `@{other}`") }),
            }
            Ok(())
        };
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') {
                continue;
            }
            if let Some(head) = line.strip_prefix('@') {
                finish(&mut out, current.take())?;
                let mut parts = head.split_whitespace();
                let kind = parts.next().unwrap_or_default().to_string();
                let key = parts.next().unwrap_or_default().to_string();
                if key.is_empty() || parts.next().is_some() {
                    return Err(ResourceError::Syntax { line: i + 1, message: "expected `@kind key`".into() });
                }
                current = Some((i + 1, kind, key, Vec::new()));
            } else if let Some((_, _, _, body)) = &mut current {
                body.push(line);
            } else if !line.trim().is_empty() {
                return Err(ResourceError::Syntax { line: i + 1, message: "text outside an entry".into() });
            }
        }
        finish(&mut out, current.take())?;
        out.check()?;
        Ok(out)
    }

    fn check(&self) -> Result<(), ResourceError> {
        if self.rules.is_empty() {
            return Err(ResourceError::Missing { kind: "rule", key: "*".into() });
        }
        let missing = |kind: &'static str, map: &BTreeMap<String, String>, key: &str| {
            (!map.contains_key(key)).then(|| ResourceError::Missing { kind, key: key.to_string() })
        };
        let user_keys = ArgumentKind::ALL.iter().map(|k| k.as_str()).chain(["offset"]);
        LABELS
            .iter()
            .find_map(|k| missing("label", &self.labels, k))
            .or_else(|| user_keys.into_iter().find_map(|k| missing("user", &self.users, k)))
            .or_else(|| WORDS.iter().find_map(|k| missing("word", &self.words, k)))
            .map_or(Ok(()), Err)
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn rules(&self) -> &[String] {
        &self.rules
    }

    pub fn task_rules(&self, task: TaskKind) -> &[String] {
        self.task_rules.get(&task).map_or(&[], Vec::as_slice)
    }

    pub fn label(&self, key: &str) -> &str {
        self.labels.get(key).map_or("", String::as_str)
    }

    pub fn user(&self, key: &str) -> &str {
        self.users.get(key).map_or("", String::as_str)
    }

    pub fn word<'a>(&'a self, key: &'a str) -> &'a str {
        self.words.get(key).map_or(key, String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_sets_parse_with_equal_shape() {
        let en = PromptResources::builtin(Language::En);
        let de = PromptResources::builtin(Language::De);
        assert_eq!(en.rules.len(), 6);
        assert_eq!(en.rules.len(), de.rules.len());
        for task in TaskKind::ALL {
            assert_eq!(en.task_rules(task).len(), de.task_rules(task).len());
        }
        assert_eq!(en.labels.keys().collect::<Vec<_>>(), de.labels.keys().collect::<Vec<_>>());
        assert_eq!(en.users.keys().collect::<Vec<_>>(), de.users.keys().collect::<Vec<_>>());
        assert_eq!(en.words.keys().collect::<Vec<_>>(), de.words.keys().collect::<Vec<_>>());
    }

    #[test]
    fn malformed_resources() {
        assert!(matches!(PromptResources::parse("stray\n", Language::En), Err(ResourceError::Syntax { line: 1, .. })));
        assert!(matches!(PromptResources::parse("@rule a\n\n", Language::En), Err(ResourceError::Syntax { .. })));
        assert!(matches!(
            PromptResources::parse("@rule a\nx\n", Language::En),
            Err(ResourceError::Missing { kind: "label", .. })
        ));
        assert!(matches!(PromptResources::parse("@bogus a\nx\n", Language::En), Err(ResourceError::Syntax { .. })));
    }
}
