//! Versioned template files.
//!
//! A template is plain text with `{name}` placeholders, `name` made of ASCII
//! lowercase letters and underscores. `{{` and `}}` stand for literal braces.
//! Every placeholder must be bound when filling and every binding must be used
//! by the template or one of its siblings, so a typo fails loudly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::PromptError;
use crate::corpus::{DatasetKind, Instance};

pub const TEMPLATE_VERSION: &str = "builtin-v1";

macro_rules! embedded {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../templates/builtin-v1/", $name)))),*]
    };
}

const BUILTIN_V1: &[(&str, &str)] = embedded![
    "atomic.system.txt",
    "back_translate.system.txt",
    "bgqa_code.system.txt",
    "bgqa_code.user.txt",
    "bgqa_text.system.txt",
    "bgqa_text.user.txt",
    "condqa_code.span.txt",
    "condqa_code.system.txt",
    "condqa_code.user.txt",
    "condqa_code.yesno.txt",
    "condqa_text.span.txt",
    "condqa_text.system.txt",
    "condqa_text.user.txt",
    "condqa_text.yesno.txt",
    "probe_bgqa.txt",
    "probe_condqa_code.txt",
    "probe_condqa_text.txt",
    "sharc.history_turn.txt",
    "sharc_code.system.txt",
    "sharc_code.user.txt",
    "sharc_text.system.txt",
    "sharc_text.user.txt",
    "target_code.txt",
    "target_text.txt",
    "translate_bgqa.system.txt",
    "translate_bgqa.user.txt",
    "translate_condqa.system.txt",
    "translate_condqa.user.txt",
    "translate_sharc.system.txt",
    "translate_sharc.user.txt",
    "demos/atomic.json",
    "demos/back_translate.json",
    "demos/translate_bgqa.json",
    "demos/translate_condqa.json",
    "demos/translate_sharc.json",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    version: String,
    files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct TranslationDemo {
    pub instance: Instance,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct BackTranslationDemo {
    pub code: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct AtomicDemo {
    pub sentence: String,
    pub statements: String,
}

impl Templates {
    /// The built-in template set.
    pub fn builtin() -> Self {
        Templates {
            version: TEMPLATE_VERSION.to_string(),
            files: BUILTIN_V1
                .iter()
                .map(|(n, c)| (n.to_string(), c.to_string()))
                .collect(),
        }
    }

    /// Loads a template set from a directory laid out like the built-in one.
    /// Files missing from the directory fall back to the built-in version.
    pub fn from_dir(version: &str, dir: &Path) -> Result<Self, PromptError> {
        let mut t = Self::builtin();
        t.version = version.to_string();
        for (name, _) in BUILTIN_V1 {
            let path = dir.join(name);
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|e| PromptError::Template {
                    name: name.to_string(),
                    message: e.to_string(),
                })?;
                t.files.insert(name.to_string(), text);
            }
        }
        Ok(t)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn get(&self, name: &str) -> Result<&str, PromptError> {
        self.files
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| PromptError::Template {
                name: name.to_string(),
                message: "no such template".into(),
            })
    }

    pub fn fill(&self, name: &str, vars: &[(&str, &str)]) -> Result<String, PromptError> {
        fill(name, self.get(name)?, vars)
    }

    /// sha256 over every file, in name order.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.version.as_bytes());
        for (name, content) in &self.files {
            h.update([0]);
            h.update(name.as_bytes());
            h.update([0]);
            h.update(content.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn file_hashes(&self) -> BTreeMap<String, String> {
        self.files
            .iter()
            .map(|(n, c)| (n.clone(), hex::encode(Sha256::digest(c.as_bytes()))))
            .collect()
    }

    fn json<T: for<'de> Deserialize<'de>>(&self, name: &str) -> Result<T, PromptError> {
        serde_json::from_str(self.get(name)?).map_err(|e| PromptError::Template {
            name: name.to_string(),
            message: e.to_string(),
        })
    }

    /// Hand-written translation demonstrations for the dataset family.
    pub fn translation_demos(&self, dataset: DatasetKind) -> Result<Vec<TranslationDemo>, PromptError> {
        self.json(&format!("demos/translate_{}.json", family(dataset)))
    }

    pub fn back_translation_demos(&self) -> Result<Vec<BackTranslationDemo>, PromptError> {
        self.json("demos/back_translate.json")
    }

    pub fn atomic_demos(&self) -> Result<Vec<AtomicDemo>, PromptError> {
        self.json("demos/atomic.json")
    }
}

/// `condqa`, `bgqa` or `sharc`.
pub fn family(dataset: DatasetKind) -> &'static str {
    match dataset {
        DatasetKind::CondQa => "condqa",
        DatasetKind::Sharc => "sharc",
        _ => "bgqa",
    }
}

pub fn fill(name: &str, template: &str, vars: &[(&str, &str)]) -> Result<String, PromptError> {
    let err = |message: String| PromptError::Template {
        name: name.to_string(),
        message,
    };
    let mut out = String::with_capacity(template.len() + vars.iter().map(|v| v.1.len()).sum::<usize>());
    let mut rest = template;
    while let Some(pos) = rest.find(['{', '}']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if tail.starts_with("{{") || tail.starts_with("}}") {
            out.push_str(&tail[..1]);
            rest = &tail[2..];
            continue;
        }
        if tail.starts_with('}') {
            return Err(err(format!("unmatched `}}` at byte {}", template.len() - tail.len())));
        }
        let close = tail
            .find('}')
            .ok_or_else(|| err("unterminated placeholder".into()))?;
        let key = &tail[1..close];
        if key.is_empty() || !key.bytes().all(|b| b.is_ascii_lowercase() || b == b'_') {
            return Err(err(format!("bad placeholder `{{{key}}}`")));
        }
        let value = vars
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| err(format!("placeholder `{key}` is not bound")))?;
        out.push_str(value.1);
        rest = &tail[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}
