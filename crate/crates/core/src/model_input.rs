//! The summarizer input string `aspect:related words<s>document`.
//!
//! Related words are joined by one ASCII space. There is no space around
//! `:` or after `<s>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SEPARATOR: &str = "<s>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInput {
    pub aspect: String,
    pub related: Vec<String>,
    pub document: String,
}

impl ModelInput {
    pub fn new(aspect: impl Into<String>, related: Vec<String>, document: impl Into<String>) -> Self {
        ModelInput {
            aspect: aspect.into(),
            related,
            document: document.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.aspect.contains(SEPARATOR) {
            return Err(Error::Format(format!("aspect {:?} contains {SEPARATOR}", self.aspect)));
        }
        if self.aspect.contains(':') {
            return Err(Error::Format(format!("aspect {:?} contains ':'", self.aspect)));
        }
        for word in &self.related {
            if word.is_empty() || word.chars().any(char::is_whitespace) || word.contains(SEPARATOR) {
                return Err(Error::Format(format!("related word {word:?} is not a single token")));
            }
        }
        Ok(())
    }
}

pub fn serialize_input(input: &ModelInput) -> Result<String> {
    input.validate()?;
    let related = input.related.join(" ");
    let mut out = String::with_capacity(input.aspect.len() + related.len() + input.document.len() + 4);
    out.push_str(&input.aspect);
    out.push(':');
    out.push_str(&related);
    out.push_str(SEPARATOR);
    out.push_str(&input.document);
    Ok(out)
}

/// Splits at the first `<s>`, then the head at its first `:`.
pub fn parse_input(s: &str) -> Result<ModelInput> {
    let (head, document) = s
        .split_once(SEPARATOR)
        .ok_or_else(|| Error::Format(format!("missing {SEPARATOR} separator")))?;
    let (aspect, related) = head
        .split_once(':')
        .ok_or_else(|| Error::Format(format!("missing ':' before {SEPARATOR}")))?;
    let related = if related.is_empty() {
        Vec::new()
    } else {
        let words: Vec<String> = related.split(' ').map(str::to_string).collect();
        if words.iter().any(String::is_empty) {
            return Err(Error::Format(format!("empty related word in {related:?}")));
        }
        words
    };
    Ok(ModelInput::new(aspect, related, document))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(w: &[&str]) -> Vec<String> {
        w.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn serialize_template() {
        let input = ModelInput::new("insect", words(&["bees", "honey"]), "Bees make honey.");
        assert_eq!(serialize_input(&input).unwrap(), "insect:bees honey<s>Bees make honey.");
        let empty = ModelInput::new("vote", vec![], "Doc.");
        assert_eq!(serialize_input(&empty).unwrap(), "vote:<s>Doc.");
    }

    #[test]
    fn reserved_token_in_aspect_is_rejected() {
        let bad = ModelInput::new("a<s>b", vec![], "Doc");
        assert!(matches!(serialize_input(&bad), Err(Error::Format(_))));
        assert!(serialize_input(&ModelInput::new("a:b", vec![], "Doc")).is_err());
        assert!(serialize_input(&ModelInput::new("a", words(&["x y"]), "Doc")).is_err());
        assert!(serialize_input(&ModelInput::new("a", words(&[""]), "Doc")).is_err());
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_input("insect:bees honey<s>Doc").unwrap(),
            ModelInput::new("insect", words(&["bees", "honey"]), "Doc")
        );
        assert_eq!(parse_input("vote:<s>Doc").unwrap(), ModelInput::new("vote", vec![], "Doc"));
        assert!(matches!(parse_input("no separator here"), Err(Error::Format(_))));
        assert!(matches!(parse_input("no colon<s>doc"), Err(Error::Format(_))));
    }

    #[test]
    fn document_may_contain_reserved_tokens() {
        let input = ModelInput::new("x", words(&["a:b"]), "doc <s> with: more <s>");
        let s = serialize_input(&input).unwrap();
        assert_eq!(parse_input(&s).unwrap(), input);
    }
}
