//! `{{placeholder}}` templates for log entries.
//!
//! A placeholder name is one or more of `[A-Za-z0-9_.-]` between `{{` and
//! `}}`. Anything else (including `{{ spaced }}`) is literal text.
//! Substitution is a single pass: values are never re-expanded.

use std::collections::{BTreeMap, BTreeSet};

use super::error::DomainError;
use super::types::{TagSet, Template};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub title: String,
    pub body: String,
    pub tags: TagSet,
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-')
}

fn pieces(pattern: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = pattern;
    let mut literal_start = 0;
    let mut pos = 0;
    while let Some(open) = rest[pos..].find("{{") {
        let open = pos + open;
        let after = &rest[open + 2..];
        let name_len = after.find(|c: char| !is_name_char(c)).unwrap_or(after.len());
        if name_len > 0 && after[name_len..].starts_with("}}") {
            out.push(Piece::Text(&rest[literal_start..open]));
            out.push(Piece::Slot(&after[..name_len]));
            rest = &after[name_len + 2..];
            literal_start = 0;
            pos = 0;
        } else {
            pos = open + 1;
        }
    }
    out.push(Piece::Text(&rest[literal_start..]));
    out
}

pub fn placeholders(pattern: &str) -> BTreeSet<String> {
    pieces(pattern)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Slot(name) => Some(name.to_string()),
            Piece::Text(_) => None,
        })
        .collect()
}

fn substitute(pattern: &str, values: &BTreeMap<String, String>) -> String {
    let mut out = String::with_capacity(pattern.len());
    for piece in pieces(pattern) {
        match piece {
            Piece::Text(t) => out.push_str(t),
            Piece::Slot(name) => {
                if let Some(v) = values.get(name) {
                    out.push_str(v);
                }
            }
        }
    }
    out
}

impl Template {
    pub fn placeholders(&self) -> BTreeSet<String> {
        let mut all = placeholders(&self.title_pattern);
        all.extend(placeholders(&self.body_pattern));
        all
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.template_name.trim().is_empty() {
            return Err(DomainError::Invalid("template_name must not be empty".into()));
        }
        let known = self.placeholders();
        if let Some(missing) = self.required_fields.iter().find(|f| !known.contains(*f)) {
            return Err(DomainError::Invalid(format!(
                "required field {missing:?} does not appear in template {:?}",
                self.template_name
            )));
        }
        Ok(())
    }
}

pub fn render_template(
    template: &Template,
    values: &BTreeMap<String, String>,
) -> Result<Rendered, DomainError> {
    if let Some(missing) = template.required_fields.iter().find(|f| !values.contains_key(*f)) {
        return Err(DomainError::MissingField(missing.clone()));
    }
    Ok(Rendered {
        title: substitute(&template.title_pattern, values),
        body: substitute(&template.body_pattern, values),
        tags: template.default_tags.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::types::Tag;
    use proptest::prelude::*;

    fn template(title: &str, body: &str, required: &[&str]) -> Template {
        Template {
            template_id: 1,
            template_name: "t".into(),
            title_pattern: title.into(),
            body_pattern: body.into(),
            required_fields: required.iter().map(|s| s.to_string()).collect(),
            default_tags: [Tag::parse("eos").unwrap()].into_iter().collect(),
        }
    }

    fn values(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn single_substitution() {
        let t = template("EOS report {{shift}}", "", &["shift"]);
        let r = render_template(&t, &values(&[("shift", "night")])).unwrap();
        assert_eq!(r.title, "EOS report night");
        assert_eq!(r.tags, t.default_tags);
    }

    #[test]
    fn missing_required_field() {
        let t = template("{{detector}} status", "", &["detector"]);
        assert_eq!(
            render_template(&t, &BTreeMap::new()),
            Err(DomainError::MissingField("detector".into()))
        );
    }

    #[test]
    fn optional_placeholder_without_value_is_empty() {
        let t = template("a{{x}}b", "", &[]);
        assert_eq!(render_template(&t, &BTreeMap::new()).unwrap().title, "ab");
    }

    #[test]
    fn repeated_placeholder_matches_global_replace() {
        let body = "{{det}} ok; checked {{det}} twice";
        let t = template("", body, &[]);
        let r = render_template(&t, &values(&[("det", "TPC")])).unwrap();
        let oracle = body.replace("{{det}}", "TPC");
        assert_eq!(r.body, oracle);
        assert_eq!(r.body, "TPC ok; checked TPC twice");
    }

    #[test]
    fn malformed_braces_are_literal() {
        assert!(placeholders("{{ spaced }} {{}} {{open").is_empty());
        let t = template("{{ a }}{{b}}}", "", &[]);
        assert_eq!(render_template(&t, &values(&[("b", "B")])).unwrap().title, "{{ a }}B}");
    }

    #[test]
    fn values_are_not_reexpanded() {
        let t = template("{{a}}", "", &[]);
        let r = render_template(&t, &values(&[("a", "{{b}}"), ("b", "x")])).unwrap();
        assert_eq!(r.title, "{{b}}");
    }

    #[test]
    fn required_fields_must_appear() {
        assert!(template("{{a}}", "", &["a"]).validate().is_ok());
        assert!(template("{{a}}", "", &["b"]).validate().is_err());
        assert!(template("x", "{{b}}", &["b"]).validate().is_ok());
    }

    proptest! {
        #[test]
        fn global_replace_oracle(
            parts in prop::collection::vec(("[a-z ]{0,6}", prop::sample::select(vec!["p", "q", "r"])), 0..8),
            tail in "[a-z ]{0,6}",
            vp in "[A-Za-z0-9 ]{0,8}",
            vq in "[A-Za-z0-9 ]{0,8}",
        ) {
            let mut pattern = String::new();
            for (text, name) in &parts {
                pattern.push_str(text);
                pattern.push_str(&format!("{{{{{name}}}}}"));
            }
            pattern.push_str(&tail);
            let vals = values(&[("p", &vp), ("q", &vq)]);
            let t = template(&pattern, &pattern, &[]);
            let r = render_template(&t, &vals).unwrap();
            let oracle = pattern
                .replace("{{p}}", &vp)
                .replace("{{q}}", &vq)
                .replace("{{r}}", "");
            prop_assert_eq!(&r.title, &oracle);
            prop_assert_eq!(&r.body, &oracle);
        }

        #[test]
        fn placeholder_free_is_identity(title in "[^{}]{0,40}", body in "[^{}]{0,40}") {
            let t = template(&title, &body, &[]);
            let r = render_template(&t, &BTreeMap::new()).unwrap();
            prop_assert_eq!(r.title, title);
            prop_assert_eq!(r.body, body);
        }
    }
}
