//! Tokenization shared by the search index and the polarity classifier.

use std::collections::BTreeSet;

/// Splits on non-alphanumeric characters and lowercases (Unicode-aware).
/// `#apple` and `@bob` yield `apple` and `bob`.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Words introduced by `marker` (`#` for hashtags, `@` for mentions),
/// marker stripped and lowercased.
pub fn marked_words(text: &str, marker: char) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut rest = text;
    while let Some(pos) = rest.find(marker) {
        rest = &rest[pos + marker.len_utf8()..];
        let end = rest
            .find(|c: char| !(c.is_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if end > 0 {
            out.insert(rest[..end].to_lowercase());
        }
        rest = &rest[end..];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens() {
        assert_eq!(tokenize("I love #Apple pie!"), ["i", "love", "apple", "pie"]);
        assert!(tokenize("  ...  ").is_empty());
        assert_eq!(tokenize("ÉCOLE été"), ["école", "été"]);
    }

    #[test]
    fn hashtags_and_mentions() {
        let text = "#Apple news from @ouest_france and @TechCrunch #apple #";
        let tags: Vec<_> = marked_words(text, '#').into_iter().collect();
        assert_eq!(tags, ["apple"]);
        let mentions: Vec<_> = marked_words(text, '@').into_iter().collect();
        assert_eq!(mentions, ["ouest_france", "techcrunch"]);
    }
}
