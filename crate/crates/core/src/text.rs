//! Text normalization shared by every index in the crate.

/// Lowercases, trims and collapses internal runs of whitespace to one space.
pub fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        for c in word.chars() {
            out.extend(c.to_lowercase());
        }
    }
    out
}

/// Lowercase alphanumeric tokens, used by the lexical index.
pub fn tokenize(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_collapses_and_lowercases() {
        assert_eq!(normalize("  eYe  "), "eye");
        assert_eq!(normalize("Drug \t Resistant\nTB"), "drug resistant tb");
        assert_eq!(normalize(""), "");
    }

    #[test]
    fn normalize_is_idempotent() {
        let once = normalize(" A  b C ");
        assert_eq!(normalize(&once), once);
    }

    #[test]
    fn tokenize_splits_on_punctuation() {
        assert_eq!(
            tokenize("Extensively Drug-Resistant Tuberculosis"),
            vec!["extensively", "drug", "resistant", "tuberculosis"]
        );
    }
}
