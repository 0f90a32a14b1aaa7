/// Collapse whitespace runs to a single space, trim, and lowercase.
pub fn normalize_text(content: &str) -> String {
    let mut out = String::with_capacity(content.len());
    let mut pending_space = false;
    for c in content.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        if c.is_ascii() {
            out.push(c.to_ascii_lowercase());
        } else {
            out.extend(c.to_lowercase());
        }
    }
    out
}

#[inline]
pub fn is_token_byte(b: u8) -> bool {
    b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_'
}

/// Maximal runs of `[a-z0-9_]`, in order. Every other byte separates.
pub fn tokenize(content: &str) -> Vec<&str> {
    let bytes = content.as_bytes();
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, &b) in bytes.iter().enumerate() {
        match (is_token_byte(b), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                tokens.push(&content[s..i]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(&content[s..]);
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize_text("A\t\tB\nC"), "a b c");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("  \n "), "");
        assert_eq!(normalize_text("  Lead  and trail \r\n"), "lead and trail");
        assert_eq!(normalize_text("ÄÖ\u{00a0}X"), "äö x");
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize("def foo_bar(x):"), vec!["def", "foo_bar", "x"]);
        assert!(tokenize("!!!").is_empty());
        let seq = tokenize("a a b");
        assert_eq!(seq, vec!["a", "a", "b"]);
        let set: BTreeSet<_> = seq.into_iter().collect();
        assert_eq!(set, BTreeSet::from(["a", "b"]));
        assert_eq!(tokenize("x1-y2é_z"), vec!["x1", "y2", "_z"]);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,120}|[ \\tA-Za-z\\n]{0,80}") {
            let once = normalize_text(&s);
            prop_assert_eq!(normalize_text(&once), once.clone());
            prop_assert!(!once.bytes().any(|b| b.is_ascii_uppercase()));
            prop_assert!(!once.contains("  "));
            prop_assert!(!once.starts_with(' ') && !once.ends_with(' '));
        }

        #[test]
        fn tokens_are_maximal_runs(s in "[a-z0-9_ !(),.]{0,120}") {
            let toks = tokenize(&s);
            for t in &toks {
                prop_assert!(!t.is_empty() && t.bytes().all(is_token_byte));
            }
            // Rejoining with single separators and retokenizing is stable.
            let joined = toks.join(" ");
            prop_assert_eq!(tokenize(&joined), toks);
        }
    }
}
