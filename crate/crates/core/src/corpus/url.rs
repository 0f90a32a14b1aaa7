/// Canonical key for a repository URL: no scheme, userinfo, query or
/// fragment; lowercase host; no trailing `/` or `.git`.
pub fn canonicalize_url(url: &str) -> String {
    let mut current = canonicalize_once(url);
    // Malformed inputs can expose another scheme or userinfo after one pass.
    for _ in 0..16 {
        let next = canonicalize_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn canonicalize_once(url: &str) -> String {
    let mut s = url.trim();
    while let Some(idx) = s.find("://") {
        if !s[..idx].bytes().all(|b| b.is_ascii_alphanumeric() || b"+.-".contains(&b)) {
            break;
        }
        s = &s[idx + 3..];
    }
    s = s.split(['#', '?']).next().unwrap_or_default();

    let (host, path) = match s.find('/') {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let host = host.rsplit('@').next().unwrap_or(host);
    // scp-style `host:owner/repo`
    let (host, path) = match host.split_once(':') {
        Some((h, rest)) if !rest.is_empty() && !rest.bytes().all(|b| b.is_ascii_digit()) => {
            (h.to_string(), format!("/{rest}{path}"))
        }
        _ => (host.to_string(), path.to_string()),
    };

    let mut out = format!("{}{}", host.to_ascii_lowercase(), path);
    loop {
        let before = out.len();
        while out.ends_with('/') {
            out.pop();
        }
        if out.to_ascii_lowercase().ends_with(".git") {
            out.truncate(out.len() - 4);
        }
        if out.len() == before {
            break;
        }
    }
    out
}

/// First path segment of a canonical URL, usually the owner account.
pub fn url_owner(canonical: &str) -> Option<&str> {
    canonical.split('/').nth(1).filter(|s| !s.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_forms() {
        assert_eq!(canonicalize_url("https://GitHub.com/a/b.git"), "github.com/a/b");
        assert_eq!(canonicalize_url("github.com/a/b/"), "github.com/a/b");
        assert_eq!(canonicalize_url("http://github.com/a/b.git/"), "github.com/a/b");
        assert_eq!(canonicalize_url("git@github.com:Owner/Repo.git"), "github.com/Owner/Repo");
        assert_eq!(canonicalize_url("https://github.com/a/b?tab=readme#top"), "github.com/a/b");
        assert_eq!(canonicalize_url("https://host:8080/x/"), "host:8080/x");
        assert_eq!(canonicalize_url("http://://_"), "_");
        assert_eq!(canonicalize_url("@://_"), "_");
    }

    #[test]
    fn owner_segment() {
        assert_eq!(url_owner("github.com/alice/tool"), Some("alice"));
        assert_eq!(url_owner("github.com"), None);
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(s in "(https?://)?[A-Za-z.:@]{1,12}(/[A-Za-z0-9._-]{0,8}){0,4}(\\.git)?/?") {
            let once = canonicalize_url(&s);
            prop_assert_eq!(canonicalize_url(&once), once);
        }
    }
}
