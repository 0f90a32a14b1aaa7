use std::collections::BTreeMap;
use std::path::Path;

use crate::normalize::{collect_source_files, join_relative, FileFilterPolicy, NormalizeError};

pub const UNKNOWN_LANGUAGE: &str = "unknown";

/// Markup and configuration languages never win the primary-language vote.
pub const NON_PRIMARY_LANGUAGES: [&str; 7] = ["HTML", "CSS", "JSON", "YAML", "Markdown", "XML", "TOML"];

pub fn language_for_path(rel_path: &str) -> Option<&'static str> {
    let name = rel_path.rsplit('/').next().unwrap_or(rel_path).to_ascii_lowercase();
    let (_, ext) = name.rsplit_once('.')?;
    Some(match ext {
        "py" | "pyi" | "pyw" => "Python",
        "ts" | "tsx" | "mts" | "cts" => "TypeScript",
        "js" | "jsx" | "mjs" | "cjs" => "JavaScript",
        "go" => "Go",
        "java" => "Java",
        "rs" => "Rust",
        "cs" => "C#",
        "c" | "h" => "C",
        "cc" | "cpp" | "cxx" | "hpp" | "hh" | "hxx" => "C++",
        "rb" => "Ruby",
        "php" => "PHP",
        "swift" => "Swift",
        "kt" | "kts" => "Kotlin",
        "scala" => "Scala",
        "sh" | "bash" | "zsh" => "Shell",
        "ps1" => "PowerShell",
        "lua" => "Lua",
        "r" => "R",
        "dart" => "Dart",
        "ex" | "exs" => "Elixir",
        "jl" => "Julia",
        "zig" => "Zig",
        "vue" => "Vue",
        "html" | "htm" | "xhtml" => "HTML",
        "css" | "scss" | "sass" | "less" => "CSS",
        "json" | "jsonc" => "JSON",
        "yaml" | "yml" => "YAML",
        "md" | "markdown" | "mdx" => "Markdown",
        "xml" => "XML",
        "toml" => "TOML",
        _ => return None,
    })
}

/// Bytes per language over the files that normalization would include.
pub fn language_bytes(root: &Path, policy: &FileFilterPolicy) -> Result<BTreeMap<String, u64>, NormalizeError> {
    let listing = collect_source_files(root, policy)?;
    let mut bytes: BTreeMap<String, u64> = BTreeMap::new();
    for rel in &listing.paths {
        let Some(lang) = language_for_path(rel) else { continue };
        let len = std::fs::metadata(join_relative(root, rel)).map(|m| m.len()).unwrap_or(0);
        *bytes.entry(lang.to_string()).or_default() += len;
    }
    Ok(bytes)
}

/// Highest-byte language, excluding markup and config. Ties go to the
/// lexicographically smaller label.
pub fn primary_language(languages: &BTreeMap<String, u64>) -> String {
    languages
        .iter()
        .filter(|(lang, _)| !NON_PRIMARY_LANGUAGES.contains(&lang.as_str()))
        // BTreeMap iterates in label order; keep the first maximum.
        .fold(None::<(&String, u64)>, |best, (lang, &n)| match best {
            Some((_, m)) if m >= n => best,
            _ => Some((lang, n)),
        })
        .map_or_else(|| UNKNOWN_LANGUAGE.to_string(), |(lang, _)| lang.clone())
}
