use serde::{Deserialize, Serialize};

/// Comment syntax family, chosen per file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LanguageFamily {
    /// `//` line comments and `/* */` block comments.
    CFamily,
    /// `#` line comments.
    Script,
    /// `<!-- -->` comments.
    Markup,
    /// No comment syntax is recognized; content passes through.
    Unknown,
}

impl LanguageFamily {
    pub fn from_path(path: &str) -> Self {
        let name = path.rsplit('/').next().unwrap_or(path);
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "dockerfile" | "makefile" | "gemfile" | "rakefile" | "procfile" | ".gitignore"
            | ".dockerignore" | ".env" => return LanguageFamily::Script,
            _ => {}
        }
        let Some((_, ext)) = lower.rsplit_once('.') else {
            return LanguageFamily::Unknown;
        };
        match ext {
            "c" | "h" | "cc" | "cpp" | "cxx" | "hpp" | "hh" | "hxx" | "cs" | "java" | "js"
            | "jsx" | "mjs" | "cjs" | "ts" | "tsx" | "mts" | "cts" | "go" | "rs" | "swift"
            | "kt" | "kts" | "scala" | "dart" | "php" | "css" | "scss" | "less" | "groovy"
            | "gradle" | "m" | "mm" | "proto" | "sol" | "zig" | "jsonc" => LanguageFamily::CFamily,
            "py" | "pyi" | "pyw" | "rb" | "sh" | "bash" | "zsh" | "fish" | "pl" | "pm" | "r"
            | "yaml" | "yml" | "toml" | "cfg" | "conf" | "ini" | "ps1" | "mk" | "cmake"
            | "nim" | "ex" | "exs" | "jl" | "tf" | "hcl" | "dockerfile" | "properties" => {
                LanguageFamily::Script
            }
            "html" | "htm" | "xhtml" | "xml" | "svg" | "md" | "markdown" | "mdx" | "vue"
            | "svelte" => LanguageFamily::Markup,
            _ => LanguageFamily::Unknown,
        }
    }
}

fn find(haystack: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    haystack
        .get(from..)?
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

/// End (exclusive) of a quoted literal opened at `start`, or `None` when the
/// quote is not closed on the same line and should be read as a plain
/// character.
fn single_line_literal_end(bytes: &[u8], start: usize) -> Option<usize> {
    let quote = bytes[start];
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return None,
            c if c == quote => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

/// End (exclusive) of a literal that may span lines, closed by `close`.
/// Unterminated literals run to the end of input.
fn multiline_literal_end(bytes: &[u8], start: usize, open_len: usize, close: &[u8], escapes: bool) -> usize {
    let mut i = start + open_len;
    while i < bytes.len() {
        if escapes && bytes[i] == b'\\' {
            i += 2;
            continue;
        }
        if bytes[i..].starts_with(close) {
            return i + close.len();
        }
        i += 1;
    }
    bytes.len()
}

fn line_end(bytes: &[u8], from: usize) -> usize {
    find(bytes, from, b"\n").unwrap_or(bytes.len())
}

/// Remove comments of the given family. Quoted literals are preserved, so a
/// comment marker inside a string is left alone. An unterminated block
/// comment is removed through the end of input.
pub fn strip_comments(content: &str, family: LanguageFamily) -> String {
    let bytes = content.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    match family {
        LanguageFamily::Unknown => return content.to_owned(),
        LanguageFamily::CFamily => {
            while i < bytes.len() {
                let c = bytes[i];
                if bytes[i..].starts_with(b"//") {
                    i = line_end(bytes, i);
                } else if bytes[i..].starts_with(b"/*") {
                    i = find(bytes, i + 2, b"*/").map_or(bytes.len(), |p| p + 2);
                } else if c == b'"' || c == b'\'' {
                    let end = single_line_literal_end(bytes, i).unwrap_or(i + 1);
                    out.extend_from_slice(&bytes[i..end.min(bytes.len())]);
                    i = end;
                } else if c == b'`' {
                    let end = multiline_literal_end(bytes, i, 1, b"`", true);
                    out.extend_from_slice(&bytes[i..end.min(bytes.len())]);
                    i = end;
                } else {
                    out.push(c);
                    i += 1;
                }
            }
        }
        LanguageFamily::Script => {
            while i < bytes.len() {
                let c = bytes[i];
                if c == b'#' {
                    i = line_end(bytes, i);
                } else if bytes[i..].starts_with(b"\"\"\"") || bytes[i..].starts_with(b"'''") {
                    let delim = &bytes[i..i + 3];
                    let end = multiline_literal_end(bytes, i, 3, delim, true);
                    out.extend_from_slice(&bytes[i..end.min(bytes.len())]);
                    i = end;
                } else if c == b'"' || c == b'\'' {
                    let end = single_line_literal_end(bytes, i).unwrap_or(i + 1);
                    out.extend_from_slice(&bytes[i..end.min(bytes.len())]);
                    i = end;
                } else {
                    out.push(c);
                    i += 1;
                }
            }
        }
        LanguageFamily::Markup => {
            while i < bytes.len() {
                if bytes[i..].starts_with(b"<!--") {
                    i = find(bytes, i + 4, b"-->").map_or(bytes.len(), |p| p + 3);
                } else {
                    out.push(bytes[i]);
                    i += 1;
                }
            }
        }
    }
    // Cuts only happen at ASCII delimiters, so the result is still UTF-8;
    // an escape that skips past the end is the only way to split a char.
    String::from_utf8(out).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned())
}
