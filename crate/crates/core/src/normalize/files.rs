use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::NormalizeError;

const SNIFF_LEN: usize = 8192;

/// Which files of a repository contribute to its normalized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileFilterPolicy {
    pub excluded_dirs: BTreeSet<String>,
    /// Lowercase, with leading dot.
    pub excluded_extensions: BTreeSet<String>,
    pub binary_detection: bool,
    pub max_file_bytes: u64,
}

impl Default for FileFilterPolicy {
    fn default() -> Self {
        let dirs = [
            ".git", "node_modules", "dist", "build", "__pycache__", ".venv", "venv", "target",
            ".tox", ".next", ".mypy_cache", ".pytest_cache", "coverage",
        ];
        let exts = [
            ".png", ".jpg", ".jpeg", ".gif", ".bmp", ".ico", ".webp", ".tiff", ".pdf", ".zip",
            ".tar", ".gz", ".tgz", ".bz2", ".xz", ".7z", ".rar", ".jar", ".whl", ".egg", ".exe",
            ".dll", ".so", ".dylib", ".a", ".o", ".class", ".pyc", ".pyo", ".wasm", ".woff",
            ".woff2", ".ttf", ".otf", ".eot", ".mp3", ".mp4", ".wav", ".mov", ".avi", ".webm",
        ];
        Self {
            excluded_dirs: dirs.iter().map(|s| s.to_string()).collect(),
            excluded_extensions: exts.iter().map(|s| s.to_string()).collect(),
            binary_detection: true,
            max_file_bytes: 2 * 1024 * 1024,
        }
    }
}

impl FileFilterPolicy {
    fn has_excluded_extension(&self, name: &str) -> bool {
        let lower = name.to_ascii_lowercase();
        match lower.rfind('.') {
            Some(dot) => self.excluded_extensions.contains(&lower[dot..]),
            None => false,
        }
    }
}

/// Result of walking a repository.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileListing {
    /// Relative paths with `/` separators, sorted bytewise.
    pub paths: Vec<String>,
    /// Files that could not be opened or read; skipped.
    pub unreadable: usize,
}

fn looks_binary(path: &Path) -> std::io::Result<bool> {
    let mut buf = [0u8; SNIFF_LEN];
    let mut file = File::open(path)?;
    let mut filled = 0;
    while filled < SNIFF_LEN {
        let n = file.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(buf[..filled].contains(&0))
}

fn relative_string(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    let parts: Vec<String> = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    parts.join("/")
}

/// Recursively list the files of `repo_root` that pass `policy`.
pub fn collect_source_files(repo_root: &Path, policy: &FileFilterPolicy) -> Result<FileListing, NormalizeError> {
    let meta = std::fs::metadata(repo_root).map_err(|e| NormalizeError::io(repo_root, e))?;
    if !meta.is_dir() {
        return Err(NormalizeError::NotADirectory(repo_root.to_path_buf()));
    }
    let mut listing = FileListing::default();
    let walker = WalkDir::new(repo_root).follow_links(false).into_iter().filter_entry(|e| {
        e.depth() == 0
            || !e.file_type().is_dir()
            || !policy.excluded_dirs.contains(e.file_name().to_string_lossy().as_ref())
    });
    for entry in walker {
        let entry = match entry {
            Ok(entry) => entry,
            Err(err) => {
                let path = err.path().map(Path::to_path_buf).unwrap_or_else(|| repo_root.to_path_buf());
                let is_dir = path.is_dir();
                let io = err.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error"));
                if is_dir {
                    return Err(NormalizeError::io(&path, io));
                }
                listing.unreadable += 1;
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy();
        if policy.has_excluded_extension(&name) {
            continue;
        }
        let size = match entry.metadata() {
            Ok(m) => m.len(),
            Err(_) => {
                listing.unreadable += 1;
                continue;
            }
        };
        if size > policy.max_file_bytes {
            continue;
        }
        if policy.binary_detection {
            match looks_binary(entry.path()) {
                Ok(true) => continue,
                Ok(false) => {}
                Err(_) => {
                    listing.unreadable += 1;
                    continue;
                }
            }
        }
        listing.paths.push(relative_string(repo_root, entry.path()));
    }
    listing.paths.sort_unstable_by(|a, b| a.as_bytes().cmp(b.as_bytes()));
    Ok(listing)
}

pub(crate) fn join_relative(root: &Path, rel: &str) -> PathBuf {
    rel.split('/').fold(root.to_path_buf(), |p, part| p.join(part))
}
