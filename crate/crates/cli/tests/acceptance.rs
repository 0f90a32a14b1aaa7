//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore};

use toolclone::analysis::{cluster_candidates, extract_candidates, format_rate, wilson_interval, BucketEdges, CalibrationRow, Z_95};
use toolclone::corpus::RepoId;
use toolclone::metrics::{ctph_compare, ctph_digest, jaccard, jaccard_sorted, FuzzyHash, Metric};
use toolclone::pairwise::{ComparisonGroup, PairId, ScoreSet, ScoreStore};
use toolclone::run::{self, RunLayout};
use toolclone_testkit::{canonical_url, plant_edits, random_tokens, render_source, rng, vocabulary, SynthCorpus};

type Check = Result<String, String>;
type Criterion = fn() -> Check;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn toolclone(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_toolclone")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("toolclone {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn repo_id(corpus: &SynthCorpus, name: &str) -> RepoId {
    let repo = corpus.repos.iter().find(|r| r.name == name).expect("repo registered");
    RepoId::from_canonical_url(&canonical_url(repo))
}

fn pair_of(corpus: &SynthCorpus, x: &str, y: &str) -> PairId {
    PairId::new(repo_id(corpus, x), repo_id(corpus, y)).expect("distinct repos")
}

// ---------------------------------------------------------------------------

const PUBLISHED_RATES: [(&str, Metric, u64, u64, &str); 30] = [
    ("mcp-mcp", Metric::Jaccard, 0, 20, "0.00 (0.00-0.16)"),
    ("mcp-mcp", Metric::Jaccard, 0, 20, "0.00 (0.00-0.16)"),
    ("mcp-mcp", Metric::Jaccard, 5, 20, "0.25 (0.11-0.47)"),
    ("mcp-mcp", Metric::Jaccard, 6, 20, "0.30 (0.15-0.52)"),
    ("mcp-mcp", Metric::Jaccard, 12, 20, "0.60 (0.39-0.78)"),
    ("mcp-mcp", Metric::Ctph, 0, 20, "0.00 (0.00-0.16)"),
    ("mcp-mcp", Metric::Ctph, 1, 20, "0.05 (0.01-0.24)"),
    ("mcp-mcp", Metric::Ctph, 3, 20, "0.15 (0.05-0.36)"),
    ("mcp-mcp", Metric::Ctph, 9, 20, "0.45 (0.26-0.66)"),
    ("mcp-mcp", Metric::Ctph, 17, 20, "0.85 (0.64-0.95)"),
    ("skills-skills", Metric::Jaccard, 0, 20, "0.00 (0.00-0.16)"),
    ("skills-skills", Metric::Jaccard, 0, 20, "0.00 (0.00-0.16)"),
    ("skills-skills", Metric::Jaccard, 2, 20, "0.10 (0.03-0.30)"),
    ("skills-skills", Metric::Jaccard, 8, 19, "0.42 (0.23-0.64)"),
    ("skills-skills", Metric::Jaccard, 2, 2, "1.00 (0.34-1.00)"),
    ("skills-skills", Metric::Ctph, 0, 20, "0.00 (0.00-0.16)"),
    ("skills-skills", Metric::Ctph, 0, 20, "0.00 (0.00-0.16)"),
    ("skills-skills", Metric::Ctph, 3, 20, "0.15 (0.05-0.36)"),
    ("skills-skills", Metric::Ctph, 8, 20, "0.40 (0.22-0.61)"),
    ("skills-skills", Metric::Ctph, 15, 20, "0.75 (0.53-0.89)"),
    ("mcp-skills", Metric::Jaccard, 0, 20, "0.00 (0.00-0.16)"),
    ("mcp-skills", Metric::Jaccard, 0, 20, "0.00 (0.00-0.16)"),
    ("mcp-skills", Metric::Jaccard, 0, 20, "0.00 (0.00-0.16)"),
    ("mcp-skills", Metric::Jaccard, 4, 8, "0.50 (0.22-0.78)"),
    ("mcp-skills", Metric::Jaccard, 1, 4, "0.25 (0.05-0.70)"),
    ("mcp-skills", Metric::Ctph, 0, 20, "0.00 (0.00-0.16)"),
    ("mcp-skills", Metric::Ctph, 0, 17, "0.00 (0.00-0.18)"),
    ("mcp-skills", Metric::Ctph, 1, 20, "0.05 (0.01-0.24)"),
    ("mcp-skills", Metric::Ctph, 3, 20, "0.15 (0.05-0.36)"),
    ("mcp-skills", Metric::Ctph, 5, 20, "0.25 (0.11-0.47)"),
];

fn wilson_table() -> Check {
    let start = Instant::now();
    let edges = BucketEdges::default();
    for (i, &(group, metric, k, n, expected)) in PUBLISHED_RATES.iter().enumerate() {
        let w = wilson_interval(k, n, Z_95).map_err(|e| e.to_string())?.rounded(2);
        let direct = format!("{:.2} ({:.2}-{:.2})", w.proportion, w.lo, w.hi);
        ensure!(direct == expected, "{group} {metric} {k}/{n}: {direct} != {expected}");
        let raw = wilson_interval(k, n, Z_95).map_err(|e| e.to_string())?;
        let row = CalibrationRow {
            metric,
            group: group.parse::<ComparisonGroup>()?,
            bucket: edges.bucket(i % 5),
            total_pairs: n,
            sampled: n,
            clones: k,
            proportion: Some(raw.proportion),
            ci_lo: Some(raw.lo),
            ci_hi: Some(raw.hi),
        };
        let shown = format_rate(&row);
        ensure!(shown == expected, "{group} {metric} {k}/{n}: report shows {shown}, expected {expected}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("30/30 rows exact after rounding in {elapsed:?}"))
}

// ---------------------------------------------------------------------------

fn code_like(r: &mut impl Rng, vocab: &[String], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + 64);
    while out.len() < len {
        let toks = random_tokens(r, vocab, 64);
        out.extend_from_slice(render_source(&toks).as_bytes());
    }
    out.truncate(len);
    out
}

fn ctph_oracle() -> Check {
    let mut r = rng(0xc7);
    let vocab = vocabulary(&mut r, 300);
    let mut files: Vec<Vec<u8>> = Vec::new();
    let bases = 40;
    for i in 0..bases {
        // Log-spaced sizes from 1 B to 1 MiB.
        let len = (2f64.powf(20.0 * i as f64 / (bases - 1) as f64)).round() as usize;
        let base = if i % 3 == 2 {
            let mut b = vec![0u8; len];
            r.fill_bytes(&mut b);
            b
        } else {
            code_like(&mut r, &vocab, len)
        };
        let mut edited = base.clone();
        if !edited.is_empty() {
            let span = (len / 50).max(1);
            let at = r.random_range(0..=len - span);
            for b in &mut edited[at..at + span] {
                *b = r.random();
            }
        }
        let mut extended = base.clone();
        extended.extend(code_like(&mut r, &vocab, (len / 20).max(1)));
        files.extend([base, edited, extended]);
    }
    ensure!(files.iter().map(Vec::len).min() == Some(1), "smallest file is not 1 byte");
    ensure!(files.iter().map(Vec::len).max().unwrap() >= 1 << 20, "largest file below 1 MiB");

    let mut ours = Vec::with_capacity(files.len());
    for (i, f) in files.iter().enumerate() {
        let mine = ctph_digest(f).map_err(|e| format!("file {i}: {e}"))?.to_string();
        let reference = ssdeep::hash(f).map_err(|e| format!("reference failed on file {i}: {e}"))?;
        ensure!(mine == reference, "file {i} ({} B): {mine} != {reference}", f.len());
        ours.push(mine);
    }
    let parsed: Vec<FuzzyHash> = ours.iter().map(|d| d.parse().expect("own digest parses")).collect();
    let (mut compared, mut nonzero) = (0usize, 0usize);
    for i in 0..ours.len() {
        for j in i..ours.len() {
            let mine = ctph_compare::<f64>(&parsed[i], &parsed[j]).value();
            let reference = ssdeep::compare(&ours[i], &ours[j]).map_err(|e| format!("reference compare failed: {e}"))?;
            ensure!(mine == f64::from(reference), "files {i},{j}: {mine} != {reference}");
            compared += 1;
            nonzero += usize::from(reference > 0 && i != j);
        }
    }
    Ok(format!("{} digests identical; {compared} comparisons identical ({nonzero} nonzero cross pairs)", files.len()))
}

// ---------------------------------------------------------------------------

fn jaccard_oracle() -> Check {
    let mut r = rng(0x1ac);
    let random_set = |r: &mut rand_chacha::ChaCha8Rng, universe: u32| -> Vec<u32> {
        let n = r.random_range(1..=20);
        (0..n).map(|_| r.random_range(0..universe)).collect()
    };
    for case in 0..1000 {
        let (xa, xb) = (random_set(&mut r, 40), random_set(&mut r, 40));
        let (mut ua, mut ub) = (Vec::new(), Vec::new());
        for x in &xa {
            if !ua.contains(x) {
                ua.push(*x);
            }
        }
        for x in &xb {
            if !ub.contains(x) {
                ub.push(*x);
            }
        }
        let mut inter = 0u64;
        for x in &ua {
            for y in &ub {
                if x == y {
                    inter += 1;
                }
            }
        }
        let union = ua.len() as u64 + ub.len() as u64 - inter;
        let expected = 100.0 * inter as f64 / union as f64;

        let sa: BTreeSet<u32> = xa.iter().copied().collect();
        let sb: BTreeSet<u32> = xb.iter().copied().collect();
        let got = jaccard(&sa, &sb).map_err(|e| e.to_string())?;
        ensure!((got.shared, got.union) == (inter, union), "case {case}: {got:?} vs {inter}/{union}");
        ensure!(got.score::<f64>().value() == expected, "case {case}: score {} vs {expected}", got.score::<f64>().value());
        let va: Vec<u32> = sa.iter().copied().collect();
        let vb: Vec<u32> = sb.iter().copied().collect();
        let merged = jaccard_sorted(&va, &vb).map_err(|e| e.to_string())?;
        ensure!(merged == got, "case {case}: sorted merge {merged:?} vs {got:?}");
    }
    let vocab = vocabulary(&mut r, 200);
    for case in 0..10_000 {
        let na = r.random_range(1..=60);
        let nb = r.random_range(1..=60);
        let a: BTreeSet<String> = random_tokens(&mut r, &vocab, na).into_iter().collect();
        let b: BTreeSet<String> = random_tokens(&mut r, &vocab, nb).into_iter().collect();
        let ab = jaccard(&a, &b).map_err(|e| e.to_string())?.score::<f64>().value();
        let ba = jaccard(&b, &a).map_err(|e| e.to_string())?.score::<f64>().value();
        ensure!(ab == ba, "case {case}: asymmetric {ab} vs {ba}");
        ensure!((0.0..=100.0).contains(&ab), "case {case}: {ab} out of range");
        ensure!(jaccard(&a, &a).unwrap().score::<f64>().value() == 100.0, "case {case}: self score below 100");
    }
    Ok("1000 oracle pairs exact; 10000 pairs symmetric and in [0, 100]".into())
}

// ---------------------------------------------------------------------------

/// 50 bases with distinct developers and 10 lightly edited clones.
fn planted_corpus(root: &Path) -> (SynthCorpus, Vec<(String, String, ComparisonGroup)>) {
    let mut r = rng(0x91a);
    let vocab = vocabulary(&mut r, 20_000);
    let mut corpus = SynthCorpus::new(root);
    let mut bases = Vec::new();
    for i in 0..50 {
        let eco = if i < 40 { "MCP" } else { "Skills" };
        let tokens = random_tokens(&mut r, &vocab, 800);
        let name = format!("base{i:02}");
        corpus.add(eco, &format!("dev{i:02}"), &name, &[("src/main.py", render_source(&tokens)), ("README.md", format!("# {name}\n"))]);
        bases.push(tokens);
    }
    // Seven MCP-MCP, two Skills-Skills and one MCP-Skills clone.
    let plan: [(usize, &str); 10] =
        [(0, "MCP"), (3, "MCP"), (7, "MCP"), (12, "MCP"), (18, "MCP"), (25, "MCP"), (33, "MCP"), (41, "Skills"), (46, "Skills"), (9, "Skills")];
    let mut planted = Vec::new();
    for (k, &(b, eco)) in plan.iter().enumerate() {
        let clone = plant_edits(&mut r, &bases[b], 0.03, 3);
        let name = format!("clone{k:02}");
        corpus.add(eco, &format!("forker{k:02}"), &name, &[("src/main.py", render_source(&clone)), ("README.md", format!("# {name}\n"))]);
        let base_eco = if b < 40 { "MCP" } else { "Skills" };
        let group = match (base_eco, eco) {
            ("MCP", "MCP") => ComparisonGroup::McpMcp,
            ("Skills", "Skills") => ComparisonGroup::SkillsSkills,
            _ => ComparisonGroup::McpSkills,
        };
        planted.push((format!("base{b:02}"), name, group));
    }
    corpus.write_manifest();
    (corpus, planted)
}

fn planted_clones() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (corpus, planted) = planted_corpus(&dir.path().join("src"));
    let manifest = corpus.root.join("manifest.ndjson");
    let out = dir.path().join("run");
    toolclone(&["all", "--manifest", s(&manifest), "--out", s(&out), "--seed", "42"])?;
    let layout = RunLayout::new(&out);
    let sets = run::load_score_sets(&layout).map_err(|e| e.to_string())?;
    let edges = BucketEdges::default();

    let expected: BTreeMap<ComparisonGroup, BTreeSet<PairId>> = planted.iter().fold(BTreeMap::new(), |mut m, (b, c, g)| {
        m.entry(*g).or_default().insert(pair_of(&corpus, b, c));
        m
    });
    let expected_clusters: BTreeSet<Vec<RepoId>> = planted
        .iter()
        .map(|(b, c, _)| {
            let mut v = vec![repo_id(&corpus, b), repo_id(&corpus, c)];
            v.sort();
            v
        })
        .collect();

    let mut min_score: BTreeMap<Metric, f64> = BTreeMap::new();
    for metric in Metric::ALL {
        let mut all_candidates = Vec::new();
        for group in ComparisonGroup::ALL {
            let set: &ScoreSet = sets.iter().find(|x| x.group == group && x.metric == metric).ok_or("missing score set")?;
            let want = expected.get(&group).cloned().unwrap_or_default();
            for p in &want {
                let score = set.scores.iter().find(|x| &x.pair == p).ok_or_else(|| format!("planted pair {p} not scored"))?.score;
                ensure!(edges.index_of(score) == Some(4), "{metric} {group}: planted pair {p} scored {score}");
                let m = min_score.entry(metric).or_insert(100.0);
                *m = m.min(score);
            }
            let got: BTreeSet<PairId> = extract_candidates(set, 80.0).into_iter().map(|c| c.pair).collect();
            ensure!(got == want, "{metric} {group}: candidates {got:?} != planted {want:?}");
            all_candidates.extend(got);
        }
        let clusters: BTreeSet<Vec<RepoId>> = cluster_candidates(all_candidates.iter()).into_iter().collect();
        ensure!(clusters == expected_clusters, "{metric}: clusters differ from planted components");
    }
    let report = layout.report();
    for f in ["prevalence.csv", "calibration.csv", "report.md"] {
        ensure!(report.join(f).exists(), "report/{f} missing");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "10/10 planted pairs in [80, 100] (min jaccard {:.1}, min ctph {:.0}); candidates and clusters exact; {elapsed:.1?}",
        min_score[&Metric::Jaccard],
        min_score[&Metric::Ctph]
    ))
}

// ---------------------------------------------------------------------------

fn words(n: usize, tag: &str) -> String {
    (0..n).map(|i| format!("{tag}w{i}\n")).collect()
}

fn exclusion_and_filtering() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut r = rng(0xe1);
    let vocab = vocabulary(&mut r, 3000);
    let mut corpus = SynthCorpus::new(&dir.path().join("src"));
    let shared = render_source(&random_tokens(&mut r, &vocab, 400));
    corpus.add("MCP", "carol", "carol-one", &[("index.js", shared.clone())]);
    corpus.add("MCP", "carol", "carol-two", &[("index.js", shared.clone())]);
    corpus.add("Skills", "carol", "carol-skill", &[("skill.py", shared)]);
    for i in 0..3 {
        corpus.add("MCP", &format!("other{i}"), &format!("other{i}"), &[("main.py", render_source(&random_tokens(&mut r, &vocab, 300)))]);
    }
    corpus.add("MCP", "short", "tokens49", &[("main.py", words(49, "a"))]);
    corpus.add("Skills", "exact", "tokens50", &[("main.py", words(50, "b"))]);
    let manifest = corpus.write_manifest();

    let out = dir.path().join("run");
    for stage in ["ingest", "normalize", "score"] {
        toolclone(&[stage, "--manifest", s(&manifest), "--out", s(&out)])?;
    }
    let layout = RunLayout::new(&out);
    let docs = run::load_docs_index(&layout).map_err(|e| e.to_string())?;
    let count_of = |name: &str| docs.documents.iter().find(|d| d.repo_id == repo_id(&corpus, name)).map(|d| d.token_count);
    ensure!(count_of("tokens49") == Some(49) && count_of("tokens50") == Some(50), "fixture token counts {:?} {:?}", count_of("tokens49"), count_of("tokens50"));

    let store = run::load_corpus(&layout).map_err(|e| e.to_string())?;
    let dev = |id: &RepoId| store.get(id).map(|r| r.developer_key.clone()).unwrap_or_default();
    let sets = run::load_score_sets(&layout).map_err(|e| e.to_string())?;
    let (t49, t50) = (repo_id(&corpus, "tokens49"), repo_id(&corpus, "tokens50"));
    let mut records = 0usize;
    let mut seen50 = false;
    for set in &sets {
        for ps in &set.scores {
            records += 1;
            ensure!(dev(&ps.pair.a) != dev(&ps.pair.b), "same-developer pair {} in {} {}", ps.pair, set.group, set.metric);
            ensure!(ps.pair.a != t49 && ps.pair.b != t49, "49-token repository scored");
            seen50 |= ps.pair.a == t50 || ps.pair.b == t50;
        }
    }
    ensure!(seen50, "50-token repository missing from score stores");
    let summary = run::load_score_summary(&layout).map_err(|e| e.to_string())?;
    ensure!(summary.below_min_tokens == vec![t49.clone()], "below-min list {:?}", summary.below_min_tokens);
    let excluded: u64 = summary.excluded_same_developer.values().sum();
    ensure!(excluded == 3, "expected 3 excluded same-developer pairs, got {excluded}");

    // Control: the same pairs are scored once exclusion is off.
    let open = dir.path().join("open");
    for stage in ["ingest", "normalize", "score"] {
        toolclone(&[stage, "--manifest", s(&manifest), "--out", s(&open), "--no-exclude-same-developer"])?;
    }
    let control = run::load_score_sets(&RunLayout::new(&open)).map_err(|e| e.to_string())?;
    let same_dev = control.iter().flat_map(|x| &x.scores).filter(|ps| dev(&ps.pair.a) == dev(&ps.pair.b)).count();
    ensure!(same_dev == 3 * 2, "control run scored {same_dev} same-developer records");
    Ok(format!("{records} records, none same-developer ({excluded} pairs excluded); 49 tokens dropped, 50 kept"))
}

// ---------------------------------------------------------------------------

/// Random repositories plus clone pairs at graded edit levels, so that
/// several buckets hold fewer than 20 pairs.
fn graded_corpus(root: &Path, n_random: usize, seed: u64) -> SynthCorpus {
    let mut r = rng(seed);
    let vocab = vocabulary(&mut r, 20_000);
    let mut corpus = SynthCorpus::new(root);
    for i in 0..n_random {
        let eco = if i % 4 == 3 { "Skills" } else { "MCP" };
        let len = r.random_range(200..600);
        let tokens = random_tokens(&mut r, &vocab, len);
        corpus.add(eco, &format!("d{i}"), &format!("r{i:04}"), &[("main.js", render_source(&tokens))]);
    }
    for (k, fraction) in [0.1, 0.3, 0.45, 0.6, 0.75, 0.05, 0.5, 0.25].into_iter().enumerate() {
        let base = random_tokens(&mut r, &vocab, 500);
        let eco = if k % 3 == 2 { "Skills" } else { "MCP" };
        corpus.add(eco, &format!("g{k}a"), &format!("g{k}a"), &[("tool.py", render_source(&base))]);
        let edited = plant_edits(&mut r, &base, fraction, 4);
        corpus.add(eco, &format!("g{k}b"), &format!("g{k}b"), &[("tool.py", render_source(&edited))]);
    }
    corpus.write_manifest();
    corpus
}

fn dir_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = e.map_err(|e| e.to_string())?.path();
        out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = graded_corpus(&dir.path().join("src"), 184, 0xde7);
    ensure!(corpus.repos.len() == 200, "fixture has {} repos", corpus.repos.len());
    let manifest = corpus.root.join("manifest.ndjson");
    let (one, eight) = (dir.path().join("j1"), dir.path().join("j8"));
    toolclone(&["all", "--manifest", s(&manifest), "--out", s(&one), "--jobs", "1", "--seed", "7"])?;
    toolclone(&["all", "--manifest", s(&manifest), "--out", s(&eight), "--jobs", "8", "--seed", "7"])?;

    let (l1, l8) = (RunLayout::new(&one), RunLayout::new(&eight));
    let (s1, s8) = (dir_files(&l1.scores())?, dir_files(&l8.scores())?);
    ensure!(s1.len() == 7, "expected 6 score files and a summary, got {}", s1.len());
    ensure!(s1 == s8, "score files differ between 1 and 8 workers");
    let plan1 = fs::read(l1.plan()).map_err(|e| e.to_string())?;
    ensure!(plan1 == fs::read(l8.plan()).map_err(|e| e.to_string())?, "plans differ across worker counts");
    toolclone(&["sample", "--out", s(&one)])?;
    ensure!(plan1 == fs::read(l1.plan()).map_err(|e| e.to_string())?, "re-sampling changed the plan");

    let plan = run::load_plan(&l1).map_err(|e| e.to_string())?;
    let sets = run::load_score_sets(&l1).map_err(|e| e.to_string())?;
    let mut small = 0;
    for st in &plan.strata {
        let set = sets.iter().find(|x| x.group == st.group && x.metric == st.metric).ok_or("missing set")?;
        let members: BTreeSet<PairId> = set.scores.iter().filter(|p| plan.edges.index_of(p.score) == Some(st.bucket)).map(|p| p.pair.clone()).collect();
        ensure!(members.len() as u64 == st.total, "{} {} bucket {}: total {} vs {}", st.metric, st.group, st.bucket, st.total, members.len());
        ensure!(st.pairs.len() == members.len().min(20), "{} {} bucket {}: sampled {}", st.metric, st.group, st.bucket, st.pairs.len());
        let picked: BTreeSet<PairId> = st.pairs.iter().map(|p| p.pair()).collect();
        ensure!(picked.is_subset(&members) && picked.len() == st.pairs.len(), "sample outside its stratum");
        if members.len() <= 20 {
            ensure!(picked == members, "small stratum not fully enumerated");
            small += usize::from(!members.is_empty());
        }
    }
    ensure!(small > 0, "fixture produced no non-empty small strata");
    let records: usize = sets.iter().map(|x| x.len()).sum();
    Ok(format!("{records} records byte-identical at 1 and 8 workers; plan byte-identical; {small} non-empty strata of size <= 20 fully enumerated"))
}

// ---------------------------------------------------------------------------

fn conservation() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = graded_corpus(&dir.path().join("src"), 60, 0xc0);
    let manifest = corpus.root.join("manifest.ndjson");
    let out = dir.path().join("run");
    toolclone(&["all", "--manifest", s(&manifest), "--out", s(&out), "--threshold", "40"])?;
    let layout = RunLayout::new(&out);
    let summary = run::load_score_summary(&layout).map_err(|e| e.to_string())?;
    ensure!(summary.below_min_tokens.is_empty(), "fixture has repositories below min tokens");
    ensure!(summary.excluded_same_developer.values().all(|&x| x == 0), "fixture has exclusions");
    let n = corpus.repos.len();
    let analysis = run::load_analysis(&layout).map_err(|e| e.to_string())?;
    let mut pieces = Vec::new();
    for metric in Metric::ALL {
        let sets: Vec<_> = analysis.sets.iter().filter(|x| x.metric == metric).collect();
        let total: usize = sets.iter().map(|x| x.records).sum();
        ensure!(total == n * (n - 1) / 2, "{metric}: {total} records for n = {n}");
        for set in sets {
            let hist: u64 = set.histogram.counts.iter().sum();
            let buckets: u64 = set.buckets.counts.iter().sum();
            ensure!(hist == set.records as u64 && buckets == set.records as u64, "{metric} {}: hist {hist}, buckets {buckets}, records {}", set.group, set.records);
            let scores = read_set(&layout, set.group, metric)?;
            let clusters = cluster_candidates(extract_candidates(&scores, analysis.threshold).iter().map(|c| &c.pair));
            let sizes: usize = clusters.iter().map(Vec::len).sum();
            let distinct: BTreeSet<&RepoId> = clusters.iter().flatten().collect();
            ensure!(sizes == set.prevalence.repos_involved && distinct.len() == sizes, "{metric} {}: cluster sizes {sizes}, repos {}", set.group, set.prevalence.repos_involved);
            pieces.push(set.prevalence.repos_involved);
        }
    }
    ensure!(pieces.iter().any(|&x| x > 0), "no clusters formed");
    Ok(format!("n = {n}: {} records per metric; histogram, bucket and cluster totals conserved", n * (n - 1) / 2))
}

fn read_set(layout: &RunLayout, group: ComparisonGroup, metric: Metric) -> Result<ScoreSet, String> {
    ScoreStore::new(layout.scores()).read_set(group, metric).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------

fn throughput() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut r = rng(0x7e);
    let vocab = vocabulary(&mut r, 30_000);
    let mut corpus = SynthCorpus::new(&dir.path().join("src"));
    for i in 0..1000 {
        let eco = if i % 5 == 4 { "Skills" } else { "MCP" };
        let len = r.random_range(300..1500);
        let tokens = random_tokens(&mut r, &vocab, len);
        corpus.add(eco, &format!("d{i}"), &format!("r{i:04}"), &[("main.ts", render_source(&tokens))]);
    }
    let manifest = corpus.write_manifest();
    let out = dir.path().join("run");
    toolclone(&["ingest", "--manifest", s(&manifest), "--out", s(&out), "--jobs", "8"])?;
    toolclone(&["normalize", "--out", s(&out), "--jobs", "8"])?;
    let start = Instant::now();
    toolclone(&["score", "--out", s(&out), "--jobs", "8"])?;
    let elapsed = start.elapsed();
    let summary = run::load_score_summary(&RunLayout::new(&out)).map_err(|e| e.to_string())?;
    let records: usize = summary.sets.iter().map(|x| x.records).sum();
    ensure!(records == 2 * 499_500, "{records} records");
    ensure!(elapsed < Duration::from_secs(300), "scoring took {elapsed:?}");
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    Ok(format!("{records} records (both metrics) scored in {elapsed:.1?} with 8 workers on {cores} core(s)"))
}

// ---------------------------------------------------------------------------

fn main() {
    let checks: [(&str, Criterion); 8] = [
        ("wilson calibration reproduces the verification table", wilson_table),
        ("ctph oracle equivalence", ctph_oracle),
        ("jaccard oracle equivalence", jaccard_oracle),
        ("planted clones end to end", planted_clones),
        ("same-developer exclusion and token filter", exclusion_and_filtering),
        ("determinism across worker counts and reruns", determinism),
        ("conservation of pair, bin and cluster counts", conservation),
        ("scoring throughput at 1000 repositories", throughput),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in checks {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|x| x.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{:.1?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{:.1?}]", start.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
