//! HTTP/JSON review API over a run directory.
//!
//! | Method | Path | |
//! |---|---|---|
//! | GET | `/plan` | strata and labeling progress |
//! | GET | `/pairs?metric&group&bucket` | sampled pairs with label status |
//! | GET | `/pair/{id}` | both repositories, scores, files |
//! | POST | `/pair/{id}/label` | submit a label |
//! | GET | `/calibration` | current calibration rows |
//! | GET | `/rubric` | the six rubric steps |

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::str::FromStr;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use toolclone::analysis::{format_rate, CalibrationRow};
use toolclone::corpus::{CorpusStore, RepoRecord};
use toolclone::metrics::Metric;
use toolclone::normalize::{collect_source_files, normalize_file, FileFilterPolicy};
use toolclone::pairwise::{ComparisonGroup, PairId, ScoreStore};
use toolclone::run::{self, RunError, RunLayout};
use toolclone::verify::{LabelStore, LabelSubmission, SamplePlan, VerificationLabel, VerifyError, RUBRIC};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message, "status": self.status.as_u16() }))).into_response()
    }
}

impl From<RunError> for ApiError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Missing { .. } => Self::new(StatusCode::CONFLICT, e.to_string()),
            other => Self::internal(other),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Plan-dependent state, loaded once the plan exists.
struct Review {
    plan: SamplePlan,
    corpus: CorpusStore,
    /// Scores of every sampled pair under every scored metric.
    scores: HashMap<(ComparisonGroup, PairId), BTreeMap<Metric, f64>>,
    labels: Mutex<LabelStore>,
}

impl Review {
    fn load(layout: &RunLayout) -> Result<Self, RunError> {
        let plan = run::load_plan(layout)?;
        let corpus = run::load_corpus(layout)?;
        let mut wanted: HashMap<(ComparisonGroup, PairId), BTreeMap<Metric, f64>> = HashMap::new();
        for st in &plan.strata {
            for p in &st.pairs {
                wanted.entry((st.group, p.pair())).or_default();
            }
        }
        let summary = run::load_score_summary(layout)?;
        let store = ScoreStore::new(layout.scores());
        for s in &summary.sets {
            for ps in store.read_set(s.group, s.metric).map_err(RunError::from)?.scores {
                if let Some(slot) = wanted.get_mut(&(s.group, ps.pair)) {
                    slot.insert(s.metric, ps.score);
                }
            }
        }
        let labels = run::open_labels(layout)?;
        Ok(Self { plan, corpus, scores: wanted, labels: Mutex::new(labels) })
    }
}

#[derive(Clone)]
pub struct AppState {
    layout: RunLayout,
    review: Arc<RwLock<Option<Arc<Review>>>>,
}

impl AppState {
    pub fn new(layout: RunLayout) -> Self {
        Self { layout, review: Arc::new(RwLock::new(None)) }
    }

    /// The loaded review state, loading it from disk on first use.
    fn review(&self) -> ApiResult<Arc<Review>> {
        if let Some(r) = self.review.read().map_err(ApiError::internal)?.as_ref() {
            return Ok(r.clone());
        }
        let mut slot = self.review.write().map_err(ApiError::internal)?;
        if let Some(r) = slot.as_ref() {
            return Ok(r.clone());
        }
        let loaded = Arc::new(Review::load(&self.layout)?);
        *slot = Some(loaded.clone());
        Ok(loaded)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/plan", get(get_plan))
        .route("/pairs", get(get_pairs))
        .route("/pair/{id}", get(get_pair))
        .route("/pair/{id}/label", post(post_label))
        .route("/calibration", get(get_calibration))
        .route("/rubric", get(get_rubric))
        .with_state(state)
}

#[derive(Serialize)]
struct StratumView {
    metric: Metric,
    group: ComparisonGroup,
    bucket: usize,
    range: toolclone::analysis::Bucket,
    total: u64,
    sampled: usize,
    labeled: usize,
}

async fn get_plan(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let review = state.review()?;
    let labels = review.labels.lock().map_err(ApiError::internal)?;
    let strata: Vec<StratumView> = review
        .plan
        .strata
        .iter()
        .map(|s| StratumView {
            metric: s.metric,
            group: s.group,
            bucket: s.bucket,
            range: s.range,
            total: s.total,
            sampled: s.pairs.len(),
            labeled: s.pairs.iter().filter(|p| labels.current(&p.id).is_some()).count(),
        })
        .collect();
    let labeled: usize = strata.iter().map(|s| s.labeled).sum();
    Ok(Json(json!({
        "seed": review.plan.seed,
        "per_bucket": review.plan.per_bucket,
        "edges": review.plan.edges,
        "sampled": review.plan.sampled_count(),
        "labeled": labeled,
        "strata": strata,
    })))
}

#[derive(Debug, Default, Deserialize)]
struct PairsQuery {
    metric: Option<String>,
    group: Option<String>,
    bucket: Option<usize>,
}

fn parse_filter<T: FromStr>(raw: &Option<String>, what: &str) -> ApiResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    raw.as_deref()
        .map(|s| s.parse::<T>().map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("{what}: {e}"))))
        .transpose()
}

async fn get_pairs(State(state): State<AppState>, Query(q): Query<PairsQuery>) -> ApiResult<Json<Value>> {
    let review = state.review()?;
    let metric: Option<Metric> = parse_filter(&q.metric, "metric")?;
    let group: Option<ComparisonGroup> = parse_filter(&q.group, "group")?;
    let labels = review.labels.lock().map_err(ApiError::internal)?;
    let mut out = Vec::new();
    for s in &review.plan.strata {
        if metric.is_some_and(|m| m != s.metric) || group.is_some_and(|g| g != s.group) || q.bucket.is_some_and(|b| b != s.bucket) {
            continue;
        }
        for p in &s.pairs {
            let current = labels.current(&p.id);
            out.push(json!({
                "id": p.id,
                "a": p.a,
                "b": p.b,
                "metric": s.metric,
                "group": s.group,
                "bucket": s.bucket,
                "score": p.score,
                "status": if current.is_some() { "labeled" } else { "unlabeled" },
                "label": current.map(|l| l.label),
            }));
        }
    }
    Ok(Json(json!({ "pairs": out })))
}

#[derive(Serialize)]
struct FileView {
    path: String,
    bytes: u64,
    raw: String,
    normalized: String,
}

fn repo_panel(rec: &RepoRecord) -> Value {
    let policy = FileFilterPolicy::default();
    let mut files = Vec::new();
    let mut unreadable = 0usize;
    match collect_source_files(&rec.local_path, &policy) {
        Ok(listing) => {
            unreadable += listing.unreadable;
            for rel in listing.paths {
                match std::fs::read(rec.local_path.join(&rel)) {
                    Ok(raw) => files.push(FileView {
                        bytes: raw.len() as u64,
                        raw: String::from_utf8_lossy(&raw).into_owned(),
                        normalized: normalize_file(&rel, &raw),
                        path: rel,
                    }),
                    Err(_) => unreadable += 1,
                }
            }
        }
        Err(_) => unreadable += 1,
    }
    json!({
        "repo_id": rec.repo_id,
        "display_name": rec.display_name,
        "source_url": rec.source_url,
        "developer_key": rec.developer_key,
        "ecosystem": rec.ecosystem,
        "primary_language": rec.primary_language,
        "languages": rec.languages,
        "total_bytes": files.iter().map(|f| f.bytes).sum::<u64>(),
        "unreadable_files": unreadable,
        "files": files,
    })
}

fn history_json(history: &[&VerificationLabel]) -> Value {
    serde_json::to_value(history).unwrap_or(Value::Null)
}

async fn get_pair(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let review = state.review()?;
    let entry = review.plan.get(&id).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown pair {id}")))?;
    let st = entry.stratum;
    let pair = entry.pair.pair();
    let scores = review.scores.get(&(st.group, pair.clone())).cloned().unwrap_or_default();
    let panel = |rid| {
        review
            .corpus
            .get(rid)
            .map(repo_panel)
            .ok_or_else(|| ApiError::internal(format!("repository {rid} missing from corpus")))
    };
    let (a, b) = (panel(&pair.a)?, panel(&pair.b)?);
    let labels = review.labels.lock().map_err(ApiError::internal)?;
    Ok(Json(json!({
        "id": id,
        "metric": st.metric,
        "group": st.group,
        "bucket": st.bucket,
        "range": st.range,
        "score": entry.pair.score,
        "scores": scores,
        "repos": [a, b],
        "label": labels.current(&id),
        "history": history_json(&labels.history_of(&id)),
    })))
}

async fn post_label(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let review = state.review()?;
    if review.plan.get(&id).is_none() {
        return Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown pair {id}")));
    }
    let submission: LabelSubmission = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("invalid label body: {e}")))?;
    let mut labels = review.labels.lock().map_err(ApiError::internal)?;
    let stored = labels
        .record_label(&review.plan, &id, submission, chrono::Utc::now())
        .map_err(|e| match e {
            VerifyError::NotInPlan(_) => ApiError::new(StatusCode::NOT_FOUND, e.to_string()),
            VerifyError::Invalid(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
            other => ApiError::internal(other),
        })?
        .clone();
    Ok(Json(json!({ "label": stored, "history": history_json(&labels.history_of(&id)) })))
}

#[derive(Serialize)]
struct CalibrationView<'a> {
    #[serde(flatten)]
    row: &'a CalibrationRow,
    display: String,
}

async fn get_calibration(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let review = state.review()?;
    let labels = review.labels.lock().map_err(ApiError::internal)?;
    let rows = run::calibration(&review.plan, &labels)?;
    let view: Vec<CalibrationView> = rows.iter().map(|row| CalibrationView { row, display: format_rate(row) }).collect();
    Ok(Json(json!({ "rows": view })))
}

async fn get_rubric() -> Json<Value> {
    Json(json!({ "steps": RUBRIC }))
}

/// Serve on `127.0.0.1:port` until the process is stopped.
pub fn serve_blocking(layout: RunLayout, port: u16) -> std::io::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let addr = SocketAddr::from(([127, 0, 0, 1], port));
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("review API listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(AppState::new(layout))).await
    })
}
