//! HTTP service over a bank.
//!
//! All bodies are JSON. Layer reads carry an `ETag` computed from the
//! response body; a matching `If-None-Match` yields 304.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | GET | `/documents?part=NN` | | `[DocumentSummary]` |
//! | GET | `/documents/{part}/{doc}` | | `DocumentDetail` |
//! | GET | `/documents/{part}/{doc}/{lang}/layers/{layer}` | | `LayerView` |
//! | GET | `/documents/{part}/{doc}/{lang}/projection` | | `ProjectionView` |
//! | POST | `/documents/{part}/{doc}/{lang}/gold` | `GoldRequest` | `{"status"}` |
//! | POST | `/documents/{part}/{doc}/{lang}/reannotate` | | `{"conflicts": [Conflict]}` |
//! | POST | `/bows` | `BowRequest` | `{"status"}` |
//! | GET | `/conflicts?state=open` | | `[Conflict]` |
//! | POST | `/conflicts/{id}/resolve` | `ResolveRequest` | `Conflict` |
//!
//! Errors are `{"error": message}` with 404 for unknown documents,
//! languages, layers and conflicts, 409 when resolving a closed conflict
//! and 422 for invalid BoW positions or values.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use meaningbank_core::drs::drs_alpha_equal;
use meaningbank_core::token::Lang;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bank::{Bank, BankError, Conflict, DocId, Layer, LayerView, Status};
use crate::formats;
use crate::models::ModelSet;

#[derive(Clone)]
pub struct AppState {
    pub bank: Arc<Bank>,
    pub models: Arc<RwLock<ModelSet>>,
}

impl AppState {
    pub fn new(bank: Bank, models: ModelSet) -> AppState {
        AppState {
            bank: Arc::new(bank),
            models: Arc::new(RwLock::new(models)),
        }
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

impl From<BankError> for ApiError {
    fn from(e: BankError) -> Self {
        let code = match &e {
            BankError::NotFound(_) => StatusCode::NOT_FOUND,
            BankError::InvalidPosition(_) | BankError::InvalidValue(_) => StatusCode::UNPROCESSABLE_ENTITY,
            BankError::NotOpen(_) => StatusCode::CONFLICT,
            BankError::Io(_) | BankError::Corrupt(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn not_found(what: String) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, what)
}

fn lang(s: &str) -> ApiResult<Lang> {
    s.parse().map_err(|_| not_found(format!("unknown language {:?}", s)))
}

fn layer(s: &str) -> ApiResult<Layer> {
    Layer::parse(s).ok_or_else(|| not_found(format!("unknown layer {:?}", s)))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

#[derive(Deserialize)]
struct PartQuery {
    part: Option<String>,
}

async fn list_documents(State(s): State<AppState>, Query(q): Query<PartQuery>) -> ApiResult<Response> {
    let part = match q.part.as_deref() {
        None | Some("") => None,
        Some(p) => match p.parse::<u8>() {
            Ok(n) if p.len() == 2 && n <= 99 => Some(n),
            _ => return Err(ApiError(StatusCode::BAD_REQUEST, format!("part must be two digits, found {:?}", p))),
        },
    };
    blocking(move || {
        let docs = s.bank.documents(part)?;
        Ok(Json(docs.into_iter().map(|d| s.bank.summary(d)).collect::<Vec<_>>()).into_response())
    })
    .await
}

async fn get_document(State(s): State<AppState>, Path((part, doc)): Path<(String, String)>) -> ApiResult<Response> {
    let id = DocId::parse(&part, &doc)?;
    blocking(move || Ok(Json(s.bank.detail(id)?).into_response())).await
}

fn etag(body: &[u8]) -> String {
    format!("\"{}\"", hex::encode(Sha256::digest(body)))
}

async fn get_layer(
    State(s): State<AppState>,
    Path((part, doc, l, y)): Path<(String, String, String, String)>,
    headers: HeaderMap,
) -> ApiResult<Response> {
    let id = DocId::parse(&part, &doc)?;
    let (l, y) = (lang(&l)?, layer(&y)?);
    let view: LayerView = blocking(move || Ok(s.bank.layer(id, l, y)?)).await?;
    let body = serde_json::to_vec(&view).expect("layer views serialize");
    let tag = etag(&body);
    if headers.get(header::IF_NONE_MATCH).and_then(|v| v.to_str().ok()) == Some(tag.as_str()) {
        return Ok((StatusCode::NOT_MODIFIED, [(header::ETAG, tag)]).into_response());
    }
    Ok((
        StatusCode::OK,
        [(header::ETAG, tag), (header::CONTENT_TYPE, "application/json".to_string())],
        body,
    )
        .into_response())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BowRequest {
    pub part: String,
    pub doc: String,
    pub lang: String,
    pub layer: String,
    pub position: usize,
    pub value: String,
    #[serde(default = "anonymous")]
    pub annotator: String,
}

fn anonymous() -> String {
    "anonymous".into()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StatusResponse {
    pub status: Status,
}

async fn post_bow(State(s): State<AppState>, Json(b): Json<BowRequest>) -> ApiResult<Json<StatusResponse>> {
    let id = DocId::parse(&b.part, &b.doc)?;
    let (l, y) = (lang(&b.lang)?, layer(&b.layer)?);
    if !y.accepts_bows() {
        return Err(ApiError(StatusCode::UNPROCESSABLE_ENTITY, format!("{} layers take no BoWs", y)));
    }
    blocking(move || {
        let status = s.bank.add_bow(id, l, y, b.position, &b.value, &b.annotator)?;
        Ok(Json(StatusResponse { status }))
    })
    .await
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldRequest {
    pub layer: String,
    #[serde(default = "yes")]
    pub checked: bool,
    #[serde(default = "anonymous")]
    pub annotator: String,
}

fn yes() -> bool {
    true
}

async fn post_gold(
    State(s): State<AppState>,
    Path((part, doc, l)): Path<(String, String, String)>,
    Json(g): Json<GoldRequest>,
) -> ApiResult<Json<StatusResponse>> {
    let id = DocId::parse(&part, &doc)?;
    let (l, y) = (lang(&l)?, layer(&g.layer)?);
    blocking(move || {
        let status = s.bank.set_gold(id, l, y, g.checked, &g.annotator)?;
        Ok(Json(StatusResponse { status }))
    })
    .await
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConflictsResponse {
    pub conflicts: Vec<Conflict>,
}

async fn reannotate(State(s): State<AppState>, Path((part, doc, l)): Path<(String, String, String)>) -> ApiResult<Json<ConflictsResponse>> {
    let id = DocId::parse(&part, &doc)?;
    let l = lang(&l)?;
    blocking(move || {
        let models = s.models.read();
        let conflicts = s.bank.reannotate(id, l, &models)?;
        Ok(Json(ConflictsResponse { conflicts }))
    })
    .await
}

#[derive(Deserialize)]
struct StateQuery {
    state: Option<String>,
}

async fn list_conflicts(State(s): State<AppState>, Query(q): Query<StateQuery>) -> ApiResult<Json<Vec<Conflict>>> {
    let open_only = match q.state.as_deref() {
        Some("all") => false,
        None | Some("open") => true,
        Some(other) => return Err(ApiError(StatusCode::BAD_REQUEST, format!("state must be open or all, found {:?}", other))),
    };
    blocking(move || Ok(Json(s.bank.conflicts(open_only)?))).await
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolveRequest {
    pub value: String,
    #[serde(default = "anonymous")]
    pub annotator: String,
}

async fn resolve(State(s): State<AppState>, Path(id): Path<String>, Json(r): Json<ResolveRequest>) -> ApiResult<Json<Conflict>> {
    blocking(move || Ok(Json(s.bank.resolve(&id, &r.value, &r.annotator)?))).await
}

/// Source and target side of one sentence pair, with the verdict on
/// whether their DRSs agree.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SentenceProjection {
    pub source_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub alignment: Vec<(usize, usize)>,
    pub source_derivation: String,
    pub target_derivation: String,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ProjectionView {
    pub doc: DocId,
    pub source_lang: String,
    pub target_lang: String,
    pub sentences: Vec<SentenceProjection>,
}

/// Side-by-side view of an English document and one translation.
pub fn projection_view(bank: &Bank, id: DocId, target: Lang) -> Result<ProjectionView, BankError> {
    let src_toks = bank.tokens(id, Lang::En)?;
    let tgt_toks = bank.tokens(id, target)?;
    let src_der = bank.layer(id, Lang::En, Layer::Der)?.values;
    let tgt_der = bank.layer(id, target, Layer::Der)?.values;
    let src_drs = formats::read_drs_layer(&bank.layer(id, Lang::En, Layer::Drs)?.values[0]).map_err(|e| BankError::Corrupt(e.to_string()))?;
    let tgt_drs = formats::read_drs_layer(&bank.layer(id, target, Layer::Drs)?.values[0]).map_err(|e| BankError::Corrupt(e.to_string()))?;
    let align = bank.layer(id, target, Layer::Align)?.values;
    let mut sentences = Vec::new();
    for (k, tgt) in tgt_toks.iter().enumerate() {
        let surfaces = |s: Option<&Vec<meaningbank_core::token::Token>>| -> Vec<String> {
            s.map(|s| s.iter().map(|t| t.surface.clone()).collect()).unwrap_or_default()
        };
        let alignment = match align.get(k).filter(|l| !l.trim().is_empty()) {
            Some(l) => meaningbank_core::projector::parse_alignment_line(l, k + 1).map_err(|e| BankError::Corrupt(e.to_string()))?,
            None => Vec::new(),
        };
        let verdict = match (src_drs.get(k).cloned().flatten(), tgt_drs.get(k).cloned().flatten()) {
            (Some(a), Some(b)) if drs_alpha_equal(&a, &b) => "Verified".to_string(),
            (Some(_), Some(_)) => "Failed: target DRS differs from the source DRS".to_string(),
            (None, _) => "Failed: source sentence has no DRS".to_string(),
            (_, None) => "Failed: target sentence has no DRS".to_string(),
        };
        sentences.push(SentenceProjection {
            source_tokens: surfaces(src_toks.get(k)),
            target_tokens: surfaces(Some(tgt)),
            alignment,
            source_derivation: src_der.get(k).cloned().unwrap_or_default(),
            target_derivation: tgt_der.get(k).cloned().unwrap_or_default(),
            verdict,
        });
    }
    Ok(ProjectionView {
        doc: id,
        source_lang: Lang::En.code().to_string(),
        target_lang: target.code().to_string(),
        sentences,
    })
}

async fn get_projection(State(s): State<AppState>, Path((part, doc, l)): Path<(String, String, String)>) -> ApiResult<Json<ProjectionView>> {
    let id = DocId::parse(&part, &doc)?;
    let l = lang(&l)?;
    blocking(move || Ok(Json(projection_view(&s.bank, id, l)?))).await
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/documents", get(list_documents))
        .route("/documents/{part}/{doc}", get(get_document))
        .route("/documents/{part}/{doc}/{lang}/layers/{layer}", get(get_layer))
        .route("/documents/{part}/{doc}/{lang}/projection", get(get_projection))
        .route("/documents/{part}/{doc}/{lang}/gold", post(post_gold))
        .route("/documents/{part}/{doc}/{lang}/reannotate", post(reannotate))
        .route("/bows", post(post_bow))
        .route("/conflicts", get(list_conflicts))
        .route("/conflicts/{id}/resolve", post(resolve))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
