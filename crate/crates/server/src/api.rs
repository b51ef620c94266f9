//! JSON endpoints: `/search`, `/suggest`, `/excerpt` and `/meta`. Every
//! endpoint accepts GET with query-string parameters and POST with a JSON
//! body of the same fields.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use semfts_core::index::{Excerpt, Index};
use semfts_core::ontology::{ClassId, Direction, EntityId, Ontology};
use semfts_core::query::{
    apply_suggestion, evaluate_with, parse_query, suggest, Evidence, Focus, NodePath, QueryError,
    QueryTree, RankOptions, SuggestOptions, Suggestion, SuggestionKind,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

#[derive(Debug, Clone)]
pub struct ApiConfig {
    pub page_size: usize,
    pub suggestions: usize,
    /// Excerpts returned per result group and query arc unless the request
    /// asks for a different number.
    pub evidence_per_arc: usize,
    pub legacy_pin: bool,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            page_size: 20,
            suggestions: 8,
            evidence_per_arc: 3,
            legacy_pin: false,
            cors_origin: None,
        }
    }
}

const MAX_EVIDENCE_PER_ARC: usize = 100;

#[derive(Clone)]
pub struct AppState {
    index: Arc<Index>,
    config: Arc<ApiConfig>,
    generation: String,
}

impl AppState {
    pub fn new(index: Index, config: ApiConfig) -> Self {
        let generation = format!("{:016x}", index.generation());
        AppState {
            index: Arc::new(index),
            config: Arc::new(config),
            generation,
        }
    }
}

pub fn router(state: AppState) -> Router {
    let origin = match &state.config.cors_origin {
        Some(o) => match HeaderValue::from_str(o) {
            Ok(v) => AllowOrigin::exact(v),
            Err(_) => {
                log::warn!("ignoring invalid CORS origin {o:?}");
                AllowOrigin::any()
            }
        },
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/search", get(search_get).post(search_post))
        .route("/suggest", get(suggest_get).post(suggest_post))
        .route("/excerpt", get(excerpt_get).post(excerpt_post))
        .route("/meta", get(meta))
        .layer(cors)
        .with_state(state)
}

pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
    position: Option<usize>,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind: "bad_request",
            message: message.into(),
            position: None,
        }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let message = e.to_string();
        let (status, kind, position) = match e {
            QueryError::Syntax { position, .. } => {
                (StatusCode::BAD_REQUEST, "syntax", Some(position))
            }
            QueryError::InvalidPath(_) | QueryError::NotANode => {
                (StatusCode::BAD_REQUEST, "focus", None)
            }
            QueryError::UnknownClass(_)
            | QueryError::UnknownEntity(_)
            | QueryError::UnknownRelation(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "unknown_name", None)
            }
            QueryError::Typing { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "typing", None),
            QueryError::PrefixTooShort { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "prefix_too_short", None)
            }
            QueryError::TooBroad { .. } => (StatusCode::SERVICE_UNAVAILABLE, "too_broad", None),
        };
        ApiError {
            status,
            kind,
            message,
            position,
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "kind": self.kind, "message": self.message });
        if let Some(p) = self.position {
            error["position"] = json!(p);
        }
        let mut response = (self.status, Json(json!({ "error": error }))).into_response();
        if self.status == StatusCode::SERVICE_UNAVAILABLE {
            response
                .headers_mut()
                .insert(header::RETRY_AFTER, HeaderValue::from_static("1"));
        }
        response
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

#[derive(Debug, Clone, Serialize)]
pub struct Named {
    pub id: u32,
    pub name: String,
}

impl Named {
    fn entity(o: &Ontology, e: EntityId) -> Self {
        Named {
            id: e.0,
            name: o.entity_name(e).to_string(),
        }
    }

    fn class(o: &Ontology, c: ClassId) -> Self {
        Named {
            id: c.0,
            name: o.class_name(c).to_string(),
        }
    }

    fn relation(o: &Ontology, name: &str) -> Self {
        Named {
            id: o.relation_id(name).map_or(u32::MAX, |i| i as u32),
            name: name.to_string(),
        }
    }
}

/// Reads a query given as text (`q`) or as a JSON tree (`query`). Over GET
/// the tree arrives as a JSON string.
fn resolve_query(
    q: &Option<String>,
    query: &Option<Value>,
    ontology: &Ontology,
) -> Result<Option<QueryTree>, ApiError> {
    match (q, query) {
        (Some(_), Some(_)) => Err(ApiError::bad_request(
            "give either `q` or `query`, not both",
        )),
        (Some(text), None) if text.trim().is_empty() => Ok(None),
        (Some(text), None) => Ok(Some(parse_query(text, ontology)?)),
        (None, Some(Value::Null)) | (None, None) => Ok(None),
        (None, Some(Value::String(json))) => {
            let v: Value = serde_json::from_str(json)
                .map_err(|e| ApiError::bad_request(format!("`query` is not JSON: {e}")))?;
            Ok(Some(QueryTree::from_json(&v, ontology)?))
        }
        (None, Some(v)) => Ok(Some(QueryTree::from_json(v, ontology)?)),
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct SearchRequest {
    #[serde(default)]
    pub q: Option<String>,
    #[serde(default)]
    pub query: Option<Value>,
    #[serde(default)]
    pub page: usize,
    /// Excerpts per group and arc.
    #[serde(default)]
    pub evidence: Option<usize>,
}

#[derive(Debug, Serialize)]
struct FactOut {
    arc: usize,
    relation: Named,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    reverse: bool,
    subject: Named,
    object: Named,
}

#[derive(Debug, Serialize)]
struct SegmentOut<'a> {
    text: &'a str,
    active: bool,
}

#[derive(Debug, Serialize)]
struct ExcerptOut<'a> {
    context: u32,
    doc: &'a str,
    title: &'a str,
    text: &'a str,
    segments: Vec<SegmentOut<'a>>,
}

impl<'a> ExcerptOut<'a> {
    fn new(e: &'a Excerpt) -> Self {
        ExcerptOut {
            context: e.context,
            doc: &e.doc,
            title: &e.title,
            text: &e.text,
            segments: e
                .segments
                .iter()
                .map(|s| SegmentOut {
                    text: e.segment_text(s),
                    active: s.active,
                })
                .collect(),
        }
    }
}

async fn search_get(
    State(s): State<AppState>,
    req: Result<Query<SearchRequest>, QueryRejection>,
) -> ApiResult {
    search(&s, &req?.0)
}

async fn search_post(
    State(s): State<AppState>,
    req: Result<Json<SearchRequest>, JsonRejection>,
) -> ApiResult {
    search(&s, &req?.0)
}

fn search(s: &AppState, req: &SearchRequest) -> ApiResult {
    let start = Instant::now();
    let o = s.index.ontology();
    let q = resolve_query(&req.q, &req.query, o)?
        .ok_or_else(|| ApiError::bad_request("missing query: set `q` or `query`"))?;
    let rank = RankOptions {
        legacy_pin: s.config.legacy_pin,
    };
    let results = evaluate_with(&q, &s.index, &rank)?;
    let per_arc = req
        .evidence
        .unwrap_or(s.config.evidence_per_arc)
        .min(MAX_EVIDENCE_PER_ARC);
    let page_size = s.config.page_size.max(1);
    let first = req.page.saturating_mul(page_size);

    let mut groups = Vec::new();
    for g in results.groups.iter().skip(first).take(page_size) {
        let mut facts = Vec::new();
        let mut contexts: BTreeMap<usize, Vec<(u64, u32)>> = BTreeMap::new();
        for ev in &g.evidence {
            match ev {
                Evidence::Fact {
                    arc,
                    relation,
                    direction,
                    subject,
                    object,
                } => facts.push(FactOut {
                    arc: *arc,
                    relation: Named::relation(o, relation),
                    reverse: *direction == Direction::Reverse,
                    subject: Named::entity(o, *subject),
                    object: Named::entity(o, *object),
                }),
                Evidence::Context {
                    arc,
                    context,
                    weight,
                } => contexts.entry(*arc).or_default().push((*weight, *context)),
            }
        }
        let mut excerpts = Vec::new();
        let mut more = 0;
        for (arc, mut list) in contexts {
            list.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            more += list.len().saturating_sub(per_arc);
            for &(weight, context) in list.iter().take(per_arc) {
                let ex = s.index.excerpt(context).map_err(|e| ApiError {
                    status: StatusCode::INTERNAL_SERVER_ERROR,
                    kind: "index",
                    message: e.to_string(),
                    position: None,
                })?;
                let mut v = serde_json::to_value(ExcerptOut::new(&ex)).expect("excerpt serializes");
                v["arc"] = json!(arc);
                v["weight"] = json!(weight);
                excerpts.push(v);
            }
        }
        groups.push(json!({
            "entity": Named::entity(o, g.entity),
            "score": g.score,
            "facts": facts,
            "excerpts": excerpts,
            "more_excerpts": more,
        }));
    }
    Ok(Json(json!({
        "generation": s.generation,
        "query": q.to_text(o),
        "tree": q.to_json(o),
        "total": results.total(),
        "page": req.page,
        "page_size": page_size,
        "groups": groups,
        "timing_ms": elapsed_ms(start),
    })))
}

#[derive(Debug, Default, Deserialize)]
pub struct SuggestRequest {
    #[serde(default)]
    pub q: Option<String>,
    #[serde(default)]
    pub query: Option<Value>,
    /// Path of the node in focus, e.g. `1.0:2`; empty for the root.
    #[serde(default)]
    pub focus: String,
    /// Focus on an occurs-with arc of the focused node: an arc index, or
    /// `new` for a fresh arc.
    #[serde(default)]
    pub occurs_with: Option<String>,
    #[serde(default)]
    pub typed: String,
}

async fn suggest_get(
    State(s): State<AppState>,
    req: Result<Query<SuggestRequest>, QueryRejection>,
) -> ApiResult {
    suggest_impl(&s, &req?.0)
}

async fn suggest_post(
    State(s): State<AppState>,
    req: Result<Json<SuggestRequest>, JsonRejection>,
) -> ApiResult {
    suggest_impl(&s, &req?.0)
}

fn suggest_impl(s: &AppState, req: &SuggestRequest) -> ApiResult {
    let start = Instant::now();
    let o = s.index.ontology();
    let q = resolve_query(&req.q, &req.query, o)?;
    let node: NodePath = req.focus.parse()?;
    let focus = match req.occurs_with.as_deref().map(str::trim) {
        None | Some("") => Focus::Node(node),
        Some("new") => Focus::OccursWith { node, arc: None },
        Some(a) => Focus::OccursWith {
            node,
            arc: Some(
                a.parse()
                    .map_err(|_| ApiError::bad_request(format!("bad occurs_with arc {a:?}")))?,
            ),
        },
    };
    let options = SuggestOptions {
        limit: s.config.suggestions,
        ..Default::default()
    };
    let suggestions = suggest(q.as_ref(), &focus, &req.typed, &s.index, &options)?;

    let render = |list: &[Suggestion]| -> Result<Vec<Value>, ApiError> {
        list.iter()
            .map(|sug| {
                let applied = apply_suggestion(q.as_ref(), &focus, sug, o)?;
                let mut v = serde_json::to_value(sug).expect("suggestion serializes");
                let id = match sug.kind {
                    SuggestionKind::Word => None,
                    SuggestionKind::Class => o.resolve_class(&sug.value).map(|c| c.0),
                    SuggestionKind::Instance => o.resolve_entity(&sug.value).map(|e| e.0),
                    SuggestionKind::Relation => o.relation_id(&sug.value).map(|i| i as u32),
                };
                if let Some(id) = id {
                    v["id"] = json!(id);
                }
                v["query"] = json!(applied.to_text(o));
                Ok(v)
            })
            .collect()
    };
    let preselected = suggestions
        .preselected
        .map(|(kind, index)| json!({ "kind": kind, "index": index }));
    Ok(Json(json!({
        "generation": s.generation,
        "query": q.as_ref().map(|q| q.to_text(o)),
        "words": render(suggestions.list(SuggestionKind::Word))?,
        "classes": render(suggestions.list(SuggestionKind::Class))?,
        "instances": render(suggestions.list(SuggestionKind::Instance))?,
        "relations": render(suggestions.list(SuggestionKind::Relation))?,
        "preselected": preselected,
        "timing_ms": elapsed_ms(start),
    })))
}

#[derive(Debug, Deserialize)]
pub struct ExcerptRequest {
    pub context: u32,
}

async fn excerpt_get(
    State(s): State<AppState>,
    req: Result<Query<ExcerptRequest>, QueryRejection>,
) -> ApiResult {
    excerpt(&s, &req?.0)
}

async fn excerpt_post(
    State(s): State<AppState>,
    req: Result<Json<ExcerptRequest>, JsonRejection>,
) -> ApiResult {
    excerpt(&s, &req?.0)
}

fn excerpt(s: &AppState, req: &ExcerptRequest) -> ApiResult {
    let ex = s.index.excerpt(req.context).map_err(|e| ApiError {
        status: StatusCode::NOT_FOUND,
        kind: "unknown_context",
        message: e.to_string(),
        position: None,
    })?;
    let mut v = serde_json::to_value(ExcerptOut::new(&ex)).expect("excerpt serializes");
    v["generation"] = json!(s.generation);
    v["items"] = json!(ex.items);
    Ok(Json(v))
}

async fn meta(State(s): State<AppState>) -> Json<Value> {
    let index = &s.index;
    let o = index.ontology();
    let relations: Vec<Value> = o
        .relations()
        .iter()
        .enumerate()
        .map(|(id, r)| {
            json!({
                "id": id,
                "name": r.name,
                "source": Named::class(o, r.source),
                "target": Named::class(o, r.target),
                "facts": r.facts().len(),
            })
        })
        .collect();
    let config = index.config();
    Json(json!({
        "generation": s.generation,
        "contexts": index.num_contexts(),
        "postings": index.num_postings(),
        "blocks": index.blocks().len(),
        "words": index.vocab().len(),
        "entities": o.num_entities(),
        "classes": o.num_classes(),
        "relations": relations,
        "prefix_len": config.prefix_len,
        "min_prefix": config.min_prefix,
        "max_postings": config.max_postings,
        "page_size": s.config.page_size,
        "suggestions": s.config.suggestions,
    }))
}

fn elapsed_ms(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}
