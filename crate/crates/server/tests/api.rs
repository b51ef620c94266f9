mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use common::{
    app, fixture_app, fixture_index, get, post, send, uri, without_timing, EDIBLE_LEAVES,
};
use semfts::api::ApiConfig;
use semfts_core::nlp::Mode;
use serde_json::{json, Value};

fn group_names(body: &Value) -> Vec<String> {
    body["groups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["entity"]["name"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn suggest_plan_offers_plant() {
    let app = fixture_app();
    let (status, body) = get(&app, "/suggest", &[("typed", "plan")]).await;
    assert_eq!(status, StatusCode::OK);
    let classes: Vec<&str> = body["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["value"].as_str().unwrap())
        .collect();
    assert!(classes.contains(&"Plant"));
    assert_eq!(body["preselected"], json!({ "kind": "class", "index": 0 }));
    assert_eq!(body["classes"][0]["query"], "class:Plant");
}

#[tokio::test]
async fn search_single_entity() {
    let app = fixture_app();
    let (status, body) = get(&app, "/search", &[("q", "entity:Broccoli")]).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(group_names(&body), ["Broccoli"]);
    assert_eq!(body["total"], 1);
}

#[tokio::test]
async fn edible_leaves_query_has_active_excerpt() {
    let app = fixture_app();
    let (status, body) = get(&app, "/search", &[("q", EDIBLE_LEAVES)]).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(group_names(&body), ["Broccoli"]);
    let group = &body["groups"][0];
    assert_eq!(group["facts"][0]["relation"]["name"], "native-to");
    assert!(group["facts"][0]["relation"]["id"].is_u64());
    assert_eq!(group["facts"][0]["object"]["name"], "Europe");
    let active: Vec<&str> = group["excerpts"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|e| e["segments"].as_array().unwrap())
        .filter(|s| s["active"] == true)
        .map(|s| s["text"].as_str().unwrap())
        .collect();
    assert!(active.iter().any(|t| t.contains("edible")), "{active:?}");
}

#[tokio::test]
async fn post_accepts_text_and_tree() {
    let app = fixture_app();
    let (_, by_get) = get(&app, "/search", &[("q", EDIBLE_LEAVES)]).await;
    let (s1, by_text) = post(&app, "/search", &json!({ "q": EDIBLE_LEAVES })).await;
    let tree = by_get["tree"].clone();
    let (s2, by_tree) = post(&app, "/search", &json!({ "query": tree })).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(
        without_timing(by_text.clone()),
        without_timing(by_get.clone())
    );
    assert_eq!(without_timing(by_tree), without_timing(by_get));
    let tree_text = by_text["tree"].to_string();
    let (s3, by_get_tree) = get(&app, "/search", &[("query", &tree_text)]).await;
    assert_eq!(s3, StatusCode::OK);
    assert_eq!(group_names(&by_get_tree), ["Broccoli"]);
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let app = fixture_app();
    let (status, body) = get(&app, "/search", &[("q", "class:Plant (native-to")]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["kind"], "syntax");
    assert_eq!(body["error"]["position"], 22);

    let (status, body) = get(
        &app,
        "/search",
        &[("q", "class:Person (native-to entity:Europe)")],
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["kind"], "typing");

    let (status, _) = get(&app, "/search", &[("q", "class:Fungus")]).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = get(&app, "/search", &[]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(&app, "/search", &[("q", "entity:Broccoli"), ("page", "x")]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(&app, "/suggest", &[("q", "class:Plant"), ("focus", "7")]).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = get(&app, "/excerpt", &[("context", "999")]).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["kind"], "unknown_context");
}

#[tokio::test]
async fn too_broad_queries_get_retry_hint() {
    let mut index = fixture_index(Mode::Contexts);
    index.set_max_postings(3);
    let app = app(index, ApiConfig::default());
    let req = Request::get(uri("/search", &[("q", "class:Plant (occurs-with l*)")]))
        .body(Body::empty())
        .unwrap();
    let (status, headers, body) = send(&app, req).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(headers["retry-after"], "1");
    assert_eq!(body["error"]["kind"], "too_broad");
}

#[tokio::test]
async fn identical_requests_give_identical_bodies() {
    let app = fixture_app();
    for (path, params) in [
        ("/search", vec![("q", "class:Plant (occurs-with leav*)")]),
        (
            "/suggest",
            vec![
                ("q", "class:Plant"),
                ("occurs_with", "new"),
                ("typed", "edible lea"),
            ],
        ),
    ] {
        let (_, a) = get(&app, path, &params).await;
        let (_, b) = get(&app, path, &params).await;
        assert_eq!(without_timing(a.clone()), without_timing(b));
        assert!(a["timing_ms"].as_f64().is_some());
    }
}

#[tokio::test]
async fn pages_partition_the_results() {
    let config = ApiConfig {
        page_size: 3,
        ..Default::default()
    };
    let app = app(fixture_index(Mode::Contexts), config);
    let mut seen = Vec::new();
    for page in 0..5 {
        let (status, body) = get(
            &app,
            "/search",
            &[("q", "class:Entity"), ("page", &page.to_string())],
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["total"], 12);
        seen.extend(group_names(&body));
    }
    let mut unique = seen.clone();
    unique.sort();
    unique.dedup();
    assert_eq!((seen.len(), unique.len()), (12, 12));
}

#[tokio::test]
async fn evidence_is_capped_per_arc() {
    let app = fixture_app();
    let (_, body) = get(
        &app,
        "/search",
        &[
            ("q", "entity:Rhubarb (occurs-with class:Entity)"),
            ("evidence", "1"),
        ],
    )
    .await;
    let group = &body["groups"][0];
    assert_eq!(group["excerpts"].as_array().unwrap().len(), 1);
    assert!(group["more_excerpts"].as_u64().unwrap() >= 1);
}

#[tokio::test]
async fn legacy_pin_puts_broccoli_first() {
    let q = [("q", "class:Vegetable (occurs-with class:Entity)")];
    let (_, plain) = get(&fixture_app(), "/search", &q).await;
    assert_eq!(group_names(&plain)[0], "Rhubarb");
    let pinned = app(
        fixture_index(Mode::Contexts),
        ApiConfig {
            legacy_pin: true,
            ..Default::default()
        },
    );
    let (_, body) = get(&pinned, "/search", &q).await;
    let names = group_names(&body);
    assert_eq!(names[0], "Broccoli");
    assert_eq!(names.len(), group_names(&plain).len());
    let (_, body) = get(
        &pinned,
        "/search",
        &[("q", "class:Vegetable (native-to entity:Asia)")],
    )
    .await;
    assert_eq!(group_names(&body), ["Spinach"]);
}

#[tokio::test]
async fn excerpt_and_meta() {
    let app = fixture_app();
    let (_, meta) = get(&app, "/meta", &[]).await;
    assert_eq!(meta["contexts"], 13);
    assert_eq!(meta["prefix_len"], 4);
    for r in meta["relations"].as_array().unwrap() {
        assert!(r["id"].is_u64() && r["source"]["id"].is_u64() && r["target"]["name"].is_string());
    }
    let (status, ex) = get(&app, "/excerpt", &[("context", "3")]).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ex["generation"], meta["generation"]);
    assert_eq!(ex["doc"], "rhubarb");
    let active: String = ex["segments"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["active"] == true)
        .map(|s| s["text"].as_str().unwrap().trim())
        .collect::<Vec<_>>()
        .join(" ");
    assert_eq!(active, "however its leaves are toxic.");
    let (_, by_post) = post(&app, "/excerpt", &json!({ "context": 3 })).await;
    assert_eq!(by_post, ex);
}

#[tokio::test]
async fn cors_headers_are_sent() {
    let app = fixture_app();
    let req = Request::get("/meta")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let (_, headers, _) = send(&app, req).await;
    assert_eq!(headers["access-control-allow-origin"], "*");
}

#[tokio::test]
async fn suggestions_in_occurs_with_mode() {
    let app = fixture_app();
    let body = json!({ "q": "class:Plant", "occurs_with": "new", "typed": "edible lea" });
    let (status, s) = post(&app, "/suggest", &body).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["words"][0]["value"], "edible leaves");
    assert_eq!(
        s["words"][0]["query"],
        "class:Plant (occurs-with edible leaves)"
    );
    let (_, s) = get(&app, "/suggest", &[("q", EDIBLE_LEAVES)]).await;
    let pre = &s["preselected"];
    assert_eq!(pre["kind"], "relation");
    let i = pre["index"].as_u64().unwrap() as usize;
    assert_eq!(s["relations"][i]["value"], "cultivated-in");
    let cultivated = meta_relation_id(&app, "cultivated-in").await;
    assert_eq!(s["relations"][i]["id"], cultivated);
    assert!(s["words"]
        .as_array()
        .unwrap()
        .iter()
        .all(|w| w.get("id").is_none()));
    assert!(s["classes"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["id"].is_u64()));
}

async fn meta_relation_id(app: &axum::Router, name: &str) -> u64 {
    let (_, meta) = get(app, "/meta", &[]).await;
    meta["relations"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .and_then(|r| r["id"].as_u64())
        .unwrap()
}
