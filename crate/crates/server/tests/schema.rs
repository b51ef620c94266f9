mod common;

use axum::http::StatusCode;
use common::*;
use semfts::api::ApiConfig;
use semfts_core::nlp::Mode;
use serde_json::{json, Value};

fn validator(def: &str) -> jsonschema::Validator {
    let path = format!("{}/../../docs/api.schema.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut schema: Value = serde_json::from_str(&text).unwrap();
    schema["$ref"] = json!(format!("#/$defs/{def}"));
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(def: &str, body: &Value) {
    let v = validator(def);
    let errors: Vec<String> = v
        .iter_errors(body)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{def}: {errors:#?}\n{body:#}");
}

#[tokio::test]
async fn search_responses_match_schema() {
    let app = fixture_app();
    let queries = [
        EDIBLE_LEAVES,
        "class:Plant",
        "entity:Europe (~native-to class:Plant)",
        "class:Plant (occurs-with toxic)",
        "class:Location (~cultivated-in class:Plant (occurs-with edible))",
    ];
    for q in queries {
        let (status, body) = get(&app, "/search", &[("q", q)]).await;
        assert_eq!(status, StatusCode::OK, "{q}");
        assert_valid("search", &body);
    }
    let (_, reverse) = get(&app, "/search", &[("q", queries[2])]).await;
    assert_eq!(reverse["groups"][0]["facts"][0]["reverse"], true);

    let (_, paged) = get(&app, "/search", &[("q", "class:Plant"), ("page", "3")]).await;
    assert_valid("search", &paged);
    let tree = json!({ "class": "Plant", "arcs": [{ "occurs_with": [{ "prefix": "leav" }] }] });
    let (status, body) = post(&app, "/search", &json!({ "query": tree, "evidence": 0 })).await;
    assert_eq!(status, StatusCode::OK);
    assert_valid("search", &body);
}

#[tokio::test]
async fn suggest_responses_match_schema() {
    let app = fixture_app();
    let calls = [
        json!({}),
        json!({ "typed": "pla" }),
        json!({ "q": "class:Plant", "typed": "" }),
        json!({ "q": "class:Plant", "occurs_with": "new", "typed": "ed" }),
        json!({ "q": EDIBLE_LEAVES }),
        json!({ "q": EDIBLE_LEAVES, "focus": "0", "typed": "eu" }),
        json!({ "q": EDIBLE_LEAVES, "occurs_with": "1", "typed": "to" }),
        json!({ "q": "class:Location" }),
    ];
    let mut seen = std::collections::BTreeSet::new();
    for call in calls {
        let (status, body) = post(&app, "/suggest", &call).await;
        assert_eq!(status, StatusCode::OK, "{call}");
        assert_valid("suggest", &body);
        for list in ["words", "classes", "instances", "relations"] {
            if !body[list].as_array().unwrap().is_empty() {
                seen.insert(list);
            }
        }
    }
    assert_eq!(seen.len(), 4, "{seen:?}");
}

#[tokio::test]
async fn excerpt_and_meta_responses_match_schema() {
    let app = fixture_app();
    let (_, meta) = get(&app, "/meta", &[]).await;
    assert_valid("meta", &meta);
    let n = meta["contexts"].as_u64().unwrap();
    for c in 0..n {
        let (status, body) = get(&app, "/excerpt", &[("context", &c.to_string())]).await;
        assert_eq!(status, StatusCode::OK);
        assert_valid("excerpt", &body);
    }
}

#[tokio::test]
async fn error_responses_match_schema() {
    let app = fixture_app();
    let mut strict = fixture_index(Mode::Contexts);
    strict.set_min_prefix(3);
    strict.set_max_postings(1);
    let strict = common::app(strict, ApiConfig::default());
    let cases = [
        (&app, "/search", vec![("q", "class:Plant (")], "syntax"),
        (&app, "/search", vec![], "bad_request"),
        (&app, "/search", vec![("q", "class:Tree")], "unknown_name"),
        (
            &app,
            "/search",
            vec![("q", "class:Location (native-to entity:Europe)")],
            "typing",
        ),
        (
            &strict,
            "/search",
            vec![("q", "class:Plant (occurs-with e*)")],
            "prefix_too_short",
        ),
        (
            &strict,
            "/search",
            vec![("q", "class:Plant (occurs-with edible)")],
            "too_broad",
        ),
        (
            &app,
            "/suggest",
            vec![("q", "class:Plant"), ("focus", "4")],
            "focus",
        ),
        (
            &app,
            "/excerpt",
            vec![("context", "9999")],
            "unknown_context",
        ),
    ];
    for (app, path, params, kind) in cases {
        let (status, body) = get(app, path, &params).await;
        assert!(status.is_client_error() || status.is_server_error());
        assert_eq!(body["error"]["kind"], kind, "{body}");
        assert_valid("error", &body);
    }
}

#[tokio::test]
async fn schema_rejects_bare_names() {
    let app = fixture_app();
    let (_, mut body) = get(&app, "/search", &[("q", EDIBLE_LEAVES)]).await;
    body["groups"][0]["facts"][0]["relation"] = json!("native-to");
    assert!(!validator("search").is_valid(&body));
    let (_, mut meta) = get(&app, "/meta", &[]).await;
    meta["relations"][0]["source"] = json!("Plant");
    assert!(!validator("meta").is_valid(&meta));
}
