#![allow(dead_code)]

use std::fmt::Write as _;

use axum::body::Body;
use axum::http::{HeaderMap, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use semfts::api::{router, ApiConfig, AppState};
use semfts_core::corpus::Corpus;
use semfts_core::index::{build_index, Index, IndexConfig};
use semfts_core::nlp::{
    decompose, Context, ContextId, ContextItem, DecomposeOptions, Item, Mode, SourceToken,
};
use semfts_core::ontology::{EntityId, Ontology};
use serde_json::Value;
use tower::ServiceExt;

pub const EDIBLE_LEAVES: &str = "class:Plant (native-to entity:Europe) (occurs-with edible leav*)";

pub fn fixture_path(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> String {
    let path = fixture_path(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn load() -> (Ontology, Corpus) {
    let ontology = Ontology::parse_tsv(&fixture("ontology.tsv")).unwrap();
    let corpus = Corpus::parse_jsonl(&fixture("corpus.jsonl"), &ontology)
        .unwrap()
        .corpus;
    (ontology, corpus)
}

pub fn fixture_index(mode: Mode) -> Index {
    let (ontology, corpus) = load();
    let contexts = decompose(&corpus, &ontology, &DecomposeOptions::with_mode(mode));
    build_index(&contexts, &ontology, Some(&corpus), &IndexConfig::default()).unwrap()
}

pub fn app(index: Index, config: ApiConfig) -> Router {
    router(AppState::new(index, config))
}

pub fn fixture_app() -> Router {
    app(fixture_index(Mode::Contexts), ApiConfig::default())
}

pub fn uri(path: &str, params: &[(&str, &str)]) -> String {
    let query = form_urlencoded::Serializer::new(String::new())
        .extend_pairs(params)
        .finish();
    format!("{path}?{query}")
}

pub async fn send(app: &Router, req: Request<Body>) -> (StatusCode, HeaderMap, Value) {
    let response = app.clone().oneshot(req).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let body = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, headers, body)
}

pub async fn get(app: &Router, path: &str, params: &[(&str, &str)]) -> (StatusCode, Value) {
    let req = Request::get(uri(path, params)).body(Body::empty()).unwrap();
    let (status, _, body) = send(app, req).await;
    (status, body)
}

pub async fn post(app: &Router, path: &str, body: &Value) -> (StatusCode, Value) {
    let req = Request::post(path)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, _, body) = send(app, req).await;
    (status, body)
}

/// Drops the fields that legitimately differ between identical requests.
pub fn without_timing(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("timing_ms");
    }
    v
}

pub struct SuggestCall {
    pub q: String,
    pub occurs_with: Option<&'static str>,
    pub typed: String,
}

pub struct Workload {
    pub index: Index,
    pub searches: Vec<String>,
    pub suggestions: Vec<SuggestCall>,
}

const SYLLABLES: [&str; 20] = [
    "ka", "to", "ri", "mu", "se", "la", "po", "ne", "di", "va", "go", "shi", "ru", "me", "no",
    "ta", "be", "fu", "zo", "yi",
];

/// Skewed pick from `0..n`: low indexes are much more frequent.
fn skewed(rng: &mut StdRng, n: usize) -> usize {
    ((n as f64) * rng.gen::<f64>().powi(3)) as usize
}

/// A generated collection of `n_contexts` contexts over a mid-sized
/// ontology, plus search and suggestion requests of the shapes the UI sends.
pub fn workload(n_contexts: usize, seed: u64) -> Workload {
    let mut rng = StdRng::seed_from_u64(seed);
    let n_classes = 20;
    let n_entities = 5000;
    let mut tsv = String::new();
    for c in 0..n_classes {
        let parent = if c < 4 {
            "Entity".to_string()
        } else {
            format!("K{}", rng.gen_range(0..c))
        };
        let _ = writeln!(tsv, "class\tK{c}\tsubclass-of\t{parent}");
    }
    for e in 0..n_entities {
        let _ = writeln!(
            tsv,
            "instance\tE{e}\tis-a\tK{}",
            rng.gen_range(0..n_classes)
        );
    }
    let taxonomy = Ontology::parse_tsv(&tsv).unwrap();
    let mut relations = Vec::new();
    for r in 0..5 {
        let (s, t) = (rng.gen_range(0..4), rng.gen_range(0..4));
        let _ = writeln!(tsv, "relation\tr{r}\tK{s}\tK{t}");
        let subjects = taxonomy
            .instances_of(taxonomy.class_by_name(&format!("K{s}")).unwrap())
            .unwrap();
        let objects = taxonomy
            .instances_of(taxonomy.class_by_name(&format!("K{t}")).unwrap())
            .unwrap();
        for _ in 0..4000 {
            let (a, b) = (
                subjects.choose(&mut rng).unwrap(),
                objects.choose(&mut rng).unwrap(),
            );
            let _ = writeln!(
                tsv,
                "fact\t{}\tr{r}\t{}",
                taxonomy.entity_name(*a),
                taxonomy.entity_name(*b)
            );
        }
        relations.push((r, s));
    }
    let ontology = Ontology::parse_tsv(&tsv).unwrap();

    let mut vocab: Vec<String> = (0..20000)
        .map(|_| {
            (0..rng.gen_range(2..=4))
                .map(|_| *SYLLABLES.choose(&mut rng).unwrap())
                .collect()
        })
        .collect();
    vocab.sort();
    vocab.dedup();
    vocab.shuffle(&mut rng);

    let contexts: Vec<Context> = (0..n_contexts as u32)
        .map(|id| {
            let items = (0..rng.gen_range(4..=12))
                .map(|i| ContextItem {
                    pos: i + 1,
                    item: if rng.gen_bool(0.25) {
                        Item::Entity(EntityId(skewed(&mut rng, n_entities) as u32))
                    } else {
                        Item::Word(vocab[skewed(&mut rng, vocab.len())].clone())
                    },
                    source: SourceToken {
                        sentence: id,
                        token: i,
                    },
                })
                .collect();
            Context {
                id: ContextId(id),
                doc: id / 10,
                sentence: id,
                tokens: Vec::new(),
                items,
            }
        })
        .collect();
    let index = build_index(&contexts, &ontology, None, &IndexConfig::default()).unwrap();

    let word = |rng: &mut StdRng| vocab[skewed(rng, 2000)].clone();
    let prefix = |rng: &mut StdRng| {
        let w = vocab[skewed(rng, 2000)].clone();
        w[..rng.gen_range(1..=3usize.min(w.len()))].to_string()
    };
    let mut searches = Vec::new();
    let mut suggestions = Vec::new();
    for i in 0..200 {
        let class = format!("K{}", rng.gen_range(0..n_classes));
        let (r, domain) = relations[i % relations.len()];
        searches.push(match i % 5 {
            0 => format!("class:{class} (occurs-with {}*)", prefix(&mut rng)),
            1 => format!(
                "class:{class} (occurs-with {} {})",
                word(&mut rng),
                word(&mut rng)
            ),
            2 => format!(
                "class:K{domain} (r{r} class:Entity) (occurs-with {}*)",
                prefix(&mut rng)
            ),
            3 => format!(
                "entity:E{} (occurs-with {}*)",
                skewed(&mut rng, 50),
                prefix(&mut rng)
            ),
            _ => format!(
                "class:Entity (occurs-with {} class:{class})",
                word(&mut rng)
            ),
        });
        let typed = prefix(&mut rng);
        suggestions.push(match i % 4 {
            0 => SuggestCall {
                q: String::new(),
                occurs_with: None,
                typed,
            },
            1 => SuggestCall {
                q: format!("class:{class}"),
                occurs_with: None,
                typed,
            },
            2 => SuggestCall {
                q: format!("class:{class}"),
                occurs_with: Some("new"),
                typed,
            },
            _ => SuggestCall {
                q: format!("class:{class}"),
                occurs_with: Some("new"),
                typed: format!("{} {typed}", word(&mut rng)),
            },
        });
    }
    Workload {
        index,
        searches,
        suggestions,
    }
}
