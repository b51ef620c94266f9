mod common;

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use semfts_core::index::{build_index, Index, IndexConfig};
use semfts_core::nlp::{decompose, DecomposeOptions, Mode};
use semfts_core::ontology::EntityId;
use semfts_core::oracle::{random_instance, random_query, InstanceShape, Scanner};
use semfts_core::query::{
    apply_suggestion, change_root, evaluate, parse_query, suggest, Arc, Evidence, Focus, NodePath,
    NodeRef, OwItem, PathStep, QueryNode, QueryTree, SuggestOptions, SuggestionKind,
};

const EDIBLE_LEAVES: &str = "class:Plant (native-to entity:Europe) (occurs-with edible leav*)";

fn fixture_index(mode: Mode) -> Index {
    let (ontology, corpus) = common::load();
    let contexts = decompose(&corpus, &ontology, &DecomposeOptions::with_mode(mode));
    build_index(&contexts, &ontology, Some(&corpus), &IndexConfig::default()).unwrap()
}

fn names(index: &Index, q: &str) -> Vec<String> {
    let q = parse_query(q, index.ontology()).unwrap();
    evaluate(&q, index)
        .unwrap()
        .entities()
        .into_iter()
        .map(|e| index.ontology().entity_name(e).to_string())
        .collect()
}

#[test]
fn contexts_drop_the_rhubarb_false_positive() {
    let contexts = fixture_index(Mode::Contexts);
    let sentences = fixture_index(Mode::Sentences);
    assert_eq!(names(&contexts, EDIBLE_LEAVES), ["Broccoli"]);
    let mut s = names(&sentences, EDIBLE_LEAVES);
    s.sort();
    assert_eq!(s, ["Broccoli", "Rhubarb"]);
}

#[test]
fn broccoli_group_carries_fact_and_text_evidence() {
    let index = fixture_index(Mode::Contexts);
    let q = parse_query(EDIBLE_LEAVES, index.ontology()).unwrap();
    let results = evaluate(&q, &index).unwrap();
    let group = &results.groups[0];
    let europe = index.ontology().entity_by_name("Europe").unwrap();
    assert!(group
        .evidence
        .iter()
        .any(|e| matches!(e, Evidence::Fact { object, .. } if *object == europe)));
    let texts: Vec<String> = group
        .evidence
        .iter()
        .filter_map(|e| match e {
            Evidence::Context { context, .. } => {
                Some(index.excerpt(*context).unwrap().active_text())
            }
            _ => None,
        })
        .collect();
    assert!(texts.iter().any(|t| t.contains("edible")), "{texts:?}");
}

#[test]
fn single_entity_and_reverse_relation_queries() {
    let index = fixture_index(Mode::Contexts);
    assert_eq!(names(&index, "entity:Broccoli"), ["Broccoli"]);
    let mut countries = names(&index, "class:Country (~cultivated-in entity:Broccoli)");
    countries.sort();
    assert_eq!(countries, ["China", "Italy"]);
    assert_eq!(
        names(&index, "class:Person (~described-by class:Vegetable)"),
        ["Carl_Linnaeus"]
    );
    assert!(names(&index, "class:Plant (occurs-with zebra)").is_empty());
}

#[test]
fn rerooting_at_europe() {
    let index = fixture_index(Mode::Contexts);
    let q = parse_query(EDIBLE_LEAVES, index.ontology()).unwrap();
    let at_europe = change_root(&q, &"0".parse().unwrap()).unwrap();
    assert_eq!(
        at_europe.to_text(index.ontology()),
        "entity:Europe (~native-to class:Plant (occurs-with edible leav*))"
    );
    assert_eq!(
        names(&index, &at_europe.to_text(index.ontology())),
        ["Europe"]
    );
    let back = change_root(&at_europe, &"0".parse().unwrap()).unwrap();
    assert_eq!(back.root.node, q.root.node);
    let continents =
        parse_query("class:Plant (native-to class:Continent)", index.ontology()).unwrap();
    let r = evaluate(
        &change_root(&continents, &"0".parse().unwrap()).unwrap(),
        &index,
    )
    .unwrap();
    assert_eq!(r.total(), 2);
}

fn oracle_instance(seed: u64) {
    let shape = InstanceShape::default();
    let mut rng = StdRng::seed_from_u64(seed);
    let inst = random_instance(&mut rng, &shape);
    let index = build_index(
        &inst.contexts,
        &inst.ontology,
        None,
        &IndexConfig::default(),
    )
    .unwrap();
    let scan = Scanner::new(&inst.contexts, &inst.ontology);
    for _ in 0..4 {
        let q = random_query(&mut rng, &inst, &shape);
        let text = q.to_text(&inst.ontology);
        assert_eq!(parse_query(&text, &inst.ontology).unwrap(), q, "{text}");
        let json = q.to_json(&inst.ontology);
        assert_eq!(QueryTree::from_json(&json, &inst.ontology).unwrap(), q);

        let got: BTreeSet<EntityId> = evaluate(&q, &index)
            .unwrap()
            .entities()
            .into_iter()
            .collect();
        assert_eq!(got, scan.evaluate(&q), "seed {seed}: {text}");

        // Dropping an arc can only widen the result.
        if !q.root.arcs.is_empty() {
            let mut wider = q.clone();
            wider.root.arcs.remove(rng.gen_range(0..q.root.arcs.len()));
            assert!(scan.evaluate(&wider).is_superset(&got));
        }

        for path in node_paths(&q.root) {
            check_reroot(&q, &path, &scan);
        }
    }
}

fn node_paths(node: &QueryNode) -> Vec<NodePath> {
    let mut out = Vec::new();
    for (a, arc) in node.arcs.iter().enumerate() {
        match arc {
            Arc::Relation { target, .. } => {
                let step = PathStep { arc: a, item: None };
                out.push(NodePath(vec![step]));
                out.extend(node_paths(target).into_iter().map(|p| prepend(step, p)));
            }
            Arc::OccursWith(items) => {
                for (i, item) in items.iter().enumerate() {
                    if let OwItem::Node(n) = item {
                        let step = PathStep {
                            arc: a,
                            item: Some(i),
                        };
                        out.push(NodePath(vec![step]));
                        out.extend(node_paths(n).into_iter().map(|p| prepend(step, p)));
                    }
                }
            }
        }
    }
    out
}

fn prepend(step: PathStep, mut p: NodePath) -> NodePath {
    p.0.insert(0, step);
    p
}

/// An entity is a result of the rerooted query iff fixing the node to that
/// entity leaves the original query satisfiable.
fn check_reroot(q: &QueryTree, path: &NodePath, scan: &Scanner) {
    let rerooted = change_root(q, path).unwrap();
    let got = scan.evaluate(&rerooted);
    let sub = QueryTree {
        root: q.root.at(path).unwrap().clone(),
    };
    let mut expected = BTreeSet::new();
    for t in scan.evaluate(&sub) {
        let mut fixed = q.clone();
        fixed.root.at_mut(path).unwrap().node = NodeRef::Entity(t);
        if !scan.evaluate(&fixed).is_empty() {
            expected.insert(t);
        }
    }
    assert_eq!(got, expected, "reroot at {path}");
}

#[test]
fn evaluation_matches_the_scan_interpreter() {
    for seed in 0..250 {
        oracle_instance(seed);
    }
}

/// Query states visited while building the figure query interactively.
fn states(index: &Index) -> Vec<(Option<QueryTree>, Focus, &'static str)> {
    let o = index.ontology();
    let edible_leaves = parse_query(EDIBLE_LEAVES, o).unwrap();
    let plant = parse_query("class:Plant", o).unwrap();
    let root = NodePath::root();
    let new_ow = |n: &NodePath| Focus::OccursWith {
        node: n.clone(),
        arc: None,
    };
    let mut out = vec![];
    for typed in [
        "", "p", "plan", "b", "e", "ed", "le", "veg", "c", "rhubarb ", "is ",
    ] {
        out.push((None, Focus::Node(root.clone()), typed));
        out.push((Some(plant.clone()), Focus::Node(root.clone()), typed));
        out.push((Some(plant.clone()), new_ow(&root), typed));
        out.push((
            Some(edible_leaves.clone()),
            Focus::Node(root.clone()),
            typed,
        ));
        out.push((
            Some(edible_leaves.clone()),
            Focus::Node("0".parse().unwrap()),
            typed,
        ));
        out.push((
            Some(edible_leaves.clone()),
            Focus::OccursWith {
                node: root.clone(),
                arc: Some(1),
            },
            typed,
        ));
    }
    out.push((Some(plant.clone()), new_ow(&root), "edible lea"));
    out.push((Some(plant), new_ow(&root), "edible "));
    out
}

#[test]
fn every_suggestion_leads_to_results() {
    let index = fixture_index(Mode::Contexts);
    let options = SuggestOptions::default();
    let mut offered = 0;
    for (q, focus, typed) in states(&index) {
        let s = suggest(q.as_ref(), &focus, typed, &index, &options).unwrap();
        for sug in s.all() {
            offered += 1;
            let applied = apply_suggestion(q.as_ref(), &focus, sug, index.ontology()).unwrap();
            let r = evaluate(&applied, &index).unwrap();
            assert!(
                !r.is_empty(),
                "{:?} at {focus:?} typed {typed:?}: {}",
                sug,
                applied.to_text(index.ontology())
            );
        }
    }
    assert!(offered > 50, "{offered}");
}

#[test]
fn figure_two_stations() {
    let index = fixture_index(Mode::Contexts);
    let o = index.ontology();
    let options = SuggestOptions::default();
    let root = NodePath::root();

    let s = suggest(None, &Focus::Node(root.clone()), "plan", &index, &options).unwrap();
    assert!(s.classes.iter().any(|c| c.value == "Plant"));
    assert_eq!(s.preselected_entry().unwrap().value, "Plant");
    let q = apply_suggestion(
        None,
        &Focus::Node(root.clone()),
        s.preselected_entry().unwrap(),
        o,
    )
    .unwrap();
    assert_eq!(q.to_text(o), "class:Plant");

    let focus = Focus::OccursWith {
        node: root.clone(),
        arc: None,
    };
    let s = suggest(Some(&q), &focus, "edible lea", &index, &options).unwrap();
    let pick = s.words.iter().find(|w| w.value == "edible leaves").unwrap();
    let q = apply_suggestion(Some(&q), &focus, pick, o).unwrap();
    assert_eq!(q.to_text(o), "class:Plant (occurs-with edible leaves)");

    let edible_leaves = parse_query(EDIBLE_LEAVES, o).unwrap();
    let s = suggest(
        Some(&edible_leaves),
        &Focus::Node(root),
        "",
        &index,
        &options,
    )
    .unwrap();
    let pre = s.preselected_entry().unwrap();
    assert_eq!(
        (pre.kind, pre.value.as_str()),
        (SuggestionKind::Relation, "cultivated-in")
    );
}

#[test]
fn prefix_limits_are_reported() {
    let mut index = fixture_index(Mode::Contexts);
    index.set_min_prefix(3);
    let q = parse_query("class:Plant (occurs-with ed*)", index.ontology()).unwrap();
    assert!(evaluate(&q, &index).is_err());
    index.set_min_prefix(1);
    index.set_max_postings(2);
    assert!(evaluate(&q, &index).is_err());
}
