mod common;

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use semfts_core::index::{
    build_index, entities_in_contexts, entity_item, filter_contexts_by_entities, item_entity,
    EntityList, Index, IndexConfig,
};
use semfts_core::nlp::{
    decompose, Context, ContextId, ContextItem, DecomposeOptions, Item, SourceToken,
};
use semfts_core::ontology::{EntityId, Ontology};
use semfts_core::oracle::{random_instance, InstanceShape, Scanner};

fn single_context(ontology: &Ontology) -> Context {
    let words = "the usable parts of #Rhubarb are its edible #Stalk";
    let items = words
        .split(' ')
        .enumerate()
        .map(|(i, w)| ContextItem {
            pos: i as u32 + 1,
            item: match w.strip_prefix('#') {
                Some(name) => Item::Entity(ontology.entity_by_name(name).unwrap()),
                None => Item::Word(w.to_string()),
            },
            source: SourceToken {
                sentence: 0,
                token: i as u32,
            },
        })
        .collect();
    Context {
        id: ContextId(0),
        doc: 0,
        sentence: 0,
        tokens: Vec::new(),
        items,
    }
}

#[test]
fn edib_block_of_the_single_context() {
    let ontology = Ontology::parse_tsv(&common::fixture("ontology.tsv")).unwrap();
    let index = build_index(
        &[single_context(&ontology)],
        &ontology,
        None,
        &IndexConfig::default(),
    )
    .unwrap();
    let block = index.block("edib").unwrap();
    assert_eq!(index.word(block.words.start), Some("edible"));
    let list = &block.list;
    let rhubarb = ontology.entity_by_name("Rhubarb").unwrap();
    let stalk = ontology.entity_by_name("Stalk").unwrap();
    assert_eq!(list.contexts, [0, 0, 0]);
    assert_eq!(
        list.items,
        [
            block.words.start as u64,
            entity_item(rhubarb),
            entity_item(stalk)
        ]
    );
    assert_eq!(list.scores, [1, 1, 1]);
    assert_eq!(list.positions, [8, 5, 9]);
}

#[test]
fn fixture_index_saves_and_reopens() {
    let (ontology, corpus) = common::load();
    let contexts = decompose(&corpus, &ontology, &DecomposeOptions::default());
    let index = build_index(&contexts, &ontology, Some(&corpus), &IndexConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    index.save(dir.path()).unwrap();
    let back = Index::open(dir.path()).unwrap();
    assert_eq!(back.to_files(), index.to_files());
    assert_eq!(back.num_contexts(), 13);

    let fourth = back.excerpt(3).unwrap();
    assert_eq!(fourth.doc, "rhubarb");
    assert_eq!(fourth.active_text(), "however its leaves are toxic.");
    assert!(fourth.text.starts_with("The usable parts of rhubarb"));

    // Files from different builds do not mix.
    let other = build_index(
        &contexts[..5],
        &ontology,
        Some(&corpus),
        &IndexConfig::default(),
    )
    .unwrap();
    let [c, _, e] = other.to_files();
    let [_, r, _] = index.to_files();
    assert!(Index::from_files(&c, &r, &e).is_err());
}

fn brute_check(seed: u64, prefix_len: usize) {
    let mut rng = StdRng::seed_from_u64(seed);
    let shape = InstanceShape::default();
    let inst = random_instance(&mut rng, &shape);
    let config = IndexConfig {
        prefix_len,
        ..Default::default()
    };
    let index = build_index(&inst.contexts, &inst.ontology, None, &config).unwrap();
    let scan = Scanner::new(&inst.contexts, &inst.ontology);
    let n_entities = inst.ontology.num_entities() as u32;

    for _ in 0..5 {
        let w = &inst.vocab[rng.gen_range(0..inst.vocab.len())];
        let p = &w[..rng.gen_range(1..=w.len())];
        let list = index.fetch_block(&format!("{p}*"));
        list.validate().unwrap();
        let ids = list.context_ids();
        assert_eq!(ids, scan.prefix_contexts(p), "seed {seed} prefix {p}");
        assert_eq!(index.fetch_block(w).context_ids(), scan.word_contexts(w));

        // Every entity occurrence of a matching context is in the list.
        for (c, run) in list.context_runs() {
            let mut listed: Vec<u64> = run
                .filter(|&i| item_entity(list.items[i]).is_some())
                .map(|i| list.items[i])
                .collect();
            let mut expected: Vec<u64> = inst.contexts[c as usize]
                .items
                .iter()
                .filter_map(|it| match it.item {
                    Item::Entity(e) => Some(entity_item(e)),
                    _ => None,
                })
                .collect();
            listed.sort_unstable();
            expected.sort_unstable();
            assert_eq!(listed, expected);
        }

        let all = entities_in_contexts(&list, None);
        let counts = scan.entity_counts(&ids, &inst.contexts, None);
        assert_eq!(
            all.iter().collect::<Vec<_>>(),
            counts.into_iter().collect::<Vec<_>>()
        );

        let restrict: BTreeSet<EntityId> = (0..n_entities)
            .filter(|_| rng.gen_bool(0.4))
            .map(EntityId)
            .collect();
        let sorted: Vec<EntityId> = restrict.iter().copied().collect();
        let some = entities_in_contexts(&list, Some(&sorted));
        let counts = scan.entity_counts(&ids, &inst.contexts, Some(&restrict));
        assert_eq!(
            some.iter().collect::<Vec<_>>(),
            counts.into_iter().collect::<Vec<_>>()
        );

        let filtered = filter_contexts_by_entities(&list, &EntityList::from_ids(sorted.clone()));
        assert_eq!(filtered.context_ids(), scan.filter(&ids, &restrict));
        for p in filtered.iter() {
            assert_eq!(p.witness, p.entity().is_some_and(|e| restrict.contains(&e)));
        }
    }
}

#[test]
fn fetch_and_list_operations_match_brute_force() {
    for seed in 0..300 {
        brute_check(seed, 1 + seed as usize % 4);
    }
}

#[test]
fn random_indexes_round_trip_through_files() {
    for seed in 0..50 {
        let mut rng = StdRng::seed_from_u64(1000 + seed);
        let inst = random_instance(&mut rng, &InstanceShape::default());
        let index = build_index(
            &inst.contexts,
            &inst.ontology,
            None,
            &IndexConfig::default(),
        )
        .unwrap();
        let [c, r, e] = index.to_files();
        let back = Index::from_files(&c, &r, &e).unwrap();
        assert_eq!(back.to_files(), [c, r, e]);
        assert_eq!(back.vocab(), index.vocab());
    }
}
