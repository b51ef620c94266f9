use std::collections::HashMap;

use serde::Serialize;

use super::tokenize::tokenize;
use crate::corpus::{Document, Sentence};
use crate::ontology::{ClassId, Direction, EntityId, Ontology, ROOT_CLASS};

/// Optional relation whose objects name a gender (`male`, `female`, `neuter`).
pub const GENDER_RELATION: &str = "has-gender";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Link,
    NameMatch,
    Pronoun,
    TheClass,
}

/// An entity mention spanning `first_token..=last_token` of a sentence.
/// `sentence` is the index of the sentence within its document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TokenAnnotation {
    pub sentence: u32,
    pub first_token: u32,
    pub last_token: u32,
    pub entity: EntityId,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gender {
    Male,
    Female,
    Neuter,
}

pub fn pronoun_gender(token: &str) -> Option<Gender> {
    match token.to_lowercase().as_str() {
        "he" | "him" | "his" | "himself" => Some(Gender::Male),
        "she" | "her" | "hers" | "herself" => Some(Gender::Female),
        "it" | "its" | "itself" => Some(Gender::Neuter),
        _ => None,
    }
}

/// Gender used for pronoun agreement. An explicit `has-gender` fact wins;
/// otherwise persons have no known gender and everything else is neuter.
pub fn gender_of(ontology: &Ontology, entity: EntityId) -> Option<Gender> {
    if let Some(rel) = ontology.relation(GENDER_RELATION) {
        if let Some(&(_, g)) = rel.image_of(Direction::Forward, entity).first() {
            return match ontology.entity_name(g).to_lowercase().as_str() {
                "male" => Some(Gender::Male),
                "female" => Some(Gender::Female),
                "neuter" => Some(Gender::Neuter),
                _ => None,
            };
        }
    }
    match ontology.class_by_name("Person") {
        Some(person) if ontology.is_instance_of(entity, person) => None,
        _ => Some(Gender::Neuter),
    }
}

struct Known {
    entity: EntityId,
    variants: Vec<Vec<String>>,
    recency: usize,
}

fn name_variants(name: &str) -> Vec<Vec<String>> {
    let full = tokenize(&name.replace('_', " "));
    let mut out = vec![full.clone()];
    if full.len() > 1 {
        for part in &full {
            let mut chars = part.chars();
            let capitalized = chars.next().is_some_and(char::is_uppercase);
            if capitalized && part.chars().count() >= 2 {
                out.push(vec![part.clone()]);
            }
        }
    }
    out
}

/// Links plus later occurrences of linked entities' names within the same
/// section. A name may be the full entity name, a capitalized part of it, or
/// the surface form of an earlier link. Longest match wins, ties go to the
/// most recently linked entity. Returns one sorted list per sentence.
pub fn recognize_entities(doc: &Document, ontology: &Ontology) -> Vec<Vec<TokenAnnotation>> {
    let mut out = Vec::with_capacity(doc.num_sentences());
    let mut flat = 0u32;
    for section in &doc.sections {
        let mut known: Vec<Known> = Vec::new();
        let mut clock = 0usize;
        for sentence in &section.sentences {
            let mut anns = Vec::new();
            let tokens = &sentence.tokens;
            let n = tokens.len();
            let mut links = sentence.links.iter().peekable();
            let mut i = 0usize;
            while i < n {
                if let Some(link) = links.next_if(|l| l.first_token as usize <= i) {
                    if (link.first_token as usize) < i {
                        continue;
                    }
                    anns.push(TokenAnnotation {
                        sentence: flat,
                        first_token: link.first_token,
                        last_token: link.last_token,
                        entity: link.entity,
                        provenance: Provenance::Link,
                    });
                    clock += 1;
                    let surface = tokens[i..=link.last_token as usize].to_vec();
                    match known.iter_mut().find(|k| k.entity == link.entity) {
                        Some(k) => {
                            k.recency = clock;
                            if !k.variants.contains(&surface) {
                                k.variants.push(surface);
                            }
                        }
                        None => {
                            let mut variants = name_variants(ontology.entity_name(link.entity));
                            if !variants.contains(&surface) {
                                variants.push(surface);
                            }
                            known.push(Known {
                                entity: link.entity,
                                variants,
                                recency: clock,
                            });
                        }
                    }
                    i = link.last_token as usize + 1;
                    continue;
                }
                let limit = links.peek().map_or(n, |l| l.first_token as usize);
                let mut best: Option<(usize, usize, EntityId)> = None;
                for k in &known {
                    for v in &k.variants {
                        let len = v.len();
                        if len == 0 || i + len > limit || tokens[i..i + len] != v[..] {
                            continue;
                        }
                        let better = match best {
                            None => true,
                            Some((bl, br, _)) => len > bl || (len == bl && k.recency > br),
                        };
                        if better {
                            best = Some((len, k.recency, k.entity));
                        }
                    }
                }
                match best {
                    Some((len, _, entity)) => {
                        anns.push(TokenAnnotation {
                            sentence: flat,
                            first_token: i as u32,
                            last_token: (i + len - 1) as u32,
                            entity,
                            provenance: Provenance::NameMatch,
                        });
                        i += len;
                    }
                    None => i += 1,
                }
            }
            out.push(anns);
            flat += 1;
        }
    }
    out
}

/// Adds pronoun and "the <class>" annotations to `recognized`.
///
/// A pronoun refers to the most recent recognized entity of the same section
/// whose gender agrees. "the <class>" refers to the document's title entity
/// when that entity is an instance of the class.
pub fn resolve_anaphora(
    doc: &Document,
    recognized: &[Vec<TokenAnnotation>],
    ontology: &Ontology,
) -> Vec<Vec<TokenAnnotation>> {
    let title_entity = ontology.resolve_entity(&doc.title);
    let classes: HashMap<String, ClassId> = ontology
        .classes()
        .filter(|&c| ontology.class_name(c) != ROOT_CLASS)
        .map(|c| (ontology.class_name(c).to_lowercase().replace('_', " "), c))
        .collect();
    let mut genders: HashMap<EntityId, Option<Gender>> = HashMap::new();

    let mut out: Vec<Vec<TokenAnnotation>> = recognized.to_vec();
    out.resize(doc.num_sentences(), Vec::new());
    let mut flat = 0usize;
    for section in &doc.sections {
        let mut recent: Vec<EntityId> = Vec::new();
        for sentence in &section.sentences {
            let added = resolve_sentence(
                sentence,
                flat as u32,
                &out[flat],
                title_entity,
                &classes,
                ontology,
                &mut genders,
                &mut recent,
            );
            if !added.is_empty() {
                out[flat].extend(added);
                out[flat].sort_by_key(|a| a.first_token);
            }
            flat += 1;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn resolve_sentence(
    sentence: &Sentence,
    flat: u32,
    existing: &[TokenAnnotation],
    title_entity: Option<EntityId>,
    classes: &HashMap<String, ClassId>,
    ontology: &Ontology,
    genders: &mut HashMap<EntityId, Option<Gender>>,
    recent: &mut Vec<EntityId>,
) -> Vec<TokenAnnotation> {
    let tokens = &sentence.tokens;
    let n = tokens.len();
    let mut added = Vec::new();
    let mut existing = existing.iter().peekable();
    let mut i = 0usize;
    while i < n {
        if let Some(a) = existing.next_if(|a| a.first_token as usize <= i) {
            if a.first_token as usize == i {
                recent.push(a.entity);
                i = a.last_token as usize + 1;
            }
            continue;
        }
        let next_start = existing.peek().map_or(n, |a| a.first_token as usize);
        let make = |first: usize, last: usize, entity, provenance| TokenAnnotation {
            sentence: flat,
            first_token: first as u32,
            last_token: last as u32,
            entity,
            provenance,
        };
        if let Some(title) = title_entity {
            if tokens[i].eq_ignore_ascii_case("the") && i + 1 < next_start {
                let class = classes.get(&tokens[i + 1].to_lowercase());
                if class.is_some_and(|&c| ontology.is_instance_of(title, c)) {
                    added.push(make(i, i + 1, title, Provenance::TheClass));
                    recent.push(title);
                    i += 2;
                    continue;
                }
            }
        }
        if let Some(g) = pronoun_gender(&tokens[i]) {
            let referent =
                recent.iter().rev().copied().find(|&e| {
                    *genders.entry(e).or_insert_with(|| gender_of(ontology, e)) == Some(g)
                });
            if let Some(e) = referent {
                added.push(make(i, i, e, Provenance::Pronoun));
            }
        }
        i += 1;
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;

    const ONTOLOGY: &str = "class\tPlant\tsubclass-of\tEntity\n\
        class\tPerson\tsubclass-of\tEntity\n\
        instance\tRhubarb\tis-a\tPlant\n\
        instance\tAlbert_Einstein\tis-a\tPerson\n\
        instance\tMarie_Curie\tis-a\tPerson\n\
        instance\tfemale\tis-a\tEntity\n\
        relation\thas-gender\tPerson\tEntity\n\
        fact\tMarie_Curie\thas-gender\tfemale\n";

    fn doc(ontology: &Ontology, json: &str) -> Document {
        let line = json.lines().map(str::trim).collect::<String>();
        let loaded = Corpus::parse_jsonl(&line, ontology).unwrap();
        loaded.corpus.documents()[0].clone()
    }

    #[test]
    fn name_matches_follow_links() {
        let o = Ontology::parse_tsv(ONTOLOGY).unwrap();
        let d = doc(
            &o,
            r#"{"id":"d","title":"Physics","sections":[{"heading":"","sentences":[
                {"text":"Albert Einstein was born .","links":[{"first_token":0,"last_token":1,"entity":"Albert_Einstein"}]},
                {"text":"Einstein moved ; Albert Einstein stayed ."}]},
                {"heading":"b","sentences":[{"text":"Einstein left ."}]}]}"#,
        );
        let anns = recognize_entities(&d, &o);
        assert_eq!(anns[0].len(), 1);
        let spans: Vec<_> = anns[1]
            .iter()
            .map(|a| (a.first_token, a.last_token))
            .collect();
        assert_eq!(spans, [(0, 0), (3, 4)]);
        assert!(anns[1]
            .iter()
            .all(|a| a.provenance == Provenance::NameMatch));
        assert!(anns[2].is_empty(), "name matching is per section");
    }

    #[test]
    fn pronouns_and_the_class() {
        let o = Ontology::parse_tsv(ONTOLOGY).unwrap();
        let d = doc(
            &o,
            r#"{"id":"d","title":"Rhubarb","sections":[{"heading":"","sentences":[
                {"text":"Marie Curie liked rhubarb .","links":[
                    {"first_token":0,"last_token":1,"entity":"Marie_Curie"},
                    {"first_token":3,"last_token":3,"entity":"Rhubarb"}]},
                {"text":"She grew it ."},
                {"text":"The plant is sour , he said ."}]}]}"#,
        );
        let base = recognize_entities(&d, &o);
        let all = resolve_anaphora(&d, &base, &o);
        let curie = o.entity_by_name("Marie_Curie").unwrap();
        let rhubarb = o.entity_by_name("Rhubarb").unwrap();
        assert_eq!(all[1].len(), 2);
        assert_eq!(
            (all[1][0].entity, all[1][0].provenance),
            (curie, Provenance::Pronoun)
        );
        assert_eq!(all[1][1].entity, rhubarb);
        assert_eq!(all[2].len(), 1, "no male referent for 'he'");
        assert_eq!(all[2][0].provenance, Provenance::TheClass);
        assert_eq!((all[2][0].first_token, all[2][0].last_token), (0, 1));
        assert_eq!(
            gender_of(&o, o.entity_by_name("Albert_Einstein").unwrap()),
            None
        );
    }
}
