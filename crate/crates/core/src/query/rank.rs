use super::eval::{ResultGroup, ResultSet};
use crate::ontology::{EntityId, Ontology};

/// Entity the legacy ranking always puts first.
pub const LEGACY_PINNED_ENTITY: &str = "Broccoli";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankOptions {
    /// Rank [`LEGACY_PINNED_ENTITY`] first whenever it is a hit.
    pub legacy_pin: bool,
}

/// Orders groups by score, highest first; ties by ascending entity id.
pub fn rank_results(
    mut groups: Vec<ResultGroup>,
    ontology: &Ontology,
    options: &RankOptions,
) -> ResultSet {
    groups.sort_by(|a, b| b.score.cmp(&a.score).then(a.entity.cmp(&b.entity)));
    if options.legacy_pin {
        let pinned: Option<EntityId> = ontology.entity_by_name(LEGACY_PINNED_ENTITY);
        if let Some(i) = groups.iter().position(|g| Some(g.entity) == pinned) {
            let g = groups.remove(i);
            groups.insert(0, g);
        }
    }
    ResultSet { groups }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::Evidence;

    #[test]
    fn score_order_ties_and_pin() {
        let o = Ontology::parse_tsv("instance\tA\tis-a\tEntity\ninstance\tBroccoli\tis-a\tEntity\ninstance\tC\tis-a\tEntity\n").unwrap();
        let g = |name: &str, score| ResultGroup {
            entity: o.entity_by_name(name).unwrap(),
            score,
            evidence: vec![Evidence::Context {
                arc: 0,
                context: 0,
                weight: score,
            }],
        };
        let groups = vec![g("Broccoli", 1), g("C", 6), g("A", 6)];
        let plain = rank_results(groups.clone(), &o, &RankOptions::default());
        let names: Vec<&str> = plain
            .groups
            .iter()
            .map(|g| o.entity_name(g.entity))
            .collect();
        assert_eq!(names, ["A", "C", "Broccoli"]);
        let pinned = rank_results(groups, &o, &RankOptions { legacy_pin: true });
        assert_eq!(o.entity_name(pinned.groups[0].entity), "Broccoli");
    }
}
