use std::time::Instant;

use proptest::prelude::*;
use varspeech_core::domain::{values_equivalent, EntityKind, EntityValue, NOT_LISTED};
use varspeech_core::providers::mock_values;
use varspeech_core::renderer::{render, RenderError, RenderRequest};
use varspeech_core::spoken_parser::extract_kind;
use varspeech_core::taxonomy::{classify_rule, has_signature, VariationRegistry};

const KINDS: [EntityKind; 3] = [EntityKind::ZipCode, EntityKind::DateOfBirth, EntityKind::PersonName];

fn ids_for(kind: &EntityKind) -> Vec<String> {
    VariationRegistry::builtin().ids_for(kind).unwrap().into_iter().filter(|id| id != NOT_LISTED).collect()
}

fn recovered(value: &EntityValue, text: &str) -> bool {
    extract_kind(&value.kind, text)
        .is_some_and(|got| values_equivalent(&value.kind, &got.canonical, &value.canonical).unwrap())
}

#[test]
fn every_variation_round_trips_on_seeded_values() {
    let start = Instant::now();
    let mut cases = 0;
    for kind in KINDS {
        let values = mock_values(&kind, 20, 2024);
        assert_eq!(values.len(), 20);
        for id in ids_for(&kind) {
            for (i, v) in values.iter().enumerate() {
                let value = EntityValue::canonical(kind.clone(), v).unwrap();
                let t = render(&RenderRequest::new(value.clone(), [id.as_str()], i as u64))
                    .unwrap_or_else(|e| panic!("{id} on {v}: {e}"));
                assert!(recovered(&value, &t.text), "{id} on {v}: {:?}", t.text);
                cases += 1;
            }
        }
    }
    assert_eq!(cases, (35 + 29 + 29) * 20);
    assert!(start.elapsed().as_secs() < 10 || cfg!(debug_assertions));
}

#[test]
fn every_pair_renders_or_refuses() {
    for kind in KINDS {
        let ids = ids_for(&kind);
        let values = mock_values(&kind, 3, 99);
        for v in &values {
            let value = EntityValue::canonical(kind.clone(), v).unwrap();
            for (i, a) in ids.iter().enumerate() {
                for b in &ids[i + 1..] {
                    match render(&RenderRequest::new(value.clone(), [a.as_str(), b.as_str()], 1)) {
                        Ok(t) => {
                            assert!(recovered(&value, &t.text), "{a}+{b} on {v}: {:?}", t.text);
                            let tags = classify_rule(&t.text, &kind);
                            for id in [a, b] {
                                if has_signature(id) && id != "direct_and_simple" {
                                    assert!(tags.contains(id), "{a}+{b}: {:?} tagged {tags:?}", t.text);
                                }
                            }
                        }
                        Err(RenderError::UnsupportedCombination { .. } | RenderError::Unrepresentable { .. }) => {}
                        Err(e) => panic!("{a}+{b}: {e}"),
                    }
                }
            }
        }
    }
}

fn any_value() -> impl Strategy<Value = EntityValue> {
    prop_oneof![
        (0u32..100_000).prop_map(|n| EntityValue::canonical(EntityKind::ZipCode, &format!("{n:05}")).unwrap()),
        (1u32..=12, 1u32..=28, 1900i32..=2026).prop_map(|(m, d, y)| {
            EntityValue::canonical(EntityKind::DateOfBirth, &format!("{m:02}-{d:02}-{y}")).unwrap()
        }),
        prop::sample::select(varspeech_core::spoken_parser::lexicon::FIRST_NAMES).prop_map(|n| EntityValue::canonical(
            EntityKind::PersonName,
            n
        )
        .unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn rendered_text_carries_value_and_tags(value in any_value(), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..=3), seed in any::<u64>()) {
        let ids = ids_for(&value.kind);
        let chosen: Vec<&str> = picks.iter().map(|p| ids[p.index(ids.len())].as_str()).collect();
        match render(&RenderRequest::new(value.clone(), chosen.iter().copied(), seed)) {
            Ok(t) => {
                prop_assert!(recovered(&value, &t.text), "{:?} on {}: {:?}", chosen, value.canonical, t.text);
                let tags = classify_rule(&t.text, &value.kind);
                for id in &chosen {
                    if has_signature(id) && *id != "direct_and_simple" {
                        prop_assert!(tags.contains(*id), "{:?}: {:?} tagged {:?}", chosen, t.text, tags);
                    }
                }
                let again = render(&RenderRequest::new(value.clone(), chosen.iter().copied(), seed)).unwrap();
                prop_assert_eq!(again.text, t.text);
            }
            Err(RenderError::UnsupportedCombination { .. } | RenderError::Unrepresentable { .. }) => {}
            Err(e) => prop_assert!(false, "{:?}: {}", chosen, e),
        }
    }
}

#[test]
fn every_variation_has_several_wordings() {
    for kind in KINDS {
        for v in mock_values(&kind, 5, 17) {
            let value = EntityValue::canonical(kind.clone(), &v).unwrap();
            for id in ids_for(&kind) {
                let texts: std::collections::BTreeSet<String> = (0..64)
                    .filter_map(|seed| render(&RenderRequest::new(value.clone(), [id.as_str()], seed)).ok())
                    .map(|t| t.text)
                    .collect();
                assert!(texts.len() >= 4, "{id} on {v}: {texts:?}");
            }
        }
    }
}
