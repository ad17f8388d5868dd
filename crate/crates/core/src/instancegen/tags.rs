//! Partition tags: labels that split a dataset into instance types for
//! targeted evaluation ("C: only hypernyms", "I: swapped direction", ...).

use std::collections::BTreeSet;

use super::captioner::{CaptionPattern, CaptionSpec, Granularity};
use super::corruption::CorruptionStrategy;
use super::dataset::AtomicSpec;
use crate::semantics::{Caption, EntityPredicate, Quantifier};

pub const CORRECT: &str = "correct instances";
pub const INCORRECT: &str = "incorrect instances";
pub const ONLY_HYPERNYMS: &str = "C: only hypernyms";
pub const SOME_HYPERNYMS: &str = "C: some hypernyms";
pub const NO_HYPERNYMS: &str = "C: no hypernyms";

pub fn quantifier_tag(q: Quantifier) -> String {
    format!("instances with {q}")
}

pub fn component_tag(name: &str) -> String {
    format!("component: {name}")
}

/// Predicates realized as nouns; a shapeless one reads "shape".
/// Color-only quantifier bodies surface as bare adjectives and are skipped.
fn noun_predicates(caption: &Caption) -> Vec<EntityPredicate> {
    match caption {
        Caption::Existential { predicate } => vec![*predicate],
        Caption::Relational { subject, object, .. } => vec![*subject, *object],
        Caption::Quantified { restrictor, body, .. } => {
            let mut out = vec![*restrictor];
            if body.shape.is_some() {
                out.push(*body);
            }
            out
        }
        Caption::Conjunction { left, right } => {
            let mut out = noun_predicates(left);
            out.extend(noun_predicates(right));
            out
        }
    }
}

/// Hypernym tag of an agreeing caption.
pub fn hypernym_tag(caption: &Caption) -> &'static str {
    let nouns = noun_predicates(caption);
    let hypernyms = nouns.iter().filter(|p| p.shape.is_none()).count();
    if hypernyms == nouns.len() {
        ONLY_HYPERNYMS
    } else if hypernyms == 0 {
        NO_HYPERNYMS
    } else {
        SOME_HYPERNYMS
    }
}

/// Primary tag plus every secondary tag of an instance.
pub fn instance_tags(caption: &Caption, label: bool, strategy: Option<CorruptionStrategy>) -> (String, Vec<String>) {
    let primary = if label {
        hypernym_tag(caption).to_string()
    } else {
        strategy.unwrap_or(CorruptionStrategy::FalseWorld).tag().to_string()
    };
    let mut all = vec![primary.clone(), (if label { CORRECT } else { INCORRECT }).to_string()];
    let quantifiers: BTreeSet<Quantifier> = caption.quantifiers().into_iter().collect();
    all.extend(quantifiers.into_iter().map(quantifier_tag));
    (primary, all)
}

fn patterns_in_use(captions: &CaptionSpec) -> BTreeSet<CaptionPattern> {
    [CaptionPattern::Existential, CaptionPattern::Relational, CaptionPattern::Quantified]
        .into_iter()
        .filter(|&p| captions.may_produce(p))
        .collect()
}

/// Simple patterns a corruption strategy can edit.
fn strategy_patterns(strategy: CorruptionStrategy) -> &'static [CaptionPattern] {
    use CaptionPattern::*;
    use CorruptionStrategy::*;
    match strategy {
        SwappedDirection => &[Relational],
        SubjectRandomAttrs | ObjectRandomAttrs => &[Relational, Quantified],
        _ => &[Existential, Relational, Quantified],
    }
}

/// Every tag an atomic dataset can produce; a superset is harmless, since
/// restriction reports starvation for tags that never occur.
pub fn atomic_tags(spec: &AtomicSpec) -> BTreeSet<String> {
    let mut tags = BTreeSet::new();
    let patterns = patterns_in_use(&spec.captions);
    if spec.positive_probability > 0.0 {
        tags.insert(CORRECT.to_string());
        let weight = |g| spec.captions.granularity.get(&g).is_some_and(|w| *w > 0.0);
        let hyper = weight(Granularity::ColorHypernym) || weight(Granularity::HypernymOnly);
        let plain = weight(Granularity::ColorShape) || weight(Granularity::ShapeOnly);
        let multi = patterns.contains(&CaptionPattern::Relational) || spec.captions.weight(CaptionPattern::Conjunction) > 0.0;
        let describing = patterns.contains(&CaptionPattern::Existential) || multi;
        if patterns.contains(&CaptionPattern::Quantified) {
            tags.extend([ONLY_HYPERNYMS, SOME_HYPERNYMS, NO_HYPERNYMS].map(String::from));
        }
        if describing && hyper {
            tags.insert(ONLY_HYPERNYMS.to_string());
        }
        if describing && plain {
            tags.insert(NO_HYPERNYMS.to_string());
        }
        if multi && hyper && plain {
            tags.insert(SOME_HYPERNYMS.to_string());
        }
    }
    if spec.positive_probability < 1.0 {
        tags.insert(INCORRECT.to_string());
        // false worlds are also the fallback when no corruption applies
        tags.insert(CorruptionStrategy::FalseWorld.tag().to_string());
        if spec.negatives.false_world < 1.0 {
            for (strategy, weight) in &spec.negatives.strategies {
                if *weight > 0.0 && strategy_patterns(*strategy).iter().any(|p| patterns.contains(p)) {
                    tags.insert(strategy.tag().to_string());
                }
            }
        }
    }
    if patterns.contains(&CaptionPattern::Quantified) {
        tags.extend(spec.captions.quantifiers.iter().map(|q| quantifier_tag(*q)));
    }
    tags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ShapeKind;
    use crate::semantics::Relation;
    use crate::worldgen::Color;

    #[test]
    fn hypernym_tags_follow_nouns() {
        let red = EntityPredicate::color(Color::Red);
        let square = EntityPredicate::shape(ShapeKind::Square);
        assert_eq!(hypernym_tag(&Caption::existential(red)), ONLY_HYPERNYMS);
        assert_eq!(hypernym_tag(&Caption::existential(square)), NO_HYPERNYMS);
        assert_eq!(hypernym_tag(&Caption::relational(red, Relation::Above, square)), SOME_HYPERNYMS);
        // "Most squares are red." has one noun and it is specific
        assert_eq!(hypernym_tag(&Caption::quantified(Quantifier::Most, square, red)), NO_HYPERNYMS);
        assert_eq!(
            hypernym_tag(&Caption::quantified(Quantifier::All, EntityPredicate::ANY, red)),
            ONLY_HYPERNYMS
        );
    }

    #[test]
    fn instance_tags_list_quantifiers() {
        let c = Caption::quantified(Quantifier::Two, EntityPredicate::ANY, EntityPredicate::shape(ShapeKind::Cross));
        let (primary, all) = instance_tags(&c, false, Some(CorruptionStrategy::RandomAttrs));
        assert_eq!(primary, "I: random attr.");
        assert_eq!(all, vec!["I: random attr.", INCORRECT, "instances with two"]);
    }
}
