//! Sampling of agreeing captions for a given world.

use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GenError, Result};
use crate::geometry::ShapeKind;
use crate::semantics::{evaluate, filter_entities, Caption, EntityPredicate, Quantifier, Relation};
use crate::worldgen::{Color, Combination, Entity, WorldModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptionPattern {
    Existential,
    Relational,
    Quantified,
    Conjunction,
}

/// How much of an entity a predicate spells out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// "red square"
    ColorShape,
    /// "square"
    ShapeOnly,
    /// "red shape"
    ColorHypernym,
    /// "shape"
    HypernymOnly,
}

impl Granularity {
    pub fn describe(self, entity: &Entity) -> EntityPredicate {
        match self {
            Granularity::ColorShape => EntityPredicate::exact(entity.shape, entity.color),
            Granularity::ShapeOnly => EntityPredicate::shape(entity.shape),
            Granularity::ColorHypernym => EntityPredicate::color(entity.color),
            Granularity::HypernymOnly => EntityPredicate::ANY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionSpec {
    pub patterns: BTreeMap<CaptionPattern, f64>,
    /// Patterns for the two halves of a conjunction; when empty, the
    /// non-conjunctive entries of `patterns` are used.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub conjuncts: BTreeMap<CaptionPattern, f64>,
    #[serde(default = "default_granularity")]
    pub granularity: BTreeMap<Granularity, f64>,
    #[serde(default = "all_quantifiers")]
    pub quantifiers: BTreeSet<Quantifier>,
    #[serde(default = "all_relations")]
    pub relations: BTreeSet<Relation>,
    /// Minimum centre gap, in pixels, along the axis of a generated relation.
    #[serde(default = "default_margin")]
    pub relation_margin: f64,
    #[serde(default = "default_caption_attempts")]
    pub max_attempts: usize,
}

fn default_granularity() -> BTreeMap<Granularity, f64> {
    BTreeMap::from([
        (Granularity::ColorShape, 1.0),
        (Granularity::ShapeOnly, 1.0),
        (Granularity::ColorHypernym, 1.0),
    ])
}

fn all_quantifiers() -> BTreeSet<Quantifier> {
    Quantifier::ALL.into_iter().collect()
}

fn all_relations() -> BTreeSet<Relation> {
    Relation::ALL.into_iter().collect()
}

fn default_margin() -> f64 {
    4.0
}

fn default_caption_attempts() -> usize {
    100
}

impl CaptionSpec {
    pub fn new(patterns: impl IntoIterator<Item = (CaptionPattern, f64)>) -> Self {
        CaptionSpec {
            patterns: patterns.into_iter().collect(),
            conjuncts: BTreeMap::new(),
            granularity: default_granularity(),
            quantifiers: all_quantifiers(),
            relations: all_relations(),
            relation_margin: default_margin(),
            max_attempts: default_caption_attempts(),
        }
    }

    pub fn with_granularity(mut self, weights: impl IntoIterator<Item = (Granularity, f64)>) -> Self {
        self.granularity = weights.into_iter().collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_weights("caption pattern", &self.patterns)?;
        check_weights("granularity", &self.granularity)?;
        let weight = |p| self.patterns.get(&p).copied().unwrap_or(0.0);
        if weight(CaptionPattern::Quantified) > 0.0 && self.quantifiers.is_empty() {
            return Err(GenError::InvalidSpec("quantified captions need at least one quantifier".into()));
        }
        if weight(CaptionPattern::Relational) > 0.0 && self.relations.is_empty() {
            return Err(GenError::InvalidSpec("relational captions need at least one relation".into()));
        }
        if weight(CaptionPattern::Conjunction) > 0.0 {
            let parts = self.conjunct_patterns();
            if parts.values().all(|w| *w <= 0.0) {
                return Err(GenError::InvalidSpec("conjunctions need a non-conjunctive pattern to combine".into()));
            }
            check_weights("conjunct pattern", &parts)?;
        }
        if !(self.relation_margin >= 0.0) || self.max_attempts == 0 {
            return Err(GenError::InvalidSpec("relation margin and attempt cap must be positive".into()));
        }
        Ok(())
    }

    pub fn weight(&self, pattern: CaptionPattern) -> f64 {
        self.patterns.get(&pattern).copied().unwrap_or(0.0)
    }

    pub fn conjunct_patterns(&self) -> BTreeMap<CaptionPattern, f64> {
        let source = if self.conjuncts.is_empty() { &self.patterns } else { &self.conjuncts };
        source
            .iter()
            .filter(|(p, _)| **p != CaptionPattern::Conjunction)
            .map(|(p, w)| (*p, *w))
            .collect()
    }

    /// Whether a generated caption can contain the given pattern.
    pub fn may_produce(&self, pattern: CaptionPattern) -> bool {
        self.weight(pattern) > 0.0
            || (self.weight(CaptionPattern::Conjunction) > 0.0
                && self.conjunct_patterns().get(&pattern).is_some_and(|w| *w > 0.0))
    }
}

pub(crate) fn check_weights<K>(what: &str, weights: &BTreeMap<K, f64>) -> Result<()> {
    if weights.values().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(GenError::InvalidSpec(format!("{what} weights must be finite and non-negative")));
    }
    if !weights.values().any(|w| *w > 0.0) {
        return Err(GenError::InvalidSpec(format!("{what} weights need a positive entry")));
    }
    Ok(())
}

/// Weighted draw over the positive-weight keys of a map.
pub(crate) fn choose_weighted<K: Copy, R: Rng + ?Sized>(weights: &BTreeMap<K, f64>, rng: &mut R) -> Option<K> {
    let entries: Vec<(K, f64)> = weights.iter().filter(|(_, w)| **w > 0.0).map(|(k, w)| (*k, *w)).collect();
    let dist = WeightedIndex::new(entries.iter().map(|(_, w)| *w)).ok()?;
    Some(entries[dist.sample(rng)].0)
}

/// Split-dependent restrictions on what a caption may mention.
#[derive(Debug, Clone, Default)]
pub struct CaptionContext {
    /// Fully specified combinations a caption may name; `None` allows all.
    pub mentionable: Option<BTreeSet<Combination>>,
    /// Entities at least one of which an existential or relational caption
    /// must describe.
    pub focus: Vec<usize>,
}

impl CaptionContext {
    pub fn allows(&self, caption: &Caption) -> bool {
        match &self.mentionable {
            Some(allowed) => caption.mentioned_combinations().is_subset(allowed),
            None => true,
        }
    }
}

fn existential<R: Rng + ?Sized>(world: &WorldModel, spec: &CaptionSpec, focus: &[usize], rng: &mut R) -> Option<Caption> {
    let index = if focus.is_empty() {
        rng.random_range(0..world.len().max(1))
    } else {
        *focus.choose(rng)?
    };
    let entity = world.entities.get(index)?;
    let granularity = choose_weighted(&spec.granularity, rng)?;
    Some(Caption::existential(granularity.describe(entity)))
}

fn relational<R: Rng + ?Sized>(world: &WorldModel, spec: &CaptionSpec, focus: &[usize], rng: &mut R) -> Option<Caption> {
    let relations: Vec<Relation> = spec.relations.iter().copied().collect();
    let relation = *relations.choose(rng)?;
    let n = world.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .filter(|&(i, j)| focus.is_empty() || focus.contains(&i) || focus.contains(&j))
        .filter(|&(i, j)| relation.gap(&world.entities[i], &world.entities[j]) >= spec.relation_margin)
        .collect();
    let &(i, j) = pairs.choose(rng)?;
    let subject = choose_weighted(&spec.granularity, rng)?.describe(&world.entities[i]);
    let object = choose_weighted(&spec.granularity, rng)?.describe(&world.entities[j]);
    Some(Caption::relational(subject, relation, object))
}

/// Restrictor/body pairs where the body constrains only attributes the
/// restrictor leaves open, so no caption is true by form alone.
pub fn quantifier_frames() -> Vec<(EntityPredicate, EntityPredicate)> {
    let mut frames = Vec::new();
    for shape in ShapeKind::ALL {
        frames.push((EntityPredicate::ANY, EntityPredicate::shape(shape)));
    }
    for color in Color::ALL {
        frames.push((EntityPredicate::ANY, EntityPredicate::color(color)));
    }
    for shape in ShapeKind::ALL {
        for color in Color::ALL {
            frames.push((EntityPredicate::ANY, EntityPredicate::exact(shape, color)));
            frames.push((EntityPredicate::shape(shape), EntityPredicate::color(color)));
            frames.push((EntityPredicate::color(color), EntityPredicate::shape(shape)));
        }
    }
    frames
}

fn quantified<R: Rng + ?Sized>(world: &WorldModel, spec: &CaptionSpec, ctx: &CaptionContext, rng: &mut R) -> Option<Caption> {
    let quantifiers: Vec<Quantifier> = spec.quantifiers.iter().copied().collect();
    let quantifier = *quantifiers.choose(rng)?;
    let candidates: Vec<Caption> = quantifier_frames()
        .into_iter()
        // an empty restrictor makes every quantifier degenerate
        .filter(|(restrictor, _)| !filter_entities(world, restrictor).is_empty())
        .map(|(restrictor, body)| Caption::quantified(quantifier, restrictor, body))
        .filter(|c| ctx.allows(c) && evaluate(c, world))
        .collect();
    candidates.choose(rng).cloned()
}

fn simple_pattern<R: Rng + ?Sized>(
    pattern: CaptionPattern,
    world: &WorldModel,
    spec: &CaptionSpec,
    ctx: &CaptionContext,
    focus: &[usize],
    rng: &mut R,
) -> Option<Caption> {
    match pattern {
        CaptionPattern::Existential => existential(world, spec, focus, rng),
        CaptionPattern::Relational => relational(world, spec, focus, rng),
        CaptionPattern::Quantified => quantified(world, spec, ctx, rng),
        CaptionPattern::Conjunction => None,
    }
}

fn attempt<R: Rng + ?Sized>(world: &WorldModel, spec: &CaptionSpec, ctx: &CaptionContext, rng: &mut R) -> Option<Caption> {
    let pattern = choose_weighted(&spec.patterns, rng)?;
    if pattern != CaptionPattern::Conjunction {
        return simple_pattern(pattern, world, spec, ctx, &ctx.focus, rng);
    }
    let parts = spec.conjunct_patterns();
    let first = choose_weighted(&parts, rng)?;
    let second = choose_weighted(&parts, rng)?;
    let left = simple_pattern(first, world, spec, ctx, &ctx.focus, rng)?;
    let right = simple_pattern(second, world, spec, ctx, &[], rng)?;
    (left != right).then(|| Caption::conjunction(left, right))
}

/// Samples a caption that is true in `world` and respects the context.
pub fn sample_caption_in<R: Rng + ?Sized>(
    world: &WorldModel,
    spec: &CaptionSpec,
    ctx: &CaptionContext,
    rng: &mut R,
) -> Result<Caption> {
    for _ in 0..spec.max_attempts {
        if let Some(caption) = attempt(world, spec, ctx, rng) {
            if ctx.allows(&caption) && evaluate(&caption, world) {
                return Ok(caption);
            }
        }
    }
    Err(GenError::UnsatisfiableCaption {
        attempts: spec.max_attempts,
    })
}

/// Samples a caption that is true in `world`.
pub fn sample_caption<R: Rng + ?Sized>(world: &WorldModel, spec: &CaptionSpec, rng: &mut R) -> Result<Caption> {
    sample_caption_in(world, spec, &CaptionContext::default(), rng)
}
