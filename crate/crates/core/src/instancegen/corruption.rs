//! Construction of disagreeing caption/world pairs.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::captioner::CaptionContext;
use crate::error::{GenError, Result};
use crate::geometry::ShapeKind;
use crate::language::realize;
use crate::semantics::{evaluate, Caption, EntityPredicate};
use crate::worldgen::{sample_world, Color, WorldModel, WorldSpec};

/// Value draws per corruption before giving up.
pub const MAX_CORRUPTION_ATTEMPTS: usize = 50;

/// World draws per false-world request before giving up.
pub const MAX_FALSE_WORLD_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionStrategy {
    ChangedShape,
    ChangedColor,
    ChangedBoth,
    SwappedDirection,
    SubjectRandomAttrs,
    ObjectRandomAttrs,
    RandomAttrs,
    RandomExistingAttrs,
    FalseWorld,
}

impl CorruptionStrategy {
    pub const ALL: [CorruptionStrategy; 9] = [
        CorruptionStrategy::ChangedShape,
        CorruptionStrategy::ChangedColor,
        CorruptionStrategy::ChangedBoth,
        CorruptionStrategy::SwappedDirection,
        CorruptionStrategy::SubjectRandomAttrs,
        CorruptionStrategy::ObjectRandomAttrs,
        CorruptionStrategy::RandomAttrs,
        CorruptionStrategy::RandomExistingAttrs,
        CorruptionStrategy::FalseWorld,
    ];

    /// Partition tag carried by negatives built with this strategy.
    pub fn tag(self) -> &'static str {
        match self {
            CorruptionStrategy::ChangedShape => "I: changed shape",
            CorruptionStrategy::ChangedColor => "I: changed color",
            CorruptionStrategy::ChangedBoth => "I: changed both",
            CorruptionStrategy::SwappedDirection => "I: swapped direction",
            CorruptionStrategy::SubjectRandomAttrs => "I: subject random attr.",
            CorruptionStrategy::ObjectRandomAttrs => "I: object random attr.",
            CorruptionStrategy::RandomAttrs => "I: random attr.",
            CorruptionStrategy::RandomExistingAttrs => "I: random existing attr.",
            CorruptionStrategy::FalseWorld => "I: false world",
        }
    }

    fn name(self) -> &'static str {
        match self {
            CorruptionStrategy::ChangedShape => "changed_shape",
            CorruptionStrategy::ChangedColor => "changed_color",
            CorruptionStrategy::ChangedBoth => "changed_both",
            CorruptionStrategy::SwappedDirection => "swapped_direction",
            CorruptionStrategy::SubjectRandomAttrs => "subject_random_attrs",
            CorruptionStrategy::ObjectRandomAttrs => "object_random_attrs",
            CorruptionStrategy::RandomAttrs => "random_attrs",
            CorruptionStrategy::RandomExistingAttrs => "random_existing_attrs",
            CorruptionStrategy::FalseWorld => "false_world",
        }
    }

    /// Whether the strategy can modify this caption at all.
    pub fn applies_to(self, caption: &Caption) -> bool {
        match caption {
            Caption::Conjunction { left, right } => self.applies_to(left) || self.applies_to(right),
            _ if self == CorruptionStrategy::FalseWorld => true,
            _ => !targets(self, caption).is_empty(),
        }
    }

    fn inapplicable(self) -> GenError {
        GenError::InapplicableStrategy {
            strategy: self.name().to_string(),
        }
    }
}

impl fmt::Display for CorruptionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which predicate slot of a simple caption a strategy edits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    /// Existential predicate, relational subject, quantifier restrictor.
    First,
    /// Relational object, quantifier body.
    Second,
    Relation,
}

fn slot_predicate(caption: &Caption, slot: Slot) -> Option<EntityPredicate> {
    match (caption, slot) {
        (Caption::Existential { predicate }, Slot::First) => Some(*predicate),
        (Caption::Relational { subject, .. }, Slot::First) => Some(*subject),
        (Caption::Relational { object, .. }, Slot::Second) => Some(*object),
        (Caption::Quantified { restrictor, .. }, Slot::First) => Some(*restrictor),
        (Caption::Quantified { body, .. }, Slot::Second) => Some(*body),
        _ => None,
    }
}

fn with_slot(caption: &Caption, slot: Slot, pred: EntityPredicate) -> Caption {
    let mut out = caption.clone();
    match (&mut out, slot) {
        (Caption::Existential { predicate }, Slot::First) => *predicate = pred,
        (Caption::Relational { subject, .. }, Slot::First) => *subject = pred,
        (Caption::Relational { object, .. }, Slot::Second) => *object = pred,
        (Caption::Quantified { restrictor, .. }, Slot::First) => *restrictor = pred,
        (Caption::Quantified { body, .. }, Slot::Second) => *body = pred,
        _ => unreachable!("slot checked by targets()"),
    }
    out
}

/// Slots of a non-conjunctive caption the strategy may edit.
fn targets(strategy: CorruptionStrategy, caption: &Caption) -> Vec<Slot> {
    use CorruptionStrategy::*;
    let candidates: &[Slot] = match (strategy, caption) {
        (FalseWorld, _) | (_, Caption::Conjunction { .. }) => &[],
        (SwappedDirection, Caption::Relational { .. }) => &[Slot::Relation],
        (SwappedDirection, _) => &[],
        (SubjectRandomAttrs, Caption::Relational { .. } | Caption::Quantified { .. }) => &[Slot::First],
        (ObjectRandomAttrs, Caption::Relational { .. } | Caption::Quantified { .. }) => &[Slot::Second],
        (SubjectRandomAttrs | ObjectRandomAttrs, _) => &[],
        (_, Caption::Existential { .. }) => &[Slot::First],
        (_, Caption::Relational { .. }) => &[Slot::First, Slot::Second],
        (_, Caption::Quantified { .. }) => &[Slot::Second],
    };
    candidates
        .iter()
        .copied()
        .filter(|&slot| {
            if slot == Slot::Relation {
                return true;
            }
            let pred = slot_predicate(caption, slot).expect("slot exists");
            match strategy {
                ChangedShape => pred.shape.is_some(),
                ChangedColor => pred.color.is_some(),
                ChangedBoth => pred.shape.is_some() && pred.color.is_some(),
                SubjectRandomAttrs | ObjectRandomAttrs | RandomAttrs => pred != EntityPredicate::ANY,
                RandomExistingAttrs => true,
                SwappedDirection | FalseWorld => false,
            }
        })
        .collect()
}

fn other_shape<R: Rng + ?Sized>(current: ShapeKind, rng: &mut R) -> ShapeKind {
    let others: Vec<ShapeKind> = ShapeKind::ALL.into_iter().filter(|s| *s != current).collect();
    *others.choose(rng).expect("eight shapes")
}

fn other_color<R: Rng + ?Sized>(current: Color, rng: &mut R) -> Color {
    let others: Vec<Color> = Color::ALL.into_iter().filter(|c| *c != current).collect();
    *others.choose(rng).expect("seven colors")
}

/// Re-draws every specified field of the predicate, keeping its form.
fn resample<R: Rng + ?Sized>(pred: EntityPredicate, rng: &mut R) -> EntityPredicate {
    EntityPredicate {
        shape: pred.shape.map(|_| *ShapeKind::ALL.choose(rng).expect("non-empty")),
        color: pred.color.map(|_| *Color::ALL.choose(rng).expect("non-empty")),
    }
}

/// Shape and color each present in the world, combined in a way no entity is.
fn existing_attribute_mixes(world: &WorldModel) -> Vec<EntityPredicate> {
    let shapes: BTreeSet<ShapeKind> = world.entities.iter().map(|e| e.shape).collect();
    let colors: BTreeSet<Color> = world.entities.iter().map(|e| e.color).collect();
    let present: BTreeSet<_> = world.entities.iter().map(|e| e.combination()).collect();
    shapes
        .iter()
        .flat_map(|&s| colors.iter().map(move |&c| (s, c)))
        .filter(|&(s, c)| !present.iter().any(|p| p.shape == s && p.color == c))
        .map(|(s, c)| EntityPredicate::exact(s, c))
        .collect()
}

fn modify_simple<R: Rng + ?Sized>(
    caption: &Caption,
    world: &WorldModel,
    strategy: CorruptionStrategy,
    rng: &mut R,
) -> Option<Caption> {
    let slot = *targets(strategy, caption).choose(rng)?;
    if slot == Slot::Relation {
        let Caption::Relational {
            subject,
            relation,
            object,
        } = caption
        else {
            return None;
        };
        return Some(Caption::relational(*subject, relation.inverse(), *object));
    }
    let pred = slot_predicate(caption, slot)?;
    let replacement = match strategy {
        CorruptionStrategy::ChangedShape => EntityPredicate {
            shape: pred.shape.map(|s| other_shape(s, rng)),
            ..pred
        },
        CorruptionStrategy::ChangedColor => EntityPredicate {
            color: pred.color.map(|c| other_color(c, rng)),
            ..pred
        },
        CorruptionStrategy::ChangedBoth => EntityPredicate {
            shape: pred.shape.map(|s| other_shape(s, rng)),
            color: pred.color.map(|c| other_color(c, rng)),
        },
        CorruptionStrategy::SubjectRandomAttrs
        | CorruptionStrategy::ObjectRandomAttrs
        | CorruptionStrategy::RandomAttrs => resample(pred, rng),
        CorruptionStrategy::RandomExistingAttrs => *existing_attribute_mixes(world).choose(rng)?,
        CorruptionStrategy::SwappedDirection | CorruptionStrategy::FalseWorld => return None,
    };
    Some(with_slot(caption, slot, replacement))
}

fn modify<R: Rng + ?Sized>(
    caption: &Caption,
    world: &WorldModel,
    strategy: CorruptionStrategy,
    rng: &mut R,
) -> Option<Caption> {
    match caption {
        Caption::Conjunction { left, right } => {
            let sides: Vec<bool> = [(true, left), (false, right)]
                .into_iter()
                .filter(|(_, c)| strategy.applies_to(c))
                .map(|(is_left, _)| is_left)
                .collect();
            if *sides.choose(rng)? {
                Some(Caption::conjunction(modify(left, world, strategy, rng)?, (**right).clone()))
            } else {
                Some(Caption::conjunction((**left).clone(), modify(right, world, strategy, rng)?))
            }
        }
        _ => modify_simple(caption, world, strategy, rng),
    }
}

/// Modifies `caption` until it is false in `world`, subject to the context's
/// mention restrictions.
pub fn corrupt_caption_in<R: Rng + ?Sized>(
    caption: &Caption,
    world: &WorldModel,
    strategy: CorruptionStrategy,
    ctx: &CaptionContext,
    rng: &mut R,
) -> Result<Caption> {
    if strategy == CorruptionStrategy::FalseWorld || !strategy.applies_to(caption) {
        return Err(strategy.inapplicable());
    }
    for _ in 0..MAX_CORRUPTION_ATTEMPTS {
        if let Some(candidate) = modify(caption, world, strategy, rng) {
            if ctx.allows(&candidate) && !evaluate(&candidate, world) {
                return Ok(candidate);
            }
        }
    }
    Err(GenError::NoFalseVariant {
        strategy: strategy.to_string(),
        attempts: MAX_CORRUPTION_ATTEMPTS,
    })
}

pub fn corrupt_caption<R: Rng + ?Sized>(
    caption: &Caption,
    world: &WorldModel,
    strategy: CorruptionStrategy,
    rng: &mut R,
) -> Result<Caption> {
    corrupt_caption_in(caption, world, strategy, &CaptionContext::default(), rng)
}

/// Samples worlds from `spec` until one makes `caption` false.
pub fn make_false_world<R: Rng + ?Sized>(caption: &Caption, spec: &WorldSpec, rng: &mut R) -> Result<WorldModel> {
    for _ in 0..MAX_FALSE_WORLD_ATTEMPTS {
        let world = match sample_world(spec, rng) {
            Ok(w) => w,
            Err(GenError::WorldGenerationFailed { .. }) => continue,
            Err(e) => return Err(e),
        };
        if !evaluate(caption, &world) {
            return Ok(world);
        }
    }
    Err(GenError::FalseWorldExhausted {
        caption: realize(caption),
        attempts: MAX_FALSE_WORLD_ATTEMPTS,
    })
}
