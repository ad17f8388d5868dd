//! Caption meaning representation and its truth conditions over a world.
//!
//! Nouns and adjectives filter the entity list, relations act on pairs of
//! filtered sets, and quantifiers compare the cardinality of a restrictor set
//! with its intersection with a body set.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::ShapeKind;
use crate::worldgen::{Color, Combination, Entity, WorldModel};

/// Selects entities by shape and color; `None` matches everything (the
/// hypernym "shape" for the shape field, any color for the color field).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct EntityPredicate {
    pub shape: Option<ShapeKind>,
    pub color: Option<Color>,
}

impl EntityPredicate {
    pub const ANY: EntityPredicate = EntityPredicate {
        shape: None,
        color: None,
    };

    pub const fn new(shape: Option<ShapeKind>, color: Option<Color>) -> Self {
        EntityPredicate { shape, color }
    }

    pub const fn shape(shape: ShapeKind) -> Self {
        EntityPredicate::new(Some(shape), None)
    }

    pub const fn color(color: Color) -> Self {
        EntityPredicate::new(None, Some(color))
    }

    pub const fn exact(shape: ShapeKind, color: Color) -> Self {
        EntityPredicate::new(Some(shape), Some(color))
    }

    pub fn matches(&self, entity: &Entity) -> bool {
        self.shape.is_none_or(|s| s == entity.shape) && self.color.is_none_or(|c| c == entity.color)
    }

    /// The combination named when both fields are specific.
    pub fn combination(&self) -> Option<Combination> {
        Some(Combination::new(self.shape?, self.color?))
    }

    pub fn is_hypernym(&self) -> bool {
        self.shape.is_none()
    }

    /// Conjunction of two predicates, `None` when they contradict.
    pub fn intersect(&self, other: &EntityPredicate) -> Option<EntityPredicate> {
        fn merge<T: PartialEq + Copy>(a: Option<T>, b: Option<T>) -> Option<Option<T>> {
            match (a, b) {
                (Some(x), Some(y)) if x != y => None,
                (Some(x), _) | (_, Some(x)) => Some(Some(x)),
                (None, None) => Some(None),
            }
        }
        Some(EntityPredicate {
            shape: merge(self.shape, other.shape)?,
            color: merge(self.color, other.color)?,
        })
    }
}

impl fmt::Display for EntityPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.color, self.shape) {
            (Some(c), Some(s)) => write!(f, "{c} {s}"),
            (Some(c), None) => write!(f, "{c} shape"),
            (None, Some(s)) => write!(f, "{s}"),
            (None, None) => f.write_str("shape"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LeftOf,
    RightOf,
    Above,
    Below,
}

impl Relation {
    pub const ALL: [Relation; 4] = [Relation::LeftOf, Relation::RightOf, Relation::Above, Relation::Below];

    pub fn inverse(self) -> Relation {
        match self {
            Relation::LeftOf => Relation::RightOf,
            Relation::RightOf => Relation::LeftOf,
            Relation::Above => Relation::Below,
            Relation::Below => Relation::Above,
        }
    }

    /// Signed gap between the centres along this relation's axis; the
    /// relation holds iff the gap is strictly positive.
    pub fn gap(self, subject: &Entity, object: &Entity) -> f64 {
        let (s, o) = (subject.location, object.location);
        match self {
            Relation::LeftOf => o.x - s.x,
            Relation::RightOf => s.x - o.x,
            Relation::Above => o.y - s.y,
            Relation::Below => s.y - o.y,
        }
    }

    pub fn holds(self, subject: &Entity, object: &Entity) -> bool {
        self.gap(subject, object) > 0.0
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::LeftOf => "left_of",
            Relation::RightOf => "right_of",
            Relation::Above => "above",
            Relation::Below => "below",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    A,
    No,
    The,
    Two,
    Most,
    All,
}

impl Quantifier {
    pub const ALL: [Quantifier; 6] = [
        Quantifier::A,
        Quantifier::No,
        Quantifier::The,
        Quantifier::Two,
        Quantifier::Most,
        Quantifier::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantifier::A => "a",
            Quantifier::No => "no",
            Quantifier::The => "the",
            Quantifier::Two => "two",
            Quantifier::Most => "most",
            Quantifier::All => "all",
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Quantifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Quantifier::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| format!("unknown quantifier `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Caption {
    Existential {
        predicate: EntityPredicate,
    },
    Relational {
        subject: EntityPredicate,
        relation: Relation,
        object: EntityPredicate,
    },
    Quantified {
        quantifier: Quantifier,
        restrictor: EntityPredicate,
        body: EntityPredicate,
    },
    Conjunction {
        left: Box<Caption>,
        right: Box<Caption>,
    },
}

impl Caption {
    pub fn existential(predicate: EntityPredicate) -> Caption {
        Caption::Existential { predicate }
    }

    pub fn relational(subject: EntityPredicate, relation: Relation, object: EntityPredicate) -> Caption {
        Caption::Relational {
            subject,
            relation,
            object,
        }
    }

    pub fn quantified(quantifier: Quantifier, restrictor: EntityPredicate, body: EntityPredicate) -> Caption {
        Caption::Quantified {
            quantifier,
            restrictor,
            body,
        }
    }

    pub fn conjunction(left: Caption, right: Caption) -> Caption {
        Caption::Conjunction {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Every entity predicate in the caption, in reading order.
    pub fn predicates(&self) -> Vec<EntityPredicate> {
        match self {
            Caption::Existential { predicate } => vec![*predicate],
            Caption::Relational { subject, object, .. } => vec![*subject, *object],
            Caption::Quantified { restrictor, body, .. } => vec![*restrictor, *body],
            Caption::Conjunction { left, right } => {
                let mut all = left.predicates();
                all.extend(right.predicates());
                all
            }
        }
    }

    pub fn quantifiers(&self) -> Vec<Quantifier> {
        match self {
            Caption::Quantified { quantifier, .. } => vec![*quantifier],
            Caption::Conjunction { left, right } => {
                let mut all = left.quantifiers();
                all.extend(right.quantifiers());
                all
            }
            _ => Vec::new(),
        }
    }

    /// Fully specified shape-color combinations the caption talks about. For
    /// quantified captions this is the combination named by restrictor and
    /// body together ("two blue shapes are pentagons" names blue pentagon).
    pub fn mentioned_combinations(&self) -> BTreeSet<Combination> {
        match self {
            Caption::Existential { predicate } => predicate.combination().into_iter().collect(),
            Caption::Relational { subject, object, .. } => {
                subject.combination().into_iter().chain(object.combination()).collect()
            }
            Caption::Quantified { restrictor, body, .. } => restrictor
                .intersect(body)
                .and_then(|p| p.combination())
                .into_iter()
                .collect(),
            Caption::Conjunction { left, right } => {
                let mut all = left.mentioned_combinations();
                all.extend(right.mentioned_combinations());
                all
            }
        }
    }

    pub fn is_conjunction(&self) -> bool {
        matches!(self, Caption::Conjunction { .. })
    }
}

/// Indices of the entities matching `pred`.
pub fn filter_entities(world: &WorldModel, pred: &EntityPredicate) -> BTreeSet<usize> {
    world
        .entities
        .iter()
        .enumerate()
        .filter(|(_, e)| pred.matches(e))
        .map(|(i, _)| i)
        .collect()
}

/// Existential reading over distinct pairs of subject and object entities.
pub fn eval_relation(world: &WorldModel, subject: &EntityPredicate, relation: Relation, object: &EntityPredicate) -> bool {
    let objects = filter_entities(world, object);
    filter_entities(world, subject).into_iter().any(|i| {
        objects
            .iter()
            .any(|&j| i != j && relation.holds(&world.entities[i], &world.entities[j]))
    })
}

/// Cardinality condition of a quantifier given the restrictor set size and
/// the size of its intersection with the body set.
pub fn eval_quantifier(quantifier: Quantifier, restrictor_size: usize, intersection_size: usize) -> bool {
    debug_assert!(intersection_size <= restrictor_size);
    match quantifier {
        Quantifier::A => intersection_size >= 1,
        Quantifier::No => intersection_size == 0,
        Quantifier::The => restrictor_size == 1 && intersection_size == 1,
        Quantifier::Two => intersection_size >= 2,
        // intersection / restrictor > 1/2 without division
        Quantifier::Most => restrictor_size > 0 && 2 * intersection_size > restrictor_size,
        Quantifier::All => intersection_size == restrictor_size,
    }
}

/// Truth value of `caption` in `world`.
pub fn evaluate(caption: &Caption, world: &WorldModel) -> bool {
    match caption {
        Caption::Existential { predicate } => !filter_entities(world, predicate).is_empty(),
        Caption::Relational {
            subject,
            relation,
            object,
        } => eval_relation(world, subject, *relation, object),
        Caption::Quantified {
            quantifier,
            restrictor,
            body,
        } => {
            let restricted = filter_entities(world, restrictor);
            let bodies = filter_entities(world, body);
            let both = restricted.intersection(&bodies).count();
            eval_quantifier(*quantifier, restricted.len(), both)
        }
        Caption::Conjunction { left, right } => evaluate(left, world) && evaluate(right, world),
    }
}
