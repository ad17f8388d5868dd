//! World models and the sampler that produces them.
//!
//! A world is an ordered list of entities. Every continuous attribute is
//! rounded to six decimal places when sampled, so the textual world record
//! written by the exporter reproduces the in-memory world exactly.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GenError, Result};
use crate::geometry::{self, BoundingBox, PlacedShape, Point, ShapeKind};

pub const DEFAULT_IMAGE_SIZE: u32 = 64;

/// Resample cap for [`trunc_normal`].
pub const TRUNC_NORMAL_MAX_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
    Yellow,
    Magenta,
    Cyan,
    White,
}

impl Color {
    pub const ALL: [Color; 7] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Yellow,
        Color::Magenta,
        Color::Cyan,
        Color::White,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Yellow => "yellow",
            Color::Magenta => "magenta",
            Color::Cyan => "cyan",
            Color::White => "white",
        }
    }

    pub fn rgb(self) -> [f64; 3] {
        match self {
            Color::Red => [1.0, 0.0, 0.0],
            Color::Green => [0.0, 1.0, 0.0],
            Color::Blue => [0.0, 0.0, 1.0],
            Color::Yellow => [1.0, 1.0, 0.0],
            Color::Magenta => [1.0, 0.0, 1.0],
            Color::Cyan => [0.0, 1.0, 1.0],
            Color::White => [1.0, 1.0, 1.0],
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown color `{s}`"))
    }
}

/// A (shape, color) pair, written as e.g. `"red square"` in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Combination {
    pub shape: ShapeKind,
    pub color: Color,
}

impl Combination {
    pub const fn new(shape: ShapeKind, color: Color) -> Self {
        Combination { shape, color }
    }

    /// All 56 shape-color pairs, shape-major.
    pub fn all() -> Vec<Combination> {
        ShapeKind::ALL
            .into_iter()
            .flat_map(|shape| Color::ALL.into_iter().map(move |color| Combination { shape, color }))
            .collect()
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.color, self.shape)
    }
}

impl FromStr for Combination {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(color), Some(shape), None) => Ok(Combination {
                shape: shape.parse()?,
                color: color.parse()?,
            }),
            _ => Err(format!("expected `<color> <shape>`, got `{s}`")),
        }
    }
}

impl Serialize for Combination {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Combination {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rounds to six decimal places, the precision of the world record.
pub fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub shape: ShapeKind,
    pub color: Color,
    /// Centre of the shape in image coordinates.
    pub location: Point,
    /// Side of the unrotated shape box as a fraction of the image side.
    pub size: f64,
    pub distortion: f64,
    pub rotation: f64,
    pub shade: f64,
}

impl Entity {
    pub fn combination(&self) -> Combination {
        Combination::new(self.shape, self.color)
    }

    pub fn placed_shape(&self, image_size: u32) -> PlacedShape {
        PlacedShape {
            kind: self.shape,
            center: self.location,
            half_extent: self.size * f64::from(image_size) / 2.0,
            distortion: self.distortion,
            rotation: self.rotation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldModel {
    pub entities: Vec<Entity>,
    pub pixel_noise_sigma: f64,
    pub image_size: u32,
}

impl WorldModel {
    pub fn empty(image_size: u32) -> Self {
        WorldModel {
            entities: Vec::new(),
            pixel_noise_sigma: 0.0,
            image_size,
        }
    }

    pub fn with_entities(entities: Vec<Entity>) -> Self {
        WorldModel {
            entities,
            pixel_noise_sigma: 0.0,
            image_size: DEFAULT_IMAGE_SIZE,
        }
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub low: f64,
    pub high: f64,
}

impl UniformRange {
    pub const fn new(low: f64, high: f64) -> Self {
        UniformRange { low, high }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.low + (self.high - self.low) * rng.random::<f64>()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.low && x <= self.high
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncNormal {
    pub mean: f64,
    pub std_dev: f64,
    pub low: f64,
    pub high: f64,
}

impl TruncNormal {
    pub const fn new(mean: f64, std_dev: f64, low: f64, high: f64) -> Self {
        TruncNormal {
            mean,
            std_dev,
            low,
            high,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        trunc_normal(self.mean, self.std_dev, self.low, self.high, rng)
    }
}

/// Attribute distributions; the defaults follow the published sampling table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttributeDistributions {
    pub size: UniformRange,
    pub distortion: UniformRange,
    pub rotation: UniformRange,
    pub shade: TruncNormal,
    pub pixel_noise: TruncNormal,
}

impl Default for AttributeDistributions {
    fn default() -> Self {
        AttributeDistributions {
            size: UniformRange::new(0.15, 0.3),
            distortion: UniformRange::new(2.0, 3.0),
            rotation: UniformRange::new(0.0, 1.0),
            shade: TruncNormal::new(0.0, 0.5, -1.0, 1.0),
            pixel_noise: TruncNormal::new(0.0, 0.1, -1.0, 1.0),
        }
    }
}

/// Generator constraints for one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub count_choices: BTreeSet<usize>,
    /// Combinations every entity may take.
    pub allowed_combinations: BTreeSet<Combination>,
    /// When non-empty, exactly one entity per world takes one of these
    /// combinations and all others stay within `allowed_combinations`.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub held_out_combinations: BTreeSet<Combination>,
    #[serde(default)]
    pub attributes: AttributeDistributions,
    #[serde(default = "default_padding")]
    pub collision_padding: f64,
    #[serde(default = "default_placement_attempts")]
    pub max_placement_attempts: usize,
    #[serde(default = "default_world_attempts")]
    pub max_world_attempts: usize,
    #[serde(default = "default_image_size")]
    pub image_size: u32,
}

fn default_padding() -> f64 {
    2.0
}

fn default_placement_attempts() -> usize {
    100
}

fn default_world_attempts() -> usize {
    10
}

fn default_image_size() -> u32 {
    DEFAULT_IMAGE_SIZE
}

impl WorldSpec {
    pub fn new(
        count_choices: impl IntoIterator<Item = usize>,
        allowed_combinations: impl IntoIterator<Item = Combination>,
    ) -> Self {
        WorldSpec {
            count_choices: count_choices.into_iter().collect(),
            allowed_combinations: allowed_combinations.into_iter().collect(),
            held_out_combinations: BTreeSet::new(),
            attributes: AttributeDistributions::default(),
            collision_padding: default_padding(),
            max_placement_attempts: default_placement_attempts(),
            max_world_attempts: default_world_attempts(),
            image_size: DEFAULT_IMAGE_SIZE,
        }
    }

    pub fn with_held_out(mut self, combos: impl IntoIterator<Item = Combination>) -> Self {
        self.held_out_combinations = combos.into_iter().collect();
        self
    }

    /// Combinations that may appear anywhere in a world of this split.
    pub fn visible_combinations(&self) -> BTreeSet<Combination> {
        self.allowed_combinations
            .union(&self.held_out_combinations)
            .copied()
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(GenError::InvalidSpec(msg.to_string()));
        if self.count_choices.is_empty() {
            return fail("count_choices is empty");
        }
        if self.allowed_combinations.is_empty() {
            return fail("allowed_combinations is empty");
        }
        if !self.held_out_combinations.is_disjoint(&self.allowed_combinations) {
            return fail("held-out combinations overlap the allowed combinations");
        }
        if !self.held_out_combinations.is_empty() && self.count_choices.contains(&0) {
            return fail("a held-out combination needs at least one entity per world");
        }
        if !(self.collision_padding >= 0.0) {
            return fail("collision_padding must be non-negative");
        }
        if self.max_placement_attempts == 0 || self.max_world_attempts == 0 {
            return fail("attempt limits must be positive");
        }
        if self.image_size == 0 {
            return fail("image_size must be positive");
        }
        let a = &self.attributes;
        if !(a.size.low > 0.0 && a.size.low <= a.size.high) {
            return fail("size range must be positive and ordered");
        }
        if !(a.distortion.low >= 1.0 && a.distortion.low <= a.distortion.high) {
            return fail("distortion range must be ordered and at least 1");
        }
        if !(a.rotation.low >= 0.0 && a.rotation.high <= 1.0 && a.rotation.low <= a.rotation.high) {
            return fail("rotation range must lie in [0, 1]");
        }
        for (name, t) in [("shade", a.shade), ("pixel_noise", a.pixel_noise)] {
            if !(t.low < t.high && t.std_dev >= 0.0 && (t.low..=t.high).contains(&t.mean)) {
                return Err(GenError::InvalidSpec(format!(
                    "{name} needs low < high, a non-negative std_dev and a mean inside the range"
                )));
            }
        }
        Ok(())
    }

    /// Checks a world against every constraint of this spec; returns a
    /// description of the first violation.
    pub fn check_world(&self, world: &WorldModel) -> std::result::Result<(), String> {
        if !self.count_choices.contains(&world.len()) {
            return Err(format!("entity count {} not allowed", world.len()));
        }
        let held_out = world
            .entities
            .iter()
            .filter(|e| self.held_out_combinations.contains(&e.combination()))
            .count();
        if !self.held_out_combinations.is_empty() && held_out != 1 {
            return Err(format!("{held_out} held-out entities, expected exactly 1"));
        }
        let frame = image_frame(self.image_size);
        let attrs = &self.attributes;
        for (i, e) in world.entities.iter().enumerate() {
            let combo = e.combination();
            if !self.allowed_combinations.contains(&combo)
                && !self.held_out_combinations.contains(&combo)
            {
                return Err(format!("entity {i}: combination {combo} not allowed"));
            }
            if !attrs.size.contains(e.size) {
                return Err(format!("entity {i}: size {} out of range", e.size));
            }
            if e.shape.is_distortable() {
                if !attrs.distortion.contains(e.distortion) {
                    return Err(format!("entity {i}: distortion {} out of range", e.distortion));
                }
            } else if e.distortion != 1.0 {
                return Err(format!("entity {i}: distortion must be 1 for a {}", e.shape));
            }
            if !(e.rotation >= 0.0 && e.rotation < 1.0) {
                return Err(format!("entity {i}: rotation {} out of range", e.rotation));
            }
            if !(e.shade >= attrs.shade.low && e.shade <= attrs.shade.high) {
                return Err(format!("entity {i}: shade {} out of range", e.shade));
            }
            let shape = e.placed_shape(self.image_size);
            if !geometry::bounding_box(&shape).within(&frame) {
                return Err(format!("entity {i} leaves the frame"));
            }
            for (j, other) in world.entities.iter().enumerate().take(i) {
                let other = other.placed_shape(self.image_size);
                if geometry::overlaps(&shape, &other, self.collision_padding) {
                    return Err(format!("entities {j} and {i} overlap"));
                }
            }
        }
        Ok(())
    }
}

fn image_frame(image_size: u32) -> BoundingBox {
    BoundingBox {
        min_x: 0.0,
        min_y: 0.0,
        max_x: f64::from(image_size),
        max_y: f64::from(image_size),
    }
}

/// Draws from `normal(mu, sigma)` until the value falls in `[lo, hi]`.
pub fn trunc_normal<R: Rng + ?Sized>(mu: f64, sigma: f64, lo: f64, hi: f64, rng: &mut R) -> Result<f64> {
    let exhausted = || GenError::TruncNormalExhausted {
        mu,
        sigma,
        lo,
        hi,
        attempts: TRUNC_NORMAL_MAX_RESAMPLES,
    };
    if !(lo < hi) {
        return Err(exhausted());
    }
    let normal = Normal::new(mu, sigma).map_err(|_| exhausted())?;
    for _ in 0..TRUNC_NORMAL_MAX_RESAMPLES {
        let x = normal.sample(rng);
        if (lo..=hi).contains(&x) {
            return Ok(x);
        }
    }
    Err(exhausted())
}

fn sample_entity_with<R: Rng + ?Sized>(
    combination: Combination,
    spec: &WorldSpec,
    rng: &mut R,
) -> Result<Entity> {
    let attrs = &spec.attributes;
    let distortion = if combination.shape.is_distortable() {
        round6(attrs.distortion.sample(rng))
    } else {
        1.0
    };
    let size = round6(attrs.size.sample(rng));
    let mut rotation = round6(attrs.rotation.sample(rng));
    if rotation >= 1.0 {
        rotation = 0.0;
    }
    let shade = round6(attrs.shade.sample(rng)?);
    let side = f64::from(spec.image_size);
    let location = Point::new(
        round6(side * rng.random::<f64>()),
        round6(side * rng.random::<f64>()),
    );
    Ok(Entity {
        shape: combination.shape,
        color: combination.color,
        location,
        size,
        distortion,
        rotation,
        shade,
    })
}

/// Samples every attribute of a fresh entity; the combination is uniform
/// over `spec.allowed_combinations`.
pub fn sample_entity<R: Rng + ?Sized>(spec: &WorldSpec, rng: &mut R) -> Result<Entity> {
    let combos: Vec<Combination> = spec.allowed_combinations.iter().copied().collect();
    let combination = *combos
        .choose(rng)
        .ok_or_else(|| GenError::InvalidSpec("allowed_combinations is empty".into()))?;
    sample_entity_with(combination, spec, rng)
}

/// Finds a location for `proto` that keeps it in frame and clear of every
/// entity already in `world`.
pub fn place_entity<R: Rng + ?Sized>(
    world: &WorldModel,
    proto: &Entity,
    spec: &WorldSpec,
    rng: &mut R,
) -> Result<Entity> {
    let frame = image_frame(spec.image_size);
    let side = f64::from(spec.image_size);
    let existing: Vec<PlacedShape> = world
        .entities
        .iter()
        .map(|e| e.placed_shape(spec.image_size))
        .collect();
    let mut candidate = *proto;
    for attempt in 0..spec.max_placement_attempts {
        if attempt > 0 {
            candidate.location = Point::new(
                round6(side * rng.random::<f64>()),
                round6(side * rng.random::<f64>()),
            );
        }
        let shape = candidate.placed_shape(spec.image_size);
        if !geometry::bounding_box(&shape).within(&frame) {
            continue;
        }
        if existing
            .iter()
            .all(|other| !geometry::overlaps(&shape, other, spec.collision_padding))
        {
            return Ok(candidate);
        }
    }
    Err(GenError::PlacementFailure {
        what: proto.combination().to_string(),
        attempts: spec.max_placement_attempts,
    })
}

/// Samples a complete world satisfying `spec`.
pub fn sample_world<R: Rng + ?Sized>(spec: &WorldSpec, rng: &mut R) -> Result<WorldModel> {
    spec.validate()?;
    let counts: Vec<usize> = spec.count_choices.iter().copied().collect();
    let allowed: Vec<Combination> = spec.allowed_combinations.iter().copied().collect();
    let held_out: Vec<Combination> = spec.held_out_combinations.iter().copied().collect();
    let count = *counts.choose(rng).expect("validated non-empty");
    let mut last = None;
    for _ in 0..spec.max_world_attempts {
        let held_out_slot = (!held_out.is_empty()).then(|| rng.random_range(0..count));
        let mut world = WorldModel::empty(spec.image_size);
        let mut failed = false;
        for slot in 0..count {
            let pool = if Some(slot) == held_out_slot { &held_out } else { &allowed };
            let combination = *pool.choose(rng).expect("validated non-empty");
            let proto = sample_entity_with(combination, spec, rng)?;
            match place_entity(&world, &proto, spec, rng) {
                Ok(entity) => world.entities.push(entity),
                Err(e) => {
                    last = Some(e);
                    failed = true;
                    break;
                }
            }
        }
        if !failed {
            world.pixel_noise_sigma = spec.attributes.pixel_noise.std_dev;
            return Ok(world);
        }
    }
    Err(GenError::WorldGenerationFailed {
        attempts: spec.max_world_attempts,
        last: last.map(|e| e.to_string()).unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn everything(counts: impl IntoIterator<Item = usize>) -> WorldSpec {
        WorldSpec::new(counts, Combination::all())
    }

    #[test]
    fn trunc_normal_stays_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let x = trunc_normal(0.0, 0.5, -1.0, 1.0, &mut rng).unwrap();
            assert!((-1.0..=1.0).contains(&x));
            let y = trunc_normal(0.0, 0.1, -1.0, 1.0, &mut rng).unwrap();
            assert!((-1.0..=1.0).contains(&y));
        }
    }

    #[test]
    fn trunc_normal_reports_impossible_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = trunc_normal(0.0, 0.01, 50.0, 51.0, &mut rng).unwrap_err();
        assert!(matches!(err, GenError::TruncNormalExhausted { .. }));
        assert!(trunc_normal(0.0, 1.0, 1.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn singleton_combination_is_respected() {
        let spec = WorldSpec::new([1], [Combination::new(ShapeKind::Circle, Color::Green)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = sample_entity(&spec, &mut rng).unwrap();
        assert_eq!((e.shape, e.color), (ShapeKind::Circle, Color::Green));
        assert_eq!(e.distortion, 1.0);
    }

    #[test]
    fn rectangles_are_distorted() {
        let spec = WorldSpec::new([1], [Combination::new(ShapeKind::Rectangle, Color::Red)]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let e = sample_entity(&spec, &mut rng).unwrap();
            assert!((2.0..=3.0).contains(&e.distortion));
        }
    }

    #[test]
    fn placement_in_empty_world() {
        let spec = everything([1]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let proto = sample_entity(&spec, &mut rng).unwrap();
        let placed = place_entity(&WorldModel::empty(64), &proto, &spec, &mut rng).unwrap();
        assert!(geometry::bounding_box(&placed.placed_shape(64)).within(&image_frame(64)));
    }

    #[test]
    fn placement_fails_in_a_full_world() {
        let spec = everything([1]);
        let blocker = Entity {
            shape: ShapeKind::Square,
            color: Color::Red,
            location: Point::new(32.0, 32.0),
            size: 1.0,
            distortion: 1.0,
            rotation: 0.0,
            shade: 0.0,
        };
        let world = WorldModel::with_entities(vec![blocker]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let proto = sample_entity(&spec, &mut rng).unwrap();
        let err = place_entity(&world, &proto, &spec, &mut rng).unwrap_err();
        assert!(matches!(err, GenError::PlacementFailure { attempts: 100, .. }));
    }

    #[test]
    fn placed_entities_do_not_overlap() {
        let spec = everything([2]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let w = sample_world(&spec, &mut rng).unwrap();
            let a = w.entities[0].placed_shape(64);
            let b = w.entities[1].placed_shape(64);
            assert!(!geometry::overlaps(&a, &b, spec.collision_padding));
        }
    }

    #[test]
    fn single_count_world() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = sample_world(&everything([1]), &mut rng).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.pixel_noise_sigma, 0.1);
    }

    #[test]
    fn over_constrained_spec_fails() {
        let mut spec = everything([40]);
        spec.attributes.size = UniformRange::new(0.3, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let err = sample_world(&spec, &mut rng).unwrap_err();
        assert!(matches!(err, GenError::WorldGenerationFailed { attempts: 10, .. }));
    }

    #[test]
    fn held_out_entity_appears_exactly_once() {
        let held = Combination::new(ShapeKind::Cross, Color::Magenta);
        let allowed: Vec<_> = Combination::all().into_iter().filter(|c| *c != held).collect();
        let spec = WorldSpec::new([3], allowed).with_held_out([held]);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let w = sample_world(&spec, &mut rng).unwrap();
            spec.check_world(&w).unwrap();
            assert_eq!(w.entities.iter().filter(|e| e.combination() == held).count(), 1);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = everything([1]);
        spec.count_choices.clear();
        assert!(spec.validate().is_err());
        let spec = WorldSpec::new([1], []);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn combination_text_form() {
        let c: Combination = "yellow rectangle".parse().unwrap();
        assert_eq!(c, Combination::new(ShapeKind::Rectangle, Color::Yellow));
        assert_eq!(c.to_string(), "yellow rectangle");
        assert!("rectangle".parse::<Combination>().is_err());
        assert_eq!(Combination::all().len(), 56);
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [0.1234567, -0.0000004, 63.9999996, 12.5] {
            let r = round6(x);
            assert_eq!(round6(r), r);
            assert_eq!(format!("{r:.6}").parse::<f64>().unwrap(), r);
        }
    }
}
