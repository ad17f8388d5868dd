//! Dataset definitions: per-split world constraints, caption patterns and the
//! negative-instance mix, plus the four built-in datasets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::captioner::{check_weights, CaptionPattern, CaptionSpec, Granularity};
use super::corruption::CorruptionStrategy;
use super::tags;
use crate::error::{GenError, Result};
use crate::geometry::ShapeKind;
use crate::semantics::Relation;
use crate::worldgen::{Color, Combination, WorldSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn id(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Validation => 1,
            Split::Test => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown split `{s}` (expected train, validation or test)"))
    }
}

/// How negatives are produced: `false_world` is the probability of keeping
/// the caption and resampling the world; otherwise a corruption strategy is
/// drawn by weight among those applicable to the caption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeMix {
    pub false_world: f64,
    pub strategies: BTreeMap<CorruptionStrategy, f64>,
}

impl NegativeMix {
    pub fn new(false_world: f64, strategies: impl IntoIterator<Item = CorruptionStrategy>) -> Self {
        NegativeMix {
            false_world,
            strategies: strategies.into_iter().map(|s| (s, 1.0)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpecs {
    pub train: WorldSpec,
    pub validation: WorldSpec,
    pub test: WorldSpec,
}

impl SplitSpecs {
    pub fn get(&self, split: Split) -> &WorldSpec {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }

    fn iter_mut(&mut self) -> impl Iterator<Item = &mut WorldSpec> {
        [&mut self.train, &mut self.validation, &mut self.test].into_iter()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicSpec {
    pub splits: SplitSpecs,
    pub captions: CaptionSpec,
    pub negatives: NegativeMix,
    #[serde(default = "default_positive_probability")]
    pub positive_probability: f64,
}

fn default_positive_probability() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixComponent {
    pub weight: f64,
    pub spec: DatasetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    Atomic(AtomicSpec),
    Mixer { components: Vec<MixComponent> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    /// When set, only instances bearing this partition tag are emitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<String>,
    pub generator: Generator,
}

impl DatasetSpec {
    pub fn atomic(name: impl Into<String>, spec: AtomicSpec) -> Self {
        DatasetSpec {
            name: name.into(),
            partition: None,
            generator: Generator::Atomic(spec),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.generator {
            Generator::Atomic(spec) => spec.validate()?,
            Generator::Mixer { components } => {
                if components.is_empty() {
                    return Err(GenError::InvalidSpec("mixer without components".into()));
                }
                for c in components {
                    if !(c.weight > 0.0 && c.weight.is_finite()) {
                        return Err(GenError::InvalidSpec("mixer weights must be positive".into()));
                    }
                    c.spec.validate()?;
                }
                let sizes: BTreeSet<u32> = components.iter().flat_map(|c| c.spec.image_sizes()).collect();
                if sizes.len() > 1 {
                    let mut it = sizes.into_iter();
                    return Err(GenError::IncompatibleImageSize(it.next().unwrap(), it.next().unwrap()));
                }
            }
        }
        if let Some(tag) = &self.partition {
            if !self.known_tags().contains(tag) {
                return Err(GenError::UnknownPartition {
                    dataset: self.name.clone(),
                    tag: tag.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn image_sizes(&self) -> BTreeSet<u32> {
        match &self.generator {
            Generator::Atomic(spec) => Split::ALL.iter().map(|&s| spec.splits.get(s).image_size).collect(),
            Generator::Mixer { components } => components.iter().flat_map(|c| c.spec.image_sizes()).collect(),
        }
    }

    pub fn image_size(&self) -> u32 {
        self.image_sizes().into_iter().next().unwrap_or(crate::worldgen::DEFAULT_IMAGE_SIZE)
    }

    /// Every partition tag an instance of this dataset can bear.
    pub fn known_tags(&self) -> BTreeSet<String> {
        match &self.generator {
            Generator::Atomic(spec) => tags::atomic_tags(spec),
            Generator::Mixer { components } => components
                .iter()
                .flat_map(|c| {
                    let mut tags = c.spec.known_tags();
                    tags.insert(tags::component_tag(&c.spec.name));
                    tags
                })
                .collect(),
        }
    }

    /// Copy of the spec with pixel noise disabled in every split.
    pub fn without_noise(&self) -> DatasetSpec {
        let mut out = self.clone();
        out.for_each_world_spec(&mut |ws| ws.attributes.pixel_noise.std_dev = 0.0);
        out
    }

    fn for_each_world_spec(&mut self, f: &mut dyn FnMut(&mut WorldSpec)) {
        match &mut self.generator {
            Generator::Atomic(spec) => spec.splits.iter_mut().for_each(f),
            Generator::Mixer { components } => {
                for c in components {
                    c.spec.for_each_world_spec(f);
                }
            }
        }
    }

    pub fn from_toml(text: &str) -> std::result::Result<DatasetSpec, String> {
        let spec: DatasetSpec = toml::from_str(text).map_err(|e| e.to_string())?;
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("dataset specs serialize to TOML")
    }

    /// Resolves a built-in name or a path to a TOML config file.
    pub fn resolve(name_or_path: &str) -> std::result::Result<DatasetSpec, String> {
        match builtin_dataset(name_or_path) {
            Ok(spec) => Ok(spec),
            Err(_) if Path::new(name_or_path).is_file() => {
                let text = std::fs::read_to_string(name_or_path)
                    .map_err(|e| format!("{name_or_path}: {e}"))?;
                DatasetSpec::from_toml(&text).map_err(|e| format!("{name_or_path}: {e}"))
            }
            Err(e) => Err(format!("{e}; not a config file either")),
        }
    }
}

impl AtomicSpec {
    pub fn validate(&self) -> Result<()> {
        for split in Split::ALL {
            self.splits.get(split).validate()?;
        }
        self.captions.validate()?;
        if !(0.0..=1.0).contains(&self.positive_probability) {
            return Err(GenError::InvalidSpec("positive_probability must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.negatives.false_world) {
            return Err(GenError::InvalidSpec("false_world probability must lie in [0, 1]".into()));
        }
        if self.negatives.false_world < 1.0 {
            check_weights("corruption strategy", &self.negatives.strategies)?;
        }
        let (train, val, test) = (&self.splits.train, &self.splits.validation, &self.splits.test);
        if !val.held_out_combinations.is_disjoint(&test.held_out_combinations) {
            return Err(GenError::InvalidSpec("validation and test hold out the same combination".into()));
        }
        for held in [&val.held_out_combinations, &test.held_out_combinations] {
            if !held.is_disjoint(&train.visible_combinations()) {
                return Err(GenError::InvalidSpec("a held-out combination is visible in training".into()));
            }
        }
        if !val.held_out_combinations.is_disjoint(&test.visible_combinations())
            || !test.held_out_combinations.is_disjoint(&val.visible_combinations())
        {
            return Err(GenError::InvalidSpec("validation and test held-out combinations cross".into()));
        }
        let counts = [&train.count_choices, &val.count_choices, &test.count_choices];
        for (i, a) in counts.iter().enumerate() {
            for b in &counts[i + 1..] {
                if a != b && !a.is_disjoint(b) {
                    return Err(GenError::InvalidSpec("held-out entity counts must be disjoint across splits".into()));
                }
            }
        }
        Ok(())
    }
}

/// Names of the built-in datasets.
pub const BUILTIN_DATASETS: [&str; 4] = ["oneshape", "multishape", "spatial", "quantification"];

pub fn validation_combinations() -> BTreeSet<Combination> {
    BTreeSet::from([
        Combination::new(ShapeKind::Square, Color::Red),
        Combination::new(ShapeKind::Triangle, Color::Green),
        Combination::new(ShapeKind::Circle, Color::Blue),
    ])
}

pub fn test_combinations() -> BTreeSet<Combination> {
    BTreeSet::from([
        Combination::new(ShapeKind::Rectangle, Color::Yellow),
        Combination::new(ShapeKind::Ellipse, Color::Cyan),
        Combination::new(ShapeKind::Cross, Color::Magenta),
    ])
}

/// The 50 combinations left after removing both held-out sets.
pub fn training_combinations() -> BTreeSet<Combination> {
    let held: BTreeSet<_> = validation_combinations().union(&test_combinations()).copied().collect();
    Combination::all().into_iter().filter(|c| !held.contains(c)).collect()
}

fn combination_splits(counts: &[usize]) -> SplitSpecs {
    let train = training_combinations();
    SplitSpecs {
        train: WorldSpec::new(counts.iter().copied(), train.clone()),
        validation: WorldSpec::new(counts.iter().copied(), train.clone()).with_held_out(validation_combinations()),
        test: WorldSpec::new(counts.iter().copied(), train).with_held_out(test_combinations()),
    }
}

fn count_splits(train: &[usize], validation: &[usize], test: &[usize]) -> SplitSpecs {
    let all = Combination::all();
    SplitSpecs {
        train: WorldSpec::new(train.iter().copied(), all.clone()),
        validation: WorldSpec::new(validation.iter().copied(), all.clone()),
        test: WorldSpec::new(test.iter().copied(), all),
    }
}

fn existential_captions() -> CaptionSpec {
    CaptionSpec::new([(CaptionPattern::Existential, 1.0)])
}

pub fn oneshape() -> DatasetSpec {
    use CorruptionStrategy::*;
    DatasetSpec::atomic(
        "oneshape",
        AtomicSpec {
            splits: combination_splits(&[1]),
            captions: existential_captions(),
            negatives: NegativeMix::new(0.5, [ChangedShape, ChangedColor, ChangedBoth]),
            positive_probability: 0.5,
        },
    )
}

pub fn multishape() -> DatasetSpec {
    use CorruptionStrategy::*;
    DatasetSpec::atomic(
        "multishape",
        AtomicSpec {
            splits: count_splits(&[1, 2, 3, 5], &[4], &[6]),
            captions: existential_captions(),
            negatives: NegativeMix::new(0.5, [RandomAttrs, RandomExistingAttrs]),
            positive_probability: 0.5,
        },
    )
}

pub fn spatial() -> DatasetSpec {
    use CorruptionStrategy::*;
    let mut captions = CaptionSpec::new([(CaptionPattern::Relational, 1.0)]).with_granularity([
        (Granularity::ColorShape, 1.0),
        (Granularity::ShapeOnly, 1.0),
        (Granularity::ColorHypernym, 1.0),
        (Granularity::HypernymOnly, 1.0),
    ]);
    captions.relations = Relation::ALL.into_iter().collect();
    DatasetSpec::atomic(
        "spatial",
        AtomicSpec {
            splits: combination_splits(&[2, 3, 4]),
            captions,
            negatives: NegativeMix::new(0.5, [SwappedDirection, SubjectRandomAttrs, ObjectRandomAttrs]),
            positive_probability: 0.5,
        },
    )
}

pub fn quantification() -> DatasetSpec {
    use CorruptionStrategy::*;
    DatasetSpec::atomic(
        "quantification",
        AtomicSpec {
            splits: count_splits(&[3, 4, 5, 7], &[6], &[8]),
            captions: CaptionSpec::new([(CaptionPattern::Quantified, 1.0)]),
            negatives: NegativeMix::new(0.5, [RandomAttrs, SubjectRandomAttrs]),
            positive_probability: 0.5,
        },
    )
}

pub fn builtin_dataset(name: &str) -> Result<DatasetSpec> {
    match name {
        "oneshape" => Ok(oneshape()),
        "multishape" => Ok(multishape()),
        "spatial" => Ok(spatial()),
        "quantification" => Ok(quantification()),
        _ => Err(GenError::UnknownDataset(name.to_string())),
    }
}

/// Combines datasets into one stream; each instance delegates to a component
/// drawn with probability proportional to its weight.
pub fn mix(specs: &[DatasetSpec], weights: &[f64]) -> Result<DatasetSpec> {
    if specs.is_empty() || specs.len() != weights.len() {
        return Err(GenError::InvalidSpec("mix needs one positive weight per dataset".into()));
    }
    let name = specs.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join("+");
    let spec = DatasetSpec {
        name,
        partition: None,
        generator: Generator::Mixer {
            components: specs
                .iter()
                .zip(weights)
                .map(|(spec, &weight)| MixComponent {
                    weight,
                    spec: spec.clone(),
                })
                .collect(),
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// Restricts the generator to instances bearing `tag`.
pub fn restrict_partition(ds: &DatasetSpec, tag: &str) -> Result<DatasetSpec> {
    if !ds.known_tags().contains(tag) {
        return Err(GenError::UnknownPartition {
            dataset: ds.name.clone(),
            tag: tag.to_string(),
        });
    }
    let mut out = ds.clone();
    out.partition = Some(tag.to_string());
    Ok(out)
}

/// A dataset whose captions conjoin two captions of `base`'s patterns with
/// "and"; only atomic datasets can be conjoined.
pub fn conjoined(base: &DatasetSpec) -> Result<DatasetSpec> {
    let Generator::Atomic(atomic) = &base.generator else {
        return Err(GenError::InvalidSpec("only atomic datasets can be conjoined".into()));
    };
    let mut atomic = atomic.clone();
    atomic.captions.conjuncts = atomic.captions.conjunct_patterns();
    atomic.captions.patterns = BTreeMap::from([(CaptionPattern::Conjunction, 1.0)]);
    let spec = DatasetSpec::atomic(format!("{}-and", base.name), atomic);
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Quantifier;

    fn atomic(ds: &DatasetSpec) -> &AtomicSpec {
        match &ds.generator {
            Generator::Atomic(a) => a,
            _ => panic!("expected atomic"),
        }
    }

    #[test]
    fn oneshape_constants() {
        let ds = oneshape();
        let a = atomic(&ds);
        assert_eq!(Combination::all().len(), 56);
        assert_eq!(a.splits.train.allowed_combinations.len(), 50);
        assert_eq!(a.splits.train.count_choices, BTreeSet::from([1]));
        let names = |set: &BTreeSet<Combination>| set.iter().map(|c| c.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(
            names(&a.splits.validation.held_out_combinations),
            BTreeSet::from(["red square".to_string(), "green triangle".into(), "blue circle".into()])
        );
        assert_eq!(
            names(&a.splits.test.held_out_combinations),
            BTreeSet::from(["yellow rectangle".to_string(), "cyan ellipse".into(), "magenta cross".into()])
        );
    }

    #[test]
    fn count_constants() {
        let m = builtin_dataset("multishape").unwrap();
        let m = atomic(&m);
        assert_eq!(m.splits.train.count_choices, BTreeSet::from([1, 2, 3, 5]));
        assert_eq!(m.splits.validation.count_choices, BTreeSet::from([4]));
        assert_eq!(m.splits.test.count_choices, BTreeSet::from([6]));
        let q = builtin_dataset("quantification").unwrap();
        let q = atomic(&q);
        assert_eq!(q.splits.train.count_choices, BTreeSet::from([3, 4, 5, 7]));
        assert_eq!(q.splits.validation.count_choices, BTreeSet::from([6]));
        assert_eq!(q.splits.test.count_choices, BTreeSet::from([8]));
        assert_eq!(q.captions.quantifiers, Quantifier::ALL.into_iter().collect());
    }

    #[test]
    fn spatial_shares_oneshape_combinations() {
        let s = spatial();
        let o = oneshape();
        for split in Split::ALL {
            let (a, b) = (atomic(&s).splits.get(split), atomic(&o).splits.get(split));
            assert_eq!(a.allowed_combinations, b.allowed_combinations);
            assert_eq!(a.held_out_combinations, b.held_out_combinations);
        }
    }

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_DATASETS {
            builtin_dataset(name).unwrap().validate().unwrap();
        }
        assert_eq!(builtin_dataset("clevr").unwrap_err(), GenError::UnknownDataset("clevr".into()));
    }

    #[test]
    fn overlapping_holdouts_are_invalid() {
        let mut ds = oneshape();
        if let Generator::Atomic(a) = &mut ds.generator {
            a.splits.test.held_out_combinations = validation_combinations();
        }
        assert!(ds.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        for name in BUILTIN_DATASETS {
            let ds = builtin_dataset(name).unwrap();
            let text = ds.to_toml();
            assert_eq!(DatasetSpec::from_toml(&text).unwrap(), ds, "{name}\n{text}");
        }
        let mixed = mix(&[oneshape(), spatial()], &[1.0, 2.0]).unwrap();
        assert_eq!(DatasetSpec::from_toml(&mixed.to_toml()).unwrap(), mixed);
    }

    #[test]
    fn partition_restriction_checks_tags() {
        let ds = oneshape();
        assert!(restrict_partition(&ds, "C: only hypernyms").is_ok());
        assert!(restrict_partition(&ds, "I: changed shape").is_ok());
        assert!(matches!(
            restrict_partition(&ds, "I: swapped direction"),
            Err(GenError::UnknownPartition { .. })
        ));
        assert!(restrict_partition(&quantification(), "instances with most").is_ok());
        assert!(restrict_partition(&spatial(), "I: swapped direction").is_ok());
    }

    #[test]
    fn mixing_checks_inputs() {
        assert!(mix(&[], &[]).is_err());
        assert!(mix(&[oneshape()], &[0.0]).is_err());
        let mut big = spatial();
        if let Generator::Atomic(a) = &mut big.generator {
            a.splits.iter_mut().for_each(|ws| ws.image_size = 128);
        }
        assert!(matches!(
            mix(&[oneshape(), big], &[1.0, 1.0]),
            Err(GenError::IncompatibleImageSize(64, 128))
        ));
    }
}
