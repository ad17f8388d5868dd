//! Labeled instance assembly: an agreeing caption for a sampled world, then
//! for negatives either a false world or a corrupted caption.

pub mod captioner;
pub mod corruption;
pub mod dataset;
pub mod tags;

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use captioner::{sample_caption, sample_caption_in, CaptionContext, CaptionPattern, CaptionSpec, Granularity};
pub use corruption::{corrupt_caption, corrupt_caption_in, make_false_world, CorruptionStrategy};
pub use dataset::{
    builtin_dataset, conjoined, mix, restrict_partition, AtomicSpec, DatasetSpec, Generator, MixComponent,
    NegativeMix, Split, SplitSpecs, BUILTIN_DATASETS,
};

use crate::error::{GenError, Result};
use crate::language::realize;
use crate::raster::{render, Image};
use crate::semantics::{evaluate, Caption};
use crate::worldgen::{sample_world, WorldModel};

/// World/caption draws per instance before generation fails.
pub const MAX_INSTANCE_ATTEMPTS: usize = 50;

/// Unrestricted draws per instance before a partition counts as starved.
pub const MAX_PARTITION_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub image: Image,
    pub caption_text: String,
    pub caption: Caption,
    pub world: WorldModel,
    pub label: bool,
    pub partition_tag: String,
    /// The primary tag followed by every secondary tag the instance bears.
    pub partition_tags: Vec<String>,
    pub sub_seed: u64,
    pub split: Split,
    pub index: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-instance seed: each input is absorbed through a full splitmix64
/// finalizer round, with distinct odd multipliers per input.
pub fn mix64(master_seed: u64, split_id: u64, index: u64) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ split_id.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(h ^ index.wrapping_mul(0xA076_1D64_78BD_642F))
}

/// An unrendered instance.
struct Draw {
    world: WorldModel,
    caption: Caption,
    label: bool,
    primary: String,
    tags: Vec<String>,
}

fn is_retryable(e: &GenError) -> bool {
    matches!(
        e,
        GenError::WorldGenerationFailed { .. }
            | GenError::UnsatisfiableCaption { .. }
            | GenError::FalseWorldExhausted { .. }
            | GenError::NoFalseVariant { .. }
    )
}

fn negative<R: Rng + ?Sized>(
    spec: &AtomicSpec,
    split: Split,
    world: WorldModel,
    caption: Caption,
    ctx: &CaptionContext,
    rng: &mut R,
) -> Result<(WorldModel, Caption, CorruptionStrategy)> {
    if !rng.random_bool(spec.negatives.false_world) {
        let applicable: BTreeMap<CorruptionStrategy, f64> = spec
            .negatives
            .strategies
            .iter()
            .filter(|(s, w)| **w > 0.0 && s.applies_to(&caption))
            .map(|(s, w)| (*s, *w))
            .collect();
        match captioner::choose_weighted(&applicable, rng) {
            Some(CorruptionStrategy::FalseWorld) | None => {}
            Some(strategy) => match corrupt_caption_in(&caption, &world, strategy, ctx, rng) {
                Ok(corrupted) => return Ok((world, corrupted, strategy)),
                Err(GenError::NoFalseVariant { .. }) => {}
                Err(e) => return Err(e),
            },
        }
    }
    let false_world = make_false_world(&caption, spec.splits.get(split), rng)?;
    Ok((false_world, caption, CorruptionStrategy::FalseWorld))
}

fn draw_atomic<R: Rng + ?Sized>(spec: &AtomicSpec, split: Split, rng: &mut R) -> Result<Draw> {
    let ws = spec.splits.get(split);
    let label = rng.random_bool(spec.positive_probability);
    let mut ctx = CaptionContext {
        mentionable: Some(ws.visible_combinations()),
        focus: Vec::new(),
    };
    let mut last = String::new();
    for _ in 0..MAX_INSTANCE_ATTEMPTS {
        let attempt = (|| {
            let world = sample_world(ws, rng)?;
            ctx.focus = (0..world.len())
                .filter(|&i| ws.held_out_combinations.contains(&world.entities[i].combination()))
                .collect();
            let caption = sample_caption_in(&world, &spec.captions, &ctx, rng)?;
            if label {
                Ok((world, caption, None))
            } else {
                let (world, caption, strategy) = negative(spec, split, world, caption, &ctx, rng)?;
                Ok((world, caption, Some(strategy)))
            }
        })();
        match attempt {
            Ok((world, caption, strategy)) => {
                let (primary, tags) = tags::instance_tags(&caption, label, strategy);
                return Ok(Draw {
                    world,
                    caption,
                    label,
                    primary,
                    tags,
                });
            }
            Err(e) if is_retryable(&e) => last = e.to_string(),
            Err(e) => return Err(e),
        }
    }
    Err(GenError::WorldGenerationFailed {
        attempts: MAX_INSTANCE_ATTEMPTS,
        last,
    })
}

fn draw_unrestricted<R: Rng + ?Sized>(ds: &DatasetSpec, split: Split, rng: &mut R) -> Result<Draw> {
    match &ds.generator {
        Generator::Atomic(spec) => draw_atomic(spec, split, rng),
        Generator::Mixer { components } => {
            // a single component consumes no extra randomness
            let component = if components.len() == 1 {
                &components[0]
            } else {
                let dist = WeightedIndex::new(components.iter().map(|c| c.weight))
                    .map_err(|e| GenError::InvalidSpec(format!("mixer weights: {e}")))?;
                &components[dist.sample(rng)]
            };
            let mut draw = draw(&component.spec, split, rng)?;
            let name = &component.spec.name;
            draw.primary = format!("{name}/{}", draw.primary);
            draw.tags.insert(0, draw.primary.clone());
            draw.tags.insert(1, tags::component_tag(name));
            Ok(draw)
        }
    }
}

/// Draws from the dataset, rejecting instances outside its partition.
fn draw<R: Rng + ?Sized>(ds: &DatasetSpec, split: Split, rng: &mut R) -> Result<Draw> {
    let Some(tag) = &ds.partition else {
        return draw_unrestricted(ds, split, rng);
    };
    for _ in 0..MAX_PARTITION_ATTEMPTS {
        let d = draw_unrestricted(ds, split, rng)?;
        if d.tags.iter().any(|t| t == tag) {
            return Ok(d);
        }
    }
    Err(GenError::PartitionStarved {
        tag: tag.clone(),
        attempts: MAX_PARTITION_ATTEMPTS,
    })
}

fn generate_unchecked(ds: &DatasetSpec, split: Split, index: u64, master_seed: u64) -> Result<Instance> {
    let sub_seed = mix64(master_seed, split.id(), index);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
    let d = draw(ds, split, &mut rng)?;
    let actual = evaluate(&d.caption, &d.world);
    let caption_text = realize(&d.caption);
    if actual != d.label {
        return Err(GenError::LabelMismatch {
            caption: caption_text,
            label: d.label,
            actual,
        });
    }
    let image = render(&d.world, &mut rng)?;
    Ok(Instance {
        image,
        caption_text,
        caption: d.caption,
        world: d.world,
        label: d.label,
        partition_tag: d.primary,
        partition_tags: d.tags,
        sub_seed,
        split,
        index,
    })
}

/// Generates the instance at (`split`, `index`); the result depends only on
/// the dataset spec, the split, the index and `master_seed`.
pub fn generate_instance(ds: &DatasetSpec, split: Split, index: u64, master_seed: u64) -> Result<Instance> {
    generate_unchecked(ds, split, index, master_seed).map_err(|e| GenError::Instance {
        split: split.to_string(),
        index,
        source: Box::new(e),
    })
}

/// Instances `0..count` of a split, generated in parallel and returned in
/// index order.
pub fn generate_split(ds: &DatasetSpec, split: Split, count: u64, master_seed: u64) -> Result<Vec<Instance>> {
    ds.validate()?;
    (0..count)
        .into_par_iter()
        .map(|i| generate_instance(ds, split, i, master_seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldgen::Combination;
    use std::collections::BTreeSet;

    #[test]
    fn mix64_separates_inputs() {
        let seeds: BTreeSet<u64> = (0..3)
            .flat_map(|s| (0..1000).map(move |i| mix64(7, s, i)))
            .collect();
        assert_eq!(seeds.len(), 3000);
        assert_ne!(mix64(0, 0, 1), mix64(0, 1, 0));
        assert_ne!(mix64(1, 0, 0), mix64(0, 0, 1));
    }

    #[test]
    fn mix64_avalanches() {
        // flipping one input bit flips about half the output bits
        let mut total = 0u32;
        for bit in 0..64 {
            total += (mix64(42, 1, 1000) ^ mix64(42, 1, 1000 ^ (1 << bit))).count_ones();
        }
        let mean = f64::from(total) / 64.0;
        assert!((mean - 32.0).abs() < 4.0, "{mean}");
    }

    #[test]
    fn instances_satisfy_their_label() {
        for name in BUILTIN_DATASETS {
            let ds = builtin_dataset(name).unwrap();
            for split in Split::ALL {
                for inst in generate_split(&ds, split, 40, 3).unwrap() {
                    assert_eq!(evaluate(&inst.caption, &inst.world), inst.label, "{name} {}", inst.caption_text);
                    assert_eq!(inst.caption_text, realize(&inst.caption));
                }
            }
        }
    }

    #[test]
    fn generation_is_order_independent() {
        let ds = builtin_dataset("spatial").unwrap();
        let batch = generate_split(&ds, Split::Validation, 12, 99).unwrap();
        for i in (0..12).rev() {
            assert_eq!(generate_instance(&ds, Split::Validation, i, 99).unwrap(), batch[i as usize]);
        }
    }

    #[test]
    fn eval_worlds_carry_exactly_one_held_out_combination() {
        let ds = builtin_dataset("oneshape").unwrap();
        let held = dataset::test_combinations();
        for inst in generate_split(&ds, Split::Test, 30, 5).unwrap() {
            let combos: Vec<Combination> = inst.world.entities.iter().map(|e| e.combination()).collect();
            assert_eq!(combos.iter().filter(|c| held.contains(c)).count(), 1);
        }
    }

    #[test]
    fn partition_restriction_filters() {
        let ds = restrict_partition(&builtin_dataset("quantification").unwrap(), "instances with most").unwrap();
        for inst in generate_split(&ds, Split::Train, 20, 1).unwrap() {
            assert!(matches!(inst.caption, Caption::Quantified { quantifier: crate::semantics::Quantifier::Most, .. }));
        }
        let ds = restrict_partition(&builtin_dataset("spatial").unwrap(), "I: swapped direction").unwrap();
        for inst in generate_split(&ds, Split::Train, 20, 1).unwrap() {
            assert!(!inst.label);
            assert_eq!(inst.partition_tag, "I: swapped direction");
        }
    }

    #[test]
    fn mixer_tags_components() {
        let ds = mix(&[builtin_dataset("oneshape").unwrap(), builtin_dataset("spatial").unwrap()], &[1.0, 1.0]).unwrap();
        let insts = generate_split(&ds, Split::Train, 40, 2).unwrap();
        for inst in &insts {
            assert!(inst.partition_tag.starts_with("oneshape/") || inst.partition_tag.starts_with("spatial/"));
            assert!(inst.partition_tags[1].starts_with("component: "));
        }
        let single = mix(&[builtin_dataset("oneshape").unwrap()], &[1.0]).unwrap();
        let a = generate_instance(&single, Split::Train, 4, 8).unwrap();
        let b = generate_instance(&builtin_dataset("oneshape").unwrap(), Split::Train, 4, 8).unwrap();
        assert_eq!((a.caption, a.world, a.image), (b.caption, b.world, b.image));
    }

    #[test]
    fn conjunctions_evaluate_per_semantics() {
        let ds = conjoined(&builtin_dataset("multishape").unwrap()).unwrap();
        for inst in generate_split(&ds, Split::Train, 30, 6).unwrap() {
            assert!(inst.caption.is_conjunction());
            assert_eq!(evaluate(&inst.caption, &inst.world), inst.label);
        }
    }
}
