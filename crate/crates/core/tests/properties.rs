//! Property tests for geometry, the grammar and the world record.

use proptest::prelude::*;

use microworld::export::world_json;
use microworld::geometry::{bounding_box, contains, overlaps, PlacedShape, Point, ShapeKind};
use microworld::language::{parse, realize, tokenize};
use microworld::semantics::{evaluate, Caption, EntityPredicate, Quantifier, Relation};
use microworld::worldgen::{round6, Color, Entity, WorldModel};

fn shape_kind() -> impl Strategy<Value = ShapeKind> {
    prop::sample::select(ShapeKind::ALL.to_vec())
}

fn color() -> impl Strategy<Value = Color> {
    prop::sample::select(Color::ALL.to_vec())
}

fn placed_shape() -> impl Strategy<Value = PlacedShape> {
    (shape_kind(), 8.0..56.0f64, 8.0..56.0f64, 2.0..10.0f64, 1.0..3.0f64, 0.0..1.0f64).prop_map(
        |(kind, x, y, half, distortion, rotation)| {
            let distortion = if kind.is_distortable() { distortion } else { 1.0 };
            PlacedShape::new(kind, Point::new(x, y), half)
                .with_distortion(distortion)
                .with_rotation(rotation)
        },
    )
}

fn predicate() -> impl Strategy<Value = EntityPredicate> {
    (prop::option::of(shape_kind()), prop::option::of(color())).prop_map(|(s, c)| EntityPredicate::new(s, c))
}

fn simple_caption() -> impl Strategy<Value = Caption> {
    let quantifier = prop::sample::select(Quantifier::ALL.to_vec());
    let relation = prop::sample::select(Relation::ALL.to_vec());
    // quantifier bodies always constrain something
    let body = predicate().prop_filter("non-trivial body", |p| *p != EntityPredicate::ANY);
    prop_oneof![
        predicate().prop_map(Caption::existential),
        (predicate(), relation, predicate()).prop_map(|(s, r, o)| Caption::relational(s, r, o)),
        (quantifier, predicate(), body).prop_map(|(q, r, b)| Caption::quantified(q, r, b)),
    ]
}

fn caption() -> impl Strategy<Value = Caption> {
    prop_oneof![
        3 => simple_caption(),
        1 => (simple_caption(), simple_caption()).prop_map(|(l, r)| Caption::conjunction(l, r)),
    ]
}

fn entity() -> impl Strategy<Value = Entity> {
    (shape_kind(), color(), 0.0..64.0f64, 0.0..64.0f64, 0.15..0.3f64, 1.0..3.0f64, 0.0..1.0f64, -1.0..1.0f64).prop_map(
        |(shape, color, x, y, size, distortion, rotation, shade)| Entity {
            shape,
            color,
            location: Point::new(round6(x), round6(y)),
            size: round6(size),
            distortion: round6(distortion),
            rotation: round6(rotation),
            shade: round6(shade),
        },
    )
}

proptest! {
    #[test]
    fn contained_points_lie_in_the_bounding_box(shape in placed_shape(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let b = bounding_box(&shape).inflate(2.0);
        let p = Point::new(b.min_x + u * b.width(), b.min_y + v * b.height());
        if contains(&shape, p) {
            prop_assert!(bounding_box(&shape).contains_point(p, 1e-6));
        }
    }

    #[test]
    fn centre_is_inside_centrally_symmetric_shapes(shape in placed_shape()) {
        let symmetric = matches!(
            shape.kind,
            ShapeKind::Square | ShapeKind::Rectangle | ShapeKind::Circle | ShapeKind::Ellipse | ShapeKind::Cross
        );
        if symmetric {
            prop_assert!(contains(&shape, shape.center));
        }
    }

    #[test]
    fn a_full_turn_changes_nothing(shape in placed_shape(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let b = bounding_box(&shape);
        let p = Point::new(b.min_x + u * b.width(), b.min_y + v * b.height());
        let turned = shape.with_rotation(shape.rotation + 1.0);
        let a = bounding_box(&turned);
        prop_assert!((a.min_x - b.min_x).abs() < 1e-9 && (a.max_y - b.max_y).abs() < 1e-9);
        // points within rounding distance of the outline may flip
        let q = Point::new(p.x + 1e-7, p.y);
        if contains(&shape, p) == contains(&shape, q) {
            prop_assert_eq!(contains(&shape, p), contains(&turned, p));
        }
    }

    #[test]
    fn overlap_is_symmetric_and_sound(a in placed_shape(), b in placed_shape(), padding in 0.0..4.0f64,
                                      u in 0.0..1.0f64, v in 0.0..1.0f64) {
        prop_assert_eq!(overlaps(&a, &b, padding), overlaps(&b, &a, padding));
        if !overlaps(&a, &b, 0.0) {
            let bb = bounding_box(&a);
            let p = Point::new(bb.min_x + u * bb.width(), bb.min_y + v * bb.height());
            prop_assert!(!(contains(&a, p) && contains(&b, p)));
        }
    }

    #[test]
    fn realized_captions_parse_back(c in caption()) {
        let text = realize(&c);
        prop_assert_eq!(parse(&text).map_err(|e| format!("{text}: {e}")), Ok(c));
        prop_assert!(text.ends_with('.'));
        prop_assert!(tokenize(&text).is_ok());
    }

    #[test]
    fn world_record_round_trips(entities in prop::collection::vec(entity(), 0..6), c in caption()) {
        let mut world = WorldModel::with_entities(entities);
        world.pixel_noise_sigma = 0.1;
        let text = serde_json::to_string(&world_json(&world)).unwrap();
        let back: WorldModel = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &world);
        prop_assert_eq!(evaluate(&c, &back), evaluate(&c, &world));
    }

    #[test]
    fn caption_ast_json_round_trips(c in caption()) {
        let text = serde_json::to_string(&c).unwrap();
        let back: Caption = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, c);
    }
}
