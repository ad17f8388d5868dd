//! Shape mathematics shared by placement and rasterization.
//!
//! Every shape is described in a local frame centred on the shape, with `x`
//! growing to the right and `y` growing downwards (image convention). The
//! canonical outline spans `[-half_width, half_width] x [-half_height,
//! half_height]` before rotation, where `half_width = half_extent` and
//! `half_height = half_extent / distortion`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Slack applied to boundary comparisons so that points exactly on an edge
/// stay inside after a rotation round trip.
pub const BOUNDARY_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Square,
    Rectangle,
    Triangle,
    Pentagon,
    Cross,
    Circle,
    Semicircle,
    Ellipse,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 8] = [
        ShapeKind::Square,
        ShapeKind::Rectangle,
        ShapeKind::Triangle,
        ShapeKind::Pentagon,
        ShapeKind::Cross,
        ShapeKind::Circle,
        ShapeKind::Semicircle,
        ShapeKind::Ellipse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Square => "square",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Triangle => "triangle",
            ShapeKind::Pentagon => "pentagon",
            ShapeKind::Cross => "cross",
            ShapeKind::Circle => "circle",
            ShapeKind::Semicircle => "semicircle",
            ShapeKind::Ellipse => "ellipse",
        }
    }

    pub fn plural(self) -> &'static str {
        match self {
            ShapeKind::Square => "squares",
            ShapeKind::Rectangle => "rectangles",
            ShapeKind::Triangle => "triangles",
            ShapeKind::Pentagon => "pentagons",
            ShapeKind::Cross => "crosses",
            ShapeKind::Circle => "circles",
            ShapeKind::Semicircle => "semicircles",
            ShapeKind::Ellipse => "ellipses",
        }
    }

    /// Whether the width/height distortion ratio applies to this shape.
    pub fn is_distortable(self) -> bool {
        matches!(self, ShapeKind::Rectangle | ShapeKind::Ellipse)
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown shape `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Rotates the point by `turns` full turns about `pivot`.
    pub fn rotated_about(self, pivot: Point, turns: f64) -> Point {
        let (sin, cos) = (2.0 * PI * turns).sin_cos();
        let dx = self.x - pivot.x;
        let dy = self.y - pivot.y;
        Point::new(pivot.x + cos * dx - sin * dy, pivot.y + sin * dx + cos * dy)
    }
}

/// Axis-aligned rectangle, inclusive on all sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn inflate(&self, padding: f64) -> BoundingBox {
        BoundingBox {
            min_x: self.min_x - padding,
            min_y: self.min_y - padding,
            max_x: self.max_x + padding,
            max_y: self.max_y + padding,
        }
    }

    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.min_x <= other.max_x
            && other.min_x <= self.max_x
            && self.min_y <= other.max_y
            && other.min_y <= self.max_y
    }

    pub fn contains_point(&self, p: Point, tolerance: f64) -> bool {
        p.x >= self.min_x - tolerance
            && p.x <= self.max_x + tolerance
            && p.y >= self.min_y - tolerance
            && p.y <= self.max_y + tolerance
    }

    pub fn within(&self, outer: &BoundingBox) -> bool {
        self.min_x >= outer.min_x
            && self.min_y >= outer.min_y
            && self.max_x <= outer.max_x
            && self.max_y <= outer.max_y
    }

    fn from_points(points: impl IntoIterator<Item = Point>) -> BoundingBox {
        let mut bbox = BoundingBox {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        };
        for p in points {
            bbox.min_x = bbox.min_x.min(p.x);
            bbox.min_y = bbox.min_y.min(p.y);
            bbox.max_x = bbox.max_x.max(p.x);
            bbox.max_y = bbox.max_y.max(p.y);
        }
        bbox
    }
}

/// A shape with a concrete position, extent, distortion and rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedShape {
    pub kind: ShapeKind,
    pub center: Point,
    /// Half the side of the unrotated box, in pixels.
    pub half_extent: f64,
    /// Width divided by height; exactly 1 for non-distortable shapes.
    pub distortion: f64,
    /// Fraction of a full turn in `[0, 1)`.
    pub rotation: f64,
}

impl PlacedShape {
    pub fn new(kind: ShapeKind, center: Point, half_extent: f64) -> Self {
        PlacedShape {
            kind,
            center,
            half_extent,
            distortion: 1.0,
            rotation: 0.0,
        }
    }

    pub fn with_distortion(mut self, distortion: f64) -> Self {
        self.distortion = distortion;
        self
    }

    pub fn with_rotation(mut self, rotation: f64) -> Self {
        self.rotation = rotation;
        self
    }

    pub fn half_width(&self) -> f64 {
        self.half_extent
    }

    pub fn half_height(&self) -> f64 {
        self.half_extent / self.distortion
    }

    /// Maps an image point into the shape's unrotated local frame.
    fn to_local(&self, p: Point) -> Point {
        let back = p.rotated_about(self.center, -self.rotation);
        Point::new(back.x - self.center.x, back.y - self.center.y)
    }

    fn to_image(&self, local: Point) -> Point {
        Point::new(self.center.x + local.x, self.center.y + local.y)
            .rotated_about(self.center, self.rotation)
    }
}

/// Radius and circumcentre offset of the regular pentagon inscribed in the
/// local box, apex up, vertically centred.
fn pentagon_frame(half_width: f64, half_height: f64) -> (f64, f64) {
    let sin72 = (0.4 * PI).sin();
    let cos36 = (0.2 * PI).cos();
    let radius = (half_width / sin72).min(2.0 * half_height / (1.0 + cos36));
    let offset = radius * (1.0 - cos36) / 2.0;
    (radius, offset)
}

fn pentagon_vertices(half_width: f64, half_height: f64) -> [Point; 5] {
    let (radius, offset) = pentagon_frame(half_width, half_height);
    std::array::from_fn(|k| {
        let angle = -PI / 2.0 + k as f64 * 2.0 * PI / 5.0;
        Point::new(radius * angle.cos(), offset + radius * angle.sin())
    })
}

fn inside_convex(poly: &[Point], p: Point) -> bool {
    // Vertices are listed clockwise on screen, so interior points sit on the
    // non-negative side of every edge cross product.
    (0..poly.len()).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        cross >= -BOUNDARY_EPSILON * (1.0 + (b.x - a.x).abs() + (b.y - a.y).abs())
    })
}

/// Outline vertices in the local frame; empty for curved shapes.
fn local_vertices(shape: &PlacedShape) -> Vec<Point> {
    let (w, h) = (shape.half_width(), shape.half_height());
    match shape.kind {
        ShapeKind::Square | ShapeKind::Rectangle => vec![
            Point::new(-w, -h),
            Point::new(w, -h),
            Point::new(w, h),
            Point::new(-w, h),
        ],
        ShapeKind::Triangle => vec![Point::new(0.0, -h), Point::new(w, h), Point::new(-w, h)],
        ShapeKind::Pentagon => pentagon_vertices(w, h).to_vec(),
        ShapeKind::Cross => {
            let (tw, th) = (w / 3.0, h / 3.0);
            vec![
                Point::new(-tw, -h),
                Point::new(tw, -h),
                Point::new(tw, -th),
                Point::new(w, -th),
                Point::new(w, th),
                Point::new(tw, th),
                Point::new(tw, h),
                Point::new(-tw, h),
                Point::new(-tw, th),
                Point::new(-w, th),
                Point::new(-w, -th),
                Point::new(-tw, -th),
            ]
        }
        ShapeKind::Circle | ShapeKind::Semicircle | ShapeKind::Ellipse => Vec::new(),
    }
}

/// Point-in-shape test; boundary points count as inside.
pub fn contains(shape: &PlacedShape, point: Point) -> bool {
    let p = shape.to_local(point);
    let (w, h) = (shape.half_width(), shape.half_height());
    let eps = BOUNDARY_EPSILON;
    match shape.kind {
        ShapeKind::Square | ShapeKind::Rectangle => p.x.abs() <= w + eps && p.y.abs() <= h + eps,
        ShapeKind::Triangle => {
            p.y <= h + eps && p.x.abs() <= w * (p.y + h) / (2.0 * h) + eps
        }
        ShapeKind::Pentagon => inside_convex(&pentagon_vertices(w, h), p),
        ShapeKind::Cross => {
            let (tw, th) = (w / 3.0, h / 3.0);
            (p.x.abs() <= tw + eps && p.y.abs() <= h + eps)
                || (p.y.abs() <= th + eps && p.x.abs() <= w + eps)
        }
        ShapeKind::Circle | ShapeKind::Ellipse => {
            let (nx, ny) = (p.x / w, p.y / h);
            nx * nx + ny * ny <= 1.0 + eps
        }
        ShapeKind::Semicircle => {
            // Disk of radius w whose centre sits h/2 below the box centre;
            // only the upper half is kept.
            let dy = p.y - w / 2.0;
            dy <= eps && p.x * p.x + dy * dy <= w * w * (1.0 + eps)
        }
    }
}

/// Tight axis-aligned box around the rotated shape.
pub fn bounding_box(shape: &PlacedShape) -> BoundingBox {
    let (w, h) = (shape.half_width(), shape.half_height());
    let c = shape.center;
    match shape.kind {
        ShapeKind::Circle | ShapeKind::Ellipse => {
            let (sin, cos) = (2.0 * PI * shape.rotation).sin_cos();
            let hx = ((w * cos).powi(2) + (h * sin).powi(2)).sqrt();
            let hy = ((w * sin).powi(2) + (h * cos).powi(2)).sqrt();
            BoundingBox {
                min_x: c.x - hx,
                min_y: c.y - hy,
                max_x: c.x + hx,
                max_y: c.y + hy,
            }
        }
        ShapeKind::Semicircle => {
            let radius = w;
            let disk_center = shape.to_image(Point::new(0.0, radius / 2.0));
            let mut points = vec![
                shape.to_image(Point::new(-radius, radius / 2.0)),
                shape.to_image(Point::new(radius, radius / 2.0)),
            ];
            // Axis-aligned extremes of the full circle that lie on the kept arc.
            let extremes = [
                Point::new(disk_center.x + radius, disk_center.y),
                Point::new(disk_center.x - radius, disk_center.y),
                Point::new(disk_center.x, disk_center.y + radius),
                Point::new(disk_center.x, disk_center.y - radius),
            ];
            for e in extremes {
                let local = shape.to_local(e);
                if local.y <= radius / 2.0 + BOUNDARY_EPSILON {
                    points.push(e);
                }
            }
            BoundingBox::from_points(points)
        }
        _ => BoundingBox::from_points(local_vertices(shape).into_iter().map(|v| shape.to_image(v))),
    }
}

/// Conservative overlap test: bounding boxes inflated by `padding` intersect.
pub fn overlaps(a: &PlacedShape, b: &PlacedShape, padding: f64) -> bool {
    bounding_box(a)
        .inflate(padding)
        .intersects(&bounding_box(b).inflate(padding))
}
