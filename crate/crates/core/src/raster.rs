//! Rendering of world models to 8-bit RGB images.

use std::io::Write;

use rand::Rng;

use crate::error::Result;
use crate::geometry::{self, Point};
use crate::worldgen::{trunc_normal, Color, WorldModel};

/// Fraction of the distance to white (or black) covered by a full shade.
pub const SHADE_BLEND_CAP: f64 = 0.5;

/// Square RGB image, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    size: u32,
    pixels: Vec<u8>,
}

impl Image {
    pub fn black(size: u32) -> Self {
        Image {
            size,
            pixels: vec![0; (size * size * 3) as usize],
        }
    }

    pub fn from_raw(size: u32, pixels: Vec<u8>) -> Option<Self> {
        (pixels.len() == (size * size * 3) as usize).then_some(Image { size, pixels })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.size + x) * 3) as usize;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Encodes the image as an 8-bit RGB PNG.
    pub fn write_png<W: Write>(&self, out: W) -> std::result::Result<(), png::EncodingError> {
        let mut encoder = png::Encoder::new(out, self.size, self.size);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        writer.write_image_data(&self.pixels)?;
        writer.finish()
    }

    pub fn to_png(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_png(&mut buf).expect("in-memory PNG encoding");
        buf
    }

    /// Decodes an 8-bit RGB PNG written by [`Image::write_png`].
    pub fn from_png(bytes: &[u8]) -> std::result::Result<Image, String> {
        let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
        let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
        let mut buf = vec![0; reader.output_buffer_size().ok_or("image too large")?];
        let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
        if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
            return Err(format!("expected 8-bit RGB, got {:?} {:?}", info.color_type, info.bit_depth));
        }
        if info.width != info.height {
            return Err(format!("expected a square image, got {}x{}", info.width, info.height));
        }
        buf.truncate(info.buffer_size());
        Image::from_raw(info.width, buf).ok_or_else(|| "truncated pixel data".to_string())
    }
}

/// Float image used between painting and the final quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage {
    size: u32,
    values: Vec<f64>,
}

impl FloatImage {
    pub fn quantize(&self) -> Image {
        Image {
            size: self.size,
            pixels: self.values.iter().map(|&v| quantize_channel(v)).collect(),
        }
    }
}

fn quantize_channel(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Blends `base` toward white for positive shade and toward black for
/// negative shade, covering at most half the distance.
pub fn shade_color(base: Color, shade: f64) -> [f64; 3] {
    let factor = shade.abs() * SHADE_BLEND_CAP;
    let target = if shade > 0.0 { 1.0 } else { 0.0 };
    base.rgb().map(|c| c + (target - c) * factor)
}

/// Paints the world onto a black float canvas, sampling at pixel centres.
pub fn rasterize_float(world: &WorldModel) -> FloatImage {
    let size = world.image_size;
    let mut values = vec![0.0; (size * size * 3) as usize];
    for entity in &world.entities {
        let shape = entity.placed_shape(size);
        let rgb = shade_color(entity.color, entity.shade);
        let bbox = geometry::bounding_box(&shape);
        let x0 = (bbox.min_x - 0.5).floor().max(0.0) as u32;
        let y0 = (bbox.min_y - 0.5).floor().max(0.0) as u32;
        let x1 = ((bbox.max_x - 0.5).ceil().max(0.0) as u32).min(size - 1);
        let y1 = ((bbox.max_y - 0.5).ceil().max(0.0) as u32).min(size - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let centre = Point::new(f64::from(x) + 0.5, f64::from(y) + 0.5);
                if geometry::contains(&shape, centre) {
                    let i = ((y * size + x) * 3) as usize;
                    values[i..i + 3].copy_from_slice(&rgb);
                }
            }
        }
    }
    FloatImage { size, values }
}

/// Noise-free rendering.
pub fn rasterize(world: &WorldModel) -> Image {
    rasterize_float(world).quantize()
}

fn perturb<R: Rng + ?Sized>(values: &mut [f64], sigma: f64, rng: &mut R) -> Result<()> {
    if sigma <= 0.0 {
        return Ok(());
    }
    for v in values.iter_mut() {
        *v = (*v + trunc_normal(0.0, sigma, -1.0, 1.0, rng)?).clamp(0.0, 1.0);
    }
    Ok(())
}

/// Adds independent truncated-normal noise to every channel value.
pub fn apply_pixel_noise<R: Rng + ?Sized>(img: &Image, sigma: f64, rng: &mut R) -> Result<Image> {
    if sigma <= 0.0 {
        return Ok(img.clone());
    }
    let mut values: Vec<f64> = img.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    perturb(&mut values, sigma, rng)?;
    Ok(FloatImage {
        size: img.size,
        values,
    }
    .quantize())
}

/// Full rendering pipeline: paint, add the world's pixel noise, quantize once.
pub fn render<R: Rng + ?Sized>(world: &WorldModel, rng: &mut R) -> Result<Image> {
    let mut canvas = rasterize_float(world);
    perturb(&mut canvas.values, world.pixel_noise_sigma, rng)?;
    Ok(canvas.quantize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ShapeKind;
    use crate::worldgen::Entity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn entity(shape: ShapeKind, color: Color, size: f64) -> Entity {
        Entity {
            shape,
            color,
            location: Point::new(32.0, 32.0),
            size,
            distortion: 1.0,
            rotation: 0.0,
            shade: 0.0,
        }
    }

    #[test]
    fn shade_blend_rule() {
        assert_eq!(shade_color(Color::Red, 0.0), [1.0, 0.0, 0.0]);
        assert_eq!(shade_color(Color::Red, 1.0), [1.0, 0.5, 0.5]);
        assert_eq!(shade_color(Color::White, -1.0), [0.5, 0.5, 0.5]);
    }

    #[test]
    fn shaded_colors_stay_nearest_to_their_base() {
        // At |shade| = 1 the blend lands equidistant from a neighbouring hue,
        // so the strict property holds on the open interval only.
        for base in Color::ALL {
            for shade in [-0.999, -0.6, -0.2, 0.0, 0.3, 0.7, 0.999] {
                let rgb = shade_color(base, shade);
                let nearest = Color::ALL
                    .into_iter()
                    .min_by(|a, b| {
                        let d = |c: Color| -> f64 {
                            c.rgb().iter().zip(rgb).map(|(x, y)| (x - y).powi(2)).sum()
                        };
                        d(*a).total_cmp(&d(*b))
                    })
                    .unwrap();
                assert_eq!(nearest, base, "{base} shade {shade}");
            }
        }
    }

    #[test]
    fn empty_world_is_black() {
        let img = rasterize(&WorldModel::empty(64));
        assert!(img.as_bytes().iter().all(|&b| b == 0));
        assert_eq!(img.as_bytes().len(), 64 * 64 * 3);
    }

    #[test]
    fn square_area_matches_analytic_area() {
        let world = WorldModel::with_entities(vec![entity(ShapeKind::Square, Color::Red, 0.25)]);
        let img = rasterize(&world);
        let painted = img.as_bytes().chunks(3).filter(|p| p != &[0, 0, 0]).count() as f64;
        let side = 0.25 * 64.0;
        assert!((painted - side * side).abs() <= 2.0 * 4.0 * side);
    }

    #[test]
    fn painted_pixels_use_the_shaded_color() {
        let mut e = entity(ShapeKind::Circle, Color::Green, 0.3);
        e.shade = 0.4;
        let img = rasterize(&WorldModel::with_entities(vec![e]));
        let expected = shade_color(Color::Green, 0.4).map(quantize_channel);
        for p in img.as_bytes().chunks(3).filter(|p| p != &[0, 0, 0]) {
            assert_eq!(p, expected);
        }
    }

    #[test]
    fn zero_sigma_noise_is_identity() {
        let world = WorldModel::with_entities(vec![entity(ShapeKind::Cross, Color::Cyan, 0.3)]);
        let img = rasterize(&world);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(apply_pixel_noise(&img, 0.0, &mut rng).unwrap(), img);
    }

    #[test]
    fn png_round_trip() {
        let mut world = WorldModel::with_entities(vec![entity(ShapeKind::Pentagon, Color::Yellow, 0.2)]);
        world.pixel_noise_sigma = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let img = render(&world, &mut rng).unwrap();
        let decoded = Image::from_png(&img.to_png()).unwrap();
        assert_eq!(decoded, img);
    }
}
