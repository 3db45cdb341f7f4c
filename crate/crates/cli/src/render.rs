//! Binary PPM (P6) rendering of signals.
//!
//! Every sample becomes a `cell × cell` block. S¹ maps the angle to hue,
//! S² maps azimuth to hue and polar angle to brightness, ℝⁿ is grayscale in
//! the first coordinate and SPD(3) samples are drawn as ellipse glyphs of
//! their in-plane (xy) block, colored by the principal eigenvector.

use std::f64::consts::PI;

use manifold_deconv::{ManifoldKind, Signal};
use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Image {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![[0; 3]; width * height],
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.pixels.iter().flatten());
        out
    }
}

/// HSV to RGB with `h ∈ [0, 1)`, `s, v ∈ [0, 1]`.
pub fn hsv(h: f64, s: f64, v: f64) -> Rgb {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let c = v * s;
    let x = c * (1.0 - ((h6 % 2.0) - 1.0).abs());
    let (r, g, b) = match h6 as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|t| byte(t + m))
}

fn byte(t: f64) -> u8 {
    (t.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn render(s: &Signal, cell: usize) -> Image {
    let cell = cell.max(1);
    let (rows, cols) = s.grid();
    let mut img = Image::new(cols * cell, rows * cell);
    if s.kind() == ManifoldKind::Spd3 {
        draw_glyphs(s, cell, &mut img);
        return img;
    }
    let colors = flat_colors(s);
    for (k, c) in colors.iter().enumerate() {
        let (r, q) = (k / cols, k % cols);
        for y in r * cell..(r + 1) * cell {
            img.pixels[y * img.width + q * cell..y * img.width + (q + 1) * cell].fill(*c);
        }
    }
    img
}

fn flat_colors(s: &Signal) -> Vec<Rgb> {
    match s.kind() {
        ManifoldKind::Circle => s
            .points()
            .iter()
            .map(|p| hsv((p.coords()[0] + PI) / (2.0 * PI), 1.0, 1.0))
            .collect(),
        ManifoldKind::Sphere2 => s
            .points()
            .iter()
            .map(|p| {
                let c = p.coords();
                let polar = c[2].clamp(-1.0, 1.0).acos();
                hsv((c[1].atan2(c[0]) + PI) / (2.0 * PI), 1.0, 1.0 - 0.8 * polar / PI)
            })
            .collect(),
        _ => {
            let first: Vec<f64> = s.points().iter().map(|p| p.coords()[0]).collect();
            let lo = first.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = first.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            first
                .iter()
                .map(|v| {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                    [byte(t); 3]
                })
                .collect()
        }
    }
}

fn draw_glyphs(s: &Signal, cell: usize, img: &mut Image) {
    let cols = s.grid().1;
    let blocks: Vec<Matrix2<f64>> = s
        .points()
        .iter()
        .map(|p| {
            let c = p.coords();
            Matrix2::new(c[0], c[1], c[1], c[3])
        })
        .collect();
    let largest = blocks
        .iter()
        .map(|b| b.symmetric_eigenvalues().max())
        .fold(0.0, f64::max);
    // Pixels per unit length, so the largest semi-axis fills half a cell.
    let scale = 0.5 * (cell as f64 - 1.0).max(1.0) / largest.sqrt();
    let half = 0.5 * cell as f64;
    for (k, (p, b)) in s.points().iter().zip(&blocks).enumerate() {
        let Some(inv) = b.try_inverse() else { continue };
        let c = p.coords();
        let t = Matrix3::new(c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5]);
        let e = SymmetricEigen::new(t);
        let v = e.eigenvectors.column(e.eigenvalues.imax());
        let color = [byte(v[0].abs()), byte(v[1].abs()), byte(v[2].abs())];
        let (r, q) = (k / cols, k % cols);
        for y in 0..cell {
            for x in 0..cell {
                let z = Vector2::new(x as f64 + 0.5 - half, half - y as f64 - 0.5) / scale;
                if z.dot(&(inv * z)) <= 1.0 {
                    img.pixels[(r * cell + y) * img.width + q * cell + x] = color;
                }
            }
        }
    }
}
