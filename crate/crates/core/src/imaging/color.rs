//! sRGB <-> CIELAB (D65 white, 2 degree observer).

use super::{LabImage, RasterImage};

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];
const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

fn linearize(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn encode(c: f64) -> u8 {
    let c = c.clamp(0.0, 1.0);
    let v = if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    };
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

fn mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2])
}

fn f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

pub fn srgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let xyz = mul(&RGB_TO_XYZ, rgb.map(linearize));
    let [fx, fy, fz] = [0, 1, 2].map(|i| f(xyz[i] / WHITE[i]));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Out-of-gamut colors are clamped channel-wise.
pub fn lab_to_srgb(lab: [f64; 3]) -> [u8; 3] {
    let [l, a, b] = lab;
    let fy = (l + 16.0) / 116.0;
    let fx = fy + a / 500.0;
    let fz = fy - b / 200.0;
    let inv = |t: f64| {
        let cube = t * t * t;
        if cube > EPSILON {
            cube
        } else {
            (116.0 * t - 16.0) / KAPPA
        }
    };
    let yr = if l > KAPPA * EPSILON { fy * fy * fy } else { l / KAPPA };
    let xyz = [inv(fx) * WHITE[0], yr * WHITE[1], inv(fz) * WHITE[2]];
    mul(&XYZ_TO_RGB, xyz).map(encode)
}

pub fn rgb_to_lab(img: &RasterImage) -> LabImage {
    LabImage {
        width: img.width(),
        height: img.height(),
        pixels: img.pixels().iter().map(|&p| srgb_to_lab(p)).collect(),
    }
}

pub fn lab_to_rgb(img: &LabImage) -> RasterImage {
    RasterImage {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().map(|&p| lab_to_srgb(p)).collect(),
    }
}
