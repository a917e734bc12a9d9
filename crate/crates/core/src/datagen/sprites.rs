//! Gray-scale sprites and the built-in glyph sets used when no IDX file is
//! supplied.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Sprite {
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels in `[0, 1]`.
    pub pixels: Vec<f64>,
}

impl Sprite {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.cols + c]
    }

    /// Nearest-neighbour upscaling by an integer factor.
    pub fn upscale(&self, factor: usize) -> Sprite {
        let (rows, cols) = (self.rows * factor, self.cols * factor);
        let pixels = (0..rows * cols)
            .map(|i| self.get(i / cols / factor, i % cols / factor))
            .collect();
        Sprite { rows, cols, pixels }
    }

    /// Block-average downsampling by an integer factor (trailing partial
    /// blocks are dropped).
    pub fn downsample(&self, factor: usize) -> Sprite {
        let (rows, cols) = (self.rows / factor, self.cols / factor);
        let norm = (factor * factor) as f64;
        let mut pixels = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let mut s = 0.0;
                for dr in 0..factor {
                    for dc in 0..factor {
                        s += self.get(r * factor + dr, c * factor + dc);
                    }
                }
                pixels.push(s / norm);
            }
        }
        Sprite { rows, cols, pixels }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlyphSet {
    /// Digits 0-9, a stand-in for handwritten digit images.
    #[default]
    Digits,
    /// Block letters A-J.
    Letters,
    /// Ten filled garment and accessory silhouettes.
    Clothing,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpriteSource {
    IdxFile(PathBuf),
    Builtin(GlyphSet),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpriteSet {
    pub sprites: Vec<Sprite>,
    pub source: SpriteSource,
}

impl SpriteSet {
    pub fn new(sprites: Vec<Sprite>, source: SpriteSource) -> Result<Self> {
        if sprites.is_empty() {
            return Err(Error::Empty("sprite set"));
        }
        if sprites
            .iter()
            .flat_map(|s| &s.pixels)
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::Config("sprite pixels must lie in [0, 1]".into()));
        }
        Ok(Self { sprites, source })
    }

    pub fn len(&self) -> usize {
        self.sprites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sprites.is_empty()
    }

    /// Largest sprite extent `(rows, cols)`.
    pub fn max_extent(&self) -> (usize, usize) {
        self.sprites
            .iter()
            .fold((0, 0), |(r, c), s| (r.max(s.rows), c.max(s.cols)))
    }

    pub fn upscale(&self, factor: usize) -> SpriteSet {
        SpriteSet {
            sprites: self.sprites.iter().map(|s| s.upscale(factor)).collect(),
            source: self.source.clone(),
        }
    }

    pub fn downsample(&self, factor: usize) -> SpriteSet {
        SpriteSet {
            sprites: self.sprites.iter().map(|s| s.downsample(factor)).collect(),
            source: self.source.clone(),
        }
    }
}

const DIGITS: [[&str; 8]; 10] = [
    ["..####..", ".#....#.", ".#...##.", ".#..#.#.", ".#.#..#.", ".##...#.", ".#....#.", "..####.."],
    ["...##...", "..###...", ".#.##...", "...##...", "...##...", "...##...", "...##...", ".######."],
    ["..####..", ".#....#.", "......#.", ".....#..", "...##...", "..#.....", ".#......", ".######."],
    ["..####..", ".#....#.", "......#.", "...###..", "......#.", "......#.", ".#....#.", "..####.."],
    [".....#..", "....##..", "...#.#..", "..#..#..", ".#...#..", ".######.", ".....#..", ".....#.."],
    [".######.", ".#......", ".#......", ".#####..", "......#.", "......#.", ".#....#.", "..####.."],
    ["..####..", ".#......", ".#......", ".#####..", ".#....#.", ".#....#.", ".#....#.", "..####.."],
    [".######.", "......#.", ".....#..", "....#...", "...#....", "...#....", "...#....", "...#...."],
    ["..####..", ".#....#.", ".#....#.", "..####..", ".#....#.", ".#....#.", ".#....#.", "..####.."],
    ["..####..", ".#....#.", ".#....#.", "..#####.", "......#.", "......#.", ".....#..", "..###..."],
];

const LETTERS: [[&str; 8]; 10] = [
    ["...##...", "..#..#..", ".#....#.", ".#....#.", ".######.", ".#....#.", ".#....#.", ".#....#."],
    [".#####..", ".#....#.", ".#....#.", ".#####..", ".#....#.", ".#....#.", ".#....#.", ".#####.."],
    ["..#####.", ".#......", "#.......", "#.......", "#.......", "#.......", ".#......", "..#####."],
    [".####...", ".#...#..", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#...#..", ".####..."],
    [".######.", ".#......", ".#......", ".#####..", ".#......", ".#......", ".#......", ".######."],
    [".######.", ".#......", ".#......", ".#####..", ".#......", ".#......", ".#......", ".#......"],
    ["..#####.", ".#......", "#.......", "#...###.", "#.....#.", "#.....#.", ".#....#.", "..#####."],
    [".#....#.", ".#....#.", ".#....#.", ".######.", ".#....#.", ".#....#.", ".#....#.", ".#....#."],
    [".######.", "...##...", "...##...", "...##...", "...##...", "...##...", "...##...", ".######."],
    ["..######", ".....#..", ".....#..", ".....#..", ".....#..", ".#...#..", ".#...#..", "..###..."],
];

// t-shirt, trouser, pullover, dress, coat, sandal, shirt, sneaker, bag, boot
const CLOTHING: [[&str; 8]; 10] = [
    ["##....##", "###..###", "########", ".######.", "..####..", "..####..", "..####..", "..####.."],
    [".######.", ".######.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##."],
    ["..####..", "########", "########", "#.####.#", "#.####.#", "#.####.#", "..####..", "..####.."],
    ["..#..#..", "..####..", "..####..", "...##...", "..####..", ".######.", "########", "########"],
    [".##..##.", "########", "###++###", "#.#++#.#", "#.#++#.#", "#.#++#.#", "..#++#..", "..####.."],
    ["........", "........", "........", "#..#..#.", ".#.#.#..", "..###...", "########", "########"],
    ["##.##.##", "########", "#+####+#", "#+####+#", "..####..", "..#++#..", "..####..", "..####.."],
    ["........", "........", "........", "...###..", "..#####.", ".#######", "########", "++++++++"],
    ["..####..", ".#....#.", "########", "########", "##++++##", "########", "########", "########"],
    ["...####.", "...####.", "...####.", "...####.", "...####.", "..#####.", "########", "########"],
];

fn parse_glyph(rows: &[&str; 8]) -> Sprite {
    let pixels = rows
        .iter()
        .flat_map(|r| r.chars())
        .map(|ch| match ch {
            '#' => 1.0,
            '+' => 0.5,
            _ => 0.0,
        })
        .collect();
    Sprite {
        rows: 8,
        cols: 8,
        pixels,
    }
}

/// One of the built-in 8×8 sprite sets, upscaled by `scale` (1 keeps 8×8).
pub fn builtin_glyphs(set: GlyphSet, scale: usize) -> SpriteSet {
    let table = match set {
        GlyphSet::Digits => &DIGITS,
        GlyphSet::Letters => &LETTERS,
        GlyphSet::Clothing => &CLOTHING,
    };
    let sprites = table
        .iter()
        .map(|g| parse_glyph(g).upscale(scale.max(1)))
        .collect();
    SpriteSet {
        sprites,
        source: SpriteSource::Builtin(set),
    }
}
