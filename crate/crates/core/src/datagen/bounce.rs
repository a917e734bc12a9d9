//! Bouncing-sprites video: sprites move with constant speed inside a square
//! frame and reflect off its edges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sprites::SpriteSet;
use crate::error::{Error, Result};
use crate::numerics::{mix_seed, Matrix, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    /// Pixel values add and saturate at 1.
    ClampSum,
    /// Pixelwise maximum.
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BounceConfig {
    pub frame_size: usize,
    pub seq_len: usize,
    pub num_objects: usize,
    /// Speed magnitude range in pixels per frame.
    pub speed_range: [f64; 2],
    pub overlap_mode: OverlapMode,
}

impl Default for BounceConfig {
    fn default() -> Self {
        Self {
            frame_size: 64,
            seq_len: 20,
            num_objects: 2,
            speed_range: [2.0, 5.0],
            overlap_mode: OverlapMode::ClampSum,
        }
    }
}

impl BounceConfig {
    pub fn validate(&self, sprites: &SpriteSet) -> Result<()> {
        if self.seq_len < 1 || self.num_objects < 1 {
            return Err(Error::Config("seq_len and num_objects must be at least 1".into()));
        }
        let [lo, hi] = self.speed_range;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Config(format!("invalid speed_range [{lo}, {hi}]")));
        }
        let (r, c) = sprites.max_extent();
        if r >= self.frame_size || c >= self.frame_size {
            return Err(Error::Config(format!(
                "sprite of {r}x{c} does not fit a {0}x{0} frame",
                self.frame_size
            )));
        }
        Ok(())
    }

    pub fn frame_dim(&self) -> usize {
        self.frame_size * self.frame_size
    }
}

/// One moving sprite. Positions are the top-left corner `(x, y)` in pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MovingObject {
    pub sprite: usize,
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    /// Largest admissible position per axis.
    pub limit: [f64; 2],
}

impl MovingObject {
    /// Integrates one frame; a component that would leave `[0, limit]` is
    /// clamped to the wall and its velocity negated.
    pub fn advance(&mut self) {
        for a in 0..2 {
            let p = self.pos[a] + self.vel[a];
            if p < 0.0 {
                self.pos[a] = 0.0;
                self.vel[a] = -self.vel[a];
            } else if p > self.limit[a] {
                self.pos[a] = self.limit[a];
                self.vel[a] = -self.vel[a];
            } else {
                self.pos[a] = p;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub frame_size: usize,
    /// Flattened row-major frames, each a `frame_size²×1` column.
    pub frames: Vec<Matrix>,
    /// Object states at each rendered frame.
    pub objects: Vec<Vec<MovingObject>>,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

fn render(sprites: &SpriteSet, objects: &[MovingObject], cfg: &BounceConfig) -> Matrix {
    let n = cfg.frame_size;
    let mut frame = Matrix::zeros(n * n, 1);
    let px = frame.as_mut_slice();
    for o in objects {
        let s = &sprites.sprites[o.sprite];
        let (x0, y0) = (o.pos[0].floor() as usize, o.pos[1].floor() as usize);
        for r in 0..s.rows {
            for c in 0..s.cols {
                let v = s.get(r, c);
                let dst = &mut px[(y0 + r) * n + x0 + c];
                *dst = match cfg.overlap_mode {
                    OverlapMode::ClampSum => (*dst + v).min(1.0),
                    OverlapMode::Max => dst.max(v),
                };
            }
        }
    }
    frame
}

/// Draws one sequence: random sprites, positions, directions on the unit
/// circle and speeds uniform in `speed_range`.
pub fn gen_bouncing_sequence(sprites: &SpriteSet, cfg: &BounceConfig, rng: &mut Rng) -> Result<Sequence> {
    cfg.validate(sprites)?;
    let mut objects: Vec<MovingObject> = (0..cfg.num_objects)
        .map(|_| {
            let sprite = rng.below(sprites.len());
            let s = &sprites.sprites[sprite];
            let limit = [
                (cfg.frame_size - s.cols) as f64,
                (cfg.frame_size - s.rows) as f64,
            ];
            let pos = [rng.uniform() * limit[0], rng.uniform() * limit[1]];
            let angle = rng.uniform() * std::f64::consts::TAU;
            let speed = rng.uniform_range(cfg.speed_range[0], cfg.speed_range[1]);
            MovingObject {
                sprite,
                pos,
                vel: [speed * angle.cos(), speed * angle.sin()],
                limit,
            }
        })
        .collect();
    let mut frames = Vec::with_capacity(cfg.seq_len);
    let mut states = Vec::with_capacity(cfg.seq_len);
    for t in 0..cfg.seq_len {
        if t > 0 {
            objects.iter_mut().for_each(MovingObject::advance);
        }
        frames.push(render(sprites, &objects, cfg));
        states.push(objects.clone());
    }
    Ok(Sequence {
        frame_size: cfg.frame_size,
        frames,
        objects: states,
    })
}

/// `count` sequences; sequence `i` uses the generator seeded by
/// `mix_seed(seed, i)`, so the result does not depend on thread count.
pub fn gen_bouncing_dataset(
    sprites: &SpriteSet,
    cfg: &BounceConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<Sequence>> {
    cfg.validate(sprites)?;
    (0..count)
        .into_par_iter()
        .map(|i| gen_bouncing_sequence(sprites, cfg, &mut Rng::new(mix_seed(seed, i as u64))))
        .collect()
}

/// Thresholds pixels at `0.5` to binary targets.
pub fn binarize(frame: &Matrix) -> Matrix {
    frame.map(|v| if v >= 0.5 { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::sprites::{builtin_glyphs, GlyphSet};
    use proptest::prelude::*;
    use crate::numerics::Rng;

    fn digits() -> SpriteSet {
        builtin_glyphs(GlyphSet::Digits, 1)
    }

    #[test]
    fn reflection_at_right_wall() {
        let mut o = MovingObject {
            sprite: 0,
            pos: [55.0, 10.0],
            vel: [3.0, 1.0],
            limit: [56.0, 56.0],
        };
        o.advance();
        assert_eq!(o.pos[0], 56.0);
        assert_eq!(o.vel[0], -3.0);
        assert_eq!(o.vel[1], 1.0);
        o.advance();
        assert_eq!(o.pos[0], 53.0);
    }

    #[test]
    fn same_seed_same_sequence() {
        let cfg = BounceConfig {
            frame_size: 16,
            seq_len: 10,
            num_objects: 1,
            ..BounceConfig::default()
        };
        let a = gen_bouncing_sequence(&digits(), &cfg, &mut Rng::new(4)).unwrap();
        let b = gen_bouncing_sequence(&digits(), &cfg, &mut Rng::new(4)).unwrap();
        let c = gen_bouncing_sequence(&digits(), &cfg, &mut Rng::new(5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 10);
        assert_eq!(a.frames[0].rows(), 256);
    }

    #[test]
    fn sprite_must_fit() {
        let cfg = BounceConfig {
            frame_size: 8,
            ..BounceConfig::default()
        };
        assert!(gen_bouncing_sequence(&digits(), &cfg, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn single_object_frame_carries_the_sprite() {
        let cfg = BounceConfig {
            frame_size: 20,
            seq_len: 1,
            num_objects: 1,
            ..BounceConfig::default()
        };
        let s = digits();
        let seq = gen_bouncing_sequence(&s, &cfg, &mut Rng::new(1)).unwrap();
        let total: f64 = s.sprites[seq.objects[0][0].sprite].pixels.iter().sum();
        assert_eq!(seq.frames[0].sum(), total);
    }

    #[test]
    fn overlap_modes() {
        let s = digits();
        let o = MovingObject {
            sprite: 8,
            pos: [2.0, 2.0],
            vel: [0.0, 0.0],
            limit: [8.0, 8.0],
        };
        let mut cfg = BounceConfig {
            frame_size: 16,
            ..BounceConfig::default()
        };
        let sum = render(&s, &[o, o], &cfg);
        cfg.overlap_mode = OverlapMode::Max;
        let max = render(&s, &[o, o], &cfg);
        assert_eq!(sum, max);
        assert_eq!(sum.max_abs(), 1.0);
    }

    #[test]
    fn dataset_is_order_independent() {
        let cfg = BounceConfig {
            frame_size: 16,
            seq_len: 3,
            num_objects: 1,
            ..BounceConfig::default()
        };
        let d = gen_bouncing_dataset(&digits(), &cfg, 6, 9).unwrap();
        let third = gen_bouncing_sequence(&digits(), &cfg, &mut Rng::new(mix_seed(9, 2))).unwrap();
        assert_eq!(d[2], third);
    }

    proptest! {
        #[test]
        fn kinematics_conserve_speed_and_stay_inside(seed in 0u64..500, objects in 1usize..4) {
            let cfg = BounceConfig { frame_size: 20, seq_len: 30, num_objects: objects, ..BounceConfig::default() };
            let seq = gen_bouncing_sequence(&digits(), &cfg, &mut Rng::new(seed)).unwrap();
            for f in &seq.frames {
                prop_assert!(f.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
            }
            for k in 0..objects {
                let first = seq.objects[0][k];
                let speed0 = first.vel[0].hypot(first.vel[1]);
                for step in &seq.objects {
                    let o = step[k];
                    prop_assert!((o.vel[0].hypot(o.vel[1]) - speed0).abs() < 1e-12);
                    prop_assert!(o.pos[0] >= 0.0 && o.pos[0] <= o.limit[0]);
                    prop_assert!(o.pos[1] >= 0.0 && o.pos[1] <= o.limit[1]);
                }
            }
        }
    }
}
