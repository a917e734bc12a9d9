//! Deterministic sequence sources: bouncing sprites, a noisy cosine stream
//! and character corpora, plus IDX sprite ingestion.
//!
//! Every generator is a pure function of its configuration and seed.
//! Datasets of many sequences derive one generator per sequence with
//! [`mix_seed`](crate::numerics::mix_seed)`(seed, index)`.

pub mod bounce;
pub mod cosine;
pub mod idx;
pub mod sprites;
pub mod text;

pub use bounce::{
    binarize, gen_bouncing_dataset, gen_bouncing_sequence, BounceConfig, MovingObject,
    OverlapMode, Sequence,
};
pub use cosine::{cosine_clean, gen_noisy_cosine, CosineConfig};
pub use idx::{encode_idx_sprites, load_idx_sprites, parse_idx_sprites, IDX_MAGIC_U8_3D};
pub use sprites::{builtin_glyphs, GlyphSet, Sprite, SpriteSet, SpriteSource};
pub use text::{encode_char_corpus, one_hot, SymbolStream};
