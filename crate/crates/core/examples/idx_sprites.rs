//! Writes the built-in glyphs to an IDX file, reads them back and renders a
//! frame of a bouncing sequence as ASCII.

use tncn::datagen::{builtin_glyphs, encode_idx_sprites, gen_bouncing_sequence, load_idx_sprites, BounceConfig, GlyphSet};
use tncn::Rng;

fn main() -> tncn::Result<()> {
    let glyphs = builtin_glyphs(GlyphSet::Clothing, 2);
    let path = std::env::temp_dir().join("tncn_glyphs.idx");
    std::fs::write(&path, encode_idx_sprites(&glyphs.sprites)?).map_err(|e| tncn::Error::Config(e.to_string()))?;
    let loaded = load_idx_sprites(&path)?;
    println!("{} sprites of {:?} from {}", loaded.len(), loaded.max_extent(), path.display());

    let cfg = BounceConfig {
        frame_size: 32,
        seq_len: 4,
        num_objects: 2,
        speed_range: [1.0, 2.5],
        ..BounceConfig::default()
    };
    let seq = gen_bouncing_sequence(&loaded, &cfg, &mut Rng::new(9))?;
    let frame = &seq.frames[seq.len() - 1];
    for r in 0..cfg.frame_size {
        let row: String = (0..cfg.frame_size)
            .map(|c| if frame.get(r * cfg.frame_size + c, 0) > 0.5 { '#' } else { '.' })
            .collect();
        println!("{row}");
    }
    std::fs::remove_file(&path).ok();
    Ok(())
}
