//! Generates a small synthetic striped dataset for trying out the CLI:
//! one subdirectory per class, PNG images inside.
//!
//! Usage: make_dataset <output-dir> [classes] [images-per-class]

use std::fs;
use std::path::PathBuf;

use pud_core::synthetic::{striped_class_corpus, StripedCorpusConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let root: PathBuf = args
        .next()
        .expect("usage: make_dataset <output-dir> [classes] [images-per-class]")
        .into();
    let classes: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(4);
    let per_class: usize = args.next().map(|s| s.parse().unwrap()).unwrap_or(10);

    let config = StripedCorpusConfig {
        classes,
        per_class,
        width: 48,
        height: 48,
        seed: 42,
    };
    for (id, label, img) in striped_class_corpus(&config) {
        let dir = root.join(&label);
        fs::create_dir_all(&dir).expect("create class directory");
        let name = id.rsplit('/').next().unwrap();
        let raw: Vec<u8> = img.pixels().iter().flat_map(|p| p.iter().copied()).collect();
        image::RgbImage::from_raw(img.width() as u32, img.height() as u32, raw)
            .expect("raster converts")
            .save(dir.join(format!("{name}.png")))
            .expect("png writes");
    }
    println!(
        "wrote {} images ({classes} classes) under {}",
        classes * per_class,
        root.display()
    );
}
