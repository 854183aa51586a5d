//! Writes the 30-image synthetic corpus used by the end-to-end tests:
//! three size classes times ten color profiles.
//!
//! ```text
//! cargo run -p hue-rank-core --example make_synthetic_corpus -- crates/core/tests/fixtures/synthetic
//! ```

use std::path::PathBuf;

use image::{Rgb, RgbImage};

const SIZES: [(u32, u32); 3] = [(32, 32), (48, 32), (64, 48)];

fn constant(rgb: [u8; 3]) -> impl Fn(u32, u32, u32, u32) -> [u8; 3] {
    move |_, _, _, _| rgb
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("synthetic"));
    std::fs::create_dir_all(&out)?;

    type Painter = Box<dyn Fn(u32, u32, u32, u32) -> [u8; 3]>;
    let profiles: Vec<(&str, Painter)> = vec![
        ("black", Box::new(constant([0, 0, 0]))),
        ("white", Box::new(constant([255, 255, 255]))),
        ("red", Box::new(constant([220, 30, 30]))),
        ("green", Box::new(constant([40, 200, 60]))),
        ("blue", Box::new(constant([20, 40, 200]))),
        ("gray", Box::new(constant([128, 128, 128]))),
        ("slate", Box::new(constant([60, 80, 100]))),
        // Same color as `slate` under another name.
        ("slate_copy", Box::new(constant([60, 80, 100]))),
        (
            "gradient",
            Box::new(|x, y, w, h| {
                [
                    (x * 255 / (w - 1)) as u8,
                    (y * 255 / (h - 1)) as u8,
                    64,
                ]
            }),
        ),
        (
            "checker",
            Box::new(|x, y, _, _| {
                if (x / 8 + y / 8) % 2 == 0 {
                    [250, 240, 10]
                } else {
                    [10, 20, 90]
                }
            }),
        ),
    ];

    for (w, h) in SIZES {
        for (name, paint) in &profiles {
            let img = RgbImage::from_fn(w, h, |x, y| Rgb(paint(x, y, w, h)));
            let path = out.join(format!("{name}_{w}x{h}.png"));
            img.save(&path)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}
