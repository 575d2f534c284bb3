//! Regenerates the mesh files under `meshes/`.
//!
//! cargo run -p ph-core --example gen_meshes -- meshes

use ph_core::complex::Label;
use ph_core::{io, meshgen, Result, SimplicialComplex};

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "meshes".into());
    std::fs::create_dir_all(&dir)?;
    let meshes: Vec<(&str, SimplicialComplex)> = vec![
        ("tank_4x2", meshgen::tank(1.0, 0.5, 4, 2)?),
        ("tank_16x8", meshgen::tank(1.0, 0.5, 16, 8)?),
        ("tank_32x16", meshgen::tank(1.0, 0.5, 32, 16)?),
        ("unit_square_4", meshgen::unit_square(4)?),
        ("unit_square_8", meshgen::unit_square(8)?),
        ("unit_square_16", meshgen::unit_square(16)?),
        ("closed_box_8", meshgen::closed_box(8)?),
        ("disc_6", meshgen::disc(1.0, 6, Label::Sigma)?),
        ("annulus_3x16", meshgen::annulus(0.5, 1.0, 3, 16)?),
    ];
    for (name, c) in meshes {
        let path = std::path::Path::new(&dir).join(format!("{name}.mesh"));
        io::write_atomic(&path, &c.to_text())?;
        println!("{} {} triangles", path.display(), c.n_triangles());
    }
    Ok(())
}
