// A matrix larger than the crossbar, cut into tiles with ragged edges.
// Tiles are programmed once; repeated MVMs only add read cycles.

use cimsim::tiler::{write_matrix, CrossbarPool};
use cimsim::xbar::CrossbarConfig;
use cimsim::IntMatrix;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (m, n) = (10, 21);
    let data = (0..m * n).map(|k| if (k * 7 + k / 3) % 5 < 2 { -1 } else { 1 }).collect();
    let w = IntMatrix::new(m, n, data)?;

    let mut pool = CrossbarPool::new(CrossbarConfig::ideal(8, 8, 5.0, 10.0))?;
    let handle = write_matrix(&w, 8, 8, "bnn-iii+cycles".parse()?, &mut pool)?;
    let grid = handle.grid();
    println!(
        "{}x{} matrix on 8x8 tiles: {} tiles ({} full, {} edge)",
        m,
        n,
        grid.len(),
        grid.full_tiles().count(),
        grid.edge_tiles().count()
    );

    for batch in 0..4 {
        let v: Vec<i32> = (0..n).map(|k| if (k + batch) % 3 == 0 { -1 } else { 1 }).collect();
        assert_eq!(handle.mvm(&v)?, w.matvec(&v)?);
    }
    let stats = handle.stats();
    println!("writes {} mvms {} reuse {:.1}", stats.writes, stats.mvms, stats.reuse_factor());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
