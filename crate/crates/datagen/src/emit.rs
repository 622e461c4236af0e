//! Catalog assembly (filled in once the pool stabilizes).

use crate::pool::Pool;

pub fn assemble(_pool: &Pool) -> anyhow::Result<()> {
    println!("== assemble: not yet implemented ==");
    Ok(())
}
