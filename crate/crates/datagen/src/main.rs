//! Generates data/catalog.json: constructs the completely replicable
//! functions the classification needs, verifies each one through the
//! replication identities, and assembles the catalog records.

mod bench;
mod emit;
mod kit;
mod pool;

use pool::Pool;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let stage = args.first().map(String::as_str).unwrap_or("all");

    let mut p = Pool::default();
    bench::stage_eta(&mut p);
    if stage != "eta" {
        bench::stage_roots(&mut p);
        bench::stage_specials(&mut p);
        bench::complete_maps(&mut p);
    }
    bench::report(&p);
    if stage == "all" {
        emit::assemble(&p)?;
    }
    Ok(())
}
