//! Evaluates the clubsuit quantity on random standard and partite fixtures.
use crslab::guarantees::{clubsuit, random_clubsuit_instance, ClubsuitClass};

fn main() -> crslab::Result<()> {
    for class in [ClubsuitClass::Standard, ClubsuitClass::Partite] {
        let mut lowest = f64::INFINITY;
        for seed in 0..50 {
            let fx = random_clubsuit_instance(3, class, seed)?;
            lowest = lowest.min(clubsuit(&fx.instance, &fx.target)?);
        }
        println!("{class:?}: smallest value over 50 fixtures {lowest:.4}");
    }
    Ok(())
}
