//! Prints the guarantee curves for a range of L.
use crslab::guarantees::curve_values;

fn main() -> crslab::Result<()> {
    println!(
        "{:>3} {:>9} {:>9} {:>9} {:>9} {:>12} {:>12}",
        "L", "baseline", "offline", "poisson", "rcrs", "standard+", "partite+"
    );
    for l in 2..=8 {
        let g = curve_values(l)?;
        println!(
            "{:>3} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>12.3e} {:>12.3e}",
            l,
            g.baseline,
            g.offline_ub,
            g.poisson,
            g.rcrs_random_element_alpha.unwrap_or(f64::NAN),
            g.standard_alpha.map_or(f64::NAN, |a| a.excess),
            g.partite_alpha.map_or(f64::NAN, |a| a.excess),
        );
    }
    Ok(())
}
