//! Recursive RCRS for standard instances driven by the selection function.
use crslab::model::{random_instance, RandomInstanceParams};
use crslab::rcrs::{run_recursive_standard_rcrs, solve_selection_function};

fn main() -> crslab::Result<()> {
    let inst = random_instance(RandomInstanceParams {
        l: 2,
        num_items: 5,
        num_batches: 6,
        max_batch_size: 1,
        tight: true,
        seed: 11,
    })?;
    let sf = solve_selection_function(2, 2000)?;
    let k = (4.0 * 2.0 / sf.c_one()).ceil() as usize;
    let bound = (1.0 - 2.0 / (k as f64 * sf.c_one())) * sf.integral;
    let run = run_recursive_standard_rcrs(&inst, &sf, k, 200, 100_000, 3)?;
    println!("K = {k}, guarantee {bound:.4}");
    for e in &run.profile.entries {
        println!(
            "{:>6} x={:.3} ratio {:.4}",
            e.id,
            e.x,
            e.ratio.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
