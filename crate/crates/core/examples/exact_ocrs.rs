//! Exact OCRS on a random instance: every product is selected with probability exactly alpha.
use crslab::model::{random_instance, RandomInstanceParams};
use crslab::ocrs::{baseline_alpha, exact_policy};

fn main() -> crslab::Result<()> {
    let inst = random_instance(RandomInstanceParams {
        l: 2,
        num_items: 6,
        num_batches: 5,
        max_batch_size: 2,
        tight: true,
        seed: 7,
    })?;
    let alpha = baseline_alpha(inst.l());
    let (policy, profile) = exact_policy(&inst, alpha)?;
    println!("alpha = {alpha:.6}");
    println!(
        "{:>8} {:>8} {:>10} {:>10} {:>8}",
        "product", "x", "P(F)", "accept", "ratio"
    );
    for (j, e) in profile.entries.iter().enumerate() {
        println!(
            "{:>8} {:>8.4} {:>10.6} {:>10.6} {:>8.6}",
            e.id,
            e.x,
            e.feas_prob,
            policy.accept_prob(j),
            e.ratio.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
