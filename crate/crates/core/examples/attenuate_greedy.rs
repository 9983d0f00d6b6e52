//! Random-order schemes on the plane instance: plain greedy against attenuate-greedy.
use crslab::geometry::random_order_instance;
use crslab::ocrs::AcceptanceProfile;
use crslab::rcrs::{rcrs_random_element_guarantee, AttenuateGreedy, Greedy};
use crslab::rng::Tag;
use crslab::sim::{simulate, Scheme};
use crslab::stats::Z95;

fn report(name: &str, inst: &crslab::Instance, scheme: &dyn Scheme) {
    let tally = simulate(scheme, 200_000, 5, Tag::Rcrs);
    let prof = AcceptanceProfile::from_tally(inst, &tally, Z95);
    println!(
        "{name:>10}: min ratio {:.4}, mean reward {:.4}",
        prof.min_ratio().unwrap_or(f64::NAN),
        tally.mean_reward()
    );
}

fn main() -> crslab::Result<()> {
    let inst = random_order_instance(2)?;
    println!("guarantee {:.6}", rcrs_random_element_guarantee(2)?);
    report("greedy", &inst, &Greedy::new(&inst)?);
    report("attenuate", &inst, &AttenuateGreedy::new(&inst)?);
    Ok(())
}
