//! Sampling-based OCRS with the (1-eps)/(1+L) target, then an independent check of the frozen policy.
use crslab::geometry::tightness_instance;
use crslab::ocrs::{simulate_ocrs_mc_with, MonteCarloConfig, OcrsScheme};
use crslab::oracles::estimate_selectability;

fn main() -> crslab::Result<()> {
    let inst = tightness_instance(2, 0.1)?;
    let cfg = MonteCarloConfig {
        eps: 0.2,
        trials: 20_000,
        seed: 1,
    };
    let (policy, plug_in) = simulate_ocrs_mc_with(&inst, &cfg)?;
    let check = estimate_selectability(
        &inst,
        &OcrsScheme {
            instance: &inst,
            policy: &policy,
        },
        200_000,
        2,
    )?;
    println!("target {:.6}", (1.0 - cfg.eps) / 3.0);
    for (a, b) in plug_in.entries.iter().zip(&check.entries) {
        let (lo, hi) = b.ratio_ci.unwrap_or((f64::NAN, f64::NAN));
        println!(
            "{:>6}  plug-in {:.4}  measured {:.4} [{:.4}, {:.4}]",
            a.id,
            a.ratio.unwrap_or(f64::NAN),
            b.ratio.unwrap_or(f64::NAN),
            lo,
            hi
        );
    }
    Ok(())
}
