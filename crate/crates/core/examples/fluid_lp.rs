//! Solves the fluid LP of the tightness instance and compares it with the DP optimum.
use crslab::geometry::tightness_instance;
use crslab::lp::fluid_lp;
use crslab::oracles::optimal_online_dp;

fn main() -> crslab::Result<()> {
    for l in [2u64, 3] {
        let inst = tightness_instance(l, 0.1)?;
        let sol = fluid_lp(&inst).solve()?;
        let dp = optimal_online_dp(&inst)?.value;
        println!(
            "L={l}: LP {:.5}, online optimum {:.5}, ratio {:.5}",
            sol.objective,
            dp,
            dp / sol.objective
        );
    }
    Ok(())
}
