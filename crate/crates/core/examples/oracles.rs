//! Online DP optimum and offline optimum against the fluid LP.
use crslab::geometry::random_order_instance;
use crslab::lp::fluid_value;
use crslab::oracles::{mean_offline_optimum, optimal_online_dp};

fn main() -> crslab::Result<()> {
    let inst = random_order_instance(2)?;
    let lp = fluid_value(&inst)?;
    let dp = optimal_online_dp(&inst)?;
    let (off, hw) = mean_offline_optimum(&inst, 200_000, 9)?;
    println!("fluid LP         {lp:.5}");
    println!(
        "online optimum   {:.5} ({:.4} of LP)",
        dp.value,
        dp.value / lp
    );
    println!(
        "offline optimum  {off:.5} +- {hw:.5} ({:.4} of LP)",
        off / lp
    );
    Ok(())
}
