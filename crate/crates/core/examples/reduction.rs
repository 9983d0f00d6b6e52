//! Reduces NRM, MNL and OCA systems to OCRS instances and runs the online algorithm.
use crslab::ocrs::{baseline_alpha, exact_policy};
use crslab::reduction::{
    build_relaxation_lp, mnl_system, nrm_accept_reject, oca_single_minded, online_algorithm,
    preprocess, OcaAgent, OnlineContext, RecourseOracle, RemapOracle, SubstitutableSystem,
    SystemProduct, TableOracle,
};

fn run(name: &str, sys: &SubstitutableSystem, oracle: &dyn RecourseOracle) -> crslab::Result<()> {
    let lp = build_relaxation_lp(sys).solve()?;
    let red = preprocess(sys, &lp)?;
    let (policy, _) = exact_policy(&red.instance, baseline_alpha(red.instance.l()))?;
    let ctx = OnlineContext {
        system: sys,
        reduction: &red,
        policy: &policy,
        oracle,
    };
    let rep = online_algorithm(&ctx, 100_000, 1)?;
    println!(
        "{name}: LP {:.4}, {} copies, {} dummies, reward {:.4} +- {:.4} (ratio {:.3})",
        rep.lp_value,
        red.mapping.len(),
        red.dummies.len(),
        rep.mean_reward,
        rep.reward_half_width,
        rep.mean_reward / rep.lp_value
    );
    Ok(())
}

fn main() -> crslab::Result<()> {
    let items = vec![("a".to_string(), 2), ("b".to_string(), 1)];
    let products = vec![
        SystemProduct {
            id: "p".into(),
            items: vec![0],
            reward: 1.0,
        },
        SystemProduct {
            id: "q".into(),
            items: vec![0, 1],
            reward: 3.0,
        },
    ];
    let nrm = nrm_accept_reject(
        items.clone(),
        products.clone(),
        &[vec![0.5, 0.4], vec![0.6, 0.2], vec![0.3, 0.5]],
    )?;
    run("NRM", &nrm, &TableOracle)?;

    let mnl = mnl_system(
        items.clone(),
        products,
        &[vec![1.0, 0.5], vec![0.4, 2.0], vec![1.0, 1.0]],
    )?;
    run("MNL", &mnl, &TableOracle)?;

    let agents = vec![
        OcaAgent {
            bundle: vec!["a".into(), "b".into()],
            values: vec![(2.0, 0.5), (4.0, 0.5)],
        },
        OcaAgent {
            bundle: vec!["a".into()],
            values: vec![(1.0, 1.0)],
        },
    ];
    let oca = oca_single_minded(items, &agents)?;
    run("OCA", &oca, &RemapOracle)?;
    Ok(())
}
