use crslab::geometry::illustrative_instance;
use crslab::lp::fluid_value;
use crslab::model::{
    load_instance, random_instance, save_instance, validate, RandomInstanceParams,
};
use crslab::ocrs::{exact_feasibility_probs, exact_policy, OcrsScheme, Realization};
use crslab::oracles::{exhaustive_acceptance_probs, offline_optimum, optimal_online_dp};
use crslab::rcrs::attenuation_b;
use crslab::reduction::{
    build_relaxation_lp, online_algorithm, preprocess, random_mnl_system, scale_down,
    OnlineContext, TableOracle,
};
use crslab::rng::{self, Tag};
use crslab::sim::{PathRecord, Scheme};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = RandomInstanceParams> {
    (
        2usize..=3,
        3usize..=8,
        1usize..=5,
        1usize..=3,
        any::<bool>(),
        any::<u64>(),
    )
        .prop_map(|(l, num_items, num_batches, max_batch_size, tight, seed)| {
            RandomInstanceParams {
                l,
                num_items,
                num_batches,
                max_batch_size,
                tight,
                seed,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_are_valid_and_round_trip(p in params()) {
        let inst = random_instance(p).unwrap();
        prop_assert!(validate(&inst, 1e-9).ok);
        prop_assert_eq!(load_instance(&save_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn baseline_alpha_is_exact(p in params()) {
        let inst = random_instance(p).unwrap();
        let a = 1.0 / (1.0 + inst.l() as f64);
        let prof = exact_feasibility_probs(&inst, a).unwrap();
        for e in &prof.entries {
            prop_assert!(e.feas_prob >= a - 1e-12);
            prop_assert!((e.ratio.unwrap() - a).abs() < 1e-10);
        }
    }

    #[test]
    fn enumeration_agrees_with_dp(p in params(), alpha in 0.0f64..0.5) {
        let inst = random_instance(RandomInstanceParams { num_batches: p.num_batches.min(4), tight: false, ..p }).unwrap();
        let (policy, prof) = exact_policy(&inst, alpha).unwrap();
        let en = exhaustive_acceptance_probs(&inst, &policy).unwrap();
        for (a, b) in prof.entries.iter().zip(&en.entries) {
            prop_assert!((a.feas_prob - b.feas_prob).abs() < 1e-10);
            prop_assert!((a.accept_prob - b.accept_prob).abs() < 1e-10);
        }
    }

    #[test]
    fn dp_below_fluid_lp(p in params()) {
        let inst = random_instance(p).unwrap();
        let dp = optimal_online_dp(&inst).unwrap().value;
        prop_assert!(dp >= 0.0);
        prop_assert!(dp <= fluid_value(&inst).unwrap() + 1e-9);
    }

    #[test]
    fn offline_dominates_ocrs_pathwise(p in params(), seed in any::<u64>()) {
        let inst = random_instance(p).unwrap();
        let (policy, _) = exact_policy(&inst, 1.0 / (1.0 + inst.l() as f64)).unwrap();
        let scheme = OcrsScheme { instance: &inst, policy: &policy };
        let mut rng = rng::stream(seed, Tag::Probe, &[]);
        let mut rec = PathRecord::new(inst.products().len());
        for _ in 0..20 {
            rec.reset();
            scheme.run_path(&mut rng, &mut rec);
            let active = inst
                .batches()
                .iter()
                .map(|b| b.iter().copied().find(|&j| rec.active[j]))
                .collect();
            let best = offline_optimum(&inst, &Realization { active }).unwrap();
            prop_assert!(best >= rec.reward - 1e-12);
        }
    }

    #[test]
    fn attenuation_in_unit_interval(l in 2usize..=10, x in 0.0f64..=1.0) {
        let b = attenuation_b(l, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn scale_down_expectation_identity(seed in any::<u64>(), mask in any::<u8>(), pick in any::<usize>()) {
        let sys = random_mnl_system(4, 6, 1, 2, seed).unwrap();
        let forbidden: Vec<bool> = (0..6).map(|j| mask >> j & 1 == 1).collect();
        let action = &sys.actions[0][pick % sys.actions[0].len()];
        let mix = scale_down(&sys, 0, action, &forbidden, &TableOracle).unwrap();
        prop_assert!(mix.entries.iter().all(|e| e.weight >= 0.0));
        prop_assert!(mix.null_weight() >= -1e-12);
        for j in 0..6 {
            let want = if forbidden[j] { 0.0 } else { action.phi(j) };
            prop_assert!((mix.expected_phi(j) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn preprocess_outputs_validate(seed in any::<u64>()) {
        let sys = random_mnl_system(5, 6, 4, 3, seed).unwrap();
        let lp = build_relaxation_lp(&sys).solve().unwrap();
        let red = preprocess(&sys, &lp).unwrap();
        prop_assert!(validate(&red.instance, 1e-9).ok);
        prop_assert!(red.dummies.iter().all(|&d| d <= sys.items.len()));
        let total: f64 = red.instance.products().iter().map(|p| p.reward * p.active_prob).sum();
        prop_assert!((total - lp.objective).abs() < 1e-7);
    }
}

#[test]
fn online_algorithm_never_underflows() {
    for seed in 0..4 {
        let sys = random_mnl_system(3, 5, 6, 2, 90 + seed).unwrap();
        let lp = build_relaxation_lp(&sys).solve().unwrap();
        let red = preprocess(&sys, &lp).unwrap();
        let (policy, _) =
            exact_policy(&red.instance, 1.0 / (1.0 + red.instance.l() as f64)).unwrap();
        let ctx = OnlineContext {
            system: &sys,
            reduction: &red,
            policy: &policy,
            oracle: &TableOracle,
        };
        online_algorithm(&ctx, 250_000, seed).unwrap();
    }
}

#[test]
fn illustrative_instance_baseline() {
    let inst = illustrative_instance(0.1).unwrap();
    let prof = exact_feasibility_probs(&inst, 1.0 / 3.0).unwrap();
    assert!(prof
        .entries
        .iter()
        .all(|e| (e.ratio.unwrap() - 1.0 / 3.0).abs() < 1e-12));
}
