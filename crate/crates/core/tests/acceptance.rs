//! Acceptance suite. Runs without the libtest harness so every check prints
//! a PASS/FAIL line; exits nonzero if any check fails.

use std::time::{Duration, Instant};

use crslab::geometry::{random_order_instance, tightness_instance};
use crslab::guarantees::{
    clubsuit, curve_values, random_clubsuit_instance, solve_partite_alpha, solve_standard_alpha,
    ClubsuitClass,
};
use crslab::lp::fluid_value;
use crslab::model::{
    random_instance, random_partite_instance, validate, Instance, RandomInstanceParams,
};
use crslab::ocrs::{exact_feasibility_probs, exact_policy, simulate_ocrs_mc, OcrsScheme};
use crslab::oracles::{estimate_selectability, mean_offline_optimum, optimal_online_dp};
use crslab::rcrs::{
    first_try_instance, rcrs_random_element_guarantee, run_recursive_standard_rcrs,
    solve_selection_function, AttenuateGreedy, RESIDUAL_TOL,
};
use crslab::reduction::{
    build_relaxation_lp, nrm_from_instance, oca_single_minded, online_algorithm, preprocess,
    random_mnl_system, scale_down, OcaAgent, OnlineContext, RecourseOracle, RemapOracle,
    SubstitutableSystem, TableOracle,
};
use crslab::rng::{self, Tag};
use crslab::sim::simulate;
use crslab::stats::{normal_quantile_two_sided, Proportion};
use rand::Rng as _;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn within_time(start: Instant, limit: Duration, mut o: Outcome) -> Outcome {
    let el = start.elapsed();
    o.detail.push_str(&format!("; {:.1}s", el.as_secs_f64()));
    if el > limit {
        o.ok = false;
        o.detail.push_str(&format!(" exceeds {}s", limit.as_secs()));
    }
    o
}

fn small_random(l: usize, seed: u64) -> Instance {
    random_instance(RandomInstanceParams {
        l,
        num_items: 10,
        num_batches: 6,
        max_batch_size: 3,
        tight: false,
        seed,
    })
    .unwrap()
}

fn exact_selectability() -> Outcome {
    let start = Instant::now();
    let mut suite: Vec<Instance> = Vec::new();
    for seed in 0..100 {
        for l in [2, 3] {
            suite.push(small_random(l, seed));
        }
    }
    suite.push(tightness_instance(2, 0.1).unwrap());
    suite.push(tightness_instance(3, 0.05).unwrap());
    let mut worst = 0.0f64;
    let mut bad_shape = 0;
    for inst in &suite {
        if inst.items().len() > 10 || inst.num_batches() > 6 {
            bad_shape += 1;
        }
        let a = 1.0 / (1.0 + inst.l() as f64);
        let prof = exact_feasibility_probs(inst, a).unwrap();
        for e in &prof.entries {
            worst = worst.max((e.ratio.unwrap() - a).abs());
        }
    }
    within_time(
        start,
        Duration::from_secs(60),
        outcome(
            worst <= 1e-10 && bad_shape == 0,
            format!(
                "{} instances, max |ratio - alpha| = {worst:.2e}",
                suite.len()
            ),
        ),
    )
}

fn tightness_reproduction() -> Outcome {
    let start = Instant::now();
    let r2 = {
        let inst = tightness_instance(2, 0.01).unwrap();
        optimal_online_dp(&inst).unwrap().value / fluid_value(&inst).unwrap()
    };
    let r3 = {
        let inst = tightness_instance(3, 0.01).unwrap();
        optimal_online_dp(&inst).unwrap().value / fluid_value(&inst).unwrap()
    };
    let ok = (0.3333..=0.3533).contains(&r2) && (0.25..=0.27).contains(&r3);
    within_time(
        start,
        Duration::from_secs(10),
        outcome(ok, format!("DP/LP = {r2:.5} (L=2), {r3:.5} (L=3)")),
    )
}

fn offline_upper_bound() -> Outcome {
    let start = Instant::now();
    let inst = random_order_instance(2).unwrap();
    let (mean, hw) = mean_offline_optimum(&inst, 1_000_000, 20).unwrap();
    let ratio = mean / 2.0;
    let ok = (ratio - 0.48148).abs() <= 0.002;
    within_time(
        start,
        Duration::from_secs(60),
        outcome(
            ok,
            format!("E[offline]/LP = {ratio:.5} (half-width {:.5})", hw / 2.0),
        ),
    )
}

fn curve_checks() -> Outcome {
    // (L, integrality gap, offline upper bound, baseline) as plotted
    let plotted = [
        (2, 0.66667, 0.48148, 0.33333),
        (3, 0.42857, 0.33203, 0.25),
        (4, 0.30769, 0.24992, 0.2),
        (5, 0.23810, 0.19999, 0.16667),
    ];
    let mut mismatches = Vec::new();
    let mut worst = 0.0f64;
    for (l, gap, ub, base) in plotted {
        let g = curve_values(l).unwrap();
        for (name, v, p) in [
            ("gap", g.integrality_gap, gap),
            ("offline_ub", g.offline_ub, ub),
            ("baseline", g.baseline, base),
        ] {
            let rounded = (v * 1e5).round() / 1e5;
            let truncated = (v * 1e5).floor() / 1e5;
            let matches = (rounded - p).abs() < 1e-12 || (truncated - p).abs() < 1e-12;
            worst = worst.max((v - p).abs());
            if !matches || (v - p).abs() >= 1e-5 {
                mismatches.push(format!("{name}(L={l})={v:.7} vs {p}"));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("12 coordinates match to 5 places, max deviation {worst:.2e}")
        } else {
            mismatches.join(", ")
        },
    )
}

fn standard_alpha() -> Outcome {
    let a = solve_standard_alpha(2).unwrap().value();
    let mut capped = 0;
    for seed in 0..200 {
        let inst = random_instance(RandomInstanceParams {
            l: 2,
            num_items: 8,
            num_batches: 8,
            max_batch_size: 1,
            tight: seed % 2 == 0,
            seed: 1000 + seed,
        })
        .unwrap();
        assert!(inst.is_standard());
        if exact_feasibility_probs(&inst, a).unwrap().any_capped() {
            capped += 1;
        }
    }
    let ok = (a - 0.33336).abs() <= 1e-4 && capped == 0;
    outcome(
        ok,
        format!("alpha* = {a:.6}; capped on {capped}/200 standard instances"),
    )
}

fn partite_alpha() -> Outcome {
    let mut worst_excess = f64::INFINITY;
    for l in 2..=10 {
        worst_excess = worst_excess.min(solve_partite_alpha(l).unwrap().excess);
    }
    let mut capped = 0;
    for seed in 0..100 {
        for l in [2, 3] {
            let a = solve_partite_alpha(l).unwrap().value();
            let (inst, _) =
                random_partite_instance(l, 3, 5, 2, seed % 2 == 0, 2000 + seed).unwrap();
            if exact_feasibility_probs(&inst, a).unwrap().any_capped() {
                capped += 1;
            }
        }
    }
    outcome(
        worst_excess > 0.0 && capped == 0,
        format!("min excess over 1/(1+L) for L=2..10: {worst_excess:.3e}; capped on {capped}/200 partite instances"),
    )
}

fn clubsuit_floors() -> Outcome {
    let mut std_min = f64::INFINITY;
    let mut std_fail = 0;
    let mut par_min = f64::INFINITY;
    for seed in 0..500 {
        for l in [2, 3] {
            let f = random_clubsuit_instance(l, ClubsuitClass::Standard, seed).unwrap();
            let v = clubsuit(&f.instance, &f.target).unwrap();
            if v < (l - 1) as f64 - 1e-9 {
                std_fail += 1;
            }
            std_min = std_min.min(v - (l - 1) as f64);
            let f = random_clubsuit_instance(l, ClubsuitClass::Partite, seed).unwrap();
            par_min = par_min.min(clubsuit(&f.instance, &f.target).unwrap());
        }
    }
    let mut plane_max = 0.0f64;
    for l in [2u64, 3, 4] {
        let inst = tightness_instance(l, 0.1 / l as f64).unwrap();
        let target: Vec<String> = inst.products()[0]
            .items
            .iter()
            .map(|&i| inst.items()[i].id.clone())
            .collect();
        plane_max = plane_max.max(clubsuit(&inst, &target).unwrap());
    }
    let ok = std_fail == 0 && par_min >= 1.0 - 1e-9 && plane_max == 0.0;
    outcome(
        ok,
        format!("standard min slack {std_min:.4} (1000 instances), partite min {par_min:.4} (1000 instances), planes {plane_max}"),
    )
}

fn attenuate_greedy() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let cases: Vec<(usize, Instance)> = vec![
        (2, tightness_instance(2, 0.1).unwrap()),
        (2, first_try_instance(2, 0.01, 3).unwrap()),
        (3, tightness_instance(3, 0.05).unwrap()),
        (3, first_try_instance(3, 0.01, 3).unwrap()),
    ];
    for (k, (l, inst)) in cases.iter().enumerate() {
        let g = rcrs_random_element_guarantee(*l).unwrap();
        let scheme = AttenuateGreedy::new(inst).unwrap();
        let prof = estimate_selectability(inst, &scheme, 1_000_000, 30 + k as u64).unwrap();
        let m = prof.min_ratio().unwrap();
        ok &= m >= g - 0.01;
        lines.push(format!("L={l} case {k}: min {m:.4} vs bound {g:.4}"));
    }
    outcome(ok, lines.join("; "))
}

fn selection_function() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for l in 2..=10 {
        let sf = solve_selection_function(l, 4000).unwrap();
        let lf = l as f64;
        ok &= sf.residual <= RESIDUAL_TOL;
        ok &= sf.integral > -(-lf).exp_m1() / lf;
        if l >= 5 {
            ok &= sf.integral > (1.0 - (1.0 + lf).powf(-(1.0 + lf))) / lf;
        }
        if l == 2 {
            ok &= sf.integral >= 0.441;
            notes.push(format!("int c(2) = {:.5}", sf.integral));
        }
        if l == 3 {
            ok &= sf.integral >= 0.321;
            notes.push(format!("int c(3) = {:.5}", sf.integral));
        }
    }
    outcome(ok, notes.join(", "))
}

fn recursive_rcrs() -> Outcome {
    let start = Instant::now();
    let sf = solve_selection_function(2, 4000).unwrap();
    let k = (4.0 * 2.0 / sf.c_one()).ceil() as usize;
    let bound = (1.0 - 2.0 / (k as f64 * sf.c_one())) * sf.integral;
    let mut ok = true;
    let mut mins = Vec::new();
    for seed in 0..3 {
        let inst = random_instance(RandomInstanceParams {
            l: 2,
            num_items: 6,
            num_batches: 6,
            max_batch_size: 1,
            tight: true,
            seed: 3000 + seed,
        })
        .unwrap();
        let run = run_recursive_standard_rcrs(&inst, &sf, k, 10_000, 100_000, 40 + seed).unwrap();
        let m = run.profile.min_ratio().unwrap();
        ok &= m >= bound - 0.015;
        mins.push(format!("{m:.4} ({} products)", inst.products().len()));
    }
    within_time(
        start,
        Duration::from_secs(600),
        outcome(
            ok,
            format!("K = {k}, bound {bound:.4}; min ratios {}", mins.join(", ")),
        ),
    )
}

fn monte_carlo_ocrs() -> Outcome {
    let inst = tightness_instance(2, 0.1).unwrap();
    let eps = 0.1;
    let (policy, _) = simulate_ocrs_mc(&inst, eps, 50).unwrap();
    let scheme = OcrsScheme {
        instance: &inst,
        policy: &policy,
    };
    let tally = simulate(&scheme, 100_000, 51, Tag::Estimate);
    let lp = fluid_value(&inst).unwrap();
    let target = (1.0 - eps) * (1.0 - eps) / (1.0 + eps) * lp / 3.0;
    let v = tally.mean_reward();
    outcome(
        v >= target,
        format!(
            "reward {v:.4} (half-width {:.4}) vs {target:.4}",
            tally.reward_half_width()
        ),
    )
}

fn random_forbidden(rng: &mut crslab::rng::Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(0.4)).collect()
}

fn check_online(
    sys: &SubstitutableSystem,
    alpha: f64,
    oracle: &dyn RecourseOracle,
    seed: u64,
) -> (bool, String) {
    let lp = build_relaxation_lp(sys).solve().unwrap();
    let red = preprocess(sys, &lp).unwrap();
    let (policy, _) = exact_policy(&red.instance, alpha).unwrap();
    let ctx = OnlineContext {
        system: sys,
        reduction: &red,
        policy: &policy,
        oracle,
    };
    let rep = online_algorithm(&ctx, 200_000, seed).unwrap();
    let n = red.instance.products().len();
    // simultaneous 95% intervals over all copies
    let z = normal_quantile_two_sided(0.05 / n as f64);
    let misses = (0..n)
        .filter(|&c| {
            let target = alpha * red.instance.products()[c].active_prob;
            let (lo, hi) = Proportion::new(rep.copy_sales[c], rep.paths)
                .wilson(z)
                .unwrap();
            target < lo || target > hi
        })
        .count();
    let ok = misses == 0 && rep.mean_reward >= alpha * rep.lp_value - rep.reward_half_width;
    (
        ok,
        format!(
            "reward {:.4} vs alpha*LP {:.4} (half-width {:.4}), {misses}/{n} copies off",
            rep.mean_reward,
            alpha * rep.lp_value,
            rep.reward_half_width
        ),
    )
}

fn reduction() -> Outcome {
    let mut rng = rng::stream(60, Tag::Generate, &[]);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let sys = random_mnl_system(4, 5, 1, 2, 600 + k).unwrap();
        let s = rng.random_range(0..sys.actions[0].len());
        let forbidden = random_forbidden(&mut rng, sys.products.len());
        let action = &sys.actions[0][s];
        let mix = scale_down(&sys, 0, action, &forbidden, &TableOracle).unwrap();
        for j in 0..sys.products.len() {
            let want = if forbidden[j] { 0.0 } else { action.phi(j) };
            worst = worst.max((mix.expected_phi(j) - want).abs());
        }
        worst = worst.max((-mix.null_weight()).max(0.0));
    }
    let mut bad_pre = 0;
    for k in 0..1000 {
        let sys = random_mnl_system(4, 6, 4, 3, 5000 + k).unwrap();
        let lp = build_relaxation_lp(&sys).solve().unwrap();
        let red = preprocess(&sys, &lp).unwrap();
        let valid = validate(&red.instance, 1e-9).ok;
        let dummies_ok = red.dummies.iter().all(|&d| d <= sys.items.len());
        if !(valid && dummies_ok && red.instance.has_unit_inventories()) {
            bad_pre += 1;
        }
    }
    let nrm = nrm_from_instance(&tightness_instance(2, 0.1).unwrap()).unwrap();
    let (nrm_ok, nrm_note) = check_online(&nrm, 1.0 / 3.0, &TableOracle, 61);
    let two = |v: f64, p: f64, w: f64| vec![(v, p), (w, 1.0 - p)];
    let oca = oca_single_minded(
        vec![("a".into(), 1), ("b".into(), 1)],
        &[
            OcaAgent {
                bundle: vec!["a".into(), "b".into()],
                values: two(1.0, 0.5, 3.0),
            },
            OcaAgent {
                bundle: vec!["a".into()],
                values: two(2.0, 0.6, 0.5),
            },
            OcaAgent {
                bundle: vec!["b".into()],
                values: two(1.5, 0.3, 4.0),
            },
        ],
    )
    .unwrap();
    let (oca_ok, oca_note) = check_online(&oca, 1.0 / 3.0, &RemapOracle, 62);
    let ok = worst <= 1e-12 && bad_pre == 0 && nrm_ok && oca_ok;
    outcome(
        ok,
        format!("scale-down max error {worst:.2e}; preprocess failures {bad_pre}/1000; NRM: {nrm_note}; OCA: {oca_note}"),
    )
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 12] = [
        ("exact selectability", exact_selectability),
        ("tightness reproduction", tightness_reproduction),
        ("offline upper bound", offline_upper_bound),
        ("guarantee curves", curve_checks),
        ("improved standard alpha", standard_alpha),
        ("partite alpha", partite_alpha),
        ("pair-mass floors", clubsuit_floors),
        ("attenuate-greedy RCRS", attenuate_greedy),
        ("selection function", selection_function),
        ("recursive standard RCRS", recursive_rcrs),
        ("Monte Carlo OCRS", monte_carlo_ocrs),
        ("reduction", reduction),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (k, (name, check)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = check();
        println!(
            "{} [{:>2}] {name}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
        if !o.ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
