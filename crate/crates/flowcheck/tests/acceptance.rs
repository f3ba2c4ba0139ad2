//! Acceptance gate: the ten pinned end-to-end criteria, one pass/fail line
//! each. Run with `--nocapture` to see the lines as they complete.

mod common;

use common::{all_tours, dense_violations, perturb, uniform_instance, Lcg};
use flowcheck::blp::{build_blp, lift_tour, BlpModel};
use flowcheck::checker::{check_bounds, check_parallel, gap_report, CheckMode};
use flowcheck::config::{Dimension, ModelConfig, StartMode, XSupport};
use flowcheck::model_x::{build_x_model, tour_to_assignment};
use flowcheck::oracle::{branch_and_bound, brute_force, rotation_counted_histogram, tours_with_cost};
use flowcheck::rational::rat;
use flowcheck::valleys::{
    construct_x_flow, construct_y_flow, construct_z_flow, crossing_schedule,
    crossings_from_cost, gen_table_instance, gen_valley_instance, graph8_fractional_assignment,
    TableInstance, ValleySpec,
};
use flowcheck::varkey::VarKey;
use num_traits::Signed;
use std::time::{Duration, Instant};

struct Gate {
    lines: Vec<String>,
    failed: usize,
}

impl Gate {
    fn run(
        &mut self,
        no: usize,
        what: &str,
        limit: Duration,
        f: impl FnOnce() -> Result<String, String>,
    ) {
        let t0 = Instant::now();
        let result = f();
        let dt = t0.elapsed();
        let line = match result {
            Ok(detail) if dt <= limit => {
                format!("PASS criterion {no:2}: {what} — {detail} ({dt:.2?})")
            }
            Ok(detail) => {
                self.failed += 1;
                format!(
                    "FAIL criterion {no:2}: {what} — correct ({detail}) but took {dt:.2?} > {limit:?}"
                )
            }
            Err(why) => {
                self.failed += 1;
                format!("FAIL criterion {no:2}: {what} — {why} ({dt:.2?})")
            }
        };
        println!("{line}");
        self.lines.push(line);
    }
}

fn ensure(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

/// The support-restricted 32-node pipeline used by criteria 5 and 6.
fn direct32_pipeline() -> Result<
    (
        flowcheck::instance::Instance,
        flowcheck::assignment::Assignment,
        ModelConfig,
    ),
    String,
> {
    let spec = ValleySpec::direct_32();
    let inst = gen_valley_instance(&spec).map_err(|e| e.to_string())?;
    let total = 81 * spec.node_count() as u64;
    let x = construct_x_flow(&spec, total).map_err(|e| e.to_string())?;
    let cfg = ModelConfig::new(Dimension::Z)
        .with_start(StartMode::FreeStart)
        .with_total_flow(total)
        .with_support(XSupport::from_assignment(&x))
        .with_bands(spec.bands().unwrap());
    let y = construct_y_flow(&x, &cfg).map_err(|e| e.to_string())?;
    let z = construct_z_flow(&x, &y, &cfg).map_err(|e| e.to_string())?;
    Ok((inst, z, cfg))
}

#[test]
fn acceptance_gate() {
    let mut g = Gate {
        lines: Vec::new(),
        failed: 0,
    };

    g.run(1, "4-town table reproduction", Duration::from_secs(1), || {
        let inst = gen_table_instance(TableInstance::Abcd);
        let r = brute_force(&inst).map_err(|e| e.to_string())?;
        ensure(r.optimal_cost == 79, &format!("optimum {} != 79", r.optimal_cost))?;
        let t79 = tours_with_cost(&inst, 79).map_err(|e| e.to_string())?;
        let t80 = tours_with_cost(&inst, 80).map_err(|e| e.to_string())?;
        let want79 = vec![
            vec![1, 3, 2, 4],
            vec![1, 3, 4, 2],
            vec![1, 4, 2, 3],
            vec![1, 4, 3, 2],
        ];
        let want80 = vec![vec![1, 2, 3, 4], vec![1, 2, 4, 3]];
        ensure(t79 == want79, &format!("79-cost tours {t79:?}"))?;
        ensure(t80 == want80, &format!("80-cost tours {t80:?}"))?;
        Ok("optimum 79; four 79-cost and two 80-cost tours enumerated".into())
    });

    g.run(2, "8-town histogram", Duration::from_secs(10), || {
        let inst = gen_table_instance(TableInstance::Graph8);
        let r = brute_force(&inst).map_err(|e| e.to_string())?;
        ensure(r.optimal_cost == 79, &format!("optimum {} != 79", r.optimal_cost))?;
        let hist = rotation_counted_histogram(&inst).map_err(|e| e.to_string())?;
        // Published counts use the rotation-counted convention (fixed-start
        // counts x n); the manifest note documents this.
        for (cost, want) in [(79i64, 32u64), (80, 16), (81, 8), (82, 24), (83, 24)] {
            let got = hist.get(&cost).copied().unwrap_or(0);
            ensure(got == want, &format!("cost {cost}: {got} tours != {want}"))?;
        }
        ensure(
            r.optimal_count * inst.n() as u64 == 32,
            &format!("optimal count {}", r.optimal_count),
        )?;
        Ok("optimum 79 with 32 rotation-counted optimal tours; histogram matches".into())
    });

    g.run(3, "fractional 8-town point", Duration::from_secs(1), || {
        let inst = gen_table_instance(TableInstance::Graph8);
        let a = graph8_fractional_assignment(rat(1));
        let model = build_x_model(&inst, &ModelConfig::new(Dimension::X));
        let report = check_parallel(model.constraints, &a, CheckMode::Collect, 2)
            .map_err(|e| e.to_string())?;
        ensure(report.ok(), &format!("{} violations", report.violation_count))?;
        let obj = a.objective(&inst).map_err(|e| e.to_string())?;
        ensure(obj == rat(75), &format!("objective {obj} != 75"))?;
        let gap = gap_report(&inst, &a, &rat(79)).map_err(|e| e.to_string())?;
        ensure(gap == rat(-4), &format!("gap {gap} != -4"))?;
        Ok("objective exactly 75, 0 violations, gap -4 vs oracle 79".into())
    });

    g.run(4, "four-valleys x gap", Duration::from_secs(30), || {
        let spec = ValleySpec {
            paths: 1,
            valley_size: 3,
            ..ValleySpec::direct_32()
        };
        let inst = gen_valley_instance(&spec).map_err(|e| e.to_string())?;
        let total = 2u64;
        let x = construct_x_flow(&spec, total).map_err(|e| e.to_string())?;
        let cfg = ModelConfig::new(Dimension::X).with_total_flow(total);
        let model = build_x_model(&inst, &cfg);
        let report = check_parallel(model.constraints, &x, CheckMode::Collect, 2)
            .map_err(|e| e.to_string())?;
        ensure(report.ok(), &format!("{} violations", report.violation_count))?;
        // Crossing component: total value on arcs priced at cross_cost.
        let mut crossing = rat(0);
        for (k, v) in x.iter() {
            let VarKey::X(a) = k else { unreachable!() };
            if inst.cost(a.from, a.to) == spec.cross_cost {
                crossing += v * rat(spec.cross_cost);
            }
        }
        ensure(
            crossing == rat(3 * 1000 * total as i64),
            &format!("crossing component {crossing}"),
        )?;
        let oracle = branch_and_bound(&inst).map_err(|e| e.to_string())?;
        let in_valley = oracle.optimal_cost - 4 * 1000;
        ensure(
            oracle.optimal_cost == 4 * 1000 + in_valley && in_valley > 0,
            &format!("oracle {}", oracle.optimal_cost),
        )?;
        let gap = gap_report(&inst, &x, &rat(oracle.optimal_cost)).map_err(|e| e.to_string())?;
        ensure(gap.is_negative(), &format!("gap {gap} not negative"))?;
        Ok(format!(
            "feasible; crossings 3*1000 per unit flow vs oracle 4*1000+{in_valley}; strict gap"
        ))
    });

    g.run(5, "direct 32-node counterexample", Duration::from_secs(1800), || {
        let (inst, z, cfg) = direct32_pipeline()?;
        ensure(z.len() == 1_120_335, &format!("{} records != 1,120,335", z.len()))?;
        let model = BlpModel::new(&inst, &cfg).map_err(|e| e.to_string())?;
        let vars = model.variables();
        ensure(
            vars.len() == 1_120_335,
            &format!("{} variables != 1,120,335", vars.len()),
        )?;
        let (report, stats) = std::thread::scope(|s| {
            let (tx, rx) = std::sync::mpsc::sync_channel(4096);
            let m = &model;
            let gen = s.spawn(move || {
                m.for_each_constraint(&mut |c| {
                    let _ = tx.send(c);
                })
            });
            let report = check_parallel(rx.into_iter(), &z, CheckMode::Collect, 4);
            (report, gen.join().unwrap())
        });
        ensure(
            stats.constraints == 997_419,
            &format!("{} constraints != 997,419", stats.constraints),
        )?;
        let report = report.map_err(|e| e.to_string())?;
        ensure(report.ok(), &format!("{} violations", report.violation_count))?;
        ensure(
            check_bounds(&z, &rat(cfg.total_flow_constant as i64)) == 0,
            "bound violations",
        )?;
        let t_bnb = Instant::now();
        let oracle = branch_and_bound(&inst).map_err(|e| e.to_string())?;
        ensure(
            t_bnb.elapsed() <= Duration::from_secs(300),
            "branch and bound exceeded 5 minutes",
        )?;
        ensure(oracle.optimal_cost == 4028, &format!("oracle {}", oracle.optimal_cost))?;
        let gap = gap_report(&inst, &z, &rat(4028)).map_err(|e| e.to_string())?;
        ensure(gap.is_negative(), &format!("gap {gap} not negative"))?;
        Ok(format!(
            "1,120,335 variables, 997,419 equations, 0 violations, gap {gap} vs oracle 4028"
        ))
    });

    g.run(6, "visit-family kill-switch", Duration::from_secs(1800), || {
        let (inst, z, cfg) = direct32_pipeline()?;
        let vcfg = cfg.with_visit_constraints(true);
        let model = BlpModel::new(&inst, &vcfg).map_err(|e| e.to_string())?;
        let report = std::thread::scope(|s| {
            let (tx, rx) = std::sync::mpsc::sync_channel(4096);
            let m = &model;
            let gen = s.spawn(move || {
                m.for_each_constraint(&mut |c| {
                    // Only the switched-on family needs re-evaluation; the
                    // base families were verified in criterion 5.
                    if c.label.starts_with("RVISIT213") {
                        let _ = tx.send(c);
                    }
                })
            });
            let report = check_parallel(rx.into_iter(), &z, CheckMode::Collect, 4);
            gen.join().unwrap();
            report
        })
        .map_err(|e| e.to_string())?;
        ensure(report.total > 0, "visit family emitted no constraints")?;
        ensure(
            report.violation_count >= 1,
            "construction still feasible with visit family on",
        )?;
        Ok(format!(
            "visit family on: {} of {} visit equations violated — construction infeasible",
            report.violation_count, report.total
        ))
    });

    g.run(7, "integer equivalence", Duration::from_secs(120), || {
        // {0,1} x-feasibility = tour encodings is covered exhaustively by the
        // integer_equivalence suite; here re-verify the lifting half across
        // all tours and both conditioned dimensions.
        for n in [3u16, 4, 5] {
            let inst = uniform_instance(n as usize);
            for dim in [Dimension::Y, Dimension::Z] {
                let cfg = ModelConfig::new(dim);
                let mut constraints = Vec::new();
                build_blp(&inst, &cfg, &mut |c| constraints.push(c))
                    .map_err(|e| e.to_string())?;
                for tour in all_tours(n) {
                    let a = lift_tour(&tour, &cfg, rat(1)).map_err(|e| e.to_string())?;
                    let report =
                        check_parallel(constraints.iter().cloned(), &a, CheckMode::FailFast, 1)
                            .map_err(|e| e.to_string())?;
                    ensure(
                        report.ok(),
                        &format!("n={n} {dim:?} tour {tour:?} lifting violated a family"),
                    )?;
                }
            }
        }
        Ok("all tour liftings feasible for y and z, n in {3,4,5}".into())
    });

    g.run(8, "checker oracle equivalence", Duration::from_secs(120), || {
        let mut rng = Lcg(0xC0FFEE);
        let mut compared = 0usize;
        for n in [4u16, 5] {
            let inst = uniform_instance(n as usize);
            for dim in [Dimension::X, Dimension::Y, Dimension::Z] {
                let cfg = ModelConfig::new(dim);
                let constraints: Vec<_> = match dim {
                    Dimension::X => build_x_model(&inst, &cfg).constraints,
                    _ => {
                        let mut all = Vec::new();
                        build_blp(&inst, &cfg, &mut |c| all.push(c))
                            .map_err(|e| e.to_string())?;
                        all
                    }
                };
                for round in 0..17 {
                    let tour = rng.tour(n);
                    let base = match dim {
                        Dimension::X => tour_to_assignment(&inst, &tour, rat(1))
                            .map_err(|e| e.to_string())?,
                        _ => lift_tour(&tour, &cfg, rat(1)).map_err(|e| e.to_string())?,
                    };
                    let a = if round % 2 == 0 {
                        base
                    } else {
                        perturb(&base, &mut rng, 1 + round % 4)
                    };
                    let report = check_parallel(
                        constraints.iter().cloned(),
                        &a,
                        CheckMode::Collect,
                        1 + round % 3,
                    )
                    .map_err(|e| e.to_string())?;
                    let fast: Vec<String> =
                        report.violations.iter().map(|v| v.label.clone()).collect();
                    let slow = dense_violations(&constraints, &a);
                    ensure(fast == slow, &format!("verdict mismatch n={n} {dim:?}"))?;
                    compared += 1;
                }
            }
        }
        Ok(format!("{compared} randomized assignments: streaming = dense verdicts"))
    });

    g.run(9, "determinism across thread counts", Duration::from_secs(120), || {
        let bin = env!("CARGO_BIN_EXE_flowcheck");
        let dir = std::env::temp_dir().join("flowcheck-acceptance-det");
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for threads in ["1", "8"] {
            let out = dir.join(format!("g8-{threads}.lp"));
            let status = std::process::Command::new(bin)
                .args([
                    "--threads", threads, "build", "--instance", "graph8", "--model", "y",
                    "--out",
                ])
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), "build run failed")?;
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], "LP files differ between thread counts")?;
        ensure(!outputs[0].is_empty(), "empty LP file")?;
        std::fs::remove_dir_all(&dir).ok();
        Ok(format!(
            "build --threads 1 vs 8: byte-identical {}-byte LP files",
            outputs[0].len()
        ))
    });

    g.run(10, "crossing arithmetic", Duration::from_secs(120), || {
        let seven = ValleySpec::from_dimension(2);
        let r7 = crossing_schedule(&seven).map_err(|e| e.to_string())?;
        ensure(
            (r7.fractional_crossings, r7.integral_crossings) == (6, 7),
            &format!("seven-valleys {:?}", (r7.fractional_crossings, r7.integral_crossings)),
        )?;
        let ten = ValleySpec::from_dimension(3);
        let r10 = crossing_schedule(&ten).map_err(|e| e.to_string())?;
        ensure(
            (r10.fractional_crossings, r10.integral_crossings) == (9, 10),
            &format!("ten-valleys {:?}", (r10.fractional_crossings, r10.integral_crossings)),
        )?;
        // Oracle cross-check on a compact seven-valleys geometry (the
        // ten-valleys oracle is beyond this branch-and-bound's reach; its
        // integral count is the structural valley-count bound).
        let small7 = ValleySpec {
            lead_in: 2,
            lead_out: 2,
            valley_size: 2,
            paths: 2,
            pairs: 2,
            cross_cost: 1000,
            in_cost: 1,
        };
        let inst = gen_valley_instance(&small7).map_err(|e| e.to_string())?;
        let oracle = branch_and_bound(&inst).map_err(|e| e.to_string())?;
        let crossings =
            crossings_from_cost(&small7, oracle.optimal_cost).map_err(|e| e.to_string())?;
        ensure(crossings == 7, &format!("oracle crossings {crossings} != 7"))?;
        Ok("6 vs 7 and 9 vs 10; oracle confirms 7 tour crossings for two pairs".into())
    });

    println!("---");
    for line in &g.lines {
        println!("{line}");
    }
    assert_eq!(g.failed, 0, "{} acceptance criteria failed", g.failed);
}
