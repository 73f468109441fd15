mod common;

use common::{shift_by_steps, shift_with_cut};
use pulseflow::circuits::{clock_out_net, register_cell, Direction};
use pulseflow::harness::{
    compile_program, exhaustive_operations, margin_sweep, random_operations, run_operations, run_program,
    staircase_pattern, MarginOptions, OpProgram, Pacing, SweepOptions,
};
use pulseflow::{build_shifter, Circuit, ClockFlow, ShifterConfig};

fn single(cfg: &ShifterConfig, word: u64, dir: Direction, k: u32) -> pulseflow::harness::RunReport {
    let circuit = Circuit::compile(&build_shifter(cfg).unwrap()).unwrap();
    let mut p = OpProgram::new(cfg.width);
    p.push(word, dir, k, shift_by_steps(word, cfg.width, k, dir));
    let compiled = compile_program(&p, cfg, Pacing::master()).unwrap();
    run_program(&circuit, cfg, &compiled).unwrap().0
}

#[test]
fn single_bit_examples() {
    let cfg = ShifterConfig::default();
    for (word, dir, k, out) in [
        (0b1, Direction::Right, 7, 0x80),
        (0x80, Direction::Left, 7, 0x01),
        (0b1, Direction::Right, 0, 0b1),
        (0b1001_0110, Direction::Right, 1, 0b0010_1100),
    ] {
        let r = single(&cfg, word, dir, k);
        assert!(r.pass(), "{word:#x} {dir:?} {k}: {}", r.summary());
        assert_eq!(r.operations[0].observed, out);
    }
}

#[test]
fn longest_shift_fits_three_master_cycles() {
    let cfg = ShifterConfig::default();
    let r = single(&cfg, 1, Direction::Right, 7);
    let op = &r.operations[0];
    assert!(op.latency_fs.unwrap() <= 300_000, "{:?}", op.latency_fs);
    assert!(op.latency_cycles.unwrap() <= 3);
}

#[test]
fn shift_by_zero_fits_one_master_cycle() {
    let cfg = ShifterConfig::default();
    for dir in Direction::BOTH {
        let r = single(&cfg, 0xff, dir, 0);
        assert!(r.pass());
        assert!(r.operations[0].latency_cycles.unwrap() <= 1);
    }
}

#[test]
fn clock_pulses_are_one_loop_apart_in_every_operation() {
    let cfg = ShifterConfig::default();
    let circuit = Circuit::compile(&build_shifter(&cfg).unwrap()).unwrap();
    let compiled = compile_program(&staircase_pattern(8), &cfg, Pacing::master()).unwrap();
    let (report, result) = run_program(&circuit, &cfg, &compiled).unwrap();
    assert!(report.pass());
    for w in &compiled.windows {
        let net = circuit.net_id(&clock_out_net(w.op.dir)).unwrap();
        let times: Vec<u64> = result
            .trace
            .pulses_on(net)
            .map(|t| t.0)
            .filter(|&t| (w.start.0..w.end.0).contains(&t))
            .collect();
        assert_eq!(times.len(), w.op.k as usize);
        assert!(times.windows(2).all(|p| p[1] - p[0] == cfg.loop_delay_fs));
    }
}

#[test]
fn staircase_is_deterministic() {
    let cfg = ShifterConfig::default();
    let circuit = Circuit::compile(&build_shifter(&cfg).unwrap()).unwrap();
    let compiled = compile_program(&staircase_pattern(8), &cfg, Pacing::master()).unwrap();
    let (a, ra) = run_program(&circuit, &cfg, &compiled).unwrap();
    let (b, rb) = run_program(&circuit, &cfg, &compiled).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra.trace, rb.trace);
    assert_eq!(ra.delivered, rb.delivered);
}

#[test]
fn width_four_exhaustive_and_sixteen_random() {
    let small = ShifterConfig::for_width(4);
    let d = build_shifter(&small).unwrap();
    let r = run_operations(&d, &small, &exhaustive_operations(4), &SweepOptions::default()).unwrap();
    assert!(r.pass(), "{}", r.summary());
    assert_eq!(r.aggregate.operations, 128);

    let wide = ShifterConfig::for_width(16);
    let d = build_shifter(&wide).unwrap();
    let ops = random_operations(16, 40, 11);
    for op in &ops {
        assert_eq!(op.expected, shift_by_steps(op.word, 16, op.k, op.dir));
    }
    let r = run_operations(&d, &wide, &ops, &SweepOptions::default()).unwrap();
    assert!(r.pass(), "{}", r.summary());
}

#[test]
fn co_flow_with_large_skew_is_caught() {
    let cfg = ShifterConfig {
        clock_flow: ClockFlow::CoFlow,
        clock_skew_fs: 12_000,
        ..ShifterConfig::for_width(4)
    };
    let d = build_shifter(&cfg).unwrap();
    let r = run_operations(&d, &cfg, &exhaustive_operations(4), &SweepOptions::default()).unwrap();
    assert!(r.aggregate.mismatches > 0);
}

#[test]
fn co_flow_breaks_exactly_at_the_shortest_set_path() {
    let run = |skew| {
        let cfg = ShifterConfig {
            clock_flow: ClockFlow::CoFlow,
            clock_skew_fs: skew,
            ..ShifterConfig::for_width(4)
        };
        let d = build_shifter(&cfg).unwrap();
        run_operations(&d, &cfg, &exhaustive_operations(4), &SweepOptions::default()).unwrap()
    };
    let d = ShifterConfig::default().cell_delay_fs;
    assert!(run(2_000).pass());
    assert!(run(2 * d - 1).pass());
    assert!(!run(2 * d).pass());
}

#[test]
fn faulty_cell_fails_exactly_the_crossing_operations() {
    let cfg = ShifterConfig::for_width(4);
    for cut in 0..4 {
        let opts = SweepOptions {
            fail_cell: Some(register_cell(cut)),
            ..SweepOptions::default()
        };
        let r = pulseflow::harness::exhaustive_sweep(&cfg, &opts).unwrap();
        for op in &r.operations {
            let predicted_fail = shift_with_cut(op.word, 4, op.k, op.direction, cut) != op.expected;
            assert_eq!(!op.pass, predicted_fail, "cut {cut}: {op:?}");
            if !op.pass {
                assert!(op.first_divergent_output.is_some());
            }
        }
        assert!(!r.aggregate.divergent_outputs.is_empty());
    }
}

#[test]
fn perturbed_delays_keep_equivalence() {
    let cfg = ShifterConfig::for_width(4);
    let report = margin_sweep(
        &cfg,
        &MarginOptions {
            trials: 4,
            ..MarginOptions::default()
        },
    )
    .unwrap();
    assert!(report.settling_holds);
    assert!(report.pass, "{}", report.to_json());
}
