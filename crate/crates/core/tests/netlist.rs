use proptest::prelude::*;
use pulseflow::harness::{compile_program, staircase_pattern, Pacing};
use pulseflow::kernel::{run, SimConfig, SimError};
use pulseflow::netlist::{has_errors, DiagCode, Endpoint, Pin};
use pulseflow::{
    build_generator, build_register, build_shifter, check_design, parse_design, print_design, Circuit, Design,
    ShifterConfig,
};

fn designs() -> Vec<Design> {
    let mut out = vec![
        build_shifter(&ShifterConfig::default()).unwrap(),
        build_shifter(&ShifterConfig::for_width(5)).unwrap(),
        build_register(3, &ShifterConfig::default()).unwrap(),
        build_generator(2, &ShifterConfig::default()).unwrap(),
    ];
    let mut faulty = build_shifter(&ShifterConfig::for_width(4)).unwrap();
    faulty.cell_mut("d3_2").unwrap().config.faulty = true;
    out.push(faulty);
    out
}

#[test]
fn print_then_parse_is_identity() {
    for d in designs() {
        let text = print_design(&d);
        let back = parse_design(&text).unwrap();
        assert!(back.structurally_eq(&d));
        assert_eq!(print_design(&back), text);
    }
}

#[test]
fn parse_ignores_whitespace_comments_and_order() {
    let a = parse_design(
        "cell JTL j delay_fs=5\ncell SINK k\ninput X -> j.IN\nnet j.OUT -> k.IN wire_delay_fs=7\n",
    )
    .unwrap();
    let b = parse_design(
        "# reordered\n\n  net   j.OUT ->  k.IN wire_delay_fs=7  # trailing\ninput X -> j.IN\ncell SINK k\n\tcell JTL j delay_fs=5\n",
    )
    .unwrap();
    assert!(a.structurally_eq(&b));
    assert_eq!(print_design(&a), print_design(&b));
}

#[test]
fn generated_designs_are_clean() {
    for d in designs() {
        assert_eq!(check_design(&d), vec![], "{}", print_design(&d));
    }
}

#[test]
fn extra_sink_on_a_driver_is_fanout() {
    let mut d = build_shifter(&ShifterConfig::default()).unwrap();
    let victim = d
        .nets
        .iter()
        .find(|n| n.driver.to_string() == "d3_3.O3")
        .unwrap()
        .clone();
    let mut extra = victim;
    extra.sink = Endpoint::Pin(Pin::new("O5", pulseflow::Port::In));
    d.nets.push(extra);
    let diags = check_design(&d);
    assert!(diags.iter().any(|x| x.is_error() && x.code == DiagCode::FanoutWithoutSplitter));
    assert!(Circuit::compile(&d).is_err());
}

fn all_input_pins(d: &Design) -> Vec<Endpoint> {
    let mut pins = vec![Endpoint::External("STRAY".into())];
    for c in &d.cells {
        for &p in c.kind.inputs() {
            pins.push(Endpoint::Pin(Pin::new(&c.name, p)));
        }
        for &p in c.kind.outputs() {
            pins.push(Endpoint::Pin(Pin::new(&c.name, p)));
        }
    }
    pins
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn rewired_shifter_is_rejected_or_simulable(net in any::<prop::sample::Index>(), pin in any::<prop::sample::Index>(), driver_side in any::<bool>()) {
        let cfg = ShifterConfig::for_width(4);
        let mut d = build_shifter(&cfg).unwrap();
        let pins = all_input_pins(&d);
        let n = net.index(d.nets.len());
        let p = pins[pin.index(pins.len())].clone();
        if driver_side {
            d.nets[n].driver = p;
        } else {
            d.nets[n].sink = p;
        }
        let diags = check_design(&d);
        match Circuit::compile(&d) {
            Err(SimError::InvalidDesign(errs)) => prop_assert!(has_errors(&errs) && has_errors(&diags)),
            Err(e) => prop_assert!(false, "unexpected compile error {e}"),
            Ok(c) => {
                prop_assert!(!has_errors(&diags));
                let compiled = compile_program(&staircase_pattern(4), &cfg, Pacing::master()).unwrap();
                let res = run(&c, &compiled.stimulus, SimConfig { event_cap: 200_000 });
                match res {
                    Ok(_) | Err(SimError::NonTermination { .. }) | Err(SimError::UnknownInput(_)) => {}
                    Err(e) => prop_assert!(false, "kernel error {e}"),
                }
            }
        }
    }

    #[test]
    fn random_chains_round_trip(delays in prop::collection::vec(1u64..100_000, 1..12), wire in 0u64..5, faulty in any::<bool>()) {
        let mut d = Design::new();
        let mut prev: Option<String> = None;
        for (i, &delay) in delays.iter().enumerate() {
            let mut cfg = pulseflow::CellConfig::with_delay(delay);
            cfg.faulty = faulty && i == 0;
            let name = d.add_cell(format!("j{i}"), pulseflow::CellKind::Jtl, cfg);
            match prev {
                None => d.input("X", Pin::new(&name, pulseflow::Port::In)),
                Some(p) => d.connect_delayed(Pin::new(p, pulseflow::Port::Out), Pin::new(&name, pulseflow::Port::In), wire),
            }
            prev = Some(name);
        }
        d.output(Pin::new(prev.unwrap(), pulseflow::Port::Out), "Y");
        let back = parse_design(&print_design(&d)).unwrap();
        prop_assert!(back.structurally_eq(&d));
        prop_assert!(check_design(&back).is_empty());
    }
}
