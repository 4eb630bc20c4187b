//! Property suites for the engine: reversibility, the parity coupling,
//! canonical sparsity, trace determinism, and format round trips.

use ant_core::antpat::AntpatDoc;
use ant_core::engine::{step, unstep, Configuration, EngineConfig, Simulator};
use ant_core::geom::{Cell, Direction};
use ant_core::picture::Picture;
use ant_core::rule::{Letter, RuleWord};
use proptest::prelude::*;

fn arb_rule(max_len: usize) -> impl Strategy<Value = RuleWord> {
    prop::collection::vec(prop::bool::ANY, 1..=max_len).prop_map(|bits| {
        let letters = bits
            .into_iter()
            .map(|b| if b { Letter::R } else { Letter::L })
            .collect();
        RuleWord::new(letters).unwrap()
    })
}

fn arb_config(alphabet: usize) -> impl Strategy<Value = Configuration> {
    let cell = (-24i64..24, -24i64..24, 0..alphabet as u16);
    (
        prop::collection::vec(cell, 0..40),
        -4i64..4,
        -4i64..4,
        0u8..4,
    )
        .prop_map(|(cells, x, y, d)| {
            let picture = Picture::from_cells(
                cells
                    .into_iter()
                    .map(|(x, y, s)| (Cell::new(x, y), s as u8)),
            );
            Configuration::new(picture, Cell::new(x, y), Direction::ALL[d as usize])
        })
}

fn rule_and_config() -> impl Strategy<Value = (RuleWord, Configuration)> {
    arb_rule(6).prop_flat_map(|rule| {
        let n = rule.alphabet_size();
        arb_config(n).prop_map(move |c| (rule.clone(), c))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn backward_undoes_forward((rule, start) in rule_and_config()) {
        let mut c = start.clone();
        for _ in 0..2_000 {
            step(&rule, &mut c);
        }
        for _ in 0..2_000 {
            unstep(&rule, &mut c);
        }
        prop_assert_eq!(c, start);
    }

    #[test]
    fn direction_axis_is_a_function_of_cell_parity((rule, start) in rule_and_config()) {
        let start_parity = start.position.parity();
        let start_horizontal = start.direction.is_horizontal();
        let mut c = start;
        for _ in 0..1_000 {
            step(&rule, &mut c);
            let expect_horizontal = (c.position.parity() == start_parity) == start_horizontal;
            prop_assert_eq!(c.direction.is_horizontal(), expect_horizontal);
        }
    }

    #[test]
    fn direction_axis_alternates_every_step((rule, start) in rule_and_config()) {
        let mut c = start;
        let mut last = c.direction.is_horizontal();
        for _ in 0..256 {
            step(&rule, &mut c);
            prop_assert_ne!(c.direction.is_horizontal(), last);
            last = c.direction.is_horizontal();
        }
    }

    #[test]
    fn stored_cells_stay_canonical((rule, start) in rule_and_config()) {
        let mut c = start;
        for _ in 0..3_000 {
            step(&rule, &mut c);
        }
        // No stored entry is zero, and rebuilding from the sorted cells
        // gives an equal picture.
        let cells = c.picture.sorted_cells();
        prop_assert!(cells.iter().all(|&(_, v)| v != 0));
        prop_assert_eq!(Picture::from_cells(cells.iter().copied()), c.picture);
    }

    #[test]
    fn equal_inputs_give_identical_runs((rule, start) in rule_and_config()) {
        let engine = EngineConfig::default();
        let mut a = Simulator::new(rule.clone(), start.clone(), engine.clone());
        let mut b = Simulator::new(rule.clone(), start, engine);
        a.run(5_000).unwrap();
        b.run(5_000).unwrap();
        prop_assert_eq!(a.trace().suffix(5_000), b.trace().suffix(5_000));
        prop_assert_eq!(a.config(), b.config());
    }

    #[test]
    fn antpat_write_read_write_is_identity((rule, config) in rule_and_config()) {
        let doc = AntpatDoc::for_configuration(&rule, &config);
        let text = doc.to_text();
        let parsed = AntpatDoc::parse(&text).unwrap();
        prop_assert_eq!(parsed.to_text(), text);
        prop_assert_eq!(parsed.to_configuration(), config);
    }
}

#[test]
fn long_lr_run_reverses_to_the_white_start() {
    let rule: RuleWord = "LR".parse().unwrap();
    let mut sim = Simulator::new(rule, Configuration::white(), EngineConfig::default());
    sim.run(10_000).unwrap();
    sim.run_back(10_000);
    assert_eq!(sim.config(), &Configuration::white());
}

#[test]
fn trace_spill_matches_ring() {
    let rule: RuleWord = "LLRL".parse().unwrap();
    let path = std::env::temp_dir().join("ant-core-spill-test.trace");
    let file = std::fs::File::create(&path).unwrap();
    let mut sim = Simulator::new(rule, Configuration::white(), EngineConfig::default());
    sim.spill_trace_to(Box::new(std::io::BufWriter::new(file)));
    sim.run(4_096).unwrap();
    drop(sim);
    let spilled = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(spilled.len(), 4_096);

    let rule: RuleWord = "LLRL".parse().unwrap();
    let mut again = Simulator::new(rule, Configuration::white(), EngineConfig::default());
    again.run(4_096).unwrap();
    assert_eq!(spilled, again.trace().suffix(4_096));
}
