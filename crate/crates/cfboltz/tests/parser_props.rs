use cfboltz::parser::parse_spec;
use cfboltz::render::render_spec;
use proptest::prelude::*;

const NAMES: [&str; 3] = ["A", "Bx", "C2"];

fn term(symbols: usize) -> impl Strategy<Value = String> {
    (1u32..6, 1u32..4, 0u32..3, prop::collection::vec(0u32..3, symbols), any::<bool>()).prop_map(
        move |(num, den, h, exps, star)| {
            let h = if h == 0 && exps.iter().all(|&e| e == 0) { 1 } else { h };
            let mut parts = Vec::new();
            if num != den {
                parts.push(format!("{num}/{den}{}", if star { " *" } else { "" }));
            }
            if h > 0 {
                parts.push(format!("z^{h}"));
            }
            for (s, &e) in exps.iter().enumerate() {
                if e > 0 {
                    parts.push(format!("{}^{e}", NAMES[s]));
                }
            }
            parts.join(" ")
        },
    )
}

fn spec_text() -> impl Strategy<Value = String> {
    (1usize..=3).prop_flat_map(|k| {
        prop::collection::vec(prop::collection::vec(term(k), 1..5), k).prop_map(move |eqs| {
            eqs.iter()
                .enumerate()
                .map(|(s, terms)| format!("{} = {};\n", NAMES[s], terms.join(" + ")))
                .collect::<String>()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn render_then_parse_is_identity(text in spec_text()) {
        let spec = parse_spec(&text).unwrap();
        let rendered = render_spec(&spec);
        let again = parse_spec(&rendered).unwrap();
        prop_assert_eq!(spec.symbols(), again.symbols());
        for a in 0..spec.num_symbols() {
            prop_assert_eq!(spec.productions(a), again.productions(a));
        }
        prop_assert_eq!(render_spec(&again), rendered);
    }

    #[test]
    fn arbitrary_input_never_panics(text in "[A-Cz0-9 =+*/^;.#\\-\n]{0,60}") {
        let _ = parse_spec(&text);
    }
}
