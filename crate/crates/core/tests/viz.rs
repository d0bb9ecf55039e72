use proptest::prelude::*;
use rasp::compiler::{extract_dag, schedule};
use rasp::graph::{evaluate, Value as Evaluated};
use rasp::stdlib::Stdlib;
use rasp::viz::{render_flow, render_heatmap, FlowFormat, FlowGraph, HeatmapFormat};
use rasp::{Extensions, Interpreter, Sequence};

const FLOWS: &[(&str, &str)] = &[
    ("reverse", "abcde"),
    ("hist_bos", "§aabbaabb"),
    ("hist2", "§aabcd"),
    ("sort_input", "§cba"),
    ("most_freq", "§abbccddd"),
    ("dyck1PTF", "(())"),
    ("dyck2PTF", "({})"),
    ("dyck3PTF", "([]{)"),
    ("shuffle_dyck2", "({)}"),
];

#[test]
fn dot_boxes_and_edges_match_the_schedule() {
    let lib = Stdlib::load_all().unwrap();
    let g = &lib.interp.graph;
    for &(name, input) in FLOWS {
        let root = lib.sop(name).unwrap().id();
        let sched = schedule(g, &extract_dag(g, root));
        let flow = FlowGraph::build(g, root, &Sequence::from_chars(input)).unwrap();
        let ffn: usize = sched.layers.iter().map(|l| l.ffn.len()).sum();
        let expected =
            flow.embeddings.len() + sched.embedding_ffn.len() + sched.total_heads() + ffn;
        assert_eq!(flow.box_count(), expected, "{name}");

        let dot = flow.to_dot();
        assert_eq!(
            dot.lines().filter(|l| l.contains(" [label=")).count(),
            expected,
            "{name}"
        );
        assert_eq!(
            dot.lines().filter(|l| l.contains(" -> ")).count(),
            flow.edges.len(),
            "{name}"
        );
        assert!(dot.starts_with("digraph") && dot.trim_end().ends_with('}'));
    }
}

#[test]
fn annotations_are_evaluated_values() {
    let lib = Stdlib::load_all().unwrap();
    let g = &lib.interp.graph;
    for &(name, input) in FLOWS {
        let root = lib.sop(name).unwrap().id();
        let flow = FlowGraph::build(g, root, &Sequence::from_chars(input)).unwrap();
        let Evaluated::Seq(out) = evaluate(g, root, &Sequence::from_chars(input)).unwrap() else {
            panic!("{name} is not an s-op");
        };
        let want: Vec<String> = out.iter().map(|a| a.to_string()).collect();
        let boxes = flow.embeddings.iter().chain(&flow.embedding_ffn).chain(
            flow.layers
                .iter()
                .flat_map(|l| l.heads.iter().flat_map(|h| &h.outputs).chain(&l.ffn)),
        );
        let root_id = format!("n{}", root.index());
        let root_box = boxes
            .clone()
            .find(|b| b.id == root_id)
            .unwrap_or_else(|| panic!("{name} has no root box"));
        assert_eq!(root_box.value, want, "{name}");
        assert!(
            boxes
                .clone()
                .all(|b| b.value.len() == input.chars().count()),
            "{name}"
        );
    }
}

#[test]
fn hist_flow_heatmap_selects_same_tokens_and_bos() {
    let lib = Stdlib::load_all().unwrap();
    let root = lib.sop("hist_bos").unwrap().id();
    let json = render_flow(&lib.interp.graph, root, "§aabbaabb", FlowFormat::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["layers"].as_array().unwrap().len(), 1);
    let heads = v["layers"][0]["heads"].as_array().unwrap();
    assert_eq!(heads.len(), 1);
    let input: Vec<char> = "§aabbaabb".chars().collect();
    for (q, row) in heads[0]["heatmap"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .skip(1)
    {
        for (k, cell) in row.as_array().unwrap().iter().enumerate() {
            let want = k == 0 || input[k] == input[q];
            assert_eq!(cell.as_bool().unwrap(), want, "({q}, {k})");
        }
    }
}

#[test]
fn flow_output_is_deterministic() {
    let render = || {
        let lib = Stdlib::load_all().unwrap();
        let root = lib.sop("most_freq").unwrap().id();
        [FlowFormat::Dot, FlowFormat::Json, FlowFormat::Text]
            .map(|f| render_flow(&lib.interp.graph, root, "§abbccddd", f).unwrap())
    };
    assert_eq!(render(), render());
}

#[test]
fn same_token_heatmap_has_blocks() {
    let mut it = Interpreter::new(Extensions::default());
    it.exec("same_tok = select(tokens, tokens, ==);").unwrap();
    let Some(rasp::frontend::Value::Selector(sel)) = it.get("same_tok") else {
        panic!("same_tok is not a selector");
    };
    let csv = render_heatmap(&it.graph, *sel, "§aaabbccdef", HeatmapFormat::Csv).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(
        rows[0],
        "query,0:§,1:a,2:a,3:a,4:b,5:b,6:c,7:c,8:d,9:e,10:f"
    );
    assert_eq!(rows[2], "1:a,0,1,1,1,0,0,0,0,0,0,0");
    assert_eq!(rows[5], "4:b,0,0,0,0,1,1,0,0,0,0,0");
    assert_eq!(rows[11], "10:f,0,0,0,0,0,0,0,0,0,0,1");
}

fn selector_source() -> impl Strategy<Value = String> {
    let operand = prop::sample::select(vec![
        "tokens",
        "indices",
        "length - indices - 1",
        "indices % 2",
    ]);
    let base = (
        operand.clone(),
        prop::sample::select(vec!["==", "!=", "<", "<=", ">", ">="]),
    )
        .prop_map(|(o, p)| {
            let other = if o == "tokens" { "tokens" } else { "indices" };
            format!("select({o}, {other}, {p})")
        });
    base.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} and {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} or {b})")),
            inner.prop_map(|a| format!("(not {a})")),
        ]
    })
}

proptest! {
    #[test]
    fn heatmap_cells_equal_the_selection_matrix(src in selector_source(), input in "[ab§]{1,7}") {
        let mut it = Interpreter::new(Extensions::default());
        it.exec(&format!("s = {src};")).unwrap();
        let Some(rasp::frontend::Value::Selector(sel)) = it.get("s") else {
            panic!("{src} is not a selector");
        };
        let Evaluated::Matrix(m) = evaluate(&it.graph, sel.id(), &Sequence::from_chars(&input)).unwrap() else {
            panic!("selector did not evaluate to a matrix");
        };
        let csv = render_heatmap(&it.graph, *sel, &input, HeatmapFormat::Csv).unwrap();
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
        prop_assert_eq!(rows.len(), m.size());
        for (q, row) in rows.iter().enumerate() {
            for k in 0..m.size() {
                prop_assert_eq!(&row[k + 1] == "1", m.get(q, k));
            }
        }
        let ascii = render_heatmap(&it.graph, *sel, &input, HeatmapFormat::Ascii).unwrap();
        for (q, line) in ascii.lines().skip(1).enumerate() {
            let cells: Vec<bool> = line.chars().filter(|c| *c == '█' || *c == '·').map(|c| c == '█').collect();
            prop_assert_eq!(cells, m.row(q).to_vec());
        }
    }
}
