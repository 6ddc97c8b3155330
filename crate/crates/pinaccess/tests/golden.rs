//! Committed-fixture checks: the ten-cell demo library against a
//! hand-written reference parse, and the hand-minimized netlist file
//! against its expected structure.

use pinaccess::formats::parse_verilog;
use pinaccess::techlib::{parse_library, PinDir};

fn testdata(name: &str) -> String {
    std::fs::read_to_string(format!("{}/testdata/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn demo_library_matches_reference_parse() {
    let (rules, cells) = parse_library(&testdata("demo.lib")).unwrap();

    assert_eq!(rules.dbu_per_micron, 1000);
    assert_eq!(rules.site_width, 64);
    assert_eq!(rules.row_height, 576);
    let layer_names: Vec<&str> = rules.layers.iter().map(|l| l.name.as_str()).collect();
    assert_eq!(layer_names, vec!["M1", "V1", "M2", "V2", "M3"]);
    assert_eq!(rules.layer(0).dp_spacing, Some(40));
    assert_eq!(rules.layer(1).same_net_cut_spacing, Some(32));
    assert_eq!(rules.layer(1).min_enclosure, Some(8));
    assert_eq!(rules.layer(2).min_spacing, 16);

    // hand-written reference: name, width DBU, rows, pin names in order
    let expected: [(&str, i64, u32, &[&str]); 10] = [
        ("C00", 384, 1, &["A", "Y"]),
        ("C01", 512, 1, &["A", "B", "Y"]),
        ("C02", 640, 1, &["A", "B", "Y"]),
        ("C03", 384, 1, &["A", "Y"]),
        ("C04", 512, 1, &["A", "B", "Y"]),
        ("C05", 640, 1, &["A", "B", "Y"]),
        ("C06", 384, 1, &["A", "Y"]),
        ("C07", 512, 1, &["A", "B", "Y"]),
        ("C08", 640, 1, &["A", "B", "Y"]),
        ("C09", 384, 1, &["A", "Y"]),
    ];
    assert_eq!(cells.len(), expected.len());
    for (cell, (name, width, rows, pins)) in cells.iter().zip(&expected) {
        assert_eq!(cell.name, *name);
        assert_eq!(cell.width, *width, "width of {name}");
        assert_eq!(cell.height_rows, *rows);
        let pin_names: Vec<&str> = cell.pins.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(&pin_names, pins, "pins of {name}");
        // last pin drives, the rest listen
        for (k, pin) in cell.pins.iter().enumerate() {
            let want = if k + 1 == cell.pins.len() { PinDir::Output } else { PinDir::Input };
            assert_eq!(pin.direction, want, "direction of {name}/{}", pin.name);
        }
        assert_eq!(cell.power_rails[0], pinaccess::geom::Rect::new(0, 544, *width, 576));
        assert_eq!(cell.power_rails[1], pinaccess::geom::Rect::new(0, 0, *width, 32));
    }
}

#[test]
fn two_module_fixture_matches_expected_structure() {
    let netlist = parse_verilog(&testdata("two_modules.v")).unwrap();
    assert_eq!(netlist.modules.len(), 2);

    let low = &netlist.modules[0];
    assert_eq!(low.name, "pair_low");
    assert_eq!(low.wires, vec!["n0".to_string(), "feedback".to_string()]);
    assert_eq!(low.instances.len(), 2);
    assert_eq!(low.instances[0].master, "INVX1");
    assert_eq!(low.instances[0].inst_name, "U1");
    assert_eq!(
        low.instances[0].connections,
        vec![("A".to_string(), Some("n0".to_string())), ("Y".to_string(), Some("feedback".to_string()))]
    );
    assert_eq!(
        low.instances[1].connections,
        vec![("A".to_string(), Some("feedback".to_string())), ("Y".to_string(), None)]
    );

    let high = &netlist.modules[1];
    assert_eq!(high.name, "pair_high");
    assert_eq!(high.wires, vec!["alpha".to_string()]);
    assert_eq!(
        high.instances[0].connections,
        vec![("A".to_string(), Some("alpha".to_string())), ("Y".to_string(), Some("alpha".to_string()))]
    );
    assert_eq!(
        high.instances[1].connections,
        vec![("A".to_string(), None), ("Y".to_string(), None)]
    );
}
