//! Reader and writer for the line-oriented library file format.

use super::*;
use crate::geom::Rect;
use std::fmt::Write as _;

struct LineParser<'a> {
    line: usize,
    tokens: std::str::SplitWhitespace<'a>,
}

impl<'a> LineParser<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        LineParser { line, tokens: text.split_whitespace() }
    }

    fn err(&self, msg: impl Into<String>) -> LibraryError {
        LibraryError::Syntax { line: self.line, msg: msg.into() }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, LibraryError> {
        self.tokens.next().ok_or_else(|| self.err(format!("expected {what}")))
    }

    fn int(&mut self, what: &str) -> Result<Dbu, LibraryError> {
        let tok = self.next(what)?;
        tok.parse().map_err(|_| self.err(format!("expected integer {what}, got `{tok}`")))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), LibraryError> {
        let tok = self.next(kw)?;
        if tok != kw {
            return Err(self.err(format!("expected `{kw}`, got `{tok}`")));
        }
        Ok(())
    }

    fn rect(&mut self) -> Result<Rect, LibraryError> {
        self.keyword("RECT")?;
        let x1 = self.int("x1")?;
        let y1 = self.int("y1")?;
        let x2 = self.int("x2")?;
        let y2 = self.int("y2")?;
        if x1 > x2 || y1 > y2 {
            return Err(self.err(format!("degenerate rect ({x1},{y1})-({x2},{y2})")));
        }
        Ok(Rect::new(x1, y1, x2, y2))
    }

    fn done(&mut self) -> Result<(), LibraryError> {
        match self.tokens.next() {
            None => Ok(()),
            Some(tok) => Err(self.err(format!("trailing token `{tok}`"))),
        }
    }
}

#[derive(Default)]
struct TechBuilder {
    dbu: Option<i64>,
    site: Option<Dbu>,
    row: Option<Dbu>,
    layers: Vec<LayerRule>,
}

struct CellBuilder {
    name: String,
    size: Option<(Dbu, u32)>,
    pins: Vec<Pin>,
    rails: [Option<Rect>; 2],
    obstructions: Vec<(usize, Rect)>,
}

fn parse_layer(p: &mut LineParser) -> Result<LayerRule, LibraryError> {
    let name = p.next("layer name")?.to_string();
    let kind = match p.next("layer kind")? {
        "metal" => LayerKind::Metal,
        "via" => LayerKind::Via,
        other => return Err(p.err(format!("layer kind must be `metal` or `via`, got `{other}`"))),
    };
    let mut direction = Direction::None;
    let mut pitch = None;
    let mut min_width = None;
    let mut min_spacing = None;
    let mut cut_spacing = None;
    let mut enclosure = None;
    let mut dp_spacing = None;
    if kind == LayerKind::Metal {
        direction = match p.next("direction (H or V)")? {
            "H" => Direction::Horizontal,
            "V" => Direction::Vertical,
            other => return Err(p.err(format!("metal direction must be H or V, got `{other}`"))),
        };
    }
    while let Some(tok) = p.tokens.next() {
        match tok {
            "PITCH" => pitch = Some(p.int("pitch")?),
            "WIDTH" => min_width = Some(p.int("width")?),
            "SPACING" => min_spacing = Some(p.int("spacing")?),
            "CUTSPACING" => cut_spacing = Some(p.int("cut spacing")?),
            "ENCLOSURE" => enclosure = Some(p.int("enclosure")?),
            "DPSPACING" => dp_spacing = Some(p.int("dp spacing")?),
            other => return Err(p.err(format!("unknown layer keyword `{other}`"))),
        }
    }
    let pitch = pitch.ok_or_else(|| p.err("layer is missing PITCH"))?;
    let min_width = min_width.ok_or_else(|| p.err("layer is missing WIDTH"))?;
    let min_spacing = min_spacing.ok_or_else(|| p.err("layer is missing SPACING"))?;
    Ok(LayerRule {
        name,
        kind,
        direction,
        pitch,
        min_width,
        min_spacing,
        same_net_cut_spacing: cut_spacing,
        min_enclosure: enclosure,
        dp_spacing,
    })
}

/// Parse a library file into the rule deck and the cell list, in
/// declaration order. Syntax errors carry the offending line number;
/// invariant failures name the cell.
pub fn parse_library(text: &str) -> Result<(TechRules, Vec<CellMaster>), LibraryError> {
    enum State {
        Top,
        Tech,
        Cell(CellBuilder),
    }

    let mut state = State::Top;
    let mut tech: Option<TechBuilder> = None;
    let mut tech_done = false;
    let mut cells: Vec<CellMaster> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut p = LineParser::new(line, raw);
        let head = p.next("keyword")?;
        match &mut state {
            State::Top => match head {
                "TECH" => {
                    p.done()?;
                    if tech_done {
                        return Err(p.err("duplicate TECH section"));
                    }
                    tech = Some(TechBuilder::default());
                    state = State::Tech;
                }
                "CELL" => {
                    if !tech_done {
                        return Err(p.err("CELL before TECH section"));
                    }
                    let name = p.next("cell name")?.to_string();
                    p.done()?;
                    if cells.iter().any(|c| c.name == name) {
                        return Err(LibraryError::Invariant {
                            cell: name,
                            msg: "duplicate cell name".into(),
                        });
                    }
                    state = State::Cell(CellBuilder {
                        name,
                        size: None,
                        pins: Vec::new(),
                        rails: [None, None],
                        obstructions: Vec::new(),
                    });
                }
                other => return Err(p.err(format!("unknown keyword `{other}`"))),
            },
            State::Tech => {
                let t = tech.as_mut().unwrap();
                match head {
                    "DBU" => {
                        t.dbu = Some(p.int("dbu per micron")?);
                        p.done()?;
                    }
                    "SITE" => {
                        t.site = Some(p.int("site width")?);
                        p.done()?;
                    }
                    "ROW" => {
                        t.row = Some(p.int("row height")?);
                        p.done()?;
                    }
                    "LAYER" => {
                        let layer = parse_layer(&mut p)?;
                        if t.layers.iter().any(|l| l.name == layer.name) {
                            return Err(p.err(format!("duplicate layer `{}`", layer.name)));
                        }
                        t.layers.push(layer);
                    }
                    "END" => {
                        p.done()?;
                        tech_done = true;
                        state = State::Top;
                    }
                    other => return Err(p.err(format!("unknown keyword `{other}` in TECH"))),
                }
            }
            State::Cell(cell) => match head {
                "SIZE" => {
                    let w = p.int("width")?;
                    let rows = p.int("row count")?;
                    p.done()?;
                    if rows < 1 {
                        return Err(p.err("row count must be at least 1"));
                    }
                    cell.size = Some((w, rows as u32));
                }
                "PIN" => {
                    let name = p.next("pin name")?.to_string();
                    let dir = match p.next("pin direction")? {
                        "IN" => PinDir::Input,
                        "OUT" => PinDir::Output,
                        "INOUT" => PinDir::Inout,
                        other => return Err(p.err(format!("pin direction must be IN, OUT or INOUT, got `{other}`"))),
                    };
                    let rect = p.rect()?;
                    p.done()?;
                    // Repeated PIN lines with the same name accumulate shapes.
                    if let Some(existing) = cell.pins.iter_mut().find(|pn| pn.name == name) {
                        if existing.direction != dir {
                            return Err(p.err(format!("pin {name} redeclared with a different direction")));
                        }
                        existing.shapes.push(rect);
                    } else {
                        cell.pins.push(Pin { name, direction: dir, shapes: vec![rect] });
                    }
                }
                "RAIL" => {
                    let which = match p.next("rail net")? {
                        "VDD" => 0,
                        "VSS" => 1,
                        other => return Err(p.err(format!("rail must be VDD or VSS, got `{other}`"))),
                    };
                    let rect = p.rect()?;
                    p.done()?;
                    if cell.rails[which].is_some() {
                        return Err(p.err("duplicate rail"));
                    }
                    cell.rails[which] = Some(rect);
                }
                "OBS" => {
                    let layer_name = p.next("layer name")?.to_string();
                    let rect = p.rect()?;
                    p.done()?;
                    let layers = &tech.as_ref().unwrap().layers;
                    let Some(layer) = layers.iter().position(|l| l.name == layer_name) else {
                        return Err(p.err(format!("unknown layer `{layer_name}`")));
                    };
                    cell.obstructions.push((layer, rect));
                }
                "END" => {
                    p.done()?;
                    let State::Cell(cell) = std::mem::replace(&mut state, State::Top) else {
                        unreachable!()
                    };
                    let Some((width, height_rows)) = cell.size else {
                        return Err(LibraryError::Invariant { cell: cell.name, msg: "missing SIZE".into() });
                    };
                    let (Some(vdd), Some(vss)) = (cell.rails[0], cell.rails[1]) else {
                        return Err(LibraryError::Invariant {
                            cell: cell.name,
                            msg: "missing VDD or VSS rail".into(),
                        });
                    };
                    cells.push(CellMaster {
                        name: cell.name,
                        width,
                        height_rows,
                        pins: cell.pins,
                        power_rails: [vdd, vss],
                        obstructions: cell.obstructions,
                    });
                }
                other => return Err(p.err(format!("unknown keyword `{other}` in CELL"))),
            },
        }
    }

    match state {
        State::Top => {}
        State::Tech => return Err(LibraryError::Tech("unterminated TECH section".into())),
        State::Cell(cell) => {
            return Err(LibraryError::Invariant { cell: cell.name, msg: "unterminated CELL section".into() })
        }
    }
    let Some(t) = tech else {
        return Err(LibraryError::Tech("missing TECH section".into()));
    };
    let rules = TechRules {
        dbu_per_micron: t.dbu.ok_or_else(|| LibraryError::Tech("missing DBU".into()))?,
        layers: t.layers,
        site_width: t.site.ok_or_else(|| LibraryError::Tech("missing SITE".into()))?,
        row_height: t.row.ok_or_else(|| LibraryError::Tech("missing ROW".into()))?,
        margin_scale: Scale::from_integer(1),
    };
    rules.validate()?;
    for cell in &cells {
        cell.validate(&rules)?;
    }
    Ok((rules, cells))
}

fn write_rect(out: &mut String, r: &Rect) {
    let _ = write!(out, "RECT {} {} {} {}", r.x1, r.y1, r.x2, r.y2);
}

/// Canonical text form. `parse_library(serialize_library(..))` is the
/// identity for any valid unscaled library.
pub fn serialize_library(rules: &TechRules, cells: &[CellMaster]) -> String {
    let mut out = String::new();
    out.push_str("TECH\n");
    let _ = writeln!(out, "  DBU {}", rules.dbu_per_micron);
    let _ = writeln!(out, "  SITE {}", rules.site_width);
    let _ = writeln!(out, "  ROW {}", rules.row_height);
    for layer in &rules.layers {
        let _ = write!(out, "  LAYER {} ", layer.name);
        match layer.kind {
            LayerKind::Metal => {
                let dir = match layer.direction {
                    Direction::Horizontal => "H",
                    Direction::Vertical => "V",
                    Direction::None => "H",
                };
                let _ = write!(out, "metal {dir} ");
            }
            LayerKind::Via => {
                let _ = write!(out, "via ");
            }
        }
        let _ = write!(
            out,
            "PITCH {} WIDTH {} SPACING {}",
            layer.pitch, layer.min_width, layer.min_spacing
        );
        if let Some(c) = layer.same_net_cut_spacing {
            let _ = write!(out, " CUTSPACING {c}");
        }
        if let Some(e) = layer.min_enclosure {
            let _ = write!(out, " ENCLOSURE {e}");
        }
        if let Some(d) = layer.dp_spacing {
            let _ = write!(out, " DPSPACING {d}");
        }
        out.push('\n');
    }
    out.push_str("END\n");
    for cell in cells {
        let _ = writeln!(out, "CELL {}", cell.name);
        let _ = writeln!(out, "  SIZE {} {}", cell.width, cell.height_rows);
        for pin in &cell.pins {
            let dir = match pin.direction {
                PinDir::Input => "IN",
                PinDir::Output => "OUT",
                PinDir::Inout => "INOUT",
            };
            for shape in &pin.shapes {
                let _ = write!(out, "  PIN {} {} ", pin.name, dir);
                write_rect(&mut out, shape);
                out.push('\n');
            }
        }
        for (layer, rect) in &cell.obstructions {
            let _ = write!(out, "  OBS {} ", rules.layers[*layer].name);
            write_rect(&mut out, rect);
            out.push('\n');
        }
        for (rail, net) in cell.power_rails.iter().zip(["VDD", "VSS"]) {
            let _ = write!(out, "  RAIL {net} ");
            write_rect(&mut out, rail);
            out.push('\n');
        }
        out.push_str("END\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const MINIMAL: &str = "\
TECH
  DBU 1000
  SITE 64
  ROW 576
  LAYER M1 metal H PITCH 64 WIDTH 32 SPACING 32
  LAYER V1 via PITCH 64 WIDTH 32 SPACING 32 CUTSPACING 32 ENCLOSURE 8
  LAYER M2 metal H PITCH 64 WIDTH 32 SPACING 32
  LAYER V2 via PITCH 64 WIDTH 32 SPACING 32 CUTSPACING 32 ENCLOSURE 8
  LAYER M3 metal V PITCH 64 WIDTH 32 SPACING 32
END
CELL TINY
  SIZE 256 1
  PIN A IN RECT 72 136 120 280
  RAIL VDD RECT 0 544 256 576
  RAIL VSS RECT 0 0 256 32
END
";

    #[test]
    fn minimal_single_cell() {
        let (rules, cells) = parse_library(MINIMAL).unwrap();
        assert_eq!(cells.len(), 1);
        let cell = &cells[0];
        assert_eq!(cell.name, "TINY");
        assert_eq!(cell.width, 4 * rules.site_width);
        assert_eq!(cell.height_rows, 1);
        assert_eq!(cell.pins.len(), 1);
        assert_eq!(rules.layers.len(), 5);
    }

    #[test]
    fn duplicate_cell_name_is_named() {
        let text = format!("{MINIMAL}CELL TINY\n  SIZE 256 1\n  PIN A IN RECT 72 136 120 280\n  RAIL VDD RECT 0 544 256 576\n  RAIL VSS RECT 0 0 256 32\nEND\n");
        let err = parse_library(&text).unwrap_err();
        match err {
            LibraryError::Invariant { cell, msg } => {
                assert_eq!(cell, "TINY");
                assert!(msg.contains("duplicate"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_keyword_reports_line() {
        let text = MINIMAL.replace("  SITE 64", "  STEP 64");
        let err = parse_library(&text).unwrap_err();
        match err {
            LibraryError::Syntax { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("STEP"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn pin_outside_outline_names_cell() {
        let text = MINIMAL.replace("PIN A IN RECT 72 136 120 280", "PIN A IN RECT 72 136 120 600");
        let err = parse_library(&text).unwrap_err();
        match err {
            LibraryError::Invariant { cell, .. } => assert_eq!(cell, "TINY"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn roundtrip_fixture_libraries() {
        for (rules, cells) in [
            fixtures::toy_clean_library(),
            fixtures::planted_defect_library(),
            fixtures::mixed_height_library(),
        ] {
            let text = serialize_library(&rules, &cells);
            let (rules2, cells2) = parse_library(&text).unwrap();
            assert_eq!(rules, rules2);
            assert_eq!(cells, cells2);
        }
    }

    #[test]
    fn repeated_pin_lines_accumulate_shapes() {
        let text = MINIMAL.replace(
            "  PIN A IN RECT 72 136 120 280",
            "  PIN A IN RECT 72 136 120 280\n  PIN A IN RECT 72 392 120 472",
        );
        let (_, cells) = parse_library(&text).unwrap();
        assert_eq!(cells[0].pins.len(), 1);
        assert_eq!(cells[0].pins[0].shapes.len(), 2);
    }
}
