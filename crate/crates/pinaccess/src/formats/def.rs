//! DEF 5.6 placement subset: VERSION/DESIGN/UNITS header, COMPONENTS with
//! `+ PLACED ( x y ) <orient>` records, DIEAREA, and an optional NETS
//! section.

use super::FormatError;
use crate::geom::{Dbu, Point, Rect};
use crate::techlib::LibraryProfile;
use crate::testgen::{Orientation, TestcellSpec};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefComponent {
    pub inst: String,
    pub master: String,
    pub x: Dbu,
    pub y: Dbu,
    pub orient: Orientation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefDocument {
    pub version: String,
    pub design_name: String,
    pub dbu: i64,
    pub components: Vec<DefComponent>,
    pub die_area: Rect,
}

impl DefDocument {
    pub fn from_spec(spec: &TestcellSpec) -> Self {
        DefDocument {
            version: "5.6".to_string(),
            design_name: spec.id.clone(),
            dbu: 1000,
            components: spec
                .instances
                .iter()
                .map(|p| DefComponent {
                    inst: p.inst_name.clone(),
                    master: p.master.clone(),
                    x: p.origin.x,
                    y: p.origin.y,
                    orient: p.orientation,
                })
                .collect(),
            die_area: spec.die_area,
        }
    }
}

/// Placement problems found by `validate_placement`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlacementIssue {
    EmptyDie,
    OutsideDie { inst: String },
    Overlap { a: String, b: String },
    UnknownMaster { inst: String, master: String },
}

impl std::fmt::Display for PlacementIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlacementIssue::EmptyDie => write!(f, "die area has no area"),
            PlacementIssue::OutsideDie { inst } => write!(f, "component {inst} lies outside the die"),
            PlacementIssue::Overlap { a, b } => write!(f, "components {a} and {b} overlap"),
            PlacementIssue::UnknownMaster { inst, master } => {
                write!(f, "component {inst} references unknown master {master}")
            }
        }
    }
}

impl DefDocument {
    /// Check die area, component containment and pairwise overlap against
    /// a library. Returns every issue found.
    pub fn validate_placement(&self, profile: &LibraryProfile) -> Vec<PlacementIssue> {
        let mut issues = Vec::new();
        if self.die_area.width() <= 0 || self.die_area.height() <= 0 {
            issues.push(PlacementIssue::EmptyDie);
        }
        let rules = &profile.rules;
        let mut boxes: Vec<Option<Rect>> = Vec::with_capacity(self.components.len());
        for c in &self.components {
            match profile.cell(&c.master) {
                None => {
                    issues.push(PlacementIssue::UnknownMaster { inst: c.inst.clone(), master: c.master.clone() });
                    boxes.push(None);
                }
                Some(m) => {
                    let b = Rect::new(c.x, c.y, c.x + m.width, c.y + m.height(rules));
                    if !self.die_area.contains_rect(&b) {
                        issues.push(PlacementIssue::OutsideDie { inst: c.inst.clone() });
                    }
                    boxes.push(Some(b));
                }
            }
        }
        for i in 0..self.components.len() {
            for j in i + 1..self.components.len() {
                if let (Some(a), Some(b)) = (&boxes[i], &boxes[j]) {
                    if a.overlaps(b) {
                        issues.push(PlacementIssue::Overlap {
                            a: self.components[i].inst.clone(),
                            b: self.components[j].inst.clone(),
                        });
                    }
                }
            }
        }
        issues
    }
}

fn emit_document(doc: &DefDocument, nets: Option<&TestcellSpec>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "VERSION {} ;", doc.version);
    let _ = writeln!(out, "DESIGN {} ;", doc.design_name);
    let _ = writeln!(out, "UNITS DISTANCE MICRONS {} ;", doc.dbu);
    let _ = writeln!(out, "COMPONENTS {} ;", doc.components.len());
    for c in &doc.components {
        let _ = writeln!(
            out,
            "- {} {} + PLACED ( {} {} ) {} ;",
            c.inst,
            c.master,
            c.x,
            c.y,
            c.orient.name()
        );
    }
    out.push_str("END COMPONENTS\n");
    if let Some(spec) = nets {
        let _ = writeln!(out, "NETS {} ;", spec.nets.len());
        for net in &spec.nets {
            let _ = write!(out, "- {}", net.name);
            for (inst, pin) in &net.terminals {
                let _ = write!(out, " ( {inst} {pin} )");
            }
            out.push_str(" ;\n");
        }
        out.push_str("END NETS\n");
    }
    let d = &doc.die_area;
    let _ = writeln!(out, "DIEAREA ( {} {} ) ( {} {} ) ;", d.x1, d.y1, d.x2, d.y2);
    out.push_str("END DESIGN\n");
    out
}

/// Placement-only DEF for a testcell.
pub fn emit_def(spec: &TestcellSpec) -> String {
    emit_document(&DefDocument::from_spec(spec), None)
}

/// DEF with the logical nets listed as well. The router reads
/// connectivity from the netlist, so this stays optional.
pub fn emit_def_with_nets(spec: &TestcellSpec) -> String {
    emit_document(&DefDocument::from_spec(spec), Some(spec))
}

struct Token<'a> {
    text: &'a str,
    line: usize,
}

/// Split into tokens, breaking `;`, `(` and `)` out of glued words so
/// sloppy inputs like `TOP;` still tokenize.
fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        for word in raw.split_whitespace() {
            let mut rest = word;
            while !rest.is_empty() {
                if let Some(pos) = rest.find([';', '(', ')']) {
                    if pos > 0 {
                        out.push(Token { text: &rest[..pos], line });
                    }
                    out.push(Token { text: &rest[pos..pos + 1], line });
                    rest = &rest[pos + 1..];
                } else {
                    out.push(Token { text: rest, line });
                    rest = "";
                }
            }
        }
    }
    out
}

struct DefParser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> DefParser<'a> {
    fn line(&self) -> usize {
        if self.pos < self.tokens.len() {
            self.tokens[self.pos].line
        } else {
            self.tokens.last().map(|t| t.line).unwrap_or(0)
        }
    }

    fn err(&self, msg: impl Into<String>) -> FormatError {
        FormatError::at(self.line(), msg)
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.text)
    }

    fn next(&mut self, what: &str) -> Result<&'a str, FormatError> {
        let tok = self.tokens.get(self.pos).ok_or_else(|| self.err(format!("expected {what}, found end of file")))?;
        self.pos += 1;
        Ok(tok.text)
    }

    fn expect(&mut self, kw: &str) -> Result<(), FormatError> {
        let tok = self.next(kw)?;
        if tok != kw {
            return Err(FormatError::at(self.tokens[self.pos - 1].line, format!("expected `{kw}`, got `{tok}`")));
        }
        Ok(())
    }

    fn int(&mut self, what: &str) -> Result<i64, FormatError> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| FormatError::at(self.tokens[self.pos - 1].line, format!("expected integer {what}, got `{tok}`")))
    }

    fn point(&mut self) -> Result<Point, FormatError> {
        self.expect("(")?;
        let x = self.int("x")?;
        let y = self.int("y")?;
        self.expect(")")?;
        Ok(Point::new(x, y))
    }
}

/// Parse a DEF placement file. Tolerates the section orderings seen in
/// the wild (DIEAREA before or after COMPONENTS, an optional TECHNOLOGY
/// line) and never panics on malformed input.
pub fn parse_def(text: &str) -> Result<DefDocument, FormatError> {
    let mut p = DefParser { tokens: tokenize(text), pos: 0 };

    p.expect("VERSION")?;
    let version = p.next("version")?.to_string();
    p.expect(";")?;
    p.expect("DESIGN")?;
    let design_name = p.next("design name")?.to_string();
    p.expect(";")?;

    let mut dbu = None;
    let mut components: Option<Vec<DefComponent>> = None;
    let mut die_area = None;
    let mut declared_count = None;

    loop {
        let tok = p.next("section keyword")?;
        match tok {
            "TECHNOLOGY" => {
                let _ = p.next("technology name")?;
                p.expect(";")?;
            }
            "UNITS" => {
                p.expect("DISTANCE")?;
                p.expect("MICRONS")?;
                dbu = Some(p.int("dbu")?);
                p.expect(";")?;
            }
            "DIEAREA" => {
                let a = p.point()?;
                let b = p.point()?;
                p.expect(";")?;
                die_area = Some(Rect::from_corners(a, b));
            }
            "COMPONENTS" => {
                declared_count = Some(p.int("component count")?);
                p.expect(";")?;
                let mut list = Vec::new();
                while p.peek() == Some("-") {
                    p.expect("-")?;
                    let inst = p.next("instance name")?.to_string();
                    let master = p.next("master name")?.to_string();
                    p.expect("+")?;
                    p.expect("PLACED")?;
                    let at = p.point()?;
                    let orient_tok = p.next("orientation")?;
                    let orient = Orientation::parse(orient_tok).ok_or_else(|| {
                        FormatError::at(p.tokens[p.pos - 1].line, format!("unknown orientation `{orient_tok}`"))
                    })?;
                    p.expect(";")?;
                    list.push(DefComponent { inst, master, x: at.x, y: at.y, orient });
                }
                p.expect("END")?;
                p.expect("COMPONENTS")?;
                components = Some(list);
            }
            "NETS" => {
                let _ = p.int("net count")?;
                p.expect(";")?;
                while p.peek() == Some("-") {
                    p.expect("-")?;
                    let _ = p.next("net name")?;
                    while p.peek() == Some("(") {
                        p.expect("(")?;
                        let _ = p.next("instance")?;
                        let _ = p.next("pin")?;
                        p.expect(")")?;
                    }
                    p.expect(";")?;
                }
                p.expect("END")?;
                p.expect("NETS")?;
            }
            "END" => {
                p.expect("DESIGN")?;
                break;
            }
            other => return Err(FormatError::at(p.tokens[p.pos - 1].line, format!("unknown keyword `{other}`"))),
        }
    }

    let components = components.ok_or_else(|| FormatError::Invalid("missing COMPONENTS section".into()))?;
    if let Some(n) = declared_count {
        if n != components.len() as i64 {
            return Err(FormatError::Invalid(format!(
                "COMPONENTS declares {n} entries but lists {}",
                components.len()
            )));
        }
    }
    Ok(DefDocument {
        version,
        design_name,
        dbu: dbu.ok_or_else(|| FormatError::Invalid("missing UNITS".into()))?,
        components,
        die_area: die_area.ok_or_else(|| FormatError::Invalid("missing DIEAREA".into()))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::techlib::profile_library;
    use crate::testgen::{enumerate_testcells, Method, Mode};

    fn sample_spec() -> (LibraryProfile, TestcellSpec) {
        let (rules, cells) = fixtures::toy_clean_library();
        let profile = profile_library(&rules, &cells).unwrap();
        let specs = enumerate_testcells(&profile, Method::Proposed, Mode::SingleCellOnly).unwrap();
        let spec = specs.into_iter().next().unwrap();
        (profile, spec)
    }

    #[test]
    fn units_is_header_line_three() {
        let (_, spec) = sample_spec();
        let text = emit_def(&spec);
        let line3 = text.lines().nth(2).unwrap();
        assert_eq!(line3, "UNITS DISTANCE MICRONS 1000 ;");
    }

    #[test]
    fn aa_row_placements_abut() {
        let (rules, cells) = fixtures::toy_clean_library();
        let profile = profile_library(&rules, &cells).unwrap();
        let specs = enumerate_testcells(&profile, Method::Proposed, Mode::SingleCellOnly).unwrap();
        let spec = &specs[0];
        let w = profile.cells[0].width;
        let text = emit_def(spec);
        let doc = parse_def(&text).unwrap();
        let placed: Vec<(Dbu, Dbu, Orientation)> = doc.components.iter().map(|c| (c.x, c.y, c.orient)).collect();
        assert_eq!(
            placed,
            vec![
                (0, 0, Orientation::N),
                (w, 0, Orientation::FN),
                (2 * w, 0, Orientation::FN),
                (3 * w, 0, Orientation::N),
            ]
        );
    }

    #[test]
    fn roundtrip_identity() {
        let (_, spec) = sample_spec();
        let doc = DefDocument::from_spec(&spec);
        let parsed = parse_def(&emit_def(&spec)).unwrap();
        assert_eq!(doc, parsed);
    }

    #[test]
    fn empty_components_is_valid() {
        let text = "VERSION 5.6 ;\nDESIGN empty ;\nUNITS DISTANCE MICRONS 1000 ;\nCOMPONENTS 0 ;\nEND COMPONENTS\nDIEAREA ( 0 0 ) ( 100 100 ) ;\nEND DESIGN\n";
        let doc = parse_def(text).unwrap();
        assert!(doc.components.is_empty());
    }

    #[test]
    fn glued_semicolons_and_extra_sections_parse() {
        // Header quirks seen in tool output: glued semicolon, TECHNOLOGY
        // line, DIEAREA after the components, duplicated coordinates and
        // a zero-height die. Parsing succeeds; validation then complains.
        let text = "\
VERSION 5.6 ;
DESIGN TOP;
TECHNOLOGY ROUTE ;
UNITS DISTANCE MICRONS 1000 ;
COMPONENTS 4;
- sinst_X_U1 C00 + PLACED ( 0 0 ) N ;
- sinst_X_U2 C00 + PLACED ( 200 0 ) FN ;
- sinst_X_U3 C00 + PLACED ( 400 0 ) FN ;
- sinst_X_U4 C00 + PLACED ( 400 0 ) N ;
END COMPONENTS
DIEAREA ( 0 0 ) ( 600 0 ) ;
END DESIGN
";
        let doc = parse_def(text).unwrap();
        assert_eq!(doc.design_name, "TOP");
        assert_eq!(doc.components.len(), 4);
        assert_eq!(doc.die_area.height(), 0);

        let (rules, cells) = fixtures::uniform_library(1);
        let profile = profile_library(&rules, &cells).unwrap();
        let issues = doc.validate_placement(&profile);
        assert!(issues.contains(&PlacementIssue::EmptyDie));
        assert!(issues
            .iter()
            .any(|i| matches!(i, PlacementIssue::Overlap { a, b } if a == "sinst_X_U3" && b == "sinst_X_U4")));
    }

    #[test]
    fn count_mismatch_is_an_error() {
        let text = "VERSION 5.6 ;\nDESIGN bad ;\nUNITS DISTANCE MICRONS 1000 ;\nCOMPONENTS 2 ;\n- U1 C00 + PLACED ( 0 0 ) N ;\nEND COMPONENTS\nDIEAREA ( 0 0 ) ( 100 100 ) ;\nEND DESIGN\n";
        assert!(parse_def(text).is_err());
    }

    #[test]
    fn nets_section_roundtrip() {
        use crate::testgen::{assign_connectivity, Connectivity};
        let (profile, spec) = sample_spec();
        let connected = assign_connectivity(&spec, &profile, Connectivity::Aligned, 0).unwrap();
        let text = emit_def_with_nets(&connected);
        let doc = parse_def(&text).unwrap();
        assert_eq!(doc, DefDocument::from_spec(&connected));
    }
}
