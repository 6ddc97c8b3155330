//! Structural Verilog subset: one portless module per testcell, wire
//! declarations, and named-association instantiations.

use super::FormatError;
use crate::techlib::LibraryProfile;
use crate::testgen::TestcellSpec;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerilogInstance {
    pub master: String,
    pub inst_name: String,
    /// Pin-to-net bindings in declaration order; `None` is an explicit
    /// unconnected port.
    pub connections: Vec<(String, Option<String>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerilogModule {
    pub name: String,
    pub wires: Vec<String>,
    pub instances: Vec<VerilogInstance>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerilogNetlist {
    pub modules: Vec<VerilogModule>,
}

/// Emit one module for a connected testcell. Instances appear in
/// placement order with full named port lists; nets flagged unconnected
/// render as empty port bindings.
pub fn emit_verilog(spec: &TestcellSpec, profile: &LibraryProfile) -> Result<String, FormatError> {
    if spec.nets.is_empty() {
        return Err(FormatError::Invalid(format!("testcell {} has no nets assigned", spec.id)));
    }
    // pin -> net name, skipping nets marked unconnected
    let mut binding: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for net in &spec.nets {
        if net.unconnected {
            continue;
        }
        for (inst, pin) in &net.terminals {
            binding.insert((inst, pin), &net.name);
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "module {} ();", spec.id);
    out.push('\n');
    for net in &spec.nets {
        if !net.unconnected {
            let _ = writeln!(out, "  wire {};", net.name);
        }
    }
    out.push('\n');
    for inst in &spec.instances {
        let master = profile
            .cell(&inst.master)
            .ok_or_else(|| FormatError::Invalid(format!("unknown master {}", inst.master)))?;
        let _ = write!(out, "  {} {} (", inst.master, inst.inst_name);
        for (k, pin) in master.pins.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            match binding.get(&(inst.inst_name.as_str(), pin.name.as_str())) {
                Some(net) => {
                    let _ = write!(out, " .{}({})", pin.name, net);
                }
                None => {
                    let _ = write!(out, " .{}()", pin.name);
                }
            }
        }
        out.push_str(" );\n");
    }
    out.push_str("endmodule\n");
    Ok(out)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

struct Lexer<'a> {
    tokens: Vec<(usize, String)>,
    pos: usize,
    _text: std::marker::PhantomData<&'a str>,
}

fn lex(text: &str) -> Result<Vec<(usize, String)>, FormatError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = match raw.find("//") {
            Some(cut) => &raw[..cut],
            None => raw,
        };
        let mut cur = String::new();
        for ch in code.chars() {
            if ch.is_ascii_alphanumeric() || ch == '_' || ch == '$' {
                cur.push(ch);
            } else {
                if !cur.is_empty() {
                    out.push((line, std::mem::take(&mut cur)));
                }
                match ch {
                    '(' | ')' | ';' | ',' | '.' => out.push((line, ch.to_string())),
                    c if c.is_whitespace() => {}
                    other => return Err(FormatError::at(line, format!("unexpected character `{other}`"))),
                }
            }
        }
        if !cur.is_empty() {
            out.push((line, cur));
        }
    }
    Ok(out)
}

impl<'a> Lexer<'a> {
    fn line(&self) -> usize {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|t| t.0)
            .unwrap_or(0)
    }

    fn err(&self, msg: impl Into<String>) -> FormatError {
        FormatError::at(self.line(), msg)
    }

    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(|t| t.1.as_str())
    }

    fn next(&mut self, what: &str) -> Result<String, FormatError> {
        let tok = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| self.err(format!("expected {what}, found end of file")))?;
        self.pos += 1;
        Ok(tok.1.clone())
    }

    fn expect(&mut self, kw: &str) -> Result<(), FormatError> {
        let tok = self.next(kw)?;
        if tok != kw {
            return Err(FormatError::at(self.tokens[self.pos - 1].0, format!("expected `{kw}`, got `{tok}`")));
        }
        Ok(())
    }

    fn ident(&mut self, what: &str) -> Result<String, FormatError> {
        let tok = self.next(what)?;
        if !is_ident(&tok) {
            return Err(FormatError::at(self.tokens[self.pos - 1].0, format!("expected {what}, got `{tok}`")));
        }
        Ok(tok)
    }
}

/// Parse the structural subset emitted by `emit_verilog`. Nets must be
/// declared before use; anything outside the subset is rejected with a
/// line number.
pub fn parse_verilog(text: &str) -> Result<VerilogNetlist, FormatError> {
    let mut lx = Lexer { tokens: lex(text)?, pos: 0, _text: std::marker::PhantomData };
    let mut modules = Vec::new();

    while lx.peek().is_some() {
        lx.expect("module")?;
        let name = lx.ident("module name")?;
        lx.expect("(")?;
        lx.expect(")")?;
        lx.expect(";")?;

        let mut wires: Vec<String> = Vec::new();
        let mut instances = Vec::new();
        loop {
            match lx.peek() {
                Some("endmodule") => {
                    lx.expect("endmodule")?;
                    break;
                }
                Some("wire") => {
                    lx.expect("wire")?;
                    let w = lx.ident("wire name")?;
                    if wires.contains(&w) {
                        return Err(lx.err(format!("duplicate wire `{w}`")));
                    }
                    lx.expect(";")?;
                    wires.push(w);
                }
                Some(_) => {
                    let master = lx.ident("master name")?;
                    let inst_name = lx.ident("instance name")?;
                    lx.expect("(")?;
                    let mut connections = Vec::new();
                    if lx.peek() != Some(")") {
                        loop {
                            lx.expect(".")?;
                            let pin = lx.ident("pin name")?;
                            lx.expect("(")?;
                            let net = if lx.peek() == Some(")") {
                                None
                            } else {
                                let n = lx.ident("net name")?;
                                if !wires.contains(&n) {
                                    return Err(lx.err(format!("reference to undeclared net `{n}`")));
                                }
                                Some(n)
                            };
                            lx.expect(")")?;
                            connections.push((pin, net));
                            if lx.peek() == Some(",") {
                                lx.expect(",")?;
                            } else {
                                break;
                            }
                        }
                    }
                    lx.expect(")")?;
                    lx.expect(";")?;
                    instances.push(VerilogInstance { master, inst_name, connections });
                }
                None => return Err(lx.err("unterminated module")),
            }
        }
        modules.push(VerilogModule { name, wires, instances });
    }
    Ok(VerilogNetlist { modules })
}

/// Netlist view of a connected testcell, for round-trip comparison.
pub fn netlist_view(spec: &TestcellSpec, profile: &LibraryProfile) -> Result<VerilogNetlist, FormatError> {
    let text = emit_verilog(spec, profile)?;
    parse_verilog(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::techlib::profile_library;
    use crate::testgen::{assign_connectivity, enumerate_testcells, Connectivity, Method, Mode};

    fn connected_specs() -> (LibraryProfile, Vec<TestcellSpec>) {
        let (rules, cells) = fixtures::toy_clean_library();
        let profile = profile_library(&rules, &cells).unwrap();
        let specs = enumerate_testcells(&profile, Method::Proposed, Mode::CellByCellOnly)
            .unwrap()
            .into_iter()
            .map(|s| assign_connectivity(&s, &profile, Connectivity::Aligned, 0).unwrap())
            .collect();
        (profile, specs)
    }

    #[test]
    fn aa_row_module_shape() {
        let (profile, specs) = connected_specs();
        let spec = &specs[0];
        let text = emit_verilog(spec, &profile).unwrap();
        assert!(text.starts_with(&format!("module {} ();\n", spec.id)));
        let parsed = parse_verilog(&text).unwrap();
        assert_eq!(parsed.modules.len(), 1);
        let m = &parsed.modules[0];
        assert_eq!(m.instances.len(), 4);
        let names: Vec<_> = m.instances.iter().map(|i| i.inst_name.as_str()).collect();
        assert_eq!(names, vec!["U1", "U2", "U3", "U4"]);
    }

    #[test]
    fn ab_row_instance_sequence_alternates() {
        let (profile, specs) = connected_specs();
        let ab = specs.iter().find(|s| s.id == "scell_INV_NAND").unwrap();
        let text = emit_verilog(ab, &profile).unwrap();
        let parsed = parse_verilog(&text).unwrap();
        let masters: Vec<_> = parsed.modules[0].instances.iter().map(|i| i.master.as_str()).collect();
        assert_eq!(masters, vec!["NAND", "INV", "NAND", "INV", "NAND"]);
    }

    #[test]
    fn emit_parse_roundtrip_all_toy_testcells() {
        let (profile, specs) = connected_specs();
        for spec in &specs {
            let text = emit_verilog(spec, &profile).unwrap();
            let parsed = parse_verilog(&text).unwrap();
            let again = parse_verilog(&emit_verilog(spec, &profile).unwrap()).unwrap();
            assert_eq!(parsed, again);
            // connectivity is reconstructed exactly
            let m = &parsed.modules[0];
            for (pi, inst) in spec.instances.iter().enumerate() {
                assert_eq!(m.instances[pi].inst_name, inst.inst_name);
                assert_eq!(m.instances[pi].master, inst.master);
                for (pin, net) in &m.instances[pi].connections {
                    let expected = spec.nets.iter().find(|n| {
                        !n.unconnected && n.terminals.iter().any(|(i, p)| i == &inst.inst_name && p == pin)
                    });
                    assert_eq!(net.as_deref(), expected.map(|n| n.name.as_str()));
                }
            }
        }
    }

    #[test]
    fn dangling_net_reference_names_the_net() {
        let text = "module m ();\n  wire a;\n  INV U1 ( .A(a), .Y(ghost) );\nendmodule\n";
        let err = parse_verilog(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("ghost"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn unknown_construct_is_rejected() {
        let text = "module m ();\n  assign x = 1;\nendmodule\n";
        assert!(parse_verilog(text).is_err());
    }
}
