//! OpenQASM 2.0 subset: parsing into [`Circuit`] and emission back to text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use epr_core::{Circuit, Gate, GateKind, Provenance};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("composite gate not emittable (gate {0}); lower remote CXs first")]
    Composite(usize),
    #[error(transparent)]
    Circuit(#[from] epr_core::CircuitError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 14] = ["->", "==", ";", ",", "[", "]", "(", ")", "{", "}", "+", "-", "*", "/"];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| ParseError { line, column, message };
    while i < chars.len() {
        let ch = chars[i];
        let (start_line, start_col) = (line, col);
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: start_line, column: start_col });
        if ch.is_ascii_alphabetic() || ch == '_' {
            let s: String = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').collect();
            i += s.len();
            col += s.len();
            push(&mut out, Tok::Ident(s));
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    j = k;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
            }
            let s: String = chars[i..j].iter().collect();
            let tok = if s.chars().all(|c| c.is_ascii_digit()) {
                Tok::Int(s.parse().map_err(|_| err(line, col, format!("integer `{s}` out of range")))?)
            } else {
                Tok::Real(s.parse().map_err(|_| err(line, col, format!("malformed number `{s}`")))?)
            };
            col += j - i;
            i = j;
            push(&mut out, tok);
        } else if ch == '"' {
            let s: String = chars[i + 1..].iter().take_while(|c| **c != '"' && **c != '\n').collect();
            if chars.get(i + 1 + s.len()) != Some(&'"') {
                return Err(err(line, col, "unterminated string".into()));
            }
            i += s.len() + 2;
            col += s.len() + 2;
            push(&mut out, Tok::Str(s));
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let sym = SYMBOLS
                .iter()
                .find(|s| rest.starts_with(**s))
                .ok_or_else(|| err(line, col, format!("unexpected character `{ch}`")))?;
            i += sym.len();
            col += sym.len();
            push(&mut out, Tok::Sym(sym));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Register {
    offset: usize,
    size: usize,
}

/// An operand: one bit, or a whole register to broadcast over.
#[derive(Debug, Clone, Copy)]
enum Operand {
    Bit(usize),
    Register(Register),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    qregs: BTreeMap<String, Register>,
    cregs: BTreeMap<String, Register>,
    circuit: Circuit,
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or(self.tokens.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let t = self.tokens.get(pos).or(self.tokens.last());
        let (line, column) = t.map_or((1, 1), |t| (t.line, t.column));
        ParseError { line, column, message: message.into() }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, message: message.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self.tokens.get(self.pos).ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(t.tok.clone())
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{sym}`")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            _ => Err(self.error_at(self.pos - 1, "expected identifier")),
        }
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        match self.next()? {
            Tok::Int(n) => Ok(n as usize),
            _ => Err(self.error_at(self.pos - 1, "expected integer")),
        }
    }

    fn header(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "OPENQASM" => self.pos += 1,
            _ => return Err(self.error("expected `OPENQASM 2.0;` header")),
        }
        let at = self.pos;
        let version = match self.next()? {
            Tok::Real(v) => v,
            Tok::Int(v) => v as f64,
            _ => return Err(self.error_at(at, "expected version number")),
        };
        if version != 2.0 {
            return Err(self.error_at(at, format!("unsupported OpenQASM version {version}")));
        }
        self.expect(";")
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.term()?;
        loop {
            if self.eat("+") {
                v += self.term()?;
            } else if self.eat("-") {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut v = self.unary()?;
        loop {
            if self.eat("*") {
                v *= self.unary()?;
            } else if self.eat("/") {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, ParseError> {
        if self.eat("-") {
            return Ok(-self.unary()?);
        }
        if self.eat("+") {
            return self.unary();
        }
        let at = self.pos;
        match self.next()? {
            Tok::Int(n) => Ok(n as f64),
            Tok::Real(x) => Ok(x),
            Tok::Ident(s) if s == "pi" => Ok(std::f64::consts::PI),
            Tok::Sym("(") => {
                let v = self.expr()?;
                self.expect(")")?;
                Ok(v)
            }
            _ => Err(self.error_at(at, "malformed expression")),
        }
    }

    fn operand(&mut self, quantum: bool) -> Result<Operand, ParseError> {
        let at = self.pos;
        let name = self.ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let reg = *regs.get(&name).ok_or_else(|| {
            self.error_at(at, format!("undeclared {} register `{name}`", if quantum { "quantum" } else { "classical" }))
        })?;
        if self.eat("[") {
            let at = self.pos;
            let index = self.int()?;
            self.expect("]")?;
            if index >= reg.size {
                return Err(self.error_at(at, format!("index {index} out of range for `{name}[{}]`", reg.size)));
            }
            Ok(Operand::Bit(reg.offset + index))
        } else {
            Ok(Operand::Register(reg))
        }
    }

    fn operands(&mut self) -> Result<Vec<Operand>, ParseError> {
        let mut args = vec![self.operand(true)?];
        while self.eat(",") {
            args.push(self.operand(true)?);
        }
        Ok(args)
    }

    /// Expands register operands into one bit list per application.
    fn broadcast(&self, at: usize, args: &[Operand]) -> Result<Vec<Vec<usize>>, ParseError> {
        let sizes: BTreeSet<usize> = args
            .iter()
            .filter_map(|a| match a {
                Operand::Register(r) => Some(r.size),
                Operand::Bit(_) => None,
            })
            .collect();
        if sizes.len() > 1 {
            return Err(self.error_at(at, "register operands differ in size"));
        }
        let reps = sizes.into_iter().next().unwrap_or(1);
        Ok((0..reps)
            .map(|i| {
                args.iter()
                    .map(|a| match *a {
                        Operand::Bit(b) => b,
                        Operand::Register(r) => r.offset + i,
                    })
                    .collect()
            })
            .collect())
    }

    fn push(&mut self, at: usize, gate: Gate) -> Result<(), ParseError> {
        if let Some(dup) = gate.qubits.iter().enumerate().find(|(i, q)| gate.qubits[..*i].contains(q)) {
            return Err(self.error_at(at, format!("qubit {} used twice in one gate", dup.1)));
        }
        self.circuit.push(gate);
        Ok(())
    }

    fn gate_kind(&self, at: usize, name: &str, params: &[f64]) -> Result<GateKind, ParseError> {
        let p = |n: usize| -> Result<(), ParseError> {
            if params.len() == n {
                Ok(())
            } else {
                Err(self.error_at(at, format!("`{name}` takes {n} parameters, found {}", params.len())))
            }
        };
        let kind = match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "cx" | "CX" => GateKind::Cx,
            "rx" | "ry" | "rz" | "u1" => {
                p(1)?;
                match name {
                    "rx" => GateKind::Rx(params[0]),
                    "ry" => GateKind::Ry(params[0]),
                    "rz" => GateKind::Rz(params[0]),
                    _ => GateKind::U1(params[0]),
                }
            }
            "u2" => {
                p(2)?;
                GateKind::U2(params[0], params[1])
            }
            "u3" | "U" => {
                p(3)?;
                GateKind::U3(params[0], params[1], params[2])
            }
            _ => return Err(self.error_at(at, format!("unsupported gate `{name}`"))),
        };
        if !matches!(name, "rx" | "ry" | "rz" | "u1" | "u2" | "u3" | "U") {
            p(0)?;
        }
        Ok(kind)
    }

    fn declaration(&mut self, quantum: bool) -> Result<(), ParseError> {
        let at = self.pos;
        let name = self.ident()?;
        self.expect("[")?;
        let size = self.int()?;
        self.expect("]")?;
        self.expect(";")?;
        if size == 0 {
            return Err(self.error_at(at, format!("register `{name}` has size 0")));
        }
        if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
            return Err(self.error_at(at, format!("register `{name}` declared twice")));
        }
        if quantum {
            self.qregs.insert(name, Register { offset: self.circuit.n_qubits, size });
            self.circuit.n_qubits += size;
        } else {
            self.cregs.insert(name, Register { offset: self.circuit.n_clbits, size });
            self.circuit.n_clbits += size;
        }
        Ok(())
    }

    /// One operation, optionally under a classical condition.
    fn operation(&mut self, condition: Option<(usize, bool)>) -> Result<(), ParseError> {
        let at = self.pos;
        let name = self.ident()?;
        let with_cond = |g: Gate| match condition {
            Some((c, v)) => g.with_condition(c, v),
            None => g,
        };
        match name.as_str() {
            "measure" => {
                let q = self.operand(true)?;
                self.expect("->")?;
                let c = self.operand(false)?;
                self.expect(";")?;
                let pairs: Vec<(usize, usize)> = match (q, c) {
                    (Operand::Bit(q), Operand::Bit(c)) => vec![(q, c)],
                    (Operand::Register(r), Operand::Register(s)) if r.size == s.size => {
                        (0..r.size).map(|i| (r.offset + i, s.offset + i)).collect()
                    }
                    _ => return Err(self.error_at(at, "measure operands differ in size")),
                };
                for (q, c) in pairs {
                    self.push(at, with_cond(Gate::measure(q, c)))?;
                }
            }
            "reset" => {
                let args = self.operands()?;
                self.expect(";")?;
                if args.len() != 1 {
                    return Err(self.error_at(at, "`reset` takes one operand"));
                }
                for bits in self.broadcast(at, &args)? {
                    self.push(at, with_cond(Gate::single(GateKind::Reset, bits[0])))?;
                }
            }
            "barrier" => {
                if condition.is_some() {
                    return Err(self.error_at(at, "conditional barrier"));
                }
                let args = self.operands()?;
                self.expect(";")?;
                let mut qubits = Vec::new();
                for a in args {
                    match a {
                        Operand::Bit(b) => qubits.push(b),
                        Operand::Register(r) => qubits.extend(r.offset..r.offset + r.size),
                    }
                }
                self.push(at, Gate::barrier(qubits))?;
            }
            "gate" | "opaque" => return Err(self.error_at(at, format!("`{name}` definitions are not supported"))),
            "if" => return Err(self.error_at(at, "nested `if`")),
            _ => {
                let mut params = Vec::new();
                if self.eat("(") && !self.eat(")") {
                    params.push(self.expr()?);
                    while self.eat(",") {
                        params.push(self.expr()?);
                    }
                    self.expect(")")?;
                }
                let kind = self.gate_kind(at, &name, &params)?;
                let args = self.operands()?;
                self.expect(";")?;
                let arity = kind.arity().expect("fixed arity");
                if args.len() != arity {
                    return Err(self.error_at(
                        at,
                        format!("`{name}` expects {arity} operands, found {}", args.len()),
                    ));
                }
                for bits in self.broadcast(at, &args)? {
                    self.push(at, with_cond(Gate::new(kind, bits)))?;
                }
            }
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let at = self.pos;
        match self.peek() {
            Some(Tok::Ident(s)) if s == "include" => {
                self.pos += 1;
                match self.next()? {
                    Tok::Str(f) if f == "qelib1.inc" => self.expect(";"),
                    Tok::Str(f) => Err(self.error_at(at + 1, format!("cannot include `{f}`"))),
                    _ => Err(self.error_at(at + 1, "expected file name")),
                }
            }
            Some(Tok::Ident(s)) if s == "qreg" || s == "creg" => {
                let quantum = s == "qreg";
                self.pos += 1;
                self.declaration(quantum)
            }
            Some(Tok::Ident(s)) if s == "if" => {
                self.pos += 1;
                self.expect("(")?;
                let reg_at = self.pos;
                let name = self.ident()?;
                let reg = *self
                    .cregs
                    .get(&name)
                    .ok_or_else(|| self.error_at(reg_at, format!("undeclared classical register `{name}`")))?;
                if reg.size != 1 {
                    return Err(self.error_at(reg_at, format!("condition on `{name}` needs a 1-bit register")));
                }
                self.expect("==")?;
                let value_at = self.pos;
                let value = match self.int()? {
                    0 => false,
                    1 => true,
                    v => return Err(self.error_at(value_at, format!("condition value {v} is not 0 or 1"))),
                };
                self.expect(")")?;
                self.operation(Some((reg.offset, value)))
            }
            Some(Tok::Ident(_)) => self.operation(None),
            Some(_) => Err(self.error("expected statement")),
            None => Ok(()),
        }
    }
}

/// Parses OpenQASM 2.0 text. Registers are flattened in declaration order.
pub fn parse_qasm(text: &str) -> Result<Circuit, ParseError> {
    parse_qasm_named(text, "circuit")
}

pub fn parse_qasm_named(text: &str, name: &str) -> Result<Circuit, ParseError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
        qregs: BTreeMap::new(),
        cregs: BTreeMap::new(),
        circuit: Circuit::new(name, 0, 0),
    };
    p.header()?;
    while p.pos < p.tokens.len() {
        p.statement()?;
    }
    Ok(p.circuit)
}

fn fmt_angle(x: f64) -> String {
    format!("{x:.16e}")
}

/// Names the classical bits. Remote-block measurements get `rcx<k>_a` and
/// `rcx<k>_b`; other bits share `meas` when they are contiguous and never
/// conditioned on, and get `meas_<i>` each otherwise.
fn creg_names(circuit: &Circuit) -> Vec<(String, usize, usize)> {
    let mut block_bit: BTreeMap<usize, String> = BTreeMap::new();
    for g in &circuit.gates {
        if let (GateKind::Measure, Some(Provenance::RemoteBlock { block, epr_pair })) = (g.kind, g.provenance) {
            let side = if g.qubits[0] == epr_pair.0 { "a" } else { "b" };
            block_bit.entry(g.clbits[0]).or_insert_with(|| format!("rcx{block}_{side}"));
        }
    }
    let conditioned: BTreeSet<usize> = circuit.gates.iter().filter_map(|g| g.condition.map(|c| c.clbit)).collect();
    let user: Vec<usize> = (0..circuit.n_clbits).filter(|c| !block_bit.contains_key(c)).collect();
    let contiguous = user.windows(2).all(|w| w[1] == w[0] + 1);
    let shared = !user.is_empty() && contiguous && user.iter().all(|c| !conditioned.contains(c));

    let mut regs = Vec::new();
    let mut c = 0;
    while c < circuit.n_clbits {
        if let Some(name) = block_bit.get(&c) {
            regs.push((name.clone(), c, 1));
            c += 1;
        } else if shared {
            regs.push(("meas".to_string(), c, user.len()));
            c += user.len();
        } else {
            regs.push((format!("meas_{c}"), c, 1));
            c += 1;
        }
    }
    regs
}

/// Emits OpenQASM 2.0 with a single `q` register. `header` lines are
/// written as `//` comments after the version line.
pub fn emit_qasm(circuit: &Circuit, header: &[String]) -> Result<String, EmitError> {
    circuit.validate()?;
    if let Some(pos) = circuit.gates.iter().position(|g| g.kind == GateKind::RemoteCx) {
        return Err(EmitError::Composite(pos));
    }
    let regs = creg_names(circuit);
    let mut bit_name = vec![String::new(); circuit.n_clbits];
    for (name, offset, size) in &regs {
        for i in 0..*size {
            bit_name[offset + i] = if *size == 1 { name.clone() } else { format!("{name}[{i}]") };
        }
    }
    let mut out = String::from("OPENQASM 2.0;\n");
    for line in header {
        for l in line.lines() {
            let _ = writeln!(out, "// {l}");
        }
    }
    out.push_str("include \"qelib1.inc\";\n");
    if circuit.n_qubits > 0 {
        let _ = writeln!(out, "qreg q[{}];", circuit.n_qubits);
    }
    for (name, _, size) in &regs {
        let _ = writeln!(out, "creg {name}[{size}];");
    }
    for g in &circuit.gates {
        if let Some(cond) = g.condition {
            let reg = regs.iter().find(|(_, o, s)| cond.clbit >= *o && cond.clbit < o + s).expect("named");
            // Conditions on shared registers never happen: conditioned bits get their own.
            let _ = write!(out, "if({}=={}) ", reg.0, u8::from(cond.value));
        }
        let qubits: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
        match g.kind {
            GateKind::Measure => {
                let c = &bit_name[g.clbits[0]];
                let c = if c.contains('[') { c.clone() } else { format!("{c}[0]") };
                let _ = writeln!(out, "measure {} -> {c};", qubits[0]);
            }
            kind => {
                let params = kind.params();
                let _ = if params.is_empty() {
                    writeln!(out, "{} {};", kind.name(), qubits.join(","))
                } else {
                    let ps: Vec<String> = params.into_iter().map(fmt_angle).collect();
                    writeln!(out, "{}({}) {};", kind.name(), ps.join(","), qubits.join(","))
                };
            }
        }
    }
    Ok(out)
}

/// Structural equality: registers, gate kinds, operands, conditions and
/// parameters. Names, metadata and compiler tags are ignored.
pub fn structurally_equal(a: &Circuit, b: &Circuit) -> bool {
    a.n_qubits == b.n_qubits
        && a.n_clbits == b.n_clbits
        && a.gates.len() == b.gates.len()
        && a.gates.iter().zip(&b.gates).all(|(x, y)| {
            x.kind == y.kind && x.qubits == y.qubits && x.clbits == y.clbits && x.condition == y.condition
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use epr_core::lower::remote_cx_block;

    fn parse(body: &str) -> Result<Circuit, ParseError> {
        parse_qasm(&format!("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n{body}"))
    }

    #[test]
    fn single_cx() {
        let c = parse("qreg q[2]; cx q[0],q[1];").unwrap();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.gates, vec![Gate::cx(0, 1)]);
    }

    #[test]
    fn conditional_correction() {
        let c = parse("qreg q[1]; creg c[1]; h q[0]; measure q[0]->c[0]; if(c==1) x q[0];").unwrap();
        assert_eq!(
            c.gates,
            vec![
                Gate::single(GateKind::H, 0),
                Gate::measure(0, 0),
                Gate::single(GateKind::X, 0).with_condition(0, true),
            ]
        );
    }

    #[test]
    fn registers_flatten_in_order() {
        let c = parse("qreg a[2]; qreg b[3]; creg m[2]; creg n[1]; cx a[1],b[2]; measure b[0] -> n[0];").unwrap();
        assert_eq!((c.n_qubits, c.n_clbits), (5, 3));
        assert_eq!(c.gates, vec![Gate::cx(1, 4), Gate::measure(2, 2)]);
    }

    #[test]
    fn broadcast_and_expressions() {
        let c = parse("qreg q[3]; creg c[3]; h q; rz(-pi/4 + 2*pi) q[1]; u3(pi/2, 0, -(pi)) q[0]; measure q -> c;")
            .unwrap();
        assert_eq!(c.gates.len(), 8);
        assert_eq!(c.gates[3].kind, GateKind::Rz(-std::f64::consts::PI / 4.0 + 2.0 * std::f64::consts::PI));
        assert_eq!(c.gates[4].kind, GateKind::U3(std::f64::consts::FRAC_PI_2, 0.0, -std::f64::consts::PI));
        assert_eq!(c.gates[7], Gate::measure(2, 2));
    }

    #[test]
    fn errors_carry_locations() {
        let e = parse("qreg q[2];\nccx q[0],q[1],q[0];").unwrap_err();
        assert_eq!((e.line, e.column), (4, 1));
        assert!(e.message.contains("unsupported gate"));

        let e = parse("qreg q[2];\ncx q[0];").unwrap_err();
        assert!(e.message.contains("expects 2 operands"), "{e}");
        let e = parse("cx r[0],r[1];").unwrap_err();
        assert!(e.message.contains("undeclared"), "{e}");
        let e = parse("qreg q[1]; rz(pi*) q[0];").unwrap_err();
        assert!(e.message.contains("malformed expression"), "{e}");
        let e = parse_qasm("OPENQASM 3.0; qreg q[1];").unwrap_err();
        assert!(e.message.contains("version"), "{e}");
        let e = parse("qreg q[1]; creg c[2]; if(c==1) x q[0];").unwrap_err();
        assert!(e.message.contains("1-bit"), "{e}");
        let e = parse("gate foo a { x a; }").unwrap_err();
        assert!(e.message.contains("not supported"), "{e}");
        let e = parse("qreg q[2]; x q[2];").unwrap_err();
        assert!(e.message.contains("out of range"), "{e}");
        let e = parse("qreg q[2]; cx q[1],q[1];").unwrap_err();
        assert!(e.message.contains("twice"), "{e}");
    }

    #[test]
    fn emit_single_cx() {
        let mut c = Circuit::new("c", 2, 0);
        c.push(Gate::cx(0, 1));
        let text = emit_qasm(&c, &[]).unwrap();
        assert_eq!(text.matches("cx q[0],q[1];").count(), 1);
        assert_eq!(text, emit_qasm(&c, &[]).unwrap());
    }

    #[test]
    fn emit_remote_block() {
        let mut c = Circuit::new("b", 25, 2);
        c.gates = remote_cx_block(0, 2, 22, (1, 21), (0, 1), false);
        let text = emit_qasm(&c, &[]).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with("creg") && !l.starts_with("qreg")).collect();
        let count = |p: &str| body.iter().filter(|l| l.starts_with(p)).count();
        assert_eq!((count("cx "), count("h "), count("measure ")), (2, 1, 2));
        assert_eq!((count("if(rcx0_a==1) x "), count("if(rcx0_b==1) z ")), (1, 1));
        assert!(text.contains("creg rcx0_a[1];\ncreg rcx0_b[1];"));
        let back = parse_qasm(&text).unwrap();
        assert!(structurally_equal(&back, &c));
    }

    #[test]
    fn composite_is_not_emittable() {
        let mut c = Circuit::new("c", 2, 0);
        c.push(Gate::remote_cx(0, 1));
        assert_eq!(emit_qasm(&c, &[]), Err(EmitError::Composite(0)));
    }

    #[test]
    fn angles_round_trip_exactly() {
        let mut c = Circuit::new("a", 1, 0);
        for x in [std::f64::consts::PI / 3.0, -1e-300, 0.1, 123456.789e10, f64::MIN_POSITIVE] {
            c.push(Gate::single(GateKind::Rz(x), 0));
        }
        let back = parse_qasm(&emit_qasm(&c, &["seed: 1".into()]).unwrap()).unwrap();
        assert_eq!(back.gates, c.gates);
    }

    #[test]
    fn conditioned_user_bits_get_own_registers() {
        let c = parse("qreg q[2]; creg c[2]; creg f[1]; measure q[0] -> f[0]; if(f==0) x q[1]; measure q -> c;")
            .unwrap();
        let text = emit_qasm(&c, &[]).unwrap();
        assert!(text.contains("creg meas_2[1];"), "{text}");
        let back = parse_qasm(&text).unwrap();
        assert!(structurally_equal(&back, &c));
    }
}
