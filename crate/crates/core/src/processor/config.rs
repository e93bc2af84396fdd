//! Processor configuration: the declarative description of one FLYSIG
//! instance (operator inventory, routing tables, memory image, link
//! bubbles) and its text format.
//!
//! The text format mirrors the processor's three architectural blocks:
//!
//! ```text
//! proc <name> width=<W> mode=<prototype|target>
//! [OPERATORS]
//! <inst> <kind> [value=<int>] [amount=<int>]
//! [ROUTING]
//! <op_id> inst=<inst> src=<spec>,... dst=<spec>,...
//! [MEMORY]
//! <cell> token op=<op_id> valid=<bits> guard=<bits> operands=<ints>
//! <cell> empty op=<op_id>
//! [LINKS]
//! <from> <to> bubbles=<n>
//! ```
//!
//! Routing source specs are `IN[k]` (external input port), a bare cell
//! id (the operation homed in that cell), or `<inst>.out` (the unique
//! operation scheduled on `inst`). Destination specs are a bare cell id,
//! `OUT[k]`, or `remote:<proc>.<cell>` for processor networks. Link
//! endpoints are op ids, `IN[k]`, or `OUT[k]`; `bubbles` counts the
//! empty pipeline stages inserted on every edge between the two
//! endpoints.

use std::fmt::Write as _;

use thiserror::Error;

/// Word values are signed; the processor masks them to `width`-bit
/// two's complement.
pub type Word = i64;

/// Operation identifier (one scheduled dataflow node).
pub type OpId = u32;

/// Memory cell identifier.
pub type CellId = u32;

/// What an operator instance computes, word-level view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorFunction {
    /// `(a + b) mod 2^W`, bit-serial DIMS adder.
    Add,
    /// `(a - b) mod 2^W`: the adder with the subtrahend's rails swapped
    /// and the frame carry initialized to one.
    Sub,
    /// Word register (one-sample delay when it carries an initial
    /// token, plain pipeline buffer otherwise).
    Reg,
    /// `(x << amount) mod 2^W`, realized as initialized bit-delay
    /// stages in the serial stream.
    Shl { amount: u32 },
    /// Constant source, one word per consumption.
    Const { value: Word },
}

impl OperatorFunction {
    /// Operand slot count.
    pub fn arity(&self) -> usize {
        match self {
            OperatorFunction::Add | OperatorFunction::Sub => 2,
            OperatorFunction::Reg | OperatorFunction::Shl { .. } => 1,
            OperatorFunction::Const { .. } => 0,
        }
    }

    /// True for the arithmetic kinds counted as "operations" in
    /// structure reports (registers are counted separately).
    pub fn is_arithmetic(&self) -> bool {
        matches!(
            self,
            OperatorFunction::Add | OperatorFunction::Sub | OperatorFunction::Shl { .. }
        )
    }

    pub fn kind_token(&self) -> &'static str {
        match self {
            OperatorFunction::Add => "add",
            OperatorFunction::Sub => "sub",
            OperatorFunction::Reg => "reg",
            OperatorFunction::Shl { .. } => "shl",
            OperatorFunction::Const { .. } => "const",
        }
    }
}

/// One entry of the operator inventory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorDecl {
    pub name: String,
    pub func: OperatorFunction,
}

/// Where an operand comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    /// External input port `IN[k]`.
    External(usize),
    /// The operation homed in this memory cell.
    Cell(CellId),
    /// The unique operation scheduled on this operator instance.
    InstOut(String),
}

/// Where a result goes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Destination {
    /// A memory cell of this processor.
    Cell(CellId),
    /// External output port `OUT[k]`.
    External(usize),
    /// A memory cell of another processor in a network.
    Remote { proc: String, cell: CellId },
}

/// One scheduled operation (routing-table row).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    pub id: OpId,
    pub inst: String,
    pub sources: Vec<Source>,
    pub dests: Vec<Destination>,
}

/// Initial token contents for a memory cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenInit {
    pub valid: Vec<bool>,
    pub guard: Vec<bool>,
    pub operands: Vec<Word>,
}

/// One memory cell declaration: its home operation and optional
/// initial token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryDecl {
    pub cell: CellId,
    pub op: Option<OpId>,
    pub token: Option<TokenInit>,
}

/// Endpoint of an inter-operator link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    In(usize),
    Out(usize),
    Op(OpId),
}

/// Bubble annotation for every edge between two endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkDecl {
    pub from: Endpoint,
    pub to: Endpoint,
    pub bubbles: u32,
}

/// Prototype configs may carry spare operators; target configs are the
/// pruned, hardwired derivative and must not.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Prototype,
    Target,
}

impl Mode {
    pub fn token(self) -> &'static str {
        match self {
            Mode::Prototype => "prototype",
            Mode::Target => "target",
        }
    }
}

/// A complete processor configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessorConfig {
    pub name: String,
    pub width: usize,
    pub mode: Mode,
    pub operators: Vec<OperatorDecl>,
    pub routing: Vec<Operation>,
    pub memory: Vec<MemoryDecl>,
    pub links: Vec<LinkDecl>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `proc <name> width=<W>` header")]
    MissingHeader,
}

fn syntax(line: usize, msg: impl Into<String>) -> ConfigParseError {
    ConfigParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_int<T: std::str::FromStr>(line: usize, text: &str, what: &str) -> Result<T, ConfigParseError> {
    text.parse::<T>()
        .map_err(|_| syntax(line, format!("invalid {what} '{text}'")))
}

/// Parse `key=value` out of a token, checking the key.
fn keyed<'a>(line: usize, tok: &'a str, key: &str) -> Result<&'a str, ConfigParseError> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| syntax(line, format!("expected `{key}=<value>`, got '{tok}'")))
}

fn parse_port(text: &str, prefix: &str) -> Option<usize> {
    text.strip_prefix(prefix)
        .and_then(|r| r.strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .and_then(|k| k.parse().ok())
}

fn parse_source(line: usize, tok: &str) -> Result<Source, ConfigParseError> {
    if let Some(k) = parse_port(tok, "IN") {
        return Ok(Source::External(k));
    }
    if let Some(inst) = tok.strip_suffix(".out") {
        return Ok(Source::InstOut(inst.to_string()));
    }
    Ok(Source::Cell(parse_int(line, tok, "source cell id")?))
}

fn parse_dest(line: usize, tok: &str) -> Result<Destination, ConfigParseError> {
    if let Some(k) = parse_port(tok, "OUT") {
        return Ok(Destination::External(k));
    }
    if let Some(rest) = tok.strip_prefix("remote:") {
        let (proc, cell) = rest
            .split_once('.')
            .ok_or_else(|| syntax(line, format!("expected `remote:<proc>.<cell>`, got '{tok}'")))?;
        return Ok(Destination::Remote {
            proc: proc.to_string(),
            cell: parse_int(line, cell, "remote cell id")?,
        });
    }
    Ok(Destination::Cell(parse_int(line, tok, "destination cell id")?))
}

fn parse_endpoint(line: usize, tok: &str) -> Result<Endpoint, ConfigParseError> {
    if let Some(k) = parse_port(tok, "IN") {
        return Ok(Endpoint::In(k));
    }
    if let Some(k) = parse_port(tok, "OUT") {
        return Ok(Endpoint::Out(k));
    }
    Ok(Endpoint::Op(parse_int(line, tok, "link endpoint op id")?))
}

fn parse_bits(line: usize, text: &str) -> Result<Vec<bool>, ConfigParseError> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(syntax(line, format!("invalid bit vector '{text}'"))),
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Operators,
    Routing,
    Memory,
    Links,
}

impl ProcessorConfig {
    /// Parse the text format. Purely syntactic; semantic checks live in
    /// [`validate`](super::validate::validate).
    pub fn parse(text: &str) -> Result<ProcessorConfig, ConfigParseError> {
        let mut header: Option<(String, usize, Mode)> = None;
        let mut section = Section::None;
        let mut operators = Vec::new();
        let mut routing = Vec::new();
        let mut memory = Vec::new();
        let mut links = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            match stripped {
                "[OPERATORS]" => {
                    section = Section::Operators;
                    continue;
                }
                "[ROUTING]" => {
                    section = Section::Routing;
                    continue;
                }
                "[MEMORY]" => {
                    section = Section::Memory;
                    continue;
                }
                "[LINKS]" => {
                    section = Section::Links;
                    continue;
                }
                _ => {}
            }
            let toks: Vec<&str> = stripped.split_whitespace().collect();
            if let Some(rest) = stripped.strip_prefix("proc ") {
                if header.is_some() {
                    return Err(syntax(line, "duplicate `proc` header"));
                }
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.is_empty() {
                    return Err(syntax(line, "expected `proc <name> width=<W> [mode=<m>]`"));
                }
                let name = toks[0].to_string();
                let mut width = None;
                let mut mode = Mode::Prototype;
                for tok in &toks[1..] {
                    if let Some(v) = tok.strip_prefix("width=") {
                        width = Some(parse_int(line, v, "width")?);
                    } else if let Some(v) = tok.strip_prefix("mode=") {
                        mode = match v {
                            "prototype" => Mode::Prototype,
                            "target" => Mode::Target,
                            _ => return Err(syntax(line, format!("unknown mode '{v}'"))),
                        };
                    } else {
                        return Err(syntax(line, format!("unknown header field '{tok}'")));
                    }
                }
                let width = width.ok_or_else(|| syntax(line, "header is missing `width=`"))?;
                header = Some((name, width, mode));
                continue;
            }

            match section {
                Section::None => {
                    return Err(syntax(line, "content before any section header"));
                }
                Section::Operators => {
                    if toks.len() < 2 {
                        return Err(syntax(line, "expected `<inst> <kind> [params]`"));
                    }
                    let func = match toks[1] {
                        "add" => OperatorFunction::Add,
                        "sub" => OperatorFunction::Sub,
                        "reg" => OperatorFunction::Reg,
                        "shl" => {
                            let amt = keyed(line, toks.get(2).copied().unwrap_or(""), "amount")?;
                            OperatorFunction::Shl {
                                amount: parse_int(line, amt, "shift amount")?,
                            }
                        }
                        "const" => {
                            let v = keyed(line, toks.get(2).copied().unwrap_or(""), "value")?;
                            OperatorFunction::Const {
                                value: parse_int(line, v, "constant value")?,
                            }
                        }
                        other => {
                            return Err(syntax(line, format!("unknown operator kind '{other}'")))
                        }
                    };
                    operators.push(OperatorDecl {
                        name: toks[0].to_string(),
                        func,
                    });
                }
                Section::Routing => {
                    if toks.len() < 3 {
                        return Err(syntax(line, "expected `<op_id> inst=<i> src=... dst=...`"));
                    }
                    let id = parse_int(line, toks[0], "op id")?;
                    let inst = keyed(line, toks[1], "inst")?.to_string();
                    let mut sources = Vec::new();
                    let mut dests = Vec::new();
                    for tok in &toks[2..] {
                        if let Some(list) = tok.strip_prefix("src=") {
                            for s in list.split(',').filter(|s| !s.is_empty()) {
                                sources.push(parse_source(line, s)?);
                            }
                        } else if let Some(list) = tok.strip_prefix("dst=") {
                            for d in list.split(',').filter(|s| !s.is_empty()) {
                                dests.push(parse_dest(line, d)?);
                            }
                        } else {
                            return Err(syntax(line, format!("unknown routing field '{tok}'")));
                        }
                    }
                    routing.push(Operation {
                        id,
                        inst,
                        sources,
                        dests,
                    });
                }
                Section::Memory => {
                    if toks.len() < 2 {
                        return Err(syntax(line, "expected `<cell> token ...` or `<cell> empty`"));
                    }
                    let cell = parse_int(line, toks[0], "cell id")?;
                    match toks[1] {
                        "empty" => {
                            let op = match toks.get(2) {
                                Some(t) => Some(parse_int(line, keyed(line, t, "op")?, "op id")?),
                                None => None,
                            };
                            memory.push(MemoryDecl {
                                cell,
                                op,
                                token: None,
                            });
                        }
                        "token" => {
                            let mut op = None;
                            let mut valid = None;
                            let mut guard = None;
                            let mut operands = None;
                            for tok in &toks[2..] {
                                if let Some(v) = tok.strip_prefix("op=") {
                                    op = Some(parse_int(line, v, "op id")?);
                                } else if let Some(v) = tok.strip_prefix("valid=") {
                                    valid = Some(parse_bits(line, v)?);
                                } else if let Some(v) = tok.strip_prefix("guard=") {
                                    guard = Some(parse_bits(line, v)?);
                                } else if let Some(v) = tok.strip_prefix("operands=") {
                                    let words: Result<Vec<Word>, _> = v
                                        .split(',')
                                        .filter(|s| !s.is_empty())
                                        .map(|s| parse_int(line, s, "operand"))
                                        .collect();
                                    operands = Some(words?);
                                } else {
                                    return Err(syntax(line, format!("unknown token field '{tok}'")));
                                }
                            }
                            let op =
                                op.ok_or_else(|| syntax(line, "token line is missing `op=`"))?;
                            memory.push(MemoryDecl {
                                cell,
                                op: Some(op),
                                token: Some(TokenInit {
                                    valid: valid
                                        .ok_or_else(|| syntax(line, "token line is missing `valid=`"))?,
                                    guard: guard
                                        .ok_or_else(|| syntax(line, "token line is missing `guard=`"))?,
                                    operands: operands.unwrap_or_default(),
                                }),
                            });
                        }
                        other => {
                            return Err(syntax(line, format!("expected token|empty, got '{other}'")))
                        }
                    }
                }
                Section::Links => {
                    if toks.len() != 3 {
                        return Err(syntax(line, "expected `<from> <to> bubbles=<n>`"));
                    }
                    links.push(LinkDecl {
                        from: parse_endpoint(line, toks[0])?,
                        to: parse_endpoint(line, toks[1])?,
                        bubbles: parse_int(line, keyed(line, toks[2], "bubbles")?, "bubble count")?,
                    });
                }
            }
        }

        let (name, width, mode) = header.ok_or(ConfigParseError::MissingHeader)?;
        Ok(ProcessorConfig {
            name,
            width,
            mode,
            operators,
            routing,
            memory,
            links,
        })
    }

    /// Render the text form. `parse(emit(c)) == c` for validated
    /// configs; emission order is deterministic (declaration order).
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "proc {} width={} mode={}",
            self.name,
            self.width,
            self.mode.token()
        );
        let _ = writeln!(s, "[OPERATORS]");
        for op in &self.operators {
            match &op.func {
                OperatorFunction::Shl { amount } => {
                    let _ = writeln!(s, "{} shl amount={amount}", op.name);
                }
                OperatorFunction::Const { value } => {
                    let _ = writeln!(s, "{} const value={value}", op.name);
                }
                f => {
                    let _ = writeln!(s, "{} {}", op.name, f.kind_token());
                }
            }
        }
        let _ = writeln!(s, "[ROUTING]");
        for op in &self.routing {
            let srcs: Vec<String> = op
                .sources
                .iter()
                .map(|src| match src {
                    Source::External(k) => format!("IN[{k}]"),
                    Source::Cell(c) => c.to_string(),
                    Source::InstOut(inst) => format!("{inst}.out"),
                })
                .collect();
            let dsts: Vec<String> = op
                .dests
                .iter()
                .map(|d| match d {
                    Destination::Cell(c) => c.to_string(),
                    Destination::External(k) => format!("OUT[{k}]"),
                    Destination::Remote { proc, cell } => format!("remote:{proc}.{cell}"),
                })
                .collect();
            let _ = write!(s, "{} inst={}", op.id, op.inst);
            if srcs.is_empty() {
                let _ = write!(s, " src=");
            } else {
                let _ = write!(s, " src={}", srcs.join(","));
            }
            let _ = writeln!(s, " dst={}", dsts.join(","));
        }
        let _ = writeln!(s, "[MEMORY]");
        for m in &self.memory {
            match (&m.token, m.op) {
                (Some(t), Some(op)) => {
                    let valid: String = t.valid.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    let guard: String = t.guard.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    let operands: Vec<String> = t.operands.iter().map(|w| w.to_string()).collect();
                    let _ = write!(s, "{} token op={op} valid={valid} guard={guard}", m.cell);
                    if operands.is_empty() {
                        let _ = writeln!(s);
                    } else {
                        let _ = writeln!(s, " operands={}", operands.join(","));
                    }
                }
                (None, Some(op)) => {
                    let _ = writeln!(s, "{} empty op={op}", m.cell);
                }
                (None, None) => {
                    let _ = writeln!(s, "{} empty", m.cell);
                }
                (Some(_), None) => unreachable!("parser always binds tokens to ops"),
            }
        }
        let _ = writeln!(s, "[LINKS]");
        let endpoint = |e: &Endpoint| match e {
            Endpoint::In(k) => format!("IN[{k}]"),
            Endpoint::Out(k) => format!("OUT[{k}]"),
            Endpoint::Op(id) => id.to_string(),
        };
        for l in &self.links {
            let _ = writeln!(
                s,
                "{} {} bubbles={}",
                endpoint(&l.from),
                endpoint(&l.to),
                l.bubbles
            );
        }
        s
    }
}
