//! Line-oriented parser for the `.dfg` format.
//!
//! ```text
//! dfg <name> width=<W>
//! in <id>
//! const <id> = <int>
//! op <id> = add <src> <src>
//! op <id> = sub <src> <src>
//! op <id> = mulc <src> <int>
//! op <id> = shl <src> <int>
//! reg <id> = <src> [init=<int>]
//! out <id> = <src>
//! ```
//!
//! `#` starts a comment.  Names may be referenced before their defining
//! line (feedback edges require it), so parsing is two-pass: declare
//! every node, then resolve operands.  A cycle that passes through no
//! `reg` is rejected — such a loop has no hardware reading: nothing ever
//! breaks the wait-for-operands deadlock.

use std::collections::HashMap;

use super::ast::{Dfg, Node, NodeKind};
use super::DfgError;
use crate::dualrail::wrap;

/// Parse a `.dfg` source text.
pub fn parse_dfg(text: &str) -> Result<Dfg, DfgError> {
    let syntax = |line: usize, msg: &str| DfgError::Syntax {
        line,
        msg: msg.to_string(),
    };

    // Declarations in source order: (line, name, kind, operand names).
    let mut header: Option<(String, usize)> = None;
    let mut decls: Vec<(usize, String, NodeKind, Vec<String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = code.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }

        if header.is_none() {
            let [kw, name, width_kv] = tokens[..] else {
                return Err(syntax(line, "expected `dfg <name> width=<W>`"));
            };
            if kw != "dfg" {
                return Err(syntax(line, "expected `dfg <name> width=<W>`"));
            }
            check_ident(name, line)?;
            let w = width_kv
                .strip_prefix("width=")
                .and_then(|v| v.parse::<usize>().ok())
                .ok_or_else(|| syntax(line, "expected `width=<W>`"))?;
            if !(1..=32).contains(&w) {
                return Err(syntax(line, "width must be between 1 and 32"));
            }
            header = Some((name.to_string(), w));
            continue;
        }
        let width = header.as_ref().unwrap().1;

        let (name, kind, operands): (&str, NodeKind, Vec<String>) = match tokens[..] {
            ["in", name] => (name, NodeKind::Input, vec![]),
            ["const", name, "=", lit] => {
                let v = parse_int(lit, line)?;
                check_fits(v, width, line)?;
                (name, NodeKind::Const(v), vec![])
            }
            ["op", name, "=", "add", a, b] => (name, NodeKind::Add, vec![a.into(), b.into()]),
            ["op", name, "=", "sub", a, b] => (name, NodeKind::Sub, vec![a.into(), b.into()]),
            ["op", name, "=", "mulc", a, lit] => {
                let c = parse_int(lit, line)?;
                (name, NodeKind::MulConst(c), vec![a.into()])
            }
            ["op", name, "=", "shl", a, lit] => {
                let k = lit
                    .parse::<u32>()
                    .map_err(|_| syntax(line, "shift amount must be a non-negative integer"))?;
                if k as usize >= width {
                    return Err(syntax(line, "shift amount must be below the word width"));
                }
                (name, NodeKind::Shl(k), vec![a.into()])
            }
            ["reg", name, "=", src] => (name, NodeKind::Delay { init: None }, vec![src.into()]),
            ["reg", name, "=", src, init_kv] => {
                let v = init_kv
                    .strip_prefix("init=")
                    .ok_or_else(|| syntax(line, "expected `init=<int>`"))
                    .and_then(|lit| parse_int(lit, line))?;
                check_fits(v, width, line)?;
                (name, NodeKind::Delay { init: Some(v) }, vec![src.into()])
            }
            ["out", name, "=", src] => (name, NodeKind::Output, vec![src.into()]),
            _ => return Err(syntax(line, "unrecognized declaration")),
        };
        check_ident(name, line)?;
        decls.push((line, name.to_string(), kind, operands));
    }

    let Some((name, width)) = header else {
        return Err(syntax(1, "missing `dfg <name> width=<W>` header"));
    };

    // Pass 2: allocate ids, then resolve operand names.
    let mut by_name: HashMap<&str, usize> = HashMap::new();
    for (line, node_name, _, _) in &decls {
        if by_name.insert(node_name.as_str(), by_name.len()).is_some() {
            return Err(DfgError::Syntax {
                line: *line,
                msg: format!("duplicate node `{node_name}`"),
            });
        }
    }

    let mut dfg = Dfg {
        name,
        width,
        nodes: Vec::with_capacity(decls.len()),
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    for (line, node_name, kind, operands) in &decls {
        let mut preds = Vec::with_capacity(operands.len());
        for op_name in operands {
            let &id = by_name
                .get(op_name.as_str())
                .ok_or_else(|| DfgError::UnknownNodeRef {
                    line: *line,
                    name: op_name.clone(),
                })?;
            preds.push(id);
        }
        match kind {
            NodeKind::Input => dfg.inputs.push(dfg.nodes.len()),
            NodeKind::Output => dfg.outputs.push(dfg.nodes.len()),
            _ => {}
        }
        dfg.nodes.push(Node {
            name: node_name.clone(),
            kind: kind.clone(),
            preds,
        });
    }

    check_combinational(&dfg)?;
    Ok(dfg)
}

fn check_ident(name: &str, line: usize) -> Result<(), DfgError> {
    let mut chars = name.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    if head_ok && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(())
    } else {
        Err(DfgError::Syntax {
            line,
            msg: format!("invalid identifier `{name}`"),
        })
    }
}

fn parse_int(lit: &str, line: usize) -> Result<i64, DfgError> {
    lit.parse::<i64>().map_err(|_| DfgError::Syntax {
        line,
        msg: format!("invalid integer `{lit}`"),
    })
}

fn check_fits(v: i64, width: usize, line: usize) -> Result<(), DfgError> {
    if wrap(v, width) == v {
        Ok(())
    } else {
        Err(DfgError::Syntax {
            line,
            msg: format!("constant {v} does not fit {width}-bit two's complement"),
        })
    }
}

/// Reject cycles that pass through no register.  Registers are the only
/// nodes that break the operand-wait chain, so a register-free cycle can
/// never fire.  Depth-first search over the graph with register nodes
/// deleted; any back edge is such a cycle.
fn check_combinational(dfg: &Dfg) -> Result<(), DfgError> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let n = dfg.nodes.len();
    let succs = dfg.consumers();
    let is_reg = |id: usize| matches!(dfg.nodes[id].kind, NodeKind::Delay { .. });

    let mut color = vec![WHITE; n];
    for root in 0..n {
        if color[root] != WHITE || is_reg(root) {
            continue;
        }
        // Iterative DFS: (node, next successor index).
        let mut stack = vec![(root, 0usize)];
        color[root] = GRAY;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            let next = succs[v].get(*i).map(|&(c, _)| c);
            *i += 1;
            match next {
                None => {
                    color[v] = BLACK;
                    stack.pop();
                }
                Some(c) if is_reg(c) || color[c] == BLACK => {}
                Some(c) if color[c] == GRAY => {
                    return Err(DfgError::CombinationalLoop {
                        through: dfg.nodes[c].name.clone(),
                    });
                }
                Some(c) => {
                    color[c] = GRAY;
                    stack.push((c, 0));
                }
            }
        }
    }
    Ok(())
}
