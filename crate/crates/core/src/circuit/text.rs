//! Line-based circuit text format.
//!
//! ```text
//! # comment
//! circuit <name> n=<ninputs>
//! gate <id> = <KIND>[params] <operand>...
//! outputs <id>...
//! ```
//!
//! Operands are `x<i>`, a gate id, or the constants `0`/`1`. Parameterized
//! kinds: `MOD[m=3]`, `THR[k=2]`, `GK[k=1 default=1 table=hex:a8]`,
//! `SYM[table=hex:c0]`. Table bits are in canonical ball order (SYM: count
//! order), packed most-significant-bit first.

use std::collections::HashMap;

use super::{Circuit, GateKind, Operand};
use crate::error::{Error, Result};

fn pack_hex(bits: &[bool]) -> String {
    let mut out = String::with_capacity(bits.len().div_ceil(8) * 2);
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            if b {
                byte |= 1 << (7 - i);
            }
        }
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn unpack_hex(hex: &str, nbits: usize, line: usize) -> Result<Vec<bool>> {
    let parse_err = |msg: String| Error::Parse { line, col: 1, msg };
    if hex.len() % 2 != 0 {
        return Err(parse_err("hex string has odd length".into()));
    }
    let mut bytes = Vec::with_capacity(hex.len() / 2);
    for i in (0..hex.len()).step_by(2) {
        let b = u8::from_str_radix(&hex[i..i + 2], 16)
            .map_err(|_| parse_err(format!("bad hex byte '{}'", &hex[i..i + 2])))?;
        bytes.push(b);
    }
    if bytes.len() != nbits.div_ceil(8) {
        return Err(parse_err(format!(
            "table has {} bytes, expected {} for {} bits",
            bytes.len(),
            nbits.div_ceil(8),
            nbits
        )));
    }
    let mut bits = Vec::with_capacity(nbits);
    for i in 0..nbits {
        bits.push(bytes[i / 8] >> (7 - i % 8) & 1 == 1);
    }
    // Padding bits must be zero for bit-exact round trips.
    for i in nbits..bytes.len() * 8 {
        if bytes[i / 8] >> (7 - i % 8) & 1 == 1 {
            return Err(parse_err("nonzero padding bit in table".into()));
        }
    }
    Ok(bits)
}

pub fn serialize_circuit(c: &Circuit, name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("circuit {name} n={}\n", c.ninputs()));
    for (i, node) in c.nodes().iter().enumerate() {
        let kind = match &node.kind {
            GateKind::And => "AND".to_string(),
            GateKind::Or => "OR".to_string(),
            GateKind::Not => "NOT".to_string(),
            GateKind::Maj => "MAJ".to_string(),
            GateKind::Mod { m } => format!("MOD[m={m}]"),
            GateKind::Thr { k } => format!("THR[k={k}]"),
            GateKind::Gk {
                k,
                default,
                ball_table,
            } => format!(
                "GK[k={k} default={} table=hex:{}]",
                *default as u8,
                pack_hex(ball_table)
            ),
            GateKind::Sym { table } => format!("SYM[table=hex:{}]", pack_hex(table)),
        };
        let ops: Vec<String> = node
            .inputs
            .iter()
            .map(|op| match op {
                Operand::Input(v) => format!("x{v}"),
                Operand::Gate(g) => format!("g{g}"),
                Operand::Const(b) => format!("{}", *b as u8),
            })
            .collect();
        out.push_str(&format!("gate g{i} = {kind} {}\n", ops.join(" ")));
    }
    let outs: Vec<String> = c.outputs().iter().map(|o| format!("g{o}")).collect();
    out.push_str(&format!("outputs {}\n", outs.join(" ")));
    out
}

pub fn parse_circuit(text: &str) -> Result<(Circuit, String)> {
    let mut circuit: Option<Circuit> = None;
    let mut name = String::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut outputs_seen = false;

    for (lineno0, raw) in text.lines().enumerate() {
        let lineno = lineno0 + 1;
        let err = |col: usize, msg: String| Error::Parse {
            line: lineno,
            col,
            msg,
        };
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap();
        match head {
            "circuit" => {
                if circuit.is_some() {
                    return Err(err(1, "duplicate circuit header".into()));
                }
                let nm = tokens
                    .next()
                    .ok_or_else(|| err(1, "missing circuit name".into()))?;
                let nspec = tokens
                    .next()
                    .ok_or_else(|| err(1, "missing n=<inputs>".into()))?;
                let n: u32 = nspec
                    .strip_prefix("n=")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(1, format!("bad input count '{nspec}'")))?;
                name = nm.to_string();
                circuit = Some(Circuit::new(n));
            }
            "gate" => {
                let c = circuit
                    .as_mut()
                    .ok_or_else(|| err(1, "gate before circuit header".into()))?;
                if outputs_seen {
                    return Err(err(1, "gate after outputs line".into()));
                }
                let id = tokens
                    .next()
                    .ok_or_else(|| err(1, "missing gate id".into()))?;
                let eq = tokens.next();
                if eq != Some("=") {
                    return Err(err(1, "expected '=' after gate id".into()));
                }
                // Re-join the remainder so bracketed params may contain spaces.
                let rest_start = line.find('=').unwrap() + 1;
                let rest = line[rest_start..].trim();
                let (kind_text, ops_text) = split_kind(rest, lineno)?;
                let kind = parse_kind(&kind_text, lineno)?;
                let mut ops = Vec::new();
                for tok in ops_text.split_whitespace() {
                    ops.push(parse_operand(tok, &ids, lineno)?);
                }
                let kind = finalize_kind(kind, ops.len(), lineno)?;
                let idx = c.push_gate(kind, ops).map_err(|e| err(1, e.to_string()))?;
                if ids.insert(id.to_string(), idx).is_some() {
                    return Err(err(1, format!("duplicate gate id '{id}'")));
                }
            }
            "outputs" => {
                let c = circuit
                    .as_mut()
                    .ok_or_else(|| err(1, "outputs before circuit header".into()))?;
                let mut outs = Vec::new();
                for tok in tokens {
                    let &g = ids
                        .get(tok)
                        .ok_or_else(|| err(1, format!("unknown output gate '{tok}'")))?;
                    outs.push(g);
                }
                c.set_outputs(outs).map_err(|e| err(1, e.to_string()))?;
                outputs_seen = true;
            }
            other => return Err(err(1, format!("unknown directive '{other}'"))),
        }
    }
    let circuit = circuit.ok_or(Error::Parse {
        line: 1,
        col: 1,
        msg: "missing circuit header".into(),
    })?;
    if !outputs_seen {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "missing outputs line".into(),
        });
    }
    Ok((circuit, name))
}

/// Split `KIND[...params...] op op op` into the kind text and the operands.
fn split_kind(rest: &str, line: usize) -> Result<(String, String)> {
    if let Some(open) = rest.find('[') {
        let head_ok = rest[..open].chars().all(|ch| ch.is_ascii_alphanumeric());
        if head_ok {
            let close = rest.find(']').ok_or(Error::Parse {
                line,
                col: open + 1,
                msg: "missing ']' in gate parameters".into(),
            })?;
            return Ok((rest[..close + 1].to_string(), rest[close + 1..].to_string()));
        }
    }
    match rest.split_once(char::is_whitespace) {
        Some((k, ops)) => Ok((k.to_string(), ops.to_string())),
        None => Ok((rest.to_string(), String::new())),
    }
}

/// Parsed kind, with tables deferred until the fan-in is known.
enum PendingKind {
    Ready(GateKind),
    Gk { k: u32, default: bool, hex: String },
    Sym { hex: String },
}

fn parse_kind(text: &str, line: usize) -> Result<PendingKind> {
    let err = |msg: String| Error::Parse { line, col: 1, msg };
    let (base, params) = match text.find('[') {
        Some(p) => {
            let close = text.rfind(']').ok_or_else(|| err("missing ']'".into()))?;
            (&text[..p], &text[p + 1..close])
        }
        None => (text, ""),
    };
    let mut kv = HashMap::new();
    for part in params.split_whitespace() {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| err(format!("bad parameter '{part}'")))?;
        kv.insert(k, v);
    }
    let get = |key: &str| -> Result<&str> {
        kv.get(key)
            .copied()
            .ok_or_else(|| err(format!("{base} needs parameter '{key}'")))
    };
    match base {
        "AND" => Ok(PendingKind::Ready(GateKind::And)),
        "OR" => Ok(PendingKind::Ready(GateKind::Or)),
        "NOT" => Ok(PendingKind::Ready(GateKind::Not)),
        "MAJ" => Ok(PendingKind::Ready(GateKind::Maj)),
        "MOD" => {
            let m: u32 = get("m")?
                .parse()
                .map_err(|_| err("bad MOD modulus".into()))?;
            Ok(PendingKind::Ready(GateKind::Mod { m }))
        }
        "THR" => {
            let k: u32 = get("k")?
                .parse()
                .map_err(|_| err("bad THR threshold".into()))?;
            Ok(PendingKind::Ready(GateKind::Thr { k }))
        }
        "GK" => {
            let k: u32 = get("k")?.parse().map_err(|_| err("bad GK radius".into()))?;
            let default = match get("default")? {
                "0" => false,
                "1" => true,
                other => return Err(err(format!("bad GK default '{other}'"))),
            };
            let table = get("table")?;
            let hex = table
                .strip_prefix("hex:")
                .ok_or_else(|| err("GK table must be hex:<hexstring>".into()))?;
            Ok(PendingKind::Gk {
                k,
                default,
                hex: hex.to_string(),
            })
        }
        "SYM" => {
            let table = get("table")?;
            let hex = table
                .strip_prefix("hex:")
                .ok_or_else(|| err("SYM table must be hex:<hexstring>".into()))?;
            Ok(PendingKind::Sym {
                hex: hex.to_string(),
            })
        }
        other => Err(err(format!("unknown gate kind '{other}'"))),
    }
}

fn finalize_kind(kind: PendingKind, fanin: usize, line: usize) -> Result<GateKind> {
    match kind {
        PendingKind::Ready(k) => Ok(k),
        PendingKind::Gk { k, default, hex } => {
            let nbits = crate::ball::binom_le(fanin as u64, (k as u64).min(fanin as u64));
            if nbits > (1 << 26) {
                return Err(Error::Resource(format!(
                    "GK table with {nbits} entries exceeds parser cap"
                )));
            }
            let ball_table = unpack_hex(&hex, nbits as usize, line)?;
            Ok(GateKind::Gk {
                k,
                default,
                ball_table,
            })
        }
        PendingKind::Sym { hex } => {
            let table = unpack_hex(&hex, fanin + 1, line)?;
            Ok(GateKind::Sym { table })
        }
    }
}

fn parse_operand(tok: &str, ids: &HashMap<String, u32>, line: usize) -> Result<Operand> {
    match tok {
        "0" => Ok(Operand::Const(false)),
        "1" => Ok(Operand::Const(true)),
        _ => {
            if let Some(v) = tok.strip_prefix('x') {
                if let Ok(i) = v.parse::<u32>() {
                    return Ok(Operand::Input(i));
                }
            }
            ids.get(tok).map(|&g| Operand::Gate(g)).ok_or(Error::Parse {
                line,
                col: 1,
                msg: format!("unknown operand '{tok}'"),
            })
        }
    }
}
