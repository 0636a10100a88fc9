//! Line-oriented text encoding of programs.
//!
//! ```text
//! isa-program v1 rounds=<T>
//! round <t> entries=<n>
//! instr node=<m> electron=<e> opcode=<OP> [theta=<f>] [control=<q>] [target=<q>]
//!       [basis=Z|X] pattern=<k>[,<k>…] mode=deterministic|coherent
//!       [prep=<k>:<re>:<im>[,…] | phase=<f>] [readout=computational|x|rows:<row>[;<row>…]]
//!       [override=<k>:<gate>[+<gate>…][|…]]
//! ```
//!
//! Each `instr` is a single line. Reals are written with 17 significant
//! digits so decoding reproduces every bit. `<row>` is a comma-separated
//! list of `<re>:<im>` pairs and `<gate>` is `NAME[(arg)]@<qubit>` where the
//! argument is the angle, the CNOT control or the measurement basis. Blank
//! lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::quantum::{Basis, Gate, GateSpec, Label, C64};

use super::{
    Address, Instruction, InstructionVector, IsaError, Mode, Opcode, Params, Pattern, Preparation,
    Program, ReadoutBasis,
};

const HEADER: &str = "isa-program";
const VERSION: &str = "v1";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex(z: C64) -> String {
    format!("{}:{}", real(z.re), real(z.im))
}

fn gate_token(g: &Gate) -> String {
    let arg = match &g.spec {
        GateSpec::Ry(t) | GateSpec::Rz(t) | GateSpec::Phase(t) => format!("({})", real(*t)),
        GateSpec::Cnot { control } => format!("({control})"),
        GateSpec::Measure(b) => format!("({b})"),
        _ => String::new(),
    };
    format!("{}{}@{}", g.spec.name(), arg, g.target)
}

fn encode_instruction(i: &Instruction) -> String {
    let mut s = format!(
        "instr node={} electron={} opcode={}",
        i.address.node, i.address.electron, i.opcode
    );
    let p = &i.params;
    if let Some(t) = p.theta {
        let _ = write!(s, " theta={}", real(t));
    }
    if let Some(c) = &p.control {
        let _ = write!(s, " control={c}");
    }
    if let Some(t) = &p.target {
        let _ = write!(s, " target={t}");
    }
    if let Some(b) = p.basis {
        let _ = write!(s, " basis={b}");
    }
    let pattern: Vec<String> = i.pattern.members().map(|k| k.to_string()).collect();
    let _ = write!(s, " pattern={} mode={}", pattern.join(","), i.mode);
    match &i.preparation {
        Some(Preparation::Amplitudes(a)) => {
            let parts: Vec<String> = a
                .iter()
                .map(|(k, z)| format!("{k}:{}", complex(*z)))
                .collect();
            let _ = write!(s, " prep={}", parts.join(","));
        }
        Some(Preparation::RelativePhase(phi)) => {
            let _ = write!(s, " phase={}", real(*phi));
        }
        None => {}
    }
    match &i.readout {
        Some(ReadoutBasis::Computational) => s.push_str(" readout=computational"),
        Some(ReadoutBasis::XBasis) => s.push_str(" readout=x"),
        Some(ReadoutBasis::Rows(rows)) => {
            let rows: Vec<String> = rows
                .iter()
                .map(|r| r.iter().map(|z| complex(*z)).collect::<Vec<_>>().join(","))
                .collect();
            let _ = write!(s, " readout=rows:{}", rows.join(";"));
        }
        None => {}
    }
    if !i.branch_override.is_empty() {
        let parts: Vec<String> = i
            .branch_override
            .iter()
            .map(|(k, gates)| {
                format!(
                    "{k}:{}",
                    gates.iter().map(gate_token).collect::<Vec<_>>().join("+")
                )
            })
            .collect();
        let _ = write!(s, " override={}", parts.join("|"));
    }
    s
}

/// Serialises a program. The output ends with a newline.
pub fn encode(program: &Program) -> String {
    let mut out = format!("{HEADER} {VERSION} rounds={}\n", program.rounds.len());
    for v in &program.rounds {
        let _ = writeln!(out, "round {} entries={}", v.round, v.entries.len());
        for i in &v.entries {
            out.push_str(&encode_instruction(i));
            out.push('\n');
        }
    }
    out
}

struct Cursor {
    line: usize,
}

impl Cursor {
    fn err(&self, field: &str, message: impl Into<String>) -> IsaError {
        IsaError::Parse {
            line: self.line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn real(&self, field: &str, s: &str) -> Result<f64, IsaError> {
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(field, format!("`{s}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.err(field, "value must be finite"));
        }
        Ok(v)
    }

    fn int<T: std::str::FromStr>(&self, field: &str, s: &str) -> Result<T, IsaError> {
        s.parse()
            .map_err(|_| self.err(field, format!("`{s}` is not a non-negative integer")))
    }

    fn complex(&self, field: &str, s: &str) -> Result<C64, IsaError> {
        let (re, im) = s
            .split_once(':')
            .ok_or_else(|| self.err(field, format!("`{s}` is not re:im")))?;
        Ok(C64::new(self.real(field, re)?, self.real(field, im)?))
    }

    fn label(&self, field: &str, s: &str) -> Result<Label, IsaError> {
        if s.is_empty()
            || s.chars()
                .any(|c| c.is_whitespace() || "@+|,:;()=".contains(c))
        {
            return Err(self.err(field, format!("`{s}` is not a valid qubit label")));
        }
        Ok(Label::new(s))
    }

    fn basis(&self, field: &str, s: &str) -> Result<Basis, IsaError> {
        match s {
            "Z" => Ok(Basis::Z),
            "X" => Ok(Basis::X),
            _ => Err(self.err(field, format!("unknown basis `{s}`"))),
        }
    }

    fn gate(&self, field: &str, s: &str) -> Result<Gate, IsaError> {
        let (head, target) = s
            .rsplit_once('@')
            .ok_or_else(|| self.err(field, format!("gate `{s}` has no @target")))?;
        let target = self.label(field, target)?;
        let (name, arg) = match head.split_once('(') {
            Some((n, rest)) => {
                let a = rest
                    .strip_suffix(')')
                    .ok_or_else(|| self.err(field, format!("unclosed argument in `{s}`")))?;
                (n, Some(a))
            }
            None => (head, None),
        };
        let need = || arg.ok_or_else(|| self.err(field, format!("{name} needs an argument")));
        let spec = match name {
            "I" | "X" | "Y" | "Z" | "H" if arg.is_some() => {
                return Err(self.err(field, format!("{name} takes no argument")))
            }
            "I" => GateSpec::I,
            "X" => GateSpec::X,
            "Y" => GateSpec::Y,
            "Z" => GateSpec::Z,
            "H" => GateSpec::H,
            "RY" => GateSpec::Ry(self.real(field, need()?)?),
            "RZ" => GateSpec::Rz(self.real(field, need()?)?),
            "PHASE" => GateSpec::Phase(self.real(field, need()?)?),
            "CNOT" => GateSpec::Cnot {
                control: self.label(field, need()?)?,
            },
            "MEASURE" => GateSpec::Measure(self.basis(field, need()?)?),
            _ => return Err(self.err(field, format!("unknown gate `{name}`"))),
        };
        Ok(Gate { spec, target })
    }

    fn instruction(&self, rest: &str) -> Result<Instruction, IsaError> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for tok in rest.split(' ').filter(|t| !t.is_empty()) {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| self.err(tok, "expected key=value"))?;
            const KNOWN: [&str; 13] = [
                "node", "electron", "opcode", "theta", "control", "target", "basis", "pattern",
                "mode", "prep", "phase", "readout", "override",
            ];
            if !KNOWN.contains(&k) {
                return Err(self.err(k, "unknown field"));
            }
            if fields.insert(k, v).is_some() {
                return Err(self.err(k, "duplicate field"));
            }
        }
        let req = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| self.err(k, "missing field"))
        };
        let address = Address::new(
            self.int("node", req("node")?)?,
            self.int("electron", req("electron")?)?,
        );
        let opcode: Opcode = req("opcode")?
            .parse()
            .map_err(|m: String| self.err("opcode", m))?;
        let params = Params {
            theta: fields
                .get("theta")
                .map(|v| self.real("theta", v))
                .transpose()?,
            control: fields
                .get("control")
                .map(|v| self.label("control", v))
                .transpose()?,
            target: fields
                .get("target")
                .map(|v| self.label("target", v))
                .transpose()?,
            basis: fields
                .get("basis")
                .map(|v| self.basis("basis", v))
                .transpose()?,
        };
        let members = req("pattern")?
            .split(',')
            .map(|k| self.int::<u32>("pattern", k))
            .collect::<Result<Vec<_>, _>>()?;
        let pattern = Pattern::new(members).map_err(|e| self.err("pattern", e.to_string()))?;
        let mode = match req("mode")? {
            "deterministic" => Mode::Deterministic,
            "coherent" => Mode::Coherent,
            m => return Err(self.err("mode", format!("unknown mode `{m}`"))),
        };
        let preparation = match (fields.get("prep"), fields.get("phase")) {
            (Some(_), Some(_)) => return Err(self.err("phase", "prep and phase are exclusive")),
            (Some(p), None) => {
                let mut amps = BTreeMap::new();
                for part in p.split(',') {
                    let (k, z) = part
                        .split_once(':')
                        .ok_or_else(|| self.err("prep", format!("`{part}` is not k:re:im")))?;
                    if amps
                        .insert(self.int("prep", k)?, self.complex("prep", z)?)
                        .is_some()
                    {
                        return Err(self.err("prep", format!("duplicate amplitude for {k}")));
                    }
                }
                Some(Preparation::Amplitudes(amps))
            }
            (None, Some(phi)) => Some(Preparation::RelativePhase(self.real("phase", phi)?)),
            (None, None) => None,
        };
        let readout = match fields.get("readout") {
            None => None,
            Some(&"computational") => Some(ReadoutBasis::Computational),
            Some(&"x") => Some(ReadoutBasis::XBasis),
            Some(v) => {
                let rows = v
                    .strip_prefix("rows:")
                    .ok_or_else(|| self.err("readout", format!("unknown readout `{v}`")))?;
                let rows = rows
                    .split(';')
                    .map(|row| row.split(',').map(|z| self.complex("readout", z)).collect())
                    .collect::<Result<Vec<Vec<C64>>, _>>()?;
                Some(ReadoutBasis::Rows(rows))
            }
        };
        let mut branch_override = BTreeMap::new();
        if let Some(v) = fields.get("override") {
            for part in v.split('|') {
                let (k, gates) = part
                    .split_once(':')
                    .ok_or_else(|| self.err("override", format!("`{part}` is not k:gates")))?;
                let gates = gates
                    .split('+')
                    .map(|g| self.gate("override", g))
                    .collect::<Result<Vec<_>, _>>()?;
                if branch_override
                    .insert(self.int("override", k)?, gates)
                    .is_some()
                {
                    return Err(self.err("override", format!("duplicate override for {k}")));
                }
            }
        }
        Ok(Instruction {
            address,
            opcode,
            params,
            pattern,
            mode,
            preparation,
            readout,
            branch_override,
        })
    }
}

/// Parses a program. Errors name the 1-based line and the offending field.
pub fn decode(text: &str) -> Result<Program, IsaError> {
    decode_with_lines(text).map(|(p, _)| p)
}

/// Like [`decode`], also returning the source line of every instruction,
/// indexed `[round][entry]`.
pub fn decode_with_lines(text: &str) -> Result<(Program, Vec<Vec<usize>>), IsaError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let last_line = text.lines().count();
    let eof = |field: &str, msg: String| IsaError::Parse {
        line: last_line + 1,
        field: field.to_string(),
        message: msg,
    };

    let (line, header) = lines
        .next()
        .ok_or_else(|| eof("header", "empty document".into()))?;
    let cur = Cursor { line };
    let mut parts = header.split(' ');
    if parts.next() != Some(HEADER) {
        return Err(cur.err("header", format!("expected `{HEADER}`")));
    }
    if parts.next() != Some(VERSION) {
        return Err(cur.err("header", format!("expected version {VERSION}")));
    }
    let total: usize = match parts.next().and_then(|p| p.strip_prefix("rounds=")) {
        Some(v) => cur.int("rounds", v)?,
        None => return Err(cur.err("rounds", "missing field")),
    };
    if let Some(extra) = parts.next() {
        return Err(cur.err(extra, "unknown field"));
    }

    let mut rounds = Vec::with_capacity(total);
    let mut map = Vec::with_capacity(total);
    for n in 0..total {
        let (line, text) = lines.next().ok_or_else(|| {
            eof(
                "round",
                format!("unexpected end: {} round(s) missing", total - n),
            )
        })?;
        let cur = Cursor { line };
        let rest = text
            .strip_prefix("round ")
            .ok_or_else(|| cur.err("round", "expected a round line"))?;
        let (t, entries) = rest
            .split_once(' ')
            .ok_or_else(|| cur.err("entries", "missing field"))?;
        let t: u64 = cur.int("round", t)?;
        let entries: usize = match entries.strip_prefix("entries=") {
            Some(v) => cur.int("entries", v)?,
            None => return Err(cur.err("entries", "missing field")),
        };
        if let Some(prev) = rounds.last().map(|v: &InstructionVector| v.round) {
            if t <= prev {
                return Err(cur.err("round", format!("round {t} does not follow round {prev}")));
            }
        }
        let mut vec = InstructionVector::new(t, Vec::with_capacity(entries));
        let mut at = Vec::with_capacity(entries);
        for m in 0..entries {
            let (line, text) = lines.next().ok_or_else(|| {
                eof(
                    "instr",
                    format!(
                        "unexpected end: round {t} is missing {} instruction(s)",
                        entries - m
                    ),
                )
            })?;
            let cur = Cursor { line };
            let rest = text
                .strip_prefix("instr ")
                .ok_or_else(|| cur.err("instr", "expected an instruction line"))?;
            vec.entries.push(cur.instruction(rest)?);
            at.push(line);
        }
        rounds.push(vec);
        map.push(at);
    }
    if let Some((line, _)) = lines.next() {
        return Err(IsaError::Parse {
            line,
            field: "round".into(),
            message: "content after the declared rounds".into(),
        });
    }
    Ok((Program::new(rounds), map))
}
