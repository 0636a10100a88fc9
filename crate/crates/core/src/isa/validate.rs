use std::fmt;

use crate::quantum::{GateSpec, Label, QubitRef, C64, STRUCTURAL_TOL};

use super::binding::resolve_branches;
use super::{Binding, Instruction, IsaError, Mode, NodeConfig, Opcode, Preparation};

/// One reason an instruction cannot run on a node.
#[derive(Clone, Debug, PartialEq)]
pub enum ValidationError {
    WrongNode {
        expected: usize,
        found: usize,
    },
    NoSuchElectron {
        electron: usize,
        electrons: usize,
    },
    PatternOverflow {
        index: u32,
        register_size: usize,
    },
    MissingTheta(Opcode),
    UnexpectedTheta(Opcode),
    NonFiniteParameter,
    MissingCnotOperands,
    UnexpectedControl(Opcode),
    ControlIsTarget(Label),
    MissingBasis,
    UnexpectedBasis(Opcode),
    ForeignQubit(Label),
    RegisterAddressed(Label),
    MissingPreparation,
    MissingReadout,
    DeterministicWithCoherentFields,
    PreparationNotNormalized(f64),
    PreparationOutsidePattern(u32),
    RelativePhaseNeedsTwoBranches(usize),
    ReadoutShape {
        rows: usize,
        expected: usize,
    },
    ReadoutNotOrthonormal {
        row: usize,
        col: usize,
        deviation: f64,
    },
    OverrideOutsidePattern(u32),
    Unbound(u32),
    MissingAncilla {
        index: u32,
        ancilla: usize,
    },
    NonUnitaryInSuperposition(u32),
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationError::*;
        match self {
            WrongNode { expected, found } => {
                write!(f, "instruction for node {found} sent to node {expected}")
            }
            NoSuchElectron {
                electron,
                electrons,
            } => {
                write!(
                    f,
                    "electron {electron} does not exist (node has {electrons})"
                )
            }
            PatternOverflow {
                index,
                register_size,
            } => write!(
                f,
                "pattern exceeds 2^r − 1 (index {index}, r = {register_size}, max {})",
                (1u64 << register_size) - 1
            ),
            MissingTheta(op) => write!(f, "{op} requires theta"),
            UnexpectedTheta(op) => write!(f, "{op} does not take theta"),
            NonFiniteParameter => write!(f, "parameters must be finite"),
            MissingCnotOperands => write!(f, "CNOT requires control and target"),
            UnexpectedControl(op) => write!(f, "{op} does not take a control qubit"),
            ControlIsTarget(l) => write!(f, "control and target are both {l}"),
            MissingBasis => write!(f, "MEASURE requires basis"),
            UnexpectedBasis(op) => write!(f, "{op} does not take a basis"),
            ForeignQubit(l) => write!(f, "qubit {l} is not a data qubit of this node"),
            RegisterAddressed(l) => write!(f, "register qubit {l} cannot be a gate operand"),
            MissingPreparation => write!(f, "coherent mode requires a preparation"),
            MissingReadout => write!(f, "coherent mode requires a readout basis"),
            DeterministicWithCoherentFields => {
                write!(f, "deterministic mode forbids preparation and readout")
            }
            PreparationNotNormalized(s) => write!(f, "preparation not normalized (Σ|c_k|² = {s})"),
            PreparationOutsidePattern(k) => {
                write!(
                    f,
                    "preparation amplitude for {k}, which is not in the pattern"
                )
            }
            RelativePhaseNeedsTwoBranches(n) => {
                write!(
                    f,
                    "relative-phase preparation needs a two-member pattern, got {n}"
                )
            }
            ReadoutShape { rows, expected } => {
                write!(
                    f,
                    "readout must have {expected} rows of length {expected}, got {rows}"
                )
            }
            ReadoutNotOrthonormal {
                row,
                col,
                deviation,
            } => write!(
                f,
                "readout rows {row} and {col} are not orthonormal (deviation {deviation:e})"
            ),
            OverrideOutsidePattern(k) => write!(f, "override for {k}, which is not in the pattern"),
            Unbound(k) => write!(f, "configuration {k} has no binding and no override"),
            MissingAncilla { index, ancilla } => {
                write!(
                    f,
                    "binding for configuration {index} needs ancilla {ancilla}"
                )
            }
            NonUnitaryInSuperposition(k) => write!(
                f,
                "configuration {k} measures inside a superposition of branches"
            ),
        }
    }
}

fn check_operand(label: &Label, node: &NodeConfig, errors: &mut Vec<ValidationError>) {
    if matches!(label.qubit_ref(), Some(QubitRef::Register { .. })) {
        push(errors, ValidationError::RegisterAddressed(label.clone()));
    } else if !node.owns(label) {
        push(errors, ValidationError::ForeignQubit(label.clone()));
    }
}

fn push(errors: &mut Vec<ValidationError>, e: ValidationError) {
    if !errors.contains(&e) {
        errors.push(e);
    }
}

/// Collects every violation of `instr` against `node`.
pub fn validate(instr: &Instruction, node: &NodeConfig) -> Result<(), Vec<ValidationError>> {
    use ValidationError::*;
    let mut errors = Vec::new();
    let r = node.register_size;
    let capacity = 1u64 << r;

    if instr.address.node != node.index {
        errors.push(WrongNode {
            expected: node.index,
            found: instr.address.node,
        });
    }
    if instr.address.electron >= node.electrons {
        errors.push(NoSuchElectron {
            electron: instr.address.electron,
            electrons: node.electrons,
        });
    }
    for k in instr.pattern.members() {
        if u64::from(k) >= capacity {
            errors.push(PatternOverflow {
                index: k,
                register_size: r,
            });
        }
    }

    let p = &instr.params;
    let op = instr.opcode;
    // Bindings consume parameters only when several configurations are active;
    // a single active configuration executes the opcode.
    let bound: Vec<Binding> = match instr.mode {
        Mode::Coherent if instr.pattern.len() > 1 => instr
            .pattern
            .members()
            .filter(|k| !instr.branch_override.contains_key(k))
            .filter_map(|k| node.bindings.get(k))
            .collect(),
        _ => Vec::new(),
    };
    let bound_uses = |f: fn(&Binding) -> bool| bound.iter().any(f);
    let uses_theta = op.takes_theta() || bound_uses(|b| matches!(b, Binding::Ry | Binding::Rz));
    let uses_control = op == Opcode::Cnot || bound_uses(|b| matches!(b, Binding::Cnot));
    let uses_basis = op == Opcode::Measure || bound_uses(|b| matches!(b, Binding::Measure));
    match (uses_theta, p.theta) {
        (true, None) if op.takes_theta() => errors.push(MissingTheta(op)),
        (false, Some(_)) => errors.push(UnexpectedTheta(op)),
        (_, Some(t)) if !t.is_finite() => errors.push(NonFiniteParameter),
        _ => {}
    }
    if op == Opcode::Cnot {
        if p.control.is_none() || p.target.is_none() {
            errors.push(MissingCnotOperands);
        }
    } else if p.control.is_some() && !uses_control {
        errors.push(UnexpectedControl(op));
    }
    if let (Some(c), Some(t)) = (&p.control, &p.target) {
        if c == t {
            errors.push(ControlIsTarget(c.clone()));
        }
    }
    match (op == Opcode::Measure, p.basis) {
        (true, None) => errors.push(MissingBasis),
        (false, Some(_)) if !uses_basis => errors.push(UnexpectedBasis(op)),
        _ => {}
    }
    for l in [&p.control, &p.target].into_iter().flatten() {
        check_operand(l, node, &mut errors);
    }

    match instr.mode {
        Mode::Coherent => {
            if instr.preparation.is_none() {
                errors.push(MissingPreparation);
            }
            if instr.readout.is_none() {
                errors.push(MissingReadout);
            }
        }
        Mode::Deterministic => {
            if instr.preparation.is_some() || instr.readout.is_some() {
                errors.push(DeterministicWithCoherentFields);
            }
        }
    }

    let mut amplitudes = None;
    if let Some(prep) = &instr.preparation {
        match prep.amplitudes(&instr.pattern) {
            None => errors.push(RelativePhaseNeedsTwoBranches(instr.pattern.len())),
            Some(a) => {
                if let Preparation::RelativePhase(phi) = prep {
                    if !phi.is_finite() {
                        errors.push(NonFiniteParameter);
                    }
                }
                if a.values().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    errors.push(NonFiniteParameter);
                }
                for k in a.keys() {
                    if !instr.pattern.contains(*k) {
                        errors.push(PreparationOutsidePattern(*k));
                    }
                }
                let s: f64 = a.values().map(|c| c.norm_sqr()).sum();
                if (s - 1.0).abs() > STRUCTURAL_TOL {
                    errors.push(PreparationNotNormalized(s));
                }
                amplitudes = Some(a);
            }
        }
    }

    if let Some(readout) = &instr.readout {
        let d = capacity as usize;
        let rows = readout.rows(r);
        if rows.len() != d || rows.iter().any(|row| row.len() != d) {
            errors.push(ReadoutShape {
                rows: rows.len(),
                expected: d,
            });
        } else {
            'outer: for i in 0..d {
                for j in i..d {
                    let dot: C64 = rows[i]
                        .iter()
                        .zip(&rows[j])
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    let dev = (dot - C64::new(want, 0.0)).norm();
                    if !dev.is_finite() || dev > STRUCTURAL_TOL {
                        errors.push(ReadoutNotOrthonormal {
                            row: i,
                            col: j,
                            deviation: dev,
                        });
                        break 'outer;
                    }
                }
            }
        }
    }

    for (k, gates) in &instr.branch_override {
        if !instr.pattern.contains(*k) {
            errors.push(OverrideOutsidePattern(*k));
        }
        for g in gates {
            for l in g.labels() {
                check_operand(l, node, &mut errors);
            }
        }
    }

    // Pattern overflow would make the resolution below meaningless.
    if !errors.iter().any(|e| matches!(e, PatternOverflow { .. })) {
        let active: Vec<u32> = match instr.mode {
            Mode::Deterministic => vec![instr.selected()],
            Mode::Coherent => instr.pattern.members().collect(),
        };
        for k in &active {
            if instr.branch_override.contains_key(k) {
                continue;
            }
            if let Some(Binding::CnotToAncilla(a)) = node.bindings.get(*k) {
                if a >= node.ancillas && (active.len() > 1 || op != Opcode::Cnot) {
                    errors.push(MissingAncilla {
                        index: *k,
                        ancilla: a,
                    });
                }
            }
        }
        match resolve_branches(instr, &node.bindings) {
            Err(IsaError::Unbound(k)) => errors.push(Unbound(k)),
            Err(IsaError::MissingParam { opcode, what }) => push(
                &mut errors,
                match what {
                    "theta" => MissingTheta(opcode),
                    "basis" => MissingBasis,
                    _ => MissingCnotOperands,
                },
            ),
            Err(_) => {}
            Ok(res) => {
                let support: Vec<u32> = match (&instr.mode, &amplitudes) {
                    (Mode::Coherent, Some(a)) => a
                        .iter()
                        .filter(|(_, c)| c.norm_sqr() > 0.0)
                        .map(|(k, _)| *k)
                        .collect(),
                    _ => active.clone(),
                };
                for (k, gates) in &res.branches {
                    for g in gates {
                        for l in g.labels() {
                            if !errors.iter().any(|e| matches!(e, MissingAncilla { .. })) {
                                check_operand(l, node, &mut errors);
                            }
                        }
                        if let GateSpec::Cnot { control } = &g.spec {
                            if *control == g.target {
                                push(&mut errors, ControlIsTarget(control.clone()));
                            }
                        }
                        if !g.spec.is_unitary() && support.len() > 1 && support.contains(k) {
                            push(&mut errors, NonUnitaryInSuperposition(*k));
                        }
                    }
                }
            }
        }
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::isa::{Address, Pattern, ReadoutBasis};
    use crate::quantum::Basis;

    fn node(r: usize) -> NodeConfig {
        NodeConfig::new(0, 2, r, 1)
    }

    #[test]
    fn cnot_without_control() {
        let i = Instruction::deterministic(Address::new(0, 0), Opcode::Cnot, Pattern::single(4))
            .target(Label::electron(0, 1));
        let errs = validate(&i, &node(3)).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.to_string() == "CNOT requires control and target"));
    }

    #[test]
    fn ry_pattern_two_is_ok() {
        let i = Instruction::deterministic(Address::new(0, 0), Opcode::Ry, Pattern::single(2))
            .theta(FRAC_PI_2);
        assert_eq!(validate(&i, &node(2)), Ok(()));
    }

    #[test]
    fn unnormalised_preparation() {
        let s = 0.5f64.sqrt();
        let prep = Preparation::Amplitudes(BTreeMap::from([
            (0, C64::new(s * s.sqrt(), 0.0)),
            (1, C64::new(0.5, 0.0)),
        ]));
        let i = Instruction::coherent(
            Address::new(0, 0),
            Opcode::Idle,
            Pattern::new([0, 1]).unwrap(),
            prep,
            ReadoutBasis::XBasis,
        );
        let errs = validate(&i, &node(1)).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.to_string().starts_with("preparation not normalized")));
    }

    #[test]
    fn reports_all_violations() {
        let i = Instruction::deterministic(Address::new(0, 5), Opcode::Measure, Pattern::single(9))
            .theta(1.0);
        let errs = validate(&i, &node(3)).unwrap_err();
        assert!(errs.len() >= 4, "{errs:?}");
        assert!(errs
            .iter()
            .any(|e| e.to_string().starts_with("pattern exceeds 2^r − 1")));
        assert!(errs.contains(&ValidationError::MissingBasis));
    }

    #[test]
    fn mode_field_mismatch() {
        let mut i = Instruction::deterministic(Address::new(0, 0), Opcode::X, Pattern::single(1));
        i.readout = Some(ReadoutBasis::Computational);
        assert!(validate(&i, &node(2))
            .unwrap_err()
            .contains(&ValidationError::DeterministicWithCoherentFields));
        i.mode = Mode::Coherent;
        assert!(validate(&i, &node(2))
            .unwrap_err()
            .contains(&ValidationError::MissingPreparation));
    }

    #[test]
    fn foreign_and_register_operands() {
        let i = Instruction::deterministic(Address::new(0, 0), Opcode::X, Pattern::single(1))
            .target(Label::electron(1, 0));
        assert!(validate(&i, &node(2))
            .unwrap_err()
            .contains(&ValidationError::ForeignQubit(Label::electron(1, 0))));
        let i = Instruction::deterministic(Address::new(0, 0), Opcode::X, Pattern::single(1))
            .target(Label::register(0, 0, 0));
        assert!(matches!(
            validate(&i, &node(2)).unwrap_err()[0],
            ValidationError::RegisterAddressed(_)
        ));
    }

    #[test]
    fn measure_in_superposition_rejected() {
        let prep = Preparation::Amplitudes(BTreeMap::from([
            (
                4,
                C64::new(FRAC_PI_2.cos().hypot(0.0).max(0.5f64.sqrt()), 0.0),
            ),
            (5, C64::new(0.5f64.sqrt(), 0.0)),
        ]));
        let i = Instruction::coherent(
            Address::new(0, 0),
            Opcode::Idle,
            Pattern::new([4, 5]).unwrap(),
            prep,
            ReadoutBasis::Computational,
        )
        .control(Label::electron(0, 0));
        let mut cfg = node(3);
        cfg.bindings.insert(4, Binding::Identity);
        let errs = validate(&i.basis(Basis::Z), &cfg).unwrap_err();
        assert!(
            errs.contains(&ValidationError::NonUnitaryInSuperposition(5)),
            "{errs:?}"
        );
    }
}
