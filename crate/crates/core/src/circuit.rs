//! Boolean circuit IR: truth-table gates of fan-in 2 or 3 over densely
//! numbered wires.
//!
//! Wire numbering is fixed: the `n` declared inputs come first, followed by
//! the two constant wires (FALSE, TRUE), followed by one wire per gate in
//! gate-list order. The CNF encoder relies on this layout for its variable
//! numbering.

use std::fmt;
use std::ops::Not;

use thiserror::Error;

/// Index of a wire within a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wire(pub u32);

impl Wire {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// Truth tables for common gates. Bit `i` of a table is the gate output when
/// input `j` carries bit `j` of `i`.
pub mod tt {
    pub const AND2: u8 = 0b1000;
    pub const OR2: u8 = 0b1110;
    pub const XOR2: u8 = 0b0110;
    pub const AND3: u8 = 0b1000_0000;
    pub const OR3: u8 = 0b1111_1110;
    pub const XOR3: u8 = 0b1001_0110;
    pub const MAJ3: u8 = 0b1110_1000;

    /// Tabulates `f` over `arity` inputs.
    pub fn from_fn(arity: usize, f: impl Fn(&[bool]) -> bool) -> u8 {
        debug_assert!(arity <= 3);
        let mut table = 0u8;
        let mut bits = [false; 3];
        for row in 0..(1usize << arity) {
            for (j, bit) in bits.iter_mut().enumerate().take(arity) {
                *bit = (row >> j) & 1 == 1;
            }
            if f(&bits[..arity]) {
                table |= 1 << row;
            }
        }
        table
    }

    pub fn lookup(table: u8, row: usize) -> bool {
        (table >> row) & 1 == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    /// Fan-in; 2 or 3 in a valid circuit.
    pub arity: u8,
    /// Output bit per input row, `2^arity` bits used.
    pub table: u8,
    inputs: [Wire; 3],
}

impl Gate {
    pub fn new(table: u8, inputs: &[Wire]) -> Self {
        assert!(
            (1..=3).contains(&inputs.len()),
            "gate fan-in must be between 1 and 3"
        );
        let mut slots = [Wire(0); 3];
        slots[..inputs.len()].copy_from_slice(inputs);
        Gate {
            arity: inputs.len() as u8,
            table,
            inputs: slots,
        }
    }

    pub fn inputs(&self) -> &[Wire] {
        &self.inputs[..(self.arity as usize).min(3)]
    }

    pub fn eval(&self, values: &[bool]) -> bool {
        let row = self
            .inputs()
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, w)| {
                acc | (values[w.index()] as usize) << j
            });
        tt::lookup(self.table, row)
    }
}

/// Gate counts split by fan-in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SizeReport {
    pub g3: usize,
    pub g2: usize,
}

impl SizeReport {
    pub fn total(&self) -> usize {
        self.g3 + self.g2
    }
}

impl fmt::Display for SizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]+{}", self.g3, self.g2)
    }
}

impl std::ops::Add for SizeReport {
    type Output = SizeReport;

    fn add(self, rhs: SizeReport) -> SizeReport {
        SizeReport {
            g3: self.g3 + rhs.g3,
            g2: self.g2 + rhs.g2,
        }
    }
}

impl std::ops::Sub for SizeReport {
    type Output = SizeReport;

    fn sub(self, rhs: SizeReport) -> SizeReport {
        SizeReport {
            g3: self.g3 - rhs.g3,
            g2: self.g2 - rhs.g2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("gate {gate}: fan-in {arity} is not 2 or 3")]
    BadArity { gate: usize, arity: u8 },
    #[error("gate {gate}: truth table {table:#04x} has bits beyond 2^{arity} rows")]
    BadTruthTable { gate: usize, arity: u8, table: u8 },
    #[error("gate {gate}: input {wire} is not defined before the gate")]
    DanglingInput { gate: usize, wire: Wire },
    #[error("output {output}: wire {wire} is not defined")]
    UndefinedOutput { output: usize, wire: Wire },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("expected {expected} input bits, got {actual}")]
    InputLength { expected: usize, actual: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    pub num_inputs: usize,
    pub gates: Vec<Gate>,
    pub outputs: Vec<Wire>,
}

impl Circuit {
    pub fn new(num_inputs: usize, gates: Vec<Gate>, outputs: Vec<Wire>) -> Self {
        Circuit {
            num_inputs,
            gates,
            outputs,
        }
    }

    pub fn input_wire(&self, i: usize) -> Wire {
        debug_assert!(i < self.num_inputs);
        Wire(i as u32)
    }

    pub fn false_wire(&self) -> Wire {
        Wire(self.num_inputs as u32)
    }

    pub fn true_wire(&self) -> Wire {
        Wire(self.num_inputs as u32 + 1)
    }

    pub fn gate_wire(&self, gate: usize) -> Wire {
        Wire((self.num_inputs + 2 + gate) as u32)
    }

    pub fn num_wires(&self) -> usize {
        self.num_inputs + 2 + self.gates.len()
    }

    pub fn is_constant(&self, wire: Wire) -> bool {
        wire == self.false_wire() || wire == self.true_wire()
    }

    /// Gate index driving `wire`, if it is a gate output.
    pub fn gate_of(&self, wire: Wire) -> Option<usize> {
        wire.index()
            .checked_sub(self.num_inputs + 2)
            .filter(|&g| g < self.gates.len())
    }

    /// Checks every structural invariant, collecting all violations in gate
    /// order.
    pub fn validate(&self) -> Result<(), Vec<StructuralError>> {
        let mut errors = Vec::new();
        for (i, gate) in self.gates.iter().enumerate() {
            if gate.arity != 2 && gate.arity != 3 {
                errors.push(StructuralError::BadArity {
                    gate: i,
                    arity: gate.arity,
                });
                continue;
            }
            let rows = 1u16 << gate.arity;
            if rows < 8 && (gate.table as u16) >> rows != 0 {
                errors.push(StructuralError::BadTruthTable {
                    gate: i,
                    arity: gate.arity,
                    table: gate.table,
                });
            }
            let own = self.gate_wire(i);
            for &w in gate.inputs() {
                if w >= own {
                    errors.push(StructuralError::DanglingInput { gate: i, wire: w });
                }
            }
        }
        let defined = self.num_wires() as u32;
        for (i, &w) in self.outputs.iter().enumerate() {
            if w.0 >= defined {
                errors.push(StructuralError::UndefinedOutput { output: i, wire: w });
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Simulates the circuit, returning the output bits and the value of
    /// every wire.
    pub fn eval(&self, inputs: &[bool]) -> Result<(Vec<bool>, Vec<bool>), EvalError> {
        if inputs.len() != self.num_inputs {
            return Err(EvalError::InputLength {
                expected: self.num_inputs,
                actual: inputs.len(),
            });
        }
        let mut trace = Vec::with_capacity(self.num_wires());
        trace.extend_from_slice(inputs);
        trace.push(false);
        trace.push(true);
        for gate in &self.gates {
            let v = gate.eval(&trace);
            trace.push(v);
        }
        let outputs = self.outputs.iter().map(|w| trace[w.index()]).collect();
        Ok((outputs, trace))
    }

    pub fn size(&self) -> SizeReport {
        let g3 = self.gates.iter().filter(|g| g.arity == 3).count();
        SizeReport {
            g3,
            g2: self.gates.len() - g3,
        }
    }
}

/// A reference to a value under construction: a constant or a possibly
/// inverted wire. Inversions are absorbed into the truth tables of the gates
/// that read the signal, so negation never costs a gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Const(bool),
    Wire { wire: Wire, inverted: bool },
}

impl Signal {
    pub const FALSE: Signal = Signal::Const(false);
    pub const TRUE: Signal = Signal::Const(true);

    pub fn wire(wire: Wire) -> Self {
        Signal::Wire {
            wire,
            inverted: false,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Signal::Const(_))
    }

    pub fn value_in(&self, trace: &[bool]) -> bool {
        match *self {
            Signal::Const(c) => c,
            Signal::Wire { wire, inverted } => trace[wire.index()] ^ inverted,
        }
    }
}

impl Not for Signal {
    type Output = Signal;

    fn not(self) -> Signal {
        match self {
            Signal::Const(c) => Signal::Const(!c),
            Signal::Wire { wire, inverted } => Signal::Wire {
                wire,
                inverted: !inverted,
            },
        }
    }
}

impl From<bool> for Signal {
    fn from(c: bool) -> Self {
        Signal::Const(c)
    }
}

/// Appends gates to a circuit with a fixed number of inputs.
///
/// In folding mode (the default) a gate whose function collapses once
/// constants, inversions, duplicate inputs and irrelevant inputs are taken
/// into account is emitted at its reduced fan-in, or not at all. The
/// unfolded mode keeps every requested gate, wiring constants to the
/// constant wires; inversions are still absorbed.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    num_inputs: usize,
    gates: Vec<Gate>,
    fold: bool,
}

impl CircuitBuilder {
    pub fn new(num_inputs: usize) -> Self {
        CircuitBuilder {
            num_inputs,
            gates: Vec::new(),
            fold: true,
        }
    }

    pub fn unfolded(num_inputs: usize) -> Self {
        CircuitBuilder {
            fold: false,
            ..CircuitBuilder::new(num_inputs)
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn input(&self, i: usize) -> Signal {
        assert!(i < self.num_inputs, "input {i} out of range");
        Signal::wire(Wire(i as u32))
    }

    pub fn inputs(&self, range: std::ops::Range<usize>) -> Vec<Signal> {
        range.map(|i| self.input(i)).collect()
    }

    pub fn size(&self) -> SizeReport {
        let g3 = self.gates.iter().filter(|g| g.arity == 3).count();
        SizeReport {
            g3,
            g2: self.gates.len() - g3,
        }
    }

    fn const_wire(&self, c: bool) -> Wire {
        Wire((self.num_inputs + c as usize) as u32)
    }

    fn push(&mut self, table: u8, inputs: &[Wire]) -> Signal {
        let wire = Wire((self.num_inputs + 2 + self.gates.len()) as u32);
        self.gates.push(Gate::new(table, inputs));
        Signal::wire(wire)
    }

    /// Adds a gate computing `table` over `inputs` (fan-in 2 or 3).
    pub fn gate(&mut self, table: u8, inputs: &[Signal]) -> Signal {
        assert!(
            inputs.len() == 2 || inputs.len() == 3,
            "gates take 2 or 3 inputs"
        );
        if self.fold {
            self.folded_gate(table, inputs)
        } else {
            self.raw_gate(table, inputs)
        }
    }

    pub fn gate_fn(&mut self, inputs: &[Signal], f: impl Fn(&[bool]) -> bool) -> Signal {
        let table = tt::from_fn(inputs.len(), f);
        self.gate(table, inputs)
    }

    fn raw_gate(&mut self, table: u8, inputs: &[Signal]) -> Signal {
        let arity = inputs.len();
        let mut wires = Vec::with_capacity(arity);
        let mut flip = 0usize;
        for (j, s) in inputs.iter().enumerate() {
            match *s {
                Signal::Const(c) => wires.push(self.const_wire(c)),
                Signal::Wire { wire, inverted } => {
                    wires.push(wire);
                    if inverted {
                        flip |= 1 << j;
                    }
                }
            }
        }
        let table = tt::from_fn(arity, |bits| {
            let row = bits
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &b)| acc | (b as usize) << j);
            tt::lookup(table, row ^ flip)
        });
        self.push(table, &wires)
    }

    fn folded_gate(&mut self, table: u8, inputs: &[Signal]) -> Signal {
        enum Source {
            Const(bool),
            Var(usize, bool),
        }
        let mut vars: Vec<Wire> = Vec::with_capacity(3);
        let sources: Vec<Source> = inputs
            .iter()
            .map(|s| match *s {
                Signal::Const(c) => Source::Const(c),
                Signal::Wire { wire, inverted } => {
                    let idx = vars.iter().position(|&w| w == wire).unwrap_or_else(|| {
                        vars.push(wire);
                        vars.len() - 1
                    });
                    Source::Var(idx, inverted)
                }
            })
            .collect();
        let eval = |assign: &[bool]| {
            let row = sources.iter().enumerate().fold(0usize, |acc, (j, s)| {
                let bit = match *s {
                    Source::Const(c) => c,
                    Source::Var(i, inv) => assign[i] ^ inv,
                };
                acc | (bit as usize) << j
            });
            tt::lookup(table, row)
        };
        let mut reduced = tt::from_fn(vars.len(), eval);

        // Drop inputs the function does not depend on.
        let mut j = 0;
        while j < vars.len() {
            let k = vars.len();
            let depends = (0..(1usize << k))
                .any(|row| tt::lookup(reduced, row) != tt::lookup(reduced, row ^ (1 << j)));
            if depends {
                j += 1;
                continue;
            }
            reduced = tt::from_fn(k - 1, |bits| {
                let mut row = 0usize;
                let mut src = 0usize;
                for pos in 0..k {
                    if pos == j {
                        continue;
                    }
                    row |= (bits[src] as usize) << pos;
                    src += 1;
                }
                tt::lookup(reduced, row)
            });
            vars.remove(j);
        }

        match vars.len() {
            0 => Signal::Const(tt::lookup(reduced, 0)),
            1 => Signal::Wire {
                wire: vars[0],
                inverted: tt::lookup(reduced, 0),
            },
            _ => self.push(reduced, &vars),
        }
    }

    pub fn and2(&mut self, a: Signal, b: Signal) -> Signal {
        self.gate(tt::AND2, &[a, b])
    }

    pub fn or2(&mut self, a: Signal, b: Signal) -> Signal {
        self.gate(tt::OR2, &[a, b])
    }

    pub fn xor2(&mut self, a: Signal, b: Signal) -> Signal {
        self.gate(tt::XOR2, &[a, b])
    }

    pub fn and3(&mut self, a: Signal, b: Signal, c: Signal) -> Signal {
        self.gate(tt::AND3, &[a, b, c])
    }

    pub fn or3(&mut self, a: Signal, b: Signal, c: Signal) -> Signal {
        self.gate(tt::OR3, &[a, b, c])
    }

    pub fn xor3(&mut self, a: Signal, b: Signal, c: Signal) -> Signal {
        self.gate(tt::XOR3, &[a, b, c])
    }

    pub fn maj3(&mut self, a: Signal, b: Signal, c: Signal) -> Signal {
        self.gate(tt::MAJ3, &[a, b, c])
    }

    /// Turns `signal` into a plain wire, spending a gate only when it is
    /// inverted.
    pub fn materialize(&mut self, signal: Signal) -> Wire {
        match signal {
            Signal::Const(c) => self.const_wire(c),
            Signal::Wire {
                wire,
                inverted: false,
            } => wire,
            Signal::Wire {
                wire,
                inverted: true,
            } => {
                let f = self.const_wire(false);
                match self.push(0b0101, &[wire, f]) {
                    Signal::Wire { wire, .. } => wire,
                    Signal::Const(_) => unreachable!(),
                }
            }
        }
    }

    pub fn finish(mut self, outputs: &[Signal]) -> Circuit {
        let outputs = outputs.iter().map(|&s| self.materialize(s)).collect();
        Circuit {
            num_inputs: self.num_inputs,
            gates: self.gates,
            outputs,
        }
    }
}
