use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("gate {position}: qubit {qubit} out of range (circuit has {n_qubits})")]
    QubitOutOfRange { position: usize, qubit: usize, n_qubits: usize },
    #[error("gate {position}: clbit {clbit} out of range (circuit has {n_clbits})")]
    ClbitOutOfRange { position: usize, clbit: usize, n_clbits: usize },
    #[error("gate {position}: qubit {qubit} repeated")]
    DuplicateQubit { position: usize, qubit: usize },
    #[error("gate {position}: `{gate}` expects {expected} operands, found {found}")]
    Arity { position: usize, gate: &'static str, expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceError {
    #[error("invalid device: {0}")]
    Invalid(String),
    #[error("data graph is disconnected: components {0:?}")]
    Disconnected(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("circuit needs {needed} qubits but device has {available} data qubits")]
    TooLarge { needed: usize, available: usize },
    #[error("input contains a composite remote CX at gate {0}")]
    CompositeInput(usize),
    #[error("no legal swap can make gate {0} executable")]
    Stuck(usize),
    #[error("layout is inconsistent: {0}")]
    Layout(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("augmented cx at gate {position} between {control} and {target} has no serving EPR pair")]
    NoServingPair { position: usize, control: usize, target: usize },
    #[error("block {block} ends at gate {end} but the circuit has {len} gates")]
    BlockOutOfRange { block: usize, end: usize, len: usize },
    #[error("gate {position} does not match remote block {block}")]
    BlockMismatch { block: usize, position: usize },
    #[error("gate {0}: augmented edge tag on a non-cx gate")]
    NotCx(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("{needed} qubits exceed the simulator limit of {limit}")]
    TooManyQubits { needed: usize, limit: usize },
    #[error("gate {0} is an unexpanded composite gate")]
    Composite(usize),
    #[error("source circuit contains measurements (gate {0})")]
    SourceMeasured(usize),
    #[error("layout is inconsistent: {0}")]
    Layout(String),
    #[error("branch count exceeded {0}")]
    BranchLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("benchmark mismatch: `{0}` vs `{1}`")]
    Mismatch(String, String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}
