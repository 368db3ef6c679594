use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node id {node} is out of range for a graph with {n} nodes")]
    InvalidNode { node: usize, n: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("source and target are adjacent, so every coalition is connected and the game is flat")]
    TriviallyConnected,

    #[error("{players} players exceed the enumeration limit of {limit}")]
    TooManyPlayers { players: usize, limit: usize },

    #[error("node {0} is not an intermediate node")]
    NotAPlayer(usize),

    #[error("coalition has width {got}, expected {expected}")]
    CoalitionWidth { got: usize, expected: usize },

    #[error("{needed} qubits exceed the simulator cap of {cap}")]
    Capacity { needed: usize, cap: usize },

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("source and target are disconnected even with every node enabled")]
    NoConnection,
}

pub type Result<T> = std::result::Result<T, Error>;
