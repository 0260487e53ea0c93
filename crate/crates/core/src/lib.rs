//! Synchronous opinion dynamics on small graphs where every vertex updates by
//! a rule applied to its currently positive neighbours. Vertex 0 may follow
//! any rule; the library's analysis side classifies the cycles such systems
//! fall into, tracks a half-integer potential that forces settlement, and
//! runs exhaustive verification sweeps over labelled graph families.

pub mod analysis;
pub mod engine;
pub mod format;
pub mod graph;
pub mod lyapunov;
pub mod presets;
pub mod report;
pub mod rules;

/// A vertex opinion. `Plus` is the "positive" side counted by every rule.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Opinion {
    Plus,
    Minus,
}

impl Opinion {
    #[inline]
    pub fn from_bool(b: bool) -> Opinion {
        if b {
            Opinion::Plus
        } else {
            Opinion::Minus
        }
    }

    #[inline]
    pub fn is_plus(self) -> bool {
        matches!(self, Opinion::Plus)
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Opinion::Plus => 1,
            Opinion::Minus => -1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Opinion::Plus => '+',
            Opinion::Minus => '-',
        }
    }

    pub fn flip(self) -> Opinion {
        match self {
            Opinion::Plus => Opinion::Minus,
            Opinion::Minus => Opinion::Plus,
        }
    }
}

impl std::fmt::Display for Opinion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}
