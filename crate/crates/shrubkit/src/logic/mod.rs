//! MSO/FO formulas, model checking, formula transforms and the exact
//! equivalence oracles.

mod eval;
mod formula;
mod structure;
mod types;

pub use eval::{holds, model_check, Assignment, Value, SET_QUANTIFIER_LIMIT};
pub use formula::{affine_relabel, fresh_name, is_point_var, is_set_var, relativize, Formula};
pub use structure::{Structure, Vocabulary, MAX_ELEMENTS};
pub use types::{fo_equiv, fo_type, mso_equiv, mso_type, Budget, TypeArena, TypeId};

use crate::structures::MonadicStructure;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("label index {index} exceeds p = {p}")]
    IndexOverflow { index: u32, p: u32 },
    #[error("structure of size {size} exceeds the {limit}-element limit")]
    TooLarge { size: usize, limit: usize },
    #[error("sigma mismatch")]
    SigmaMismatch,
}

/// FO[q]-equivalence of monadic structures in closed form: every predicate
/// has equal counts, or both counts are at least q.
pub fn monadic_fo_equiv(a: &MonadicStructure, b: &MonadicStructure, q: usize) -> Result<bool, LogicError> {
    if a.sigma() != b.sigma() {
        return Err(LogicError::SigmaMismatch);
    }
    Ok(a.counts().iter().zip(b.counts()).all(|(&x, y)| x == y || x.min(y) >= q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monadic_closed_form_examples() {
        let a = MonadicStructure::numbered(&[3, 0]);
        let b = MonadicStructure::numbered(&[5, 0]);
        assert!(monadic_fo_equiv(&a, &b, 3).unwrap());
        let c = MonadicStructure::numbered(&[3, 1]);
        let d = MonadicStructure::numbered(&[3, 0]);
        assert!(!monadic_fo_equiv(&c, &d, 5).unwrap());
        assert!(monadic_fo_equiv(&c, &c, 7).unwrap());
        assert!(monadic_fo_equiv(&a, &MonadicStructure::numbered(&[3]), 1).is_err());
    }
}
