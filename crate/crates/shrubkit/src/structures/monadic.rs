use std::collections::BTreeMap;

use super::StructureError;

/// A structure over unary predicates only, where each element lies in
/// exactly one predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonadicStructure {
    sigma: Vec<String>,
    elements: BTreeMap<u32, usize>,
}

impl MonadicStructure {
    pub fn new(sigma: Vec<String>, elements: BTreeMap<u32, usize>) -> Result<Self, StructureError> {
        if let Some((_, &c)) = elements.iter().find(|(_, &c)| c >= sigma.len()) {
            return Err(StructureError::PredicateOutOfRange { index: c, len: sigma.len() });
        }
        Ok(MonadicStructure { sigma, elements })
    }

    /// Elements 0, 1, 2, ... assigned class by class.
    pub fn from_counts(sigma: Vec<String>, counts: &[usize]) -> Result<Self, StructureError> {
        if counts.len() != sigma.len() {
            return Err(StructureError::PredicateOutOfRange { index: counts.len(), len: sigma.len() });
        }
        let mut elements = BTreeMap::new();
        let mut next = 0u32;
        for (c, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                elements.insert(next, c);
                next += 1;
            }
        }
        Ok(MonadicStructure { sigma, elements })
    }

    /// Predicate names T1, T2, ...
    pub fn numbered(counts: &[usize]) -> Self {
        let sigma = (1..=counts.len()).map(|i| format!("T{i}")).collect();
        Self::from_counts(sigma, counts).expect("sigma sized to counts")
    }

    pub fn sigma(&self) -> &[String] {
        &self.sigma
    }

    pub fn elements(&self) -> &BTreeMap<u32, usize> {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn class_of(&self, e: u32) -> Option<usize> {
        self.elements.get(&e).copied()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.sigma.len()];
        for &c in self.elements.values() {
            out[c] += 1;
        }
        out
    }

    pub fn members(&self, class: usize) -> impl Iterator<Item = u32> + '_ {
        self.elements.iter().filter(move |(_, &c)| c == class).map(|(&e, _)| e)
    }

    pub fn is_substructure_of(&self, other: &MonadicStructure) -> bool {
        self.sigma == other.sigma
            && self.elements.iter().all(|(e, c)| other.elements.get(e) == Some(c))
    }
}
