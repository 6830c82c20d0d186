use crate::ast::SymbolTable;
use crate::belief::{Belief, LogLinear};
use crate::error::Result;
use crate::semantics::Semantics;

/// A neurosymbolic model: symbols (and so the interpretation space), a
/// semantics for the formula language, and a belief over interpretations.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    table: SymbolTable,
    semantics: Semantics,
    belief: Belief,
}

impl Model {
    pub fn new(table: SymbolTable, semantics: Semantics, belief: Belief) -> Result<Self> {
        // Re-run the belief's own validation against this table.
        belief.with_params(&table, &belief.params())?;
        Ok(Self {
            table,
            semantics,
            belief,
        })
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    pub fn with_semantics(&self, semantics: Semantics) -> Result<Self> {
        Self::new(self.table.clone(), semantics, self.belief.clone())
    }

    pub fn with_belief(&self, belief: Belief) -> Result<Self> {
        Self::new(self.table.clone(), self.semantics, belief)
    }

    /// Replace the belief parameters θ.
    pub fn with_params(&self, theta: &[f64]) -> Result<Self> {
        let belief = self.belief.with_params(&self.table, theta)?;
        Ok(Self {
            belief,
            ..self.clone()
        })
    }

    /// Log-linear belief evaluated under different semantics.
    pub(crate) fn loglinear_with_semantics(
        &self,
        ll: &LogLinear,
        semantics: Semantics,
    ) -> Result<Self> {
        let rebuilt = LogLinear::new(
            &self.table,
            ll.theory().clone(),
            ll.weights().to_vec(),
            semantics,
            ll.base_measure().clone(),
        )?;
        Self::new(self.table.clone(), semantics, Belief::LogLinear(rebuilt))
    }
}
