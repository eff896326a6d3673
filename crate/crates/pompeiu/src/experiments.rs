//! Counterexample reproductions (placeholder).
