//! Solution operator assembly (placeholder).
