//! Identity verification (placeholder).
