//! CLI front end (placeholder).
