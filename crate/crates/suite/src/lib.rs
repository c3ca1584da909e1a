//! Acceptance criteria for the minmax experiments; see `tests/acceptance.rs`.
