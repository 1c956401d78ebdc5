//! Host crate for the `acceptance` test target; no library code.
