//! Criterion benchmarks for the planner; run with `cargo bench -p epra-bench`.
