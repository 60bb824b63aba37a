//! Benchmarks for kzbraid live in `benches/`.
