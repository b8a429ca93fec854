//! Command-line interface (placeholder while the pipeline is under construction).

pub fn run() -> i32 {
    0
}
