//! Command-line surface (placeholder while modules land).

pub fn run() -> i32 {
    0
}
