use anyhow::{bail, Result};

pub const THREADS_VAR: &str = "CURVLAB_THREADS";

/// Worker pool capped by `CURVLAB_THREADS` when set.
pub fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_VAR) {
        match value.trim().parse::<usize>() {
            Ok(n) if n > 0 => builder = builder.num_threads(n),
            _ => bail!("{THREADS_VAR} must be a positive integer, got {value:?}"),
        }
    }
    Ok(builder.build()?)
}
