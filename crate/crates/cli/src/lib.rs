//! Command implementations behind the `gsav` binary.

pub mod assets;
pub mod commands;
pub mod serve;
pub mod session;

/// Size the global worker pool; `None` keeps rayon's default.
pub fn init_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}
