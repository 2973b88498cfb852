//! Output files and the parallel experiment driver.
//!
//! Experiment cells (scenario x candidate, or one sweep point) are
//! independent; `run_cells` fans them out over a bounded worker pool and
//! returns results in input order, so merged reports never depend on
//! completion order. `UPSCHED_THREADS` caps the pool.

use std::fs;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

/// Worker cap: `UPSCHED_THREADS` when set to a positive integer, otherwise
/// the machine's available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("UPSCHED_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Run `job` over every input on up to `thread_cap()` workers; results come
/// back in input order.
pub fn run_cells<I, T, F>(inputs: &[I], job: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
{
    run_cells_with(thread_cap(), inputs, job)
}

pub fn run_cells_with<I, T, F>(workers: usize, inputs: &[I], job: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
{
    let workers = workers.min(inputs.len());
    if workers <= 1 {
        return inputs.iter().map(&job).collect();
    }
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, T)>> = Mutex::new(Vec::with_capacity(inputs.len()));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= inputs.len() {
                    break;
                }
                let out = job(&inputs[i]);
                done.lock().unwrap().push((i, out));
            });
        }
    });
    let mut tagged = done.into_inner().unwrap();
    tagged.sort_by_key(|&(i, _)| i);
    tagged.into_iter().map(|(_, t)| t).collect()
}

/// Write a report file, creating parent directories as needed.
pub fn write_file(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)
}
