//! Deterministic fork-join helpers.
//!
//! Work is split into contiguous index ranges, one per worker, and results are
//! concatenated in index order. Combined with counter-based randomness keyed
//! by index, the output of a parallel run is byte-identical for any worker
//! count or scheduling.

/// Resolve a worker count: explicit request, else `RESERVE_LAB_THREADS`,
/// else the machine's available parallelism.
pub fn thread_count(requested: Option<usize>) -> usize {
    if let Some(n) = requested {
        return n.max(1);
    }
    if let Ok(s) = std::env::var("RESERVE_LAB_THREADS") {
        if let Ok(n) = s.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Map `f` over `0..n` on `threads` workers; results in index order.
pub fn par_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.clamp(1, n.max(1));
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let mut out: Vec<T> = Vec::with_capacity(n);
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..threads)
            .map(|k| {
                let lo = k * chunk;
                let hi = ((k + 1) * chunk).min(n);
                scope.spawn(move || (lo..hi).map(f).collect::<Vec<T>>())
            })
            .collect();
        for h in handles {
            out.extend(h.join().expect("worker panicked"));
        }
    });
    out
}
