//! Independent grid points on a bounded worker pool, results in input order.

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

/// Evaluates `f` on every item. A point that errors or panics yields `Err`
/// without affecting the others.
pub fn map_points<I, T, F>(workers: usize, items: &[I], f: F) -> Vec<Result<T, String>>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> Result<T, String> + Sync,
{
    let guarded = |item: &I| match catch_unwind(AssertUnwindSafe(|| f(item))) {
        Ok(r) => r,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            Err(format!("panic: {msg}"))
        }
    };
    if workers <= 1 {
        return items.iter().map(guarded).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(guarded).collect()),
        Err(_) => items.iter().map(guarded).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_containment() {
        let items: Vec<u32> = (0..40).collect();
        let out = map_points(4, &items, |&i| {
            if i == 7 {
                panic!("boom at {i}");
            }
            if i == 9 {
                return Err("bad point".into());
            }
            Ok(i * i)
        });
        assert_eq!(out.len(), 40);
        assert_eq!(out[3], Ok(9));
        assert_eq!(out[39], Ok(1521));
        assert!(out[7].as_ref().unwrap_err().contains("boom at 7"));
        assert_eq!(out[9], Err("bad point".to_string()));
    }
}
