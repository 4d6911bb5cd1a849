//! Data-parallel execution helpers.
//!
//! Grid sweeps, sampling loops and per-level recursion terms are all
//! embarrassingly parallel maps over independent inputs. With the `parallel`
//! feature (default) they run on the rayon pool; without it they fall back to
//! plain sequential iteration. Output order always matches input order, so
//! results are deterministic either way. The explicitly sequential variants
//! stay available for benchmark comparison.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving order.
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Sequential reference implementation of [`map`].
pub fn map_serial<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Maximum of `f` over `items`; returns 0.0 for an empty input.
pub fn max_f64<T, F>(items: Vec<T>, f: F) -> f64
where
    T: Send,
    F: Fn(T) -> f64 + Sync + Send,
{
    map(items, f).into_iter().fold(0.0_f64, f64::max)
}

/// Sequential reference implementation of [`max_f64`].
pub fn max_f64_serial<T, F>(items: Vec<T>, f: F) -> f64
where
    F: Fn(T) -> f64,
{
    items.into_iter().map(f).fold(0.0_f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let xs: Vec<usize> = (0..1000).collect();
        let ys = map(xs.clone(), |x| x * 2);
        let zs = map_serial(xs, |x| x * 2);
        assert_eq!(ys, zs);
    }

    #[test]
    fn max_matches_serial() {
        let xs: Vec<f64> = (0..257).map(|i| ((i * 37) % 101) as f64).collect();
        assert_eq!(max_f64(xs.clone(), |x| x), max_f64_serial(xs, |x| x));
    }
}
