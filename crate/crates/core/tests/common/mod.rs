//! Shared helpers for the integration suites: central finite differences
//! over flat parameter views and tolerance bookkeeping.

/// Central-difference step used across every gradient check.
pub const FD_STEP: f64 = 1e-6;

/// Agreement rule: |a - n| <= atol + rtol * max(|a|, |n|).
pub fn grads_close(analytic: f64, numeric: f64, rtol: f64, atol: f64) -> bool {
    (analytic - numeric).abs() <= atol + rtol * analytic.abs().max(numeric.abs())
}

/// Central finite difference of `f` with respect to one coordinate of a
/// mutable parameter view, restoring the original value afterwards.
pub fn central_diff<T>(
    obj: &mut T,
    slice_idx: usize,
    elem_idx: usize,
    views: &mut dyn FnMut(&mut T) -> Vec<&mut [f64]>,
    f: &mut dyn FnMut(&T) -> f64,
) -> f64 {
    let orig = {
        let mut s = views(obj);
        let v = s[slice_idx][elem_idx];
        s[slice_idx][elem_idx] = v + FD_STEP;
        v
    };
    let fp = f(obj);
    {
        let mut s = views(obj);
        s[slice_idx][elem_idx] = orig - FD_STEP;
    }
    let fm = f(obj);
    {
        let mut s = views(obj);
        s[slice_idx][elem_idx] = orig;
    }
    (fp - fm) / (2.0 * FD_STEP)
}

/// Checks a full analytic gradient (as flat slices) against finite
/// differences of `f`. Panics with context on the first disagreement.
pub fn assert_grads_match<T>(
    obj: &mut T,
    analytic: &[Vec<f64>],
    views: &mut dyn FnMut(&mut T) -> Vec<&mut [f64]>,
    f: &mut dyn FnMut(&T) -> f64,
    rtol: f64,
    atol: f64,
    label: &str,
) {
    for (si, slice) in analytic.iter().enumerate() {
        for (ei, &a) in slice.iter().enumerate() {
            let n = central_diff(obj, si, ei, views, f);
            assert!(
                grads_close(a, n, rtol, atol),
                "{label}: grad[{si}][{ei}] analytic {a} vs numeric {n}"
            );
        }
    }
}

/// Snapshot of flat slices into owned vectors.
pub fn to_owned_slices(slices: &[&[f64]]) -> Vec<Vec<f64>> {
    slices.iter().map(|s| s.to_vec()).collect()
}
