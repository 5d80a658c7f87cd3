//! n-dimensional complex FFT built from 1-d rustfft plans.
//!
//! Convention: forward transform is unnormalized, the inverse carries the
//! full 1/size^dim factor, so inverse(forward(f)) = f.

use crate::grid::Grid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Clone)]
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(size: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(size)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Plans {
                forward: planner.plan_fft_forward(size),
                inverse: planner.plan_fft_inverse(size),
            }
        })
        .clone()
}

/// Transform along one axis of a row-major [size; dim] array. `stride` is the
/// element distance along the axis; lines are gathered into a scratch buffer
/// except for the contiguous last axis.
fn transform_axis(
    fft: &Arc<dyn Fft<f64>>,
    data: &mut [Complex64],
    size: usize,
    axis: usize,
    dim: usize,
) {
    if axis == dim - 1 {
        // contiguous lines: rustfft processes the whole buffer chunk-wise
        fft.process(data);
        return;
    }
    let stride = size.pow((dim - 1 - axis) as u32);
    let mut line = vec![Complex64::default(); size];
    // iterate over every line start: indices whose axis-coordinate is zero
    let n = data.len();
    let block = stride * size; // span of one full axis sweep
    let mut base = 0;
    while base < n {
        for off in 0..stride {
            let start = base + off;
            for t in 0..size {
                line[t] = data[start + t * stride];
            }
            fft.process(&mut line);
            for t in 0..size {
                data[start + t * stride] = line[t];
            }
        }
        base += block;
    }
}

pub fn forward(grid: &Grid, data: &mut [Complex64]) {
    debug_assert_eq!(data.len(), grid.len());
    let p = plans(grid.size());
    for axis in 0..grid.dim() {
        transform_axis(&p.forward, data, grid.size(), axis, grid.dim());
    }
}

pub fn inverse(grid: &Grid, data: &mut [Complex64]) {
    debug_assert_eq!(data.len(), grid.len());
    let p = plans(grid.size());
    for axis in 0..grid.dim() {
        transform_axis(&p.inverse, data, grid.size(), axis, grid.dim());
    }
    let scale = 1.0 / grid.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}
