//! Exact Euclidean distance transform (Felzenszwalb–Huttenlocher) on binary
//! masks. Distances from every grid cell to the nearest set pixel; squared
//! values are exact integers, so downstream metrics match brute force
//! bit-for-bit.

use crate::edge::EdgeMap;

const INF: f64 = 1e20;

/// 1-D squared distance transform of a sampled function.
fn dt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INF;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
}

/// Squared Euclidean distance from each pixel to the nearest set pixel of
/// the mask. Pixels of the mask map to 0. All-empty masks map to `INF`.
pub fn squared_edt(mask: &EdgeMap) -> Vec<f64> {
    let (w, h) = mask.dimensions();
    let (w, h) = (w as usize, h as usize);
    let mut grid: Vec<f64> = mask
        .mask()
        .iter()
        .map(|&b| if b { 0.0 } else { INF })
        .collect();

    let dim = w.max(h);
    let mut f = vec![0.0; dim];
    let mut d = vec![0.0; dim];
    let mut v = vec![0usize; dim];
    let mut z = vec![0.0; dim + 1];

    // Columns first, then rows.
    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        dt_1d(&f[..h], &mut d[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = d[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        dt_1d(&f[..w], &mut d[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&d[..w]);
    }
    grid
}
