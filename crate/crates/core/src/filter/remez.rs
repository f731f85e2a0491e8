//! Remez exchange for linear-phase type-I (odd length, even symmetric) FIR
//! filters.
//!
//! The design problem is posed on the amplitude function
//! `A(f) = Σ_{k=0..M} a_k cos(2πfk)` with `M = (L−1)/2`: find the degree-M
//! cosine polynomial minimizing the maximum weighted deviation from the
//! desired response over the band union. The exchange iterates the classic
//! steps — barycentric leveled-error solve on the current M+2 reference
//! frequencies, weighted-error evaluation on a dense grid, and reference
//! update to the new error extrema — until the reference deviations equalize.
//!
//! Barycentric weights are computed in log space (with the usual factor-2
//! scaling that keeps the products near unity), so designs remain stable at
//! the several-hundred-tap orders the narrow delta band requires.

use std::f64::consts::TAU;

/// One approximation band on the normalized frequency axis `[0, 0.5]`.
#[derive(Debug, Clone, Copy)]
pub struct RemezBand {
    pub low: f64,
    pub high: f64,
    pub desired: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemezError {
    /// The error curve exposed fewer extrema than the alternation count
    /// requires; a denser grid usually fixes this.
    TooFewExtrema,
    /// The exchange did not level the reference deviations within the
    /// iteration budget.
    NotConverged,
}

#[derive(Debug, Clone)]
pub struct RemezDesign {
    pub taps: Vec<f64>,
    /// Final weighted deviation |δ| on the reference set.
    pub deviation: f64,
}

/// Relative spread of reference deviations at which the exchange is leveled.
/// Much tighter than this and barycentric rounding noise at several hundred
/// taps keeps large designs from ever reporting convergence.
const LEVEL_TOL: f64 = 1e-4;

/// Guard distance in `cos(2πf)` space under which a grid point is treated as
/// coinciding with a reference node.
const NODE_GUARD: f64 = 1e-12;

struct Grid {
    freq: Vec<f64>,
    desired: Vec<f64>,
    weight: Vec<f64>,
    /// Half-open index range of each band's segment.
    segments: Vec<(usize, usize)>,
}

fn build_grid(bands: &[RemezBand], degree: usize, density: usize) -> Grid {
    let delf = 0.5 / (density as f64 * (degree + 1) as f64);
    let mut grid = Grid {
        freq: Vec::new(),
        desired: Vec::new(),
        weight: Vec::new(),
        segments: Vec::new(),
    };
    for band in bands {
        let width = band.high - band.low;
        let count = ((width / delf).round() as usize + 1).max(8);
        let start = grid.freq.len();
        for i in 0..count {
            let f = band.low + width * i as f64 / (count - 1) as f64;
            grid.freq.push(f);
            grid.desired.push(band.desired);
            grid.weight.push(band.weight);
        }
        // Pin the edges exactly against accumulated rounding.
        grid.freq[start] = band.low;
        let end = grid.freq.len();
        grid.freq[end - 1] = band.high;
        grid.segments.push((start, end));
    }
    grid
}

/// Barycentric weights for nodes `x`, up to a common positive scale.
fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut log_mag = vec![0.0f64; n];
    let mut sign = vec![1.0f64; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = 2.0 * (x[i] - x[j]);
            if d < 0.0 {
                sign[i] = -sign[i];
            }
            log_mag[i] += d.abs().ln();
        }
    }
    // b_i = sign_i / Π 2(x_i − x_j); normalize so the largest |b| is 1.
    let min_log = log_mag.iter().cloned().fold(f64::INFINITY, f64::min);
    (0..n).map(|i| sign[i] * (-(log_mag[i] - min_log)).exp()).collect()
}

struct LeveledSolution {
    x: Vec<f64>,
    b: Vec<f64>,
    y: Vec<f64>,
    delta: f64,
}

fn solve_on_reference(grid: &Grid, reference: &[usize]) -> LeveledSolution {
    let x: Vec<f64> = reference.iter().map(|&i| (TAU * grid.freq[i]).cos()).collect();
    let b = barycentric_weights(&x);

    let mut num = 0.0;
    let mut den = 0.0;
    let mut alt = 1.0;
    for (i, &g) in reference.iter().enumerate() {
        num += b[i] * grid.desired[g];
        den += alt * b[i] / grid.weight[g];
        alt = -alt;
    }
    let delta = num / den;

    let mut alt = 1.0;
    let y: Vec<f64> = reference
        .iter()
        .map(|&g| {
            let v = grid.desired[g] - alt * delta / grid.weight[g];
            alt = -alt;
            v
        })
        .collect();

    LeveledSolution { x, b, y, delta }
}

impl LeveledSolution {
    /// Amplitude at `x = cos(2πf)` via the second-kind barycentric formula.
    fn amplitude(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.x.len() {
            let dx = x - self.x[i];
            if dx.abs() < NODE_GUARD {
                return self.y[i];
            }
            let c = self.b[i] / dx;
            num += c * self.y[i];
            den += c;
        }
        num / den
    }
}

/// Weighted error on every grid point.
fn grid_error(grid: &Grid, sol: &LeveledSolution) -> Vec<f64> {
    grid.freq
        .iter()
        .enumerate()
        .map(|(i, &f)| grid.weight[i] * (grid.desired[i] - sol.amplitude((TAU * f).cos())))
        .collect()
}

/// Local extrema of the signed error, scanned per band segment so band edges
/// compete as one-sided extrema.
fn find_candidates(grid: &Grid, err: &[f64]) -> Vec<usize> {
    let mut cands = Vec::new();
    for &(start, end) in &grid.segments {
        for i in start..end {
            let e = err[i];
            let is_peak = if i == start {
                i + 1 < end && ((e > 0.0 && e > err[i + 1]) || (e < 0.0 && e < err[i + 1]))
            } else if i + 1 == end {
                (e > 0.0 && e > err[i - 1]) || (e < 0.0 && e < err[i - 1])
            } else {
                (e > 0.0 && e >= err[i - 1] && e > err[i + 1])
                    || (e < 0.0 && e <= err[i - 1] && e < err[i + 1])
            };
            if is_peak {
                cands.push(i);
            }
        }
    }
    cands
}

/// Prunes candidates down to the alternation count.
///
/// True exchange extrema carry |error| ≥ |δ| of the solution that produced
/// the error curve, so anything clearly below that is evaluation noise and
/// is dropped first (unless that starves the set). Same-sign runs then
/// collapse to their largest member — the leveled solve assumes strictly
/// alternating reference signs. Excess extrema are removed smallest first:
/// an endpoint alone, or an interior point together with its smaller
/// neighbor, both of which preserve alternation.
fn prune_candidates(
    cands: Vec<usize>,
    err: &[f64],
    delta: f64,
    want: usize,
) -> Result<Vec<usize>, RemezError> {
    let threshold = delta.abs() * (1.0 - 1e-6);
    let filtered: Vec<usize> = cands.iter().copied().filter(|&i| err[i].abs() >= threshold).collect();
    let cands = if filtered.len() >= want { filtered } else { cands };

    let mut alt: Vec<usize> = Vec::with_capacity(cands.len());
    for idx in cands {
        match alt.last() {
            Some(&prev) if (err[prev] >= 0.0) == (err[idx] >= 0.0) => {
                if err[idx].abs() > err[prev].abs() {
                    *alt.last_mut().unwrap() = idx;
                }
            }
            _ => alt.push(idx),
        }
    }
    if alt.len() < want {
        return Err(RemezError::TooFewExtrema);
    }

    while alt.len() > want {
        let last = alt.len() - 1;
        let smallest = (0..alt.len())
            .min_by(|&a, &b| err[alt[a]].abs().total_cmp(&err[alt[b]].abs()))
            .unwrap();
        if smallest == 0 {
            alt.remove(0);
        } else if smallest == last {
            alt.pop();
        } else if alt.len() == want + 1 {
            // No room to drop an interior pair; trim the smaller endpoint.
            if err[alt[0]].abs() < err[alt[last]].abs() {
                alt.remove(0);
            } else {
                alt.pop();
            }
        } else {
            let neighbor = if err[alt[smallest - 1]].abs() < err[alt[smallest + 1]].abs() {
                smallest - 1
            } else {
                smallest + 1
            };
            let (a, b) = (smallest.min(neighbor), smallest.max(neighbor));
            alt.remove(b);
            alt.remove(a);
        }
    }
    Ok(alt)
}

/// Designs a type-I filter with `num_taps` coefficients (odd).
pub fn remez_type1(
    num_taps: usize,
    bands: &[RemezBand],
    grid_density: usize,
    max_iterations: usize,
) -> Result<RemezDesign, RemezError> {
    assert!(num_taps % 2 == 1, "type-I design requires an odd tap count");
    assert!(num_taps >= 3);
    let degree = (num_taps - 1) / 2;
    let n_ref = degree + 2;

    let grid = build_grid(bands, degree, grid_density);
    let g = grid.freq.len();
    assert!(g >= n_ref, "dense grid smaller than the reference set");

    let mut reference: Vec<usize> = (0..n_ref).map(|i| i * (g - 1) / (n_ref - 1)).collect();
    reference.dedup();
    if reference.len() < n_ref {
        return Err(RemezError::TooFewExtrema);
    }

    let mut converged = false;
    let mut sol = solve_on_reference(&grid, &reference);
    for _ in 0..max_iterations {
        let err = grid_error(&grid, &sol);
        let cands = find_candidates(&grid, &err);
        reference = prune_candidates(cands, &err, sol.delta, n_ref)?;

        let devs: Vec<f64> = reference.iter().map(|&i| err[i].abs()).collect();
        let max = devs.iter().cloned().fold(0.0, f64::max);
        let min = devs.iter().cloned().fold(f64::INFINITY, f64::min);
        sol = solve_on_reference(&grid, &reference);
        if max > 0.0 && (max - min) <= LEVEL_TOL * max {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(RemezError::NotConverged);
    }

    Ok(RemezDesign {
        taps: impulse_response(num_taps, &sol),
        deviation: sol.delta.abs(),
    })
}

/// Type-I impulse response by frequency sampling the final amplitude at the
/// `L`-point DFT bins.
fn impulse_response(num_taps: usize, sol: &LeveledSolution) -> Vec<f64> {
    let l = num_taps;
    let m = (l - 1) / 2;
    let samples: Vec<f64> = (0..=m)
        .map(|k| sol.amplitude((TAU * k as f64 / l as f64).cos()))
        .collect();

    let mut taps = vec![0.0; l];
    for n in 0..=m {
        let mut acc = samples[0];
        for (k, &a) in samples.iter().enumerate().skip(1) {
            acc += 2.0 * a * (TAU * k as f64 * (n as f64 - m as f64) / l as f64).cos();
        }
        let v = acc / l as f64;
        // Exact type-I symmetry by construction.
        taps[n] = v;
        taps[l - 1 - n] = v;
    }
    taps
}
