//! Multistart extremization of a function on a product of unit spheres.

use crate::exec::{map_range, substream};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Product of unit spheres; `blocks` lists the ambient real dimension of each.
#[derive(Clone, Debug)]
pub struct SphereProduct {
    pub blocks: Vec<usize>,
}

impl SphereProduct {
    pub fn new(blocks: Vec<usize>) -> Self {
        Self { blocks }
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = StandardNormal.sample(rng);
        }
        self.retract(out);
    }

    /// Normalize each block; a vanishing block is replaced by a unit axis.
    pub fn retract(&self, x: &mut [f64]) {
        let mut off = 0;
        for &d in &self.blocks {
            let b = &mut x[off..off + d];
            let nn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nn > 1e-300 {
                b.iter_mut().for_each(|v| *v /= nn);
            } else {
                b.iter_mut().for_each(|v| *v = 0.0);
                b[0] = 1.0;
            }
            off += d;
        }
    }

    /// Remove the radial component of `g` in each block.
    pub fn project(&self, x: &[f64], g: &mut [f64]) {
        let mut off = 0;
        for &d in &self.blocks {
            let dot: f64 = (off..off + d).map(|k| x[k] * g[k]).sum();
            for k in off..off + d {
                g[k] -= dot * x[k];
            }
            off += d;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub samples: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Random-stream namespace, so that different objectives sample
    /// independently under one seed.
    pub stream: u64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub fd_step: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            restarts: 20,
            seed: 0,
            stream: 0,
            max_iter: 200,
            grad_tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub value: f64,
    pub point: Vec<f64>,
}

/// Best points found by sampling, for both directions.
#[derive(Clone, Debug)]
pub struct SampleExtremes {
    pub lowest: Vec<Candidate>,
    pub highest: Vec<Candidate>,
}

const CHUNK: usize = 256;

fn keep(best: &mut Vec<Candidate>, c: Candidate, k: usize, better: impl Fn(f64, f64) -> bool) {
    if best.len() < k {
        best.push(c);
    } else if let Some(worst) = (0..best.len()).reduce(|a, b| if better(best[a].value, best[b].value) { b } else { a }) {
        if better(c.value, best[worst].value) {
            best[worst] = c;
        }
    }
}

fn sorted(mut v: Vec<Candidate>, ascending: bool) -> Vec<Candidate> {
    v.sort_by(|a, b| {
        let o = a.value.total_cmp(&b.value);
        if ascending {
            o
        } else {
            o.reverse()
        }
    });
    v
}

/// Evaluate `f` at `opts.samples` random points; keep the `opts.restarts`
/// lowest and highest. Non-finite values are skipped.
pub fn sample_extremes<F>(space: &SphereProduct, f: &F, opts: &SearchOptions) -> SampleExtremes
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let k = opts.restarts.max(1);
    let chunks = opts.samples.div_ceil(CHUNK);
    let parts = map_range(chunks, |c| {
        let mut rng = substream(opts.seed, (opts.stream << 32) | c as u64);
        let count = CHUNK.min(opts.samples - c * CHUNK);
        let mut lo = Vec::with_capacity(k);
        let mut hi = Vec::with_capacity(k);
        let mut x = vec![0.0; space.dim()];
        for _ in 0..count {
            space.sample(&mut rng, &mut x);
            let v = f(&x);
            if !v.is_finite() {
                continue;
            }
            keep(&mut lo, Candidate { value: v, point: x.clone() }, k, |a, b| a < b);
            keep(&mut hi, Candidate { value: v, point: x.clone() }, k, |a, b| a > b);
        }
        (lo, hi)
    });
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (l, h) in parts {
        for c in l {
            keep(&mut lo, c, k, |a, b| a < b);
        }
        for c in h {
            keep(&mut hi, c, k, |a, b| a > b);
        }
    }
    SampleExtremes { lowest: sorted(lo, true), highest: sorted(hi, false) }
}

fn gradient<F: Fn(&[f64]) -> f64>(space: &SphereProduct, f: &F, x: &[f64], h: f64, g: &mut [f64]) {
    let mut y = x.to_vec();
    for k in 0..x.len() {
        y[k] = x[k] + h;
        let fp = f(&y);
        y[k] = x[k] - h;
        let fm = f(&y);
        y[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    space.project(x, g);
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Projected gradient ascent from `start` with central-difference gradients,
/// Barzilai-Borwein step proposals and step halving on failure.
pub fn ascend<F>(space: &SphereProduct, f: &F, start: &Candidate, opts: &SearchOptions) -> Candidate
where
    F: Fn(&[f64]) -> f64,
{
    let dim = space.dim();
    let mut x = start.point.clone();
    let mut fx = start.value;
    let mut g = vec![0.0; dim];
    gradient(space, f, &x, opts.fd_step, &mut g);
    let mut step = 0.1 / norm(&g).max(1e-12);
    let mut trial = vec![0.0; dim];
    let mut g_new = vec![0.0; dim];
    let mut stalls = 0;
    for _ in 0..opts.max_iter {
        let gn = norm(&g);
        if !(gn >= opts.grad_tol) {
            break;
        }
        let mut accepted = None;
        for _ in 0..50 {
            for k in 0..dim {
                trial[k] = x[k] + step * g[k];
            }
            space.retract(&mut trial);
            let ft = f(&trial);
            if ft.is_finite() && ft > fx {
                accepted = Some(ft);
                break;
            }
            step *= 0.5;
        }
        let Some(ft) = accepted else { break };
        gradient(space, f, &trial, opts.fd_step, &mut g_new);
        let mut ss = 0.0;
        let mut sy = 0.0;
        for k in 0..dim {
            let s = trial[k] - x[k];
            let y = g_new[k] - g[k];
            ss += s * s;
            sy += s * y;
        }
        step = if sy < 0.0 { (ss / -sy).clamp(1e-12, 1e6) } else { (2.0 * step).min(1e6) };
        if ft - fx <= 1e-15 * (1.0 + fx.abs()) {
            stalls += 1;
            if stalls >= 5 {
                x.copy_from_slice(&trial);
                fx = ft;
                break;
            }
        } else {
            stalls = 0;
        }
        x.copy_from_slice(&trial);
        g.copy_from_slice(&g_new);
        fx = ft;
    }
    Candidate { value: fx, point: x }
}

/// Refine candidates in parallel and return the best; `maximize = false`
/// minimizes.
pub fn refine<F>(space: &SphereProduct, f: &F, starts: &[Candidate], maximize: bool, opts: &SearchOptions) -> Option<Candidate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sign = if maximize { 1.0 } else { -1.0 };
    let g = |x: &[f64]| sign * f(x);
    let results = map_range(starts.len(), |k| {
        let s = Candidate { value: sign * starts[k].value, point: starts[k].point.clone() };
        let c = ascend(space, &g, &s, opts);
        Candidate { value: sign * c.value, point: c.point }
    });
    results.into_iter().reduce(|a, b| {
        let better = if maximize { b.value > a.value } else { b.value < a.value };
        if better {
            b
        } else {
            a
        }
    })
}
