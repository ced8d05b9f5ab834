//! Triangulations of the Riemann sphere with the branch points as vertices,
//! lifted to the genus-2 double cover.
//!
//! Every cover triangle carries coordinates in one holomorphic chart:
//! `x` near the finite part of the sphere, `t = 1/x` near infinity, or
//! `w` with `w^2 = x - e` on triangles touching a branch point `e`.

use super::curve::HyperellipticCurve;
use crate::error::{CurvError, Result};
use crate::exec::substream;
use crate::C64;
use rand::RngExt;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub type P3 = [f64; 3];

fn add(a: P3, b: P3) -> P3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn normalize(a: P3) -> P3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Inverse stereographic projection of `x` onto the unit sphere.
pub fn stereo(x: C64) -> P3 {
    let s = x.norm_sqr();
    [2.0 * x.re / (s + 1.0), 2.0 * x.im / (s + 1.0), (s - 1.0) / (s + 1.0)]
}

/// `x` coordinate of a sphere point (infinite at the north pole).
pub fn chart_x(p: P3) -> C64 {
    C64::new(p[0], p[1]) / (1.0 - p[2])
}

/// `t = 1/x` coordinate of a sphere point.
pub fn chart_t(p: P3) -> C64 {
    C64::new(p[0], -p[1]) / (1.0 + p[2])
}

/// Area of the geodesic triangle on the unit sphere.
pub fn spherical_area(a: P3, b: P3, c: P3) -> f64 {
    let num = dot(a, cross(b, c)).abs();
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

#[derive(Clone, Debug)]
pub struct SphereMesh {
    pub verts: Vec<P3>,
    pub tris: Vec<[usize; 3]>,
    /// Vertex carrying each root of the curve.
    pub root_vertex: [usize; 6],
}

impl SphereMesh {
    pub fn branch_of(&self, v: usize) -> Option<usize> {
        self.root_vertex.iter().position(|&r| r == v)
    }

    /// Midpoint subdivision with projection back to the sphere.
    pub fn subdivide(&self) -> Self {
        let mut verts = self.verts.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut tris = Vec::with_capacity(self.tris.len() * 4);
        for t in &self.tris {
            let mut m = [0; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                m[k] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    verts.push(normalize(add(verts[a], verts[b])));
                    verts.len() - 1
                });
            }
            tris.push([t[0], m[0], m[2]]);
            tris.push([t[1], m[1], m[0]]);
            tris.push([t[2], m[2], m[1]]);
            tris.push(m);
        }
        Self { verts, tris, root_vertex: self.root_vertex }
    }

    fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.verts.len()];
        for t in &self.tris {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if !nb[a].contains(&b) {
                    nb[a].push(b);
                }
                if !nb[b].contains(&a) {
                    nb[b].push(a);
                }
            }
        }
        nb
    }

    /// Smallest interior angle (degrees) of the chord triangles.
    pub fn min_angle(&self) -> f64 {
        self.tris
            .iter()
            .map(|t| {
                (0..3)
                    .map(|k| {
                        let (a, b, c) = (self.verts[t[k]], self.verts[t[(k + 1) % 3]], self.verts[t[(k + 2) % 3]]);
                        let (u, v) = (sub(b, a), sub(c, a));
                        (dot(u, v) / (dot(u, u) * dot(v, v)).sqrt()).clamp(-1.0, 1.0).acos().to_degrees()
                    })
                    .fold(180.0, f64::min)
            })
            .fold(180.0, f64::min)
    }

    fn is_positively_oriented(&self) -> bool {
        self.tris.iter().all(|t| {
            let (a, b, c) = (self.verts[t[0]], self.verts[t[1]], self.verts[t[2]]);
            dot(cross(sub(b, a), sub(c, a)), add(add(a, b), c)) > 0.0
        })
    }
}

fn icosahedron() -> SphereMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let verts = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .map(normalize)
    .to_vec();
    let tris = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    SphereMesh { verts, tris, root_vertex: [0; 6] }
}

fn rotation(q: [f64; 4]) -> [[f64; 3]; 3] {
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn apply(r: &[[f64; 3]; 3], p: P3) -> P3 {
    [dot(r[0], p), dot(r[1], p), dot(r[2], p)]
}

/// Base triangulation (80 faces unless the roots are clustered) with each
/// root on its own vertex and no two root vertices adjacent.
pub fn base_mesh(curve: &HyperellipticCurve) -> Result<SphereMesh> {
    let targets: Vec<P3> = curve.roots.iter().map(|&e| stereo(e)).collect();
    let mut ico = icosahedron().subdivide();
    for depth in 1..=5 {
        let nb = ico.neighbors();
        let edge = ico
            .tris
            .iter()
            .map(|t| dot(sub(ico.verts[t[0]], ico.verts[t[1]]), sub(ico.verts[t[0]], ico.verts[t[1]])).sqrt())
            .fold(0.0, f64::max);
        let mut best: Option<(f64, Vec<P3>, [usize; 6])> = None;
        let mut rng = substream(0x5eed_0001, depth as u64);
        for trial in 0..256 {
            let q = if trial == 0 {
                [1.0, 0.0, 0.0, 0.0]
            } else {
                [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5]
            };
            let rot = rotation(q);
            let verts: Vec<P3> = ico.verts.iter().map(|&p| apply(&rot, p)).collect();
            let mut chosen = [usize::MAX; 6];
            let mut worst = 0.0f64;
            for (k, &p) in targets.iter().enumerate() {
                let (v, d) = verts
                    .iter()
                    .enumerate()
                    .map(|(i, &q)| (i, dot(sub(p, q), sub(p, q)).sqrt()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                chosen[k] = v;
                worst = worst.max(d / edge);
            }
            let ok = (0..6).all(|a| (a + 1..6).all(|b| chosen[a] != chosen[b] && !nb[chosen[a]].contains(&chosen[b])));
            if ok && best.as_ref().is_none_or(|b| worst < b.0) {
                best = Some((worst, verts, chosen));
            }
        }
        if let Some((worst, verts, chosen)) = best {
            if worst < 0.45 {
                let mut mesh = SphereMesh { verts, tris: ico.tris.clone(), root_vertex: chosen };
                for (k, &v) in chosen.iter().enumerate() {
                    mesh.verts[v] = targets[k];
                }
                let fixed: Vec<bool> = (0..mesh.verts.len()).map(|v| chosen.contains(&v)).collect();
                for _ in 0..20 {
                    let prev = mesh.verts.clone();
                    for v in 0..prev.len() {
                        if !fixed[v] {
                            let s = nb[v].iter().fold([0.0; 3], |acc, &w| add(acc, prev[w]));
                            mesh.verts[v] = normalize(s);
                        }
                    }
                }
                if mesh.is_positively_oriented() && mesh.min_angle() > 15.0 {
                    return Ok(mesh);
                }
            }
        }
        if depth < 5 {
            ico = ico.subdivide();
        }
    }
    let (mut bi, mut bj, mut bd) = (0, 1, f64::INFINITY);
    for i in 0..6 {
        for j in i + 1..6 {
            let d = (curve.roots[i] - curve.roots[j]).norm();
            if d < bd {
                (bi, bj, bd) = (i, j, d);
            }
        }
    }
    Err(CurvError::NearDegenerateRoots { i: bi, j: bj, distance: bd })
}

pub fn sphere_mesh(curve: &HyperellipticCurve, level: usize) -> Result<SphereMesh> {
    let mut m = base_mesh(curve)?;
    for _ in 0..level {
        m = m.subdivide();
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    X,
    T,
    /// Local uniformizer at the branch point over root `k`.
    W(usize),
}

#[derive(Clone, Debug)]
pub struct CoverVertex {
    pub sphere: usize,
    /// +1 or -1 relative to the principal square root; 0 at branch points.
    pub sheet: i8,
    pub chart: Chart,
    /// Coordinate in `chart`.
    pub z: C64,
}

#[derive(Clone, Debug)]
pub struct CoverTriangle {
    pub verts: [usize; 3],
    pub chart: Chart,
    pub z: [C64; 3],
    pub sphere_tri: usize,
}

#[derive(Clone, Debug)]
pub struct CoverMesh {
    pub curve: HyperellipticCurve,
    pub sphere: SphereMesh,
    pub level: usize,
    pub verts: Vec<CoverVertex>,
    pub tris: Vec<CoverTriangle>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshStats {
    pub level: usize,
    pub sphere_vertices: usize,
    pub sphere_faces: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
}

/// Continue a branch of `sqrt(f)` from `(z0, s0)` to `z1` along a segment.
fn continue_sqrt(f: &dyn Fn(C64) -> C64, z0: C64, z1: C64, s0: C64, steps: usize) -> C64 {
    let mut s = s0;
    for k in 1..=steps {
        let z = z0 + (z1 - z0) * (k as f64 / steps as f64);
        let r = f(z).sqrt();
        s = if (r - s).norm() <= (r + s).norm() { r } else { -r };
    }
    s
}

/// `sqrt(x - e)` with the cut along the ray opposite to angle `phi`.
fn rotated_sqrt(z: C64, phi: f64) -> C64 {
    let rot = C64::from_polar(1.0, phi);
    (z / rot).sqrt() * C64::from_polar(1.0, phi / 2.0)
}

impl CoverMesh {
    pub fn build(curve: &HyperellipticCurve, level: usize) -> Result<Self> {
        let sphere = sphere_mesh(curve, level)?;
        let nv = sphere.verts.len();
        // Vertex charts, reference square roots and cover ids.
        let mut ids = vec![[usize::MAX; 2]; nv];
        let mut verts = Vec::with_capacity(2 * nv);
        let mut reference = vec![C64::new(0.0, 0.0); nv];
        for (v, &p) in sphere.verts.iter().enumerate() {
            if let Some(k) = sphere.branch_of(v) {
                ids[v] = [verts.len(), verts.len()];
                verts.push(CoverVertex { sphere: v, sheet: 0, chart: Chart::W(k), z: C64::new(0.0, 0.0) });
                continue;
            }
            let (chart, z) = if p[2] <= 0.0 { (Chart::X, chart_x(p)) } else { (Chart::T, chart_t(p)) };
            reference[v] = match chart {
                Chart::X => curve.p(z).sqrt(),
                _ => curve.p_tilde(z).sqrt(),
            };
            ids[v] = [verts.len(), verts.len() + 1];
            verts.push(CoverVertex { sphere: v, sheet: 1, chart, z });
            verts.push(CoverVertex { sphere: v, sheet: -1, chart, z });
        }
        let radius: Vec<f64> = (0..6)
            .map(|k| {
                let e = sphere.verts[sphere.root_vertex[k]];
                let d = (0..6)
                    .filter(|&j| j != k)
                    .map(|j| {
                        let f = sphere.verts[sphere.root_vertex[j]];
                        dot(sub(e, f), sub(e, f)).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min);
                BRANCH_DISC * d
            })
            .collect();
        let p_x = |z: C64| curve.p(z);
        let p_t = |z: C64| curve.p_tilde(z);
        let mut tris = Vec::with_capacity(2 * sphere.tris.len());
        for (ti, t) in sphere.tris.iter().enumerate() {
            let pts = t.map(|v| sphere.verts[v]);
            let branch: Vec<(usize, usize)> =
                (0..3).filter_map(|c| sphere.branch_of(t[c]).map(|k| (c, k))).collect();
            if branch.len() > 1 {
                return Err(CurvError::Mesh(format!("triangle {ti} touches two branch points")));
            }
            // Triangles in a fixed disc around a root also use its branched
            // chart, where the metric densities are smooth.
            let near = branch.first().map(|&(_, k)| k).or_else(|| {
                let finite = pts.iter().all(|p| p[2] < 0.999);
                (0..6).find(|&k| {
                    let e = sphere.verts[sphere.root_vertex[k]];
                    finite && pts.iter().any(|&p| dot(sub(p, e), sub(p, e)).sqrt() < radius[k])
                })
            });
            // `lift[c]`: value of the square root at corner c in the vertex
            // chart of that corner, for the first lift; `coords`: chart
            // coordinates of the first lift.
            let mut lift = [C64::new(0.0, 0.0); 3];
            let (chart, coords) = if let Some(k) = near {
                let bc = branch.first().map_or(usize::MAX, |b| b.0);
                let e = curve.roots[k];
                let xs = pts.map(chart_x);
                let xc = (xs[0] + xs[1] + xs[2]) / 3.0;
                let phi = (xc - e).arg();
                let q = |x: C64| curve.q(k, x);
                let q0 = q(e).sqrt();
                let mut w = [C64::new(0.0, 0.0); 3];
                for c in 0..3 {
                    if c == bc {
                        continue;
                    }
                    w[c] = rotated_sqrt(xs[c] - e, phi);
                    let sq = continue_sqrt(&q, e, xs[c], q0, 64);
                    let y = w[c] * sq;
                    lift[c] = match verts[ids[t[c]][0]].chart {
                        Chart::X => y,
                        _ => y / (xs[c] * xs[c] * xs[c]),
                    };
                }
                (Chart::W(k), w)
            } else {
                let chart = if pts.iter().all(|p| p[2] <= 0.6) { Chart::X } else { Chart::T };
                let z = match chart {
                    Chart::X => pts.map(chart_x),
                    _ => pts.map(chart_t),
                };
                let f: &dyn Fn(C64) -> C64 = if chart == Chart::X { &p_x } else { &p_t };
                let zc = (z[0] + z[1] + z[2]) / 3.0;
                let s0 = f(zc).sqrt();
                for c in 0..3 {
                    let s = continue_sqrt(f, zc, z[c], s0, 32);
                    let vchart = verts[ids[t[c]][0]].chart;
                    lift[c] = match (chart, vchart) {
                        (Chart::X, Chart::T) => s / (z[c] * z[c] * z[c]),
                        (Chart::T, Chart::X) => s / (z[c] * z[c] * z[c]),
                        _ => s,
                    };
                }
                (chart, z)
            };
            let mut sheet = [0usize; 3];
            for c in 0..3 {
                if branch.first().is_some_and(|&(bc, _)| bc == c) {
                    continue;
                }
                let r = reference[t[c]];
                sheet[c] = if (lift[c] - r).norm() <= (lift[c] + r).norm() { 0 } else { 1 };
            }
            for s in 0..2 {
                let vs = [0, 1, 2].map(|c| ids[t[c]][sheet[c] ^ s]);
                let z = if s == 0 || !matches!(chart, Chart::W(_)) { coords } else { coords.map(|w| -w) };
                tris.push(CoverTriangle { verts: vs, chart, z, sphere_tri: ti });
            }
        }
        let mesh = Self { curve: curve.clone(), sphere, level, verts, tris };
        mesh.check()?;
        Ok(mesh)
    }

    /// Interior angles (degrees) of a cover triangle in its chart.
    pub fn angles(t: &CoverTriangle) -> [f64; 3] {
        [0, 1, 2].map(|c| {
            let (a, b, o) = (t.z[(c + 1) % 3], t.z[(c + 2) % 3], t.z[c]);
            let (u, v) = (a - o, b - o);
            let cross = (u.conj() * v).im;
            let dotp = (u.conj() * v).re;
            cross.abs().atan2(dotp).to_degrees()
        })
    }

    /// Signed chart area of a cover triangle.
    pub fn signed_area(t: &CoverTriangle) -> f64 {
        0.5 * ((t.z[1] - t.z[0]).conj() * (t.z[2] - t.z[0])).im
    }

    fn check(&self) -> Result<()> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, t) in self.tris.iter().enumerate() {
            for c in 0..3 {
                let e = (t.verts[c], t.verts[(c + 1) % 3]);
                if directed.insert(e, k).is_some() {
                    return Err(CurvError::Mesh(format!("edge {e:?} repeated with one orientation")));
                }
            }
            let ang = Self::angles(t);
            if ang.iter().any(|&a| !(a > 1.0 && a < 178.0)) {
                return Err(CurvError::Mesh(format!("triangle {k} has angles {ang:?} in its chart")));
            }
            if Self::signed_area(t) >= 0.0 {
                return Err(CurvError::Mesh(format!("triangle {k} is inverted in its chart")));
            }
        }
        if let Some(&(a, b)) = directed.keys().find(|&&(a, b)| !directed.contains_key(&(b, a))) {
            return Err(CurvError::Mesh(format!("boundary edge ({a}, {b}) in a closed surface")));
        }
        let stats = self.stats();
        if stats.euler_characteristic != -2 {
            return Err(CurvError::Mesh(format!("Euler characteristic {} instead of -2", stats.euler_characteristic)));
        }
        Ok(())
    }

    pub fn stats(&self) -> MeshStats {
        let mut edges = std::collections::HashSet::new();
        let (mut lo, mut hi) = (180.0f64, 0.0f64);
        for t in &self.tris {
            for c in 0..3 {
                let (a, b) = (t.verts[c], t.verts[(c + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
            for a in Self::angles(t) {
                lo = lo.min(a);
                hi = hi.max(a);
            }
        }
        MeshStats {
            level: self.level,
            sphere_vertices: self.sphere.verts.len(),
            sphere_faces: self.sphere.tris.len(),
            vertices: self.verts.len(),
            edges: edges.len(),
            faces: self.tris.len(),
            euler_characteristic: self.verts.len() as i64 - edges.len() as i64 + self.tris.len() as i64,
            min_angle_deg: lo,
            max_angle_deg: hi,
        }
    }

    /// `x` coordinate of a cover vertex (`None` over infinity).
    pub fn x_of(&self, v: usize) -> Option<C64> {
        let p = self.sphere.verts[self.verts[v].sphere];
        (p[2] < 1.0 - 1e-14).then(|| chart_x(p))
    }

    /// Point of the unit sphere under a cover vertex.
    pub fn sphere_point(&self, v: usize) -> P3 {
        self.sphere.verts[self.verts[v].sphere]
    }
}

impl Chart {
    /// `x` at chart coordinate `z` (`None` at infinity).
    pub fn x(self, curve: &HyperellipticCurve, z: C64) -> Option<C64> {
        match self {
            Chart::X => Some(z),
            Chart::T => (z.norm() > 0.0).then(|| z.inv()),
            Chart::W(k) => Some(curve.roots[k] + z * z),
        }
    }

    /// Density of the background metric `rho |dz|^2`, which is the
    /// pullback of `(1 + |x|^2) |dx|^2 / |p(x)|`.
    pub fn density(self, curve: &HyperellipticCurve, z: C64) -> f64 {
        match self {
            Chart::X => (1.0 + z.norm_sqr()) / curve.p(z).norm(),
            Chart::T => (1.0 + z.norm_sqr()) / curve.p_tilde(z).norm(),
            Chart::W(k) => {
                let x = curve.roots[k] + z * z;
                4.0 * (1.0 + x.norm_sqr()) / curve.q(k, x).norm()
            }
        }
    }

    /// Coefficient of `x^alpha (dx)^2 / y^2` in this chart, `alpha` in 0..3.
    pub fn differential(self, curve: &HyperellipticCurve, z: C64, alpha: usize) -> C64 {
        match self {
            Chart::X => z.powu(alpha as u32) / curve.p(z),
            Chart::T => z.powu(2 - alpha as u32) / curve.p_tilde(z),
            Chart::W(k) => {
                let x = curve.roots[k] + z * z;
                x.powu(alpha as u32) * 4.0 / curve.q(k, x)
            }
        }
    }
}

/// Radius of the branched-chart disc around a root, as a fraction of the
/// chordal distance to the nearest other root.
pub const BRANCH_DISC: f64 = 0.3;

/// Radius (in `x`) inside which points are evaluated in a branched chart.
pub const BRANCH_RADIUS: f64 = 1e-8;

/// Chart and coordinate for evaluating at `x`: the branched coordinate
/// near a root, `t` for large `|x|`, `x` otherwise. Near a root the branch
/// of `w = sqrt(x - e)` is the principal one.
pub fn chart_at(curve: &HyperellipticCurve, x: C64) -> (Chart, C64) {
    if let Some(k) = (0..6).find(|&k| (x - curve.roots[k]).norm() < BRANCH_RADIUS) {
        return (Chart::W(k), (x - curve.roots[k]).sqrt());
    }
    if x.norm() > 1.0 {
        (Chart::T, x.inv())
    } else {
        (Chart::X, x)
    }
}
