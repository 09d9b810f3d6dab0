//! Oriented, self-intersecting contours in the zeta and lambda planes.
//!
//! Every arc carries a parameterization over [-1, 1] with `t = -1` at its
//! start. Segments, truncated rays and circular arcs are Möbius images of
//! [-1, 1]; this is what the Cauchy assembly relies on.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cheb::{lobatto, ChebBasis, Side};
use crate::error::{Error, Result};

const NODE_TOL: f64 = 1e-12;

/// `t -> (a t + b) / (c t + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn eval(&self, t: C64) -> C64 {
        (self.a * t + self.b) / (self.c * t + self.d)
    }

    pub fn deriv(&self, t: C64) -> C64 {
        let den = self.c * t + self.d;
        (self.a * self.d - self.b * self.c) / (den * den)
    }

    pub fn inverse(&self, z: C64) -> C64 {
        (self.d * z - self.b) / (self.a - self.c * z)
    }

    /// Preimage of infinity, if finite.
    pub fn pole(&self) -> Option<C64> {
        if self.c.norm() == 0.0 {
            None
        } else {
            Some(-self.d / self.c)
        }
    }

    fn flipped(&self) -> Mobius {
        Mobius {
            a: -self.a,
            b: self.b,
            c: -self.c,
            d: self.d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    Segment,
    Ray,
    CircularArc,
    EllipticalArc,
}

/// Canonical geometry; orientation is carried separately by [`Arc::forward`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    /// from `a` to `b`
    Segment { a: C64, b: C64 },
    /// outward from `origin` along the unit vector `dir`, truncated at
    /// distance `cutoff`; `scale` is the algebraic map length
    Ray {
        origin: C64,
        dir: C64,
        scale: f64,
        cutoff: f64,
    },
    /// counter-clockwise from `theta0` to `theta1`
    Circular {
        center: C64,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
    /// counter-clockwise from `theta0` to `theta1`, angle-parameterized
    Elliptical {
        center: C64,
        semi: (f64, f64),
        theta0: f64,
        theta1: f64,
    },
}

/// Which jump formula lives on an arc.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Piece {
    /// the real (or imaginary, in zeta) line outside the circle
    Outer,
    /// the same lines inside the circle
    Inner,
    /// arcs mapping to the upper lambda semicircle (lower-triangular jump)
    CircleUpper,
    /// arcs mapping to the lower lambda semicircle (upper-triangular jump)
    CircleLower,
    /// the added ellipse of the modified contour (identity jump)
    Ellipse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub geom: Geometry,
    /// false when traversed against the canonical direction
    pub forward: bool,
    pub n: usize,
    /// region index on the left of the traversal
    pub plus: usize,
    /// region index on the right
    pub minus: usize,
    pub piece: Piece,
}

impl Arc {
    pub fn kind(&self) -> ArcKind {
        match self.geom {
            Geometry::Segment { .. } => ArcKind::Segment,
            Geometry::Ray { .. } => ArcKind::Ray,
            Geometry::Circular { .. } => ArcKind::CircularArc,
            Geometry::Elliptical { .. } => ArcKind::EllipticalArc,
        }
    }

    fn canonical_mobius(&self) -> Option<Mobius> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match self.geom {
            Geometry::Segment { a, b } => Some(Mobius {
                a: (b - a) * 0.5,
                b: (a + b) * 0.5,
                c: zero,
                d: one,
            }),
            Geometry::Ray {
                origin,
                dir,
                scale,
                cutoff,
            } => {
                let s1 = (cutoff - scale) / (cutoff + scale);
                let k = 0.5 * (s1 + 1.0);
                let l = dir * scale * k;
                Some(Mobius {
                    a: l - origin * k,
                    b: origin * (2.0 - k) + l,
                    c: C64::new(-k, 0.0),
                    d: C64::new(2.0 - k, 0.0),
                })
            }
            Geometry::Circular {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let tm = 0.5 * (theta0 + theta1);
                let k = (0.25 * (theta1 - theta0)).tan();
                let w = C64::from_polar(radius, tm);
                let ik = C64::new(0.0, k);
                Some(Mobius {
                    a: ik * (w - center),
                    b: center + w,
                    c: -ik,
                    d: one,
                })
            }
            Geometry::Elliptical { .. } => None,
        }
    }

    /// Oriented Möbius parameterization (`None` for ellipses).
    pub fn mobius(&self) -> Option<Mobius> {
        let m = self.canonical_mobius()?;
        Some(if self.forward { m } else { m.flipped() })
    }

    pub fn point(&self, t: f64) -> C64 {
        match self.mobius() {
            Some(m) => m.eval(C64::new(t, 0.0)),
            None => {
                let s = if self.forward { t } else { -t };
                let (center, semi, th) = self.ellipse_angle(s);
                center + C64::new(semi.0 * th.cos(), semi.1 * th.sin())
            }
        }
    }

    /// `d point / dt`.
    pub fn deriv(&self, t: f64) -> C64 {
        match self.mobius() {
            Some(m) => m.deriv(C64::new(t, 0.0)),
            None => {
                let sg = if self.forward { 1.0 } else { -1.0 };
                let s = sg * t;
                let (_, semi, th) = self.ellipse_angle(s);
                let (t0, t1) = match self.geom {
                    Geometry::Elliptical { theta0, theta1, .. } => (theta0, theta1),
                    _ => unreachable!(),
                };
                let dth = 0.5 * (t1 - t0) * sg;
                C64::new(-semi.0 * th.sin(), semi.1 * th.cos()) * dth
            }
        }
    }

    fn ellipse_angle(&self, s: f64) -> (C64, (f64, f64), f64) {
        match self.geom {
            Geometry::Elliptical {
                center,
                semi,
                theta0,
                theta1,
            } => (center, semi, theta0 + 0.5 * (theta1 - theta0) * (s + 1.0)),
            _ => unreachable!(),
        }
    }

    pub fn start(&self) -> C64 {
        self.point(-1.0)
    }

    pub fn end(&self) -> C64 {
        self.point(1.0)
    }

    /// Endpoint that is a contour node (the far end of a ray is not).
    pub fn has_node_at(&self, at_end: bool) -> bool {
        match self.geom {
            Geometry::Ray { .. } => at_end != self.forward,
            _ => true,
        }
    }

    pub fn nodes(&self) -> Vec<C64> {
        lobatto(self.n).into_iter().map(|t| self.point(t)).collect()
    }

    /// Same arc traversed the other way; region labels swap.
    pub fn reversed(&self) -> Arc {
        Arc {
            forward: !self.forward,
            plus: self.minus,
            minus: self.plus,
            ..self.clone()
        }
    }

    /// Closest point on the arc (rays extended to infinity) and the unit
    /// tangent there.
    fn closest(&self, z: C64) -> (C64, C64) {
        let sg = if self.forward { 1.0 } else { -1.0 };
        match self.geom {
            Geometry::Segment { a, b } => {
                let d = b - a;
                let s = ((z - a) * d.conj()).re / d.norm_sqr();
                let s = s.clamp(0.0, 1.0);
                (a + d * s, d / d.norm() * sg)
            }
            Geometry::Ray { origin, dir, .. } => {
                let s = ((z - origin) * dir.conj()).re.max(0.0);
                (origin + dir * s, dir * sg)
            }
            Geometry::Circular {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let mut th = (z - center).arg();
                while th < theta0 {
                    th += 2.0 * PI;
                }
                while th > theta0 + 2.0 * PI {
                    th -= 2.0 * PI;
                }
                if th > theta1 {
                    let to0 = 2.0 * PI - (th - theta0);
                    th = if to0 < th - theta1 { theta0 } else { theta1 };
                }
                let p = center + C64::from_polar(radius, th);
                (p, C64::new(-th.sin(), th.cos()) * sg)
            }
            Geometry::Elliptical { .. } => {
                let mut best = (f64::INFINITY, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                let m = 4096;
                for i in 0..=m {
                    let t = -1.0 + 2.0 * i as f64 / m as f64;
                    let p = self.point(t);
                    let d = (z - p).norm();
                    if d < best.0 {
                        let tg = self.deriv(t);
                        best = (d, p, tg / tg.norm());
                    }
                }
                (best.1, best.2)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub name: String,
    pub sign: Side,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Incidence {
    pub arc: usize,
    /// the arc starts at this node
    pub outgoing: bool,
    /// direction (radians in [0, 2 pi)) in which the arc leaves the node
    pub angle: f64,
    /// direction of a short chord into the arc; orders arcs that leave
    /// with a common tangent
    pub bend: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub z: C64,
    /// incident arcs sorted counter-clockwise by `angle`
    pub incident: Vec<Incidence>,
}

/// Resolution and truncation settings for the builders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourConfig {
    pub n_arc: usize,
    pub n_ray: usize,
    /// ray map length `L` as a multiple of the circle radius (lambda: of `S_inf`)
    pub ray_scale: f64,
    /// lambda rays stop at `cutoff * S_inf`; zeta rays at `sqrt` of that
    pub ray_cutoff: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            n_arc: 64,
            n_ray: 96,
            ray_scale: 2.0,
            ray_cutoff: 40.0,
        }
    }
}

impl ContourConfig {
    pub fn scaled(&self, factor: f64) -> ContourConfig {
        ContourConfig {
            n_arc: ((self.n_arc as f64 * factor).round() as usize).max(4),
            n_ray: ((self.n_ray as f64 * factor).round() as usize).max(4),
            ..*self
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContourGraph {
    pub arcs: Vec<Arc>,
    pub nodes: Vec<Node>,
    pub regions: Vec<Region>,
}

fn angle_of(d: C64) -> f64 {
    let a = d.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

impl ContourGraph {
    /// Assembles nodes from coinciding arc endpoints.
    pub fn from_arcs(arcs: Vec<Arc>, regions: Vec<Region>) -> Result<ContourGraph> {
        let mut nodes: Vec<Node> = Vec::new();
        for (i, arc) in arcs.iter().enumerate() {
            if arc.n < 4 {
                return Err(Error::Contour(format!("arc {i} has fewer than 4 nodes")));
            }
            if arc.plus >= regions.len() || arc.minus >= regions.len() {
                return Err(Error::Contour(format!("arc {i} references an unknown region")));
            }
            for at_end in [false, true] {
                if !arc.has_node_at(at_end) {
                    continue;
                }
                let (z, dir, inner) = if at_end {
                    (arc.end(), -arc.deriv(1.0), arc.point(1.0 - 1e-3))
                } else {
                    (arc.start(), arc.deriv(-1.0), arc.point(-1.0 + 1e-3))
                };
                let inc = Incidence {
                    arc: i,
                    outgoing: !at_end,
                    angle: angle_of(dir),
                    bend: angle_of(inner - z),
                };
                match nodes.iter_mut().find(|nd| (nd.z - z).norm() <= NODE_TOL * (1.0 + z.norm())) {
                    Some(nd) => nd.incident.push(inc),
                    None => nodes.push(Node {
                        z,
                        incident: vec![inc],
                    }),
                }
            }
        }
        for nd in nodes.iter_mut() {
            nd.incident.sort_by(|a, b| {
                if (a.angle - b.angle).abs() < 1e-9 {
                    a.bend.total_cmp(&b.bend)
                } else {
                    a.angle.total_cmp(&b.angle)
                }
            });
        }
        let g = ContourGraph {
            arcs,
            nodes,
            regions,
        };
        Ok(g)
    }

    pub fn n_total(&self) -> usize {
        self.arcs.iter().map(|a| a.n).sum()
    }

    /// Start of each arc's block in stacked node vectors.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.arcs.len());
        let mut s = 0;
        for a in &self.arcs {
            off.push(s);
            s += a.n;
        }
        off
    }

    /// One shared basis per distinct node count.
    pub fn bases(&self) -> Vec<ChebBasis> {
        let mut out: Vec<ChebBasis> = Vec::new();
        for a in &self.arcs {
            if !out.iter().any(|b| b.n == a.n) {
                out.push(ChebBasis::new(a.n));
            }
        }
        out
    }

    /// Region containing `z` (read off the nearest arc's side).
    pub fn region_at(&self, z: C64) -> Option<usize> {
        let mut best: Option<(f64, usize, bool)> = None;
        for (i, arc) in self.arcs.iter().enumerate() {
            let (p, tg) = arc.closest(z);
            let d = (z - p).norm();
            let s = (tg.conj() * (z - p)).im;
            if d < 1e-14 {
                return None;
            }
            if best.map_or(true, |b| d < b.0 - 1e-14) {
                best = Some((d, i, s > 0.0));
            }
        }
        best.map(|(_, i, left)| {
            if left {
                self.arcs[i].plus
            } else {
                self.arcs[i].minus
            }
        })
    }

    pub fn side_at(&self, z: C64) -> Option<Side> {
        self.region_at(z).map(|r| self.regions[r].sign)
    }

    /// Face two-colouring check by walking the arcs around every node.
    pub fn check_complete(&self) -> Result<()> {
        for (i, a) in self.arcs.iter().enumerate() {
            if self.regions[a.plus].sign != Side::Plus || self.regions[a.minus].sign != Side::Minus {
                return Err(Error::Contour(format!("arc {i}: side labels do not match region signs")));
            }
        }
        for (k, nd) in self.nodes.iter().enumerate() {
            let m = nd.incident.len();
            if m < 2 || m % 2 == 1 {
                return Err(Error::Contour(format!("node {k} has {m} incident arcs")));
            }
            for j in 0..m {
                let a = nd.incident[j];
                let b = nd.incident[(j + 1) % m];
                let arc_a = &self.arcs[a.arc];
                let arc_b = &self.arcs[b.arc];
                // face just counter-clockwise of a / clockwise of b
                let from_a = if a.outgoing { arc_a.plus } else { arc_a.minus };
                let from_b = if b.outgoing { arc_b.minus } else { arc_b.plus };
                if from_a != from_b {
                    return Err(Error::Contour(format!(
                        "node {k}: face between arcs {} and {} labelled inconsistently",
                        a.arc, b.arc
                    )));
                }
            }
        }
        Ok(())
    }

    /// Index of the node at `z`, if any.
    pub fn node_at(&self, z: C64) -> Option<usize> {
        self.nodes
            .iter()
            .position(|nd| (nd.z - z).norm() <= NODE_TOL * (1.0 + z.norm()))
    }
}

fn region(name: &str, sign: Side) -> Region {
    Region {
        name: name.to_string(),
        sign,
    }
}

fn ray(origin: C64, dir: C64, scale: f64, cutoff: f64, forward: bool, n: usize, plus: usize, minus: usize) -> Arc {
    Arc {
        geom: Geometry::Ray {
            origin,
            dir,
            scale,
            cutoff,
        },
        forward,
        n,
        plus,
        minus,
        piece: Piece::Outer,
    }
}

fn segment(a: C64, b: C64, n: usize, plus: usize, minus: usize) -> Arc {
    Arc {
        geom: Geometry::Segment { a, b },
        forward: true,
        n,
        plus,
        minus,
        piece: Piece::Inner,
    }
}

fn circ(r: f64, theta0: f64, theta1: f64, forward: bool, n: usize, plus: usize, minus: usize, piece: Piece) -> Arc {
    Arc {
        geom: Geometry::Circular {
            center: C64::new(0.0, 0.0),
            radius: r,
            theta0,
            theta1,
        },
        forward,
        n,
        plus,
        minus,
        piece,
    }
}

/// The augmented zeta-plane contour: both axes plus the circle `|zeta| = r`.
pub fn build_zeta_contour(r: f64, cfg: &ContourConfig) -> ContourGraph {
    assert!(r > 0.0);
    let regions = vec![
        region("Omega1", Side::Plus),
        region("Omega2", Side::Minus),
        region("Omega3", Side::Plus),
        region("Omega4", Side::Minus),
        region("Omega5", Side::Minus),
        region("Omega6", Side::Plus),
        region("Omega7", Side::Minus),
        region("Omega8", Side::Plus),
    ];
    let (na, nr) = (cfg.n_arc, cfg.n_ray);
    let sc = cfg.ray_scale * 0.5 * r;
    let cut = r * cfg.ray_cutoff.sqrt() - r;
    let c = |x: f64, y: f64| C64::new(x, y);
    let arcs = vec![
        // rays: real ones outward, imaginary ones inward
        ray(c(r, 0.0), c(1.0, 0.0), sc, cut, true, nr, 0, 3),
        ray(c(-r, 0.0), c(-1.0, 0.0), sc, cut, true, nr, 2, 1),
        ray(c(0.0, r), c(0.0, 1.0), sc, cut, false, nr, 0, 1),
        ray(c(0.0, -r), c(0.0, -1.0), sc, cut, false, nr, 2, 3),
        // inner half-axes
        segment(c(r, 0.0), c(0.0, 0.0), na, 7, 4),
        segment(c(-r, 0.0), c(0.0, 0.0), na, 5, 6),
        segment(c(0.0, 0.0), c(0.0, r), na, 5, 4),
        segment(c(0.0, 0.0), c(0.0, -r), na, 7, 6),
        // circle quadrants
        circ(r, 0.0, 0.5 * PI, false, na, 0, 4, Piece::CircleUpper),
        circ(r, 0.5 * PI, PI, true, na, 5, 1, Piece::CircleLower),
        circ(r, PI, 1.5 * PI, false, na, 2, 6, Piece::CircleUpper),
        circ(r, 1.5 * PI, 2.0 * PI, true, na, 7, 3, Piece::CircleLower),
    ];
    ContourGraph::from_arcs(arcs, regions).expect("zeta contour construction")
}

/// The augmented lambda-plane contour: the real line plus `|lambda| = s_inf`.
pub fn build_lambda_contour(s_inf: f64, cfg: &ContourConfig) -> ContourGraph {
    assert!(s_inf > 0.0);
    let regions = lambda_regions();
    let (na, nr) = (cfg.n_arc, cfg.n_ray);
    let sc = cfg.ray_scale * s_inf;
    let cut = (cfg.ray_cutoff - 1.0) * s_inf;
    let c = |x: f64| C64::new(x, 0.0);
    let arcs = vec![
        ray(c(s_inf), c(1.0), sc, cut, true, nr, 0, 1),
        ray(c(-s_inf), c(-1.0), sc, cut, false, nr, 0, 1),
        segment(c(s_inf), c(-s_inf), na, 3, 2),
        circ(s_inf, 0.0, PI, false, na, 0, 2, Piece::CircleUpper),
        circ(s_inf, PI, 2.0 * PI, true, na, 3, 1, Piece::CircleLower),
    ];
    ContourGraph::from_arcs(arcs, regions).expect("lambda contour construction")
}

fn lambda_regions() -> Vec<Region> {
    vec![
        region("Omega1", Side::Plus),
        region("Omega2", Side::Minus),
        region("Omega3", Side::Minus),
        region("Omega4", Side::Plus),
    ]
}

/// Lambda contour with the inner segment reversed and an ellipse through
/// `+-s_inf` added.
pub fn build_modified_contour(s_inf: f64, semi: (f64, f64), cfg: &ContourConfig) -> Result<ContourGraph> {
    build_modified_from(&build_lambda_contour(s_inf, cfg), semi)
}

/// The modified contour built on an existing lambda contour, keeping its
/// arcs (index 2 reversed) and appending the two ellipse halves.
pub fn build_modified_from(g: &ContourGraph, semi: (f64, f64)) -> Result<ContourGraph> {
    let s_inf = g.arcs[2].start().re;
    if !(semi.0 > 0.0 && semi.1 > 0.0) {
        return Err(Error::Contour("degenerate ellipse".into()));
    }
    if (semi.0 - s_inf).abs() > NODE_TOL * s_inf || semi.1 >= s_inf {
        return Err(Error::Contour("ellipse must pass through +-S_inf inside the circle".into()));
    }
    let mut regions = g.regions.clone();
    regions.push(region("Omega5", Side::Plus));
    regions.push(region("Omega6", Side::Minus));
    let mut arcs = g.arcs.clone();
    let n_seg = arcs[2].n;
    // the segment now separates Omega5 (above, plus) from Omega6
    arcs[2] = Arc {
        geom: Geometry::Segment {
            a: C64::new(-s_inf, 0.0),
            b: C64::new(s_inf, 0.0),
        },
        forward: true,
        n: n_seg,
        plus: 4,
        minus: 5,
        piece: Piece::Inner,
    };
    let ell = |t0: f64, t1: f64, forward: bool, plus: usize, minus: usize| Arc {
        geom: Geometry::Elliptical {
            center: C64::new(0.0, 0.0),
            semi,
            theta0: t0,
            theta1: t1,
        },
        forward,
        n: n_seg,
        plus,
        minus,
        piece: Piece::Ellipse,
    };
    arcs.push(ell(0.0, PI, true, 4, 2));
    arcs.push(ell(-PI, 0.0, false, 3, 5));
    ContourGraph::from_arcs(arcs, regions)
}

/// One-sided limits at a node: per incident arc, the value and the
/// derivatives (orders `0..k`) along that arc.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeTrace {
    pub node: usize,
    pub entries: Vec<(usize, Vec<C64>)>,
}

impl NodeTrace {
    fn get(&self, arc: usize, j: usize) -> Result<C64> {
        self.entries
            .iter()
            .find(|e| e.0 == arc)
            .and_then(|e| e.1.get(j).copied())
            .ok_or(Error::MissingTrace(arc))
    }

    /// Builds the trace of per-arc node samples (stacked by arc) using
    /// spectral differentiation in the arc variable.
    pub fn from_samples(g: &ContourGraph, node: usize, samples: &[Vec<C64>], k: usize) -> NodeTrace {
        let bases = g.bases();
        let mut entries = Vec::new();
        for inc in &g.nodes[node].incident {
            let arc = &g.arcs[inc.arc];
            let b = bases.iter().find(|b| b.n == arc.n).unwrap();
            let idx = if inc.outgoing { 0 } else { arc.n - 1 };
            let dm = b.diff_matrix();
            let dz: Vec<C64> = b.nodes.iter().map(|&t| arc.deriv(t)).collect();
            let mut f = samples[inc.arc].clone();
            let mut vals = Vec::with_capacity(k);
            for j in 0..k {
                vals.push(f[idx]);
                if j + 1 < k {
                    f = (0..arc.n)
                        .map(|i| {
                            let s: C64 = (0..arc.n).map(|l| f[l] * dm[i * arc.n + l]).sum();
                            s / dz[i]
                        })
                        .collect();
                }
            }
            entries.push((inc.arc, vals));
        }
        NodeTrace { node, entries }
    }
}

/// Zero-sum residual: incoming limits minus outgoing limits, maximised
/// over derivative orders below `k`.
pub fn check_zero_sum(g: &ContourGraph, trace: &NodeTrace, k: usize) -> Result<f64> {
    let nd = &g.nodes[trace.node];
    let mut worst: f64 = 0.0;
    for j in 0..k {
        let mut s = C64::new(0.0, 0.0);
        for inc in &nd.incident {
            let v = trace.get(inc.arc, j)?;
            s += if inc.outgoing { -v } else { v };
        }
        worst = worst.max(s.norm());
    }
    Ok(worst)
}

/// Matching residual for boundary values of a function analytic on the
/// `side` regions: the two arcs bounding each such sector must agree.
pub fn check_matching_pm(g: &ContourGraph, trace: &NodeTrace, side: Side, k: usize) -> Result<f64> {
    let nd = &g.nodes[trace.node];
    let m = nd.incident.len();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let a = nd.incident[i];
        let b = nd.incident[(i + 1) % m];
        let arc_a = &g.arcs[a.arc];
        let face = if a.outgoing { arc_a.plus } else { arc_a.minus };
        if g.regions[face].sign != side {
            continue;
        }
        for j in 0..k {
            let d = trace.get(a.arc, j)? - trace.get(b.arc, j)?;
            worst = worst.max(d.norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_topology() {
        let g = build_zeta_contour(1.0, &ContourConfig::default());
        assert_eq!(g.arcs.len(), 12);
        assert_eq!(g.nodes.len(), 5);
        let origin = g.node_at(C64::new(0.0, 0.0)).unwrap();
        assert_eq!(g.nodes[origin].incident.len(), 4);
        g.check_complete().unwrap();
    }

    #[test]
    fn lambda_node_order() {
        let g = build_lambda_contour(4.0, &ContourConfig::default());
        let k = g.node_at(C64::new(4.0, 0.0)).unwrap();
        let order: Vec<usize> = g.nodes[k].incident.iter().map(|i| i.arc).collect();
        assert_eq!(order, vec![0, 3, 2, 4]);
    }

    #[test]
    fn modified_contour_is_complete() {
        let g = build_lambda_contour(1.5, &ContourConfig::default());
        g.check_complete().unwrap();
        let gm = build_modified_from(&g, (1.5, 0.75)).unwrap();
        gm.check_complete().unwrap();
        assert_eq!(gm.arcs.len(), 7);
        assert_eq!(gm.arcs[5].piece, Piece::Ellipse);
        // the segment is traversed the other way
        assert!((gm.arcs[2].start() - g.arcs[2].end()).norm() < 1e-12);
        let k = gm.node_at(C64::new(1.5, 0.0)).unwrap();
        let order: Vec<usize> = gm.nodes[k].incident.iter().map(|i| i.arc).collect();
        // circle and ellipse share a vertical tangent here
        assert_eq!(order, vec![0, 3, 5, 2, 6, 4]);
    }

    #[test]
    fn mobius_maps_endpoints() {
        let g = build_lambda_contour(2.0, &ContourConfig::default());
        for a in &g.arcs {
            let m = a.mobius().unwrap();
            for t in [-1.0, -0.3, 0.5, 1.0] {
                let z = m.eval(C64::new(t, 0.0));
                assert!((m.inverse(z) - t).norm() < 1e-12);
                let h = 1e-6;
                let fd = (a.point(t.min(1.0 - h) + h) - a.point(t.min(1.0 - h) - h)) / (2.0 * h);
                assert!((fd - a.deriv(t.min(1.0 - h))).norm() < 1e-5 * (1.0 + fd.norm()));
            }
        }
        assert!((g.arcs[0].end().re - 80.0).abs() < 1e-9);
        assert!((g.arcs[3].point(0.0) - C64::new(0.0, 2.0)).norm() < 1e-14);
    }
}
