//! Finite-volume discretization of the sticky Dirichlet form.
//!
//! Interior nodes sit at cell centres of a uniform grid, boundary nodes on the
//! sticky components. Masses carry the exact split `theta` / `1 - theta`; edge
//! conductances use geometric-mean densities so the chain is reversible by
//! construction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{partition_constants, ModelSpec, Point, Side, DEFAULT_QUADRATURE};
use crate::numerics::simpson;
use crate::scalar::Real;

const CELL_QUADRATURE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node<T> {
    pub x: T,
    pub y: T,
    pub boundary: bool,
}

impl<T: Real> Node<T> {
    pub fn point(&self) -> Point<T> {
        Point::new(self.x, self.y)
    }
}

/// Undirected edge `i < j` with conductance `c >= 0`; the form gets
/// `c (f_i - f_j)^2` from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub i: usize,
    pub j: usize,
    pub c: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata<T> {
    pub model_hash: String,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub theta: T,
    /// Circle length on strips.
    pub circumference: Option<T>,
}

/// Finite-state analogue of the sticky form and its invariant measure.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteInstance<T> {
    pub nodes: Vec<Node<T>>,
    pub m: Vec<T>,
    pub edges: Vec<Edge<T>>,
    pub metadata: Metadata<T>,
}

/// Reversible jump rates `q(i -> j) = c_ij / m_i`.
#[derive(Clone, Debug)]
pub struct Generator<T> {
    /// Outgoing `(target, rate)` per node, in edge order.
    pub rates: Vec<Vec<(usize, T)>>,
    pub exit: Vec<T>,
    pub boundary: Vec<bool>,
}

impl<T: Real> DiscreteInstance<T> {
    /// Builds an instance directly from masses and edges (used for small
    /// hand-made chains).
    pub fn from_parts(nodes: Vec<Node<T>>, m: Vec<T>, edges: Vec<Edge<T>>) -> Result<Self> {
        let interior: T = nodes.iter().zip(&m).filter(|(n, _)| !n.boundary).fold(T::zero(), |a, (_, &w)| a + w);
        let inst = Self {
            metadata: Metadata {
                model_hash: String::new(),
                n_interior: nodes.iter().filter(|n| !n.boundary).count(),
                n_boundary: nodes.iter().filter(|n| n.boundary).count(),
                theta: interior,
                circumference: None,
            },
            nodes,
            m,
            edges,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn boundary_mask(&self) -> Vec<bool> {
        self.nodes.iter().map(|n| n.boundary).collect()
    }

    pub fn theta(&self) -> T {
        self.metadata.theta
    }

    /// `f^T E f`.
    pub fn energy(&self, f: &[T]) -> T {
        self.edges.iter().fold(T::zero(), |acc, e| {
            let d = f[e.i] - f[e.j];
            acc + e.c * d * d
        })
    }

    /// `E f`.
    pub fn apply_e(&self, f: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        for e in &self.edges {
            let d = e.c * (f[e.i] - f[e.j]);
            out[e.i] += d;
            out[e.j] -= d;
        }
        out
    }

    pub fn mean(&self, f: &[T]) -> T {
        self.m.iter().zip(f).fold(T::zero(), |a, (&w, &v)| a + w * v)
    }

    pub fn mean_sq(&self, f: &[T]) -> T {
        self.m.iter().zip(f).fold(T::zero(), |a, (&w, &v)| a + w * v * v)
    }

    pub fn mean_abs(&self, f: &[T]) -> T {
        self.m.iter().zip(f).fold(T::zero(), |a, (&w, &v)| a + w * v.abs())
    }

    pub fn min_mass(&self) -> T {
        self.m.iter().copied().fold(T::infinity(), |a, b| a.min(b))
    }

    /// Dense symmetric `E` with `E_ii = sum_j c_ij`, `E_ij = -c_ij`.
    pub fn dense_e(&self) -> DMatrix<T> {
        let n = self.len();
        let mut e = DMatrix::zeros(n, n);
        for ed in &self.edges {
            e[(ed.i, ed.j)] -= ed.c;
            e[(ed.j, ed.i)] -= ed.c;
            e[(ed.i, ed.i)] += ed.c;
            e[(ed.j, ed.j)] += ed.c;
        }
        e
    }

    /// Interior (boundary) node coordinates along the normal direction.
    pub fn coordinates(&self) -> Vec<T> {
        self.nodes.iter().map(|n| n.x).collect()
    }

    /// Checks masses, symmetry and the zero row sums.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < 2 || self.nodes.len() != n {
            return Err(Error::InvalidInstance("need at least two nodes with one mass each".into()));
        }
        if self.m.iter().any(|&w| !(w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidInstance("masses must be positive and finite".into()));
        }
        let total = self.m.iter().fold(T::zero(), |a, &b| a + b);
        if (total - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::nat(4 * n)) {
            return Err(Error::InvalidInstance(format!("masses sum to {}", total.f64())));
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.i >= e.j || e.j >= n {
                return Err(Error::InvalidInstance(format!("edge {k} is not an ordered pair of nodes")));
            }
            if !(e.c >= T::zero()) || !e.c.is_finite() {
                return Err(Error::NegativeRate(e.i, e.j));
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        let mut adj = vec![Vec::new(); n];
        for e in self.edges.iter().filter(|e| e.c > T::zero()) {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

fn cell_mass<T: Real, F: Fn(Point<T>) -> T>(rho: &F, (x0, x1): (T, T), y: Option<(T, T)>) -> T {
    match y {
        None => simpson(|x| rho(Point::on_line(x)), x0, x1, CELL_QUADRATURE),
        Some((y0, y1)) => {
            simpson(|x| simpson(|yy| rho(Point::new(x, yy)), y0, y1, CELL_QUADRATURE), x0, x1, CELL_QUADRATURE)
        }
    }
}

fn normalize<T: Real>(w: &mut [T], target: T) {
    let s = w.iter().fold(T::zero(), |a, &b| a + b);
    for v in w.iter_mut() {
        *v = *v / s * target;
    }
}

/// Hex SHA-256 of the model's JSON encoding.
pub fn model_hash<T: Real>(model: &ModelSpec<T>) -> String {
    let json = serde_json::to_vec(model).expect("model serializes");
    hex::encode(Sha256::digest(&json))
}

/// Builds the finite-volume instance. `n_interior` cells span the normal
/// direction; on a strip `n_boundary` cells span the circle for both interior
/// rows and each sticky circle.
pub fn build_instance<T: Real>(
    model: &ModelSpec<T>,
    n_interior: usize,
    n_boundary: usize,
) -> Result<DiscreteInstance<T>> {
    model.validate()?;
    if n_interior < 4 {
        return Err(Error::GridTooCoarse(format!("n_interior = {n_interior} < 4")));
    }
    let circ = model.domain.circumference();
    if circ.is_some() && n_boundary < 8 {
        return Err(Error::GridTooCoarse(format!("n_boundary = {n_boundary} < 8 on a strip")));
    }
    let summary = partition_constants(model, DEFAULT_QUADRATURE)?;
    let theta = summary.theta;
    let one = T::one();
    let two = T::lit(2.0);
    let half = one / two;

    let (lo, hi) = model.normal_range();
    let nx = n_interior;
    let hx = (hi - lo) / T::nat(nx);
    let xc = |k: usize| lo + hx * (T::nat(k) + half);
    let (ny, hy) = match circ {
        Some(c) => (n_boundary, c / T::nat(n_boundary)),
        None => (1, one),
    };
    let yc = |j: usize| if circ.is_some() { hy * (T::nat(j) + half) } else { T::zero() };
    let idx = |k: usize, j: usize| k * ny + j;

    let rho_v = |p: Point<T>| summary.density_v(p);
    let rho_w = |p: Point<T>| summary.density_w(p);

    let mut nodes = Vec::with_capacity(nx * ny + 2 * ny);
    let mut m = Vec::with_capacity(nx * ny + 2 * ny);
    for k in 0..nx {
        for j in 0..ny {
            nodes.push(Node { x: xc(k), y: yc(j), boundary: false });
            let xr = (lo + hx * T::nat(k), lo + hx * T::nat(k + 1));
            let yr = circ.map(|_| (hy * T::nat(j), hy * T::nat(j + 1)));
            m.push(cell_mass(&rho_v, xr, yr));
        }
    }
    normalize(&mut m, theta);

    let mut edges = Vec::new();
    let mut push = |i: usize, j: usize, c: T| edges.push(Edge { i: i.min(j), j: i.max(j), c });
    let geo = |a: T, b: T| (a * b).sqrt();
    // Conductance weights: x-edges carry hy/hx, circle edges hx/hy (1-D: hy = 1).
    let wx = hy / hx;
    for k in 0..nx {
        for j in 0..ny {
            let p = Point::new(xc(k), yc(j));
            if k + 1 < nx {
                let q = Point::new(xc(k + 1), yc(j));
                push(idx(k, j), idx(k + 1, j), theta * geo(rho_v(p), rho_v(q)) * wx);
            }
            if circ.is_some() {
                let jn = (j + 1) % ny;
                let q = Point::new(xc(k), yc(jn));
                push(idx(k, j), idx(k, jn), theta * geo(rho_v(p), rho_v(q)) * hx / hy);
            }
        }
    }

    let n_int = nx * ny;
    let mut bmass = Vec::new();
    for comp in model.domain.sticky_components() {
        let k = if comp.side == Side::Lower { 0 } else { nx - 1 };
        let first = n_int + bmass.len();
        for j in 0..ny {
            let b = Point::new(comp.x, yc(j));
            nodes.push(Node { x: comp.x, y: b.y, boundary: true });
            bmass.push(match circ {
                None => rho_w(b),
                Some(_) => {
                    simpson(|yy| rho_w(Point::new(comp.x, yy)), hy * T::nat(j), hy * T::nat(j + 1), CELL_QUADRATURE)
                }
            });
            let q = Point::new(xc(k), yc(j));
            push(first + j, idx(k, j), theta * geo(rho_v(b), rho_v(q)) * wx * two);
            if circ.is_some() && model.delta > T::zero() {
                let jn = (j + 1) % ny;
                let bn = Point::new(comp.x, yc(jn));
                push(first + j, first + jn, (one - theta) * model.delta * geo(rho_w(b), rho_w(bn)) / hy);
            }
        }
    }
    normalize(&mut bmass, one - theta);
    m.extend(bmass);
    edges.sort_by_key(|e| (e.i, e.j));

    let inst = DiscreteInstance {
        metadata: Metadata {
            model_hash: model_hash(model),
            n_interior: nx,
            n_boundary: ny,
            theta,
            circumference: model.domain.circumference(),
        },
        nodes,
        m,
        edges,
    };
    inst.validate()?;
    Ok(inst)
}

/// Jump rates of the reversible chain whose Dirichlet form is `f^T E f`.
pub fn generator_of<T: Real>(inst: &DiscreteInstance<T>) -> Result<Generator<T>> {
    let n = inst.len();
    let mut rates = vec![Vec::new(); n];
    for e in &inst.edges {
        if !(e.c >= T::zero()) {
            return Err(Error::NegativeRate(e.i, e.j));
        }
        if e.c > T::zero() {
            rates[e.i].push((e.j, e.c / inst.m[e.i]));
            rates[e.j].push((e.i, e.c / inst.m[e.j]));
        }
    }
    let exit = rates.iter().map(|r| r.iter().fold(T::zero(), |a, &(_, q)| a + q)).collect();
    Ok(Generator { rates, exit, boundary: inst.boundary_mask() })
}

impl<T: Real> Generator<T> {
    pub fn len(&self) -> usize {
        self.exit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exit.is_empty()
    }

    /// `(Q f)_i = sum_j q(i -> j) (f_j - f_i)`.
    pub fn apply(&self, f: &[T]) -> Vec<T> {
        self.rates
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().fold(T::zero(), |a, &(j, q)| a + q * (f[j] - f[i])))
            .collect()
    }

    pub fn dense(&self) -> DMatrix<T> {
        let n = self.len();
        let mut q = DMatrix::zeros(n, n);
        for (i, row) in self.rates.iter().enumerate() {
            for &(j, r) in row {
                q[(i, j)] += r;
            }
            q[(i, i)] = -self.exit[i];
        }
        q
    }

    /// `max_j |(m^T Q)_j|`.
    pub fn stationarity_residual(&self, m: &[T]) -> T {
        let q = self.dense();
        let row = DVector::from_column_slice(m).transpose() * q;
        row.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }
}

/// JSON document for an instance; `E` is stored as full sparse triplets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceDoc<T> {
    pub nodes: Vec<Node<T>>,
    pub m: Vec<T>,
    #[serde(rename = "E")]
    pub e: Vec<(usize, usize, T)>,
    pub boundary_mask: Vec<bool>,
    pub metadata: Metadata<T>,
}

impl<T: Real> DiscreteInstance<T> {
    pub fn to_doc(&self) -> InstanceDoc<T> {
        let n = self.len();
        let mut diag = vec![T::zero(); n];
        for e in &self.edges {
            diag[e.i] += e.c;
            diag[e.j] += e.c;
        }
        let mut trip: Vec<(usize, usize, T)> = Vec::with_capacity(2 * self.edges.len() + n);
        for e in &self.edges {
            trip.push((e.i, e.j, -e.c));
            trip.push((e.j, e.i, -e.c));
        }
        trip.extend(diag.into_iter().enumerate().map(|(i, d)| (i, i, d)));
        trip.sort_by_key(|t| (t.0, t.1));
        InstanceDoc {
            nodes: self.nodes.clone(),
            m: self.m.clone(),
            e: trip,
            boundary_mask: self.boundary_mask(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn from_doc(doc: InstanceDoc<T>) -> Result<Self> {
        if doc.boundary_mask.len() != doc.nodes.len()
            || doc.nodes.iter().zip(&doc.boundary_mask).any(|(n, &b)| n.boundary != b)
        {
            return Err(Error::InvalidInstance("boundary mask disagrees with nodes".into()));
        }
        let mut edges: Vec<Edge<T>> =
            doc.e.iter().filter(|t| t.0 < t.1).map(|&(i, j, v)| Edge { i, j, c: -v }).collect();
        edges.sort_by_key(|e| (e.i, e.j));
        let mirrored = doc.e.iter().filter(|t| t.0 > t.1).count();
        if mirrored != edges.len() {
            return Err(Error::InvalidInstance("E is not symmetric".into()));
        }
        let inst = Self { nodes: doc.nodes, m: doc.m, edges, metadata: doc.metadata };
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainSpec;

    fn flat(n: usize) -> DiscreteInstance<f64> {
        build_instance(&ModelSpec::flat_interval(0.0, 1.0, 0.5), n, 0).unwrap()
    }

    #[test]
    fn sticky_masses_on_unit_interval() {
        let inst = flat(40);
        let b: Vec<f64> = inst.nodes.iter().zip(&inst.m).filter(|(n, _)| n.boundary).map(|(_, &w)| w).collect();
        assert_eq!(b.len(), 2);
        assert!((b[0] - 0.25).abs() < 1e-15 && (b[1] - 0.25).abs() < 1e-15);
        let interior: f64 = inst.nodes.iter().zip(&inst.m).filter(|(n, _)| !n.boundary).map(|(_, &w)| w).sum();
        assert!((interior - 0.5).abs() < 1e-14);
    }

    #[test]
    fn linear_function_energy_is_exact() {
        let inst = flat(199);
        let f: Vec<f64> = inst.coordinates();
        assert!((inst.energy(&f) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn e_is_symmetric_with_zero_rows() {
        let inst = flat(16);
        let e = inst.dense_e();
        assert!((&e - e.transpose()).amax() < 1e-15);
        let ones = DVector::from_element(inst.len(), 1.0);
        assert!((&e * ones).amax() < 1e-12);
    }

    #[test]
    fn two_state_generator() {
        let nodes = vec![Node { x: 0.0, y: 0.0, boundary: false }, Node { x: 1.0, y: 0.0, boundary: true }];
        let inst = DiscreteInstance::from_parts(nodes, vec![0.5, 0.5], vec![Edge { i: 0, j: 1, c: 0.5 }]).unwrap();
        let g = generator_of(&inst).unwrap();
        assert_eq!(g.rates[0], vec![(1, 1.0)]);
        assert_eq!(g.rates[1], vec![(0, 1.0)]);
        assert_eq!(g.apply(&[1.0, 1.0]), vec![0.0, 0.0]);
        assert_eq!(g.stationarity_residual(&inst.m), 0.0);
    }

    #[test]
    fn negative_conductance_is_rejected() {
        let nodes = vec![Node { x: 0.0, y: 0.0, boundary: false }, Node { x: 1.0, y: 0.0, boundary: true }];
        let inst = DiscreteInstance {
            nodes,
            m: vec![0.5, 0.5],
            edges: vec![Edge { i: 0, j: 1, c: -0.5 }],
            metadata: Metadata {
                model_hash: String::new(),
                n_interior: 1,
                n_boundary: 1,
                theta: 0.5,
                circumference: None,
            },
        };
        assert!(matches!(generator_of(&inst), Err(Error::NegativeRate(0, 1))));
    }

    #[test]
    fn grid_too_coarse() {
        let model = ModelSpec::flat_interval(0.0, 1.0, 0.5);
        assert!(matches!(build_instance(&model, 3, 0), Err(Error::GridTooCoarse(_))));
        let strip = ModelSpec::new(
            DomainSpec::strip(1.0, 1.0),
            crate::model::PotentialSpec::Zero,
            crate::model::PotentialSpec::Zero,
            1.0,
            1.0,
        );
        assert!(matches!(build_instance(&strip, 8, 4), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let model = ModelSpec::power_half_line(1.5, 6.0, 1.0, 1.0);
        let inst = build_instance(&model, 37, 0).unwrap();
        let back = DiscreteInstance::<f64>::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json().unwrap(), inst.to_json().unwrap());
    }

    #[test]
    fn strip_linear_functions() {
        let model = ModelSpec::new(
            DomainSpec::strip(1.0, 2.0).with_sticky(&[Side::Lower]),
            crate::model::PotentialSpec::Zero,
            crate::model::PotentialSpec::Zero,
            1.0,
            1.0,
        );
        let inst = build_instance(&model, 10, 16).unwrap();
        let theta = inst.theta();
        // f = x: the half cell next to the reflecting side carries no edge
        let fx: Vec<f64> = inst.nodes.iter().map(|n| n.x).collect();
        assert!((inst.energy(&fx) - theta * 9.5 / 10.0).abs() < 1e-12);
        // f = cos(2 pi y / c) on the sticky circle only
        let fy: Vec<f64> =
            inst.nodes.iter().map(|n| if n.boundary { (std::f64::consts::PI * n.y).cos() } else { 0.0 }).collect();
        assert!(inst.energy(&fy) > 0.0);
        assert!(inst.is_connected());
    }
}
