//! Radial grids, sampled radial fields and the quadrature, differentiation,
//! interpolation and rearrangement primitives built on them.
//!
//! A radial function `u(|x|)` on `R^N` is stored by its samples on a grid
//! `0 = r_0 < r_1 < ... < r_n = R_max`. Every cell `[r_i, r_{i+1}]` carries its
//! true volume `omega_N (r_{i+1}^N - r_i^N) / N`. Node `i` is weighted by the
//! exact volume of its dual cell, the shell between the midpoints of the
//! adjacent cells, so that nodal sums are finite-volume integrals. For
//! `N = 1` this is the composite trapezoid rule.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default outer radius of the computational ball.
pub const DEFAULT_R_MAX: f64 = 40.0;
/// Default number of grid nodes, including `r = 0`.
pub const DEFAULT_NODES: usize = 4001;

/// Surface area `omega_N` of the unit sphere in `R^N`.
///
/// With `omega_1 = 2` the radial integral of an even profile over `R` is
/// twice the half-line integral.
pub fn surface_area(dim: usize) -> f64 {
    use std::f64::consts::PI;
    // omega_N = 2 pi^{N/2} / Gamma(N/2)
    let half = dim as f64 / 2.0;
    2.0 * PI.powf(half) / gamma_half_integer(dim)
}

/// `Gamma(n/2)` for a positive integer `n`.
fn gamma_half_integer(n: usize) -> f64 {
    let (mut value, mut x) = if n % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    let target = n as f64 / 2.0;
    while x < target - 1e-12 {
        value *= x;
        x += 1.0;
    }
    value
}

/// Grid size and extent used to build uniform radial grids.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_max: DEFAULT_R_MAX,
            nodes: DEFAULT_NODES,
        }
    }
}

impl GridConfig {
    pub fn new(r_max: f64, nodes: usize) -> Self {
        Self { r_max, nodes }
    }

    /// Same extent with the spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            r_max: self.r_max,
            nodes: 2 * (self.nodes - 1) + 1,
        }
    }

    pub fn build(&self, dim: usize) -> Result<Arc<RadialGrid>> {
        RadialGrid::uniform(dim, self.r_max, self.nodes).map(Arc::new)
    }
}

/// Discretization of `[0, R_max]` for radial functions on `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    nodes: Vec<f64>,
    cell_volumes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Uniform grid with `nodes` points on `[0, r_max]`.
    pub fn uniform(dim: usize, r_max: f64, nodes: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("R_max must be positive, got {r_max}")));
        }
        if nodes < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {nodes}")));
        }
        let last = (nodes - 1) as f64;
        let r = (0..nodes).map(|i| r_max * (i as f64 / last)).collect();
        Self::from_nodes(dim, r)
    }

    /// Grid on arbitrary strictly increasing nodes starting at zero.
    pub fn from_nodes(dim: usize, nodes: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("first node must be 0, got {}", nodes[0])));
        }
        if nodes.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidGrid("non-finite node".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        let omega = surface_area(dim);
        let n = dim as i32;
        let cell_volumes: Vec<f64> = nodes
            .windows(2)
            .map(|w| omega * (w[1].powi(n) - w[0].powi(n)) / dim as f64)
            .collect();
        // dual cells: each cell is split at its midpoint
        let mut weights = vec![0.0; nodes.len()];
        for (c, w) in nodes.windows(2).enumerate() {
            let mid = 0.5 * (w[0] + w[1]);
            let left = omega * (mid.powi(n) - w[0].powi(n)) / dim as f64;
            weights[c] += left;
            weights[c + 1] += cell_volumes[c] - left;
        }
        Ok(Self {
            dim,
            nodes,
            cell_volumes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().expect("grid has nodes")
    }

    /// Nodal quadrature weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exact shell volumes of the cells `[r_i, r_{i+1}]`.
    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    /// Width of cell `c`.
    pub fn cell_width(&self, c: usize) -> f64 {
        self.nodes[c + 1] - self.nodes[c]
    }

    /// Grid with every node multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_nodes(self.dim, self.nodes.iter().map(|r| r * factor).collect())
    }

    /// Volume of the ball of radius `r_max`.
    pub fn ball_volume(&self) -> f64 {
        surface_area(self.dim) * self.r_max().powi(self.dim as i32) / self.dim as f64
    }
}

/// A radial function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite value {} at node {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(r)` at every node.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies `f` to every value; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled_by(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Weighted inner product `sum w_i u_i v_i`, the discrete L^2 pairing.
    pub fn dot(&self, other: &RadialField) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(other.values.iter()))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// `int u^2`.
    pub fn mass(&self) -> f64 {
        self.dot(self)
    }

    /// Number of strict sign changes, ignoring samples with
    /// `|u| <= dead_band * max|u|`.
    pub fn sign_changes(&self, dead_band: f64) -> usize {
        let floor = dead_band * self.max_abs();
        let mut last = 0.0_f64;
        let mut count = 0;
        for &v in &self.values {
            if v.abs() <= floor {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }
}

/// `int_{R^N} f` for a radial field.
pub fn integrate_radial(f: &RadialField) -> f64 {
    f.grid.weights().iter().zip(f.values.iter()).map(|(w, v)| w * v).sum()
}

/// `(int |u|^q)^{1/q}`.
pub fn lq_norm(u: &RadialField, q: f64) -> f64 {
    assert!(q >= 1.0, "lq_norm requires q >= 1, got {q}");
    let s: f64 = u
        .grid
        .weights()
        .iter()
        .zip(u.values.iter())
        .map(|(w, v)| w * v.abs().powf(q))
        .sum();
    s.powf(1.0 / q)
}

/// Treatment of the derivative at `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Even extension: `u'(0) = 0`.
    Even,
    /// One-sided second-order difference, for functions that are not radial
    /// profiles.
    OneSided,
}

/// `u'(r)` for a radial profile: central differences inside, second-order
/// one-sided at `R_max`, and `u'(0) = 0`.
pub fn radial_derivative(u: &RadialField) -> RadialField {
    derivative(u, Origin::Even)
}

/// Second-order first derivative on a (possibly non-uniform) grid.
pub fn derivative(u: &RadialField, origin: Origin) -> RadialField {
    let r = u.grid.nodes();
    let y = &u.values;
    let n = y.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = r[i] - r[i - 1];
        let h1 = r[i + 1] - r[i];
        d[i] =
            (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] + (h0 / (h1 * (h0 + h1))) * y[i + 1];
    }
    d[0] = match origin {
        Origin::Even => 0.0,
        Origin::OneSided => {
            let h0 = r[1] - r[0];
            let h1 = r[2] - r[1];
            -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * y[0] + (h0 + h1) / (h0 * h1) * y[1] - h0 / (h1 * (h0 + h1)) * y[2]
        }
    };
    let h1 = r[n - 1] - r[n - 2];
    let h0 = r[n - 2] - r[n - 3];
    d[n - 1] = h1 / (h0 * (h0 + h1)) * y[n - 3] - (h0 + h1) / (h0 * h1) * y[n - 2]
        + (2.0 * h1 + h0) / (h1 * (h0 + h1)) * y[n - 1];
    RadialField {
        grid: u.grid.clone(),
        values: d,
    }
}

/// Radial Laplacian `u'' + (N-1) u'/r` by second-order differences; at the
/// origin the even-symmetry limit `N u''(0)` is used. The last node repeats
/// its neighbour's value.
pub fn radial_laplacian(u: &RadialField) -> RadialField {
    let r = u.grid.nodes();
    let y = &u.values;
    let n = y.len();
    let dim = u.grid.dim() as f64;
    let du = radial_derivative(u);
    let mut lap = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = r[i] - r[i - 1];
        let h1 = r[i + 1] - r[i];
        let d2 = 2.0 * (h0 * y[i + 1] - (h0 + h1) * y[i] + h1 * y[i - 1]) / (h0 * h1 * (h0 + h1));
        lap[i] = d2 + (dim - 1.0) * du.values[i] / r[i];
    }
    let h = r[1];
    lap[0] = dim * 2.0 * (y[1] - y[0]) / (h * h);
    lap[n - 1] = lap[n - 2];
    RadialField {
        grid: u.grid.clone(),
        values: lap,
    }
}

/// Monotone piecewise-cubic Hermite interpolant of grid samples, with the
/// even-extension slope `0` at the origin.
#[derive(Debug, Clone)]
pub struct MonotoneCubic<'a> {
    x: &'a [f64],
    y: &'a [f64],
    slopes: Vec<f64>,
}

impl<'a> MonotoneCubic<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        for k in 1..n - 1 {
            let (d0, d1) = (delta[k - 1], delta[k]);
            if d0 * d1 <= 0.0 {
                slopes[k] = 0.0;
            } else {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        // one-sided three-point slope at the outer end, limited
        let (hk, hk1) = (h[n - 2], h[n - 3]);
        let (dk, dk1) = (delta[n - 2], delta[n - 3]);
        let mut end = ((2.0 * hk + hk1) * dk - hk * dk1) / (hk + hk1);
        if end * dk <= 0.0 {
            end = 0.0;
        } else if dk * dk1 <= 0.0 && end.abs() > 3.0 * dk.abs() {
            end = 3.0 * dk;
        }
        slopes[n - 1] = end;
        Self { x, y, slopes }
    }

    /// Value at radius `t`; negative radii use the even extension and
    /// radii beyond the last node give zero.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        let n = self.x.len();
        let last = self.x[n - 1];
        if t > last {
            return 0.0;
        }
        if t == last {
            return self.y[n - 1];
        }
        let k = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.slopes[k] + h01 * self.y[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

/// Monotone cubic interpolation of `u` onto `target`; zero beyond the
/// source `R_max`.
pub fn resample(u: &RadialField, target: &Arc<RadialGrid>) -> RadialField {
    if Arc::ptr_eq(&u.grid, target) || *u.grid == **target {
        return RadialField {
            grid: target.clone(),
            values: u.values.clone(),
        };
    }
    let interp = MonotoneCubic::new(u.grid.nodes(), &u.values);
    let values = target.nodes().iter().map(|&t| interp.eval(t)).collect();
    RadialField {
        grid: target.clone(),
        values,
    }
}

/// Values of `u` at arbitrary radii, by the same interpolant as [`resample`].
pub fn sample_at(u: &RadialField, radii: impl Iterator<Item = f64>) -> Vec<f64> {
    let interp = MonotoneCubic::new(u.grid.nodes(), &u.values);
    radii.map(|t| interp.eval(t)).collect()
}

/// Equimeasurable radially nonincreasing rearrangement of `|u|`.
///
/// Each node is treated as a cell of measure `w_i` holding `|u_i|`. The cells
/// are sorted by decreasing value and laid out from the origin outward; the
/// result at each node is the average of that step profile over the node's
/// own measure interval. This preserves `int |u|` exactly and every other
/// `int |u|^q` up to the averaging error.
pub fn rearrange_decreasing(u: &RadialField) -> RadialField {
    let w = u.grid.weights();
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u.values[b].abs().total_cmp(&u.values[a].abs()));

    let mut out = vec![0.0; u.len()];
    let mut k = 0;
    let mut step_lo = 0.0_f64;
    let mut step_hi = w[order[0]];
    let mut node_lo = 0.0;
    for (j, wj) in w.iter().enumerate() {
        let node_hi = node_lo + wj;
        let width = node_hi - node_lo;
        let mut acc = 0.0;
        loop {
            let overlap = step_hi.min(node_hi) - step_lo.max(node_lo);
            if overlap > 0.0 {
                acc += overlap * u.values[order[k]].abs();
            }
            if step_hi <= node_hi && k + 1 < order.len() {
                k += 1;
                step_lo = step_hi;
                step_hi = step_lo + w[order[k]];
            } else {
                break;
            }
        }
        out[j] = if width > 0.0 {
            acc / width
        } else {
            u.values[order[k]].abs()
        };
        node_lo = node_hi;
    }
    // averaging round-off must not break literal monotonicity
    for j in 1..out.len() {
        if out[j] > out[j - 1] {
            out[j] = out[j - 1];
        }
    }
    RadialField {
        grid: u.grid.clone(),
        values: out,
    }
}

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the profile CSV (`r,u`, 17 significant digits).
pub fn write_profile_csv<W: Write>(mut out: W, u: &RadialField) -> std::io::Result<()> {
    writeln!(out, "r,u")?;
    for (r, v) in u.grid.nodes().iter().zip(u.values.iter()) {
        writeln!(out, "{},{}", fmt17(*r), fmt17(*v))?;
    }
    Ok(())
}

pub fn save_profile_csv(path: &Path, u: &RadialField) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_profile_csv(&mut buf, u).map_err(|e| Error::io(path, e))?;
    buf.flush().map_err(|e| Error::io(path, e))
}

/// Reads a profile CSV back into a field on the grid given by its `r` column.
pub fn read_profile_csv<R: BufRead>(input: R, dim: usize) -> Result<RadialField> {
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Csv {
            line: i + 1,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if i == 0 {
            if line != "r,u" {
                return Err(Error::Csv {
                    line: 1,
                    message: format!("expected header `r,u`, found `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Csv {
                    line: i + 1,
                    message: format!("missing column {name}"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Csv {
                    line: i + 1,
                    message: e.to_string(),
                })
        };
        nodes.push(next("r")?);
        values.push(next("u")?);
    }
    let grid = Arc::new(RadialGrid::from_nodes(dim, nodes)?);
    RadialField::new(grid, values)
}

pub fn load_profile_csv(path: &Path, dim: usize) -> Result<RadialField> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_profile_csv(std::io::BufReader::new(file), dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(dim: usize, r_max: f64, nodes: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(dim, r_max, nodes).unwrap())
    }

    #[test]
    fn surface_areas() {
        assert!((surface_area(1) - 2.0).abs() < 1e-15);
        assert!((surface_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((surface_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((surface_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn constant_integrates_to_ball_volume() {
        let one = |g: &Arc<RadialGrid>| RadialField::from_fn(g.clone(), |_| 1.0).unwrap();
        let g3 = grid(3, 1.0, 4001);
        assert!((integrate_radial(&one(&g3)) - 4.0 * PI / 3.0).abs() < 1e-12);
        let g2 = grid(2, 1.0, 4001);
        assert!((integrate_radial(&one(&g2)) - PI).abs() < 1e-12);
        let g1 = grid(1, 1.0, 11);
        assert!((integrate_radial(&one(&g1)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral_line() {
        let g = grid(1, 10.0, 2001);
        let f = RadialField::from_fn(g, |r| (-r * r).exp()).unwrap();
        assert!((integrate_radial(&f) - PI.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn lq_norm_examples() {
        let g3 = grid(3, 1.0, 2001);
        let one = RadialField::from_fn(g3.clone(), |_| 1.0).unwrap();
        assert!((lq_norm(&one, 1.0) - 4.0 * PI / 3.0).abs() < 1e-10);
        assert_eq!(lq_norm(&RadialField::zeros(g3), 2.0), 0.0);
        let g1 = grid(1, 10.0, 4001);
        let gauss = RadialField::from_fn(g1, |r| (-r * r).exp()).unwrap();
        assert!((lq_norm(&gauss, 2.0) - (PI / 2.0).powf(0.25)).abs() < 1e-6);
    }

    #[test]
    fn quadrature_is_second_order() {
        // N = 3: the trapezoid rule on exact shells is genuinely O(h^2) here
        let exact = PI.powf(1.5);
        let err = |nodes| {
            let g = grid(3, 8.0, nodes);
            let f = RadialField::from_fn(g, |r| (-r * r).exp()).unwrap();
            (integrate_radial(&f) - exact).abs()
        };
        let (coarse, fine) = (err(201), err(401));
        assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
    }

    #[test]
    fn derivative_examples() {
        let g = grid(1, 4.0, 401);
        let h = 0.01;
        let sq = RadialField::from_fn(g.clone(), |r| r * r).unwrap();
        let d = radial_derivative(&sq);
        for (r, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - 2.0 * r).abs() < 1e-10);
        }
        let c = RadialField::from_fn(g.clone(), |_| 3.5).unwrap();
        assert!(radial_derivative(&c).values().iter().all(|v| v.abs() < 1e-12));
        let s = RadialField::from_fn(g.clone(), f64::sin).unwrap();
        let d = derivative(&s, Origin::OneSided);
        for (r, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - r.cos()).abs() < h * h, "r={r}: {v} vs {}", r.cos());
        }
    }

    #[test]
    fn discrete_integration_by_parts() {
        // bumps supported away from both ends, N = 1
        let bump = |c: f64, w: f64| {
            move |r: f64| {
                let x = (r - c) / w;
                if x.abs() < 1.0 {
                    (1.0 - x * x).powi(4)
                } else {
                    0.0
                }
            }
        };
        let errs: Vec<f64> = [1001, 2001]
            .iter()
            .map(|&n| {
                let g = grid(1, 10.0, n);
                let u = RadialField::from_fn(g.clone(), bump(4.0, 2.0)).unwrap();
                let v = RadialField::from_fn(g.clone(), |r| bump(5.0, 1.5)(r) * (1.0 + r)).unwrap();
                let du = radial_derivative(&u);
                let dv = radial_derivative(&v);
                let f: Vec<f64> = (0..g.len())
                    .map(|i| du.values()[i] * v.values()[i] + u.values()[i] * dv.values()[i])
                    .collect();
                integrate_radial(&RadialField::new(g, f).unwrap()).abs()
            })
            .collect();
        assert!(errs[0] < 1e-4);
        assert!(errs[1] <= errs[0] / 3.0 || errs[1] < 1e-12);
    }

    #[test]
    fn resample_identity_and_extension() {
        let g = grid(2, 10.0, 1001);
        let u = RadialField::from_fn(g.clone(), |r| (-r * r).exp()).unwrap();
        assert_eq!(resample(&u, &g).values(), u.values());

        let wide = grid(2, 20.0, 2001);
        let bump = RadialField::from_fn(g.clone(), |r| (1.0 - r / 5.0).max(0.0).powi(3)).unwrap();
        let ext = resample(&bump, &wide);
        for (r, v) in wide.nodes().iter().zip(ext.values()) {
            if *r > 10.0 {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn refine_then_coarsen_round_trip() {
        let coarse = grid(3, 10.0, 1001);
        let fine = grid(3, 10.0, 4001);
        let u = RadialField::from_fn(coarse.clone(), |r| (-r * r / 2.0).exp() * (1.0 + r)).unwrap();
        let back = resample(&resample(&u, &fine), &coarse);
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rearrangement_fixed_point() {
        let g = grid(3, 10.0, 1001);
        let u = RadialField::from_fn(g, |r| 1.0 / (1.0 + r * r)).unwrap();
        let v = rearrange_decreasing(&u);
        for (a, b) in u.values().iter().zip(v.values()) {
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn rearrangement_of_bump_is_monotone_and_equimeasurable() {
        for dim in 1..=3 {
            let g = grid(dim, 12.0, 2401);
            let u = RadialField::from_fn(g, |r| {
                (-(r - 4.0).powi(2)).exp() - 0.5 * (-(r - 1.0).powi(2) * 4.0).exp()
            })
            .unwrap();
            let v = rearrange_decreasing(&u);
            assert!(v.values().windows(2).all(|w| w[1] <= w[0]));
            for q in [1.0, 2.0, 4.0] {
                let (a, b) = (lq_norm(&u, q), lq_norm(&v, q));
                assert!((a - b).abs() <= 1e-4 * a, "N={dim} q={q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = grid(2, 5.0, 101);
        let u = RadialField::from_fn(g, |r| (-r).exp() / 3.0).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &u).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("r,u\n"));
        let back = read_profile_csv(std::io::Cursor::new(buf), 2).unwrap();
        assert_eq!(back.values(), u.values());
        assert_eq!(back.grid().weights(), u.grid().weights());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(RadialGrid::from_nodes(1, vec![0.0, 1.0, 1.0]).is_err());
        assert!(RadialGrid::from_nodes(1, vec![0.1, 1.0, 2.0]).is_err());
        let g = grid(1, 1.0, 5);
        assert!(RadialField::new(g.clone(), vec![0.0; 4]).is_err());
        assert!(RadialField::new(g, vec![0.0, f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn sign_changes_with_dead_band() {
        let g = grid(1, 10.0, 1001);
        let u = RadialField::from_fn(g, |r| (-r * r / 8.0).exp() * (r * 1.2).cos()).unwrap();
        // zeros of cos(1.2 r) below 10 sit at 1.31, 3.93, 6.54 and 9.16; the
        // envelope there is still 3e-5, but under a 1e-3 band the last one drops
        assert_eq!(u.sign_changes(1e-10), 4);
        assert_eq!(u.sign_changes(1e-3), 3);
    }
}
