//! Poisson and Matérn type-II hard-core point processes.
//!
//! The hard-core process keeps a parent point only if no other parent within
//! distance `δ` carries a smaller mark. Its intensity and second-order product
//! density are available in closed form ([`first_moment`],
//! [`second_moment`]), which the interference integral relies on.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Axis-aligned observation window, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_max <= x_min || y_max <= y_min {
            return Err(Error::param(
                "window",
                format!("degenerate window [{x_min}, {x_max}] x [{y_min}, {y_max}]"),
            ));
        }
        Ok(Window {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// Square `[-half_width, half_width]²`.
    pub fn centered_square(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width, -half_width, half_width)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }

    /// Closed-box membership.
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// The window grown by `margin` on every side (the guard region).
    pub fn expanded(&self, margin: f64) -> Result<Self> {
        Self::new(
            self.x_min - margin,
            self.x_max + margin,
            self.y_min - margin,
            self.y_max + margin,
        )
    }

    fn uniform_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            self.x_min + self.width() * rng.random::<f64>(),
            self.y_min + self.height() * rng.random::<f64>(),
        )
    }
}

/// A parent point carrying its thinning mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedPoint {
    pub position: Point,
    pub mark: f64,
}

/// Points inside a window, stored in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    pub points: Vec<Point>,
    pub window: Window,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points per unit area.
    pub fn density(&self) -> f64 {
        self.points.len() as f64 / self.window.area()
    }

    /// Smallest pairwise distance by exhaustive scan; `None` for fewer than
    /// two points.
    pub fn min_pairwise_distance(&self) -> Option<f64> {
        let pts = &self.points;
        let mut best: Option<f64> = None;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d = pts[i].distance(&pts[j]);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}

/// Geometry of the BS layer: parent intensity `λ_P` (m⁻²) and hard-core
/// distance `δ` (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcppParams {
    lambda_p: f64,
    delta: f64,
}

impl HcppParams {
    pub fn new(lambda_p: f64, delta: f64) -> Result<Self> {
        if !(lambda_p > 0.0 && lambda_p.is_finite()) {
            return Err(Error::param("lambda_p", format!("must be positive, got {lambda_p}")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::param("delta", format!("must be non-negative, got {delta}")));
        }
        Ok(HcppParams { lambda_p, delta })
    }

    /// Parent intensity of a PPP with one point per disc of `radius` meters.
    pub fn with_parent_radius(radius: f64, delta: f64) -> Result<Self> {
        Self::new(1.0 / (PI * radius * radius), delta)
    }

    pub fn lambda_p(&self) -> f64 {
        self.lambda_p
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Mean number of parents in a hard-core disc, `λ_P π δ²`.
    pub fn disc_load(&self) -> f64 {
        self.lambda_p * PI * self.delta * self.delta
    }
}

impl Default for HcppParams {
    fn default() -> Self {
        HcppParams {
            lambda_p: 1.0 / (PI * 800.0 * 800.0),
            delta: 500.0,
        }
    }
}

fn check_intensity(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::param("lambda", format!("must be positive, got {lambda}")))
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<usize> {
    let dist = Poisson::new(mean).map_err(|e| Error::param("lambda", format!("cannot draw Poisson({mean}): {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// Homogeneous PPP of intensity `lambda` on `window`.
pub fn sample_ppp<R: Rng + ?Sized>(lambda: f64, window: Window, rng: &mut R) -> Result<PointPattern> {
    check_intensity(lambda)?;
    let n = poisson_count(lambda * window.area(), rng)?;
    let points = (0..n).map(|_| window.uniform_point(rng)).collect();
    Ok(PointPattern { points, window })
}

/// PPP with independent uniform marks, the parent process of the thinning.
pub fn sample_marked_ppp<R: Rng + ?Sized>(lambda: f64, window: Window, rng: &mut R) -> Result<Vec<MarkedPoint>> {
    check_intensity(lambda)?;
    let n = poisson_count(lambda * window.area(), rng)?;
    Ok((0..n)
        .map(|_| {
            let position = window.uniform_point(rng);
            MarkedPoint {
                position,
                mark: rng.random::<f64>(),
            }
        })
        .collect())
}

/// Uniform bucket grid over a point set, for fixed-radius neighbour queries.
pub(crate) struct CellGrid {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    entries: Vec<usize>,
}

impl CellGrid {
    /// `radius` is the largest query radius the grid will serve.
    pub(crate) fn new(points: &[Point], radius: f64) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        if points.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        // cells no smaller than the radius, and not vastly more cells than points
        let budget = (4 * points.len()).max(16) as f64;
        let min_cell = ((x1 - x0) * (y1 - y0) / budget).sqrt();
        let cell = radius.max(min_cell).max(1e-9);
        let nx = ((x1 - x0) / cell) as usize + 1;
        let ny = ((y1 - y0) / cell) as usize + 1;

        let mut counts = vec![0usize; nx * ny + 1];
        let index = |p: &Point| -> usize {
            let cx = (((p.x - x0) / cell) as usize).min(nx - 1);
            let cy = (((p.y - y0) / cell) as usize).min(ny - 1);
            cy * nx + cx
        };
        for p in points {
            counts[index(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut entries = vec![0usize; points.len()];
        for (i, p) in points.iter().enumerate() {
            let c = index(p);
            entries[fill[c]] = i;
            fill[c] += 1;
        }
        CellGrid {
            x0,
            y0,
            cell,
            nx,
            ny,
            starts,
            entries,
        }
    }

    /// Calls `visit(j)` for every stored index whose cell may hold a point
    /// within `radius` of `p` (a superset of the true neighbours).
    pub(crate) fn for_candidates<F: FnMut(usize)>(&self, p: &Point, radius: f64, mut visit: F) {
        let span = (radius / self.cell).ceil() as i64;
        let cx = ((p.x - self.x0) / self.cell).floor() as i64;
        let cy = ((p.y - self.y0) / self.cell).floor() as i64;
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        for gy in (cy - span).max(0)..=(cy + span).min(ny - 1) {
            for gx in (cx - span).max(0)..=(cx + span).min(nx - 1) {
                let c = (gy * nx + gx) as usize;
                for &j in &self.entries[self.starts[c]..self.starts[c + 1]] {
                    visit(j);
                }
            }
        }
    }
}

fn check_marks(parent: &[MarkedPoint]) -> Result<()> {
    match parent.iter().find(|p| !(0.0..=1.0).contains(&p.mark)) {
        Some(bad) => Err(Error::param(
            "mark",
            format!("marks must lie in [0, 1], got {}", bad.mark),
        )),
        None => Ok(()),
    }
}

/// Type-II retention decision for every parent point.
///
/// Point `i` survives iff no other parent within distance `≤ delta` has a
/// strictly smaller mark; equal marks are ordered by index. Decisions use the
/// whole parent set, so callers simulating a guard region pass all of it.
pub fn matern2_retained(parent: &[MarkedPoint], delta: f64) -> Result<Vec<bool>> {
    check_marks(parent)?;
    if !(delta >= 0.0) {
        return Err(Error::param("delta", format!("must be non-negative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(vec![true; parent.len()]);
    }
    let positions: Vec<Point> = parent.iter().map(|p| p.position).collect();
    let grid = CellGrid::new(&positions, delta);
    Ok((0..parent.len())
        .map(|i| {
            let me = &parent[i];
            let mut keep = true;
            grid.for_candidates(&me.position, delta, |j| {
                if !keep || j == i {
                    return;
                }
                let other = &parent[j];
                let beats = other.mark < me.mark || (other.mark == me.mark && j < i);
                if beats && other.position.distance(&me.position) <= delta {
                    keep = false;
                }
            });
            keep
        })
        .collect())
}

/// Matérn type-II thinning of `parent`, reporting the survivors that fall in
/// `report`.
pub fn matern2_thin(parent: &[MarkedPoint], delta: f64, report: Window) -> Result<PointPattern> {
    let keep = matern2_retained(parent, delta)?;
    let points = parent
        .iter()
        .zip(keep)
        .filter(|(p, k)| *k && report.contains(&p.position))
        .map(|(p, _)| p.position)
        .collect();
    Ok(PointPattern { points, window: report })
}

/// Hard-core pattern on `window`: parents are simulated on the window grown
/// by a `2δ` guard margin so retention near the edge is unbiased.
pub fn sample_hcpp<R: Rng + ?Sized>(params: HcppParams, window: Window, rng: &mut R) -> Result<PointPattern> {
    let outer = window.expanded(2.0 * params.delta())?;
    let parent = sample_marked_ppp(params.lambda_p(), outer, rng)?;
    matern2_thin(&parent, params.delta(), window)
}

/// Intensity of the thinned process, `ζ⁽¹⁾ = (1 − e^{−λ_P πδ²}) / (πδ²)`.
pub fn first_moment(params: HcppParams) -> f64 {
    if params.delta == 0.0 {
        return params.lambda_p;
    }
    let area = PI * params.delta * params.delta;
    -(-params.lambda_p * area).exp_m1() / area
}

/// Area of the union of two radius-`delta` discs whose centres are `r` apart.
pub fn union_area(r: f64, delta: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::param("r", format!("must be non-negative, got {r}")));
    }
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    let d2 = delta * delta;
    if r >= 2.0 * delta {
        return Ok(2.0 * PI * d2);
    }
    Ok(2.0 * PI * d2 - 2.0 * d2 * (r / (2.0 * delta)).acos() + r * (d2 - r * r / 4.0).sqrt())
}

/// `(e^{−y} − 1 + y) / y²`, accurate for small `y`.
fn second_order_decay(y: f64) -> f64 {
    if y < 0.1 {
        // Σ_k (−y)^k / (k + 2)!
        let mut term = 0.5;
        let mut sum = term;
        for k in 1..20 {
            term *= -y / (k + 2) as f64;
            sum += term;
        }
        sum
    } else {
        ((-y).exp_m1() + y) / (y * y)
    }
}

/// Pair-retention kernel `φ(r)`: the joint survival weight of two parent
/// points `r` apart, normalised so that `λ_P² φ(r)` is the product density.
/// Zero inside the hard core.
///
/// With `a = πδ²` and `V = V_δ(r)` the closed form
/// `[2V(1 − e^{−λa}) − 2a(1 − e^{−λV})] / [λ² a V (V − a)]` is evaluated as
/// `2[V h(λV) − a h(λa)] / (V − a)` with `h(y) = (e^{−y} − 1 + y)/y²`,
/// which avoids the first-order cancellation in the numerator.
pub fn pair_retention(r: f64, params: HcppParams) -> f64 {
    let (lambda, delta) = (params.lambda_p, params.delta);
    if delta == 0.0 {
        return if r > 0.0 { 1.0 } else { 0.0 };
    }
    if r <= delta {
        return 0.0;
    }
    let a = PI * delta * delta;
    let v = union_area(r, delta).expect("r > delta > 0");
    2.0 * (v * second_order_decay(lambda * v) - a * second_order_decay(lambda * a)) / (v - a)
}

/// Second-order product density `ζ⁽²⁾(r) = λ_P² φ(r)`.
pub fn second_moment(r: f64, params: HcppParams) -> f64 {
    params.lambda_p * params.lambda_p * pair_retention(r, params)
}
