//! Scatterer supports (polygons, sampled parametric curves, disks),
//! point-membership queries, and the uniform sampling grids used by the
//! volume solver.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Number of parameter samples used for the builtin curves (well above the
/// 512-sample floor required for closed polylines).
const CURVE_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

#[derive(Debug, Clone)]
pub enum Geometry {
    /// Simple polygon, counterclockwise vertices, no closing repeat.
    Polygon { vertices: Vec<Point2> },
    /// Closed polyline sampled from a parametric curve (first == last).
    ParametricCurve { samples: Vec<Point2> },
    Disk { center: Point2, radius: f64 },
}

impl Geometry {
    pub fn polygon(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::config("polygon needs at least 3 vertices"));
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(Error::config("polygon vertices must be counterclockwise"));
        }
        if polygon_self_intersects(&vertices) {
            return Err(Error::config("polygon is self-intersecting"));
        }
        Ok(Geometry::Polygon { vertices })
    }

    pub fn parametric_curve(samples: Vec<Point2>) -> Result<Self> {
        if samples.len() < 512 {
            return Err(Error::config(format!(
                "parametric polyline needs >= 512 samples, got {}",
                samples.len()
            )));
        }
        let first = samples[0];
        let last = *samples.last().unwrap();
        if first.dist(last) > 1e-12 {
            return Err(Error::config("parametric polyline must be closed (first == last)"));
        }
        Ok(Geometry::ParametricCurve { samples })
    }

    pub fn disk(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::config(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Geometry::Disk { center, radius })
    }

    /// Strict interior test; boundary points may land on either side.
    /// Polygons and polylines use the even-odd ray-crossing rule.
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Geometry::Disk { center, radius } => p.dist(*center) < *radius,
            Geometry::Polygon { vertices } => ray_crossings_odd(vertices, p, true),
            Geometry::ParametricCurve { samples } => ray_crossings_odd(samples, p, false),
        }
    }

    pub fn bounding_box(&self) -> BBox {
        match self {
            Geometry::Disk { center, radius } => BBox {
                xmin: center.x - radius,
                xmax: center.x + radius,
                ymin: center.y - radius,
                ymax: center.y + radius,
            },
            Geometry::Polygon { vertices } => BBox::of_points(vertices),
            Geometry::ParametricCurve { samples } => BBox::of_points(samples),
        }
    }

    /// Radius of the smallest origin-centered circle containing the support.
    /// Governs the angular bandwidth of the far-field operator.
    pub fn origin_circumradius(&self) -> f64 {
        match self {
            Geometry::Disk { center, radius } => center.norm() + radius,
            Geometry::Polygon { vertices } => fold_max_norm(vertices),
            Geometry::ParametricCurve { samples } => fold_max_norm(samples),
        }
    }

    /// Radius of a small ball containing the support regardless of where it
    /// sits (max distance from the bounding-box center). Slight overestimate
    /// of the minimal enclosing ball, which keeps lower bounds valid.
    pub fn enclosing_ball_radius(&self) -> f64 {
        if let Geometry::Disk { radius, .. } = self {
            return *radius;
        }
        let bb = self.bounding_box();
        let c = Point2::new(0.5 * (bb.xmin + bb.xmax), 0.5 * (bb.ymin + bb.ymax));
        let pts = match self {
            Geometry::Polygon { vertices } => vertices,
            Geometry::ParametricCurve { samples } => samples,
            Geometry::Disk { .. } => unreachable!(),
        };
        pts.iter().map(|p| p.dist(c)).fold(0.0, f64::max)
    }
}

fn fold_max_norm(pts: &[Point2]) -> f64 {
    pts.iter().map(|p| p.norm()).fold(0.0, f64::max)
}

fn signed_area(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    0.5 * a
}

fn polygon_self_intersects(vertices: &[Point2]) -> bool {
    let n = vertices.len();
    let seg = |i: usize| (vertices[i], vertices[(i + 1) % n]);
    for i in 0..n {
        for j in (i + 1)..n {
            // Adjacent edges share an endpoint by construction.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Even-odd crossing count for a horizontal ray toward +x. `wrap` closes the
/// ring implicitly (polygon); polylines already repeat their first sample.
fn ray_crossings_odd(pts: &[Point2], p: Point2, wrap: bool) -> bool {
    let n = if wrap { pts.len() } else { pts.len() - 1 };
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[if wrap { (i + 1) % pts.len() } else { i + 1 }];
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Penetrable medium: support plus constant refractive index n (contrast
/// q = n - 1 inside, 0 outside).
#[derive(Debug, Clone)]
pub struct MediumSpec {
    pub geometry: Geometry,
    pub refractive_index: f64,
}

impl MediumSpec {
    pub fn new(geometry: Geometry, refractive_index: f64) -> Result<Self> {
        if !(refractive_index > 0.0) || refractive_index == 1.0 {
            return Err(Error::config(format!(
                "refractive index must be positive and != 1, got {refractive_index}"
            )));
        }
        Ok(MediumSpec { geometry, refractive_index })
    }

    pub fn contrast(&self) -> f64 {
        self.refractive_index - 1.0
    }
}

/// Builds one of the reference scatterers by name.
///
/// `rain_small`: small drop (sin(t/2)/5, -sin(t)/10) rotated by 270° about
/// the origin, corner fixed at (0,0). `rain_regular`: drop
/// (sin(t/2), -sin(t)/2) translated so its corner sits at (2,3).
/// `heart`: cardioid-like curve with a reflex cusp at (-1,-0.5).
/// `square`: side 2 centered at the origin. `hexagon`: regular, circumradius
/// (= edge length) 2. `disk`: unit disk.
pub fn builtin_medium(name: &str, refractive_index: f64) -> Result<MediumSpec> {
    let geometry = match name {
        "rain_small" => {
            // 270° rotation maps (x, y) -> (y, -x).
            sample_curve(|t| {
                let x = (t / 2.0).sin() / 5.0;
                let y = -t.sin() / 10.0;
                Point2::new(y, -x)
            })?
        }
        "rain_regular" => sample_curve(|t| Point2::new((t / 2.0).sin() + 2.0, -t.sin() / 2.0 + 3.0))?,
        "heart" => sample_curve(|t| {
            let c = 1.0 - t.cos();
            Point2::new(
                c * (1.5 * t.sin() - 0.5 * (2.0 * t).sin()) / 4.0 - 1.0,
                c * (t.cos() - 0.5 * (2.0 * t).cos()) / 4.0 - 0.5,
            )
        })?,
        "square" => Geometry::polygon(vec![
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
        ])?,
        "hexagon" => {
            let verts = (0..6)
                .map(|j| {
                    let a = PI / 3.0 * j as f64;
                    Point2::new(2.0 * a.cos(), 2.0 * a.sin())
                })
                .collect();
            Geometry::polygon(verts)?
        }
        "disk" => Geometry::disk(Point2::new(0.0, 0.0), 1.0)?,
        other => {
            return Err(Error::config(format!(
                "unknown builtin medium '{other}' (expected rain_small, rain_regular, heart, square, hexagon, disk)"
            )))
        }
    };
    MediumSpec::new(geometry, refractive_index)
}

/// Declared cusp/corner locations of a builtin medium (ground truth for
/// regression fixtures). Empty for the disk.
pub fn builtin_corners(name: &str) -> Vec<Point2> {
    match name {
        "rain_small" => vec![Point2::new(0.0, 0.0)],
        "rain_regular" => vec![Point2::new(2.0, 3.0)],
        "heart" => vec![Point2::new(-1.0, -0.5)],
        "square" => vec![
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
        ],
        "hexagon" => (0..6)
            .map(|j| {
                let a = PI / 3.0 * j as f64;
                Point2::new(2.0 * a.cos(), 2.0 * a.sin())
            })
            .collect(),
        _ => vec![],
    }
}

fn sample_curve(f: impl Fn(f64) -> Point2) -> Result<Geometry> {
    let mut samples: Vec<Point2> = (0..=CURVE_SAMPLES)
        .map(|i| f(2.0 * PI * i as f64 / CURVE_SAMPLES as f64))
        .collect();
    // The builtins are exactly periodic; pin the closure against roundoff.
    let first = samples[0];
    *samples.last_mut().unwrap() = first;
    Geometry::parametric_curve(samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BBox {
    pub fn of_points(pts: &[Point2]) -> BBox {
        let mut bb = BBox {
            xmin: f64::INFINITY,
            xmax: f64::NEG_INFINITY,
            ymin: f64::INFINITY,
            ymax: f64::NEG_INFINITY,
        };
        for p in pts {
            bb.xmin = bb.xmin.min(p.x);
            bb.xmax = bb.xmax.max(p.x);
            bb.ymin = bb.ymin.min(p.y);
            bb.ymax = bb.ymax.max(p.y);
        }
        bb
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }
}

/// Uniform cell grid over a rectangular box, `resolution` cells per axis,
/// values sampled at cell centers, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub bbox: BBox,
    pub resolution: usize,
}

impl Grid {
    pub fn new(bbox: BBox, resolution: usize) -> Result<Self> {
        if resolution < 32 {
            return Err(Error::config(format!("grid resolution must be >= 32, got {resolution}")));
        }
        if !(bbox.width() > 0.0) || !(bbox.height() > 0.0) {
            return Err(Error::config("grid bounding box is degenerate"));
        }
        Ok(Grid { bbox, resolution })
    }

    /// Grid covering the geometry with a relative margin (clamped so the
    /// geometry stays >= 2.5 cells away from the box edge).
    pub fn covering(geometry: &Geometry, margin_fraction: f64, resolution: usize) -> Result<Self> {
        let bb = geometry.bounding_box();
        let extent = bb.width().max(bb.height());
        let mut pad = margin_fraction.max(0.02) * extent;
        let min_pad = 2.6 * extent / (resolution as f64 - 5.2);
        pad = pad.max(min_pad);
        // Square cells: expand the short axis to match the long one.
        let side = extent + 2.0 * pad;
        let cx = 0.5 * (bb.xmin + bb.xmax);
        let cy = 0.5 * (bb.ymin + bb.ymax);
        Grid::new(
            BBox {
                xmin: cx - side / 2.0,
                xmax: cx + side / 2.0,
                ymin: cy - side / 2.0,
                ymax: cy + side / 2.0,
            },
            resolution,
        )
    }

    pub fn hx(&self) -> f64 {
        self.bbox.width() / self.resolution as f64
    }

    pub fn hy(&self) -> f64 {
        self.bbox.height() / self.resolution as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.resolution + ix
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point2 {
        Point2::new(
            self.bbox.xmin + (ix as f64 + 0.5) * self.hx(),
            self.bbox.ymin + (iy as f64 + 0.5) * self.hy(),
        )
    }

    /// Checks the containment invariant: geometry bbox inside the grid with
    /// at least two cells of margin on every side.
    pub fn check_contains(&self, geometry: &Geometry) -> Result<()> {
        let bb = geometry.bounding_box();
        let (hx, hy) = (self.hx(), self.hy());
        let ok = bb.xmin >= self.bbox.xmin + 2.0 * hx
            && bb.xmax <= self.bbox.xmax - 2.0 * hx
            && bb.ymin >= self.bbox.ymin + 2.0 * hy
            && bb.ymax <= self.bbox.ymax - 2.0 * hy;
        if ok {
            Ok(())
        } else {
            Err(Error::config(
                "grid does not contain the geometry with >= 2 cells of margin",
            ))
        }
    }
}

/// Samples the contrast q = n - 1 onto the grid. `supersample` points per
/// axis per cell anti-alias boundary cells by fractional occupancy;
/// `supersample = 1` is plain cell-center sampling.
pub fn rasterize_contrast(medium: &MediumSpec, grid: &Grid, supersample: u32) -> Result<Vec<f64>> {
    grid.check_contains(&medium.geometry)?;
    let s = supersample.max(1) as usize;
    let q = medium.contrast();
    let (hx, hy) = (grid.hx(), grid.hy());
    let res = grid.resolution;
    let mut field = vec![0.0; grid.len()];
    for iy in 0..res {
        for ix in 0..res {
            let x0 = grid.bbox.xmin + ix as f64 * hx;
            let y0 = grid.bbox.ymin + iy as f64 * hy;
            let mut hits = 0usize;
            for a in 0..s {
                for b in 0..s {
                    let p = Point2::new(
                        x0 + (a as f64 + 0.5) * hx / s as f64,
                        y0 + (b as f64 + 0.5) * hy / s as f64,
                    );
                    if medium.geometry.contains(p) {
                        hits += 1;
                    }
                }
            }
            if hits > 0 {
                field[grid.index(ix, iy)] = q * hits as f64 / (s * s) as f64;
            }
        }
    }
    Ok(field)
}
