//! Unstructured 2D meshes of triangles and quadrangles.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Wall,
    Fluid,
    Inflow,
    Outflow,
}

impl FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(BoundaryKind::Wall),
            "fluid" => Ok(BoundaryKind::Fluid),
            "inflow" => Ok(BoundaryKind::Inflow),
            "outflow" => Ok(BoundaryKind::Outflow),
            other => Err(Error::MalformedMesh(format!(
                "unknown boundary marker '{other}'"
            ))),
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryKind::Wall => "wall",
            BoundaryKind::Fluid => "fluid",
            BoundaryKind::Inflow => "inflow",
            BoundaryKind::Outflow => "outflow",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceNeighbor {
    Cell(usize),
    Boundary(BoundaryKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub area: f64,
    pub centroid: Point,
    /// Faces in the order of the polygon edges.
    pub faces: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Endpoints in the counterclockwise order of the left cell.
    pub vertices: (usize, usize),
    pub length: f64,
    /// Unit normal pointing out of the left cell.
    pub normal: Point,
    pub midpoint: Point,
    pub left: usize,
    pub right: FaceNeighbor,
    /// Point on the face used for reconstruction: the barycenter-segment crossing for
    /// internal faces, the midpoint on the boundary.
    pub point: Point,
    /// `point = (1 - θ) x_left + θ x_right` for internal faces.
    pub theta: Option<f64>,
}

impl Face {
    pub fn right_cell(&self) -> Option<usize> {
        match self.right {
            FaceNeighbor::Cell(c) => Some(c),
            FaceNeighbor::Boundary(_) => None,
        }
    }

    pub fn boundary(&self) -> Option<BoundaryKind> {
        match self.right {
            FaceNeighbor::Boundary(b) => Some(b),
            FaceNeighbor::Cell(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborMode {
    Fluid,
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Cell(usize),
    /// A wall face acting as a neighbour.
    WallFace(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnstructuredMesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    /// Number of faces whose interface point fell back to the midpoint.
    pub fallback_faces: usize,
}

fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn polygon_area_centroid(pts: &[Point]) -> (f64, Point) {
    let n = pts.len();
    let mut a2 = 0.0;
    let mut c = Point::zeros();
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let w = cross(&p, &q);
        a2 += w;
        c += (p + q) * w;
    }
    (0.5 * a2, c / (3.0 * a2))
}

fn segments_cross(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let o = |p: &Point, q: &Point, r: &Point| cross(&(q - p), &(r - p));
    let (d1, d2) = (o(a, b, c), o(a, b, d));
    let (d3, d4) = (o(c, d, a), o(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (no, line) in self.inner.by_ref() {
            let line = line.split('#').next().unwrap_or("");
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok((no + 1, toks));
            }
        }
        Err(Error::MalformedMesh("unexpected end of file".into()))
    }

    fn header(&mut self, name: &str) -> Result<usize> {
        let (no, toks) = self.next_tokens()?;
        if toks.len() != 2 || toks[0] != name {
            return Err(Error::MalformedMesh(format!(
                "line {no}: expected '{name} <count>'"
            )));
        }
        parse_num(toks[1], no)
    }
}

fn parse_num<T: FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::MalformedMesh(format!("line {line}: cannot parse '{s}'")))
}

/// Per undirected edge: `(cell, from, to)` for each cell traversing it.
type EdgeOwners = HashMap<(usize, usize), Vec<(usize, usize, usize)>>;

impl UnstructuredMesh {
    /// Reads the plain-text mesh format (`vertices`, `cells`, `boundary` sections).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines {
            inner: text.lines().enumerate(),
        };
        let nv = lines.header("vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (no, t) = lines.next_tokens()?;
            if t.len() != 2 {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: vertex needs two coordinates"
                )));
            }
            let p = Point::new(parse_num(t[0], no)?, parse_num(t[1], no)?);
            if !p.iter().all(|x| x.is_finite()) {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: non-finite vertex"
                )));
            }
            vertices.push(p);
        }
        let nc = lines.header("cells")?;
        let mut polys = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (no, t) = lines.next_tokens()?;
            let k: usize = parse_num(t[0], no)?;
            if k != 3 && k != 4 {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: cells must have 3 or 4 vertices, got {k}"
                )));
            }
            if t.len() != k + 1 {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: expected {k} vertex indices"
                )));
            }
            let ids = t[1..]
                .iter()
                .map(|s| parse_num::<usize>(s, no))
                .collect::<Result<Vec<_>>>()?;
            if let Some(&bad) = ids.iter().find(|&&i| i >= nv) {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: vertex index {bad} out of range"
                )));
            }
            polys.push((no, ids));
        }
        let nb = lines.header("boundary")?;
        let mut markers = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (no, t) = lines.next_tokens()?;
            if t.len() != 3 {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: boundary line needs 'i j marker'"
                )));
            }
            let (i, j): (usize, usize) = (parse_num(t[0], no)?, parse_num(t[1], no)?);
            markers.push((no, i, j, t[2].parse::<BoundaryKind>()?));
        }
        if let Ok((no, _)) = lines.next_tokens() {
            return Err(Error::MalformedMesh(format!("line {no}: trailing content")));
        }
        Self::build(vertices, polys, markers)
    }

    fn build(
        vertices: Vec<Point>,
        polys: Vec<(usize, Vec<usize>)>,
        markers: Vec<(usize, usize, usize, BoundaryKind)>,
    ) -> Result<Self> {
        let mut cells = Vec::with_capacity(polys.len());
        for (c, (no, ids)) in polys.iter().enumerate() {
            let mut uniq = ids.clone();
            uniq.sort_unstable();
            uniq.dedup();
            if uniq.len() != ids.len() {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: cell {c} repeats a vertex"
                )));
            }
            let pts: Vec<Point> = ids.iter().map(|&i| vertices[i]).collect();
            if pts.len() == 4
                && (segments_cross(&pts[0], &pts[1], &pts[2], &pts[3])
                    || segments_cross(&pts[1], &pts[2], &pts[3], &pts[0]))
            {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: cell {c} is self-intersecting"
                )));
            }
            let (area, centroid) = polygon_area_centroid(&pts);
            if !(area > 0.0) {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: cell {c} has non-positive area {area} (vertices must be counterclockwise)"
                )));
            }
            cells.push(Cell {
                vertices: ids.clone(),
                area,
                centroid,
                faces: Vec::with_capacity(ids.len()),
            });
        }

        let mut marker_map: HashMap<(usize, usize), (usize, BoundaryKind)> = HashMap::new();
        for &(no, i, j, kind) in &markers {
            let key = (i.min(j), i.max(j));
            if marker_map.insert(key, (no, kind)).is_some() {
                return Err(Error::MalformedMesh(format!(
                    "line {no}: duplicate boundary edge {i}-{j}"
                )));
            }
        }

        // first pass: who owns which edge, in which direction
        let mut edges: EdgeOwners = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            let k = cell.vertices.len();
            for e in 0..k {
                let a = cell.vertices[e];
                let b = cell.vertices[(e + 1) % k];
                edges
                    .entry((a.min(b), a.max(b)))
                    .or_default()
                    .push((c, a, b));
            }
        }
        for (key, owners) in &edges {
            if owners.len() > 2 {
                return Err(Error::MalformedMesh(format!(
                    "edge {}-{} is shared by {} cells",
                    key.0,
                    key.1,
                    owners.len()
                )));
            }
            if owners.len() == 2 && owners[0].1 == owners[1].1 {
                return Err(Error::MalformedMesh(format!(
                    "cells {} and {} traverse edge {}-{} in the same direction",
                    owners[0].0, owners[1].0, key.0, key.1
                )));
            }
        }
        for (key, (no, _)) in &marker_map {
            match edges.get(key).map(|o| o.len()) {
                None => {
                    return Err(Error::MalformedMesh(format!(
                        "line {no}: boundary edge {}-{} is not a cell edge",
                        key.0, key.1
                    )))
                }
                Some(2) => {
                    return Err(Error::MalformedMesh(format!(
                        "line {no}: edge {}-{} is internal but carries a boundary marker",
                        key.0, key.1
                    )))
                }
                _ => {}
            }
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut face_of: HashMap<(usize, usize), usize> = HashMap::new();
        for c in 0..cells.len() {
            let k = cells[c].vertices.len();
            for e in 0..k {
                let a = cells[c].vertices[e];
                let b = cells[c].vertices[(e + 1) % k];
                let key = (a.min(b), a.max(b));
                if let Some(&f) = face_of.get(&key) {
                    cells[c].faces.push(f);
                    continue;
                }
                let owners = &edges[&key];
                let right = if owners.len() == 2 {
                    let other = if owners[0].0 == c {
                        owners[1].0
                    } else {
                        owners[0].0
                    };
                    FaceNeighbor::Cell(other)
                } else {
                    match marker_map.get(&key) {
                        Some(&(_, kind)) => FaceNeighbor::Boundary(kind),
                        None => {
                            return Err(Error::MalformedMesh(format!(
                                "boundary edge {a}-{b} has no marker"
                            )))
                        }
                    }
                };
                let (pa, pb) = (vertices[a], vertices[b]);
                let d = pb - pa;
                let length = d.norm();
                if !(length > 0.0) {
                    return Err(Error::MalformedMesh(format!(
                        "edge {a}-{b} has zero length"
                    )));
                }
                let mid = 0.5 * (pa + pb);
                face_of.insert(key, faces.len());
                cells[c].faces.push(faces.len());
                faces.push(Face {
                    vertices: (a, b),
                    length,
                    normal: Point::new(d.y, -d.x) / length,
                    midpoint: mid,
                    left: c,
                    right,
                    point: mid,
                    theta: None,
                });
            }
        }

        let mut fallback_faces = 0;
        for (fi, face) in faces.iter_mut().enumerate() {
            if let FaceNeighbor::Cell(r) = face.right {
                let (y, theta, ok) = crossing(
                    &cells[face.left].centroid,
                    &cells[r].centroid,
                    &vertices[face.vertices.0],
                    &vertices[face.vertices.1],
                );
                if !ok {
                    fallback_faces += 1;
                    log::warn!("face {fi}: barycenter segment misses the face, using the midpoint (theta = {theta:.3})");
                }
                face.point = y;
                face.theta = Some(theta);
            }
        }

        Ok(UnstructuredMesh {
            vertices,
            cells,
            faces,
            fallback_faces,
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read mesh {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Outward unit normal of face `f` seen from cell `k`.
    pub fn outward_normal(&self, k: usize, f: usize) -> Point {
        let face = &self.faces[f];
        if face.left == k {
            face.normal
        } else {
            -face.normal
        }
    }

    /// Interface point of an internal face and the weight `θ_{K,f}` seen from `k`.
    pub fn interface_point(&self, k: usize, f: usize) -> Result<(Point, f64)> {
        let face = &self.faces[f];
        let theta = face.theta.ok_or(Error::NotInternalFace { face: f })?;
        if face.left == k {
            Ok((face.point, theta))
        } else {
            Ok((face.point, 1.0 - theta))
        }
    }

    /// The cell on the other side of `f`, if any.
    pub fn across(&self, k: usize, f: usize) -> Option<usize> {
        let face = &self.faces[f];
        match face.right {
            FaceNeighbor::Cell(r) if face.left == k => Some(r),
            FaceNeighbor::Cell(_) => Some(face.left),
            FaceNeighbor::Boundary(_) => None,
        }
    }

    pub fn neighbor_set(&self, k: usize, mode: NeighborMode) -> Vec<Neighbor> {
        let mut out = Vec::new();
        for &f in &self.cells[k].faces {
            match self.across(k, f) {
                Some(c) => out.push(Neighbor::Cell(c)),
                None => {
                    if mode == NeighborMode::Wall
                        && self.faces[f].boundary() == Some(BoundaryKind::Wall)
                    {
                        out.push(Neighbor::WallFace(f));
                    }
                }
            }
        }
        out
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }
}

/// Crossing of segment `[xl, xr]` with the line through `a, b`. Falls back to the
/// midpoint of `[a, b]` with a clamped projection parameter when they miss.
fn crossing(xl: &Point, xr: &Point, a: &Point, b: &Point) -> (Point, f64, bool) {
    let d = xr - xl;
    let e = b - a;
    let n = Point::new(e.y, -e.x);
    let denom = d.dot(&n);
    if denom != 0.0 {
        let s = (a - xl).dot(&n) / denom;
        let y = xl + s * d;
        let t = (y - a).dot(&e) / e.norm_squared();
        if s > 0.0 && s < 1.0 && (0.0..=1.0).contains(&t) {
            return (y, s, true);
        }
    }
    let mid = 0.5 * (a + b);
    let s = ((mid - xl).dot(&d) / d.norm_squared()).clamp(0.05, 0.95);
    (mid, s, false)
}
