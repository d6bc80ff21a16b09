//! Closed triangle meshes and a minimal OBJ-style text format.
//!
//! The format has one record per line: `v x y z` for a vertex and `f i j k`
//! for a triangle with 1-based vertex indices (`i/t/n` forms keep only the
//! vertex index; polygons are fan-triangulated). `#` starts a comment.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Point3, Result};

#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    normals: Vec<Point3>,
    centroids: Vec<Point3>,
    areas: Vec<f64>,
}

impl TriMesh {
    /// Validates that the surface is closed, consistently oriented with
    /// outward normals and free of degenerate panels.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.len() < 4 {
            return Err(Error::InvalidMesh(format!("{} triangles cannot close a surface", triangles.len())));
        }
        let mut normals = Vec::with_capacity(triangles.len());
        let mut centroids = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let cross = (b - a).cross(&(c - a));
            let area = 0.5 * cross.norm();
            if !(area > 0.0) || !area.is_finite() {
                return Err(Error::InvalidMesh(format!("triangle {t} is degenerate")));
            }
            normals.push(cross / (2.0 * area));
            centroids.push((a + b + c) / 3.0);
            areas.push(area);
            for e in 0..3 {
                *edges.entry((tri[e], tri[(e + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(i, j), &count) in &edges {
            if count != 1 {
                return Err(Error::InvalidMesh(format!(
                    "edge {i}-{j} is traversed {count} times in the same direction"
                )));
            }
            if !edges.contains_key(&(j, i)) {
                return Err(Error::InvalidMesh(format!("edge {i}-{j} has no opposite half-edge (open surface)")));
            }
        }
        let mesh = Self {
            vertices,
            triangles,
            normals,
            centroids,
            areas,
        };
        let volume = mesh.signed_volume();
        if !(volume > 0.0) {
            return Err(Error::InvalidMesh(format!(
                "signed volume {volume:.3e} is not positive (normals must point outward)"
            )));
        }
        Ok(mesh)
    }

    /// Geodesic sphere: each icosahedron face split into `frequency²`
    /// triangles and projected onto the sphere (`20 frequency²` panels).
    pub fn icosphere(radius: f64, frequency: usize) -> Result<Self> {
        if !(radius > 0.0) || frequency == 0 {
            return Err(Error::InvalidInput("icosphere needs radius > 0 and frequency >= 1".into()));
        }
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let base: Vec<Point3> = [
            (-1.0, phi, 0.0),
            (1.0, phi, 0.0),
            (-1.0, -phi, 0.0),
            (1.0, -phi, 0.0),
            (0.0, -1.0, phi),
            (0.0, 1.0, phi),
            (0.0, -1.0, -phi),
            (0.0, 1.0, -phi),
            (phi, 0.0, -1.0),
            (phi, 0.0, 1.0),
            (-phi, 0.0, -1.0),
            (-phi, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Point3::new(x, y, z).normalize())
        .collect();
        let faces: [[usize; 3]; 20] = [
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
        let n = frequency;
        let mut vertices = Vec::new();
        let mut lookup: HashMap<[i64; 3], usize> = HashMap::new();
        let mut vertex = |p: Point3| -> usize {
            let p = p.normalize();
            let key = [p.x, p.y, p.z].map(|c| (c * 1e9).round() as i64);
            *lookup.entry(key).or_insert_with(|| {
                vertices.push(p * radius);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(20 * n * n);
        for f in faces {
            let [a, b, c] = f.map(|i| base[i]);
            let at = |i: usize, j: usize| a + (b - a) * (i as f64 / n as f64) + (c - a) * (j as f64 / n as f64);
            let mut idx = vec![vec![0usize; n + 1]; n + 1];
            for i in 0..=n {
                for j in 0..=(n - i) {
                    idx[i][j] = vertex(at(i, j));
                }
            }
            for i in 0..n {
                for j in 0..(n - i) {
                    triangles.push([idx[i][j], idx[i + 1][j], idx[i][j + 1]]);
                    if i + j + 1 < n {
                        triangles.push([idx[i + 1][j], idx[i + 1][j + 1], idx[i][j + 1]]);
                    }
                }
            }
        }
        Self::new(vertices, triangles)
    }

    /// Icosphere scaled along the coordinate axes.
    pub fn ellipsoid(axes: [f64; 3], frequency: usize) -> Result<Self> {
        if axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidInput("ellipsoid semi-axes must be positive".into()));
        }
        let unit = Self::icosphere(1.0, frequency)?;
        let vertices = unit
            .vertices
            .iter()
            .map(|v| Point3::new(v.x * axes[0], v.y * axes[1], v.z * axes[2]))
            .collect();
        Self::new(vertices, unit.triangles)
    }

    /// Smallest icosphere frequency giving at least `panels` panels.
    pub fn frequency_for(panels: usize) -> usize {
        ((panels as f64 / 20.0).sqrt().ceil() as usize).max(1)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let bad = |what: &str| Error::InvalidMesh(format!("line {}: {what}: {raw:?}", lineno + 1));
            match parts.next() {
                Some("v") => {
                    let c: Vec<f64> = parts
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("malformed vertex"))?;
                    if c.len() < 3 || c.iter().any(|v| !v.is_finite()) {
                        return Err(bad("vertex needs three finite coordinates"));
                    }
                    vertices.push(Point3::new(c[0], c[1], c[2]));
                }
                Some("f") => {
                    let idx: Vec<usize> = parts
                        .map(|s| s.split('/').next().unwrap_or("").parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("malformed face"))?;
                    if idx.len() < 3 || idx.contains(&0) {
                        return Err(bad("face needs at least three 1-based indices"));
                    }
                    for w in 1..idx.len() - 1 {
                        triangles.push([idx[0] - 1, idx[w] - 1, idx[w + 1] - 1]);
                    }
                }
                _ => {}
            }
        }
        Self::new(vertices, triangles)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidMesh(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn normals(&self) -> &[Point3] {
        &self.normals
    }

    pub fn centroids(&self) -> &[Point3] {
        &self.centroids
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn panel_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn surface_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Enclosed volume by the divergence theorem.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Center of mass of the enclosed solid.
    pub fn volume_centroid(&self) -> Point3 {
        let mut acc = Point3::zeros();
        let mut vol = 0.0;
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let v = a.dot(&b.cross(&c)) / 6.0;
            acc += v * (a + b + c) / 4.0;
            vol += v;
        }
        acc / vol
    }

    pub fn translated(&self, shift: &Point3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v + shift).collect(),
            triangles: self.triangles.clone(),
            normals: self.normals.clone(),
            centroids: self.centroids.iter().map(|c| c + shift).collect(),
            areas: self.areas.clone(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v * factor).collect(),
            triangles: self.triangles.clone(),
            normals: self.normals.clone(),
            centroids: self.centroids.iter().map(|c| c * factor).collect(),
            areas: self.areas.iter().map(|a| a * factor * factor).collect(),
        }
    }

    /// Half of the largest vertex-to-vertex distance.
    pub fn half_diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max((a - b).norm_squared());
            }
        }
        0.5 * best.sqrt()
    }
}
