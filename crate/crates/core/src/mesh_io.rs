//! JSON mesh files:
//! `{"vertices":[[x,y]...],"faces":[[i,j,k]...],"edge_lengths":{"i-j":ℓ},"ambient":"linf|l2|matrix","matrix":...}`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Norm, Point};
use crate::metric::{Ambient, MeshParts, MetricSurfaceMesh, SampledMetricSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientKind {
    L2,
    Linf,
    Matrix,
}

/// On-disk mesh document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    #[serde(default)]
    pub vertices: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edge_lengths: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<AmbientKind>,
    /// Row-major ambient matrix (`null` = ∞), or nested rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Option<f64>>>>,
    /// Per-face length multipliers (weighted planes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_scale: Option<Vec<f64>>,
    /// Vertex count for abstract meshes without coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_vertices: Option<usize>,
}

fn parse_key(k: &str) -> Result<(usize, usize)> {
    let (a, b) = k
        .split_once('-')
        .ok_or_else(|| Error::InvalidMesh(format!("bad edge key {k:?}")))?;
    let p = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidMesh(format!("bad edge key {k:?}")))
    };
    let (a, b) = (p(a)?, p(b)?);
    Ok((a.min(b), a.max(b)))
}

impl MeshFile {
    pub fn into_mesh(self) -> Result<MetricSurfaceMesh> {
        let coords = (!self.vertices.is_empty()).then_some(self.vertices);
        let n_vertices = match (&coords, self.n_vertices) {
            (Some(c), _) => c.len(),
            (None, Some(n)) => n,
            (None, None) => self.faces.iter().flatten().map(|&v| v + 1).max().unwrap_or(0),
        };
        let lengths = if self.edge_lengths.is_empty() {
            None
        } else {
            let mut m = HashMap::new();
            for (k, &l) in &self.edge_lengths {
                m.insert(parse_key(k)?, l);
            }
            Some(m)
        };
        let need_coords = |what: &str| -> Result<()> {
            if coords.is_none() {
                return Err(Error::InvalidMesh(format!("ambient {what} needs vertex coordinates")));
            }
            Ok(())
        };
        let (norm, ambient) = match self.ambient {
            Some(AmbientKind::L2) => {
                need_coords("l2")?;
                (Norm::L2, Ambient::Norm(Norm::L2))
            }
            Some(AmbientKind::Linf) => {
                need_coords("linf")?;
                (Norm::Linf, Ambient::Norm(Norm::Linf))
            }
            Some(AmbientKind::Matrix) => {
                let rows = self
                    .matrix
                    .ok_or_else(|| Error::InvalidMesh("ambient matrix missing".into()))?;
                if rows.len() != n_vertices || rows.iter().any(|r| r.len() != n_vertices) {
                    return Err(Error::InvalidMesh("ambient matrix must be n×n".into()));
                }
                let flat = rows.into_iter().flatten().map(|x| x.unwrap_or(f64::INFINITY)).collect();
                (Norm::L2, Ambient::Matrix(SampledMetricSpace::new((0..n_vertices).collect(), flat)?))
            }
            None => (Norm::L2, Ambient::None),
        };
        MetricSurfaceMesh::from_parts(MeshParts {
            n_vertices,
            coords,
            norm,
            faces: self.faces,
            lengths,
            face_scale: self.face_scale,
            ambient,
        })
    }

    pub fn from_mesh(mesh: &MetricSurfaceMesh) -> Self {
        let edge_lengths = mesh
            .edges()
            .iter()
            .zip(mesh.edge_lengths())
            .map(|(&[a, b], &l)| (format!("{a}-{b}"), l))
            .collect();
        let (ambient, matrix) = match mesh.ambient() {
            Ambient::None => (None, None),
            Ambient::Norm(Norm::L2) => (Some(AmbientKind::L2), None),
            Ambient::Norm(Norm::Linf) => (Some(AmbientKind::Linf), None),
            Ambient::Matrix(m) => {
                let n = m.len();
                let rows = (0..n)
                    .map(|i| m.row(i).iter().map(|&x| x.is_finite().then_some(x)).collect())
                    .collect();
                (Some(AmbientKind::Matrix), Some(rows))
            }
        };
        let fs = mesh.face_scale();
        Self {
            vertices: mesh.coords().map(<[Point]>::to_vec).unwrap_or_default(),
            faces: mesh.faces().to_vec(),
            edge_lengths,
            ambient,
            matrix,
            face_scale: fs.iter().any(|&s| s != 1.0).then(|| fs.to_vec()),
            n_vertices: mesh.coords().is_none().then_some(mesh.n_vertices()),
        }
    }
}

pub fn read_mesh(path: &Path) -> Result<MetricSurfaceMesh> {
    let text = std::fs::read_to_string(path)?;
    let file: MeshFile = serde_json::from_str(&text)?;
    file.into_mesh()
}

pub fn write_mesh(mesh: &MetricSurfaceMesh, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&MeshFile::from_mesh(mesh))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Mesh serialized to a JSON string.
pub fn mesh_to_json(mesh: &MetricSurfaceMesh) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MeshFile::from_mesh(mesh))?)
}

pub fn mesh_from_json(text: &str) -> Result<MetricSurfaceMesh> {
    serde_json::from_str::<MeshFile>(text)?.into_mesh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::induced_length_metric;
    use crate::spaces;

    #[test]
    fn roundtrip_preserves_metric() {
        for mesh in [
            spaces::gen_linf_square(4).unwrap(),
            spaces::gen_weighted_plane(4, &[(1, 1), (2, 1)]).unwrap(),
        ] {
            let back = mesh_from_json(&mesh_to_json(&mesh).unwrap()).unwrap();
            assert_eq!(back.faces(), mesh.faces());
            assert_eq!(back.edge_lengths(), mesh.edge_lengths());
            assert_eq!(back.total_area(), mesh.total_area());
            let (a, b) = (induced_length_metric(&mesh, 2), induced_length_metric(&back, 2));
            assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn abstract_mesh_with_matrix() {
        let text = r#"{"faces":[[0,1,2]],"edge_lengths":{"0-1":1,"1-2":1,"2-0":1.5},
            "ambient":"matrix","matrix":[[0,1,1.2],[1,0,1],[1.2,1,0]]}"#;
        let m = mesh_from_json(text).unwrap();
        assert_eq!(m.ambient_dist(0, 2), Some(1.2));
        assert_eq!(m.edge_length(m.edge_between(0, 2).unwrap()), 1.5);
    }

    #[test]
    fn rejects_short_edges_and_bad_keys() {
        let short = r#"{"faces":[[0,1,2]],"edge_lengths":{"0-1":1,"1-2":1,"0-2":0.5},
            "ambient":"matrix","matrix":[[0,1,1.2],[1,0,1],[1.2,1,0]]}"#;
        assert!(matches!(mesh_from_json(short), Err(Error::InvalidMesh(_))));
        let bad = r#"{"faces":[[0,1,2]],"edge_lengths":{"0:1":1}}"#;
        assert!(mesh_from_json(bad).is_err());
        let flat = r#"{"faces":[[0,1,2]],"edge_lengths":{"0-1":1,"1-2":1,"0-2":2}}"#;
        assert!(matches!(mesh_from_json(flat), Err(Error::InvalidMesh(_))));
    }
}
