use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Mesh, Point, Region};
use crate::error::Result;

/// On-disk mesh: `{"vertices": [[x, y], ...], "cells": [[i, j, k, ...], ...], "regions": [1 | 2, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
    pub regions: Vec<Region>,
}

impl MeshFile {
    pub fn from_mesh(mesh: &Mesh) -> MeshFile {
        MeshFile {
            vertices: mesh.vertices.iter().map(|p| [p.x, p.y]).collect(),
            cells: mesh.cells.iter().map(|c| c.vertices.clone()).collect(),
            regions: mesh.cells.iter().map(|c| c.region).collect(),
        }
    }

    pub fn into_mesh(self) -> Result<Mesh> {
        let vertices = self.vertices.into_iter().map(|[x, y]| Point::new(x, y)).collect();
        Mesh::build(vertices, self.cells, self.regions)
    }
}

impl Mesh {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&MeshFile::from_mesh(self))?)
    }

    pub fn from_json(text: &str) -> Result<Mesh> {
        serde_json::from_str::<MeshFile>(text)?.into_mesh()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Mesh> {
        Mesh::from_json(&std::fs::read_to_string(path)?)
    }
}
