use crate::error::{Error, Result};

/// Node-to-cell and node-to-node adjacency for a cell-to-node map.
///
/// Node indices are whatever the caller's map uses (vertex ids or periodic
/// degrees of freedom). A cell may list the same node twice on one-row
/// periodic strips; the table stores each incidence once.
#[derive(Debug, Clone)]
pub struct PatchTable {
    cell_nodes: Vec<Vec<usize>>,
    node_cells: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    measures: Vec<f64>,
}

impl PatchTable {
    /// `cell_map` holds `nloc` node ids per cell; `measures[c] = |K_c|`.
    pub fn new(num_nodes: usize, cell_map: &[usize], nloc: usize, measures: &[f64]) -> Self {
        let ncell = cell_map.len() / nloc;
        assert_eq!(ncell, measures.len(), "one measure per cell");
        let mut cell_nodes = Vec::with_capacity(ncell);
        let mut node_cells = vec![Vec::new(); num_nodes];
        for c in 0..ncell {
            let mut nodes = cell_map[c * nloc..(c + 1) * nloc].to_vec();
            nodes.sort_unstable();
            nodes.dedup();
            for &i in &nodes {
                node_cells[i].push(c);
            }
            cell_nodes.push(nodes);
        }
        let neighbors = node_cells
            .iter()
            .enumerate()
            .map(|(i, cells)| {
                let mut nb: Vec<usize> = cells.iter().flat_map(|&c| cell_nodes[c].iter().copied()).collect();
                nb.push(i);
                nb.sort_unstable();
                nb.dedup();
                nb
            })
            .collect();
        Self {
            cell_nodes,
            node_cells,
            neighbors,
            measures: measures.to_vec(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_cells.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_nodes.len()
    }

    /// Cells of the patch S_i.
    pub fn cells(&self, i: usize) -> &[usize] {
        &self.node_cells[i]
    }

    /// Nodes I(S_i) of the patch, including `i`, sorted.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Distinct nodes I(K) of a cell, sorted.
    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        &self.cell_nodes[c]
    }

    /// Nel(S_i).
    pub fn nel(&self, i: usize) -> usize {
        self.node_cells[i].len()
    }

    pub fn measure(&self, c: usize) -> f64 {
        self.measures[c]
    }

    /// Cells in the intersection S_ij of two patches.
    pub fn shared_cells(&self, i: usize, j: usize) -> Vec<usize> {
        let b = &self.node_cells[j];
        self.node_cells[i].iter().copied().filter(|c| b.binary_search(c).is_ok()).collect()
    }

    pub fn min_measure(&self, i: usize) -> Result<f64> {
        self.fold_measure(i, f64::INFINITY, f64::min)
    }

    pub fn max_measure(&self, i: usize) -> Result<f64> {
        self.fold_measure(i, 0.0, f64::max)
    }

    fn fold_measure(&self, i: usize, init: f64, f: fn(f64, f64) -> f64) -> Result<f64> {
        let cells = &self.node_cells[i];
        if cells.is_empty() {
            return Err(Error::EmptyPatch(i));
        }
        Ok(cells.iter().map(|&c| self.measures[c]).fold(init, f))
    }

    /// Mesh quality κ_i = max |K| / min |K| over the patch.
    pub fn mesh_quality(&self, i: usize) -> Result<f64> {
        Ok(self.max_measure(i)? / self.min_measure(i)?)
    }
}
