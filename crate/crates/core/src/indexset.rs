//! Layered index sets over structured grids.
//!
//! A [`LayeredIndexSet`] carries three views of the same membership:
//!
//! * the *flag* layer, one boolean per global unknown;
//! * the *absolute* layer, the global indices of members in row-major scan
//!   order (this is `set_vec`, used to scatter reduced updates);
//! * the *relative* layer, the contiguous position of each member inside the
//!   reduced vector.
//!
//! On top of that the set keeps a per-row tree: for every grid row `j` that
//! has at least one member, the list of member columns. Residual kernels walk
//! the tree directly instead of testing flags in the inner loop.
//!
//! Indices are 0-based in the API. Anything written to files or printed for
//! humans goes through the `*_one_based` helpers.

use std::fmt::Write as _;

use crate::{check_len, Error, Result};

/// Mapping between structured-grid coordinates and global unknown indices.
///
/// Node `(i, j)` (0-based) with unknown `d` lives at
/// `(j * ni + i) * dof_per_node + d`, i.e. the dofs of a node are
/// interleaved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridMap {
    ni: usize,
    nj: usize,
    dof_per_node: usize,
}

impl GridMap {
    pub fn new(ni: usize, nj: usize, dof_per_node: usize) -> Result<Self> {
        if ni == 0 || nj == 0 || dof_per_node == 0 {
            return Err(Error::InvalidGrid {
                ni,
                nj,
                dof: dof_per_node,
            });
        }
        Ok(Self {
            ni,
            nj,
            dof_per_node,
        })
    }

    /// A 1D grid of `n` nodes, one unknown each.
    pub fn line(n: usize) -> Result<Self> {
        Self::new(n, 1, 1)
    }

    /// An `ni x nj` grid, one unknown per node.
    pub fn plane(ni: usize, nj: usize) -> Result<Self> {
        Self::new(ni, nj, 1)
    }

    pub fn ni(&self) -> usize {
        self.ni
    }

    pub fn nj(&self) -> usize {
        self.nj
    }

    pub fn dof_per_node(&self) -> usize {
        self.dof_per_node
    }

    /// Unknowns stored per grid row.
    pub fn row_len(&self) -> usize {
        self.ni * self.dof_per_node
    }

    /// Total number of unknowns.
    pub fn len(&self) -> usize {
        self.ni * self.nj * self.dof_per_node
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Global index of unknown `d` at node `(i, j)`.
    pub fn index(&self, i: usize, j: usize, d: usize) -> usize {
        debug_assert!(i < self.ni && j < self.nj && d < self.dof_per_node);
        (j * self.ni + i) * self.dof_per_node + d
    }

    /// Inverse of [`GridMap::index`].
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let node = index / self.dof_per_node;
        (node % self.ni, node / self.ni, index % self.dof_per_node)
    }
}

/// Members of one grid row. `cols` are positions within the row in unknown
/// units, so `index = j * row_len + col`; for one dof per node `col == i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetRow {
    pub j: usize,
    pub cols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredIndexSet {
    grid: GridMap,
    flags: Vec<bool>,
    absolute: Vec<usize>,
    relative: Vec<Option<usize>>,
    rows: Vec<SetRow>,
}

impl LayeredIndexSet {
    /// The global set: every unknown is a member.
    pub fn full_set(grid: GridMap) -> Self {
        let flags = vec![true; grid.len()];
        Self::from_flags_unchecked(flags, grid)
    }

    /// Builds all layers and the row tree from a flag vector by scanning the
    /// grid row by row. An all-false vector yields an empty set.
    pub fn build_from_flags(flags: &[bool], grid: GridMap) -> Result<Self> {
        check_len(grid.len(), flags.len())?;
        Ok(Self::from_flags_unchecked(flags.to_vec(), grid))
    }

    fn from_flags_unchecked(flags: Vec<bool>, grid: GridMap) -> Self {
        let row_len = grid.row_len();
        let mut absolute = Vec::new();
        let mut relative = vec![None; flags.len()];
        let mut rows = Vec::new();
        for j in 0..grid.nj() {
            let base = j * row_len;
            let cols: Vec<usize> = (0..row_len).filter(|&c| flags[base + c]).collect();
            if cols.is_empty() {
                continue;
            }
            for &c in &cols {
                relative[base + c] = Some(absolute.len());
                absolute.push(base + c);
            }
            rows.push(SetRow { j, cols });
        }
        Self {
            grid,
            flags,
            absolute,
            relative,
            rows,
        }
    }

    pub fn grid(&self) -> GridMap {
        self.grid
    }

    /// Number of members.
    pub fn len(&self) -> usize {
        self.absolute.len()
    }

    pub fn is_empty(&self) -> bool {
        self.absolute.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.absolute.len() == self.flags.len()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Global indices of members, ascending.
    pub fn set_vec(&self) -> &[usize] {
        &self.absolute
    }

    pub fn set_vec_one_based(&self) -> Vec<usize> {
        self.absolute.iter().map(|&a| a + 1).collect()
    }

    /// Position of a global unknown inside reduced vectors.
    pub fn relative(&self, global: usize) -> Option<usize> {
        self.relative.get(global).copied().flatten()
    }

    pub fn contains(&self, global: usize) -> bool {
        self.flags.get(global).copied().unwrap_or(false)
    }

    pub fn rows(&self) -> &[SetRow] {
        &self.rows
    }

    /// True when the members form one run of consecutive global indices.
    pub fn is_contiguous(&self) -> bool {
        match (self.absolute.first(), self.absolute.last()) {
            (Some(&lo), Some(&hi)) => hi - lo + 1 == self.absolute.len(),
            _ => true,
        }
    }

    /// Restriction of a global vector to the members.
    pub fn gather(&self, full: &[f64]) -> Result<Vec<f64>> {
        check_len(self.flags.len(), full.len())?;
        Ok(self.absolute.iter().map(|&a| full[a]).collect())
    }

    /// `full[set_vec] += lambda * delta`. Non-members are not touched.
    pub fn scatter_update(&self, full: &mut [f64], delta: &[f64], lambda: f64) -> Result<()> {
        check_len(self.flags.len(), full.len())?;
        check_len(self.absolute.len(), delta.len())?;
        for (&a, &d) in self.absolute.iter().zip(delta) {
            full[a] += lambda * d;
        }
        Ok(())
    }

    /// Expands a reduced vector to full length, zeros outside the set.
    pub fn expand(&self, reduced: &[f64]) -> Result<Vec<f64>> {
        let mut full = vec![0.0; self.flags.len()];
        check_len(self.absolute.len(), reduced.len())?;
        for (&a, &r) in self.absolute.iter().zip(reduced) {
            full[a] = r;
        }
        Ok(full)
    }

    /// One set-trace record: `iter,set_size,min_abs_index,max_abs_index,members`
    /// with 1-based indices and `;`-joined members. Empty sets leave the
    /// index fields blank.
    pub fn trace_line(&self, iter: usize) -> String {
        let mut line = format!("{iter},{}", self.len());
        match (self.absolute.first(), self.absolute.last()) {
            (Some(lo), Some(hi)) => {
                let _ = write!(line, ",{},{},", lo + 1, hi + 1);
            }
            _ => line.push_str(",,,"),
        }
        line.push_str(&self.members_field());
        line
    }

    /// `;`-joined 1-based member list.
    pub fn members_field(&self) -> String {
        let mut out = String::new();
        for (k, a) in self.absolute.iter().enumerate() {
            if k > 0 {
                out.push(';');
            }
            let _ = write!(out, "{}", a + 1);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Membership pattern of the 5x5 demonstration grid, as 1-based (i, j).
    fn sample_flags() -> Vec<bool> {
        let grid = GridMap::plane(5, 5).unwrap();
        let members = [
            (1, 1),
            (2, 1),
            (1, 2),
            (2, 2),
            (3, 2),
            (4, 2),
            (3, 3),
            (4, 3),
            (2, 5),
            (3, 5),
            (4, 5),
        ];
        let mut flags = vec![false; 25];
        for (i, j) in members {
            flags[grid.index(i - 1, j - 1, 0)] = true;
        }
        flags
    }

    #[test]
    fn full_set_sizes() {
        let s = LayeredIndexSet::full_set(GridMap::plane(5, 5).unwrap());
        assert_eq!(s.len(), 25);
        assert!(s.is_full());

        let s = LayeredIndexSet::full_set(GridMap::line(1).unwrap());
        assert_eq!(s.set_vec_one_based(), vec![1]);
        assert_eq!(s.relative(0), Some(0));

        let s = LayeredIndexSet::full_set(GridMap::plane(3, 2).unwrap());
        assert_eq!(s.set_vec_one_based(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(s.rows().len(), 2);
        assert!(s.rows().iter().all(|r| r.cols == vec![0, 1, 2]));
    }

    #[test]
    fn sample_pattern_tree() {
        let grid = GridMap::plane(5, 5).unwrap();
        let s = LayeredIndexSet::build_from_flags(&sample_flags(), grid).unwrap();
        assert_eq!(
            s.set_vec_one_based(),
            vec![1, 2, 6, 7, 8, 9, 13, 14, 22, 23, 24]
        );
        let tree: Vec<(usize, Vec<usize>)> = s
            .rows()
            .iter()
            .map(|r| (r.j + 1, r.cols.iter().map(|c| c + 1).collect()))
            .collect();
        assert_eq!(
            tree,
            vec![
                (1, vec![1, 2]),
                (2, vec![1, 2, 3, 4]),
                (3, vec![3, 4]),
                (5, vec![2, 3, 4]),
            ]
        );
        // relative numbering is contiguous, row 3 gets 7 and 8
        assert_eq!(s.relative(12), Some(6));
        assert_eq!(s.relative(13), Some(7));
        assert_eq!(s.relative(21), Some(8));
        assert_eq!(s.relative(0), Some(0));
        assert_eq!(s.relative(2), None);
    }

    #[test]
    fn all_true_and_all_false() {
        let grid = GridMap::plane(5, 5).unwrap();
        let s = LayeredIndexSet::build_from_flags(&[true; 25], grid).unwrap();
        assert_eq!(s, LayeredIndexSet::full_set(grid));

        let s = LayeredIndexSet::build_from_flags(&[false; 25], grid).unwrap();
        assert!(s.is_empty());
        assert!(s.rows().is_empty());
        assert_eq!(s.trace_line(3), "3,0,,,");
    }

    #[test]
    fn flag_length_mismatch() {
        let grid = GridMap::plane(5, 5).unwrap();
        assert!(matches!(
            LayeredIndexSet::build_from_flags(&[true; 24], grid),
            Err(Error::DimensionMismatch {
                expected: 25,
                found: 24
            })
        ));
    }

    #[test]
    fn invalid_grid() {
        assert!(GridMap::new(0, 1, 1).is_err());
        assert!(GridMap::new(1, 0, 1).is_err());
        assert!(GridMap::new(1, 1, 0).is_err());
    }

    #[test]
    fn gather_examples() {
        let grid = GridMap::plane(5, 5).unwrap();
        let s = LayeredIndexSet::build_from_flags(&sample_flags(), grid).unwrap();
        let full: Vec<f64> = (1..=25).map(|k| 10.0 * k as f64).collect();
        assert_eq!(
            s.gather(&full).unwrap(),
            vec![10., 20., 60., 70., 80., 90., 130., 140., 220., 230., 240.]
        );

        let empty = LayeredIndexSet::build_from_flags(&[false; 25], grid).unwrap();
        assert!(empty.gather(&full).unwrap().is_empty());

        let all = LayeredIndexSet::full_set(grid);
        assert_eq!(all.gather(&full).unwrap(), full);
        assert!(all.gather(&full[..24]).is_err());
    }

    #[test]
    fn scatter_examples() {
        let grid = GridMap::plane(5, 5).unwrap();
        let s = LayeredIndexSet::build_from_flags(&sample_flags(), grid).unwrap();
        let mut x = vec![0.0; 25];
        s.scatter_update(&mut x, &[1.0; 11], 1.0).unwrap();
        let ones: Vec<usize> = (0..25).filter(|&k| x[k] == 1.0).map(|k| k + 1).collect();
        assert_eq!(ones, vec![1, 2, 6, 7, 8, 9, 13, 14, 22, 23, 24]);
        assert_eq!(x.iter().filter(|&&v| v == 0.0).count(), 14);

        let before: Vec<f64> = (0..25).map(|k| k as f64 * 0.3).collect();
        let mut y = before.clone();
        s.scatter_update(&mut y, &[5.0; 11], 0.0).unwrap();
        assert_eq!(y, before);

        let all = LayeredIndexSet::full_set(grid);
        let delta: Vec<f64> = (0..25).map(|k| (k as f64).sin()).collect();
        let mut z = before.clone();
        all.scatter_update(&mut z, &delta, 1.0).unwrap();
        for k in 0..25 {
            assert_eq!(z[k], before[k] + delta[k]);
        }

        assert!(s.scatter_update(&mut z, &[1.0; 10], 1.0).is_err());
    }

    #[test]
    fn multi_dof_interleaving() {
        let grid = GridMap::new(3, 2, 2).unwrap();
        assert_eq!(grid.len(), 12);
        assert_eq!(grid.index(1, 1, 1), 9);
        assert_eq!(grid.coords(9), (1, 1, 1));
        let mut flags = vec![false; 12];
        flags[1] = true;
        flags[9] = true;
        flags[10] = true;
        let s = LayeredIndexSet::build_from_flags(&flags, grid).unwrap();
        assert_eq!(s.set_vec(), &[1, 9, 10]);
        assert_eq!(s.rows()[1].cols, vec![3, 4]);
    }

    #[test]
    fn trace_and_contiguity() {
        let grid = GridMap::line(10).unwrap();
        let mut flags = vec![false; 10];
        flags[3..6].iter_mut().for_each(|f| *f = true);
        let s = LayeredIndexSet::build_from_flags(&flags, grid).unwrap();
        assert!(s.is_contiguous());
        assert_eq!(s.trace_line(1), "1,3,4,6,4;5;6");
        flags[8] = true;
        let s = LayeredIndexSet::build_from_flags(&flags, grid).unwrap();
        assert!(!s.is_contiguous());
    }
}
