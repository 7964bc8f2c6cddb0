//! Restructured array layouts and the index bijections behind them.
//!
//! Three layouts present the same flat, zero-based API: `split` scatters
//! positions round-robin over `k` parts, `fold` places a 1-D array into a
//! rows-by-cols grid, and `flat` stores a 2-D index space contiguously.
//! Layout parameters never change observable behavior.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArrayError {
    #[error("position {pos} out of bounds for length {len}")]
    OutOfBounds { pos: usize, len: usize },
    #[error("split needs at least 2 parts, got {0}")]
    BadSplit(usize),
    #[error("fold needs at least 1 column, got {0}")]
    BadFold(usize),
}

/// Container kind as it appears in source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrayKind {
    Split,
    Fold,
    Flatten,
}

impl ArrayKind {
    pub fn type_name(self) -> &'static str {
        match self {
            ArrayKind::Split => "SplitArray",
            ArrayKind::Fold => "FoldedArray",
            ArrayKind::Flatten => "FlattenedArray",
        }
    }

    pub fn from_type_name(name: &str) -> Option<ArrayKind> {
        match name {
            "SplitArray" => Some(ArrayKind::Split),
            "FoldedArray" => Some(ArrayKind::Fold),
            "FlattenedArray" => Some(ArrayKind::Flatten),
            _ => None,
        }
    }

    pub const ALL: [ArrayKind; 3] = [ArrayKind::Split, ArrayKind::Fold, ArrayKind::Flatten];
}

/// Part and offset for logical position `pos` under a k-way split.
pub fn split_index(pos: usize, k: usize) -> (usize, usize) {
    debug_assert!(k >= 2);
    (pos % k, pos / k)
}

/// Number of positions part `j` receives when `size` elements split k ways.
pub fn part_size(size: usize, k: usize, j: usize) -> usize {
    debug_assert!(k >= 2 && j < k);
    if j < size {
        (size - 1 - j) / k + 1
    } else {
        0
    }
}

/// Grid cell for logical position `i` folded into `cols` columns.
pub fn fold_index(i: usize, cols: usize) -> (usize, usize) {
    debug_assert!(cols >= 1);
    (i / cols, i % cols)
}

/// Inverse of [`fold_index`].
pub fn unfold_index(row: usize, col: usize, cols: usize) -> usize {
    row * cols + col
}

/// Contiguous position of 2-D cell `(r, c)` in row-major order.
pub fn flatten_index(r: usize, c: usize, cols: usize) -> usize {
    r * cols + c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitLayout {
    pub size: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldLayout {
    pub size: usize,
    pub cols: usize,
}

impl FoldLayout {
    pub fn rows(&self) -> usize {
        self.size.div_ceil(self.cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatLayout {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Split(SplitLayout),
    Fold(FoldLayout),
    Flat(FlatLayout),
}

impl Layout {
    pub fn len(&self) -> usize {
        match self {
            Layout::Split(s) => s.size,
            Layout::Fold(f) => f.size,
            Layout::Flat(f) => f.rows * f.cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A flat-API container stored under one of the restructured layouts.
/// Element storage is opaque; cells start out as clones of the fill value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestructuredContainer<T> {
    layout: Layout,
    parts: Vec<Vec<T>>,
}

impl<T: Clone> RestructuredContainer<T> {
    pub fn split(size: usize, k: usize, fill: T) -> Result<Self, ArrayError> {
        if k < 2 {
            return Err(ArrayError::BadSplit(k));
        }
        let parts = (0..k)
            .map(|j| vec![fill.clone(); part_size(size, k, j)])
            .collect();
        Ok(RestructuredContainer {
            layout: Layout::Split(SplitLayout { size, k }),
            parts,
        })
    }

    pub fn fold(size: usize, cols: usize, fill: T) -> Result<Self, ArrayError> {
        if cols < 1 {
            return Err(ArrayError::BadFold(cols));
        }
        let layout = FoldLayout { size, cols };
        // Padding cells in the final row exist but are never addressable.
        let parts = (0..layout.rows()).map(|_| vec![fill.clone(); cols]).collect();
        Ok(RestructuredContainer {
            layout: Layout::Fold(layout),
            parts,
        })
    }

    pub fn flat(rows: usize, cols: usize, fill: T) -> Self {
        RestructuredContainer {
            layout: Layout::Flat(FlatLayout { rows, cols }),
            parts: vec![vec![fill; rows * cols]],
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    fn place(&self, pos: usize) -> Result<(usize, usize), ArrayError> {
        if pos >= self.len() {
            return Err(ArrayError::OutOfBounds {
                pos,
                len: self.len(),
            });
        }
        Ok(match self.layout {
            Layout::Split(s) => split_index(pos, s.k),
            Layout::Fold(f) => fold_index(pos, f.cols),
            Layout::Flat(_) => (0, pos),
        })
    }

    pub fn set(&mut self, pos: usize, value: T) -> Result<(), ArrayError> {
        let (outer, inner) = self.place(pos)?;
        self.parts[outer][inner] = value;
        Ok(())
    }

    pub fn get(&self, pos: usize) -> Result<&T, ArrayError> {
        let (outer, inner) = self.place(pos)?;
        Ok(&self.parts[outer][inner])
    }
}
