//! Reactive vector-matrix product.
//!
//! Maintains `out = v * M` for a row vector `v` and square matrix `M`, all
//! held in cells. Constraints cover *blocks* of `b` consecutive rows within
//! one column; each block tracks the partial dot product of its rows and,
//! when it changes, adds the difference into the column's output cell
//! through a plain accumulator (so no constraint ever reads an output cell,
//! and no two blocks fight over it).
//!
//! The block size trades constraint count against update cost: a single
//! matrix cell update re-executes exactly one block, which rereads `2b`
//! cells; a whole-column update touches every block of that column once.

use std::cell::RefCell;
use std::rc::Rc;

use dataflow_core::{Cell, ConstraintId, Engine};

use crate::error::AppError;
use crate::scalar::Scalar;

/// A reactive `out = v * M` product over cells.
pub struct VecMatProduct<T: Scalar> {
    n: usize,
    block: usize,
    vec_cells: Rc<Vec<Cell<T>>>,
    mat_cells: Vec<Vec<Cell<T>>>,
    out_cells: Vec<Cell<T>>,
    cons: Vec<ConstraintId>,
}

impl<T: Scalar> VecMatProduct<T> {
    /// Build the product for vector `v` (length `n`) and `n x n` matrix
    /// `m`, with `block` rows per constraint. The output is fully computed
    /// when this returns.
    pub fn build(
        eng: &mut Engine,
        v: &[T],
        m: &[Vec<T>],
        block: usize,
    ) -> Result<Self, AppError> {
        let n = v.len();
        if m.len() != n {
            return Err(AppError::DimensionMismatch { expected: n, got: m.len() });
        }
        for row in m {
            if row.len() != n {
                return Err(AppError::DimensionMismatch { expected: n, got: row.len() });
            }
        }
        if block == 0 || (n > 0 && block > n) {
            return Err(AppError::DimensionMismatch { expected: n.max(1), got: block });
        }

        let vec_cells: Rc<Vec<Cell<T>>> =
            Rc::new(v.iter().map(|&x| eng.alloc_cell(x)).collect());
        let mat_cells: Vec<Vec<Cell<T>>> = m
            .iter()
            .map(|row| row.iter().map(|&x| eng.alloc_cell(x)).collect())
            .collect();
        let out_cells: Vec<Cell<T>> = (0..n).map(|_| eng.alloc_cell(T::zero())).collect();
        let out_mirror = Rc::new(RefCell::new(vec![T::zero(); n]));

        let mut cons = Vec::new();
        for j in 0..n {
            for (k, r0) in (0..n).step_by(block).enumerate() {
                let r1 = (r0 + block).min(n);
                let rows: Vec<Cell<T>> = (r0..r1).map(|i| mat_cells[i][j]).collect();
                let vec_cells = vec_cells.clone();
                let mirror = out_mirror.clone();
                let out_cell = out_cells[j];
                let mut last = T::zero();
                let id = eng.new_constraint((j, k), move |e| {
                    let mut contrib = T::zero();
                    for (off, &mc) in rows.iter().enumerate() {
                        let x = e.read(vec_cells[r0 + off])?;
                        let a = e.read(mc)?;
                        contrib += x * a;
                    }
                    if contrib != last {
                        let delta = contrib - last;
                        last = contrib;
                        let total = {
                            let mut m = mirror.borrow_mut();
                            m[j] += delta;
                            m[j]
                        };
                        e.write(out_cell, total)?;
                    }
                    Ok(())
                })?;
                cons.push(id);
            }
        }

        Ok(VecMatProduct { n, block, vec_cells, mat_cells, out_cells, cons })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self) -> usize {
        self.block
    }

    /// Number of block constraints per column.
    pub fn blocks_per_column(&self) -> usize {
        if self.n == 0 { 0 } else { self.n.div_ceil(self.block) }
    }

    /// Total number of block constraints.
    pub fn constraint_count(&self) -> usize {
        self.cons.len()
    }

    /// Overwrite one matrix entry; exactly one block recomputes.
    pub fn set_cell(&self, eng: &mut Engine, i: usize, j: usize, val: T) -> Result<(), AppError> {
        self.check_index(i)?;
        self.check_index(j)?;
        eng.write(self.mat_cells[i][j], val)?;
        Ok(())
    }

    /// Overwrite one vector entry; one block per column recomputes.
    pub fn set_vec(&self, eng: &mut Engine, i: usize, val: T) -> Result<(), AppError> {
        self.check_index(i)?;
        eng.write(self.vec_cells[i], val)?;
        Ok(())
    }

    /// Overwrite a whole matrix column in one atomic step; each block of
    /// that column recomputes at most once.
    pub fn set_column(&self, eng: &mut Engine, j: usize, col: &[T]) -> Result<(), AppError> {
        self.check_index(j)?;
        if col.len() != self.n {
            return Err(AppError::DimensionMismatch { expected: self.n, got: col.len() });
        }
        eng.atomic(|e| {
            for (i, &val) in col.iter().enumerate() {
                e.write(self.mat_cells[i][j], val)?;
            }
            Ok(())
        })?;
        Ok(())
    }

    /// The current output entry `j`.
    pub fn out(&self, eng: &mut Engine, j: usize) -> Result<T, AppError> {
        self.check_index(j)?;
        Ok(eng.read(self.out_cells[j])?)
    }

    /// The full current output vector.
    pub fn output(&self, eng: &mut Engine) -> Result<Vec<T>, AppError> {
        (0..self.n).map(|j| Ok(eng.read(self.out_cells[j])?)).collect()
    }

    fn check_index(&self, i: usize) -> Result<(), AppError> {
        if i < self.n {
            Ok(())
        } else {
            Err(AppError::DimensionMismatch { expected: self.n, got: i })
        }
    }
}
