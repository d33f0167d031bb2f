//! Vector-matrix product workload against a plain product oracle.
//!
//! `n` counts matrix entries, so the square dimension is `sqrt(n)`. Host
//! mirrors of the vector and matrix record every applied write; the oracle
//! recomputes the product from those mirrors from scratch.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dataflow_apps::VecMatProduct;
use dataflow_core::{Comparator, Engine};

use crate::driver::Workload;
use crate::oracle;
use crate::report::{BenchError, Scheduler};

const ENTRY_RANGE: std::ops::RangeInclusive<i64> = -100..=100;

pub struct VecMatHarness {
    eng: Engine,
    product: VecMatProduct<i64>,
    dim: usize,
    vec: Vec<i64>,
    mat: Vec<i64>,
}

impl VecMatHarness {
    pub fn build(n: usize, scheduler: Scheduler, rng: &mut ChaCha8Rng) -> Result<Self, BenchError> {
        let mut eng = Engine::new();
        let comparator = match scheduler {
            Scheduler::Lru => Comparator::LeastRecentlyExecuted,
            Scheduler::Lifo => Comparator::Lifo,
            Scheduler::MinDist => {
                return Err(BenchError::InvalidSpec(
                    "the min-dist scheduler only applies to the sp benchmark".into(),
                ))
            }
        };
        eng.set_comparator(comparator)?;
        let dim = (n as f64).sqrt().floor().max(1.0) as usize;
        let vec: Vec<i64> = (0..dim).map(|_| rng.gen_range(ENTRY_RANGE)).collect();
        let mat: Vec<i64> = (0..dim * dim).map(|_| rng.gen_range(ENTRY_RANGE)).collect();
        let rows: Vec<Vec<i64>> = mat.chunks(dim).map(<[i64]>::to_vec).collect();
        let product = VecMatProduct::build(&mut eng, &vec, &rows, 1)?;
        Ok(VecMatHarness { eng, product, dim, vec, mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Workload for VecMatHarness {
    fn engine(&mut self) -> &mut Engine {
        &mut self.eng
    }

    fn apply_batch(&mut self, count: usize, rng: &mut ChaCha8Rng) -> Result<(), BenchError> {
        let dim = self.dim;
        let eng = &mut self.eng;
        let product = &self.product;
        let vec = &mut self.vec;
        let mat = &mut self.mat;
        eng.atomic(|e| {
            for _ in 0..count {
                let roll = rng.gen_range(0..10);
                if roll < 8 {
                    let (i, j) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
                    let val = rng.gen_range(ENTRY_RANGE);
                    product.set_cell(e, i, j, val).map_err(app_err)?;
                    mat[i * dim + j] = val;
                } else if roll == 8 {
                    let i = rng.gen_range(0..dim);
                    let val = rng.gen_range(ENTRY_RANGE);
                    product.set_vec(e, i, val).map_err(app_err)?;
                    vec[i] = val;
                } else {
                    let j = rng.gen_range(0..dim);
                    let col: Vec<i64> = (0..dim).map(|_| rng.gen_range(ENTRY_RANGE)).collect();
                    product.set_column(e, j, &col).map_err(app_err)?;
                    for (i, &v) in col.iter().enumerate() {
                        mat[i * dim + j] = v;
                    }
                }
            }
            Ok(())
        })?;
        Ok(())
    }

    fn verify(&mut self) -> Result<(), String> {
        let expected = oracle::vecmat_oracle(&self.vec, &self.mat, self.dim);
        let got = self
            .product
            .output(&mut self.eng)
            .map_err(|e| format!("engine error during verification: {e}"))?;
        for j in 0..self.dim {
            if expected[j] != got[j] {
                return Err(format!("index {j}: expected {}, got {}", expected[j], got[j]));
            }
        }
        Ok(())
    }
}

fn app_err(e: dataflow_apps::AppError) -> dataflow_core::EngineError {
    match e {
        dataflow_apps::AppError::Engine(inner) => inner,
        other => panic!("unexpected app error inside batch: {other}"),
    }
}
