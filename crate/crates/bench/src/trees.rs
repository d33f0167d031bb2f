//! Expression tree workload: random leaf edits and operator flips against
//! a full re-evaluation oracle.
//!
//! Trees are full binary (every internal node has two children) and
//! balanced. Leaf values stay in `{0, 1}` and only subtrees of height at
//! most [`MAX_PROD_HEIGHT`] may carry products, which bounds every node
//! value well inside `i64` no matter how updates land.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dataflow_apps::{AppError, ExpNode, ExpTree, Op, TreeSpec};
use dataflow_core::{Comparator, Engine};

use crate::driver::Workload;
use crate::report::{BenchError, Scheduler};

/// Subtrees taller than this always combine with `Sum`.
pub const MAX_PROD_HEIGHT: u32 = 6;

pub struct TreeHarness {
    eng: Engine,
    tree: ExpTree<i64>,
    leaves: Vec<ExpNode<i64>>,
    /// Internal nodes whose operator may be flipped without risking
    /// overflow (height at most [`MAX_PROD_HEIGHT`]).
    flippable: Vec<ExpNode<i64>>,
    height: u32,
}

fn make_spec(size: usize, rng: &mut ChaCha8Rng) -> (TreeSpec<i64>, u32) {
    if size <= 1 {
        return (TreeSpec::leaf(rng.gen_range(0..=1)), 0);
    }
    let rest = size - 1;
    let left_size = if (rest / 2) % 2 == 1 { rest / 2 } else { (rest / 2).max(2) - 1 };
    let (left, hl) = make_spec(left_size, rng);
    let (right, hr) = make_spec(rest - left_size, rng);
    let height = 1 + hl.max(hr);
    let op = if height <= MAX_PROD_HEIGHT && rng.gen_bool(0.5) { Op::Prod } else { Op::Sum };
    (TreeSpec::node(op, left, right), height)
}

impl TreeHarness {
    /// Build a balanced full tree of roughly `n` nodes (`n` rounded down
    /// to the nearest odd count, since full binary trees have odd size).
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
        let size = if n % 2 == 0 { n.max(2) - 1 } else { n };
        let (spec, height) = make_spec(size, rng);
        let tree = ExpTree::build(&mut eng, &spec)?;
        let leaves = tree.leaves(&mut eng)?;
        let mut flippable = Vec::new();
        collect_flippable(&mut eng, &tree, tree.root(), &mut flippable)?;
        Ok(TreeHarness { eng, tree, leaves, flippable, height })
    }

    /// Perfect tree of the given height: `2^(h+1) - 1` nodes.
    pub fn perfect(height: u32, scheduler: Scheduler, rng: &mut ChaCha8Rng) -> Result<Self, BenchError> {
        Self::build((1usize << (height + 1)) - 1, scheduler, rng)
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn node_count(&self) -> usize {
        self.tree.size()
    }

    /// Flip one leaf between 0 and 1 (always a real change) and return how
    /// many constraint executions the session took.
    pub fn poke_leaf(&mut self, idx: usize) -> Result<u64, BenchError> {
        let leaf = self.leaves[idx % self.leaves.len()];
        let old = self.eng.read(leaf.val)?;
        let before = self.eng.stats().constraints_executed;
        self.tree.set_leaf(&mut self.eng, leaf, 1 - old)?;
        Ok(self.eng.stats().constraints_executed - before)
    }

    /// Evaluate the whole tree from its shape and leaf values, checking the
    /// stored value of every internal node on the way up.
    fn check_node(&mut self, node: ExpNode<i64>) -> Result<i64, String> {
        let err = |e: AppError| format!("engine error during verification: {e}");
        match self.tree.children(&mut self.eng, node).map_err(err)? {
            None => self.tree.value(&mut self.eng, node).map_err(err),
            Some((l, r)) => {
                let lv = self.check_node(l)?;
                let rv = self.check_node(r)?;
                let expected = match self.tree.op(&mut self.eng, node).map_err(err)? {
                    Op::Sum => lv + rv,
                    Op::Prod => lv * rv,
                };
                let got = self.tree.value(&mut self.eng, node).map_err(err)?;
                if got != expected {
                    return Err(format!(
                        "index {}: expected {expected}, got {got}",
                        node.val.id().index()
                    ));
                }
                Ok(expected)
            }
        }
    }
}

fn collect_flippable(
    eng: &mut Engine,
    tree: &ExpTree<i64>,
    node: ExpNode<i64>,
    out: &mut Vec<ExpNode<i64>>,
) -> Result<u32, BenchError> {
    match tree.children(eng, node)? {
        None => Ok(0),
        Some((l, r)) => {
            let hl = collect_flippable(eng, tree, l, out)?;
            let hr = collect_flippable(eng, tree, r, out)?;
            let height = 1 + hl.max(hr);
            if height <= MAX_PROD_HEIGHT {
                out.push(node);
            }
            Ok(height)
        }
    }
}

impl Workload for TreeHarness {
    fn engine(&mut self) -> &mut Engine {
        &mut self.eng
    }

    fn apply_batch(&mut self, count: usize, rng: &mut ChaCha8Rng) -> Result<(), BenchError> {
        let eng = &mut self.eng;
        let tree = &self.tree;
        let leaves = &self.leaves;
        let flippable = &self.flippable;
        eng.atomic(|e| {
            for _ in 0..count {
                if flippable.is_empty() || rng.gen_bool(0.7) {
                    let leaf = leaves[rng.gen_range(0..leaves.len())];
                    let old = e.read(leaf.val)?;
                    tree.set_leaf(e, leaf, 1 - old).map_err(app_to_engine)?;
                } else {
                    let node = flippable[rng.gen_range(0..flippable.len())];
                    let old = e.read(node.op)?;
                    let new = if old == Op::Sum { Op::Prod } else { Op::Sum };
                    tree.set_op(e, node, new).map_err(app_to_engine)?;
                }
            }
            Ok(())
        })?;
        Ok(())
    }

    fn verify(&mut self) -> Result<(), String> {
        self.check_node(self.tree.root()).map(|_| ())
    }
}

/// Surface app-level failures from inside an atomic closure, which must
/// return an engine error.
fn app_to_engine(e: AppError) -> dataflow_core::EngineError {
    match e {
        AppError::Engine(inner) => inner,
        other => panic!("unexpected app error inside batch: {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn builds_are_full_and_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = TreeHarness::build(1023, Scheduler::Lru, &mut rng).unwrap();
        assert_eq!(h.node_count(), 1023);
        assert_eq!(h.leaf_count(), 512);
        assert_eq!(h.height(), 9);
    }

    #[test]
    fn random_edits_match_the_reevaluation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut h = TreeHarness::build(127, Scheduler::Lru, &mut rng).unwrap();
        h.verify().unwrap();
        for _ in 0..80 {
            h.apply_batch(1, &mut rng).unwrap();
            h.verify().unwrap();
            assert!(h.engine().check_fixpoint().unwrap());
        }
    }

    #[test]
    fn leaf_updates_execute_at_most_height_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut h = TreeHarness::perfect(5, Scheduler::Lru, &mut rng).unwrap();
        assert_eq!(h.node_count(), 63);
        for i in 0..h.leaf_count() {
            let ran = h.poke_leaf(i).unwrap();
            assert!(ran <= 5, "leaf {i} took {ran} executions");
        }
    }
}
