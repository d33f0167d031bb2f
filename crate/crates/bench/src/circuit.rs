//! Random DAG circuits: boolean gates scheduled in topological order.
//!
//! Each gate is one constraint whose parameter is its topological index;
//! a user-parameter comparator pops lower indices first, so after an input
//! flip every affected gate executes exactly once. The harness simulates
//! the circuit in plain memory to predict the affected set and compares it
//! against the engine's execution trace.

use std::cmp::Ordering;
use std::rc::Rc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dataflow_core::{Cell, Comparator, ConstraintId, Engine, EngineError};

use crate::report::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateOp {
    And,
    Or,
    Xor,
    Nand,
}

impl GateOp {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateOp::And => a && b,
            GateOp::Or => a || b,
            GateOp::Xor => a ^ b,
            GateOp::Nand => !(a && b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Src {
    Input(usize),
    Gate(usize),
}

struct Gate {
    cons: ConstraintId,
    out: Cell<bool>,
    srcs: (Src, Src),
    op: GateOp,
}

pub struct Circuit {
    eng: Engine,
    inputs: Vec<Cell<bool>>,
    gates: Vec<Gate>,
    /// Plain-memory copies of the input values, updated on every flip.
    input_vals: Vec<bool>,
}

/// Pop constraints whose `usize` parameter is smallest first: topological
/// order for gates indexed in creation order.
pub fn topological_comparator() -> Comparator {
    Comparator::UserParam(Rc::new(|a, b| {
        match (a.downcast_ref::<usize>(), b.downcast_ref::<usize>()) {
            (Some(x), Some(y)) => x.cmp(y),
            _ => Ordering::Equal,
        }
    }))
}

impl Circuit {
    /// A random DAG of `n_gates` gates over `n_inputs` boolean inputs.
    /// Every gate draws its two sources uniformly from the inputs and all
    /// earlier gates, so indices are already topologically sorted.
    pub fn random(n_inputs: usize, n_gates: usize, rng: &mut ChaCha8Rng) -> Result<Self, BenchError> {
        let mut eng = Engine::new();
        eng.set_comparator(topological_comparator())?;
        let input_vals: Vec<bool> = (0..n_inputs).map(|_| rng.gen_bool(0.5)).collect();
        let inputs: Vec<Cell<bool>> = input_vals.iter().map(|&v| eng.alloc_cell(v)).collect();
        let mut gates: Vec<Gate> = Vec::with_capacity(n_gates);
        for g in 0..n_gates {
            let pick = |rng: &mut ChaCha8Rng| {
                let k = rng.gen_range(0..n_inputs + g);
                if k < n_inputs {
                    Src::Input(k)
                } else {
                    Src::Gate(k - n_inputs)
                }
            };
            let srcs = (pick(rng), pick(rng));
            let op = match rng.gen_range(0..4) {
                0 => GateOp::And,
                1 => GateOp::Or,
                2 => GateOp::Xor,
                _ => GateOp::Nand,
            };
            let out = eng.alloc_cell(false);
            let cell_of = |src: Src, inputs: &[Cell<bool>], gates: &[Gate]| match src {
                Src::Input(i) => inputs[i],
                Src::Gate(i) => gates[i].out,
            };
            let (ca, cb) = (cell_of(srcs.0, &inputs, &gates), cell_of(srcs.1, &inputs, &gates));
            let cons = eng.new_constraint(g, move |e: &mut Engine| {
                let a = e.read(ca)?;
                let b = e.read(cb)?;
                e.write(out, op.apply(a, b))
            })?;
            gates.push(Gate { cons, out, srcs, op });
        }
        eng.set_trace(true);
        eng.take_trace();
        Ok(Circuit { eng, inputs, gates, input_vals })
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn engine(&mut self) -> &mut Engine {
        &mut self.eng
    }

    /// Current gate outputs recomputed from scratch in plain memory.
    fn simulate(&self, input_vals: &[bool]) -> Vec<bool> {
        let mut outs = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let read = |src: Src| match src {
                Src::Input(i) => input_vals[i],
                Src::Gate(i) => outs[i],
            };
            outs.push(gate.op.apply(read(gate.srcs.0), read(gate.srcs.1)));
        }
        outs
    }

    /// The gates that read at least one changed cell when input `i` flips,
    /// in topological order.
    fn affected_by_flip(&self, i: usize) -> Vec<ConstraintId> {
        let old_outs = self.simulate(&self.input_vals);
        let mut new_inputs = self.input_vals.clone();
        new_inputs[i] = !new_inputs[i];
        let new_outs = self.simulate(&new_inputs);
        let mut affected = Vec::new();
        for (g, gate) in self.gates.iter().enumerate() {
            let src_changed = |src: Src| match src {
                Src::Input(k) => k == i,
                Src::Gate(k) => old_outs[k] != new_outs[k],
            };
            if src_changed(gate.srcs.0) || src_changed(gate.srcs.1) {
                affected.push((g, gate.cons));
            }
        }
        affected.into_iter().map(|(_, c)| c).collect()
    }

    /// Flip input `i` and check that the execution trace is exactly the
    /// predicted affected set, each gate once.
    pub fn flip_and_check(&mut self, i: usize) -> Result<(), String> {
        let expected = self.affected_by_flip(i);
        self.eng.take_trace();
        let new = !self.input_vals[i];
        self.eng
            .write(self.inputs[i], new)
            .map_err(|e: EngineError| format!("write failed: {e}"))?;
        self.input_vals[i] = new;
        let trace = self.eng.take_trace();

        let mut got = trace.clone();
        got.sort_unstable();
        let mut want = expected.clone();
        want.sort_unstable();
        if got != want {
            return Err(format!(
                "input {i}: affected set has {} gates, trace ran {} executions \
                 (after dedup {})",
                expected.len(),
                trace.len(),
                {
                    let mut d = got.clone();
                    d.dedup();
                    d.len()
                }
            ));
        }

        // Settled outputs must match the simulation.
        let sim = self.simulate(&self.input_vals);
        for (g, gate) in self.gates.iter().enumerate() {
            let v = self
                .eng
                .read(gate.out)
                .map_err(|e| format!("read failed: {e}"))?;
            if v != sim[g] {
                return Err(format!("gate {g}: expected {}, got {v}", sim[g]));
            }
        }
        if !self.eng.is_quiescent() {
            return Err("engine not quiescent after flip".into());
        }
        Ok(())
    }
}
