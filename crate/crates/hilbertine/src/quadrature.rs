//! Deterministic adaptive cubature over planar triangles.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub(crate) type Tri = [[f64; 2]; 3];

/// Default cap on the number of leaf cells.
pub const MAX_CELLS: usize = 10_000_000;

// Degree-5, 7-point rule (barycentric weights).
const S15: f64 = 3.872_983_346_207_417; // √15

fn rule() -> [([f64; 3], f64); 7] {
    let a = (6.0 - S15) / 21.0;
    let b = (9.0 + 2.0 * S15) / 21.0;
    let c = (6.0 + S15) / 21.0;
    let d = (9.0 - 2.0 * S15) / 21.0;
    let wa = (155.0 - S15) / 1200.0;
    let wc = (155.0 + S15) / 1200.0;
    let t = 1.0 / 3.0;
    [
        ([t, t, t], 9.0 / 40.0),
        ([a, a, b], wa),
        ([a, b, a], wa),
        ([b, a, a], wa),
        ([c, c, d], wc),
        ([c, d, c], wc),
        ([d, c, c], wc),
    ]
}

fn area(t: &Tri) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs()
}

fn apply<F: Fn([f64; 2]) -> Result<f64>>(f: &F, t: &Tri) -> Result<f64> {
    let ar = area(t);
    if ar == 0.0 {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for (l, w) in rule() {
        let p = [
            l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0],
            l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1],
        ];
        s += w * f(p)?;
    }
    Ok(s * ar)
}

fn split(t: &Tri) -> [Tri; 4] {
    let m = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let (a, b, c) = (t[0], t[1], t[2]);
    let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

struct Cell {
    err: f64,
    id: u64,
    children: [Tri; 4],
    values: [f64; 4],
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then(o.id.cmp(&self.id))
    }
}

fn make_cell<F: Fn([f64; 2]) -> Result<f64>>(f: &F, t: &Tri, coarse: f64, id: u64) -> Result<Cell> {
    let children = split(t);
    let mut values = [0.0; 4];
    for (v, c) in values.iter_mut().zip(children.iter()) {
        *v = apply(f, c)?;
    }
    let fine: f64 = values.iter().sum();
    Ok(Cell {
        err: (coarse - fine).abs(),
        id,
        children,
        values,
    })
}

/// Integrate `f` over the union of `tris` to relative tolerance `rel_tol`.
///
/// The cell with the largest local error estimate is refined first; the
/// refinement sequence depends only on the inputs.
pub(crate) fn integrate<F: Fn([f64; 2]) -> Result<f64>>(tris: &[Tri], f: F, rel_tol: f64, max_cells: usize) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    for t in tris {
        let coarse = apply(&f, t)?;
        heap.push(make_cell(&f, t, coarse, next_id)?);
        next_id += 1;
    }
    let mut leaves = heap.len();
    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(s, e), c| (s + c.values.iter().sum::<f64>(), e + c.err));
        if err <= rel_tol * total.abs() || heap.is_empty() {
            return Ok(sum_leaves(&heap));
        }
        // refine a batch of the worst cells before re-checking the totals
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(cell) = heap.pop() else { break };
            if cell.err <= rel_tol * total.abs() / (leaves as f64 * 4.0) {
                heap.push(cell);
                break;
            }
            leaves += 3;
            if leaves > max_cells {
                return Err(Error::non_convergent(format!("quadrature exceeded {max_cells} cells")));
            }
            for (child, value) in cell.children.iter().zip(cell.values) {
                heap.push(make_cell(&f, child, value, next_id)?);
                next_id += 1;
            }
        }
    }
}

fn sum_leaves(heap: &BinaryHeap<Cell>) -> f64 {
    let mut cells: Vec<&Cell> = heap.iter().collect();
    cells.sort_by_key(|c| c.id);
    cells.iter().map(|c| c.values.iter().sum::<f64>()).sum()
}
