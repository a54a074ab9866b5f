//! Branch-and-bound for `sup |f|` over a union of cell pieces.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::interval::{Arith, Enclosure};

use super::cell::{Cell, Field};

struct Item {
    key: Dyadic,
    idx: usize,
    m: i64,
    sa: f64,
    sb: f64,
}

impl PartialEq for Item {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Item {
    // Largest bound first; among equal bounds the leftmost piece.
    fn cmp(&self, o: &Self) -> Ordering {
        self.key
            .cmp(&o.key)
            .then_with(|| o.m.cmp(&self.m))
            .then_with(|| o.sa.total_cmp(&self.sa))
    }
}

/// A cell index with the `s`-range to search.
pub(crate) type Piece = (i64, f64, f64);

/// `(upper, lower)` bounds of `|f|` on `[c - r, c + r]` inside the cell,
/// combining real and imaginary parts.
fn bounds<A: Arith>(cells: &[Cell<A>], c: f64, r: f64) -> (A, A) {
    let ctx = cells[0].p[0].ctx();
    let mut hi2 = A::zero(ctx);
    let mut lo2 = A::zero(ctx);
    for cell in cells {
        let eps = A::from_f64(ctx, cell.eps);
        let (v, rng) = cell.range(c, r);
        hi2 = hi2.add(&rng.abs().add(&eps).sqr());
        let lo = v.abs().sub(&eps);
        if lo.is_pos() {
            lo2 = lo2.add(&lo.sqr());
        }
    }
    let hi = hi2.sqrt().expect("nonnegative");
    let lo = lo2.sqrt().unwrap_or_else(|| A::zero(ctx));
    (hi, lo)
}

/// Enclosure of `max |f|` over the given pieces, to width `tol`, with
/// `floor` a certified lower bound known in advance.
pub(crate) fn sup<A: Arith>(
    fields: &[Field<A>],
    pieces: &[Piece],
    mesh: u32,
    tol: &Dyadic,
    floor: &Dyadic,
    max_boxes: usize,
) -> Result<Enclosure> {
    let mut cells: Vec<Vec<Cell<A>>> = Vec::with_capacity(pieces.len());
    let mut heap = BinaryHeap::new();
    let mut best = floor.clone();
    let n0 = mesh.max(1).next_power_of_two();
    for (idx, &(m, sa, sb)) in pieces.iter().enumerate() {
        let cs: Vec<Cell<A>> = fields.iter().map(|f| f.cell(m)).collect();
        let h = (sb - sa) / n0 as f64;
        for i in 0..n0 {
            let (a, b) = (sa + h * i as f64, sa + h * (i + 1) as f64);
            let (hi, lo) = bounds(&cs, 0.5 * (a + b), 0.5 * (b - a));
            let lo = lo.lo();
            if lo > best {
                best = lo;
            }
            heap.push(Item {
                key: hi.hi(),
                idx,
                m,
                sa: a,
                sb: b,
            });
        }
        cells.push(cs);
    }
    let mut steps = 0usize;
    loop {
        let Some(top) = heap.pop() else {
            return Enclosure::new(best.clone(), best);
        };
        if top.key.sub(&best) <= *tol || top.key <= best {
            let hi = if top.key < best { best.clone() } else { top.key };
            return Enclosure::new(best, hi);
        }
        steps += 1;
        if steps > max_boxes {
            return Err(Error::resource(format!(
                "peak search exceeded {max_boxes} boxes; bracket [{}, {}]",
                best.to_decimal(12),
                top.key.to_decimal(12)
            )));
        }
        let mid = 0.5 * (top.sa + top.sb);
        if mid <= top.sa || mid >= top.sb {
            return Err(Error::resource("peak search reached the f64 mesh limit"));
        }
        for (a, b) in [(top.sa, mid), (mid, top.sb)] {
            let (hi, lo) = bounds(&cells[top.idx], 0.5 * (a + b), 0.5 * (b - a));
            let lo = lo.lo();
            if lo > best {
                best = lo;
            }
            heap.push(Item {
                key: hi.hi(),
                idx: top.idx,
                m: top.m,
                sa: a,
                sb: b,
            });
        }
    }
}
