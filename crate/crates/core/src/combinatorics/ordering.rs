//! Relabeling coupled indices so that each block is a contiguous, well-nested range.

use serde::Serialize;

use super::CouplingSpec;
use crate::error::{Error, Result};

/// Largest block size handled by [`search_strict_order`].
pub const MAX_SEARCH_BLOCK: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderSource {
    /// Leaf-peeling construction.
    Recursive,
    /// Exhaustive search, used when the construction misses the strict predicate.
    Search,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockOrder {
    /// Original indices in their new order.
    pub members: Vec<usize>,
    /// First new label of the block.
    pub start: usize,
    pub source: OrderSource,
    pub strict: bool,
    pub nested: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockOrdering {
    pub blocks: Vec<BlockOrder>,
    /// `permutation[new] = old`.
    pub permutation: Vec<usize>,
    /// The coupling expressed in the new labels.
    pub relabeled: CouplingSpec,
}

impl BlockOrdering {
    pub fn all_strict(&self) -> bool {
        self.blocks.iter().all(|b| b.strict)
    }
}

/// Orders every block, concatenating blocks by smallest original member.
pub fn order_blocks(coupling: &CouplingSpec) -> Result<BlockOrdering> {
    let mut blocks = Vec::new();
    let mut permutation = Vec::with_capacity(coupling.len());
    for block in coupling.blocks() {
        let mut members = recursive_order(coupling, block);
        let mut source = OrderSource::Recursive;
        let mut strict = strict_in_order(coupling, &members);
        if !strict && block.len() <= MAX_SEARCH_BLOCK {
            if let Some(found) = search_strict_order(coupling, block)? {
                members = found;
                source = OrderSource::Search;
                strict = true;
            }
        }
        let nested = nested_in_order(coupling, &members);
        let start = permutation.len();
        permutation.extend_from_slice(&members);
        blocks.push(BlockOrder {
            members,
            start,
            source,
            strict,
            nested,
        });
    }
    let relabeled = coupling.relabel(&permutation)?;
    Ok(BlockOrdering {
        blocks,
        permutation,
        relabeled,
    })
}

fn recursive_order(coupling: &CouplingSpec, block: &[usize]) -> Vec<usize> {
    if block.len() <= 2 {
        return block.to_vec();
    }
    let r = coupling.r();
    // Children still present after earlier peels.
    let mut alive: Vec<usize> = block.to_vec();
    let mut children: Vec<usize> = vec![0; coupling.len()];
    for &x in block {
        children[r[x]] += 1;
    }
    let mut peeled = Vec::new();
    while let Some(pos) = alive.iter().position(|x| children[*x] == 0) {
        let leaf = alive.remove(pos);
        children[r[leaf]] -= 1;
        peeled.push(leaf);
    }
    // The remainder is the unique cycle of the block.
    let mut order = vec![alive[0]];
    while order.len() < alive.len() {
        order.push(r[*order.last().expect("nonempty")]);
    }
    for leaf in peeled.into_iter().rev() {
        let at = order.iter().position(|x| *x == r[leaf]).expect("parent placed");
        order.insert(at, leaf);
    }
    order
}

fn positions(coupling: &CouplingSpec, order: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; coupling.len()];
    for (p, &x) in order.iter().enumerate() {
        pos[x] = p;
    }
    pos
}

/// `(min, max)` of the positions of `J_x` with the block's last position removed.
fn reduced_range(coupling: &CouplingSpec, pos: &[usize], x: usize, last: usize) -> Option<(usize, usize)> {
    coupling.sets()[x]
        .iter()
        .map(|s| pos[*s])
        .filter(|p| *p != last)
        .fold(None, |acc, p| match acc {
            None => Some((p, p)),
            Some((lo, hi)) => Some((lo.min(p), hi.max(p))),
        })
}

// Set comparisons with an empty side holding vacuously.
fn before(a: Option<(usize, usize)>, b: Option<(usize, usize)>) -> bool {
    match (a, b) {
        (Some((_, hi)), Some((lo, _))) => hi < lo,
        _ => true,
    }
}

fn before_eq(a: Option<(usize, usize)>, b: Option<(usize, usize)>) -> bool {
    match (a, b) {
        (Some((_, hi)), Some((lo, _))) => hi <= lo,
        _ => true,
    }
}

fn strict_in_order(coupling: &CouplingSpec, order: &[usize]) -> bool {
    let pos = positions(coupling, order);
    let last = order.len() - 1;
    let ranges: Vec<_> = order.iter().map(|x| reduced_range(coupling, &pos, *x, last)).collect();
    for i in 0..order.len() {
        let ji = ranges[i];
        let si = Some((i, i));
        for j in i + 1..order.len() {
            let jj = ranges[j];
            let sj = Some((j, j));
            let interleaved = before(ji, si) && before_eq(si, jj) && before(jj, sj);
            let nested = before(jj, ji) && before(ji, si);
            if !(interleaved || nested) {
                return false;
            }
        }
    }
    true
}

fn nested_in_order(coupling: &CouplingSpec, order: &[usize]) -> bool {
    let pos = positions(coupling, order);
    let r = coupling.r();
    let last = order.len() - 1;
    let arcs: Vec<(usize, usize)> = order[..last].iter().map(|x| (pos[*x], pos[r[*x]])).collect();
    if arcs.iter().any(|(s, t)| s >= t) {
        return false;
    }
    arcs.iter().all(|&(s, t)| {
        arcs.iter()
            .all(|&(s2, t2)| t >= t2 || t <= s2 || s2 < s)
    })
}

fn check_blocks<F: Fn(&CouplingSpec, &[usize]) -> bool>(coupling: &CouplingSpec, pred: F) -> bool {
    coupling.blocks().iter().all(|b| pred(coupling, b))
}

/// Strict predicate on the current labels: for `i < j` in a block, with `J*` the set minus the
/// block maximum, either `J*_i < i <= J*_j < j` or `J*_j < J*_i < i`.
pub fn satisfies_strict_order(coupling: &CouplingSpec) -> bool {
    check_blocks(coupling, strict_in_order)
}

/// Non-crossing arcs `x -> r(x)` on the current labels: every arc except the one leaving the
/// block maximum points forward, and no two arcs cross.
pub fn satisfies_nesting(coupling: &CouplingSpec) -> bool {
    check_blocks(coupling, nested_in_order)
}

/// Searches all orders of one block for one meeting the strict predicate, in lexicographic order.
pub fn search_strict_order(coupling: &CouplingSpec, block: &[usize]) -> Result<Option<Vec<usize>>> {
    if block.len() > MAX_SEARCH_BLOCK {
        return Err(Error::Capacity(format!(
            "block of {} indices exceeds the search limit {MAX_SEARCH_BLOCK}",
            block.len()
        )));
    }
    let mut order = block.to_vec();
    order.sort_unstable();
    loop {
        if strict_in_order(coupling, &order) {
            return Ok(Some(order));
        }
        if !next_permutation(&mut order) {
            return Ok(None);
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
