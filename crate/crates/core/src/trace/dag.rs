// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Reachability, transitive closure and transitive reduction over small
//! dense DAGs, using packed bitsets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Fixed-width bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }
}

fn successors(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        succ[a].push(b);
    }
    succ
}

/// Kahn topological order; `CycleDetected` if one does not exist.
pub fn topological_order(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Vec<usize>> {
    let succ = successors(n, edges);
    let mut indeg = vec![0usize; n];
    for &(_, b) in edges {
        indeg[b] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err(Error::CycleDetected)
    }
}

/// Strict descendants of every vertex.
pub fn transitive_closure(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Vec<BitSet>> {
    let order = topological_order(n, edges)?;
    let succ = successors(n, edges);
    let mut reach = vec![BitSet::new(n); n];
    for &v in order.iter().rev() {
        let mut r = BitSet::new(n);
        for &w in &succ[v] {
            r.insert(w);
            r.union_with(&reach[w]);
        }
        reach[v] = r;
    }
    Ok(reach)
}

/// Minimal edge set with the same reachability.
pub fn transitive_reduction(
    n: usize,
    edges: &BTreeSet<(usize, usize)>,
) -> Result<BTreeSet<(usize, usize)>> {
    let order = topological_order(n, edges)?;
    let mut rank = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let reach = transitive_closure(n, edges)?;
    let mut succ = successors(n, edges);
    let mut kept = BTreeSet::new();
    for (v, list) in succ.iter_mut().enumerate() {
        list.sort_by_key(|&w| rank[w]);
        list.dedup();
        let mut covered = BitSet::new(n);
        for &w in list.iter() {
            if !covered.contains(w) {
                kept.insert((v, w));
                covered.union_with(&reach[w]);
            }
        }
    }
    Ok(kept)
}

/// Forward reachability from `start` (excluding it, unless on a cycle).
pub fn reachable_from(n: usize, edges: &BTreeSet<(usize, usize)>, start: usize) -> BitSet {
    let succ = successors(n, edges);
    let mut seen = BitSet::new(n);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &succ[v] {
            if !seen.contains(w) {
                seen.insert(w);
                stack.push(w);
            }
        }
    }
    seen
}
