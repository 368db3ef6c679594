//! Small named graphs used by tests, the demo, and the benchmark, plus the
//! verification corpus generator.

use std::collections::BTreeSet;

use rand::Rng;

use crate::graph::{colex_index, Graph};
use crate::rng::seeded;

fn build(n: usize, s: usize, t: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::new(n, s, t, edges.iter().copied()).expect("fixture graphs are valid")
}

/// `s - a - t`.
pub fn path() -> Graph {
    build(3, 0, 2, &[(0, 1), (1, 2)])
}

/// `s - a - b - t`.
pub fn series() -> Graph {
    build(4, 0, 3, &[(0, 1), (1, 2), (2, 3)])
}

/// Two parallel routes `s - u - t` and `s - w - t`.
pub fn parallel() -> Graph {
    build(4, 0, 3, &[(0, 1), (1, 3), (0, 2), (2, 3)])
}

/// `s` reaches bottleneck `c` through `a` or `b`; `c - t`.
/// Node ids: s=0, a=1, b=2, c=3, t=4.
pub fn diamond() -> Graph {
    build(5, 0, 4, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)])
}

/// Nine-node network with intermediates `a..g` (ids 1..7), `s = 0`, `t = 8`.
/// Coalition `1100000` connects through `s, a, b, t`; `0100000` does not.
pub fn example() -> Graph {
    build(
        9,
        0,
        8,
        &[
            (0, 1), // s-a
            (1, 2), // a-b
            (2, 8), // b-t
            (0, 3), // s-c
            (3, 4), // c-d
            (4, 8), // d-t
            (1, 5), // a-e
            (5, 6), // e-f
            (6, 8), // f-t
            (3, 7), // c-g
            (7, 2), // g-b
        ],
    )
}

/// Display labels for [`example`].
pub const EXAMPLE_LABELS: [&str; 9] = ["s", "a", "b", "c", "d", "e", "f", "g", "t"];

/// Source and target joined directly.
pub fn trivial() -> Graph {
    build(4, 0, 3, &[(0, 3), (0, 1), (1, 3)])
}

/// Looks up a named fixture.
pub fn by_name(name: &str) -> Option<Graph> {
    Some(match name {
        "path" => path(),
        "series" => series(),
        "parallel" => parallel(),
        "diamond" => diamond(),
        "example" => example(),
        "trivial" => trivial(),
        _ => return None,
    })
}

/// Every graph on `n` nodes with `s = 0`, `t = n - 1` and no `(s, t)` edge,
/// one representative per isomorphism class of graphs with labelled `s, t`.
pub fn nonisomorphic_graphs(n: usize) -> Vec<Graph> {
    assert!((2..=6).contains(&n), "exhaustive enumeration is limited to n <= 6");
    let (s, t) = (0, n - 1);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|w| (0..w).map(move |u| (u, w)))
        .filter(|&(u, w)| (u, w) != (s, t))
        .collect();
    let middle: Vec<usize> = (1..n - 1).collect();
    let perms = permutations(&middle);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..1 << pairs.len() {
        let chosen: Vec<(usize, usize)> =
            (0..pairs.len()).filter(|&k| mask >> k & 1 == 1).map(|k| pairs[k]).collect();
        let canon = perms
            .iter()
            .map(|p| {
                let relabel = |v: usize| if v == s || v == t { v } else { p[v - 1] };
                chosen
                    .iter()
                    .map(|&(u, w)| 1u64 << colex_index(relabel(u), relabel(w)))
                    .fold(0u64, |a, b| a | b)
            })
            .min()
            .unwrap_or(0);
        if seen.insert(canon) {
            out.push(build(n, s, t, &chosen));
        }
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// `count` random graphs on `n` nodes (each non-`(s,t)` pair present with
/// probability 1/2), `s = 0`, `t = n - 1`.
pub fn random_graphs(n: usize, count: usize, seed: u64) -> Vec<Graph> {
    let mut rng = seeded(seed);
    let (s, t) = (0, n - 1);
    (0..count)
        .map(|_| {
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|w| (0..w).map(move |u| (u, w)))
                .filter(|&(u, w)| (u, w) != (s, t))
                .filter(|_| rng.random_bool(0.5))
                .collect();
            build(n, s, t, &edges)
        })
        .collect()
}

/// Verification corpus: all graphs on up to five nodes up to isomorphism and
/// 200 random six-node graphs.
pub fn corpus(seed: u64) -> Vec<Graph> {
    let mut out: Vec<Graph> = (2..=5).flat_map(nonisomorphic_graphs).collect();
    out.extend(random_graphs(6, 200, seed));
    out
}
