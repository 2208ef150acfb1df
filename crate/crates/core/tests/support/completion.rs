//! Reference model of the derandomizer's random completion, written
//! directly from its definition: every pending child goes to either side
//! with probability 1/2, then every node with more than two children is
//! replaced by a uniformly random rooted binary tree on those children.

#![allow(dead_code)]

use num_rational::Ratio;
use rand::Rng;

use wqc_core::approx::{PartialTree, PendingSplit};
use wqc_core::quartets::{Quadset, Topology};

#[derive(Debug, Clone)]
pub enum Shape {
    Leaf(usize),
    Node(Box<Shape>, Box<Shape>),
}

fn kids(pt: &PartialTree, split: Option<&PendingSplit>, sides: &[bool], u: usize) -> Vec<usize> {
    let mut out = pt.children(u).to_vec();
    if let Some(s) = split {
        for (i, &leaf) in s.pending.iter().enumerate() {
            if (u == s.x && !sides[i]) || (u == s.y && sides[i]) {
                out.push(leaf);
            }
        }
    }
    out
}

/// Every rooted binary tree on the given subtrees, each kept intact: the
/// shapes are built over placeholder leaves and the subtrees substituted.
fn resolutions(parts: Vec<Shape>) -> Vec<Shape> {
    let mut acc = vec![Shape::Leaf(0)];
    for i in 1..parts.len() {
        let mut next = Vec::new();
        for t in &acc {
            next.extend(insert_everywhere(t, &Shape::Leaf(i)));
        }
        acc = next;
    }
    acc.iter().map(|t| substitute(t, &parts)).collect()
}

fn substitute(t: &Shape, parts: &[Shape]) -> Shape {
    match t {
        Shape::Leaf(i) => parts[*i].clone(),
        Shape::Node(l, r) => Shape::Node(Box::new(substitute(l, parts)), Box::new(substitute(r, parts))),
    }
}

fn insert_everywhere(t: &Shape, p: &Shape) -> Vec<Shape> {
    let mut out = vec![Shape::Node(Box::new(t.clone()), Box::new(p.clone()))];
    if let Shape::Node(l, r) = t {
        for l2 in insert_everywhere(l, p) {
            out.push(Shape::Node(Box::new(l2), r.clone()));
        }
        for r2 in insert_everywhere(r, p) {
            out.push(Shape::Node(l.clone(), Box::new(r2)));
        }
    }
    out
}

fn all_completions(pt: &PartialTree, split: Option<&PendingSplit>, sides: &[bool], u: usize) -> Vec<(Option<Shape>, Ratio<u64>)> {
    if pt.is_leaf(u) {
        return vec![(Some(Shape::Leaf(u)), Ratio::from(1))];
    }
    let mut acc: Vec<(Vec<Shape>, Ratio<u64>)> = vec![(Vec::new(), Ratio::from(1))];
    for c in kids(pt, split, sides, u) {
        let opts = all_completions(pt, split, sides, c);
        let mut next = Vec::new();
        for (prefix, w) in &acc {
            for (o, w2) in &opts {
                let mut p = prefix.clone();
                p.extend(o.clone());
                next.push((p, w * w2));
            }
        }
        acc = next;
    }
    let mut out = Vec::new();
    for (parts, w) in acc {
        match parts.len() {
            0 => out.push((None, w)),
            1 => out.push((Some(parts.into_iter().next().unwrap()), w)),
            _ => {
                let rs = resolutions(parts);
                let each = w / Ratio::from(rs.len() as u64);
                out.extend(rs.into_iter().map(|r| (Some(r), each)));
            }
        }
    }
    out
}

/// Topology of `q` in a rooted binary shape, by the four-point condition on
/// root paths.
pub fn shape_topology(s: &Shape, q: &Quadset) -> Topology {
    fn walk(s: &Shape, path: &mut Vec<usize>, next: &mut usize, q: &Quadset, out: &mut [Vec<usize>; 4]) {
        let id = *next;
        *next += 1;
        path.push(id);
        match s {
            Shape::Leaf(l) => {
                if let Some(j) = q.iter().position(|x| x == l) {
                    out[j] = path.clone();
                }
            }
            Shape::Node(a, b) => {
                walk(a, path, next, q, out);
                walk(b, path, next, q, out);
            }
        }
        path.pop();
    }
    let mut paths: [Vec<usize>; 4] = Default::default();
    walk(s, &mut Vec::new(), &mut 0, q, &mut paths);
    let d = |i: usize, j: usize| {
        let common = paths[i].iter().zip(&paths[j]).take_while(|(a, b)| a == b).count();
        paths[i].len() + paths[j].len() - 2 * common
    };
    let sums = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
    let t = (0..3).min_by_key(|&t| sums[t]).unwrap();
    Topology::from_index(t)
}

/// Exact distribution of `q`'s topology, by enumerating every completion.
pub fn exact_distribution(pt: &PartialTree, split: Option<&PendingSplit>, q: &Quadset) -> [Ratio<u64>; 3] {
    let p = split.map_or(0, |s| s.pending.len());
    let mut dist = [Ratio::from(0); 3];
    let share = Ratio::new(1, 1u64 << p);
    for mask in 0..(1usize << p) {
        let sides: Vec<bool> = (0..p).map(|i| mask >> i & 1 == 1).collect();
        for (shape, w) in all_completions(pt, split, &sides, pt.root()) {
            let t = shape_topology(&shape.expect("nonempty tree"), q);
            dist[t.index()] += w * share;
        }
    }
    dist
}

fn random_resolution<R: Rng>(parts: Vec<Shape>, rng: &mut R) -> Shape {
    let mut t = Shape::Leaf(0);
    for i in 1..parts.len() {
        // a rooted tree on i placeholders has 2i - 1 nodes
        let target = rng.gen_range(0..2 * i - 1);
        t = graft(t, Shape::Leaf(i), target, &mut 0);
    }
    substitute(&t, &parts)
}

/// Puts `p` beside the node numbered `target` in preorder.
fn graft(t: Shape, p: Shape, target: usize, counter: &mut usize) -> Shape {
    let here = *counter;
    *counter += 1;
    if here == target {
        return Shape::Node(Box::new(t), Box::new(p));
    }
    match t {
        Shape::Leaf(_) => t,
        Shape::Node(l, r) => {
            let l = graft(*l, p.clone(), target, counter);
            let r = graft(*r, p, target, counter);
            Shape::Node(Box::new(l), Box::new(r))
        }
    }
}

fn sample_node<R: Rng>(pt: &PartialTree, split: Option<&PendingSplit>, sides: &[bool], u: usize, rng: &mut R) -> Option<Shape> {
    if pt.is_leaf(u) {
        return Some(Shape::Leaf(u));
    }
    let parts: Vec<Shape> = kids(pt, split, sides, u)
        .into_iter()
        .filter_map(|c| sample_node(pt, split, sides, c, rng))
        .collect();
    match parts.len() {
        0 => None,
        1 => parts.into_iter().next(),
        _ => Some(random_resolution(parts, rng)),
    }
}

/// One random completion's topology on `q`.
pub fn sample_topology<R: Rng>(pt: &PartialTree, split: Option<&PendingSplit>, q: &Quadset, rng: &mut R) -> Topology {
    let p = split.map_or(0, |s| s.pending.len());
    let sides: Vec<bool> = (0..p).map(|_| rng.gen_bool(0.5)).collect();
    let shape = sample_node(pt, split, &sides, pt.root(), rng).expect("nonempty tree");
    shape_topology(&shape, q)
}
