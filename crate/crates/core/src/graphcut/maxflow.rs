//! Augmenting-path max-flow with search trees grown from both terminals and
//! reused across augmentations (Boykov & Kolmogorov, 2004).

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Residual capacities at or below this are treated as saturated.
pub const RESIDUAL_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Source,
    Sink,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Edge {
    u: u32,
    v: u32,
    cap: f64,
    rev_cap: f64,
}

/// Directed graph over `n` non-terminal nodes plus an implicit source and
/// sink. Terminal capacities are kept per node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowGraph {
    source_caps: Vec<f64>,
    sink_caps: Vec<f64>,
    edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutResult {
    pub flow_value: f64,
    /// Side of each non-terminal node; the source is always on
    /// [`Side::Source`] and the sink on [`Side::Sink`].
    pub sides: Vec<Side>,
}

impl CutResult {
    pub fn side(&self, node: usize) -> Side {
        self.sides[node]
    }
}

fn check_cap(c: f64) {
    assert!(c.is_finite() && c >= 0.0, "capacity must be finite and non-negative, got {c}");
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        Self {
            source_caps: vec![0.0; nodes],
            sink_caps: vec![0.0; nodes],
            edges: Vec::new(),
        }
    }

    pub fn with_edge_capacity(nodes: usize, edges: usize) -> Self {
        let mut g = Self::new(nodes);
        g.edges.reserve(edges);
        g
    }

    pub fn node_count(&self) -> usize {
        self.source_caps.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adds `source -> node` and `node -> sink` capacity.
    pub fn add_terminal_weights(&mut self, node: usize, to_source: f64, to_sink: f64) {
        check_cap(to_source);
        check_cap(to_sink);
        self.source_caps[node] += to_source;
        self.sink_caps[node] += to_sink;
    }

    /// Adds `u -> v` with capacity `cap` and `v -> u` with `rev_cap`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: f64, rev_cap: f64) {
        check_cap(cap);
        check_cap(rev_cap);
        assert!(u < self.node_count() && v < self.node_count() && u != v, "bad edge {u} -> {v}");
        self.edges.push(Edge {
            u: u as u32,
            v: v as u32,
            cap,
            rev_cap,
        });
    }

    pub fn terminal_caps(&self, node: usize) -> (f64, f64) {
        (self.source_caps[node], self.sink_caps[node])
    }

    /// Total capacity of edges leaving the source side of a partition.
    pub fn cut_capacity(&self, sides: &[Side]) -> f64 {
        assert_eq!(sides.len(), self.node_count());
        let mut c = 0.0;
        for (i, s) in sides.iter().enumerate() {
            c += match s {
                Side::Source => self.sink_caps[i],
                Side::Sink => self.source_caps[i],
            };
        }
        for e in &self.edges {
            match (sides[e.u as usize], sides[e.v as usize]) {
                (Side::Source, Side::Sink) => c += e.cap,
                (Side::Sink, Side::Source) => c += e.rev_cap,
                _ => {}
            }
        }
        c
    }

    pub fn max_flow(&self) -> CutResult {
        let mut solver = Solver::new(self);
        solver.run();
        CutResult {
            flow_value: solver.flow,
            sides: solver.min_cut(),
        }
    }

    /// Plain-text edge list: a header with node counts and terminal ids, then
    /// one `u v cap` line per directed edge with non-zero capacity. Node 0 is
    /// the source, 1 the sink, and non-terminal node `i` is `i + 2`.
    pub fn to_edge_list(&self) -> String {
        let n = self.node_count();
        let mut lines = Vec::new();
        for i in 0..n {
            if self.source_caps[i] > 0.0 {
                lines.push((0, i + 2, self.source_caps[i]));
            }
            if self.sink_caps[i] > 0.0 {
                lines.push((i + 2, 1, self.sink_caps[i]));
            }
        }
        for e in &self.edges {
            if e.cap > 0.0 {
                lines.push((e.u as usize + 2, e.v as usize + 2, e.cap));
            }
            if e.rev_cap > 0.0 {
                lines.push((e.v as usize + 2, e.u as usize + 2, e.rev_cap));
            }
        }
        let mut s = format!("nodes {} edges {}\nsource 0\nsink 1\n", n + 2, lines.len());
        for (u, v, c) in lines {
            let _ = writeln!(s, "{u} {v} {c:?}");
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::Parse {
            what: "edge list",
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty input"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "nodes" || h[2] != "edges" {
            return Err(bad(1, "expected `nodes N edges M`"));
        }
        let total: usize = h[1].parse().map_err(|_| bad(1, "node count"))?;
        if total < 2 {
            return Err(bad(1, "need at least the two terminals"));
        }
        for (expect, want) in [("source", "0"), ("sink", "1")] {
            let (n, l) = lines.next().ok_or_else(|| bad(0, "missing terminal line"))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f != [expect, want] {
                return Err(bad(n + 1, "terminal ids must be `source 0` and `sink 1`"));
            }
        }
        let mut g = FlowGraph::new(total - 2);
        for (n, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(n + 1, "expected `u v cap`"));
            }
            let u: usize = f[0].parse().map_err(|_| bad(n + 1, "u"))?;
            let v: usize = f[1].parse().map_err(|_| bad(n + 1, "v"))?;
            let c: f64 = f[2].parse().map_err(|_| bad(n + 1, "cap"))?;
            if u >= total || v >= total || u == v || !(c >= 0.0) || !c.is_finite() {
                return Err(bad(n + 1, "edge out of range"));
            }
            match (u, v) {
                (0, 1) | (1, 0) | (_, 0) | (1, _) => return Err(bad(n + 1, "unsupported terminal edge")),
                (0, v) => g.add_terminal_weights(v - 2, c, 0.0),
                (u, 1) => g.add_terminal_weights(u - 2, 0.0, c),
                (u, v) => g.add_edge(u - 2, v - 2, c, 0.0),
            }
        }
        Ok(g)
    }
}

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;
const INFINITE_DIST: u32 = u32::MAX;

/// Solver state. Arcs come in pairs: `a` and its reverse `a ^ 1`.
struct Solver {
    first: Vec<u32>,
    arc_head: Vec<u32>,
    arc_next: Vec<u32>,
    r_cap: Vec<f64>,
    /// `source cap - sink cap` residual; sign tells which terminal feeds it.
    tr_cap: Vec<f64>,
    parent: Vec<u32>,
    in_sink: Vec<bool>,
    ts: Vec<u64>,
    dist: Vec<u32>,
    is_active: Vec<bool>,
    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
    time: u64,
    flow: f64,
}

impl Solver {
    fn new(g: &FlowGraph) -> Self {
        let n = g.node_count();
        let m = g.edges.len() * 2;
        let mut s = Solver {
            first: vec![NONE; n],
            arc_head: Vec::with_capacity(m),
            arc_next: Vec::with_capacity(m),
            r_cap: Vec::with_capacity(m),
            tr_cap: vec![0.0; n],
            parent: vec![NONE; n],
            in_sink: vec![false; n],
            ts: vec![0; n],
            dist: vec![0; n],
            is_active: vec![false; n],
            active: VecDeque::new(),
            orphans: VecDeque::new(),
            time: 0,
            flow: 0.0,
        };
        for e in &g.edges {
            let a = s.arc_head.len() as u32;
            s.arc_head.push(e.v);
            s.arc_next.push(s.first[e.u as usize]);
            s.r_cap.push(e.cap);
            s.first[e.u as usize] = a;
            s.arc_head.push(e.u);
            s.arc_next.push(s.first[e.v as usize]);
            s.r_cap.push(e.rev_cap);
            s.first[e.v as usize] = a + 1;
        }
        for i in 0..n {
            let (cs, ct) = (g.source_caps[i], g.sink_caps[i]);
            s.flow += cs.min(ct);
            s.tr_cap[i] = cs - ct;
            if s.tr_cap[i] > RESIDUAL_EPS {
                s.parent[i] = TERMINAL;
                s.in_sink[i] = false;
                s.dist[i] = 1;
                s.activate(i as u32);
            } else if s.tr_cap[i] < -RESIDUAL_EPS {
                s.parent[i] = TERMINAL;
                s.in_sink[i] = true;
                s.dist[i] = 1;
                s.activate(i as u32);
            }
        }
        s
    }

    #[inline]
    fn activate(&mut self, i: u32) {
        if !self.is_active[i as usize] {
            self.is_active[i as usize] = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.active.pop_front() {
            self.is_active[i as usize] = false;
            if self.parent[i as usize] != NONE {
                return Some(i);
            }
        }
        None
    }

    #[inline]
    fn tail(&self, a: u32) -> u32 {
        self.arc_head[(a ^ 1) as usize]
    }

    fn arcs(&self, i: u32) -> ArcIter<'_> {
        ArcIter {
            next: &self.arc_next,
            cur: self.first[i as usize],
        }
    }

    /// Grows the tree containing `i` by one layer; returns an arc from the
    /// source tree into the sink tree if the trees touch.
    fn grow(&mut self, i: u32) -> Option<u32> {
        let iu = i as usize;
        let sink_tree = self.in_sink[iu];
        let mut a = self.first[iu];
        while a != NONE {
            let residual = if sink_tree {
                self.r_cap[(a ^ 1) as usize]
            } else {
                self.r_cap[a as usize]
            };
            if residual > RESIDUAL_EPS {
                let j = self.arc_head[a as usize] as usize;
                if self.parent[j] == NONE {
                    self.in_sink[j] = sink_tree;
                    self.parent[j] = a ^ 1;
                    self.ts[j] = self.ts[iu];
                    self.dist[j] = self.dist[iu] + 1;
                    self.activate(j as u32);
                } else if self.in_sink[j] != sink_tree {
                    return Some(if sink_tree { a ^ 1 } else { a });
                } else if self.ts[j] <= self.ts[iu] && self.dist[j] > self.dist[iu] {
                    self.parent[j] = a ^ 1;
                    self.ts[j] = self.ts[iu];
                    self.dist[j] = self.dist[iu] + 1;
                }
            }
            a = self.arc_next[a as usize];
        }
        None
    }

    fn make_orphan_front(&mut self, i: u32) {
        self.parent[i as usize] = ORPHAN;
        self.orphans.push_front(i);
    }

    fn make_orphan_back(&mut self, i: u32) {
        self.parent[i as usize] = ORPHAN;
        self.orphans.push_back(i);
    }

    fn augment(&mut self, middle: u32) {
        let mut bottleneck = self.r_cap[middle as usize];

        let mut i = self.tail(middle);
        loop {
            let pa = self.parent[i as usize];
            if pa == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.r_cap[(pa ^ 1) as usize]);
            i = self.arc_head[pa as usize];
        }
        bottleneck = bottleneck.min(self.tr_cap[i as usize]);

        let mut i = self.arc_head[middle as usize];
        loop {
            let pa = self.parent[i as usize];
            if pa == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.r_cap[pa as usize]);
            i = self.arc_head[pa as usize];
        }
        bottleneck = bottleneck.min(-self.tr_cap[i as usize]);

        self.r_cap[(middle ^ 1) as usize] += bottleneck;
        self.r_cap[middle as usize] -= bottleneck;

        let mut i = self.tail(middle);
        loop {
            let pa = self.parent[i as usize];
            if pa == TERMINAL {
                break;
            }
            self.r_cap[pa as usize] += bottleneck;
            self.r_cap[(pa ^ 1) as usize] -= bottleneck;
            let next = self.arc_head[pa as usize];
            if self.r_cap[(pa ^ 1) as usize] <= RESIDUAL_EPS {
                self.make_orphan_front(i);
            }
            i = next;
        }
        self.tr_cap[i as usize] -= bottleneck;
        if self.tr_cap[i as usize] <= RESIDUAL_EPS {
            self.make_orphan_front(i);
        }

        let mut i = self.arc_head[middle as usize];
        loop {
            let pa = self.parent[i as usize];
            if pa == TERMINAL {
                break;
            }
            self.r_cap[(pa ^ 1) as usize] += bottleneck;
            self.r_cap[pa as usize] -= bottleneck;
            let next = self.arc_head[pa as usize];
            if self.r_cap[pa as usize] <= RESIDUAL_EPS {
                self.make_orphan_front(i);
            }
            i = next;
        }
        self.tr_cap[i as usize] += bottleneck;
        if self.tr_cap[i as usize] >= -RESIDUAL_EPS {
            self.make_orphan_front(i);
        }

        self.flow += bottleneck;
    }

    /// Distance from `j` to its terminal through valid parents, or
    /// `INFINITE_DIST` if the chain hits an orphan. Caches along the way.
    fn origin_distance(&mut self, j: u32) -> u32 {
        let mut d: u32 = 0;
        let mut k = j as usize;
        loop {
            if self.ts[k] == self.time {
                d += self.dist[k];
                break;
            }
            let a = self.parent[k];
            d += 1;
            if a == TERMINAL {
                self.ts[k] = self.time;
                self.dist[k] = 1;
                break;
            }
            if a == ORPHAN {
                return INFINITE_DIST;
            }
            k = self.arc_head[a as usize] as usize;
        }
        let mut k = j as usize;
        let mut dd = d;
        while self.ts[k] != self.time {
            self.ts[k] = self.time;
            self.dist[k] = dd;
            dd -= 1;
            k = self.arc_head[self.parent[k] as usize] as usize;
        }
        d
    }

    fn process_orphan(&mut self, i: u32) {
        let iu = i as usize;
        let sink_tree = self.in_sink[iu];
        let mut best = NONE;
        let mut best_d = INFINITE_DIST;

        let mut a0 = self.first[iu];
        while a0 != NONE {
            // Residual from the candidate parent toward i (source tree) or
            // from i toward it (sink tree).
            let residual = if sink_tree {
                self.r_cap[a0 as usize]
            } else {
                self.r_cap[(a0 ^ 1) as usize]
            };
            let j = self.arc_head[a0 as usize];
            if residual > RESIDUAL_EPS && self.in_sink[j as usize] == sink_tree && self.parent[j as usize] != NONE {
                let d = self.origin_distance(j);
                if d < best_d {
                    best_d = d;
                    best = a0;
                }
            }
            a0 = self.arc_next[a0 as usize];
        }

        if best != NONE {
            self.parent[iu] = best;
            self.ts[iu] = self.time;
            self.dist[iu] = best_d + 1;
            return;
        }

        self.parent[iu] = NONE;
        let mut a0 = self.first[iu];
        while a0 != NONE {
            let j = self.arc_head[a0 as usize];
            let ju = j as usize;
            let pj = self.parent[ju];
            if self.in_sink[ju] == sink_tree && pj != NONE {
                let residual = if sink_tree {
                    self.r_cap[a0 as usize]
                } else {
                    self.r_cap[(a0 ^ 1) as usize]
                };
                if residual > RESIDUAL_EPS {
                    self.activate(j);
                }
                if pj != TERMINAL && pj != ORPHAN && self.arc_head[pj as usize] == i {
                    self.make_orphan_back(j);
                }
            }
            a0 = self.arc_next[a0 as usize];
        }
    }

    fn run(&mut self) {
        let mut current: Option<u32> = None;
        loop {
            let i = match current.take() {
                Some(i) if self.parent[i as usize] != NONE => {
                    self.is_active[i as usize] = false;
                    i
                }
                Some(i) => {
                    self.is_active[i as usize] = false;
                    match self.next_active() {
                        Some(i) => i,
                        None => break,
                    }
                }
                None => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };

            let found = self.grow(i);
            self.time += 1;
            if let Some(middle) = found {
                // Keep working from the same node once the trees are repaired.
                self.is_active[i as usize] = true;
                current = Some(i);
                self.augment(middle);
                while let Some(o) = self.orphans.pop_front() {
                    self.process_orphan(o);
                }
            }
        }
    }

    /// Source side = nodes reachable from the source in the residual graph.
    fn min_cut(&self) -> Vec<Side> {
        let n = self.first.len();
        let mut sides = vec![Side::Sink; n];
        let mut queue = VecDeque::new();
        for i in 0..n {
            if self.tr_cap[i] > RESIDUAL_EPS {
                sides[i] = Side::Source;
                queue.push_back(i as u32);
            }
        }
        while let Some(i) = queue.pop_front() {
            for a in self.arcs(i) {
                let j = self.arc_head[a as usize] as usize;
                if sides[j] == Side::Sink && self.r_cap[a as usize] > RESIDUAL_EPS {
                    sides[j] = Side::Source;
                    queue.push_back(j as u32);
                }
            }
        }
        sides
    }
}

struct ArcIter<'a> {
    next: &'a [u32],
    cur: u32,
}

impl Iterator for ArcIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.cur == NONE {
            return None;
        }
        let a = self.cur;
        self.cur = self.next[a as usize];
        Some(a)
    }
}
