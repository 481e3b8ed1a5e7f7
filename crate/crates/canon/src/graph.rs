//! Graphs with external legs, vertex weights and mass labels; contraction
//! and deletion; spanning trees and forests; cycle bases; subgraph
//! classification (core / mass-momentum spanning / motic).
//!
//! Edge variables of polynomials are indexed by *position* in the edge list;
//! edge ids are stable labels that survive contraction, so quotient graphs
//! keep their parents' labels. `embed_poly` moves polynomials between the
//! two indexings by matching ids.

use crate::error::{Error, Result};
use crate::poly::MPoly;
use crate::rat::Rat;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub type VertexId = u32;
pub type EdgeId = u32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub source: VertexId,
    pub target: VertexId,
    #[serde(default)]
    pub mass_label: u32,
}

impl Edge {
    pub fn is_tadpole(&self) -> bool {
        self.source == self.target
    }
}

#[derive(Clone, Debug)]
pub struct Graph {
    vertices: Vec<(VertexId, u32)>,
    edges: Vec<Edge>,
    legs: Vec<(u32, VertexId)>,
    orientation: i8,
}

/// Edge-id subset of a parent graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    pub edges: BTreeSet<EdgeId>,
}

impl Subgraph {
    pub fn new<I: IntoIterator<Item = EdgeId>>(ids: I) -> Self {
        Subgraph {
            edges: ids.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubgraphFlags {
    pub core: bool,
    pub mass_spanning: bool,
    pub momentum_spanning: bool,
    pub mm: bool,
}

impl Graph {
    /// Construct and validate a graph with contiguous edge ids 1..N.
    pub fn new(
        vertices: Vec<(VertexId, u32)>,
        edges: Vec<Edge>,
        legs: Vec<(u32, VertexId)>,
    ) -> Result<Self> {
        let mut g = Graph {
            vertices,
            edges,
            legs,
            orientation: 1,
        };
        g.edges.sort_by_key(|e| e.id);
        let mut ids: Vec<EdgeId> = g.edges.iter().map(|e| e.id).collect();
        ids.dedup();
        if ids.len() != g.edges.len() || ids.iter().enumerate().any(|(i, &id)| id != i as u32 + 1) {
            return Err(Error::NonContiguousEdgeIds);
        }
        g.validate_endpoints()?;
        Ok(g)
    }

    fn from_parts(
        vertices: Vec<(VertexId, u32)>,
        edges: Vec<Edge>,
        legs: Vec<(u32, VertexId)>,
        orientation: i8,
    ) -> Self {
        Graph {
            vertices,
            edges,
            legs,
            orientation,
        }
    }

    fn validate_endpoints(&self) -> Result<()> {
        let vs: BTreeSet<VertexId> = self.vertices.iter().map(|&(v, _)| v).collect();
        if vs.len() != self.vertices.len() {
            return Err(Error::Schema("duplicate vertex id".into()));
        }
        for e in &self.edges {
            if !vs.contains(&e.source) {
                return Err(Error::UnknownVertex(e.source));
            }
            if !vs.contains(&e.target) {
                return Err(Error::UnknownVertex(e.target));
            }
        }
        for &(_, v) in &self.legs {
            if !vs.contains(&v) {
                return Err(Error::UnknownVertex(v));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[(VertexId, u32)] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn legs(&self) -> &[(u32, VertexId)] {
        &self.legs
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn with_orientation(&self, sign: i8) -> Graph {
        let mut g = self.clone();
        g.orientation = sign;
        g
    }

    pub fn weight(&self, v: VertexId) -> u32 {
        self.vertices.iter().find(|&&(id, _)| id == v).map(|&(_, w)| w).unwrap_or(0)
    }

    pub fn edge_by_id(&self, id: EdgeId) -> Result<&Edge> {
        self.edges.iter().find(|e| e.id == id).ok_or(Error::UnknownEdge(id))
    }

    pub fn edge_pos(&self, id: EdgeId) -> Result<usize> {
        self.edges.iter().position(|e| e.id == id).ok_or(Error::UnknownEdge(id))
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.iter().any(|&(id, _)| id == v)
    }

    /// Legs attached to a vertex, by leg index.
    pub fn legs_at(&self, v: VertexId) -> Vec<u32> {
        self.legs.iter().filter(|&&(_, w)| w == v).map(|&(i, _)| i).collect()
    }

    fn vertex_index(&self) -> BTreeMap<VertexId, usize> {
        self.vertices.iter().enumerate().map(|(i, &(v, _))| (v, i)).collect()
    }

    fn components_of(&self, edge_subset: &[usize]) -> Vec<usize> {
        // union-find over vertex indices, edges given by positions
        let idx = self.vertex_index();
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &pos in edge_subset {
            let e = &self.edges[pos];
            let (a, b) = (idx[&e.source], idx[&e.target]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..self.vertices.len()).map(|i| find(&mut parent, i)).collect()
    }

    pub fn component_count(&self, edge_subset: &[usize]) -> usize {
        self.components_of(edge_subset).iter().collect::<BTreeSet<_>>().len()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let all: Vec<usize> = (0..self.edges.len()).collect();
        self.component_count(&all) == 1
    }

    /// First Betti number of the underlying topological graph.
    pub fn loop_number(&self) -> usize {
        let all: Vec<usize> = (0..self.edges.len()).collect();
        self.edges.len() + self.component_count(&all) - self.vertices.len()
    }

    /// Genus g = h + sum of vertex weights; preserved by contraction.
    pub fn genus(&self) -> usize {
        self.loop_number() + self.vertices.iter().map(|&(_, w)| w as usize).sum::<usize>()
    }

    fn check_subgraph(&self, gamma: &Subgraph) -> Result<()> {
        for &id in &gamma.edges {
            self.edge_by_id(id)?;
        }
        Ok(())
    }

    /// Contract the edges of `gamma`, one edge at a time in id order.
    /// Non-tadpole contraction merges endpoints (keeping the minimum vertex
    /// id) and sums weights; a tadpole is deleted and its vertex weight
    /// incremented. Legs follow the vertex quotient, remaining edges keep
    /// their labels, and the orientation picks up `(-1)^position` per removed
    /// edge.
    pub fn contract(&self, gamma: &Subgraph) -> Result<Graph> {
        self.check_subgraph(gamma)?;
        let mut g = self.clone();
        for &id in &gamma.edges {
            g = g.contract_one(id)?;
        }
        Ok(g)
    }

    fn contract_one(&self, id: EdgeId) -> Result<Graph> {
        let pos = self.edge_pos(id)?;
        let e = self.edges[pos].clone();
        let sign = if pos % 2 == 0 { -1 } else { 1 }; // (-1)^(pos+1), 1-based
        let mut vertices = self.vertices.clone();
        let mut edges = self.edges.clone();
        let mut legs = self.legs.clone();
        edges.remove(pos);
        if e.is_tadpole() {
            for v in vertices.iter_mut() {
                if v.0 == e.source {
                    v.1 += 1;
                }
            }
        } else {
            let keep = e.source.min(e.target);
            let drop = e.source.max(e.target);
            let wdrop = self.weight(drop);
            vertices.retain(|&(v, _)| v != drop);
            for v in vertices.iter_mut() {
                if v.0 == keep {
                    v.1 += wdrop;
                }
            }
            for f in edges.iter_mut() {
                if f.source == drop {
                    f.source = keep;
                }
                if f.target == drop {
                    f.target = keep;
                }
            }
            for l in legs.iter_mut() {
                if l.1 == drop {
                    l.1 = keep;
                }
            }
        }
        Ok(Graph::from_parts(
            vertices,
            edges,
            legs,
            self.orientation * sign,
        ))
    }

    /// Delete edges, keeping all vertices.
    pub fn delete(&self, gamma: &Subgraph) -> Result<Graph> {
        self.check_subgraph(gamma)?;
        let edges = self
            .edges
            .iter()
            .filter(|e| !gamma.edges.contains(&e.id))
            .cloned()
            .collect();
        Ok(Graph::from_parts(
            self.vertices.clone(),
            edges,
            self.legs.clone(),
            self.orientation,
        ))
    }

    /// The subgraph as a standalone graph: its edges (labels kept), the
    /// vertices they touch, and the parent's legs on those vertices.
    pub fn extract(&self, gamma: &Subgraph) -> Result<Graph> {
        self.check_subgraph(gamma)?;
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| gamma.edges.contains(&e.id))
            .cloned()
            .collect();
        let touched: BTreeSet<VertexId> = edges
            .iter()
            .flat_map(|e| [e.source, e.target])
            .collect();
        let vertices = self
            .vertices
            .iter()
            .filter(|&&(v, _)| touched.contains(&v))
            .cloned()
            .collect();
        let legs = self
            .legs
            .iter()
            .filter(|&&(_, v)| touched.contains(&v))
            .cloned()
            .collect();
        Ok(Graph::from_parts(vertices, edges, legs, 1))
    }

    /// Label-preserving equality, ignoring the orientation sign.
    pub fn same_labelled(&self, other: &Graph) -> bool {
        let mut va = self.vertices.clone();
        let mut vb = other.vertices.clone();
        va.sort();
        vb.sort();
        let mut la = self.legs.clone();
        let mut lb = other.legs.clone();
        la.sort();
        lb.sort();
        va == vb && la == lb && self.edges == other.edges
    }

    // -- spanning structures ------------------------------------------------

    fn all_edge_subsets_of_size(&self, k: usize) -> Vec<Vec<usize>> {
        let n = self.edges.len();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(n, k, i + 1, cur, out);
                cur.pop();
            }
        }
        rec(n, k, 0, &mut cur, &mut out);
        out
    }

    fn is_acyclic(&self, subset: &[usize]) -> bool {
        let roots = self.components_of(subset);
        let comps = roots.iter().collect::<BTreeSet<_>>().len();
        // forest iff |E| = |V| - #components
        subset.len() == self.vertices.len() - comps
    }

    /// All spanning trees, as sorted edge-id sets.
    pub fn spanning_trees(&self) -> Result<Vec<Vec<EdgeId>>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let k = self.vertices.len() - 1;
        let mut out = Vec::new();
        for subset in self.all_edge_subsets_of_size(k) {
            if self.is_acyclic(&subset) && self.component_count(&subset) == 1 {
                out.push(subset.iter().map(|&p| self.edges[p].id).collect());
            }
        }
        Ok(out)
    }

    /// Spanning forests matching a vertex partition: exactly `r = |P|`
    /// components, component `i` containing exactly the P-vertices of block
    /// `P_i`. Returns the empty list when blocks overlap, mirroring
    /// `forest_poly = 0` in that case.
    pub fn spanning_forests(&self, partition: &[Vec<VertexId>]) -> Result<Vec<Vec<EdgeId>>> {
        for block in partition {
            for &v in block {
                if !self.has_vertex(v) {
                    return Err(Error::UnknownVertex(v));
                }
            }
        }
        // blocks are vertex sets: repeats inside a block are harmless,
        // overlap across blocks makes the polynomial vanish
        let blocks: Vec<BTreeSet<VertexId>> = partition
            .iter()
            .map(|b| b.iter().copied().collect())
            .collect();
        let mut seen = BTreeSet::new();
        for block in &blocks {
            for &v in block {
                if !seen.insert(v) {
                    return Ok(Vec::new()); // overlapping blocks
                }
            }
        }
        let r = partition.len();
        if r == 0 || r > self.vertices.len() {
            return Ok(Vec::new());
        }
        let k = self.vertices.len() - r;
        let idx = self.vertex_index();
        let mut out = Vec::new();
        'subset: for subset in self.all_edge_subsets_of_size(k) {
            if !self.is_acyclic(&subset) {
                continue;
            }
            let roots = self.components_of(&subset);
            // each block must sit inside a single component; the block ->
            // component map must be a bijection onto all components
            let mut comp_of_block = Vec::with_capacity(r);
            for block in &blocks {
                let mut root = None;
                for &v in block {
                    let rv = roots[idx[&v]];
                    if *root.get_or_insert(rv) != rv {
                        continue 'subset;
                    }
                }
                match root {
                    Some(rv) => comp_of_block.push(rv),
                    None => continue 'subset, // empty block never matches
                }
            }
            let distinct: BTreeSet<usize> = comp_of_block.iter().copied().collect();
            let total: BTreeSet<usize> = roots.iter().copied().collect();
            if distinct.len() == r && total.len() == r {
                out.push(subset.iter().map(|&p| self.edges[p].id).collect());
            }
        }
        Ok(out)
    }

    /// Spanning 2-forests: the edge ids together with the vertex set of the
    /// component containing the first vertex.
    pub fn spanning_two_forests(&self) -> Result<Vec<(Vec<EdgeId>, Vec<VertexId>)>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if self.vertices.len() < 2 {
            return Ok(Vec::new());
        }
        let k = self.vertices.len() - 2;
        let mut out = Vec::new();
        for subset in self.all_edge_subsets_of_size(k) {
            if !self.is_acyclic(&subset) {
                continue;
            }
            let roots = self.components_of(&subset);
            let r0 = roots[0];
            let comp: Vec<VertexId> = self
                .vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| roots[i] == r0)
                .map(|(_, &(v, _))| v)
                .collect();
            out.push((subset.iter().map(|&p| self.edges[p].id).collect(), comp));
        }
        Ok(out)
    }

    // -- cycle bases ---------------------------------------------------------

    /// Greedy lowest-id spanning tree of the graph minus `exclude`.
    fn spanning_tree_avoiding(&self, exclude: &BTreeSet<EdgeId>) -> Result<Vec<usize>> {
        let idx = self.vertex_index();
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut tree = Vec::new();
        for (pos, e) in self.edges.iter().enumerate() {
            if exclude.contains(&e.id) || e.is_tadpole() {
                continue;
            }
            let (a, b) = (idx[&e.source], idx[&e.target]);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                tree.push(pos);
            }
        }
        if tree.len() == self.vertices.len() - 1 {
            Ok(tree)
        } else {
            Err(Error::MarkedEdgesDisconnect)
        }
    }

    /// Signed edge path inside a tree from vertex `from` to vertex `to`:
    /// coefficient +1 when an edge is traversed source-to-target.
    fn tree_path(&self, tree: &[usize], from: VertexId, to: VertexId) -> Vec<(usize, i64)> {
        if from == to {
            return Vec::new();
        }
        // BFS over tree edges
        let mut prev: HashMap<VertexId, (usize, i64, VertexId)> = HashMap::new();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(from);
        let mut seen = BTreeSet::new();
        seen.insert(from);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for &pos in tree {
                let e = &self.edges[pos];
                let next = if e.source == v {
                    Some((e.target, 1))
                } else if e.target == v {
                    Some((e.source, -1))
                } else {
                    None
                };
                if let Some((w, dir)) = next {
                    if seen.insert(w) {
                        prev.insert(w, (pos, dir, v));
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            let (pos, dir, back) = prev[&cur];
            path.push((pos, dir));
            cur = back;
        }
        path.reverse();
        path
    }

    /// Cycle basis adapted to `marked`: cycle `c_i` contains marked edge
    /// `e_i` with coefficient 1 and no other marked edge. Remaining cycles
    /// (when |marked| < h) come from the other non-tree edges and avoid the
    /// marked ones entirely.
    pub fn cycle_basis(&self, marked: &[EdgeId]) -> Result<Vec<Vec<i64>>> {
        let h = self.loop_number();
        if marked.len() > h {
            return Err(Error::TooManyMarked {
                given: marked.len(),
                loops: h,
            });
        }
        let mut marked_set = BTreeSet::new();
        for &id in marked {
            self.edge_by_id(id)?;
            if !marked_set.insert(id) {
                return Err(Error::Schema(format!("marked edge {id} repeated")));
            }
        }
        let tree = self.spanning_tree_avoiding(&marked_set)?;
        let mut basis = Vec::with_capacity(h);
        for &id in marked {
            basis.push(self.fundamental_cycle(&tree, self.edge_pos(id)?));
        }
        for (pos, e) in self.edges.iter().enumerate() {
            if basis.len() == h {
                break;
            }
            if marked_set.contains(&e.id) || tree.contains(&pos) {
                continue;
            }
            basis.push(self.fundamental_cycle(&tree, pos));
        }
        debug_assert_eq!(basis.len(), h);
        Ok(basis)
    }

    /// Fundamental cycle of a single non-tree edge with respect to a
    /// spanning tree given by edge positions.
    pub fn fundamental_cycle(&self, tree: &[usize], pos: usize) -> Vec<i64> {
        let e = &self.edges[pos];
        let mut c = vec![0i64; self.edges.len()];
        c[pos] += 1;
        if !e.is_tadpole() {
            for (p, dir) in self.tree_path(tree, e.target, e.source) {
                c[p] += dir;
            }
        }
        c
    }

    /// Default basis: marked edges are the complement of the lowest-id
    /// spanning tree, in id order.
    pub fn default_cycle_basis(&self) -> Result<Vec<Vec<i64>>> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let tree = self.spanning_tree_avoiding(&BTreeSet::new())?;
        let marked: Vec<EdgeId> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(pos, _)| !tree.contains(pos))
            .map(|(_, e)| e.id)
            .collect();
        self.cycle_basis(&marked)
    }

    /// Boundary of an edge vector: out-flow minus in-flow at every vertex.
    pub fn boundary<C: Scalar>(&self, mu: &[C]) -> BTreeMap<VertexId, C> {
        let mut b: BTreeMap<VertexId, C> = self.vertices.iter().map(|&(v, _)| (v, C::zero())).collect();
        for (pos, e) in self.edges.iter().enumerate() {
            let s = b.get_mut(&e.source).unwrap();
            *s = s.add(&mu[pos]);
            let t = b.get_mut(&e.target).unwrap();
            *t = t.sub(&mu[pos]);
        }
        b
    }

    // -- classification -----------------------------------------------------

    fn gamma_positions(&self, gamma: &Subgraph) -> Result<Vec<usize>> {
        gamma.edges.iter().map(|&id| self.edge_pos(id)).collect()
    }

    fn subset_is_core(&self, positions: &[usize]) -> bool {
        let h_all = self.subset_betti(positions);
        positions.iter().all(|&p| {
            let rest: Vec<usize> = positions.iter().copied().filter(|&q| q != p).collect();
            self.subset_betti(&rest) < h_all
        })
    }

    fn subset_is_mass_spanning(&self, positions: &[usize]) -> bool {
        self.edges
            .iter()
            .enumerate()
            .all(|(p, e)| e.mass_label == 0 || positions.contains(&p))
    }

    fn subset_is_momentum_spanning(
        &self,
        positions: &[usize],
        momentum_vertices: &BTreeSet<VertexId>,
    ) -> bool {
        if momentum_vertices.len() <= 1 {
            return true;
        }
        let touched: BTreeSet<VertexId> = positions
            .iter()
            .flat_map(|&p| [self.edges[p].source, self.edges[p].target])
            .collect();
        if !momentum_vertices.iter().all(|v| touched.contains(v)) {
            return false;
        }
        let roots = self.components_of(positions);
        let idx = self.vertex_index();
        let comp_roots: BTreeSet<usize> = momentum_vertices.iter().map(|v| roots[idx[v]]).collect();
        comp_roots.len() == 1
    }

    /// Classify an edge subset relative to the set of vertices carrying
    /// nonzero external momentum.
    pub fn classify_subgraph(
        &self,
        gamma: &Subgraph,
        momentum_vertices: &BTreeSet<VertexId>,
    ) -> Result<SubgraphFlags> {
        let positions = self.gamma_positions(gamma)?;
        let mass = self.subset_is_mass_spanning(&positions);
        let mom = self.subset_is_momentum_spanning(&positions, momentum_vertices);
        Ok(SubgraphFlags {
            core: self.subset_is_core(&positions),
            mass_spanning: mass,
            momentum_spanning: mom,
            mm: mass && mom,
        })
    }

    fn subset_is_mm(&self, positions: &[usize], momentum_vertices: &BTreeSet<VertexId>) -> bool {
        self.subset_is_mass_spanning(positions)
            && self.subset_is_momentum_spanning(positions, momentum_vertices)
    }

    /// Strict motic subgraphs with at least two edges: core subgraphs, plus
    /// m.m. subgraphs in which every edge either lies in a loop or is
    /// essential to the m.m. property.
    pub fn motic_subgraphs(&self, momentum_vertices: &BTreeSet<VertexId>) -> Vec<Subgraph> {
        let n = self.edges.len();
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) - 1 {
            if (mask.count_ones() as usize) < 2 {
                continue;
            }
            let positions: Vec<usize> = (0..n).filter(|&p| mask & (1 << p) != 0).collect();
            if self.subset_is_motic(&positions, momentum_vertices) {
                out.push(Subgraph::new(
                    positions.iter().map(|&p| self.edges[p].id),
                ));
            }
        }
        out
    }

    fn subset_betti(&self, sub: &[usize]) -> usize {
        let touched: BTreeSet<VertexId> = sub
            .iter()
            .flat_map(|&q| [self.edges[q].source, self.edges[q].target])
            .collect();
        let roots = self.components_of(sub);
        let idx = self.vertex_index();
        let comps = touched.iter().map(|v| roots[idx[v]]).collect::<BTreeSet<_>>().len();
        sub.len() + comps - touched.len()
    }

    pub fn subset_is_motic(
        &self,
        positions: &[usize],
        momentum_vertices: &BTreeSet<VertexId>,
    ) -> bool {
        if self.subset_is_core(positions) {
            return true;
        }
        if !self.subset_is_mm(positions, momentum_vertices) {
            return false;
        }
        // bridge-minimal: every edge lies in a loop of gamma, or deleting it
        // destroys the m.m. property
        let h_gamma = self.subset_betti(positions);
        positions.iter().all(|&p| {
            let rest: Vec<usize> = positions.iter().copied().filter(|&q| q != p).collect();
            self.subset_betti(&rest) < h_gamma || !self.subset_is_mm(&rest, momentum_vertices)
        })
    }
}

/// Lift a polynomial expressed in `sub`'s edge positions into `parent`'s
/// edge positions by matching edge ids. Panics if an id is missing.
pub fn embed_poly<C: Scalar>(sub: &Graph, parent: &Graph, p: &MPoly<C>) -> MPoly<C> {
    let map: Vec<usize> = sub
        .edges()
        .iter()
        .map(|e| parent.edge_pos(e.id).expect("edge id missing in parent"))
        .chain(std::iter::repeat(usize::MAX))
        .take(p.nvars())
        .collect();
    p.map_vars(&map, parent.num_edges())
}

/// Kirchhoff polynomial helper used across modules: product of edge
/// variables over the complement of a subset, in `g`'s positions.
pub fn complement_monomial(g: &Graph, subset: &[EdgeId]) -> MPoly<Rat> {
    let n = g.num_edges();
    let mut p = MPoly::one(n);
    for (pos, e) in g.edges().iter().enumerate() {
        if !subset.contains(&e.id) {
            p = p.mul(&MPoly::var(n, pos));
        }
    }
    p
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<VertexJson>,
    edges: Vec<Edge>,
    legs: Vec<LegJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientation: Option<Vec<EdgeId>>,
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: VertexId,
    #[serde(default)]
    weight: u32,
}

#[derive(Serialize, Deserialize)]
struct LegJson {
    index: u32,
    vertex: VertexId,
}

impl Graph {
    pub fn from_json(s: &str) -> Result<Graph> {
        let j: GraphJson = serde_json::from_str(s)?;
        let mut g = Graph::new(
            j.vertices.iter().map(|v| (v.id, v.weight)).collect(),
            j.edges,
            j.legs.iter().map(|l| (l.index, l.vertex)).collect(),
        )?;
        let mut idx: Vec<u32> = g.legs.iter().map(|&(i, _)| i).collect();
        idx.sort();
        if idx.iter().enumerate().any(|(k, &i)| i != k as u32 + 1) {
            return Err(Error::Schema("leg indices must be 1..n".into()));
        }
        if let Some(order) = j.orientation {
            let mut sorted = order.clone();
            sorted.sort();
            let expect: Vec<EdgeId> = g.edges.iter().map(|e| e.id).collect();
            if sorted != expect {
                return Err(Error::Schema(
                    "orientation must list every edge id exactly once".into(),
                ));
            }
            g.orientation = permutation_sign(&order);
        }
        Ok(g)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices.iter().map(|&(id, weight)| serde_json::json!({"id": id, "weight": weight})).collect::<Vec<_>>(),
            "edges": self.edges,
            "legs": self.legs.iter().map(|&(index, vertex)| serde_json::json!({"index": index, "vertex": vertex})).collect::<Vec<_>>(),
            "orientation_sign": self.orientation,
        })
    }
}

fn permutation_sign(order: &[EdgeId]) -> i8 {
    let mut sorted = order.to_vec();
    sorted.sort();
    let ranks: Vec<usize> = order
        .iter()
        .map(|id| sorted.iter().position(|x| x == id).unwrap())
        .collect();
    let mut inversions = 0usize;
    for i in 0..ranks.len() {
        for j in i + 1..ranks.len() {
            if ranks[i] > ranks[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    #[test]
    fn loop_numbers() {
        assert_eq!(library::bubble().loop_number(), 1);
        assert_eq!(library::box_graph().loop_number(), 1);
        assert_eq!(library::wheel3().loop_number(), 3);
    }

    #[test]
    fn contract_box_edge() {
        let b = library::box_graph();
        let c = b.contract(&Subgraph::new([1])).unwrap();
        assert_eq!(c.num_vertices(), 3);
        assert_eq!(c.edges().iter().map(|e| e.id).collect::<Vec<_>>(), vec![2, 3, 4]);
        // legs q4, q1 end up on the merged vertex
        let merged = c.vertices().iter().map(|&(v, _)| v).min().unwrap();
        let mut at = c.legs_at(merged);
        at.sort();
        assert_eq!(at, vec![1, 4]);
        assert_eq!(c.genus(), b.genus());
    }

    #[test]
    fn contract_tadpole_increments_weight() {
        let g = Graph::new(
            vec![(1, 0)],
            vec![Edge { id: 1, source: 1, target: 1, mass_label: 0 }],
            vec![],
        )
        .unwrap();
        let c = g.contract(&Subgraph::new([1])).unwrap();
        assert_eq!(c.num_edges(), 0);
        assert_eq!(c.weight(1), 1);
        assert_eq!(c.genus(), g.genus());
    }

    #[test]
    fn contract_whole_box_step_by_step() {
        // oracle: apply the two contraction rules by hand. Contracting
        // e1,e2,e3 merges everything into one vertex; e4 is then a tadpole,
        // so the final graph has h=0 and weight 1: genus stays 1.
        let b = library::box_graph();
        let c = b.contract(&Subgraph::new([1, 2, 3, 4])).unwrap();
        assert_eq!(c.num_vertices(), 1);
        assert_eq!(c.num_edges(), 0);
        assert_eq!(c.loop_number(), 0);
        assert_eq!(c.genus(), 1);
        assert_eq!(c.legs().len(), 4);
    }

    #[test]
    fn contraction_preserves_genus_all_subsets() {
        for g in [library::bubble(), library::box_graph(), library::dunce()] {
            let n = g.num_edges();
            for mask in 0u32..(1 << n) {
                let ids: Vec<EdgeId> =
                    (0..n).filter(|&p| mask & (1 << p) != 0).map(|p| g.edges()[p].id).collect();
                let c = g.contract(&Subgraph::new(ids)).unwrap();
                assert_eq!(c.genus(), g.genus());
            }
        }
    }

    #[test]
    fn contraction_order_independent() {
        let g = library::dunce();
        let a = g.contract(&Subgraph::new([1, 3])).unwrap();
        let b = g
            .contract(&Subgraph::new([3]))
            .unwrap()
            .contract(&Subgraph::new([1]))
            .unwrap();
        assert!(a.same_labelled(&b));
    }

    #[test]
    fn spanning_trees_bubble_box_dunce() {
        let b = library::bubble();
        let mut trees = b.spanning_trees().unwrap();
        trees.sort();
        assert_eq!(trees, vec![vec![1], vec![2]]);

        let trees = library::box_graph().spanning_trees().unwrap();
        assert_eq!(trees.len(), 4);
        assert!(trees.iter().all(|t| t.len() == 3));

        // dunce's cap: 5 trees with complements {13,14,23,24,34}
        let d = library::dunce();
        let mut comps: Vec<Vec<EdgeId>> = d
            .spanning_trees()
            .unwrap()
            .iter()
            .map(|t| (1..=4).filter(|id| !t.contains(id)).collect())
            .collect();
        comps.sort();
        assert_eq!(
            comps,
            vec![vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]
        );
    }

    #[test]
    fn spanning_forests_examples() {
        let b = library::bubble();
        let f = b.spanning_forests(&[vec![1], vec![2]]).unwrap();
        assert_eq!(f, vec![Vec::<EdgeId>::new()]);

        // box, opposite corners cannot be separated
        let f = library::box_graph()
            .spanning_forests(&[vec![1, 3], vec![2, 4]])
            .unwrap();
        assert!(f.is_empty());

        // dunce's cap, P = {s3,s4},{t3,t4} = {2},{3}: matches brute force
        let d = library::dunce();
        let mut f = d.spanning_forests(&[vec![2], vec![3]]).unwrap();
        f.sort();
        assert_eq!(f, vec![vec![1], vec![2]]);

        // overlapping blocks give the empty list
        assert!(d.spanning_forests(&[vec![1, 2], vec![2]]).unwrap().is_empty());
        assert!(matches!(
            d.spanning_forests(&[vec![99]]),
            Err(Error::UnknownVertex(99))
        ));
    }

    #[test]
    fn cycle_basis_paper_choices() {
        let b = library::bubble();
        assert_eq!(b.cycle_basis(&[1]).unwrap(), vec![vec![1, 1]]);

        let banana = library::banana(4);
        let basis = banana.cycle_basis(&[1, 2, 3]).unwrap();
        assert_eq!(basis, vec![
            vec![1, 0, 0, 1],
            vec![0, 1, 0, 1],
            vec![0, 0, 1, 1],
        ]);

        let d = library::dunce();
        let basis = d.cycle_basis(&[1, 4]).unwrap();
        assert_eq!(basis, vec![vec![1, 1, 1, 0], vec![0, 0, -1, 1]]);
    }

    #[test]
    fn cycle_basis_errors_and_rank() {
        let d = library::dunce();
        assert!(matches!(
            d.cycle_basis(&[1, 2, 3]).err(),
            Some(Error::MarkedEdgesDisconnect) | Some(Error::TooManyMarked { .. })
        ));
        // default basis has full rank h and zero boundary
        let basis = d.default_cycle_basis().unwrap();
        assert_eq!(basis.len(), d.loop_number());
        for c in &basis {
            let mu: Vec<Rat> = c.iter().map(|&x| Rat::from_int(x)).collect();
            assert!(d.boundary(&mu).values().all(|b| b.is_zero()));
        }
        assert_eq!(rank_over_q(&basis), d.loop_number());
    }

    fn rank_over_q(rows: &[Vec<i64>]) -> usize {
        let mut m: Vec<Vec<Rat>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rat::from_int(x)).collect())
            .collect();
        let (nr, nc) = (m.len(), m.first().map(|r| r.len()).unwrap_or(0));
        let mut rank = 0;
        for c in 0..nc {
            if rank == nr {
                break;
            }
            if let Some(p) = (rank..nr).find(|&r| !m[r][c].is_zero()) {
                m.swap(rank, p);
                let inv = m[rank][c].inv();
                for r in 0..nr {
                    if r != rank && !m[r][c].is_zero() {
                        let f = m[r][c] * inv;
                        for cc in 0..nc {
                            let s = m[rank][cc] * f;
                            m[r][cc] = m[r][cc] - s;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn classify_dunce_and_trivial() {
        let d = library::dunce();
        let momentum: BTreeSet<VertexId> = d.legs().iter().map(|&(_, v)| v).collect();
        let f = d.classify_subgraph(&Subgraph::new([3, 4]), &momentum).unwrap();
        assert!(f.core);
        assert!(!f.mm);

        let all = Subgraph::new(d.edges().iter().map(|e| e.id));
        let f = d.classify_subgraph(&all, &momentum).unwrap();
        assert!(f.mm);
    }

    #[test]
    fn classify_bubble_massless_edge() {
        // bubble with m2 = 0: gamma = {e1} is mass and momentum spanning
        let mut g = library::bubble();
        {
            let e = &mut g.edges[1];
            e.mass_label = 0;
        }
        let momentum: BTreeSet<VertexId> = g.legs().iter().map(|&(_, v)| v).collect();
        let f = g.classify_subgraph(&Subgraph::new([1]), &momentum).unwrap();
        assert!(f.mass_spanning && f.momentum_spanning && f.mm);
    }

    #[test]
    fn motic_lists() {
        let pent = library::pentagon();
        let momentum: BTreeSet<VertexId> = pent.legs().iter().map(|&(_, v)| v).collect();
        assert!(pent.motic_subgraphs(&momentum).is_empty());

        let b = library::bubble();
        let momentum: BTreeSet<VertexId> = b.legs().iter().map(|&(_, v)| v).collect();
        assert!(b.motic_subgraphs(&momentum).is_empty());

        let d = library::dunce();
        let momentum: BTreeSet<VertexId> = d.legs().iter().map(|&(_, v)| v).collect();
        let motic = d.motic_subgraphs(&momentum);
        assert!(motic.contains(&Subgraph::new([3, 4])));
        // idempotent re-filtering changes nothing
        for m in &motic {
            let positions: Vec<usize> =
                m.edges.iter().map(|&id| d.edge_pos(id).unwrap()).collect();
            assert!(d.subset_is_motic(&positions, &momentum));
        }
    }

    #[test]
    fn json_round_trip_and_orientation() {
        let s = r#"{
            "vertices": [{"id":1,"weight":0},{"id":2,"weight":0}],
            "edges": [{"id":1,"source":1,"target":2,"mass_label":1},
                      {"id":2,"source":2,"target":1,"mass_label":2}],
            "legs": [{"index":1,"vertex":1},{"index":2,"vertex":2}],
            "orientation": [2,1]
        }"#;
        let g = Graph::from_json(s).unwrap();
        assert_eq!(g.orientation(), -1);
        assert_eq!(g.num_edges(), 2);
        let bad = r#"{"vertices":[{"id":1}],"edges":[{"id":3,"source":1,"target":1}],"legs":[]}"#;
        assert!(Graph::from_json(bad).is_err());
    }
}
