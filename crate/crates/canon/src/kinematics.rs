//! Exact external kinematics: momenta as Gaussian rationals (d=2) or
//! rational quaternions (d=4), mass-label squares, genericity, and
//! deterministic momentum routing.

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::poly::{chi_matrix, PolyMatrix};
use crate::rat::Rat;
use crate::scalar::{GaussRat, Quat, Scalar};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Scalars that can host external momenta.
pub trait KinScalar: Scalar {
    fn from_components(c: &[Rat; 4]) -> Self;
}

impl KinScalar for GaussRat {
    fn from_components(c: &[Rat; 4]) -> Self {
        debug_assert!(c[2].is_zero() && c[3].is_zero());
        GaussRat::new(c[0], c[1])
    }
}

impl KinScalar for Quat {
    fn from_components(c: &[Rat; 4]) -> Self {
        Quat::new(c[0], c[1], c[2], c[3])
    }
}

#[derive(Clone, Debug)]
pub struct Kinematics {
    pub dim: u8,
    momenta: BTreeMap<u32, [Rat; 4]>,
    mass_sq: BTreeMap<u32, Rat>,
}

impl Kinematics {
    pub fn new(dim: u8, momenta: Vec<(u32, [Rat; 4])>, mass_sq: Vec<(u32, Rat)>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::BadDimension(dim));
        }
        let mut mm = BTreeMap::new();
        for (leg, c) in momenta {
            if dim == 2 && (!c[2].is_zero() || !c[3].is_zero()) {
                return Err(Error::Schema(format!("leg {leg}: dim 2 momenta have 2 components")));
            }
            if mm.insert(leg, c).is_some() {
                return Err(Error::Schema(format!("leg {leg} repeated")));
            }
        }
        let mut ms = BTreeMap::new();
        ms.insert(0, Rat::ZERO);
        for (label, m2) in mass_sq {
            if label == 0 {
                if !m2.is_zero() {
                    return Err(Error::MassNotPositive(0));
                }
                continue;
            }
            if m2.is_zero() || m2.is_negative() {
                return Err(Error::MassNotPositive(label));
            }
            ms.insert(label, m2);
        }
        let kin = Kinematics {
            dim,
            momenta: mm,
            mass_sq: ms,
        };
        if !kin.conservation_ok() {
            return Err(Error::ConservationViolated);
        }
        Ok(kin)
    }

    pub fn conservation_ok(&self) -> bool {
        let mut sum = [Rat::ZERO; 4];
        for c in self.momenta.values() {
            for k in 0..4 {
                sum[k] += c[k];
            }
        }
        sum.iter().all(|r| r.is_zero())
    }

    pub fn momentum<C: KinScalar>(&self, leg: u32) -> Result<C> {
        self.momenta
            .get(&leg)
            .map(|c| C::from_components(c))
            .ok_or(Error::UnknownLeg(leg))
    }

    pub fn legs(&self) -> impl Iterator<Item = u32> + '_ {
        self.momenta.keys().copied()
    }

    pub fn mass_sq(&self, label: u32) -> Result<Rat> {
        self.mass_sq
            .get(&label)
            .copied()
            .ok_or_else(|| Error::Schema(format!("mass label {label} not defined")))
    }

    /// Total incoming external momentum at a vertex.
    pub fn q_vertex<C: KinScalar>(&self, g: &Graph, v: VertexId) -> Result<C> {
        let mut q = C::zero();
        for idx in g.legs_at(v) {
            q = q.add(&self.momentum::<C>(idx)?);
        }
        Ok(q)
    }

    /// Vertices with nonzero incoming momentum.
    pub fn momentum_vertices(&self, g: &Graph) -> Result<BTreeSet<VertexId>> {
        let mut out = BTreeSet::new();
        for &(v, _) in g.vertices() {
            let q: Quat = self.q_vertex(g, v)?;
            if !q.is_zero() {
                out.insert(v);
            }
        }
        Ok(out)
    }

    pub fn with_mass_sq(&self, label: u32, m2: Rat) -> Kinematics {
        let mut k = self.clone();
        if label == 0 {
            return k;
        }
        k.mass_sq.insert(label, m2);
        k
    }

    pub fn with_swapped_masses(&self, a: u32, b: u32) -> Kinematics {
        let mut k = self.clone();
        let ma = k.mass_sq[&a];
        let mb = k.mass_sq[&b];
        k.mass_sq.insert(a, mb);
        k.mass_sq.insert(b, ma);
        k
    }
}

/// Genericity: no nonempty strict subset of the graph's legs has a null
/// total momentum (exact Euclidean norm test).
pub fn check_genericity(g: &Graph, kin: &Kinematics) -> Result<bool> {
    Ok(offending_subset(g, kin)?.is_none())
}

fn offending_subset(g: &Graph, kin: &Kinematics) -> Result<Option<Vec<u32>>> {
    let legs: Vec<u32> = g.legs().iter().map(|&(i, _)| i).collect();
    let n = legs.len();
    for mask in 1u32..((1u32 << n) - 1).max(1) {
        if n == 0 {
            break;
        }
        let mut total = Quat::zero();
        let mut subset = Vec::new();
        for (k, &leg) in legs.iter().enumerate() {
            if mask & (1 << k) != 0 {
                total = total.add(&kin.momentum::<Quat>(leg)?);
                subset.push(leg);
            }
        }
        if total.norm_sq().is_zero() {
            return Ok(Some(subset));
        }
    }
    Ok(None)
}

pub fn ensure_generic(g: &Graph, kin: &Kinematics) -> Result<()> {
    match offending_subset(g, kin)? {
        Some(s) => Err(Error::NonGeneric(s)),
        None => Ok(()),
    }
}

/// Momentum routing: one scalar per edge (indexed by edge position).
#[derive(Clone, Debug)]
pub struct Routing<C: Scalar> {
    pub mu: Vec<C>,
}

impl<C: KinScalar> Routing<C> {
    pub fn by_id(&self, g: &Graph, id: u32) -> Result<C> {
        Ok(self.mu[g.edge_pos(id)?].clone())
    }

    /// Conservation at every vertex: out-flow minus in-flow equals the
    /// incoming external momentum.
    pub fn is_valid(&self, g: &Graph, kin: &Kinematics) -> Result<bool> {
        let b = g.boundary(&self.mu);
        for (&v, flow) in &b {
            let q: C = kin.q_vertex(g, v)?;
            if *flow != q {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn validate(&self, g: &Graph, kin: &Kinematics) -> Result<()> {
        let b = g.boundary(&self.mu);
        for (&v, flow) in &b {
            let q: C = kin.q_vertex(g, v)?;
            if *flow != q {
                return Err(Error::InvalidRouting(v));
            }
        }
        Ok(())
    }

    /// Shift by an element of the cycle space: `mu + sum_k coeff_k * c_k`.
    pub fn shift(&self, basis: &[Vec<i64>], coeffs: &[C]) -> Routing<C> {
        let mut mu = self.mu.clone();
        for (c, coef) in basis.iter().zip(coeffs) {
            for (e, &p) in c.iter().enumerate() {
                if p != 0 {
                    let t = coef.mul(&C::from_rat(Rat::from_int(p)));
                    mu[e] = mu[e].add(&t);
                }
            }
        }
        Routing { mu }
    }
}

/// Deterministic tree routing: off-tree edges and tadpoles carry 0; the
/// spanning tree is the lowest-edge-id one; tree momenta are solved by leaf
/// elimination and verified against conservation.
pub fn route<C: KinScalar>(g: &Graph, kin: &Kinematics) -> Result<Routing<C>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    // lowest-id spanning tree
    let mut parent_uf: Vec<usize> = (0..g.num_vertices()).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let vidx: BTreeMap<VertexId, usize> =
        g.vertices().iter().enumerate().map(|(i, &(v, _))| (v, i)).collect();
    let mut tree: Vec<usize> = Vec::new();
    for (pos, e) in g.edges().iter().enumerate() {
        if e.is_tadpole() {
            continue;
        }
        let (a, b) = (vidx[&e.source], vidx[&e.target]);
        let (ra, rb) = (find(&mut parent_uf, a), find(&mut parent_uf, b));
        if ra != rb {
            parent_uf[ra] = rb;
            tree.push(pos);
        }
    }
    let mut mu = vec![C::zero(); g.num_edges()];
    let mut unresolved: BTreeSet<usize> = tree.iter().copied().collect();
    // residual q_v minus flow of resolved edges
    let mut residual: BTreeMap<VertexId, C> = BTreeMap::new();
    for &(v, _) in g.vertices() {
        residual.insert(v, kin.q_vertex(g, v)?);
    }
    while !unresolved.is_empty() {
        // a vertex with exactly one unresolved incident tree edge
        let mut leaf: Option<(VertexId, usize)> = None;
        'outer: for &(v, _) in g.vertices() {
            let mut incident = unresolved
                .iter()
                .filter(|&&p| g.edges()[p].source == v || g.edges()[p].target == v);
            if let Some(&p) = incident.next() {
                if incident.next().is_none() {
                    leaf = Some((v, p));
                    break 'outer;
                }
            }
        }
        let (v, p) = leaf.expect("tree always has a leaf");
        let e = &g.edges()[p];
        // out - in = q_v  =>  sign * mu_e = residual_v
        let r = residual[&v].clone();
        let value = if e.source == v { r.clone() } else { r.neg() };
        mu[p] = value;
        // update both endpoints' residuals
        let s = residual.get_mut(&e.source).unwrap();
        *s = s.sub(&mu[p]);
        let t = residual.get_mut(&e.target).unwrap();
        *t = t.add(&mu[p]);
        unresolved.remove(&p);
    }
    if residual.values().any(|r| !r.is_zero()) {
        return Err(Error::ConservationViolated);
    }
    let routing = Routing { mu };
    routing.validate(g, kin)?;
    Ok(routing)
}

/// Routing supported on a subgraph (edge-position set); exists when the
/// subgraph is momentum spanning. Used by the m.m. rescaling case.
pub fn route_within<C: KinScalar>(
    g: &Graph,
    kin: &Kinematics,
    positions: &[usize],
) -> Result<Routing<C>> {
    let mv = kin.momentum_vertices(g)?;
    let mut mu = vec![C::zero(); g.num_edges()];
    if !mv.is_empty() {
        let sub = g.extract(&crate::graph::Subgraph::new(
            positions.iter().map(|&p| g.edges()[p].id),
        ))?;
        // route the component holding the momentum vertices; the rest carry 0
        let comp_ids = component_containing(&sub, &mv)?;
        let comp = sub.extract(&crate::graph::Subgraph::new(comp_ids))?;
        let r = route::<C>(&comp, kin)?;
        for (pos, e) in comp.edges().iter().enumerate() {
            mu[g.edge_pos(e.id)?] = r.mu[pos].clone();
        }
    }
    let routing = Routing { mu };
    routing.validate(g, kin)?;
    Ok(routing)
}

fn component_containing(sub: &Graph, mv: &BTreeSet<VertexId>) -> Result<Vec<u32>> {
    // edge ids of the connected component of `sub` containing all of `mv`
    for start in sub.vertices().iter().map(|&(v, _)| v) {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        let mut ids = Vec::new();
        while let Some(v) = stack.pop() {
            for e in sub.edges() {
                if e.source == v || e.target == v {
                    if !ids.contains(&e.id) {
                        ids.push(e.id);
                    }
                    for w in [e.source, e.target] {
                        if seen.insert(w) {
                            stack.push(w);
                        }
                    }
                }
            }
        }
        if mv.iter().all(|v| seen.contains(v)) {
            ids.sort();
            return Ok(ids);
        }
    }
    Err(Error::NotMassMomentumSpanning)
}

/// Draw random generic rational kinematics for a graph: small integer
/// momentum components with conservation, retried until generic, and
/// positive integer mass squares for every label the graph uses.
pub fn random_generic_kin(g: &Graph, dim: u8, seed: u64) -> Kinematics {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    let legs: Vec<u32> = g.legs().iter().map(|&(i, _)| i).collect();
    let labels: BTreeSet<u32> = g.edges().iter().map(|e| e.mass_label).collect();
    let masses: Vec<(u32, Rat)> = labels
        .iter()
        .filter(|&&l| l != 0)
        .map(|&l| (l, Rat::from_int(rng.gen_range(1..=9))))
        .collect();
    loop {
        let mut momenta: Vec<(u32, [Rat; 4])> = Vec::new();
        let mut total = [Rat::ZERO; 4];
        for (i, &leg) in legs.iter().enumerate() {
            let mut c = [Rat::ZERO; 4];
            if i + 1 == legs.len() {
                for k in 0..4 {
                    c[k] = -total[k];
                }
            } else {
                for (k, v) in c.iter_mut().enumerate().take(dim as usize) {
                    *v = Rat::from_int(rng.gen_range(-6..=6));
                    total[k] += *v;
                }
            }
            momenta.push((leg, c));
        }
        let kin = match Kinematics::new(dim, momenta, masses.clone()) {
            Ok(k) => k,
            Err(_) => continue,
        };
        if check_genericity(g, &kin).unwrap_or(false) {
            return kin;
        }
    }
}

/// Complex adjoint of a quaternionic scalar matrix (doubled size).
pub fn chi_scalar(m: &[Vec<Quat>]) -> Vec<Vec<GaussRat>> {
    let nv = 0;
    let pm = PolyMatrix::from_scalars(nv, m);
    let cm = chi_matrix(&pm);
    (0..cm.rows())
        .map(|i| (0..cm.cols()).map(|j| cm.get(i, j).constant_value()).collect())
        .collect()
}

/// Exact determinant of a scalar Gaussian-rational matrix.
pub fn det_scalar(m: &[Vec<GaussRat>]) -> GaussRat {
    let pm = PolyMatrix::from_scalars(0, m);
    pm.det().expect("square").constant_value()
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct KinJson {
    dim: u8,
    momenta: Vec<MomJson>,
    masses: Vec<MassJson>,
}

#[derive(Serialize, Deserialize)]
struct MomJson {
    leg: u32,
    components: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MassJson {
    label: u32,
    m2: String,
}

impl Kinematics {
    pub fn from_json(s: &str) -> Result<Kinematics> {
        let j: KinJson = serde_json::from_str(s)?;
        let mut momenta = Vec::new();
        for m in &j.momenta {
            if m.components.len() != j.dim as usize {
                return Err(Error::Schema(format!(
                    "leg {}: expected {} components",
                    m.leg, j.dim
                )));
            }
            let mut c = [Rat::ZERO; 4];
            for (k, s) in m.components.iter().enumerate() {
                c[k] = s.parse().map_err(Error::Schema)?;
            }
            momenta.push((m.leg, c));
        }
        let mut masses = Vec::new();
        for m in &j.masses {
            masses.push((m.label, m.m2.parse().map_err(Error::Schema)?));
        }
        Kinematics::new(j.dim, momenta, masses)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "momenta": self.momenta.iter().map(|(leg, c)| serde_json::json!({
                "leg": leg,
                "components": c.iter().take(self.dim as usize).map(|r| r.to_string()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "masses": self.mass_sq.iter().filter(|&(&l, _)| l != 0).map(|(label, m2)| serde_json::json!({
                "label": label, "m2": m2.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Subgraph;
    use crate::library;
    use crate::scalar::inner;

    #[test]
    fn genericity_examples() {
        let g = library::bubble();
        let kin = library::bubble_kin();
        assert!(check_genericity(&g, &kin).unwrap());

        // a zero leg fails on the singleton subset
        let zero = Kinematics::new(
            2,
            vec![(1, [Rat::ZERO; 4]), (2, [Rat::ZERO; 4])],
            vec![(1, Rat::ONE), (2, Rat::ONE)],
        )
        .unwrap();
        assert!(!check_genericity(&g, &zero).unwrap());

        // four legs with q1 = -q2
        let b = library::box_graph();
        let k = Kinematics::new(
            2,
            vec![
                (1, [Rat::from_int(1), Rat::ZERO, Rat::ZERO, Rat::ZERO]),
                (2, [Rat::from_int(-1), Rat::ZERO, Rat::ZERO, Rat::ZERO]),
                (3, [Rat::from_int(2), Rat::ONE, Rat::ZERO, Rat::ZERO]),
                (4, [Rat::from_int(-2), -Rat::ONE, Rat::ZERO, Rat::ZERO]),
            ],
            (1..=4).map(|l| (l, Rat::from_int(l as i64))).collect(),
        )
        .unwrap();
        assert!(!check_genericity(&b, &k).unwrap());
        assert!(matches!(ensure_generic(&b, &k), Err(Error::NonGeneric(_))));
    }

    #[test]
    fn routing_bubble_and_box() {
        let g = library::bubble();
        let kin = library::bubble_kin();
        let r: Routing<GaussRat> = route(&g, &kin).unwrap();
        let q1: GaussRat = kin.momentum(1).unwrap();
        // q1 = mu2 - mu1, with the off-tree edge e2 carrying zero
        let diff = r.by_id(&g, 2).unwrap().sub(&r.by_id(&g, 1).unwrap());
        assert_eq!(diff, q1);
        assert!(r.by_id(&g, 2).unwrap().is_zero());
        assert!(r.is_valid(&g, &kin).unwrap());

        let b = library::box_graph();
        let kb = library::box_kin();
        let r: Routing<GaussRat> = route(&b, &kb).unwrap();
        assert!(r.is_valid(&b, &kb).unwrap());
        // mu_{i+1} - mu_i = q_i around the cycle
        for i in 1..=4u32 {
            let nxt = if i == 4 { 1 } else { i + 1 };
            let qi: GaussRat = kb.momentum(i).unwrap();
            let lhs = r.by_id(&b, nxt).unwrap().sub(&r.by_id(&b, i).unwrap());
            assert_eq!(lhs, qi);
        }
    }

    #[test]
    fn routing_tadpole_is_zero() {
        let g = crate::graph::Graph::new(
            vec![(1, 0), (2, 0)],
            vec![
                crate::graph::Edge { id: 1, source: 1, target: 2, mass_label: 1 },
                crate::graph::Edge { id: 2, source: 2, target: 2, mass_label: 0 },
            ],
            vec![(1, 1), (2, 2)],
        )
        .unwrap();
        let kin = library::bubble_kin();
        let r: Routing<GaussRat> = route(&g, &kin).unwrap();
        assert!(r.by_id(&g, 2).unwrap().is_zero());
        assert!(r.is_valid(&g, &kin).unwrap());
    }

    #[test]
    fn routing_difference_lies_in_cycle_space() {
        let g = library::dunce();
        let kin = library::dunce_kin();
        let r: Routing<GaussRat> = route(&g, &kin).unwrap();
        let basis = g.default_cycle_basis().unwrap();
        let shifted = r.shift(&basis, &[GaussRat::from_ints(2, 1), GaussRat::from_ints(-1, 3)]);
        assert!(shifted.is_valid(&g, &kin).unwrap());
        // difference has zero boundary at every vertex
        let diff: Vec<GaussRat> = r
            .mu
            .iter()
            .zip(&shifted.mu)
            .map(|(a, b)| a.sub(b))
            .collect();
        assert!(g.boundary(&diff).values().all(|x| x.is_zero()));
    }

    #[test]
    fn chi_is_ring_homomorphism_on_random_quaternions() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        let rnd = |rng: &mut StdRng| {
            Quat::from_ints(
                rng.gen_range(-5..=5),
                rng.gen_range(-5..=5),
                rng.gen_range(-5..=5),
                rng.gen_range(-5..=5),
            )
        };
        for _ in 0..50 {
            let x = rnd(&mut rng);
            let y = rnd(&mut rng);
            let cx = chi_scalar(&[vec![x]]);
            let cy = chi_scalar(&[vec![y]]);
            let cxy = chi_scalar(&[vec![x.mul(&y)]]);
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = GaussRat::zero();
                    for k in 0..2 {
                        acc = acc.add(&cx[i][k].mul(&cy[k][j]));
                    }
                    assert_eq!(acc, cxy[i][j]);
                }
            }
        }
    }

    #[test]
    fn chi_hermitian_and_det_square() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        for n in 1..=3usize {
            for _ in 0..10 {
                // random Hermitian quaternionic matrix
                let mut m = vec![vec![Quat::zero(); n]; n];
                for i in 0..n {
                    m[i][i] = Quat::from(Rat::from_int(rng.gen_range(-6i64..=6)));
                    for j in i + 1..n {
                        let q = Quat::from_ints(
                            rng.gen_range(-4..=4),
                            rng.gen_range(-4..=4),
                            rng.gen_range(-4..=4),
                            rng.gen_range(-4..=4),
                        );
                        m[i][j] = q;
                        m[j][i] = q.conj();
                    }
                }
                let c = chi_scalar(&m);
                // chi preserves Hermitian conjugation
                for i in 0..2 * n {
                    for j in 0..2 * n {
                        assert_eq!(c[i][j], c[j][i].conj());
                    }
                }
                // Det is the square of a rational
                let d = det_scalar(&c);
                assert!(d.is_real());
                assert!(d.re.sqrt_exact().is_some(), "det {} not a square", d.re);
            }
        }
    }

    #[test]
    fn det_chi_of_hermitian_complex_matrix_is_det_squared() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..10 {
            let n = 3;
            let mut m = vec![vec![Quat::zero(); n]; n];
            let mut mg = vec![vec![GaussRat::zero(); n]; n];
            for i in 0..n {
                let d = Rat::from_int(rng.gen_range(-6i64..=6));
                m[i][i] = Quat::from(d);
                mg[i][i] = GaussRat::from(d);
                for j in i + 1..n {
                    let c = GaussRat::from_ints(rng.gen_range(-4..=4), rng.gen_range(-4..=4));
                    m[i][j] = Quat::from(c);
                    m[j][i] = Quat::from(c.conj());
                    mg[i][j] = c;
                    mg[j][i] = c.conj();
                }
            }
            let lhs = det_scalar(&chi_scalar(&m));
            let d = det_scalar(&mg);
            assert_eq!(lhs, d.mul(&d));
        }
    }

    #[test]
    fn inner_products_match_euclidean() {
        let a = GaussRat::from_ints(1, 2);
        let b = GaussRat::from_ints(3, -1);
        // 2 q1.q2 = q1 conj(q2) + conj(q1) q2
        assert_eq!(inner(&a, &b), Rat::from_int(1 * 3 + 2 * -1));
        let qa = Quat::from_ints(1, 2, 0, 3);
        let qb = Quat::from_ints(2, -1, 1, 1);
        assert_eq!(inner(&qa, &qb), Rat::from_int(2 - 2 + 0 + 3));
    }

    #[test]
    fn contraction_keeps_routing_meaningful() {
        // after contracting an edge the same kinematics still routes
        let b = library::box_graph();
        let kb = library::box_kin();
        let c = b.contract(&Subgraph::new([2])).unwrap();
        let r: Routing<GaussRat> = route(&c, &kb).unwrap();
        assert!(r.is_valid(&c, &kb).unwrap());
    }
}
