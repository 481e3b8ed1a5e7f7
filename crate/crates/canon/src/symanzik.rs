//! Graph polynomials: first and second Symanzik, the mass-corrected second
//! Symanzik, spanning-forest polynomials, and the spanning-forest expansion
//! of the second Symanzik used as an independent cross-check.

use crate::error::{Error, Result};
use crate::graph::{complement_monomial, Graph, Subgraph, VertexId};
use crate::kinematics::{KinScalar, Kinematics, Routing};
use crate::poly::MPoly;
use crate::rat::Rat;
use crate::scalar::inner;

/// First Symanzik polynomial: sum over spanning trees of the product of
/// edge variables not in the tree. Homogeneous of degree h_G.
pub fn psi(g: &Graph) -> Result<MPoly<Rat>> {
    let mut p = MPoly::zero(g.num_edges());
    for tree in g.spanning_trees()? {
        p = p.add(&complement_monomial(g, &tree));
    }
    Ok(p)
}

/// Second Symanzik polynomial: minus the momentum-weighted sum over
/// spanning 2-forests. Homogeneous of degree h_G + 1; coefficients are
/// exact rationals (Euclidean inner products).
pub fn phi(g: &Graph, kin: &Kinematics) -> Result<MPoly<Rat>> {
    match kin.dim {
        2 => phi_typed::<crate::scalar::GaussRat>(g, kin),
        4 => phi_typed::<crate::scalar::Quat>(g, kin),
        d => Err(Error::BadDimension(d)),
    }
}

fn phi_typed<C: KinScalar>(g: &Graph, kin: &Kinematics) -> Result<MPoly<Rat>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut p = MPoly::zero(g.num_edges());
    for (edge_ids, comp) in g.spanning_two_forests()? {
        // -(q^{T1} . q^{T2}) = +(q^{T1} . q^{T1}) by momentum conservation
        let mut q1 = C::zero();
        for &v in &comp {
            q1 = q1.add(&kin.q_vertex(g, v)?);
        }
        let w = inner(&q1, &q1);
        if !w.is_zero() {
            p = p.add(&complement_monomial(g, &edge_ids).mul_scalar(&w));
        }
    }
    Ok(p)
}

/// Mass-corrected second Symanzik: `phi + (sum a_e m_e^2) psi`.
pub fn xi(g: &Graph, kin: &Kinematics) -> Result<MPoly<Rat>> {
    let n = g.num_edges();
    let mut mass = MPoly::zero(n);
    for (pos, e) in g.edges().iter().enumerate() {
        let m2 = kin.mass_sq(e.mass_label)?;
        if !m2.is_zero() {
            let mut t = MPoly::var(n, pos);
            t = t.mul_scalar(&m2);
            mass = mass.add(&t);
        }
    }
    Ok(phi(g, kin)?.add(&mass.mul(&psi(g)?)))
}

/// Spanning-forest polynomial for a vertex partition.
pub fn forest_poly(g: &Graph, partition: &[Vec<VertexId>]) -> Result<MPoly<Rat>> {
    let mut p = MPoly::zero(g.num_edges());
    for forest in g.spanning_forests(partition)? {
        p = p.add(&complement_monomial(g, &forest));
    }
    Ok(p)
}

/// The spanning-forest expansion of the second Symanzik for a given
/// routing: diagonal terms `mu_e.mu_e a_e psi(G//e)` plus off-diagonal
/// forest-polynomial differences. Tadpole edges contribute nothing.
pub fn phi_from_forests<C: KinScalar>(
    g: &Graph,
    kin: &Kinematics,
    routing: &Routing<C>,
) -> Result<MPoly<Rat>> {
    routing.validate(g, kin)?;
    let n = g.num_edges();
    let mut p = MPoly::zero(n);
    for (pos, e) in g.edges().iter().enumerate() {
        if e.is_tadpole() {
            continue; // psi(G//e) vanishes for a self-edge
        }
        let c = inner(&routing.mu[pos], &routing.mu[pos]);
        if c.is_zero() {
            continue;
        }
        let contracted = g.contract(&Subgraph::new([e.id]))?;
        let psi_c = crate::graph::embed_poly(&contracted, g, &psi(&contracted)?);
        let term = MPoly::var(n, pos).mul(&psi_c).mul_scalar(&c);
        p = p.add(&term);
    }
    for (pa, ea) in g.edges().iter().enumerate() {
        for (pb, eb) in g.edges().iter().enumerate() {
            if pa == pb || ea.is_tadpole() || eb.is_tadpole() {
                continue;
            }
            let c = inner(&routing.mu[pa], &routing.mu[pb]);
            if c.is_zero() {
                continue;
            }
            // every admissible forest avoids both edges, so its complement
            // monomial already carries a_e a_f
            let plus = forest_poly(
                g,
                &[vec![ea.source, eb.source], vec![ea.target, eb.target]],
            )?;
            let minus = forest_poly(
                g,
                &[vec![ea.source, eb.target], vec![eb.source, ea.target]],
            )?;
            p = p.add(&plus.sub(&minus).mul_scalar(&c));
        }
    }
    Ok(p)
}
