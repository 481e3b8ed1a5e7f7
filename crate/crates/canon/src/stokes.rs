//! Contraction (Stokes) relations for canonical integrals: the sum of
//! edge-contraction integrals plus product terms over motic subgraphs
//! vanishes. Includes the five-term relation for the massive box obtained
//! from the pentagon.

use crate::error::{Error, Result};
use crate::forms::{realize, FormSpec, KinBundle, RealizeMode};
use crate::graph::{Graph, Subgraph};
use crate::integrator::{integrate, splitmix, IntegralConfig, IntegralResult};
use crate::kinematics::{ensure_generic, Kinematics};
use num_complex::Complex64;
use serde::Serialize;

/// Sign convention for the exceptional-face (motic) product terms relative
/// to the edge-contraction faces. The position-dependence is carried by the
/// shuffle sign of the subgraph's edges inside the parent ordering; this
/// constant fixes the remaining overall choice. It is calibrated so that a
/// box-with-chord instance, whose single motic term is forced, cancels
/// exactly (see `motic_sign_calibration` in the tests).
const MOTIC_FACE_SIGN: f64 = 1.0;

#[derive(Clone, Debug, Serialize)]
pub struct StokesTerm {
    pub label: String,
    pub value_re: f64,
    pub value_im: f64,
    pub stderr: f64,
    /// True when the realized form was the zero form, so no sampling ran.
    pub symbolically_zero: bool,
}

impl StokesTerm {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StokesReport {
    pub edge_terms: Vec<StokesTerm>,
    pub motic_terms: Vec<StokesTerm>,
    pub total_re: f64,
    pub total_im: f64,
    pub stderr: f64,
    /// Largest absolute term, the natural scale of the relation.
    pub scale: f64,
    /// |total| / scale; statistically consistent with zero when the
    /// relation holds.
    pub residual_ratio: f64,
}

impl StokesReport {
    pub fn total(&self) -> Complex64 {
        Complex64::new(self.total_re, self.total_im)
    }

    fn assemble(edge_terms: Vec<StokesTerm>, motic_terms: Vec<StokesTerm>) -> StokesReport {
        let mut total = Complex64::new(0.0, 0.0);
        let mut var = 0.0;
        let mut scale = 0.0f64;
        for t in edge_terms.iter().chain(motic_terms.iter()) {
            total += t.value();
            var += t.stderr * t.stderr;
            scale = scale.max(t.value().norm());
        }
        let stderr = var.sqrt();
        StokesReport {
            edge_terms,
            motic_terms,
            total_re: total.re,
            total_im: total.im,
            stderr,
            scale,
            residual_ratio: if scale > 0.0 { total.norm() / scale } else { 0.0 },
        }
    }
}

/// Parity of the shuffle moving the subgraph's edges (in order) in front of
/// the remaining edges (in order).
fn shuffle_sign_of_subset(g: &Graph, gamma: &Subgraph) -> f64 {
    let mut inversions = 0usize;
    let in_gamma: Vec<bool> = g.edges().iter().map(|e| gamma.edges.contains(&e.id)).collect();
    for i in 0..in_gamma.len() {
        for j in i + 1..in_gamma.len() {
            // edge j comes before edge i after the shuffle
            if !in_gamma[i] && in_gamma[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn zero_result() -> IntegralResult {
    IntegralResult {
        estimate_re: 0.0,
        estimate_im: 0.0,
        stderr: 0.0,
        samples: 0,
        seconds: 0.0,
    }
}

/// Integral of a realized piece over a side graph (subgraph or quotient),
/// in a fixed reference orientation. Symbolically-zero realizations skip
/// the sampling entirely (the compact-type pruning is exact).
fn side_integral(
    g: &Graph,
    kin: &Kinematics,
    piece: &FormSpec,
    mode: RealizeMode,
    cfg: &IntegralConfig,
) -> Result<(IntegralResult, bool)> {
    match mode {
        RealizeMode::Normal => {
            let kb = KinBundle::build(g, kin)?;
            let sym = realize(piece, &kb, kin)?;
            if sym.is_zero() {
                return Ok((zero_result(), true));
            }
            Ok((integrate(g, kin, piece, cfg)?, false))
        }
        RealizeMode::AsFirstKind => {
            // the first-kind realization needs no routing, so it applies to
            // subgraphs whose external momenta do not balance
            let sym = crate::forms::realize_first_kind(piece, g)?;
            if sym.is_zero() {
                return Ok((zero_result(), true));
            }
            let nf = crate::forms::compile_first_kind(piece, g)?;
            let r = crate::integrator::integrate_compiled(g, &nf, cfg)?;
            Ok((r, false))
        }
    }
}

/// Verify the Stokes relation for a purely second-kind form of degree
/// `e_G - 2`: every edge contraction integral (with the orientation induced
/// from the parent ordering) plus the product terms over strict motic
/// subgraphs sum to zero within Monte Carlo error.
pub fn stokes_residual(
    g: &Graph,
    kin: &Kinematics,
    spec: &FormSpec,
    cfg: &IntegralConfig,
) -> Result<StokesReport> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if spec.degree() + 2 != g.num_edges() {
        return Err(Error::DegreeMismatch {
            form: spec.degree(),
            expected: g.num_edges().saturating_sub(2),
        });
    }
    if !spec.is_second_kind_only() {
        return Err(Error::BadFormSpec(
            "Stokes verification expects a purely second-kind form".into(),
        ));
    }
    ensure_generic(g, kin)?;
    let mut edge_terms = Vec::new();
    for (idx, e) in g.edges().iter().enumerate() {
        // contraction carries the induced face orientation (-1)^position
        let gc = g.contract(&Subgraph::new([e.id]))?;
        let cfg_e = cfg.with_seed(splitmix(cfg.seed, idx as u64));
        let r = integrate(&gc, kin, spec, &cfg_e)?;
        edge_terms.push(StokesTerm {
            label: format!("contract e{}", e.id),
            value_re: r.estimate_re,
            value_im: r.estimate_im,
            stderr: r.stderr,
            symbolically_zero: false,
        });
    }
    let mv = kin.momentum_vertices(g)?;
    let motic = g.motic_subgraphs(&mv);
    let mut motic_terms = Vec::new();
    let orient = g.orientation() as f64;
    for (gi, gamma) in motic.iter().enumerate() {
        let flags = g.classify_subgraph(gamma, &mv)?;
        let sub = g.extract(gamma)?;
        let quot = g.contract(gamma)?.with_orientation(1);
        let e_gamma = gamma.len();
        for (ti, (left, right, ksign)) in spec.coproduct().into_iter().enumerate() {
            if left.degree() + 1 != e_gamma {
                continue;
            }
            // kinds per the decomposition: second kind stays on the m.m.
            // side, the other side degenerates to the first kind
            let (lmode, rmode) = if flags.mm {
                (RealizeMode::Normal, RealizeMode::AsFirstKind)
            } else {
                (RealizeMode::AsFirstKind, RealizeMode::Normal)
            };
            let cfg_l = cfg.with_seed(splitmix(cfg.seed, 1000 + 2 * (gi * 100 + ti) as u64));
            let cfg_r = cfg.with_seed(splitmix(cfg.seed, 1001 + 2 * (gi * 100 + ti) as u64));
            let (lv, lzero) = side_integral(&sub, kin, &left, lmode, &cfg_l)?;
            let (rv, rzero) = if right.is_unit() && quot.num_edges() == 1 {
                (
                    IntegralResult {
                        estimate_re: 1.0,
                        estimate_im: 0.0,
                        stderr: 0.0,
                        samples: 1,
                        seconds: 0.0,
                    },
                    false,
                )
            } else {
                side_integral(&quot, kin, &right, rmode, &cfg_r)?
            };
            let sign = MOTIC_FACE_SIGN * shuffle_sign_of_subset(g, gamma) * ksign as f64 * orient;
            let value = lv.estimate() * rv.estimate() * sign;
            // error of a product, combined in quadrature
            let stderr = ((lv.stderr * rv.estimate().norm()).powi(2)
                + (rv.stderr * lv.estimate().norm()).powi(2))
            .sqrt();
            let ids: Vec<String> = gamma.edges.iter().map(|id| format!("e{id}")).collect();
            motic_terms.push(StokesTerm {
                label: format!("gamma {{{}}} x quotient ({left} | {right})", ids.join(",")),
                value_re: value.re,
                value_im: value.im,
                stderr,
                symbolically_zero: lzero || rzero,
            });
        }
    }
    Ok(StokesReport::assemble(edge_terms, motic_terms))
}

/// The five-term relation for the massive box: contract each pentagon edge
/// and integrate the degree-3 second-kind form on the five boxes.
pub fn five_term_box(kin: &Kinematics, cfg: &IntegralConfig) -> Result<StokesReport> {
    let pent = crate::library::pentagon();
    let spec = FormSpec::primitive(crate::forms::GenKind::Second, 3)?;
    let report = stokes_residual(&pent, kin, &spec, cfg)?;
    debug_assert!(report.motic_terms.is_empty());
    Ok(report)
}

/// The five contracted box graphs of the pentagon, with their induced
/// orientations; exposed for the cross-check against the parametric oracle.
pub fn pentagon_boxes() -> Result<Vec<Graph>> {
    let pent = crate::library::pentagon();
    pent.edges()
        .iter()
        .map(|e| pent.contract(&Subgraph::new([e.id])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::realize_mode;
    use crate::graph::Edge;
    use crate::library;
    use crate::rat::Rat;

    /// Massive box plus a massless chord between opposite vertices; the
    /// box IS a motic (m.m. and core) subgraph forcing one product term.
    fn box_with_chord(chord_id: u32) -> Graph {
        // base cycle edges keep their cyclic structure; the chord takes the
        // requested id and the others shift to keep ids 1..5 contiguous
        let mut specs: Vec<(u32, u32, u32)> = vec![(4, 1, 1), (1, 2, 2), (2, 3, 3), (3, 4, 4)];
        // (source, target, mass_label)
        let mut edges = Vec::new();
        let mut next_id = 1u32;
        let mut cyc = specs.drain(..);
        while next_id <= 5 {
            if next_id == chord_id {
                edges.push(Edge { id: next_id, source: 1, target: 3, mass_label: 0 });
            } else {
                let (s, t, m) = cyc.next().unwrap();
                edges.push(Edge { id: next_id, source: s, target: t, mass_label: m });
            }
            next_id += 1;
        }
        Graph::new(
            vec![(1, 0), (2, 0), (3, 0), (4, 0)],
            edges,
            vec![(1, 1), (2, 2), (3, 3), (4, 4)],
        )
        .unwrap()
    }

    #[test]
    fn chord_graph_has_single_contributing_motic_subgraph() {
        let g = box_with_chord(5);
        let kin = library::box_kin();
        let mv = kin.momentum_vertices(&g).unwrap();
        let motic = g.motic_subgraphs(&mv);
        let four_edge: Vec<_> = motic.iter().filter(|m| m.len() == 4).collect();
        assert_eq!(four_edge.len(), 1);
        assert_eq!(*four_edge[0], Subgraph::new([1, 2, 3, 4]));
    }

    #[test]
    fn motic_sign_calibration() {
        // the single forced motic term must cancel the edge sum; this pins
        // MOTIC_FACE_SIGN together with the shuffle convention (two chord
        // positions exercise both shuffle parities). The opposite sign
        // hypothesis must be excluded by the same data.
        // momenta scaled up and one heavy mass keep the bordered
        // determinant large while the integrand variance stays moderate
        let kin = crate::kinematics::Kinematics::new(
            2,
            vec![
                (1, [Rat::from_int(6), Rat::from_int(2), Rat::ZERO, Rat::ZERO]),
                (2, [Rat::from_int(2), Rat::from_int(-4), Rat::ZERO, Rat::ZERO]),
                (3, [Rat::from_int(-4), Rat::from_int(6), Rat::ZERO, Rat::ZERO]),
                (4, [Rat::from_int(-4), Rat::from_int(-4), Rat::ZERO, Rat::ZERO]),
            ],
            vec![
                (1, Rat::from_int(9)),
                (2, Rat::from_int(4)),
                (3, Rat::from_int(4)),
                (4, Rat::from_int(4)),
            ],
        )
        .unwrap();
        let cfg = IntegralConfig {
            samples: 600_000,
            seed: 11,
            batches: 20,
            sampler: crate::integrator::Sampler::QuasiRandom,
        };
        for chord in [5u32, 2u32] {
            let g = box_with_chord(chord);
            let spec = FormSpec::parse("p3").unwrap();
            let rep = stokes_residual(&g, &kin, &spec, &cfg).unwrap();
            let live: Vec<_> = rep.motic_terms.iter().filter(|t| !t.symbolically_zero).collect();
            assert_eq!(live.len(), 1, "expected one live motic term");
            let sigma = rep.stderr.max(1e-12);
            assert!(
                rep.total().norm() <= 4.0 * sigma,
                "chord {chord}: residual {} vs stderr {} (scale {})",
                rep.total().norm(),
                rep.stderr,
                rep.scale
            );
            // flipping the motic sign must clearly break the cancellation
            let flipped = rep.total() - 2.0 * live[0].value();
            assert!(
                flipped.norm() > 6.0 * sigma,
                "chord {chord}: sign not resolved ({} vs {sigma})",
                flipped.norm()
            );
        }
    }

    #[test]
    fn pentagon_five_term_smoke() {
        let kin = library::pentagon_kin();
        let cfg = IntegralConfig { samples: 60_000, seed: 3, batches: 12, ..Default::default() };
        let rep = five_term_box(&kin, &cfg).unwrap();
        assert_eq!(rep.edge_terms.len(), 5);
        assert!(rep.motic_terms.is_empty());
        assert!(
            rep.total().norm() <= 4.0 * rep.stderr,
            "five-term residual {} stderr {}",
            rep.total().norm(),
            rep.stderr
        );
    }

    #[test]
    fn orientation_flip_negates_terms() {
        let kin = library::pentagon_kin();
        let cfg = IntegralConfig { samples: 20_000, seed: 9, batches: 10, ..Default::default() };
        let pent = library::pentagon();
        let spec = FormSpec::parse("p3").unwrap();
        let a = stokes_residual(&pent, &kin, &spec, &cfg).unwrap();
        let b = stokes_residual(&pent.with_orientation(-1), &kin, &spec, &cfg).unwrap();
        for (x, y) in a.edge_terms.iter().zip(&b.edge_terms) {
            assert_eq!(x.value_im.to_bits(), (-y.value_im).to_bits());
        }
        assert!((a.residual_ratio - b.residual_ratio).abs() < 1e-12);
    }

    #[test]
    fn term_coverage() {
        let kin = library::pentagon_kin();
        let cfg = IntegralConfig { samples: 2000, seed: 1, batches: 2, ..Default::default() };
        let pent = library::pentagon();
        let rep = stokes_residual(&pent, &kin, &FormSpec::parse("p3").unwrap(), &cfg).unwrap();
        // the edge sum iterates all edges exactly once
        let labels: Vec<&str> = rep.edge_terms.iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, vec![
            "contract e1",
            "contract e2",
            "contract e3",
            "contract e4",
            "contract e5"
        ]);
    }

    #[test]
    fn compact_type_terms_vanish_symbolically() {
        // on the chord graph, gamma = {2,3,5} (triangle) is motic (core,
        // not m.m.) but pairs only with coproduct pieces of degree 2, so it
        // never appears; the m.m. box term and the first-kind side of any
        // core term must be handled symbolically. Check that a first-kind
        // beta^3 realization on the triangle subgraph is the zero form.
        let g = box_with_chord(5);
        let kin = library::box_kin();
        let sub = g.extract(&Subgraph::new([2, 3, 5])).unwrap();
        let kb = KinBundle::build(&sub, &kin);
        // non-m.m. subgraph momenta do not balance, so the normal bundle
        // may fail; the first-kind realization must not need it
        if let Ok(kb) = kb {
            let f =
                realize_mode(&FormSpec::parse("p3").unwrap(), &kb, &kin, RealizeMode::AsFirstKind)
                    .unwrap();
            assert!(f.is_zero());
        }
    }

    #[test]
    fn degree_and_kind_validation() {
        let kin = library::pentagon_kin();
        let cfg = IntegralConfig::default();
        let pent = library::pentagon();
        assert!(matches!(
            stokes_residual(&pent, &kin, &FormSpec::parse("p5").unwrap(), &cfg),
            Err(Error::DegreeMismatch { .. })
        ));
        let _ = Rat::ONE;
    }
}
