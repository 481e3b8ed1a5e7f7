//! Numerical evaluation of canonical integrals over the normalised simplex
//! with batch-based error estimates and deterministic seeding. One-edge and
//! two-edge graphs take deterministic paths (a point evaluation and a
//! Gauss-Legendre quadrature respectively); everything else is Monte Carlo
//! with Dirichlet(1,..,1) or rotated-lattice sampling.

use crate::error::{Error, Result};
use crate::forms::{FormSpec, KinBundle, NumericForm, RealizeMode};
use crate::graph::Graph;
use crate::kinematics::{ensure_generic, Kinematics};
use crate::poly::MPoly;
use crate::rat::Rat;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sampler {
    UniformDirichlet,
    QuasiRandom,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IntegralConfig {
    pub sampler: Sampler,
    pub samples: u64,
    pub seed: u64,
    pub batches: u32,
}

impl Default for IntegralConfig {
    fn default() -> Self {
        IntegralConfig {
            sampler: Sampler::UniformDirichlet,
            samples: 100_000,
            seed: 42,
            batches: 20,
        }
    }
}

impl IntegralConfig {
    fn validate(&self) -> Result<()> {
        if self.batches < 2 || self.samples < self.batches as u64 {
            return Err(Error::BadSampleConfig {
                samples: self.samples,
                batches: self.batches,
            });
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IntegralResult {
    pub estimate_re: f64,
    pub estimate_im: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seconds: f64,
}

impl IntegralResult {
    pub fn estimate(&self) -> Complex64 {
        Complex64::new(self.estimate_re, self.estimate_im)
    }
}

pub fn splitmix(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().max(1.0)
}

/// Monte Carlo integral of a canonical form over the simplex of the graph.
/// The form degree must be `e_G - 1`; the estimate is exactly reproducible
/// for a fixed config.
pub fn integrate(
    g: &Graph,
    kin: &Kinematics,
    spec: &FormSpec,
    cfg: &IntegralConfig,
) -> Result<IntegralResult> {
    let n = g.num_edges();
    if spec.degree() + 1 != n {
        return Err(Error::DegreeMismatch {
            form: spec.degree(),
            expected: n.saturating_sub(1),
        });
    }
    ensure_generic(g, kin)?;
    if n == 1 {
        // the simplex is a single point; only the unit form integrates
        let v = if spec.is_unit() { 1.0 } else { 0.0 };
        return Ok(IntegralResult {
            estimate_re: v * g.orientation() as f64,
            estimate_im: 0.0,
            stderr: 0.0,
            samples: 1,
            seconds: 0.0,
        });
    }
    let kb = KinBundle::build(g, kin)?;
    let nf = NumericForm::compile(spec, &kb, kin, RealizeMode::Normal)?;
    integrate_compiled(g, &nf, cfg)
}

/// Integrate a compiled form over the simplex of the graph. Two-edge
/// graphs take a deterministic composite Gauss-Legendre path; larger ones
/// run batched Monte Carlo.
pub fn integrate_compiled(g: &Graph, nf: &NumericForm, cfg: &IntegralConfig) -> Result<IntegralResult> {
    let start = std::time::Instant::now();
    let n = g.num_edges();
    if nf.degree() + 1 != n {
        return Err(Error::DegreeMismatch {
            form: nf.degree(),
            expected: n.saturating_sub(1),
        });
    }
    let orient = g.orientation() as f64;
    if n == 2 {
        let mut acc = Complex64::new(0.0, 0.0);
        let panels = 64;
        for p in 0..panels {
            let a = p as f64 / panels as f64;
            let b = (p + 1) as f64 / panels as f64;
            for (x, w) in gauss_legendre_16() {
                let t = 0.5 * (b - a) * x + 0.5 * (a + b);
                let v = nf.eval_slice(&[t, 1.0 - t])?;
                acc += v * (0.5 * (b - a) * w);
            }
        }
        return Ok(IntegralResult {
            estimate_re: acc.re * orient,
            estimate_im: acc.im * orient,
            stderr: 0.0,
            samples: (panels * 16) as u64,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    cfg.validate()?;
    let value = mc_integrate(cfg, n, |alpha| nf.eval_slice(alpha))?;
    Ok(IntegralResult {
        estimate_re: value.0.re * orient,
        estimate_im: value.0.im * orient,
        stderr: value.1,
        samples: cfg.samples,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Monte Carlo estimate of a scalar parametric integral
/// `int numerator / (Psi^a Xi^b) Omega` over the simplex.
pub fn integrate_parametric(
    g: &Graph,
    kin: &Kinematics,
    a: i32,
    b: i32,
    numerator: &MPoly<Rat>,
    cfg: &IntegralConfig,
) -> Result<IntegralResult> {
    let start = std::time::Instant::now();
    cfg.validate()?;
    let n = g.num_edges();
    let psi = crate::forms::NumPoly::compile(&crate::symanzik::psi(g)?);
    let xi = crate::forms::NumPoly::compile(&crate::symanzik::xi(g, kin)?);
    let num = crate::forms::NumPoly::compile(numerator);
    // pullback of Omega to the slice frame is (-1)^N
    let omega_sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let orient = g.orientation() as f64;
    let value = mc_integrate(cfg, n, move |alpha| {
        let c: Vec<Complex64> = alpha.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let pv = psi.eval(&c).re;
        let xv = xi.eval(&c).re;
        if pv.abs() < 1e-300 || xv.abs() < 1e-300 {
            return Err(Error::SingularAtPoint(alpha.to_vec()));
        }
        let nv = num.eval(&c);
        Ok(nv * omega_sign * pv.powi(-a) * xv.powi(-b))
    })?;
    Ok(IntegralResult {
        estimate_re: value.0.re * orient,
        estimate_im: value.0.im * orient,
        stderr: value.1,
        samples: cfg.samples,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Batched MC over the open simplex with deterministic per-batch seeds;
/// returns (mean integral, standard error). The integrand is evaluated on
/// slice coordinates summing to 1 and the simplex volume factor is applied.
fn mc_integrate<F>(cfg: &IntegralConfig, n: usize, f: F) -> Result<(Complex64, f64)>
where
    F: Fn(&[f64]) -> Result<Complex64> + Sync,
{
    let b = cfg.batches as u64;
    let volume = 1.0 / factorial(n - 1);
    let batch_results: Vec<Result<(Complex64, u64)>> = (0..b)
        .into_par_iter()
        .map(|batch| {
            let count = cfg.samples / b + u64::from(batch < cfg.samples % b);
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(cfg.seed, batch));
            let mut acc = Complex64::new(0.0, 0.0);
            let mut alpha = vec![0.0f64; n];
            for s in 0..count {
                match cfg.sampler {
                    Sampler::UniformDirichlet => dirichlet(&mut rng, &mut alpha),
                    Sampler::QuasiRandom => kronecker(cfg.seed, batch, s, &mut alpha),
                }
                acc += f(&alpha)?;
            }
            Ok((acc, count))
        })
        .collect();
    let mut means = Vec::with_capacity(b as usize);
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_n = 0u64;
    for r in batch_results {
        let (sum, count) = r?;
        means.push(sum / count as f64);
        total += sum;
        total_n += count;
    }
    let mean = total / total_n as f64;
    let mut var = 0.0;
    for m in &means {
        var += (m - mean).norm_sqr();
    }
    var /= (means.len() - 1) as f64;
    let stderr = (var / means.len() as f64).sqrt() * volume;
    Ok((mean * volume, stderr))
}

fn dirichlet<R: Rng>(rng: &mut R, alpha: &mut [f64]) {
    let mut sum = 0.0;
    for a in alpha.iter_mut() {
        let u: f64 = rng.gen::<f64>();
        *a = -(1.0 - u).ln();
        sum += *a;
    }
    for a in alpha.iter_mut() {
        *a /= sum;
    }
}

/// Kronecker lattice with a seed-derived Cranley-Patterson rotation,
/// pushed through the same exponential map as the Dirichlet sampler.
fn kronecker(seed: u64, batch: u64, index: u64, alpha: &mut [f64]) {
    const ROOTS: [f64; 16] = [
        1.4142135623730951, // sqrt 2
        1.7320508075688772,
        2.2360679774997896,
        2.6457513110645907,
        3.3166247903554,
        3.605551275463989,
        4.123105625617661,
        4.358898943540674,
        4.795831523312719,
        5.385164807134504,
        5.5677643628300215,
        6.082762530298219,
        6.4031242374328485,
        6.557438524302,
        6.855654600401044,
        7.0710678118654755,
    ];
    let mut sum = 0.0;
    for (i, a) in alpha.iter_mut().enumerate() {
        let shift = splitmix(seed, batch * 97 + i as u64) as f64 / u64::MAX as f64;
        let u = (ROOTS[i].fract() * index as f64 + shift).fract();
        *a = -(1.0 - u).max(1e-16).ln();
        sum += *a;
    }
    for a in alpha.iter_mut() {
        *a /= sum;
    }
}

/// Deterministic nested Gauss-Legendre quadrature of a scalar function over
/// the simplex slice (sum = 1) of an `n`-edge graph; the oracle path for
/// cross-checking Monte Carlo results.
pub fn quadrature_slice<F>(n: usize, nodes: usize, f: &F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let mut alpha = vec![0.0f64; n];
    nested_gl(n, nodes, 0, 1.0, &mut alpha, f)
}

fn nested_gl<F>(n: usize, nodes: usize, level: usize, rest: f64, alpha: &mut [f64], f: &F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    if level == n - 1 {
        alpha[n - 1] = rest;
        return f(alpha);
    }
    let mut acc = 0.0;
    for k in 0..nodes {
        for (x, w) in gauss_legendre_16() {
            let a = rest * (k as f64 / nodes as f64);
            let b = rest * ((k + 1) as f64 / nodes as f64);
            let t = 0.5 * (b - a) * x + 0.5 * (a + b);
            alpha[level] = t;
            acc += 0.5 * (b - a) * w * nested_gl(n, nodes, level + 1, rest - t, alpha, f);
        }
    }
    acc
}

/// 16-point Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre_16() -> [(f64, f64); 16] {
    [
        (-0.9894009349916499, 0.027152459411754096),
        (-0.9445750230732326, 0.062253523938647894),
        (-0.8656312023878318, 0.09515851168249279),
        (-0.755404408355003, 0.12462897125553388),
        (-0.6178762444026438, 0.14959598881657674),
        (-0.45801677765722737, 0.16915651939500254),
        (-0.2816035507792589, 0.18260341504492358),
        (-0.09501250983763744, 0.1894506104550685),
        (0.09501250983763744, 0.1894506104550685),
        (0.2816035507792589, 0.18260341504492358),
        (0.45801677765722737, 0.16915651939500254),
        (0.6178762444026438, 0.14959598881657674),
        (0.755404408355003, 0.12462897125553388),
        (0.8656312023878318, 0.09515851168249279),
        (0.9445750230732326, 0.062253523938647894),
        (0.9894009349916499, 0.027152459411754096),
    ]
}
