//! Command-line front end: graph polynomials, Laplacian identity checks,
//! canonical forms, canonical integrals and Stokes relations.

use canon::error::Error;
use canon::forms::{realize, FormSpec, KinBundle};
use canon::graph::{Graph, Subgraph};
use canon::integrator::{integrate, IntegralConfig, Sampler};
use canon::kinematics::{random_generic_kin, Kinematics};
use canon::laplacian::verify_det_identity;
use canon::library;
use canon::poly::{poly_to_json, MPoly};
use canon::rat::Rat;
use canon::scalar::{GaussRat, Quat};
use canon::stokes::{five_term_box, stokes_residual};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "canon", version, about = "Graph Laplacians with kinematics: Symanzik polynomials, canonical forms and integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Graph JSON file, or a built-in name (bubble, triangle, banana3,
    /// banana4, box, dunce, double-bubble, box-triangle, pentagon,
    /// hexagon, wheel3)
    graph: String,
    /// Kinematics JSON file; defaults to the built-in reference kinematics
    /// when the graph is given by name
    #[arg(long)]
    kin: Option<String>,
}

#[derive(Args, Clone)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    batches: u32,
    /// Use the rotated-lattice sampler instead of uniform Dirichlet
    #[arg(long)]
    quasi: bool,
    /// Drop wall-time fields from the output (for byte-level comparison)
    #[arg(long)]
    omit_timing: bool,
}

impl McArgs {
    fn config(&self) -> IntegralConfig {
        IntegralConfig {
            sampler: if self.quasi {
                Sampler::QuasiRandom
            } else {
                Sampler::UniformDirichlet
            },
            samples: self.samples,
            seed: self.seed,
            batches: self.batches,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// First Symanzik polynomial
    Psi {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        json: bool,
    },
    /// Second Symanzik polynomial (momentum part)
    Phi {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        json: bool,
    },
    /// Mass-corrected second Symanzik polynomial
    Xi {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        json: bool,
    },
    /// Spanning-forest polynomial for a vertex partition
    Forest {
        #[command(flatten)]
        g: GraphArgs,
        /// Partition blocks: vertex ids comma-separated, blocks joined
        /// with ';', e.g. "1,3;2,4"
        #[arg(long)]
        partition: String,
        #[arg(long)]
        json: bool,
    },
    /// Print both Laplacian matrices and check the determinant identity
    Laplacian {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        json: bool,
    },
    /// Realize a canonical form symbolically; optionally run property checks
    Form {
        #[command(flatten)]
        g: GraphArgs,
        /// Form spec: product of w{4k+1} / p{2k+1} / pq{4k+1} / o1 tokens
        /// joined by '^', e.g. "p3" or "w5^p3"
        #[arg(long)]
        form: String,
        /// Run a property suite: closed | restrict | invariance
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo canonical integral over the graph simplex
    Integrate {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        form: String,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        json: bool,
    },
    /// Verify the Stokes relation (edge contractions + motic products)
    VerifyStokes {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long)]
        form: String,
        #[command(flatten)]
        mc: McArgs,
        /// Residual-ratio tolerance for the exit status
        #[arg(long, default_value_t = 5e-3)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Five-term relation for the massive box from the pentagon
    FiveTerm {
        /// Kinematics JSON (5 legs, 5 masses); defaults to the built-in
        /// pentagon reference kinematics
        kin: Option<String>,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value_t = 5e-3)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Exact identity suite on the built-in graphs
    Selftest,
}

#[derive(Serialize)]
struct RunManifest {
    tool: String,
    version: String,
    subcommand: String,
    inputs: Vec<String>,
    seed: Option<u64>,
    samples: Option<u64>,
    batches: Option<u32>,
    form: Option<String>,
}

impl RunManifest {
    fn new(subcommand: &str, inputs: &[&str]) -> RunManifest {
        RunManifest {
            tool: "canon".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            seed: None,
            samples: None,
            batches: None,
            form: None,
        }
    }

    fn with_mc(mut self, mc: &McArgs, form: Option<&str>) -> RunManifest {
        self.seed = Some(mc.seed);
        self.samples = Some(mc.samples);
        self.batches = Some(mc.batches);
        self.form = form.map(|s| s.to_string());
        self
    }
}

fn load_graph(spec: &str) -> Result<Graph, Error> {
    if library::BUILTIN_NAMES.contains(&spec) {
        return library::graph_by_name(spec);
    }
    Graph::from_json(&std::fs::read_to_string(spec)?)
}

fn load_kin(g: &GraphArgs) -> Result<Kinematics, Error> {
    match &g.kin {
        Some(path) => Kinematics::from_json(&std::fs::read_to_string(path)?),
        None => {
            if library::BUILTIN_NAMES.contains(&g.graph.as_str()) {
                library::kin_by_name(&g.graph)
            } else {
                Err(Error::Schema(
                    "a kinematics file is required for graphs loaded from disk (--kin)".into(),
                ))
            }
        }
    }
}

fn poly_payload(name: &str, p: &MPoly<Rat>, manifest: RunManifest, json: bool) -> i32 {
    if json {
        let out = serde_json::json!({
            "manifest": manifest,
            name: poly_to_json(p),
            "text": p.to_string(),
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("{p}");
    }
    0
}

fn run() -> Result<i32, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Psi { g, json } => {
            let graph = load_graph(&g.graph)?;
            let p = canon::symanzik::psi(&graph)?;
            Ok(poly_payload("psi", &p, RunManifest::new("psi", &[&g.graph]), json))
        }
        Command::Phi { g, json } => {
            let graph = load_graph(&g.graph)?;
            let kin = load_kin(&g)?;
            let p = canon::symanzik::phi(&graph, &kin)?;
            Ok(poly_payload("phi", &p, RunManifest::new("phi", &[&g.graph]), json))
        }
        Command::Xi { g, json } => {
            let graph = load_graph(&g.graph)?;
            let kin = load_kin(&g)?;
            let p = canon::symanzik::xi(&graph, &kin)?;
            Ok(poly_payload("xi", &p, RunManifest::new("xi", &[&g.graph]), json))
        }
        Command::Forest { g, partition, json } => {
            let graph = load_graph(&g.graph)?;
            let blocks: Vec<Vec<u32>> = partition
                .split(';')
                .map(|b| {
                    b.split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| s.trim().parse::<u32>())
                        .collect::<Result<Vec<u32>, _>>()
                })
                .collect::<Result<_, _>>()
                .map_err(|e| Error::Schema(format!("bad partition: {e}")))?;
            let p = canon::symanzik::forest_poly(&graph, &blocks)?;
            Ok(poly_payload("forest", &p, RunManifest::new("forest", &[&g.graph]), json))
        }
        Command::Laplacian { g, json } => {
            let graph = load_graph(&g.graph)?;
            let kin = load_kin(&g)?;
            let (report, lam_txt, lt_txt) = match kin.dim {
                2 => {
                    let b = canon::laplacian::bundle::<GaussRat>(&graph, &kin)?;
                    (
                        verify_det_identity::<GaussRat>(&graph, &kin)?,
                        b.lambda.to_string(),
                        b.lambda_tilde.to_string(),
                    )
                }
                _ => {
                    let b = canon::laplacian::bundle::<Quat>(&graph, &kin)?;
                    (
                        verify_det_identity::<Quat>(&graph, &kin)?,
                        b.lambda.to_string(),
                        b.lambda_tilde.to_string(),
                    )
                }
            };
            if json {
                let out = serde_json::json!({
                    "manifest": RunManifest::new("laplacian", &[&g.graph]),
                    "lambda": lam_txt,
                    "lambda_tilde": lt_txt,
                    "det": report.lhs.to_string(),
                    "xi_reference": report.rhs.to_string(),
                    "identity_holds": report.equal,
                });
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                println!("Lambda =\n{lam_txt}");
                println!("Lambda~ =\n{lt_txt}");
                println!("det      = {}", report.lhs);
                println!("expected = {}", report.rhs);
                println!("identity: {}", if report.equal { "PASS" } else { "FAIL" });
            }
            Ok(if report.equal { 0 } else { 1 })
        }
        Command::Form { g, form, check, json } => {
            let graph = load_graph(&g.graph)?;
            let kin = load_kin(&g)?;
            let spec = FormSpec::parse(&form)?;
            let kb = KinBundle::build(&graph, &kin)?;
            let f = realize(&spec, &kb, &kin)?;
            let mut failures = Vec::new();
            if let Some(which) = &check {
                match which.as_str() {
                    "closed" => {
                        if !f.exterior_derivative().is_zero() {
                            failures.push("closed".to_string());
                        }
                    }
                    "restrict" => {
                        let mv = kin.momentum_vertices(&graph)?;
                        for e in graph.edges() {
                            if e.is_tadpole() {
                                continue;
                            }
                            let gamma = Subgraph::new([e.id]);
                            let flags = graph.classify_subgraph(&gamma, &mv)?;
                            if flags.mm {
                                continue;
                            }
                            let pos = graph.edge_pos(e.id)?;
                            let restricted = f.restrict(pos)?;
                            let quot = graph.contract(&gamma)?;
                            let kbq = KinBundle::build(&quot, &kin)?;
                            let fq = realize(&spec, &kbq, &kin)?;
                            if !restricted.eq_form(&fq) {
                                failures.push(format!("restrict e{}", e.id));
                            }
                        }
                    }
                    "invariance" => {
                        // a couple of fixed basis/routing moves
                        let h = graph.loop_number();
                        if h > 0 && kin.dim == 2 {
                            let b = canon::laplacian::bundle::<GaussRat>(&graph, &kin)?;
                            let mut p: Vec<Vec<i64>> = (0..h)
                                .map(|i| (0..h).map(|j| i64::from(i == j)).collect())
                                .collect();
                            if h > 1 {
                                p[0][h - 1] = 3;
                            }
                            let s: Vec<GaussRat> =
                                (0..h).map(|k| GaussRat::from_ints(k as i64 + 1, 1)).collect();
                            let t = canon::laplacian::transform(&b, &kin, &p, &s)?;
                            let kb2 = KinBundle::C2(t);
                            let f2 = realize(&spec, &kb2, &kin)?;
                            if !f.eq_form(&f2) {
                                failures.push("invariance".into());
                            }
                        }
                    }
                    other => {
                        return Err(Error::Schema(format!("unknown check `{other}`")));
                    }
                }
            }
            let degree = f.degree();
            let coeffs: Vec<serde_json::Value> = {
                let mut masks: Vec<u32> = f.coeffs().map(|(m, _)| m).collect();
                masks.sort();
                masks
                    .iter()
                    .map(|&m| {
                        let c = f.coeff(m);
                        let vars: Vec<usize> =
                            (0..graph.num_edges()).filter(|&v| m & (1 << v) != 0).map(|v| v + 1).collect();
                        serde_json::json!({
                            "d_alpha": vars,
                            "numerator": c.num.to_string(),
                            "denominator": c.den.to_string(),
                        })
                    })
                    .collect()
            };
            if json {
                let out = serde_json::json!({
                    "manifest": RunManifest::new("form", &[&g.graph]),
                    "form": form,
                    "degree": degree,
                    "coefficients": coeffs,
                    "checks_failed": failures,
                });
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                println!("degree {degree} form with {} nonzero coefficients", coeffs.len());
                for c in &coeffs {
                    println!(
                        "d_alpha{:?}: ({}) / ({})",
                        c["d_alpha"], c["numerator"], c["denominator"]
                    );
                }
                for fail in &failures {
                    println!("check FAIL: {fail}");
                }
                if check.is_some() && failures.is_empty() {
                    println!("check PASS");
                }
            }
            Ok(if failures.is_empty() { 0 } else { 1 })
        }
        Command::Integrate { g, form, mc, json } => {
            let graph = load_graph(&g.graph)?;
            let kin = load_kin(&g)?;
            let spec = FormSpec::parse(&form)?;
            let r = integrate(&graph, &kin, &spec, &mc.config())?;
            if json {
                let mut out = serde_json::json!({
                    "manifest": RunManifest::new("integrate", &[&g.graph]).with_mc(&mc, Some(&form)),
                    "estimate": [r.estimate_re, r.estimate_im],
                    "stderr": r.stderr,
                    "samples": r.samples,
                });
                if !mc.omit_timing {
                    out["seconds"] = serde_json::json!(r.seconds);
                }
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                println!(
                    "estimate = {} + {} i   (stderr {:.3e}, {} samples)",
                    r.estimate_re, r.estimate_im, r.stderr, r.samples
                );
            }
            Ok(0)
        }
        Command::VerifyStokes { g, form, mc, tol, json } => {
            let graph = load_graph(&g.graph)?;
            let kin = load_kin(&g)?;
            let spec = FormSpec::parse(&form)?;
            let rep = stokes_residual(&graph, &kin, &spec, &mc.config())?;
            let pass = rep.residual_ratio <= tol || rep.total().norm() <= 3.0 * rep.stderr;
            print_stokes(&rep, RunManifest::new("verify-stokes", &[&g.graph]).with_mc(&mc, Some(&form)), json, pass);
            Ok(if pass { 0 } else { 1 })
        }
        Command::FiveTerm { kin, mc, tol, json } => {
            let kin = match &kin {
                Some(path) => {
                    if library::BUILTIN_NAMES.contains(&path.as_str()) {
                        library::kin_by_name(path)?
                    } else {
                        Kinematics::from_json(&std::fs::read_to_string(path)?)?
                    }
                }
                None => library::pentagon_kin(),
            };
            let rep = five_term_box(&kin, &mc.config())?;
            let pass = rep.residual_ratio <= tol || rep.total().norm() <= 3.0 * rep.stderr;
            print_stokes(&rep, RunManifest::new("five-term", &[]).with_mc(&mc, Some("p3")), json, pass);
            Ok(if pass { 0 } else { 1 })
        }
        Command::Selftest => selftest(),
    }
}

fn print_stokes(rep: &canon::stokes::StokesReport, manifest: RunManifest, json: bool, pass: bool) {
    if json {
        let out = serde_json::json!({
            "manifest": manifest,
            "edge_terms": rep.edge_terms,
            "motic_terms": rep.motic_terms,
            "total": [rep.total_re, rep.total_im],
            "stderr": rep.stderr,
            "scale": rep.scale,
            "residual_ratio": rep.residual_ratio,
            "pass": pass,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        for t in rep.edge_terms.iter().chain(rep.motic_terms.iter()) {
            println!(
                "{:30} {:+.6e} + {:+.6e} i  (stderr {:.2e})",
                t.label, t.value_re, t.value_im, t.stderr
            );
        }
        println!(
            "total = {:.6e} + {:.6e} i, scale = {:.6e}, residual ratio = {:.3e} [{}]",
            rep.total_re,
            rep.total_im,
            rep.scale,
            rep.residual_ratio,
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn selftest() -> Result<i32, Error> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {}", if ok { "PASS" } else { "FAIL" }, name);
        if !ok {
            failures += 1;
        }
    };

    // determinant identity on the complex-momentum suite
    for name in [
        "bubble",
        "triangle",
        "banana3",
        "banana4",
        "box",
        "dunce",
        "double-bubble",
        "wheel3",
    ] {
        let g = library::graph_by_name(name)?;
        let mut ok = verify_det_identity::<GaussRat>(&g, &library::kin_by_name(name)?)?.equal;
        for s in 0..3 {
            let kin = random_generic_kin(&g, 2, 1000 + s);
            ok &= verify_det_identity::<GaussRat>(&g, &kin)?.equal;
        }
        check(&format!("det Lambda~ = Xi [{name}]"), ok);
    }
    // quaternionic identity
    for name in ["box", "hexagon"] {
        let g = library::graph_by_name(name)?;
        let mut ok = true;
        for s in 0..2 {
            let kin = random_generic_kin(&g, 4, 2000 + s);
            ok &= verify_det_identity::<Quat>(&g, &kin)?.equal;
        }
        check(&format!("Det chi(Lambda~) = Xi^2 [{name}]"), ok);
    }
    // spanning-forest expansion of Phi
    for name in ["bubble", "box", "dunce"] {
        let g = library::graph_by_name(name)?;
        let kin = library::kin_by_name(name)?;
        let r = canon::kinematics::route::<GaussRat>(&g, &kin)?;
        let ok = canon::symanzik::phi_from_forests(&g, &kin, &r)?
            == canon::symanzik::phi(&g, &kin)?;
        check(&format!("Phi = forest expansion [{name}]"), ok);
    }
    // canonical forms
    {
        let g = library::box_graph();
        let kin = library::box_kin();
        let kb = KinBundle::build(&g, &kin)?;
        let f = realize(&FormSpec::parse("p3")?, &kb, &kin)?;
        check("d(p3 on box) = 0", f.exterior_derivative().is_zero());
        let g = library::double_bubble();
        let kin = library::double_bubble_kin();
        let kb = KinBundle::build(&g, &kin)?;
        let f = realize(&FormSpec::parse("p3")?, &kb, &kin)?;
        check("p3 vanishes on the double bubble", f.is_zero());
    }
    if failures == 0 {
        Ok(0)
    } else {
        Ok(1)
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::Json(_)
        | Error::Schema(_)
        | Error::BadFormSpec(_)
        | Error::BadDimension(_)
        | Error::NonContiguousEdgeIds
        | Error::UnknownEdge(_)
        | Error::UnknownVertex(_)
        | Error::UnknownLeg(_)
        | Error::MassNotPositive(_)
        | Error::DegreeMismatch { .. }
        | Error::NonGeneric(_)
        | Error::ConservationViolated => 2,
        _ => 1,
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e));
        }
    }
}
