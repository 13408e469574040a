use crate::report::Report;
use crate::{Cli, Command, CorpusArgs};
use covol::asymptotics::{self, LineEstimate, Moment, PlaceDataSet};
use covol::corpus::{self, FieldEntry, PolyEntry};
use covol::mahler::{self, Method, QmcOptions, Relation};
use covol::numfield::{LogFlavor, NumberField, UnitClass};
use covol::quad::{self, Tolerance};
use covol::saddle::{self, GammaSum};
use covol::specfun::alpha_kappa_real;
use covol::unitlat::{self, LogLattice};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use std::path::Path;

type Result<T> = std::result::Result<T, String>;

pub fn run(cli: &Cli) -> Result<Report> {
    let seed = cli.common.seed;
    match &cli.command {
        Command::Field { corpus } => field(corpus),
        Command::Units { corpus, wedge_samples, mu_k, mu_bound } => units(corpus, *wedge_samples, *mu_k, *mu_bound, seed),
        Command::Geometry { corpus } => geometry(corpus),
        Command::Saddle { corpus, y, t } => saddle_cmd(corpus, y.as_deref(), *t),
        Command::VerifyAsymptotics { grid, csv, rho_samples, minor_samples, moment_samples } => {
            verify_asymptotics(grid, csv.as_deref(), *rho_samples, *minor_samples, *moment_samples, seed)
        }
        Command::Bound { corpus, d, n0 } => bound(corpus, *d, *n0),
        Command::Mahler { poly, points, boyd_a, boyd_k } => mahler_cmd(poly.as_deref(), *points, boyd_a.as_deref(), boyd_k, seed),
        Command::Bloch { z, samples } => bloch(z, *samples, seed),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))
}

fn load_fields(args: &CorpusArgs) -> Result<Vec<(FieldEntry, NumberField)>> {
    let entries = match &args.corpus {
        Some(p) => corpus::parse_fields(&read(p)?).map_err(|e| e.to_string())?,
        None => corpus::builtin_fields(),
    };
    let entries: Vec<FieldEntry> = match &args.label {
        Some(l) => entries.into_iter().filter(|e| &e.label == l).collect(),
        None => entries,
    };
    if entries.is_empty() {
        return Err(match &args.label {
            Some(l) => format!("no corpus entry labelled {l:?}"),
            None => "empty corpus".into(),
        });
    }
    entries
        .into_iter()
        .map(|e| {
            let f = e.field().map_err(|x| x.to_string())?;
            e.units().map_err(|x| x.to_string())?;
            Ok((e, f))
        })
        .collect()
}

fn field(args: &CorpusArgs) -> Result<Report> {
    let mut rep = Report::new("field");
    for (e, f) in load_fields(args)? {
        let units = e.units().map_err(|x| x.to_string())?;
        let roots: Vec<[f64; 2]> = f.roots().iter().map(|z| [z.re, z.im]).collect();
        rep.results.push(json!({
            "label": e.label, "degree": f.degree(), "r1": f.r1(), "r2": f.r2(),
            "unit_rank": f.unit_rank(), "units": units.len(), "roots": roots,
        }));
        rep.note(format!("{}: degree {}, signature ({}, {}), {} of {} units", e.label, f.degree(), f.r1(), f.r2(), units.len(), f.unit_rank()));
        if e.full_rank {
            rep.check(&e.label, "unit_count_equals_rank", units.len() == f.unit_rank(), &json!({"units": units.len(), "rank": f.unit_rank()}));
        }
        for (i, u) in units.iter().enumerate() {
            let ctx = format!("{}/unit{}", e.label, i + 1);
            let class = f.classify_unit(u).map_err(|x| x.to_string())?;
            rep.check(&ctx, "is_unit", class != UnitClass::NotUnit, &class);
            let av = f.abs_values(u).map_err(|x| x.to_string())?;
            let product: f64 = av.per_place.iter().zip(f.place_kinds()).map(|(x, k)| x.powf(k.weight())).product();
            let rel = (product - 1.0).abs();
            rep.check(&ctx, "product_formula", rel < 1e-9, &json!({"product": product, "rel_err": rel}));
            let sum: f64 = f.log_embed(u, LogFlavor::Weighted).map_err(|x| x.to_string())?.iter().sum();
            rep.check(&ctx, "log_sum_zero", sum.abs() < 1e-9, &json!({"sum": sum}));
        }
    }
    Ok(rep)
}

fn random_wedge_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    loop {
        let n = rng.gen_range(2..=5usize);
        let basis: Vec<Vec<BigInt>> = (0..n).map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-9..=9))).collect()).collect();
        let omega: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-9..=9))).collect();
        let dm = DMatrix::from_fn(n, n, |r, c| f64::from(i32::try_from(&basis[c][r]).unwrap()));
        if dm.determinant().abs() > 0.5 && omega.iter().any(|x| *x != BigInt::from(0)) {
            return (basis, omega);
        }
    }
}

fn units(args: &CorpusArgs, wedge_samples: usize, mu_k: usize, mu_bound: i64, seed: u64) -> Result<Report> {
    let mut rep = Report::new("units");
    for (e, f) in load_fields(args)? {
        let units = e.units().map_err(|x| x.to_string())?;
        if units.is_empty() {
            rep.results.push(json!({"label": e.label, "rank": 0}));
            continue;
        }
        let lattice = match LogLattice::from_units(&f, &units) {
            Ok(l) => l,
            Err(x) => {
                rep.check(&e.label, "lattice", false, &x.to_string());
                continue;
            }
        };
        let covolume = lattice.covolume().map_err(|x| x.to_string())?;
        let norms = unitlat::wedge_norms(lattice.basis()).map_err(|x| x.to_string())?;
        let mut mu = Vec::new();
        for k in 1..=mu_k.min(lattice.rank()) {
            let v = unitlat::mu_1k_search(&lattice, k, mu_bound).map_err(|x| x.to_string())?;
            mu.push(json!({"k": k, "bound": mu_bound, "mu_1k_upper": v}));
        }
        rep.note(format!("{}: covolume {covolume:.9}", e.label));
        rep.results.push(json!({"label": e.label, "rank": lattice.rank(), "covolume": covolume, "wedge_norms": norms, "mu_search": mu}));
        if f.is_totally_real() {
            for c in unitlat::pohst_check(&f, &units).map_err(|x| x.to_string())? {
                rep.check(&e.label, &c.check, c.pass, &c);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..wedge_samples {
        let (basis, omega) = random_wedge_instance(&mut rng);
        let n = omega.len();
        let ctx = format!("wedge{i}");
        match unitlat::pure_wedge_extract(&basis, &omega) {
            Ok(pw) => {
                let coords = unitlat::wedge_coordinates(&pw.change[..n - 1], n);
                let ok = coords.iter().zip(&omega).all(|(c, w)| c * &pw.d == *w);
                let rec = json!({"n": n, "d": pw.d.to_string(), "omega": omega.iter().map(|x| x.to_string()).collect::<Vec<_>>()});
                rep.check(&ctx, "pure_wedge_round_trip", ok, &rec);
            }
            Err(x) => rep.check(&ctx, "pure_wedge_round_trip", false, &x.to_string()),
        }
    }
    Ok(rep)
}

fn geometry(args: &CorpusArgs) -> Result<Report> {
    let mut rep = Report::new("geometry");
    for (e, f) in load_fields(args)? {
        let g = e.geometry(&f).map_err(|x| x.to_string())?;
        let q = g.q();
        let rows: Vec<Vec<f64>> = (0..q.nrows()).map(|r| q.row(r).iter().copied().collect()).collect();
        let fibers = g.fibers().map(|fd| {
            json!({
                "fibers": fd, "relative_degree": fd.relative_degree(),
                "det_qtq_fiber_form": fd.det_qtq(),
            })
        });
        rep.note(format!("{}: k = {}, c = {:.9}", e.label, g.k(), g.c()));
        rep.results.push(json!({"label": e.label, "k": g.k(), "q": rows, "c": g.c(), "det_qtq": g.det_qtq(), "fibers": fibers}));
        let res = g.orthogonality_residual();
        rep.check(&e.label, "q_orthogonal", res < 1e-10, &json!({"residual": res}));
        let first = (0..q.nrows()).map(|r| (q[(r, 0)] - 1.0).abs()).fold(0.0, f64::max);
        rep.check(&e.label, "q_first_column_ones", first == 0.0, &json!({"max_dev": first}));
        if let Some(fd) = g.fibers() {
            let rel = (fd.det_qtq() - g.det_qtq()).abs() / g.det_qtq();
            rep.check(&e.label, "det_qtq_fiber_form", rel < 1e-10, &json!({"rel_diff": rel}));
        }
    }
    Ok(rep)
}

fn saddle_cmd(args: &CorpusArgs, y: Option<&[f64]>, t: f64) -> Result<Report> {
    let mut rep = Report::new("saddle");
    for (e, f) in load_fields(args)? {
        let g = e.geometry(&f).map_err(|x| x.to_string())?;
        let y = match y {
            Some(v) if v.len() == g.k() => v.to_vec(),
            Some(v) => return Err(format!("{}: --y has {} components, geometry has k = {}", e.label, v.len(), g.k())),
            None => saddle::y_at(&f, &g, None, t).map_err(|x| x.to_string())?,
        };
        let sum = GammaSum::per_place(&g);
        let n = sum.n();
        let big_y: Vec<f64> = y.iter().map(|v| n * v).collect();
        let res = match saddle::solve_saddle(&sum, &big_y, None) {
            Ok(r) => r,
            Err(x) => {
                rep.check(&e.label, "solve", false, &x.to_string());
                continue;
            }
        };
        rep.note(format!("{}: sigma = {:?}", e.label, res.sigma));
        rep.check(&e.label, "residual", res.residual < 1e-10, &json!({"residual": res.residual}));
        match saddle::saddle_bounds(&sum, &big_y, &res, big_y[0] / n) {
            Ok(checks) => {
                for c in checks {
                    rep.check(&e.label, &c.check, c.pass, &c);
                }
            }
            Err(x) => rep.check(&e.label, "bounds", false, &x.to_string()),
        }
        rep.results.push(json!({"label": e.label, "y": y, "saddle": res}));
    }
    Ok(rep)
}

struct Grid {
    m: Vec<f64>,
    kappa: Vec<f64>,
    r: Vec<f64>,
    d: Vec<f64>,
}

fn parse_grid(spec: &[String]) -> Result<Grid> {
    let mut g = Grid { m: vec![1000.0], kappa: vec![1.0], r: vec![0.51, 1.0], d: vec![1.0] };
    for item in spec {
        let (key, vals) = item.split_once('=').ok_or_else(|| format!("grid axis {item:?} is not key=v1,v2,..."))?;
        let vals: Vec<f64> = vals
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| format!("grid axis {key}: bad value {v:?}")))
            .collect::<Result<_>>()?;
        if vals.is_empty() {
            return Err(format!("grid axis {key} is empty"));
        }
        match key {
            "m" => g.m = vals,
            "kappa" => g.kappa = vals,
            "r" => g.r = vals,
            "D" | "d" => g.d = vals,
            _ => return Err(format!("unknown grid axis {key:?}")),
        }
    }
    if g.m.iter().any(|&m| m.fract() != 0.0 || m < 1.0) {
        return Err("grid m values must be positive integers".into());
    }
    Ok(g)
}

fn verify_asymptotics(
    grid: &[String],
    csv_path: Option<&Path>,
    rho_samples: usize,
    minor_samples: usize,
    moment_samples: usize,
    seed: u64,
) -> Result<Report> {
    let g = parse_grid(grid)?;
    let mut rep = Report::new("verify-asymptotics");
    let estimates = [LineEstimate::Estint1, LineEstimate::Estint2, LineEstimate::Int1est, LineEstimate::Int2est];
    let mut cells = Vec::new();
    for &m in &g.m {
        for &kappa in &g.kappa {
            for &r in &g.r {
                for &d in &g.d {
                    for which in estimates {
                        cells.push((m, kappa, r, d, which));
                    }
                }
            }
        }
    }
    let lines: Vec<_> = cells
        .par_iter()
        .map(|&(m, kappa, r, d, which)| asymptotics::onedim_gamma_line(m, kappa, r, d, which))
        .collect();
    let mut out: Box<dyn std::io::Write> = match csv_path {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| format!("creating {}: {e}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["m", "kappa", "r", "D", "estimate", "lhs", "rhs", "margin", "quad_error", "pass"]).map_err(|e| e.to_string())?;
        for (&(m, kappa, r, d, which), line) in cells.iter().zip(lines) {
            let c = line.map_err(|e| format!("m={m} kappa={kappa} r={r} D={d} {which:?}: {e}"))?;
            let ctx = format!("m={m},kappa={kappa},r={r},D={d}");
            w.write_record([
                m.to_string(),
                kappa.to_string(),
                r.to_string(),
                d.to_string(),
                format!("{which:?}"),
                format!("{:e}", c.lhs),
                format!("{:e}", c.rhs),
                format!("{:e}", c.rhs - c.lhs),
                format!("{:e}", c.quad_error),
                c.pass.to_string(),
            ])
            .map_err(|e| e.to_string())?;
            rep.check(&ctx, &format!("{which:?}"), c.pass, &json!({"estimate": which, "line": c}));
        }
        w.flush().map_err(|e| e.to_string())?;
    }

    // k = 1 contour closure on each (m, kappa, D) at every r >= 0.51
    for &m in &g.m {
        for &kappa in &g.kappa {
            for &d in &g.d {
                for &r in g.r.iter().filter(|&&r| r >= 0.51) {
                    let ctx = format!("m={m},kappa={kappa},r={r},D={d}");
                    match closure(m as usize, kappa, r, d) {
                        Ok((gap, budget)) => rep.check(&ctx, "contour_closure", gap <= budget, &json!({"gap": gap, "budget": budget})),
                        Err(x) => return Err(format!("{ctx}: {x}")),
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho_inputs: Vec<(f64, f64, f64)> = (0..rho_samples)
        .map(|i| {
            let a = 10f64.powf(rng.gen_range(-2.0..2.0));
            let spread = if i % 2 == 0 { 1.0 } else { 8.0 };
            (a, a * rng.gen_range(-spread..spread), rng.gen_range(0.5..=1.0))
        })
        .collect();
    let rho: Vec<_> = rho_inputs.par_iter().map(|&(a, b, k)| asymptotics::rho_claims(a, b, k)).collect();
    let mut rho_fail = None;
    for ((a, b, k), c) in rho_inputs.iter().zip(rho) {
        let c = c.map_err(|e| e.to_string())?;
        if !(c.claim_a && c.claim_b && c.claim_c && c.claim_d.unwrap_or(true)) && rho_fail.is_none() {
            rho_fail = Some(json!({"a": a, "b": b, "kappa": k, "claims": c}));
        }
    }
    rep.check("rho", "taylor_remainder_claims", rho_fail.is_none(), &json!({"samples": rho_samples, "first_failure": rho_fail}));

    let mut minor_worst: f64 = 0.0;
    let mut minor_done = 0;
    while minor_done < minor_samples {
        let rows = rng.gen_range(1..=6usize);
        let k = rng.gen_range(1..=rows.min(4));
        let mat = DMatrix::from_fn(rows, k, |_, _| rng.gen_range(-3.0..3.0));
        let a: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.05..5.0)).collect();
        let ts: Vec<Vec<f64>> = (0..200).map(|_| (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        match asymptotics::max_minor_property(&mat, &a, &ts) {
            Ok(r) => {
                minor_worst = minor_worst.max(r.worst_ratio);
                if !r.pass {
                    rep.check(&format!("minor{minor_done}"), "max_minor", false, &r);
                }
                minor_done += 1;
            }
            Err(asymptotics::AsymptoticsError::RankDeficient) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    rep.check("minor", "max_minor", minor_worst <= 1.0 + 1e-12, &json!({"samples": minor_samples, "worst_ratio": minor_worst}));

    let mut moment_worst: f64 = 0.0;
    for i in 0..moment_samples {
        let k = 1 + i % 2;
        let rows = rng.gen_range(k..=4usize);
        let q = DMatrix::from_fn(rows, k, |_, j| if j == 0 { 1.0 } else { rng.gen_range(-1.0..1.0) });
        let b: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.3..4.0)).collect();
        let w = rng.gen_range(0..rows);
        for (mom, pw) in [(Moment::Zero, 0), (Moment::Fourth(w), 4), (Moment::Sixth(w), 6)] {
            let v = asymptotics::gaussian_moments(&b, &q, mom).map_err(|e| e.to_string())?;
            let num = whitened_moment(&b, &q, w, pw)?;
            let rel = (num - v.exact).abs() / v.exact;
            moment_worst = moment_worst.max(rel);
            if !(rel < 1e-6 && v.exact <= v.upper * (1.0 + 1e-12)) {
                rep.check(&format!("moment{i}"), &format!("{mom:?}"), false, &json!({"value": v, "quadrature": num}));
            }
        }
    }
    rep.check("moments", "gaussian_moments", moment_worst < 1e-6, &json!({"samples": moment_samples, "worst_rel": moment_worst}));
    rep.note(format!("{} line cells, {} rho samples, {} minor instances, {} moment instances", cells.len(), rho_samples, minor_samples, moment_samples));
    Ok(rep)
}

/// `∫ S_w(t)^p e^{-½ Σ b_v S_v(t)²} dt` by nested quadrature after the change
/// of variables `t = L^{-T} z`, with `LLᵀ` the Cholesky factor of the form.
fn whitened_moment(b: &[f64], q: &DMatrix<f64>, w: usize, power: i32) -> Result<f64> {
    let k = q.ncols();
    let form = q.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(b)) * q;
    let chol = form.cholesky().ok_or("moment form is not positive definite")?;
    let linv_t = chol.l().transpose().try_inverse().ok_or("singular Cholesky factor")?;
    let row: Vec<f64> = (0..k).map(|i| (0..k).map(|j| q[(w, j)] * linv_t[(j, i)]).sum()).collect();
    let integrand = |z: &[f64]| {
        let s: f64 = row.iter().zip(z).map(|(a, x)| a * x).sum();
        let r2: f64 = z.iter().map(|x| x * x).sum();
        Complex64::new(s.powi(power) * (-0.5 * r2).exp(), 0.0)
    };
    let v = quad::nested(&integrand, &vec![(-12.0, 12.0); k], 8, Tolerance::new(1e-300, 1e-11)).map_err(|e| e.to_string())?;
    Ok(v.value.re / chol.l().diagonal().product())
}

/// Relative gap between the contour integral and `I_1`, and the error budget.
fn closure(m: usize, kappa: f64, sigma: f64, d: f64) -> std::result::Result<(f64, f64), asymptotics::AsymptoticsError> {
    let pd = PlaceDataSet::single(m, kappa)?;
    let y = [alpha_kappa_real(sigma, kappa, 1)?];
    let b = asymptotics::asymptotic_breakdown(&pd, &y, d)?;
    let c = asymptotics::direct_contour(&pd.gamma_sum(), &b.main.big_y, &b.main.sigma)?;
    let i1 = (b.main.log_i1 - c.log_scale).exp();
    Ok(((c.value.re - i1).abs() / i1, b.tails.i2_rel + b.tails.i3_rel + b.i4_rel))
}

fn bound(args: &CorpusArgs, d: f64, n0: f64) -> Result<Report> {
    if !(d > 0.0) || !(n0 > 0.0) {
        return Err(format!("--D and --N0 must be positive (got {d}, {n0})"));
    }
    let mut rep = Report::new("bound");
    for (e, f) in load_fields(args)?.into_iter().filter(|(e, _)| e.full_rank) {
        let g = e.geometry(&f).map_err(|x| x.to_string())?;
        match asymptotics::certified_lower_bound(&f, &g, n0, d) {
            Ok(r) => {
                for c in &r.checks {
                    rep.check(&e.label, &c.check, c.pass, c);
                }
                rep.note(format!("{}: bound {:.6e} <= covolume {:.6e}; flags: {}", e.label, r.bound, r.covolume, r.conditional_flags.join("; ")));
                rep.results.push(json!({"label": e.label, "report": r}));
            }
            Err(x) => rep.check(&e.label, "certified_lower_bound", false, &x.to_string()),
        }
    }
    if rep.results.is_empty() && rep.checks.is_empty() {
        return Err("no full-rank entries in the corpus".into());
    }
    Ok(rep)
}

fn load_polys(path: Option<&Path>) -> Result<Vec<PolyEntry>> {
    let entries = match path {
        Some(p) => corpus::parse_polys(&read(p)?).map_err(|e| e.to_string())?,
        None => corpus::builtin_polys(),
    };
    for e in &entries {
        e.polynomial().map_err(|x| x.to_string())?;
    }
    Ok(entries)
}

fn mahler_cmd(path: Option<&Path>, points: usize, boyd_a: Option<&[i64]>, boyd_k: &[u32], seed: u64) -> Result<Report> {
    if points < 16 {
        return Err("--points must be at least 16".into());
    }
    let opts = QmcOptions { points, seed, ..QmcOptions::default() };
    let mut rep = Report::new("mahler");
    for e in load_polys(path)? {
        let p = e.polynomial().map_err(|x| x.to_string())?;
        let ctx = e.label.clone();
        let flags = mahler::reciprocal_and_kronecker(&p).map_err(|x| x.to_string())?;
        let faces = match mahler::face_polynomials(&p, opts) {
            Ok(f) => f,
            Err(x) => {
                rep.check(&ctx, "measure", false, &x.to_string());
                continue;
            }
        };
        let m = faces.measure.clone();
        rep.check(&ctx, "face_inequality", faces.pass, &json!({"worst_margin": faces.worst_margin, "faces": faces.faces.len()}));
        let mut extra = json!(null);
        if p.vars() == 2 {
            let a = mahler::mahler_multivariate(&p, Method::Qmc, opts).map_err(|x| x.to_string())?;
            let b = mahler::mahler_multivariate(&p, Method::FiberJensen, opts).map_err(|x| x.to_string())?;
            let gap = (a.value - b.value).abs();
            let tol = 3.0 * (a.error + b.error) + 1e-6;
            rep.check(&ctx, "qmc_vs_fiber_jensen", gap <= tol, &json!({"qmc": a, "fiber_jensen": b, "gap": gap, "tolerance": tol}));
            extra = json!({"qmc": a, "fiber_jensen": b});
        }
        let boyd = match boyd_a {
            Some(a) if a.len() == p.vars() => Some(mahler::boyd_limit(&p, a, boyd_k, m.value).map_err(|x| x.to_string())?),
            Some(a) => return Err(format!("{ctx}: --boyd-a has {} entries, polynomial has {} variables", a.len(), p.vars())),
            None => None,
        };
        rep.note(format!("{ctx}: m = {:.10} ± {:.1e} ({:?})", m.value, m.error, m.method));
        rep.results.push(json!({
            "label": ctx, "measure": m, "flags": flags, "methods": extra,
            "polytope_dim": faces.polytope_dim, "faces": faces.faces, "boyd": boyd,
        }));
    }
    Ok(rep)
}

fn bloch(z: &[f64], samples: usize, seed: u64) -> Result<Report> {
    if z.len() % 2 != 0 {
        return Err("--z takes re,im pairs".into());
    }
    let mut rep = Report::new("bloch");
    for pair in z.chunks(2) {
        let w = Complex64::new(pair[0], pair[1]);
        let v = mahler::bloch_wigner(w);
        rep.note(format!("D({} + {}i) = {v:.15}", w.re, w.im));
        rep.results.push(json!({"z": [w.re, w.im], "D": v}));
    }
    let relations = [
        (Relation::Antisymmetry, samples, 1e-12),
        (Relation::FiveTerm, samples.div_ceil(10), 1e-10),
        (Relation::Identity32, 1, 1e-9),
    ];
    for (i, (kind, n, tol)) in relations.into_iter().enumerate() {
        let c = mahler::relation_check(kind, n, seed.wrapping_add(i as u64));
        rep.check("relations", &format!("{kind:?}"), c.max_abs < tol, &json!({"result": c, "tolerance": tol}));
    }
    Ok(rep)
}
