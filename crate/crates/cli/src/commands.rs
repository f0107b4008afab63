use finitegap::hill::GleProblem;
use finitegap::poly::min_gap;
use finitegap::premodular::{
    boundary_nonvanishing_scan, boundary_taus, classify_f0, f0_seed_lattice, rs_grid,
    transformation_check, triangle, z_n, zero_find, Sl2,
};
use finitegap::spectral::{make_lattice, spectral_report, summarize_scan, tau_scan, ConditionClass};
use finitegap::{Lattice, MultiplicityTuple, Tolerances};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{resolve_tolerances, Cli, Command, PremodularArgs, PremodularOp, Range};
use crate::output::{cell, emit, fmt_complex, json_complex, json_num, write_to, Failure, Report, Status};

/// Largest relative coefficient distance accepted between the two routes.
const ROUTE_AGREEMENT: f64 = 1e-8;
/// Largest relative error accepted in a transformation law.
const TRANSFORM_TOL: f64 = 1e-8;

pub fn run(cli: &Cli) -> Result<Status, Failure> {
    let tol = resolve_tolerances(&cli.common.tol).map_err(Failure::usage)?;
    let report = match &cli.command {
        Command::Qpoly {
            n,
            tau,
            no_cross_check,
        } => qpoly(n, *tau, !no_cross_check, &tol)?,
        Command::Scan { n, b, cross_check } => scan(n, b, *cross_check, &tol)?,
        Command::Bands { n, tau, e, trace } => {
            let (report, trace_rows) = bands(n, *tau, e, &tol)?;
            if let Some(path) = trace {
                let mut text = String::from("E,delta1\n");
                for (x, d) in trace_rows {
                    text.push_str(&format!("{},{}\n", cell(x), cell(d)));
                }
                write_to(Some(path), text.as_bytes())?;
            }
            report
        }
        Command::Unitary { n, tau, re, im } => unitary(n, *tau, re, im, &tol)?,
        Command::Premodular(a) => premodular(a, &tol)?,
    };
    emit(&cli.common, &tol, report)
}

fn qpoly(n: &MultiplicityTuple, tau: Complex64, cross: bool, tol: &Tolerances) -> Result<Report, Failure> {
    let l = make_lattice(tau, tol)?;
    let r = spectral_report(&l, n, tol, cross)?;
    let p = &r.provenance;
    let route_ok = p.route_discrepancy.is_none_or(|d| d <= ROUTE_AGREEMENT);
    let z_ok = p.phi_z_discrepancy <= tol.z_consistency;
    let residuals_ok = r.roots.residuals_ok();

    let mut rows = Vec::new();
    for (k, c) in r.q.coeffs().iter().enumerate() {
        rows.push(vec!["coefficient".into(), k.to_string(), fmt_complex(*c), String::new()]);
    }
    for (j, root) in r.roots.roots.iter().enumerate() {
        rows.push(vec![
            "root".into(),
            j.to_string(),
            fmt_complex(root.value),
            cell(root.residual),
        ]);
    }
    let roots: Vec<Value> = r
        .roots
        .roots
        .iter()
        .zip(&r.roots.residual_bounds)
        .map(|(x, b)| json!({ "value": json_complex(x.value), "residual": x.residual, "residual_bound": b }))
        .collect();
    Ok(Report {
        command: "qpoly",
        input: json!({ "n": n.n(), "tau": json_complex(tau), "cross_check": cross }),
        headers: vec!["kind", "index", "value", "residual"],
        rows,
        result: json!({
            "genus": r.genus,
            "degree": r.q.degree(),
            "condition_class": n.condition_class().as_str(),
            "coefficients": r.q.coeffs().iter().map(|c| json_complex(*c)).collect::<Vec<_>>(),
            "roots": roots,
            "classification": r.classification().as_str(),
            "provenance": {
                "phi_z_discrepancy": p.phi_z_discrepancy,
                "phi_kernel_gap": p.phi_kernel_gap,
                "route_discrepancy": p.route_discrepancy,
                "factorization_tuple": p.factorization_tuple.map(|t| t.n()),
                "factorization_note": p.factorization_note,
            },
        }),
        summary: json!({
            "classification": r.classification().as_str(),
            "route_agreement": route_ok,
            "z_consistency": z_ok,
            "residuals": residuals_ok,
            "pass": route_ok && z_ok && residuals_ok,
        }),
        status: Status::from_pass(route_ok && z_ok && residuals_ok),
    })
}

fn scan(n: &MultiplicityTuple, b: &Range, cross: bool, tol: &Tolerances) -> Result<Report, Failure> {
    let points = tau_scan(n, b.start, b.stop, b.count, tol, cross)?;
    let summary = summarize_scan(n, &points);
    let mut rows = Vec::with_capacity(points.len());
    let mut result = Vec::with_capacity(points.len());
    for p in &points {
        match &p.report {
            Ok(r) => {
                let values = r.roots.values();
                let gap = min_gap(&values);
                let im = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
                let route = r.provenance.route_discrepancy;
                rows.push(vec![
                    cell(p.b),
                    r.classification().as_str().into(),
                    r.genus.to_string(),
                    cell(gap),
                    cell(im),
                    route.map(cell).unwrap_or_default(),
                    String::new(),
                ]);
                result.push(json!({
                    "b": p.b,
                    "classification": r.classification().as_str(),
                    "genus": r.genus,
                    "min_gap": json_num(gap),
                    "max_abs_imag": im,
                    "route_discrepancy": route,
                    "roots": values.iter().map(|v| json_complex(*v)).collect::<Vec<_>>(),
                }));
            }
            Err(e) => {
                let mut row = vec![cell(p.b)];
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(e.to_string());
                rows.push(row);
                result.push(json!({ "b": p.b, "error": e.to_string() }));
            }
        }
    }
    let pass = summary.expectation_met.unwrap_or(summary.errors == 0);
    Ok(Report {
        command: "scan",
        input: json!({ "n": n.n(), "b": [b.start, b.stop, b.count], "cross_check": cross }),
        headers: vec![
            "b",
            "classification",
            "genus",
            "min_gap",
            "max_abs_imag",
            "route_discrepancy",
            "error",
        ],
        rows,
        result: Value::Array(result),
        summary: json!({
            "condition_class": n.condition_class().as_str(),
            "points": summary.points,
            "real_distinct": summary.real_distinct,
            "errors": summary.errors,
            "exceptional_b": summary.exceptional,
            "expectation_met": summary.expectation_met,
            "pass": pass,
        }),
        status: Status::from_pass(pass),
    })
}

fn problem(n: &MultiplicityTuple, tau: Complex64, tol: &Tolerances) -> Result<GleProblem, Failure> {
    Ok(GleProblem::new(make_lattice(tau, tol)?, *n, *tol)?)
}

fn bands(
    n: &MultiplicityTuple,
    tau: Complex64,
    e: &Range,
    tol: &Tolerances,
) -> Result<(Report, Vec<(f64, f64)>), Failure> {
    if e.count < 2 || e.start == e.stop {
        return Err(Failure::usage("--E needs START < STOP and COUNT >= 2"));
    }
    let p = problem(n, tau, tol)?;
    let r = p.stability_set_1d(e.start, e.stop, e.count)?;
    let rows = r
        .bands
        .iter()
        .enumerate()
        .map(|(i, b)| vec![i.to_string(), cell(b.lo), cell(b.hi)])
        .collect();
    let trace: Vec<(f64, f64)> = e
        .values()
        .par_iter()
        .map(|&x| (x, p.delta1(Complex64::new(x, 0.0)).map(|d| d.re).unwrap_or(f64::NAN)))
        .collect();
    let report = Report {
        command: "bands",
        input: json!({ "n": n.n(), "tau": json_complex(tau), "E": [e.start, e.stop, e.count] }),
        headers: vec!["band", "lo", "hi"],
        rows,
        result: json!({
            "bands": r.bands.iter().map(|b| json!({ "lo": json_num(b.lo), "hi": json_num(b.hi) })).collect::<Vec<_>>(),
            "edges": r.edges,
            "roots_in_range": r.roots,
        }),
        summary: json!({
            "bands": r.bands.len(),
            "semi_infinite": r.semi_infinite,
            "truncated_hi": r.truncated_hi,
            "max_edge_error": r.max_edge_error,
            "max_imag_delta": r.max_imag_delta,
            "consistent": r.consistent,
            "pass": r.consistent,
        }),
        status: Status::from_pass(r.consistent),
    };
    Ok((report, trace))
}

fn unitary(
    n: &MultiplicityTuple,
    tau: Complex64,
    re: &Range,
    im: &Range,
    tol: &Tolerances,
) -> Result<Report, Failure> {
    let p = problem(n, tau, tol)?;
    let grid: Vec<Complex64> = re
        .values()
        .iter()
        .flat_map(|&x| im.values().into_iter().map(move |y| Complex64::new(x, y)))
        .collect();
    let probes: Vec<_> = grid.par_iter().map(|&e| (e, p.unitarity_probe(e))).collect();
    let (mut count, mut at_root, mut errors) = (0usize, 0usize, 0usize);
    let mut rows = Vec::with_capacity(probes.len());
    let mut result = Vec::with_capacity(probes.len());
    for (e, pr) in &probes {
        match pr {
            Ok(u) => {
                count += usize::from(u.unitary);
                at_root += usize::from(u.at_root);
                rows.push(vec![
                    cell(e.re),
                    cell(e.im),
                    fmt_complex(u.delta1),
                    fmt_complex(u.delta2),
                    u.at_root.to_string(),
                    u.unitary.to_string(),
                    String::new(),
                ]);
                result.push(json!({
                    "E": json_complex(*e),
                    "delta1": json_complex(u.delta1),
                    "delta2": json_complex(u.delta2),
                    "at_root": u.at_root,
                    "unitary": u.unitary,
                }));
            }
            Err(err) => {
                errors += 1;
                let mut row = vec![cell(e.re), cell(e.im)];
                row.extend(std::iter::repeat_n(String::new(), 4));
                row.push(err.to_string());
                rows.push(row);
                result.push(json!({ "E": json_complex(*e), "error": err.to_string() }));
            }
        }
    }
    // On a rectangular torus a NEITHER tuple admits no unitary energy.
    let expect_none =
        p.lattice().is_rectangular() && n.condition_class() == ConditionClass::Neither;
    let pass = errors == 0 && (!expect_none || count == 0);
    Ok(Report {
        command: "unitary",
        input: json!({
            "n": n.n(),
            "tau": json_complex(tau),
            "re": [re.start, re.stop, re.count],
            "im": [im.start, im.stop, im.count],
        }),
        headers: vec!["re", "im", "delta1", "delta2", "at_root", "unitary", "error"],
        rows,
        result: Value::Array(result),
        summary: json!({
            "points": grid.len(),
            "unitary": count,
            "at_root": at_root,
            "errors": errors,
            "expect_none": expect_none,
            "pass": pass,
        }),
        status: Status::from_pass(pass),
    })
}

fn need<T: Copy>(v: Option<T>, flag: &str, op: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::usage(format!("--{flag} is required for --op {op}")))
}

fn premodular(a: &PremodularArgs, tol: &Tolerances) -> Result<Report, Failure> {
    match a.op {
        PremodularOp::BoundaryScan => boundary_scan(a, tol),
        PremodularOp::ZeroFind => zero_search(a, tol),
        PremodularOp::Transform => transform(a, tol),
        PremodularOp::Heatmap => heatmap(a, tol),
    }
}

fn boundary_scan(a: &PremodularArgs, tol: &Tolerances) -> Result<Report, Failure> {
    let rs = rs_grid(a.grid, a.grid);
    let taus = boundary_taus(a.per_piece, a.h_min, a.h_max)?;
    let scan = boundary_nonvanishing_scan(a.n, &rs, &taus, a.floor, tol)?;
    let per_tau: Vec<Result<(f64, f64, f64), String>> = taus
        .par_iter()
        .map(|&t| {
            let l = Lattice::with_pole_guard(t, tol.truncation, tol.pole_guard).map_err(|e| e.to_string())?;
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for &(r, s) in &rs {
                let v = z_n(&l, r, s, a.n).map_err(|e| e.to_string())?.norm();
                if v < best.0 {
                    best = (v, r, s);
                }
            }
            Ok(best)
        })
        .collect();
    let mut rows = Vec::with_capacity(taus.len());
    let mut result = Vec::with_capacity(taus.len());
    for (t, m) in taus.iter().zip(per_tau) {
        let loc = classify_f0(*t, tol.f0_boundary).location.as_str();
        match m {
            Ok((v, r, s)) => {
                rows.push(vec![fmt_complex(*t), loc.into(), cell(v), cell(r), cell(s)]);
                result.push(json!({ "tau": json_complex(*t), "location": loc, "min_abs": v, "r": r, "s": s }));
            }
            Err(e) => {
                rows.push(vec![fmt_complex(*t), loc.into(), String::new(), String::new(), String::new()]);
                result.push(json!({ "tau": json_complex(*t), "location": loc, "error": e }));
            }
        }
    }
    let (ar, as_, at) = scan.argmin;
    Ok(Report {
        command: "premodular",
        input: json!({
            "op": "boundary-scan",
            "n": a.n,
            "grid": a.grid,
            "per_piece": a.per_piece,
            "h_min": a.h_min,
            "h_max": a.h_max,
            "floor": a.floor,
        }),
        headers: vec!["tau", "location", "min_abs", "r", "s"],
        rows,
        result: Value::Array(result),
        summary: json!({
            "points": scan.points,
            "min_abs": scan.min_abs,
            "argmin": { "r": ar, "s": as_, "tau": json_complex(at) },
            "floor": scan.floor,
            "below_floor": scan.below_floor,
            "pass": scan.passed(),
        }),
        status: Status::from_pass(scan.passed()),
    })
}

fn zero_search(a: &PremodularArgs, tol: &Tolerances) -> Result<Report, Failure> {
    let r = need(a.r, "r", "zero-find")?;
    let s = need(a.s, "s", "zero-find")?;
    let mut seeds = f0_seed_lattice(a.seeds);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    for _ in 0..a.random_seeds {
        seeds.push(Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(0.5..2.5)));
    }
    let runs = seeds
        .par_iter()
        .map(|&t| zero_find(a.n, r, s, t, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let mut zeros: Vec<Complex64> = Vec::new();
    for z in runs.iter().filter(|z| z.inside_f0()) {
        if zeros.iter().all(|w| (w - z.tau).norm() > 1e-6) {
            zeros.push(z.tau);
        }
    }
    let rows = runs
        .iter()
        .map(|z| {
            vec![
                fmt_complex(z.seed),
                fmt_complex(z.tau),
                cell(z.residual),
                z.iterations.to_string(),
                z.converged.to_string(),
                z.location.as_str().into(),
            ]
        })
        .collect();
    let result = runs
        .iter()
        .map(|z| {
            json!({
                "seed": json_complex(z.seed),
                "tau": json_complex(z.tau),
                "residual": json_num(z.residual),
                "iterations": z.iterations,
                "converged": z.converged,
                "location": z.location.as_str(),
            })
        })
        .collect();
    Ok(Report {
        command: "premodular",
        input: json!({
            "op": "zero-find",
            "n": a.n,
            "r": r,
            "s": s,
            "seeds": a.seeds,
            "random_seeds": a.random_seeds,
            "seed": a.seed,
        }),
        headers: vec!["seed", "tau", "residual", "iterations", "converged", "location"],
        rows,
        result: Value::Array(result),
        summary: json!({
            "triangle": triangle(r, s),
            "runs": runs.len(),
            "converged": runs.iter().filter(|z| z.converged).count(),
            "zeros_in_f0": zeros.iter().map(|z| json_complex(*z)).collect::<Vec<_>>(),
            "pass": true,
        }),
        status: Status::Pass,
    })
}

fn parse_gamma(s: &str) -> Result<Sl2, Failure> {
    let v: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::usage(format!("--gamma {s:?}: {e}")))?;
    if v.len() != 4 {
        return Err(Failure::usage(format!("--gamma needs four integers, got {s:?}")));
    }
    Ok(Sl2::new(v[0], v[1], v[2], v[3])?)
}

fn transform(a: &PremodularArgs, tol: &Tolerances) -> Result<Report, Failure> {
    let r = need(a.r, "r", "transform")?;
    let s = need(a.s, "s", "transform")?;
    let tau = need(a.tau, "tau", "transform")?;
    let g = parse_gamma(a.gamma.as_deref().ok_or_else(|| Failure::usage("--gamma is required for --op transform"))?)?;
    let chk = transformation_check(&g, tau, r, s, a.n, tol)?;
    let pass = chk.relative_error <= TRANSFORM_TOL;
    Ok(Report {
        command: "premodular",
        input: json!({ "op": "transform", "n": a.n, "r": r, "s": s, "tau": json_complex(tau), "gamma": g.entries() }),
        headers: vec!["lhs", "rhs", "relative_error"],
        rows: vec![vec![fmt_complex(chk.lhs), fmt_complex(chk.rhs), cell(chk.relative_error)]],
        result: json!({ "lhs": json_complex(chk.lhs), "rhs": json_complex(chk.rhs), "relative_error": chk.relative_error }),
        summary: json!({ "relative_error": chk.relative_error, "threshold": TRANSFORM_TOL, "pass": pass }),
        status: Status::from_pass(pass),
    })
}

fn heatmap(a: &PremodularArgs, tol: &Tolerances) -> Result<Report, Failure> {
    let r = need(a.r, "r", "heatmap")?;
    let s = need(a.s, "s", "heatmap")?;
    let re = need(a.re, "re", "heatmap")?;
    let im = need(a.im, "im", "heatmap")?;
    if im.start <= 0.0 {
        return Err(Failure::usage("--im must stay in the upper half plane"));
    }
    let grid: Vec<Complex64> = re
        .values()
        .iter()
        .flat_map(|&x| im.values().into_iter().map(move |y| Complex64::new(x, y)))
        .collect();
    let vals: Vec<Result<f64, String>> = grid
        .par_iter()
        .map(|&t| {
            Lattice::with_pole_guard(t, tol.truncation, tol.pole_guard)
                .and_then(|l| z_n(&l, r, s, a.n))
                .map(|z| z.norm())
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut rows = Vec::with_capacity(grid.len());
    let mut result = Vec::with_capacity(grid.len());
    let mut min = f64::INFINITY;
    for (t, v) in grid.iter().zip(&vals) {
        match v {
            Ok(x) => {
                min = min.min(*x);
                rows.push(vec![cell(t.re), cell(t.im), cell(*x), String::new()]);
                result.push(json!({ "tau": json_complex(*t), "abs_z": x }));
            }
            Err(e) => {
                rows.push(vec![cell(t.re), cell(t.im), String::new(), e.clone()]);
                result.push(json!({ "tau": json_complex(*t), "error": e }));
            }
        }
    }
    let errors = vals.iter().filter(|v| v.is_err()).count();
    Ok(Report {
        command: "premodular",
        input: json!({
            "op": "heatmap",
            "n": a.n,
            "r": r,
            "s": s,
            "re": [re.start, re.stop, re.count],
            "im": [im.start, im.stop, im.count],
        }),
        headers: vec!["re", "im", "abs_z", "error"],
        rows,
        result: Value::Array(result),
        summary: json!({ "points": grid.len(), "errors": errors, "min_abs": json_num(min), "pass": errors == 0 }),
        status: Status::from_pass(errors == 0),
    })
}
