//! The acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::path::PathBuf;
use std::process::Command;

use common::{fd_first, fd_second, random_point, random_unit, rel_err, rng, seeded_vars, Comp, RandomPair};
use finsler::ab::{ab_tensors, ricci_identities_from, ricci_identity_residuals, theta_decomposition, OneFormData, RiemannData};
use finsler::cli::load_scenario;
use finsler::expr::ScalarField;
use finsler::family::{
    assemble_finsler, closed_form_k, constant_b_rigidity, construct_alpha_beta, positivity_check, FamilyParams, Sign,
};
use finsler::geometry::{bh_volume_factor, curvature_sample, FinslerFunction};
use finsler::jet::JetSpace;
use finsler::residual::normalized;
use finsler::verify::{
    numeric_flag_curvature, proof_chain_residuals, sample_points, theorem1_suite, ProofScalars, Scenario, Verdict,
};
use rand::Rng;

type Outcome = Result<String, String>;

fn path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "scenarios", name].iter().collect()
}

fn bundled(name: &str) -> Scenario {
    load_scenario(&path(name)).unwrap()
}

fn within(what: &str, value: f64, tol: f64) -> Outcome {
    let line = format!("{what} = {value:.3e} (tolerance {tol:.0e})");
    if value <= tol {
        Ok(line)
    } else {
        Err(line)
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(Result::is_ok);
    let text = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED {e}"))).collect::<Vec<_>>().join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn suite_check(report: &finsler::verify::VerificationReport, name: &str, tol: f64) -> Outcome {
    match report.check(name) {
        Some(c) if c.verdict == Verdict::Pass => within(name, c.max, tol),
        Some(c) => Err(format!("{name} failed with max {:.3e}", c.max)),
        None => Err(format!("{name} missing from report")),
    }
}

fn positive_suite() -> Outcome {
    let sc = bundled("square_root_annulus.json");
    let report = theorem1_suite(&sc).map_err(|e| e.to_string())?;
    let e = &report.environment;
    if e.points != 200 || e.directions != 24 {
        return Err(format!("sampled {} points x {} directions", e.points, e.directions));
    }
    let mut parts = vec![
        suite_check(&report, "s_curvature", 1e-7),
        suite_check(&report, "einstein", 1e-6),
        suite_check(&report, "closed_form_k", 1e-6),
        suite_check(&report, "r00", 1e-8),
        suite_check(&report, "killing", 1e-8),
    ];
    if !report.all_passed() {
        parts.push(Err(format!("failed: {:?}", report.failed().map(|c| &c.name).collect::<Vec<_>>())));
    }
    all(parts)
}

fn non_ricci_flat_witness() -> Outcome {
    let sc = bundled("square_root_annulus.json");
    let mut worst = 0.0f64;
    let mut r = rng(2);
    for t in [0.0f64, 0.7, 2.0, 4.1] {
        let x = [0.5 * t.cos(), 0.5 * t.sin()];
        for _ in 0..4 {
            let k = numeric_flag_curvature(&sc, x, random_unit(&mut r)).map_err(|e| e.to_string())?;
            worst = worst.max((k + 1.1547005).abs());
        }
    }
    let report = theorem1_suite(&sc).map_err(|e| e.to_string())?;
    let min_abs = report.summary.ok_or("no curvature summary")?.k_min_abs;
    let witness = format!("min |K| = {min_abs:.6}");
    all(vec![within("|K(|x|=0.5) + 1.1547005|", worst, 1e-6), if min_abs >= 1.0 { Ok(witness) } else { Err(witness) }])
}

fn ricci_flat_instance() -> Outcome {
    let report = theorem1_suite(&bundled("ricci_flat_annulus.json")).map_err(|e| e.to_string())?;
    let failed: Vec<_> = report.failed().map(|c| c.name.clone()).collect();
    let k_max = report.summary.ok_or("no curvature summary")?.k_max_abs;
    let checks = format!("{} checks, failed {failed:?}", report.checks.len());
    all(vec![if failed.is_empty() { Ok(checks) } else { Err(checks) }, within("max |K|", k_max, 1e-7)])
}

fn square_root_identity() -> Outcome {
    let p = FamilyParams::new(-1.0, 0.0, Sign::Plus).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=3600 {
        let s = -0.9 + 1.8 * i as f64 / 3600.0;
        worst = worst.max((p.phi(s).map_err(|e| e.to_string())? - (1.0 + s).sqrt()).abs());
    }
    within("max |phi(s) - sqrt(1 + s)|", worst, 1e-10)
}

fn positivity() -> Outcome {
    let mut r = rng(31);
    let mut pd = 0;
    for _ in 0..100 {
        let k1: f64 = r.gen_range(-2.0..2.0);
        let k2: f64 = r.gen_range(k1..2.0).max(k1 + 1e-3);
        let b: f64 = r.gen_range(0.0..1.5);
        let v = positivity_check(&FamilyParams::new(k1, k2, Sign::Plus).unwrap(), b);
        if v.pd != v.sampled_positive() {
            return Err(format!("verdict disagrees with sampling at k1={k1}, k2={k2}, b={b}"));
        }
        if v.pd {
            pd += 1;
            if !v.polynomial_min.iter().all(|m| *m > 0.0) {
                return Err(format!("non-positive quadratic minimum at k1={k1}, k2={k2}, b={b}"));
            }
        }
    }
    Ok(format!("100 draws agree ({pd} positive definite)"))
}

fn ricci_identities() -> Outcome {
    let mut r = rng(77);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let pair = RandomPair::new(&mut r);
        let (rm, of) = pair.at(random_point(&mut r));
        worst = worst.max(ricci_identity_residuals(&rm, &of, random_unit(&mut r)).map_err(|e| e.to_string())?.max());
    }
    within("max Ricci-identity residual over 20 pairs", worst, 1e-6)
}

fn theta_decompositions() -> Outcome {
    let mut r = rng(79);
    let (mut worst, mut n) = (0.0f64, 0);
    while n < 20 {
        let pair = RandomPair::new(&mut r);
        let (rm, of) = pair.at(random_point(&mut r));
        if ab_tensors(&rm, &of).map_err(|e| e.to_string())?.b2 <= 1e-3 {
            continue;
        }
        n += 1;
        for _ in 0..3 {
            let d = theta_decomposition(&rm, &of, random_unit(&mut r)).map_err(|e| e.to_string())?;
            worst = worst.max(d.max_residual());
        }
    }
    within("max theta-decomposition residual over 20 pairs", worst, 1e-8)
}

fn proof_chain() -> Outcome {
    let sc = bundled("square_root_annulus.json");
    let (points, _) = sample_points(&sc).map_err(|e| e.to_string())?;
    let mut r = rng(8);
    let (mut chain, mut consistency) = (0.0f64, 0.0f64);
    for &x in points.iter().take(20) {
        for (_, v) in proof_chain_residuals(&sc, x, random_unit(&mut r)).map_err(|e| e.to_string())? {
            chain = chain.max(v);
        }
        let (rm, of) = construct_alpha_beta(sc.params, &sc.structure, x).map_err(|e| e.to_string())?;
        let t = ab_tensors(&rm, &of).map_err(|e| e.to_string())?;
        let via_lambda = ProofScalars::new(&sc.params, t.b2, t.theta, rm.lambda, t.s_norm_sq()).flag_curvature(&sc.params);
        let closed = closed_form_k(&sc.params, &sc.structure, x).map_err(|e| e.to_string())?;
        consistency = consistency.max(normalized(via_lambda, closed, &[]));
    }
    all(vec![
        within("max chain residual at 20 points", chain, 1e-6),
        within("closed-form K vs lambda form", consistency, 1e-8),
    ])
}

fn constant_b_rigidity_check() -> Outcome {
    let sc = bundled("constant_b.json");
    let (points, _) = sample_points(&sc).map_err(|e| e.to_string())?;
    let mut r = rng(9);
    let (mut flat, mut parallel, mut k) = (0.0f64, 0.0f64, 0.0f64);
    for &x in &points {
        let rg = constant_b_rigidity(&sc.params, &sc.structure, x).map_err(|e| e.to_string())?;
        flat = flat.max(rg.flatness);
        parallel = parallel.max(rg.parallel);
        k = k.max(numeric_flag_curvature(&sc, x, random_unit(&mut r)).map_err(|e| e.to_string())?.abs());
    }
    all(vec![within("|lambda|", flat, 1e-9), within("max |b_i|j|", parallel, 1e-9), within("max |K|", k, 1e-9)])
}

fn jet_oracles() -> Outcome {
    let s = JetSpace::curvature();
    let mut r = rng(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let comp = loop {
            let c = Comp::random(&mut r, 4);
            if !matches!(c, Comp::Var(_) | Comp::Const(_)) {
                break c;
            }
        };
        let p: [f64; 4] = std::array::from_fn(|_| r.gen_range(-0.8..0.8));
        let jet = comp.eval_jet(&seeded_vars(&s, p));
        let f = |q: [f64; 4]| comp.eval_f(q);
        let noise = 1e-3 * (1.0 + f(p).abs());
        for a in 0..4 {
            let mut idx = [0; 4];
            idx[a] = 1;
            worst = worst.max(rel_err(jet.partial(idx).unwrap(), fd_first(&f, p, a, 1e-4), noise));
            for b in a..4 {
                let mut idx = idx;
                idx[b] += 1;
                worst = worst.max(rel_err(jet.partial(idx).unwrap(), fd_second(&f, p, a, b, 1e-3), noise));
            }
        }
    }

    let sc = bundled("square_root_annulus.json");
    let f = assemble_finsler(sc.params, sc.structure.clone());
    let mut homog = 0.0f64;
    for x in [[0.5, 0.2], [-0.3, 0.6], [0.1, -0.7]] {
        let vol = bh_volume_factor(&f as &dyn FinslerFunction, x).map_err(|e| e.to_string())?;
        for _ in 0..3 {
            let y = random_unit(&mut r);
            let base = curvature_sample(&f, x, y, Some(&vol)).map_err(|e| e.to_string())?;
            for lam in [0.3, 2.0, 7.5] {
                let c = curvature_sample(&f, x, [lam * y[0], lam * y[1]], Some(&vol)).map_err(|e| e.to_string())?;
                let unit = base.f;
                homog = homog.max(rel_err(c.f, lam * base.f, unit * lam));
                for i in 0..2 {
                    homog = homog.max(rel_err(c.spray[i], lam * lam * base.spray[i], unit * unit * lam * lam));
                }
                homog = homog.max(rel_err(c.flag, base.flag, 1.0));
                homog = homog.max(rel_err(c.s, lam * base.s, unit * lam));
            }
        }
    }
    all(vec![
        within("jet vs finite differences (relative)", worst, 1e-5),
        within("homogeneity of F, G, K, S (relative)", homog, 1e-9),
    ])
}

fn negative_controls() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("report.json");
    let status = Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(["verify", path("negative_control_perturbed_B.json").to_str().unwrap(), "--json-out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?
        .status;
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let verdict = |name: &str| report["checks"][name]["verdict"].as_str().unwrap_or("missing").to_string();
    let cli = format!(
        "exit {:?}, structure {}, s_curvature {}",
        status.code(),
        verdict("structure"),
        verdict("s_curvature")
    );
    let cli_ok = status.code() == Some(1) && verdict("structure") == "fail" && verdict("s_curvature") == "fail";

    let sf = |t: &str| ScalarField::parse(t).unwrap();
    let x = [0.1, 0.2];
    let z = sf("0");
    let g = sf("4/(1 + x1^2 + x2^2)^2");
    let rm = RiemannData::from_fields(&[[g.clone(), z.clone()], [z, g]], x).map_err(|e| e.to_string())?;
    let of = OneFormData::from_fields(&[sf("3 + x1*x2"), sf("2 - x1^2")], x).map_err(|e| e.to_string())?;
    let t = ab_tensors(&rm, &of).map_err(|e| e.to_string())?;
    let clean = ricci_identities_from(&t, &rm, [0.6, 0.8]).max();
    let corrupted = ricci_identities_from(&t, &rm.with_scaled_curvature(1.01), [0.6, 0.8]).max();
    let probe = format!("curvature scaled by 1.01: residual {corrupted:.3e} (clean {clean:.1e})");
    all(vec![
        if cli_ok { Ok(cli) } else { Err(cli) },
        if corrupted > 1e-3 && clean < 1e-12 { Ok(probe) } else { Err(probe) },
    ])
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.json"));
        Command::new(env!("CARGO_BIN_EXE_finsler"))
            .args(["verify", path("square_root_annulus.json").to_str().unwrap(), "--json-out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        reports.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let line = format!("two runs, {} bytes each", reports[0].len());
    if reports[0] == reports[1] {
        Ok(line + ", identical")
    } else {
        Err(line + ", different")
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("positive suite on the square-root annulus", positive_suite),
        ("non-Ricci-flat witness", non_ricci_flat_witness),
        ("Ricci-flat instance", ricci_flat_instance),
        ("square-root identity", square_root_identity),
        ("positivity verdicts", positivity),
        ("Ricci identities for random pairs", ricci_identities),
        ("theta decomposition", theta_decompositions),
        ("proof chain", proof_chain),
        ("constant-B rigidity", constant_b_rigidity_check),
        ("jet integrity and homogeneity", jet_oracles),
        ("negative controls", negative_controls),
        ("deterministic reports", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name} [{detail}] ({secs:.1}s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {:>2}: {name} [{detail}] ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
