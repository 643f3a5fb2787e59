//! One function per subcommand. Each returns the process exit status.

use mereokit::dynamics::{distinct_value_count, entropy_orbit, orbit_grid};
use mereokit::hilbert::{haar_state, haar_unitary, max_abs_diff, CVector};
use mereokit::io::{matrix_to_pairs, vector_to_pairs};
use mereokit::kinds::{
    build_probe_set, fingerprint as fingerprint_of, fingerprints_equal, gram_matrix,
    gram_orbit_witness, hsf_orbit_witness, Determination,
};
use mereokit::locality::locality_report;
use mereokit::models::scrambled_klocal;
use mereokit::search::{certify, search as run_search, SearchResult};
use mereokit::tps::{self, Tps};
use mereokit::{Error, HermitianOp, Stream};
use serde_json::{json, Value};

use crate::config::{
    role, DualscanParams, FamilyPartner, FingerprintParams, KindsParams, OrbitParams, PairPartner,
    ProfileParams, SearchParams,
};
use crate::output::{emit, num, resolve, status_body, Payload, Table};
use crate::{CliError, Overrides};

const PROFILE_TOL: f64 = mereokit::locality::LOCALITY_TOL;
const FINGERPRINT_TOL: f64 = mereokit::kinds::FINGERPRINT_TOL;
const KINDS_TOL: f64 = 1e-8;
const SEARCH_TOL: f64 = 1e-6;

pub fn profile(o: &Overrides) -> Result<u8, CliError> {
    let r = resolve::<ProfileParams>(o, PROFILE_TOL)?;
    let run = Stream::new(r.config.seed);
    let p = &r.config.params;
    let (h, dims) = p.hamiltonian.build(&run.child(role::HAMILTONIAN))?;
    let t = p.tps.build(&h, &dims, &run.child(role::TPS))?;
    let report = locality_report(&h, &t, r.config.tol)?;
    let mut table = Table::new(vec!["weight", "value"]);
    for (k, w) in report.profile.weights().iter().enumerate() {
        table.push([k.to_string(), num(*w)]);
    }
    let payload = Payload {
        json: json!({ "report": report }),
        table,
        summary: None,
    };
    emit(&r, &payload)?;
    Ok(0)
}

pub fn orbit(o: &Overrides) -> Result<u8, CliError> {
    let r = resolve::<OrbitParams>(o, PROFILE_TOL)?;
    let run = Stream::new(r.config.seed);
    let p = &r.config.params;
    let (h, dims) = p.hamiltonian.build(&run.child(role::HAMILTONIAN))?;
    let t = p.tps.build(&h, &dims, &run.child(role::TPS))?;
    let probe = p.probe.build(&h, &t, &run.child(role::STATE))?;
    let end = p.grid.end.unwrap_or_else(|| {
        let radius = h.spectral_radius();
        std::f64::consts::TAU / if radius > 0.0 { radius } else { 1.0 }
    });
    let grid = orbit_grid(end, p.grid.points);
    let curve = entropy_orbit(&h, &t, &probe, p.site, &grid)?;
    let distinct = distinct_value_count(&curve, p.bin)?;
    let (peak_index, peak) = curve
        .peak()
        .map_or((None, None), |(i, e)| (Some(i), Some(e)));
    let summary = json!({
        "distinct_value_count": distinct,
        "bin": p.bin,
        "points": grid.len(),
        "end": end,
        "peak_index": peak_index,
        "peak_t": peak_index.map(|i| grid[i]),
        "peak_entropy": peak,
    });
    let mut table = Table::new(vec!["t", "entropy"]);
    for (tv, e) in curve.rows() {
        table.push([num(tv), num(e)]);
    }
    let payload = Payload {
        json: json!({
            "summary": summary,
            "t": curve.t_values,
            "entropy": curve.entropies,
        }),
        table,
        summary: Some(json!({ "summary": summary })),
    };
    emit(&r, &payload)?;
    Ok(0)
}

pub fn fingerprint(o: &Overrides) -> Result<u8, CliError> {
    let r = resolve::<FingerprintParams>(o, FINGERPRINT_TOL)?;
    let run = Stream::new(r.config.seed);
    let p = &r.config.params;
    let (h, dims) = p.hamiltonian.build(&run.child(role::HAMILTONIAN))?;
    // both sources draw from one stream so nested random bases coincide
    let t1 = p.first.build(&h, &dims, &run.child(role::TPS))?;
    let t2 = p.second.build(&h, &dims, &run.child(role::TPS))?;
    let psi = p
        .state
        .build(&h, &Tps::canonical(&dims), &run.child(role::STATE))?;
    let count = p.probes.unwrap_or(2 * dims.total());
    let probes = build_probe_set(&h, &psi, count, &run.child(role::PROBES))?;
    let f1 = fingerprint_of(&h, &psi, &t1, &probes)?;
    let f2 = fingerprint_of(&h, &psi, &t2, &probes)?;
    let same_fp = fingerprints_equal(&f1, &f2, r.config.tol)?;
    let same_op = tps::equal(&t1, &t2)?;
    let verdict = match (same_fp, same_op) {
        (true, true) => Determination::SameTps,
        (false, false) => Determination::DifferentTps,
        _ => Determination::Inconsistent,
    };
    let distance = f1
        .entries
        .iter()
        .zip(&f2.entries)
        .map(|(a, b)| (a.2 - b.2).abs())
        .fold(0.0, f64::max);
    let mut table = Table::new(vec!["probe", "site", "first", "second"]);
    for (a, b) in f1.entries.iter().zip(&f2.entries) {
        table.push([a.0.to_string(), a.1.to_string(), num(a.2), num(b.2)]);
    }
    let payload = Payload {
        json: json!({
            "verdict": verdict,
            "fingerprint_distance": distance,
            "fingerprints_equal": same_fp,
            "tps_equal": same_op,
            "probes": probes,
            "first": f1,
            "second": f2,
        }),
        table,
        summary: None,
    };
    emit(&r, &payload)?;
    Ok(0)
}

fn search_json(result: &SearchResult, certified: bool) -> Value {
    json!({
        "residual": result.residual,
        "iterations": result.iterations,
        "converged": result.converged,
        "certified": certified,
        "restart": result.restart,
        "tps": result.tps.to_json(),
        "restarts": result.restarts,
    })
}

pub fn search(o: &Overrides) -> Result<u8, CliError> {
    let r = resolve::<SearchParams>(o, SEARCH_TOL)?;
    let run = Stream::new(r.config.seed);
    let p = &r.config.params;
    let (h, dims) = p.hamiltonian.build(&run.child(role::HAMILTONIAN))?;
    let cfg = p.search.with_stream(run.child(role::SEARCH));
    let result = run_search(&h, &dims, &cfg)?;
    let certified = certify(&h, &result, cfg.k, r.config.tol)?;
    let mut table = Table::new(vec!["restart", "iteration", "residual"]);
    for rec in &result.restarts {
        for (it, v) in &rec.trace {
            table.push([rec.restart.to_string(), it.to_string(), num(*v)]);
        }
    }
    let payload = Payload {
        json: search_json(&result, certified),
        table,
        summary: Some(json!({
            "residual": result.residual,
            "converged": result.converged,
            "certified": certified,
            "restart": result.restart,
            "tps": result.tps.to_json(),
        })),
    };
    emit(&r, &payload)?;
    Ok(if result.converged && result.residual <= r.config.tol {
        0
    } else {
        2
    })
}

fn no_witness(reason: String) -> Payload {
    let mut table = Table::new(vec!["status", "reason"]);
    table.push(["no_witness".to_string(), reason.clone()]);
    Payload {
        json: status_body("no_witness", json!({ "reason": reason })),
        table,
        summary: None,
    }
}

fn witness_payload(u: &mereokit::UnitaryOp, residuals: Value) -> Payload {
    let mut table = Table::new(vec!["residual", "value"]);
    if let Value::Object(m) = &residuals {
        for (k, v) in m {
            table.push([k.clone(), v.as_f64().map_or_else(|| v.to_string(), num)]);
        }
    }
    Payload {
        json: status_body(
            "witness",
            json!({
                "dim": u.dim(),
                "witness": matrix_to_pairs(u.matrix()),
                "residuals": residuals,
            }),
        ),
        table,
        summary: None,
    }
}

fn family_pairs(family: &[CVector]) -> Vec<Vec<[f64; 2]>> {
    family.iter().map(vector_to_pairs).collect()
}

pub fn kinds(o: &Overrides) -> Result<u8, CliError> {
    let r = resolve::<KindsParams>(o, KINDS_TOL)?;
    let run = Stream::new(r.config.seed);
    let tol = r.config.tol;
    let partner_stream = run.child(role::PARTNER);
    let payload = match &r.config.params {
        KindsParams::Hsf {
            hamiltonian,
            state,
            partner,
        } => {
            let (h, dims) = hamiltonian.build(&run.child(role::HAMILTONIAN))?;
            let canonical = Tps::canonical(&dims);
            let psi = state.build(&h, &canonical, &run.child(role::STATE))?;
            let (h2, psi2): (HermitianOp, _) = match partner {
                PairPartner::Conjugated => {
                    let v = haar_unitary(h.dim(), &partner_stream);
                    (h.conjugate_by(&v), v.apply(&psi))
                }
                PairPartner::Explicit { hamiltonian, state } => {
                    let (h2, dims2) = hamiltonian.build(&partner_stream.child(0))?;
                    let psi2 =
                        state.build(&h2, &Tps::canonical(&dims2), &partner_stream.child(1))?;
                    (h2, psi2)
                }
            };
            if h2.dim() != h.dim() {
                no_witness(format!("dimensions {} and {}", h.dim(), h2.dim()))
            } else {
                match hsf_orbit_witness(&h, &psi, &h2, &psi2, tol) {
                    Ok(u) => {
                        let hr = max_abs_diff(h.conjugate_by(&u).matrix(), h2.matrix());
                        let sr = (u.apply(&psi).amplitudes() - psi2.amplitudes()).norm();
                        witness_payload(&u, json!({ "hamiltonian": hr, "state": sr }))
                    }
                    Err(Error::NoWitness(reason)) => no_witness(reason),
                    Err(e) => return Err(e.into()),
                }
            }
        }
        KindsParams::Gram { family, partner } => {
            let f1 = family.build(&run.child(role::STATE))?;
            let f2 = match partner {
                FamilyPartner::Conjugated => {
                    let d = f1.first().map_or(0, |v| v.len());
                    if d == 0 {
                        return Err(CliError::Usage("empty family".into()));
                    }
                    let v = haar_unitary(d, &partner_stream);
                    f1.iter().map(|x| v.matrix() * x).collect()
                }
                FamilyPartner::Explicit { family } => family.build(&partner_stream)?,
            };
            match gram_orbit_witness(&f1, &f2, tol) {
                Ok(u) => {
                    let fr = f1
                        .iter()
                        .zip(&f2)
                        .map(|(a, b)| (u.matrix() * a - b).norm())
                        .fold(0.0, f64::max);
                    let gd = max_abs_diff(&gram_matrix(&f1).g, &gram_matrix(&f2).g);
                    let mut p = witness_payload(&u, json!({ "family": fr, "gram": gd }));
                    if let Value::Object(m) = &mut p.json {
                        m.insert("gram".into(), json!(gram_matrix(&f1).to_json()));
                        m.insert("family".into(), json!(family_pairs(&f1)));
                        m.insert("partner".into(), json!(family_pairs(&f2)));
                    }
                    p
                }
                Err(Error::NoWitness(reason)) => no_witness(reason),
                Err(e) => return Err(e.into()),
            }
        }
    };
    emit(&r, &payload)?;
    Ok(0)
}

/// Representatives of the distinct classes among `tpss`, by product-operator test.
fn class_count(tpss: &[&Tps]) -> Result<usize, CliError> {
    let mut reps: Vec<&Tps> = Vec::new();
    for t in tpss {
        let mut found = false;
        for rep in &reps {
            if tps::equal(t, rep)? {
                found = true;
                break;
            }
        }
        if !found {
            reps.push(t);
        }
    }
    Ok(reps.len())
}

pub fn dualscan(o: &Overrides) -> Result<u8, CliError> {
    let r = resolve::<DualscanParams>(o, SEARCH_TOL)?;
    let run = Stream::new(r.config.seed);
    let p = &r.config.params;
    let tol = r.config.tol;
    let mut table = Table::new(vec![
        "instance",
        "residual",
        "converged",
        "certified",
        "successes",
        "classes",
        "same_pairs",
        "different_pairs",
        "inconsistent_pairs",
    ]);
    let mut rows = Vec::new();
    let (mut recovered, mut inconsistent_total) = (0usize, 0usize);
    for i in 0..p.instances {
        let s = run.child(i as u64);
        let (h, _) = scrambled_klocal(&p.dims, p.k, &s.child(0))?;
        let mut cfg = p.search.with_stream(s.child(1));
        cfg.k = p.k;
        let result = run_search(&h, &p.dims, &cfg)?;
        let certified = certify(&h, &result, p.k, tol)?;
        let good: Vec<&Tps> = result
            .restarts
            .iter()
            .zip(&result.restart_tps)
            .filter(|(rec, _)| rec.residual <= tol)
            .map(|(_, t)| t)
            .collect();
        let classes = class_count(&good)?;
        let psi = haar_state(h.dim(), &s.child(2));
        let probes = build_probe_set(&h, &psi, 2 * h.dim(), &s.child(3))?;
        let prints = good
            .iter()
            .map(|t| fingerprint_of(&h, &psi, t, &probes))
            .collect::<Result<Vec<_>, _>>()?;
        let (mut same, mut different, mut inconsistent) = (0usize, 0usize, 0usize);
        for a in 0..good.len() {
            for b in a + 1..good.len() {
                let by_fp = fingerprints_equal(&prints[a], &prints[b], tol)?;
                let by_op = tps::equal(good[a], good[b])?;
                match (by_fp, by_op) {
                    (true, true) => same += 1,
                    (false, false) => different += 1,
                    _ => inconsistent += 1,
                }
            }
        }
        if result.residual <= tol {
            recovered += 1;
        }
        inconsistent_total += inconsistent;
        table.push([
            i.to_string(),
            num(result.residual),
            result.converged.to_string(),
            certified.to_string(),
            good.len().to_string(),
            classes.to_string(),
            same.to_string(),
            different.to_string(),
            inconsistent.to_string(),
        ]);
        rows.push(json!({
            "instance": i,
            "residual": result.residual,
            "converged": result.converged,
            "certified": certified,
            "successes": good.len(),
            "classes": classes,
            "same_pairs": same,
            "different_pairs": different,
            "inconsistent_pairs": inconsistent,
        }));
    }
    let summary = json!({
        "instances": p.instances,
        "recovered": recovered,
        "inconsistent_pairs": inconsistent_total,
    });
    let payload = Payload {
        json: json!({ "rows": rows, "summary": summary }),
        table,
        summary: Some(json!({ "summary": summary })),
    };
    emit(&r, &payload)?;
    Ok(0)
}
