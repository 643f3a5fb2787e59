//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, TAU};
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use mereokit::basis::WeightProfile;
use mereokit::dynamics::{
    distinct_value_count, entropy_orbit, inequality_sweep, orbit_grid, symmetry_dims,
};
use mereokit::hilbert::{
    expm_i, haar_state, haar_unitary, kron, max_abs_diff, random_hermitian, CMatrix, CVector, C64,
    I, ONE, ZERO,
};
use mereokit::kinds::{
    build_probe_set, determines_check, gram_orbit_witness, hsf_orbit_witness, Determination,
    FINGERPRINT_TOL,
};
use mereokit::locality::{
    is_k_local, one_local_evolution_check, profile, random_product_probes, uniform_grid,
    EvolutionVerdict,
};
use mereokit::models::{
    ground_state_discriminator, ising_chain, jw_dual_tps, random_klocal, scrambled_klocal,
    IsingParams,
};
use mereokit::search::{objective, retract, riemannian_gradient, search, SearchConfig};
use mereokit::tps::{is_product_operator, random_tps, schmidt_ratios};
use mereokit::{Dims, Error, HermitianOp, Hypothesis, StateVec, Stream, Tps};
use serde_json::json;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn dims(v: &[usize]) -> Dims {
    Dims::new(v.to_vec()).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn covariance() -> Outcome {
    let mut worst = 0.0f64;
    for (j, d) in [dims(&[2, 2]), dims(&[2, 2, 2])].iter().enumerate() {
        for i in 0..100 {
            let s = Stream::new(1).child(j as u64).child(i);
            let h = random_hermitian(d.total(), &s.child(0));
            let t = random_tps(d, &s.child(1));
            let u = haar_unitary(d.total(), &s.child(2));
            let a: WeightProfile = profile(&h, &t).map_err(|e| e.to_string())?;
            let b = profile(&h.conjugate_by(&u), &t.act(&u).unwrap()).map_err(|e| e.to_string())?;
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    check(
        worst <= 1e-9,
        format!("200 triples, max profile deviation {worst:.2e} (tol 1e-9)"),
    )
}

fn one_local_time() -> Outcome {
    let shapes = [dims(&[2, 2]), dims(&[2, 2, 2]), dims(&[3, 2])];
    let grid = uniform_grid(TAU, 64);
    let mut forward_max = 0.0f64;
    for i in 0..20u64 {
        let d = &shapes[i as usize % shapes.len()];
        let s = Stream::new(2).child(i);
        let t = random_tps(d, &s.child(0));
        let local = random_klocal(d, 1, &s.child(1)).unwrap();
        let h = local.conjugate_by(&t.iso().adjoint());
        let probes = random_product_probes(&t, 10, &s.child(2));
        match one_local_evolution_check(&h, &t, &grid, &probes).unwrap() {
            EvolutionVerdict::OneLocalConsistent { max_entropy } => {
                forward_max = forward_max.max(max_entropy)
            }
            EvolutionVerdict::Witness { entropy, .. } => forward_max = forward_max.max(entropy),
        }
    }
    let mut found = 0;
    for i in 0..50u64 {
        let d = &shapes[i as usize % shapes.len()];
        let s = Stream::new(3).child(i);
        let t = random_tps(d, &s.child(0));
        let h = random_hermitian(d.total(), &s.child(1));
        assert!(!is_k_local(&h, &t, 1, 1e-9).unwrap());
        let probes = random_product_probes(&t, 10, &s.child(2));
        if let EvolutionVerdict::Witness { entropy, .. } =
            one_local_evolution_check(&h, &t, &grid, &probes).unwrap()
        {
            if entropy > 1e-6 {
                found += 1;
            }
        }
    }
    check(
        forward_max < 1e-7 && found >= 49,
        format!(
            "forward max entropy {forward_max:.2e} (< 1e-7); converse witnesses {found}/50 (>= 49)"
        ),
    )
}

fn xx_orbit() -> Outcome {
    let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let h = HermitianOp::new(kron(&x, &x)).unwrap();
    let t = Tps::canonical(&dims(&[2, 2]));
    let grid = orbit_grid(FRAC_PI_2, 256);
    let c = entropy_orbit(&h, &t, &StateVec::basis(4, 0), 1, &grid).unwrap();
    let distinct = distinct_value_count(&c, 1e-4).unwrap();
    let (i, peak) = c.peak().unwrap();
    let dev = (peak - LN_2).abs();
    check(
        distinct >= 100 && dev <= 1e-9 && (grid[i] - FRAC_PI_4).abs() < 1e-12,
        format!(
            "{distinct} distinct values at bin 1e-4; peak at t = {:.6}, |peak - ln 2| = {dev:.2e}",
            grid[i]
        ),
    )
}

fn symmetry_arithmetic() -> Outcome {
    let sweep = inequality_sweep(4, 4).unwrap();
    let a = symmetry_dims(&dims(&[2, 2]));
    let b = symmetry_dims(&dims(&[2, 2, 2]));
    let ok = sweep
        && (a.hamiltonian_abelian_dim, a.abelian_bound) == (4, 3)
        && (b.hamiltonian_abelian_dim, b.abelian_bound) == (8, 4)
        && a.inequality
        && b.inequality;
    check(
        ok,
        format!(
            "sweep n <= 4, d <= 4: {sweep}; (2,2): {} > {}; (2,2,2): {} > {}",
            a.hamiltonian_abelian_dim, a.abelian_bound, b.hamiltonian_abelian_dim, b.abelian_bound
        ),
    )
}

fn product_detector() -> Outcome {
    let shapes = [
        dims(&[2, 2]),
        dims(&[2, 3]),
        dims(&[2, 2, 2]),
        dims(&[3, 3]),
        dims(&[2, 2, 2, 2]),
    ];
    let mut worst_residual = 0.0f64;
    let mut certified = 0;
    for i in 0..100u64 {
        let d = &shapes[i as usize % shapes.len()];
        let s = Stream::new(5).child(i);
        let factors: Vec<CMatrix> = d
            .factors()
            .iter()
            .enumerate()
            .map(|(k, &dk)| {
                if i % 2 == 0 {
                    haar_unitary(dk, &s.child(k as u64)).into_matrix()
                } else {
                    random_hermitian(dk, &s.child(k as u64)).into_matrix()
                }
            })
            .collect();
        let phase = C64::from_polar(1.0, 0.37 * i as f64);
        let w = mereokit::hilbert::kron_all(factors.iter()) * phase;
        if let Some(cert) = is_product_operator(&w, d).unwrap() {
            certified += 1;
            worst_residual = worst_residual.max(max_abs_diff(&cert.reassemble(d), &w));
        }
    }
    let cnot = CMatrix::from_row_slice(
        4,
        4,
        &[
            ONE, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE,
            ZERO,
        ],
    );
    let d2 = dims(&[2, 2]);
    let cnot_ratio = schmidt_ratios(&cnot, &d2)
        .unwrap()
        .into_iter()
        .fold(0.0, f64::max);
    let cnot_rejected = is_product_operator(&cnot, &d2).unwrap().is_none() && cnot_ratio > 1e-3;
    let mut haar_rejected = 0;
    let mut smallest = f64::INFINITY;
    for i in 0..100u64 {
        let d = &shapes[i as usize % shapes.len()];
        let u = haar_unitary(d.total(), &Stream::new(6).child(i));
        let ratio = schmidt_ratios(u.matrix(), d)
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max);
        smallest = smallest.min(ratio);
        if ratio > 1e-3 && is_product_operator(u.matrix(), d).unwrap().is_none() {
            haar_rejected += 1;
        }
    }
    check(
        certified == 100 && worst_residual < 1e-8 && cnot_rejected && haar_rejected == 100,
        format!(
            "certified {certified}/100 (max residual {worst_residual:.2e}); CNOT ratio {cnot_ratio:.3}; \
             Haar rejected {haar_rejected}/100 (smallest ratio {smallest:.3})"
        ),
    )
}

fn fingerprint_dual_oracle() -> Outcome {
    let times = [0.3, 0.7, 1.1];
    let (mut same, mut different, mut inconsistent) = (0, 0, 0);
    for (j, d) in [dims(&[2, 2]), dims(&[2, 2, 2])].iter().enumerate() {
        for i in 0..50u64 {
            let s = Stream::new(7).child(j as u64).child(i);
            let n = d.total();
            let h = random_hermitian(n, &s.child(0));
            let psi = haar_state(n, &s.child(1));
            let t = random_tps(d, &s.child(2));
            let probes =
                build_probe_set(&h, &psi, 2 * n, &s.child(3)).map_err(|e| e.to_string())?;
            let local = t.act(&t.random_local_unitary(&s.child(4))).unwrap();
            let evolved = t.act(&expm_i(&h, times[i as usize % 3])).unwrap();
            for other in [&local, &evolved] {
                match determines_check(&h, &psi, &t, other, &probes, FINGERPRINT_TOL).unwrap() {
                    Determination::SameTps => same += 1,
                    Determination::DifferentTps => different += 1,
                    Determination::Inconsistent => inconsistent += 1,
                }
            }
        }
    }
    check(
        inconsistent == 0 && same == 100 && different == 100,
        format!("100 trials: same {same}, different {different}, inconsistent {inconsistent}"),
    )
}

fn kind_witnesses() -> Outcome {
    let mut hsf_worst = 0.0f64;
    for i in 0..50u64 {
        let s = Stream::new(8).child(i);
        let d = 2 + (i as usize % 7);
        let h = random_hermitian(d, &s.child(0));
        let psi = haar_state(d, &s.child(1));
        let v = haar_unitary(d, &s.child(2));
        let (h2, psi2) = (h.conjugate_by(&v), v.apply(&psi));
        let u = hsf_orbit_witness(&h, &psi, &h2, &psi2, 1e-8)
            .map_err(|e| format!("hsf round {i}: {e}"))?;
        let r = max_abs_diff(h.conjugate_by(&u).matrix(), h2.matrix())
            .max((u.apply(&psi).amplitudes() - psi2.amplitudes()).norm());
        hsf_worst = hsf_worst.max(r);
    }
    let mut gram_worst = 0.0f64;
    for i in 0..50u64 {
        let s = Stream::new(9).child(i);
        let d = 2 + (i as usize % 5);
        let count = 1 + (i as usize % (d + 2));
        let mut family: Vec<CVector> = (0..count)
            .map(|k| {
                haar_state(d, &s.child(k as u64)).into_vector() * C64::new(1.0 + k as f64, 0.5)
            })
            .collect();
        if count >= 2 {
            let combo = &family[0] * C64::new(0.3, -0.2) + &family[1] * I;
            family.push(combo);
        }
        let v = haar_unitary(d, &s.child(100));
        let image: Vec<CVector> = family.iter().map(|f| v.matrix() * f).collect();
        let u = gram_orbit_witness(&family, &image, 1e-8)
            .map_err(|e| format!("gram round {i}: {e}"))?;
        for (a, b) in family.iter().zip(&image) {
            gram_worst = gram_worst.max((u.matrix() * a - b).norm());
        }
    }
    let psi = haar_state(4, &Stream::new(10));
    let id = HermitianOp::identity(4);
    let degenerate = matches!(
        hsf_orbit_witness(&id, &psi, &id, &psi, 1e-8),
        Err(Error::Hypothesis {
            hypothesis: Hypothesis::NonDegenerate,
            ..
        })
    ) && matches!(
        build_probe_set(&id, &psi, 8, &Stream::new(11)),
        Err(Error::Hypothesis {
            hypothesis: Hypothesis::NonDegenerate,
            ..
        })
    );
    let h = random_hermitian(4, &Stream::new(12));
    let eig = StateVec::normalize(h.eigh().eigenvector(2)).unwrap();
    let missing = matches!(
        hsf_orbit_witness(&h, &eig, &h, &eig, 1e-8),
        Err(Error::Hypothesis {
            hypothesis: Hypothesis::NonZeroProjections,
            ..
        })
    ) && matches!(
        build_probe_set(&h, &eig, 8, &Stream::new(13)),
        Err(Error::Hypothesis {
            hypothesis: Hypothesis::NonZeroProjections,
            ..
        })
    );
    check(
        hsf_worst < 1e-8 && gram_worst < 1e-8 && degenerate && missing,
        format!(
            "hsf max residual {hsf_worst:.2e}, gram max residual {gram_worst:.2e}; \
             H = I -> non-degenerate: {degenerate}; eigenvector -> non-zero projections: {missing}"
        ),
    )
}

fn jordan_wigner() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [3, 4] {
        let h = ising_chain(&IsingParams { n, j: 1.0, h: 1.0 }).unwrap();
        let canonical = Tps::canonical(&Dims::qubits(n).unwrap());
        let dual = jw_dual_tps(n).unwrap();
        let tail = |t: &Tps| {
            let p = profile(&h, t).unwrap();
            p.tail(2) / p.total()
        };
        let (a, b) = (tail(&canonical), tail(&dual));
        let local =
            is_k_local(&h, &canonical, 2, 1e-9).unwrap() && is_k_local(&h, &dual, 2, 1e-9).unwrap();
        let not_product = is_product_operator(dual.iso().matrix(), dual.dims())
            .unwrap()
            .is_none();
        ok &= local && a < 1e-9 && b < 1e-9 && not_product;
        parts.push(format!(
            "n={n}: tails {a:.1e}/{b:.1e}, duality unitary non-product {not_product}"
        ));
    }
    let h = ising_chain(&IsingParams {
        n: 4,
        j: 1.0,
        h: 1.0,
    })
    .unwrap();
    let disc = ground_state_discriminator(
        &h,
        &Tps::canonical(&Dims::qubits(4).unwrap()),
        &jw_dual_tps(4).unwrap(),
    )
    .unwrap();
    ok &= disc.value > 1e-3;
    parts.push(format!("discriminator (n=4, J=h=1) = {:.6}", disc.value));
    check(ok, parts.join("; "))
}

fn search_recovery() -> Outcome {
    let d = Dims::qubits(3).unwrap();
    let mut recovered = 0;
    let mut fd_worst = 0.0f64;
    let mut monotone = true;
    let mut residuals = Vec::new();
    for i in 0..10u64 {
        let s = Stream::new(14).child(i);
        let (h, _) = scrambled_klocal(&d, 2, &s.child(0)).unwrap();
        let cfg = SearchConfig {
            stream: s.child(1),
            ..SearchConfig::default()
        };
        let r = search(&h, &d, &cfg).unwrap();
        residuals.push(r.residual);
        if r.residual < 1e-6 {
            recovered += 1;
        }
        monotone &= r
            .restarts
            .iter()
            .all(|rec| rec.trace.windows(2).all(|w| w[1].1 <= w[0].1));
        for p in 0..10u64 {
            let ps = s.child(2).child(p);
            let v = haar_unitary(8, &ps.child(0));
            let x = random_hermitian(8, &ps.child(1)).matrix() * I;
            let g = riemannian_gradient(&h, &d, &v, 2).unwrap();
            let eps = 1e-5;
            let fd = (objective(&h, &d, &retract(&x, eps, &v), 2).unwrap()
                - objective(&h, &d, &retract(&x, -eps, &v), 2).unwrap())
                / (2.0 * eps);
            let an = (g.adjoint() * &x).trace().re;
            fd_worst = fd_worst.max((fd - an).abs() / an.abs().max(1e-12));
        }
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    check(
        recovered >= 9 && fd_worst <= 1e-4 && monotone,
        format!(
            "recovered {recovered}/10 (worst residual {worst:.2e}); gradient FD relative error {fd_worst:.2e}; \
             traces monotone {monotone}"
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("mereokit-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let configs = [
        (
            "profile",
            json!({"hamiltonian": {"type": "random_klocal", "dims": [2, 2, 2], "k": 2}, "tps": {"type": "random"}}),
        ),
        ("orbit", json!({})),
        ("fingerprint", json!({})),
        ("search", json!({})),
        (
            "kinds",
            json!({"kind": "gram", "family": {"type": "haar", "count": 3, "dim": 4}, "partner": {"type": "conjugated"}}),
        ),
        ("dualscan", json!({"instances": 2})),
    ];
    let mut identical = 0;
    let mut total = 0;
    let mut failures = Vec::new();
    for (cmd, params) in &configs {
        let cfg = dir.join(format!("{cmd}.json"));
        fs::write(
            &cfg,
            json!({"seed": 20241015u64, "params": params}).to_string(),
        )
        .unwrap();
        for fmt in ["json", "csv"] {
            let outs: Vec<Vec<u8>> = (0..2)
                .map(|k| {
                    let out = dir.join(format!("{cmd}-{fmt}-{k}"));
                    let status = Command::new(env!("CARGO_BIN_EXE_mereokit"))
                        .env_remove("MEREOKIT_SEED")
                        .args([
                            *cmd,
                            "--config",
                            cfg.to_str().unwrap(),
                            "--format",
                            fmt,
                            "--out",
                        ])
                        .arg(&out)
                        .status()
                        .unwrap();
                    assert!(status.success(), "{cmd} {fmt} exited with {status}");
                    fs::read(&out).unwrap()
                })
                .collect();
            total += 1;
            if outs[0] == outs[1] && !outs[0].is_empty() {
                identical += 1;
            } else {
                failures.push(format!("{cmd}/{fmt}"));
            }
        }
    }
    let _ = fs::remove_dir_all(&dir);
    check(
        identical == total,
        format!("{identical}/{total} subcommand/format reruns byte-identical {failures:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "covariance of weight profiles",
            Duration::from_secs(10),
            covariance,
        ),
        (
            "1-local evolution and its converse",
            Duration::from_secs(30),
            one_local_time,
        ),
        ("XX entropy orbit", Duration::from_secs(5), xx_orbit),
        (
            "symmetry dimension arithmetic",
            Duration::from_secs(1),
            symmetry_arithmetic,
        ),
        (
            "product-operator detector",
            Duration::from_secs(10),
            product_detector,
        ),
        (
            "fingerprint vs product-operator equality",
            Duration::from_secs(60),
            fingerprint_dual_oracle,
        ),
        (
            "kind orbit witnesses",
            Duration::from_secs(20),
            kind_witnesses,
        ),
        (
            "Jordan-Wigner dual structures",
            Duration::from_secs(20),
            jordan_wigner,
        ),
        ("search recovery", Duration::from_secs(300), search_recovery),
        ("CLI determinism", Duration::from_secs(30), cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, bound, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= *bound;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {detail} ({:.2}s of {}s{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            bound.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
