//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use fncache_core::analysis::{
    achievable_load, average_load, average_load_montecarlo, canonical_functions, converse_curve,
    load_variance, lower_convex_envelope, private_construct, private_load, rank_distribution,
    rank_histogram_bruteforce, worst_case_curve, yma_load, yma_worst_curve, DemandModel, Rational,
    ENUMERATION_CAP,
};
use fncache_core::combinat::{choose, subsets, subsets_of, UserSubset};
use fncache_core::decoder::{
    beta, beta_oracle, lemma1_check, reconstruct_missing, reconstruct_missing_xor, verify_delivery,
    xor_family,
};
use fncache_core::demand::{random_demands, random_rank_demands, single_file_demands};
use fncache_core::encoder::{build_message, build_plan};
use fncache_core::gf::{prime_power, Field, FieldElement, MAX_ORDER};
use fncache_core::linalg::{DemandBasis, GfMatrix};
use fncache_core::placement::{generate_library, man_place, FileLibrary};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn set(users: &[usize]) -> UserSubset {
    UserSubset::from_users(users).unwrap()
}

fn library_for(field: &Field, k: usize, n: usize, t: usize, seed: u64) -> FileLibrary {
    generate_library(field, n, choose(k, t) as usize, k, t, seed).unwrap()
}

fn decodes(lib: &FileLibrary, plan: &fncache_core::TransmissionPlan) -> Result<(), String> {
    let report = verify_delivery(lib, plan, &man_place(lib)).map_err(|e| e.to_string())?;
    ensure(report.success(), || {
        let bad: Vec<usize> = report
            .users
            .iter()
            .filter(|u| !u.matches)
            .map(|u| u.user)
            .collect();
        format!("users {bad:?} decode incorrectly")
    })
}

fn criterion1() -> Outcome {
    let f = Field::new(2).unwrap();
    let d = GfMatrix::from_rows(
        &f,
        &[
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 1, 0],
            [1, 0, 1],
            [1, 1, 1],
        ],
    )
    .unwrap();
    let lib = generate_library(&f, 3, 15, 6, 2, 11).unwrap();
    let plan = build_plan(&lib, d).map_err(|e| e.to_string())?;
    ensure(plan.leaders().users() == [1, 2, 3], || {
        format!("leaders {:?}", plan.leaders().users())
    })?;
    let sent: Vec<UserSubset> = plan.messages().iter().map(|m| m.subset).collect();
    let expected: Vec<UserSubset> = subsets(6, 3).filter(|&s| s != set(&[4, 5, 6])).collect();
    ensure(sent == expected, || {
        format!(
            "{} messages, expected all triples except {{4,5,6}}",
            sent.len()
        )
    })?;
    let a = set(&[4, 5, 6]);
    let family = xor_family(UserSubset::full(6), plan.basis()).map_err(|e| e.to_string())?;
    ensure(family.len() == 16, || {
        format!("XOR family has {} sets", family.len())
    })?;
    let direct = build_message(&lib, plan.basis(), 2, a).map_err(|e| e.to_string())?;
    ensure(
        reconstruct_missing_xor(&plan, a).map_err(|e| e.to_string())? == direct,
        || "XOR path differs".into(),
    )?;
    ensure(
        reconstruct_missing(&plan, a).map_err(|e| e.to_string())? == direct,
        || "beta path differs".into(),
    )?;
    decodes(&lib, &plan)?;
    Ok("19 messages, W_{4,5,6} rebuilt by both paths, 6 users decode".into())
}

fn criterion2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for q in [2u64, 3, 5, 7, 8] {
        let f = Field::new(q).unwrap();
        let y4: Vec<u32> = (0..3).map(|_| rng.random_range(0..q as u32)).collect();
        let y5: Vec<u32> = (0..3).map(|_| rng.random_range(0..q as u32)).collect();
        let rows = vec![
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
            y4.clone(),
            y5.clone(),
        ];
        let d = GfMatrix::from_rows(&f, &rows).unwrap();
        let lib = generate_library(&f, 3, 10, 5, 1, q).unwrap();
        let plan = build_plan(&lib, d).map_err(|e| e.to_string())?;
        ensure(plan.messages().len() == 9, || {
            format!("q={q}: {} messages", plan.messages().len())
        })?;
        let e = |v: u32| f.element(v).unwrap();
        let (y4, y5): (Vec<FieldElement>, Vec<FieldElement>) = (
            y4.iter().map(|&v| e(v)).collect(),
            y5.iter().map(|&v| e(v)).collect(),
        );
        let minor = |i: usize, j: usize| f.sub(f.mul(y4[i], y5[j]), f.mul(y5[i], y4[j]));
        let mut expected = Vec::new();
        for i in 0..3 {
            expected.push((set(&[i + 1, 4]), f.neg(y5[i])));
            expected.push((set(&[i + 1, 5]), y4[i]));
        }
        expected.push((set(&[1, 2]), minor(0, 1)));
        expected.push((set(&[1, 3]), minor(0, 2)));
        expected.push((set(&[2, 3]), minor(1, 2)));
        let a = set(&[4, 5]);
        for (s, want) in expected {
            let got = beta(plan.basis(), a, s).map_err(|e| e.to_string())?;
            ensure(got == want, || {
                format!(
                    "q={q}: beta for {s} is {} not {}",
                    got.value(),
                    want.value()
                )
            })?;
        }
        ensure(
            reconstruct_missing(&plan, a).map_err(|e| e.to_string())?
                == build_message(&lib, plan.basis(), 1, a).map_err(|e| e.to_string())?,
            || format!("q={q}: W_{{4,5}} not rebuilt"),
        )?;
        decodes(&lib, &plan).map_err(|m| format!("q={q}: {m}"))?;
    }
    Ok("q in {2,3,5,7,8}: 9 messages, 9 beta values match, all users decode".into())
}

const FIELDS: [u64; 5] = [2, 3, 4, 5, 8];

fn criterion3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..500 {
        let q = FIELDS[rng.random_range(0..FIELDS.len())];
        let f = Field::new(q).unwrap();
        let k = rng.random_range(1..=8);
        let n = rng.random_range(1..=5);
        let t = rng.random_range(0..=k);
        let d = random_demands(&f, k, n, &mut rng);
        let r = d.rank();
        let lib = library_for(&f, k, n, t, rng.random());
        let plan = build_plan(&lib, d).map_err(|e| e.to_string())?;
        let want = choose(k, t + 1) - choose(k - r, t + 1);
        ensure(plan.messages().len() as u128 == want, || {
            format!(
                "trial {trial} (q={q} K={k} N={n} t={t}): {} messages, expected {want}",
                plan.messages().len()
            )
        })?;
        decodes(&lib, &plan).map_err(|m| format!("trial {trial}: {m}"))?;
    }
    Ok("500 instances: counts match and every user decodes".into())
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut triples = 0;
    while triples < 1000 {
        let q = FIELDS[rng.random_range(0..FIELDS.len())];
        let f = Field::new(q).unwrap();
        let k = rng.random_range(2..=8);
        let n = rng.random_range(1..=6);
        let t = rng.random_range(0..k);
        let basis = DemandBasis::new(random_demands(&f, k, n, &mut rng)).unwrap();
        let others = UserSubset::full(k).difference(basis.leaders().as_subset());
        let choices: Vec<UserSubset> = subsets_of(others, t + 1).collect();
        if choices.is_empty() {
            continue;
        }
        let a = choices[rng.random_range(0..choices.len())];
        let ground = a.union(basis.leaders().as_subset());
        let candidates: Vec<UserSubset> = subsets_of(ground, t + 1)
            .filter(|&s| s != a && s.intersection(basis.leaders().as_subset()).len() <= 6)
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let s = candidates[rng.random_range(0..candidates.len())];
        let det = beta(&basis, a, s).map_err(|e| e.to_string())?;
        let perm = beta_oracle(&basis, a, s).map_err(|e| e.to_string())?;
        ensure(det == perm, || {
            format!("q={q} A={a} S={s}: {} vs {}", det.value(), perm.value())
        })?;
        triples += 1;
    }
    Ok("1000 triples agree".into())
}

fn criterion5() -> Outcome {
    let f = Field::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0u64;
    for k in 1..=7 {
        for n in 1..=4 {
            for _ in 0..4 {
                let basis = DemandBasis::new(random_demands(&f, k, n, &mut rng)).unwrap();
                let others = UserSubset::full(k).difference(basis.leaders().as_subset());
                for t in 0..k {
                    for a in subsets_of(others, t + 1) {
                        let b = a.union(basis.leaders().as_subset());
                        for w in subsets_of(b, t) {
                            for file in 0..n {
                                let r =
                                    lemma1_check(b, &basis, file, w).map_err(|e| e.to_string())?;
                                ensure(r.even, || {
                                    format!(
                                        "K={k} B={b} file {} W={w}: count {}",
                                        file + 1,
                                        r.count
                                    )
                                })?;
                                cases += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{cases} (B, i, W) cases, all counts even"))
}

fn criterion6() -> Outcome {
    let f = Field::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for k in 1..=6 {
        for n in 1..=4 {
            for d in 1..=k.min(n) {
                let files: Vec<usize> = (0..k)
                    .map(|u| if u < d { u } else { rng.random_range(0..d) })
                    .collect();
                let demand = single_file_demands(&f, n, &files).map_err(|e| e.to_string())?;
                for t in 0..=k {
                    let formula = Rational::new(
                        BigInt::from(choose(k, t + 1) - choose(k - d, t + 1)),
                        BigInt::from(choose(k, t)),
                    );
                    ensure(
                        achievable_load(k, t, d) == formula && yma_load(k, t, d) == formula,
                        || format!("K={k} t={t} d={d}: closed forms disagree"),
                    )?;
                    let lib = library_for(&f, k, n, t, rng.random());
                    let plan = build_plan(&lib, demand.clone()).map_err(|e| e.to_string())?;
                    let sent = Rational::new(
                        BigInt::from(plan.messages().len()),
                        BigInt::from(choose(k, t)),
                    );
                    ensure(sent == formula, || {
                        format!("K={k} N={n} t={t} d={d}: simulated load differs")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (K, N, d, t) configurations agree"))
}

fn criterion7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut configs = 0;
    for q in [2u64, 3, 4, 7] {
        let f = Field::new(q).unwrap();
        for (k, n) in [(4, 3), (5, 4), (6, 2), (6, 5)] {
            for r in 0..=k.min(n) {
                for t in 0..=k {
                    let lib = library_for(&f, k, n, t, rng.random());
                    let mut seen = None;
                    for _ in 0..20 {
                        let d = random_rank_demands(&f, k, n, r, &mut rng)
                            .map_err(|e| e.to_string())?;
                        let count = build_plan(&lib, d)
                            .map_err(|e| e.to_string())?
                            .messages()
                            .len();
                        let load = achievable_load(k, t, r);
                        match &seen {
                            None => seen = Some((count, load)),
                            Some(prev) => ensure(*prev == (count, load), || {
                                format!("q={q} K={k} N={n} r={r} t={t}: counts vary")
                            })?,
                        }
                    }
                    configs += 1;
                }
            }
        }
    }
    Ok(format!(
        "{configs} configurations, 20 matrices each, identical loads"
    ))
}

fn prime_powers_up_to(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&q| prime_power(q).is_some()).collect()
}

fn criterion8() -> Outcome {
    let mut configs = 0;
    for q in prime_powers_up_to(MAX_ORDER) {
        let f = Field::new(q).unwrap();
        for k in 1.. {
            if q.checked_pow(k as u32).is_none_or(|v| v > ENUMERATION_CAP) {
                break;
            }
            for n in 1.. {
                match q.checked_pow((k * n) as u32) {
                    Some(v) if v <= ENUMERATION_CAP => {}
                    _ => break,
                }
                for model in [DemandModel::AllVectors, DemandModel::NonzeroVectors] {
                    let hist =
                        rank_histogram_bruteforce(k, n, &f, model).map_err(|e| e.to_string())?;
                    let total: BigInt = hist.iter().map(|c| BigInt::from(c.clone())).sum();
                    let dist =
                        rank_distribution(k, n, q as u32, model).map_err(|e| e.to_string())?;
                    for (r, c) in hist.iter().enumerate() {
                        ensure(
                            Rational::new(BigInt::from(c.clone()), total.clone()) == dist[r],
                            || format!("q={q} K={k} N={n} r={r} {model:?}"),
                        )?;
                    }
                }
                configs += 1;
            }
        }
    }
    let mc = [
        (2u64, 4, 3, 1),
        (2, 6, 6, 2),
        (3, 5, 3, 2),
        (4, 3, 2, 1),
        (5, 6, 4, 3),
        (7, 8, 5, 2),
        (8, 4, 4, 0),
        (16, 10, 3, 5),
    ];
    for (i, &(q, k, n, t)) in mc.iter().enumerate() {
        let f = Field::new(q).unwrap();
        for model in [DemandModel::AllVectors, DemandModel::NonzeroVectors] {
            let exact = average_load(k, n, q as u32, t, model).map_err(|e| e.to_string())?;
            let variance = load_variance(k, n, q as u32, t, model).map_err(|e| e.to_string())?;
            let est = average_load_montecarlo(k, n, &f, t, model, 10_000, 80 + i as u64)
                .map_err(|e| e.to_string())?;
            ensure(est.within_sigmas_of(&exact, &variance, 3), || {
                format!(
                    "q={q} K={k} N={n} t={t} {model:?}: mean {} vs exact {}",
                    est.mean, exact
                )
            })?;
        }
    }
    Ok(format!(
        "{configs} (K, N, q) enumerations match, {} Monte Carlo runs within 3 sigma",
        mc.len() * 2
    ))
}

fn fncache(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fncache"))
        .args(args)
        .env_remove("FN_CACHE_SEED")
        .output()
        .expect("binary runs")
}

fn criterion9() -> Outcome {
    for k in 1..=10 {
        for n in 1..=10 {
            let curve = worst_case_curve(k, n);
            ensure(curve == yma_worst_curve(k, n), || {
                format!("K={k} N={n}: curves differ")
            })?;
            ensure(curve == converse_curve(k, n), || {
                format!("K={k} N={n}: converse differs")
            })?;
            let env = lower_convex_envelope(&curve).map_err(|e| e.to_string())?;
            ensure(
                env.windows(2)
                    .all(|w| w[0].memory < w[1].memory && w[0].load >= w[1].load),
                || format!("K={k} N={n}: envelope not monotone"),
            )?;
        }
    }
    for (k, n) in [(4, 2), (6, 3), (10, 10)] {
        for extra in [
            &[][..],
            &["--envelope"],
            &["--format", "json"],
            &["--format", "json", "--envelope"],
        ] {
            let (ks, ns) = (k.to_string(), n.to_string());
            let run = |scheme: &str| {
                let mut args = vec!["tradeoff", "--scheme", scheme, "--k", &ks, "--n", &ns];
                args.extend_from_slice(extra);
                fncache(&args)
            };
            let (a, b) = (run("slfr"), run("converse"));
            ensure(a.status.success() && b.status.success(), || {
                "tradeoff exited with an error".into()
            })?;
            ensure(a.stdout == b.stdout && !a.stdout.is_empty(), || {
                format!("K={k} N={n} {extra:?}: slfr and converse outputs differ")
            })?;
        }
    }
    Ok("curves equal for K,N <= 10, envelopes monotone, slfr and converse byte-identical".into())
}

fn criterion10() -> Outcome {
    let f = Field::new(2).unwrap();
    let canon = canonical_functions(&f, 2);
    ensure(canon.len() * 2 == 6, || "expected 6 virtual users".into())?;
    for t in 1..=6 {
        for (i, a) in canon.iter().enumerate() {
            for b in &canon {
                let rows = [a.clone(), b.clone()].concat();
                let real = GfMatrix::new(&f, 2, 2, rows).unwrap();
                let out = private_construct(&f, 2, 2, t, &real, (t * 10 + i) as u64)
                    .map_err(|e| e.to_string())?;
                ensure(
                    out.report.success() && out.real_matches.iter().all(|&m| m),
                    || format!("t={t}: real users fail to decode"),
                )?;
                let want = private_load(2, 2, 2, t).map_err(|e| e.to_string())?;
                ensure(out.load == want.load, || {
                    format!("t={t}: load {} vs {}", out.load, want.load)
                })?;
            }
        }
    }
    Ok("t = 1..6, all 9 real demand pairs decode, loads match".into())
}

fn run_twice(args: &[&str], files: &[&Path]) -> Result<(), String> {
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let out = fncache(args);
        let mut bytes = vec![
            out.stdout,
            out.stderr,
            out.status.code().unwrap_or(-1).to_le_bytes().to_vec(),
        ];
        for f in files {
            bytes.push(std::fs::read(f).map_err(|e| format!("{}: {e}", f.display()))?);
        }
        snapshots.push(bytes);
    }
    ensure(snapshots[0] == snapshots[1], || {
        format!("{args:?} differs between runs")
    })
}

fn criterion11() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let (plan, payload, library) = (
        dir.join("plan.json"),
        dir.join("payload.bin"),
        dir.join("library.bin"),
    );
    let sim = [
        "simulate",
        "--k",
        "7",
        "--n",
        "4",
        "--q",
        "8",
        "--t",
        "3",
        "--s",
        "2",
        "--seed",
        "99",
        "--plan",
        plan.to_str().unwrap(),
        "--payload",
        payload.to_str().unwrap(),
        "--library",
        library.to_str().unwrap(),
    ];
    run_twice(&sim, &[&plan, &payload, &library])?;
    run_twice(
        &[
            "simulate",
            "--k",
            "5",
            "--n",
            "5",
            "--q",
            "3",
            "--t",
            "2",
            "--worst-case",
            "--seed",
            "4",
        ],
        &[],
    )?;
    run_twice(
        &["verify", "--suite", "all", "--trials", "20", "--seed", "12"],
        &[],
    )?;
    run_twice(
        &[
            "tradeoff", "--scheme", "private", "--k", "2", "--n", "2", "--q", "2", "--format",
            "json",
        ],
        &[],
    )?;
    Ok("simulate, verify and tradeoff outputs byte-identical across runs".into())
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(u32, &str, Check, Option<Duration>); 11] = [
        (
            1,
            "six-user GF(2) example",
            criterion1,
            Some(Duration::from_secs(1)),
        ),
        (
            2,
            "five-user example over several fields",
            criterion2,
            Some(Duration::from_secs(1)),
        ),
        (
            3,
            "message count formula",
            criterion3,
            Some(Duration::from_secs(60)),
        ),
        (
            4,
            "beta determinant vs permutation expansion",
            criterion4,
            Some(Duration::from_secs(30)),
        ),
        (
            5,
            "subfile parity over GF(2)",
            criterion5,
            Some(Duration::from_secs(60)),
        ),
        (6, "single-file demand loads", criterion6, None),
        (7, "load depends only on rank", criterion7, None),
        (
            8,
            "average load",
            criterion8,
            Some(Duration::from_secs(120)),
        ),
        (9, "tradeoff curves", criterion9, None),
        (10, "private construction", criterion10, None),
        (11, "determinism", criterion11, None),
    ];
    let mut failed = 0;
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let verdict = match (result, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        match verdict {
            Ok(msg) => println!("PASS criterion {id:>2} ({name}): {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id:>2} ({name}): {msg} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
