//! Built-in release gate: re-derives desk-scale results with independent
//! brute-force oracles and prints one pass/fail line per check.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use seqkernel::exact::{brute_force_kernel_int, exact_kernel_int, exact_profile};
use seqkernel::intersect::{binomial, brute_force_intersection, hamming};
use seqkernel::preprocess::{canonical_mmer, information_gain, minimizers, MinimizerParams};
use seqkernel::seq::{extract_kmers, Alphabet};
use seqkernel::{
    approx_kernel_value, Error, IntersectionTable, SampledThetaPlan, SamplingConfig,
    SequenceRecord,
};

type CheckResult = Result<(), String>;
type Check = (&'static str, Box<dyn Fn() -> CheckResult>);

pub fn run(corrupt_table: bool) -> Result<(), Error> {
    let checks: Vec<Check> = vec![
        (
            "intersection closed form vs enumeration",
            Box::new(move || check_intersection_tables(corrupt_table)),
        ),
        (
            "exact kernel vs neighborhood oracle",
            Box::new(move || check_exact_kernel(corrupt_table)),
        ),
        ("F/M triangular identity", Box::new(check_profile_identity)),
        (
            "sampled estimator exact at full coverage",
            Box::new(check_full_coverage),
        ),
        (
            "minimizers vs per-window scan",
            Box::new(check_minimizers),
        ),
        ("information gain on toy datasets", Box::new(check_ig)),
    ];

    let mut failures = 0usize;
    for (name, check) in &checks {
        match check() {
            Ok(()) => println!("[PASS] {name}"),
            Err(msg) => {
                failures += 1;
                println!("[FAIL] {name}: {msg}");
            }
        }
    }
    println!("{}/{} checks passed", checks.len() - failures, checks.len());
    if failures > 0 {
        return Err(Error::Numeric(format!("selftest failed {failures} check(s)")));
    }
    Ok(())
}

fn build_table(k: usize, m: usize, s: usize, corrupt: bool) -> Result<IntersectionTable, String> {
    let table = IntersectionTable::build(k, m, s).map_err(|e| e.to_string())?;
    if !corrupt {
        return Ok(table);
    }
    // test hook: shift I_0 by one so every downstream comparison breaks
    let mut values = table.values().to_vec();
    values[0] += 1u32;
    IntersectionTable::from_values(k, m, s, values).map_err(|e| e.to_string())
}

fn random_pair_at_distance(
    rng: &mut ChaCha12Rng,
    k: usize,
    d: usize,
    s: usize,
) -> (Vec<u8>, Vec<u8>) {
    use rand::seq::SliceRandom;
    let alpha: Vec<u8> = (0..k).map(|_| rng.gen_range(0..s) as u8).collect();
    let mut positions: Vec<usize> = (0..k).collect();
    positions.shuffle(rng);
    let mut beta = alpha.clone();
    for &p in positions.iter().take(d) {
        let mut sub = rng.gen_range(0..s) as u8;
        while sub == alpha[p] {
            sub = rng.gen_range(0..s) as u8;
        }
        beta[p] = sub;
    }
    (alpha, beta)
}

fn random_dna(rng: &mut ChaCha12Rng, len: usize) -> SequenceRecord {
    SequenceRecord::new(
        format!("r{len}"),
        (0..len).map(|_| rng.gen_range(0..4u8)).collect(),
    )
}

fn check_intersection_tables(corrupt: bool) -> CheckResult {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    for (s, k_max) in [(2usize, 5usize), (4, 5), (20, 4)] {
        for k in 1..=k_max {
            for m in 0..=2usize {
                let table = build_table(k, m, s, corrupt)?;
                for d in 0..=table.t() {
                    for _ in 0..3 {
                        let (alpha, beta) = random_pair_at_distance(&mut rng, k, d, s);
                        debug_assert_eq!(hamming(&alpha, &beta), d);
                        let brute = brute_force_intersection(&alpha, &beta, m, s)
                            .map_err(|e| e.to_string())?;
                        let closed = table.value(d).to_u64().ok_or("table value > u64")?;
                        if closed != brute {
                            return Err(format!(
                                "k={k} m={m} s={s} d={d}: closed form {closed} != brute {brute}"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_exact_kernel(corrupt: bool) -> CheckResult {
    let a = Alphabet::dna();
    let table = build_table(3, 1, 4, corrupt)?;
    let x = SequenceRecord::encode("x", "ACGT", &a).map_err(|e| e.to_string())?;
    let y = SequenceRecord::encode("y", "ACGA", &a).map_err(|e| e.to_string())?;
    let toy = exact_kernel_int(&x, &y, 3, 1, &table).map_err(|e| e.to_string())?;
    if toy.to_u64() != Some(14) {
        return Err(format!("toy kernel: expected 14, got {toy}"));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(202);
    for trial in 0..20 {
        let k = rng.gen_range(1..=6usize);
        let m = rng.gen_range(0..=2usize);
        let len_x = rng.gen_range(k..=40);
        let len_y = rng.gen_range(k..=40);
        let x = random_dna(&mut rng, len_x);
        let y = random_dna(&mut rng, len_y);
        let table = build_table(k, m, 4, corrupt)?;
        let fast = exact_kernel_int(&x, &y, k, m, &table).map_err(|e| e.to_string())?;
        let brute = brute_force_kernel_int(&x, &y, k, m, 4).map_err(|e| e.to_string())?;
        if fast != brute {
            return Err(format!("trial {trial} (k={k}, m={m}): {fast} != {brute}"));
        }
    }
    Ok(())
}

fn check_profile_identity() -> CheckResult {
    let a = Alphabet::dna();
    let x = SequenceRecord::encode("x", "ACGT", &a).map_err(|e| e.to_string())?;
    let y = SequenceRecord::encode("y", "ACGA", &a).map_err(|e| e.to_string())?;
    let p = exact_profile(&extract_kmers(&x, 3), &extract_kmers(&y, 3), 1)
        .map_err(|e| e.to_string())?;
    if p.f != vec![1, 4, 5] || p.m != vec![1, 1, 0] {
        return Err(format!("toy trace: F={:?}, M={:?}", p.f, p.m));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(303);
    for _ in 0..20 {
        let k = rng.gen_range(1..=6usize);
        let m = rng.gen_range(0..=2usize);
        let len_x = rng.gen_range(k..=40);
        let len_y = rng.gen_range(k..=40);
        let x = random_dna(&mut rng, len_x);
        let y = random_dna(&mut rng, len_y);
        let p = exact_profile(&extract_kmers(&x, k), &extract_kmers(&y, k), m)
            .map_err(|e| e.to_string())?;
        for i in 0..=p.t {
            let mut expect = 0u64;
            for j in 0..=i {
                let c = binomial((k - j) as i64, (k - i) as i64)
                    .to_u64()
                    .ok_or("binomial > u64")?;
                expect += c * p.m[j];
            }
            if p.f[i] != expect {
                return Err(format!("identity broken at i={i}: F={} != {expect}", p.f[i]));
            }
        }
    }
    Ok(())
}

fn check_full_coverage() -> CheckResult {
    let mut rng = ChaCha12Rng::seed_from_u64(404);
    for trial in 0..10 {
        let k = rng.gen_range(1..=5usize);
        let m = rng.gen_range(0..=2usize);
        let len_x = rng.gen_range(k..=40);
        let len_y = rng.gen_range(k..=40);
        let x = random_dna(&mut rng, len_x);
        let y = random_dna(&mut rng, len_y);
        let table = IntersectionTable::build(k, m, 4).map_err(|e| e.to_string())?;
        let config = SamplingConfig {
            cap: 300,
            seed: trial,
            ..SamplingConfig::default()
        };
        let plan = SampledThetaPlan::build(k, m, &config).map_err(|e| e.to_string())?;
        let approx = approx_kernel_value(&extract_kmers(&x, k), &extract_kmers(&y, k), &table, &plan)
            .map_err(|e| e.to_string())?;
        let exact = exact_kernel_int(&x, &y, k, m, &table)
            .map_err(|e| e.to_string())?
            .to_f64()
            .ok_or("kernel > f64")?;
        if approx.round() != exact {
            return Err(format!("trial {trial}: approx {approx} != exact {exact}"));
        }
    }
    Ok(())
}

fn check_minimizers() -> CheckResult {
    let a = Alphabet::from_symbols("ABCDX").map_err(|e| e.to_string())?;
    let s = SequenceRecord::encode("s", "CBADX", &a).map_err(|e| e.to_string())?;
    let params = MinimizerParams { k: 4, m_len: 2 };
    let mins = minimizers(&s, &params).map_err(|e| e.to_string())?;
    let decoded: Vec<String> = mins.iter().map(|m| a.decode(m)).collect();
    if decoded != vec!["AB", "AB"] {
        return Err(format!("CBADX minimizers: {decoded:?}"));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(505);
    for trial in 0..30 {
        let len = rng.gen_range(1..=80usize);
        let residues: Vec<u8> = (0..len).map(|_| rng.gen_range(0..20u8)).collect();
        let s = SequenceRecord::new(format!("t{trial}"), residues);
        let k = rng.gen_range(2..=10usize);
        let m_len = rng.gen_range(1..k);
        let params = MinimizerParams { k, m_len };
        let got = minimizers(&s, &params).map_err(|e| e.to_string())?;
        let want: Vec<Vec<u8>> = if s.len() < k {
            Vec::new()
        } else {
            s.residues
                .windows(k)
                .map(|w| w.windows(m_len).map(canonical_mmer).min().unwrap())
                .collect()
        };
        if got != want {
            return Err(format!("trial {trial} (len={len}, k={k}, m_len={m_len})"));
        }
    }
    Ok(())
}

fn check_ig() -> CheckResult {
    let a = Alphabet::from_symbols("AB").map_err(|e| e.to_string())?;
    let mut recs = Vec::new();
    for (i, (sym, class)) in [("A", "c1"), ("A", "c1"), ("B", "c2"), ("B", "c2")]
        .iter()
        .enumerate()
    {
        let mut r = SequenceRecord::encode(format!("s{i}"), sym, &a).map_err(|e| e.to_string())?;
        r.label = Some(class.to_string());
        recs.push(r);
    }
    let separator = information_gain(&recs, 0).map_err(|e| e.to_string())?;
    if (separator - 1.0).abs() > 1e-12 {
        return Err(format!("perfect separator: expected 1.0, got {separator}"));
    }
    for rec in &mut recs {
        rec.residues = vec![0]; // constant position
    }
    let flat = information_gain(&recs, 0).map_err(|e| e.to_string())?;
    if flat != 0.0 {
        return Err(format!("uninformative position: expected 0.0, got {flat}"));
    }
    Ok(())
}
