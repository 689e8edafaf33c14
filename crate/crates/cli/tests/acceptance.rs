//! Acceptance checks: one `[PASS]` or `[FAIL]` line per criterion, exit
//! status 1 if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ldp_core::cycles::{self, CycleProblem, PhiConfig, Regime};
use ldp_core::ising::{self, IsingProblem};
use ldp_core::linalg::trace_power_by_multiplication;
use ldp_core::measures::{self, bernoulli_entropy};
use ldp_core::wigner::{self, WignerEnsemble};
use ldp_core::{nets, rng, Law, Matrix};
use rand::Rng;

type Check = std::result::Result<String, String>;

/// Id, description, check and runtime budget.
type Criterion = (&'static str, &'static str, fn() -> Check, Duration);

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn lab<T>(r: ldp_core::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn families() -> Vec<Law> {
    vec![
        Law::rademacher(),
        Law::bernoulli(0.3).unwrap(),
        Law::uniform_sym(1.0).unwrap(),
        Law::gaussian(1.0).unwrap(),
    ]
}

/// Golden-section maximization of `λx − log(1 − p + p e^λ)` after a coarse scan.
fn bernoulli_rate_oracle(p: f64, x: f64) -> f64 {
    let f = |l: f64| l * x - (1.0 - p + p * l.exp()).ln();
    let (lo, hi, steps) = (-60.0, 60.0, 2400);
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps).map(|i| lo + i as f64 * h).fold(lo, |b, l| if f(l) > f(b) { l } else { b });
    let (mut a, mut b) = (best - h, best + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

fn ac01() -> Check {
    let mut worst = 0.0f64;
    for law in families() {
        for i in 0..50 {
            let lambda = -3.0 + 6.0 * i as f64 / 49.0;
            let m = law.tilt_mean(lambda);
            let rhs = lambda * m - lab(law.log_laplace(lambda))?;
            let err = (law.legendre(m) - rhs).abs();
            worst = worst.max(err);
            ensure(err <= 1e-10, format!("{} at λ = {lambda}: duality error {err:e}", law.name()))?;
        }
    }
    let mut worst_rate = 0.0f64;
    for &p in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for &x in &[0.05, 0.3, 0.6, 0.95] {
            let err = (bernoulli_entropy(p, x) - bernoulli_rate_oracle(p, x)).abs();
            worst_rate = worst_rate.max(err);
            ensure(err <= 1e-8, format!("I_p({x}) at p = {p}: error {err:e}"))?;
        }
    }
    Ok(format!("duality max err {worst:.1e} over 200 points, I_p max err {worst_rate:.1e} over 20 pairs"))
}

fn ac02() -> Check {
    let mut parts = Vec::new();
    for (i, law) in families().into_iter().enumerate() {
        let est = measures::tightness_moment(&law, 0.5, 100_000, &mut rng::stream(2, i as u64));
        ensure(est.mean <= 4.0 + 3.0 * est.std_err, format!("{}: {} ± {}", law.name(), est.mean, est.std_err))?;
        parts.push(format!("{} {:.3}±{:.3}", law.name(), est.mean, est.std_err));
    }
    Ok(parts.join(", "))
}

fn random_coupling(n: usize, scale: f64, g: &mut impl Rng) -> Matrix {
    Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { scale * g.random_range(-1.0..1.0) })
}

fn ac03() -> Check {
    let mut min_slack = f64::INFINITY;
    for i in 0..50u64 {
        let n = 2 + (i % 9) as usize;
        let mut g = rng::stream(3, i);
        let scale = (1.0 + (i % 3) as f64) / (n as f64).sqrt();
        let p = lab(IsingProblem::new(random_coupling(n, scale, &mut g)))?;
        let cert = lab(ising::partition_certificate(&p, 0.5, None, ising::DEFAULT_STARTS, &mut g))?;
        ensure(cert.sup <= cert.log_z + 1e-9, format!("coupling {i} (n = {n}): sup {} > log Z {}", cert.sup, cert.log_z))?;
        ensure(cert.bound_ok, format!("coupling {i} (n = {n}): log Z {} > {}", cert.log_z, cert.upper_bound()))?;
        min_slack = min_slack.min(cert.upper_bound() - cert.log_z);
    }
    Ok(format!("50 couplings, n in 2..=10, smallest slack {min_slack:.3}"))
}

fn ac04() -> Check {
    // Symmetric maximizer of 2x² − 2I(x): root of x = tanh(2x) in (0.5, 1).
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid - (2.0 * mid).tanh() < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let entropy = 0.5 * (1.0 + x) * (1.0 + x).ln() + 0.5 * (1.0 - x) * (1.0 - x).ln();
    let sup_oracle = 2.0 * x * x - 2.0 * entropy;
    let log_z_oracle = 2f64.cosh().ln();

    let p = lab(IsingProblem::new(Matrix::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 })))?;
    let log_z = lab(ising::exact_log_partition(&p))?;
    let sol = lab(ising::meanfield_sup(&p, ising::DEFAULT_STARTS, &mut rng::master(4)))?;
    ensure((log_z - log_z_oracle).abs() <= 1e-4, format!("log Z {log_z} vs {log_z_oracle}"))?;
    ensure((sol.value - sup_oracle).abs() <= 1e-4, format!("sup {} vs {sup_oracle}", sol.value))?;
    Ok(format!("log Z = {log_z:.7} (oracle {log_z_oracle:.7}), sup = {:.7} (oracle {sup_oracle:.7})", sol.value))
}

fn ac05() -> Check {
    let e = lab(WignerEnsemble::rademacher(200))?;
    let moments = lab(wigner::wigner_moments(&e, 4, 200, 5))?;
    let mut parts = Vec::new();
    for d in 2..=4u32 {
        let got = moments[d as usize - 1].mean;
        let want = lab(wigner::semicircle_moment(d))?;
        ensure((got - want).abs() <= 0.1, format!("d = {d}: {got} vs {want}"))?;
        parts.push(format!("m{d} = {got:.4} ({want})"));
    }
    Ok(parts.join(", "))
}

fn ac06() -> Check {
    let law = Law::rademacher();
    let mut worst = 0.0f64;
    for d in [2u32, 4, 6] {
        for n in [10usize, 100, 500] {
            for x in [0.5, 1.0, 2.0] {
                let c = lab(wigner::uniform_shift_candidate(n, d, x, &law))?;
                let err = (c.trace_check - 1.0).abs();
                worst = worst.max(err);
                ensure(err <= 1e-10, format!("n = {n}, d = {d}, x = {x}: relative trace error {err:e}"))?;
            }
        }
    }
    let mut parts = Vec::new();
    for x in [0.5f64, 1.0, 2.0] {
        let c = lab(wigner::uniform_shift_candidate(500, 4, x, &law))?;
        let want = 0.25 * x.sqrt();
        let rel = (c.cost - want).abs() / want;
        ensure(rel <= 0.1, format!("x = {x}: cost {} vs {want}", c.cost))?;
        parts.push(format!("x={x}: {:.4}/{want:.4}", c.cost));
    }
    Ok(format!("trace max rel err {worst:.1e}; cost at n=500, d=4: {}", parts.join(", ")))
}

fn ac07() -> Check {
    let mut g = rng::master(7);
    let mut worst_gap = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..20 {
        let x = Matrix::from_fn(8, |_, _| g.random_range(-1.0..1.0));
        let k = 1 + i % 4;
        let d = 2 + (i % 3) as u32;
        let r = lab(wigner::fnsup_check(&x, k, d, 100, &mut g))?;
        ensure(r.equality_gap <= 1e-8, format!("matrix {i}: equality gap {:e}", r.equality_gap))?;
        ensure(r.holds, format!("matrix {i} (k = {k}, d = {d}): {} violations, max excess {:e}", r.violations, r.max_excess))?;
        worst_gap = worst_gap.max(r.equality_gap);
        worst_excess = worst_excess.max(r.max_excess / r.t_f.abs().max(1.0));
    }
    Ok(format!("20 matrices, max equality gap {worst_gap:.1e}, max relative excess {worst_excess:.2e}"))
}

fn ac08() -> Check {
    let n = 3;
    let d = 3u32;
    let e = lab(WignerEnsemble::rademacher(n))?;
    let entries: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let stats: Vec<f64> = (0u32..1 << entries.len())
        .map(|mask| {
            let mut x = Matrix::zeros(n);
            for (b, &(i, j)) in entries.iter().enumerate() {
                x.set(i, j, if mask >> b & 1 == 1 { 1.0 } else { -1.0 });
            }
            trace_power_by_multiplication(&x, d) / (n as f64).powf(1.0 + d as f64 / 2.0)
        })
        .collect();
    let values: BTreeSet<u64> = stats.iter().map(|v| v.to_bits()).collect();
    let values: Vec<f64> = values.into_iter().map(f64::from_bits).collect();
    let mut g = rng::master(8);
    let mut worst = 0.0f64;
    for k in 0..20u64 {
        let t = values[g.random_range(0..values.len())];
        let exact = stats.iter().filter(|&&s| s >= t - 1e-12).count() as f64 / stats.len() as f64;
        let est = lab(wigner::tilted_tail_estimate(&e, d, t - 1e-12, 20_000, 800 + k))?;
        let z = if est.std_err > 0.0 { (est.prob_est - exact).abs() / est.std_err } else { 0.0 };
        ensure(
            z <= 3.0 && (est.std_err > 0.0 || (est.prob_est - exact).abs() <= 1e-12),
            format!("t = {t}: estimate {} ± {} vs exact {exact}", est.prob_est, est.std_err),
        )?;
        worst = worst.max(z);
    }
    Ok(format!("{} attainable values, 20 thresholds, largest deviation {worst:.2}σ", values.len()))
}

fn brute_independent_sets(d: usize) -> Vec<u64> {
    let mut counts = vec![0u64; d / 2 + 1];
    for mask in 0u32..1 << d {
        if (0..d).all(|i| !(mask >> i & 1 == 1 && mask >> ((i + 1) % d) & 1 == 1)) {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    counts
}

fn ac09() -> Check {
    for d in 3..=12 {
        let got = lab(cycles::independence_polynomial_cycle(d))?;
        ensure(got == brute_independent_sets(d), format!("d = {d}: {got:?}"))?;
    }
    let t34 = lab(cycles::theta_t(3, 4.0))?;
    let t47 = lab(cycles::theta_t(4, 7.0))?;
    ensure((t34 - 1.0).abs() <= 1e-10, format!("θ_4 for d = 3 is {t34}"))?;
    ensure((t47 - 1.0).abs() <= 1e-10, format!("θ_7 for d = 4 is {t47}"))?;
    let phi = lab(cycles::phi(3, 2.0, Regime::Dense))?;
    ensure(phi == 1.0 / 3.0, format!("Φ(2) for d = 3 is {phi:.17}"))?;
    Ok(format!("d = 3..=12 match, θ = {t34}, {t47}, Φ = {phi:.17}"))
}

fn ac10() -> Check {
    let p = lab(CycleProblem::new(3000, 0.1, 3, 2.0))?;
    let clique = lab(cycles::planted_clique(&p))?.cost_over_vn(&p);
    let hub = lab(cycles::planted_hub(&p))?.cost_over_vn(&p);
    let clique_rate = 0.5;
    let theta = lab(cycles::theta_t(3, 2.0))?;
    ensure((clique - clique_rate).abs() <= 0.1 * clique_rate, format!("clique {clique} vs {clique_rate}"))?;
    ensure((hub - theta).abs() <= 0.15 * theta, format!("hub {hub} vs {theta}"))?;
    Ok(format!("clique {clique:.4} vs {clique_rate}, hub {hub:.4} vs {theta:.4}"))
}

fn ac11() -> Check {
    let mut parts = Vec::new();
    let mut points = Vec::new();
    for t in [1.2, 1.5, 2.0] {
        let p = lab(CycleProblem::new(40, 0.3, 3, t))?;
        let res = lab(cycles::numeric_phi(&p, &PhiConfig::default()))?;
        ensure(res.best.is_feasible(&p), format!("t = {t}: result infeasible (ratio {})", res.best.trace_ratio))?;
        let mut candidates = Vec::new();
        for c in [cycles::planted_clique(&p).ok(), cycles::planted_hub(&p).ok()].into_iter().flatten() {
            if c.is_feasible(&p) {
                candidates.push(c.cost);
            }
        }
        for c in [lab(cycles::smallest_feasible_clique(&p))?, lab(cycles::smallest_feasible_hub(&p))?].into_iter().flatten() {
            candidates.push(c.cost);
        }
        let min_candidate = candidates.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(res.best.cost <= min_candidate + 1e-6, format!("t = {t}: cost {} > candidate {min_candidate}", res.best.cost))?;
        parts.push(format!("t={t}: {:.3} ≤ {:.3}", res.best.cost, min_candidate));
        points.push(res.best.y.clone().ok_or("optimizer returned no matrix")?);
    }

    let mut g = rng::master(11);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let y = if k < points.len() { points[k].clone() } else { Matrix::from_fn(40, |i, j| if i == j { 0.0 } else { g.random::<f64>() }) };
        let grad = cycles::trace_power_gradient(&y, 3);
        let (i, j) = (g.random_range(0..40), g.random_range(0..40));
        let h = 1e-4;
        let bump = |s: f64| {
            let mut z = y.clone();
            z.set(i, j, y.get(i, j) + s * h);
            trace_power_by_multiplication(&z, 3)
        };
        let fd = (bump(1.0) - bump(-1.0)) / (2.0 * h);
        let rel = (grad.get(i, j) - fd).abs() / fd.abs().max(1e-12);
        worst = worst.max(rel);
        ensure(rel <= 1e-5, format!("point {k}, entry ({i}, {j}): gradient {} vs difference {fd}", grad.get(i, j)))?;
    }
    Ok(format!("{}; gradient max rel err {worst:.1e} at 20 points", parts.join(", ")))
}

fn ac12() -> Check {
    let mut parts = Vec::new();
    for (i, &(n, k, eps)) in [(2usize, 1usize, 0.5f64), (3, 1, 0.6), (4, 2, 0.8)].iter().enumerate() {
        let net = lab(nets::net_lowrank(n, k, eps, &mut rng::stream(12, i as u64)))?;
        let bound = 2.0 * (n * k) as f64 * (12.0 * k as f64 / eps).ln();
        ensure(net.log_cardinality <= bound, format!("({n},{k},{eps}): log|N| {} > {bound}", net.log_cardinality))?;
        let cov = net.coverage.ok_or("coverage was not checked")?;
        ensure(cov.samples >= 10_000 && cov.holds(eps), format!("({n},{k},{eps}): worst gap {} over {} samples", cov.worst_gap, cov.samples))?;
        parts.push(format!("({n},{k},{eps}): {:.2} ≤ {bound:.2}, gap {:.3}", net.log_cardinality, cov.worst_gap));
    }
    Ok(parts.join("; "))
}

const SUBCOMMANDS: [&[&str]; 12] = [
    &["legendre"],
    &["ising-certify"],
    &["ising-solve", "--graph", "star", "--n", "10", "--scale", "0.2"],
    &["wigner-rate", "--d", "4", "--beta", "1", "--t-max", "5"],
    &["wigner-mc"],
    &["wigner-shift"],
    &["cycles-phi"],
    &["cycles-candidates"],
    &["cycles-opt"],
    &["cycles-mc"],
    &["nets-verify"],
    &["ising-solve", "--graph", "er", "--n", "12"],
];

fn run_cli(args: &[&str], threads: &str, out: &Path) -> std::result::Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_ldp-lab"))
        .args(args)
        .args(["--seed", "7", "--threads", threads, "--out"])
        .arg(out)
        .env_remove("LDP_LAB_THREADS")
        .stderr(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), format!("{args:?} exited with {status}"))?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn ac13() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, args) in SUBCOMMANDS.iter().enumerate() {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            for run in 0..2 {
                outputs.push(run_cli(args, threads, &dir.path().join(format!("{i}-{threads}-{run}.csv")))?);
            }
        }
        ensure(outputs.iter().all(|o| o == &outputs[0]), format!("{args:?} output differs across runs or thread counts"))?;
        ensure(!outputs[0].is_empty(), format!("{args:?} wrote nothing"))?;
    }
    Ok(format!("{} invocations byte-identical across 2 runs × threads {{1, 4}}", SUBCOMMANDS.len()))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("AC01", "Legendre duality and Bernoulli rate", ac01, Duration::from_secs(1)),
        ("AC02", "tightness moment E exp(Λ*/2) ≤ 4", ac02, Duration::from_secs(5)),
        ("AC03", "Ising sandwich with explicit net", ac03, Duration::from_secs(120)),
        ("AC04", "two-spin mean-field case", ac04, Duration::from_secs(1)),
        ("AC05", "Wigner trace moments", ac05, Duration::from_secs(60)),
        ("AC06", "uniform-shift trace and cost", ac06, Duration::from_secs(10)),
        ("AC07", "variational top-k trace representation", ac07, Duration::from_secs(10)),
        ("AC08", "tilted importance sampling vs enumeration", ac08, Duration::from_secs(30)),
        ("AC09", "independence polynomial, θ_t and Φ", ac09, Duration::from_secs(5)),
        ("AC10", "planted clique and hub costs", ac10, Duration::from_secs(1)),
        ("AC11", "numeric Φ beats planted candidates", ac11, Duration::from_secs(300)),
        ("AC12", "low-rank net size and coverage", ac12, Duration::from_secs(120)),
        ("AC13", "CLI determinism across threads", ac13, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {:.2}s, budget {}s", elapsed.as_secs_f64(), budget.as_secs()))
            }
        });
        match result {
            Ok(detail) => println!("[PASS] {id} {name}: {detail} ({:.2}s)", elapsed.as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {id} {name}: {detail} ({:.2}s)", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of 13 criteria passed", 13 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
