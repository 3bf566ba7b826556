//! Acceptance criteria. One PASS/FAIL line per criterion; the process exits
//! non-zero when any criterion fails. Tolerances are the pinned targets and
//! are not adjusted to fit the results.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mcg::data::Dataset;
use mcg::errata::{formula_report, Evidence, Kind};
use mcg::expansions::{mgf_series, mixture_cdf, mixture_pdf, moment_series, power_series_power, TruncationPolicy};
use mcg::family::{make_submodel, BaseKind, Member, ModelName, ModelSpec};
use mcg::inference::{fit_mle, fit_mle_with_starts, hessian, log_likelihood, score, FitResult, OptimizerConfig};
use mcg::orderstats::{os_pdf, OrderSpec};
use mcg::quadrature::{integrate, integrate_panels, QuadratureSpec};
use mcg::selection::{info_criteria, ks_test, lrt};
use mcg::shape::{bowley, mgf_numeric, moment_numeric, moors, renyi_numeric, shannon_numeric};
use mcg::specfun::{inc_beta_inv, normal_quantile, Tolerance};
use mcg::{aarset_devices, glass_fibers, McgParams};

type Fit = FitResult<f64>;

/// Outcome of one sub-check inside a criterion.
struct Check {
    label: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, label: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            label: label.into(),
            ok,
            detail: detail.into(),
        });
    }

    fn within(&mut self, label: &str, got: f64, target: f64, tol: f64) {
        let ok = (got - target).abs() <= tol;
        self.check(label, ok, format!("{got:.6} vs {target} ±{tol}"));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    fn line(&self, id: u32, title: &str) -> String {
        let mut s = format!("criterion {id} [{}] {title}:", if self.passed() { "PASS" } else { "FAIL" });
        for c in &self.checks {
            let _ = write!(s, " {}{} ({});", if c.ok { "" } else { "!" }, c.label, c.detail);
        }
        s
    }
}

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

struct Fits {
    aarset: Dataset<f64>,
    glass: Dataset<f64>,
    a_mcg: Fit,
    a_mcg_time: Duration,
    a_bg: Fit,
    a_kumg: Fit,
    a_mce: Fit,
    g_mcg: Fit,
    g_mcg_default: Fit,
    g_bg: Fit,
    g_kumg: Fit,
    g_mce: Fit,
}

fn seed_from(full: &ModelSpec, sub: &Fit) -> Vec<f64> {
    let mut v = sub.full_estimates().unwrap();
    if full.base == BaseKind::Gompertz && sub.model.base == BaseKind::Exponential {
        v.push(1e-6);
    }
    full.restrict(&v)
}

fn fits() -> Fits {
    let aarset = aarset_devices::<f64>();
    let glass = glass_fibers::<f64>();
    let t = Instant::now();
    let a_mcg = fit_mle(&ModelName::Mcg.spec(), &aarset, &cfg()).unwrap();
    let a_mcg_time = t.elapsed();
    let sub = |name: ModelName, d: &Dataset<f64>| fit_mle(&name.spec(), d, &cfg()).unwrap();
    let (a_bg, a_kumg, a_mce) = (sub(ModelName::Bg, &aarset), sub(ModelName::Kumg, &aarset), sub(ModelName::Mce, &aarset));
    let (g_bg, g_kumg, g_mce) = (sub(ModelName::Bg, &glass), sub(ModelName::Kumg, &glass), sub(ModelName::Mce, &glass));
    let full = ModelName::Mcg.spec();
    let seeds: Vec<Vec<f64>> = [&g_bg, &g_kumg, &g_mce].iter().map(|f| seed_from(&full, f)).collect();
    let g_mcg_default = fit_mle_with_starts(&full, &glass, &cfg(), &seeds).unwrap();
    let wide = OptimizerConfig { n_starts: 16, ..cfg() };
    let g_mcg = fit_mle_with_starts(&full, &glass, &wide, &seeds).unwrap();
    Fits {
        aarset,
        glass,
        a_mcg,
        a_mcg_time,
        a_bg,
        a_kumg,
        a_mce,
        g_mcg,
        g_mcg_default,
        g_bg,
        g_kumg,
        g_mce,
    }
}

fn ks_of(fit: &Fit, d: &Dataset<f64>) -> f64 {
    let m = fit.member().unwrap();
    ks_test(d, |y| m.cdf(y)).unwrap().statistic
}

fn criterion_1(f: &Fits) -> Criterion {
    let mut c = Criterion::default();
    let fit = &f.a_mcg;
    c.check("-logL<=219.06", fit.neg_loglik <= 219.06, format!("{:.4}", fit.neg_loglik));
    let ic = info_criteria(fit.neg_loglik, 5, f.aarset.len());
    c.within("AIC", ic.aic, 448.0081, 0.15);
    c.within("AICC", ic.aicc.unwrap(), 449.3718, 0.15);
    c.within("BIC", ic.bic, 457.5682, 0.15);
    c.within("K-S", ks_of(fit, &f.aarset), 0.1216, 0.005);
    c.check(
        "runtime<=60s (8 starts)",
        fit.n_starts == 8 && f.a_mcg_time <= Duration::from_secs(60),
        format!("{:.2?}, {} starts", f.a_mcg_time, fit.n_starts),
    );
    c
}

fn criterion_2(f: &Fits) -> Criterion {
    let mut c = Criterion::default();
    c.within("BG -logL", f.a_bg.neg_loglik, 220.6714, 0.05);
    c.within("KumG -logL", f.a_kumg.neg_loglik, 221.9666, 0.05);
    c.within("McE -logL", f.a_mce.neg_loglik, 237.8158, 0.05);
    let p = |nested: &Fit| lrt(&f.a_mcg, nested).map(|r| r.p_value);
    match (p(&f.a_bg), p(&f.a_kumg), p(&f.a_mce)) {
        (Ok(bg), Ok(kumg), Ok(mce)) => {
            c.within("LRT p BG", bg, 0.068, 0.005);
            c.within("LRT p KumG", kumg, 0.015, 0.003);
            c.check("LRT p McE<1e-6", mce < 1e-6, format!("{mce:.3e}"));
        }
        other => c.check("LRT", false, format!("{other:?}")),
    }
    c
}

fn criterion_3(f: &Fits) -> Criterion {
    let mut c = Criterion::default();
    let fit = &f.g_mcg;
    c.within("McG -logL", fit.neg_loglik, 11.4208, 0.10);
    c.check("McG -logL (8 starts)", (f.g_mcg_default.neg_loglik - 11.4208).abs() <= 0.10, format!("{:.4}", f.g_mcg_default.neg_loglik));
    c.within("AIC", info_criteria(fit.neg_loglik, 5, f.glass.len()).aic, 32.8417, 0.25);
    c.within("BG -logL", f.g_bg.neg_loglik, 14.2158, 0.10);
    c.within("KumG -logL", f.g_kumg.neg_loglik, 14.0305, 0.10);
    c.within("McE -logL", f.g_mce.neg_loglik, 15.5995, 0.10);
    c.within("K-S BG", ks_of(&f.g_bg, &f.glass), 0.1324, 0.005);
    c.within("K-S KumG", ks_of(&f.g_kumg, &f.glass), 0.1313, 0.005);
    c.within("K-S McE", ks_of(&f.g_mce, &f.glass), 0.1466, 0.005);
    c.within("K-S McG", ks_of(fit, &f.glass), 0.1159, 0.005);
    c
}

fn criterion_4(f: &Fits) -> Criterion {
    let mut c = Criterion::default();
    let names = ["a", "b", "c", "theta", "gamma"];
    let published: [(&str, &Fit, [f64; 5], [f64; 5]); 2] = [
        ("aarset", &f.a_mcg, [0.2619, 0.0752, 3.7652, 0.0012, 0.0875], [0.0656, 0.1029, 0.9946, 0.0001, 0.0001]),
        ("glass", &f.g_mcg, [0.7940, 0.1248, 192.1704, 0.0009, 5.2013], [0.2355, 0.1786, 307.3698, 0.0001, 0.4018]),
    ];
    for (data, fit, est, se) in published {
        for i in 0..5 {
            let got = fit.estimates[i];
            let ok = (got - est[i]).abs() <= 3.0 * se[i];
            c.check(format!("{data} {}", names[i]), ok, format!("{got:.5} vs {} ±3×{}", est[i], se[i]));
        }
    }
    c
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Random free parameters scaled to the data.
fn random_free(spec: &ModelSpec, d: &Dataset<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let med = d.median();
    let gamma = log_uniform(rng, 0.2, 3.0) / d.mean();
    let s = log_uniform(rng, 0.3, 3.0);
    let theta = match spec.base {
        BaseKind::Gompertz => s * gamma / (gamma * med).exp_m1(),
        BaseKind::Exponential => s / med,
    };
    spec.free_names()
        .iter()
        .map(|n| match *n {
            "theta" => theta,
            "gamma" => gamma,
            _ => log_uniform(rng, 0.3, 4.0),
        })
        .collect()
}

/// Largest log-scale discrepancy relative to the largest log-scale reference entry.
fn scaled_err(x: &[f64], analytic: &[f64], fd: &[f64]) -> f64 {
    let num = x.iter().zip(analytic).zip(fd).map(|((xi, a), b)| (xi * (a - b)).abs()).fold(0.0, f64::max);
    let den = x.iter().zip(fd).map(|(xi, b)| (xi * b).abs()).fold(1.0, f64::max);
    num / den
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::default();
    let sets = [aarset_devices::<f64>(), glass_fibers::<f64>()];
    let cases: Vec<(ModelSpec, usize, Vec<f64>)> = {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        (0..25)
            .map(|k| {
                let spec = ModelName::ALL[k % ModelName::ALL.len()].spec();
                let di = k % 2;
                let x = random_free(&spec, &sets[di], &mut rng);
                (spec, di, x)
            })
            .collect()
    };
    let h_rel = 1e-5;

    let t = Instant::now();
    let mut worst_g = 0.0_f64;
    for (spec, di, x) in &cases {
        let d = &sets[*di];
        let g = score(spec, x, d).unwrap();
        let fd: Vec<f64> = (0..x.len())
            .map(|i| {
                let h = h_rel * x[i];
                let (mut up, mut dn) = (x.clone(), x.clone());
                up[i] += h;
                dn[i] -= h;
                (log_likelihood(spec, &up, d).unwrap() - log_likelihood(spec, &dn, d).unwrap()) / (2.0 * h)
            })
            .collect();
        worst_g = worst_g.max(scaled_err(x, &g, &fd));
    }
    let tg = t.elapsed();
    c.check("score vs FD <=1e-5", worst_g <= 1e-5, format!("worst {worst_g:.2e} over 25 cases"));
    c.check("score gate <10s", tg < Duration::from_secs(10), format!("{tg:.2?}"));

    let t = Instant::now();
    let mut worst_h = 0.0_f64;
    for (spec, di, x) in &cases {
        let d = &sets[*di];
        let h = hessian(spec, x, d).unwrap();
        let n = x.len();
        let mut fd = vec![vec![0.0; n]; n];
        for j in 0..n {
            let step = h_rel * x[j];
            let (mut up, mut dn) = (x.clone(), x.clone());
            up[j] += step;
            dn[j] -= step;
            let (gu, gd) = (score(spec, &up, d).unwrap(), score(spec, &dn, d).unwrap());
            for i in 0..n {
                fd[i][j] = (gu[i] - gd[i]) / (2.0 * step);
            }
        }
        let mut num = 0.0_f64;
        let mut den = 1.0_f64;
        for i in 0..n {
            for j in 0..n {
                let s = x[i] * x[j];
                let sym = 0.5 * (fd[i][j] + fd[j][i]);
                num = num.max((s * (h[i][j] - sym)).abs());
                den = den.max((s * sym).abs());
            }
        }
        worst_h = worst_h.max(num / den);
    }
    let th = t.elapsed();
    c.check("information vs FD <=1e-4", worst_h <= 1e-4, format!("worst {worst_h:.2e} over 25 cases"));
    c.check("information gate <10s", th < Duration::from_secs(10), format!("{th:.2?}"));
    c
}

/// `∫ pdf` over `[0, Q(1 - 1e-10)]`, with the origin spike removed by `y = y1 s^m`.
fn total_mass(p: &McgParams<f64>) -> f64 {
    let tol = Tolerance::default();
    let q = QuadratureSpec::default();
    let levels = [0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 1.0 - 1e-6, 1.0 - 1e-8];
    let mut breaks: Vec<f64> = levels.iter().map(|&t| p.quantile_pair(t, 1.0 - t, &tol).unwrap()).collect();
    breaks.push(p.quantile_pair(1.0 - 1e-10, 1e-10, &tol).unwrap());
    let y1 = breaks[0];
    let m = (2.0 / p.a).max(1.0);
    let head = integrate(|s: f64| if s > 0.0 { p.pdf(y1 * s.powf(m)) * m * y1 * s.powf(m - 1.0) } else { 0.0 }, 0.0, 1.0, &q).unwrap();
    head.value + integrate_panels(|y| p.pdf(y), &breaks, &q).unwrap().value
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::default();
    let grid = [0.3, 1.0, 3.0];

    let mut worst = 0.0_f64;
    for &a in &grid {
        for &b in &grid {
            for &cc in &grid {
                let p = McgParams::new(a, b, cc, 0.1, 0.5).unwrap();
                worst = worst.max((total_mass(&p) - (1.0 - 1e-10)).abs());
            }
        }
    }
    c.check("normalization 27 points <=1e-6", worst <= 1e-6, format!("worst {worst:.2e}"));

    let tol = Tolerance::default();
    let mut worst = 0.0_f64;
    for &a in &grid {
        for &b in &grid {
            for &cc in &grid {
                let p = McgParams::new(a, b, cc, 0.1, 0.5).unwrap();
                for k in 1..100 {
                    let t = k as f64 / 100.0;
                    let y = p.quantile(t, &tol).unwrap();
                    worst = worst.max((p.cdf(y).unwrap() - t).abs());
                }
            }
        }
    }
    c.check("quantile round trip <=1e-8", worst <= 1e-8, format!("worst {worst:.2e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let policy = TruncationPolicy::default();
    let (mut worst, mut used) = (0.0_f64, 0usize);
    for _ in 0..20 {
        let p = McgParams::new(
            log_uniform(&mut rng, 0.3, 4.0),
            log_uniform(&mut rng, 0.3, 4.0),
            log_uniform(&mut rng, 0.3, 4.0),
            log_uniform(&mut rng, 0.05, 2.0),
            log_uniform(&mut rng, 0.05, 2.0),
        )
        .unwrap();
        let hi = p.quantile(0.99, &tol).unwrap();
        for k in 1..=20 {
            let y = hi * k as f64 / 20.0;
            let (mc, mp) = (mixture_cdf(&p, y, &policy).unwrap(), mixture_pdf(&p, y, &policy).unwrap());
            if mc.converged && mp.converged {
                used += 1;
                worst = worst.max((mc.value - p.cdf(y).unwrap()).abs()).max((mp.value - p.pdf(y)).abs());
            }
        }
    }
    c.check("mixture vs exact <=1e-8", worst <= 1e-8 && used > 0, format!("worst {worst:.2e} on {used}/400 converged points"));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = aarset_devices::<f64>();
    let (mut worst, mut edges) = (0.0_f64, 0);
    for parent in ModelName::ALL {
        for child in ModelName::ALL {
            let (ps, cs) = (parent.spec(), child.spec());
            if !ps.contains(&cs) || ps.base != cs.base {
                continue;
            }
            edges += 1;
            let x = random_free(&cs, &d, &mut rng);
            let cm = cs.member(&x).unwrap();
            let pm = ps.member(&ps.restrict(&cs.embed(&x).unwrap())).unwrap();
            for k in 1..=100 {
                let y = 90.0 * k as f64 / 100.0;
                let (u, v) = (cm.pdf(y), pm.pdf(y));
                if u > 1e-300 {
                    worst = worst.max((u - v).abs() / u);
                }
            }
        }
    }
    // closed forms of the Gompertz-base members
    let g = McgParams::new(1.0, 1.0, 1.0, 0.02, 0.05).unwrap();
    let gm = |name: ModelName, v: &[(&str, f64)]| make_submodel(name, v).unwrap();
    let bg = gm(ModelName::Bg, &[("a", 1.7), ("b", 0.6), ("theta", 0.02), ("gamma", 0.05)]);
    let kumg = gm(ModelName::Kumg, &[("b", 3.0), ("c", 2.0), ("theta", 0.02), ("gamma", 0.05)]);
    let gg = gm(ModelName::Gg, &[("a", 2.5), ("theta", 0.02), ("gamma", 0.05)]);
    let lb = mcg::specfun::ln_beta(1.7, 0.6).unwrap();
    for k in 1..=100 {
        let y = 0.5 * k as f64;
        let (gy, fy) = (g.base_cdf(y), g.base_pdf(y));
        let forms: [(&Member<f64>, f64); 3] = [
            (&bg, (fy.ln() + 0.7 * gy.ln() + (-0.4) * (1.0 - gy).ln() - lb).exp()),
            (&kumg, 6.0 * fy * gy * (1.0 - gy * gy).powi(2)),
            (&gg, 2.5 * fy * gy.powf(1.5)),
        ];
        for (m, v) in forms {
            if v > 1e-300 {
                worst = worst.max((m.pdf(y) - v).abs() / v);
            }
        }
    }
    c.check("sub-model lattice <=1e-12", worst <= 1e-12, format!("worst {worst:.2e} over {edges} edges + closed forms"));

    let p = McgParams::new(1.4, 0.7, 2.0, 0.3, 0.8).unwrap();
    let mut worst = 0.0_f64;
    for n in [3usize, 5, 8] {
        for k in 1..=30 {
            let y = 0.1 * k as f64;
            let sum: f64 = (1..=n).map(|i| os_pdf(&p, OrderSpec::new(i, n).unwrap(), y).unwrap()).sum();
            let f = n as f64 * p.pdf(y);
            worst = worst.max((sum - f).abs() / f);
        }
    }
    c.check("order-statistic identity <=1e-9", worst <= 1e-9, format!("worst {worst:.2e}"));
    c
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::default();
    let sets = [
        (0.2619, 0.0752, 3.7652, 0.0012, 0.0875),
        (1.0, 1.0, 1.0, 1.0, 1.0),
        (0.5, 2.5, 1.3, 0.4, 0.9),
        (3.0, 0.4, 0.6, 0.05, 1.5),
        (1.5, 0.7, 2.0, 0.2, 0.8),
    ];
    for (k, (a, b, cc, th, ga)) in sets.into_iter().enumerate() {
        let p = McgParams::new(a, b, cc, th, ga).unwrap();
        let draws = p.sample(100_000, 1000 + k as u64).unwrap();
        let ks = ks_test(&Dataset::new(draws, "draws").unwrap(), |y| p.cdf(y)).unwrap();
        c.check(format!("set {}", k + 1), ks.p_value > 0.01, format!("D={:.5}, p={:.3}", ks.statistic, ks.p_value));
    }
    c
}

fn student_t_quantile(nu: f64, p: f64) -> mcg::Result<f64> {
    let tol = Tolerance::default();
    let tail = 2.0 * p.min(1.0 - p);
    let x = inc_beta_inv(tail, nu / 2.0, 0.5, &tol)?;
    let t = (nu * (1.0 - x) / x).sqrt();
    Ok(if p < 0.5 { -t } else { t })
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::default();
    c.within("Moors N(0,1)", moors(normal_quantile::<f64>).unwrap(), 1.2331, 1e-3);
    c.within("Moors t10", moors(|p| student_t_quantile(10.0, p)).unwrap(), 1.27705, 1e-3);
    let symmetric: [(&str, Box<dyn Fn(f64) -> mcg::Result<f64>>); 3] = [
        ("normal", Box::new(normal_quantile::<f64>)),
        ("logistic", Box::new(|p: f64| Ok((p / (1.0 - p)).ln()))),
        ("t3", Box::new(|p| student_t_quantile(3.0, p))),
    ];
    for (name, q) in symmetric {
        let v = bowley(q).unwrap();
        c.check(format!("Bowley {name}=0"), v.abs() <= 1e-10, format!("{v:.2e}"));
    }

    let q = QuadratureSpec::default();
    for (a, b, cc, th, ga) in [(1.5, 0.7, 2.0, 0.2, 0.8), (0.8, 2.0, 1.5, 0.5, 0.3)] {
        let p = McgParams::new(a, b, cc, th, ga).unwrap();
        let h = shannon_numeric(&p, &q).unwrap();
        let n = 200_000;
        let lp: Vec<f64> = p.sample(n, 99).unwrap().iter().map(|&y| -p.log_pdf(y)).collect();
        let mean = lp.iter().sum::<f64>() / n as f64;
        let var = lp.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        c.check(format!("Shannon vs MC a={a}"), (h - mean).abs() <= 3.0 * se, format!("{h:.5} vs {mean:.5} (SE {se:.1e})"));
        let (lo, hi) = (renyi_numeric(&p, 0.999, &q).unwrap(), renyi_numeric(&p, 1.001, &q).unwrap());
        let err = (lo - h).abs().max((hi - h).abs());
        c.check(format!("Renyi(1±1e-3)->Shannon a={a}"), err <= 1e-2, format!("{err:.2e}"));
    }
    c
}

fn convolve(b: &[f64], m: u32, r_max: usize) -> Vec<f64> {
    let mut acc = vec![1.0];
    for _ in 0..m {
        let mut next = vec![0.0; acc.len() + b.len() - 1];
        for (i, x) in acc.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        acc = next;
    }
    acc.resize(r_max + 1, 0.0);
    acc
}

fn errata_path() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("errata.json")
}

fn criterion_9(f: &Fits) -> Criterion {
    let mut c = Criterion::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let len = rng.gen_range(1..=7);
        let mut b: Vec<f64> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if b[0].abs() < 0.1 {
            b[0] = 1.0;
        }
        let m = rng.gen_range(1..=5);
        let r_max = 8;
        let got = power_series_power(&b, m, r_max).unwrap();
        let exact = convolve(&b, m, r_max);
        let scale = convolve(&b.iter().map(|v| v.abs()).collect::<Vec<_>>(), m, r_max);
        for r in 0..=r_max {
            if scale[r] > 0.0 {
                worst = worst.max((got[r] - exact[r]).abs() / scale[r]);
            }
        }
    }
    c.check("power series vs convolution <=1e-10", worst <= 1e-10, format!("worst {worst:.2e} over 100 cases"));

    let policy = TruncationPolicy::default();
    let q = QuadratureSpec::default();
    let cases = [
        (1.0, 1.0, 1.0, 1.0, 1.0),
        (2.0, 1.0, 1.0, 1.0, 1.0),
        (1.5, 2.0, 1.0, 0.5, 1.0),
        (0.7, 1.0, 1.3, 0.5, 1.0),
        (1.0, 2.5, 2.0, 1.0, 2.0),
        (1.5, 1.0, 1.0, 50.0, 1.0),
    ];
    let (mut moment_worst, mut moment_used) = (0.0_f64, 0);
    let (mut mgf_worst, mut mgf_used, mut mgf_bad) = (0.0_f64, 0, Vec::new());
    for (a, b, cc, th, ga) in cases {
        let p = McgParams::<f64>::new(a, b, cc, th, ga).unwrap();
        for k in 1..=3u32 {
            let s = moment_series(&p, k, &policy).unwrap();
            if let (true, Some(v)) = (s.converged, s.value) {
                moment_used += 1;
                let r = moment_numeric(&p, k, &q).unwrap();
                moment_worst = moment_worst.max((v - r).abs() / r.abs());
            }
        }
        for t in [0.5 * ga, ga, 0.1] {
            let s = mgf_series(&p, t, &policy).unwrap();
            if let (true, Some(v)) = (s.converged, s.value) {
                mgf_used += 1;
                let r = mgf_numeric(&p, t, &q).unwrap();
                let e = (v - r).abs() / r.abs();
                if e > 1e-3 {
                    mgf_bad.push(format!("a={a},b={b},c={cc},t={t}"));
                }
                mgf_worst = mgf_worst.max(e);
            }
        }
    }
    c.check(
        "moment series vs quadrature <=1e-3 where converged",
        moment_worst <= 1e-3 && moment_used > 0,
        format!("worst {moment_worst:.2e} on {moment_used} converged"),
    );
    c.check(
        "mgf series vs quadrature <=1e-3 where converged",
        mgf_worst <= 1e-3 && mgf_used > 0,
        format!("worst {mgf_worst:.2e} on {mgf_used} converged; off at {}", if mgf_bad.is_empty() { "none".into() } else { mgf_bad.join(" ") }),
    );

    // fitted-table findings join the formula-level report
    let mut report = formula_report().unwrap();
    let (aarset, glass) = (&f.aarset, &f.glass);
    let mcg = ModelName::Mcg.spec();
    let printed_a = log_likelihood(&mcg, &[0.2619, 0.0752, 3.7652, 0.0012, 0.0875], aarset).unwrap();
    let printed_g = log_likelihood(&mcg, &[0.7940, 0.1248, 192.1704, 0.0009, 5.2013], glass).unwrap();
    report.push(
        "fit.aarset.mcg",
        Kind::Table,
        "McG -logL 219.0041 at a=0.2619, b=0.0752, c=3.7652, theta=0.0012, gamma=0.0875",
        &format!(
            "printed estimates give -logL {:.4}; a lower value {:.4} exists with {} at the search bound",
            -printed_a,
            f.a_mcg.neg_loglik,
            f.a_mcg.at_bound.join(",")
        ),
        Some(Evidence::new(219.0041, f.a_mcg.neg_loglik, "aarset_devices")),
    );
    let mce_a = log_likelihood(&ModelName::Mce.spec(), &[0.8643, 0.0706, 2.7127, 0.2826], aarset).unwrap();
    report.push(
        "fit.aarset.mce",
        Kind::Table,
        "McE -logL 237.8158",
        &format!("printed estimates give -logL {:.4}; the maximised value is {:.4}", -mce_a, f.a_mce.neg_loglik),
        Some(Evidence::new(237.8158, f.a_mce.neg_loglik, "aarset_devices")),
    );
    report.push(
        "fit.glass.mcg",
        Kind::Table,
        "McG -logL 11.4208 at a=0.7940, b=0.1248, c=192.1704, theta=0.0009, gamma=5.2013",
        &format!("printed estimates give -logL {:.4}; a lower value {:.4} exists", -printed_g, f.g_mcg.neg_loglik),
        Some(Evidence::new(11.4208, f.g_mcg.neg_loglik, "glass_fibers")),
    );
    report.push(
        "fit.glass.mce",
        Kind::Table,
        "McE -logL 15.5995",
        &format!("the maximised value is {:.4}", f.g_mce.neg_loglik),
        Some(Evidence::new(15.5995, f.g_mce.neg_loglik, "glass_fibers")),
    );
    report.push(
        "fit.aarset.lrt_bg",
        Kind::Table,
        "LRT McG vs BG 3.3356",
        "2 (220.6714 - 219.0041) = 3.3346 from the printed likelihoods",
        Some(Evidence::new(3.3356, 3.3346, "aarset_devices")),
    );
    let path = errata_path();
    let written = std::fs::write(&path, report.to_json()).is_ok();
    let entries = report.entries.len();
    c.check("erratum report written", written && entries > 0, format!("{entries} entries -> {}", path.display()));
    c
}

fn main() {
    let fits = fits();
    type Run<'a> = Box<dyn Fn() -> Criterion + 'a>;
    let criteria: Vec<(u32, &str, Run)> = vec![
        (1, "device data, McG fit", Box::new(|| criterion_1(&fits))),
        (2, "device data, sub-models and LRT", Box::new(|| criterion_2(&fits))),
        (3, "glass fibre data", Box::new(|| criterion_3(&fits))),
        (4, "McG estimates within 3 published SE", Box::new(|| criterion_4(&fits))),
        (5, "derivative gates", Box::new(criterion_5)),
        (6, "distributional properties", Box::new(criterion_6)),
        (7, "sampler", Box::new(criterion_7)),
        (8, "shape and entropy", Box::new(criterion_8)),
        (9, "series fidelity and erratum report", Box::new(|| criterion_9(&fits))),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (id, title, run) in &criteria {
        let c = run();
        if !c.passed() {
            failed += 1;
        }
        let _ = writeln!(out, "{}", c.line(*id, title));
    }
    let _ = writeln!(out, "acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    drop(out);
    if failed > 0 {
        std::process::exit(1);
    }
}
