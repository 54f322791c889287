//! Command-line front end: generate polygons, extract and normalize moduli,
//! iterate the map, sample spectral data, and run verification batteries.
//! Outputs are deterministic for a fixed argv and seed.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num::complex::Complex64;
use num::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use grasspenta::eigen::char_poly;
use grasspenta::error::{Error, Result};
use grasspenta::field::to_c64;
use grasspenta::json::{
    chain_to_json, error_to_json, gauge_to_json, lift_to_json, parse_chain, parse_lift, AnyChain,
    AnyLift, SpectralReport,
};
use grasspenta::lax::{
    coeff_deviation, decompose_columns, degree_check_unnormalized, lambda_degree_check,
    observable_deviation, scaling_commutation_check, spectral_curve, spectral_samples,
};
use grasspenta::matrix::Mat;
use grasspenta::normalize::{normalize_lift, syzygy_residual};
use grasspenta::oracle::{cramer_map_coefficients, exact_rank};
use grasspenta::pentamap::{map_algebraic_unnormalized, map_geometric, map_moduli};
use grasspenta::polygon::{
    extract_invariants, q_det_sign, random_regular_lift, Chain, Lift,
};
use grasspenta::DEFAULT_EPS;

#[derive(Parser)]
#[command(name = "grasspenta", version, about = "Pentagram maps on twisted polygons in Grassmannians")]
struct Cli {
    /// Numerical tolerance; overrides the GRASSPENTA_TOL environment variable.
    #[arg(long, global = true, value_name = "EPS")]
    tol: Option<f64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Complex,
    Rational,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random regular twisted polygon and write its lift as JSON.
    Gen {
        /// Block size n of Gr(n, mn).
        #[arg(short)]
        n: usize,
        /// Diagonal span parameter m (ambient dimension mn).
        #[arg(short)]
        m: usize,
        /// Period N of the twisted polygon; must be coprime to m.
        #[arg(short = 'N')]
        big_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        /// Output file; stdout when omitted.
        #[arg(short = 'o', value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Extract the moduli coordinates of a lift file.
    Invariants {
        #[arg(short = 'i', value_name = "LIFT")]
        input: PathBuf,
        #[arg(short = 'o', value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Gauge-fix a complex lift canonically; writes normalized_lift.json,
    /// chain.json, and gauge.json into the output directory.
    Normalize {
        #[arg(short = 'i', value_name = "LIFT")]
        input: PathBuf,
        #[arg(short = 'o', value_name = "DIR")]
        outdir: PathBuf,
    },
    /// Iterate the map on a chain file; writes chain_001.json .. and a
    /// spectral_drift.csv tracking char-poly coefficients per iteration.
    Map {
        #[arg(short = 'i', value_name = "CHAIN")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        iters: usize,
        #[arg(short = 'o', value_name = "DIR")]
        outdir: PathBuf,
    },
    /// Sample char polys of the parameter companion product and interpolate
    /// the conserved curve.
    Spectral {
        #[arg(short = 'i', value_name = "CHAIN")]
        input: PathBuf,
        /// Comma-separated unit-circle angles in radians for the mu samples.
        #[arg(long, value_name = "ANGLES")]
        mus: Option<String>,
        #[arg(short = 'o', value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Check the scaling homogeneity laws and map/scaling commutation on a
    /// complex chain file; exits 1 when a law fails its tolerance.
    ScalingCheck {
        #[arg(short = 'i', value_name = "CHAIN")]
        input: PathBuf,
    },
    /// Run the built-in property battery on randomly generated instances.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the floating map coefficients against the exact Cramer path
    /// on a rational chain (generated from the seed when no input is given).
    OracleCompare {
        #[arg(short = 'i', value_name = "CHAIN")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = cli
        .tol
        .or_else(|| {
            std::env::var("GRASSPENTA_TOL")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_EPS);
    match run(cli.cmd, tol) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_to_json(&e));
            ExitCode::from(1)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            fs::write(p, format!("{text}\n"))?;
            Ok(())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_complex_chain(p: &Path) -> Result<Chain<Complex64>> {
    match parse_chain(&fs::read_to_string(p)?)? {
        AnyChain::Complex(c) => Ok(c),
        AnyChain::Rational(_) => Err(Error::Parse(
            "this subcommand needs a complex-field chain".into(),
        )),
    }
}

fn rational_chain_to_c64(chain: &Chain<BigRational>) -> Chain<Complex64> {
    let a = (0..chain.big_n)
        .map(|k| {
            (0..chain.m)
                .map(|i| {
                    let b = chain.block(k, i);
                    Mat::from_fn(chain.n, chain.n, |r, c| to_c64(b.at(r, c)))
                })
                .collect()
        })
        .collect();
    Chain::new(chain.n, chain.m, chain.big_n, a).expect("dims preserved")
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ten fixed unit-circle samples, offset from the real axis.
fn default_mu_angles() -> Vec<f64> {
    (0..10).map(|t| 0.05 + TAU * t as f64 / 10.0).collect()
}

fn parse_mu_angles(arg: &str) -> Result<Vec<f64>> {
    arg.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad angle in --mus: {s:?}")))
        })
        .collect()
}

fn mus_from_angles(angles: &[f64]) -> Vec<Complex64> {
    angles
        .iter()
        .map(|&th| Complex64::from_polar(1.0, th))
        .collect()
}

fn run(cmd: Cmd, tol: f64) -> Result<bool> {
    match cmd {
        Cmd::Gen {
            n,
            m,
            big_n,
            seed,
            field,
            out,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let text = match field {
                FieldArg::Complex => {
                    lift_to_json(&random_regular_lift::<Complex64, _>(n, m, big_n, &mut rng, tol)?)
                }
                FieldArg::Rational => lift_to_json(&random_regular_lift::<BigRational, _>(
                    n, m, big_n, &mut rng, tol,
                )?),
            };
            emit(&text, out.as_deref())?;
            Ok(true)
        }

        Cmd::Invariants { input, out } => {
            let text = match parse_lift(&fs::read_to_string(&input)?)? {
                AnyLift::Complex(l) => chain_to_json(&extract_invariants(&l, tol)?),
                AnyLift::Rational(l) => chain_to_json(&extract_invariants(&l, tol)?),
            };
            emit(&text, out.as_deref())?;
            Ok(true)
        }

        Cmd::Normalize { input, outdir } => {
            let AnyLift::Complex(lift) = parse_lift(&fs::read_to_string(&input)?)? else {
                return Err(Error::Parse(
                    "normalization needs a complex-field lift".into(),
                ));
            };
            let (canonical, chain, gauge) = normalize_lift(&lift, tol)?;
            fs::create_dir_all(&outdir)?;
            emit(
                &lift_to_json(&canonical),
                Some(&outdir.join("normalized_lift.json")),
            )?;
            emit(&chain_to_json(&chain), Some(&outdir.join("chain.json")))?;
            emit(&gauge_to_json(&gauge), Some(&outdir.join("gauge.json")))?;
            Ok(true)
        }

        Cmd::Map {
            input,
            iters,
            outdir,
        } => {
            let mut chain = read_complex_chain(&input)?;
            fs::create_dir_all(&outdir)?;
            let mus = mus_from_angles(&default_mu_angles());
            let mut csv = String::new();
            let width = chain.m * chain.n + 1;
            csv.push_str("iter");
            for t in 0..mus.len() {
                for j in 0..width {
                    csv.push_str(&format!(",mu{t}_c{j}_re,mu{t}_c{j}_im"));
                }
            }
            csv.push('\n');
            let mut push_row = |iter: usize, ch: &Chain<Complex64>| -> Result<()> {
                let samples = spectral_samples(ch, &mus)?;
                csv.push_str(&iter.to_string());
                for poly in &samples {
                    for c in poly {
                        csv.push_str(&format!(",{},{}", fmt(c.re), fmt(c.im)));
                    }
                }
                csv.push('\n');
                Ok(())
            };
            push_row(0, &chain)?;
            for it in 1..=iters {
                chain = map_moduli(&chain, tol)?.0;
                emit(
                    &chain_to_json(&chain),
                    Some(&outdir.join(format!("chain_{it:03}.json"))),
                )?;
                push_row(it, &chain)?;
            }
            fs::write(outdir.join("spectral_drift.csv"), csv)?;
            Ok(true)
        }

        Cmd::Spectral { input, mus, out } => {
            let chain = read_complex_chain(&input)?;
            let angles = match &mus {
                Some(s) => parse_mu_angles(s)?,
                None => default_mu_angles(),
            };
            let mus = mus_from_angles(&angles);
            let eta_polys = spectral_samples(&chain, &mus)?;
            let curve = spectral_curve(&chain, tol.max(1e-8))?;
            let report = SpectralReport {
                mus,
                eta_polys,
                curve,
            };
            emit(&grasspenta::json::spectral_to_json(&report), out.as_deref())?;
            Ok(true)
        }

        Cmd::ScalingCheck { input } => {
            let chain = read_complex_chain(&input)?;
            let unit = Complex64::from_polar(1.0, std::f64::consts::PI / 7.0);
            let degree = [Complex64::new(0.5, 0.0), Complex64::new(2.0, 0.0), unit]
                .iter()
                .map(|&mu| degree_check_unnormalized(&chain, mu, tol))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0f64, f64::max);
            let lambda = [0.5, 2.0]
                .iter()
                .map(|&mu| lambda_degree_check(&chain, mu, tol))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0f64, f64::max);
            let commute = [0.5, 2.0]
                .iter()
                .map(|&mu| scaling_commutation_check(&chain, mu, tol))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0f64, f64::max);
            let checks = [
                ("unnormalized_degree", degree, 1e-8),
                ("lambda_degree", lambda, 1e-7),
                ("commutation", commute, 1e-6),
            ];
            let all = checks.iter().all(|(_, dev, lim)| dev <= lim);
            let body: Vec<String> = checks
                .iter()
                .map(|(name, dev, lim)| {
                    format!(
                        "\"{name}\":{{\"max_dev\":{},\"tol\":{},\"pass\":{}}}",
                        fmt(*dev),
                        fmt(*lim),
                        dev <= lim
                    )
                })
                .collect();
            println!("{{{},\"pass\":{all}}}", body.join(","));
            Ok(all)
        }

        Cmd::Verify { seed } => run_verify(seed, tol),

        Cmd::OracleCompare { input, seed } => {
            let chain = match input {
                Some(p) => match parse_chain(&fs::read_to_string(&p)?)? {
                    AnyChain::Rational(c) => c,
                    AnyChain::Complex(_) => {
                        return Err(Error::Parse(
                            "oracle comparison needs a rational-field chain".into(),
                        ))
                    }
                },
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let lift =
                        random_regular_lift::<BigRational, _>(1, 3, 5, &mut rng, tol)?;
                    extract_invariants(&lift, tol)?
                }
            };
            let exact = cramer_map_coefficients(&chain)?;
            let float = map_algebraic_unnormalized(&rational_chain_to_c64(&chain), tol)?;
            let want = rational_chain_to_c64(&exact);
            let mut dev = 0.0f64;
            for k in 0..chain.big_n {
                for i in 0..chain.m {
                    dev = dev.max(grasspenta::matrix::rel_dist(
                        float.block(k, i),
                        want.block(k, i),
                    ));
                }
            }
            let pass = dev <= 1e-10;
            println!(
                "{{\"max_rel_dev\":{},\"tol\":{},\"pass\":{pass}}}",
                fmt(dev),
                fmt(1e-10)
            );
            Ok(pass)
        }
    }
}

struct Battery {
    failures: usize,
}

impl Battery {
    fn check(&mut self, name: &str, dev: f64, lim: f64) {
        let ok = dev <= lim;
        if !ok {
            self.failures += 1;
        }
        println!(
            "{} {name}: {:.3e} (limit {:.1e})",
            if ok { "PASS" } else { "FAIL" },
            dev,
            lim
        );
    }

    fn check_flag(&mut self, name: &str, ok: bool, detail: &str) {
        if !ok {
            self.failures += 1;
        }
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn frame_unit_dev(lift: &Lift<Complex64>) -> f64 {
    (0..lift.big_n)
        .map(|k| (lift.rho(k).det() - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0f64, f64::max)
}

fn run_verify(seed: u64, tol: f64) -> Result<bool> {
    let mut battery = Battery { failures: 0 };
    let sizes = [(1usize, 3usize, 5usize), (2, 3, 5), (1, 4, 5), (1, 5, 6), (2, 4, 7)];
    for (case, &(n, m, big_n)) in sizes.iter().enumerate() {
        let tag = format!("n={n} m={m} N={big_n}");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(case as u64));
        let lift = random_regular_lift::<Complex64, _>(n, m, big_n, &mut rng, tol)?;
        let (canonical, chain, _) = normalize_lift(&lift, tol)?;

        battery.check(
            &format!("unit frame determinants, {tag}"),
            frame_unit_dev(&canonical),
            1e-9,
        );
        let sigma = Complex64::new(q_det_sign(n, m) as f64, 0.0);
        let det_dev = (0..big_n)
            .map(|k| (chain.block(k, 0).det() - sigma).norm())
            .fold(0.0f64, f64::max);
        battery.check(&format!("pinned leading determinants, {tag}"), det_dev, 1e-9);
        battery.check(
            &format!("syzygy residual, {tag}"),
            syzygy_residual(&chain),
            1e-8,
        );

        let (image, _) = map_moduli(&chain, tol)?;
        let geometric = map_geometric(&canonical, tol)?;
        let (_, geo_chain, _) = normalize_lift(&geometric, tol)?;
        battery.check(
            &format!("two-path observables, {tag}"),
            observable_deviation(&image, &geo_chain)?,
            1e-7,
        );
        battery.check(
            &format!("monodromy char poly conservation, {tag}"),
            coeff_deviation(&char_poly(&chain.monodromy()), &char_poly(&image.monodromy())),
            1e-7,
        );

        let decomp_dev = (0..big_n)
            .map(|k| decompose_columns(&chain, k).reconstruction_residual())
            .fold(0.0f64, f64::max);
        battery.check(&format!("column decomposition, {tag}"), decomp_dev, 1e-10);

        battery.check(
            &format!("unnormalized degree law, {tag}"),
            degree_check_unnormalized(&chain, Complex64::new(2.0, 0.0), tol)?,
            1e-8,
        );
        battery.check(
            &format!("gauge determinant degree, {tag}"),
            lambda_degree_check(&chain, 2.0, tol)?,
            1e-7,
        );
        battery.check(
            &format!("map/scaling commutation, {tag}"),
            scaling_commutation_check(&chain, 2.0, tol)?,
            1e-6,
        );

        let mus = mus_from_angles(&default_mu_angles());
        let before = spectral_samples(&chain, &mus)?;
        let after = spectral_samples(&image, &mus)?;
        let spec_dev = before
            .iter()
            .zip(&after)
            .map(|(b, a)| coeff_deviation(b, a))
            .fold(0.0f64, f64::max);
        battery.check(&format!("spectral sample conservation, {tag}"), spec_dev, 1e-6);
    }

    for (case, &(n, m, big_n)) in [(1usize, 3usize, 5usize), (2, 3, 5), (1, 4, 5)]
        .iter()
        .enumerate()
    {
        let tag = format!("n={n} m={m} N={big_n}");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(100 + case as u64));
        let lift = random_regular_lift::<BigRational, _>(n, m, big_n, &mut rng, tol)?;
        let mut rank_ok = true;
        for k in 0..big_n {
            let evens: Vec<Mat<BigRational>> =
                (0..=m).step_by(2).map(|o| lift.x_at(k + o)).collect();
            let odds: Vec<Mat<BigRational>> =
                (1..=m).step_by(2).map(|o| lift.x_at(k + o)).collect();
            let a = Mat::hstack(&evens);
            let b = Mat::hstack(&odds);
            let stacked = Mat::hstack(&[a.clone(), b.clone()]);
            rank_ok &= a.cols() + b.cols() - exact_rank(&stacked) == n;
        }
        battery.check_flag(
            &format!("exact intersection dimension, {tag}"),
            rank_ok,
            "rank certificate over the rationals",
        );

        let chain = extract_invariants(&lift, tol)?;
        let exact = cramer_map_coefficients(&chain)?;
        let float = map_algebraic_unnormalized(&rational_chain_to_c64(&chain), tol)?;
        let want = rational_chain_to_c64(&exact);
        let mut dev = 0.0f64;
        for k in 0..big_n {
            for i in 0..m {
                dev = dev.max(grasspenta::matrix::rel_dist(
                    float.block(k, i),
                    want.block(k, i),
                ));
            }
        }
        battery.check(&format!("Cramer oracle agreement, {tag}"), dev, 1e-10);
    }

    println!("{} checks failed", battery.failures);
    Ok(battery.failures == 0)
}
