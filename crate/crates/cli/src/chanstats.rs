//! The `channel-stats` subcommand: empirical moments and distribution checks
//! for the simulated channels.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;

use coordtune::channel::{
    fiber_noise_variance, gg_pdf, gg_sample, scintillation_index, ChannelModel, FiberParams,
};
use coordtune::seed::rng_from;
use coordtune::stats::{cumulative_cdf, ks_statistic, mean, variance};

pub struct StatsArgs {
    pub channel: String,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub es_n0_db: f64,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn run(args: &StatsArgs) -> Result<()> {
    if args.n < 1_000 {
        bail!("need at least 1000 samples for stable statistics, got {}", args.n);
    }
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    match args.channel.as_str() {
        "fso" => fso_stats(args),
        "fiber" => noise_stats(args, ChannelModel::Fiber(FiberParams::table_defaults())),
        "awgn" => noise_stats(args, ChannelModel::awgn_at_es_n0_db(args.es_n0_db)),
        other => bail!("unknown channel `{other}` (expected fso | fiber | awgn)"),
    }
}

fn fso_stats(args: &StatsArgs) -> Result<()> {
    let (alpha, beta) = (args.alpha, args.beta);
    let mut rng = rng_from(args.seed);
    let mut samples = gg_sample(&mut rng, alpha, beta, args.n);

    let m = mean(&samples);
    let v = variance(&samples);
    let si_emp = v / (m * m);
    let si_theory = scintillation_index(alpha, beta);

    samples.sort_by(|a, b| a.total_cmp(b));
    let pdf = move |x: f64| gg_pdf(x, alpha, beta).unwrap_or(0.0);
    let cdf = cumulative_cdf(&pdf, &samples, 1e-9);
    let ks = ks_statistic(&cdf);

    write_histogram(&args.out.join("histogram.csv"), &samples, 80)?;
    println!("channel: fso (Gamma-Gamma alpha={alpha} beta={beta}, n={})", args.n);
    println!("mean intensity: {m:.6} (theory 1.000000)");
    println!("variance: {v:.6}");
    println!("scintillation index: {si_emp:.6} (theory {si_theory:.6})");
    println!("ks distance vs quadrature cdf: {ks:.6}");
    Ok(())
}

/// For the additive-noise channels, checks the realized complex noise
/// variance against the requested one.
fn noise_stats(args: &StatsArgs, model: ChannelModel) -> Result<()> {
    let requested = match &model {
        ChannelModel::Fiber(p) => {
            let noise = fiber_noise_variance(p)?;
            println!(
                "channel: fiber (sigma_ase2={:.3e}, sigma_nlin2={:.3e}, snr_eff={:.2} dB)",
                noise.sigma_ase2,
                noise.sigma_nlin2,
                10.0 * noise.snr_eff.log10()
            );
            // The channel is normalized to the unit-energy constellation, so
            // the realized noise variance is 1/SNR_eff.
            1.0 / noise.snr_eff
        }
        ChannelModel::Awgn { noise_variance } => {
            println!("channel: awgn (Es/N0 = {:.1} dB)", args.es_n0_db);
            *noise_variance
        }
        ChannelModel::Fso(_) => unreachable!("fso handled separately"),
    };

    let zeros = vec![Complex64::new(0.0, 0.0); args.n];
    let received = model.apply(&zeros, args.seed)?;
    let emp = mean(&received.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
    let mut mags: Vec<f64> = received.iter().map(|z| z.norm()).collect();
    mags.sort_by(|a, b| a.total_cmp(b));
    write_histogram(&args.out.join("histogram.csv"), &mags, 80)?;

    println!("requested noise variance: {requested:.6e}");
    println!("empirical noise variance: {emp:.6e} (n={})", args.n);
    println!("relative error: {:.4}%", 100.0 * (emp / requested - 1.0).abs());
    Ok(())
}

fn write_histogram(path: &PathBuf, sorted: &[f64], bins: usize) -> Result<()> {
    let lo = sorted[0];
    let hi = sorted[sorted.len() - 1];
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in sorted {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let mut csv = String::from("bin_center,count\n");
    for (i, c) in counts.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", lo + (i as f64 + 0.5) * width, c));
    }
    fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
