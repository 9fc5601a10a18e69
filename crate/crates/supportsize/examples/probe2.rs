// scratch probe: error landscape over (degree, fixed base); not shipped
use std::sync::Arc;
use supportsize::distributions::zipf_distribution;
use supportsize::estimators::{learned_estimate_with, wy_estimate_with, Tuning};
use supportsize::predictors::empirical_predictor;
use supportsize::sampling::{AliasSampler, Rng};

fn main() {
    let dist = Arc::new(zipf_distribution(100_000, 0.5).unwrap());
    let n = dist.n();
    let s = dist.support_size() as f64;
    let master = Rng::new(20_260_810);
    let mut pred_rng = master.split(1);
    let predictor = empirical_predictor(&dist, 0.1, &mut pred_rng).unwrap();
    let sampler = AliasSampler::new(&dist);
    let sample_size = (0.05 * n as f64).floor() as u64;
    let trials = 50u64;
    let tuning = Tuning::default();

    let counts: Vec<_> = (0..trials)
        .map(|t| {
            let mut rng = master.split_path(&[2, t]);
            sampler.draw_counts(sample_size, &mut rng)
        })
        .collect();

    for degree in [2u32, 3, 4, 5, 6, 7, 8] {
        print!("L={degree}: ");
        for base in [3u64, 4, 5, 6, 8, 10, 12] {
            let mut errs: Vec<f64> = counts
                .iter()
                .map(|c| {
                    let r = learned_estimate_with(
                        c,
                        &predictor,
                        n,
                        base as f64,
                        degree,
                        c.total() as f64,
                        &tuning,
                    )
                    .unwrap();
                    (1.0 - r.clamped / s).abs()
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            print!("b{base}:{:.3} ", errs[(errs.len() - 1) / 2]);
        }
        let mut wy: Vec<f64> = counts
            .iter()
            .map(|c| {
                let r = wy_estimate_with(c, n, degree, c.total() as f64, &tuning).unwrap();
                (1.0 - r.clamped / s).abs()
            })
            .collect();
        wy.sort_by(f64::total_cmp);
        println!("| wy:{:.3}", wy[(wy.len() - 1) / 2]);
    }
}
