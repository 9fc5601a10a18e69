// scratch probe: seed sensitivity of the criterion-5 margin; not shipped
use supportsize::experiment::{parse_config, run_experiment, EstimatorKind};

fn main() {
    for seed in [1u64, 2, 3, 4, 5, 6, 7, 20_260_810] {
        let cfg = parse_config(&format!(
            "distribution = zipf:100000:0.5\n\
             predictor = empirical:0.1\n\
             estimators = learned,wy,cr\n\
             sample_sizes = 5%\n\
             trials = 50\n\
             master_seed = {seed}\n"
        ))
        .unwrap();
        let out = run_experiment(&cfg).unwrap();
        let med = |kind: EstimatorKind| {
            out.summary
                .iter()
                .find(|r| r.estimator == kind)
                .unwrap()
                .median_rel_error
        };
        let (l, w, c) = (
            med(EstimatorKind::Learned),
            med(EstimatorKind::Wy),
            med(EstimatorKind::Cr),
        );
        println!(
            "seed {seed}: learned {l:.4}  wy {w:.4}  cr {c:.4}  cr/learned = {:.3}",
            c / l
        );
    }
}
