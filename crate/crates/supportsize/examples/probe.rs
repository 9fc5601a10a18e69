// scratch probe for tuning behavior; not part of the deliverable surface
use supportsize::experiment::{parse_config, run_experiment, EstimatorKind};

fn main() {
    // ln-based (defaults), log2-emulating and log10-emulating constants
    let variants = [
        ("ln      L=5", 0.45, 0.5),
        ("log2    L=7", 0.45 / std::f64::consts::LN_2, 0.5 / std::f64::consts::LN_2),
        ("log10   L=2", 0.45 / std::f64::consts::LN_10, 0.5 / std::f64::consts::LN_10),
        ("ln, thr log2", 0.45, 0.5 / std::f64::consts::LN_2),
        ("L=7, thr ln", 0.45 / std::f64::consts::LN_2, 0.5),
    ];
    for (name, lc, tc) in variants {
        let cfg = parse_config(&format!(
            "distribution = zipf:100000:0.5\n\
             predictor = empirical:0.1\n\
             estimators = learned,wy,cr\n\
             sample_sizes = 5%\n\
             trials = 50\n\
             master_seed = 20260810\n\
             l_constant = {lc}\n\
             threshold_constant = {tc}\n"
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
        let bases: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.estimator == EstimatorKind::Learned)
            .map(|r| r.base)
            .collect();
        let mean_base = bases.iter().sum::<f64>() / bases.len() as f64;
        println!(
            "{name}: learned {:.4}  wy {:.4}  cr {:.4}  (mean final base {:.1})",
            med(EstimatorKind::Learned),
            med(EstimatorKind::Wy),
            med(EstimatorKind::Cr),
            mean_base
        );
    }
}
