//! Frozen reference values. Each one was worked out by hand or with the
//! ordering-enumeration oracle, independently of the subset formula.

use shape_core::data::{coalition_key, Modality};
use shape_core::masking::{permute_modalities, PermutationMode, PermutationPlan};
use shape_core::perceptual::perceptual_score;
use shape_core::shapley::{
    cooperation, cooperation_value, marginal_contribution, reduce_coalition_game, shape_marginal, shapley_oracle,
    shapley_values, shapley_weight,
};
use shape_core::toybench::{generate, Regime, RegimeSpec};
use shape_core::utility::{accuracy, majority_classifier};
use shape_core::{CoalitionMask, Dataset, Evaluator, Game, ModalitySchema, Sample, Sequential, UtilityTable};

fn hand_table() -> UtilityTable {
    let schema = ModalitySchema::new(
        vec![
            Modality {
                id: "M1".into(),
                dim: 1,
            },
            Modality {
                id: "M2".into(),
                dim: 1,
            },
        ],
        2,
    )
    .unwrap();
    UtilityTable::from_values(schema, vec![0.25, 0.5, 0.6, 0.9]).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn hand_table_marginals() {
    let g = Game::from_table(&hand_table());
    assert!(close(marginal_contribution(&g, 0, CoalitionMask::EMPTY).unwrap(), 0.25));
    assert!(close(marginal_contribution(&g, 0, CoalitionMask(0b10)).unwrap(), 0.3));
}

#[test]
fn hand_table_shapley() {
    let g = Game::from_table(&hand_table());
    let r = shapley_values(&g).unwrap();
    assert!(close(r.phi[0], 0.275));
    assert!(close(r.phi[1], 0.375));
    assert!(close(r.phi[0] + r.phi[1], 0.65));
    // two orderings: (1,2) gives 0.25, (2,1) gives 0.3
    assert!(close(shapley_oracle(&g, 0).unwrap(), (0.25 + 0.3) / 2.0));
}

#[test]
fn hand_table_scores() {
    let t = hand_table();
    assert_eq!(format!("{:.2}", shape_marginal(&t, "M1").unwrap()), "30.56");
    assert_eq!(format!("{:.2}", shape_marginal(&t, "M2").unwrap()), "41.67");
    let c = cooperation(&t, CoalitionMask(0b11)).unwrap();
    assert!(close(c.raw, 0.9 - 0.6 - 0.5 + 0.25));
    assert_eq!(format!("{:.2}", c.points), "5.00");
}

#[test]
fn weights() {
    let eq = |s, n, num: u128, den: u128| {
        let w = shapley_weight(s, n).unwrap();
        w.numerator * den == num * w.denominator
    };
    assert!(eq(0, 2, 1, 2));
    assert!(eq(1, 3, 1, 6));
    assert!(eq(0, 3, 2, 6));
    assert!(eq(2, 3, 2, 6));
}

#[test]
fn unanimity_cooperation() {
    let g = Game::numbered((0..8u64).map(|s| if s == 0b111 { 1.0 } else { 0.0 }).collect()).unwrap();
    let pair = CoalitionMask(0b011);
    let reduced = reduce_coalition_game(&g, pair).unwrap();
    let phi_a = shapley_oracle(&reduced, reduced.n() - 1).unwrap();
    let mut members = 0.0;
    for i in [0, 1] {
        let restricted = g.restrict(CoalitionMask(0b100).with(i)).unwrap();
        let pos = restricted.players().iter().position(|p| p == &g.players()[i]).unwrap();
        members += shapley_oracle(&restricted, pos).unwrap();
    }
    assert!(close(phi_a, 0.5));
    assert!(close(members, 0.0));
    assert!(close(cooperation_value(&g, pair).unwrap(), 0.5));
}

#[test]
fn majority_share_mirrors_seventy_one_percent() {
    let labels: Vec<usize> = (0..100).map(|i| usize::from(i >= 71)).collect();
    assert_eq!(majority_classifier(&labels).unwrap(), (0, 0.71));
    assert_eq!(majority_classifier(&[0, 1]).unwrap(), (0, 0.5));
    assert_eq!(majority_classifier(&[2, 2, 2]).unwrap(), (2, 1.0));
    assert!(close(accuracy(&[0, 0, 0], &[1, 1, 0]).unwrap(), 1.0 / 3.0));
}

#[test]
fn generated_balance_gives_majority_share() {
    let n = 1000;
    let ds = generate(&RegimeSpec {
        class_balance: vec![0.71, 0.29],
        ..RegimeSpec::new(Regime::CorrelatedComplementary, n, 11)
    })
    .unwrap();
    let (_, share) = majority_classifier(&ds.labels()).unwrap();
    assert!((share - 0.71).abs() <= 1.0 / n as f64);
}

struct Readout;

impl Evaluator for Readout {
    fn predict(&self, _: &str, d: &Dataset) -> Result<Vec<usize>, String> {
        Ok(d.samples().iter().map(|s| s.features[0][0] as usize).collect())
    }
    fn describe(&self) -> String {
        "readout".into()
    }
}

#[test]
fn out_class_flips_identity_readout() {
    let schema = ModalitySchema::new(
        vec![Modality { id: "T".into(), dim: 1 }, Modality { id: "U".into(), dim: 1 }],
        2,
    )
    .unwrap();
    let samples = [0, 1, 0, 1]
        .into_iter()
        .map(|y| Sample {
            features: vec![vec![y as f64], vec![1.0]],
            label: y,
        })
        .collect();
    let ds = Dataset::new(schema, samples, "readout").unwrap();
    let plan = PermutationPlan::new(CoalitionMask(0b01), PermutationMode::OutClass, 5, 3);
    let r = perceptual_score(&ds, &Readout, &plan, 1.0, &Sequential).unwrap();
    assert_eq!((r.mean, r.std), (100.0, 0.0));
    let plan = PermutationPlan::new(CoalitionMask(0b01), PermutationMode::InClass, 5, 3);
    assert_eq!(
        perceptual_score(&ds, &Readout, &plan, 1.0, &Sequential).unwrap().mean,
        0.0
    );
}

#[test]
fn forced_swap_and_self_donation() {
    let schema = ModalitySchema::new(
        vec![Modality { id: "V".into(), dim: 1 }, Modality { id: "T".into(), dim: 1 }],
        3,
    )
    .unwrap();
    let two = Dataset::new(
        schema.clone(),
        vec![
            Sample {
                features: vec![vec![0.0], vec![10.0]],
                label: 0,
            },
            Sample {
                features: vec![vec![1.0], vec![11.0]],
                label: 1,
            },
        ],
        "two",
    )
    .unwrap();
    let target = CoalitionMask(0b10);
    assert_eq!(coalition_key(target, &schema).unwrap(), "T");
    let out = permute_modalities(&two, &PermutationPlan::new(target, PermutationMode::OutClass, 1, 0), 0).unwrap();
    assert_eq!(out.donors, [1, 0]);
    assert_eq!(out.dataset.samples()[0].features, [vec![0.0], vec![11.0]]);

    let singles = Dataset::new(
        schema,
        (0..3)
            .map(|y| Sample {
                features: vec![vec![y as f64], vec![y as f64]],
                label: y,
            })
            .collect(),
        "singles",
    )
    .unwrap();
    let out = permute_modalities(
        &singles,
        &PermutationPlan::new(target, PermutationMode::InClass, 1, 0),
        0,
    )
    .unwrap();
    assert_eq!(out.dataset, singles);
    assert_eq!(out.self_donations, 3);
}
