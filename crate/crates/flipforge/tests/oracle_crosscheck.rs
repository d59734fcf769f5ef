use flipforge::convex::transform_between;
use flipforge::gen;
use flipforge::oracle::{self, Mode};
use flipforge::parallel;

#[test]
fn heuristics_never_beat_the_oracle() {
    let mut rng = gen::rng(11);
    for m in 5..=7 {
        for _ in 0..40 {
            let a = gen::random_labelled(m, &mut rng).unwrap();
            let b = gen::random_labelled(m, &mut rng).unwrap();
            let exact = oracle::exact_distance(&a, &b, Mode::ConvexLabelled).unwrap();
            assert!(transform_between(&a, &b).unwrap().cost() >= exact);
            let sim = parallel::sim_transform_between(&a, &b).unwrap();
            let rounds = oracle::exact_distance(&a, &b, Mode::ConvexSimLabelled).unwrap();
            assert!(sim.cost() >= rounds && rounds <= exact);
        }
    }
}

#[test]
fn labelled_diameters() {
    let got: Vec<usize> = (5..=7).map(|m| oracle::diameter(Mode::ConvexLabelled, m).unwrap()).collect();
    assert_eq!(got, vec![5, 9, 13]);
}
