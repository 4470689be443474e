// quick scratch: tune the AR(2) fixture
use epinews::estimators::{cross_validate, CvGrids};
use epinews::rng::rng_from_seed;
use rand_distr::{Distribution, StandardNormal};

fn main() {
    for (n, a, b, noise) in [(60, 1.2, -0.5, 1.0), (100, 1.2, -0.5, 1.0), (100, 1.4, -0.8, 1.0), (140, 1.4, -0.8, 1.0), (100, 1.4, -0.8, 0.5), (140, 1.5, -0.9, 1.0)] {
        let grids = CvGrids { p: vec![1,2,3,4], q: vec![1], r: vec![1], s: vec![0], lambda1: vec![0.0], lambda2: vec![0.0] };
        let mut wins = vec![0usize; 5];
        for seed in 0..20u64 {
            let mut rng = rng_from_seed(1000 + seed);
            let mut counts = vec![20.0, 22.0];
            for _ in 0..(n-2) {
                let x1 = counts[counts.len()-1];
                let x2 = counts[counts.len()-2];
                let e: f64 = StandardNormal.sample(&mut rng);
                counts.push(5.0 + a*x1 + b*x2 + noise*e);
            }
            let ext = vec![0.0; counts.len()+1];
            let chosen = cross_validate(&counts, &ext, &grids, 0).unwrap();
            wins[chosen.p] += 1;
        }
        println!("n={n} a={a} b={b} noise={noise}: wins by p = {:?}", &wins[1..]);
    }
}
