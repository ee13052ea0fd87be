use num_bigint::BigUint;
use num_rational::BigRational;
use pathdepth::archspec::isomorphic;
use pathdepth::depth::{path_length_bounds, DepthOptions};
use pathdepth::synth::{random_chain, random_dag, random_module_chain, residual_chain};
use pathdepth::{
    effective_depth_family, effective_depth_general, enumerate_paths, gradient_weighted_depth,
    parse, path_polynomial, serialize, Attenuation, ExactPolynomial, Graph, Network,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: u64 = 4096;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn network(g: Graph) -> Network {
    Network::new(g).expect("generator output validates")
}

/// Mean of an explicit list of path lengths.
fn brute_mean(lengths: &[u64]) -> f64 {
    lengths.iter().sum::<u64>() as f64 / lengths.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_expands_to_enumeration(seed in any::<u64>(), nodes in 1usize..30) {
        let net = network(random_dag(&mut rng(seed), nodes));
        let opts = DepthOptions::default();
        let poly: ExactPolynomial = path_polynomial(&net, opts).unwrap();
        prop_assume!(poly.total().unwrap() <= CAP as u128);
        let listed = enumerate_paths(&net, CAP, opts).unwrap();
        prop_assert_eq!(poly.expand(CAP).unwrap(), listed.clone());
        let d = effective_depth_general(&poly).unwrap().to_f64();
        prop_assert!((d - brute_mean(&listed)).abs() < 1e-9);
    }

    #[test]
    fn coefficient_types_agree(seed in any::<u64>(), nodes in 1usize..40) {
        let net = network(random_dag(&mut rng(seed), nodes));
        let opts = DepthOptions::default();
        let exact: ExactPolynomial = path_polynomial(&net, opts).unwrap();
        let big = path_polynomial::<BigUint>(&net, opts).unwrap();
        let approx = path_polynomial::<f64>(&net, opts).unwrap();
        for (len, c) in exact.terms() {
            prop_assert_eq!(BigUint::from(*c), big.coeff(len));
            prop_assert_eq!(*c as f64, approx.coeff(len));
        }
        let a = effective_depth_general(&exact).unwrap().to_f64();
        let b = effective_depth_general(&approx).unwrap().to_f64();
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn support_matches_bounds(seed in any::<u64>(), nodes in 1usize..40) {
        let net = network(random_dag(&mut rng(seed), nodes));
        let opts = DepthOptions::default();
        let poly: ExactPolynomial = path_polynomial(&net, opts).unwrap();
        let (lo, hi) = path_length_bounds(&net, opts);
        prop_assert_eq!((poly.min_len().unwrap(), poly.max_len().unwrap()), (lo, hi));
        let d = effective_depth_general(&poly).unwrap().to_f64();
        prop_assert!(lo as f64 <= d && d <= hi as f64);
    }

    #[test]
    fn gradient_depth_is_monotone_in_gamma(seed in any::<u64>(), nodes in 1usize..40) {
        let net = network(random_dag(&mut rng(seed), nodes));
        let poly: ExactPolynomial = path_polynomial(&net, DepthOptions::default()).unwrap();
        let mut last = f64::NEG_INFINITY;
        for step in 1..=10 {
            let g = step as f64 / 10.0;
            let d = gradient_weighted_depth(&poly, &Attenuation::new(g).unwrap()).unwrap().depth;
            prop_assert!(d >= last - 1e-12, "gamma {}: {} < {}", g, d, last);
            last = d;
        }
        let uniform = effective_depth_general(&poly).unwrap().to_f64();
        prop_assert!((last - uniform).abs() < 1e-9);
    }

    #[test]
    fn chains_have_constant_depth(seed in any::<u64>(), len in 1usize..40) {
        let net = network(random_chain(&mut rng(seed), len));
        let poly: ExactPolynomial = path_polynomial(&net, DepthOptions::default()).unwrap();
        prop_assert_eq!(poly.total(), Some(1));
        let nominal = net.longest_weighted_path(|k| u64::from(k.is_weighted()));
        for g in [1e-6, 0.3, 1.0] {
            let d = gradient_weighted_depth(&poly, &Attenuation::new(g).unwrap()).unwrap().depth;
            prop_assert_eq!(d, nominal as f64);
        }
    }

    #[test]
    fn module_family_matches_general(seed in any::<u64>(), modules in 1usize..6) {
        let net = network(random_module_chain(&mut rng(seed), modules));
        let opts = DepthOptions::default();
        let poly: ExactPolynomial = path_polynomial(&net, opts).unwrap();
        let general = effective_depth_general(&poly).unwrap().to_f64();
        let family = effective_depth_family(&net, opts).unwrap().value;
        prop_assert!((general - family).abs() < 1e-9, "{} vs {}", general, family);
    }

    #[test]
    fn archspec_round_trip(seed in any::<u64>(), nodes in 1usize..40) {
        let g = random_dag(&mut rng(seed), nodes);
        let text = serialize(&network(g.clone()));
        let back = parse(&text).unwrap();
        prop_assert!(isomorphic(&g, &back));
        prop_assert_eq!(serialize(&network(back)), text);
    }
}

#[test]
fn residual_chain_midpoint() {
    for blocks in 1..=8 {
        for body in 1..=3 {
            let net = network(residual_chain(blocks, body));
            let opts = DepthOptions::default();
            let poly: ExactPolynomial = path_polynomial(&net, opts).unwrap();
            let listed = enumerate_paths(&net, 256, opts).unwrap();
            assert_eq!(listed.len(), 1 << blocks);
            let (lo, hi) = (listed[0], *listed.last().unwrap());
            let d = effective_depth_general(&poly).unwrap();
            let exact = d.exact().unwrap();
            assert_eq!(
                exact * BigRational::from_integer(2.into()),
                BigRational::from_integer((lo + hi).into())
            );
            assert_eq!(brute_mean(&listed), (lo + hi) as f64 / 2.0);
        }
    }
}
