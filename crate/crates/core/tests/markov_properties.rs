use aifv::builder::{construct, BuildConfig};
use aifv::forest::{CodeForest, CodeTree};
use aifv::markov::*;
use aifv::mode::ModeFamily;
use aifv::optimizer::{link_cost_table, solve_tree, SearchOptions, TreeProblem, default_depth};
use aifv::source::{binary_grid, polynomial_sources, SourceDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, k: usize, density: f64) -> TransitionMatrix {
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let mut r: Vec<f64> = (0..k).map(|_| if rng.gen::<f64>() < density { rng.gen::<f64>() } else { 0.0 }).collect();
            if r.iter().all(|&x| x == 0.0) {
                r[rng.gen_range(0..k)] = 1.0;
            }
            let s: f64 = r.iter().sum();
            r.iter().map(|x| x / s).collect()
        })
        .collect();
    TransitionMatrix::from_rows(&rows).unwrap()
}

#[test]
fn stationary_balances_up_to_fifty_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let k = rng.gen_range(1..=50);
        let p = random_matrix(&mut rng, k, 0.3);
        let blocks = block_decompose(&p);
        for pi in stationary(&p, &blocks).unwrap() {
            assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(pi.iter().all(|&x| x >= -1e-12));
            for j in 0..k {
                let flow: f64 = (0..k).map(|i| pi[i] * p.get(i, j)).sum();
                assert!((flow - pi[j]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn blocks_partition_and_triangularise() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let k = rng.gen_range(1..=20);
        let p = random_matrix(&mut rng, k, 0.15);
        let b = block_decompose(&p);
        let mut all: Vec<usize> = b.blocks.iter().flatten().copied().collect();
        all.sort();
        assert_eq!(all, (0..k).collect::<Vec<_>>());
        for (j, block) in b.blocks.iter().enumerate() {
            for &s in block {
                for t in p.successors(s) {
                    // Edges only stay in the block or go to an earlier one.
                    assert!(b.block_of[t] <= j);
                    if j < b.absorbing {
                        assert_eq!(b.block_of[t], j);
                    }
                }
            }
            if j >= b.absorbing {
                assert!(block.iter().any(|&s| p.successors(s).any(|t| b.block_of[t] < j)));
            }
        }
    }
}

#[test]
fn general_update_reduces_to_simple_when_irreducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 50 {
        let k = rng.gen_range(1..=12);
        let p = random_matrix(&mut rng, k, 0.6);
        let b = block_decompose(&p);
        if !b.is_irreducible() {
            continue;
        }
        let l: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..4.0)).collect();
        let g = cost_update_general(&l, &p, &b).unwrap();
        let s = cost_update_simple(&l, &p, g.block_lengths[0]).unwrap();
        assert!(max_abs_diff(&g.costs, &s) < 1e-12);
        checked += 1;
    }
}

/// Re-solving every mode under a converged build's costs and updating again
/// reproduces those costs.
#[test]
fn converged_costs_are_a_fixed_point() {
    let mut sources: Vec<SourceDistribution> = binary_grid().into_iter().step_by(12).map(|s| s.1).collect();
    sources.extend(polynomial_sources(4).unwrap().into_iter().map(|s| s.1));
    for s in sources {
        for n in 1..=3 {
            let (_, r) = construct(&s, &BuildConfig::new(n)).unwrap();
            assert!(r.f_optimal);
            let family = ModeFamily::continuous(n).unwrap();
            let table = link_cost_table(&family, &r.costs).unwrap();
            let trees: Vec<CodeTree> = (0..family.len())
                .map(|i| {
                    let problem = TreeProblem {
                        n,
                        target: family.continuous_id(i).unwrap(),
                        probs: s.probs().to_vec(),
                        link_costs: table.clone(),
                        depth: default_depth(s.len(), n),
                        aifvm: false,
                    };
                    CodeTree::new(solve_tree(&problem, &SearchOptions::default()).unwrap().0, family.mode(i).clone())
                })
                .collect();
            let forest = CodeForest::new(n, s.len(), trees).unwrap();
            let p = transition_matrix(&forest, &s).unwrap();
            let l = tree_lengths(&forest, &s).unwrap();
            let u = cost_update_general(&l, &p, &block_decompose(&p)).unwrap();
            assert!(f_optimality_converged(&u.costs, &r.costs, DEFAULT_TOLERANCE), "{s:?} N={n}");
        }
    }
}
