//! Acceptance gate. Runs every criterion, prints one status line each and
//! exits nonzero if any fails.
//!
//! Criterion 12 needs the PRC corpus: set `CITERANK_PRC_PAPERS` to its papers
//! file and `CITERANK_PRC_COORDS` to a coordinate cache. Without them it
//! reports SKIPPED.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use citerank::corpus::{
    build_citation_graph, parse_corpus, resolve_coordinates, synth_corpus, AffiliationStrategy, CoordinateCache,
    OfflineGeocoder, SynthConfig,
};
use citerank::geo::{dbscan_cluster, fit_exp_decay_xy, haversine_distance, FitOptions, GeoPoint, EARTH_RADIUS_KM};
use citerank::hon::{
    build_higher_order, build_transition_matrix, count_subchains, detect_higher_order, rewire, FirstOrderGraph,
    HigherOrderGraph, HonConfig, LogBase, MinSupport, StochasticMatrix, Weighting,
};
use citerank::pipeline::{read_rankings, run_pipeline, PipelineConfig};
use citerank::rank::{
    classical_pagerank, compare_rankings, impact_scores, prepare_initial_state, self_citation_weight_report,
    step_probabilities, QuantumWalkState, WalkOperator, WalkView,
};

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

type Check = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn google(n: usize, edges: &[(usize, usize)], alpha: f64) -> StochasticMatrix {
    build_transition_matrix(&HigherOrderGraph::first_order_only(&FirstOrderGraph::unweighted(n, edges)), alpha)
        .expect("valid graph")
}

fn random_stochastic(rng: &mut ChaCha8Rng, n: usize) -> StochasticMatrix {
    let mut data = vec![0.0; n * n];
    for col in data.chunks_mut(n) {
        for v in col.iter_mut() {
            if rng.random_bool(0.5) {
                *v = rng.random::<f64>();
            }
        }
        if col.iter().all(|&v| v == 0.0) {
            col[rng.random_range(0..n)] = 1.0;
        }
        let s: f64 = col.iter().sum();
        col.iter_mut().for_each(|v| *v /= s);
    }
    StochasticMatrix::from_columns(n, data, 1.0).expect("columns normalised")
}

fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if s != t && rng.random_bool(p) {
                e.push((s, t));
            }
        }
    }
    e
}

fn instances() -> Vec<StochasticMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..50)
        .map(|_| {
            let n = rng.random_range(2..=32);
            random_stochastic(&mut rng, n)
        })
        .collect()
}

fn normalization() -> Check {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for g in instances() {
        let u = WalkOperator::new(&g).map_err(|e| e.to_string())?;
        let psi0 = prepare_initial_state(&g).map_err(|e| e.to_string())?;
        for m in 0..=10 {
            let s: f64 = step_probabilities(&u, &psi0, m).iter().sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    let dt = t0.elapsed();
    ensure(worst <= 1e-9, || format!("max |sum - 1| = {worst:.3e}"))?;
    ensure(dt < Duration::from_secs(30), || format!("took {dt:?}"))?;
    Ok(format!("max |sum - 1| = {worst:.2e} in {:.2}s", dt.as_secs_f64()))
}

/// Columns of `U` obtained by applying the product-form operator to basis states.
fn operator_columns(u: &WalkOperator) -> DMatrix<f64> {
    let n = u.dim();
    let d = n * n;
    let mut m = DMatrix::<f64>::zeros(d, d);
    for c in 0..d {
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[c] = Complex64::new(1.0, 0.0);
        let mut s = QuantumWalkState::from_amplitudes(n, amps).expect("square");
        u.apply(&mut s);
        for (r, a) in s.amplitudes().iter().enumerate() {
            assert_eq!(a.im, 0.0, "real G keeps amplitudes real");
            m[(r, c)] = a.re;
        }
    }
    m
}

fn unitarity() -> Check {
    let mut worst = 0.0f64;
    for g in instances() {
        let u = WalkOperator::new(&g).map_err(|e| e.to_string())?;
        let m = operator_columns(&u);
        let mut p = m.transpose() * &m;
        for i in 0..p.nrows() {
            p[(i, i)] -= 1.0;
        }
        worst = worst.max(p.amax());
    }
    ensure(worst <= 1e-9, || format!("max |U'U - I| = {worst:.3e}"))?;
    Ok(format!("max |U'U - I| = {worst:.2e}"))
}

/// Time-averaged second-register marginals by explicit `(πS)^2` powers.
fn dense_scores(g: &StochasticMatrix, steps: usize) -> Vec<f64> {
    let n = g.dim();
    let d = n * n;
    let psi: Vec<DVector<f64>> = (0..n)
        .map(|j| {
            let mut v = DVector::zeros(d);
            for k in 0..n {
                v[j * n + k] = g.get(k, j).sqrt();
            }
            v
        })
        .collect();
    let mut pi = -DMatrix::<f64>::identity(d, d);
    for v in &psi {
        pi += 2.0 * v * v.transpose();
    }
    let mut s = DMatrix::<f64>::zeros(d, d);
    for j in 0..n {
        for k in 0..n {
            s[(k * n + j, j * n + k)] = 1.0;
        }
    }
    let u = pi * s;
    let u2 = &u * &u;
    let psi0: DVector<f64> = psi.iter().fold(DVector::zeros(d), |acc, v| acc + v) / (n as f64).sqrt();
    let mut avg = vec![0.0; n];
    for m in 1..=steps {
        let state = u2.pow(m as u32) * &psi0;
        for j in 0..n {
            for k in 0..n {
                avg[k] += state[j * n + k].powi(2) / steps as f64;
            }
        }
    }
    avg
}

fn dense_oracle() -> Check {
    let four = google(4, &[(0, 1), (0, 2), (1, 2), (2, 0), (2, 3)], 0.85);
    let tree_edges: Vec<(usize, usize)> = (0..3).flat_map(|i| [(i, 2 * i + 1), (i, 2 * i + 2)]).collect();
    let tree = google(7, &tree_edges, 0.85);
    let mut worst = 0.0f64;
    for g in [&four, &tree] {
        let n = g.dim();
        let u = WalkOperator::new(g).map_err(|e| e.to_string())?;
        let psi0 = prepare_initial_state(g).map_err(|e| e.to_string())?;
        let ids: Vec<usize> = (0..n).collect();
        let fast = impact_scores(&u, &psi0, 32, &ids).map_err(|e| e.to_string())?;
        let slow = dense_scores(g, 32);
        for (a, b) in fast.scores.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("N in {{4, 7}}, max deviation {worst:.2e}"))
}

fn eigen_oracle(g: &StochasticMatrix) -> Vec<f64> {
    let n = g.dim();
    let mut a = DMatrix::<f64>::from_fn(n, n, |k, j| g.get(k, j) - if k == j { 1.0 } else { 0.0 });
    let mut b = DVector::<f64>::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("eigenvalue 1 is simple").iter().copied().collect()
}

fn classical_baseline() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(2..=100);
        let p = rng.random_range(0.02..0.3);
        let g = google(n, &random_edges(&mut rng, n, p), 0.85);
        let x = classical_pagerank(&g, 1e-14, 100_000).map_err(|e| e.to_string())?;
        for (a, b) in x.iter().zip(eigen_oracle(&g)) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("20 graphs, max deviation {worst:.2e}"))
}

fn symmetry() -> Check {
    let mut worst = 0.0f64;
    for n in 2..=12 {
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t))).collect();
        let g = google(n, &edges, 0.85);
        let c = classical_pagerank(&g, 1e-14, 10_000).map_err(|e| e.to_string())?;
        let u = WalkOperator::new(&g).map_err(|e| e.to_string())?;
        let psi0 = prepare_initial_state(&g).map_err(|e| e.to_string())?;
        let ids: Vec<usize> = (0..n).collect();
        let q = impact_scores(&u, &psi0, 64, &ids).map_err(|e| e.to_string())?;
        for v in c.iter().chain(&q.scores) {
            worst = worst.max((v - 1.0 / n as f64).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max |score - 1/N| = {worst:.3e}"))?;
    Ok(format!("K_2..K_12, max |score - 1/N| = {worst:.2e}"))
}

const TABLE1: [(f64, f64); 10] = [
    (35.8800364, -106.3031138),
    (42.727455, -84.498557),
    (36.0324131, -84.2316929),
    (41.5945343, -88.0411993),
    (37.8759643, -122.2609648),
    (38.9332429, -76.9945436),
    (48.7082852, 2.1620986),
    (40.8682379, -72.8791716),
    (49.8685006, 8.6493409),
    (56.7417029, 37.1911003),
];

/// Great-circle distances in km between the rows of `TABLE1` at R = 6371,
/// from a 50-digit atan2 formulation.
#[allow(clippy::excessive_precision)]
const TABLE1_KM: [(usize, usize, f64); 45] = [
    (0, 1, 2017.3648383961567),
    (0, 2, 1982.4126455119027),
    (0, 3, 1702.401882409465),
    (0, 4, 1434.8104934021042),
    (0, 5, 2599.5788262493278),
    (0, 6, 8259.0247767131506),
    (0, 7, 2947.4498545945379),
    (0, 8, 8543.4387428171897),
    (0, 9, 9158.1642743281331),
    (1, 2, 744.8067325705903),
    (1, 3, 317.98152097968259),
    (1, 4, 3220.0023874800783),
    (1, 5, 758.87366133812803),
    (1, 6, 6388.0926288561623),
    (1, 7, 984.2773998821828),
    (1, 8, 6724.7744444148306),
    (1, 9, 7690.3279806225867),
    (2, 3, 700.8504727863853),
    (2, 4, 3362.0360735530773),
    (2, 5, 715.11743928913808),
    (2, 6, 6850.1634419712376),
    (2, 7, 1124.0800462837529),
    (2, 8, 7221.0993355649073),
    (2, 9, 8327.359335093714),
    (3, 4, 2935.676309119306),
    (3, 5, 982.08158327338659),
    (3, 6, 6693.4303651633189),
    (3, 7, 1268.8500520130069),
    (3, 8, 7023.775885483975),
    (3, 9, 7942.309054403654),
    (4, 5, 3904.9746200081263),
    (4, 6, 8939.568428300684),
    (4, 7, 4201.4202107421342),
    (4, 8, 9136.9118934400482),
    (4, 9, 9317.829564764543),
    (5, 6, 6153.3156840791396),
    (5, 7, 411.67681073975022),
    (5, 8, 6534.3853435870502),
    (5, 9, 7724.6362181674285),
    (6, 7, 5743.4100074830302),
    (6, 8, 487.68904592248028),
    (6, 9, 2489.3004824379349),
    (7, 8, 6127.3717659002376),
    (7, 9, 7352.1710073347183),
    (8, 9, 2026.1334541604461),
];

fn haversine() -> Check {
    let pt = |(a, b): (f64, f64)| GeoPoint::new(a, b).expect("valid");
    let half = std::f64::consts::PI * EARTH_RADIUS_KM;
    let mut worst_anti = 0.0f64;
    for (a, b) in [((0.0, 0.0), (0.0, 180.0)), ((30.0, 40.0), (-30.0, -140.0)), ((90.0, 0.0), (-90.0, 0.0))] {
        let d = haversine_distance(&pt(a), &pt(b), EARTH_RADIUS_KM);
        worst_anti = worst_anti.max((d - half).abs() / half);
    }
    ensure(worst_anti <= 1e-9, || format!("antipodal relative error {worst_anti:.3e}"))?;
    let mut worst = 0.0f64;
    for &(i, j, km) in &TABLE1_KM {
        let d = haversine_distance(&pt(TABLE1[i]), &pt(TABLE1[j]), EARTH_RADIUS_KM);
        worst = worst.max((d - km).abs() / km);
    }
    ensure(worst <= 1e-4, || format!("table relative error {worst:.3e}"))?;
    Ok(format!("antipodal rel err {worst_anti:.1e}, 45 table pairs rel err {worst:.1e}"))
}

fn exp_fit() -> Check {
    let t0 = Instant::now();
    let truth = [2.0, 10.0, 3000.0];
    let xs: Vec<f64> = (0..200).map(|i| 50.0 + 100.0 * i as f64).collect();
    let model = |x: f64| truth[0] + truth[1] * (-x / truth[2]).exp();
    let rel = |f: &citerank::geo::ExpDecayFit| {
        [(f.y0, truth[0]), (f.a1, truth[1]), (f.t1_km, truth[2])]
            .iter()
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max)
    };
    let ys: Vec<f64> = xs.iter().map(|&x| model(x)).collect();
    let clean = fit_exp_decay_xy(&xs, &ys, FitOptions::default()).map_err(|e| e.to_string())?;
    ensure(rel(&clean) <= 1e-3, || format!("noise-free fit {clean:?}"))?;
    let mut worst = 0.0f64;
    let noise = Normal::new(0.0, 0.01).expect("valid");
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys: Vec<f64> = xs.iter().map(|&x| model(x) * (1.0 + noise.sample(&mut rng))).collect();
        let f = fit_exp_decay_xy(&xs, &ys, FitOptions::default()).map_err(|e| e.to_string())?;
        worst = worst.max(rel(&f));
    }
    let dt = t0.elapsed();
    ensure(worst <= 0.05, || format!("1% noise worst relative error {worst:.3e}"))?;
    ensure(dt < Duration::from_secs(10), || format!("took {dt:?}"))?;
    Ok(format!("noise-free rel err {:.1e}, 1% noise worst {worst:.1e} over 10 seeds", rel(&clean)))
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn hon_rule() -> Check {
    // a=0, b=1, c=2, d=3. Half of b's transitions follow a and always go to c,
    // the other half start at b and go to d.
    let corpus = |support: usize| {
        let mut chains = vec![vec![0, 1, 2]; support];
        chains.extend(std::iter::repeat_n(vec![1, 3], support));
        chains
    };
    let g = FirstOrderGraph::unweighted(4, &[(0, 1), (1, 2), (1, 3)]);
    let g = FirstOrderGraph { labels: labels(&["a", "b", "c", "d"]), ..g };
    let detect = |chains: &[Vec<usize>], min: u64| {
        let counts = count_subchains(chains, 3);
        (detect_higher_order(&counts, 3, MinSupport::At(min), LogBase::Natural), counts)
    };

    let (nodes, counts) = detect(&corpus(100), 50);
    let hog = rewire(&g, &counts, &nodes).map_err(|e| e.to_string())?;
    let created: Vec<String> = (hog.base_count()..hog.node_count()).map(|i| hog.label(i)).collect();
    ensure(created == ["b|a"], || format!("created {created:?}"))?;
    let d = nodes[0].divergence;
    ensure((d - 2f64.ln()).abs() < 1e-12 && d > 2.0 / 100f64.ln(), || format!("D = {d}"))?;

    let mut markov = Vec::new();
    for pre in [0, 4] {
        for next in [2, 3] {
            markov.extend(std::iter::repeat_n(vec![pre, 1, next], 100));
        }
    }
    let (none, _) = detect(&markov, 50);
    ensure(none.is_empty(), || format!("first-order corpus created {} nodes", none.len()))?;

    let (none, _) = detect(&corpus(49), 50);
    ensure(none.is_empty(), || "support 49 passed min_support 50".into())?;
    let (one, _) = detect(&corpus(49), 49);
    ensure(one.len() == 1, || "support 49 not detected at min_support 49".into())?;
    Ok(format!("b|a created with D = ln 2 > {:.4}; Markov and support-49 corpora create none", 2.0 / 100f64.ln()))
}

fn degeneracy() -> Check {
    let corpus = synth_corpus(&SynthConfig { seed: 5, ..Default::default() }).map_err(|e| e.to_string())?;
    let graph = build_citation_graph(&corpus, AffiliationStrategy::FirstAuthor);
    let cfg = HonConfig { weighting: Weighting::Uniform, min_support: MinSupport::Infinite, ..Default::default() };
    let (hog, _) = build_higher_order(&graph, &cfg, 5).map_err(|e| e.to_string())?;
    let g_hon = build_transition_matrix(&hog, 0.85).map_err(|e| e.to_string())?;

    let n = graph.node_count();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &graph.edges {
        out[e.source].push(e.target);
    }
    let mut data = vec![0.0; n * n];
    for (j, targets) in out.iter().enumerate() {
        for k in 0..n {
            let link = if targets.is_empty() {
                1.0 / n as f64
            } else {
                targets.iter().filter(|&&t| t == k).count() as f64 / targets.len() as f64
            };
            data[j * n + k] = 0.85 * link + 0.15 / n as f64;
        }
    }
    let google = StochasticMatrix::from_columns(n, data, 0.85).map_err(|e| e.to_string())?;
    let diff = g_hon.max_abs_diff(&google);
    ensure(hog.higher_order_count() == 0, || "higher-order nodes created".into())?;
    ensure(diff <= 1e-12, || format!("matrix difference {diff:.3e}"))?;

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut pc = PipelineConfig { seed: 5, output_dir: tmp.path().to_path_buf(), ..Default::default() };
    pc.hon = cfg;
    run_pipeline(&pc).map_err(|e| e.to_string())?;
    let rows = read_rankings(&tmp.path().join("rank/rankings.csv")).map_err(|e| e.to_string())?;
    let same = rows.iter().all(|r| r.hon_weighted_quantum_pr.to_bits() == r.quantum_pr.to_bits());
    ensure(same, || "pipeline higher-order ranking differs from plain quantum ranking".into())?;
    Ok(format!("matrix difference {diff:.1e}, {} rankings bit-identical", rows.len()))
}

/// Self-citation `(source, target)` weights in the first-order network and
/// in the network built from `chains`.
fn self_citation_case(
    names: &[&str],
    edges: &[(usize, usize)],
    chains: &[Vec<usize>],
    self_cite: (usize, usize),
) -> Result<citerank::rank::SelfCitationWeight, String> {
    let g = FirstOrderGraph { labels: labels(names), ..FirstOrderGraph::unweighted(names.len(), edges) };
    let counts = count_subchains(chains, 2);
    let nodes = detect_higher_order(&counts, 2, MinSupport::At(50), LogBase::Natural);
    let hog = rewire(&g, &counts, &nodes).map_err(|e| e.to_string())?;
    let fo = HigherOrderGraph::first_order_only(&g);
    let (m_fo, m_ho) = (
        build_transition_matrix(&fo, 0.85).map_err(|e| e.to_string())?,
        build_transition_matrix(&hog, 0.85).map_err(|e| e.to_string())?,
    );
    let scores = |m: &StochasticMatrix, g: &HigherOrderGraph| -> Result<Vec<f64>, String> {
        let u = WalkOperator::new(m).map_err(|e| e.to_string())?;
        let psi0 = prepare_initial_state(m).map_err(|e| e.to_string())?;
        Ok(impact_scores(&u, &psi0, 64, &g.base_map()).map_err(|e| e.to_string())?.node_scores)
    };
    let (s_fo, s_ho) = (scores(&m_fo, &fo)?, scores(&m_ho, &hog)?);
    let report = self_citation_weight_report(
        WalkView { graph: &fo, matrix: &m_fo, node_scores: &s_fo },
        WalkView { graph: &hog, matrix: &m_ho, node_scores: &s_ho },
        &[self_cite],
    );
    Ok(report.into_iter().next().expect("one row"))
}

fn self_citation_weights() -> Check {
    // A: P2, Q1..Q3 cite P0; P0 cites P1 (self-citation) and R1..R5.
    // Chains through P2 continue to P1.
    let a_names = ["P0", "P1", "P2", "Q1", "Q2", "Q3", "R1", "R2", "R3", "R4", "R5"];
    let mut a_edges = vec![(2, 0), (3, 0), (4, 0), (5, 0), (0, 1)];
    a_edges.extend((6..=10).map(|r| (0, r)));
    let mut a_chains = vec![vec![2, 0, 1]; 100];
    for q in 3..=5 {
        for r in 6..=10 {
            a_chains.extend(std::iter::repeat_n(vec![q, 0, r], 7));
        }
    }
    let a = self_citation_case(&a_names, &a_edges, &a_chains, (0, 1))?;
    ensure(a.higher_order_node == "P0|P2", || format!("A used {}", a.higher_order_node))?;
    ensure(a.higher_order_weight > a.first_order_weight, || format!("A: {a:?}"))?;

    // B: root P5 cites P3; P3 cites P4 (self-citation), X1 and X2. Chains
    // from P5 rarely reach P4.
    let b_names = ["P3", "P4", "P5", "X1", "X2"];
    let b_edges = [(2, 0), (0, 1), (0, 3), (0, 4)];
    let mut b_chains = vec![vec![2, 0, 3]; 60];
    b_chains.extend(std::iter::repeat_n(vec![2, 0, 4], 40));
    b_chains.extend(std::iter::repeat_n(vec![2, 0, 1], 2));
    b_chains.extend(std::iter::repeat_n(vec![0, 1], 100));
    let b = self_citation_case(&b_names, &b_edges, &b_chains, (0, 1))?;
    ensure(b.higher_order_node == "P3|P5", || format!("B used {}", b.higher_order_node))?;
    ensure(b.higher_order_weight < b.first_order_weight, || format!("B: {b:?}"))?;
    Ok(format!(
        "A: {:.4} > {:.4}; B: {:.4} < {:.4}",
        a.higher_order_weight, a.first_order_weight, b.higher_order_weight, b.first_order_weight
    ))
}

/// Classes of nodes sharing an identical nonempty-or-empty in-neighbour set.
fn in_neighbour_classes(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut by_set: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for t in 0..n {
        let mut ins: Vec<usize> = edges.iter().filter(|e| e.1 == t).map(|e| e.0).collect();
        ins.sort_unstable();
        by_set.entry(ins).or_default().push(t);
    }
    let mut classes: Vec<Vec<usize>> = by_set.into_values().filter(|c| c.len() > 1).collect();
    classes.sort();
    classes
}

fn tie_differentiation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for attempt in 0..5000 {
        let n = rng.random_range(5..=8);
        let edges = random_edges(&mut rng, n, 0.35);
        let expected = in_neighbour_classes(n, &edges);
        if expected.is_empty() {
            continue;
        }
        let g = google(n, &edges, 0.85);
        let Ok(c) = classical_pagerank(&g, 1e-14, 10_000) else { continue };
        let u = WalkOperator::new(&g).map_err(|e| e.to_string())?;
        let psi0 = prepare_initial_state(&g).map_err(|e| e.to_string())?;
        let ids: Vec<usize> = (0..n).collect();
        let q = impact_scores(&u, &psi0, 64, &ids).map_err(|e| e.to_string())?;
        let report = compare_rankings(&c, &q.scores, 1e-12).map_err(|e| e.to_string())?;
        let mut flagged: Vec<Vec<usize>> = report.groups.iter().map(|g| g.members.clone()).collect();
        flagged.iter_mut().for_each(|m| m.sort_unstable());
        flagged.sort();
        if flagged == expected && report.groups.iter().all(|g| g.spread_b > 1e-6) {
            let spread = report.groups.iter().map(|g| g.spread_b).fold(f64::INFINITY, f64::min);
            return Ok(format!(
                "graph #{attempt} (N={n}, {} edges): tie groups {expected:?}, min quantum spread {spread:.2e}",
                edges.len()
            ));
        }
    }
    Err("no graph with classically tied, quantum-separated nodes found".into())
}

fn prc_dataset() -> Outcome {
    let (Ok(papers), Ok(coords)) = (std::env::var("CITERANK_PRC_PAPERS"), std::env::var("CITERANK_PRC_COORDS")) else {
        return Outcome::Skipped("CITERANK_PRC_PAPERS / CITERANK_PRC_COORDS not set".into());
    };
    if !Path::new(&papers).is_file() || !Path::new(&coords).is_file() {
        return Outcome::Skipped(format!("dataset files not found ({papers}, {coords})"));
    }
    let run = || -> Check {
        let f = File::open(&papers).map_err(|e| e.to_string())?;
        let mut corpus = parse_corpus(BufReader::new(f)).map_err(|e| e.to_string())?;
        let edges = corpus.edge_count();
        ensure(edges == 212_421, || format!("{edges} citations after cleaning"))?;
        let cache = CoordinateCache::load(&coords).map_err(|e| e.to_string())?;
        resolve_coordinates(&mut corpus, &OfflineGeocoder, &cache).map_err(|e| e.to_string())?;
        let points: Vec<(String, GeoPoint)> =
            corpus.institutions.iter().filter_map(|i| i.location.map(|p| (i.institution_id.clone(), p))).collect();
        let clusters = dbscan_cluster(&points, 50.0, 5).map_err(|e| e.to_string())?.n_clusters;
        ensure((100..=300).contains(&clusters), || format!("{clusters} clusters"))?;
        Ok(format!("{edges} citations, {clusters} clusters"))
    };
    match run() {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn end_to_end() -> Check {
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let t0 = Instant::now();
    for dir in [a.path(), b.path()] {
        let cfg = PipelineConfig { seed: 13, output_dir: dir.to_path_buf(), ..Default::default() };
        let m = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        ensure(m.succeeded(), || "pipeline reported failure".into())?;
    }
    let dt = t0.elapsed() / 2;
    ensure(dt < Duration::from_secs(60), || format!("run took {dt:?}"))?;
    let rows = read_rankings(&a.path().join("rank/rankings.csv")).map_err(|e| e.to_string())?;
    ensure(rows.len() == 500, || format!("{} ranked papers", rows.len()))?;
    let mut compared = 0;
    for stage in ["ingest", "geo", "hon", "rank", "report"] {
        for entry in std::fs::read_dir(a.path().join(stage)).map_err(|e| e.to_string())? {
            let name = entry.map_err(|e| e.to_string())?.file_name();
            let (x, y) = (a.path().join(stage).join(&name), b.path().join(stage).join(&name));
            let same = std::fs::read(&x).ok() == std::fs::read(&y).ok();
            ensure(same, || format!("{stage}/{} differs between runs", name.to_string_lossy()))?;
            compared += 1;
        }
    }
    Ok(format!("{:.2}s per run, {compared} artifacts byte-identical across two runs", dt.as_secs_f64()))
}

fn run(f: fn() -> Check) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => Outcome::Pass(s),
        Ok(Err(s)) => Outcome::Fail(s),
        Err(p) => Outcome::Fail(
            p.downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default(),
        ),
    }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("normalization", Box::new(|| run(normalization))),
        ("unitarity", Box::new(|| run(unitarity))),
        ("dense oracle equivalence", Box::new(|| run(dense_oracle))),
        ("classical baseline", Box::new(|| run(classical_baseline))),
        ("complete-graph symmetry", Box::new(|| run(symmetry))),
        ("haversine", Box::new(|| run(haversine))),
        ("exponential fit round trip", Box::new(|| run(exp_fit))),
        ("higher-order detection rule", Box::new(|| run(hon_rule))),
        ("degeneracy", Box::new(|| run(degeneracy))),
        ("self-citation weights", Box::new(|| run(self_citation_weights))),
        ("tie differentiation", Box::new(|| run(tie_differentiation))),
        ("PRC dataset", Box::new(prc_dataset)),
        ("end-to-end synthetic run", Box::new(|| run(end_to_end))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (status, detail) = match check() {
            Outcome::Pass(s) => ("PASS", s),
            Outcome::Fail(s) => {
                failed += 1;
                ("FAIL", s)
            }
            Outcome::Skipped(s) => ("SKIPPED", s),
        };
        println!("criterion {:>2} {status:<7} {name}: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
