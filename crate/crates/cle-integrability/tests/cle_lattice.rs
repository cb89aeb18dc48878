//! Loop soups, clusters and harmonic-measure estimators. Reference values
//! come from `tests/oracle/lattice.py`.

use std::collections::HashSet;

use cle_integrability::cle_mc::*;
use cle_integrability::error::Error;
use cle_integrability::replicate::{self, MeanEstimate};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rectangle(a: f64, b: f64) -> Vec<Complex64> {
    vec![c(-a, -b), c(a, -b), c(a, b), c(-a, b)]
}

/// Rectangle with half-widths `a`, `b`: log CR at its centre, log capacity, thickness.
const RECTANGLES: [(f64, f64, f64, f64, f64); 3] = [
    (1.0, 1.0, 0.0757614352083811, 0.1658030400621093, 0.0900416048537282),
    (1.0, 0.1, -2.061020617998268, -0.518698711466538, 1.542321906531729),
    (0.8, 0.2, -1.367887386484389, -0.568857734047836, 0.799029652436552),
];

#[test]
fn rooted_mass_of_length_four() {
    assert_eq!(rooted_loop_mass(4), 0.03515625);
    assert_eq!(rooted_loop_mass(5), 0.0);
}

#[test]
fn length_four_loops_through_an_interior_vertex() {
    let res = 16;
    let dom = GridDomain::from_predicate(res, |_| true).unwrap();
    let v = (res / 2 * res + res / 2) as u32;
    let sampler = LoopSoupSampler::new(2).unwrap();
    let count = |cc: f64, seed: u64| {
        let xs = replicate::map(seed, 40_000, |_, rng| {
            let s = sampler.sample(&dom, cc, 4, seed, rng).unwrap();
            s.loops.iter().filter(|l| l.contains(&v)).count() as f64
        });
        MeanEstimate::from_samples(&xs)
    };
    let one = count(1.0, 1);
    assert!(one.within(0.109375, 4.0), "{one:?}");
    let two = count(2.0, 2);
    let diff = two.estimate - 2.0 * one.estimate;
    assert!(diff.abs() < 3.0 * (two.stderr.powi(2) + 4.0 * one.stderr.powi(2)).sqrt(), "{two:?} vs {one:?}");
}

#[test]
fn doubling_intensity_doubles_loop_count() {
    let dom = GridDomain::unit_disk(32).unwrap();
    let sampler = LoopSoupSampler::for_resolution(32).unwrap();
    let count = |cc: f64, seed: u64| {
        let xs = replicate::map(seed, 2000, |_, rng| sampler.sample(&dom, cc, 4, seed, rng).unwrap().loops.len() as f64);
        MeanEstimate::from_samples(&xs)
    };
    let (a, b) = (count(0.5, 3), count(1.0, 4));
    let d = b.estimate - 2.0 * a.estimate;
    assert!(d.abs() < 3.0 * (b.stderr.powi(2) + 4.0 * a.stderr.powi(2)).sqrt(), "{a:?} {b:?}");
}

#[test]
fn lowering_min_length_only_adds_loops() {
    let dom = GridDomain::unit_disk(48).unwrap();
    for seed in 0..20 {
        let long = sample_rw_loop_soup(&dom, 1.0, 12, seed, &mut replicate::stream(seed, 0)).unwrap();
        let all = sample_rw_loop_soup(&dom, 1.0, 4, seed, &mut replicate::stream(seed, 0)).unwrap();
        let kept: Vec<&Vec<u32>> = all.loops.iter().filter(|l| l.len() >= 12).collect();
        assert_eq!(kept, long.loops.iter().collect::<Vec<_>>());
        assert!(all.loops.len() >= long.loops.len());
    }
}

fn square_loop(n: usize, i: usize, j: usize, side: usize) -> Vec<u32> {
    let mut l = Vec::new();
    let idx = |x: usize, y: usize| (y * n + x) as u32;
    for k in 0..side {
        l.push(idx(i + k, j));
    }
    for k in 0..side {
        l.push(idx(i + side, j + k));
    }
    for k in 0..side {
        l.push(idx(i + side - k, j + side));
    }
    for k in 0..side {
        l.push(idx(i, j + side - k));
    }
    l
}

fn soup(n: usize, loops: Vec<Vec<u32>>) -> LoopSoupSample {
    LoopSoupSample { resolution: n, loops, intensity: 1.0, min_length: 4, seed: 0 }
}

#[test]
fn cluster_examples() {
    let n = 32;
    let far = cluster_loops(&soup(n, vec![square_loop(n, 2, 2, 3), square_loop(n, 20, 20, 3)]));
    assert_eq!(far.len(), 2);
    let shared = cluster_loops(&soup(n, vec![square_loop(n, 2, 2, 4), square_loop(n, 6, 6, 4)]));
    assert_eq!(shared.len(), 1);
    assert_eq!(shared[0].member_loops, vec![0, 1]);
    assert!((shared[0].area() - 2.0 * 16.0 * (2.0 / 32.0f64).powi(2)).abs() < 1e-12);
    let nested = cluster_loops(&soup(n, vec![square_loop(n, 4, 4, 20), square_loop(n, 10, 10, 4)]));
    assert_eq!(nested.len(), 2);
    let (outer, inner) = if nested[0].area() > nested[1].area() { (&nested[0], &nested[1]) } else { (&nested[1], &nested[0]) };
    assert!(inner.outer_boundary.iter().all(|&p| outer.contains(p)));
}

#[test]
fn outermost_loop_examples() {
    let n = 32;
    let h = 2.0 / n as f64;
    // the face centre between vertices 15 and 16 is the origin
    let chain = cluster_loops(&soup(n, vec![square_loop(n, 3, 3, 25), square_loop(n, 9, 9, 13), square_loop(n, 13, 13, 5)]));
    let z = c(0.0, 0.0);
    let o = outermost_loop_around(&chain, z).unwrap();
    assert!((o.area() - (25.0 * h).powi(2)).abs() < 1e-12);
    let single = cluster_loops(&soup(n, vec![square_loop(n, 13, 13, 5)]));
    assert_eq!(outermost_loop_around(&single, z).unwrap(), &single[0]);
    assert!(outermost_loop_around(&single, c(0.9, 0.9)).is_none());
}

fn segments_cross(a: Complex64, b: Complex64, p: Complex64, q: Complex64) -> bool {
    let orient = |u: Complex64, v: Complex64, w: Complex64| ((v - u).conj() * (w - u)).im;
    let (d1, d2) = (orient(p, q, a), orient(p, q, b));
    let (d3, d4) = (orient(a, b, p), orient(a, b, q));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

#[test]
fn cluster_boundaries_never_cross() {
    let dom = GridDomain::unit_disk(48).unwrap();
    for seed in 0..10 {
        let s = sample_rw_loop_soup(&dom, 1.0, 4, seed, &mut replicate::stream(seed, 0)).unwrap();
        let clusters: Vec<ClusterOutline> = cluster_loops(&s).into_iter().filter(|o| !o.outer_boundary.is_empty()).collect();
        let segs: Vec<Vec<(Complex64, Complex64)>> = clusters.iter().map(|o| o.segments()).collect();
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                for &(a, b) in &segs[i] {
                    for &(p, q) in &segs[j] {
                        assert!(!segments_cross(a, b, p, q), "seed {seed}: clusters {i} and {j} cross");
                    }
                }
                // hulls are nested or disjoint
                let hi: HashSet<u32> = clusters[i].hull_faces.iter().copied().collect();
                let shared = clusters[j].hull_faces.iter().filter(|f| hi.contains(f)).count();
                assert!(shared == 0 || shared == clusters[j].hull_faces.len() || shared == hi.len());
            }
        }
        // member loops lie inside or on their own boundary
        for o in &clusters {
            let hull: HashSet<u32> = o.hull_faces.iter().copied().collect();
            assert!(!hull.is_empty());
        }
    }
}

#[test]
fn adding_loops_only_merges_clusters() {
    let dom = GridDomain::unit_disk(48).unwrap();
    for seed in 0..10 {
        let a = sample_rw_loop_soup(&dom, 0.5, 4, seed, &mut replicate::stream(seed, 0)).unwrap();
        let b = sample_rw_loop_soup(&dom, 0.5, 4, seed, &mut replicate::stream(seed, 1)).unwrap();
        let u = a.union(&b).unwrap();
        let big = cluster_loops(&u);
        for o in cluster_loops(&a) {
            let faces: HashSet<u32> = o.hull_faces.iter().copied().collect();
            if faces.is_empty() {
                continue;
            }
            assert!(
                big.iter().any(|g| {
                    let gf: HashSet<u32> = g.hull_faces.iter().copied().collect();
                    faces.is_subset(&gf)
                }),
                "seed {seed}: a cluster hull is not contained in the superposition"
            );
        }
    }
}

#[test]
fn log_cr_of_disks() {
    let circle = circle_polygon(c(0.0, 0.0), 1.0, 4096);
    let mut rng = replicate::stream(7, 0);
    let e = estimate_log_cr(&circle, c(0.0, 0.0), 20_000, 1e-4, &mut rng).unwrap();
    assert!(e.log_value.abs() < 3.0 * e.stderr + 1e-3, "{e:?}");
    let e = estimate_log_cr(&circle, c(0.5, 0.0), 20_000, 1e-4, &mut rng).unwrap();
    assert!((e.log_value - 0.75f64.ln()).abs() < 3.0 * e.stderr + 1e-3, "{e:?}");
    let small = circle_polygon(c(0.3, -0.2), 0.25, 4096);
    let e = estimate_log_cr(&small, c(0.3, -0.2), 20_000, 1e-5, &mut rng).unwrap();
    assert!((e.log_value - 0.25f64.ln()).abs() < 3.0 * e.stderr + 1e-3, "{e:?}");
}

#[test]
fn log_cr_stderr_halves_on_a_fourfold_ladder() {
    let circle = circle_polygon(c(0.0, 0.0), 1.0, 1024);
    let mut rng = replicate::stream(8, 0);
    let a = estimate_log_cr(&circle, c(0.2, 0.1), 4000, 1e-4, &mut rng).unwrap();
    let b = estimate_log_cr(&circle, c(0.2, 0.1), 16_000, 1e-4, &mut rng).unwrap();
    let r = a.stderr / b.stderr;
    assert!((r - 2.0).abs() < 0.2, "{r}");
}

#[test]
fn rectangles_match_reference() {
    let cap = CapacityConfig::default();
    let mut rng = replicate::stream(9, 0);
    for (a, b, lcr, lcap, theta) in RECTANGLES {
        let r = rectangle(a, b);
        let k = estimate_log_capacity(&r, true, &cap).unwrap();
        assert!((k.log_cap - lcap).abs() < 1e-4, "({a}, {b}) cap {} vs {lcap}", k.log_cap);
        let e = estimate_log_cr(&r, c(0.0, 0.0), 20_000, 1e-4, &mut rng).unwrap();
        assert!((e.log_value - lcr).abs() < 3.0 * e.stderr + 2e-3, "({a}, {b}) cr {e:?} vs {lcr}");
        let t = electrical_thickness_estimate(&r, 20_000, 1e-4, &cap, &mut rng).unwrap();
        assert!(t.theta >= -3.0 * t.stderr);
        assert!(((t.theta - theta) / theta).abs() < 0.05, "({a}, {b}) theta {} vs {theta}", t.theta);
    }
}

#[test]
fn circle_has_zero_thickness() {
    let circle = circle_polygon(c(0.0, 0.0), 0.7, 64);
    let t = electrical_thickness_estimate(&circle, 20_000, 1e-5, &CapacityConfig::default(), &mut replicate::stream(10, 0))
        .unwrap();
    assert!(t.theta.abs() < 3.0 * t.stderr + 1e-3, "{t:?}");
    let k = estimate_log_capacity(&circle, true, &CapacityConfig::default()).unwrap();
    // an inscribed 64-gon falls short of the circle's capacity by O(n^-2)
    assert!(k.log_cap < 0.7f64.ln() && k.log_cap > 0.7f64.ln() - 1e-3, "{k:?}");
}

#[test]
fn segment_capacity() {
    let cap = CapacityConfig::default();
    for l in [2.0, 0.5] {
        let k = estimate_log_capacity(&[c(-l / 2.0, 0.3), c(l / 2.0, 0.3)], false, &cap).unwrap();
        assert!((k.log_cap.exp() / (l / 4.0) - 1.0).abs() < 0.01, "L = {l}: {k:?}");
    }
    let k = estimate_log_capacity(&[c(-1.0, 0.0), c(1.0, 0.0)], false, &cap).unwrap();
    assert!((k.log_cap - -std::f64::consts::LN_2).abs() < 1e-3, "{k:?}");
}

#[test]
fn capacity_is_translation_invariant() {
    let cap = CapacityConfig::default();
    let r = rectangle(0.8, 0.2);
    let shifted: Vec<Complex64> = r.iter().map(|&p| p + c(3.0, -1.5)).collect();
    let a = estimate_log_capacity(&r, true, &cap).unwrap().log_cap;
    let b = estimate_log_capacity(&shifted, true, &cap).unwrap().log_cap;
    assert!((a - b).abs() < 1e-10, "{a} vs {b}");
}

#[test]
fn thickness_is_rotation_invariant() {
    let cap = CapacityConfig::default();
    let r = rectangle(0.8, 0.2);
    let rot: Vec<Complex64> = r.iter().map(|&p| p * Complex64::from_polar(1.0, 0.7)).collect();
    let a = electrical_thickness_estimate(&r, 20_000, 1e-4, &cap, &mut replicate::stream(11, 0)).unwrap();
    let b = electrical_thickness_estimate(&rot, 20_000, 1e-4, &cap, &mut replicate::stream(11, 1)).unwrap();
    assert!((a.theta - b.theta).abs() < 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt(), "{a:?} vs {b:?}");
}

// Each walk runs twice from the same random stream, once per shell, so the
// paired differences isolate the effect of the shell.
#[test]
fn halving_the_absorption_shell_is_within_noise() {
    let r = rectangle(0.8, 0.2);
    let segs: Vec<(Complex64, Complex64)> = (0..4).map(|k| (r[k], r[(k + 1) % 4])).collect();
    let index = SegmentIndex::new(segs, 1.6 / 256.0).unwrap();
    let z = c(0.1, 0.05);
    let n = 100_000;
    let rows = replicate::map(12, n, |_, rng| {
        let mut twin = rng.clone();
        let a = (wos_exit(&index, z, 1e-3, rng).unwrap() - z).norm().ln();
        let b = (wos_exit(&index, z, 5e-4, &mut twin).unwrap() - z).norm().ln();
        (a, b)
    });
    let coarse = MeanEstimate::from_samples(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let diff = MeanEstimate::from_samples(&rows.iter().map(|r| r.1 - r.0).collect::<Vec<_>>());
    assert!(diff.estimate.abs() < coarse.stderr, "shift {diff:?}, stderr {}", coarse.stderr);
}

#[test]
fn soup_snapshot_round_trips() {
    let dom = GridDomain::unit_disk(32).unwrap();
    let s = sample_rw_loop_soup(&dom, 1.0, 4, 42, &mut replicate::stream(42, 0)).unwrap();
    let mut buf = Vec::new();
    s.write_binary(&mut buf).unwrap();
    assert_eq!(LoopSoupSample::read_binary(&buf[..]).unwrap(), s);
}

#[test]
fn depth_one_chain_is_the_outermost_loop() {
    let dom = GridDomain::unit_disk(64).unwrap();
    let cfg = CleMcConfig::default();
    let sampler = LoopSoupSampler::for_resolution(64).unwrap();
    for seed in 0..40 {
        let a = nested_loop_chain(&dom, 4.0, 1, &cfg, seed, &mut replicate::stream(seed, 0));
        let b = outermost_loop_sample(&dom, &sampler, 4.0, &cfg, seed, &mut replicate::stream(seed, 0)).unwrap();
        match (a, b) {
            (Ok(chain), Some(link)) => assert_eq!(chain[0], link),
            (Err(Error::Degenerate(_)), None) => {}
            (a, b) => panic!("seed {seed}: {a:?} vs {b:?}"),
        }
    }
}

#[test]
fn ssw_moment_at_lambda_zero_and_monotone() {
    let cfg = CleMcConfig::default();
    let logs = sample_outermost_log_cr(4.0, 64, 200, &cfg, 3).unwrap();
    assert_eq!(ssw_moment_from_samples(&logs, 0.0).estimate, 1.0);
    let mut prev = f64::INFINITY;
    for l in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let e = ssw_moment_from_samples(&logs, l).estimate;
        assert!(e <= prev);
        prev = e;
    }
}

fn ks_p_value(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lam = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let p: f64 = (1..100).map(|k| 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * lam * lam).exp()).sum();
    p.clamp(0.0, 1.0)
}

#[test]
fn ks_helper_separates_shifted_samples() {
    let a: Vec<f64> = (0..500).map(|k| k as f64 / 500.0).collect();
    let b: Vec<f64> = (0..500).map(|k| k as f64 / 500.0 + 0.001).collect();
    let s: Vec<f64> = (0..500).map(|k| k as f64 / 500.0 + 0.3).collect();
    assert!(ks_p_value(a.clone(), b) > 0.5);
    assert!(ks_p_value(a, s) < 1e-6);
}

// Needs 500 chains of depth three; outermost loops around a point have
// conformal radius around exp(-10) at kappa = 4, so the third level is far
// below the lattice spacing and almost no chain resolves.
#[test]
fn chain_ratios_agree_between_levels_two_and_three() {
    let res = 256;
    let dom = GridDomain::unit_disk(res).unwrap();
    let cfg = CleMcConfig::default();
    let attempts = 2000;
    let rows = replicate::map(77, attempts, |_, rng| match nested_loop_chain(&dom, 4.0, 3, &cfg, 77, rng) {
        Ok(ch) => Ok(Some((
            ch[1].log_cr.log_value - ch[0].log_cr.log_value,
            ch[2].log_cr.log_value - ch[1].log_cr.log_value,
        ))),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(e),
    });
    let ok: Vec<(f64, f64)> = rows.into_iter().collect::<Result<Vec<_>, _>>().unwrap().into_iter().flatten().take(500).collect();
    assert!(ok.len() == 500, "only {} of {attempts} depth-3 chains resolved at resolution {res}", ok.len());
    let p = ks_p_value(ok.iter().map(|r| r.0).collect(), ok.iter().map(|r| r.1).collect());
    assert!(p > 0.01, "KS p-value {p}");
}
