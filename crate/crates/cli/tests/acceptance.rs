//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The reference corpora are not redistributable, so the end-to-end
//! criteria run the experiment shape (kernels x m x protocols) on
//! synthetic data; the numerical criteria check the algorithms against
//! independent oracles.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mkpls::datasets::{si_folds, spid_folds, ssd_folds, synth_generate, SynthConfig};
use mkpls::features::FeatureSequence;
use mkpls::kernels::{
    cc_kernel, edit_distance, frechet_distance, gram_matrix, orthonormalize, projection_kernel,
    GramMatrix, KernelKind, KernelSpec,
};
use mkpls::kpls::{kpls_fit, one_hot, KplsModel, Task};
use mkpls::manifold::{
    assign_timestamps, fit_parameterization, rbf_design, BasisConfig, Parameterization,
};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Criterion 1: the closed-form fit satisfies its normal equations to
/// 1e-10 relative on 50 random instances, in under 5 seconds.
#[test]
fn criterion_1_closed_form_optimality() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for instance in 0..50 {
        let n_k = rng.gen_range(2..=20);
        let d = rng.gen_range(1..=16);
        let n = if rng.gen_bool(0.5) { 4 } else { 8 };
        let lambda = [0.01, 1.0, 50.0][rng.gen_range(0..3)];
        let x = FeatureSequence::from_matrix(random_matrix(&mut rng, n_k, d)).unwrap();
        let config = BasisConfig::with(n, lambda, None, None).unwrap();
        let c = fit_parameterization(&x, &config).unwrap();

        let z = assign_timestamps(n_k).unwrap();
        let (a, g) = rbf_design(&z, &config);
        let m = a.transpose() * &a + &g * lambda;
        let rhs = a.transpose() * x.matrix();
        let residual = (&m * c.matrix().transpose() - &rhs).norm() / rhs.norm();
        assert!(
            residual <= 1e-10,
            "instance {instance} (n_k={n_k}, D={d}, n={n}, lambda={lambda}): residual {residual:.3e}"
        );
        worst = worst.max(residual);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("ACCEPTANCE 1 PASS: closed-form optimality, 50/50 residuals <= 1e-10 (worst {worst:.3e}, {elapsed:?})");
}

fn frechet_brute(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    fn dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
        a.column(i)
            .iter()
            .zip(b.column(j).iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
    fn go(a: &DMatrix<f64>, b: &DMatrix<f64>, i: usize, j: usize, acc: f64) -> f64 {
        let acc = acc.max(dist(a, i, b, j));
        if i + 1 == a.ncols() && j + 1 == b.ncols() {
            return acc;
        }
        let mut best = f64::INFINITY;
        if i + 1 < a.ncols() {
            best = best.min(go(a, b, i + 1, j, acc));
        }
        if j + 1 < b.ncols() {
            best = best.min(go(a, b, i, j + 1, acc));
        }
        if i + 1 < a.ncols() && j + 1 < b.ncols() {
            best = best.min(go(a, b, i + 1, j + 1, acc));
        }
        best
    }
    go(a, b, 0, 0, 0.0)
}

fn edit_brute(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    fn dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
        a.column(i)
            .iter()
            .zip(b.column(j).iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
    fn go(a: &DMatrix<f64>, b: &DMatrix<f64>, i: usize, j: usize, acc: f64) -> f64 {
        if i == a.ncols() && j == b.ncols() {
            return acc;
        }
        let mut best = f64::INFINITY;
        if i < a.ncols() && j < b.ncols() {
            best = best.min(go(a, b, i + 1, j + 1, acc + dist(a, i, b, j)));
        }
        if i < a.ncols() {
            best = best.min(go(a, b, i + 1, j, acc + a.column(i).norm()));
        }
        if j < b.ncols() {
            best = best.min(go(a, b, i, j + 1, acc + b.column(j).norm()));
        }
        best
    }
    go(a, b, 0, 0, 0.0)
}

/// Criterion 2: both curve distances match exhaustive enumeration exactly
/// on 1000 sampled integer-coordinate pairs (lengths <= 5, D <= 3,
/// coordinates in {-1, 0, 1}), in under 30 seconds.
#[test]
fn criterion_2_curve_distance_oracles() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(202);
    for pair in 0..1000 {
        let d = rng.gen_range(1..=3);
        let (la, lb) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let a = DMatrix::from_fn(d, la, |_, _| rng.gen_range(-1_i32..=1) as f64);
        let b = DMatrix::from_fn(d, lb, |_, _| rng.gen_range(-1_i32..=1) as f64);
        let frechet = frechet_distance(&a, &b).unwrap();
        let frechet_oracle = frechet_brute(&a, &b);
        assert_eq!(
            frechet, frechet_oracle,
            "pair {pair}: Frechet DP {frechet} vs enumeration {frechet_oracle}"
        );
        let edit = edit_distance(&a, &b).unwrap();
        let edit_oracle = edit_brute(&a, &b);
        assert_eq!(
            edit, edit_oracle,
            "pair {pair}: edit DP {edit} vs enumeration {edit_oracle}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 PASS: curve distances match enumeration exactly on 1000 pairs ({elapsed:?})"
    );
}

/// Criterion 3: the Grassmann kernels agree with a principal-angle oracle
/// (symmetric eigendecomposition of M'M) to 1e-10 on 100 random subspace
/// pairs, and are invariant to invertible right-multiplication to 1e-8.
#[test]
fn criterion_3_grassmann_correctness() {
    let mut rng = StdRng::seed_from_u64(303);
    for pair in 0..100 {
        let d = rng.gen_range(4..=10);
        let cols = rng.gen_range(1..=3.min(d - 1));
        let ca = random_matrix(&mut rng, d, cols);
        let cb = random_matrix(&mut rng, d, cols);
        let pa = orthonormalize(&ca).unwrap();
        let pb = orthonormalize(&cb).unwrap();

        // cos^2 of the principal angles are the eigenvalues of M'M
        let m = pa.transpose() * &pb;
        let cos2 = (m.transpose() * &m).symmetric_eigen().eigenvalues;
        let proj_oracle: f64 = cos2.iter().sum();
        let cc_oracle = cos2.iter().cloned().fold(0.0_f64, f64::max).max(0.0).sqrt();

        let proj = projection_kernel(&pa, &pb);
        let cc = cc_kernel(&pa, &pb);
        assert!(
            (proj - proj_oracle).abs() <= 1e-10,
            "pair {pair}: projection {proj} vs {proj_oracle}"
        );
        assert!(
            (cc - cc_oracle).abs() <= 1e-10,
            "pair {pair}: cc {cc} vs {cc_oracle}"
        );

        // invariance under a change of basis
        let t = random_matrix(&mut rng, cols, cols) + DMatrix::identity(cols, cols) * 3.0;
        let pa_t = orthonormalize(&(&ca * &t)).unwrap();
        assert!(
            (projection_kernel(&pa_t, &pb) - proj).abs() <= 1e-8,
            "pair {pair}: projection not basis-invariant"
        );
        assert!(
            (cc_kernel(&pa_t, &pb) - cc).abs() <= 1e-8,
            "pair {pair}: cc not basis-invariant"
        );
    }
    println!("ACCEPTANCE 3 PASS: Grassmann kernels match the principal-angle oracle on 100 pairs");
}

/// Independent linear NIPALS PLS2 for the kernel/linear equivalence check.
fn linear_pls_scores(x: &DMatrix<f64>, y: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let dominant = |yw: &DMatrix<f64>| {
        let mut best = 0;
        for j in 0..yw.ncols() {
            if yw.column(j).norm_squared() > yw.column(best).norm_squared() {
                best = j;
            }
        }
        yw.column(best).into_owned()
    };
    let mut xw = x.clone();
    let mut yw = y.clone();
    let mut scores = Vec::new();
    for _ in 0..m {
        let mut u = dominant(&yw);
        let mut t = DVector::zeros(x.nrows());
        let mut prev: Option<DVector<f64>> = None;
        for _ in 0..500 {
            let mut w = xw.transpose() * &u;
            w /= w.norm();
            t = &xw * w;
            t /= t.norm();
            let c = yw.transpose() * &t;
            let yc = &yw * c;
            if yc.norm() > f64::MIN_POSITIVE {
                u = yc.clone() / yc.norm();
            }
            if let Some(p) = &prev {
                if (&t - p).norm() < 1e-12 {
                    break;
                }
            }
            prev = Some(t.clone());
        }
        let tx = t.transpose() * &xw;
        xw -= &t * tx;
        let ty = t.transpose() * &yw;
        yw -= &t * ty;
        scores.push(t);
    }
    DMatrix::from_columns(&scores)
}

/// Criterion 4: the KPLS contract. Orthogonal scores, training
/// reproduction through R, and equality with linear PLS under the linear
/// kernel (up to column sign, 1e-6) on 10 random instances.
#[test]
fn criterion_4_kpls_contract() {
    let mut rng = StdRng::seed_from_u64(404);
    for instance in 0..10 {
        let n = rng.gen_range(10..=30);
        let p = rng.gen_range(3..=6);
        let mut x = random_matrix(&mut rng, n, p);
        for mut col in x.column_iter_mut() {
            let mu = col.sum() / n as f64;
            col.add_scalar_mut(-mu);
        }
        let labels: Vec<String> = (0..n)
            .map(|_| format!("c{}", rng.gen_range(0..3)))
            .collect();
        let vocab: Vec<String> = (0..3).map(|i| format!("c{i}")).collect();
        let encoded = one_hot(&labels, &vocab).unwrap();
        let m = p.min(4);
        let kernel = &x * x.transpose();
        let fit = kpls_fit(&kernel, &encoded.y, m).unwrap();

        let tt = fit.t.transpose() * &fit.t;
        for i in 0..fit.m {
            for j in 0..fit.m {
                if i != j {
                    assert!(
                        tt[(i, j)].abs() <= 1e-8,
                        "instance {instance}: T'T off-diagonal {}",
                        tt[(i, j)]
                    );
                }
            }
        }
        let reproduced = &kernel * &fit.r;
        let rel = (&reproduced - &fit.t).norm() / fit.t.norm();
        assert!(
            rel <= 1e-8,
            "instance {instance}: K_c R vs T relative error {rel}"
        );

        let oracle = linear_pls_scores(&x, &encoded.y, fit.m);
        for j in 0..fit.m {
            let a = fit.t.column(j);
            let b = oracle.column(j);
            let sign = if a.dot(&b) >= 0.0 { 1.0 } else { -1.0 };
            let diff = (a - b * sign).norm();
            assert!(
                diff <= 1e-6,
                "instance {instance} component {j}: |t_kpls - t_linear| = {diff}"
            );
        }
    }
    println!("ACCEPTANCE 4 PASS: KPLS contract (orthogonality, reproduction, linear-PLS match) on 10 instances");
}

fn mkpls_bin(dir: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mkpls"));
    cmd.current_dir(dir);
    cmd
}

fn run_eval(dir: &Path, config: &str, out: &str, threads: Option<usize>) -> String {
    fs::write(dir.join("exp.json"), config).unwrap();
    let mut cmd = mkpls_bin(dir);
    cmd.args(["eval", "--config", "exp.json", "--out", out]);
    if let Some(t) = threads {
        cmd.args(["--threads", &t.to_string()]);
    }
    let output = cmd.output().expect("spawn mkpls");
    assert!(
        output.status.success(),
        "eval failed: {}\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    fs::read_to_string(dir.join(out).join("report.csv")).unwrap()
}

const SEPARABLE_CONFIG: &str = r#"{
  "dataset": {"synth": {"classes": 4, "speakers": 5, "repetitions": 3, "frames_min": 12, "frames_max": 12, "dim": 8, "class_separation": 1.0, "speaker_deformation": 0.05, "noise": 0.0, "seed": 7}},
  "basis": {"n": 8, "lambda": 50.0},
  "kernels": [{"kind": "Euclid"}, {"kind": "Cosine"}],
  "m": [10],
  "protocols": ["ssd", "si", "spid"],
  "classifiers": ["rfc"],
  "output_dir": "out"
}"#;

/// Criterion 5: a clean synthetic dataset (K=4, L=5, R=3, zero noise,
/// small speaker deformation) reaches accuracy 1.00 on SSD, SI and SpId
/// with the Euclid and Cosine kernels at m=10 under RfC, within 60 s.
#[test]
fn criterion_5_end_to_end_separability() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let report = run_eval(dir.path(), SEPARABLE_CONFIG, "out", None);
    let mut cells = 0;
    for line in report.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "1.00", "cell below 1.00: {line}");
        cells += 1;
    }
    assert_eq!(cells, 6, "expected 3 protocols x 2 kernels rows");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("ACCEPTANCE 5 PASS: SSD/SI/SpId all 1.00 for Euclid and Cosine at m=10 ({elapsed:?})");
}

/// Criterion 6: qualitative trend on a committed noisy seed — the mean
/// SSD accuracy of the matrix-based kernels (Cosine, Euclid) is at least
/// the Frechet accuracy at m in {10, 30}, with all accuracies inside
/// (0.3, 0.95). A trend on this seed, not a theorem.
#[test]
fn criterion_6_matrix_kernels_beat_frechet_on_noise() {
    let config = r#"{
  "dataset": {"synth": {"classes": 4, "speakers": 5, "repetitions": 3, "frames_min": 10, "frames_max": 14, "dim": 8, "class_separation": 1.0, "speaker_deformation": 0.3, "noise": 6.0, "seed": 2024}},
  "basis": {"n": 8, "lambda": 50.0},
  "kernels": [{"kind": "Cosine"}, {"kind": "Euclid"}, {"kind": "Frechet"}],
  "m": [10, 30],
  "protocols": ["ssd"],
  "classifiers": ["rfc"],
  "output_dir": "out"
}"#;
    let dir = tempfile::tempdir().unwrap();
    run_eval(dir.path(), config, "out", None);
    let log: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/log.json")).unwrap())
            .unwrap();
    let accuracy = |kernel: &str, m: u64| -> f64 {
        log["cells"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["kernel"] == kernel && c["m"] == m && c["classifier"] == "rfc")
            .unwrap_or_else(|| panic!("missing cell {kernel} m={m}"))["mean_accuracy"]
            .as_f64()
            .unwrap()
    };
    for m in [10, 30] {
        let cosine = accuracy("Cosine", m);
        let euclid = accuracy("Euclid", m);
        let frechet = accuracy("Frechet", m);
        for (name, v) in [("Cosine", cosine), ("Euclid", euclid), ("Frechet", frechet)] {
            assert!(
                (0.3..0.95).contains(&v),
                "{name} accuracy {v} at m={m} outside the informative band (0.3, 0.95)"
            );
        }
        let matrix_mean = 0.5 * (cosine + euclid);
        assert!(
            matrix_mean >= frechet,
            "m={m}: matrix-kernel mean {matrix_mean} below Frechet {frechet}"
        );
        println!(
            "ACCEPTANCE 6 data: m={m} Cosine {cosine:.3} Euclid {euclid:.3} Frechet {frechet:.3}"
        );
    }
    println!(
        "ACCEPTANCE 6 PASS: matrix-based kernels dominate Frechet on the committed noisy seed"
    );
}

/// Criterion 7: every fold suite partitions the synthetic grid — train and
/// test disjoint per fold, test sets disjoint across folds and covering
/// every unit exactly once.
#[test]
fn criterion_7_protocol_partitioning() {
    let units = synth_generate(&SynthConfig {
        classes: 4,
        speakers: 5,
        repetitions: 3,
        frames_min: 8,
        frames_max: 12,
        dim: 4,
        class_separation: 1.0,
        speaker_deformation: 0.1,
        noise: 0.3,
        seed: 99,
    })
    .unwrap();
    let check = |name: &str, folds: Vec<mkpls::datasets::Fold>, expected_folds: usize| {
        assert_eq!(folds.len(), expected_folds, "{name}: fold count");
        let all: std::collections::BTreeSet<&str> = units.iter().map(|u| u.id.as_str()).collect();
        let mut tested: Vec<&str> = Vec::new();
        for fold in &folds {
            let train: std::collections::BTreeSet<&str> =
                fold.train.iter().map(String::as_str).collect();
            let test: std::collections::BTreeSet<&str> =
                fold.test.iter().map(String::as_str).collect();
            assert!(train.is_disjoint(&test), "{name}: train/test overlap");
            assert_eq!(
                train.len() + test.len(),
                all.len(),
                "{name}: fold misses units"
            );
            tested.extend(test);
        }
        let tested_set: std::collections::BTreeSet<&str> = tested.iter().copied().collect();
        assert_eq!(tested.len(), tested_set.len(), "{name}: unit tested twice");
        assert_eq!(tested_set, all, "{name}: unit never tested");
    };
    check("ssd", ssd_folds(&units).unwrap(), 3);
    check("si", si_folds(&units).unwrap(), 5);
    check("spid", spid_folds(&units).unwrap(), 3);
    println!("ACCEPTANCE 7 PASS: SSD/SI/SpId folds partition the grid exactly");
}

/// Criterion 8: parameterization, Gram and model containers reload
/// bit-identically (including a second write producing identical bytes).
#[test]
fn criterion_8_serialization_round_trips() {
    let mut rng = StdRng::seed_from_u64(808);
    let dir = tempfile::tempdir().unwrap();

    let c = Parameterization::from_matrix(random_matrix(&mut rng, 7, 4), true).unwrap();
    let p1 = dir.path().join("c.param");
    c.write_binary(&p1).unwrap();
    let c_back = Parameterization::read_binary(&p1).unwrap();
    assert_eq!(c, c_back);
    let p2 = dir.path().join("c2.param");
    c_back.write_binary(&p2).unwrap();
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());

    let params: Vec<Parameterization> = (0..6)
        .map(|_| Parameterization::from_matrix(random_matrix(&mut rng, 7, 4), false).unwrap())
        .collect();
    let gram = gram_matrix(&params, &KernelSpec::new(KernelKind::EditDist)).unwrap();
    let g1 = dir.path().join("k.gram");
    gram.write_binary(&g1).unwrap();
    let gram_back = GramMatrix::read_binary(&g1).unwrap();
    assert_eq!(gram.matrix(), gram_back.matrix());
    assert_eq!(gram.omega(), gram_back.omega());
    let g2 = dir.path().join("k2.gram");
    gram_back.write_binary(&g2).unwrap();
    assert_eq!(fs::read(&g1).unwrap(), fs::read(&g2).unwrap());

    let labels: Vec<String> = (0..6).map(|i| format!("c{}", i % 2)).collect();
    let vocab = vec!["c0".to_string(), "c1".to_string()];
    let model = KplsModel::fit(&gram, &labels, &vocab, 2, Task::Speaker).unwrap();
    let m1 = dir.path().join("model.kpls");
    model.save(&m1).unwrap();
    let model_back = KplsModel::load(&m1).unwrap();
    assert_eq!(model, model_back);
    let m2 = dir.path().join("model2.kpls");
    model_back.save(&m2).unwrap();
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());

    println!("ACCEPTANCE 8 PASS: param/Gram/model containers round-trip bit-identically");
}

/// Criterion 9: `eval` with a fixed seed produces byte-identical reports
/// for thread counts 1, 2 and 8.
#[test]
fn criterion_9_thread_count_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
  "dataset": {"synth": {"classes": 3, "speakers": 4, "repetitions": 3, "frames_min": 9, "frames_max": 12, "dim": 10, "class_separation": 1.0, "speaker_deformation": 0.2, "noise": 1.5, "seed": 4242}},
  "basis": {"n": 8, "lambda": 50.0},
  "kernels": [{"kind": "Euclid"}, {"kind": "Cosine"}, {"kind": "Frechet"}, {"kind": "Grassm"}],
  "m": [5, 10],
  "protocols": ["ssd", "si", "spid"],
  "classifiers": ["rfc", "knn"],
  "output_dir": "out"
}"#;
    let reports: Vec<(Vec<u8>, Vec<u8>)> = [1usize, 2, 8]
        .iter()
        .map(|&threads| {
            let out = format!("out_t{threads}");
            run_eval(dir.path(), config, &out, Some(threads));
            (
                fs::read(dir.path().join(&out).join("report.csv")).unwrap(),
                fs::read(dir.path().join(&out).join("log.json")).unwrap(),
            )
        })
        .collect();
    assert_eq!(
        reports[0].0, reports[1].0,
        "reports differ between 1 and 2 threads"
    );
    assert_eq!(
        reports[0].0, reports[2].0,
        "reports differ between 1 and 8 threads"
    );
    assert_eq!(
        reports[0].1, reports[1].1,
        "logs differ between 1 and 2 threads"
    );
    assert_eq!(
        reports[0].1, reports[2].1,
        "logs differ between 1 and 8 threads"
    );
    println!("ACCEPTANCE 9 PASS: byte-identical reports across thread counts 1, 2, 8");
}
