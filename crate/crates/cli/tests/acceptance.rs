//! Acceptance checks, one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use keylog_core::fock::{cached_displacement, displacement_matrix, expectation, gkp_codeword, DisplacementMethod, GkpParams};
use keylog_core::phase_algebra::{
    commutation_class, make_pauli, stabilizer_x, stabilizer_z, CommutationClass, ComplexAmplitude, PauliLetter,
    PhasedDisplacement,
};
use keylog_core::protocols::{
    decode_zz, ell_delta, keystroke_attack, qpe_crosskerr, qpe_oneshot, qpe_outcome_distribution, qpe_standard,
    superdense_dv, Ancilla, AttackConfig, Backend, CodewordSharing, ModeState, QpeConfig, Variant,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into(), notes: Vec::new() }
    }
}

fn amp(re: f64, im: f64) -> ComplexAmplitude {
    ComplexAmplitude::new(re, im).unwrap()
}

fn superdense_table() -> Verdict {
    let started = Instant::now();
    let mut ok = true;
    let mut seen = Vec::new();
    for bits in [[false, false], [false, true], [true, false], [true, true]] {
        let r = superdense_dv(bits).unwrap();
        ok &= r.decoded == bits && decode_zz(r.zz_outcome) == r.decoded;
        seen.push(format!("{}{}->{}{}", bits[0] as u8, bits[1] as u8, r.zz_outcome[0] as u8, r.zz_outcome[1] as u8));
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    Verdict::new(ok, format!("ZZ outcomes {} in {elapsed:.2?}", seen.join(" ")))
}

fn qpe_certainty() -> Verdict {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=3u32 {
        for ell in 0..(1usize << n) {
            let theta = PI * ell as f64 / (1u64 << n) as f64;
            let circuit = qpe_standard(n, theta).unwrap();
            let closed = qpe_outcome_distribution(n, theta);
            worst = worst.max((circuit.distribution[ell] - 1.0).abs()).max((closed[ell] - 1.0).abs());
        }
    }
    let elapsed = started.elapsed();
    Verdict::new(worst <= 1e-10 && elapsed < Duration::from_secs(5), format!("max |p(ell) - 1| = {worst:.1e} in {elapsed:.2?}"))
}

fn qpe_bound() -> Verdict {
    let bound = 4.0 / (PI * PI) - 1e-12;
    let mut min_p = f64::INFINITY;
    let mut max_gap = 0.0f64;
    let mut ok = true;
    for ell in 0..8usize {
        for delta in [0.49, -0.49, 0.25, -0.25, 0.1, -0.1] {
            let theta = PI * (ell as f64 + delta) / 8.0;
            let (ell_read, delta_read) = ell_delta(3, theta);
            ok &= ell_read == ell && (delta_read - delta).abs() < 1e-9;
            let closed = qpe_outcome_distribution(3, theta);
            let circuit = qpe_standard(3, theta).unwrap();
            min_p = min_p.min(closed[ell]);
            for (x, y) in closed.iter().zip(&circuit.distribution) {
                max_gap = max_gap.max((x - y).abs());
            }
        }
    }
    ok &= min_p >= bound && max_gap <= 1e-10;
    Verdict::new(ok, format!("min p(ell) = {min_p:.6} (bound {:.6}), circuit vs closed form {max_gap:.1e}", 4.0 / (PI * PI)))
}

fn commutation_structure() -> Verdict {
    let paulis = [PauliLetter::X, PauliLetter::Z, PauliLetter::Y].map(make_pauli);
    let stabs = [stabilizer_x(), stabilizer_z()];
    let mut pairs: Vec<(PhasedDisplacement, PhasedDisplacement, bool)> = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            pairs.push((paulis[i], paulis[j], true));
        }
    }
    for s in stabs {
        for other in paulis.iter().chain(stabs.iter()) {
            pairs.push((s, *other, false));
        }
    }
    let mut exact_ok = true;
    let mut worst_fock = 0.0f64;
    let n = 120;
    for (a, b, anti) in &pairs {
        let want = if *anti { CommutationClass::Anticommute } else { CommutationClass::Commute };
        exact_ok &= commutation_class(a, b) == want;
        let ma = displacement_matrix(a.alpha(), n, DisplacementMethod::Analytic).unwrap().scaled(a.prefactor());
        let mb = displacement_matrix(b.alpha(), n, DisplacementMethod::Analytic).unwrap().scaled(b.prefactor());
        let ab = ma.matmul(&mb).unwrap();
        let sign = if *anti { -1.0 } else { 1.0 };
        let ba = mb.matmul(&ma).unwrap().scaled(Complex64::new(sign, 0.0));
        worst_fock = worst_fock.max(ab.max_block_deviation(&ba, n / 2));
    }
    Verdict::new(
        exact_ok && worst_fock <= 1e-6,
        format!("{} pairs; exact classes {}; Fock N={n} max |AB ∓ BA| on the leading {} block = {worst_fock:.1e}",
            pairs.len(), if exact_ok { "match" } else { "MISMATCH" }, n / 2),
    )
}

fn random_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> ComplexAmplitude {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    amp(r * phi.cos(), r * phi.sin())
}

fn oracle_chain() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let gkp = GkpParams::new(0, 0.5, 150).unwrap();
    let mut worst_exact = 0.0f64;
    let mut worst_fock = 0.0f64;
    let mut failures = 0;
    for _ in 0..50 {
        let alpha = random_in_disk(&mut rng, 1.5);
        let beta = random_in_disk(&mut rng, 1.5);
        for n in 1..=2u32 {
            let exact = qpe_oneshot(&QpeConfig::exact(n, beta), alpha).unwrap();
            let closed = qpe_outcome_distribution(n, exact.theta);
            let fock = qpe_oneshot(&QpeConfig { n, beta, backend: Backend::Fock(ModeState::Gkp(gkp)), ancilla: Ancilla::Qudit }, alpha);
            for (x, y) in exact.distribution.iter().zip(&closed) {
                worst_exact = worst_exact.max((x - y).abs());
            }
            match fock {
                Ok(f) => {
                    for (x, y) in f.distribution.iter().zip(&closed) {
                        worst_fock = worst_fock.max((x - y).abs());
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    Verdict::new(
        worst_exact <= 1e-12 && worst_fock <= 1e-8 && failures == 0,
        format!("100 runs; exact {worst_exact:.1e}, Fock (GKP delta=0.5, N=150) {worst_fock:.1e}, guard failures {failures}"),
    )
}

fn attack_config(n: u32, backend: Backend, variant: Variant) -> AttackConfig {
    AttackConfig { n, backend, variant, sharing: CodewordSharing::Independent, ancilla: Ancilla::Qudit }
}

fn attack_correctness() -> Verdict {
    let started = Instant::now();
    let backend = Backend::Fock(ModeState::Gkp(GkpParams::new(0, 0.25, 150).unwrap()));
    let mut cells = 0;
    let mut passed = 0;
    let mut problems = Vec::new();
    for variant in [Variant::OneShot, Variant::CrossKerr] {
        for n in 1..=2u32 {
            for letter in PauliLetter::ALL {
                cells += 1;
                match keystroke_attack(letter, &attack_config(n, backend, variant)) {
                    Ok(r) if r.inferred_letter == letter && r.codeword_fidelity >= 1.0 - 1e-6 => passed += 1,
                    Ok(r) => problems.push(format!(
                        "{variant:?} n={n} {letter}: inferred {} fidelity 1-{:.1e}",
                        r.inferred_letter,
                        1.0 - r.codeword_fidelity
                    )),
                    Err(e) => problems.push(format!("{variant:?} n={n} {letter}: {e}")),
                }
            }
        }
    }
    let elapsed = started.elapsed();
    let mut v = Verdict::new(
        passed == cells && elapsed < Duration::from_secs(60),
        format!("{passed}/{cells} cells correct at GKP delta=0.25, N=150 in {elapsed:.2?}"),
    );
    v.notes = problems;

    // Same grid with more headroom and on the exact backend, for context only.
    let roomy = Backend::Fock(ModeState::Gkp(GkpParams::new(0, 0.25, 300).unwrap()));
    for (label, b) in [("N=300", roomy), ("exact", Backend::ExactAlgebra)] {
        for variant in [Variant::OneShot, Variant::CrossKerr] {
            let mut good = 0;
            let mut worst = 1.0f64;
            for n in 1..=2u32 {
                for letter in PauliLetter::ALL {
                    if let Ok(r) = keystroke_attack(letter, &attack_config(n, b, variant)) {
                        good += (r.inferred_letter == letter) as usize;
                        worst = worst.min(r.codeword_fidelity);
                    }
                }
            }
            v.notes.push(format!("context {label} {variant:?}: {good}/8 decoded, min fidelity 1-{:.1e}", 1.0 - worst));
        }
    }
    v
}

fn state_independence() -> Verdict {
    let cutoff = 300;
    let states = [
        ModeState::Gkp(GkpParams::new(0, 0.25, cutoff).unwrap()),
        ModeState::Coherent { alpha: amp(0.5, 0.0), cutoff },
        ModeState::Vacuum { cutoff },
    ];
    let mut worst = 0.0f64;
    let mut failures = 0;
    for n in 1..=2u32 {
        for letter in PauliLetter::ALL {
            let dists: Vec<Vec<f64>> = states
                .iter()
                .filter_map(|s| keystroke_attack(letter, &attack_config(n, Backend::Fock(*s), Variant::OneShot)).ok())
                .map(|r| [r.run_real.distribution, r.run_imag.distribution].concat())
                .collect();
            failures += states.len() - dists.len();
            for i in 0..dists.len() {
                for j in (i + 1)..dists.len() {
                    for (x, y) in dists[i].iter().zip(&dists[j]) {
                        worst = worst.max((x - y).abs());
                    }
                }
            }
        }
    }
    Verdict::new(
        worst <= 1e-8 && failures == 0,
        format!("GKP / coherent(0.5) / vacuum at N={cutoff}, n in 1..=2: max pairwise gap {worst:.1e}, guard failures {failures}"),
    )
}

fn single_use() -> Verdict {
    let h = keylog_core::phase_algebra::half_lattice();
    let fock = Backend::Fock(ModeState::Gkp(GkpParams::new(0, 0.5, 150).unwrap()));
    let mut counts = Vec::new();
    for backend in [Backend::ExactAlgebra, fock] {
        let qc = QpeConfig { n: 2, beta: amp(h, 0.0), backend, ancilla: Ancilla::Qudit };
        counts.push(qpe_oneshot(&qc, amp(0.0, h)).unwrap().alpha_applications);
        counts.push(qpe_crosskerr(&qc, amp(0.0, h)).unwrap().alpha_applications);
        for variant in [Variant::OneShot, Variant::CrossKerr] {
            let r = keystroke_attack(PauliLetter::Y, &attack_config(1, backend, variant)).unwrap();
            counts.push(r.run_real.alpha_applications);
            counts.push(r.run_imag.alpha_applications);
            let shared = AttackConfig { sharing: CodewordSharing::Shared, ..attack_config(1, backend, variant) };
            counts.push(keystroke_attack(PauliLetter::Y, &shared).unwrap().alpha_applications);
        }
    }
    Verdict::new(counts.iter().all(|&c| c == 1), format!("{} runs, counts {:?}", counts.len(), counts))
}

fn gkp_convergence() -> Verdict {
    let n = 150;
    let sx = cached_displacement(stabilizer_x().alpha(), n, DisplacementMethod::Exponential).unwrap();
    let sz = cached_displacement(stabilizer_z().alpha(), n, DisplacementMethod::Exponential).unwrap();
    let mut values = Vec::new();
    for delta in [0.5, 0.35, 0.25] {
        let v = gkp_codeword(&GkpParams::new(0, delta, n).unwrap()).unwrap();
        values.push((delta, expectation(&sx, &v).unwrap().re(), expectation(&sz, &v).unwrap().re()));
    }
    let ok = values.windows(2).all(|w| w[1].1 > w[0].1 && w[1].2 > w[0].2) && values.iter().all(|v| v.1 < 1.0 && v.2 < 1.0);
    let shown: Vec<String> = values.iter().map(|(d, x, z)| format!("delta={d}: <S_X>={x:.6} <S_Z>={z:.6}")).collect();
    Verdict::new(ok, shown.join("; "))
}

fn determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("keylog-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let runs: [&[&str]; 4] = [
        &["superdense", "--bits", "11"],
        &["qpe-oneshot", "--n", "3", "--beta", "0.4,-0.3", "--alpha", "0.9,0.8", "--seed", "11"],
        &["attack", "--letter", "Y", "--n", "1", "--backend", "fock", "--cutoff", "250", "--seed", "3"],
        &["sweep", "--letters", "X,Z", "--n-values", "1,2", "--cutoffs", "200,250", "--backend", "fock", "--format", "csv"],
    ];
    let mut identical = 0;
    let mut notes = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let mut files = Vec::new();
        for copy in 0..2 {
            let path = dir.join(format!("run{i}-{copy}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_keylog-sim"))
                .args(*args)
                .args(["--output", path.to_str().unwrap()])
                .env("KEYLOG_SIM_THREADS", if copy == 0 { "1" } else { "3" })
                .output()
                .unwrap()
                .status;
            if !status.success() {
                notes.push(format!("{args:?} exited with {status}"));
            }
            files.push(std::fs::read(&path).unwrap_or_default());
        }
        if !files[0].is_empty() && files[0] == files[1] {
            identical += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    let mut v = Verdict::new(identical == runs.len(), format!("{identical}/{} configurations byte-identical across two runs", runs.len()));
    v.notes = notes;
    v
}

type Check = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Check; 10] = [
        ("superdense coding table", superdense_table),
        ("QPE certainty at delta = 0", qpe_certainty),
        ("QPE 4/pi^2 bound", qpe_bound),
        ("commutation structure", commutation_structure),
        ("oracle chain", oracle_chain),
        ("attack correctness", attack_correctness),
        ("state independence", state_independence),
        ("single use of D(alpha)", single_use),
        ("GKP convergence", gkp_convergence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += !v.pass as usize;
        println!("criterion {:>2} {} {name}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        for note in v.notes {
            println!("             {note}");
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
