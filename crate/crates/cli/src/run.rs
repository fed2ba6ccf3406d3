//! Protocol dispatch and result assembly.

use keylog_core::hybrid::sample_index;
use keylog_core::phase_algebra::loop_phase;
use keylog_core::protocols::{
    attack_sweep, bits_to_string, keystroke_attack, parse_bits, qpe_crosskerr, qpe_oneshot, qpe_standard,
    superdense_dv, AttackConfig, AttackReport, QpeConfig, QpeOutcome, SweepRow,
};
use serde_json::{json, Map, Value};

use crate::config::{Format, Protocol, RunConfig};
use crate::output::{distribution_csv, document, round12, write_atomic};
use crate::CliError;

struct Rendered {
    result: Map<String, Value>,
    csv: String,
    summary: String,
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn qpe_fields(o: &QpeOutcome, seed: Option<u64>) -> Map<String, Value> {
    let mut m = object(json!({
        "distribution": o.distribution,
        "ell": o.ell,
        "delta": o.delta,
        "theta": o.theta,
        "argmax": o.argmax,
    }));
    if let Some(seed) = seed {
        m.insert("sampled_outcome".into(), json!(sample_index(&o.distribution, seed)));
    }
    m
}

fn attack_result(r: &AttackReport, seed: Option<u64>) -> Map<String, Value> {
    let mut m = qpe_fields(&r.run_real, seed);
    m.insert("distribution_imag".into(), json!(r.run_imag.distribution));
    m.insert("ell_imag".into(), json!(r.run_imag.ell));
    m.insert("delta_imag".into(), json!(r.run_imag.delta));
    m.insert("argmax_imag".into(), json!(r.run_imag.argmax));
    if let Some(seed) = seed {
        m.insert("sampled_outcome_imag".into(), json!(sample_index(&r.run_imag.distribution, seed.wrapping_add(1))));
    }
    m.insert("true_letter".into(), json!(r.true_letter));
    m.insert("inferred_letter".into(), json!(r.inferred_letter));
    m.insert("codeword_fidelity".into(), json!(r.codeword_fidelity));
    m.insert("leakage_max".into(), json!(r.leakage_max));
    m.insert("mode_purity".into(), json!(r.mode_purity));
    m.insert("alpha_applications".into(), json!(r.alpha_applications));
    m
}

fn sweep_row(row: &SweepRow) -> Value {
    let mut m = object(json!({
        "letter": row.cell.letter,
        "delta": row.cell.delta,
        "cutoff": row.cell.cutoff,
        "n": row.cell.n,
    }));
    if let Some(r) = &row.report {
        m.insert("inferred_letter".into(), json!(r.inferred_letter));
        m.insert("argmax_real".into(), json!(r.run_real.argmax));
        m.insert("argmax_imag".into(), json!(r.run_imag.argmax));
        m.insert("codeword_fidelity".into(), json!(r.codeword_fidelity));
        m.insert("leakage_max".into(), json!(r.leakage_max));
        m.insert("mode_purity".into(), json!(r.mode_purity));
    }
    if let Some(e) = &row.error {
        m.insert("error".into(), json!(e));
    }
    Value::Object(m)
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("letter,delta,cutoff,n,inferred_letter,codeword_fidelity,leakage_max,mode_purity,error\n");
    for row in rows {
        let c = &row.cell;
        let (inferred, fid, leak, purity) = match &row.report {
            Some(r) => (
                r.inferred_letter.to_string(),
                format!("{:.12}", round12(r.codeword_fidelity)),
                format!("{:.12e}", round12(r.leakage_max)),
                format!("{:.12}", round12(r.mode_purity)),
            ),
            None => Default::default(),
        };
        let error = row.error.as_deref().unwrap_or("").replace(['"', ','], ";");
        out.push_str(&format!("{},{},{},{},{inferred},{fid},{leak},{purity},{error}\n", c.letter, c.delta, c.cutoff, c.n));
    }
    out
}

fn attack_csv(r: &AttackReport) -> String {
    let mut out = String::from("run,k,probability\n");
    for (name, o) in [("real", &r.run_real), ("imag", &r.run_imag)] {
        for (k, p) in o.distribution.iter().enumerate() {
            out.push_str(&format!("{name},{k},{:.12}\n", p + 0.0));
        }
    }
    out
}

fn render(config: &RunConfig) -> Result<Rendered, CliError> {
    let sim = |e| CliError::sim(e, config.protocol.name());
    match config.protocol {
        Protocol::Superdense => {
            let bits = parse_bits(&config.bits).ok_or_else(|| CliError::config("bits must be two binary digits", &config.bits))?;
            let r = superdense_dv(bits).map_err(sim)?;
            let result = object(json!({
                "distribution": r.distribution,
                "bits": bits_to_string(r.bits),
                "letter": r.letter,
                "zz_outcome": bits_to_string(r.zz_outcome),
                "decoded": bits_to_string(r.decoded),
            }));
            let summary = format!(
                "superdense: bits {} sent as {}, ZZ outcome {}, decoded {}",
                bits_to_string(r.bits),
                r.letter,
                bits_to_string(r.zz_outcome),
                bits_to_string(r.decoded)
            );
            Ok(Rendered { result, csv: distribution_csv(&r.distribution), summary })
        }
        Protocol::QpeStandard => {
            let o = qpe_standard(config.n, config.theta).map_err(sim)?;
            let summary = format!("qpe-standard: n={} argmax {} (ell {}, delta {:.6})", o.n, o.argmax, o.ell, o.delta);
            Ok(Rendered { result: qpe_fields(&o, config.seed), csv: distribution_csv(&o.distribution), summary })
        }
        Protocol::QpeOneshot | Protocol::QpeCrosskerr => {
            let qc = QpeConfig { n: config.n, beta: config.beta, backend: config.core_backend()?, ancilla: config.ancilla };
            let o = if config.protocol == Protocol::QpeOneshot {
                qpe_oneshot(&qc, config.alpha)
            } else {
                qpe_crosskerr(&qc, config.alpha)
            }
            .map_err(sim)?;
            let mut result = qpe_fields(&o, config.seed);
            result.insert("loop_phase".into(), json!(loop_phase(config.alpha, config.beta)));
            result.insert("alpha_applications".into(), json!(o.alpha_applications));
            result.insert("leakage_max".into(), json!(o.leakage_max));
            if let Some(h) = &o.heralded {
                result.insert("heralded".into(), json!(h));
            }
            let summary = format!(
                "{}: n={} argmax {} (ell {}, delta {:.6}), p[argmax] = {:.6}",
                config.protocol.name(),
                o.n,
                o.argmax,
                o.ell,
                o.delta,
                o.distribution[o.argmax]
            );
            Ok(Rendered { result, csv: distribution_csv(&o.distribution), summary })
        }
        Protocol::Attack => {
            let ac = AttackConfig {
                n: config.n,
                backend: config.core_backend()?,
                variant: config.variant,
                sharing: config.sharing,
                ancilla: config.ancilla,
            };
            let r = keystroke_attack(config.letter, &ac).map_err(sim)?;
            let summary = format!(
                "attack: true {} inferred {}, codeword fidelity {:.9}, leakage {:.3e}",
                r.true_letter,
                r.inferred_letter,
                r.codeword_fidelity,
                r.leakage_max
            );
            Ok(Rendered { result: attack_result(&r, config.seed), csv: attack_csv(&r), summary })
        }
        Protocol::Sweep => {
            let base = AttackConfig {
                n: config.n,
                backend: config.core_backend()?,
                variant: config.variant,
                sharing: config.sharing,
                ancilla: config.ancilla,
            };
            let rows = attack_sweep(&config.letters, &config.deltas, &config.cutoffs, &config.n_values, &base, config.threads)
                .map_err(sim)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            let wrong = rows
                .iter()
                .filter_map(|r| r.report.as_ref())
                .filter(|r| r.inferred_letter != r.true_letter)
                .count();
            let result = object(json!({ "rows": rows.iter().map(sweep_row).collect::<Vec<_>>() }));
            let summary = format!("sweep: {} cells, {} failed, {} mis-decoded", rows.len(), failed, wrong);
            Ok(Rendered { result, csv: sweep_csv(&rows), summary })
        }
    }
}

pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    let rendered = render(config)?;
    let text = match config.format {
        Format::Json => document(config, rendered.result)?,
        Format::Csv => rendered.csv,
    };
    match &config.output {
        Some(path) => {
            write_atomic(path, &text)?;
            println!("{}; wrote {}", rendered.summary, path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
