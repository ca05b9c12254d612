//! Evaluators for the assertion directives.
//!
//! Each evaluator receives measurement counts, the inlined circuit, a
//! statevector, or the ideal distribution, and returns an
//! [`AssertionResult`] with status pass, fail, or error. An error status
//! means the assertion could not be evaluated at all; its message explains
//! why, never a comparison outcome.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::circuit::{Circuit, MeasurementMap};
use crate::distribution::{bit_of, Distribution};
use crate::pragma::{AssertionDirective, AssertionKind, AssertionPayload, ComparisonSpec};
use crate::sim::{partial_trace, von_neumann_entropy, Counts, Statevector};
use crate::stats::chi2_survival;

/// Entropy above this many bits counts as entangled; operationalizes the
/// strict S > 0 witness under floating point.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => write!(f, "pass"),
            Status::Fail => write!(f, "fail"),
            Status::Error => write!(f, "error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionResult {
    pub status: Status,
    pub kind: AssertionKind,
    pub message: String,
    pub actual: Option<String>,
    pub expected: String,
    pub line: usize,
}

impl AssertionResult {
    fn error(kind: AssertionKind, line: usize, expected: impl Into<String>, message: impl Into<String>) -> Self {
        AssertionResult {
            status: Status::Error,
            kind,
            message: message.into(),
            actual: None,
            expected: expected.into(),
            line,
        }
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.6}")
    }
}

/// Apply a comparison spec to an actual value. `~=` means
/// |actual − threshold| <= atol; ordered operators follow extended-real
/// ordering, so +inf compares greater than any threshold.
pub fn compare(actual: f64, spec: &ComparisonSpec) -> Result<bool, String> {
    if actual.is_nan() {
        return Err("actual value is NaN".into());
    }
    use crate::pragma::CmpOp::*;
    Ok(match spec.op {
        Lt => actual < spec.threshold,
        Le => actual <= spec.threshold,
        Eq => actual == spec.threshold,
        Gt => actual > spec.threshold,
        Ge => actual >= spec.threshold,
        Ne => actual != spec.threshold,
        Approx => {
            let atol = spec.atol.expect("~= carries atol by construction");
            (actual - spec.threshold).abs() <= atol
        }
    })
}

/// Build the pass/fail/error result for a numeric metric.
fn metric_result(
    kind: AssertionKind,
    line: usize,
    actual: f64,
    cmp: &ComparisonSpec,
    note: Option<String>,
) -> AssertionResult {
    let expected = cmp.to_string();
    match compare(actual, cmp) {
        Ok(ok) => {
            let mut message = format!("{kind} = {}", fmt_value(actual));
            if let Some(note) = note {
                message.push_str(&format!(" ({note})"));
            }
            AssertionResult {
                status: if ok { Status::Pass } else { Status::Fail },
                kind,
                message,
                actual: Some(fmt_value(actual)),
                expected,
                line,
            }
        }
        Err(why) => AssertionResult::error(kind, line, expected, why),
    }
}

/// Pass iff every shot produced the same bitstring and it equals `expected`.
pub fn eval_output(counts: &Counts, expected: &str, line: usize) -> AssertionResult {
    let kind = AssertionKind::Output;
    let want = format!("== \"{expected}\"");
    if expected.len() != counts.width() {
        return AssertionResult::error(
            kind,
            line,
            want,
            format!(
                "expected bitstring has length {}, but the circuit measures {} classical bit(s)",
                expected.len(),
                counts.width()
            ),
        );
    }
    let outcomes: Vec<&str> = counts.iter().map(|(k, _)| k).collect();
    let pass = outcomes.len() == 1 && outcomes[0] == expected;
    AssertionResult {
        status: if pass { Status::Pass } else { Status::Fail },
        kind,
        message: if pass {
            format!("all {} shot(s) produced \"{expected}\"", counts.total())
        } else {
            format!("observed outcomes {counts}")
        },
        actual: Some(if outcomes.len() == 1 {
            format!("\"{}\"", outcomes[0])
        } else {
            counts.to_string()
        }),
        expected: want,
        line,
    }
}

fn check_widths(kind: AssertionKind, line: usize, counts: &Counts, reference: &Distribution, cmp: &ComparisonSpec) -> Option<AssertionResult> {
    if reference.key_width() != counts.width() {
        return Some(AssertionResult::error(
            kind,
            line,
            cmp.to_string(),
            format!(
                "reference keys have length {} but measured bitstrings have length {}",
                reference.key_width(),
                counts.width()
            ),
        ));
    }
    None
}

/// Total variation distance δ(P, Q) = ½ Σ |P(x) − Q(x)| over the union of
/// supports.
pub fn eval_tvd(counts: &Counts, reference: &Distribution, cmp: &ComparisonSpec, line: usize) -> AssertionResult {
    let kind = AssertionKind::Tvd;
    if let Some(err) = check_widths(kind, line, counts, reference, cmp) {
        return err;
    }
    let p = counts.distribution();
    let keys: BTreeSet<&str> = p.keys().chain(reference.keys()).collect();
    let tvd = 0.5
        * keys
            .iter()
            .map(|k| (p.probability(k) - reference.probability(k)).abs())
            .sum::<f64>();
    metric_result(kind, line, tvd, cmp, None)
}

/// Hellinger distance H(P, Q) = (1/√2) √(Σ (√P − √Q)²).
pub fn eval_hellinger(counts: &Counts, reference: &Distribution, cmp: &ComparisonSpec, line: usize) -> AssertionResult {
    let kind = AssertionKind::Hellinger;
    if let Some(err) = check_widths(kind, line, counts, reference, cmp) {
        return err;
    }
    let p = counts.distribution();
    let keys: BTreeSet<&str> = p.keys().chain(reference.keys()).collect();
    let sum: f64 = keys
        .iter()
        .map(|k| {
            let d = p.probability(k).sqrt() - reference.probability(k).sqrt();
            d * d
        })
        .sum();
    let h = sum.sqrt() / std::f64::consts::SQRT_2;
    metric_result(kind, line, h, cmp, None)
}

/// Kullback-Leibler divergence D(P‖Q) = Σ P(x) ln(P(x)/Q(x)), natural log.
/// P(x) = 0 terms contribute 0; P(x) > 0 with Q(x) = 0 gives +inf.
pub fn eval_kl(counts: &Counts, reference: &Distribution, cmp: &ComparisonSpec, line: usize) -> AssertionResult {
    let kind = AssertionKind::Kl;
    if let Some(err) = check_widths(kind, line, counts, reference, cmp) {
        return err;
    }
    let p = counts.distribution();
    let mut kl = 0.0;
    let mut unsupported: Vec<&str> = Vec::new();
    for (key, prob) in p.iter() {
        if prob == 0.0 {
            continue;
        }
        let q = reference.probability(key);
        if q == 0.0 {
            unsupported.push(key);
            kl = f64::INFINITY;
        } else if kl.is_finite() {
            kl += prob * (prob / q).ln();
        }
    }
    let note = (!unsupported.is_empty())
        .then(|| format!("observed outcomes with zero reference probability: {}", unsupported.join(", ")));
    metric_result(kind, line, kl, cmp, note)
}

/// Chi-squared goodness-of-fit: χ² = Σ (O_x − E_x)²/E_x with E_x = N·Q(x)
/// over the reference keys; the compared value is the p-value from the
/// chi-squared survival function at df = |keys(Q)| − 1. Observed outcomes
/// outside the reference support force p = 0.
pub fn eval_chi2(counts: &Counts, reference: &Distribution, cmp: &ComparisonSpec, line: usize) -> AssertionResult {
    let kind = AssertionKind::Chi2;
    if let Some(err) = check_widths(kind, line, counts, reference, cmp) {
        return err;
    }
    if let Some((key, _)) = reference.iter().find(|(_, q)| *q <= 0.0) {
        return AssertionResult::error(
            kind,
            line,
            cmp.to_string(),
            format!("reference probability for '{key}' must be positive"),
        );
    }

    let unexpected: Vec<String> = counts
        .iter()
        .filter(|(k, c)| *c > 0 && reference.probability(k) == 0.0)
        .map(|(k, c)| format!("{k}×{c}"))
        .collect();
    if !unexpected.is_empty() {
        let note = format!("observed outcomes outside reference support: {}", unexpected.join(", "));
        return metric_result(kind, line, 0.0, cmp, Some(note));
    }

    let n = counts.total() as f64;
    let df = reference.len() - 1;
    if df == 0 {
        let only = reference.keys().next().expect("non-empty reference");
        let p = if counts.get(only) == counts.total() { 1.0 } else { 0.0 };
        return metric_result(kind, line, p, cmp, Some("df = 0".into()));
    }
    let chi2: f64 = reference
        .iter()
        .map(|(key, q)| {
            let expected = n * q;
            let observed = counts.get(key) as f64;
            (observed - expected).powi(2) / expected
        })
        .sum();
    let p = chi2_survival(chi2, df);
    metric_result(kind, line, p, cmp, Some(format!("chi² = {chi2:.4}, df = {df}")))
}

/// Probability that one measured qubit came out as `value`.
pub fn eval_marginal(
    counts: &Counts,
    map: &MeasurementMap,
    qubit: usize,
    value: u8,
    cmp: &ComparisonSpec,
    line: usize,
) -> AssertionResult {
    let kind = AssertionKind::Marginal;
    let Some(bit) = map.bit_for_qubit(qubit) else {
        return AssertionResult::error(
            kind,
            line,
            cmp.to_string(),
            format!("qubit {qubit} is not measured"),
        );
    };
    let hits: u64 = counts
        .iter()
        .filter(|(key, _)| bit_of(key, bit) == Some(value))
        .map(|(_, c)| c)
        .sum();
    let actual = hits as f64 / counts.total() as f64;
    metric_result(kind, line, actual, cmp, Some(format!("P(q[{qubit}] = {value})")))
}

/// Pauli-Z expectation over the given qubits: each bitstring contributes
/// (−1)^parity of its mapped classical bits.
pub fn eval_observable(
    counts: &Counts,
    map: &MeasurementMap,
    qubits: &[usize],
    cmp: &ComparisonSpec,
    line: usize,
) -> AssertionResult {
    let kind = AssertionKind::Observable;
    let mut bits = Vec::with_capacity(qubits.len());
    for &q in qubits {
        match map.bit_for_qubit(q) {
            Some(b) => bits.push(b),
            None => {
                return AssertionResult::error(
                    kind,
                    line,
                    cmp.to_string(),
                    format!("qubit {q} is not measured"),
                );
            }
        }
    }
    let n = counts.total() as f64;
    let actual: f64 = counts
        .iter()
        .map(|(key, c)| {
            let parity: u32 = bits
                .iter()
                .map(|&b| u32::from(bit_of(key, b) == Some(1)))
                .sum();
            let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
            sign * c as f64 / n
        })
        .sum();
    let zs: Vec<String> = qubits.iter().map(|q| q.to_string()).collect();
    metric_result(kind, line, actual, cmp, Some(format!("⟨Z[{}]⟩", zs.join(","))))
}

/// Shannon entropy of the output distribution, in bits.
pub fn eval_entropy(counts: &Counts, cmp: &ComparisonSpec, line: usize) -> AssertionResult {
    let n = counts.total() as f64;
    let h: f64 = counts
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|(_, c)| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    metric_result(AssertionKind::Entropy, line, h, cmp, Some("bits".into()))
}

/// Pearson correlation between two classical output bits, from counts.
pub fn eval_correlation(
    counts: &Counts,
    bit_a: usize,
    bit_b: usize,
    cmp: &ComparisonSpec,
    line: usize,
) -> AssertionResult {
    let kind = AssertionKind::Correlation;
    let width = counts.width();
    if bit_a == bit_b {
        return AssertionResult::error(kind, line, cmp.to_string(), "bit indices must differ");
    }
    if bit_a >= width || bit_b >= width {
        return AssertionResult::error(
            kind,
            line,
            cmp.to_string(),
            format!("bit index out of range for classical width {width}"),
        );
    }
    let n = counts.total();
    let mut ones_a = 0u64;
    let mut ones_b = 0u64;
    let mut ones_ab = 0u64;
    for (key, c) in counts.iter() {
        let a = bit_of(key, bit_a) == Some(1);
        let b = bit_of(key, bit_b) == Some(1);
        if a {
            ones_a += c;
        }
        if b {
            ones_b += c;
        }
        if a && b {
            ones_ab += c;
        }
    }
    if ones_a == 0 || ones_a == n || ones_b == 0 || ones_b == n {
        return AssertionResult::error(
            kind,
            line,
            cmp.to_string(),
            format!("degenerate marginal: m[{bit_a}] or m[{bit_b}] never varies"),
        );
    }
    let nf = n as f64;
    let ea = ones_a as f64 / nf;
    let eb = ones_b as f64 / nf;
    let eab = ones_ab as f64 / nf;
    let r = (eab - ea * eb) / (ea * (1.0 - ea) * eb * (1.0 - eb)).sqrt();
    metric_result(kind, line, r, cmp, Some(format!("r(m[{bit_a}], m[{bit_b}])")))
}

/// Probability of one specific bitstring.
pub fn eval_probability(counts: &Counts, bits: &str, cmp: &ComparisonSpec, line: usize) -> AssertionResult {
    let kind = AssertionKind::Probability;
    if bits.len() != counts.width() {
        return AssertionResult::error(
            kind,
            line,
            cmp.to_string(),
            format!(
                "bitstring has length {}, but the circuit measures {} classical bit(s)",
                bits.len(),
                counts.width()
            ),
        );
    }
    let actual = counts.get(bits) as f64 / counts.total() as f64;
    metric_result(kind, line, actual, cmp, Some(format!("P(\"{bits}\")")))
}

/// Argmax check on the counts; ties break to the lexicographically
/// smallest key, noted in the message.
pub fn eval_most_frequent(counts: &Counts, expected: &str, line: usize) -> AssertionResult {
    let kind = AssertionKind::MostFrequent;
    let want = format!("== \"{expected}\"");
    // BTreeMap iteration is ascending, so strict > keeps the smallest key
    // on ties.
    let mut best: Option<(&str, u64)> = None;
    let mut tie = false;
    for (key, count) in counts.iter() {
        match best {
            None => best = Some((key, count)),
            Some((_, best_count)) if count > best_count => {
                best = Some((key, count));
                tie = false;
            }
            Some((_, best_count)) if count == best_count => tie = true,
            _ => {}
        }
    }
    let Some((argmax, count)) = best else {
        return AssertionResult::error(kind, line, want, "no outcomes recorded");
    };
    let pass = argmax == expected;
    let mut message = format!("most frequent outcome \"{argmax}\" ({count} of {} shots)", counts.total());
    if tie {
        message.push_str("; tie broken to the lexicographically smallest key");
    }
    AssertionResult {
        status: if pass { Status::Pass } else { Status::Fail },
        kind,
        message,
        actual: Some(format!("\"{argmax}\"")),
        expected: want,
        line,
    }
}

/// Classical fidelity: squared Bhattacharyya coefficient between the
/// measured distribution and the ideal one.
pub fn eval_fidelity(counts: &Counts, ideal: &Distribution, cmp: &ComparisonSpec, line: usize) -> AssertionResult {
    let kind = AssertionKind::Fidelity;
    if let Some(err) = check_widths(kind, line, counts, ideal, cmp) {
        return err;
    }
    let p = counts.distribution();
    let bc: f64 = p
        .iter()
        .map(|(key, prob)| (prob * ideal.probability(key)).sqrt())
        .sum();
    metric_result(kind, line, bc * bc, cmp, Some("vs ideal simulation".into()))
}

/// Entanglement witness: S(ρ_A) of the reduced density matrix over the
/// partition, from the measurement-free statevector. Passes when the
/// entropy exceeds [`ENTANGLEMENT_THRESHOLD`].
pub fn eval_entangled(state: &Statevector, partition: &[usize], line: usize) -> AssertionResult {
    let kind = AssertionKind::Entangled;
    let expected = format!("S(ρ_A) > 0 for partition [{}]", join_indices(partition));
    match partial_trace(state, partition) {
        Ok(rho) => {
            let s = von_neumann_entropy(&rho);
            AssertionResult {
                status: if s > ENTANGLEMENT_THRESHOLD { Status::Pass } else { Status::Fail },
                kind,
                message: format!("S(ρ_A) = {} bits", fmt_value(s)),
                actual: Some(fmt_value(s)),
                expected,
                line,
            }
        }
        Err(err) => AssertionResult::error(kind, line, expected, err.to_string()),
    }
}

/// Every operation name (measurements as "measure") must be in `allowed`.
/// Evaluated on the inlined circuit before execution.
pub fn eval_gate_set(circuit: &Circuit, allowed: &BTreeSet<String>, line: usize) -> AssertionResult {
    let kind = AssertionKind::GateSet;
    let expected = format!(
        "gates ⊆ {{{}}}",
        allowed.iter().cloned().collect::<Vec<_>>().join(", ")
    );
    let mut violators: BTreeMap<&str, usize> = BTreeMap::new();
    for op in circuit.ops() {
        if !allowed.contains(op.name()) {
            *violators.entry(op.name()).or_insert(0) += 1;
        }
    }
    if violators.is_empty() {
        AssertionResult {
            status: Status::Pass,
            kind,
            message: format!("all {} operation(s) within the allowed set", circuit.ops().len()),
            actual: Some("no gates outside the set".into()),
            expected,
            line,
        }
    } else {
        let listed: Vec<String> = violators.iter().map(|(n, c)| format!("{n}×{c}")).collect();
        AssertionResult {
            status: Status::Fail,
            kind,
            message: format!("gates outside the allowed set: {}", listed.join(", ")),
            actual: Some(listed.join(", ")),
            expected,
            line,
        }
    }
}

/// Depth bound on the inlined circuit; measurements count.
pub fn eval_depth(circuit: &Circuit, bound: usize, line: usize) -> AssertionResult {
    let depth = circuit.depth();
    AssertionResult {
        status: if depth <= bound { Status::Pass } else { Status::Fail },
        kind: AssertionKind::Depth,
        message: format!("circuit depth is {depth}"),
        actual: Some(depth.to_string()),
        expected: format!("<= {bound}"),
        line,
    }
}

fn join_indices(indices: &[usize]) -> String {
    indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

/// Inputs available to the dispatcher for one test execution.
pub struct EvalContext<'a> {
    pub circuit: &'a Circuit,
    pub counts: Option<&'a Counts>,
    pub statevector: Option<&'a Statevector>,
    pub ideal: Option<&'a Distribution>,
}

/// Route one directive to its evaluator.
pub fn evaluate(directive: &AssertionDirective, ctx: &EvalContext<'_>) -> AssertionResult {
    let line = directive.line;
    let kind = directive.kind();
    let missing = |what: &str| {
        AssertionResult::error(kind, line, String::new(), format!("{what} unavailable for evaluation"))
    };
    let map = ctx.circuit.measurement_map();
    match &directive.payload {
        AssertionPayload::Output { expected } => match ctx.counts {
            Some(counts) => eval_output(counts, expected, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Tvd { reference, cmp } => match ctx.counts {
            Some(counts) => eval_tvd(counts, reference, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Hellinger { reference, cmp } => match ctx.counts {
            Some(counts) => eval_hellinger(counts, reference, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Kl { reference, cmp } => match ctx.counts {
            Some(counts) => eval_kl(counts, reference, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Chi2 { reference, cmp } => match ctx.counts {
            Some(counts) => eval_chi2(counts, reference, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Marginal { qubit, value, cmp } => match ctx.counts {
            Some(counts) => eval_marginal(counts, map, *qubit, *value, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Observable { qubits, cmp } => match ctx.counts {
            Some(counts) => eval_observable(counts, map, qubits, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Entropy { cmp } => match ctx.counts {
            Some(counts) => eval_entropy(counts, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Correlation { bit_a, bit_b, cmp } => match ctx.counts {
            Some(counts) => eval_correlation(counts, *bit_a, *bit_b, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Probability { bits, cmp } => match ctx.counts {
            Some(counts) => eval_probability(counts, bits, cmp, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::MostFrequent { expected } => match ctx.counts {
            Some(counts) => eval_most_frequent(counts, expected, line),
            None => missing("measurement counts"),
        },
        AssertionPayload::Fidelity { cmp } => match (ctx.counts, ctx.ideal) {
            (Some(counts), Some(ideal)) => eval_fidelity(counts, ideal, cmp, line),
            _ => missing("ideal distribution"),
        },
        AssertionPayload::Entangled { partition } => match ctx.statevector {
            Some(state) => eval_entangled(state, partition, line),
            None => missing("statevector"),
        },
        AssertionPayload::GateSet { allowed } => eval_gate_set(ctx.circuit, allowed, line),
        AssertionPayload::Depth { bound } => eval_depth(ctx.circuit, *bound, line),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::bell_circuit;
    use crate::pragma::CmpOp;
    use approx::assert_abs_diff_eq;

    fn counts(pairs: &[(&str, u64)]) -> Counts {
        let width = pairs.first().map(|(k, _)| k.len()).unwrap_or(0);
        Counts::new(width, pairs.iter().map(|(k, c)| (k.to_string(), *c)).collect())
    }

    fn dist(pairs: &[(&str, f64)]) -> Distribution {
        Distribution::from_pairs(pairs.iter().map(|(k, p)| (k.to_string(), *p))).unwrap()
    }

    fn lt(threshold: f64) -> ComparisonSpec {
        ComparisonSpec::ordered(CmpOp::Lt, threshold)
    }

    fn approx(threshold: f64, atol: f64) -> ComparisonSpec {
        ComparisonSpec::approx(threshold, atol)
    }

    fn actual_of(result: &AssertionResult) -> f64 {
        result.actual.as_ref().unwrap().parse().unwrap()
    }

    #[test]
    fn compare_operators() {
        assert!(compare(0.52, &approx(0.5, 0.05)).unwrap());
        assert!(!compare(0.56, &approx(0.5, 0.05)).unwrap());
        assert!(!compare(0.1, &lt(0.05)).unwrap());
        assert!(compare(f64::INFINITY, &ComparisonSpec::ordered(CmpOp::Gt, 0.5)).unwrap());
        assert!(!compare(f64::INFINITY, &lt(0.1)).unwrap());
        assert!(compare(f64::NAN, &lt(0.1)).is_err());
    }

    #[test]
    fn output_pass_fail_and_error() {
        let pass = eval_output(&counts(&[("1", 100)]), "1", 1);
        assert_eq!(pass.status, Status::Pass);

        let fail = eval_output(&counts(&[("00", 512), ("11", 512)]), "00", 2);
        assert_eq!(fail.status, Status::Fail);
        assert!(fail.actual.as_ref().unwrap().contains("00"));
        assert!(fail.actual.as_ref().unwrap().contains("11"));

        // Bit-order fixture: X on q[0] measured into bit 0 gives "01".
        let order = eval_output(&counts(&[("01", 100)]), "10", 3);
        assert_eq!(order.status, Status::Fail);

        let err = eval_output(&counts(&[("01", 100)]), "0", 4);
        assert_eq!(err.status, Status::Error);
    }

    #[test]
    fn tvd_examples() {
        let q = dist(&[("00", 0.5), ("11", 0.5)]);
        let same = eval_tvd(&counts(&[("00", 50), ("11", 50)]), &q, &lt(0.05), 1);
        assert_eq!(same.status, Status::Pass);
        assert_abs_diff_eq!(actual_of(&same), 0.0, epsilon = 1e-12);

        let disjoint = eval_tvd(&counts(&[("00", 10)]), &dist(&[("11", 1.0)]), &lt(0.05), 1);
        assert_abs_diff_eq!(actual_of(&disjoint), 1.0, epsilon = 1e-12);
        assert_eq!(disjoint.status, Status::Fail);

        let skew = eval_tvd(&counts(&[("00", 40), ("11", 60)]), &q, &lt(0.05), 1);
        assert_abs_diff_eq!(actual_of(&skew), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn hellinger_examples() {
        let same = eval_hellinger(&counts(&[("0", 1), ("1", 1)]), &dist(&[("0", 0.5), ("1", 0.5)]), &lt(0.1), 1);
        assert_abs_diff_eq!(actual_of(&same), 0.0, epsilon = 1e-12);

        let disjoint = eval_hellinger(&counts(&[("0", 1)]), &dist(&[("1", 1.0)]), &lt(0.1), 1);
        assert_abs_diff_eq!(actual_of(&disjoint), 1.0, epsilon = 1e-12);

        // Direct formula: (1/√2)·√((√0.36−√0.25)² + (√0.64−√0.75)²)
        let h = eval_hellinger(
            &counts(&[("0", 36), ("1", 64)]),
            &dist(&[("0", 0.25), ("1", 0.75)]),
            &lt(1.0),
            1,
        );
        let manual = (((0.36f64).sqrt() - (0.25f64).sqrt()).powi(2)
            + ((0.64f64).sqrt() - (0.75f64).sqrt()).powi(2))
        .sqrt()
            / std::f64::consts::SQRT_2;
        assert_abs_diff_eq!(actual_of(&h), manual, epsilon = 1e-6);
        assert_abs_diff_eq!(manual, 0.0847, epsilon = 5e-4);
    }

    #[test]
    fn kl_examples() {
        let same = eval_kl(&counts(&[("0", 1), ("1", 1)]), &dist(&[("0", 0.5), ("1", 0.5)]), &lt(0.1), 1);
        assert_abs_diff_eq!(actual_of(&same), 0.0, epsilon = 1e-12);

        let ln2 = eval_kl(&counts(&[("0", 100)]), &dist(&[("0", 0.5), ("1", 0.5)]), &lt(1.0), 1);
        assert_abs_diff_eq!(actual_of(&ln2), std::f64::consts::LN_2, epsilon = 1e-6);

        let inf = eval_kl(&counts(&[("0", 50), ("1", 50)]), &dist(&[("0", 1.0)]), &lt(0.1), 1);
        assert_eq!(inf.status, Status::Fail);
        assert_eq!(inf.actual.as_deref(), Some("inf"));
        assert!(inf.message.contains("zero reference probability"));
    }

    #[test]
    fn chi2_exact_match_gives_p_one() {
        let q = dist(&[("00", 0.5), ("11", 0.5)]);
        let r = eval_chi2(&counts(&[("00", 5000), ("11", 5000)]), &q, &ComparisonSpec::ordered(CmpOp::Ge, 0.05), 1);
        assert_eq!(r.status, Status::Pass);
        assert_abs_diff_eq!(actual_of(&r), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chi2_unexpected_outcome_forces_p_zero() {
        let q = dist(&[("00", 0.5), ("11", 0.5)]);
        let r = eval_chi2(&counts(&[("00", 4999), ("11", 4998), ("01", 3)]), &q, &ComparisonSpec::ordered(CmpOp::Ge, 0.05), 1);
        assert_eq!(r.status, Status::Fail);
        assert_abs_diff_eq!(actual_of(&r), 0.0, epsilon = 1e-15);
        assert!(r.message.contains("01×3"), "message: {}", r.message);
    }

    #[test]
    fn chi2_single_outcome_reference() {
        let q = dist(&[("1", 1.0)]);
        let all = eval_chi2(&counts(&[("1", 100)]), &q, &ComparisonSpec::ordered(CmpOp::Ge, 0.05), 1);
        assert_abs_diff_eq!(actual_of(&all), 1.0, epsilon = 1e-15);
        let off = eval_chi2(&counts(&[("1", 99), ("0", 1)]), &q, &ComparisonSpec::ordered(CmpOp::Ge, 0.05), 1);
        assert_abs_diff_eq!(actual_of(&off), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn marginal_examples() {
        let map = bell_circuit().measurement_map().clone();
        let bell = counts(&[("00", 500), ("11", 500)]);
        let r = eval_marginal(&bell, &map, 0, 1, &approx(0.5, 0.05), 1);
        assert_eq!(r.status, Status::Pass);
        assert_abs_diff_eq!(actual_of(&r), 0.5, epsilon = 1e-12);

        let x = counts(&[("1", 100)]);
        let mut map1 = MeasurementMap::new();
        map1.insert(0, 0).unwrap();
        let exact = eval_marginal(&x, &map1, 0, 1, &approx(1.0, 1e-9), 1);
        assert_eq!(exact.status, Status::Pass);

        let unmeasured = eval_marginal(&bell, &map, 7, 1, &approx(0.5, 0.05), 1);
        assert_eq!(unmeasured.status, Status::Error);
        assert!(unmeasured.message.contains("not measured"));
    }

    #[test]
    fn observable_examples() {
        let map = bell_circuit().measurement_map().clone();
        let bell = counts(&[("00", 500), ("11", 500)]);
        let r = eval_observable(&bell, &map, &[0, 1], &approx(1.0, 1e-12), 1);
        assert_eq!(r.status, Status::Pass);
        assert_abs_diff_eq!(actual_of(&r), 1.0, epsilon = 1e-15);

        let mut map1 = MeasurementMap::new();
        map1.insert(0, 0).unwrap();
        let uniform = eval_observable(&counts(&[("0", 50), ("1", 50)]), &map1, &[0], &approx(0.0, 1e-9), 1);
        assert_abs_diff_eq!(actual_of(&uniform), 0.0, epsilon = 1e-12);

        let one = eval_observable(&counts(&[("1", 77)]), &map1, &[0], &approx(-1.0, 1e-12), 1);
        assert_eq!(one.status, Status::Pass);
        assert_abs_diff_eq!(actual_of(&one), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn observable_is_one_minus_twice_marginal() {
        let mut map = MeasurementMap::new();
        map.insert(0, 0).unwrap();
        map.insert(1, 1).unwrap();
        let c = counts(&[("00", 13), ("01", 29), ("10", 7), ("11", 51)]);
        let z = actual_of(&eval_observable(&c, &map, &[0], &approx(0.0, 10.0), 1));
        let m = actual_of(&eval_marginal(&c, &map, 0, 1, &approx(0.0, 10.0), 1));
        assert_abs_diff_eq!(z, 1.0 - 2.0 * m, epsilon = 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let det = eval_entropy(&counts(&[("0", 100)]), &approx(0.0, 1e-12), 1);
        assert_eq!(det.status, Status::Pass);

        let bell = eval_entropy(&counts(&[("00", 5000), ("11", 5000)]), &approx(1.0, 1e-9), 1);
        assert_eq!(bell.status, Status::Pass);

        let uniform4 = eval_entropy(
            &counts(&[("00", 25), ("01", 25), ("10", 25), ("11", 25)]),
            &approx(2.0, 1e-12),
            1,
        );
        assert_eq!(uniform4.status, Status::Pass);
    }

    #[test]
    fn correlation_examples() {
        let bell = counts(&[("00", 500), ("11", 500)]);
        let plus = eval_correlation(&bell, 0, 1, &approx(1.0, 1e-12), 1);
        assert_eq!(plus.status, Status::Pass);

        let anti = counts(&[("01", 500), ("10", 500)]);
        let minus = eval_correlation(&anti, 0, 1, &approx(-1.0, 1e-12), 1);
        assert_eq!(minus.status, Status::Pass);

        let degenerate = eval_correlation(&counts(&[("11", 100)]), 0, 1, &approx(1.0, 0.1), 1);
        assert_eq!(degenerate.status, Status::Error);
        assert!(degenerate.message.contains("degenerate marginal"));
    }

    #[test]
    fn probability_examples() {
        let bell = counts(&[("00", 5020), ("11", 4980)]);
        let ok = eval_probability(&bell, "00", &approx(0.5, 0.05), 1);
        assert_eq!(ok.status, Status::Pass);

        let absent = eval_probability(&bell, "01", &approx(0.0, 1e-12), 1);
        assert_eq!(absent.status, Status::Pass);
        assert_abs_diff_eq!(actual_of(&absent), 0.0, epsilon = 1e-15);

        let wrong_len = eval_probability(&bell, "0", &approx(0.5, 0.05), 1);
        assert_eq!(wrong_len.status, Status::Error);
    }

    #[test]
    fn most_frequent_examples() {
        let r = eval_most_frequent(&counts(&[("000", 700), ("111", 300)]), "000", 1);
        assert_eq!(r.status, Status::Pass);

        let tie = eval_most_frequent(&counts(&[("0", 50), ("1", 50)]), "0", 1);
        assert_eq!(tie.status, Status::Pass);
        assert!(tie.message.contains("tie"), "message: {}", tie.message);

        let fail = eval_most_frequent(&counts(&[("01", 90), ("10", 10)]), "10", 1);
        assert_eq!(fail.status, Status::Fail);
        assert_eq!(fail.actual.as_deref(), Some("\"01\""));
    }

    #[test]
    fn fidelity_examples() {
        let ideal = dist(&[("00", 0.5), ("11", 0.5)]);
        let exact = eval_fidelity(&counts(&[("00", 500), ("11", 500)]), &ideal, &ComparisonSpec::ordered(CmpOp::Ge, 0.999), 1);
        assert_eq!(exact.status, Status::Pass);
        assert_abs_diff_eq!(actual_of(&exact), 1.0, epsilon = 1e-12);

        let disjoint = eval_fidelity(&counts(&[("01", 100)]), &ideal, &ComparisonSpec::ordered(CmpOp::Ge, 0.1), 1);
        assert_eq!(disjoint.status, Status::Fail);
        assert_abs_diff_eq!(actual_of(&disjoint), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn entangled_examples() {
        let bell = crate::sim::statevector(&bell_circuit()).unwrap();
        let r = eval_entangled(&bell, &[0], 1);
        assert_eq!(r.status, Status::Pass);
        assert_abs_diff_eq!(actual_of(&r), 1.0, epsilon = 1e-9);

        let zero = Statevector::zero(2);
        assert_eq!(eval_entangled(&zero, &[0], 1).status, Status::Fail);

        let mut c = crate::circuit::Circuit::new(2, 0).unwrap();
        c.push_gate("h", &[], &[0]).unwrap();
        let plus_zero = crate::sim::statevector(&c).unwrap();
        assert_eq!(eval_entangled(&plus_zero, &[0], 1).status, Status::Fail);

        let invalid = eval_entangled(&bell, &[0, 1], 1);
        assert_eq!(invalid.status, Status::Error);
    }

    #[test]
    fn gate_set_examples() {
        let bell = bell_circuit();
        let allowed: BTreeSet<String> = ["h", "cx", "measure"].iter().map(|s| s.to_string()).collect();
        assert_eq!(eval_gate_set(&bell, &allowed, 1).status, Status::Pass);

        let tight: BTreeSet<String> = ["cx", "measure"].iter().map(|s| s.to_string()).collect();
        let fail = eval_gate_set(&bell, &tight, 1);
        assert_eq!(fail.status, Status::Fail);
        assert!(fail.message.contains("h×1"), "message: {}", fail.message);

        let empty = crate::circuit::Circuit::new(1, 0).unwrap();
        assert_eq!(eval_gate_set(&empty, &BTreeSet::new(), 1).status, Status::Pass);
    }

    #[test]
    fn depth_examples() {
        let bell = bell_circuit();
        assert_eq!(eval_depth(&bell, 3, 1).status, Status::Pass);
        let fail = eval_depth(&bell, 2, 1);
        assert_eq!(fail.status, Status::Fail);
        assert_eq!(fail.actual.as_deref(), Some("3"));
        let empty = crate::circuit::Circuit::new(1, 0).unwrap();
        assert_eq!(eval_depth(&empty, 0, 1).status, Status::Pass);
    }
}
