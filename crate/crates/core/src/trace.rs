//! Trace files: a header fixing the problem mode and range bound, then one
//! operation per line.
//!
//! ```text
//! # comment
//! mode 3sum
//! rmax 5
//! + A 1
//! - A 1
//! ?
//! ```
//!
//! Subset-sum traces use `tmax N` and ops `+ w`, `? t` (plus `- w` in
//! `subset-sum-full`). Set traces use `rmax N`, `k N` for `ksum`, and ops
//! `+ L w`, `- L w`, `?` where `L` is `A`/`B`/`C` for `3sum` or `1..=k` for `ksum`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Insert/query subset sum.
    SubsetSum,
    /// Subset sum with deletions; only the naive engine runs it.
    SubsetSumFull,
    ThreeSum,
    KSum,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::SubsetSum => "subset-sum",
            Mode::SubsetSumFull => "subset-sum-full",
            Mode::ThreeSum => "3sum",
            Mode::KSum => "ksum",
        }
    }

    pub fn is_subset_sum(self) -> bool {
        matches!(self, Mode::SubsetSum | Mode::SubsetSumFull)
    }

    fn bound_keyword(self) -> &'static str {
        if self.is_subset_sum() {
            "tmax"
        } else {
            "rmax"
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subset-sum" => Ok(Mode::SubsetSum),
            "subset-sum-full" => Ok(Mode::SubsetSumFull),
            "3sum" => Ok(Mode::ThreeSum),
            "ksum" => Ok(Mode::KSum),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceHeader {
    pub mode: Mode,
    /// `tmax` for subset-sum modes, `rmax` otherwise.
    pub bound: u64,
    /// Number of sets; `Some` exactly for `ksum`.
    pub k: Option<usize>,
    pub seed: Option<u64>,
}

impl TraceHeader {
    /// Number of sets a set-mode trace addresses.
    pub fn set_count(&self) -> usize {
        match self.mode {
            Mode::ThreeSum => 3,
            Mode::KSum => self.k.unwrap_or(0),
            _ => 0,
        }
    }
}

/// Subset-sum operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SumOp {
    Insert(u64),
    Delete(u64),
    Query(u64),
}

/// 3-sum / k-sum operation; `set` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetOp {
    Insert { set: usize, value: u64 },
    Delete { set: usize, value: u64 },
    Query,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ops {
    Sum(Vec<SumOp>),
    Sets(Vec<SetOp>),
}

impl Ops {
    pub fn len(&self) -> usize {
        match self {
            Ops::Sum(v) => v.len(),
            Ops::Sets(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn query_count(&self) -> usize {
        match self {
            Ops::Sum(v) => v.iter().filter(|o| matches!(o, SumOp::Query(_))).count(),
            Ops::Sets(v) => v.iter().filter(|o| matches!(o, SetOp::Query)).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub ops: Ops,
}

impl Trace {
    pub fn sum_ops(&self) -> Option<&[SumOp]> {
        match &self.ops {
            Ops::Sum(v) => Some(v),
            Ops::Sets(_) => None,
        }
    }

    pub fn set_ops(&self) -> Option<&[SetOp]> {
        match &self.ops {
            Ops::Sets(v) => Some(v),
            Ops::Sum(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid generator settings: {0}")]
    Generator(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num(line: usize, tok: Option<&str>, what: &str) -> Result<u64, TraceError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<u64>()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn set_label(mode: Mode, k: usize, line: usize, tok: Option<&str>) -> Result<usize, TraceError> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing set label"))?;
    match mode {
        Mode::ThreeSum => match tok {
            "A" => Ok(0),
            "B" => Ok(1),
            "C" => Ok(2),
            _ => Err(parse_err(line, format!("set label must be A, B or C, got `{tok}`"))),
        },
        _ => {
            let i: usize = tok
                .parse()
                .map_err(|_| parse_err(line, format!("invalid set index `{tok}`")))?;
            if i == 0 || i > k {
                return Err(parse_err(line, format!("set index {i} outside 1..={k}")));
            }
            Ok(i - 1)
        }
    }
}

/// Parse trace text. Header directives must appear before the first operation.
pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    let mut mode: Option<Mode> = None;
    let mut bound: Option<u64> = None;
    let mut k: Option<usize> = None;
    let mut seed: Option<u64> = None;
    let mut header: Option<TraceHeader> = None;
    let mut sum_ops = Vec::new();
    let mut set_ops = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(head) = toks.next() else { continue };

        match head {
            "mode" | "tmax" | "rmax" | "k" | "seed" => {
                if header.is_some() {
                    return Err(parse_err(line, format!("`{head}` after the first operation")));
                }
                match head {
                    "mode" => {
                        let m = toks.next().ok_or_else(|| parse_err(line, "missing mode"))?;
                        if mode.is_some() {
                            return Err(parse_err(line, "duplicate `mode`"));
                        }
                        mode = Some(m.parse().map_err(|e: String| parse_err(line, e))?);
                    }
                    "tmax" | "rmax" => {
                        let m = mode.ok_or_else(|| parse_err(line, "`mode` must come first"))?;
                        if head != m.bound_keyword() {
                            return Err(parse_err(line, format!("`{head}` does not apply to mode {m}")));
                        }
                        if bound.is_some() {
                            return Err(parse_err(line, format!("duplicate `{head}`")));
                        }
                        let v = parse_num(line, toks.next(), head)?;
                        if v == 0 {
                            return Err(parse_err(line, format!("{head} must be at least 1")));
                        }
                        bound = Some(v);
                    }
                    "k" => {
                        if mode != Some(Mode::KSum) {
                            return Err(parse_err(line, "`k` only applies to mode ksum"));
                        }
                        let v = parse_num(line, toks.next(), "k")?;
                        if v < 3 {
                            return Err(parse_err(line, "k must be at least 3"));
                        }
                        k = Some(v as usize);
                    }
                    _ => seed = Some(parse_num(line, toks.next(), "seed")?),
                }
            }
            "+" | "-" | "?" => {
                if header.is_none() {
                    let m = mode.ok_or_else(|| parse_err(line, "operation before `mode`"))?;
                    let b = bound
                        .ok_or_else(|| parse_err(line, format!("operation before `{}`", m.bound_keyword())))?;
                    if m == Mode::KSum && k.is_none() {
                        return Err(parse_err(line, "operation before `k`"));
                    }
                    header = Some(TraceHeader { mode: m, bound: b, k, seed });
                }
                let h = header.as_ref().expect("header set above");
                if h.mode.is_subset_sum() {
                    let v = parse_num(line, toks.next(), "value")?;
                    if v > h.bound {
                        return Err(parse_err(line, format!("value {v} exceeds tmax {}", h.bound)));
                    }
                    sum_ops.push(match head {
                        "+" => SumOp::Insert(v),
                        "?" => SumOp::Query(v),
                        _ if h.mode == Mode::SubsetSumFull => SumOp::Delete(v),
                        _ => return Err(parse_err(line, "deletions require mode subset-sum-full")),
                    });
                } else if head == "?" {
                    set_ops.push(SetOp::Query);
                } else {
                    let set = set_label(h.mode, h.set_count(), line, toks.next())?;
                    let value = parse_num(line, toks.next(), "value")?;
                    if value > h.bound {
                        return Err(parse_err(line, format!("value {value} exceeds rmax {}", h.bound)));
                    }
                    set_ops.push(if head == "+" {
                        SetOp::Insert { set, value }
                    } else {
                        SetOp::Delete { set, value }
                    });
                }
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
        if let Some(extra) = toks.next() {
            return Err(parse_err(line, format!("unexpected token `{extra}`")));
        }
    }

    let header = match header {
        Some(h) => h,
        None => {
            let m = mode.ok_or_else(|| parse_err(0, "missing `mode`"))?;
            let b = bound.ok_or_else(|| parse_err(0, format!("missing `{}`", m.bound_keyword())))?;
            if m == Mode::KSum && k.is_none() {
                return Err(parse_err(0, "missing `k`"));
            }
            TraceHeader { mode: m, bound: b, k, seed }
        }
    };
    let ops = if header.mode.is_subset_sum() {
        Ops::Sum(sum_ops)
    } else {
        Ops::Sets(set_ops)
    };
    Ok(Trace { header, ops })
}

fn label(mode: Mode, set: usize) -> String {
    match mode {
        Mode::ThreeSum => ["A", "B", "C"][set].to_string(),
        _ => (set + 1).to_string(),
    }
}

/// Canonical text form; `parse_trace(&serialize_trace(t)) == t`.
pub fn serialize_trace(trace: &Trace) -> String {
    let h = &trace.header;
    let mut out = String::new();
    let _ = writeln!(out, "mode {}", h.mode);
    let _ = writeln!(out, "{} {}", h.mode.bound_keyword(), h.bound);
    if let Some(k) = h.k {
        let _ = writeln!(out, "k {k}");
    }
    if let Some(seed) = h.seed {
        let _ = writeln!(out, "seed {seed}");
    }
    match &trace.ops {
        Ops::Sum(ops) => {
            for op in ops {
                let _ = match op {
                    SumOp::Insert(w) => writeln!(out, "+ {w}"),
                    SumOp::Delete(w) => writeln!(out, "- {w}"),
                    SumOp::Query(t) => writeln!(out, "? {t}"),
                };
            }
        }
        Ops::Sets(ops) => {
            for op in ops {
                let _ = match op {
                    SetOp::Insert { set, value } => writeln!(out, "+ {} {value}", label(h.mode, *set)),
                    SetOp::Delete { set, value } => writeln!(out, "- {} {value}", label(h.mode, *set)),
                    SetOp::Query => writeln!(out, "?"),
                };
            }
        }
    }
    out
}

/// Settings for [`generate_trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub mode: Mode,
    pub bound: u64,
    pub k: Option<usize>,
    pub oprs: usize,
    pub seed: u64,
    pub query_ratio: f64,
    pub delete_ratio: f64,
}

impl GenSpec {
    pub fn new(mode: Mode, bound: u64, oprs: usize, seed: u64) -> Self {
        Self {
            mode,
            bound,
            k: if mode == Mode::KSum { Some(3) } else { None },
            oprs,
            seed,
            query_ratio: 0.5,
            delete_ratio: 0.0,
        }
    }
}

/// Seeded workload generator. Subset-sum weights are uniform in `[1, bound]`,
/// query targets in `[0, bound]`; set values are uniform in `[0, bound]` and
/// never duplicate a live value. Deletions always target live values and only
/// occur with a positive delete ratio; once every set is full an insert-only
/// trace continues with queries.
pub fn generate_trace(spec: &GenSpec) -> Result<Trace, TraceError> {
    let bad = |m: &str| Err(TraceError::Generator(m.to_string()));
    if spec.bound == 0 {
        return bad("bound must be at least 1");
    }
    if !(0.0..=1.0).contains(&spec.query_ratio) || !(0.0..=1.0).contains(&spec.delete_ratio) {
        return bad("ratios must lie in [0, 1]");
    }
    if spec.query_ratio + spec.delete_ratio > 1.0 {
        return bad("query ratio plus delete ratio exceeds 1");
    }
    let full_dynamic = matches!(spec.mode, Mode::SubsetSumFull | Mode::ThreeSum | Mode::KSum);
    if spec.delete_ratio > 0.0 && !full_dynamic {
        return bad("deletions need a fully dynamic mode");
    }
    let k = match spec.mode {
        Mode::KSum => match spec.k {
            Some(k) if k >= 3 => Some(k),
            _ => return bad("ksum needs k >= 3"),
        },
        _ => None,
    };
    let header = TraceHeader {
        mode: spec.mode,
        bound: spec.bound,
        k,
        seed: Some(spec.seed),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let ops = if spec.mode.is_subset_sum() {
        let mut live: Vec<u64> = Vec::new();
        let mut ops = Vec::with_capacity(spec.oprs);
        for _ in 0..spec.oprs {
            let r: f64 = rng.gen();
            if r < spec.query_ratio {
                ops.push(SumOp::Query(rng.gen_range(0..=spec.bound)));
            } else if r < spec.query_ratio + spec.delete_ratio && !live.is_empty() {
                let i = rng.gen_range(0..live.len());
                ops.push(SumOp::Delete(live.swap_remove(i)));
            } else {
                let w = rng.gen_range(1..=spec.bound);
                live.push(w);
                ops.push(SumOp::Insert(w));
            }
        }
        Ops::Sum(ops)
    } else {
        let sets = header.set_count();
        let universe = spec.bound + 1;
        let mut live: Vec<Vec<u64>> = vec![Vec::new(); sets];
        let mut ops = Vec::with_capacity(spec.oprs);
        for _ in 0..spec.oprs {
            let r: f64 = rng.gen();
            let total: usize = live.iter().map(Vec::len).sum();
            let all_full = live.iter().all(|s| s.len() as u64 == universe);
            let want_delete = r >= spec.query_ratio && r < spec.query_ratio + spec.delete_ratio;
            if r < spec.query_ratio || (all_full && spec.delete_ratio == 0.0) {
                ops.push(SetOp::Query);
            } else if (want_delete || all_full) && total > 0 {
                let mut pick = rng.gen_range(0..total);
                let set = live
                    .iter()
                    .position(|s| {
                        if pick < s.len() {
                            true
                        } else {
                            pick -= s.len();
                            false
                        }
                    })
                    .expect("pick < total");
                let value = live[set].swap_remove(pick);
                ops.push(SetOp::Delete { set, value });
            } else {
                let open: Vec<usize> = (0..sets).filter(|&s| (live[s].len() as u64) < universe).collect();
                let set = open[rng.gen_range(0..open.len())];
                let value = loop {
                    let v = rng.gen_range(0..=spec.bound);
                    if !live[set].contains(&v) {
                        break v;
                    }
                };
                live[set].push(value);
                ops.push(SetOp::Insert { set, value });
            }
        }
        Ops::Sets(ops)
    };
    Ok(Trace { header, ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_subset_sum_example() {
        let t = parse_trace("mode subset-sum\ntmax 10\n+ 3\n? 8\n").unwrap();
        assert_eq!(t.header, TraceHeader { mode: Mode::SubsetSum, bound: 10, k: None, seed: None });
        assert_eq!(t.ops, Ops::Sum(vec![SumOp::Insert(3), SumOp::Query(8)]));
    }

    #[test]
    fn parses_three_sum_example() {
        let t = parse_trace("mode 3sum\nrmax 5\n+ A 1\n+ B 2\n+ C 3\n?\n").unwrap();
        assert_eq!(t.ops.len(), 4);
        assert_eq!(t.set_ops().unwrap()[2], SetOp::Insert { set: 2, value: 3 });
    }

    #[test]
    fn parses_ksum_with_comments() {
        let text = "# a comment\nmode ksum\nrmax 9\nk 4\n\n+ 4 9 # trailing\n- 4 9\n?\n";
        let t = parse_trace(text).unwrap();
        assert_eq!(t.header.k, Some(4));
        assert_eq!(
            t.set_ops().unwrap(),
            &[SetOp::Insert { set: 3, value: 9 }, SetOp::Delete { set: 3, value: 9 }, SetOp::Query]
        );
    }

    fn err_line(text: &str) -> usize {
        match parse_trace(text).unwrap_err() {
            TraceError::Parse { line, .. } => line,
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(err_line("mode subset-sum\ntmax 10\nfoo 3\n"), 3);
        assert_eq!(err_line("mode subset-sum\ntmax 10\n+ 3\n- 3\n"), 4);
        assert_eq!(err_line("mode subset-sum\ntmax 10\n+ 11\n"), 3);
        assert_eq!(err_line("mode 3sum\nrmax 5\n+ D 1\n"), 3);
        assert_eq!(err_line("mode ksum\nrmax 5\n+ 1 1\n"), 3);
        assert_eq!(err_line("mode 3sum\ntmax 5\n"), 2);
        assert_eq!(err_line("+ 1\n"), 1);
        assert_eq!(err_line("mode subset-sum\ntmax 4\n? x\n"), 3);
        assert_eq!(err_line("mode subset-sum\ntmax 4\n? 1 2\n"), 3);
    }

    #[test]
    fn header_only_trace() {
        let t = parse_trace("mode subset-sum-full\ntmax 3\n").unwrap();
        assert!(t.ops.is_empty());
        assert!(parse_trace("mode subset-sum\n").is_err());
    }

    #[test]
    fn generator_is_seed_deterministic() {
        let mut spec = GenSpec::new(Mode::ThreeSum, 20, 300, 42);
        spec.delete_ratio = 0.2;
        let a = serialize_trace(&generate_trace(&spec).unwrap());
        let b = serialize_trace(&generate_trace(&spec).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn generator_respects_counts_and_bounds() {
        for mode in [Mode::SubsetSum, Mode::SubsetSumFull, Mode::ThreeSum, Mode::KSum] {
            let mut spec = GenSpec::new(mode, 7, 250, 9);
            if mode != Mode::SubsetSum {
                spec.delete_ratio = 0.25;
            }
            let t = generate_trace(&spec).unwrap();
            assert_eq!(t.ops.len(), 250);
            match &t.ops {
                Ops::Sum(ops) => assert!(ops.iter().all(|op| match *op {
                    SumOp::Insert(w) => (1..=7).contains(&w),
                    SumOp::Delete(w) | SumOp::Query(w) => w <= 7,
                })),
                Ops::Sets(ops) => {
                    let mut live = vec![std::collections::HashSet::new(); t.header.set_count()];
                    for op in ops {
                        match *op {
                            SetOp::Insert { set, value } => {
                                assert!(value <= 7);
                                assert!(live[set].insert(value), "duplicate insert");
                            }
                            SetOp::Delete { set, value } => assert!(live[set].remove(&value), "dead delete"),
                            SetOp::Query => {}
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn generator_rejects_deletes_in_insert_only_mode() {
        let mut spec = GenSpec::new(Mode::SubsetSum, 7, 10, 1);
        spec.delete_ratio = 0.1;
        assert!(generate_trace(&spec).is_err());
    }

    proptest! {
        #[test]
        fn serialize_parse_roundtrip(mode_idx in 0usize..4, bound in 1u64..40, oprs in 0usize..60, seed: u64) {
            let mode = [Mode::SubsetSum, Mode::SubsetSumFull, Mode::ThreeSum, Mode::KSum][mode_idx];
            let mut spec = GenSpec::new(mode, bound, oprs, seed);
            spec.k = if mode == Mode::KSum { Some(3 + (seed % 3) as usize) } else { None };
            if mode != Mode::SubsetSum {
                spec.delete_ratio = 0.2;
            }
            let t = generate_trace(&spec).unwrap();
            let text = serialize_trace(&t);
            let back = parse_trace(&text).unwrap();
            prop_assert_eq!(&back, &t);
            prop_assert_eq!(serialize_trace(&back), text);
        }
    }
}
