//! Parameter sequences `(p_n)`, truncation, and the finite-horizon sums the
//! summability hypotheses are phrased in.
//!
//! Every sequence is a pure function of the bond length `n >= 1`. Closed forms
//! cover the sequences used in the literature on the truncation question; a
//! tabulated kind lets users import their own data.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default horizon for support scans, matching the command line default.
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// What a tabulated sequence does past its last listed index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `p_n = 0` beyond the table.
    Zero,
    /// `p_n` keeps the last tabulated value.
    Hold,
}

/// A finite table of `(n, p_n)` pairs. Unlisted indices below the last entry
/// are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    entries: Vec<(u64, f64)>,
    tail: Tail,
    source: Option<String>,
}

impl Table {
    pub fn new(entries: Vec<(u64, f64)>, tail: Tail) -> Result<Self> {
        let mut prev = 0u64;
        for &(n, p) in &entries {
            if n == 0 {
                return Err(Error::domain("table index 0: bond lengths start at 1"));
            }
            if n <= prev {
                return Err(Error::domain(format!("table indices must be strictly increasing ({prev} then {n})")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("table value p_{n} = {p} outside [0,1]")));
            }
            prev = n;
        }
        Ok(Table { entries, tail, source: None })
    }

    /// Reads a two-column `n,p` CSV. A leading header row is skipped.
    pub fn from_csv(path: impl AsRef<Path>, tail: Tail) -> Result<Self> {
        let path = path.as_ref();
        let mut reader =
            csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path).map_err(|e| {
                match e.into_kind() {
                    csv::ErrorKind::Io(io) => Error::io(path, io),
                    other => Error::Csv(format!("{other:?}")),
                }
            })?;
        let mut entries = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::Csv(format!("row {}: expected 2 columns, found {}", row + 1, record.len())));
            }
            let n = record[0].parse::<u64>();
            let p = record[1].parse::<f64>();
            match (n, p) {
                (Ok(n), Ok(p)) => entries.push((n, p)),
                _ if row == 0 => continue,
                _ => return Err(Error::Csv(format!("row {}: cannot parse `{},{}`", row + 1, &record[0], &record[1]))),
            }
        }
        let mut table = Table::new(entries, tail)?;
        table.source = Some(path.display().to_string());
        Ok(table)
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    fn value(&self, n: u64) -> f64 {
        match self.entries.binary_search_by_key(&n, |&(i, _)| i) {
            Ok(idx) => self.entries[idx].1,
            Err(idx) if idx == self.entries.len() => match (self.tail, self.entries.last()) {
                (Tail::Hold, Some(&(_, p))) => p,
                _ => 0.0,
            },
            Err(_) => 0.0,
        }
    }

    /// Largest index that can carry a positive value, if finite.
    fn support_end(&self) -> Option<u64> {
        match self.tail {
            Tail::Zero => Some(self.entries.last().map_or(0, |&(n, _)| n)),
            Tail::Hold if self.entries.last().is_none_or(|&(_, p)| p == 0.0) => {
                Some(self.entries.last().map_or(0, |&(n, _)| n))
            }
            Tail::Hold => None,
        }
    }
}

/// A sequence of bond probabilities indexed by bond length.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbSequence {
    /// `p_n = p`.
    Constant(f64),
    /// `p_n = c * n^(-alpha)` with `0 <= c <= 1`, `alpha >= 0`.
    PowerLaw {
        scale: f64,
        exponent: f64,
    },
    /// `p_n = n^(-1/2)`.
    InverseSqrt,
    /// `p_n = k^(-1/2)` when `n = 3^k` or `n = 3^k + 1` (`k >= 1`), else 0.
    RemarkP,
    /// `q_n = 1 / (2 sqrt(k - 1))` when `n = 100^k + t 3^k` for some
    /// `t in 1..=100` and `k >= 2`, else 0.
    RemarkQ,
    Table(Table),
}

/// Named constructors for the built-in sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    RemarkP,
    RemarkQ,
    InverseSqrt,
    Constant(f64),
    PowerLaw { c: f64, alpha: f64 },
}

/// Which partial sum [`ProbSequence::partial_sum`] accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    /// `sum p_n`
    Plain,
    /// `sum p_n^2`
    Squares,
    /// `sum p_n p_{n+N}`
    Cross(u64),
}

impl ProbSequence {
    pub fn builtin(b: Builtin) -> Result<Self> {
        match b {
            Builtin::RemarkP => Ok(ProbSequence::RemarkP),
            Builtin::RemarkQ => Ok(ProbSequence::RemarkQ),
            Builtin::InverseSqrt => Ok(ProbSequence::InverseSqrt),
            Builtin::Constant(p) => Self::constant(p),
            Builtin::PowerLaw { c, alpha } => Self::power_law(c, alpha),
        }
    }

    pub fn constant(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("constant p = {p} outside [0,1]")));
        }
        Ok(ProbSequence::Constant(p))
    }

    pub fn power_law(scale: f64, exponent: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&scale) {
            return Err(Error::domain(format!("power-law scale c = {scale} must lie in [0,1] so that p_1 <= 1")));
        }
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::domain(format!("power-law exponent alpha = {exponent} must be finite and >= 0")));
        }
        Ok(ProbSequence::PowerLaw { scale, exponent })
    }

    /// `p_n`, rejecting `n = 0`.
    pub fn eval(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain("p_0 requested: bond lengths start at 1"));
        }
        Ok(self.p(n))
    }

    /// `p_n` for `n >= 1`. Returns 0 for `n = 0`, which no bond has.
    #[inline]
    pub fn p(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self {
            ProbSequence::Constant(p) => *p,
            ProbSequence::PowerLaw { scale, exponent } => scale * (n as f64).powf(-exponent),
            ProbSequence::InverseSqrt => 1.0 / (n as f64).sqrt(),
            ProbSequence::RemarkP => remark_p(n),
            ProbSequence::RemarkQ => remark_q(n),
            ProbSequence::Table(t) => t.value(n),
        }
    }

    pub fn truncate(&self, cutoff: u64) -> Result<TruncatedSequence> {
        TruncatedSequence::new(self.clone(), cutoff)
    }

    /// `sum_{n=1}^{horizon}` of the selected terms, with compensated summation.
    pub fn partial_sum(&self, mode: SumMode, horizon: u64) -> Result<f64> {
        if horizon == 0 {
            return Err(Error::domain("partial sum horizon must be >= 1"));
        }
        let sum = match mode {
            SumMode::Plain => compensated_sum((1..=horizon).map(|n| self.p(n))),
            SumMode::Squares => compensated_sum((1..=horizon).map(|n| {
                let p = self.p(n);
                p * p
            })),
            SumMode::Cross(0) => return Err(Error::domain("cross-sum shift N must be >= 1")),
            SumMode::Cross(shift) => self.cross_sum(shift, 1, horizon),
        };
        Ok(sum)
    }

    /// `sum_{n=from}^{to} p_n p_{n+shift}`; zero for an empty range.
    pub fn cross_sum(&self, shift: u64, from: u64, to: u64) -> f64 {
        compensated_sum((from.max(1)..=to).map(|n| self.p(n) * self.p(n + shift)))
    }

    /// Smallest `n <= horizon` with `p_n > 0`.
    pub fn support_min(&self, horizon: u64) -> Option<u64> {
        let end = self.scan_end(horizon);
        (1..=end).find(|&n| self.p(n) > 0.0)
    }

    /// gcd of `{n <= horizon : p_n > 0}`.
    ///
    /// A finite-horizon gcd only certifies the true gcd when it equals 1; a
    /// larger value may still drop once further support points appear.
    pub fn support_gcd(&self, horizon: u64) -> Option<u64> {
        let end = self.scan_end(horizon);
        let mut g: Option<u64> = None;
        for n in 1..=end {
            if self.p(n) > 0.0 {
                let next = match g {
                    None => n,
                    Some(g) => gcd(g, n),
                };
                if next == 1 {
                    return Some(1);
                }
                g = Some(next);
            }
        }
        g
    }

    fn scan_end(&self, horizon: u64) -> u64 {
        match self {
            ProbSequence::Table(t) => t.support_end().map_or(horizon, |e| e.min(horizon)),
            _ => horizon,
        }
    }
}

impl fmt::Display for ProbSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbSequence::Constant(p) => write!(f, "const:p={p}"),
            ProbSequence::PowerLaw { scale, exponent } => {
                write!(f, "powlaw:c={scale},alpha={exponent}")
            }
            ProbSequence::InverseSqrt => f.write_str("invsqrt"),
            ProbSequence::RemarkP => f.write_str("remark-p"),
            ProbSequence::RemarkQ => f.write_str("remark-q"),
            ProbSequence::Table(t) => {
                let tail = match t.tail {
                    Tail::Zero => "zero",
                    Tail::Hold => "hold",
                };
                write!(f, "table:{},tail={tail}", t.source.as_deref().unwrap_or("<inline>"))
            }
        }
    }
}

impl FromStr for ProbSequence {
    type Err = Error;

    /// Parses the sequence mini-grammar: `const:p=0.5`,
    /// `powlaw:c=1,alpha=0.5`, `invsqrt`, `remark-p`, `remark-q`,
    /// `table:<path>,tail=zero|hold`.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::SeqSpec { spec: spec.to_string(), reason: reason.to_string() };
        let spec_trim = spec.trim();
        let (kind, rest) = match spec_trim.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (spec_trim, None),
        };
        match (kind, rest) {
            ("invsqrt", None) => Ok(ProbSequence::InverseSqrt),
            ("remark-p", None) => Ok(ProbSequence::RemarkP),
            ("remark-q", None) => Ok(ProbSequence::RemarkQ),
            ("const", Some(args)) => {
                let kv = parse_kv(args).map_err(|r| bad(&r))?;
                let p = lookup(&kv, "p").map_err(|r| bad(&r))?;
                if kv.len() != 1 {
                    return Err(bad("const takes exactly `p=<f>`"));
                }
                ProbSequence::constant(p)
            }
            ("powlaw", Some(args)) => {
                let kv = parse_kv(args).map_err(|r| bad(&r))?;
                let c = lookup(&kv, "c").map_err(|r| bad(&r))?;
                let alpha = lookup(&kv, "alpha").map_err(|r| bad(&r))?;
                if kv.len() != 2 {
                    return Err(bad("powlaw takes exactly `c=<f>,alpha=<f>`"));
                }
                ProbSequence::power_law(c, alpha)
            }
            ("table", Some(args)) => {
                let (path, tail) = match args.rsplit_once(",tail=") {
                    Some((p, "zero")) => (p, Tail::Zero),
                    Some((p, "hold")) => (p, Tail::Hold),
                    Some(_) => return Err(bad("tail must be `zero` or `hold`")),
                    None => (args, Tail::Zero),
                };
                if path.is_empty() {
                    return Err(bad("missing table path"));
                }
                Ok(ProbSequence::Table(Table::from_csv(path, tail)?))
            }
            _ => Err(bad("unknown sequence kind")),
        }
    }
}

fn parse_kv(args: &str) -> std::result::Result<Vec<(String, f64)>, String> {
    args.split(',')
        .map(|part| {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, found `{part}`"))?;
            let v = v.trim().parse::<f64>().map_err(|_| format!("cannot parse `{v}` as a number"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn lookup(kv: &[(String, f64)], key: &str) -> std::result::Result<f64, String> {
    kv.iter().find(|(k, _)| k == key).map(|&(_, v)| v).ok_or_else(|| format!("missing `{key}=`"))
}

/// A sequence with every term beyond `cutoff` set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSequence {
    base: ProbSequence,
    cutoff: u64,
}

impl TruncatedSequence {
    pub fn new(base: ProbSequence, cutoff: u64) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::domain("truncation range K must be >= 1"));
        }
        Ok(TruncatedSequence { base, cutoff })
    }

    pub fn base(&self) -> &ProbSequence {
        &self.base
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn eval(&self, n: u64) -> Result<f64> {
        let p = self.base.eval(n)?;
        Ok(if n <= self.cutoff { p } else { 0.0 })
    }

    /// Truncating again keeps the smaller range.
    pub fn truncate(&self, cutoff: u64) -> Result<TruncatedSequence> {
        if cutoff == 0 {
            return Err(Error::domain("truncation range K must be >= 1"));
        }
        TruncatedSequence::new(self.base.clone(), self.cutoff.min(cutoff))
    }
}

fn remark_p(n: u64) -> f64 {
    let k = exact_log3(n).or_else(|| exact_log3(n - 1));
    match k {
        Some(k) if k >= 1 => 1.0 / (k as f64).sqrt(),
        _ => 0.0,
    }
}

fn remark_q(n: u64) -> f64 {
    let n = n as u128;
    let mut base: u128 = 100 * 100;
    let mut step: u128 = 9;
    let mut k = 2u32;
    while base < n {
        let offset = n - base;
        if offset <= 100 * step && offset.is_multiple_of(step) {
            return 1.0 / (2.0 * ((k - 1) as f64).sqrt());
        }
        base *= 100;
        step *= 3;
        k += 1;
    }
    0.0
}

/// `Some(k)` when `n = 3^k`.
fn exact_log3(mut n: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut k = 0;
    while n.is_multiple_of(3) {
        n /= 3;
        k += 1;
    }
    (n == 1).then_some(k)
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Running Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    for x in terms {
        acc.add(x);
    }
    acc.value()
}
