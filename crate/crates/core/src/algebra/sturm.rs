//! Exact real-root counting and isolation on rational intervals.

use std::fmt::Write as _;

use num_rational::BigRational;

use super::poly::{format_rational, parse_rational, rat};
use super::{AlgebraError, RationalPoly};

/// Sturm chain of the squarefree part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    chain: Vec<RationalPoly>,
}

impl SturmSequence {
    pub fn new(p: &RationalPoly) -> Result<Self, AlgebraError> {
        if p.is_zero() {
            return Err(AlgebraError::ZeroPolynomial);
        }
        let base = p.squarefree();
        let mut chain = vec![base.clone(), base.derivative()];
        while !chain.last().expect("nonempty").is_zero() {
            let n = chain.len();
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1])?;
            chain.push(-&r);
        }
        chain.pop();
        Ok(Self { chain })
    }

    pub fn base(&self) -> &RationalPoly {
        &self.chain[0]
    }

    /// Sign variations at `x`, zeros skipped.
    pub fn variations(&self, x: &BigRational) -> usize {
        let mut last = 0;
        let mut count = 0;
        for s in self.chain.iter().map(|p| p.sign_at(x)).filter(|&s| s != 0) {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct roots in the open interval `(lo, hi)`.
    ///
    /// `V(lo) - V(hi)` counts roots in `(lo, hi]` for a squarefree chain,
    /// including when `lo` itself is a root.
    pub fn count_open(&self, lo: &BigRational, hi: &BigRational) -> usize {
        let v = self.variations(lo) - self.variations(hi);
        v - usize::from(self.base().sign_at(hi) == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootEnclosure {
    /// The root is this exact rational.
    Exact(BigRational),
    /// Exactly one root lies in the open interval.
    Open(BigRational, BigRational),
}

impl RootEnclosure {
    pub fn bounds(&self) -> (&BigRational, &BigRational) {
        match self {
            Self::Exact(r) => (r, r),
            Self::Open(a, b) => (a, b),
        }
    }
}

/// Splits `(lo, hi)` until every piece holds one root; refines each to `max_width`.
pub fn isolate_roots(
    seq: &SturmSequence,
    lo: &BigRational,
    hi: &BigRational,
    max_width: &BigRational,
) -> Vec<RootEnclosure> {
    let mut out = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone())];
    let half = rat(1, 2);
    while let Some((a, b)) = stack.pop() {
        let n = seq.count_open(&a, &b);
        if n == 0 {
            continue;
        }
        let mid = (&a + &b) * &half;
        if n == 1 && &(&b - &a) <= max_width {
            if seq.base().sign_at(&mid) == 0 {
                out.push(RootEnclosure::Exact(mid));
            } else {
                out.push(RootEnclosure::Open(a, b));
            }
            continue;
        }
        if seq.base().sign_at(&mid) == 0 {
            out.push(RootEnclosure::Exact(mid.clone()));
        }
        // Right half pushed first so output comes out in increasing order.
        stack.push((mid.clone(), b));
        stack.push((a, mid));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    NoRoot,
    RootsIsolated,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Self::NoRoot => "no-root",
            Self::RootsIsolated => "roots-isolated",
        }
    }
}

/// Outcome of checking a nonzero polynomial for roots on an open interval.
///
/// Even with roots present the polynomial is certified nonzero; the
/// enclosures record the exceptional curvature values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub poly: RationalPoly,
    pub lo: BigRational,
    pub hi: BigRational,
    pub verdict: Verdict,
    pub roots: Vec<RootEnclosure>,
}

/// Default enclosure width for isolated roots.
pub fn default_root_width() -> BigRational {
    rat(1, 1 << 20)
}

pub fn certify_nonvanishing(phi: &RationalPoly, lo: &BigRational, hi: &BigRational) -> Result<Certificate, AlgebraError> {
    certify_nonvanishing_with(phi, lo, hi, &default_root_width())
}

pub fn certify_nonvanishing_with(
    phi: &RationalPoly,
    lo: &BigRational,
    hi: &BigRational,
    max_width: &BigRational,
) -> Result<Certificate, AlgebraError> {
    if lo >= hi {
        return Err(AlgebraError::DegenerateInterval);
    }
    let seq = SturmSequence::new(phi)?;
    let roots = if seq.count_open(lo, hi) == 0 { Vec::new() } else { isolate_roots(&seq, lo, hi, max_width) };
    let verdict = if roots.is_empty() { Verdict::NoRoot } else { Verdict::RootsIsolated };
    Ok(Certificate { poly: phi.clone(), lo: lo.clone(), hi: hi.clone(), verdict, roots })
}

impl Certificate {
    pub fn summary(&self) -> String {
        let (lo, hi) = (format_rational(&self.lo), format_rational(&self.hi));
        match self.verdict {
            Verdict::NoRoot => format!("no root in ({lo},{hi})"),
            Verdict::RootsIsolated => format!("{} root(s) isolated in ({lo},{hi})", self.roots.len()),
        }
    }

    /// Line-oriented `key=value` record.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "certificate=nonvanishing").unwrap();
        writeln!(s, "polynomial={}", self.poly.to_line()).unwrap();
        writeln!(s, "interval={} {}", format_rational(&self.lo), format_rational(&self.hi)).unwrap();
        writeln!(s, "verdict={}", self.verdict.as_str()).unwrap();
        writeln!(s, "root_count={}", self.roots.len()).unwrap();
        for r in &self.roots {
            let (a, b) = r.bounds();
            let kind = if matches!(r, RootEnclosure::Exact(_)) { "exact" } else { "open" };
            writeln!(s, "root={kind} {} {}", format_rational(a), format_rational(b)).unwrap();
        }
        writeln!(s, "summary={}", self.summary()).unwrap();
        s
    }

    pub fn parse_text(text: &str) -> Result<Self, AlgebraError> {
        let bad = |m: &str| AlgebraError::Parse(m.to_owned());
        let mut poly = None;
        let mut interval = None;
        let mut verdict = None;
        let mut count = None;
        let mut roots = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| bad(&format!("line {}: expected key=value", no + 1)))?;
            match key {
                "certificate" | "summary" => {}
                "polynomial" => poly = Some(RationalPoly::parse_line(value)?),
                "interval" => interval = Some(parse_pair(value)?),
                "verdict" => {
                    verdict = Some(match value {
                        "no-root" => Verdict::NoRoot,
                        "roots-isolated" => Verdict::RootsIsolated,
                        other => return Err(bad(&format!("line {}: unknown verdict {other}", no + 1))),
                    })
                }
                "root_count" => count = Some(value.parse::<usize>().map_err(|_| bad("bad root_count"))?),
                "root" => {
                    let (kind, rest) = value.split_once(' ').ok_or_else(|| bad("bad root line"))?;
                    let (a, b) = parse_pair(rest)?;
                    roots.push(match kind {
                        "exact" if a == b => RootEnclosure::Exact(a),
                        "open" => RootEnclosure::Open(a, b),
                        _ => return Err(bad(&format!("line {}: bad root kind", no + 1))),
                    });
                }
                other => return Err(bad(&format!("line {}: unknown key {other}", no + 1))),
            }
        }
        let (lo, hi) = interval.ok_or_else(|| bad("missing interval"))?;
        if count != Some(roots.len()) {
            return Err(bad("root_count does not match root lines"));
        }
        Ok(Self {
            poly: poly.ok_or_else(|| bad("missing polynomial"))?,
            lo,
            hi,
            verdict: verdict.ok_or_else(|| bad("missing verdict"))?,
            roots,
        })
    }
}

fn parse_pair(s: &str) -> Result<(BigRational, BigRational), AlgebraError> {
    let mut it = s.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((parse_rational(a)?, parse_rational(b)?)),
        _ => Err(AlgebraError::Parse(format!("expected two rationals, got {s:?}"))),
    }
}

/// Sign changes of `p` sampled at `n + 1` equispaced floating points on `[lo, hi]`.
pub fn sampled_sign_changes(p: &RationalPoly, lo: f64, hi: f64, n: usize) -> usize {
    let coeffs = p.to_f64_coeffs();
    let eval = |k: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * k + c);
    let mut last = 0.0_f64;
    let mut changes = 0;
    for i in 0..=n {
        let v = eval(lo + (hi - lo) * i as f64 / n as f64);
        if v != 0.0 {
            if last != 0.0 && v.signum() != last.signum() {
                changes += 1;
            }
            last = v;
        }
    }
    changes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{obstruction_poly, CubicData};

    fn q(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    #[test]
    fn cubic_with_known_roots() {
        // (K - 1/3)(K - 1)(K - 5/2)
        let p = &(&RationalPoly::linear_factor(&q(1, 3)) * &RationalPoly::linear_factor(&q(1, 1)))
            * &RationalPoly::linear_factor(&q(5, 2));
        let seq = SturmSequence::new(&p).unwrap();
        assert_eq!(seq.count_open(&q(0, 1), &q(3, 1)), 3);
        assert_eq!(seq.count_open(&q(1, 1), &q(5, 2)), 0);
        assert_eq!(seq.count_open(&q(1, 3), &q(3, 1)), 2);
        assert_eq!(seq.count_open(&q(-1, 1), &q(1, 1)), 1);
        let roots = isolate_roots(&seq, &q(0, 1), &q(3, 1), &q(1, 100));
        assert_eq!(roots.len(), 3);
        for (root, enc) in [q(1, 3), q(1, 1), q(5, 2)].iter().zip(&roots) {
            let (a, b) = enc.bounds();
            assert!(a <= root && root <= b && b - a <= q(1, 100));
        }
        // A root exactly on a bisection midpoint is reported exactly.
        let roots = isolate_roots(&seq, &q(0, 1), &q(2, 1), &q(1, 100));
        assert!(roots.contains(&RootEnclosure::Exact(q(1, 1))));
    }

    #[test]
    fn double_root_counted_once() {
        let f = RationalPoly::linear_factor(&q(1, 2));
        let p = &f * &f;
        let seq = SturmSequence::new(&p).unwrap();
        assert_eq!(seq.count_open(&q(0, 1), &q(1, 1)), 1);
    }

    #[test]
    fn no_root_for_example_obstruction() {
        let phi = obstruction_poly(&CubicData::new(q(2, 1), q(1, 1)), &q(0, 1)).unwrap();
        let cert = certify_nonvanishing(&phi, &q(1, 1), &q(2, 1)).unwrap();
        assert_eq!(cert.verdict, Verdict::NoRoot);
        assert_eq!(cert.summary(), "no root in (1,2)");
        // The real root (3/7)^(1/3) sits below the interval.
        let seq = SturmSequence::new(&phi).unwrap();
        assert_eq!(seq.count_open(&q(3, 4), &q(19, 25)), 1);
    }

    #[test]
    fn nonzero_constant_has_trivial_certificate() {
        let cert = certify_nonvanishing(&RationalPoly::constant(q(-3, 7)), &q(1, 1), &q(2, 1)).unwrap();
        assert_eq!(cert.verdict, Verdict::NoRoot);
        assert!(cert.roots.is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            certify_nonvanishing(&RationalPoly::zero(), &q(1, 1), &q(2, 1)),
            Err(AlgebraError::ZeroPolynomial)
        ));
        assert!(matches!(
            certify_nonvanishing(&RationalPoly::one(), &q(2, 1), &q(2, 1)),
            Err(AlgebraError::DegenerateInterval)
        ));
    }

    #[test]
    fn large_c_matches_dense_sampling() {
        let phi = obstruction_poly(&CubicData::new(q(2, 1), q(1, 1)), &q(100, 1)).unwrap();
        let cert = certify_nonvanishing(&phi, &q(1, 1), &q(2, 1)).unwrap();
        assert_eq!(cert.roots.len(), sampled_sign_changes(&phi, 1.0, 2.0, 10_000));
    }

    #[test]
    fn text_roundtrip() {
        let phi = obstruction_poly(&CubicData::new(q(2, 1), q(1, 1)), &q(11, 5)).unwrap();
        let cert = certify_nonvanishing(&phi, &q(1, 1), &q(2, 1)).unwrap();
        assert_eq!(cert.verdict, Verdict::RootsIsolated);
        let text = cert.to_text();
        assert_eq!(Certificate::parse_text(&text).unwrap(), cert);
        assert!(Certificate::parse_text("polynomial=1\nbogus=1\n").is_err());
    }
}
