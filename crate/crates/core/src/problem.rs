//! Cyclic-cover data, equivariant counting problems and their validity checks.
//!
//! Orders are stored in the exponent convention: `ord[i]` is the order of
//! the zero (positive) or pole (negative) of the quotient map `h'` at
//! `lambda_i`. The ramification index of the lifted cover at the points over
//! `lambda_i` is `ram_i = |ord_i| / f_i`.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Base cyclic cover `y^r = prod (x - lambda_i)^{xi_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicData {
    pub r: u32,
    pub xi: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedCyclic {
    pub f: Vec<u32>,
    pub e: Vec<u32>,
    pub genus: u64,
}

impl CyclicData {
    pub fn new(r: u32, xi: Vec<u32>) -> Result<Self> {
        let data = CyclicData { r, xi };
        let problems = data.violations();
        if problems.is_empty() {
            Ok(data)
        } else {
            Err(Error::InvalidCyclicData(
                problems.into_iter().map(|v| v.message).collect::<Vec<_>>().join("; "),
            ))
        }
    }

    pub fn m(&self) -> usize {
        self.xi.len()
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let r = self.r;
        if r < 2 {
            out.push(Violation::new(Constraint::Cyclic, format!("r = {r} must be at least 2")));
            return out;
        }
        if self.m() < 3 {
            out.push(Violation::new(
                Constraint::Cyclic,
                format!("m = {} branch points, need at least 3", self.m()),
            ));
        }
        for (i, &x) in self.xi.iter().enumerate() {
            if x == 0 || x >= r {
                out.push(Violation::new(
                    Constraint::Cyclic,
                    format!("xi[{i}] = {x} outside 1..={}", r - 1),
                ));
            }
        }
        let sum: u64 = self.xi.iter().map(|&x| x as u64).sum();
        if !sum.is_multiple_of(r as u64) {
            out.push(Violation::new(
                Constraint::Cyclic,
                format!("sum of xi = {sum} is not divisible by r = {r}"),
            ));
        }
        let g = self.xi.iter().fold(r, |acc, &x| acc.gcd(&x));
        if g != 1 {
            out.push(Violation::new(
                Constraint::Cyclic,
                format!("gcd(xi, r) = {g}, must be 1"),
            ));
        }
        out
    }

    /// `f_i = gcd(xi_i, r)`, `e_i = r / f_i` and the genus from Riemann-Hurwitz
    /// for the cyclic cover, `2g - 2 = r(m - 2) - sum f_i`.
    pub fn derive_invariants(&self) -> Result<DerivedCyclic> {
        if let Some(v) = self.violations().into_iter().next() {
            return Err(Error::InvalidCyclicData(v.message));
        }
        let f: Vec<u32> = self.xi.iter().map(|&x| x.gcd(&self.r)).collect();
        let e: Vec<u32> = f.iter().map(|&fi| self.r / fi).collect();
        let rhs = self.r as i64 * (self.m() as i64 - 2) - f.iter().map(|&x| x as i64).sum::<i64>();
        let genus = genus_from_term(rhs)?;
        Ok(DerivedCyclic { f, e, genus })
    }
}

/// Genus from `2g - 2 = term`.
fn genus_from_term(term: i64) -> Result<u64> {
    if term.rem_euclid(2) != 0 {
        return Err(Error::NonIntegralGenus(term));
    }
    if term < -2 {
        return Err(Error::NegativeGenus(term));
    }
    Ok(((term + 2) / 2) as u64)
}

/// One equivariant counting problem.
///
/// Canonical JSON: `{r, xi, ord, B, t0, tinf}` in that field order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub r: u32,
    pub xi: Vec<u32>,
    pub ord: Vec<i64>,
    #[serde(rename = "B")]
    pub b: Vec<u32>,
    pub t0: u64,
    pub tinf: u64,
}

/// Which condition a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constraint {
    /// Base cyclic data (r, m, range and sum of xi, gcd).
    #[serde(rename = "cyclic")]
    Cyclic,
    /// Field shapes: lengths, zero orders, moving indices below 2.
    #[serde(rename = "shape")]
    Shape,
    /// Integral, non-negative genus of the cyclic cover.
    #[serde(rename = "genus")]
    Genus,
    /// Degree balance over 0 and infinity.
    #[serde(rename = "degree")]
    Degree,
    /// k = m - 2.
    #[serde(rename = "orbit_count")]
    OrbitCount,
    /// Riemann-Hurwitz for the equivariant cover.
    #[serde(rename = "riemann_hurwitz")]
    RiemannHurwitz,
    /// t = r * sum (b_j - 2).
    #[serde(rename = "moving_total")]
    MovingTotal,
    #[serde(rename = "congruence")]
    Congruence,
    #[serde(rename = "divisibility")]
    Divisibility,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        write!(f, "{}", s.as_str().unwrap())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub message: String,
}

impl Violation {
    fn new(constraint: Constraint, message: impl Into<String>) -> Self {
        Violation {
            constraint,
            message: message.into(),
        }
    }
}

/// Everything derived from a valid [`ProblemSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInvariants {
    pub genus: u64,
    pub f: Vec<u32>,
    pub e: Vec<u32>,
    /// Degree of `h` (and of `h'`).
    pub d: u64,
    pub t: u64,
    pub k: usize,
    /// `sum (b_j - 1)`, the degree of the ramification polynomial.
    pub b: u64,
    /// `c_l` = number of `j` with `b_j - 1 = l`, keyed by `l`.
    pub c: BTreeMap<u32, u32>,
    /// Ramification index of `h` at the points over `lambda_i`.
    pub ram: Vec<u64>,
}

impl ProblemInvariants {
    /// Distinct values of `b_j - 1`, ascending.
    pub fn l_set(&self) -> Vec<u32> {
        self.c.keys().copied().collect()
    }

    /// The same counts indexed by `b_j` itself.
    pub fn counts_by_index(&self) -> BTreeMap<u32, u32> {
        self.c.iter().map(|(&l, &n)| (l + 1, n)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ValidationResult {
    Ok { derived: ProblemInvariants },
    Invalid { violations: Vec<Violation> },
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationResult::Ok { .. })
    }

    pub fn into_result(self) -> Result<ProblemInvariants> {
        match self {
            ValidationResult::Ok { derived } => Ok(derived),
            ValidationResult::Invalid { violations } => Err(Error::InvalidSpec(
                violations
                    .iter()
                    .map(|v| format!("[{}] {}", v.constraint, v.message))
                    .collect::<Vec<_>>()
                    .join("; "),
            )),
        }
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            ValidationResult::Ok { .. } => &[],
            ValidationResult::Invalid { violations } => violations,
        }
    }
}

/// Signed weights of a theta characteristic: `h_coeff * H + sum point_coeffs[i] * P_i`
/// with `H` the hyperelliptic class (degree 2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalDivisor {
    pub h_coeff: i64,
    pub point_coeffs: Vec<i64>,
}

impl FormalDivisor {
    pub fn degree(&self) -> i64 {
        2 * self.h_coeff + self.point_coeffs.iter().sum::<i64>()
    }
}

impl ProblemSpec {
    pub fn base(&self) -> CyclicData {
        CyclicData {
            r: self.r,
            xi: self.xi.clone(),
        }
    }

    pub fn m(&self) -> usize {
        self.xi.len()
    }

    /// Canonical JSON text.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_json().as_bytes()))
    }

    /// Checks every constraint and collects all violations.
    pub fn validate(&self) -> ValidationResult {
        validate_problem(self)
    }

    /// `(ord_i - xi_i) / r`, the exponents of `prod (x - lambda_i)` in the lift
    /// `h = y * prod (x - lambda_i)^{(ord_i - xi_i)/r} * P_0 / P_inf`.
    pub fn lift_exponents(&self) -> Result<Vec<i64>> {
        let r = self.r as i64;
        if r < 1 || self.ord.len() != self.xi.len() {
            return Err(Error::InvalidSpec("ord and xi lengths differ or r < 1".into()));
        }
        self.ord
            .iter()
            .zip(&self.xi)
            .enumerate()
            .map(|(index, (&ord, &xi))| {
                let diff = ord - xi as i64;
                if diff.rem_euclid(r) != 0 {
                    Err(Error::CongruenceViolated { index, ord, xi })
                } else {
                    Ok(diff / r)
                }
            })
            .collect()
    }

    /// Theta characteristic attached to an `r = 2` cover with all-odd orders and
    /// only simple triple points away from 0 and infinity.
    pub fn theta_characteristic(&self) -> Result<FormalDivisor> {
        let fail = |msg: String| Err(Error::HypothesesNotMet(msg));
        if self.r != 2 {
            return fail(format!("r = {} (need 2)", self.r));
        }
        if self.xi.iter().any(|&x| x != 1) {
            return fail("all xi must be 1".into());
        }
        if let Some(o) = self.ord.iter().find(|o| o.rem_euclid(2) != 1) {
            return fail(format!("order {o} is even"));
        }
        if let Some(b) = self.b.iter().find(|&&b| b != 3) {
            return fail(format!("moving index {b} (need all 3)"));
        }
        let inv = match self.validate() {
            ValidationResult::Ok { derived } => derived,
            ValidationResult::Invalid { violations } => {
                return fail(format!("spec is invalid: {} violation(s)", violations.len()))
            }
        };
        let h_coeff = inv.k as i64 - (self.t0 / 2) as i64;
        let point_coeffs: Vec<i64> = self
            .ord
            .iter()
            .map(|&o| {
                let w = (o.abs() - 1) / 2;
                if o < 0 {
                    w
                } else {
                    -(w + 1)
                }
            })
            .collect();
        let div = FormalDivisor {
            h_coeff,
            point_coeffs,
        };
        let want = inv.genus as i64 - 1;
        if div.degree() != want {
            return fail(format!("divisor degree {} differs from g - 1 = {want}", div.degree()));
        }
        Ok(div)
    }
}

/// Checks all constraints on a problem and returns either the derived record
/// or every violation found.
pub fn validate_problem(spec: &ProblemSpec) -> ValidationResult {
    let mut out = CyclicData {
        r: spec.r,
        xi: spec.xi.clone(),
    }
    .violations();
    if spec.r < 2 {
        return ValidationResult::Invalid { violations: out };
    }
    let r = spec.r as i64;
    let m = spec.m();

    if spec.ord.len() != m {
        out.push(Violation::new(
            Constraint::Shape,
            format!("ord has {} entries, xi has {m}", spec.ord.len()),
        ));
        return ValidationResult::Invalid { violations: out };
    }
    for (i, &o) in spec.ord.iter().enumerate() {
        if o == 0 {
            out.push(Violation::new(Constraint::Shape, format!("ord[{i}] = 0")));
        }
    }
    for (j, &bj) in spec.b.iter().enumerate() {
        if bj < 2 {
            out.push(Violation::new(Constraint::Shape, format!("B[{j}] = {bj} < 2")));
        }
    }

    let f: Vec<u32> = spec.xi.iter().map(|&x| x.gcd(&spec.r)).collect();
    let e: Vec<u32> = f.iter().map(|&fi| spec.r / fi).collect();
    let sum_f: i64 = f.iter().map(|&x| x as i64).sum();
    let two_g_minus_2 = r * (m as i64 - 2) - sum_f;
    if two_g_minus_2.rem_euclid(2) != 0 {
        out.push(Violation::new(
            Constraint::Genus,
            format!("r(m-2) - sum f = {two_g_minus_2} is odd"),
        ));
    } else if two_g_minus_2 < -2 {
        out.push(Violation::new(
            Constraint::Genus,
            format!("r(m-2) - sum f = {two_g_minus_2} < -2"),
        ));
    }

    for (i, (&o, &x)) in spec.ord.iter().zip(&spec.xi).enumerate() {
        if (o - x as i64).rem_euclid(r) != 0 {
            out.push(Violation::new(
                Constraint::Congruence,
                format!("ord[{i}] = {o} is not congruent to xi[{i}] = {x} mod {r}"),
            ));
        }
    }
    if !spec.t0.is_multiple_of(spec.r as u64) {
        out.push(Violation::new(
            Constraint::Divisibility,
            format!("r = {r} does not divide t0 = {}", spec.t0),
        ));
    }
    if !spec.tinf.is_multiple_of(spec.r as u64) {
        out.push(Violation::new(
            Constraint::Divisibility,
            format!("r = {r} does not divide tinf = {}", spec.tinf),
        ));
    }

    let zero_side: i64 = spec.ord.iter().filter(|&&o| o > 0).sum();
    let pole_side: i64 = spec.ord.iter().filter(|&&o| o < 0).map(|o| -o).sum();
    let d0 = spec.t0 as i64 + zero_side;
    let dinf = spec.tinf as i64 + pole_side;
    if d0 != dinf {
        out.push(Violation::new(
            Constraint::Degree,
            format!("degree over 0 is {d0}, over infinity is {dinf}"),
        ));
    }

    let k = spec.b.len();
    if k + 2 != m {
        out.push(Violation::new(
            Constraint::OrbitCount,
            format!("k = {k} moving orbits, need m - 2 = {}", m as i64 - 2),
        ));
    }

    // 2g + 2d - 2 = sum (ram_i - 1) f_i + r sum (b_j - 1), with (ram_i - 1) f_i = |ord_i| - f_i.
    let sum_b_minus_1: i64 = spec.b.iter().map(|&b| b as i64 - 1).sum();
    let lhs = two_g_minus_2 + 2 + 2 * d0.max(dinf) - 2;
    let rhs: i64 = spec
        .ord
        .iter()
        .zip(&f)
        .map(|(o, &fi)| o.abs() - fi as i64)
        .sum::<i64>()
        + r * sum_b_minus_1;
    if lhs != rhs {
        out.push(Violation::new(
            Constraint::RiemannHurwitz,
            format!("2g + 2d - 2 = {lhs} but ramification total is {rhs}"),
        ));
    }

    let t = spec.t0 as i64 + spec.tinf as i64;
    let sum_b_minus_2: i64 = spec.b.iter().map(|&b| b as i64 - 2).sum();
    if t != r * sum_b_minus_2 {
        out.push(Violation::new(
            Constraint::MovingTotal,
            format!("t = {t} but r * sum (b_j - 2) = {}", r * sum_b_minus_2),
        ));
    }

    if !out.is_empty() {
        return ValidationResult::Invalid { violations: out };
    }

    let mut c = BTreeMap::new();
    for &bj in &spec.b {
        *c.entry(bj - 1).or_insert(0) += 1;
    }
    let ram = spec
        .ord
        .iter()
        .zip(&f)
        .map(|(o, &fi)| o.unsigned_abs() / fi as u64)
        .collect();
    ValidationResult::Ok {
        derived: ProblemInvariants {
            genus: ((two_g_minus_2 + 2) / 2) as u64,
            f,
            e,
            d: d0 as u64,
            t: t as u64,
            k,
            b: sum_b_minus_1 as u64,
            c,
            ram,
        },
    }
}

/// Nondecreasing multisets of `k` values `>= 2` whose excess `sum (b - 2)` is at most `max_excess`.
fn moving_multisets(k: usize, max_excess: u64) -> Vec<Vec<u32>> {
    fn rec(k: usize, min: u32, budget: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let remaining = (k - cur.len()) as u64;
        let mut v = min;
        while (v as u64 - 2) * remaining <= budget {
            cur.push(v);
            rec(k, v, budget - (v as u64 - 2), cur, out);
            cur.pop();
            v += 1;
        }
    }
    let mut out = Vec::new();
    rec(k, 2, max_excess, &mut Vec::new(), &mut out);
    out
}

/// Every candidate over `base` with `1 <= d <= d_max` satisfying the
/// congruence, divisibility and the degree balance, with moving multisets of
/// size `m - 2` bounded by `t <= 2d`. Riemann-Hurwitz and the moving-total
/// relation are not imposed here.
pub fn candidate_problems(base: &CyclicData, d_max: u64) -> Vec<ProblemSpec> {
    let m = base.m();
    let r = base.r as i64;
    if base.violations().iter().any(|_| true) || m < 3 {
        return Vec::new();
    }
    let k = m - 2;
    let mut out = Vec::new();
    for d in 1..=d_max as i64 {
        // orders in the residue class of xi_i with 1 <= |ord| <= d, ascending
        let choices: Vec<Vec<i64>> = base
            .xi
            .iter()
            .map(|&x| {
                (-d..=d)
                    .filter(|&o| o != 0 && (o - x as i64).rem_euclid(r) == 0)
                    .collect()
            })
            .collect();
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        let multisets = moving_multisets(k, (2 * d / r) as u64);
        let mut idx = vec![0usize; m];
        'outer: loop {
            let ord: Vec<i64> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let zero_side: i64 = ord.iter().filter(|&&o| o > 0).sum();
            let pole_side: i64 = ord.iter().filter(|&&o| o < 0).map(|o| -o).sum();
            let t0 = d - zero_side;
            let tinf = d - pole_side;
            if t0 >= 0 && tinf >= 0 && t0 % r == 0 && tinf % r == 0 {
                for b in &multisets {
                    out.push(ProblemSpec {
                        r: base.r,
                        xi: base.xi.clone(),
                        ord: ord.clone(),
                        b: b.clone(),
                        t0: t0 as u64,
                        tinf: tinf as u64,
                    });
                }
            }
            for pos in (0..m).rev() {
                idx[pos] += 1;
                if idx[pos] < choices[pos].len() {
                    continue 'outer;
                }
                idx[pos] = 0;
            }
            break;
        }
    }
    out
}

/// All valid problems over `base` with degree at most `d_max`, ordered
/// lexicographically by `(d, ord, sorted B, t0)`.
pub fn enumerate_problems(base: &CyclicData, d_max: u64) -> Vec<ProblemSpec> {
    let mut keyed: Vec<(u64, ProblemSpec)> = candidate_problems(base, d_max)
        .into_iter()
        .filter_map(|p| match validate_problem(&p) {
            ValidationResult::Ok { derived } => Some((derived.d, p)),
            ValidationResult::Invalid { .. } => None,
        })
        .collect();
    keyed.sort_by(|(da, a), (db, b)| {
        da.cmp(db)
            .then_with(|| a.ord.cmp(&b.ord))
            .then_with(|| a.b.cmp(&b.b))
            .then_with(|| a.t0.cmp(&b.t0))
    });
    keyed.dedup_by(|x, y| x.1 == y.1);
    keyed.into_iter().map(|(_, p)| p).collect()
}
