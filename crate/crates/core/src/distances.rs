//! Closed-form stochastic distances between relaxed scaled complex Wishart
//! parameter pairs, in the general form and in the two special cases, plus
//! the Bartlett and revised Wishart covariance contrasts and the covariance
//! inequality suite.
//!
//! Every product of gammas, powers, and determinants is accumulated as a sum
//! of logs; the two-term Rényi sum goes through log-sum-exp. The only
//! exponentiation happens at the very end (Hellinger's `1 - exp(-d_B)`).
//!
//! A note on conventions: evaluating the Rényi form at `beta = 1/2` gives
//! exactly twice the Bhattacharyya distance, and the Hellinger distance is
//! exactly `1 - exp(-d_B)`. The corresponding "equal at beta = 1/2" relation
//! is sometimes stated without the factor of two; this implementation keeps
//! the printed closed forms and the factor shows up in the tests as
//! `renyi(1/2) == 2 * bhattacharyya`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hermitian::{trace_product, HermitianPD};
use crate::special::{digamma, ln_gamma, ln_multivariate_gamma};
use crate::wishart::WishartParams;
use crate::{Error, Result};

/// Which dissimilarity to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    Kl,
    Renyi { beta: f64 },
    Bhattacharyya,
    Hellinger,
    Bartlett,
    RevisedWishart,
}

impl DistanceKind {
    pub fn renyi(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(DistanceKind::Renyi { beta })
    }

    /// Whether the measure descends from an (h, phi) pair and can back a
    /// chi-square test statistic.
    pub fn is_h_phi(&self) -> bool {
        !matches!(self, DistanceKind::Bartlett | DistanceKind::RevisedWishart)
    }

    /// Short label used in tables and CLI output.
    pub fn label(&self) -> String {
        match self {
            DistanceKind::Kl => "KL".into(),
            DistanceKind::Renyi { beta } => format!("Renyi({beta})"),
            DistanceKind::Bhattacharyya => "Bhattacharyya".into(),
            DistanceKind::Hellinger => "Hellinger".into(),
            DistanceKind::Bartlett => "Bartlett".into(),
            DistanceKind::RevisedWishart => "RevisedWishart".into(),
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    /// Accepts `kl`, `renyi:<beta>`, `bhattacharyya`, `hellinger`,
    /// `bartlett`, `rw` / `revised-wishart`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "kl" | "kullback-leibler" => Ok(DistanceKind::Kl),
            "bhattacharyya" => Ok(DistanceKind::Bhattacharyya),
            "hellinger" => Ok(DistanceKind::Hellinger),
            "bartlett" => Ok(DistanceKind::Bartlett),
            "rw" | "revised-wishart" => Ok(DistanceKind::RevisedWishart),
            other => {
                if let Some(b) = other.strip_prefix("renyi:") {
                    let beta: f64 = b
                        .parse()
                        .map_err(|_| Error::Domain(format!("bad Renyi order in `{s}`")))?;
                    DistanceKind::renyi(beta)
                } else if other == "renyi" {
                    Err(Error::Domain(
                        "renyi needs an order, e.g. `renyi:0.9` or --beta".into(),
                    ))
                } else {
                    Err(Error::Domain(format!("unknown measure `{s}`")))
                }
            }
        }
    }
}

/// Which closed form to use.
///
/// `Auto` resolves to `EqualLooks` when `|n1 - n2| <= 1e-12`, to `EqualSigma`
/// when `||S1 - S2||_F <= 1e-12 ||S1||_F`, and to `General` otherwise; the
/// thresholds are tight enough that independently estimated parameters never
/// collapse to a special case by accident. Callers comparing two fits from
/// one image should pass `EqualLooks` explicitly; its formulas use the mean
/// of the two look values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseSelector {
    General,
    EqualLooks,
    EqualSigma,
    Auto,
}

const CASE_TOL: f64 = 1e-12;

impl CaseSelector {
    pub fn resolve(self, t1: &WishartParams, t2: &WishartParams) -> Result<CaseSelector> {
        match self {
            CaseSelector::Auto => {
                if (t1.looks() - t2.looks()).abs() <= CASE_TOL {
                    Ok(CaseSelector::EqualLooks)
                } else if t1.sigma().frobenius_distance(t2.sigma())?
                    <= CASE_TOL * t1.sigma().frobenius_norm()
                {
                    Ok(CaseSelector::EqualSigma)
                } else {
                    Ok(CaseSelector::General)
                }
            }
            fixed => Ok(fixed),
        }
    }
}

impl FromStr for CaseSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "general" => Ok(CaseSelector::General),
            "equal-looks" => Ok(CaseSelector::EqualLooks),
            "equal-sigma" => Ok(CaseSelector::EqualSigma),
            "auto" => Ok(CaseSelector::Auto),
            other => Err(Error::Domain(format!("unknown case selector `{other}`"))),
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "Renyi order must lie strictly in (0, 1), got {beta}"
        )));
    }
    Ok(())
}

fn check_pair(t1: &WishartParams, t2: &WishartParams) -> Result<usize> {
    if t1.dim() != t2.dim() {
        return Err(Error::DimensionMismatch {
            expected: t1.dim(),
            found: t2.dim(),
        });
    }
    Ok(t1.dim())
}

#[inline]
fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Per-parameter quantities shared by several formulas.
struct Side {
    n: f64,
    ld: f64,
    inv: HermitianPD,
}

impl Side {
    fn of(t: &WishartParams) -> Result<Side> {
        Ok(Side {
            n: t.looks(),
            ld: t.sigma().logdet()?,
            inv: t.sigma().inverse()?,
        })
    }
}

/// `sum_{i=1}^{p-1} i / ((n1 - i)(n2 - i))`, the rational tail of the
/// Kullback-Leibler and expectation expressions.
fn rational_sum(p: usize, n1: f64, n2: f64) -> f64 {
    (1..p)
        .map(|i| {
            let i = i as f64;
            i / ((n1 - i) * (n2 - i))
        })
        .sum()
}

/// Kullback-Leibler distance between two relaxed Wishart laws.
pub fn kl_distance(t1: &WishartParams, t2: &WishartParams, case: CaseSelector) -> Result<f64> {
    let p = check_pair(t1, t2)?;
    let pf = p as f64;
    match case.resolve(t1, t2)? {
        CaseSelector::General => {
            let a = Side::of(t1)?;
            let b = Side::of(t2)?;
            let (n1, n2) = (a.n, b.n);
            let tr = (n2 * trace_product(&b.inv, t1.sigma())?.re
                + n1 * trace_product(&a.inv, t2.sigma())?.re)
                / 2.0;
            let braces = a.ld - b.ld - pf * (n1 / n2).ln()
                + pf * (digamma(n1 - pf + 1.0)? - digamma(n2 - pf + 1.0)?)
                + (n2 - n1) * rational_sum(p, n1, n2);
            Ok((n1 - n2) / 2.0 * braces + tr - pf * (n1 + n2) / 2.0)
        }
        CaseSelector::EqualLooks => {
            let n = (t1.looks() + t2.looks()) / 2.0;
            let inv1 = t1.sigma().inverse()?;
            let inv2 = t2.sigma().inverse()?;
            let tr = trace_product(&inv1, t2.sigma())?.re + trace_product(&inv2, t1.sigma())?.re;
            Ok(n * (tr / 2.0 - pf))
        }
        CaseSelector::EqualSigma => {
            let (n1, n2) = (t1.looks(), t2.looks());
            let braces = -pf * (n1 / n2).ln()
                + pf * (digamma(n1 - pf + 1.0)? - digamma(n2 - pf + 1.0)?)
                + (n2 - n1) * rational_sum(p, n1, n2);
            Ok((n1 - n2) / 2.0 * braces)
        }
        CaseSelector::Auto => unreachable!("resolve never returns Auto"),
    }
}

/// Log of one Rényi cross integral `t_ab = integral f_a^beta f_b^{1-beta}`
/// in the general parameter case.
fn ln_renyi_term(a: &Side, b: &Side, p: usize, beta: f64) -> Result<f64> {
    let pf = p as f64;
    let e = beta * a.n + (1.0 - beta) * b.n;
    let m = HermitianPD::linear_combination(beta * a.n, &a.inv, (1.0 - beta) * b.n, &b.inv)?;
    Ok(beta * pf * a.n * a.n.ln() + (1.0 - beta) * pf * b.n * b.n.ln()
        + ln_multivariate_gamma(e, p)?
        - e * m.logdet()?
        - beta * ln_multivariate_gamma(a.n, p)?
        - (1.0 - beta) * ln_multivariate_gamma(b.n, p)?
        - beta * a.n * a.ld
        - (1.0 - beta) * b.n * b.ld)
}

/// The logs of the two Rényi integrals `(log t_12, log t_21)`.
///
/// Exposed because the symmetrized-average variant
/// `(log t_12 + log t_21) / (2 (beta - 1))` dominates the distance itself
/// (Fejér inequality) and the property tests pin that ordering.
pub fn renyi_terms(t1: &WishartParams, t2: &WishartParams, beta: f64) -> Result<(f64, f64)> {
    let p = check_pair(t1, t2)?;
    check_beta(beta)?;
    let a = Side::of(t1)?;
    let b = Side::of(t2)?;
    Ok((
        ln_renyi_term(&a, &b, p, beta)?,
        ln_renyi_term(&b, &a, p, beta)?,
    ))
}

/// Rényi distance of order `beta` with its case reductions.
pub fn renyi_distance(
    t1: &WishartParams,
    t2: &WishartParams,
    beta: f64,
    case: CaseSelector,
) -> Result<f64> {
    let p = check_pair(t1, t2)?;
    check_beta(beta)?;
    let pf = p as f64;
    let (lt1, lt2) = match case.resolve(t1, t2)? {
        CaseSelector::General => renyi_terms(t1, t2, beta)?,
        CaseSelector::EqualLooks => {
            let n = (t1.looks() + t2.looks()) / 2.0;
            let ld1 = t1.sigma().logdet()?;
            let ld2 = t2.sigma().logdet()?;
            let inv1 = t1.sigma().inverse()?;
            let inv2 = t2.sigma().inverse()?;
            let c12 = HermitianPD::linear_combination(beta, &inv1, 1.0 - beta, &inv2)?;
            let c21 = HermitianPD::linear_combination(beta, &inv2, 1.0 - beta, &inv1)?;
            (
                n * (-c12.logdet()? - beta * ld1 - (1.0 - beta) * ld2),
                n * (-c21.logdet()? - beta * ld2 - (1.0 - beta) * ld1),
            )
        }
        CaseSelector::EqualSigma => {
            let (n1, n2) = (t1.looks(), t2.looks());
            let e1 = beta * n1 + (1.0 - beta) * n2;
            let e2 = beta * n2 + (1.0 - beta) * n1;
            let g1 = pf * n1 * n1.ln() - ln_multivariate_gamma(n1, p)?;
            let g2 = pf * n2 * n2.ln() - ln_multivariate_gamma(n2, p)?;
            (
                beta * g1 + (1.0 - beta) * g2 + ln_multivariate_gamma(e1, p)? - pf * e1 * e1.ln(),
                beta * g2 + (1.0 - beta) * g1 + ln_multivariate_gamma(e2, p)? - pf * e2 * e2.ln(),
            )
        }
        CaseSelector::Auto => unreachable!(),
    };
    Ok((log_sum_exp(lt1, lt2) - std::f64::consts::LN_2) / (beta - 1.0))
}

/// `-log integral sqrt(f_1 f_2)` in the Bhattacharyya parameterization,
/// entirely in the log domain. Shared by [`hellinger_distance`].
pub fn bhattacharyya_distance(
    t1: &WishartParams,
    t2: &WishartParams,
    case: CaseSelector,
) -> Result<f64> {
    let p = check_pair(t1, t2)?;
    let pf = p as f64;
    match case.resolve(t1, t2)? {
        CaseSelector::General => {
            let a = Side::of(t1)?;
            let b = Side::of(t2)?;
            let (n1, n2) = (a.n, b.n);
            let e = (n1 + n2) / 2.0;
            let m = HermitianPD::linear_combination(n1 / 2.0, &a.inv, n2 / 2.0, &b.inv)?;
            let mut gam = 0.0;
            for k in 0..p {
                let kf = k as f64;
                gam += (ln_gamma(n1 - kf)? + ln_gamma(n2 - kf)?) / 2.0 - ln_gamma(e - kf)?;
            }
            Ok(n1 * a.ld / 2.0 + n2 * b.ld / 2.0 + e * m.logdet()? + gam
                - pf / 2.0 * (n1 * n1.ln() + n2 * n2.ln()))
        }
        CaseSelector::EqualLooks => {
            let n = (t1.looks() + t2.looks()) / 2.0;
            let ld1 = t1.sigma().logdet()?;
            let ld2 = t2.sigma().logdet()?;
            let mid = HermitianPD::linear_combination(
                0.5,
                &t1.sigma().inverse()?,
                0.5,
                &t2.sigma().inverse()?,
            )?;
            Ok(n * ((ld1 + ld2) / 2.0 + mid.logdet()?))
        }
        CaseSelector::EqualSigma => {
            let (n1, n2) = (t1.looks(), t2.looks());
            let e = (n1 + n2) / 2.0;
            let mut gam = 0.0;
            for k in 0..p {
                let kf = k as f64;
                gam += (ln_gamma(n1 - kf)? + ln_gamma(n2 - kf)?) / 2.0 - ln_gamma(e - kf)?;
            }
            Ok(pf * e * e.ln() + gam - pf / 2.0 * (n1 * n1.ln() + n2 * n2.ln()))
        }
        CaseSelector::Auto => unreachable!(),
    }
}

/// Hellinger distance `1 - integral sqrt(f_1 f_2) = 1 - exp(-d_B)`,
/// bounded in `[0, 1)`.
pub fn hellinger_distance(
    t1: &WishartParams,
    t2: &WishartParams,
    case: CaseSelector,
) -> Result<f64> {
    Ok(-(-bhattacharyya_distance(t1, t2, case)?).exp_m1())
}

/// Bartlett distance between covariance matrices:
/// `log(|S1 + S2|^2 / (|S1| |S2|)) - 2 p log 2`.
pub fn bartlett_distance(s1: &HermitianPD, s2: &HermitianPD) -> Result<f64> {
    let sum = HermitianPD::linear_combination(1.0, s1, 1.0, s2)?;
    Ok(2.0 * sum.logdet()? - s1.logdet()? - s2.logdet()?
        - 2.0 * s1.dim() as f64 * std::f64::consts::LN_2)
}

/// Revised Wishart distance `tr(S1 S2^{-1} + S2 S1^{-1}) / 2 - p`.
pub fn revised_wishart_distance(s1: &HermitianPD, s2: &HermitianPD) -> Result<f64> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    let tr = trace_product(s1, &s2.inverse()?)?.re + trace_product(s2, &s1.inverse()?)?.re;
    Ok(tr / 2.0 - s1.dim() as f64)
}

/// One side of a covariance inequality: both sides of the comparison and the
/// direction verdict (with a tiny relative slack so that exact equality does
/// not flap on rounding).
#[derive(Debug, Clone, Copy)]
pub struct InequalitySide {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalitySide {
    fn geq(lhs: f64, rhs: f64) -> Self {
        let slack = 1e-10 * lhs.abs().max(rhs.abs()).max(1.0);
        InequalitySide {
            lhs,
            rhs,
            holds: lhs >= rhs - slack,
        }
    }

    fn leq(lhs: f64, rhs: f64) -> Self {
        let slack = 1e-10 * lhs.abs().max(rhs.abs()).max(1.0);
        InequalitySide {
            lhs,
            rhs,
            holds: lhs <= rhs + slack,
        }
    }

    /// Whether the two sides agree within `tol` (the equality case).
    pub fn is_equality(&self, tol: f64) -> bool {
        (self.lhs - self.rhs).abs() <= tol
    }
}

/// The four covariance inequalities that follow from nonnegativity of the
/// equal-looks distances.
///
/// - `trace`: `tr(S2^{-1} S1 + S1^{-1} S2) >= 2p` (Kullback-Leibler);
/// - `renyi_combination`: the two-term determinant combination is `<= 2`,
///   compared in the log domain (Rényi);
/// - `log_determinant`: `(log|S1| + log|S2|)/2 >= log|((S1^{-1}+S2^{-1})/2)^{-1}|`
///   (Bhattacharyya);
/// - `determinant`: `sqrt(|S1||S2|) >= |((S1^{-1}+S2^{-1})/2)^{-1}|`
///   (Hellinger), evaluated as the same comparison in logs since raw
///   determinants of production covariances under- or overflow.
#[derive(Debug, Clone, Copy)]
pub struct InequalityReport {
    pub trace: InequalitySide,
    pub renyi_combination: InequalitySide,
    pub log_determinant: InequalitySide,
    pub determinant: InequalitySide,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.trace.holds
            && self.renyi_combination.holds
            && self.log_determinant.holds
            && self.determinant.holds
    }
}

/// Evaluates the inequality suite for a covariance pair at looks `n` and
/// Rényi order `beta`.
pub fn inequality_suite(
    s1: &HermitianPD,
    s2: &HermitianPD,
    n: f64,
    beta: f64,
) -> Result<InequalityReport> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    check_beta(beta)?;
    let p = s1.dim() as f64;
    let inv1 = s1.inverse()?;
    let inv2 = s2.inverse()?;
    let ld1 = s1.logdet()?;
    let ld2 = s2.logdet()?;

    let tr = trace_product(&inv2, s1)?.re + trace_product(&inv1, s2)?.re;
    let trace = InequalitySide::geq(tr, 2.0 * p);

    let c12 = HermitianPD::linear_combination(beta, &inv1, 1.0 - beta, &inv2)?;
    let c21 = HermitianPD::linear_combination(beta, &inv2, 1.0 - beta, &inv1)?;
    let ln_a = n * beta * (ld2 - ld1) - n * ld2 - n * c12.logdet()?;
    let ln_b = n * beta * (ld1 - ld2) - n * ld1 - n * c21.logdet()?;
    let renyi_combination = InequalitySide::leq(log_sum_exp(ln_a, ln_b), std::f64::consts::LN_2);

    let mid = HermitianPD::linear_combination(0.5, &inv1, 0.5, &inv2)?;
    let rhs = -mid.logdet()?;
    let log_determinant = InequalitySide::geq((ld1 + ld2) / 2.0, rhs);
    let determinant = InequalitySide::geq((ld1 + ld2) / 2.0, rhs);

    Ok(InequalityReport {
        trace,
        renyi_combination,
        log_determinant,
        determinant,
    })
}

/// Kind-dispatched distance evaluation.
///
/// Bartlett and revised Wishart compare only the covariance parts and ignore
/// the look counts and the case selector.
pub fn distance(
    kind: DistanceKind,
    t1: &WishartParams,
    t2: &WishartParams,
    case: CaseSelector,
) -> Result<f64> {
    match kind {
        DistanceKind::Kl => kl_distance(t1, t2, case),
        DistanceKind::Renyi { beta } => renyi_distance(t1, t2, beta, case),
        DistanceKind::Bhattacharyya => bhattacharyya_distance(t1, t2, case),
        DistanceKind::Hellinger => hellinger_distance(t1, t2, case),
        DistanceKind::Bartlett => bartlett_distance(t1.sigma(), t2.sigma()),
        DistanceKind::RevisedWishart => revised_wishart_distance(t1.sigma(), t2.sigma()),
    }
}
