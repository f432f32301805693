//! Radial confining potentials `V(x) = q(|x|)` given by profile functions,
//! plus numeric verification of the regularity conditions the rest of the
//! laboratory assumes: unbounded growth, monotonicity, continuity and the
//! unit-step doubling bound `q(x + 1) <= C0 (q(x) + 1)`.

use crate::error::{Error, Result};
use std::fmt;

/// Profile family with its analytic metadata.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileFamily {
    /// `q(r) = r^beta`
    Power { beta: f64 },
    /// `q(r) = exp(beta r) - 1`, shifted so `q(0) = 0`
    Exponential { beta: f64 },
    /// `q(r) = gamma ln(1 + r)`
    Logarithmic { gamma: f64 },
    /// Piecewise-linear interpolation of `(r, q)` knots, clamped at both ends.
    Tabulated { rs: Vec<f64>, qs: Vec<f64> },
}

/// Radial potential profile `q: [0, inf) -> [0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    family: ProfileFamily,
}

impl Profile {
    pub fn power(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::invalid("beta", "power exponent must be positive"));
        }
        Ok(Profile {
            family: ProfileFamily::Power { beta },
        })
    }

    pub fn exponential(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::invalid("beta", "exponential rate must be positive"));
        }
        Ok(Profile {
            family: ProfileFamily::Exponential { beta },
        })
    }

    pub fn logarithmic(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::invalid("gamma", "logarithmic slope must be positive"));
        }
        Ok(Profile {
            family: ProfileFamily::Logarithmic { gamma },
        })
    }

    /// Tabulated profile; knots must be strictly increasing in `r` with
    /// nonnegative values.
    pub fn tabulated(rs: Vec<f64>, qs: Vec<f64>) -> Result<Self> {
        if rs.len() != qs.len() || rs.len() < 2 {
            return Err(Error::invalid("table", "need at least two (r, q) knots"));
        }
        if rs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("table", "knot radii must be strictly increasing"));
        }
        if qs.iter().any(|q| !(*q >= 0.0)) {
            return Err(Error::invalid("table", "profile values must be nonnegative"));
        }
        Ok(Profile {
            family: ProfileFamily::Tabulated { rs, qs },
        })
    }

    /// Flat profile `q == c` (tabulated).
    pub fn constant(c: f64) -> Result<Self> {
        Self::tabulated(vec![0.0, 1.0], vec![c, c])
    }

    /// The zero potential.
    pub fn zero() -> Self {
        Self::constant(0.0).expect("constant zero profile is valid")
    }

    pub fn family(&self) -> &ProfileFamily {
        &self.family
    }

    /// Profile value `q(r)` for `r >= 0` (negative input is clamped to 0).
    pub fn eval_radial(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match &self.family {
            ProfileFamily::Power { beta } => r.powf(*beta),
            ProfileFamily::Exponential { beta } => (beta * r).exp() - 1.0,
            ProfileFamily::Logarithmic { gamma } => gamma * (1.0 + r).ln(),
            ProfileFamily::Tabulated { rs, qs } => {
                if r <= rs[0] {
                    return qs[0];
                }
                if r >= *rs.last().unwrap() {
                    return *qs.last().unwrap();
                }
                let j = rs.partition_point(|&knot| knot <= r);
                let (r0, r1) = (rs[j - 1], rs[j]);
                let (q0, q1) = (qs[j - 1], qs[j]);
                q0 + (q1 - q0) * (r - r0) / (r1 - r0)
            }
        }
    }

    /// Parses the profile grammar.
    ///
    /// Accepts both the compact flag form `power:2.0`, `exponential:0.5`,
    /// `logarithmic:5.0`, `tabulated:knots.csv` and the config-file form
    /// `family=power beta=2.0` (`family=tabulated path=knots.csv`).
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.contains('=') {
            return Self::parse_kv(spec);
        }
        let (family, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("profile spec `{spec}` lacks `family:value`")))?;
        Self::from_parts(family, arg)
    }

    fn parse_kv(spec: &str) -> Result<Self> {
        let mut family = None;
        let mut arg = None;
        for token in spec.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad profile token `{token}`")))?;
            match key {
                "family" => family = Some(value.to_string()),
                "beta" | "gamma" | "path" => arg = Some(value.to_string()),
                other => return Err(Error::Config(format!("unknown profile key `{other}`"))),
            }
        }
        let family = family.ok_or_else(|| Error::Config("profile spec lacks `family=`".into()))?;
        let arg = arg.ok_or_else(|| Error::Config("profile spec lacks its parameter".into()))?;
        Self::from_parts(&family, &arg)
    }

    fn from_parts(family: &str, arg: &str) -> Result<Self> {
        let num = || -> Result<f64> {
            arg.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad numeric profile parameter `{arg}`")))
        };
        match family {
            "power" => Self::power(num()?),
            "exponential" => Self::exponential(num()?),
            "logarithmic" => Self::logarithmic(num()?),
            "tabulated" => Self::tabulated_from_csv(arg),
            other => Err(Error::Config(format!("unknown profile family `{other}`"))),
        }
    }

    /// Loads `(r, q)` knots from a two-column CSV file (header optional).
    pub fn tabulated_from_csv(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rs = Vec::new();
        let mut qs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = (cols.next(), cols.next());
            match (a.and_then(|s| s.parse::<f64>().ok()), b.and_then(|s| s.parse::<f64>().ok())) {
                (Some(r), Some(q)) => {
                    rs.push(r);
                    qs.push(q);
                }
                _ if lineno == 0 => continue, // header row
                _ => {
                    return Err(Error::Config(format!(
                        "bad tabulated row {} in {path}: `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        Self::tabulated(rs, qs)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            ProfileFamily::Power { beta } => write!(f, "power:{beta}"),
            ProfileFamily::Exponential { beta } => write!(f, "exponential:{beta}"),
            ProfileFamily::Logarithmic { gamma } => write!(f, "logarithmic:{gamma}"),
            ProfileFamily::Tabulated { rs, .. } => write!(f, "tabulated[{} knots]", rs.len()),
        }
    }
}

/// Potential value `V(x) = q(|x|)`.
pub fn eval_potential(profile: &Profile, x: [f64; 2]) -> f64 {
    profile.eval_radial((x[0] * x[0] + x[1] * x[1]).sqrt())
}

/// Verdict of the growth-vs-log classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IuClass {
    /// `q(r)/ln r -> infinity`
    Satisfies,
    /// `q(r)/ln r` stays bounded
    Fails,
    /// finite-window data cannot tell
    Inconclusive,
}

/// Outcome of the numeric regularity checks on a finite window.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    /// growth proxy `q(r_max) > q(1) + 1`
    pub passed_a: bool,
    /// nondecreasing on the sample grid
    pub passed_b: bool,
    /// continuity modulus below threshold
    pub passed_c: bool,
    /// unit-step doubling ratio stable over the window
    pub passed_d: bool,
    /// `sup q(x+1)/(q(x)+1)` over the grid, clamped below at 1
    pub c0_estimate: f64,
    pub iu_class: IuClass,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.passed_a && self.passed_b && self.passed_c && self.passed_d
    }
}

/// Numeric verification of the profile assumptions on `[0, r_max]`.
///
/// Limit statements cannot be decided from a finite window: condition (a)
/// uses a growth proxy, condition (d) checks that the doubling ratio has no
/// growing trend, and the classifier trusts the family tag when one is
/// available, falling back to the top-decade slope of `q(r)/ln r` for
/// tabulated data (reporting [`IuClass::Inconclusive`] when the slope is
/// ambiguous).
pub fn check_assumptions(profile: &Profile, r_max: f64, n_samples: usize) -> Result<AssumptionReport> {
    if !(r_max > 10.0) {
        return Err(Error::invalid("r_max", "need r_max > 10"));
    }
    if n_samples < 100 {
        return Err(Error::invalid("n_samples", "need at least 100 samples"));
    }
    let dr = r_max / (n_samples - 1) as f64;
    let q: Vec<f64> = (0..n_samples).map(|i| profile.eval_radial(i as f64 * dr)).collect();
    let q_max = q[n_samples - 1];

    let passed_a = q_max > profile.eval_radial(1.0) + 1.0;
    let passed_b = q.windows(2).all(|w| w[1] >= w[0] - 1e-12 * (1.0 + q_max));
    // Continuity: a jump below the absolute tolerance passes outright; a
    // larger increment passes only if it shrinks under grid refinement
    // (steep continuous profiles do, genuine gaps do not).
    let jump_tol = 1e-3 * (1.0 + q_max);
    let max_jump = |m: usize| -> f64 {
        let d = r_max / m as f64;
        (0..m)
            .map(|i| (profile.eval_radial((i + 1) as f64 * d) - profile.eval_radial(i as f64 * d)).abs())
            .fold(0.0, f64::max)
    };
    let j_coarse = max_jump(n_samples - 1);
    let passed_c = j_coarse <= jump_tol
        || max_jump(2 * (n_samples - 1)) <= 0.75 * j_coarse + 1e-12 * (1.0 + q_max);

    // doubling ratio q(x+1)/(q(x)+1) over the window and over its top decade
    let mut sup_all = 1.0f64;
    let mut sup_top = 1.0f64;
    let top_start = 0.9 * (r_max - 1.0);
    let mut x = 0.0;
    while x <= r_max - 1.0 {
        let ratio = profile.eval_radial(x + 1.0) / (profile.eval_radial(x) + 1.0);
        sup_all = sup_all.max(ratio);
        if x >= top_start {
            sup_top = sup_top.max(ratio);
        }
        x += dr.max(1e-3);
    }
    let passed_d = sup_top <= 1.1 * sup_all_excluding_top(profile, r_max, dr).max(1.0);

    let iu_class = classify(profile, r_max);

    Ok(AssumptionReport {
        passed_a,
        passed_b,
        passed_c,
        passed_d,
        c0_estimate: sup_all,
        iu_class,
    })
}

/// Sup of the doubling ratio over `[0, 0.9 (r_max - 1)]`; condition (d) holds
/// on the window when the top decade does not exceed this by a trend.
fn sup_all_excluding_top(profile: &Profile, r_max: f64, dr: f64) -> f64 {
    let mut sup = 1.0f64;
    let stop = 0.9 * (r_max - 1.0);
    let mut x = 0.0;
    while x <= stop {
        sup = sup.max(profile.eval_radial(x + 1.0) / (profile.eval_radial(x) + 1.0));
        x += dr.max(1e-3);
    }
    sup
}

fn classify(profile: &Profile, r_max: f64) -> IuClass {
    match profile.family() {
        ProfileFamily::Power { .. } | ProfileFamily::Exponential { .. } => IuClass::Satisfies,
        ProfileFamily::Logarithmic { .. } => IuClass::Fails,
        ProfileFamily::Tabulated { .. } => {
            // slope of q(r)/ln(r) across the top decade
            let r1 = r_max / 10.0;
            let g = |r: f64| profile.eval_radial(r) / r.ln();
            let (g0, g1) = (g(r1.max(3.0)), g(r_max));
            if g0 <= 0.0 || g1 <= 0.0 {
                return IuClass::Inconclusive;
            }
            let growth = g1 / g0;
            if growth > 2.0 {
                IuClass::Satisfies
            } else if growth < 1.25 {
                IuClass::Fails
            } else {
                IuClass::Inconclusive
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_profile_at_3_4_is_25() {
        let p = Profile::power(2.0).unwrap();
        assert_relative_eq!(eval_potential(&p, [3.0, 4.0]), 25.0, max_relative = 1e-14);
    }

    #[test]
    fn potential_is_even() {
        let p = Profile::exponential(0.5).unwrap();
        for &x in &[[0.3, -1.2], [5.0, 2.0], [0.0, 0.0]] {
            assert_eq!(eval_potential(&p, x), eval_potential(&p, [-x[0], -x[1]]));
        }
    }

    #[test]
    fn tabulated_interpolates_linearly_and_clamps() {
        // knots of the linear function q(r) = 2r on [1, 5]
        let p = Profile::tabulated(vec![1.0, 3.0, 5.0], vec![2.0, 6.0, 10.0]).unwrap();
        for &r in &[1.0, 1.7, 2.9, 4.2, 5.0] {
            assert_relative_eq!(p.eval_radial(r), 2.0 * r, max_relative = 1e-14);
        }
        assert_eq!(p.eval_radial(0.2), 2.0); // left clamp
        assert_eq!(p.eval_radial(9.0), 10.0); // right clamp
    }

    #[test]
    fn exponential_is_zero_at_origin() {
        let p = Profile::exponential(0.7).unwrap();
        assert_eq!(p.eval_radial(0.0), 0.0);
    }

    #[test]
    fn parser_accepts_both_grammars() {
        assert_eq!(Profile::parse("power:2.0").unwrap(), Profile::power(2.0).unwrap());
        assert_eq!(
            Profile::parse("family=power beta=2.0").unwrap(),
            Profile::power(2.0).unwrap()
        );
        assert_eq!(
            Profile::parse("family=logarithmic gamma=5.0").unwrap(),
            Profile::logarithmic(5.0).unwrap()
        );
        assert_eq!(
            Profile::parse("exponential:0.5").unwrap(),
            Profile::exponential(0.5).unwrap()
        );
        assert!(Profile::parse("power").is_err());
        assert!(Profile::parse("parabola:2").is_err());
        assert!(Profile::parse("power:fast").is_err());
    }

    #[test]
    fn assumptions_power_beta_one() {
        let p = Profile::power(1.0).unwrap();
        let rep = check_assumptions(&p, 100.0, 10_000).unwrap();
        assert!(rep.all_passed());
        // (r+1)/(r+1) = 1 analytically, so the estimate stays at the clamp
        assert!(rep.c0_estimate <= 1.0 + 1e-12);
        assert_eq!(rep.iu_class, IuClass::Satisfies);
    }

    #[test]
    fn assumptions_logarithmic_fails_iu() {
        let p = Profile::logarithmic(5.0).unwrap();
        let rep = check_assumptions(&p, 100.0, 10_000).unwrap();
        assert!(rep.all_passed());
        assert_eq!(rep.iu_class, IuClass::Fails);
    }

    #[test]
    fn doubly_exponential_growth_breaks_condition_d() {
        // tabulated samples of q(r) = exp(r^2)
        let n = 4000;
        let r_max = 20.0;
        let rs: Vec<f64> = (0..n).map(|i| i as f64 * r_max / (n - 1) as f64).collect();
        let qs: Vec<f64> = rs.iter().map(|r| (r * r).exp()).collect();
        let p = Profile::tabulated(rs, qs).unwrap();
        let rep = check_assumptions(&p, r_max, 4000).unwrap();
        assert!(!rep.passed_d, "doubling ratio must show a growing trend");
    }

    #[test]
    fn power_c0_respects_analytic_bound() {
        // (x+1)^b <= 2^b (x^b + 1)
        for &beta in &[0.5, 1.0, 2.0, 3.5] {
            let p = Profile::power(beta).unwrap();
            let rep = check_assumptions(&p, 50.0, 5_000).unwrap();
            assert!(
                rep.c0_estimate <= 2f64.powf(beta) + 1.0,
                "beta={beta}: c0 {}",
                rep.c0_estimate
            );
        }
    }

    #[test]
    fn unit_step_chain_inequality_holds() {
        // q(a - n) >= q(a)/C0^n - sum_{k<n} C0^{-k} with C0 from the report
        for profile in [
            Profile::power(2.0).unwrap(),
            Profile::exponential(0.5).unwrap(),
            Profile::logarithmic(5.0).unwrap(),
        ] {
            let rep = check_assumptions(&profile, 60.0, 6_000).unwrap();
            let c0 = rep.c0_estimate.max(1.0);
            for a_i in 0..40 {
                let a = 5.0 + a_i as f64 * 1.25;
                for n in 1..=5usize {
                    if (n as f64) > a {
                        continue;
                    }
                    let mut geom = 0.0;
                    for k in 0..n {
                        geom += c0.powi(-(k as i32));
                    }
                    let lhs = profile.eval_radial(a - n as f64);
                    let rhs = profile.eval_radial(a) / c0.powi(n as i32) - geom;
                    assert!(
                        lhs >= rhs - 1e-9,
                        "{profile}: a={a}, n={n}: {lhs} < {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn classifier_consistent_across_families() {
        for &beta in &[0.5, 1.0, 2.0] {
            assert_eq!(
                check_assumptions(&Profile::power(beta).unwrap(), 80.0, 2_000)
                    .unwrap()
                    .iu_class,
                IuClass::Satisfies
            );
            assert_eq!(
                check_assumptions(&Profile::exponential(beta).unwrap(), 40.0, 2_000)
                    .unwrap()
                    .iu_class,
                IuClass::Satisfies
            );
        }
        for &gamma in &[1.0, 5.0, 20.0] {
            assert_eq!(
                check_assumptions(&Profile::logarithmic(gamma).unwrap(), 80.0, 2_000)
                    .unwrap()
                    .iu_class,
                IuClass::Fails
            );
        }
    }

    #[test]
    fn narrow_tabulated_gap_flagged_as_discontinuous() {
        // effectively a step of height 50 squeezed into width 1e-6
        let p = Profile::tabulated(
            vec![0.0, 12.0, 12.000001, 30.0],
            vec![0.0, 1.0, 51.0, 52.0],
        )
        .unwrap();
        let rep = check_assumptions(&p, 30.0, 10_000).unwrap();
        assert!(!rep.passed_c);
    }

    #[test]
    fn degenerate_grids_rejected() {
        let p = Profile::power(2.0).unwrap();
        assert!(check_assumptions(&p, 5.0, 1_000).is_err());
        assert!(check_assumptions(&p, 100.0, 10).is_err());
    }
}
