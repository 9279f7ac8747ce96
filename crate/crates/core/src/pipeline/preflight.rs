//! The inequalities the construction relies on, evaluated for concrete parameters.

use serde::{Deserialize, Serialize};

use crate::params::Params;

/// Left side of the exchange inequality; the lemma needs it to exceed 6.
pub fn exchange_feasibility_lhs(p: &Params, n: usize, a: usize) -> f64 {
    let nf = n as f64;
    let k_over_d = ratio(p.k.value(), p.d.value());
    (n / 2) as f64
        - 2.0 * p.epsilon.value() * nf
        - 6.0 * p.d.value() * nf
        - 5.0 * k_over_d * nf
        - 4.0 * p.alpha.value() * nf
        - 8.0 * p.c(n) as f64
        - 3.0 * a as f64
        - 3.0 * p.beta.value() * nf
}

/// Left side of the fix-cell inequality; the lemma needs it to exceed 1.
pub fn fix_feasibility_lhs(p: &Params, n: usize) -> f64 {
    let nf = n as f64;
    let (k, d) = (p.k.value(), p.d.value());
    let bracket = 4.0 * ratio(k + 64.0 / (nf * nf), d) * nf
        + 3.0
        + 6.0 * p.c(n) as f64
        + 2.0 * p.beta.value() * nf
        + 4.0 * ratio(k, d) * nf
        + 2.0 * p.alpha.value() * nf
        + 2.0 * p.f(n) as f64
        + 4.0 * d * nf;
    nf - 2.0 * bracket
}

fn ratio(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        f64::INFINITY
    } else {
        x / y
    }
}

/// `c/(n-c) · ((n-c)/n)^(n/c)`, the bound α and β must stay below.
fn scramble_bound(n: usize, c: usize) -> f64 {
    if c == 0 || c >= n {
        return 0.0;
    }
    let (nf, cf) = (n as f64, c as f64);
    cf / (nf - cf) * ((nf - cf) / nf).powf(nf / cf)
}

/// `(2β/(ε-2β))^(ε-2β) · (1/(1-2ε+4β))^(1/2-ε+2β)`, which must be below 1.
fn intercalate_lemma_lhs(eps: f64, beta: f64) -> f64 {
    let gap = eps - 2.0 * beta;
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    let first = if beta == 0.0 { 0.0 } else { (2.0 * beta / gap).powf(gap) };
    first * (1.0 / (1.0 - 2.0 * eps + 4.0 * beta)).powf(0.5 - gap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    /// Relation the check requires, as text: `">"`, `">="`, `"<"` or `"<="`.
    pub relation: String,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    fn new(name: &str, lhs: f64, relation: &str, rhs: f64) -> Self {
        let holds = match relation {
            ">" => lhs > rhs,
            ">=" => lhs >= rhs,
            "<" => lhs < rhs,
            _ => lhs <= rhs,
        };
        Check { name: name.to_string(), lhs, relation: relation.to_string(), rhs, holds }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreflightReport {
    pub n: usize,
    pub checks: Vec<Check>,
}

impl PreflightReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluates every inequality of the construction for order `n`.
pub fn preflight(p: &Params, n: usize) -> PreflightReport {
    let nf = n as f64;
    let (alpha, beta) = (p.alpha.value(), p.beta.value());
    let (c, f) = (p.c(n) as f64, p.f(n) as f64);
    let list_floor = nf - beta * nf - 2.0 * alpha * nf;
    let recolor = if f == 0.0 { f64::NEG_INFINITY } else { list_floor - 2.0 * c - nf * c / f };
    let sb = scramble_bound(n, p.c(n));
    let checks = vec![
        Check::new("intercalate_lemma", intercalate_lemma_lhs(p.epsilon.value(), beta), "<", 1.0),
        Check::new("scramble_alpha", alpha, "<", sb),
        Check::new("scramble_beta", beta, "<", sb),
        Check::new("galvin_degree", c, "<=", list_floor),
        Check::new("coloring_recolor", recolor, ">=", 1.0),
        Check::new("exchange_a0", exchange_feasibility_lhs(p, n, 0), ">", 6.0),
        Check::new("exchange_a2", exchange_feasibility_lhs(p, n, 2), ">", 6.0),
        Check::new("fix_cell", fix_feasibility_lhs(p, n), ">", 1.0),
        Check::new("disturbance_budget", p.k.value() * nf * nf, ">=", 69.0 * nf * (alpha * nf + c)),
    ];
    PreflightReport { n, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Fraction;

    #[test]
    fn tiny_order_fails_exchange() {
        let r = preflight(&Params::desk(), 2);
        assert!(!r.get("exchange_a2").unwrap().holds);
    }

    #[test]
    fn paper_constants_small_n_fail() {
        let r = preflight(&Params::paper(), 100);
        assert!(!r.all_hold());
        // c(100) = 0: the scramble bounds are vacuous.
        assert!(!r.get("scramble_alpha").unwrap().holds);
    }

    #[test]
    fn zero_density_generous_slack() {
        let mut p = Params::desk();
        p.alpha = Fraction::new(0, 1);
        p.beta = Fraction::new(0, 1);
        let r = preflight(&p, 100);
        assert!(r.get("galvin_degree").unwrap().holds);
        assert!(r.get("coloring_recolor").unwrap().holds);
    }

    #[test]
    fn exchange_lhs_by_hand() {
        // n = 1000, desk: 500 - 200 - 1500 - 2000 - 200 - 400 - 6 - 150.
        let lhs = exchange_feasibility_lhs(&Params::desk(), 1000, 2);
        assert!((lhs - (500.0 - 200.0 - 1500.0 - 2000.0 - 200.0 - 400.0 - 6.0 - 150.0)).abs() < 1e-9);
    }
}
