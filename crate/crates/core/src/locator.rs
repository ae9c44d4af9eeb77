//! Admissible shock locations: roots of R(ξ) = Ṗ* on (0, L).

use serde::{Deserialize, Serialize};

use crate::gas::{density_unchecked, BackgroundShock, GasConstants};
use crate::nozzle::NozzleSpec;
use crate::profile::Profile1D;
use crate::quadrature::{gauss, gauss_legendre, simpson};

const PRIMITIVE_CELLS: usize = 4096;
const PSTAR_PANELS: usize = 4096;

/// K̇ = [p̄]((γ−1)/(γp̄₊) + 1/(ρ̄₊q̄₊²)).
pub fn kdot(bg: &BackgroundShock, g: &GasConstants) -> f64 {
    let up = &bg.u_plus;
    let rho = density_unchecked(up.p, up.s, g);
    bg.jump_p() * ((g.gamma - 1.0) / (g.gamma * up.p) + 1.0 / (rho * up.q * up.q))
}

/// The subsonic coefficient (1/(ρq))·(1−M²)/(ρq²) evaluated at a background state.
pub fn elliptic_coefficient(u: &crate::gas::FlowState, g: &GasConstants) -> f64 {
    let rho = density_unchecked(u.p, u.s, g);
    let c2 = g.gamma * u.p / rho;
    let m2 = u.q * u.q / c2;
    (1.0 - m2) / (rho * u.q * rho * u.q * u.q)
}

/// Ṗ* = a₊ ∫₀¹ P.
pub fn pstar(bg: &BackgroundShock, g: &GasConstants, pressure: &Profile1D) -> f64 {
    elliptic_coefficient(&bg.u_plus, g) * simpson(|y| pressure.value(y), 0.0, 1.0, PSTAR_PANELS)
}

/// Cached primitive ∫₀^ξ Θ on a fine grid, refined by Gauss–Legendre on the partial cell.
#[derive(Debug, Clone)]
pub struct ThetaPrimitive {
    theta: Profile1D,
    h: f64,
    nodes: Vec<f64>,
    rule: (Vec<f64>, Vec<f64>),
}

impl ThetaPrimitive {
    pub fn new(theta: &Profile1D, length: f64) -> Self {
        let rule = gauss_legendre(6);
        let h = length / PRIMITIVE_CELLS as f64;
        let mut nodes = Vec::with_capacity(PRIMITIVE_CELLS + 1);
        let mut acc = 0.0;
        nodes.push(0.0);
        for k in 0..PRIMITIVE_CELLS {
            acc += gauss(|x| theta.value(x), k as f64 * h, (k + 1) as f64 * h, &rule);
            nodes.push(acc);
        }
        Self { theta: theta.clone(), h, nodes, rule }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let k = ((xi / self.h).floor().max(0.0) as usize).min(PRIMITIVE_CELLS - 1);
        let x0 = k as f64 * self.h;
        self.nodes[k] + gauss(|x| self.theta.value(x), x0, xi, &self.rule)
    }

    pub fn total(&self) -> f64 {
        self.nodes[PRIMITIVE_CELLS]
    }
}

/// R(ξ) = ∫₀ᴸΘ − K̇∫₀^ξΘ with R′ = −K̇Θ.
#[derive(Debug, Clone)]
pub struct SolvabilityCurve {
    pub kdot: f64,
    pub length: f64,
    primitive: ThetaPrimitive,
}

impl SolvabilityCurve {
    pub fn new(spec: &NozzleSpec, kdot: f64) -> Self {
        Self { kdot, length: spec.length, primitive: ThetaPrimitive::new(&spec.theta, spec.length) }
    }

    pub fn r(&self, xi: f64) -> f64 {
        self.primitive.total() - self.kdot * self.primitive.eval(xi)
    }

    pub fn r_prime(&self, xi: f64) -> f64 {
        -self.kdot * self.primitive.theta.value(xi)
    }

    pub fn theta_integral(&self, xi: f64) -> f64 {
        self.primitive.eval(xi)
    }
}

/// R(ξ) for a single position.
pub fn r_of_xi(spec: &NozzleSpec, kdot: f64, xi: f64) -> f64 {
    SolvabilityCurve::new(spec, kdot).r(xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocatedRoot {
    pub xi_star: f64,
    pub r_prime_sign: i8,
    pub theta_at_root: f64,
    pub residual: f64,
    pub degenerate: bool,
    pub boundary: bool,
}

impl LocatedRoot {
    /// Usable as a seed for the nonlinear solve.
    pub fn admissible(&self) -> bool {
        !self.degenerate && !self.boundary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeStatus {
    InRange,
    AtRangeBoundary,
    BelowRange,
    AboveRange,
    DegenerateShock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationReport {
    pub roots: Vec<LocatedRoot>,
    pub r_lower: f64,
    pub r_upper: f64,
    pub p_star: f64,
    pub kdot: f64,
    pub in_range: bool,
    pub status: RangeStatus,
    pub message: String,
}

impl LocationReport {
    pub fn admissible_roots(&self) -> Vec<f64> {
        self.roots.iter().filter(|r| r.admissible()).map(|r| r.xi_star).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LocatorOptions {
    pub scan_cells: usize,
    /// Bisection tolerance on ξ*, relative to L.
    pub root_tol: f64,
}

impl Default for LocatorOptions {
    fn default() -> Self {
        Self { scan_cells: 4096, root_tol: 1e-12 }
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while b - a > tol {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

pub fn find_admissible_locations(spec: &NozzleSpec, bg: &BackgroundShock, g: &GasConstants) -> LocationReport {
    find_admissible_locations_with(spec, bg, g, LocatorOptions::default())
}

pub fn find_admissible_locations_with(
    spec: &NozzleSpec,
    bg: &BackgroundShock,
    g: &GasConstants,
    opts: LocatorOptions,
) -> LocationReport {
    let k = kdot(bg, g);
    let curve = SolvabilityCurve::new(spec, k);
    let p_star = pstar(bg, g, &spec.pressure);
    let l = spec.length;
    let n = opts.scan_cells.max(8);
    let xs: Vec<f64> = (0..=n).map(|i| l * i as f64 / n as f64).collect();
    let xtol = opts.root_tol.max(f64::EPSILON) * l;

    let theta = |x: f64| spec.theta.value(x);
    let thetas: Vec<f64> = xs.iter().map(|&x| theta(x)).collect();
    let mut candidates = vec![0.0, l];
    for i in 0..n {
        if thetas[i] * thetas[i + 1] < 0.0 {
            candidates.push(bisect(&theta, xs[i], xs[i + 1], xtol));
        }
    }
    let rs: Vec<f64> = candidates.iter().map(|&x| curve.r(x)).collect();
    let r_lower = rs.iter().copied().fold(f64::INFINITY, f64::min);
    let r_upper = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = r_lower.abs() + r_upper.abs() + 1.0;
    let root_tol = 1e-10 * scale;
    let theta_max = thetas.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let theta_tol = 1e-8 * theta_max.max(1e-300);

    let f = |x: f64| curve.r(x) - p_star;
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut found: Vec<(f64, bool)> = Vec::new();
    for i in 0..n {
        if fs[i] == 0.0 {
            found.push((xs[i], false));
        } else if fs[i] * fs[i + 1] < 0.0 {
            found.push((bisect(&f, xs[i], xs[i + 1], xtol), false));
        }
    }
    if fs[n] == 0.0 {
        found.push((l, false));
    }
    for i in 1..n {
        let a = fs[i].abs();
        let no_crossing = fs[i - 1] * fs[i] > 0.0 && fs[i] * fs[i + 1] > 0.0;
        if no_crossing && a <= fs[i - 1].abs() && a <= fs[i + 1].abs() {
            let x = golden_min(&|x| f(x).abs(), xs[i - 1], xs[i + 1], xtol);
            if f(x).abs() <= root_tol {
                found.push((x, true));
            }
        }
    }
    for (i, &x) in [0.0, l].iter().enumerate() {
        let idx = if i == 0 { 0 } else { n };
        if fs[idx] != 0.0 && fs[idx].abs() <= root_tol {
            found.push((x, false));
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut roots: Vec<LocatedRoot> = Vec::new();
    for (x, tangential) in found {
        if let Some(last) = roots.last_mut() {
            if (x - last.xi_star).abs() <= 1e-10 * l {
                last.degenerate |= tangential;
                continue;
            }
            let mid = 0.5 * (x + last.xi_star);
            if x - last.xi_star <= 1e-6 * l && f(mid).abs() <= root_tol {
                last.xi_star = mid;
                last.theta_at_root = theta(mid);
                last.residual = f(mid);
                last.r_prime_sign = 0;
                last.degenerate = true;
                continue;
            }
        }
        let th = theta(x);
        let rp = curve.r_prime(x);
        roots.push(LocatedRoot {
            xi_star: x,
            r_prime_sign: if th.abs() <= theta_tol { 0 } else if rp > 0.0 { 1 } else { -1 },
            theta_at_root: th,
            residual: f(x),
            degenerate: tangential || th.abs() <= theta_tol,
            boundary: x <= xtol || x >= l - xtol,
        });
    }

    let lo_ok = p_star >= r_lower - root_tol;
    let hi_ok = p_star <= r_upper + root_tol;
    let in_range = lo_ok && hi_ok;
    let (status, message) = if k <= 0.0 {
        (RangeStatus::DegenerateShock, "zero-strength background shock".to_string())
    } else if !lo_ok {
        (RangeStatus::BelowRange, format!("P* = {p_star:.6e} is below the range [{r_lower:.6e}, {r_upper:.6e}]"))
    } else if !hi_ok {
        (RangeStatus::AboveRange, format!("P* = {p_star:.6e} is above the range [{r_lower:.6e}, {r_upper:.6e}]"))
    } else if (p_star - r_lower).abs() <= root_tol || (p_star - r_upper).abs() <= root_tol {
        (RangeStatus::AtRangeBoundary, "P* lies on the boundary of the range".to_string())
    } else {
        let count = roots.iter().filter(|r| r.admissible()).count();
        (RangeStatus::InRange, format!("{count} admissible location(s)"))
    };
    LocationReport { roots, r_lower, r_upper, p_star, kdot: k, in_range, status, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn air_bg() -> (GasConstants, BackgroundShock) {
        let g = GasConstants::air();
        let bg = BackgroundShock::from_upstream(1.0, 2.0, &g).unwrap();
        (g, bg)
    }

    fn nozzle(theta: &str, p: f64) -> NozzleSpec {
        NozzleSpec::new(
            1.0,
            0.01,
            Profile1D::expression(theta, 1.0, (0.0, 1.0)).unwrap(),
            Profile1D::constant(p, (0.0, f64::INFINITY)),
        )
        .unwrap()
    }

    #[test]
    fn kdot_by_hand_at_mach_two() {
        let (g, bg) = air_bg();
        let rho_m = 1.0 / (4.0 * 1.4);
        let rho_p = rho_m * 2.4 * 4.0 / (0.4 * 4.0 + 2.0);
        let q_p = 1.0 / rho_p;
        let expected = 3.5 * (0.4 / (1.4 * 4.5) + 1.0 / (rho_p * q_p * q_p));
        assert!((kdot(&bg, &g) - expected).abs() < 1e-13);
        let weak = BackgroundShock { u_minus: bg.u_minus, u_plus: bg.u_minus };
        assert_eq!(kdot(&weak, &g), 0.0);
    }

    #[test]
    fn pstar_prefactor_and_zero() {
        let (g, bg) = air_bg();
        assert_eq!(pstar(&bg, &g, &Profile1D::constant(0.0, (0.0, 1.0))), 0.0);
        let a = elliptic_coefficient(&bg.u_plus, &g);
        assert!((pstar(&bg, &g, &Profile1D::constant(1.0, (0.0, 1.0))) - a).abs() < 1e-15);
        assert!(a > 0.0);
    }

    #[test]
    fn r_for_constant_theta_is_linear() {
        let (g, bg) = air_bg();
        let s = nozzle("1", 0.0);
        let k = kdot(&bg, &g);
        let c = SolvabilityCurve::new(&s, k);
        for x in [0.0, 0.2, 0.77, 1.0] {
            assert!((c.r(x) - (1.0 - k * x)).abs() < 1e-13);
        }
        let h = 1e-4;
        let s2 = nozzle("sin(3*x) + x^2", 0.0);
        let c2 = SolvabilityCurve::new(&s2, k);
        assert!(((c2.r(0.4 + h) - c2.r(0.4 - h)) / (2.0 * h) - c2.r_prime(0.4)).abs() < 1e-7);
    }

    #[test]
    fn linear_r_inverted_by_hand() {
        let (g, bg) = air_bg();
        let k = kdot(&bg, &g);
        let target = 1.0 - k * 0.5;
        let p = target / elliptic_coefficient(&bg.u_plus, &g);
        let rep = find_admissible_locations(&nozzle("1", p), &bg, &g);
        assert_eq!(rep.roots.len(), 1);
        assert!((rep.roots[0].xi_star - 0.5).abs() < 1e-11);
        assert_eq!(rep.roots[0].r_prime_sign, -1);
        assert_eq!(rep.status, RangeStatus::InRange);
    }

    #[test]
    fn out_of_range_gives_empty_list() {
        let (g, bg) = air_bg();
        let rep = find_admissible_locations(&nozzle("1", 1e3), &bg, &g);
        assert!(rep.roots.is_empty());
        assert_eq!(rep.status, RangeStatus::AboveRange);
        assert!(!rep.in_range);
    }

    #[test]
    fn sign_changing_theta_gives_two_roots_per_hump() {
        let (g, bg) = air_bg();
        let k = kdot(&bg, &g);
        let a = elliptic_coefficient(&bg.u_plus, &g);
        for kk in 1..=3 {
            let theta = format!("sin(2*{kk}*pi*x/L)");
            let low = -k / (kk as f64 * std::f64::consts::PI);
            let rep = find_admissible_locations(&nozzle(&theta, 0.4 * low / a), &bg, &g);
            assert_eq!(rep.admissible_roots().len(), 2 * kk, "{rep:?}");
        }
    }

    #[test]
    fn tangential_root_is_flagged() {
        let (g, bg) = air_bg();
        let a = elliptic_coefficient(&bg.u_plus, &g);
        let k = kdot(&bg, &g);
        let low = -k / std::f64::consts::PI;
        let rep = find_admissible_locations(&nozzle("sin(2*pi*x/L)", low / a), &bg, &g);
        assert_eq!(rep.roots.len(), 1, "{rep:?}");
        assert!(rep.roots[0].degenerate);
        assert!((rep.roots[0].xi_star - 0.5).abs() < 1e-6);
    }
}
