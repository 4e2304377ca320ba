//! Power control: a feasibility-restoring minimum-power phase, then
//! Dinkelbach ascent on energy efficiency with a cyclic golden-section
//! coordinate solver for each parametric subproblem.

use ndarray::Array2;

use super::AllocationConfig;
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::noma::{
    compute_rates, energy_efficiency, full_budget_split, DecodeOrder, Link, PowerAllocation,
    SubcarrierAllocation,
};

const PHASE1_MAX_SWEEPS: usize = 2000;
/// Inner sweeps stop once a sweep gains less than this fraction of the objective.
const INNER_REL_TOL: f64 = 1e-9;
const GOLDEN_MAX_STEPS: usize = 200;
const PHASE1_TARGET_MARGIN: f64 = 1e-9;
const BISECTION_STEPS: usize = 200;
/// Relative slack when checking a starting point against the rate floor.
pub const RATE_TOLERANCE: f64 = 1e-6;

/// Phase-1 output: minimum powers meeting the rate floor plus the users whose
/// floor was dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint {
    pub powers: PowerAllocation,
    /// Ascending. These users stay at full budget and have no rate floor.
    pub outage: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimizationTrace {
    /// λ iterates in bit/J, starting with the EE of the initial point.
    pub lambda_sequence: Vec<f64>,
    /// `N − λ_t·D` after each parametric solve.
    pub residuals: Vec<f64>,
    pub outage_users: Vec<usize>,
    pub converged: bool,
}

/// Equal split of the full budget over each user's subcarriers.
pub fn equal_power_init(alloc: &SubcarrierAllocation, p_max_w: f64) -> PowerAllocation {
    full_budget_split(alloc, p_max_w)
}

/// Mutable view of powers and rates used by both phases.
struct State<'a> {
    alloc: &'a SubcarrierAllocation,
    gains: &'a Array2<f64>,
    link: Link,
    order: &'a DecodeOrder,
    /// Position of each user in the decode order of each of its subcarriers.
    rank: Array2<usize>,
    p: Array2<f64>,
    r: Array2<f64>,
    user_rate: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(
        alloc: &'a SubcarrierAllocation,
        channel: &'a ChannelMatrix,
        link: Link,
        order: &'a DecodeOrder,
        p: Array2<f64>,
    ) -> Self {
        let mut rank = Array2::from_elem(p.dim(), usize::MAX);
        for (s, users) in order.per_subcarrier.iter().enumerate() {
            for (i, &u) in users.iter().enumerate() {
                rank[[u, s]] = i;
            }
        }
        let n = alloc.n_users();
        let mut st = Self {
            alloc,
            gains: &channel.gains,
            link,
            order,
            rank,
            r: Array2::zeros(p.dim()),
            p,
            user_rate: vec![0.0; n],
        };
        for s in 0..alloc.n_subcarriers() {
            st.refresh_subcarrier(s);
        }
        st
    }

    fn rx(&self, u: usize, s: usize) -> f64 {
        self.p[[u, s]] * self.gains[[u, s]]
    }

    /// Received power of users decoded after position `pos` on `s`, skipping `skip`.
    fn interference_after(&self, s: usize, pos: usize, skip: usize) -> f64 {
        self.order.per_subcarrier[s][pos + 1..]
            .iter()
            .filter(|&&j| j != skip)
            .map(|&j| self.rx(j, s))
            .sum()
    }

    fn refresh_subcarrier(&mut self, s: usize) {
        let mut interference = 0.0;
        for &u in self.order.per_subcarrier[s].iter().rev() {
            let rx = self.rx(u, s);
            let new = self.link.rate(rx / (interference + self.link.noise_w));
            self.user_rate[u] += new - self.r[[u, s]];
            self.r[[u, s]] = new;
            interference += rx;
        }
    }

    fn recompute_user_rates(&mut self) {
        for (u, rate) in self.user_rate.iter_mut().enumerate() {
            *rate = self.r.row(u).sum();
        }
    }

    fn user_power(&self, u: usize) -> f64 {
        self.alloc.subcarriers_of[u]
            .iter()
            .map(|&s| self.p[[u, s]])
            .sum()
    }

    fn sum_rate(&self) -> f64 {
        self.user_rate.iter().sum()
    }

    fn total_power(&self) -> f64 {
        self.p.sum()
    }

    fn into_powers(self, p_max_w: f64) -> PowerAllocation {
        PowerAllocation { p: self.p, p_max_w }
    }
}

fn check_link(link: Link) -> Result<()> {
    if !(link.noise_w > 0.0 && link.noise_w.is_finite()) {
        return Err(Error::param(format!(
            "noise power must be > 0, got {}",
            link.noise_w
        )));
    }
    if !(link.bandwidth_hz > 0.0 && link.bandwidth_hz.is_finite()) {
        return Err(Error::param(format!(
            "bandwidth must be > 0, got {}",
            link.bandwidth_hz
        )));
    }
    Ok(())
}

/// Phase 1. Gauss–Seidel over users: each user splits its power equally over
/// its subcarriers and bisects the total until its rate meets the floor
/// (capped at the budget). Sweeps stop once every floor holds and no total
/// moves by more than `inner_tol`, or as soon as a user at full budget falls
/// short. The worst such user is declared in outage and frozen at the budget;
/// repeat until every remaining user is satisfied.
pub fn min_power_feasible(
    alloc: &SubcarrierAllocation,
    channel: &ChannelMatrix,
    config: &AllocationConfig,
    link: Link,
    order: &DecodeOrder,
) -> Result<FeasiblePoint> {
    check_link(link)?;
    let n = alloc.n_users();
    let p_max = config.p_max_w;
    let r_req = config.r_req_bps;
    let mut st = State::new(
        alloc,
        channel,
        link,
        order,
        Array2::zeros((n, alloc.n_subcarriers())),
    );
    let mut outage = vec![false; n];
    if r_req > 0.0 {
        // nothing to transmit on
        for u in (0..n).filter(|&u| !alloc.is_scheduled(u)) {
            outage[u] = true;
        }
    }
    if r_req <= 0.0 {
        return Ok(FeasiblePoint {
            powers: st.into_powers(p_max),
            outage: Vec::new(),
        });
    }

    // solving for a slightly inflated target lets the monotone iteration
    // cross the true floor in finitely many sweeps
    let target = r_req * (1.0 + PHASE1_TARGET_MARGIN);
    let satisfied = |st: &State, u: usize| st.user_rate[u] >= r_req * (1.0 - 1e-12);
    loop {
        for _ in 0..PHASE1_MAX_SWEEPS {
            let mut max_change: f64 = 0.0;
            for u in (0..n).filter(|&u| !outage[u]) {
                let before = st.user_power(u);
                let total = solve_user_power(&st, u, target, p_max);
                set_user_power(&mut st, u, total);
                max_change = max_change.max((total - before).abs());
            }
            st.recompute_user_rates();
            // powers only grow from here, so a capped user that falls short
            // stays short and can be declared now
            let capped = |u: usize| st.user_power(u) >= p_max * (1.0 - 1e-12);
            if (0..n).any(|u| !outage[u] && capped(u) && !satisfied(&st, u)) {
                break;
            }
            if max_change <= config.inner_tol && (0..n).all(|u| outage[u] || satisfied(&st, u)) {
                break;
            }
        }

        // worst deficit, preferring users pinned at the budget
        let worst = (0..n)
            .filter(|&u| !outage[u] && !satisfied(&st, u))
            .map(|u| {
                (
                    st.user_power(u) >= p_max * (1.0 - 1e-12),
                    r_req - st.user_rate[u],
                    u,
                )
            })
            .max_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(b.2.cmp(&a.2)));
        match worst {
            Some((_, _, u)) => {
                set_user_power(&mut st, u, p_max);
                outage[u] = true;
            }
            None => break,
        }
    }

    st.recompute_user_rates();
    let outage = (0..n).filter(|&u| outage[u]).collect();
    Ok(FeasiblePoint {
        powers: st.into_powers(p_max),
        outage,
    })
}

/// Total power for user `u` (equal split) meeting `r_req` given everyone else.
fn solve_user_power(st: &State, u: usize, r_req: f64, p_max: f64) -> f64 {
    let scs = &st.alloc.subcarriers_of[u];
    if scs.is_empty() {
        return 0.0;
    }
    let share = 1.0 / scs.len() as f64;
    // SINR per unit of total power on each subcarrier
    let slopes: Vec<f64> = scs
        .iter()
        .map(|&s| {
            let pos = st.rank[[u, s]];
            let interference = st.interference_after(s, pos, u);
            share * st.gains[[u, s]] / (interference + st.link.noise_w)
        })
        .collect();
    let rate = |total: f64| slopes.iter().map(|a| st.link.rate(a * total)).sum::<f64>();
    if rate(p_max) < r_req {
        return p_max;
    }
    let (mut lo, mut hi) = (0.0, p_max);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rate(mid) >= r_req {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn set_user_power(st: &mut State, u: usize, total: f64) {
    let scs = st.alloc.subcarriers_of[u].clone();
    if scs.is_empty() {
        return;
    }
    let each = total / scs.len() as f64;
    for &s in &scs {
        st.p[[u, s]] = each;
    }
    for &s in &scs {
        st.refresh_subcarrier(s);
    }
}

/// Checks budgets and rate floors of a starting point.
pub fn check_feasible(
    alloc: &SubcarrierAllocation,
    channel: &ChannelMatrix,
    config: &AllocationConfig,
    link: Link,
    order: &DecodeOrder,
    start: &FeasiblePoint,
) -> Result<()> {
    let p = &start.powers;
    if p.p.dim() != (alloc.n_users(), alloc.n_subcarriers()) {
        return Err(Error::param("power matrix does not match the allocation"));
    }
    if p.p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::param("powers must be finite and non-negative"));
    }
    for u in 0..alloc.n_users() {
        let total = p.user_total(u);
        if total > config.p_max_w + 1e-12 {
            return Err(Error::param(format!(
                "user {u} exceeds its budget: {total} W > {} W",
                config.p_max_w
            )));
        }
    }
    let rates = compute_rates(alloc, channel, p, link, order);
    for u in 0..alloc.n_users() {
        if start.outage.binary_search(&u).is_ok() {
            continue;
        }
        if rates.user_rate[u] < config.r_req_bps * (1.0 - RATE_TOLERANCE) {
            return Err(Error::param(format!(
                "user {u} starts below its rate floor: {} < {} bit/s",
                rates.user_rate[u], config.r_req_bps
            )));
        }
    }
    Ok(())
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, x_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // the cap guards against tolerances below the spacing of floats near `hi`
    for _ in 0..GOLDEN_MAX_STEPS {
        if b - a <= x_tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

struct Coordinate<'s, 'a> {
    st: &'s mut State<'a>,
    frozen: &'s [bool],
    r_req: f64,
    p_max: f64,
}

impl Coordinate<'_, '_> {
    /// Interval for `p[u][s]` keeping the budget and every affected rate floor.
    fn bounds(&self, u: usize, s: usize) -> (f64, f64) {
        let st = &*self.st;
        let g = st.gains[[u, s]];
        let cur = st.p[[u, s]];
        let noise = st.link.noise_w;
        let mut lo: f64 = 0.0;
        let mut hi = (self.p_max - (st.user_power(u) - cur)).max(0.0);
        if self.r_req > 0.0 {
            let pos = st.rank[[u, s]];
            let target = self.r_req.min(st.user_rate[u]);
            let need = target - (st.user_rate[u] - st.r[[u, s]]);
            if need > 0.0 {
                let interference = st.interference_after(s, pos, u);
                lo = st.link.sinr_for(need) * (interference + noise) / g;
            }
            // users decoded earlier see this power as interference
            for (vpos, &v) in st.order.per_subcarrier[s][..pos].iter().enumerate() {
                if self.frozen[v] {
                    continue;
                }
                let target = self.r_req.min(st.user_rate[v]);
                let need = target - (st.user_rate[v] - st.r[[v, s]]);
                if need <= 0.0 {
                    continue;
                }
                let other = st.interference_after(s, vpos, u);
                let max_rx = st.rx(v, s) / st.link.sinr_for(need) - noise - other;
                hi = hi.min((max_rx / g).max(0.0));
            }
        }
        (lo.min(cur), hi.max(cur))
    }

    /// One coordinate move; returns the objective gain.
    fn step(&mut self, u: usize, s: usize, lambda: f64) -> f64 {
        let (lo, hi) = self.bounds(u, s);
        let st = &mut *self.st;
        let cur = st.p[[u, s]];
        if hi - lo <= 0.0 {
            return 0.0;
        }
        let g = st.gains[[u, s]];
        let noise = st.link.noise_w;
        let others: f64 = st.order.per_subcarrier[s]
            .iter()
            .filter(|&&j| j != u)
            .map(|&j| st.rx(j, s))
            .sum();
        let link = st.link;
        let phi = |p: f64| link.rate((others + p * g) / noise) - lambda * p;
        let x_tol = 1e-10 * (hi - lo) + 4.0 * f64::EPSILON * hi;
        let (x, fx) = golden_section_max(phi, lo, hi, x_tol);
        let f_cur = phi(cur);
        let (best, f_best) = [(lo, phi(lo)), (hi, phi(hi))]
            .into_iter()
            .fold((x, fx), |b, c| if c.1 > b.1 { c } else { b });
        if f_best > f_cur {
            st.p[[u, s]] = best;
            st.refresh_subcarrier(s);
            f_best - f_cur
        } else {
            0.0
        }
    }
}

/// Dinkelbach ascent on `sum rate / (transmit + circuit power)`.
///
/// Each parametric problem `max Σ rates − λ·Σ p` is solved by cyclic
/// golden-section coordinate moves that never leave the feasible set; users in
/// outage keep their starting powers.
pub fn dinkelbach_power_allocation(
    alloc: &SubcarrierAllocation,
    channel: &ChannelMatrix,
    config: &AllocationConfig,
    link: Link,
    order: &DecodeOrder,
    start: &FeasiblePoint,
) -> Result<(PowerAllocation, OptimizationTrace)> {
    check_link(link)?;
    check_feasible(alloc, channel, config, link, order, start)?;
    let n = alloc.n_users();
    let circuit = alloc.n_scheduled() as f64 * config.circuit_power_w;
    let mut frozen = vec![false; n];
    for &u in &start.outage {
        frozen[u] = true;
    }
    let mut st = State::new(alloc, channel, link, order, start.powers.p.clone());
    let ee = |st: &State| {
        let d = st.total_power() + circuit;
        if d > 0.0 {
            st.sum_rate() / d
        } else {
            0.0
        }
    };

    let mut trace = OptimizationTrace {
        outage_users: start.outage.clone(),
        ..Default::default()
    };
    let mut lambda = ee(&st);
    trace.lambda_sequence.push(lambda);
    let pairs: Vec<(usize, usize)> = (0..n)
        .filter(|&u| !frozen[u])
        .flat_map(|u| alloc.subcarriers_of[u].iter().map(move |&s| (u, s)))
        .collect();

    for _ in 0..config.dinkelbach_max_iter {
        let mut coord = Coordinate {
            st: &mut st,
            frozen: &frozen,
            r_req: config.r_req_bps,
            p_max: config.p_max_w,
        };
        for _ in 0..config.inner_max_sweeps {
            let mut gain = 0.0;
            for &(u, s) in &pairs {
                gain += coord.step(u, s, lambda);
            }
            let objective = coord.st.sum_rate() - lambda * coord.st.total_power();
            if gain <= INNER_REL_TOL * (1.0 + objective.abs()) {
                break;
            }
        }
        st.recompute_user_rates();
        let numerator = st.sum_rate();
        let denominator = st.total_power() + circuit;
        let residual = numerator - lambda * denominator;
        trace.residuals.push(residual);
        lambda = ee(&st);
        trace.lambda_sequence.push(lambda);
        if residual <= config.dinkelbach_tol * numerator {
            trace.converged = true;
            break;
        }
    }
    Ok((st.into_powers(config.p_max_w), trace))
}

/// EE of a power allocation under the given decode order.
pub fn evaluate_ee(
    alloc: &SubcarrierAllocation,
    channel: &ChannelMatrix,
    powers: &PowerAllocation,
    link: Link,
    order: &DecodeOrder,
    circuit_power_w: f64,
) -> f64 {
    let rates = compute_rates(alloc, channel, powers, link, order);
    energy_efficiency(&rates, powers, circuit_power_w, alloc.n_scheduled()).ee_bits_per_joule
}
