use crate::error::{Error, Result};
use crate::radiometry::{b_density, rosseland_density, OpacityModel, PhysConstants};

/// Spatially homogeneous multigroup relaxation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MultigroupProblem {
    pub consts: PhysConstants,
    pub model: OpacityModel,
    pub cv: f64,
    /// Initial material temperature.
    pub t0: f64,
    /// Radiation temperature setting the initial intensity magnitude.
    pub radiation_t: f64,
    /// Temperature of the initial intensity's frequency shape.
    pub spectrum_t: f64,
    pub groups: usize,
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultigroupState {
    pub edges: Vec<f64>,
    /// Angle-integrated intensity per group.
    pub rho_g: Vec<f64>,
    pub t: f64,
}

impl MultigroupState {
    pub fn total_energy(&self, consts: &PhysConstants, cv: f64) -> f64 {
        self.rho_g.iter().sum::<f64>() / consts.c + cv * self.t
    }

    /// Specific intensity averaged over each target bin, `sum rho_g / (4 pi du)` by overlap.
    pub fn binned_intensity(&self, bins: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; bins.len().saturating_sub(1)];
        for (g, &r) in self.rho_g.iter().enumerate() {
            let (lo, hi) = (self.edges[g], self.edges[g + 1]);
            let dens = r / (hi - lo);
            let first = bins.partition_point(|&e| e <= lo).saturating_sub(1);
            for (b, slot) in out.iter_mut().enumerate().skip(first) {
                let (bl, bh) = (bins[b], bins[b + 1]);
                if bl >= hi {
                    break;
                }
                let overlap = hi.min(bh) - lo.max(bl);
                if overlap > 0.0 {
                    *slot += dens * overlap;
                }
            }
        }
        for (b, v) in out.iter_mut().enumerate() {
            *v /= 4.0 * std::f64::consts::PI * (bins[b + 1] - bins[b]);
        }
        out
    }
}

/// Trajectory of the multigroup oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct MultigroupRun {
    pub times: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub energies: Vec<f64>,
    pub final_state: MultigroupState,
}

const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// `(int_g b du, int_g w_R du)` per group at temperature `t`, by 3-point Gauss-Legendre.
pub fn group_planck_fractions(edges: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let n = edges.len() - 1;
    let mut b = vec![0.0; n];
    let mut r = vec![0.0; n];
    for g in 0..n {
        let (lo, hi) = (edges[g], edges[g + 1]);
        let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            let u = m + h * x;
            b[g] += w * h * b_density(u, t);
            r[g] += w * h * rosseland_density(u, t);
        }
    }
    (b, r)
}

fn log_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| lo * (hi / lo).powf(k as f64 / n as f64))
        .collect()
}

/// Backward-Euler multigroup relaxation with a safeguarded Newton solve for `T` each step.
pub fn multigroup_homogeneous_solve(p: &MultigroupProblem) -> Result<MultigroupRun> {
    let bad = |m: &str| Err(Error::Domain(m.to_string()));
    if !(p.dt > 0.0) || p.t_end < 0.0 || p.groups == 0 || !(p.cv > 0.0) {
        return bad("multigroup oracle needs dt > 0, t_end >= 0, groups > 0, cv > 0");
    }
    if !(p.t0 > 0.0 && p.spectrum_t > 0.0 && p.radiation_t >= 0.0) {
        return bad("multigroup oracle needs positive temperatures");
    }
    let consts = &p.consts;
    let t_ref = p.t0.max(p.radiation_t).max(p.spectrum_t);
    let edges = log_edges(1e-4 * t_ref, 50.0 * t_ref, p.groups);
    let centers: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let (b0, _) = group_planck_fractions(&edges, p.spectrum_t);
    let norm0: f64 = b0.iter().sum();
    let ur0 = consts.ur(p.radiation_t);
    let mut state = MultigroupState {
        rho_g: b0.iter().map(|f| ur0 * f / norm0).collect(),
        edges: edges.clone(),
        t: p.t0,
    };
    let g = consts.c * p.dt / (consts.epsilon * consts.epsilon);
    let n_steps = (p.t_end / p.dt - 1e-9).ceil().max(0.0) as usize;
    let mut run = MultigroupRun {
        times: vec![0.0],
        temperatures: vec![state.t],
        energies: vec![state.total_energy(consts, p.cv)],
        final_state: state.clone(),
    };
    let rho_scale = state.rho_g.iter().sum::<f64>().max(consts.ur(p.t0));
    for step in 1..=n_steps {
        let t_n = state.t;
        let rho_n = state.rho_g.clone();
        // F(T) = cv (T - T_n) + (1/c) sum (rho_g(T) - rho_g^n), rho_g(T) = (rho_g^n + g s 4piB_g)/(1 + g s)
        let eval = |t: f64| -> (f64, f64, Vec<f64>) {
            let (bf, rf) = group_planck_fractions(&edges, t);
            let ur = consts.ur(t);
            let dur = 4.0 * ur / t;
            let mut f = p.cv * (t - t_n);
            let mut df = p.cv;
            let mut rho = vec![0.0; centers.len()];
            for k in 0..centers.len() {
                let s = g * p.model.evaluate(centers[k], t);
                let e = ur * bf[k];
                rho[k] = (rho_n[k] + s * e) / (1.0 + s);
                f += (rho[k] - rho_n[k]) / consts.c;
                df += s / (1.0 + s) * dur * rf[k] / consts.c;
            }
            (f, df, rho)
        };
        // bracket: F is increasing for temperature-independent opacities
        let e_total = state.total_energy(consts, p.cv);
        let (mut lo, mut hi) = (1e-8 * t_ref, (e_total / p.cv).max(t_n) * 2.0 + t_ref);
        let mut t = t_n;
        let mut solved = None;
        for _ in 0..200 {
            let (f, df, rho) = eval(t);
            let scale = p.cv * t.max(t_n) + rho_scale / consts.c;
            if f.abs() <= 1e-15 * scale {
                solved = Some((t, rho));
                break;
            }
            if f > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            let mut next = t - f / df;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t {
                let (_, _, rho) = eval(next);
                solved = Some((next, rho));
                break;
            }
            t = next;
        }
        let Some((t, rho)) = solved else {
            return Err(Error::Newton(format!(
                "multigroup oracle step {step} did not converge"
            )));
        };
        state.t = t;
        state.rho_g = rho;
        run.times.push(step as f64 * p.dt);
        run.temperatures.push(t);
        run.energies.push(state.total_energy(consts, p.cv));
    }
    run.final_state = state;
    Ok(run)
}
