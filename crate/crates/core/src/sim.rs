//! Exponential Euler-Maruyama integration of the Fourier system
//! `du(k) = (-|k|^2/2 u(k) + lambda M_k[u]) dt + |k| dB_k`, together with the
//! zero mode `dh(0) = lambda N_0[u] dt + dB_0` and the tested observables.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::lattice::ModeLattice;
use crate::noise::{complex_gaussian, sample_white_noise, stream, Stream};
use crate::nonlinearity::{Backend, Nonlinearity};
use crate::numerics::{ou_residual, phi1_neg};
use crate::test_function::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub cutoff_n: u32,
    pub lambda: f64,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "one")]
    pub record_stride: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub backend: Backend,
    /// Skip the `dt <= 0.5/N^2` guard.
    #[serde(default)]
    pub allow_large_dt: bool,
    /// Keep full field snapshots at every recorded time.
    #[serde(default)]
    pub keep_snapshots: bool,
    /// Record the A and C parts of the decomposition for every probe.
    #[serde(default)]
    pub record_decomposition: bool,
}

fn one() -> u32 {
    1
}

impl SimConfig {
    pub fn new(cutoff_n: u32, lambda: f64, dt: f64, t_final: f64) -> Self {
        Self {
            cutoff_n,
            lambda,
            dt,
            t_final,
            record_stride: 1,
            seed: 0,
            backend: Backend::default(),
            allow_large_dt: false,
            keep_snapshots: false,
            record_decomposition: false,
        }
    }

    /// Largest step allowed by the default guard, `0.5 / N^2`.
    pub fn max_dt(cutoff_n: u32) -> f64 {
        0.5 / (cutoff_n as f64 * cutoff_n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.cutoff_n == 0 {
            return bad("cutoff_n must be at least 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and nonnegative, got {}", self.lambda));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !self.allow_large_dt && self.dt > Self::max_dt(self.cutoff_n) * (1.0 + 1e-12) {
            return bad(format!(
                "dt = {} violates the stability guard dt <= 0.5/N^2 = {} for N = {} (set allow_large_dt to override)",
                self.dt,
                Self::max_dt(self.cutoff_n),
                self.cutoff_n
            ));
        }
        if !(self.t_final >= self.dt) {
            return bad(format!("t_final = {} must be at least dt = {}", self.t_final, self.dt));
        }
        if self.record_stride == 0 {
            return bad("record_stride must be positive".into());
        }
        Ok(())
    }

    pub fn n_steps(&self) -> u64 {
        (self.t_final / self.dt - 1e-9).ceil() as u64
    }
}

/// Recorded values of one test function along a trajectory.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ProbeSeries {
    pub id: String,
    /// `h(t)[phi]`.
    pub h: Vec<f64>,
    /// `B_phi(t)`: trapezoidal time integral of `lambda N[u(s)][phi]`.
    pub b: Vec<f64>,
    /// `lambda N[u(t)][phi]`.
    pub nonlin: Vec<f64>,
    /// `A_phi(t) = (1/2) int_0^t h(s)[Laplacian phi] ds`; empty unless requested.
    pub a: Vec<f64>,
    /// `C_phi(t) = int_0^t xi(ds)[phi]`; empty unless requested.
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub config: SimConfig,
    pub times: Vec<f64>,
    /// Velocity coefficients with the height zero mode, at each recorded time (optional).
    pub snapshots: Vec<SpectralField>,
    pub zero_mode_series: Vec<f64>,
    pub probes: Vec<ProbeSeries>,
}

impl Trajectory {
    pub fn probe(&self, id: &str) -> Result<&ProbeSeries> {
        self.probes.iter().find(|p| p.id == id).ok_or_else(|| Error::UnknownProbe(id.to_string()))
    }

    pub fn b_series(&self, id: &str) -> Result<&[f64]> {
        Ok(&self.probe(id)?.b)
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// Gaussian increments driving one step. Indexed by slot; only representatives are read.
#[derive(Clone, Debug, PartialEq)]
pub struct Increments {
    /// `int_t^{t+dt} e^{-|k|^2 (t+dt-s)/2} dB_k(s)` (height level).
    pub ou: Vec<Complex64>,
    /// `B_k(t+dt) - B_k(t)`.
    pub db: Vec<Complex64>,
    pub db0: f64,
}

/// Integrator state plus reusable buffers.
pub struct Stepper {
    cfg: SimConfig,
    lattice: Arc<ModeLattice>,
    engine: Nonlinearity,
    decay: Vec<f64>,
    drift_w: Vec<f64>,
    sd_db: f64,
    reg: Vec<f64>,
    sd_res: Vec<f64>,
    u: Vec<Complex64>,
    h0: f64,
    m: Vec<Complex64>,
    n0: f64,
    t: f64,
    steps: u64,
    inc: Increments,
}

impl Stepper {
    pub fn new(cfg: &SimConfig, initial: SpectralField) -> Result<Self> {
        cfg.validate()?;
        let lattice = initial.lattice().clone();
        if lattice.cutoff() != cfg.cutoff_n {
            return Err(Error::LatticeMismatch { field: lattice.cutoff(), requested: cfg.cutoff_n });
        }
        let mut engine = Nonlinearity::new(lattice.clone(), cfg.cutoff_n, cfg.backend)?;
        let dt = cfg.dt;
        let nm = lattice.len();
        let mut decay = vec![0.0; nm];
        let mut drift_w = vec![0.0; nm];
        let mut reg = vec![0.0; nm];
        let mut sd_res = vec![0.0; nm];
        for s in 0..nm {
            let a = 0.5 * lattice.norm(s).powi(2);
            let x = a * dt;
            decay[s] = (-x).exp();
            drift_w[s] = phi1_neg(x) * dt;
            // (OU integral X, increment Y): Var Y = dt, Cov = dt phi1(x),
            // Var X = dt phi1(2x); X = phi1(x) Y + sqrt(dt * residual) g.
            reg[s] = phi1_neg(x);
            sd_res[s] = (dt * ou_residual(x)).sqrt();
        }
        let mut m = vec![Complex64::new(0.0, 0.0); nm];
        let n0 = engine.eval_into(&initial.coeffs, &mut m);
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self {
            cfg: cfg.clone(),
            engine,
            decay,
            drift_w,
            sd_db: dt.sqrt(),
            reg,
            sd_res,
            u: initial.coeffs,
            h0: initial.zero_mode,
            m,
            n0,
            t: 0.0,
            steps: 0,
            inc: Increments { ou: vec![zero; nm], db: vec![zero; nm], db0: 0.0 },
            lattice,
        })
    }

    pub fn lattice(&self) -> &Arc<ModeLattice> {
        &self.lattice
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn velocity(&self) -> &[Complex64] {
        &self.u
    }

    pub fn zero_mode(&self) -> f64 {
        self.h0
    }

    pub fn field(&self) -> SpectralField {
        SpectralField::from_coeffs(self.lattice.clone(), self.u.clone(), self.h0).expect("shape")
    }

    /// `M_k[u]` at the current state.
    pub fn nonlinearity(&self) -> &[Complex64] {
        &self.m
    }

    /// `N_0[u]` at the current state.
    pub fn zero_nonlinearity(&self) -> f64 {
        self.n0
    }

    pub fn last_increments(&self) -> &Increments {
        &self.inc
    }

    /// Draw the increments of one step: per representative, the real and
    /// imaginary parts each take a Brownian increment followed by the
    /// conditional OU residual; then the zero-mode increment.
    pub fn sample_increments<R: Rng + ?Sized>(&self, rng: &mut R, inc: &mut Increments) {
        for s in self.lattice.representatives() {
            let g = complex_gaussian(rng);
            let r = complex_gaussian(rng);
            let db = g * self.sd_db;
            let ou = db * self.reg[s] + r * self.sd_res[s];
            inc.db[s] = db;
            inc.ou[s] = ou;
            let c = self.lattice.conj_index(s);
            inc.db[c] = db.conj();
            inc.ou[c] = ou.conj();
        }
        let g0: f64 = rng.sample(StandardNormal);
        inc.db0 = g0 * self.sd_db;
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let mut inc = std::mem::replace(
            &mut self.inc,
            Increments { ou: Vec::new(), db: Vec::new(), db0: 0.0 },
        );
        self.sample_increments(rng, &mut inc);
        self.inc = inc;
        self.advance()
    }

    /// Advance with externally supplied increments (used for coupled paths).
    pub fn step_with(&mut self, inc: &Increments) -> Result<()> {
        self.inc.ou.copy_from_slice(&inc.ou);
        self.inc.db.copy_from_slice(&inc.db);
        self.inc.db0 = inc.db0;
        self.advance()
    }

    fn advance(&mut self) -> Result<()> {
        let lam = self.cfg.lambda;
        let lat = &self.lattice;
        for s in lat.representatives() {
            let nu = self.u[s] * self.decay[s]
                + self.m[s] * (lam * self.drift_w[s])
                + self.inc.ou[s] * lat.norm(s);
            self.u[s] = nu;
            self.u[lat.conj_index(s)] = nu.conj();
        }
        let n0_old = self.n0;
        self.n0 = self.engine.eval_into(&self.u, &mut self.m);
        self.h0 += lam * self.cfg.dt * 0.5 * (n0_old + self.n0) + self.inc.db0;
        self.steps += 1;
        self.t = self.steps as f64 * self.cfg.dt;
        let finite = self.h0.is_finite() && self.u.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite {
            return Err(Error::BlowUp { step: self.steps, time: self.t, seed: self.cfg.seed });
        }
        Ok(())
    }
}

/// One step from `state`. Builds a fresh integrator; use [`Stepper`] in loops.
pub fn step<R: Rng + ?Sized>(state: &SpectralField, cfg: &SimConfig, rng: &mut R) -> Result<SpectralField> {
    let mut st = Stepper::new(cfg, state.clone())?;
    st.step(rng)?;
    Ok(st.field())
}

/// Per-probe running sums.
struct ProbeState<'a> {
    phi: &'a TestFunction,
    /// `-|k|^2 phi_hat(-k)` per slot.
    lap: Vec<Complex64>,
    nl: f64,
    av: f64,
    b: f64,
    a: f64,
    c: f64,
}

impl<'a> ProbeState<'a> {
    fn new(phi: &'a TestFunction) -> Self {
        let lat = phi.lattice();
        let lap = (0..lat.len()).map(|s| phi.at_neg(s) * -(lat.norm(s).powi(2))).collect();
        Self { phi, lap, nl: 0.0, av: 0.0, b: 0.0, a: 0.0, c: 0.0 }
    }

    /// `(lambda N[u][phi], h[Laplacian phi], h[phi])` at the current state.
    fn instant(&self, st: &Stepper) -> (f64, f64, f64) {
        let lat = st.lattice();
        let (mut nl, mut lap, mut h) = (0.0, 0.0, 0.0);
        for s in lat.representatives() {
            let k = lat.norm(s);
            let hk = st.u[s] / k;
            let p = self.phi.at_neg(s);
            nl += (st.m[s] / k * p).re;
            lap += (hk * self.lap[s]).re;
            h += (hk * p).re;
        }
        let lam = st.cfg.lambda;
        (
            lam * (2.0 * nl + st.n0 * self.phi.zero),
            2.0 * lap,
            2.0 * h + st.h0 * self.phi.zero,
        )
    }

    fn noise(&self, st: &Stepper) -> f64 {
        let lat = st.lattice();
        let mut c = 0.0;
        for s in lat.representatives() {
            c += (st.inc.db[s] * self.phi.at_neg(s)).re;
        }
        2.0 * c + st.inc.db0 * self.phi.zero
    }
}

/// Simulate from the stationary white-noise law, with stream seeded by `cfg.seed`.
pub fn simulate(cfg: &SimConfig, phis: &[TestFunction]) -> Result<Trajectory> {
    let lattice = Arc::new(ModeLattice::new(cfg.cutoff_n)?);
    simulate_on(cfg, &lattice, phis)
}

pub fn simulate_on(cfg: &SimConfig, lattice: &Arc<ModeLattice>, phis: &[TestFunction]) -> Result<Trajectory> {
    cfg.validate()?;
    for phi in phis {
        if **phi.lattice() != **lattice {
            return Err(Error::LatticeMismatch { field: phi.lattice().cutoff(), requested: lattice.cutoff() });
        }
    }
    let mut rng: Stream = stream(cfg.seed);
    let init = sample_white_noise(lattice, &mut rng);
    let mut st = Stepper::new(cfg, init)?;
    let n_steps = cfg.n_steps();
    let stride = cfg.record_stride as u64;
    let n_rec = (n_steps / stride + 2) as usize;
    let mut traj = Trajectory {
        config: cfg.clone(),
        times: Vec::with_capacity(n_rec),
        snapshots: Vec::new(),
        zero_mode_series: Vec::with_capacity(n_rec),
        probes: phis
            .iter()
            .map(|p| ProbeSeries { id: p.id.clone(), ..Default::default() })
            .collect(),
    };
    let mut states: Vec<ProbeState> = phis.iter().map(ProbeState::new).collect();
    for ps in states.iter_mut() {
        let (nl, av, _) = ps.instant(&st);
        ps.nl = nl;
        ps.av = av;
    }
    let record = |st: &Stepper, states: &[ProbeState], traj: &mut Trajectory| {
        traj.times.push(st.time());
        traj.zero_mode_series.push(st.zero_mode());
        if cfg.keep_snapshots {
            traj.snapshots.push(st.field());
        }
        for (ps, out) in states.iter().zip(traj.probes.iter_mut()) {
            let (_, _, h) = ps.instant(st);
            out.h.push(h);
            out.b.push(ps.b);
            out.nonlin.push(ps.nl);
            if cfg.record_decomposition {
                out.a.push(ps.a);
                out.c.push(ps.c);
            }
        }
    };
    record(&st, &states, &mut traj);
    let half_dt = 0.5 * cfg.dt;
    for i in 1..=n_steps {
        st.step(&mut rng)?;
        for ps in states.iter_mut() {
            let (nl, av, _) = ps.instant(&st);
            ps.b += half_dt * (ps.nl + nl);
            ps.a += half_dt * 0.5 * (ps.av + av);
            ps.c += ps.noise(&st);
            ps.nl = nl;
            ps.av = av;
        }
        if i % stride == 0 || i == n_steps {
            record(&st, &states, &mut traj);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_guard() {
        let mut c = SimConfig::new(4, 1.0, 0.05, 1.0);
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("dt <= 0.5/N^2"), "{e}");
        c.allow_large_dt = true;
        assert!(c.validate().is_ok());
        assert!(SimConfig::new(2, 1.0, 0.1, 0.05).validate().is_err());
        assert!(SimConfig::new(2, -1.0, 0.1, 1.0).validate().is_err());
    }

    #[test]
    fn linear_b_vanishes() {
        let mut cfg = SimConfig::new(2, 0.0, 0.05, 2.0);
        cfg.seed = 4;
        let lat = Arc::new(ModeLattice::new(2).unwrap());
        let tr = simulate(&cfg, &[TestFunction::e0(lat)]).unwrap();
        assert!(tr.b_series("e0").unwrap().iter().all(|&b| b == 0.0));
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(tr.times.len(), 41);
        assert!((tr.horizon() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn replay_and_reality() {
        let mut cfg = SimConfig::new(3, 1.0, 0.02, 0.5);
        cfg.seed = 11;
        cfg.keep_snapshots = true;
        cfg.record_stride = 5;
        let a = simulate(&cfg, &[]).unwrap();
        let b = simulate(&cfg, &[]).unwrap();
        assert_eq!(a, b);
        assert!(a.snapshots.iter().all(|f| f.is_real() && f.is_finite()));
        assert_eq!(a.snapshots.len(), a.times.len());
        let lat = a.snapshots[0].lattice().clone();
        let f = a.snapshots[0].clone();
        let s1 = step(&f, &cfg, &mut stream(1)).unwrap();
        let s2 = step(&f, &cfg, &mut stream(1)).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.lattice().len(), lat.len());
    }

    #[test]
    fn blow_up_is_reported() {
        let mut cfg = SimConfig::new(2, 1e200, 0.1, 1.0);
        cfg.allow_large_dt = true;
        cfg.seed = 99;
        match simulate(&cfg, &[]) {
            Err(Error::BlowUp { seed, .. }) => assert_eq!(seed, 99),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
