use std::collections::HashMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::network::{Element, Ports, Switch, SwitchedNetwork, GROUND};
use super::waveform::LoWaveform;
use crate::error::{Error, Result};
use crate::netcore::{omega, C64};

/// Largest number of LO periods searched for a common RF/LO period.
pub const MAX_WINDOW_PERIODS: usize = 4096;

/// Smallest number of LO periods `M` such that `M f_rf / f_lo` is an integer.
pub fn commensurate_window(f_rf: f64, f_lo: f64) -> Result<usize> {
    if !(f_rf > 0.0 && f_lo > 0.0) {
        return Err(Error::param("f_rf", "frequencies must be positive"));
    }
    let r = f_rf / f_lo;
    (1..=MAX_WINDOW_PERIODS)
        .find(|&m| {
            let x = r * m as f64;
            (x - x.round()).abs() < 1e-9 * x.max(1.0)
        })
        .ok_or_else(|| {
            Error::NonCommensurate(format!(
                "f_rf / f_lo = {r} has no common period within {MAX_WINDOW_PERIODS} LO periods"
            ))
        })
}

fn stamp(m: &mut DMatrix<f64>, a: usize, b: usize, g: f64) {
    if a != GROUND {
        m[(a - 1, a - 1)] += g;
    }
    if b != GROUND {
        m[(b - 1, b - 1)] += g;
    }
    if a != GROUND && b != GROUND {
        m[(a - 1, b - 1)] -= g;
        m[(b - 1, a - 1)] -= g;
    }
}

fn stamp_vccs(m: &mut DMatrix<f64>, p: usize, n: usize, cp: usize, cn: usize, gm: f64) {
    for (row, rs) in [(p, 1.0), (n, -1.0)] {
        for (col, cs) in [(cp, 1.0), (cn, -1.0)] {
            if row != GROUND && col != GROUND {
                m[(row - 1, col - 1)] += rs * cs * gm;
            }
        }
    }
}

fn inject(rhs: &mut DVector<f64>, node: usize, i: f64) {
    if node != GROUND {
        rhs[node - 1] += i;
    }
}

struct Cap {
    a: usize,
    b: usize,
    c: f64,
    v: f64,
    i: f64,
}

struct Ind {
    a: usize,
    b: usize,
    l: f64,
    v: f64,
    i: f64,
}

struct LineState {
    p1: usize,
    p2: usize,
    z0: f64,
    delay: f64,
    atten: f64,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl LineState {
    /// Incident wave at time index position `x` (in steps) from a ring buffer.
    fn sample(buf: &[f64], x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let j = x.floor();
        let frac = x - j;
        let j = j as usize;
        let len = buf.len();
        let lo = buf[j % len];
        let hi = buf[(j + 1) % len];
        lo + frac * (hi - lo)
    }
}

/// Fixed-step trapezoidal integrator. The first step is backward Euler so an
/// arbitrary initial state does not excite the trapezoidal rule's undamped mode.
struct Engine<'a> {
    net: &'a SwitchedNetwork,
    lo: &'a LoWaveform,
    h: f64,
    w_drive: f64,
    base_be: DMatrix<f64>,
    lus: Vec<LU<f64, Dyn, Dyn>>,
    lu_of_step: Vec<usize>,
    caps: Vec<Cap>,
    inds: Vec<Ind>,
    lines: Vec<LineState>,
    v: DVector<f64>,
    rhs: DVector<f64>,
    step: usize,
}

impl<'a> Engine<'a> {
    fn new(net: &'a SwitchedNetwork, lo: &'a LoWaveform, spp: usize, f_drive: f64) -> Result<Self> {
        let n = net.n_nodes();
        if n == 0 {
            return Err(Error::param("network", "has no nodes"));
        }
        for s in &net.switches {
            if s.phase >= lo.n_phases {
                return Err(Error::param("phase", format!("switch phase {} has no LO", s.phase)));
            }
        }
        let h = lo.period() / spp as f64;
        let mut trap = DMatrix::zeros(n, n);
        let mut be = DMatrix::zeros(n, n);
        let (mut caps, mut inds, mut lines) = (Vec::new(), Vec::new(), Vec::new());
        for e in &net.elements {
            match *e {
                Element::Resistor { a, b, g } => {
                    stamp(&mut trap, a, b, g);
                    stamp(&mut be, a, b, g);
                }
                Element::Capacitor { a, b, c } => {
                    stamp(&mut trap, a, b, 2.0 * c / h);
                    stamp(&mut be, a, b, c / h);
                    caps.push(Cap { a, b, c, v: 0.0, i: 0.0 });
                }
                Element::Inductor { a, b, l } => {
                    stamp(&mut trap, a, b, h / (2.0 * l));
                    stamp(&mut be, a, b, h / l);
                    inds.push(Ind { a, b, l, v: 0.0, i: 0.0 });
                }
                Element::Line { p1, p2, z0, delay, atten } => {
                    if delay < h {
                        return Err(Error::param(
                            "steps_per_period",
                            "line delay is shorter than one time step",
                        ));
                    }
                    for p in [p1, p2] {
                        stamp(&mut trap, p, GROUND, 1.0 / z0);
                        stamp(&mut be, p, GROUND, 1.0 / z0);
                    }
                    let len = (delay / h).ceil() as usize + 3;
                    lines.push(LineState { p1, p2, z0, delay, atten, w1: vec![0.0; len], w2: vec![0.0; len] });
                }
                Element::Vccs { p, n: nn, cp, cn, gm } => {
                    stamp_vccs(&mut trap, p, nn, cp, cn, gm);
                    stamp_vccs(&mut be, p, nn, cp, cn, gm);
                }
            }
        }

        let mut lus = Vec::new();
        let mut lu_of_step = Vec::with_capacity(spp);
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for k in 0..spp {
            let t = (k as f64 + 0.5) * h;
            let gs: Vec<f64> = net.switches.iter().map(|s| s.conductance(lo.state(s.phase, t))).collect();
            let key: Vec<u64> = gs.iter().map(|g| g.to_bits()).collect();
            let idx = match seen.get(&key) {
                Some(&i) => i,
                None => {
                    let mut m = trap.clone();
                    for (s, g) in net.switches.iter().zip(&gs) {
                        stamp(&mut m, s.a, s.b, *g);
                    }
                    let lu = m.lu();
                    if !lu.is_invertible() {
                        return Err(Error::SingularNodalMatrix(k));
                    }
                    lus.push(lu);
                    seen.insert(key, lus.len() - 1);
                    lus.len() - 1
                }
            };
            lu_of_step.push(idx);
        }

        Ok(Engine {
            net,
            lo,
            h,
            w_drive: omega(f_drive),
            base_be: be,
            lus,
            lu_of_step,
            caps,
            inds,
            lines,
            v: DVector::zeros(n),
            rhs: DVector::zeros(n),
            step: 0,
        })
    }

    fn time(&self, step: usize) -> f64 {
        (step as f64 + 0.5) * self.h
    }

    fn volt(&self, node: usize) -> f64 {
        if node == GROUND {
            0.0
        } else {
            self.v[node - 1]
        }
    }

    fn set_initial(&mut self, node_voltages: &[f64]) {
        for (i, v) in node_voltages.iter().skip(1).enumerate() {
            self.v[i] = *v;
        }
        let get = |n: usize| if n == GROUND { 0.0 } else { node_voltages[n] };
        for c in &mut self.caps {
            c.v = get(c.a) - get(c.b);
        }
        for l in &mut self.inds {
            l.v = get(l.a) - get(l.b);
        }
    }

    fn energy(&self) -> f64 {
        let ec: f64 = self.caps.iter().map(|c| 0.5 * c.c * c.v * c.v).sum();
        let el: f64 = self.inds.iter().map(|l| 0.5 * l.l * l.i * l.i).sum();
        ec + el
    }

    fn advance(&mut self) -> Result<()> {
        let t = self.time(self.step);
        let first = self.step == 0;
        let h = self.h;
        self.rhs.fill(0.0);
        for &(node, amp) in &self.net.drive {
            let i = (amp * C64::from_polar(1.0, self.w_drive * t)).re;
            inject(&mut self.rhs, node, i);
        }
        for c in &self.caps {
            let ieq = if first { c.c / h * c.v } else { 2.0 * c.c / h * c.v + c.i };
            inject(&mut self.rhs, c.a, ieq);
            inject(&mut self.rhs, c.b, -ieq);
        }
        for l in &self.inds {
            let j = if first { l.i } else { l.i + h / (2.0 * l.l) * l.v };
            inject(&mut self.rhs, l.a, -j);
            inject(&mut self.rhs, l.b, j);
        }
        let mut incident = Vec::with_capacity(self.lines.len());
        for ln in &self.lines {
            let x = self.step as f64 - ln.delay / h;
            let e1 = ln.atten * LineState::sample(&ln.w2, x);
            let e2 = ln.atten * LineState::sample(&ln.w1, x);
            inject(&mut self.rhs, ln.p1, e1 / ln.z0);
            inject(&mut self.rhs, ln.p2, e2 / ln.z0);
            incident.push((e1, e2));
        }

        let mut x = self.rhs.clone();
        let solved = if first {
            let mut m = self.base_be.clone();
            for s in &self.net.switches {
                stamp(&mut m, s.a, s.b, s.conductance(self.lo.state(s.phase, t)));
            }
            m.lu().solve_mut(&mut x)
        } else {
            let k = self.step % self.lu_of_step.len();
            self.lus[self.lu_of_step[k]].solve_mut(&mut x)
        };
        if !solved {
            return Err(Error::SingularNodalMatrix(self.step));
        }
        self.v = x;

        for idx in 0..self.caps.len() {
            let (a, b) = (self.caps[idx].a, self.caps[idx].b);
            let vn = self.volt(a) - self.volt(b);
            let c = &mut self.caps[idx];
            c.i = if first { c.c / h * (vn - c.v) } else { 2.0 * c.c / h * (vn - c.v) - c.i };
            c.v = vn;
        }
        for idx in 0..self.inds.len() {
            let (a, b) = (self.inds[idx].a, self.inds[idx].b);
            let vn = self.volt(a) - self.volt(b);
            let l = &mut self.inds[idx];
            l.i += if first { h / l.l * vn } else { h / (2.0 * l.l) * (vn + l.v) };
            l.v = vn;
        }
        for (idx, (e1, e2)) in incident.into_iter().enumerate() {
            let (v1, v2) = (self.volt(self.lines[idx].p1), self.volt(self.lines[idx].p2));
            let ln = &mut self.lines[idx];
            let len = ln.w1.len();
            ln.w1[self.step % len] = 2.0 * v1 - e1;
            ln.w2[self.step % len] = 2.0 * v2 - e2;
        }
        self.step += 1;
        Ok(())
    }
}

/// One steady-state window of a periodically driven switched network.
#[derive(Debug, Clone)]
pub struct PssTrace {
    pub times: Vec<f64>,
    pub f_rf: f64,
    pub steps_per_period: usize,
    /// LO periods in the window; also a whole number of RF periods.
    pub window_periods: usize,
    /// Node voltages, `voltages[node][step]`; node 0 is ground.
    pub voltages: Vec<Vec<f64>>,
    pub inductor_currents: Vec<Vec<f64>>,
    /// Current delivered by the antenna into the input node.
    pub source_current: Vec<f64>,
    /// Relative RMS change between the last two windows.
    pub residual: f64,
    /// LO periods simulated in total.
    pub periods: usize,
    pub names: Vec<String>,
    pub switches: Vec<Switch>,
    pub lo: LoWaveform,
    pub ports: Ports,
}

impl PssTrace {
    /// Complex amplitude of `x` at `f`: `x(t) = Re(X exp(j w t))`.
    pub fn dft(&self, x: &[f64], f: f64) -> C64 {
        let w = omega(f);
        let sum: C64 = x.iter().zip(&self.times).map(|(v, t)| *v * C64::from_polar(1.0, -w * t)).sum();
        sum * (2.0 / x.len() as f64)
    }

    pub fn mean_square(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }

    /// Writes `time_s` followed by every node voltage and inductor current.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["time_s".to_string()];
        header.extend(self.names.iter().skip(1).map(|n| format!("v_{n}")));
        header.extend((0..self.inductor_currents.len()).map(|k| format!("i_l{k}")));
        writeln!(w, "{}", header.join(","))?;
        for (i, t) in self.times.iter().enumerate() {
            write!(w, "{t:e}")?;
            for v in self.voltages.iter().skip(1) {
                write!(w, ",{:e}", v[i])?;
            }
            for c in &self.inductor_currents {
                write!(w, ",{:e}", c[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn rms_delta(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        for (p, q) in x.iter().zip(y) {
            num += (p - q) * (p - q);
            den += p * p;
        }
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Periodic steady state by brute-force integration, one common RF/LO
/// window at a time, until consecutive windows agree within `tol`.
pub fn simulate_pss(
    net: &SwitchedNetwork,
    lo: &LoWaveform,
    f_rf: f64,
    steps_per_period: usize,
    max_periods: usize,
    tol: f64,
) -> Result<PssTrace> {
    if steps_per_period < 256 {
        return Err(Error::param("steps_per_period", "must be at least 256"));
    }
    let m = commensurate_window(f_rf, lo.f_lo)?;
    let mut eng = Engine::new(net, lo, steps_per_period, f_rf)?;
    let n = net.n_nodes();
    let window = m * steps_per_period;
    let mut prev: Option<Vec<Vec<f64>>> = None;
    let mut periods = 0;
    let mut residual = f64::INFINITY;
    loop {
        let start = eng.step;
        let mut volts = vec![vec![0.0; window]; n + 1];
        let mut currents = vec![vec![0.0; window]; eng.inds.len()];
        for i in 0..window {
            eng.advance()?;
            for node in 1..=n {
                volts[node][i] = eng.v[node - 1];
            }
            for (k, l) in eng.inds.iter().enumerate() {
                currents[k][i] = l.i;
            }
        }
        periods += m;
        if let Some(p) = &prev {
            residual = rms_delta(&volts, p);
            if residual < tol {
                let times: Vec<f64> = (start..start + window).map(|s| eng.time(s)).collect();
                let ports = net.ports.clone();
                let source_current = if ports.input == GROUND || net.drive.is_empty() {
                    vec![0.0; window]
                } else {
                    let w = omega(f_rf);
                    let drive: C64 = net.drive.iter().filter(|d| d.0 == ports.input).map(|d| d.1).sum();
                    times
                        .iter()
                        .zip(&volts[ports.input])
                        .map(|(t, v)| (drive * C64::from_polar(1.0, w * t)).re - v / ports.r_s)
                        .collect()
                };
                return Ok(PssTrace {
                    times,
                    f_rf,
                    steps_per_period,
                    window_periods: m,
                    voltages: volts,
                    inductor_currents: currents,
                    source_current,
                    residual,
                    periods,
                    names: net.names.clone(),
                    switches: net.switches.clone(),
                    lo: lo.clone(),
                    ports,
                });
            }
        }
        if periods >= max_periods {
            return Err(Error::NonConvergence { periods, residual });
        }
        prev = Some(volts);
    }
}

/// Free-running transient from given node voltages.
#[derive(Debug, Clone)]
pub struct Transient {
    pub times: Vec<f64>,
    /// `voltages[node][step]`.
    pub voltages: Vec<Vec<f64>>,
    /// Stored energy before the first step and after every step.
    pub energy: Vec<f64>,
}

pub fn transient(
    net: &SwitchedNetwork,
    lo: &LoWaveform,
    f_drive: f64,
    steps_per_period: usize,
    n_steps: usize,
    initial: &[f64],
) -> Result<Transient> {
    if initial.len() != net.names.len() {
        return Err(Error::param("initial", "needs one voltage per node, ground included"));
    }
    let mut eng = Engine::new(net, lo, steps_per_period, f_drive)?;
    eng.set_initial(initial);
    let n = net.n_nodes();
    let mut out = Transient {
        times: Vec::with_capacity(n_steps),
        voltages: vec![Vec::with_capacity(n_steps); n + 1],
        energy: vec![eng.energy()],
    };
    for _ in 0..n_steps {
        eng.advance()?;
        out.times.push(eng.time(eng.step - 1));
        out.voltages[0].push(0.0);
        for node in 1..=n {
            out.voltages[node].push(eng.v[node - 1]);
        }
        out.energy.push(eng.energy());
    }
    Ok(out)
}
