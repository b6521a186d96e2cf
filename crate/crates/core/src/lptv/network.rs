use crate::error::{Error, Result};
use crate::matchsynth::MatchSpec;
use crate::netcore::{omega, C64};
use crate::rxmodel::{Architecture, ReceiverSpec};

/// Amplifier gain used when the spec asks for an ideal virtual ground.
pub const IDEAL_AMP_GAIN: f64 = 1e5;

pub const GROUND: usize = 0;

/// Output conductance of the amplifier model in siemens.
const AMP_OUTPUT_G: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Resistor { a: usize, b: usize, g: f64 },
    Capacitor { a: usize, b: usize, c: f64 },
    Inductor { a: usize, b: usize, l: f64 },
    /// Two ground-referenced ports joined by a line with frequency-flat loss.
    Line { p1: usize, p2: usize, z0: f64, delay: f64, atten: f64 },
    /// Current `gm (v_cp - v_cn)` leaving `p` and entering `n`.
    Vccs { p: usize, n: usize, cp: usize, cn: usize, gm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub a: usize,
    pub b: usize,
    pub phase: usize,
    pub r_on: f64,
    pub r_off: f64,
}

impl Switch {
    pub fn conductance(&self, state: f64) -> f64 {
        let (g_on, g_off) = (1.0 / self.r_on, 1.0 / self.r_off);
        g_off + state * (g_on - g_off)
    }
}

/// Nodes shared by the measurement routines.
#[derive(Debug, Clone, PartialEq)]
pub struct Ports {
    pub input: usize,
    pub r_s: f64,
    pub emf: f64,
    pub bb: [usize; 4],
    pub out: [usize; 4],
}

/// Linear network with periodically switched conductances.
///
/// Node 0 is ground. `drive` holds current phasors injected at the analysis
/// frequency; the antenna is a Norton source `emf / r_s` with `1 / r_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedNetwork {
    pub names: Vec<String>,
    pub elements: Vec<Element>,
    pub switches: Vec<Switch>,
    pub drive: Vec<(usize, C64)>,
    pub ports: Ports,
}

impl Default for SwitchedNetwork {
    fn default() -> Self {
        SwitchedNetwork {
            names: vec!["gnd".into()],
            elements: Vec::new(),
            switches: Vec::new(),
            drive: Vec::new(),
            ports: Ports {
                input: GROUND,
                r_s: f64::INFINITY,
                emf: 0.0,
                bb: [GROUND; 4],
                out: [GROUND; 4],
            },
        }
    }
}

impl SwitchedNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of non-ground nodes.
    pub fn n_nodes(&self) -> usize {
        self.names.len() - 1
    }

    pub fn node(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn resistor(&mut self, a: usize, b: usize, r: f64) {
        self.elements.push(Element::Resistor { a, b, g: 1.0 / r });
    }

    pub fn capacitor(&mut self, a: usize, b: usize, c: f64) {
        self.elements.push(Element::Capacitor { a, b, c });
    }

    pub fn inductor(&mut self, a: usize, b: usize, l: f64) {
        self.elements.push(Element::Inductor { a, b, l });
    }

    pub fn switch(&mut self, a: usize, b: usize, phase: usize, r_on: f64, r_off: f64) {
        self.switches.push(Switch { a, b, phase, r_on, r_off });
    }

    /// Antenna: Norton equivalent of `emf` behind `r_s` at `node`.
    pub fn source(&mut self, node: usize, emf: f64, r_s: f64) {
        self.resistor(node, GROUND, r_s);
        self.drive.push((node, C64::new(emf / r_s, 0.0)));
        self.ports.input = node;
        self.ports.r_s = r_s;
        self.ports.emf = emf;
    }

    /// Same network with every injection removed.
    pub fn source_off(&self) -> Self {
        let mut n = self.clone();
        n.drive.clear();
        n
    }

    /// Builds the four-path receiver of `spec`, driven by `emf`.
    pub fn from_spec(spec: &ReceiverSpec, emf: f64) -> Result<Self> {
        spec.validate()?;
        let mut net = SwitchedNetwork::new();
        let input = net.node("in");
        net.source(input, emf, spec.r_s);

        let rf: [usize; 4] = match spec.architecture {
            Architecture::MillerMatched => [input; 4],
            Architecture::ShuntResistor => {
                net.resistor(input, GROUND, spec.r_shunt);
                [input; 4]
            }
            Architecture::PerPathResistor => {
                let mut rf = [GROUND; 4];
                for (p, node) in rf.iter_mut().enumerate() {
                    *node = net.node(format!("m{p}"));
                    if spec.r_per_path > 0.0 {
                        net.resistor(input, *node, spec.r_per_path);
                    } else {
                        net.resistor(input, *node, 1e-6);
                    }
                }
                rf
            }
            _ => {
                let m = spec.matching.as_ref().ok_or(Error::MissingMatch(spec.architecture.name()))?;
                let d_i = net.node("dI");
                let d_q = net.node("dQ");
                for d in [d_i, d_q] {
                    net.branch(m, input, d);
                }
                [d_i, d_q, d_i, d_q]
            }
        };

        let a = if spec.a_ol.is_finite() { spec.a_ol } else { IDEAL_AMP_GAIN };
        for p in 0..4 {
            let bb = net.node(format!("bb{p}"));
            let out = net.node(format!("out{p}"));
            net.switch(rf[p], bb, p, spec.r_sw, spec.r_off);
            net.capacitor(bb, GROUND, spec.c_bb);
            net.resistor(bb, out, spec.r_f);
            // Output stage: stiff conductance driven by -A v_bb, so R_f barely loads it.
            net.resistor(out, GROUND, 1.0 / AMP_OUTPUT_G);
            if let Some(fp) = spec.amp_pole_hz {
                net.capacitor(out, GROUND, AMP_OUTPUT_G / omega(fp));
            }
            net.elements.push(Element::Vccs { p: out, n: GROUND, cp: bb, cn: GROUND, gm: a * AMP_OUTPUT_G });
            net.ports.bb[p] = bb;
            net.ports.out[p] = out;
        }
        Ok(net)
    }

    fn branch(&mut self, m: &MatchSpec, input: usize, drain: usize) {
        match *m {
            MatchSpec::QuarterWave { z0, .. } => {
                let line = m.line().expect("quarter wave");
                self.elements.push(Element::Line {
                    p1: input,
                    p2: drain,
                    z0,
                    delay: line.delay(),
                    atten: (-line.attenuation_np()).exp(),
                });
            }
            MatchSpec::LMatch { l_ser, c_sh, .. } => {
                self.capacitor(input, GROUND, c_sh);
                let esr = m.inductor_esr();
                if esr > 0.0 {
                    let mid = self.node(format!("esr_{drain}"));
                    self.inductor(input, mid, l_ser);
                    self.resistor(mid, drain, esr);
                } else {
                    self.inductor(input, drain, l_ser);
                }
            }
            MatchSpec::TunableLMatch { l_ser, c_sh, c_ser, .. } => {
                self.capacitor(input, GROUND, c_sh);
                let mid = self.node(format!("lc_{drain}"));
                let esr = m.inductor_esr();
                if esr > 0.0 {
                    let e = self.node(format!("esr_{drain}"));
                    self.inductor(input, e, l_ser);
                    self.resistor(e, mid, esr);
                } else {
                    self.inductor(input, mid, l_ser);
                }
                self.capacitor(mid, drain, c_ser);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts_by_architecture() {
        let miller = ReceiverSpec::nominal(Architecture::MillerMatched, 30e9);
        assert_eq!(SwitchedNetwork::from_spec(&miller, 1.0).unwrap().n_nodes(), 9);
        let qw = ReceiverSpec::nominal_matched(Architecture::QuarterWaveDivider, 30e9).unwrap();
        let net = SwitchedNetwork::from_spec(&qw, 1.0).unwrap();
        assert_eq!(net.n_nodes(), 11);
        assert_eq!(net.switches[1].a, 3);
        let tun = ReceiverSpec::nominal_matched(Architecture::TunableLMatch, 30e9).unwrap();
        assert_eq!(SwitchedNetwork::from_spec(&tun, 1.0).unwrap().n_nodes(), 13);
    }

    #[test]
    fn missing_match_is_rejected() {
        let spec = ReceiverSpec::nominal(Architecture::LMatch, 30e9);
        assert!(SwitchedNetwork::from_spec(&spec, 1.0).is_err());
    }
}
