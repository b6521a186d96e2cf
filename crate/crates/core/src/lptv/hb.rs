use nalgebra::{DMatrix, DVector};

use super::network::{Element, Ports, SwitchedNetwork, GROUND};
use super::waveform::LoWaveform;
use crate::error::{Error, Result};
use crate::netcore::{omega, C64, J};

/// Node phasors at `f0 + k f_lo` for `k = -K..=K`.
#[derive(Debug, Clone)]
pub struct HarmonicResponse {
    pub f0: f64,
    pub f_lo: f64,
    pub n_harmonics: usize,
    /// `phasors[k + K][node]`; node 0 is ground.
    pub phasors: Vec<Vec<C64>>,
    pub ports: Ports,
}

impl HarmonicResponse {
    /// Signed frequency of sideband `k`.
    pub fn frequency(&self, k: i64) -> f64 {
        self.f0 + k as f64 * self.f_lo
    }

    /// Real-signal phasor of `node` at `f >= 0`, zero when no sideband lands there.
    pub fn at(&self, node: usize, f: f64) -> C64 {
        let k_max = self.n_harmonics as i64;
        let tol = 1e-9 * self.f_lo;
        for k in -k_max..=k_max {
            let fk = self.frequency(k);
            let row = &self.phasors[(k + k_max) as usize];
            if (fk - f).abs() < tol {
                return row[node];
            }
            if (fk + f).abs() < tol {
                return row[node].conj();
            }
        }
        C64::new(0.0, 0.0)
    }
}

fn add(m: &mut DMatrix<C64>, row: Option<usize>, col: Option<usize>, y: C64) {
    if let (Some(r), Some(c)) = (row, col) {
        m[(r, c)] += y;
    }
}

/// Conversion-matrix solve of the periodically switched network: switch
/// conductances are expanded in LO harmonics and the sideband system is
/// truncated at `|k| <= n_harmonics`. Injections act at `f0`.
pub fn harmonic_transfer(
    net: &SwitchedNetwork,
    lo: &LoWaveform,
    f0: f64,
    n_harmonics: usize,
) -> Result<HarmonicResponse> {
    if n_harmonics < 5 {
        return Err(Error::param("n_harmonics", "must be at least 5"));
    }
    let n = net.n_nodes();
    let kk = n_harmonics as i64;
    let nk = 2 * n_harmonics + 1;
    let size = n * nk;
    let idx = |k: i64, node: usize| -> Option<usize> {
        if node == GROUND || k.abs() > kk {
            None
        } else {
            Some((k + kk) as usize * n + node - 1)
        }
    };
    let mut y = DMatrix::<C64>::zeros(size, size);
    let branch = |y: &mut DMatrix<C64>, ka: i64, kb: i64, a: usize, b: usize, g: C64| {
        add(y, idx(ka, a), idx(kb, a), g);
        add(y, idx(ka, b), idx(kb, b), g);
        add(y, idx(ka, a), idx(kb, b), -g);
        add(y, idx(ka, b), idx(kb, a), -g);
    };

    for k in -kk..=kk {
        let w = omega(f0 + k as f64 * lo.f_lo);
        for e in &net.elements {
            match *e {
                Element::Resistor { a, b, g } => branch(&mut y, k, k, a, b, C64::new(g, 0.0)),
                Element::Capacitor { a, b, c } => branch(&mut y, k, k, a, b, J * w * c),
                Element::Inductor { a, b, l } => branch(&mut y, k, k, a, b, C64::new(1.0, 0.0) / (J * w * l)),
                Element::Line { p1, p2, z0, delay, atten } => {
                    let gl = C64::new(-atten.ln(), w * delay);
                    let (sh, ch) = (gl.sinh(), gl.cosh());
                    let y11 = ch / sh / z0;
                    let y12 = -C64::new(1.0, 0.0) / sh / z0;
                    if !(y11.is_finite() && y12.is_finite()) {
                        return Err(Error::SingularHarmonicSystem);
                    }
                    add(&mut y, idx(k, p1), idx(k, p1), y11);
                    add(&mut y, idx(k, p2), idx(k, p2), y11);
                    add(&mut y, idx(k, p1), idx(k, p2), y12);
                    add(&mut y, idx(k, p2), idx(k, p1), y12);
                }
                Element::Vccs { p, n: nn, cp, cn, gm } => {
                    for (row, rs) in [(p, 1.0), (nn, -1.0)] {
                        for (col, cs) in [(cp, 1.0), (cn, -1.0)] {
                            add(&mut y, idx(k, row), idx(k, col), C64::new(rs * cs * gm, 0.0));
                        }
                    }
                }
            }
        }
    }

    for s in &net.switches {
        let (g_on, g_off) = (1.0 / s.r_on, 1.0 / s.r_off);
        for m in -2 * kk..=2 * kk {
            let mut g = lo.fourier(s.phase, m) * (g_on - g_off);
            if m == 0 {
                g += g_off;
            }
            if g.norm() == 0.0 {
                continue;
            }
            for k in -kk..=kk {
                let src = k - m;
                if src.abs() <= kk {
                    branch(&mut y, k, src, s.a, s.b, g);
                }
            }
        }
    }

    let mut rhs = DVector::<C64>::zeros(size);
    for &(node, amp) in &net.drive {
        if let Some(i) = idx(0, node) {
            rhs[i] += amp;
        }
    }
    let lu = y.lu();
    let x = lu.solve(&rhs).ok_or(Error::SingularHarmonicSystem)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularHarmonicSystem);
    }
    let phasors = (-kk..=kk)
        .map(|k| {
            (0..=n)
                .map(|node| idx(k, node).map_or(C64::new(0.0, 0.0), |i| x[i]))
                .collect()
        })
        .collect();
    Ok(HarmonicResponse {
        f0,
        f_lo: lo.f_lo,
        n_harmonics,
        phasors,
        ports: net.ports.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lptv::measure_zin;
    use crate::rxmodel::{Architecture, ReceiverSpec};

    fn miller(duty: f64) -> (SwitchedNetwork, LoWaveform, ReceiverSpec) {
        let mut spec = ReceiverSpec::nominal(Architecture::MillerMatched, 30e9);
        spec.duty = duty;
        let net = SwitchedNetwork::from_spec(&spec, 1.0).unwrap();
        let lo = LoWaveform::from_spec(&spec).unwrap();
        (net, lo, spec)
    }

    #[test]
    fn truncation_converges() {
        let (net, lo, _) = miller(0.25);
        let f = 31e9;
        let z: Vec<C64> = [5, 11, 21, 41]
            .iter()
            .map(|&k| measure_zin(&harmonic_transfer(&net, &lo, f, k).unwrap(), f))
            .collect();
        let d: Vec<f64> = z.windows(2).map(|w| (w[1] - w[0]).norm() / w[1].norm()).collect();
        assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
        assert!(d[2] < 2e-3, "{d:?}");
    }

    #[test]
    fn always_on_switches_are_time_invariant() {
        let (net, _, spec) = miller(0.25);
        let lo = LoWaveform::new(30e9, 1.0, 4, 0.0).unwrap();
        let f = 31e9;
        let z = measure_zin(&harmonic_transfer(&net, &lo, f, 5).unwrap(), f);
        let want = (spec.baseband_impedance(f) + spec.r_sw) / 4.0;
        assert!((z - want).norm() < 1e-6 * want.norm(), "{z} vs {want}");
    }

    #[test]
    fn too_few_harmonics_rejected() {
        let (net, lo, _) = miller(0.25);
        assert!(harmonic_transfer(&net, &lo, 31e9, 4).is_err());
    }
}
