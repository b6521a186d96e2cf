//! Complex impedance arithmetic and two-port chain (ABCD) matrices.
//!
//! Everything here works in SI units with frequency in Hz. A [`TwoPort`] is
//! the chain matrix of one element at one frequency; networks are built by
//! [`cascade`] and evaluated against a [`Termination`].

use std::f64::consts::{LN_10, PI};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const J: C64 = C64::new(0.0, 1.0);

/// Angular frequency for `f` in Hz.
#[inline]
pub fn omega(f: f64) -> f64 {
    2.0 * PI * f
}

/// Sorted, duplicate-free list of positive frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("grid", "frequency grid is empty"));
        }
        for (i, &f) in points.iter().enumerate() {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::param("grid", format!("point {i} ({f} Hz) is not positive")));
            }
            if i > 0 && f <= points[i - 1] {
                return Err(Error::param(
                    "grid",
                    format!("points must be strictly increasing (index {i})"),
                ));
            }
        }
        Ok(Self { points })
    }

    /// `n` evenly spaced points from `start` to `stop` inclusive.
    pub fn linear(start: f64, stop: f64, n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::param("grid", "need at least one point")),
            1 => Self::new(vec![start]),
            _ => {
                let step = (stop - start) / (n - 1) as f64;
                Self::new((0..n).map(|i| start + step * i as f64).collect())
            }
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().copied()
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(g: FrequencyGrid) -> Self {
        g.points
    }
}

/// Passive one-port load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    impedance: C64,
}

impl Termination {
    pub fn new(impedance: C64) -> Result<Self> {
        if impedance.re < 0.0 || impedance.re.is_nan() {
            return Err(Error::param(
                "termination",
                format!("real part {} is negative", impedance.re),
            ));
        }
        Ok(Self { impedance })
    }

    pub fn resistor(r: f64) -> Result<Self> {
        Self::new(C64::new(r, 0.0))
    }

    pub fn open() -> Self {
        Self {
            impedance: C64::new(f64::INFINITY, 0.0),
        }
    }

    pub fn impedance(&self) -> C64 {
        self.impedance
    }

    pub fn is_open(&self) -> bool {
        !self.impedance.is_finite()
    }
}

/// Chain parameters `[[a, b], [c, d]]` at a single frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPort {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl TwoPort {
    pub const IDENTITY: TwoPort = TwoPort {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
        c: C64::new(0.0, 0.0),
        d: C64::new(1.0, 0.0),
    };

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &TwoPort) -> TwoPort {
        TwoPort {
            a: self.a * next.a + self.b * next.c,
            b: self.a * next.b + self.b * next.d,
            c: self.c * next.a + self.d * next.c,
            d: self.c * next.b + self.d * next.d,
        }
    }

    /// The same network driven from port 2.
    pub fn reversed(&self) -> TwoPort {
        // For a reciprocal network, swapping ports exchanges a and d.
        let det = self.det();
        TwoPort {
            a: self.d / det,
            b: self.b / det,
            c: self.c / det,
            d: self.a / det,
        }
    }

    /// Two identical copies of this network connected in parallel at both ports.
    pub fn paralleled(&self, copies: f64) -> TwoPort {
        TwoPort {
            a: self.a,
            b: self.b / copies,
            c: self.c * copies,
            d: self.d,
        }
    }

    /// Port-2 voltage over port-1 voltage when port 2 is loaded by `load`.
    pub fn voltage_gain(&self, load: &Termination) -> Result<C64> {
        let den = if load.is_open() {
            self.a
        } else {
            self.a + self.b / load.impedance()
        };
        if den.norm() == 0.0 {
            return Err(Error::OpenCircuitResonance);
        }
        Ok(C64::new(1.0, 0.0) / den)
    }
}

pub fn series_element(z: C64) -> TwoPort {
    TwoPort {
        b: z,
        ..TwoPort::IDENTITY
    }
}

pub fn shunt_element(y: C64) -> TwoPort {
    TwoPort {
        c: y,
        ..TwoPort::IDENTITY
    }
}

/// Matrix product of `ports` in order.
pub fn cascade<'a, I>(ports: I) -> TwoPort
where
    I: IntoIterator<Item = &'a TwoPort>,
{
    ports
        .into_iter()
        .fold(TwoPort::IDENTITY, |acc, p| acc.then(p))
}

/// `(a Z_L + b) / (c Z_L + d)`.
pub fn input_impedance(port: &TwoPort, load: &Termination) -> Result<C64> {
    let (num, den) = if load.is_open() {
        (port.a, port.c)
    } else {
        let zl = load.impedance();
        (port.a * zl + port.b, port.c * zl + port.d)
    };
    if den.norm() <= 1e-300 {
        return Err(Error::OpenCircuitResonance);
    }
    Ok(num / den)
}

/// Reflection coefficient of `z_in` against a real reference.
pub fn s11(z_in: C64, z_ref: f64) -> C64 {
    if !z_in.is_finite() {
        return C64::new(1.0, 0.0);
    }
    (z_in - z_ref) / (z_in + z_ref)
}

pub fn db20(x: f64) -> f64 {
    20.0 * x.log10()
}

pub fn db10(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Parallel combination; infinite members are ignored.
pub fn parallel(zs: &[C64]) -> C64 {
    let y: C64 = zs
        .iter()
        .filter(|z| z.is_finite())
        .map(|z| C64::new(1.0, 0.0) / z)
        .sum();
    if y.norm() == 0.0 {
        C64::new(f64::INFINITY, 0.0)
    } else {
        C64::new(1.0, 0.0) / y
    }
}

/// Uniform transmission line with frequency-independent attenuation.
///
/// Phase scales linearly with frequency from `electrical_length` radians at
/// `f_ref`. Attenuation is `loss_db_per_mm * length_mm` dB, identical at every
/// frequency, which is the distortionless telegrapher line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionLine {
    pub z0: f64,
    pub f_ref: f64,
    pub electrical_length: f64,
    pub loss_db_per_mm: f64,
    pub length_mm: f64,
}

impl TransmissionLine {
    pub fn new(z0: f64, f_ref: f64, electrical_length: f64) -> Result<Self> {
        Self::lossy(z0, f_ref, electrical_length, 0.0, 0.0)
    }

    pub fn lossy(
        z0: f64,
        f_ref: f64,
        electrical_length: f64,
        loss_db_per_mm: f64,
        length_mm: f64,
    ) -> Result<Self> {
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(Error::param("z0", format!("{z0} must be positive")));
        }
        if !(f_ref > 0.0) {
            return Err(Error::param("f_ref", "must be positive"));
        }
        if !(loss_db_per_mm >= 0.0) || !(length_mm >= 0.0) {
            return Err(Error::param("loss_db_per_mm", "loss and length must be >= 0"));
        }
        Ok(Self {
            z0,
            f_ref,
            electrical_length,
            loss_db_per_mm,
            length_mm,
        })
    }

    /// Quarter wavelength at `f_ref`.
    pub fn quarter_wave(z0: f64, f_ref: f64) -> Result<Self> {
        Self::new(z0, f_ref, PI / 2.0)
    }

    /// One-way group delay in seconds.
    pub fn delay(&self) -> f64 {
        self.electrical_length / omega(self.f_ref)
    }

    /// Total one-way attenuation in nepers.
    pub fn attenuation_np(&self) -> f64 {
        self.loss_db_per_mm * self.length_mm * LN_10 / 20.0
    }

    /// Complex propagation exponent `gamma * length` at `f` (may be negative).
    pub fn gamma_l(&self, f: f64) -> C64 {
        C64::new(self.attenuation_np(), omega(f) * self.delay())
    }

    pub fn two_port(&self, f: f64) -> TwoPort {
        let gl = self.gamma_l(f);
        let (ch, sh) = (gl.cosh(), gl.sinh());
        TwoPort {
            a: ch,
            b: sh * self.z0,
            c: sh / self.z0,
            d: ch,
        }
    }
}

/// Two-port of a line given by `z0`, electrical length at `f_ref`, and loss,
/// evaluated at `f`.
pub fn tline(
    z0: f64,
    f_ref: f64,
    electrical_length: f64,
    loss_db_per_mm: f64,
    length_mm: f64,
    f: f64,
) -> Result<TwoPort> {
    Ok(TransmissionLine::lossy(z0, f_ref, electrical_length, loss_db_per_mm, length_mm)?.two_port(f))
}

/// Writes a Touchstone v1 one-port file in real/imaginary format, 50 ohm reference.
pub fn write_s1p<W: Write>(mut w: W, freqs_hz: &[f64], s11: &[C64]) -> std::io::Result<()> {
    writeln!(w, "! S11 sweep")?;
    writeln!(w, "# HZ S RI R 50")?;
    for (f, s) in freqs_hz.iter().zip(s11) {
        writeln!(w, "{:.6e} {:.12e} {:.12e}", f, s.re, s.im)?;
    }
    Ok(())
}

/// Parses the data lines of a file produced by [`write_s1p`].
pub fn read_s1p(text: &str) -> Result<Vec<(f64, C64)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('!') || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("s1p line {}: {e}", n + 1)))?;
        if nums.len() != 3 {
            return Err(Error::Config(format!("s1p line {}: expected 3 columns", n + 1)));
        }
        out.push((nums[0], C64::new(nums[1], nums[2])));
    }
    Ok(out)
}
