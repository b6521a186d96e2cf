use mixfirst::lptv::{
    harmonic_transfer, measure_conversion_gain, measure_iq_isolation, measure_zin, simulate_pss, LoWaveform, PhaseDrive,
    Phasors, SwitchedNetwork,
};
use mixfirst::netcore::{input_impedance, parallel, Termination, C64};
use mixfirst::rxmodel::{Architecture, ReceiverSpec};

const F_LO: f64 = 30e9;

fn spec(arch: Architecture, duty: f64, rise: f64) -> ReceiverSpec {
    let mut s = ReceiverSpec::nominal(arch, F_LO);
    s.duty = duty;
    s.rise_fraction = rise;
    if arch.needs_match() {
        s.synthesize_match(F_LO, F_LO).unwrap();
    }
    s
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn pss(net: &SwitchedNetwork, lo: &LoWaveform, f: f64, spp: usize) -> mixfirst::lptv::PssTrace {
    simulate_pss(net, lo, f, spp, 2000, 1e-7).unwrap()
}

#[test]
fn single_closed_switch_matches_static_network() {
    let s = spec(Architecture::MillerMatched, 0.25, 0.0);
    let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
    let lo = LoWaveform::from_spec(&s)
        .unwrap()
        .all(PhaseDrive::Off)
        .with_drive(0, PhaseDrive::On);
    let f = F_LO * (1.0 + 1.0 / 32.0);
    let zbb = s.baseband_impedance(f);
    let open = zbb + s.r_off;
    let want = parallel(&[zbb + s.r_sw, open, open, open]);
    let hb = harmonic_transfer(&net, &lo, f, 5).unwrap();
    assert!(rel(measure_zin(&hb, f), want) < 5e-3);
    let tr = pss(&net, &lo, f, 512);
    assert!(rel(measure_zin(&tr, f), want) < 5e-3);
}

#[test]
fn static_l_match_branch_matches_two_port() {
    let s = spec(Architecture::LMatch, 0.5, 0.0);
    let m = s.matching.unwrap();
    let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
    let lo = LoWaveform::from_spec(&s)
        .unwrap()
        .all(PhaseDrive::Off)
        .with_drive(0, PhaseDrive::On);
    let f = F_LO * (1.0 + 1.0 / 32.0);
    let zbb = s.baseband_impedance(f);
    let open = zbb + s.r_off;
    // Switches 0 and 2 hang off the I branch, 1 and 3 off the Q branch.
    let load_i = Termination::new(parallel(&[zbb + s.r_sw, open])).unwrap();
    let load_q = Termination::new(open / 2.0).unwrap();
    let branch = m.branch(f);
    let want = parallel(&[
        input_impedance(&branch, &load_i).unwrap(),
        input_impedance(&branch, &load_q).unwrap(),
    ]);
    let hb = harmonic_transfer(&net, &lo, f, 5).unwrap();
    assert!(rel(measure_zin(&hb, f), want) < 5e-3);
    let tr = pss(&net, &lo, f, 1024);
    assert!(rel(measure_zin(&tr, f), want) < 5e-3);
}

#[test]
fn all_switches_open() {
    let f = F_LO * (1.0 + 1.0 / 32.0);
    let s = spec(Architecture::MillerMatched, 0.25, 0.0);
    let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
    let lo = LoWaveform::from_spec(&s).unwrap().all(PhaseDrive::Off);
    let want = (s.baseband_impedance(f) + s.r_off) / 4.0;
    let hb = harmonic_transfer(&net, &lo, f, 5).unwrap();
    assert!(rel(measure_zin(&hb, f), want) < 5e-3);

    let s = spec(Architecture::LMatch, 0.5, 0.0);
    let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
    let lo = LoWaveform::from_spec(&s).unwrap().all(PhaseDrive::Off);
    let load = Termination::new((s.baseband_impedance(f) + s.r_off) / 2.0).unwrap();
    let want = input_impedance(&s.matching.unwrap().branch(f), &load).unwrap() / 2.0;
    let z = measure_zin(&harmonic_transfer(&net, &lo, f, 5).unwrap(), f);
    assert!(rel(z, want) < 5e-3, "{z} vs {want}");
}

#[test]
fn step_halving() {
    let f = F_LO * (1.0 + 1.0 / 32.0);
    for (arch, duty) in [(Architecture::MillerMatched, 0.25), (Architecture::LMatch, 0.5)] {
        let s = spec(arch, duty, 0.05);
        let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
        let lo = LoWaveform::from_spec(&s).unwrap();
        let a = pss(&net, &lo, f, 512);
        let b = pss(&net, &lo, f, 1024);
        assert!(rel(measure_zin(&a, f), measure_zin(&b, f)) < 5e-3, "{arch:?}");
        let f_if = f - F_LO;
        assert!(rel(a.iq(f_if).0, b.iq(f_if).0) < 5e-3, "{arch:?}");
    }
}

#[test]
fn quarter_period_delay_rotates_iq() {
    let f = F_LO * (1.0 + 1.0 / 32.0);
    let f_if = f - F_LO;
    for duty in [0.25, 0.5] {
        let s = spec(Architecture::MillerMatched, duty, 0.05);
        let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
        let lo = LoWaveform::from_spec(&s).unwrap();
        let late = lo.clone().with_delay(lo.period() / 4.0);
        let (i, q) = harmonic_transfer(&net, &lo, f, 24).unwrap().iq(f_if);
        let (i2, q2) = harmonic_transfer(&net, &late, f, 24).unwrap().iq(f_if);
        assert!(rel(i2, q) < 1e-9 && rel(q2, -i) < 1e-9, "duty {duty}");

        let (i, q) = pss(&net, &lo, f, 1024).iq(f_if);
        let (i2, q2) = pss(&net, &late, f, 1024).iq(f_if);
        assert!(rel(i2, q) < 1e-4 && rel(q2, -i) < 1e-4, "duty {duty}");
    }
}

#[test]
fn parseval_on_trace() {
    let s = spec(Architecture::MillerMatched, 0.25, 0.05);
    let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
    let lo = LoWaveform::from_spec(&s).unwrap();
    let f = F_LO * (1.0 + 1.0 / 8.0);
    let tr = pss(&net, &lo, f, 256);
    let x = &tr.voltages[tr.ports.bb[0]];
    let n = x.len();
    let f_w = F_LO / tr.window_periods as f64;
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut power = mean * mean;
    for k in 1..n / 2 {
        power += tr.dft(x, k as f64 * f_w).norm_sqr() / 2.0;
    }
    power += (tr.dft(x, (n / 2) as f64 * f_w).norm() / 2.0).powi(2);
    let ms = tr.mean_square(x);
    assert!((power - ms).abs() < 1e-9 * ms, "{power} vs {ms}");
}

#[test]
fn engines_agree_with_ideal_switches() {
    let f = F_LO * (1.0 + 1.0 / 32.0);
    for (arch, duty) in [
        (Architecture::MillerMatched, 0.25),
        (Architecture::LMatch, 0.5),
        (Architecture::QuarterWaveDivider, 0.5),
    ] {
        let s = spec(arch, duty, 0.0);
        let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
        let lo = LoWaveform::from_spec(&s).unwrap();
        let hb = harmonic_transfer(&net, &lo, f, 24).unwrap();
        let tr = pss(&net, &lo, f, 1024);
        assert!(rel(measure_zin(&tr, f), measure_zin(&hb, f)) < 0.02, "{arch:?}");
        let dg = measure_conversion_gain(&tr, f, F_LO) - measure_conversion_gain(&hb, f, F_LO);
        assert!((10f64.powf(dg / 20.0) - 1.0).abs() < 0.02, "{arch:?}: {dg} dB");
    }
}

#[test]
fn isolation_tracks_overlap_and_switch_resistance() {
    let f = F_LO * (1.0 + 1.0 / 32.0);
    let iso = |duty: f64, r_sw: f64| {
        let mut s = spec(Architecture::MillerMatched, duty, 0.0);
        s.r_sw = r_sw;
        let net = SwitchedNetwork::from_spec(&s, 1.0).unwrap();
        measure_iq_isolation(&net, &LoWaveform::from_spec(&s).unwrap(), f).unwrap()
    };
    assert!(iso(0.25, 12.0) > 60.0);
    assert!(iso(0.5, 24.0) > iso(0.5, 12.0));
}
