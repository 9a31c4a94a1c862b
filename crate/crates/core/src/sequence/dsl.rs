// SPDX-License-Identifier: Apache-2.0

//! Line-based sequence language.
//!
//! ```text
//! # Hahn echo
//! init S
//! evolve 3.42us sep
//! xpulse pi
//! evolve 3.42us sep
//! measure
//! ```
//!
//! Directives: `init S|UD [err=<p>]`, `lock S <dur>`, `evolve <dur> sep|merged`,
//! `xpulse pi|<k>pi|amp=<a> dur=<dur> [err=<rad>]`, `measure [fs=<p>] [ft=<p>]`.
//! Durations take an `ns`, `us`, `ms` or `s` suffix.

use super::{ElectronConfig, PulseAngle, PulseSequence, Segment};
use crate::error::{Error, Result};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_number(text: &str) -> Option<f64> {
    let ok = !text.is_empty() && text.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    if !ok {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

const UNITS: [(&str, i32); 5] = [("ns", -9), ("us", -6), ("µs", -6), ("ms", -3), ("s", 0)];

/// Parses `<number><unit>` into seconds. Plain decimals are scaled in the
/// decimal domain so `3.42us` is the double nearest 3.42e-6.
pub fn parse_duration(text: &str) -> Option<f64> {
    let (unit, exp) = UNITS.iter().find(|(u, _)| text.ends_with(u))?;
    let mantissa = &text[..text.len() - unit.len()];
    if mantissa.contains(['e', 'E']) {
        return parse_number(mantissa).map(|v| v * 10f64.powi(*exp));
    }
    parse_number(mantissa)?;
    format!("{mantissa}e{exp}").parse().ok()
}

/// Renders seconds in the shortest form that parses back to the same double.
pub fn render_duration(seconds: f64) -> String {
    let mut best = format!("{seconds}s");
    for (unit, exp) in [("us", 6), ("ns", 9), ("ms", 3)] {
        let scale = 10f64.powi(exp);
        for v in [seconds * scale, seconds / (1.0 / scale)] {
            let candidate = format!("{v}{unit}");
            if candidate.len() < best.len() && parse_duration(&candidate) == Some(seconds) {
                best = candidate;
            }
        }
    }
    best
}

struct Line<'a> {
    number: usize,
    toks: Vec<Token<'a>>,
    end_column: usize,
}

impl Line<'_> {
    fn arg(&self, i: usize, what: &str) -> Result<&Token<'_>> {
        self.toks
            .get(i)
            .ok_or_else(|| err(self.number, self.end_column, format!("missing {what}")))
    }

    fn duration(&self, i: usize) -> Result<f64> {
        let t = self.arg(i, "duration")?;
        let d = parse_duration(t.text).ok_or_else(|| {
            err(self.number, t.column, format!("malformed duration `{}` (expected e.g. 3.4us, 120ns)", t.text))
        })?;
        if d < 0.0 {
            return Err(err(self.number, t.column, format!("negative duration `{}`", t.text)));
        }
        Ok(d)
    }

    /// Collects `key=value` options from `from` on, rejecting anything else.
    fn options(&self, from: usize, allowed: &[&str]) -> Result<Vec<(&str, &str, usize)>> {
        let mut out: Vec<(&str, &str, usize)> = Vec::new();
        for t in &self.toks[from.min(self.toks.len())..] {
            let (k, v) = t
                .text
                .split_once('=')
                .ok_or_else(|| err(self.number, t.column, format!("unexpected `{}`", t.text)))?;
            if !allowed.contains(&k) {
                return Err(err(self.number, t.column, format!("unknown option `{k}`")));
            }
            if out.iter().any(|(seen, _, _)| *seen == k) {
                return Err(err(self.number, t.column, format!("option `{k}` given twice")));
            }
            out.push((k, v, t.column));
        }
        Ok(out)
    }

    fn number(&self, value: &str, column: usize) -> Result<f64> {
        parse_number(value).ok_or_else(|| err(self.number, column, format!("malformed number `{value}`")))
    }

    fn probability(&self, value: &str, column: usize) -> Result<f64> {
        let p = self.number(value, column)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(err(self.number, column, format!("probability {p} not in [0, 1]")));
        }
        Ok(p)
    }

    fn no_more(&self, from: usize) -> Result<()> {
        match self.toks.get(from) {
            Some(t) => Err(err(self.number, t.column, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }
}

fn parse_line(line: &Line<'_>) -> Result<Segment> {
    let head = &line.toks[0];
    let n = line.number;
    match head.text {
        "init" => {
            let which = line.arg(1, "state (S or UD)")?;
            match which.text {
                "S" => {
                    line.no_more(2)?;
                    Ok(Segment::InitSinglet)
                }
                "UD" => {
                    let mut adiabatic_error = 0.0;
                    for (_, v, c) in line.options(2, &["err"])? {
                        adiabatic_error = line.probability(v, c)?;
                    }
                    Ok(Segment::InitUpDown { adiabatic_error })
                }
                other => Err(err(n, which.column, format!("unknown init state `{other}` (expected S or UD)"))),
            }
        }
        "lock" => {
            let which = line.arg(1, "state S")?;
            if which.text != "S" {
                return Err(err(n, which.column, format!("can only lock S, not `{}`", which.text)));
            }
            let duration = line.duration(2)?;
            line.no_more(3)?;
            Ok(Segment::LockSinglet { duration })
        }
        "evolve" => {
            let duration = line.duration(1)?;
            let cfg = line.arg(2, "electron configuration (sep or merged)")?;
            let electron = match cfg.text {
                "sep" => ElectronConfig::Separated,
                "merged" => ElectronConfig::Merged,
                other => return Err(err(n, cfg.column, format!("unknown configuration `{other}` (expected sep or merged)"))),
            };
            line.no_more(3)?;
            Ok(Segment::FreeEvolve { duration, electron })
        }
        "xpulse" => {
            let first = line.arg(1, "pulse angle or amplitude")?;
            let mut angle_error_rms = 0.0;
            let mut amplitude = None;
            let mut duration = None;
            let mut pi_multiple = None;
            let mut first_opt = 1;
            if let Some(k) = first.text.strip_suffix("pi") {
                let k = if k.is_empty() { 1.0 } else { line.number(k, first.column)? };
                pi_multiple = Some(k);
                first_opt = 2;
            }
            for (k, v, c) in line.options(first_opt, &["amp", "dur", "err"])? {
                match k {
                    "amp" => {
                        if pi_multiple.is_some() {
                            return Err(err(n, c, "pulse has both an angle and an amplitude"));
                        }
                        amplitude = Some(line.number(v, c)?);
                    }
                    "dur" => {
                        let d = parse_duration(v).ok_or_else(|| err(n, c, format!("malformed duration `{v}`")))?;
                        if d < 0.0 {
                            return Err(err(n, c, format!("negative duration `{v}`")));
                        }
                        duration = Some(d);
                    }
                    _ => {
                        let e = line.number(v, c)?;
                        if e < 0.0 {
                            return Err(err(n, c, "angle error must be >= 0"));
                        }
                        angle_error_rms = e;
                    }
                }
            }
            let angle = match (pi_multiple, amplitude, duration) {
                (Some(k), None, None) => PulseAngle::PiMultiple(k),
                (Some(_), _, Some(_)) => {
                    return Err(err(n, first.column, "an angle pulse takes no duration"));
                }
                (None, Some(amplitude), Some(duration)) => PulseAngle::Amplitude { amplitude, duration },
                (None, Some(_), None) => return Err(err(n, line.end_column, "amplitude pulse needs dur=<duration>")),
                _ => return Err(err(n, first.column, "expected pi, <k>pi or amp=<a> dur=<duration>")),
            };
            Ok(Segment::ExchangePulse { angle, angle_error_rms })
        }
        "measure" => {
            let (mut fidelity_s, mut fidelity_t) = (1.0, 1.0);
            for (k, v, c) in line.options(1, &["fs", "ft"])? {
                let p = line.probability(v, c)?;
                if k == "fs" {
                    fidelity_s = p;
                } else {
                    fidelity_t = p;
                }
            }
            Ok(Segment::MeasureST0 { fidelity_s, fidelity_t })
        }
        other => Err(err(
            n,
            head.column,
            format!("unknown directive `{other}` (expected init, lock, evolve, xpulse or measure)"),
        )),
    }
}

pub fn parse_sequence(text: &str) -> Result<PulseSequence> {
    let mut segments = Vec::new();
    let mut initialised = false;
    for (i, raw) in text.lines().enumerate() {
        let code = raw.split('#').next().unwrap_or("");
        let toks = tokens(code);
        if toks.is_empty() {
            continue;
        }
        let line = Line {
            number: i + 1,
            end_column: code.trim_end().chars().count() + 1,
            toks,
        };
        let seg = parse_line(&line)?;
        initialised |= seg.initialises();
        if matches!(seg, Segment::MeasureST0 { .. }) && !initialised {
            return Err(err(line.number, line.toks[0].column, "measure before init"));
        }
        segments.push(seg);
    }
    if segments.is_empty() {
        return Err(Error::Sequence("empty sequence".into()));
    }
    PulseSequence::new(segments)
}

fn render_segment(seg: &Segment) -> String {
    match *seg {
        Segment::InitSinglet => "init S".into(),
        Segment::InitUpDown { adiabatic_error } => {
            if adiabatic_error == 0.0 {
                "init UD".into()
            } else {
                format!("init UD err={adiabatic_error}")
            }
        }
        Segment::LockSinglet { duration } => format!("lock S {}", render_duration(duration)),
        Segment::FreeEvolve { duration, electron } => {
            let cfg = match electron {
                ElectronConfig::Separated => "sep",
                ElectronConfig::Merged => "merged",
            };
            format!("evolve {} {cfg}", render_duration(duration))
        }
        Segment::ExchangePulse { angle, angle_error_rms } => {
            let mut s = match angle {
                PulseAngle::PiMultiple(k) if k == 1.0 => "xpulse pi".to_string(),
                PulseAngle::PiMultiple(k) => format!("xpulse {k}pi"),
                PulseAngle::Amplitude { amplitude, duration } => {
                    format!("xpulse amp={amplitude} dur={}", render_duration(duration))
                }
            };
            if angle_error_rms != 0.0 {
                s.push_str(&format!(" err={angle_error_rms}"));
            }
            s
        }
        Segment::MeasureST0 { fidelity_s, fidelity_t } => {
            let mut s = "measure".to_string();
            if fidelity_s != 1.0 {
                s.push_str(&format!(" fs={fidelity_s}"));
            }
            if fidelity_t != 1.0 {
                s.push_str(&format!(" ft={fidelity_t}"));
            }
            s
        }
    }
}

pub fn render_sequence(seq: &PulseSequence) -> String {
    let mut out = String::new();
    for seg in &seq.segments {
        out.push_str(&render_segment(seg));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{build_echo, SequenceOptions};
    use proptest::prelude::*;

    fn parse_err(text: &str) -> (usize, usize, String) {
        match parse_sequence(text) {
            Err(Error::Parse { line, column, message }) => (line, column, message),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn echo_text_matches_builder() {
        let text = "init S\nevolve 3.42us sep\nxpulse pi\nevolve 3.42us sep\nmeasure";
        let parsed = parse_sequence(text).unwrap();
        assert_eq!(parsed, build_echo(6.84e-6, &SequenceOptions::default()).unwrap());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\ninit S   # start\n  evolve 100ns merged\nmeasure fs=0.9 ft=0.8\n";
        let s = parse_sequence(text).unwrap();
        assert_eq!(s.segments.len(), 3);
        assert_eq!(
            s.segments[2],
            Segment::MeasureST0 {
                fidelity_s: 0.9,
                fidelity_t: 0.8
            }
        );
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse_sequence(""), Err(Error::Sequence(_))));
        assert!(matches!(parse_sequence("# nothing\n\n"), Err(Error::Sequence(_))));
    }

    #[test]
    fn negative_duration_reports_position() {
        let (line, column, message) = parse_err("init S\nevolve -1us sep");
        assert_eq!((line, column), (2, 8));
        assert!(message.contains("negative"));
    }

    #[test]
    fn diagnostics() {
        let (l, c, m) = parse_err("init S\n  wobble 3us");
        assert_eq!((l, c), (2, 3));
        assert!(m.contains("unknown directive"));
        let (_, _, m) = parse_err("init S\nevolve 3 parsecs sep");
        assert!(m.contains("malformed duration"));
        let (_, _, m) = parse_err("init S\nevolve 3furlongs sep");
        assert!(m.contains("malformed duration"));
        let (l, _, m) = parse_err("init S\nxpulse pi amp=1.0 dur=20ns");
        assert_eq!(l, 2);
        assert!(m.contains("both"));
        let (l, c, m) = parse_err("evolve 1us sep\nmeasure");
        assert_eq!((l, c), (2, 1));
        assert!(m.contains("measure before init"));
        let (_, _, m) = parse_err("init S\nxpulse amp=1.0");
        assert!(m.contains("dur="));
        let (_, _, m) = parse_err("init S\nmeasure fs=1.2");
        assert!(m.contains("not in [0, 1]"));
        let (_, _, m) = parse_err("init X");
        assert!(m.contains("unknown init state"));
    }

    #[test]
    fn duration_units() {
        assert_eq!(parse_duration("3.42us"), Some(3.42e-6));
        assert_eq!(parse_duration("3.42µs"), Some(3.42e-6));
        assert_eq!(parse_duration("20ns"), Some(20e-9));
        assert_eq!(parse_duration("1.5ms"), Some(1.5e-3));
        assert_eq!(parse_duration("2s"), Some(2.0));
        assert_eq!(parse_duration("1e3ns"), Some(1e3 * 1e-9));
        assert_eq!(parse_duration("us"), None);
        assert_eq!(parse_duration("3.4"), None);
        assert_eq!(parse_duration("infus"), None);
    }

    #[test]
    fn renders_readable_units() {
        assert_eq!(render_duration(3.42e-6), "3.42us");
        assert_eq!(render_duration(20e-9), "20ns");
        assert_eq!(render_duration(0.0), "0s");
    }

    fn arb_duration() -> impl Strategy<Value = f64> {
        prop_oneof![
            (0u32..100_000).prop_map(|n| n as f64 * 1e-9),
            0.0..50e-6f64,
            0.0..2.0f64,
        ]
    }

    fn arb_prob() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64]
    }

    fn arb_segment() -> impl Strategy<Value = Segment> {
        prop_oneof![
            Just(Segment::InitSinglet),
            arb_prob().prop_map(|adiabatic_error| Segment::InitUpDown { adiabatic_error }),
            arb_duration().prop_map(|duration| Segment::LockSinglet { duration }),
            (arb_duration(), any::<bool>()).prop_map(|(duration, sep)| Segment::FreeEvolve {
                duration,
                electron: if sep { ElectronConfig::Separated } else { ElectronConfig::Merged },
            }),
            (-4.0..4.0f64, prop_oneof![Just(0.0), 0.0..1.0f64]).prop_map(|(k, e)| Segment::ExchangePulse {
                angle: PulseAngle::PiMultiple(k),
                angle_error_rms: e,
            }),
            (-5.0..5.0f64, arb_duration(), 0.0..1.0f64).prop_map(|(amplitude, duration, e)| Segment::ExchangePulse {
                angle: PulseAngle::Amplitude { amplitude, duration },
                angle_error_rms: e,
            }),
            (arb_prob(), arb_prob()).prop_map(|(fidelity_s, fidelity_t)| Segment::MeasureST0 { fidelity_s, fidelity_t }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn render_parse_round_trip(body in proptest::collection::vec(arb_segment(), 0..12)) {
            let mut segments = vec![Segment::InitSinglet];
            segments.extend(body);
            let seq = PulseSequence::new(segments).unwrap();
            let text = render_sequence(&seq);
            let back = parse_sequence(&text).unwrap();
            prop_assert_eq!(&back, &seq);
            prop_assert_eq!(render_sequence(&back), text);
        }

        #[test]
        fn durations_round_trip(d in 0.0..10.0f64) {
            prop_assert_eq!(parse_duration(&render_duration(d)), Some(d));
        }
    }
}
