//! Piecewise flux schedules.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::device::FluxBias;
use crate::error::{Error, Result};

/// One piece of a single mode's flux waveform. Times are absolute (ns from
/// the start of the schedule); outside every segment the mode sits at the
/// schedule's base flux.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Segment {
    Constant {
        start: f64,
        end: f64,
        flux: f64,
    },
    LinearRamp {
        start: f64,
        end: f64,
        from: f64,
        to: f64,
    },
    /// Rises from the base flux to `peak` over `edge` ns with a half-cosine,
    /// holds, and falls back over the last `edge` ns.
    FlatTop {
        start: f64,
        end: f64,
        peak: f64,
        edge: f64,
    },
}

impl Segment {
    pub fn start(&self) -> f64 {
        match *self {
            Segment::Constant { start, .. }
            | Segment::LinearRamp { start, .. }
            | Segment::FlatTop { start, .. } => start,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            Segment::Constant { end, .. } | Segment::LinearRamp { end, .. } | Segment::FlatTop { end, .. } => end,
        }
    }

    fn value(&self, t: f64, base: f64) -> f64 {
        match *self {
            Segment::Constant { flux, .. } => flux,
            Segment::LinearRamp { start, end, from, to } => {
                if end > start {
                    from + (to - from) * ((t - start) / (end - start)).clamp(0.0, 1.0)
                } else {
                    to
                }
            }
            Segment::FlatTop { start, end, peak, edge } => {
                let rise = (t - start).min(end - t);
                if edge <= 0.0 || rise >= edge {
                    peak
                } else {
                    let s = 0.5 * (1.0 - (std::f64::consts::PI * rise.max(0.0) / edge).cos());
                    base + (peak - base) * s
                }
            }
        }
    }

    fn validate(&self, id: &str) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidInput(format!("segment for `{id}`: {reason}")));
        let (s, e) = (self.start(), self.end());
        if !(s.is_finite() && e.is_finite()) || e < s || s < 0.0 {
            return bad(format!("invalid interval [{s}, {e}]"));
        }
        let finite = match *self {
            Segment::Constant { flux, .. } => flux.is_finite(),
            Segment::LinearRamp { from, to, .. } => from.is_finite() && to.is_finite(),
            Segment::FlatTop { peak, edge, .. } => {
                if !(edge.is_finite() && edge >= 0.0) || 2.0 * edge > e - s + 1e-12 {
                    return bad(format!("edge {edge} does not fit in [{s}, {e}]"));
                }
                peak.is_finite()
            }
        };
        if !finite {
            return bad("non-finite flux".into());
        }
        Ok(())
    }
}

/// Flux waveforms for a set of modes over `[0, duration]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FluxSchedule {
    duration: f64,
    base: FluxBias,
    channels: BTreeMap<String, Vec<Segment>>,
}

impl FluxSchedule {
    /// Schedule that holds `base` for `duration` ns.
    pub fn constant(base: FluxBias, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid duration {duration}")));
        }
        Ok(Self {
            duration,
            base,
            channels: BTreeMap::new(),
        })
    }

    /// Adds a segment to a mode's waveform. Segments of one mode must not
    /// overlap and must lie within the schedule.
    pub fn push(&mut self, id: impl Into<String>, segment: Segment) -> Result<()> {
        let id = id.into();
        segment.validate(&id)?;
        if segment.end() > self.duration + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "segment for `{id}` ends at {} after the schedule ({} ns)",
                segment.end(),
                self.duration
            )));
        }
        let list = self.channels.entry(id.clone()).or_default();
        if list
            .iter()
            .any(|s| segment.start() < s.end() - 1e-12 && s.start() < segment.end() - 1e-12)
        {
            return Err(Error::InvalidInput(format!("overlapping segments for `{id}`")));
        }
        list.push(segment);
        list.sort_by(|a, b| a.start().total_cmp(&b.start()));
        Ok(())
    }

    pub fn with(mut self, id: impl Into<String>, segment: Segment) -> Result<Self> {
        self.push(id, segment)?;
        Ok(self)
    }

    /// Flat-top pulses of length `flat + 2·edge` starting at 0 on every mode
    /// of `peaks`, everything else held at `base`.
    pub fn flat_top(base: FluxBias, peaks: &FluxBias, flat: f64, edge: f64) -> Result<Self> {
        if !(flat.is_finite() && flat >= 0.0) {
            return Err(Error::InvalidInput(format!("invalid flat-top length {flat}")));
        }
        let duration = flat + 2.0 * edge;
        let mut s = Self::constant(base, duration)?;
        for (id, peak) in peaks.iter() {
            s.push(
                id,
                Segment::FlatTop {
                    start: 0.0,
                    end: duration,
                    peak,
                    edge,
                },
            )?;
        }
        Ok(s)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn base(&self) -> &FluxBias {
        &self.base
    }

    /// Modes with an explicit waveform.
    pub fn channels(&self) -> impl Iterator<Item = &str> {
        self.channels.keys().map(String::as_str)
    }

    /// Every mode the schedule assigns a flux to.
    pub fn modes(&self) -> impl Iterator<Item = &str> {
        let mut all: Vec<&str> = self.base.iter().map(|(k, _)| k).collect();
        all.extend(self.channels());
        all.sort_unstable();
        all.dedup();
        all.into_iter()
    }

    /// Bias at time `t` (clamped to the schedule).
    pub fn sample(&self, t: f64) -> FluxBias {
        let t = t.clamp(0.0, self.duration);
        let mut out = self.base.clone();
        for (id, segs) in &self.channels {
            let base = self.base.get(id).unwrap_or(f64::NAN);
            if let Some(seg) = segs.iter().find(|s| s.start() <= t && t <= s.end()) {
                let base = if base.is_nan() { 0.0 } else { base };
                out.set(id.clone(), seg.value(t, base));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_top_shape() {
        let base = FluxBias::new().with("C", 0.3);
        let s = FluxSchedule::flat_top(base, &FluxBias::new().with("C", 0.1), 10.0, 2.0).unwrap();
        assert_eq!(s.duration(), 14.0);
        assert!((s.sample(0.0).get("C").unwrap() - 0.3).abs() < 1e-15);
        assert!((s.sample(1.0).get("C").unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(s.sample(7.0).get("C"), Some(0.1));
        assert!((s.sample(14.0).get("C").unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn ramp_and_constant() {
        let s = FluxSchedule::constant(FluxBias::new().with("A", 0.0), 10.0)
            .unwrap()
            .with("A", Segment::LinearRamp { start: 0.0, end: 4.0, from: 0.0, to: 0.4 })
            .unwrap()
            .with("A", Segment::Constant { start: 4.0, end: 10.0, flux: 0.4 })
            .unwrap();
        assert!((s.sample(2.0).get("A").unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(s.sample(8.0).get("A"), Some(0.4));
    }

    #[test]
    fn rejects_bad_segments() {
        let s = FluxSchedule::constant(FluxBias::new(), 10.0).unwrap();
        assert!(s.clone().with("A", Segment::Constant { start: 0.0, end: 11.0, flux: 0.0 }).is_err());
        assert!(s.clone().with("A", Segment::FlatTop { start: 0.0, end: 3.0, peak: 0.1, edge: 2.0 }).is_err());
        let s = s.with("A", Segment::Constant { start: 0.0, end: 5.0, flux: 0.0 }).unwrap();
        assert!(s.with("A", Segment::Constant { start: 4.0, end: 6.0, flux: 0.0 }).is_err());
        assert!(FluxSchedule::constant(FluxBias::new(), -1.0).is_err());
    }

    proptest! {
        #[test]
        fn flat_top_is_continuous(base in -0.5f64..0.5, peak in -0.5f64..0.5, edge in 0.1f64..5.0, flat in 0.0f64..20.0) {
            let s = FluxSchedule::flat_top(
                FluxBias::new().with("C", base), &FluxBias::new().with("C", peak), flat, edge).unwrap();
            let n = 2000;
            let h = s.duration() / n as f64;
            let bound = (peak - base).abs() * std::f64::consts::PI / (2.0 * edge) * h + 1e-12;
            for i in 0..n {
                let a = s.sample(i as f64 * h).get("C").unwrap();
                let b = s.sample((i + 1) as f64 * h).get("C").unwrap();
                prop_assert!((a - b).abs() <= bound);
            }
        }
    }
}
