//! Partial JSON config files and their merge with command-line flags.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use std::path::Path;

use xyf_core::experiment::ExperimentConfig;
use xyf_core::lattice::{GeometryKind, GeometrySpec};
use xyf_core::noise::NoiseParams;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialGeometry {
    pub kind: Option<GeometryKind>,
    pub l1: Option<u32>,
    pub l2: Option<u32>,
    pub l: Option<u32>,
    pub rounds: Option<u32>,
    pub t0: Option<u32>,
    pub t1: Option<u32>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialNoise {
    pub p_gate: Option<f64>,
    pub p_idle: Option<f64>,
    pub p_meas: Option<f64>,
    pub p_prep: Option<f64>,
    pub idle_unused_bridge: Option<bool>,
}

/// Every field optional; flags fill in or override.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(default)]
    pub geometry: PartialGeometry,
    #[serde(default)]
    pub noise: PartialNoise,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("config: cannot read {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("config: {}", path.display()))
    }

    /// `other` wins wherever it is set.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        let (g, h) = (self.geometry, other.geometry);
        let (n, m) = (self.noise, other.noise);
        PartialConfig {
            geometry: PartialGeometry {
                kind: h.kind.or(g.kind),
                l1: h.l1.or(g.l1),
                l2: h.l2.or(g.l2),
                l: h.l.or(g.l),
                rounds: h.rounds.or(g.rounds),
                t0: h.t0.or(g.t0),
                t1: h.t1.or(g.t1),
            },
            noise: PartialNoise {
                p_gate: m.p_gate.or(n.p_gate),
                p_idle: m.p_idle.or(n.p_idle),
                p_meas: m.p_meas.or(n.p_meas),
                p_prep: m.p_prep.or(n.p_prep),
                idle_unused_bridge: m.idle_unused_bridge.or(n.idle_unused_bridge),
            },
            shots: other.shots.or(self.shots),
            seed: other.seed.or(self.seed),
            workers: other.workers.or(self.workers),
        }
    }

    pub fn geometry(&self) -> Result<GeometrySpec> {
        let g = &self.geometry;
        let need = |v: Option<u32>, name: &str| v.ok_or_else(|| anyhow!("{name}: missing"));
        let kind = g.kind.ok_or_else(|| anyhow!("geometry: missing"))?;
        let spec = match kind {
            GeometryKind::Torus | GeometryKind::Rectangle => {
                if g.l.is_some() || g.t0.is_some() || g.t1.is_some() {
                    bail!("l, t0, t1: only used by the surgery geometry");
                }
                let (l1, l2, rounds) = (need(g.l1, "l1")?, need(g.l2, "l2")?, need(g.rounds, "rounds")?);
                if kind == GeometryKind::Torus {
                    GeometrySpec::torus(l1, l2, rounds)
                } else {
                    GeometrySpec::rectangle(l1, l2, rounds)
                }
            }
            GeometryKind::Surgery => {
                if g.l1.is_some() || g.l2.is_some() {
                    bail!("l1, l2: the surgery geometry takes l");
                }
                GeometrySpec::surgery(need(g.l, "l")?, need(g.t0, "t0")?, need(g.t1, "t1")?, need(g.rounds, "rounds")?)
            }
        };
        spec.validate().map_err(|e| anyhow!("geometry: {e}"))?;
        Ok(spec)
    }

    pub fn noise(&self) -> NoiseParams {
        let n = &self.noise;
        NoiseParams {
            p_gate: n.p_gate.unwrap_or(0.0),
            p_idle: n.p_idle.unwrap_or(0.0),
            p_meas: n.p_meas.unwrap_or(0.0),
            p_prep: n.p_prep.unwrap_or(0.0),
            idle_unused_bridge: n.idle_unused_bridge.unwrap_or(false),
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig {
            geometry: self.geometry()?,
            noise: self.noise(),
            shots: self.shots.ok_or_else(|| anyhow!("shots: missing"))?,
            seed: self.seed.ok_or_else(|| anyhow!("seed: missing (there is no default seed)"))?,
            workers: self.workers.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> PartialConfig {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn flags_override_file() {
        let file = parse(r#"{"geometry":{"kind":"torus","l1":4,"l2":4,"rounds":3},"noise":{"p_gate":0.01},"shots":10,"seed":5}"#);
        let flags = PartialConfig { shots: Some(99), ..Default::default() };
        let cfg = file.overlay(flags).experiment().unwrap();
        assert_eq!(cfg.shots, 99);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.noise.p_gate, 0.01);
        assert_eq!(cfg.geometry, GeometrySpec::torus(4, 4, 3));
    }

    #[test]
    fn missing_and_unknown_fields_are_named() {
        let e = parse(r#"{"geometry":{"kind":"rectangle","l1":3,"rounds":2},"shots":1,"seed":1}"#).experiment();
        assert!(e.unwrap_err().to_string().contains("l2"));
        let e = parse(r#"{"geometry":{"kind":"rectangle","l1":3,"l2":3,"rounds":2},"shots":1}"#).experiment();
        assert!(e.unwrap_err().to_string().contains("seed"));
        assert!(serde_json::from_str::<PartialConfig>(r#"{"shotz":3}"#).is_err());
    }
}
