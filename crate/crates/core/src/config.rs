//! Device configuration: qubits, waveguide modes, couplers, transfer
//! parameters and SPAM figures. All frequencies are in Hz and all times in
//! seconds.
//!
//! Defaults reproduce the measured device (two tunable-coupling l-qubits,
//! two fixed-frequency data qubits, a 98 MHz free-spectral-range waveguide
//! with the target standing-wave mode m = 50 at 4.881 GHz).

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LQubit {
    pub idle_frequency: f64,
    pub min_frequency: f64,
    pub max_frequency: f64,
    /// Stored for completeness; qubits are simulated as two-level systems.
    pub anharmonicity: f64,
    pub t1: f64,
    pub t2_ramsey: f64,
    pub readout_fidelity: f64,
    pub thermal_population: f64,
    pub single_clifford_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataQubit {
    pub t1: f64,
    pub t2_ramsey: f64,
    pub readout_fidelity: f64,
    pub thermal_population: f64,
    pub single_clifford_error: f64,
}

/// Coplanar-waveguide interconnect.
///
/// `mode_frequencies[i]` and `mode_t1[i]` describe standing-wave mode
/// `first_mode_index + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cpw {
    pub fsr: f64,
    pub target_mode_index: i64,
    pub first_mode_index: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_frequency: Option<f64>,
    #[serde(default)]
    pub mode_frequencies: Option<Vec<f64>>,
    pub mode_t1: Vec<f64>,
    pub modes_retained: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CzGate {
    pub pair: String,
    pub duration: f64,
    pub error_per_gate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferParams {
    pub g_max: f64,
    pub satd_duration: f64,
    pub total_duration: f64,
    /// Hardware ceiling on |g|; sweep cells exceeding it are flagged.
    #[serde(default)]
    pub coupling_cap: Option<f64>,
}

impl TransferParams {
    /// Length of each linear detuning ramp around the coupling sweep.
    pub fn ramp_duration(&self) -> f64 {
        0.5 * (self.total_duration - self.satd_duration)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub l_qubits: Vec<LQubit>,
    pub data_qubits: Vec<DataQubit>,
    pub cpw: Cpw,
    pub cz_gates: Vec<CzGate>,
    pub transfer: TransferParams,
    pub rng_seed: u64,
    pub single_qubit_gate_duration: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            l_qubits: vec![
                LQubit {
                    idle_frequency: 4.933e9,
                    min_frequency: 4.681e9,
                    max_frequency: 5.243e9,
                    anharmonicity: -134e6,
                    t1: 113e-6,
                    t2_ramsey: 18e-6,
                    readout_fidelity: 0.959,
                    thermal_population: 0.019,
                    single_clifford_error: 7.9e-4,
                },
                LQubit {
                    idle_frequency: 4.929e9,
                    min_frequency: 4.665e9,
                    max_frequency: 5.310e9,
                    anharmonicity: -134e6,
                    t1: 76e-6,
                    t2_ramsey: 22e-6,
                    readout_fidelity: 0.957,
                    thermal_population: 0.020,
                    single_clifford_error: 8.4e-4,
                },
            ],
            data_qubits: vec![
                DataQubit {
                    t1: 92e-6,
                    t2_ramsey: 38e-6,
                    readout_fidelity: 0.967,
                    thermal_population: 0.019,
                    single_clifford_error: 4.5e-4,
                },
                DataQubit {
                    t1: 141e-6,
                    t2_ramsey: 81e-6,
                    readout_fidelity: 0.976,
                    thermal_population: 0.013,
                    single_clifford_error: 2.6e-4,
                },
            ],
            cpw: Cpw {
                fsr: 98e6,
                target_mode_index: 50,
                first_mode_index: 49,
                target_frequency: None,
                mode_frequencies: Some(vec![4.783e9, 4.881e9, 4.980e9, 5.078e9]),
                mode_t1: vec![5.15e-6, 5.23e-6, 5.13e-6, 4.53e-6],
                modes_retained: 5,
            },
            cz_gates: vec![
                CzGate {
                    pair: "D1-L1".into(),
                    duration: 135e-9,
                    error_per_gate: 0.0093,
                },
                CzGate {
                    pair: "L2-D2".into(),
                    duration: 100e-9,
                    error_per_gate: 0.0054,
                },
            ],
            transfer: TransferParams {
                g_max: 3.5e6,
                satd_duration: 135e-9,
                total_duration: 206e-9,
                coupling_cap: Some(4e6),
            },
            rng_seed: 1,
            single_qubit_gate_duration: 35e-9,
        }
    }
}

/// Which of the two coupler pairs a CZ acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CouplerPair {
    D1L1,
    L2D2,
}

impl CouplerPair {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().replace(['_', ' '], "-").as_str() {
            "D1-L1" | "L1-D1" => Some(Self::D1L1),
            "L2-D2" | "D2-L2" => Some(Self::L2D2),
            _ => None,
        }
    }
}

impl DeviceConfig {
    /// Reads, merges over the defaults, fills derived fields and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::ConfigIo {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(text)?;
        let mut base = serde_json::to_value(Self::default())?;
        // Frequencies given through fsr/target_frequency alone are regenerated.
        if let Some(cpw) = user.get("cpw").and_then(Value::as_object) {
            let regenerate = !cpw.contains_key("mode_frequencies")
                && (cpw.contains_key("fsr") || cpw.contains_key("target_frequency"));
            if regenerate {
                base["cpw"]["mode_frequencies"] = Value::Null;
            }
        }
        merge(&mut base, user);
        let mut cfg: Self = serde_json::from_value(base)?;
        cfg.fill_derived();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn fill_derived(&mut self) {
        let cpw = &mut self.cpw;
        if cpw.mode_frequencies.is_none() {
            let target = cpw.target_frequency.unwrap_or(4.881e9);
            let n = cpw.mode_t1.len().max(1);
            cpw.mode_frequencies = Some(
                (0..n)
                    .map(|i| {
                        let m = cpw.first_mode_index + i as i64;
                        target + (m - cpw.target_mode_index) as f64 * cpw.fsr
                    })
                    .collect(),
            );
        }
    }

    /// Checks every documented invariant, naming the first violated field.
    pub fn validate(&self) -> Result<()> {
        if self.l_qubits.len() != 2 {
            return Err(invalid("l_qubits", "exactly two l-qubits"));
        }
        if self.data_qubits.len() != 2 {
            return Err(invalid("data_qubits", "exactly two data qubits"));
        }
        for (i, q) in self.l_qubits.iter().enumerate() {
            let f = |name: &str| format!("l_qubits[{i}].{name}");
            positive(&f("t1"), "t1", q.t1)?;
            positive(&f("t2_ramsey"), "t2_ramsey", q.t2_ramsey)?;
            probability(&f("readout_fidelity"), q.readout_fidelity)?;
            probability(&f("thermal_population"), q.thermal_population)?;
            probability(&f("single_clifford_error"), q.single_clifford_error)?;
            positive(&f("min_frequency"), "min_frequency", q.min_frequency)?;
            if !(q.min_frequency <= q.idle_frequency && q.idle_frequency <= q.max_frequency) {
                return Err(invalid(
                    f("idle_frequency"),
                    "min_frequency <= idle_frequency <= max_frequency",
                ));
            }
        }
        for (i, q) in self.data_qubits.iter().enumerate() {
            let f = |name: &str| format!("data_qubits[{i}].{name}");
            positive(&f("t1"), "t1", q.t1)?;
            positive(&f("t2_ramsey"), "t2_ramsey", q.t2_ramsey)?;
            probability(&f("readout_fidelity"), q.readout_fidelity)?;
            probability(&f("thermal_population"), q.thermal_population)?;
            probability(&f("single_clifford_error"), q.single_clifford_error)?;
        }

        let cpw = &self.cpw;
        positive("cpw.fsr", "fsr", cpw.fsr)?;
        if cpw.modes_retained == 0 || cpw.modes_retained % 2 == 0 {
            return Err(invalid("cpw.modes_retained", "modes_retained odd and >= 1"));
        }
        if cpw.mode_t1.is_empty() {
            return Err(invalid("cpw.mode_t1", "at least one mode lifetime"));
        }
        for (i, &t) in cpw.mode_t1.iter().enumerate() {
            positive(&format!("cpw.mode_t1[{i}]"), "mode_t1", t)?;
        }
        let freqs = cpw.mode_frequencies.as_deref().unwrap_or(&[]);
        if freqs.len() != cpw.mode_t1.len() {
            return Err(invalid(
                "cpw.mode_frequencies",
                "same length as mode_t1",
            ));
        }
        let target_offset = cpw.target_mode_index - cpw.first_mode_index;
        if target_offset < 0 || target_offset as usize >= freqs.len() {
            return Err(invalid(
                "cpw.target_mode_index",
                "target mode inside the tabulated mode range",
            ));
        }
        if freqs.len() >= 2 {
            let spacing = least_squares_slope(freqs);
            if ((spacing - cpw.fsr) / cpw.fsr).abs() > 0.01 {
                return Err(invalid(
                    "cpw.mode_frequencies",
                    format!("spacing {spacing:.4e} Hz within 1% of fsr"),
                ));
            }
        }
        if let Some(tf) = cpw.target_frequency {
            if (tf - freqs[target_offset as usize]).abs() > 0.01 * cpw.fsr {
                return Err(invalid(
                    "cpw.target_frequency",
                    "consistent with mode_frequencies at target_mode_index",
                ));
            }
        }

        for (i, cz) in self.cz_gates.iter().enumerate() {
            if CouplerPair::parse(&cz.pair).is_none() {
                return Err(invalid(
                    format!("cz_gates[{i}].pair"),
                    "one of D1-L1, L2-D2",
                ));
            }
            positive(&format!("cz_gates[{i}].duration"), "duration", cz.duration)?;
            probability(&format!("cz_gates[{i}].error_per_gate"), cz.error_per_gate)?;
        }

        let tr = &self.transfer;
        positive("transfer.g_max", "g_max", tr.g_max)?;
        positive("transfer.satd_duration", "satd_duration", tr.satd_duration)?;
        positive("transfer.total_duration", "total_duration", tr.total_duration)?;
        if tr.satd_duration > tr.total_duration {
            return Err(invalid(
                "transfer.satd_duration",
                "satd_duration <= total_duration",
            ));
        }
        if let Some(cap) = tr.coupling_cap {
            positive("transfer.coupling_cap", "coupling_cap", cap)?;
        }
        positive(
            "single_qubit_gate_duration",
            "single_qubit_gate_duration",
            self.single_qubit_gate_duration,
        )?;
        Ok(())
    }

    /// Frequency of the target mode (Hz).
    pub fn target_mode_frequency(&self) -> f64 {
        self.mode_frequency(self.cpw.target_mode_index)
    }

    /// Frequency of mode `m`, extrapolated by `fsr` outside the table.
    pub fn mode_frequency(&self, m: i64) -> f64 {
        let freqs = self.cpw.mode_frequencies.as_deref().unwrap_or(&[]);
        let first = self.cpw.first_mode_index;
        let last = first + freqs.len() as i64 - 1;
        if freqs.is_empty() {
            return self.cpw.target_frequency.unwrap_or(0.0)
                + (m - self.cpw.target_mode_index) as f64 * self.cpw.fsr;
        }
        if m < first {
            freqs[0] - (first - m) as f64 * self.cpw.fsr
        } else if m > last {
            freqs[freqs.len() - 1] + (m - last) as f64 * self.cpw.fsr
        } else {
            freqs[(m - first) as usize]
        }
    }

    /// Intrinsic lifetime of mode `m`; nearest tabulated value outside the table.
    pub fn mode_t1(&self, m: i64) -> f64 {
        let t1 = &self.cpw.mode_t1;
        let idx = (m - self.cpw.first_mode_index).clamp(0, t1.len() as i64 - 1);
        t1[idx as usize]
    }

    /// Indices of the retained modes, symmetric around the target.
    pub fn retained_modes(&self) -> Vec<i64> {
        let k = (self.cpw.modes_retained / 2) as i64;
        let m0 = self.cpw.target_mode_index;
        (m0 - k..=m0 + k).collect()
    }

    /// Idle detuning of each l-qubit from the target mode (Hz).
    pub fn idle_detunings(&self) -> [f64; 2] {
        let f = self.target_mode_frequency();
        [
            self.l_qubits[0].idle_frequency - f,
            self.l_qubits[1].idle_frequency - f,
        ]
    }

    pub fn cz(&self, pair: CouplerPair) -> Option<&CzGate> {
        self.cz_gates
            .iter()
            .find(|g| CouplerPair::parse(&g.pair) == Some(pair))
    }
}

fn positive(field: &str, name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("{name} > 0")))
    }
}

fn probability(field: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(field, "probability in [0, 1]"))
    }
}

fn least_squares_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in y.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (v - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Deep merge: objects merge key-wise, arrays of objects merge index-wise
/// (unlisted trailing defaults are kept), anything else is replaced.
fn merge(base: &mut Value, user: Value) {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) => {
            for (k, v) in u {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (Value::Array(b), Value::Array(u))
            if u.iter().all(Value::is_object) && b.iter().all(Value::is_object) =>
        {
            let mut out = Vec::with_capacity(u.len());
            for (i, v) in u.into_iter().enumerate() {
                match b.get(i).cloned() {
                    Some(mut slot) => {
                        merge(&mut slot, v);
                        out.push(slot);
                    }
                    None => out.push(v),
                }
            }
            if b.len() > out.len() {
                out.extend(b.drain(out.len()..));
            }
            *b = out;
        }
        (slot, v) => *slot = v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_device_table() {
        let cfg = DeviceConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg.l_qubits[0].t1, 113e-6);
        assert_eq!(cfg.cpw.fsr, 98e6);
        assert_eq!(cfg.mode_t1(cfg.cpw.target_mode_index), 5.23e-6);
        assert_eq!(cfg.target_mode_frequency(), 4.881e9);
        assert!((cfg.transfer.ramp_duration() - 35.5e-9).abs() < 1e-18);
    }

    #[test]
    fn negative_t1_is_rejected_with_field_name() {
        let err = DeviceConfig::from_json_str(r#"{"l_qubits":[{"t1":-1}]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("t1 > 0"), "{msg}");
        assert!(msg.contains("l_qubits[0].t1"), "{msg}");
    }

    #[test]
    fn partial_list_entries_keep_other_defaults() {
        let cfg = DeviceConfig::from_json_str(r#"{"l_qubits":[{"t1":50e-6},{}]}"#).unwrap();
        assert_eq!(cfg.l_qubits[0].t1, 50e-6);
        assert_eq!(cfg.l_qubits[0].t2_ramsey, 18e-6);
        assert_eq!(cfg.l_qubits[1].t1, 76e-6);
    }

    #[test]
    fn omitted_mode_frequencies_are_generated_from_fsr() {
        let cfg = DeviceConfig::from_json_str(
            r#"{"cpw":{"fsr":98e6,"target_frequency":4.881e9}}"#,
        )
        .unwrap();
        let f = cfg.cpw.mode_frequencies.as_ref().unwrap();
        assert_eq!(f.len(), 4);
        assert!((f[1] - 4.881e9).abs() < 1.0);
        assert!((f[0] - 4.783e9).abs() < 1.0);
        assert!((f[2] - 4.979e9).abs() < 1.0);
        // Within 0.1% of the measured neighbours.
        assert!((f[2] - 4.980e9).abs() / 4.980e9 < 1e-3);
        assert!((cfg.mode_frequency(48) - 4.685e9).abs() < 1.0);
    }

    #[test]
    fn idle_frequency_outside_band_is_rejected() {
        let err =
            DeviceConfig::from_json_str(r#"{"l_qubits":[{"idle_frequency":6e9}]}"#).unwrap_err();
        assert!(err.to_string().contains("min_frequency <= idle_frequency"));
    }

    #[test]
    fn even_mode_count_is_rejected() {
        let err = DeviceConfig::from_json_str(r#"{"cpw":{"modes_retained":4}}"#).unwrap_err();
        assert!(err.to_string().contains("modes_retained odd"));
    }

    #[test]
    fn bad_spacing_is_rejected() {
        let err = DeviceConfig::from_json_str(
            r#"{"cpw":{"mode_frequencies":[4.70e9,4.881e9,4.98e9,5.078e9]}}"#,
        );
        assert!(err.is_err());
        let err = DeviceConfig::from_json_str(r#"{"cpw":{"fsr":120e6,"mode_frequencies":[4.783e9,4.881e9,4.980e9,5.078e9]}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("within 1% of fsr"));
    }

    #[test]
    fn unknown_fields_fail_to_parse() {
        assert!(DeviceConfig::from_json_str(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = DeviceConfig::default();
        let again = DeviceConfig::from_json_str(&cfg.to_json_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn retained_modes_are_symmetric() {
        let cfg = DeviceConfig::default();
        assert_eq!(cfg.retained_modes(), vec![48, 49, 50, 51, 52]);
        let [d1, d2] = cfg.idle_detunings();
        assert!((d1 - 52e6).abs() < 1.0 && (d2 - 48e6).abs() < 1.0);
    }
}
