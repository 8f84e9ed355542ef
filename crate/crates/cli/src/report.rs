//! JSON and CSV rendering. Complex numbers are `[re, im]` in JSON and paired
//! `_re`/`_im` columns in CSV; angles carry both the unwrapped value and the
//! value reduced to `[0, 2π)`.

use std::io::Write;
use std::path::Path;

use nhphase_core::phases::mod_two_pi;
use nhphase_core::two_level::PeriodicCoefficient;
use nhphase_core::C64;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub fn cplx(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn angle(x: f64) -> Value {
    json!({ "value": x, "mod_2pi": mod_two_pi(x) })
}

/// Complex phase angle: the real part is the angle, the imaginary part a
/// log-amplitude and is not reduced.
pub fn complex_angle(z: C64) -> Value {
    json!({ "value": cplx(z), "mod_2pi": [mod_two_pi(z.re), z.im] })
}

pub fn coefficient(c: &PeriodicCoefficient) -> Value {
    match c {
        PeriodicCoefficient::Periodic(z) => json!({ "status": "periodic", "value": cplx(*z) }),
        PeriodicCoefficient::AllPeriodic(z) => json!({ "status": "all_periodic", "value": cplx(*z) }),
        PeriodicCoefficient::Resonance => json!({ "status": "resonance", "value": Value::Null }),
    }
}

pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SWEEP_HEADER: &str = "theta,phi_i,gamma1,gamma2,gamma_tilde1,gamma_tilde2,eta,c1_0_re,c1_0_im,resonance";

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub theta: f64,
    pub phi_i: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_tilde1: f64,
    pub gamma_tilde2: f64,
    pub eta: f64,
    pub c1_0: PeriodicCoefficient,
}

impl SweepRow {
    pub fn csv(&self) -> String {
        let (re, im) = match self.c1_0.value() {
            Some(z) => (csv_float(z.re), csv_float(z.im)),
            None => (String::new(), String::new()),
        };
        [
            csv_float(self.theta),
            csv_float(self.phi_i),
            csv_float(self.gamma1),
            csv_float(self.gamma2),
            csv_float(self.gamma_tilde1),
            csv_float(self.gamma_tilde2),
            csv_float(self.eta),
            re,
            im,
            self.c1_0.is_resonance().to_string(),
        ]
        .join(",")
    }

    pub fn json(&self) -> Value {
        json!({
            "theta": self.theta,
            "phi_i": self.phi_i,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "gamma_tilde1": self.gamma_tilde1,
            "gamma_tilde2": self.gamma_tilde2,
            "eta": self.eta,
            "c1_0": coefficient(&self.c1_0),
            "resonance": self.c1_0.is_resonance(),
        })
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

/// Writes to `dest`, or to stdout when `None`.
pub fn emit(text: &str, dest: Option<&Path>) -> CliResult<()> {
    match dest {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}
