//! Run reports: residuals, perturbation norms, structure deviations, PSD
//! certificates, the eigenvalue before/after table, parameters, and
//! condition estimates. Serialized as JSON and rendered as text with
//! 6-significant-digit complex numbers.

use quadembed_core::c64;
use serde::Serialize;

/// One row of the eigenvalue table, tagged with its pairing partner.
#[derive(Debug, Clone, Serialize)]
pub struct EigRow {
    pub before: [f64; 2],
    pub after: [f64; 2],
    pub partner: [f64; 2],
    pub kind: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub class: String,
    pub method: String,
    pub rr_a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rr_f: Option<f64>,
    pub norm_dm: f64,
    pub norm_dd: f64,
    pub norm_dk: f64,
    pub structure_ok: bool,
    /// Relative deviations of the updated (M, D, K) from the class symmetry.
    pub structure_deviation: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd_certificates: Option<[bool; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psd_min_eigenvalues: Option<[f64; 2]>,
    pub eigenvalues: Vec<EigRow>,
    pub parameters: Vec<(String, f64)>,
    pub condition: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spillover_max_drift: Option<f64>,
    pub assertions: Vec<String>,
}

/// Format with 6 significant digits, plain notation when reasonable.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (sig as i32 - 1 - mag).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.*e}", sig - 1, x)
    }
}

/// Render a complex number as `a+bi` / `a-bi` with 6 significant digits.
pub fn fmt_c(z: c64) -> String {
    if z.im == 0.0 {
        return fmt_sig(z.re, 6);
    }
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", fmt_sig(z.re, 6), sign, fmt_sig(z.im.abs(), 6))
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let push = |s: &mut String, line: String| {
            s.push_str(&line);
            s.push('\n');
        };
        push(&mut s, format!("class:        {}", self.class));
        push(&mut s, format!("method:       {}", self.method));
        push(&mut s, format!("RR_a:         {:.4e}", self.rr_a));
        if let Some(rr_f) = self.rr_f {
            push(&mut s, format!("RR_f:         {:.4e}", rr_f));
        }
        push(
            &mut s,
            format!(
                "|dM|_F = {}   |dD|_F = {}   |dK|_F = {}",
                fmt_sig(self.norm_dm, 6),
                fmt_sig(self.norm_dd, 6),
                fmt_sig(self.norm_dk, 6)
            ),
        );
        push(
            &mut s,
            format!(
                "structure:    {} (deviations M {:.2e}, D {:.2e}, K {:.2e})",
                if self.structure_ok { "preserved" } else { "NOT certified" },
                self.structure_deviation[0],
                self.structure_deviation[1],
                self.structure_deviation[2]
            ),
        );
        if let (Some(cert), Some(mins)) = (self.psd_certificates, self.psd_min_eigenvalues) {
            push(
                &mut s,
                format!(
                    "psd:          dM {} (min eig {:.3e}), dK {} (min eig {:.3e})",
                    cert[0], mins[0], cert[1], mins[1]
                ),
            );
        }
        if let Some(d) = self.spillover_max_drift {
            push(&mut s, format!("spillover:    max fixed-eigenvalue drift {:.3e}", d));
        }
        if !self.parameters.is_empty() {
            let params: Vec<String> =
                self.parameters.iter().map(|(k, v)| format!("{k} = {}", fmt_sig(*v, 6))).collect();
            push(&mut s, format!("parameters:   {}", params.join(", ")));
        }
        if !self.condition.is_empty() {
            let conds: Vec<String> =
                self.condition.iter().map(|(k, v)| format!("{k} = {:.3e}", v)).collect();
            push(&mut s, format!("conditioning: {}", conds.join(", ")));
        }
        push(&mut s, "eigenvalues (before -> after, pairing partner):".into());
        for row in &self.eigenvalues {
            push(
                &mut s,
                format!(
                    "  [{}] {} -> {}   (partner {})",
                    row.kind,
                    fmt_c(c64::new(row.before[0], row.before[1])),
                    fmt_c(c64::new(row.after[0], row.after[1])),
                    fmt_c(c64::new(row.partner[0], row.partner[1]))
                ),
            );
        }
        for a in &self.assertions {
            push(&mut s, format!("note: {a}"));
        }
        s
    }
}
