//! Flat `key=value` run configuration with dotted keys.
//!
//! Floats are written with `{:?}` so a file emitted by one run re-parses to
//! the identical configuration.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use ddephase::stuart_landau::SLParams;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Reduced,
    Dde,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: SLParams,
    /// Expansion order (reduce, residual, simulate-phase).
    pub order: usize,
    /// Fourier truncation order.
    pub k: usize,
    /// Collocation points per axis; 0 selects `4K + 1`.
    pub lattice: usize,
    pub tol_res: f64,
    pub sim_t_end: f64,
    /// Step of the delay integrator; 0 selects the default step.
    pub sim_h: f64,
    pub sim_psi0: f64,
    pub sim_stride: usize,
    pub phase_h: f64,
    pub sweep_mode: SweepKind,
    pub sweep_rho_min: f64,
    pub sweep_rho_max: f64,
    pub sweep_rho_n: usize,
    pub sweep_tau_min: f64,
    pub sweep_tau_max: f64,
    pub sweep_tau_n: usize,
    pub sweep_t_end: f64,
    pub sweep_probe1: f64,
    pub sweep_probe2: f64,
    pub curves_tau_min: f64,
    pub curves_tau_max: f64,
    pub curves_tau_n: usize,
    pub residual_eps_hi: f64,
    pub residual_eps_lo: f64,
    pub residual_lattice: usize,
    pub residual_s_points: usize,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: SLParams {
                rho: 0.7,
                tau: 0.5,
                ..SLParams::default()
            },
            order: 2,
            k: 8,
            lattice: 0,
            tol_res: ddephase::fourier::DEFAULT_TOL_RES,
            sim_t_end: 100.0,
            sim_h: 0.0,
            sim_psi0: 1.0,
            sim_stride: 20,
            phase_h: 0.01,
            sweep_mode: SweepKind::Reduced,
            sweep_rho_min: 0.0,
            sweep_rho_max: TAU,
            sweep_rho_n: 64,
            sweep_tau_min: 0.0,
            sweep_tau_max: 8.0,
            sweep_tau_n: 64,
            sweep_t_end: 1000.0,
            sweep_probe1: 0.3,
            sweep_probe2: std::f64::consts::PI - 0.3,
            curves_tau_min: 0.0,
            curves_tau_max: 2.0,
            curves_tau_n: 41,
            residual_eps_hi: 0.02,
            residual_eps_lo: 0.01,
            residual_lattice: 24,
            residual_s_points: 9,
            seed: None,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse().with_context(|| format!("{key}: expected a number, got {v:?}"))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse().with_context(|| format!("{key}: expected a nonnegative integer, got {v:?}"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let k = key.trim();
        match k {
            "model.alpha" => self.model.alpha = parse_f64(k, v)?,
            "model.beta" => self.model.beta = parse_f64(k, v)?,
            "model.gamma" => self.model.gamma = parse_f64(k, v)?,
            "model.delta" => self.model.delta = parse_f64(k, v)?,
            "model.eps" => self.model.eps = parse_f64(k, v)?,
            "model.rho" => self.model.rho = parse_f64(k, v)?,
            "model.tau" => self.model.tau = parse_f64(k, v)?,
            "solver.order" => self.order = parse_usize(k, v)?,
            "solver.k" => self.k = parse_usize(k, v)?,
            "solver.lattice" => self.lattice = parse_usize(k, v)?,
            "solver.tol_res" => self.tol_res = parse_f64(k, v)?,
            "simulate.t_end" => self.sim_t_end = parse_f64(k, v)?,
            "simulate.h" => self.sim_h = parse_f64(k, v)?,
            "simulate.psi0" => self.sim_psi0 = parse_f64(k, v)?,
            "simulate.stride" => self.sim_stride = parse_usize(k, v)?,
            "simulate.phase_h" => self.phase_h = parse_f64(k, v)?,
            "sweep.mode" => {
                self.sweep_mode = match v {
                    "reduced" => SweepKind::Reduced,
                    "dde" => SweepKind::Dde,
                    _ => bail!("sweep.mode: expected reduced or dde, got {v:?}"),
                }
            }
            "sweep.rho_min" => self.sweep_rho_min = parse_f64(k, v)?,
            "sweep.rho_max" => self.sweep_rho_max = parse_f64(k, v)?,
            "sweep.rho_n" => self.sweep_rho_n = parse_usize(k, v)?,
            "sweep.tau_min" => self.sweep_tau_min = parse_f64(k, v)?,
            "sweep.tau_max" => self.sweep_tau_max = parse_f64(k, v)?,
            "sweep.tau_n" => self.sweep_tau_n = parse_usize(k, v)?,
            "sweep.t_end" => self.sweep_t_end = parse_f64(k, v)?,
            "sweep.probe1" => self.sweep_probe1 = parse_f64(k, v)?,
            "sweep.probe2" => self.sweep_probe2 = parse_f64(k, v)?,
            "curves.tau_min" => self.curves_tau_min = parse_f64(k, v)?,
            "curves.tau_max" => self.curves_tau_max = parse_f64(k, v)?,
            "curves.tau_n" => self.curves_tau_n = parse_usize(k, v)?,
            "residual.eps_hi" => self.residual_eps_hi = parse_f64(k, v)?,
            "residual.eps_lo" => self.residual_eps_lo = parse_f64(k, v)?,
            "residual.lattice" => self.residual_lattice = parse_usize(k, v)?,
            "residual.s_points" => self.residual_s_points = parse_usize(k, v)?,
            "seed" => {
                self.seed = match v {
                    "none" => None,
                    _ => Some(v.parse().with_context(|| format!("seed: expected an integer, got {v:?}"))?),
                }
            }
            _ => bail!("unknown configuration key {k:?}"),
        }
        Ok(())
    }

    /// Apply a `key=value` assignment.
    pub fn assign(&mut self, line: &str) -> Result<()> {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, got {line:?}"))?;
        self.set(k, v)
    }

    /// Parse a document; blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            cfg.assign(line).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(cfg)
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| format!("{x:?}");
        let m = &self.model;
        vec![
            ("model.alpha", f(m.alpha)),
            ("model.beta", f(m.beta)),
            ("model.gamma", f(m.gamma)),
            ("model.delta", f(m.delta)),
            ("model.eps", f(m.eps)),
            ("model.rho", f(m.rho)),
            ("model.tau", f(m.tau)),
            ("solver.order", self.order.to_string()),
            ("solver.k", self.k.to_string()),
            ("solver.lattice", self.lattice.to_string()),
            ("solver.tol_res", f(self.tol_res)),
            ("simulate.t_end", f(self.sim_t_end)),
            ("simulate.h", f(self.sim_h)),
            ("simulate.psi0", f(self.sim_psi0)),
            ("simulate.stride", self.sim_stride.to_string()),
            ("simulate.phase_h", f(self.phase_h)),
            (
                "sweep.mode",
                match self.sweep_mode {
                    SweepKind::Reduced => "reduced".into(),
                    SweepKind::Dde => "dde".into(),
                },
            ),
            ("sweep.rho_min", f(self.sweep_rho_min)),
            ("sweep.rho_max", f(self.sweep_rho_max)),
            ("sweep.rho_n", self.sweep_rho_n.to_string()),
            ("sweep.tau_min", f(self.sweep_tau_min)),
            ("sweep.tau_max", f(self.sweep_tau_max)),
            ("sweep.tau_n", self.sweep_tau_n.to_string()),
            ("sweep.t_end", f(self.sweep_t_end)),
            ("sweep.probe1", f(self.sweep_probe1)),
            ("sweep.probe2", f(self.sweep_probe2)),
            ("curves.tau_min", f(self.curves_tau_min)),
            ("curves.tau_max", f(self.curves_tau_max)),
            ("curves.tau_n", self.curves_tau_n.to_string()),
            ("residual.eps_hi", f(self.residual_eps_hi)),
            ("residual.eps_lo", f(self.residual_eps_lo)),
            ("residual.lattice", self.residual_lattice.to_string()),
            ("residual.s_points", self.residual_s_points.to_string()),
            ("seed", self.seed.map_or("none".into(), |s| s.to_string())),
        ]
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// SHA-256 of the emitted document, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.emit().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
