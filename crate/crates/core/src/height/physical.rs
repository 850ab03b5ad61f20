use crate::error::{Error, Result};
use crate::field::HeightField;
use crate::grid::Grid2D;
use crate::params::FluidParameters;
use crate::profile::StratificationProfile;

/// Velocity, pressure and streamline energy sampled on the nodes of a
/// height field. Atmospheric pressure is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFields {
    pub grid: Grid2D,
    pub c: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pressure: Vec<f64>,
    pub energy: Vec<f64>,
    pub psi_x: Vec<f64>,
    pub psi_y: Vec<f64>,
    pub density: Vec<f64>,
    /// Vertical position of each node, `h(q, p)`.
    pub y: Vec<f64>,
    h_p: Vec<f64>,
}

/// Recovers the flow from streamline heights using `psi_y = -1/h_p`,
/// `psi_x = h_q/h_p`, `u - c = psi_y/sqrt(rho)` and `v = -psi_x/sqrt(rho)`.
/// The pressure is `E - |grad psi|^2/2 - g rho y` with
/// `E(p) = Q/2 + int_0^p beta(-s) ds`.
pub fn recover_physical(
    h: &HeightField,
    params: &FluidParameters,
    profile: &StratificationProfile,
    c: f64,
) -> Result<PhysicalFields> {
    let h_p = h.h_p();
    let min_hp = h_p.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_hp > 0.0) {
        return Err(Error::StagnationEncountered { min_hp });
    }
    let h_q = h.h_q();
    let g = &h.grid;
    let n = g.len();
    let mut out = PhysicalFields {
        grid: g.clone(),
        c,
        u: vec![0.0; n],
        v: vec![0.0; n],
        pressure: vec![0.0; n],
        energy: vec![0.0; n],
        psi_x: vec![0.0; n],
        psi_y: vec![0.0; n],
        density: vec![0.0; n],
        y: h.values.clone(),
        h_p: h_p.clone(),
    };
    for j in 0..=g.np {
        let p = g.p_values[j];
        let rho = profile.density(p);
        let sr = rho.sqrt();
        let energy = params.q / 2.0 + profile.bernoulli_integral(p);
        for i in 0..g.nq {
            let k = g.idx(i, j);
            let psi_y = -1.0 / h_p[k];
            let psi_x = h_q[k] / h_p[k];
            out.psi_x[k] = psi_x;
            out.psi_y[k] = psi_y;
            out.density[k] = rho;
            out.u[k] = c + psi_y / sr;
            out.v[k] = -psi_x / sr;
            out.energy[k] = energy;
            out.pressure[k] =
                energy - 0.5 * (psi_x * psi_x + psi_y * psi_y) - params.g * rho * h.values[k];
        }
    }
    Ok(out)
}

impl PhysicalFields {
    /// Pseudo mass flux `int_0^eta sqrt(rho)(u - c) dy` of every column,
    /// evaluated by the trapezoidal rule in the streamline coordinate with
    /// `dy = h_p dp`.
    pub fn column_flux(&self) -> Vec<f64> {
        let g = &self.grid;
        let dp = g.dp();
        (0..g.nq)
            .map(|i| {
                let f = |j: usize| {
                    let k = g.idx(i, j);
                    self.density[k].sqrt() * (self.u[k] - self.c) * self.h_p[k]
                };
                let inner: f64 = (1..g.np).map(f).sum();
                dp * (0.5 * (f(0) + f(g.np)) + inner)
            })
            .collect()
    }

    /// Pressure along the surface row.
    pub fn surface_pressure(&self) -> &[f64] {
        let g = &self.grid;
        &self.pressure[g.np * g.nq..]
    }
}
