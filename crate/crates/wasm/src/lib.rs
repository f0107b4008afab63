//! Three operations for the static demo page in `www/`: the roots of the
//! spectral polynomial, a band diagram along real energies and a heat map of
//! `|Z^(n)_{r,s}|` over a patch of the upper half plane.

use finitegap::hill::GleProblem;
use finitegap::premodular::z_n;
use finitegap::spectral::{linspace, make_lattice, spectral_report};
use finitegap::{Lattice, MultiplicityTuple, Tolerances};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Spectrum {
    roots: Vec<f64>,
    classification: String,
    genus: u32,
}

#[wasm_bindgen]
impl Spectrum {
    /// Roots as interleaved `re, im` pairs.
    #[wasm_bindgen(getter)]
    pub fn roots(&self) -> Vec<f64> {
        self.roots.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn classification(&self) -> String {
        self.classification.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn genus(&self) -> u32 {
        self.genus
    }
}

#[wasm_bindgen]
pub struct BandDiagram {
    energies: Vec<f64>,
    trace: Vec<f64>,
    edges: Vec<f64>,
}

#[wasm_bindgen]
impl BandDiagram {
    #[wasm_bindgen(getter)]
    pub fn energies(&self) -> Vec<f64> {
        self.energies.clone()
    }

    /// `Re Delta1` at each energy.
    #[wasm_bindgen(getter)]
    pub fn trace(&self) -> Vec<f64> {
        self.trace.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }
}

fn tuple(n: &[u32]) -> Result<MultiplicityTuple, String> {
    let n: [u32; 4] = n
        .try_into()
        .map_err(|_| format!("need four multiplicities, got {}", n.len()))?;
    MultiplicityTuple::new(n).map_err(|e| e.to_string())
}

pub fn spectrum_of(n: &[u32], tau_re: f64, tau_im: f64) -> Result<Spectrum, String> {
    let tol = Tolerances::default();
    let n = tuple(n)?;
    let l = make_lattice(Complex64::new(tau_re, tau_im), &tol).map_err(|e| e.to_string())?;
    let r = spectral_report(&l, &n, &tol, false).map_err(|e| e.to_string())?;
    Ok(Spectrum {
        roots: r.roots.values().iter().flat_map(|z| [z.re, z.im]).collect(),
        classification: r.classification().as_str().into(),
        genus: r.genus,
    })
}

pub fn bands_of(n: &[u32], b: f64, lo: f64, hi: f64, steps: usize) -> Result<BandDiagram, String> {
    let tol = Tolerances::default();
    let l = make_lattice(Complex64::new(0.0, b), &tol).map_err(|e| e.to_string())?;
    let p = GleProblem::new(l, tuple(n)?, tol).map_err(|e| e.to_string())?;
    let report = p.stability_set_1d(lo, hi, steps).map_err(|e| e.to_string())?;
    let energies = linspace(lo, hi, steps);
    let trace = energies
        .iter()
        .map(|&x| p.delta1(Complex64::new(x, 0.0)).map(|d| d.re))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    Ok(BandDiagram {
        energies,
        trace,
        edges: report.edges,
    })
}

/// `|Z|` on an `nx x ny` grid, row-major with `Im tau` varying slowest.
/// Points where evaluation fails are `NaN`.
pub fn heatmap_of(
    n: u32,
    r: f64,
    s: f64,
    re: (f64, f64, usize),
    im: (f64, f64, usize),
) -> Result<Vec<f64>, String> {
    if !(im.0 > 0.0) {
        return Err("Im tau must be positive".into());
    }
    if !(1..=4).contains(&n) {
        return Err(format!("n must be 1..=4, got {n}"));
    }
    let tol = Tolerances::default();
    let xs = linspace(re.0, re.1, re.2);
    let mut out = Vec::with_capacity(re.2 * im.2);
    for y in linspace(im.0, im.1, im.2) {
        for &x in &xs {
            let v = Lattice::with_pole_guard(Complex64::new(x, y), tol.truncation, tol.pole_guard)
                .and_then(|l| z_n(&l, r, s, n))
                .map(|z| z.norm())
                .unwrap_or(f64::NAN);
            out.push(v);
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn spectrum(n: Vec<u32>, tau_re: f64, tau_im: f64) -> Result<Spectrum, JsError> {
    spectrum_of(&n, tau_re, tau_im).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bands(n: Vec<u32>, b: f64, lo: f64, hi: f64, steps: usize) -> Result<BandDiagram, JsError> {
    bands_of(&n, b, lo, hi, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn heatmap(
    n: u32,
    r: f64,
    s: f64,
    re_lo: f64,
    re_hi: f64,
    nx: usize,
    im_lo: f64,
    im_hi: f64,
    ny: usize,
) -> Result<Vec<f64>, JsError> {
    heatmap_of(n, r, s, (re_lo, re_hi, nx), (im_lo, im_hi, ny)).map_err(|e| JsError::new(&e))
}
