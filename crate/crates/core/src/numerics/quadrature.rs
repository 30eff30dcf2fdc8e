use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// Four integrals computed from the same integrand evaluations.
pub type Moments4 = [f64; 4];

// 21-point Kronrod rule with its embedded 10-point Gauss rule (QUADPACK qk21).
// Abscissae are the positive half, largest first; XGK[10] is the centre.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_745_931_085,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub const NODES_PER_PANEL: usize = 21;

/// Panel boundaries of a composite Gauss–Kronrod rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub panels: Vec<(f64, f64)>,
}

impl Mesh {
    pub fn nodes(&self) -> usize {
        self.panels.len() * NODES_PER_PANEL
    }

    /// Every panel split in half.
    pub fn refined(&self) -> Mesh {
        let panels = self
            .panels
            .iter()
            .flat_map(|&(a, b)| {
                let m = 0.5 * (a + b);
                [(a, m), (m, b)]
            })
            .collect();
        Mesh { panels }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub max_evaluations: usize,
    pub initial_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            max_evaluations: 400_000,
            initial_panels: 32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    pub integral: Moments4,
    pub mesh: Mesh,
    pub evaluations: usize,
}

fn add(a: &mut Moments4, b: &Moments4, w: f64) {
    for k in 0..4 {
        a[k] += w * b[k];
    }
}

/// Kronrod estimate and `|K − G|` on one panel.
fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<(Moments4, Moments4)>
where
    F: FnMut(f64) -> Result<Moments4>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [0.0; 4];
    let mut gauss = [0.0; 4];
    let fc = f(centre)?;
    add(&mut kronrod, &fc, WGK[10]);
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        add(&mut kronrod, &f1, WGK[j]);
        add(&mut kronrod, &f2, WGK[j]);
        if j % 2 == 1 {
            add(&mut gauss, &f1, WG[j / 2]);
            add(&mut gauss, &f2, WG[j / 2]);
        }
    }
    let mut err = [0.0; 4];
    for k in 0..4 {
        kronrod[k] *= half;
        gauss[k] *= half;
        err[k] = (kronrod[k] - gauss[k]).abs();
    }
    Ok((kronrod, err))
}

/// Fixed composite 21-point Kronrod rule on `mesh`. Summation runs in panel
/// order, so the result is a smooth function of any parameter inside `f`.
pub fn integrate_on_mesh<F>(mut f: F, mesh: &Mesh) -> Result<Moments4>
where
    F: FnMut(f64) -> Result<Moments4>,
{
    let mut total = [0.0; 4];
    for &(a, b) in &mesh.panels {
        let (k, _) = gk21(&mut f, a, b)?;
        add(&mut total, &k, 1.0);
    }
    Ok(total)
}

fn within(diff: &Moments4, scale: &Moments4, rtol: f64) -> bool {
    (0..4).all(|k| diff[k] <= rtol * scale[k])
}

/// Adaptive Gauss–Kronrod integration of a four-component integrand on
/// `[lo, hi]`, with `breakpoints` forced as panel edges.
///
/// `scale` maps the running estimate to the magnitude each component's error
/// is measured against, so components that integrate to nearly zero do not
/// stall refinement. After the error estimate meets `rtol`, the whole mesh is
/// refined once more and the two estimates must agree to `rtol`; the refined
/// estimate and mesh are returned.
pub fn integrate_adaptive<F, S>(
    mut f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    scale: S,
    opts: &AdaptiveOptions,
) -> Result<AdaptiveResult>
where
    F: FnMut(f64) -> Result<Moments4>,
    S: Fn(&Moments4) -> Moments4,
{
    if !(lo < hi) {
        return Err(Error::invalid("interval", format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let n0 = opts.initial_panels.max(1);
    let mut edges: Vec<f64> = (0..=n0)
        .map(|i| lo + (hi - lo) * i as f64 / n0 as f64)
        .chain(breakpoints.iter().copied().filter(|x| *x > lo && *x < hi))
        .collect();
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (hi - lo));

    struct Panel {
        a: f64,
        b: f64,
        value: Moments4,
        error: Moments4,
    }
    let mut panels = Vec::with_capacity(4 * edges.len());
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (value, error) = gk21(&mut f, w[0], w[1])?;
        evaluations += NODES_PER_PANEL;
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    let sum = |panels: &[Panel]| {
        let mut v = [0.0; 4];
        let mut e = [0.0; 4];
        for p in panels {
            add(&mut v, &p.value, 1.0);
            add(&mut e, &p.error, 1.0);
        }
        (v, e)
    };

    let mut rtol = opts.rtol;
    let mut previous = [f64::NAN; 4];
    loop {
        let (value, error) = sum(&panels);
        let sc = scale(&value);
        if within(&error, &sc, rtol) {
            let mesh = Mesh {
                panels: panels.iter().map(|p| (p.a, p.b)).collect(),
            };
            let refined = mesh.refined();
            let fine = integrate_on_mesh(&mut f, &refined)?;
            evaluations += refined.nodes();
            let diff: Moments4 = std::array::from_fn(|k| (fine[k] - value[k]).abs());
            if within(&diff, &scale(&fine), opts.rtol) {
                return Ok(AdaptiveResult {
                    integral: fine,
                    mesh: refined,
                    evaluations,
                });
            }
            previous = value;
            rtol *= 0.25;
            continue;
        }
        if evaluations >= opts.max_evaluations {
            return Err(Error::NonConvergence {
                evaluations,
                last: value,
                previous,
            });
        }
        // Split the panel with the worst error relative to its target.
        let worst = panels
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let r = (0..4)
                    .map(|k| if sc[k] > 0.0 { p.error[k] / sc[k] } else { 0.0 })
                    .fold(0.0, f64::max);
                (i, r)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        previous = value;
        for (a, b) in [(p.a, mid), (mid, p.b)] {
            let (value, error) = gk21(&mut f, a, b)?;
            evaluations += NODES_PER_PANEL;
            panels.push(Panel { a, b, value, error });
        }
        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    }
}

/// Gauss–Hermite nodes and weights for `∫ f(x) e^{−x²} dx`.
/// Nodes are returned in descending order.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix of the
    // Hermite recurrence, weights come from the first eigenvector components.
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        jacobi[(i, i - 1)] = b;
        jacobi[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], sqrt_pi * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Symmetrize against round-off.
    for i in 0..n / 2 {
        let x = 0.5 * (pairs[i].0 - pairs[n - 1 - i].0);
        let w = 0.5 * (pairs[i].1 + pairs[n - 1 - i].1);
        pairs[i] = (x, w);
        pairs[n - 1 - i] = (-x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-14);
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gk21_exact_for_high_degree_polynomials() {
        // Kronrod part is exact to degree 31, Gauss part to degree 19.
        let mut f = |x: f64| Ok([x.powi(30), x.powi(18), x.powi(31), 1.0]);
        let (k, err) = gk21(&mut f, -1.0, 1.0).unwrap();
        assert!((k[0] - 2.0 / 31.0).abs() < 1e-14);
        assert!((k[1] - 2.0 / 19.0).abs() < 1e-14);
        assert!(k[2].abs() < 1e-15);
        assert!(err[1] < 1e-14);
        assert!(err[0] > 1e-6);
    }

    #[test]
    fn adaptive_resolves_narrow_lorentzian() {
        let g = 1e-3;
        let f = |x: f64| {
            let l = g / (g * g + x * x);
            Ok([l, x * l, l * l, 0.0])
        };
        let r = integrate_adaptive(
            f,
            -1.0,
            1.0,
            &[],
            |v| [v[0].abs(), v[0].abs(), v[2].abs(), 1.0],
            &AdaptiveOptions::default(),
        )
        .unwrap();
        let exact = 2.0 * (1.0 / g).atan();
        assert!((r.integral[0] - exact).abs() < 1e-7 * exact);
        // ∫ g²/(g²+x²)² over [−1, 1]
        let t = (1.0 / g).atan();
        let exact2 = (t + (2.0 * t).sin() / 2.0) / g;
        assert!((r.integral[2] - exact2).abs() < 1e-7 * exact2);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let opts = AdaptiveOptions {
            max_evaluations: 200,
            ..AdaptiveOptions::default()
        };
        let f = |x: f64| Ok([1.0 / (1e-9 + x * x), 0.0, 0.0, 0.0]);
        let err = integrate_adaptive(f, -1.0, 1.0, &[0.3], |v| [v[0], 1.0, 1.0, 1.0], &opts).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn hermite_moments() {
        for n in [8, 64, 512] {
            let (x, w) = gauss_hermite(n);
            let m0: f64 = w.iter().sum();
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
            assert!((m0 - PI.sqrt()).abs() < 1e-12, "n={n} m0={m0}");
            assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12);
            assert!((m4 - 3.0 * PI.sqrt() / 4.0).abs() < 1e-12);
            assert!(x.windows(2).all(|p| p[0] > p[1]));
        }
    }
}
