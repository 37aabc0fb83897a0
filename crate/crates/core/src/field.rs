//! Input wavefronts on the image-plane pixel grid.
//!
//! Arrays are indexed `[row, col]`, i.e. `[y, x]`, with shape `(height, width)`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::circular::wrap_phase;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "grid must be at least 1x1, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(rows, cols)` shape for ndarray.
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub(crate) fn check_shape<T>(&self, a: &Array2<T>, what: &str) -> Result<()> {
        if a.dim() != self.shape() {
            return Err(Error::Shape(format!(
                "{what} has shape {:?}, grid is {:?}",
                a.dim(),
                self.shape()
            )));
        }
        Ok(())
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
        }
    }
}

/// Complex amplitude `U(x, y)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Array2<Complex64>,
}

impl ComplexField {
    pub fn new(values: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        let grid = GridSpec::new(cols, rows)?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite field value {v}")));
        }
        Ok(Self { grid, values })
    }

    pub fn uniform(grid: GridSpec, value: Complex64) -> Result<Self> {
        Self::new(Array2::from_elem(grid.shape(), value))
    }

    /// Build `u·exp(iφ)` from an amplitude map and a phase map.
    pub fn from_polar(amplitude: &Array2<f64>, phase: &Array2<f64>) -> Result<Self> {
        if amplitude.dim() != phase.dim() {
            return Err(Error::Shape(format!(
                "amplitude {:?} vs phase {:?}",
                amplitude.dim(),
                phase.dim()
            )));
        }
        if amplitude.iter().any(|&a| a < 0.0) {
            return Err(Error::Domain("negative amplitude".into()));
        }
        let values = ndarray::Zip::from(amplitude)
            .and(phase)
            .map_collect(|&a, &p| Complex64::from_polar(a, p));
        Self::new(values)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn amplitude(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm())
    }

    /// Wrapped phase map; zero where the amplitude vanishes.
    pub fn phase(&self) -> Array2<f64> {
        self.values
            .mapv(|v| wrap_phase(crate::circular::arctan2(v.im, v.re)))
    }

    /// Pixels with nonzero amplitude.
    pub fn support(&self) -> Array2<bool> {
        self.values.mapv(|v| v.norm_sqr() > 0.0)
    }

    /// Same field with every value multiplied by `exp(i·theta)`.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = Complex64::from_polar(1.0, theta);
        Self {
            grid: self.grid,
            values: self.values.mapv(|v| v * r),
        }
    }
}

/// Geometry of `d` rectangular slits laid side by side along x.
///
/// Slit `k` covers columns `origin.0 + k·(width + gap) .. + width` and rows
/// `origin.1 .. origin.1 + length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlitLayout {
    pub d: usize,
    pub slit_width: usize,
    pub slit_gap: usize,
    pub slit_length: usize,
    /// `(x, y)` of the top-left pixel of slit 0.
    pub origin: (usize, usize),
}

impl SlitLayout {
    pub fn new(
        d: usize,
        slit_width: usize,
        slit_gap: usize,
        slit_length: usize,
        origin: (usize, usize),
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("slit count must be >= 1".into()));
        }
        if slit_width == 0 {
            return Err(Error::Dimension("slit width must be >= 1".into()));
        }
        if slit_length < slit_width {
            return Err(Error::Dimension(format!(
                "slit length {slit_length} shorter than slit width {slit_width}"
            )));
        }
        Ok(Self {
            d,
            slit_width,
            slit_gap,
            slit_length,
            origin,
        })
    }

    /// Layout centered on `grid`.
    pub fn centered(
        grid: GridSpec,
        d: usize,
        slit_width: usize,
        slit_gap: usize,
        slit_length: usize,
    ) -> Result<Self> {
        let probe = Self::new(d, slit_width, slit_gap, slit_length, (0, 0))?;
        let (w, h) = probe.extent();
        if w > grid.width || h > grid.height {
            return Err(Error::Dimension(format!(
                "slit block {w}x{h} does not fit grid {}x{}",
                grid.width, grid.height
            )));
        }
        Ok(Self {
            origin: ((grid.width - w) / 2, (grid.height - h) / 2),
            ..probe
        })
    }

    /// Six 10x10 slits with 4 px gaps centered on a 128x128 grid (600 slit pixels).
    pub fn standard() -> Self {
        Self::centered(GridSpec::default(), 6, 10, 4, 10).expect("default layout fits")
    }

    /// `(width, height)` of the bounding box of all slits.
    pub fn extent(&self) -> (usize, usize) {
        (
            self.d * self.slit_width + (self.d - 1) * self.slit_gap,
            self.slit_length,
        )
    }

    pub fn pixels_per_slit(&self) -> usize {
        self.slit_width * self.slit_length
    }

    pub fn total_pixels(&self) -> usize {
        self.d * self.pixels_per_slit()
    }

    pub fn check_fits(&self, grid: GridSpec) -> Result<()> {
        let (w, h) = self.extent();
        if self.origin.0 + w > grid.width || self.origin.1 + h > grid.height {
            return Err(Error::Dimension(format!(
                "slit block at {:?} with extent {w}x{h} exceeds grid {}x{}",
                self.origin, grid.width, grid.height
            )));
        }
        Ok(())
    }

    /// `(row, col)` of every pixel of slit `k`, row-major.
    pub fn slit_pixels(&self, k: usize) -> Vec<(usize, usize)> {
        assert!(k < self.d, "slit index {k} out of range");
        let x0 = self.origin.0 + k * (self.slit_width + self.slit_gap);
        let y0 = self.origin.1;
        (y0..y0 + self.slit_length)
            .flat_map(|r| (x0..x0 + self.slit_width).map(move |c| (r, c)))
            .collect()
    }

    /// Boolean mask of the union of all slits.
    pub fn region_mask(&self, grid: GridSpec) -> Result<Array2<bool>> {
        self.check_fits(grid)?;
        let mut mask = Array2::from_elem(grid.shape(), false);
        for k in 0..self.d {
            for p in self.slit_pixels(k) {
                mask[p] = true;
            }
        }
        Ok(mask)
    }
}

/// Pure qudit state `Σ c_k |k⟩` with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    coeffs: Vec<Complex64>,
}

impl QuditState {
    /// Normalizes `raw` to unit norm.
    pub fn new(raw: Vec<Complex64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Shape(
                "qudit state needs at least one coefficient".into(),
            ));
        }
        if raw.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite qudit coefficient".into()));
        }
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Domain("qudit state has zero norm".into()));
        }
        Ok(Self {
            coeffs: raw.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// Equal-amplitude state with the given phases.
    pub fn from_phases(phases: &[f64]) -> Result<Self> {
        Self::new(
            phases
                .iter()
                .map(|&p| Complex64::from_polar(1.0, p))
                .collect(),
        )
    }

    /// Logical basis vector `|k⟩` of dimension `d`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(Error::Shape(format!("basis index {k} >= dimension {d}")));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); d];
        c[k] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    /// Six slits whose phases advance by 2π/5 per slit: `(1/√6) Σ exp(i2πk/5) |k⟩`.
    pub fn equal_step() -> Self {
        let phases: Vec<f64> = (0..6).map(|k| 2.0 * PI * k as f64 / 5.0).collect();
        Self::from_phases(&phases).expect("finite phases")
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn phases(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| wrap_phase(c.arg())).collect()
    }
}

/// Slit-encoded qudit embedded in a uniform background.
///
/// Slit `k` carries `(|c_k| / max|c|)·exp(i arg c_k)`; everything else carries
/// `background_amplitude·exp(i·background_phase)`.
pub fn make_slit_mask(
    grid: GridSpec,
    layout: &SlitLayout,
    state: &QuditState,
    background_amplitude: f64,
    background_phase: f64,
) -> Result<ComplexField> {
    if state.dim() != layout.d {
        return Err(Error::Shape(format!(
            "state dimension {} does not match {} slits",
            state.dim(),
            layout.d
        )));
    }
    layout.check_fits(grid)?;
    if !(background_amplitude >= 0.0 && background_amplitude.is_finite()) {
        return Err(Error::Domain(format!(
            "background amplitude must be finite and >= 0, got {background_amplitude}"
        )));
    }
    let background = Complex64::from_polar(background_amplitude, background_phase);
    let mut values = Array2::from_elem(grid.shape(), background);
    let peak = state
        .coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    for (k, c) in state.coeffs().iter().enumerate() {
        let v = Complex64::from_polar(c.norm() / peak, c.arg());
        for p in layout.slit_pixels(k) {
            values[p] = v;
        }
    }
    ComplexField::new(values)
}

/// Quadratic (lens-like) phase `curvature·((x−cx)² + (y−cy)²)` with uniform amplitude.
pub fn make_lens_phase(
    grid: GridSpec,
    curvature: f64,
    center: (f64, f64),
    amplitude: f64,
) -> Result<ComplexField> {
    if !curvature.is_finite() || !center.0.is_finite() || !center.1.is_finite() {
        return Err(Error::Domain("lens parameters must be finite".into()));
    }
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::Domain(format!("invalid lens amplitude {amplitude}")));
    }
    let (cx, cy) = center;
    let values = Array2::from_shape_fn(grid.shape(), |(r, c)| {
        let dx = c as f64 - cx;
        let dy = r as f64 - cy;
        Complex64::from_polar(amplitude, wrap_phase(curvature * (dx * dx + dy * dy)))
    });
    ComplexField::new(values)
}

/// Geometric center of the grid, `((w−1)/2, (h−1)/2)`.
pub fn grid_center(grid: GridSpec) -> (f64, f64) {
    (
        (grid.width as f64 - 1.0) / 2.0,
        (grid.height as f64 - 1.0) / 2.0,
    )
}

/// Spatial mean of the field; the plane-wave reference `K e^{iμ}` of the interferometer.
pub fn mean_field(field: &ComplexField) -> Result<Complex64> {
    let n = field.values.len();
    if n == 0 {
        return Err(Error::Shape("mean of an empty field".into()));
    }
    let sum: Complex64 = field.values.iter().sum();
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use crate::circular::circular_distance;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_rejects_zero() {
        assert!(matches!(GridSpec::new(0, 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn default_layout_has_600_pixels() {
        let l = SlitLayout::standard();
        assert_eq!(l.total_pixels(), 600);
        assert_eq!(l.pixels_per_slit(), 100);
        l.check_fits(GridSpec::default()).unwrap();
        let mask = l.region_mask(GridSpec::default()).unwrap();
        assert_eq!(mask.iter().filter(|&&m| m).count(), 600);
    }

    #[test]
    fn equal_step_mask_phases() {
        let grid = GridSpec::default();
        let layout = SlitLayout::standard();
        let state = QuditState::equal_step();
        let f = make_slit_mask(grid, &layout, &state, 1.0, 0.0).unwrap();
        for k in 0..6 {
            let want = 2.0 * PI * k as f64 / 5.0;
            for p in layout.slit_pixels(k) {
                let v = f.values()[p];
                assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
                assert!(circular_distance(v.arg(), want) < 1e-12);
            }
        }
    }

    #[test]
    fn single_slit_no_background() {
        let grid = GridSpec::new(20, 20).unwrap();
        let layout = SlitLayout::new(1, 3, 0, 5, (4, 6)).unwrap();
        let state = QuditState::new(vec![c(1.0, 0.0)]).unwrap();
        let f = make_slit_mask(grid, &layout, &state, 0.0, 0.0).unwrap();
        let mut lit = 0;
        for ((r, col), v) in f.values().indexed_iter() {
            let inside = (6..11).contains(&r) && (4..7).contains(&col);
            if inside {
                assert_eq!(*v, c(1.0, 0.0));
                lit += 1;
            } else {
                assert_eq!(*v, c(0.0, 0.0));
            }
        }
        assert_eq!(lit, 15);
    }

    #[test]
    fn two_slit_quarter_wave() {
        let grid = GridSpec::new(16, 16).unwrap();
        let layout = SlitLayout::new(2, 3, 2, 4, (1, 1)).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let state = QuditState::new(vec![c(s, 0.0), c(0.0, s)]).unwrap();
        let f = make_slit_mask(grid, &layout, &state, 0.5, 0.0).unwrap();
        for (p0, p1) in layout.slit_pixels(0).into_iter().zip(layout.slit_pixels(1)) {
            let d = f.values()[p1].arg() - f.values()[p0].arg();
            assert_abs_diff_eq!(d, PI / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn brightest_slit_normalized_to_one() {
        let grid = GridSpec::new(32, 8).unwrap();
        let layout = SlitLayout::new(3, 2, 1, 2, (0, 0)).unwrap();
        let state = QuditState::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)]).unwrap();
        let f = make_slit_mask(grid, &layout, &state, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            f.values()[layout.slit_pixels(1)[0]].norm(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            f.values()[layout.slit_pixels(0)[0]].norm(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn slit_mask_errors() {
        let grid = GridSpec::new(10, 10).unwrap();
        let layout = SlitLayout::new(2, 4, 4, 4, (0, 0)).unwrap();
        let state = QuditState::equal_step();
        assert!(matches!(
            make_slit_mask(grid, &layout, &state, 1.0, 0.0),
            Err(Error::Shape(_))
        ));
        let state2 = QuditState::from_phases(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            make_slit_mask(grid, &layout, &state2, 1.0, 0.0),
            Err(Error::Dimension(_))
        ));
        assert!(SlitLayout::new(2, 4, 1, 3, (0, 0)).is_err());
    }

    #[test]
    fn flat_lens() {
        let grid = GridSpec::new(9, 7).unwrap();
        let f = make_lens_phase(grid, 0.0, grid_center(grid), 1.0).unwrap();
        assert!(f.phase().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn lens_center_and_boundary() {
        let grid = GridSpec::new(33, 33).unwrap();
        let center = (16.0, 16.0);
        let radius = 10.0;
        let curvature = PI / (radius * radius);
        let f = make_lens_phase(grid, curvature, center, 1.0).unwrap();
        let phase = f.phase();
        assert_eq!(phase[[16, 16]], 0.0);
        // exactly on the radius the phase is π, which stays at π in (−π, π]
        assert!(circular_distance(phase[[16, 26]], PI) < 1e-12);
        // one pixel further out it wraps to the negative side
        assert!(phase[[16, 27]] < 0.0);
    }

    #[test]
    fn lens_unit_step_equals_curvature() {
        let grid = GridSpec::new(21, 21).unwrap();
        let center = (10.0, 10.0);
        for &k in &[1e-3, 0.05, -0.2, 1.3] {
            let f = make_lens_phase(grid, k, center, 1.0).unwrap();
            let ph = f.phase();
            // (1)² − 0² = 1, so the finite difference is the curvature itself
            assert!(circular_distance(ph[[10, 11]] - ph[[10, 10]], k) < 1e-12);
        }
    }

    #[test]
    fn lens_reflection_symmetry() {
        let grid = GridSpec::new(128, 128).unwrap();
        let f = make_lens_phase(grid, PI / 2048.0, grid_center(grid), 1.0).unwrap();
        let v = f.values();
        for r in 0..128 {
            for c in 0..128 {
                assert_eq!(v[[r, c]], v[[127 - r, c]]);
                assert_eq!(v[[r, c]], v[[r, 127 - c]]);
            }
        }
    }

    #[test]
    fn mean_field_cases() {
        let grid = GridSpec::new(4, 4).unwrap();
        let u = ComplexField::uniform(grid, c(0.5, 0.0)).unwrap();
        assert_eq!(mean_field(&u).unwrap(), c(0.5, 0.0));

        let vals = Array2::from_shape_fn(
            (4, 4),
            |(r, _)| if r < 2 { c(1.0, 0.0) } else { c(-1.0, 0.0) },
        );
        let half = ComplexField::new(vals).unwrap();
        assert_eq!(mean_field(&half).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn mean_field_of_equal_step_mask() {
        let grid = GridSpec::default();
        let layout = SlitLayout::standard();
        let f = make_slit_mask(grid, &layout, &QuditState::equal_step(), 0.0, 0.0).unwrap();
        // oracle: per-slit phasor times slit area, summed, divided by grid size
        let mut oracle = c(0.0, 0.0);
        for k in 0..6 {
            oracle += Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 5.0) * 100.0;
        }
        oracle /= grid.len() as f64;
        let m = mean_field(&f).unwrap();
        assert_abs_diff_eq!(m.re, oracle.re, epsilon = 1e-12);
        assert_abs_diff_eq!(m.im, oracle.im, epsilon = 1e-12);
        // Σ_{k=0..5} exp(i2πk/5) = 1, so K = 100/16384
        assert_abs_diff_eq!(m.re, 100.0 / 16384.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn qudit_rejects_zero_norm() {
        assert!(QuditState::new(vec![c(0.0, 0.0); 3]).is_err());
        assert!(QuditState::new(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn state_is_normalized(raw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..12)) {
            let coeffs: Vec<Complex64> = raw.iter().map(|&(a, b)| c(a, b)).collect();
            prop_assume!(coeffs.iter().any(|z| z.norm() > 1e-6));
            let s = QuditState::new(coeffs).unwrap();
            let n: f64 = s.coeffs().iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }

        #[test]
        fn mask_is_background_outside_slits(
            bg_amp in 0.0f64..2.0,
            bg_phase in -PI..PI,
            phases in prop::collection::vec(-PI..PI, 3),
        ) {
            let grid = GridSpec::new(24, 12).unwrap();
            let layout = SlitLayout::new(3, 3, 2, 4, (2, 3)).unwrap();
            let state = QuditState::from_phases(&phases).unwrap();
            let f = make_slit_mask(grid, &layout, &state, bg_amp, bg_phase).unwrap();
            let mask = layout.region_mask(grid).unwrap();
            let bg = Complex64::from_polar(bg_amp, bg_phase);
            for (p, v) in f.values().indexed_iter() {
                if !mask[p] {
                    prop_assert_eq!(*v, bg);
                }
            }
        }
    }
}
