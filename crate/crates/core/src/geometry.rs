//! Sub-channel frequency grid and colinear uniform linear arrays.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// `count` equally spaced sub-channel centers `f_start + l·delta_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    f_start: f64,
    delta_f: f64,
    count: usize,
}

impl FrequencyGrid {
    /// Grid from `f_start` up to and including the last center not beyond `f_stop`.
    pub fn new(f_start: f64, f_stop: f64, delta_f: f64) -> Result<Self> {
        if !(f_start > 0.0) || !f_start.is_finite() {
            return Err(Error::invalid("f_start", format!("must be positive, got {f_start}")));
        }
        if !(delta_f > 0.0) || !delta_f.is_finite() {
            return Err(Error::invalid("delta_f", format!("must be positive, got {delta_f}")));
        }
        if !(f_stop > f_start) || !f_stop.is_finite() {
            return Err(Error::invalid(
                "f_stop",
                format!("must exceed f_start ({f_start}), got {f_stop}"),
            ));
        }
        // tolerate representation error in the span/Δf ratio
        let steps = ((f_stop - f_start) / delta_f * (1.0 + 1e-12)).floor();
        Ok(Self {
            f_start,
            delta_f,
            count: steps as usize + 1,
        })
    }

    /// Single-point grid, used for one-frequency analyses.
    pub fn single(freq: f64, delta_f: f64) -> Result<Self> {
        if !(freq > 0.0) || !(delta_f > 0.0) {
            return Err(Error::invalid("freq", "frequency and Δf must be positive"));
        }
        Ok(Self {
            f_start: freq,
            delta_f,
            count: 1,
        })
    }

    pub fn f_start(&self) -> f64 {
        self.f_start
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Center of sub-channel `l`, computed from the index (no running sum).
    pub fn center(&self, l: usize) -> f64 {
        self.f_start + l as f64 * self.delta_f
    }

    pub fn f_stop(&self) -> f64 {
        self.center(self.count - 1)
    }

    pub fn centers(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(|l| self.center(l))
    }

    /// Index of the grid center closest to `freq`.
    pub fn nearest_index(&self, freq: f64) -> usize {
        let x = ((freq - self.f_start) / self.delta_f).round();
        x.clamp(0.0, (self.count - 1) as f64) as usize
    }

    pub fn contains(&self, freq: f64) -> bool {
        let slack = 1e-9 * self.delta_f;
        freq >= self.f_start - slack && freq <= self.f_stop() + slack
    }
}

/// Colinear uniform linear array of identical elements enclosed by Chu spheres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaConfig {
    n_elements: usize,
    spacing: f64,
    element_radius: f64,
}

impl UlaConfig {
    /// The `radius ≤ spacing/2` bound only applies when the array has
    /// neighbours; a lone element may be arbitrarily large.
    pub fn new(n_elements: usize, spacing: f64, element_radius: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::invalid("n_elements", "must be at least 1"));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid("spacing", format!("must be positive, got {spacing}")));
        }
        if !(element_radius > 0.0) || !element_radius.is_finite() {
            return Err(Error::invalid(
                "element_radius",
                format!("must be positive, got {element_radius}"),
            ));
        }
        if n_elements > 1 && element_radius > 0.5 * spacing * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "element_radius",
                format!("{element_radius} m overlaps neighbours at spacing {spacing} m"),
            ));
        }
        Ok(Self {
            n_elements,
            spacing,
            element_radius,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn element_radius(&self) -> f64 {
        self.element_radius
    }

    /// Axial coordinates `m·spacing`.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_elements).map(|m| m as f64 * self.spacing).collect()
    }

    /// Distance between elements `i` and `j`, exactly `|i−j|·spacing`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        i.abs_diff(j) as f64 * self.spacing
    }

    pub fn distance_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_elements, self.n_elements, |i, j| self.distance(i, j))
    }
}
