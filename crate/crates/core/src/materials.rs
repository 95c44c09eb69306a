//! Elastic layers, laminate composition and composite plate stiffness.
//!
//! A laminate is stacked bottom-first: layer 0 spans `z ∈ [0, h₀]`, layer 1
//! sits on top of it. All quantities are SI (Pa, m, N·m).

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{check_positive, ModelError, Result};

/// Isotropic elastic layer of uniform thickness.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaterialLayer {
    pub name: String,
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// Layer thickness (m).
    pub thickness: f64,
}

impl MaterialLayer {
    pub fn new(
        name: impl Into<String>,
        youngs_modulus: f64,
        poisson_ratio: f64,
        thickness: f64,
    ) -> Result<Self> {
        let layer = Self {
            name: name.into(),
            youngs_modulus,
            poisson_ratio,
            thickness,
        };
        layer.validate()?;
        Ok(layer)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("youngs_modulus", self.youngs_modulus)?;
        check_positive("thickness", self.thickness)?;
        if !(self.poisson_ratio >= 0.0 && self.poisson_ratio < 0.5) {
            return Err(ModelError::InvalidParameter {
                name: "poisson_ratio",
                value: self.poisson_ratio,
                reason: "must lie in [0, 0.5)",
            });
        }
        Ok(())
    }

    /// Plate modulus `E / (1 - ν²)`.
    pub fn plate_modulus(&self) -> f64 {
        self.youngs_modulus / (1.0 - self.poisson_ratio * self.poisson_ratio)
    }

    /// Same material with a different thickness.
    pub fn with_thickness(&self, thickness: f64) -> Self {
        Self {
            thickness,
            ..self.clone()
        }
    }
}

/// Modulus weighting used when locating the neutral plane of a two-layer stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NeutralPlaneWeight {
    /// Weights `E / (1 - ν)`, the commonly published composite-membrane form.
    #[default]
    LinearPoisson,
    /// Weights `E / (1 - ν²)` (plate modulus, classical laminate theory).
    PlaneStrain,
}

impl NeutralPlaneWeight {
    fn weight(self, layer: &MaterialLayer) -> f64 {
        match self {
            Self::LinearPoisson => layer.youngs_modulus / (1.0 - layer.poisson_ratio),
            Self::PlaneStrain => layer.plate_modulus(),
        }
    }
}

/// One- or two-layer diaphragm, bottom layer first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Laminate {
    layers: Vec<MaterialLayer>,
    weight: NeutralPlaneWeight,
}

impl Laminate {
    pub fn new(layers: Vec<MaterialLayer>) -> Result<Self> {
        Self::with_weight(layers, NeutralPlaneWeight::default())
    }

    pub fn with_weight(layers: Vec<MaterialLayer>, weight: NeutralPlaneWeight) -> Result<Self> {
        if layers.is_empty() || layers.len() > 2 {
            return Err(ModelError::LayerCount(layers.len()));
        }
        for layer in &layers {
            layer.validate()?;
        }
        Ok(Self { layers, weight })
    }

    pub fn single(layer: MaterialLayer) -> Result<Self> {
        Self::new(alloc::vec![layer])
    }

    pub fn layers(&self) -> &[MaterialLayer] {
        &self.layers
    }

    pub fn weight(&self) -> NeutralPlaneWeight {
        self.weight
    }

    /// Total thickness `h` (m).
    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Layers with their `(z_bottom, z_top)` extents.
    pub fn layer_extents(&self) -> impl Iterator<Item = (&MaterialLayer, f64, f64)> + '_ {
        let mut z = 0.0;
        self.layers.iter().map(move |l| {
            let bottom = z;
            z += l.thickness;
            (l, bottom, z)
        })
    }

    /// Same stack with the layer order reversed.
    pub fn flipped(&self) -> Self {
        let mut layers = self.layers.clone();
        layers.reverse();
        Self {
            layers,
            weight: self.weight,
        }
    }

    /// Thickness-weighted Poisson ratio of the stack.
    pub fn effective_poisson_ratio(&self) -> f64 {
        let h = self.total_thickness();
        self.layers
            .iter()
            .map(|l| l.poisson_ratio * l.thickness)
            .sum::<f64>()
            / h
    }

    /// Neutral-plane height `e` measured from the bottom face (m).
    ///
    /// A single layer returns `h/2`. Two layers use
    ///
    /// ```text
    /// e = [w₁ h₁ (h₁ + 2h₀) + w₀ h₀²] / (2 [w₁ h₁ + w₀ h₀])
    /// ```
    ///
    /// with `w` the modulus weight of [`NeutralPlaneWeight`], layer 0 the
    /// bottom layer and layer 1 the top.
    pub fn neutral_plane(&self) -> f64 {
        match self.layers.as_slice() {
            [only] => 0.5 * only.thickness,
            [bottom, top] => {
                let wb = self.weight.weight(bottom);
                let wt = self.weight.weight(top);
                let (hb, ht) = (bottom.thickness, top.thickness);
                (wt * ht * (ht + 2.0 * hb) + wb * hb * hb) / (2.0 * (wt * ht + wb * hb))
            }
            _ => unreachable!("layer count checked at construction"),
        }
    }

    /// Flexural rigidity `D` (N·m): the bending-stiffness integral
    /// `Σ Eᵢ/(1-νᵢ²) ∫ (z - e)² dz` over each layer, taken about
    /// [`neutral_plane`](Self::neutral_plane).
    ///
    /// For a single layer this is `E h³ / (12 (1 - ν²))`.
    pub fn flexural_rigidity(&self) -> f64 {
        let e = self.neutral_plane();
        self.layer_extents()
            .map(|(layer, zb, zt)| {
                let (a, b) = (zb - e, zt - e);
                layer.plate_modulus() * (b * b * b - a * a * a) / 3.0
            })
            .sum()
    }

    /// Composite rigidity as commonly printed for an Al-on-PI membrane:
    ///
    /// ```text
    /// D = E₁[(h - e)³ - (h₂ - e)³] / (3(1-ν₁²)) + E₂(h₂ - e)³ / (3(1-ν₂²))
    /// ```
    ///
    /// where layer 2 is the bottom layer and layer 1 the top. It omits the
    /// bottom layer's contribution below the neutral plane, so it is kept only
    /// as a diagnostic next to [`flexural_rigidity`](Self::flexural_rigidity).
    /// A single layer returns the single-layer rigidity.
    pub fn flexural_rigidity_literal(&self) -> f64 {
        match self.layers.as_slice() {
            [_] => self.flexural_rigidity(),
            [bottom, top] => {
                let e = self.neutral_plane();
                let h = self.total_thickness();
                let h2 = bottom.thickness;
                let cube = |x: f64| x * x * x;
                top.plate_modulus() * (cube(h - e) - cube(h2 - e)) / 3.0
                    + bottom.plate_modulus() * cube(h2 - e) / 3.0
            }
            _ => unreachable!("layer count checked at construction"),
        }
    }
}

/// Neutral plane of a laminate; see [`Laminate::neutral_plane`].
pub fn neutral_plane(laminate: &Laminate) -> f64 {
    laminate.neutral_plane()
}

/// Flexural rigidity of a laminate; see [`Laminate::flexural_rigidity`].
pub fn flexural_rigidity(laminate: &Laminate) -> f64 {
    laminate.flexural_rigidity()
}

/// Literal composite-membrane rigidity; see [`Laminate::flexural_rigidity_literal`].
pub fn flexural_rigidity_literal(laminate: &Laminate) -> f64 {
    laminate.flexural_rigidity_literal()
}

/// Typical literature constants for the aluminum-coated polyimide foil.
///
/// These are configuration defaults, not measured values; override them from
/// the device configuration when better data is available.
pub mod typical {
    use super::{Laminate, MaterialLayer};

    pub const ALUMINUM_YOUNGS_MODULUS: f64 = 70e9;
    pub const ALUMINUM_POISSON_RATIO: f64 = 0.35;
    pub const POLYIMIDE_YOUNGS_MODULUS: f64 = 2.5e9;
    pub const POLYIMIDE_POISSON_RATIO: f64 = 0.34;

    pub fn aluminum(thickness: f64) -> MaterialLayer {
        MaterialLayer {
            name: "aluminum".into(),
            youngs_modulus: ALUMINUM_YOUNGS_MODULUS,
            poisson_ratio: ALUMINUM_POISSON_RATIO,
            thickness,
        }
    }

    pub fn polyimide(thickness: f64) -> MaterialLayer {
        MaterialLayer {
            name: "polyimide".into(),
            youngs_modulus: POLYIMIDE_YOUNGS_MODULUS,
            poisson_ratio: POLYIMIDE_POISSON_RATIO,
            thickness,
        }
    }

    /// 25 µm polyimide with a 0.2 µm aluminum coating on top.
    pub fn al_on_polyimide() -> Laminate {
        Laminate::new(alloc::vec![polyimide(25e-6), aluminum(0.2e-6)])
            .expect("typical constants are valid")
    }
}
