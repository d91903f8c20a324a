//! Example models shipped with the tool.

use crate::model_file::{parse_model, Model, ModelError, ModelFile};

const MODELS: &[(&str, &str)] = &[
    ("dimer", include_str!("../models/dimer.toml")),
    ("dimer-gene", include_str!("../models/dimer-gene.toml")),
    (
        "isomerization",
        include_str!("../models/isomerization.toml"),
    ),
    ("decay", include_str!("../models/decay.toml")),
    ("mm-inf", include_str!("../models/mm-inf.toml")),
    ("mm-k", include_str!("../models/mm-k.toml")),
    ("viral", include_str!("../models/viral.toml")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    MODELS.iter().map(|(n, _)| *n)
}

pub fn bundled_text(name: &str) -> Option<&'static str> {
    MODELS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn bundled_model(name: &str) -> Option<Model> {
    bundled_text(name).map(|t| parse_model(t).expect("bundled models are valid"))
}

/// The isomerization `A <-> B` with both rates `theta` and
/// `X_A(0) = X_B(0) = floor(1000 / theta)`.
pub fn isomerization(theta: f64) -> Result<Model, ModelError> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(ModelError::Network(format!(
            "theta must be finite and > 0, got {theta}"
        )));
    }
    let text = bundled_text("isomerization").expect("isomerization is bundled");
    let mut file: ModelFile =
        toml::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
    let n = (1000.0 / theta).floor() as i64;
    for s in &mut file.species {
        *s.initial.get_mut() = n;
    }
    for r in &mut file.reactions {
        *r.rate.get_mut() = theta;
    }
    file.name = format!("isomerization(theta={theta})");
    file.build(None)
}
