//! TOML model files.
//!
//! ```toml
//! format_version = 1
//! name = "decay"
//!
//! [[species]]
//! name = "S"
//! initial = 1000
//!
//! [[reaction]]
//! name = "decay"
//! reactants = { S = 1 }
//! products = {}
//! rate = 1.0
//! ```
//!
//! A file may also carry a `[reduced]` network (same `species`/`reaction`
//! layout) and `[[coupling]]` entries pairing target and reduced reactions by
//! name, for control-variate runs.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use ctmc_mlmc::coupling::ChannelMap;
use ctmc_mlmc::{Reaction, ReactionNetwork, Species};
use serde::{Deserialize, Serialize};
use toml::Spanned;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{0}")]
    Syntax(String),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("{0}")]
    Network(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub species: Vec<SpeciesEntry>,
    #[serde(default, rename = "reaction")]
    pub reactions: Vec<ReactionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedEntry>,
    #[serde(default, rename = "coupling", skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesEntry {
    pub name: Spanned<String>,
    pub initial: Spanned<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionEntry {
    pub name: Spanned<String>,
    #[serde(default)]
    pub reactants: BTreeMap<String, Spanned<i64>>,
    #[serde(default)]
    pub products: BTreeMap<String, Spanned<i64>>,
    pub rate: Spanned<f64>,
    /// Caps the mass-action product, giving `rate * min(x, k)` for a
    /// first-order reaction (k servers in a queue).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_cap: Option<Spanned<i64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedEntry {
    pub species: Vec<SpeciesEntry>,
    #[serde(default, rename = "reaction")]
    pub reactions: Vec<ReactionEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub target: Spanned<String>,
    pub reduced: Spanned<String>,
}

/// A parsed model: the target network and, optionally, a reduced network
/// coupled to it.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub description: Option<String>,
    pub network: ReactionNetwork,
    pub reduced: Option<ReducedModel>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub network: ReactionNetwork,
    pub map: ChannelMap,
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn at(&self, offset: usize) -> usize {
        self.0.as_bytes()[..offset.min(self.0.len())]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1
    }

    fn err<T>(
        &self,
        span: std::ops::Range<usize>,
        message: impl Into<String>,
    ) -> Result<T, ModelError> {
        Err(ModelError::Invalid {
            line: self.at(span.start),
            message: message.into(),
        })
    }
}

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let file: ModelFile = toml::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
    file.build(Some(text))
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn build_network(
    species: &[SpeciesEntry],
    reactions: &[ReactionEntry],
    lines: &Lines<'_>,
    what: &str,
    warnings: &mut Vec<String>,
) -> Result<ReactionNetwork, ModelError> {
    if species.is_empty() {
        return Err(ModelError::Network(format!("{what} declares no species")));
    }
    let mut names: Vec<&str> = Vec::new();
    let mut out = Vec::new();
    for s in species {
        let name = s.name.get_ref();
        if !valid_identifier(name) {
            return lines.err(
                s.name.span(),
                format!("species name `{name}` is not an identifier"),
            );
        }
        if names.contains(&name.as_str()) {
            return lines.err(s.name.span(), format!("duplicate species `{name}`"));
        }
        let initial = *s.initial.get_ref();
        if initial < 0 {
            return lines.err(
                s.initial.span(),
                format!("species `{name}` has negative initial count {initial}"),
            );
        }
        names.push(name);
        out.push(Species::new(name.clone(), initial as u64));
    }

    let mut seen = HashSet::new();
    let mut rs = Vec::new();
    for r in reactions {
        let name = r.name.get_ref();
        if !seen.insert(name.as_str()) {
            return lines.err(r.name.span(), format!("duplicate reaction `{name}`"));
        }
        let side = |map: &BTreeMap<String, Spanned<i64>>| -> Result<Vec<(usize, u32)>, ModelError> {
            let mut v = Vec::new();
            for (sp, coeff) in map {
                let Some(i) = names.iter().position(|n| n == sp) else {
                    return lines.err(
                        coeff.span(),
                        format!("reaction `{name}` uses undeclared species `{sp}`"),
                    );
                };
                let c = *coeff.get_ref();
                if !(1..=i64::from(u32::MAX)).contains(&c) {
                    return lines.err(
                        coeff.span(),
                        format!(
                            "reaction `{name}`: coefficient of `{sp}` must be a positive integer"
                        ),
                    );
                }
                v.push((i, c as u32));
            }
            Ok(v)
        };
        let reactants = side(&r.reactants)?;
        let products = side(&r.products)?;
        let rate = *r.rate.get_ref();
        if !(rate.is_finite() && rate >= 0.0) {
            return lines.err(
                r.rate.span(),
                format!("reaction `{name}` has invalid rate {rate}"),
            );
        }
        let mut reaction = Reaction::new(name.clone(), &reactants, &products, rate);
        if let Some(cap) = &r.min_cap {
            let k = *cap.get_ref();
            if k < 0 {
                return lines.err(
                    cap.span(),
                    format!("reaction `{name}` has negative min_cap"),
                );
            }
            reaction = reaction.with_cap(k as u64);
        }
        if reaction.is_null() {
            warnings.push(format!(
                "{what}: reaction `{name}` does not change the state"
            ));
        }
        rs.push(reaction);
    }
    if rs.is_empty() {
        warnings.push(format!(
            "{what} has no reactions; paths stay at the initial state"
        ));
    }
    ReactionNetwork::new(out, rs).map_err(|e| ModelError::Network(e.to_string()))
}

impl ModelFile {
    /// Validates the file and builds the networks. `source` is the original
    /// text, used to report line numbers.
    pub fn build(&self, source: Option<&str>) -> Result<Model, ModelError> {
        let lines = Lines(source.unwrap_or(""));
        if self.format_version != FORMAT_VERSION {
            return Err(ModelError::Syntax(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let mut warnings = Vec::new();
        let network = build_network(
            &self.species,
            &self.reactions,
            &lines,
            "model",
            &mut warnings,
        )?;
        let reduced = match &self.reduced {
            None => {
                if let Some(c) = self.couplings.first() {
                    return lines.err(c.target.span(), "coupling entries need a [reduced] model");
                }
                None
            }
            Some(red) => {
                let second = build_network(
                    &red.species,
                    &red.reactions,
                    &lines,
                    "reduced model",
                    &mut warnings,
                )?;
                let mut pairs = Vec::new();
                for c in &self.couplings {
                    let Some(a) = network.reaction_index(c.target.get_ref()) else {
                        return lines.err(
                            c.target.span(),
                            format!("unknown target reaction `{}`", c.target.get_ref()),
                        );
                    };
                    let Some(b) = second.reaction_index(c.reduced.get_ref()) else {
                        return lines.err(
                            c.reduced.span(),
                            format!("unknown reduced reaction `{}`", c.reduced.get_ref()),
                        );
                    };
                    pairs.push((a, b));
                }
                let map = ChannelMap::new(pairs, &network, &second)
                    .map_err(|e| ModelError::Network(e.to_string()))?;
                Some(ReducedModel {
                    network: second,
                    map,
                })
            }
        };
        Ok(Model {
            name: self.name.clone(),
            description: self.description.clone(),
            network,
            reduced,
            warnings,
        })
    }
}

impl Model {
    /// The canonical model file for this model.
    pub fn to_file(&self) -> ModelFile {
        let species = |net: &ReactionNetwork| -> Vec<SpeciesEntry> {
            net.species()
                .iter()
                .map(|s| SpeciesEntry {
                    name: Spanned::new(0..0, s.name.clone()),
                    initial: Spanned::new(0..0, s.initial as i64),
                })
                .collect()
        };
        let reactions = |net: &ReactionNetwork| -> Vec<ReactionEntry> {
            let side = |v: &[(usize, u32)]| {
                v.iter()
                    .map(|&(i, c)| {
                        (
                            net.species()[i].name.clone(),
                            Spanned::new(0..0, i64::from(c)),
                        )
                    })
                    .collect()
            };
            net.reactions()
                .iter()
                .map(|r| ReactionEntry {
                    name: Spanned::new(0..0, r.name().to_string()),
                    reactants: side(r.reactants()),
                    products: side(r.products()),
                    rate: Spanned::new(0..0, r.rate()),
                    min_cap: r.cap().map(|k| Spanned::new(0..0, k as i64)),
                })
                .collect()
        };
        let (reduced, couplings) = match &self.reduced {
            None => (None, Vec::new()),
            Some(red) => {
                let couplings = red
                    .map
                    .pairs()
                    .iter()
                    .map(|&(a, b)| CouplingEntry {
                        target: Spanned::new(0..0, self.network.reactions()[a].name().to_string()),
                        reduced: Spanned::new(0..0, red.network.reactions()[b].name().to_string()),
                    })
                    .collect();
                (
                    Some(ReducedEntry {
                        species: species(&red.network),
                        reactions: reactions(&red.network),
                    }),
                    couplings,
                )
            }
        };
        ModelFile {
            format_version: FORMAT_VERSION,
            name: self.name.clone(),
            description: self.description.clone(),
            species: species(&self.network),
            reactions: reactions(&self.network),
            reduced,
            couplings,
        }
    }
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn float(x: f64) -> String {
    // `{:?}` always keeps a decimal point or exponent, so the value reads
    // back as a TOML float.
    format!("{x:?}")
}

fn write_network(
    out: &mut String,
    prefix: &str,
    species: &[SpeciesEntry],
    reactions: &[ReactionEntry],
) {
    for s in species {
        let _ = write!(
            out,
            "\n[[{prefix}species]]\nname = {}\ninitial = {}\n",
            quoted(s.name.get_ref()),
            s.initial.get_ref()
        );
    }
    let side = |m: &BTreeMap<String, Spanned<i64>>| {
        let items: Vec<String> = m
            .iter()
            .map(|(k, v)| format!("{k} = {}", v.get_ref()))
            .collect();
        if items.is_empty() {
            "{}".to_string()
        } else {
            format!("{{ {} }}", items.join(", "))
        }
    };
    for r in reactions {
        let _ = write!(
            out,
            "\n[[{prefix}reaction]]\nname = {}\nreactants = {}\nproducts = {}\nrate = {}\n",
            quoted(r.name.get_ref()),
            side(&r.reactants),
            side(&r.products),
            float(*r.rate.get_ref())
        );
        if let Some(k) = &r.min_cap {
            let _ = writeln!(out, "min_cap = {}", k.get_ref());
        }
    }
}

impl ModelFile {
    /// Canonical TOML text: one inline table per stoichiometry side, entries
    /// in declaration order.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format_version = {}", self.format_version);
        let _ = writeln!(out, "name = {}", quoted(&self.name));
        if let Some(d) = &self.description {
            let _ = writeln!(out, "description = {}", quoted(d));
        }
        write_network(&mut out, "", &self.species, &self.reactions);
        if let Some(red) = &self.reduced {
            out.push_str("\n[reduced]\n");
            write_network(&mut out, "reduced.", &red.species, &red.reactions);
        }
        for c in &self.couplings {
            let _ = write!(
                out,
                "\n[[coupling]]\ntarget = {}\nreduced = {}\n",
                quoted(c.target.get_ref()),
                quoted(c.reduced.get_ref())
            );
        }
        out
    }
}
