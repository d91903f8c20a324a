//! Observable strings: `"D"` for a count, `"D*P"` for a product (`"D*D"` for
//! a second moment) and `"indicator(D, lo, hi)"` for `1{lo <= D <= hi}`.

use ctmc_mlmc::{Observable, ReactionNetwork};

#[derive(Debug, thiserror::Error)]
#[error("observable `{spec}`: {reason}")]
pub struct ObservableError {
    pub spec: String,
    pub reason: String,
}

pub fn parse_observable(
    spec: &str,
    network: &ReactionNetwork,
) -> Result<Observable, ObservableError> {
    let fail = |reason: String| ObservableError {
        spec: spec.to_string(),
        reason,
    };
    let species = |name: &str| {
        let name = name.trim();
        network
            .species_index(name)
            .ok_or_else(|| fail(format!("unknown species `{name}`")))
    };
    let s = spec.trim();
    if let Some(inner) = s
        .strip_prefix("indicator(")
        .and_then(|r| r.strip_suffix(')'))
    {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err(fail("expected indicator(<species>, <lo>, <hi>)".into()));
        }
        let bound = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| fail(format!("bad bound `{}`", t.trim())))
        };
        let (lo, hi) = (bound(parts[1])?, bound(parts[2])?);
        if !(lo <= hi) {
            return Err(fail("indicator needs lo <= hi".into()));
        }
        return Ok(Observable::Indicator {
            species: species(parts[0])?,
            lo,
            hi,
        });
    }
    match s.split_once('*') {
        Some((a, b)) => Ok(Observable::Product(species(a)?, species(b)?)),
        None => Ok(Observable::Component(species(s)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctmc_mlmc::Species;

    fn net() -> ReactionNetwork {
        ReactionNetwork::new(
            vec![
                Species::new("M", 0),
                Species::new("P", 0),
                Species::new("D", 0),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn grammar() {
        let n = net();
        assert_eq!(parse_observable("D", &n).unwrap(), Observable::Component(2));
        assert_eq!(
            parse_observable(" D * D ", &n).unwrap(),
            Observable::Product(2, 2)
        );
        assert_eq!(
            parse_observable("M*P", &n).unwrap(),
            Observable::Product(0, 1)
        );
        assert_eq!(
            parse_observable("indicator(P, 0, 10)", &n).unwrap(),
            Observable::Indicator {
                species: 1,
                lo: 0.0,
                hi: 10.0
            }
        );
        assert!(parse_observable("Q", &n).is_err());
        assert!(parse_observable("indicator(P, 10, 0)", &n).is_err());
        assert!(parse_observable("indicator(P, 1)", &n).is_err());
    }
}
