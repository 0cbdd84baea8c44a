use rankdiv::distributions::{
    continuous_divergence, gaussian_closed_form, js_gaussian_proxy, mc_reference, reference_1d,
    CachedReference, LogDensity, Reference, ReferenceCache, ReferenceRoute,
};
use rankdiv::{Dist1D, DistND, EntropyKind, EntropySpec, Error, Result};

use crate::config::{ExperimentConfig, Family, ReferenceChoice};

fn monte_carlo<D: LogDensity>(
    cfg: &ExperimentConfig,
    cache: &ReferenceCache,
    tag: &str,
    mu: &D,
    nu: &D,
    kind: EntropyKind,
) -> Result<Reference> {
    let key = ReferenceCache::key(tag, &format!("{}|{}", mu.label(), nu.label()), kind.name(), cfg.n_ref, cfg.reference_seed);
    let hit = cache.get_or_compute(&key, || {
        let mc = mc_reference(mu, nu, kind, cfg.n_ref, cfg.reference_seed)?;
        Ok(CachedReference {
            value: mc.value,
            n_ref: cfg.n_ref,
            seed: cfg.reference_seed,
            route: ReferenceRoute::MonteCarlo.name().into(),
        })
    })?;
    Ok(Reference {
        value: hit.value,
        route: ReferenceRoute::MonteCarlo,
    })
}

fn missing(what: &str, family: Family, kind: EntropyKind) -> Error {
    Error::Config(format!("no {what} reference for {} with {}", family.name(), kind.name()))
}

/// Reference divergence of a univariate pair under the configured route.
pub fn reference_1d_for(
    cfg: &ExperimentConfig,
    cache: &ReferenceCache,
    family: Family,
    mu: &Dist1D,
    nu: &Dist1D,
    kind: EntropyKind,
) -> Result<Reference> {
    let spec = EntropySpec::new(kind);
    let gaussian = |d: &Dist1D| match *d {
        Dist1D::Gaussian { mean, std } => Some((mean, std)),
        _ => None,
    };
    match cfg.reference {
        ReferenceChoice::Auto => reference_1d(mu, nu, &spec),
        ReferenceChoice::ClosedForm => match (gaussian(mu), gaussian(nu)) {
            (Some((m0, s0)), Some((m1, s1))) => gaussian_closed_form(kind, &[m0], &[s0], &[m1], &[s1])
                .map(|value| Reference {
                    value,
                    route: ReferenceRoute::ClosedForm,
                })
                .ok_or_else(|| missing("closed-form", family, kind)),
            _ => Err(missing("closed-form", family, kind)),
        },
        ReferenceChoice::Quadrature => Ok(Reference {
            value: continuous_divergence(mu, nu, &spec, 64)?,
            route: ReferenceRoute::Quadrature,
        }),
        ReferenceChoice::MonteCarlo => monte_carlo(cfg, cache, family.name(), mu, nu, kind),
        ReferenceChoice::GaussianProxy => match (gaussian(mu), gaussian(nu), kind) {
            (Some((m0, s0)), Some((m1, s1)), EntropyKind::JensenShannon) => Ok(Reference {
                value: js_gaussian_proxy(&[m0], &[s0], &[m1], &[s1])?,
                route: ReferenceRoute::GaussianProxy,
            }),
            _ => Err(missing("Gaussian-proxy", family, kind)),
        },
    }
}

fn diagonal_gaussian(d: &DistND) -> Option<(Vec<f64>, Vec<f64>)> {
    match d {
        DistND::IsoGaussian { mean, std } => Some((mean.clone(), vec![*std; mean.len()])),
        DistND::DiagGaussian { mean, std } => Some((mean.clone(), std.clone())),
        _ => None,
    }
}

/// Reference divergence of a multivariate pair under the configured route.
/// In automatic mode Gaussian JS falls back to the labelled moment-matched
/// proxy, and other pairs without a closed form to cached Monte Carlo.
pub fn reference_nd_for(
    cfg: &ExperimentConfig,
    cache: &ReferenceCache,
    family: Family,
    mu: &DistND,
    nu: &DistND,
    kind: EntropyKind,
) -> Result<Reference> {
    let gauss = diagonal_gaussian(mu).zip(diagonal_gaussian(nu));
    let closed = gauss
        .as_ref()
        .and_then(|((m0, s0), (m1, s1))| gaussian_closed_form(kind, m0, s0, m1, s1))
        .map(|value| Reference {
            value,
            route: ReferenceRoute::ClosedForm,
        });
    let proxy = || -> Result<Reference> {
        match (&gauss, kind) {
            (Some(((m0, s0), (m1, s1))), EntropyKind::JensenShannon) => Ok(Reference {
                value: js_gaussian_proxy(m0, s0, m1, s1)?,
                route: ReferenceRoute::GaussianProxy,
            }),
            _ => Err(missing("Gaussian-proxy", family, kind)),
        }
    };
    match cfg.reference {
        ReferenceChoice::Auto => match closed {
            Some(r) => Ok(r),
            None if gauss.is_some() && kind == EntropyKind::JensenShannon => proxy(),
            None => monte_carlo(cfg, cache, family.name(), mu, nu, kind),
        },
        ReferenceChoice::ClosedForm => closed.ok_or_else(|| missing("closed-form", family, kind)),
        ReferenceChoice::GaussianProxy => proxy(),
        ReferenceChoice::MonteCarlo => monte_carlo(cfg, cache, family.name(), mu, nu, kind),
        ReferenceChoice::Quadrature => match (mu.marginals(), nu.marginals()) {
            (Some(a), Some(b)) if a.len() == 1 => reference_1d_for(cfg, cache, family, &a[0], &b[0], kind),
            _ => Err(missing("quadrature", family, kind)),
        },
    }
}
