//! Star-shaped domains, boundary samples and the support function `<x, n(x)>`.
//!
//! Only the interval (N = 1) and the disk (N = 2) are supported. Both are
//! star-shaped with respect to the origin, which must lie strictly inside.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Unvalidated domain description, as read from a configuration file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Disk { radius: f64 },
}

/// A validated domain containing the origin in its interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    kind: DomainKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Interval { a: f64, b: f64 },
    Disk { radius: f64 },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "interval endpoints must be finite, got ({a}, {b})"
            )));
        }
        if a >= 0.0 || b <= 0.0 {
            return Err(Error::NotStarShaped(format!(
                "interval ({a}, {b}) does not contain 0 in its interior"
            )));
        }
        Ok(Self {
            kind: DomainKind::Interval { a, b },
        })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            kind: DomainKind::Disk { radius },
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn spec(&self) -> DomainSpec {
        match self.kind {
            DomainKind::Interval { a, b } => DomainSpec::Interval { a, b },
            DomainKind::Disk { radius } => DomainSpec::Disk { radius },
        }
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            DomainKind::Interval { .. } => 1,
            DomainKind::Disk { .. } => 2,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { a, b } => b - a,
            DomainKind::Disk { radius } => 2.0 * radius,
        }
    }

    /// Lebesgue measure |Ω|.
    pub fn measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { a, b } => b - a,
            DomainKind::Disk { radius } => PI * radius * radius,
        }
    }

    /// Measure of ∂Ω (counting measure for the two endpoints of an interval).
    pub fn boundary_measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { .. } => 2.0,
            DomainKind::Disk { radius } => 2.0 * PI * radius,
        }
    }

    /// Strict interior test; `x` has `dimension()` coordinates.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self.kind {
            DomainKind::Interval { a, b } => x[0] > a && x[0] < b,
            DomainKind::Disk { radius } => x[0].hypot(x[1]) < radius,
        }
    }
}

/// Validate a descriptor into a [`Domain`].
pub fn make_domain(spec: &DomainSpec) -> Result<Domain> {
    match *spec {
        DomainSpec::Interval { a, b } => Domain::interval(a, b),
        DomainSpec::Disk { radius } => Domain::disk(radius),
    }
}

/// Boundary quadrature: points, unit outward normals, surface weights and
/// support values `<x, n(x)>`.
///
/// Points and normals are stored with two coordinates; in one dimension the
/// second coordinate is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub points: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub support_values: Vec<f64>,
}

impl BoundarySample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Sample the boundary. The interval ignores `resolution` and returns its two
/// endpoints with unit weight; the disk uses `resolution` equispaced angles
/// starting at θ = 0, which integrates trigonometric polynomials of degree
/// below `resolution` exactly.
pub fn boundary_sample(domain: &Domain, resolution: usize) -> BoundarySample {
    match domain.kind {
        DomainKind::Interval { a, b } => BoundarySample {
            points: vec![[a, 0.0], [b, 0.0]],
            normals: vec![[-1.0, 0.0], [1.0, 0.0]],
            weights: vec![1.0, 1.0],
            support_values: vec![-a, b],
        },
        DomainKind::Disk { radius } => {
            let m = resolution.max(1);
            let dtheta = 2.0 * PI / m as f64;
            let mut sample = BoundarySample {
                points: Vec::with_capacity(m),
                normals: Vec::with_capacity(m),
                weights: vec![radius * dtheta; m],
                support_values: Vec::with_capacity(m),
            };
            for i in 0..m {
                let (s, c) = (i as f64 * dtheta).sin_cos();
                let point = [radius * c, radius * s];
                let normal = [c, s];
                sample
                    .support_values
                    .push(point[0] * normal[0] + point[1] * normal[1]);
                sample.points.push(point);
                sample.normals.push(normal);
            }
            sample
        }
    }
}

/// Minimum of `<x, n(x)>` over the boundary. Exact for both supported
/// geometries, so it does not depend on a sampling resolution.
pub fn star_shape_margin(domain: &Domain) -> f64 {
    match domain.kind {
        DomainKind::Interval { a, b } => (-a).min(b),
        DomainKind::Disk { radius } => radius,
    }
}

/// Abort with [`Error::NotStarShaped`] unless the margin is positive.
pub fn check_star_shaped(domain: &Domain) -> Result<f64> {
    let margin = star_shape_margin(domain);
    if margin > 0.0 {
        Ok(margin)
    } else {
        Err(Error::NotStarShaped(format!(
            "min <x, n(x)> over the boundary is {margin}"
        )))
    }
}
