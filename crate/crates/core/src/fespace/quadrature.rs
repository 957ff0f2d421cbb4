//! Symmetric quadrature rules on triangles (barycentric points, weights
//! normalized to sum to one) and Gauss–Legendre rules on edges.

/// Points in barycentric coordinates; weights sum to 1 (multiply by the
/// cell area).
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Points as the parameter `t ∈ [0, 1]` along the edge; weights sum to 1
/// (multiply by the edge length).
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    fn from_orbits(orbits: &[(Orbit, f64)], degree: usize) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (orbit, w) in orbits {
            let pts: Vec<[f64; 3]> = match *orbit {
                Orbit::Centroid => vec![[1.0 / 3.0; 3]],
                Orbit::Two(a) => {
                    let b = 1.0 - 2.0 * a;
                    vec![[a, a, b], [a, b, a], [b, a, a]]
                }
                Orbit::Three(a, b) => {
                    let c = 1.0 - a - b;
                    vec![[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
                }
            };
            weights.extend(std::iter::repeat(*w).take(pts.len()));
            points.extend(pts);
        }
        QuadratureRule { points, weights, degree }
    }

    /// 6-point rule exact for polynomials of degree 4.
    pub fn degree4() -> Self {
        Self::from_orbits(
            &[
                (Orbit::Two(0.445948490915965), 0.223381589678011),
                (Orbit::Two(0.091576213509771), 0.109951743655322),
            ],
            4,
        )
    }

    /// 13-point rule exact for polynomials of degree 7.
    pub fn degree7() -> Self {
        Self::from_orbits(
            &[
                (Orbit::Centroid, -0.149570044467682),
                (Orbit::Two(0.260345966079040), 0.175615257433208),
                (Orbit::Two(0.065130102902216), 0.053347235608838),
                (Orbit::Three(0.048690315425316, 0.312865496004874), 0.077113760890257),
            ],
            7,
        )
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Clone, Copy)]
enum Orbit {
    Centroid,
    Two(f64),
    Three(f64, f64),
}

impl EdgeRule {
    /// Three-point Gauss–Legendre, exact to degree 5.
    pub fn gauss3() -> Self {
        let s = (0.6f64).sqrt() / 2.0;
        EdgeRule {
            points: vec![0.5 - s, 0.5, 0.5 + s],
            weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
            degree: 5,
        }
    }

    /// Five-point Gauss–Legendre, exact to degree 9.
    pub fn gauss5() -> Self {
        let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
        let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
        let nodes = [-b, -a, 0.0, a, b];
        let w = [wb, wa, 128.0 / 225.0, wa, wb];
        EdgeRule {
            points: nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
            degree: 9,
        }
    }
}
