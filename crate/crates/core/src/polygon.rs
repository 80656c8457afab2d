//! Lower convex hulls with integer abscissae and exact rational ordinates.

use num_rational::Ratio;
use serde::Serialize;

pub type Q64 = Ratio<i64>;

/// Serde adapters writing rationals as `"num/den"` strings.
pub mod qser {
    use serde::ser::{SerializeSeq, SerializeTuple};
    use serde::Serializer;

    use super::Q64;

    pub fn text(q: &Q64) -> String {
        format!("{}/{}", q.numer(), q.denom())
    }

    pub fn one<S: Serializer>(q: &Q64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&text(q))
    }

    pub fn opt<S: Serializer>(q: &Option<Q64>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&text(q)),
            None => s.serialize_none(),
        }
    }

    pub fn many<S: Serializer>(v: &[Q64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&text(q))?;
        }
        seq.end()
    }

    pub fn big<S: Serializer>(q: &num_rational::BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", q.numer(), q.denom()))
    }

    pub fn vertices<S: Serializer>(v: &[(i64, Q64)], s: S) -> Result<S::Ok, S::Error> {
        struct Pair<'a>(&'a (i64, Q64));
        impl serde::Serialize for Pair<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut t = s.serialize_tuple(2)?;
                t.serialize_element(&self.0 .0)?;
                t.serialize_element(&text(&self.0 .1))?;
                t.end()
            }
        }
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for pair in v {
            seq.serialize_element(&Pair(pair))?;
        }
        seq.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolygonHull {
    #[serde(serialize_with = "qser::vertices")]
    pub vertices: Vec<(i64, Q64)>,
    pub certified: Vec<bool>,
}

fn cross(o: (i64, Q64), a: (i64, Q64), b: (i64, Q64)) -> Q64 {
    let ax = Q64::from_integer(a.0 - o.0);
    let bx = Q64::from_integer(b.0 - o.0);
    ax * (b.1 - o.1) - (a.1 - o.1) * bx
}

impl PolygonHull {
    /// Lower convex hull of the given points; `certified` flags travel with
    /// their points onto the surviving vertices.
    pub fn lower_hull(points: &[(i64, Q64, bool)]) -> Self {
        let mut pts: Vec<(i64, Q64, bool)> = points.to_vec();
        pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        pts.dedup_by(|b, a| a.0 == b.0);
        let mut stack: Vec<(i64, Q64, bool)> = Vec::new();
        for q in pts {
            while stack.len() >= 2 {
                let n = stack.len();
                let o = (stack[n - 2].0, stack[n - 2].1);
                let a = (stack[n - 1].0, stack[n - 1].1);
                if cross(o, a, (q.0, q.1)) <= Q64::from_integer(0) {
                    stack.pop();
                } else {
                    break;
                }
            }
            stack.push(q);
        }
        PolygonHull {
            vertices: stack.iter().map(|v| (v.0, v.1)).collect(),
            certified: stack.iter().map(|v| v.2).collect(),
        }
    }

    pub fn has_vertex(&self, x: i64, y: Q64) -> bool {
        self.vertices.iter().any(|&(vx, vy)| vx == x && vy == y)
    }

    /// Ordinate of the hull at `x`, if `x` is within the abscissa range.
    pub fn value_at(&self, x: i64) -> Option<Q64> {
        let first = self.vertices.first()?;
        if x < first.0 || x > self.vertices.last()?.0 {
            return None;
        }
        for w in self.vertices.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x0 <= x && x <= x1 {
                return Some(y0 + (y1 - y0) * Q64::new(x - x0, x1 - x0));
            }
        }
        Some(first.1)
    }

    pub fn slopes(&self) -> Vec<Q64> {
        self.vertices
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / Q64::from_integer(w[1].0 - w[0].0))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q64 {
        Q64::from_integer(n)
    }

    #[test]
    fn drops_points_above() {
        let pts = vec![(0, q(0), true), (1, q(5), true), (2, q(2), true), (3, q(6), true)];
        let h = PolygonHull::lower_hull(&pts);
        assert_eq!(h.vertices, vec![(0, q(0)), (2, q(2)), (3, q(6))]);
        assert_eq!(h.value_at(1), Some(q(1)));
        assert_eq!(h.slopes(), vec![q(1), q(4)]);
    }

    #[test]
    fn collinear_points_are_not_vertices() {
        let pts = vec![(0, q(0), true), (1, q(1), true), (2, q(2), true)];
        let h = PolygonHull::lower_hull(&pts);
        assert_eq!(h.vertices, vec![(0, q(0)), (2, q(2))]);
    }

    #[test]
    fn zero_polygon() {
        let pts: Vec<_> = (0..5).map(|i| (i, q(0), true)).collect();
        let h = PolygonHull::lower_hull(&pts);
        assert_eq!(h.vertices, vec![(0, q(0)), (4, q(0))]);
    }
}
