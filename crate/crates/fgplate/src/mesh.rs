//! Structured QUAD-8 meshes of rectangular and skew plates with optional
//! center-crack node splitting.
//!
//! Meshes are generated on a rectangular layout `[0, a] x [0, b]` and
//! mapped to the physical parallelogram by the shear
//! `(x, y) -> (x + y sin(psi), y cos(psi))`, so the oblique edges have
//! length `b` and the planform area is `a b cos(psi)`. Layout coordinates
//! are kept on the mesh for boundary predicates and point location.
//!
//! Node numbering runs row-major over the serendipity lattice; crack
//! duplicates are inserted immediately after their originals, which keeps
//! the assembled matrix bandwidth proportional to one node row.

use crate::{Error, Result};
use std::fmt::Write as _;

/// Plate planform and crack description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateGeometry {
    /// Side length along x, m.
    pub a: f64,
    /// Side length of the (possibly oblique) second edge family, m.
    pub b: f64,
    /// Thickness, m.
    pub h: f64,
    /// Skew angle, radians, `0 <= psi < pi/2`.
    pub psi: f64,
    /// Center crack length ratio `c/a` in `[0, 1)`; 0 means uncracked.
    pub crack_ratio: f64,
}

impl PlateGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.h > 0.0) {
            return Err(Error::invalid_input("plate dimensions must be positive"));
        }
        if !(self.psi >= 0.0 && self.psi < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid_input("skew angle must lie in [0, pi/2)"));
        }
        if !(self.crack_ratio >= 0.0 && self.crack_ratio < 1.0) {
            return Err(Error::invalid_input("crack ratio must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Boundary node lists, one per plate edge (layout frame).
#[derive(Debug, Clone, Default)]
pub struct EdgeTags {
    pub x0: Vec<usize>,
    pub xa: Vec<usize>,
    pub y0: Vec<usize>,
    pub yb: Vec<usize>,
}

/// A QUAD-8 mesh. Element connectivity is serendipity ordered: corners
/// counter-clockwise, then midsides bottom/right/top/left.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Physical coordinates, after the skew map.
    pub nodes: Vec<[f64; 2]>,
    /// Layout (pre-skew) coordinates.
    pub layout: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 8]>,
    /// (original, duplicate) node pairs along the crack faces.
    pub crack_pairs: Vec<(usize, usize)>,
    pub tags: EdgeTags,
    /// Nodes on the two oblique edges (empty for psi = 0).
    pub skew_nodes: Vec<usize>,
    pub nx: usize,
    pub ny: usize,
    pub geometry: PlateGeometry,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_dofs(&self) -> usize {
        crate::DOF_PER_NODE * self.nodes.len()
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 8] {
        let mut c = [[0.0; 2]; 8];
        for (k, &n) in self.elements[e].iter().enumerate() {
            c[k] = self.nodes[n];
        }
        c
    }

    /// Locate a layout-frame point: element index and biunit coordinates.
    /// Points on the crack line resolve to the element below it.
    pub fn locate(&self, x: f64, y: f64) -> Result<(usize, f64, f64)> {
        let g = &self.geometry;
        if x < -1e-12 || x > g.a + 1e-12 || y < -1e-12 || y > g.b + 1e-12 {
            return Err(Error::domain(format!("point ({x}, {y}) outside the plate layout")));
        }
        let dx = g.a / self.nx as f64;
        let dy = g.b / self.ny as f64;
        let ex = ((x / dx).floor() as usize).min(self.nx - 1);
        let mut ey = ((y / dy).floor() as usize).min(self.ny - 1);
        // exact hit on an interior horizontal line resolves downward so the
        // crack line samples the lower face
        if ey > 0 && (y - ey as f64 * dy).abs() < 1e-12 * g.b {
            ey -= 1;
        }
        let e = ey * self.nx + ex;
        let xi = 2.0 * (x - ex as f64 * dx) / dx - 1.0;
        let eta = 2.0 * (y - ey as f64 * dy) / dy - 1.0;
        Ok((e, xi.clamp(-1.0, 1.0), eta.clamp(-1.0, 1.0)))
    }

    /// Plain-text dump: one `id x y` line per node, then one
    /// `id n1..n8` line per element.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "{} {:.9e} {:.9e}", i, n[0], n[1]);
        }
        for (e, conn) in self.elements.iter().enumerate() {
            let _ = write!(s, "{}", e);
            for &n in conn {
                let _ = write!(s, " {}", n);
            }
            let _ = writeln!(s);
        }
        s
    }
}

/// Generate the structured mesh (no crack faces yet; see [`split_crack`]).
pub fn generate_mesh(geometry: &PlateGeometry, nx: usize, ny: usize) -> Result<Mesh> {
    geometry.validate()?;
    if nx < 2 || ny < 2 {
        return Err(Error::mesh("nx and ny must be at least 2"));
    }
    if geometry.crack_ratio > 0.0 && (nx % 2 != 0 || ny % 2 != 0) {
        return Err(Error::mesh("cracked plates need even nx and ny"));
    }
    let (a, b) = (geometry.a, geometry.b);
    let (sn, cs) = geometry.psi.sin_cos();
    // serendipity lattice: skip odd-odd (element center) positions
    let cols = 2 * nx + 1;
    let rows = 2 * ny + 1;
    let mut index = vec![usize::MAX; cols * rows];
    let mut layout = Vec::new();
    let mut nodes = Vec::new();
    for j in 0..rows {
        for i in 0..cols {
            if i % 2 == 1 && j % 2 == 1 {
                continue;
            }
            let x = a * i as f64 / (cols - 1) as f64;
            let y = b * j as f64 / (rows - 1) as f64;
            index[j * cols + i] = nodes.len();
            layout.push([x, y]);
            nodes.push([x + y * sn, y * cs]);
        }
    }
    let at = |i: usize, j: usize| index[j * cols + i];
    let mut elements = Vec::with_capacity(nx * ny);
    for ey in 0..ny {
        for ex in 0..nx {
            let (i, j) = (2 * ex, 2 * ey);
            elements.push([
                at(i, j),
                at(i + 2, j),
                at(i + 2, j + 2),
                at(i, j + 2),
                at(i + 1, j),
                at(i + 2, j + 1),
                at(i + 1, j + 2),
                at(i, j + 1),
            ]);
        }
    }
    let mut mesh = Mesh {
        nodes,
        layout,
        elements,
        crack_pairs: Vec::new(),
        tags: EdgeTags::default(),
        skew_nodes: Vec::new(),
        nx,
        ny,
        geometry: *geometry,
    };
    tag_boundaries(&mut mesh)?;
    check_jacobians(&mesh)?;
    Ok(mesh)
}

/// Duplicate the nodes strictly inside the crack segment and reconnect the
/// elements above the crack line to the duplicates. Tips stay shared.
pub fn split_crack(mesh: &mut Mesh) -> Result<()> {
    let g = mesh.geometry;
    if g.crack_ratio == 0.0 {
        return Ok(());
    }
    let (a, b) = (g.a, g.b);
    let c = g.crack_ratio * a;
    let x0 = (a - c) / 2.0;
    let x1 = (a + c) / 2.0;
    let dx_half = a / (2 * mesh.nx) as f64;
    for x in [x0, x1] {
        let steps = x / dx_half;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::mesh(format!(
                "crack endpoint x = {x:.6} does not land on a mesh line; choose nx so that nx (1 - c/a) / 2 is an integer"
            )));
        }
    }
    let ymid = b / 2.0;
    let tol = 1e-9 * b.max(a);
    // nodes strictly inside the crack span on the center line, in index order
    let to_split: Vec<usize> = (0..mesh.nodes.len())
        .filter(|&n| {
            let [x, y] = mesh.layout[n];
            (y - ymid).abs() < tol && x > x0 + tol && x < x1 - tol
        })
        .collect();
    if to_split.is_empty() {
        return Err(Error::mesh("crack shorter than one element edge; refine the mesh"));
    }
    // insert each duplicate right after its original to keep the bandwidth
    let old_count = mesh.nodes.len();
    let split_flag: Vec<bool> = {
        let mut f = vec![false; old_count];
        for &n in &to_split {
            f[n] = true;
        }
        f
    };
    let mut new_id = vec![usize::MAX; old_count];
    let mut dup_id = vec![usize::MAX; old_count];
    let mut nodes = Vec::with_capacity(old_count + to_split.len());
    let mut layout = Vec::with_capacity(nodes.capacity());
    for n in 0..old_count {
        new_id[n] = nodes.len();
        nodes.push(mesh.nodes[n]);
        layout.push(mesh.layout[n]);
        if split_flag[n] {
            dup_id[n] = nodes.len();
            nodes.push(mesh.nodes[n]);
            layout.push(mesh.layout[n]);
        }
    }
    let nx = mesh.nx;
    let ny = mesh.ny;
    for (e, conn) in mesh.elements.iter_mut().enumerate() {
        let above = e / nx >= ny / 2;
        for slot in conn.iter_mut() {
            let n = *slot;
            *slot = if above && split_flag[n] { dup_id[n] } else { new_id[n] };
        }
    }
    mesh.crack_pairs = to_split.iter().map(|&n| (new_id[n], dup_id[n])).collect();
    mesh.nodes = nodes;
    mesh.layout = layout;
    tag_boundaries(mesh)?;
    Ok(())
}

/// Recompute the boundary tags and skew-edge node set from layout
/// coordinates.
pub fn tag_boundaries(mesh: &mut Mesh) -> Result<()> {
    let g = mesh.geometry;
    let tol = 1e-9 * g.a.max(g.b);
    let mut tags = EdgeTags::default();
    for (n, &[x, y]) in mesh.layout.iter().enumerate() {
        if x.abs() < tol {
            tags.x0.push(n);
        }
        if (x - g.a).abs() < tol {
            tags.xa.push(n);
        }
        if y.abs() < tol {
            tags.y0.push(n);
        }
        if (y - g.b).abs() < tol {
            tags.yb.push(n);
        }
    }
    mesh.skew_nodes = if g.psi != 0.0 {
        let mut s: Vec<usize> = tags.x0.iter().chain(tags.xa.iter()).copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    } else {
        Vec::new()
    };
    mesh.tags = tags;
    Ok(())
}

/// Convenience: generate, split the crack and validate in one call.
pub fn build_mesh(geometry: &PlateGeometry, nx: usize, ny: usize) -> Result<Mesh> {
    let mut mesh = generate_mesh(geometry, nx, ny)?;
    split_crack(&mut mesh)?;
    Ok(mesh)
}

fn check_jacobians(mesh: &Mesh) -> Result<()> {
    use crate::element::shape_functions;
    for (e, _) in mesh.elements.iter().enumerate() {
        let coords = mesh.element_coords(e);
        for &(xi, eta, _) in &crate::quadrature::gauss_2d(3) {
            let sf = shape_functions(xi, eta);
            let mut j = [[0.0f64; 2]; 2];
            for k in 0..8 {
                j[0][0] += sf.dxi[k] * coords[k][0];
                j[0][1] += sf.dxi[k] * coords[k][1];
                j[1][0] += sf.deta[k] * coords[k][0];
                j[1][1] += sf.deta[k] * coords[k][1];
            }
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det <= 0.0 {
                return Err(Error::ElementQuality(format!(
                    "element {e} has non-positive Jacobian {det:.3e}"
                )));
            }
        }
    }
    Ok(())
}

/// Smallest even division count `>= level` for which the crack endpoints
/// land on mesh lines, capped at searching up to 10x the level.
pub fn aligned_divisions(level: usize, crack_ratio: f64) -> Result<usize> {
    if crack_ratio == 0.0 {
        return Ok(level.max(2));
    }
    let start = level.max(2);
    for nx in start..=10 * start {
        if nx % 2 != 0 {
            continue;
        }
        let lo = nx as f64 * (1.0 - crack_ratio) / 2.0;
        let hi = nx as f64 * (1.0 + crack_ratio) / 2.0;
        if (lo - lo.round()).abs() < 1e-9 && (hi - hi.round()).abs() < 1e-9 {
            return Ok(nx);
        }
    }
    Err(Error::mesh(format!(
        "no even division count aligns with crack ratio {crack_ratio} near level {level}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn square(psi_deg: f64, crack: f64) -> PlateGeometry {
        PlateGeometry { a: 1.0, b: 1.0, h: 0.1, psi: psi_deg.to_radians(), crack_ratio: crack }
    }

    #[test]
    fn node_counts_match_serendipity_formula() {
        let m = generate_mesh(&square(0.0, 0.0), 8, 8).unwrap();
        assert_eq!(m.n_nodes(), 225);
        assert_eq!(m.elements.len(), 64);
        let m = generate_mesh(&square(0.0, 0.0), 2, 2).unwrap();
        assert_eq!(m.n_nodes(), 21);
    }

    #[test]
    fn skew_mesh_area_and_jacobians() {
        let m = generate_mesh(&square(30.0, 0.0), 8, 8).unwrap();
        // quadrature area of the parallelogram planform
        let mut area = 0.0;
        for e in 0..m.elements.len() {
            let coords = m.element_coords(e);
            for (xi, eta, w) in crate::quadrature::gauss_2d(3) {
                let sf = crate::element::shape_functions(xi, eta);
                let mut j = [[0.0f64; 2]; 2];
                for k in 0..8 {
                    j[0][0] += sf.dxi[k] * coords[k][0];
                    j[0][1] += sf.dxi[k] * coords[k][1];
                    j[1][0] += sf.deta[k] * coords[k][0];
                    j[1][1] += sf.deta[k] * coords[k][1];
                }
                area += w * (j[0][0] * j[1][1] - j[0][1] * j[1][0]);
            }
        }
        assert_relative_eq!(area, 30.0_f64.to_radians().cos(), epsilon = 1e-12);
    }

    #[test]
    fn crack_split_duplicates_interior_nodes() {
        let mut m = generate_mesh(&square(0.0, 0.5), 8, 8).unwrap();
        let before = m.n_nodes();
        split_crack(&mut m).unwrap();
        // 4-element crack segment: 3 interior corners + 4 midsides
        assert_eq!(m.crack_pairs.len(), 7);
        assert_eq!(m.n_nodes(), before + 7);
        for &(orig, dup) in &m.crack_pairs {
            assert_eq!(m.nodes[orig], m.nodes[dup]);
            assert_ne!(orig, dup);
        }
    }

    #[test]
    fn crack_tips_stay_shared() {
        let mut m = generate_mesh(&square(0.0, 0.5), 8, 8).unwrap();
        split_crack(&mut m).unwrap();
        // count nodes at each crack-line location
        let mut by_pos: HashMap<(i64, i64), usize> = HashMap::new();
        for &[x, y] in &m.layout {
            if (y - 0.5).abs() < 1e-9 {
                let key = ((x * 1e9).round() as i64, (y * 1e9).round() as i64);
                *by_pos.entry(key).or_insert(0) += 1;
            }
        }
        let tip_lo = ((0.25f64 * 1e9).round() as i64, (0.5f64 * 1e9).round() as i64);
        let tip_hi = ((0.75f64 * 1e9).round() as i64, (0.5f64 * 1e9).round() as i64);
        assert_eq!(by_pos[&tip_lo], 1);
        assert_eq!(by_pos[&tip_hi], 1);
        // strictly inside: exactly two
        let inside = ((0.5f64 * 1e9).round() as i64, (0.5f64 * 1e9).round() as i64);
        assert_eq!(by_pos[&inside], 2);
    }

    #[test]
    fn crack_misalignment_is_reported() {
        let mut m = generate_mesh(&square(0.0, 0.2), 16, 16).unwrap();
        let err = split_crack(&mut m).unwrap_err();
        assert!(matches!(err, Error::Mesh(_)));
        let mut m = generate_mesh(&square(0.0, 0.2), 10, 10).unwrap();
        split_crack(&mut m).unwrap();
        assert_eq!(m.crack_pairs.len(), 3); // 2 edges: 1 interior corner + 2 midsides
    }

    #[test]
    fn odd_divisions_rejected_with_crack() {
        assert!(generate_mesh(&square(0.0, 0.4), 9, 8).is_err());
        assert!(generate_mesh(&square(0.0, 0.0), 9, 9).is_ok());
    }

    #[test]
    fn boundary_tags_counts() {
        let m = generate_mesh(&square(0.0, 0.0), 8, 8).unwrap();
        for tags in [&m.tags.x0, &m.tags.xa, &m.tags.y0, &m.tags.yb] {
            assert_eq!(tags.len(), 17);
        }
        assert!(m.skew_nodes.is_empty());
        let m = generate_mesh(&square(45.0, 0.0), 6, 6).unwrap();
        assert_eq!(m.skew_nodes.len(), 2 * 13 - 0);
        // oblique edges are the x0/xa families
        for &n in &m.skew_nodes {
            let [x, _] = m.layout[n];
            assert!(x.abs() < 1e-9 || (x - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn interior_edges_shared_by_two_elements() {
        let m = generate_mesh(&square(0.0, 0.0), 4, 4).unwrap();
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for conn in &m.elements {
            // corner-to-corner edges with their midside node identify an edge
            for (c0, c1, _mid) in [(0, 1, 4), (1, 2, 5), (2, 3, 6), (3, 0, 7)] {
                let (a, b) = (conn[c0].min(conn[c1]), conn[c0].max(conn[c1]));
                *edge_count.entry((a, b)).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edge_count {
            let on_boundary = |n: usize| {
                let [x, y] = m.layout[n];
                x.abs() < 1e-9 || (x - 1.0).abs() < 1e-9 || y.abs() < 1e-9 || (y - 1.0).abs() < 1e-9
            };
            if on_boundary(a) && on_boundary(b) && count == 1 {
                continue;
            }
            assert_eq!(count, 2, "interior edge ({a},{b}) shared by {count} elements");
        }
    }

    #[test]
    fn locate_resolves_crack_line_downward() {
        let g = square(0.0, 0.5);
        let m = build_mesh(&g, 8, 8).unwrap();
        let (e, _, eta) = m.locate(0.5, 0.5).unwrap();
        assert!(e / 8 == 3, "expected the element row below the crack");
        assert_relative_eq!(eta, 1.0);
        assert!(m.locate(1.2, 0.5).is_err());
    }

    #[test]
    fn aligned_divisions_examples() {
        assert_eq!(aligned_divisions(16, 0.0).unwrap(), 16);
        assert_eq!(aligned_divisions(16, 0.2).unwrap(), 20);
        assert_eq!(aligned_divisions(16, 0.5).unwrap(), 16);
        assert_eq!(aligned_divisions(8, 0.4).unwrap(), 10);
        assert_eq!(aligned_divisions(10, 0.6).unwrap(), 10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn node_count_formula(nx in 2usize..13, ny in 2usize..13) {
            let m = generate_mesh(&square(0.0, 0.0), nx, ny).unwrap();
            prop_assert_eq!(m.n_nodes(), (2*nx+1)*(2*ny+1) - nx*ny);
            prop_assert_eq!(m.elements.len(), nx*ny);
        }
    }

    #[test]
    fn jacobians_positive_for_table_skew_angles() {
        for deg in [0.0, 15.0, 30.0, 45.0] {
            generate_mesh(&square(deg, 0.0), 8, 8).unwrap();
        }
    }
}
