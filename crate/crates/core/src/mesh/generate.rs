use std::collections::HashMap;

use super::{MeshComplex, Result, Vec3};

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let vertices = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::from(*p).normalize())
    .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

/// Unit-sphere vertices and outward-wound faces after `subdivisions` rounds of
/// midpoint splitting.
fn unit_icosphere(subdivisions: usize) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let (mut vertices, mut faces) = icosahedron();
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                vertices.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (vertices, faces)
}

/// Geodesic sphere centred at the origin with `10·4^s + 2` vertices.
pub fn generate_icosphere(subdivisions: usize, radius: f64) -> MeshComplex {
    assert!(radius > 0.0, "radius must be positive");
    let (vertices, faces) = unit_icosphere(subdivisions);
    let vertices = vertices.into_iter().map(|v| v * radius).collect();
    MeshComplex::surface(vertices, faces).expect("icosphere is a valid closed surface")
}

/// Unit icosphere scaled by the semi-axes `(a, b, c)`.
pub fn generate_ellipsoid(a: f64, b: f64, c: f64, subdivisions: usize) -> MeshComplex {
    assert!(a > 0.0 && b > 0.0 && c > 0.0, "semi-axes must be positive");
    let (vertices, faces) = unit_icosphere(subdivisions);
    let vertices = vertices
        .into_iter()
        .map(|v| Vec3::new(a * v.x, b * v.y, c * v.z))
        .collect();
    MeshComplex::surface(vertices, faces).expect("scaled icosphere is a valid closed surface")
}

/// Tetrahedralized unit ball whose boundary is `generate_icosphere(s, 1)`.
pub fn generate_ball(subdivisions: usize) -> MeshComplex {
    generate_ball_with(subdivisions, 1.0, subdivisions + 1)
}

/// Ball of the given radius built from `shells` concentric copies of the
/// icosphere. Each prism between neighbouring shells is split into three
/// tetrahedra, and the innermost shell is coned to the centre.
///
/// Outer-shell vertices come first and keep their icosphere indices, so the
/// boundary of the solid is the icosphere vertex-for-vertex.
pub fn generate_ball_with(subdivisions: usize, radius: f64, shells: usize) -> MeshComplex {
    assert!(radius > 0.0 && shells >= 1, "need a positive radius and at least one shell");
    let (sphere, faces) = unit_icosphere(subdivisions);
    let per_shell = sphere.len();
    // shell k = 0 is the outer surface, radius (shells - k) / shells
    let mut vertices = Vec::with_capacity(per_shell * shells + 1);
    for k in 0..shells {
        let r = radius * (shells - k) as f64 / shells as f64;
        vertices.extend(sphere.iter().map(|v| v * r));
    }
    let center = vertices.len();
    vertices.push(Vec3::zeros());
    let at = |shell: usize, v: usize| shell * per_shell + v;

    let mut tets = Vec::with_capacity(faces.len() * (3 * (shells - 1) + 1));
    for face in &faces {
        let mut f = *face;
        f.sort_unstable();
        let [a, b, c] = f;
        for k in 0..shells - 1 {
            // top = outer shell k, bottom = inner shell k + 1; each quad side
            // is cut from the bottom of its lower-index column to the top of
            // its higher-index column, so neighbouring prisms agree
            let (top, bot) = (k, k + 1);
            tets.push([at(bot, a), at(bot, b), at(bot, c), at(top, c)]);
            tets.push([at(bot, a), at(bot, b), at(top, b), at(top, c)]);
            tets.push([at(bot, a), at(top, a), at(top, b), at(top, c)]);
        }
        let inner = shells - 1;
        tets.push([center, at(inner, a), at(inner, b), at(inner, c)]);
    }
    MeshComplex::solid(vertices, tets).expect("radial ball lattice is a valid solid")
}

/// Torus of revolution about the z-axis with `major` and `minor` radii.
///
/// Alternate rings are rotated by half a tube step so every triangle is
/// acute; a plain quad split would give diagonal edges zero cotan weight.
pub fn generate_torus(major: f64, minor: f64, around: usize, tube: usize) -> MeshComplex {
    assert!(major > minor && minor > 0.0 && tube >= 3);
    assert!(around >= 4 && around % 2 == 0, "ring count must be even");
    let mut vertices = Vec::with_capacity(around * tube);
    for i in 0..around {
        let u = std::f64::consts::TAU * i as f64 / around as f64;
        let stagger = 0.5 * (i % 2) as f64;
        for j in 0..tube {
            let v = std::f64::consts::TAU * (j as f64 + stagger) / tube as f64;
            let rho = major + minor * v.cos();
            vertices.push(Vec3::new(rho * u.cos(), rho * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % around) * tube + (j % tube);
    let mut faces = Vec::with_capacity(2 * around * tube);
    for i in 0..around {
        for j in 0..tube {
            if i % 2 == 0 {
                faces.push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
                faces.push([idx(i, j + 1), idx(i + 1, j), idx(i + 1, j + 1)]);
            } else {
                faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
    }
    MeshComplex::surface(vertices, faces).expect("torus grid is a valid closed surface")
}

/// Disjoint union of closed surfaces, vertex indices offset in order.
pub fn disjoint_union(parts: &[MeshComplex]) -> Result<MeshComplex> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for part in parts {
        let offset = vertices.len();
        vertices.extend_from_slice(part.vertices());
        faces.extend(part.triangles().iter().map(|t| t.map(|v| v + offset)));
    }
    MeshComplex::surface(vertices, faces)
}
