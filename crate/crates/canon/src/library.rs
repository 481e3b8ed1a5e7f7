//! Built-in graph library mirroring the worked examples: bubble, triangle,
//! banana-n, box, dunce's cap, double bubble, box-triangle, pentagon,
//! hexagon and the wheel with three spokes. Each ships with a reference
//! kinematics. The same graphs are also available as JSON data files under
//! `graphs/` (embedded at compile time); a test keeps the two in sync.

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};
use crate::kinematics::Kinematics;
use crate::rat::Rat;

fn edge(id: u32, source: u32, target: u32, mass_label: u32) -> Edge {
    Edge {
        id,
        source,
        target,
        mass_label,
    }
}

fn graph(vertices: &[u32], edges: Vec<Edge>, legs: &[(u32, u32)]) -> Graph {
    Graph::new(
        vertices.iter().map(|&v| (v, 0)).collect(),
        edges,
        legs.to_vec(),
    )
    .expect("built-in graph is valid")
}

/// Two vertices joined by two edges; legs q1, q2. Edge 1 runs into the q1
/// vertex so that q1 = mu2 - mu1 with the cycle c1 = e1 + e2.
pub fn bubble() -> Graph {
    graph(
        &[1, 2],
        vec![edge(1, 2, 1, 1), edge(2, 1, 2, 2)],
        &[(1, 1), (2, 2)],
    )
}

/// One-loop triangle, legs at all three vertices.
pub fn triangle() -> Graph {
    graph(
        &[1, 2, 3],
        vec![edge(1, 3, 1, 1), edge(2, 1, 2, 2), edge(3, 2, 3, 3)],
        &[(1, 1), (2, 2), (3, 3)],
    )
}

/// Banana with n parallel edges: e_1..e_{n-1} from vertex 1 to 2, e_n back.
pub fn banana(n: u32) -> Graph {
    let mut edges: Vec<Edge> = (1..n).map(|i| edge(i, 1, 2, i)).collect();
    edges.push(edge(n, 2, 1, n));
    graph(&[1, 2], edges, &[(1, 1), (2, 2)])
}

/// One-loop box: edge i runs from vertex i-1 to vertex i (mod 4), so the
/// routing satisfies mu_{i+1} - mu_i = q_i.
pub fn box_graph() -> Graph {
    graph(
        &[1, 2, 3, 4],
        vec![edge(1, 4, 1, 1), edge(2, 1, 2, 2), edge(3, 2, 3, 3), edge(4, 3, 4, 4)],
        &[(1, 1), (2, 2), (3, 3), (4, 4)],
    )
}

/// Dunce's cap: edges 1,2 join the leg-1 vertex to the doubled pair 3,4.
pub fn dunce() -> Graph {
    graph(
        &[1, 2, 3],
        vec![edge(1, 1, 2, 1), edge(2, 3, 1, 2), edge(3, 2, 3, 3), edge(4, 2, 3, 4)],
        &[(1, 1), (2, 2), (3, 3)],
    )
}

/// Two bubbles sharing the middle vertex (a 1-vertex join).
pub fn double_bubble() -> Graph {
    graph(
        &[1, 2, 3],
        vec![edge(1, 1, 2, 1), edge(2, 2, 1, 2), edge(3, 2, 3, 3), edge(4, 3, 2, 4)],
        &[(1, 1), (2, 2), (3, 3)],
    )
}

/// Box-triangle: square on vertices 1,2,3,4 plus a triangle 4,3,5 glued
/// along edge 4.
pub fn box_triangle() -> Graph {
    graph(
        &[1, 2, 3, 4, 5],
        vec![
            edge(1, 1, 4, 1),
            edge(2, 1, 2, 2),
            edge(3, 2, 3, 3),
            edge(4, 4, 3, 4),
            edge(5, 4, 5, 5),
            edge(6, 3, 5, 6),
        ],
        &[(1, 1), (2, 2), (3, 3), (4, 4), (5, 5)],
    )
}

/// One-loop pentagon, all edges massive, legs at all five vertices.
/// Edge i joins the vertices carrying legs i-1 and i.
pub fn pentagon() -> Graph {
    graph(
        &[1, 2, 3, 4, 5],
        vec![
            edge(1, 5, 1, 1),
            edge(2, 1, 2, 2),
            edge(3, 2, 3, 3),
            edge(4, 3, 4, 4),
            edge(5, 4, 5, 5),
        ],
        &[(1, 1), (2, 2), (3, 3), (4, 4), (5, 5)],
    )
}

/// One-loop hexagon with six legs; reference kinematics is quaternionic.
pub fn hexagon() -> Graph {
    graph(
        &[1, 2, 3, 4, 5, 6],
        vec![
            edge(1, 6, 1, 1),
            edge(2, 1, 2, 2),
            edge(3, 2, 3, 3),
            edge(4, 3, 4, 4),
            edge(5, 4, 5, 5),
            edge(6, 5, 6, 6),
        ],
        &[(1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (6, 6)],
    )
}

/// Wheel with three spokes (rim 1,2,3 and hub 4), with legs on the rim.
pub fn wheel3() -> Graph {
    graph(
        &[1, 2, 3, 4],
        vec![
            edge(1, 1, 2, 1),
            edge(2, 2, 3, 2),
            edge(3, 3, 1, 3),
            edge(4, 1, 4, 4),
            edge(5, 2, 4, 5),
            edge(6, 3, 4, 6),
        ],
        &[(1, 1), (2, 2), (3, 3)],
    )
}

fn kin2(momenta: &[(u32, i64, i64)], masses: &[(u32, i64)]) -> Kinematics {
    Kinematics::new(
        2,
        momenta
            .iter()
            .map(|&(leg, x, y)| {
                (leg, [Rat::from_int(x), Rat::from_int(y), Rat::ZERO, Rat::ZERO])
            })
            .collect(),
        masses.iter().map(|&(l, m2)| (l, Rat::from_int(m2))).collect(),
    )
    .expect("built-in kinematics is valid")
}

pub fn bubble_kin() -> Kinematics {
    kin2(&[(1, 3, 1), (2, -3, -1)], &[(1, 4), (2, 1)])
}

pub fn triangle_kin() -> Kinematics {
    kin2(&[(1, 2, 1), (2, 1, -3), (3, -3, 2)], &[(1, 1), (2, 2), (3, 3)])
}

pub fn banana_kin(n: u32) -> Kinematics {
    kin2(
        &[(1, 3, 1), (2, -3, -1)],
        &(1..=n).map(|l| (l, l as i64)).collect::<Vec<_>>(),
    )
}

pub fn box_kin() -> Kinematics {
    kin2(
        &[(1, 3, 1), (2, 1, -2), (3, -2, 3), (4, -2, -2)],
        &[(1, 1), (2, 2), (3, 3), (4, 4)],
    )
}

pub fn dunce_kin() -> Kinematics {
    kin2(
        &[(1, 2, 1), (2, 1, -3), (3, -3, 2)],
        &[(1, 1), (2, 2), (3, 3), (4, 4)],
    )
}

pub fn double_bubble_kin() -> Kinematics {
    dunce_kin()
}

pub fn box_triangle_kin() -> Kinematics {
    kin2(
        &[(1, 2, 1), (2, 1, -3), (3, -1, 2), (4, 3, 2), (5, -5, -2)],
        &[(1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (6, 6)],
    )
}

pub fn pentagon_kin() -> Kinematics {
    kin2(
        &[(1, 2, 1), (2, 1, -3), (3, -1, 2), (4, 3, 2), (5, -5, -2)],
        &[(1, 1), (2, 2), (3, 3), (4, 4), (5, 5)],
    )
}

pub fn wheel3_kin() -> Kinematics {
    kin2(
        &[(1, 2, 1), (2, 1, -3), (3, -3, 2)],
        &[(1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (6, 6)],
    )
}

pub fn hexagon_kin() -> Kinematics {
    let q = |x: i64, y: i64, z: i64, w: i64| {
        [
            Rat::from_int(x),
            Rat::from_int(y),
            Rat::from_int(z),
            Rat::from_int(w),
        ]
    };
    Kinematics::new(
        4,
        vec![
            (1, q(1, 0, 0, 0)),
            (2, q(0, 1, 0, 0)),
            (3, q(0, 0, 1, 0)),
            (4, q(0, 0, 0, 1)),
            (5, q(1, 1, 1, 1)),
            (6, q(-2, -2, -2, -2)),
        ],
        (1..=6).map(|l| (l, Rat::from_int(l as i64))).collect(),
    )
    .expect("built-in kinematics is valid")
}

/// Resolve a built-in graph by name.
pub fn graph_by_name(name: &str) -> Result<Graph> {
    match name {
        "bubble" => Ok(bubble()),
        "triangle" => Ok(triangle()),
        "banana3" => Ok(banana(3)),
        "banana4" => Ok(banana(4)),
        "box" => Ok(box_graph()),
        "dunce" => Ok(dunce()),
        "double-bubble" | "double_bubble" => Ok(double_bubble()),
        "box-triangle" | "box_triangle" => Ok(box_triangle()),
        "pentagon" => Ok(pentagon()),
        "hexagon" => Ok(hexagon()),
        "wheel3" => Ok(wheel3()),
        _ => Err(Error::Schema(format!("unknown built-in graph `{name}`"))),
    }
}

/// Reference kinematics for a built-in graph.
pub fn kin_by_name(name: &str) -> Result<Kinematics> {
    match name {
        "bubble" => Ok(bubble_kin()),
        "triangle" => Ok(triangle_kin()),
        "banana3" => Ok(banana_kin(3)),
        "banana4" => Ok(banana_kin(4)),
        "box" => Ok(box_kin()),
        "dunce" => Ok(dunce_kin()),
        "double-bubble" | "double_bubble" => Ok(double_bubble_kin()),
        "box-triangle" | "box_triangle" => Ok(box_triangle_kin()),
        "pentagon" => Ok(pentagon_kin()),
        "hexagon" => Ok(hexagon_kin()),
        "wheel3" => Ok(wheel3_kin()),
        _ => Err(Error::Schema(format!("unknown built-in graph `{name}`"))),
    }
}

pub const BUILTIN_NAMES: &[&str] = &[
    "bubble",
    "triangle",
    "banana3",
    "banana4",
    "box",
    "dunce",
    "double-bubble",
    "box-triangle",
    "pentagon",
    "hexagon",
    "wheel3",
];

/// Embedded copies of the shipped data files.
pub fn embedded_graph_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "bubble" => include_str!("../graphs/bubble.json"),
        "triangle" => include_str!("../graphs/triangle.json"),
        "banana3" => include_str!("../graphs/banana3.json"),
        "banana4" => include_str!("../graphs/banana4.json"),
        "box" => include_str!("../graphs/box.json"),
        "dunce" => include_str!("../graphs/dunce.json"),
        "double-bubble" | "double_bubble" => include_str!("../graphs/double_bubble.json"),
        "box-triangle" | "box_triangle" => include_str!("../graphs/box_triangle.json"),
        "pentagon" => include_str!("../graphs/pentagon.json"),
        "hexagon" => include_str!("../graphs/hexagon.json"),
        "wheel3" => include_str!("../graphs/wheel3.json"),
        _ => return None,
    })
}

pub fn embedded_kin_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "bubble" => include_str!("../graphs/bubble_kin.json"),
        "triangle" => include_str!("../graphs/triangle_kin.json"),
        "banana3" => include_str!("../graphs/banana3_kin.json"),
        "banana4" => include_str!("../graphs/banana4_kin.json"),
        "box" => include_str!("../graphs/box_kin.json"),
        "dunce" => include_str!("../graphs/dunce_kin.json"),
        "double-bubble" | "double_bubble" => include_str!("../graphs/double_bubble_kin.json"),
        "box-triangle" | "box_triangle" => include_str!("../graphs/box_triangle_kin.json"),
        "pentagon" => include_str!("../graphs/pentagon_kin.json"),
        "hexagon" => include_str!("../graphs/hexagon_kin.json"),
        "wheel3" => include_str!("../graphs/wheel3_kin.json"),
        _ => return None,
    })
}
