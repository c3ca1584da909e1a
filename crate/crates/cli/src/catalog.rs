//! Experiment groups with the statements they verify.

/// One experiment group and its anchors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Group {
    pub name: &'static str,
    pub summary: &'static str,
    pub anchors: &'static [&'static str],
}

pub const GROUPS: [Group; 4] = [
    Group {
        name: "eigen",
        summary: "Rayleigh-quotient min-max widths of explicit sweep families on discrete Laplacians",
        anchors: &[
            "the k-th min-max width of the Rayleigh quotient equals the k-th eigenvalue",
            "perturbed admissible families never undercut the k-th eigenvalue",
        ],
    },
    Group {
        name: "s3",
        summary: "widths, conformal volumes, Jacobi indices and degrees for sweep-outs of the round three-sphere",
        anchors: &[
            "the first width equals 4π, realized by great spheres",
            "the second width equals 2π², realized by the Clifford torus of index 5",
            "the family of Clifford Tori and their Möbius images bounds the area from above",
            "the critical catenoid width 2πΛ⁻² with Λ tanh Λ = 1",
            "rotated geodesic spheres and pairs of circles give boundary maps of degree ±1",
        ],
    },
    Group {
        name: "flow",
        summary: "cut-off pseudo-gradient flows of the relaxed area A^σ with entropy and index monitors",
        anchors: &[
            "analytic first and second variations of Area and F",
            "energy descent and the path-length inequality along the flow",
            "vanishing entropy as σ → 0",
            "lower semicontinuity of the Morse index along σ → 0",
            "σ-widths converge to the area width",
        ],
    },
    Group {
        name: "dist",
        summary: "bounded-Lipschitz varifold distances, the F-distance and simplicial flat norms",
        anchors: &[
            "the bounded-Lipschitz distance is a metric dominating the mass gap",
            "the F-distance vanishes on identical immersions",
            "the flat norm of a cube boundary equals the enclosed volume",
        ],
    },
];

pub fn find(name: &str) -> Option<&'static Group> {
    GROUPS.iter().find(|g| g.name == name)
}

/// One line per group.
pub fn list() -> String {
    GROUPS.iter().map(|g| format!("{:<6} {}\n", g.name, g.summary)).collect()
}

/// Summary and anchors of a group.
pub fn describe(name: &str) -> Option<String> {
    find(name).map(|g| {
        let mut s = format!("{}: {}\n", g.name, g.summary);
        for a in g.anchors {
            s.push_str(&format!("  - {a}\n"));
        }
        s
    })
}
