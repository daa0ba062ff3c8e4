//! Small reference graphs shared by unit, integration and acceptance tests.

use crate::graph::{load_edge_list, Graph};

fn parse(text: &str) -> Graph {
    load_edge_list(text.as_bytes()).expect("fixture graphs are well formed")
}

/// The 14-vertex example graph with overlapping candidates `v` and `c`.
pub fn example_graph() -> Graph {
    parse(
        "a c\na v\nb v\ne v\ne m\ni v\nh m\nh l\nh q\ni j\nb d\nc d\nf c\nf d\nf g\ng d\nj q\nl q\n",
    )
}

pub fn single_edge() -> Graph {
    Graph::from_unlabeled(2, &[(0, 1)]).unwrap()
}

pub fn path3() -> Graph {
    Graph::from_unlabeled(3, &[(0, 1), (1, 2)]).unwrap()
}

pub fn triangle() -> Graph {
    Graph::from_unlabeled(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
}

/// Star with centre 0 and leaves 1..=3.
pub fn star4() -> Graph {
    Graph::from_unlabeled(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
}

/// Triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
pub fn two_triangles_bridge() -> Graph {
    Graph::from_unlabeled(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap()
}

pub fn two_disjoint_triangles() -> Graph {
    Graph::from_unlabeled(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_unlabeled(n, &edges).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    Graph::from_unlabeled(n, &edges).unwrap()
}
