use lattice_forge::coxeter::CoxeterDiagram;

/// The 21-node reflection diagram of M_v, written out by hand.
pub fn mv_diagram() -> CoxeterDiagram {
    let names = [
        "u", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "g1", "g2", "g3", "g4", "b", "a", "g", "b'", "d2", "d3", "d4", "a'",
    ];
    let idx = |s: &str| names.iter().position(|n| *n == s).unwrap();
    let single = [
        ("g", "g1"), ("g1", "g2"), ("g1", "g3"), ("g1", "g4"), ("g", "u"), ("u", "a"), ("u", "b'"), ("a", "a8"), ("a8", "a7"),
        ("a7", "a6"), ("a6", "a5"), ("a5", "a3"), ("a3", "a4"), ("a3", "a2"), ("a2", "a1"), ("a1", "d2"), ("a1", "d3"), ("a1", "d4"),
    ];
    let dashed = [
        ("g2", "d2"), ("g3", "d3"), ("g4", "d4"), ("b'", "b"), ("b", "d2"), ("b", "d3"), ("b", "d4"), ("a'", "g2"), ("a'", "g3"),
        ("a'", "g4"), ("a'", "a4"),
    ];
    let mut g = vec![vec![0i64; 21]; 21];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = -2;
    }
    let mut set = |a: &str, b: &str, p: i64| {
        let (i, j) = (idx(a), idx(b));
        g[i][j] = p;
        g[j][i] = p;
    };
    single.iter().for_each(|(a, b)| set(a, b, 1));
    dashed.iter().for_each(|(a, b)| set(a, b, 2));
    set("b", "a'", 3);
    CoxeterDiagram::from_gram(names.iter().map(|s| s.to_string()).collect(), g).unwrap()
}
