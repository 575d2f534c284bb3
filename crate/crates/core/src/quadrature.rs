//! Triangle and edge quadrature rules in barycentric form.

/// Degree-4 symmetric rule on the reference triangle (weights sum to 1).
pub const TRI4: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_964_886;
    const B1: f64 = 1.0 - 2.0 * A1;
    const W1: f64 = 0.223_381_589_678_011_466;
    const A2: f64 = 0.091_576_213_509_770_743;
    const B2: f64 = 1.0 - 2.0 * A2;
    const W2: f64 = 0.109_951_743_655_321_868;
    [
        ([B1, A1, A1], W1),
        ([A1, B1, A1], W1),
        ([A1, A1, B1], W1),
        ([B2, A2, A2], W2),
        ([A2, B2, A2], W2),
        ([A2, A2, B2], W2),
    ]
};

/// Two-point Gauss rule on [0,1] (exact through cubics).
pub const GAUSS2: [(f64, f64); 2] = {
    const D: f64 = 0.288_675_134_594_812_88; // 1/(2√3)
    [(0.5 - D, 0.5), (0.5 + D, 0.5)]
};

/// Integrate `f` over a triangle with vertices `p` using the degree-4 rule.
pub fn integrate_triangle(p: [[f64; 2]; 3], mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut s = 0.0;
    for (l, w) in TRI4 {
        let x = [
            l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
            l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
        ];
        s += w * f(x);
    }
    s * area.abs()
}
