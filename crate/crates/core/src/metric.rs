//! Log-Euclidean geometry on weight space: apartment distances, convexity
//! checks for admissible half-spaces, angles between rays at a weight,
//! certified lower/upper distance bounds between valuation points, and
//! breadth-first exploration of the rank-2 tree over a finite field.
//!
//! Exact rational arithmetic is used for every membership or incidence
//! decision (which hyperplane a ray lies on, whether two points glue, …);
//! floating point enters only in the final metric quantities (lengths,
//! angles), which carry an explicit tolerance.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::admissible_geometry::AdmissibleInequality;
use crate::error::{Error, Result};
use crate::field_poly::{Field, Polynomial, Scalar};
use crate::tame_group::{Generator, TameWord};
use crate::valuation_space::{point_eval, points_equal, rho, ValuationPoint, Weight};

/// Tolerance used by the floating-point metric checks in this module.
pub const METRIC_TOLERANCE: f64 = 1e-9;

fn rat_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A point of the log chart: coordinates `beta_i = log(alpha_i)` recentred
/// so that they sum to zero.  This normalises away the projective scaling
/// of a weight.
#[derive(Clone, Debug)]
pub struct LogPoint {
    beta: Vec<f64>,
}

impl LogPoint {
    /// Recentre `beta` to sum to zero and wrap it.
    pub fn new(mut beta: Vec<f64>) -> LogPoint {
        let mean = beta.iter().sum::<f64>() / beta.len() as f64;
        for b in beta.iter_mut() {
            *b -= mean;
        }
        LogPoint { beta }
    }

    pub fn coords(&self) -> &[f64] {
        &self.beta
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    /// Euclidean distance to another log point (same dimension assumed).
    pub fn distance(&self, other: &LogPoint) -> f64 {
        assert_eq!(self.beta.len(), other.beta.len(), "log points of different dimension");
        self.beta
            .iter()
            .zip(&other.beta)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Log coordinates of a positive weight, recentred to sum zero.
pub fn log_coords(alpha: &Weight) -> LogPoint {
    LogPoint::new(alpha.coords().iter().map(|c| rat_f64(c).ln()).collect())
}

/// Distance between two weights inside one apartment: the Euclidean
/// distance between their recentred log coordinates.  Scale-invariant in
/// each argument.  Both weights must be strictly positive and have the
/// same number of coordinates.
pub fn apartment_distance(alpha: &Weight, beta: &Weight) -> f64 {
    assert_eq!(alpha.n(), beta.n(), "weights of different dimension");
    log_coords(alpha).distance(&log_coords(beta))
}

/// Given two weights on the boundary hyperplane of an admissible
/// inequality, check that their log-segment midpoint (the coordinatewise
/// geometric mean) still satisfies the inequality.  This witnesses the
/// convexity of the half-space `{a_i >= sum m_j a_j}` in the log chart.
///
/// Errors if either weight is not on the hyperplane.
pub fn halfspace_midpoint_check(
    ineq: &AdmissibleInequality,
    alpha: &Weight,
    beta: &Weight,
) -> Result<bool> {
    if !ineq.on_hyperplane(alpha) || !ineq.on_hyperplane(beta) {
        return Err(Error::precondition(
            "midpoint check requires both weights on the boundary hyperplane",
        ));
    }
    let mid: Vec<f64> = alpha
        .coords()
        .iter()
        .zip(beta.coords())
        .map(|(a, b)| (rat_f64(a) * rat_f64(b)).sqrt())
        .collect();
    let lhs = mid[ineq.index() - 1];
    let rhs: f64 = ineq
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, &m)| m as f64 * mid[j])
        .sum();
    Ok(lhs - rhs >= -1e-12 * (1.0 + rhs.abs()))
}

/// Which metric to measure an angle in: the log chart (the intrinsic
/// geometry of the valuation space) or the flat simplex chart (weights
/// normalised to constant sum, plain Euclidean angles).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricKind {
    Log,
    Simplex,
}

/// A direction at a base weight, described exactly:
/// either the straight segment toward an ideal boundary point of the
/// weight simplex, or one of the two rays of an admissible hyperplane
/// trace through the base point (disambiguated by an ideal point on the
/// chosen side).
#[derive(Clone, Debug)]
pub enum RayDirection {
    /// Toward the projective point `toward` of the closed simplex
    /// (non-negative coordinates, not all zero, distinct from the base).
    Ideal { toward: Vec<BigRational> },
    /// Along the trace of `ineq`'s hyperplane through the base weight,
    /// on the side pointing toward the ideal point `toward`.
    Hyperplane {
        ineq: AdmissibleInequality,
        toward: Vec<BigRational>,
    },
}

fn cross3(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact chart tangent of the straight segment from `alpha` toward the
/// projective simplex point `w`: the difference `c*w - alpha` rescaled so
/// both ends lie on the same constant-sum slice.  The result sums to zero.
fn ideal_tangent(alpha: &Weight, w: &[BigRational]) -> Result<Vec<BigRational>> {
    let n = alpha.n();
    if w.len() != n {
        return Err(Error::DimensionMismatch(w.len(), n));
    }
    if w.iter().any(|c| c.is_negative()) {
        return Err(Error::precondition(
            "ideal direction must have non-negative coordinates",
        ));
    }
    let sum_w: BigRational = w.iter().sum();
    if sum_w.is_zero() {
        return Err(Error::precondition("ideal direction must be non-zero"));
    }
    let sum_a: BigRational = alpha.coords().iter().sum();
    let scale = sum_a / sum_w;
    let v: Vec<BigRational> = w
        .iter()
        .zip(alpha.coords())
        .map(|(wi, ai)| &scale * wi - ai)
        .collect();
    if v.iter().all(|c| c.is_zero()) {
        return Err(Error::precondition(
            "ideal direction coincides with the base weight",
        ));
    }
    Ok(v)
}

/// Exact chart tangent (summing to zero) of a ray direction at `alpha`.
/// For a hyperplane direction the base weight must lie on the hyperplane
/// and the `toward` point must not be equidistant from the two rays.
pub fn chart_tangent(alpha: &Weight, dir: &RayDirection) -> Result<Vec<BigRational>> {
    match dir {
        RayDirection::Ideal { toward } => ideal_tangent(alpha, toward),
        RayDirection::Hyperplane { ineq, toward } => {
            let n = alpha.n();
            if n != 3 {
                return Err(Error::precondition(
                    "hyperplane ray directions are defined for three coordinates",
                ));
            }
            if ineq.n_vars() != n {
                return Err(Error::DimensionMismatch(ineq.n_vars(), n));
            }
            if !ineq.on_hyperplane(alpha) {
                return Err(Error::precondition(
                    "hyperplane direction does not pass through the base weight",
                ));
            }
            // Normal of the hyperplane a_i = sum m_j a_j.
            let mut normal: Vec<BigRational> = ineq
                .coefficients()
                .iter()
                .map(|&m| -BigRational::from(BigInt::from(m)))
                .collect();
            normal[ineq.index() - 1] += BigRational::one();
            let ones = vec![BigRational::one(); 3];
            // Tangent line of the trace: orthogonal to the normal and to
            // the constant-sum direction.
            let t0 = cross3(&normal, &ones);
            let toward_tangent = ideal_tangent(alpha, toward)?;
            let side = dot(&t0, &toward_tangent);
            if side.is_zero() {
                return Err(Error::precondition(
                    "side marker does not select one of the two hyperplane rays",
                ));
            }
            let sign = if side.is_positive() {
                BigRational::one()
            } else {
                -BigRational::one()
            };
            Ok(t0.into_iter().map(|c| &sign * c).collect())
        }
    }
}

/// Angle at `alpha` between two exact chart tangents, measured in the
/// requested metric.  The log metric pushes a chart tangent `v` forward to
/// `v_i / alpha_i` recentred to sum zero; the simplex metric uses `v`
/// directly.  Exact arithmetic up to the final normalisation.
pub fn tangent_angle(
    alpha: &Weight,
    v1: &[BigRational],
    v2: &[BigRational],
    metric: MetricKind,
) -> f64 {
    let push = |v: &[BigRational]| -> Vec<BigRational> {
        match metric {
            MetricKind::Simplex => v.to_vec(),
            MetricKind::Log => {
                let scaled: Vec<BigRational> =
                    v.iter().zip(alpha.coords()).map(|(c, a)| c / a).collect();
                let mean: BigRational =
                    scaled.iter().sum::<BigRational>() / BigRational::from(BigInt::from(v.len()));
                scaled.iter().map(|c| c - &mean).collect()
            }
        }
    };
    let a = push(v1);
    let b = push(v2);

    // Parallel and anti-parallel pairs are decided exactly, so coinciding
    // rays report an angle of exactly 0 (and opposite rays exactly pi)
    // instead of arccos round-off noise.
    let dot: BigRational = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let na2: BigRational = a.iter().map(|x| x * x).sum();
    let nb2: BigRational = b.iter().map(|x| x * x).sum();
    if !na2.is_zero() && !nb2.is_zero() && &dot * &dot == &na2 * &nb2 {
        return if dot.is_negative() {
            std::f64::consts::PI
        } else {
            0.0
        };
    }
    if dot.is_zero() {
        return std::f64::consts::FRAC_PI_2;
    }

    let af: Vec<f64> = a.iter().map(rat_f64).collect();
    let bf: Vec<f64> = b.iter().map(rat_f64).collect();
    let norm = |x: &[f64]| x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let na = norm(&af);
    let nb = norm(&bf);
    let mut cos = af.iter().zip(&bf).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    cos = cos.clamp(-1.0, 1.0);
    cos.acos()
}

/// Angle between two ray directions at a weight with three coordinates.
pub fn angle(
    alpha: &Weight,
    dir1: &RayDirection,
    dir2: &RayDirection,
    metric: MetricKind,
) -> Result<f64> {
    if alpha.n() != 3 {
        return Err(Error::precondition(
            "angles are measured at weights with three coordinates",
        ));
    }
    let v1 = chart_tangent(alpha, dir1)?;
    let v2 = chart_tangent(alpha, dir2)?;
    Ok(tangent_angle(alpha, &v1, &v2, metric))
}

/// The involution `[w1, w2, w3] -> [w1, p*w3, w2/p]` on projective weight
/// representatives with three coordinates (zeros allowed).  In the log
/// chart it is the axial reflection across `beta_2 - beta_3 = log p`, so
/// it fixes every weight of the form `[t, p, 1]` and preserves log angles.
pub fn tau_involution(p: &BigRational, point: &[BigRational]) -> Result<Vec<BigRational>> {
    if point.len() != 3 {
        return Err(Error::DimensionMismatch(point.len(), 3));
    }
    if !p.is_positive() {
        return Err(Error::precondition("reflection parameter must be positive"));
    }
    if point.iter().any(|c| c.is_negative()) {
        return Err(Error::precondition(
            "projective representatives must be non-negative",
        ));
    }
    if point.iter().all(|c| c.is_zero()) {
        return Err(Error::precondition("projective representative must be non-zero"));
    }
    Ok(vec![point[0].clone(), p * &point[2], &point[1] / p])
}

/// Certified lower bound for the distance between two valuation points:
/// the apartment distance between their sorted-chamber images.  The
/// retraction onto a chamber does not increase distances, so this never
/// exceeds the true distance.
pub fn distance_lower(a: &ValuationPoint, b: &ValuationPoint, cap: u32) -> Result<f64> {
    if a.field() != b.field() {
        return Err(Error::FieldMismatch(a.field(), b.field()));
    }
    if a.n_vars() != b.n_vars() {
        return Err(Error::DimensionMismatch(a.n_vars(), b.n_vars()));
    }
    let ra = rho(a, cap)?;
    let rb = rho(b, cap)?;
    Ok(apartment_distance(ra.weight(), rb.weight()))
}

/// A certified chain of apartment hops realising an upper bound for the
/// distance between two valuation points.  Consecutive hops either stay in
/// one frame (a straight segment inside that apartment) or switch frame at
/// a weight where the two frames give the same valuation.
#[derive(Clone, Debug)]
pub struct ChainWitness {
    hops: Vec<(TameWord, Weight)>,
    length: f64,
}

impl ChainWitness {
    pub fn hops(&self) -> &[(TameWord, Weight)] {
        &self.hops
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Re-check the chain: every consecutive pair must either share the
    /// frame (segment inside an apartment) or share the weight with both
    /// frames giving the same valuation point (a certified gluing), and
    /// the stored length must match the recomputed one.
    pub fn verify(&self, cap: u32) -> Result<bool> {
        let mut total = 0.0;
        for pair in self.hops.windows(2) {
            let (f, v) = &pair[0];
            let (g, w) = &pair[1];
            if f.same_map(g, cap)? {
                total += apartment_distance(v, w);
            } else if v.scaled_to_min_one().coords() == w.scaled_to_min_one().coords() {
                let pv = ValuationPoint::new(f.clone(), v)?;
                let pw = ValuationPoint::new(g.clone(), w)?;
                if !points_equal(&pv, &pw, cap)? {
                    return Ok(false);
                }
            } else {
                return Ok(false);
            }
        }
        Ok((total - self.length).abs() <= METRIC_TOLERANCE * (1.0 + self.length.abs()))
    }
}

impl fmt::Display for ChainWitness {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(out, "chain of length {:.12} with {} stops:", self.length, self.hops.len())?;
        for (word, weight) in &self.hops {
            let frame = word.to_string();
            let frame = frame.trim_end().replace('\n', "; ");
            writeln!(out, "  at {weight} in frame [{frame}]")?;
        }
        Ok(())
    }
}

fn word_key(word: &TameWord, cap: u32) -> Result<String> {
    let comps = word.components(cap)?;
    Ok(comps
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(";"))
}

/// Integer mesh weights with coordinates in `1..=mesh`, reduced so that
/// proportional vectors appear once.
fn mesh_weights(n: usize, mesh: u32) -> Vec<Weight> {
    let mut out = Vec::new();
    let mut counter = vec![1u32; n];
    loop {
        let gcd = counter.iter().fold(0u32, |acc, &c| {
            let mut a = acc;
            let mut b = c;
            while b != 0 {
                let t = a % b;
                a = b;
                b = t;
            }
            a
        });
        if gcd == 1 {
            let coords: Vec<i64> = counter.iter().map(|&c| c as i64).collect();
            out.push(Weight::from_integers(&coords).expect("positive mesh weight"));
        }
        // Increment the mixed-radix counter.
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if counter[i] < mesh {
                counter[i] += 1;
                break;
            }
            counter[i] = 1;
            i += 1;
        }
    }
}

/// Certified upper bound for the distance between two valuation points,
/// together with the chain of apartment hops that realises it.
///
/// The search graph uses every frame obtained by composing the endpoint
/// frames with products of at most `depth` catalog words; its nodes are
/// those frames paired with integer mesh weights (coordinates `1..=mesh`)
/// plus the two endpoint weights.  Edges inside one frame are weighted by
/// the apartment distance; zero-length frame switches are added exactly
/// where the two frames give the same valuation point.  If the endpoints
/// are not connected the result is `(f64::INFINITY, empty witness)`.
pub fn chain_distance_upper(
    a: &ValuationPoint,
    b: &ValuationPoint,
    catalog: &[TameWord],
    depth: usize,
    mesh: u32,
    cap: u32,
) -> Result<(f64, ChainWitness)> {
    if a.field() != b.field() {
        return Err(Error::FieldMismatch(a.field(), b.field()));
    }
    if a.n_vars() != b.n_vars() {
        return Err(Error::DimensionMismatch(a.n_vars(), b.n_vars()));
    }
    let n = a.n_vars();
    let field = a.field();
    for word in catalog {
        if word.n_vars() != n {
            return Err(Error::DimensionMismatch(word.n_vars(), n));
        }
    }

    // Products of at most `depth` catalog words, breadth-first, deduplicated
    // by their expanded components.
    let identity = TameWord::identity(n, field);
    let mut products = vec![identity.clone()];
    let mut seen = std::collections::BTreeSet::new();
    seen.insert(word_key(&identity, cap)?);
    let mut frontier = vec![identity];
    for _ in 0..depth {
        let mut next = Vec::new();
        for p in &frontier {
            for c in catalog {
                let q = p.compose(c)?;
                let key = word_key(&q, cap)?;
                if seen.insert(key) {
                    products.push(q.clone());
                    next.push(q);
                }
            }
        }
        if products.len() > 64 {
            return Err(Error::SearchBudgetExceeded(format!(
                "catalog generates more than 64 frames at depth {depth}"
            )));
        }
        frontier = next;
    }

    let mut frames: Vec<TameWord> = Vec::new();
    let mut frame_seen = std::collections::BTreeSet::new();
    for endpoint in [a.frame(), b.frame()] {
        for p in &products {
            let f = endpoint.compose(p)?;
            if frame_seen.insert(word_key(&f, cap)?) {
                frames.push(f);
            }
        }
    }
    for p in &products {
        if frame_seen.insert(word_key(p, cap)?) {
            frames.push(p.clone());
        }
    }
    if frames.len() > 128 {
        return Err(Error::SearchBudgetExceeded(
            "frame catalog exceeds 128 apartments".into(),
        ));
    }

    // Grid of weights: mesh points plus the endpoint weights.
    let mut grid = mesh_weights(n, mesh);
    for w in [a.weight(), b.weight()] {
        let canon = w.scaled_to_min_one();
        if !grid.iter().any(|g| g.proportional(&canon)) {
            grid.push(canon);
        }
    }

    // Locate the endpoint nodes.
    let find_frame = |word: &TameWord| -> Result<usize> {
        let key = word_key(word, cap)?;
        for (i, f) in frames.iter().enumerate() {
            if word_key(f, cap)? == key {
                return Ok(i);
            }
        }
        unreachable!("endpoint frame was inserted above")
    };
    let find_weight = |w: &Weight| -> usize {
        let canon = w.scaled_to_min_one();
        grid.iter()
            .position(|g| g.proportional(&canon))
            .expect("endpoint weight was inserted above")
    };
    let node = |fi: usize, wi: usize| fi * grid.len() + wi;
    let start = node(find_frame(a.frame())?, find_weight(a.weight()));
    let goal = node(find_frame(b.frame())?, find_weight(b.weight()));

    // Edges.
    let n_nodes = frames.len() * grid.len();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_nodes];
    for fi in 0..frames.len() {
        for wi in 0..grid.len() {
            for wj in (wi + 1)..grid.len() {
                let d = apartment_distance(&grid[wi], &grid[wj]);
                adj[node(fi, wi)].push((node(fi, wj), d));
                adj[node(fi, wj)].push((node(fi, wi), d));
            }
        }
    }
    for fi in 0..frames.len() {
        for fj in (fi + 1)..frames.len() {
            for (wi, w) in grid.iter().enumerate() {
                let pa = ValuationPoint::new(frames[fi].clone(), w)?;
                let pb = ValuationPoint::new(frames[fj].clone(), w)?;
                if points_equal(&pa, &pb, cap)? {
                    adj[node(fi, wi)].push((node(fj, wi), 0.0));
                    adj[node(fj, wi)].push((node(fi, wi), 0.0));
                }
            }
        }
    }

    // Dijkstra with deterministic linear-scan extraction.
    let mut dist = vec![f64::INFINITY; n_nodes];
    let mut prev = vec![usize::MAX; n_nodes];
    let mut done = vec![false; n_nodes];
    dist[start] = 0.0;
    loop {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (i, &d) in dist.iter().enumerate() {
            if !done[i] && d < best_d {
                best = i;
                best_d = d;
            }
        }
        if best == usize::MAX {
            break;
        }
        done[best] = true;
        if best == goal {
            break;
        }
        for &(next, w) in &adj[best] {
            let cand = best_d + w;
            if cand < dist[next] {
                dist[next] = cand;
                prev[next] = best;
            }
        }
    }

    if dist[goal].is_infinite() {
        let witness = ChainWitness { hops: Vec::new(), length: f64::INFINITY };
        return Ok((f64::INFINITY, witness));
    }

    let mut path = vec![goal];
    let mut cursor = goal;
    while cursor != start {
        cursor = prev[cursor];
        path.push(cursor);
    }
    path.reverse();
    let hops: Vec<(TameWord, Weight)> = path
        .into_iter()
        .map(|id| {
            let fi = id / grid.len();
            let wi = id % grid.len();
            (frames[fi].clone(), grid[wi].clone())
        })
        .collect();
    let witness = ChainWitness { hops, length: dist[goal] };
    Ok((dist[goal], witness))
}

/// A ball in the rank-2 tree: valuation classes at integer weights `[i, 1]`
/// connected by chamber edges, explored breadth-first from a root.
#[derive(Clone, Debug)]
pub struct X2Ball {
    vertices: Vec<(TameWord, Weight)>,
    levels: Vec<usize>,
    edges: Vec<(usize, usize, f64)>,
    multi_edges: usize,
}

impl X2Ball {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[(TameWord, Weight)] {
        &self.vertices
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Edges as `(vertex, vertex, length)` with the apartment length of the
    /// chamber segment.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// The explored ball is a tree: connected by construction, so acyclic
    /// exactly when the edge count is one less than the vertex count and no
    /// doubled edge was found.
    pub fn is_acyclic(&self) -> bool {
        self.multi_edges == 0 && self.edges.len() + 1 == self.vertices.len()
    }
}

fn field_elements(field: Field) -> Vec<Scalar> {
    let p = field.characteristic();
    (0..p).map(|k| field.integer(k as i64)).collect()
}

/// Every word fixing the monomial valuation at weight `(i, 1)` over a
/// finite field, up to the degree cap: for `i = 1` the full affine group;
/// for `i >= 2` the maps `(a*x1 + Q(x2), b*x2 + d)` with `deg Q <= min(i, cap)`.
fn x2_stabilizer_elements(field: Field, i: u64, cap: u32) -> Result<Vec<TameWord>> {
    let elements = field_elements(field);
    let one = field.one();
    let units: Vec<Scalar> = elements.iter().filter(|e| !e.is_zero()).cloned().collect();
    let mut out = Vec::new();
    if i == 1 {
        for a in &elements {
            for b in &elements {
                for c in &elements {
                    for d in &elements {
                        let matrix = vec![vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]];
                        for t1 in &elements {
                            for t2 in &elements {
                                if let Ok(gen) =
                                    Generator::affine(matrix.clone(), vec![t1.clone(), t2.clone()])
                                {
                                    out.push(TameWord::new(2, field, vec![gen])?);
                                }
                            }
                        }
                    }
                }
            }
        }
        return Ok(out);
    }
    let deg = (i.min(cap as u64)) as u32;
    let mut coeffs = vec![0usize; deg as usize + 1];
    loop {
        // Build Q(x2) from the current coefficient selection.
        let mut q = Polynomial::zero(2, field);
        for (k, &sel) in coeffs.iter().enumerate() {
            if !elements[sel].is_zero() {
                let mono = crate::field_poly::Monomial::new(vec![0, k as u32]);
                q = q.add(&Polynomial::term(mono, elements[sel].clone()))?;
            }
        }
        for a in &units {
            for b in &units {
                for d in &elements {
                    let matrix = vec![
                        vec![a.clone(), field.zero()],
                        vec![field.zero(), b.clone()],
                    ];
                    let affine = Generator::affine(matrix, vec![field.zero(), d.clone()])?;
                    let gens = if q.is_zero() {
                        vec![affine]
                    } else {
                        vec![Generator::elementary(1, q.clone())?, affine]
                    };
                    out.push(TameWord::new(2, field, gens)?);
                }
            }
        }
        // Next coefficient selection.
        let mut pos = 0;
        loop {
            if pos == coeffs.len() {
                let _ = &one;
                return Ok(out);
            }
            if coeffs[pos] + 1 < elements.len() {
                coeffs[pos] += 1;
                break;
            }
            coeffs[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact value signature of a valuation point on a fixed probe set; equal
/// points always share a signature, so it serves as a cheap pre-filter
/// before the exact equality test.
fn x2_signature(point: &ValuationPoint, probes: &[Polynomial], cap: u32) -> Result<String> {
    let mut parts = Vec::with_capacity(probes.len());
    for p in probes {
        parts.push(point_eval(point, p, cap)?.to_string());
    }
    Ok(parts.join("|"))
}

/// Breadth-first ball of the rank-2 tree around a root valuation with
/// integer sorted weight `(i, 1)`, over a finite field.  Vertices are
/// valuation classes at weights `[j, 1]`; edges are chamber segments
/// between consecutive integers, discovered through the stabilizer of each
/// visited vertex (enumerated up to `stab_cap`).  Every edge of the induced
/// ball is reported, together with a doubled-edge count, so acyclicity of
/// the explored ball is certified.
pub fn x2_tree_ball(
    root: &ValuationPoint,
    depth: usize,
    stab_cap: u32,
    cap: u32,
) -> Result<X2Ball> {
    if root.n_vars() != 2 {
        return Err(Error::precondition(
            "tree exploration is defined for two variables",
        ));
    }
    let field = root.field();
    if field.characteristic() == 0 {
        return Err(Error::precondition(
            "tree exploration enumerates stabilizers over a finite field",
        ));
    }
    let (sorted_root, _) = root.sorted()?;
    let w = sorted_root.weight();
    if !w.coord(2).is_one() || !w.coord(1).is_integer() {
        return Err(Error::precondition(
            "root weight must normalise to integer coordinates (i, 1)",
        ));
    }
    let i0 = w
        .coord(1)
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::precondition("root weight coordinate is too large"))?;

    let probe_sources = [
        "x1", "x2", "x1 + x2", "x1*x2", "x1 + x2^2", "x2 + x1^2", "x1 + x2^3",
    ];
    let mut probes = Vec::new();
    for src in probe_sources {
        probes.push(Polynomial::parse(src, 2, field)?);
    }

    let weight_at = |j: u64| Weight::from_integers(&[j as i64, 1]).expect("positive weight");
    let point_at = |frame: &TameWord, j: u64| -> Result<ValuationPoint> {
        ValuationPoint::new(frame.clone(), &weight_at(j))
    };

    let mut vertices: Vec<(TameWord, Weight)> = Vec::new();
    let mut vertex_points: Vec<ValuationPoint> = Vec::new();
    let mut vertex_sigs: Vec<String> = Vec::new();
    let mut vertex_i: Vec<u64> = Vec::new();
    let mut levels: Vec<usize> = Vec::new();

    let root_frame = sorted_root.frame().clone();
    let root_point = point_at(&root_frame, i0)?;
    vertex_sigs.push(x2_signature(&root_point, &probes, cap)?);
    vertices.push((root_frame.clone(), weight_at(i0)));
    vertex_points.push(root_point);
    vertex_i.push(i0);
    levels.push(0);

    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut edge_midpoints: BTreeMap<(usize, usize), Vec<ValuationPoint>> = BTreeMap::new();
    let mut multi_edges = 0usize;

    let mut queue = std::collections::VecDeque::new();
    queue.push_back(0usize);
    let mut cursor = 0usize;
    while let Some(v) = queue.pop_front() {
        cursor += 1;
        if cursor > 100_000 {
            return Err(Error::SearchBudgetExceeded("tree ball exploration".into()));
        }
        let iv = vertex_i[v];
        let frame_v = vertices[v].0.clone();
        let stab = x2_stabilizer_elements(field, iv, stab_cap)?;
        let mut targets = vec![iv + 1];
        if iv >= 2 {
            targets.push(iv - 1);
        }
        for j in targets {
            // Distinct edges out of `v` toward level j, keyed by the exact
            // class of the edge midpoint.
            let mid_weight =
                Weight::from_integers(&[(2 * iv.min(j) + 1) as i64, 2]).expect("positive weight");
            let mut seen_midpoints: Vec<(String, ValuationPoint, TameWord)> = Vec::new();
            for s in &stab {
                let frame = frame_v.compose(s)?;
                let midpoint = ValuationPoint::new(frame.clone(), &mid_weight)?;
                let sig = x2_signature(&midpoint, &probes, cap)?;
                let mut known = false;
                for (known_sig, known_point, _) in &seen_midpoints {
                    if *known_sig == sig && known_point.equals(&midpoint, cap)? {
                        known = true;
                        break;
                    }
                }
                if !known {
                    seen_midpoints.push((sig, midpoint, frame));
                }
            }
            for (_, midpoint, frame) in seen_midpoints {
                let endpoint = point_at(&frame, j)?;
                let end_sig = x2_signature(&endpoint, &probes, cap)?;
                let mut target = usize::MAX;
                for (u, point) in vertex_points.iter().enumerate() {
                    if vertex_i[u] == j
                        && vertex_sigs[u] == end_sig
                        && point.equals(&endpoint, cap)?
                    {
                        target = u;
                        break;
                    }
                }
                if target == usize::MAX {
                    if levels[v] >= depth {
                        continue;
                    }
                    target = vertices.len();
                    vertices.push((frame.clone(), weight_at(j)));
                    vertex_points.push(endpoint);
                    vertex_sigs.push(end_sig);
                    vertex_i.push(j);
                    levels.push(levels[v] + 1);
                    queue.push_back(target);
                }
                let key = (v.min(target), v.max(target));
                match edge_midpoints.get_mut(&key) {
                    None => {
                        edge_midpoints.insert(key, vec![midpoint]);
                        let length = apartment_distance(&weight_at(iv), &weight_at(j));
                        edges.push((key.0, key.1, length));
                    }
                    Some(known) => {
                        let mut fresh = true;
                        for known_mid in known.iter() {
                            if known_mid.equals(&midpoint, cap)? {
                                fresh = false;
                                break;
                            }
                        }
                        if fresh {
                            known.push(midpoint);
                            multi_edges += 1;
                        }
                    }
                }
            }
        }
    }

    Ok(X2Ball { vertices, levels, edges, multi_edges })
}
