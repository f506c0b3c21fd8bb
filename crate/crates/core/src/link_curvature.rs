//! The link of a valuation for three variables: the metric graph of ray
//! directions at the point, glued across all apartments reachable through a
//! generated group ball.  Vertices are classes of (apartment, ray) pairs and
//! edges are classes of (apartment, sector) pairs; two pairs are identified
//! exactly when their rational sample points carry the same valuation.  Edge
//! lengths are the angles between consecutive rays in the log metric, so
//! every apartment contributes a closed path of total length 2π and the
//! girth of the graph witnesses local CAT(1) behaviour.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::admissible_geometry::{hyperplanes_through, local_cell_samples, AdmissibleInequality};
use crate::error::{Error, Result};
use crate::field_poly::{Field, Monomial, Polynomial, Scalar};
use crate::metric::{chart_tangent, tangent_angle, MetricKind, RayDirection};
use crate::tame_group::{identity_matrix, Generator, TameWord};
use crate::valuation_space::{act, fixes, point_eval, points_equal, ValuationPoint, Weight};

/// Largest group ball enumerated by [`build_link`].
pub const LINK_BALL_LIMIT: usize = 5000;

/// Reduce a rational vector to the smallest integer representative of its
/// projective class (all denominators cleared, common factor removed).
fn canonical_projective(v: &[BigRational]) -> Vec<BigRational> {
    let mut lcm = BigInt::one();
    for c in v {
        lcm = lcm.lcm(c.denom());
    }
    let nums: Vec<BigInt> = v.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let mut gcd = BigInt::zero();
    for n in &nums {
        gcd = gcd.gcd(n);
    }
    if gcd.is_zero() {
        gcd = BigInt::one();
    }
    nums.into_iter()
        .map(|n| BigRational::from(n / &gcd))
        .collect()
}

fn render_projective(v: &[BigRational]) -> String {
    let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// Ideal boundary point reached from `alpha` along the chart direction `u`:
/// the exit point of the ray from the positive cone, canonicalised.
fn ray_endpoint(alpha: &Weight, u: &[BigRational]) -> Vec<BigRational> {
    let mut t_star: Option<BigRational> = None;
    for (ai, ui) in alpha.coords().iter().zip(u) {
        if ui.is_negative() {
            let t = ai / &-ui.clone();
            if t_star.as_ref().map_or(true, |best| t < *best) {
                t_star = Some(t);
            }
        }
    }
    let t = t_star.expect("a sum-zero nonzero direction has a negative coordinate");
    let exit: Vec<BigRational> = alpha
        .coords()
        .iter()
        .zip(u)
        .map(|(ai, ui)| ai + &t * ui)
        .collect();
    canonical_projective(&exit)
}

/// One admissible ray at a weight: its exact chart direction, a certified
/// rational sample weight strictly inside the germ, the hyperplane whose
/// trace it follows, and the ideal boundary point it exits toward.
#[derive(Clone, Debug)]
pub struct LocalRay {
    direction: Vec<BigRational>,
    sample: Weight,
    hyperplane: AdmissibleInequality,
    endpoint: Vec<BigRational>,
}

impl LocalRay {
    pub fn direction(&self) -> &[BigRational] {
        &self.direction
    }

    pub fn sample(&self) -> &Weight {
        &self.sample
    }

    pub fn hyperplane(&self) -> &AdmissibleInequality {
        &self.hyperplane
    }

    /// Smallest integer representative of the ideal point the ray exits
    /// toward.
    pub fn endpoint(&self) -> &[BigRational] {
        &self.endpoint
    }
}

/// The admissible directions at a weight with three coordinates, in circular
/// order: one ray for each side of each admissible hyperplane through the
/// weight.  A weight of multiplicity zero has no distinguished directions
/// and yields an empty list (its link is a plain circle).
pub fn local_rays(alpha: &Weight) -> Result<Vec<LocalRay>> {
    if alpha.n() != 3 {
        return Err(Error::precondition(
            "ray enumeration is defined for weights with three coordinates",
        ));
    }
    let cells = local_cell_samples(alpha)?;
    let through = hyperplanes_through(alpha)?;
    let mut rays = Vec::new();
    for (dir, sample) in cells.ray_directions().iter().zip(cells.rays()) {
        let mut owner = None;
        for ineq in &through {
            let mut normal: Vec<BigRational> = ineq
                .coefficients()
                .iter()
                .map(|&m| -BigRational::from(BigInt::from(m)))
                .collect();
            normal[ineq.index() - 1] += BigRational::one();
            let pairing: BigRational = normal.iter().zip(dir).map(|(n, d)| n * d).sum();
            if pairing.is_zero() {
                owner = Some(ineq.clone());
                break;
            }
        }
        let hyperplane = owner.expect("every arrangement ray follows one of its hyperplanes");
        rays.push(LocalRay {
            direction: dir.clone(),
            sample: sample.clone(),
            hyperplane,
            endpoint: ray_endpoint(alpha, dir),
        });
    }
    Ok(rays)
}

/// A vertex of the link: a class of (apartment, ray) pairs, represented by
/// the valuation at a certified sample weight on the ray.
#[derive(Clone, Debug)]
pub struct LinkVertex {
    sample: ValuationPoint,
    endpoint: Vec<BigRational>,
}

impl LinkVertex {
    pub fn sample(&self) -> &ValuationPoint {
        &self.sample
    }

    /// Ideal endpoint of the ray in the representative's chart.
    pub fn endpoint(&self) -> &[BigRational] {
        &self.endpoint
    }
}

/// An edge of the link: a class of (apartment, sector) pairs between two
/// consecutive rays, with the log angle between them as its length.
#[derive(Clone, Debug)]
pub struct LinkEdge {
    a: usize,
    b: usize,
    length: f64,
    sample: ValuationPoint,
}

impl LinkEdge {
    pub fn ends(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn sample(&self) -> &ValuationPoint {
        &self.sample
    }
}

/// The trace of one apartment in the link: its rays and sectors as vertex
/// and edge ids, in circular order, with the ideal endpoints of the rays in
/// this apartment's own chart.  At weights `(p, p, *)` the two rays along
/// the tied hyperplane are tagged: the apex points toward `[1,1,0]` and the
/// base toward the barycenter (exiting at `[0,0,1]`).
#[derive(Clone, Debug)]
pub struct ApartmentTrace {
    frame: TameWord,
    ray_vertices: Vec<usize>,
    ray_endpoints: Vec<Vec<BigRational>>,
    sector_edges: Vec<usize>,
    apex_vertex: Option<usize>,
    base_vertex: Option<usize>,
}

impl ApartmentTrace {
    pub fn frame(&self) -> &TameWord {
        &self.frame
    }

    pub fn ray_vertices(&self) -> &[usize] {
        &self.ray_vertices
    }

    pub fn ray_endpoints(&self) -> &[Vec<BigRational>] {
        &self.ray_endpoints
    }

    pub fn sector_edges(&self) -> &[usize] {
        &self.sector_edges
    }

    pub fn apex_vertex(&self) -> Option<usize> {
        self.apex_vertex
    }

    pub fn base_vertex(&self) -> Option<usize> {
        self.base_vertex
    }
}

/// The link graph of a valuation: direction classes and sector classes over
/// every apartment in the generated ball, with exact gluing.
#[derive(Clone, Debug)]
pub struct LinkGraph {
    alpha: Weight,
    vertices: Vec<LinkVertex>,
    edges: Vec<LinkEdge>,
    apartments: Vec<ApartmentTrace>,
}

/// Result of the CAT(1) girth test on a link graph.
#[derive(Clone, Debug)]
pub struct Cat1Report {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub metric_girth: f64,
    pub satisfied: bool,
}

impl fmt::Display for Cat1Report {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            out,
            "link with {} vertices, {} edges; metric girth {}",
            self.vertex_count, self.edge_count, self.metric_girth
        )?;
        if self.satisfied {
            write!(out, "girth >= 2*pi: no short embedded cycle in the generated ball")
        } else {
            write!(out, "girth < 2*pi: a short embedded cycle exists")
        }
    }
}

fn link_probes(field: crate::field_poly::Field) -> Result<Vec<Polynomial>> {
    let sources = [
        "x1",
        "x2",
        "x3",
        "x1 + x2",
        "x1 + x3",
        "x2 + x3",
        "x1 + x2 + x3",
        "x1 + x2^2",
        "x2 + x3^2",
        "x1 + x3^2",
        "x1*x2 + x3^2",
        "x1*x3 + x2^2",
        "x2*x3 + x1^2",
    ];
    sources
        .iter()
        .map(|src| Polynomial::parse(src, 3, field))
        .collect()
}

fn sample_signature(point: &ValuationPoint, probes: &[Polynomial], cap: u32) -> Result<String> {
    let mut parts = Vec::with_capacity(probes.len());
    for p in probes {
        parts.push(point_eval(point, p, cap)?.to_string());
    }
    Ok(parts.join("|"))
}

fn word_key(word: &TameWord, cap: u32) -> Result<String> {
    Ok(word
        .components(cap)?
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(";"))
}

/// Class lookup table: exact signatures bucket the candidates, and the
/// final decision within a bucket is the exact point-equality test against
/// each class representative.
struct ClassIndex {
    buckets: BTreeMap<String, Vec<usize>>,
}

impl ClassIndex {
    fn new() -> ClassIndex {
        ClassIndex { buckets: BTreeMap::new() }
    }

    fn find(
        &self,
        sig: &str,
        point: &ValuationPoint,
        reps: &[ValuationPoint],
        cap: u32,
    ) -> Result<Option<usize>> {
        if let Some(ids) = self.buckets.get(sig) {
            for &id in ids {
                if reps[id].equals(point, cap)? {
                    return Ok(Some(id));
                }
            }
        }
        Ok(None)
    }

    fn insert(&mut self, sig: String, id: usize) {
        self.buckets.entry(sig).or_default().push(id);
    }
}

/// Build the link graph of `nu` from the ball of radius `radius` in the
/// group generated by `generators` (all of which must fix `nu`).  Each group
/// element contributes the trace of its apartment: rays and sectors glued to
/// the existing graph exactly where the valuations at the certified sample
/// weights coincide.
pub fn build_link(
    nu: &ValuationPoint,
    generators: &[TameWord],
    radius: usize,
    cap: u32,
) -> Result<LinkGraph> {
    if nu.n_vars() != 3 {
        return Err(Error::precondition(
            "links are built for valuations in three variables",
        ));
    }
    let field = nu.field();
    for g in generators {
        if g.n_vars() != 3 {
            return Err(Error::DimensionMismatch(g.n_vars(), 3));
        }
        let moved = act(g, nu)?;
        if !points_equal(&moved, nu, cap)? {
            return Err(Error::precondition(
                "every generator must fix the valuation the link is built at",
            ));
        }
    }

    let (sorted_nu, _) = nu.sorted()?;
    let alpha = sorted_nu.weight().clone();
    let base_frame = sorted_nu.frame().clone();
    let cells = local_cell_samples(&alpha)?;
    let r = cells.rays().len();
    if r == 0 {
        return Err(Error::precondition(
            "no admissible direction at this weight: the link is a circle without vertices",
        ));
    }
    let dirs = cells.ray_directions();
    let sector_lengths: Vec<f64> = (0..r)
        .map(|k| tangent_angle(&alpha, &dirs[k], &dirs[(k + 1) % r], MetricKind::Log))
        .collect();
    let endpoints: Vec<Vec<BigRational>> =
        dirs.iter().map(|d| ray_endpoint(&alpha, d)).collect();
    let tagged = alpha.coord(1) == alpha.coord(2);
    let apex_endpoint = canonical_projective(&[
        BigRational::one(),
        BigRational::one(),
        BigRational::zero(),
    ]);
    let base_endpoint = canonical_projective(&[
        BigRational::zero(),
        BigRational::zero(),
        BigRational::one(),
    ]);

    // Ball of the generated group.
    let identity = TameWord::identity(3, field);
    let mut pool: Vec<TameWord> = Vec::new();
    for g in generators {
        pool.push(g.clone());
        pool.push(g.invert()?);
    }
    let mut ball = vec![identity.clone()];
    let mut seen = BTreeSet::new();
    seen.insert(word_key(&identity, cap)?);
    let mut frontier = vec![identity];
    for _ in 0..radius {
        let mut next = Vec::new();
        for h in &frontier {
            for g in &pool {
                let hg = h.compose(g)?;
                if seen.insert(word_key(&hg, cap)?) {
                    ball.push(hg.clone());
                    next.push(hg);
                }
                if ball.len() > LINK_BALL_LIMIT {
                    return Err(Error::SearchBudgetExceeded(format!(
                        "group ball exceeds {LINK_BALL_LIMIT} elements"
                    )));
                }
            }
        }
        frontier = next;
    }

    let probes = link_probes(field)?;
    let mut vertices: Vec<LinkVertex> = Vec::new();
    let mut vertex_points: Vec<ValuationPoint> = Vec::new();
    let mut vertex_index = ClassIndex::new();
    let mut edges: Vec<LinkEdge> = Vec::new();
    let mut edge_points: Vec<ValuationPoint> = Vec::new();
    let mut edge_index = ClassIndex::new();
    let mut apartments = Vec::new();

    for h in &ball {
        let frame = h.compose(&base_frame)?;
        let mut ray_vertices = Vec::with_capacity(r);
        for k in 0..r {
            let point = ValuationPoint::new(frame.clone(), &cells.rays()[k])?;
            let sig = sample_signature(&point, &probes, cap)?;
            let id = match vertex_index.find(&sig, &point, &vertex_points, cap)? {
                Some(id) => id,
                None => {
                    let id = vertices.len();
                    vertices.push(LinkVertex {
                        sample: point.clone(),
                        endpoint: endpoints[k].clone(),
                    });
                    vertex_points.push(point);
                    vertex_index.insert(sig, id);
                    id
                }
            };
            ray_vertices.push(id);
        }
        let mut sector_edges = Vec::with_capacity(r);
        for k in 0..r {
            let point = ValuationPoint::new(frame.clone(), &cells.sectors()[k])?;
            let sig = sample_signature(&point, &probes, cap)?;
            let ends = (ray_vertices[k], ray_vertices[(k + 1) % r]);
            let id = match edge_index.find(&sig, &point, &edge_points, cap)? {
                Some(id) => {
                    let known = (edges[id].a, edges[id].b);
                    if known != ends && known != (ends.1, ends.0) {
                        return Err(Error::precondition(
                            "internal gluing inconsistency: a shared sector has mismatched boundary rays",
                        ));
                    }
                    id
                }
                None => {
                    let id = edges.len();
                    edges.push(LinkEdge {
                        a: ends.0,
                        b: ends.1,
                        length: sector_lengths[k],
                        sample: point.clone(),
                    });
                    edge_points.push(point);
                    edge_index.insert(sig, id);
                    id
                }
            };
            sector_edges.push(id);
        }
        let mut apex_vertex = None;
        let mut base_vertex = None;
        if tagged {
            for (k, endpoint) in endpoints.iter().enumerate() {
                if *endpoint == apex_endpoint {
                    apex_vertex = Some(ray_vertices[k]);
                }
                if *endpoint == base_endpoint {
                    base_vertex = Some(ray_vertices[k]);
                }
            }
        }
        apartments.push(ApartmentTrace {
            frame,
            ray_vertices,
            ray_endpoints: endpoints.clone(),
            sector_edges,
            apex_vertex,
            base_vertex,
        });
    }

    Ok(LinkGraph { alpha, vertices, edges, apartments })
}

impl LinkGraph {
    pub fn weight(&self) -> &Weight {
        &self.alpha
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[LinkVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[LinkEdge] {
        &self.edges
    }

    pub fn apartments(&self) -> &[ApartmentTrace] {
        &self.apartments
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.vertices.len()];
        for (ei, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, ei));
            adj[e.b].push((e.a, ei));
        }
        adj
    }

    /// Shortest path between the ends of `skip`, not using that edge;
    /// `unit` measures in edge counts instead of metric lengths.
    fn detour(&self, skip: usize, unit: bool, adj: &[Vec<(usize, usize)>]) -> f64 {
        let (src, dst) = (self.edges[skip].a, self.edges[skip].b);
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[src] = 0.0;
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
            if best == dst {
                break;
            }
            for &(next, ei) in &adj[best] {
                if ei == skip {
                    continue;
                }
                let w = if unit { 1.0 } else { self.edges[ei].length };
                if best_d + w < dist[next] {
                    dist[next] = best_d + w;
                }
            }
        }
        dist[dst]
    }

    /// Length of the shortest embedded cycle, scanning the detour around
    /// every edge; infinite for a forest.
    pub fn metric_girth(&self) -> f64 {
        let adj = self.adjacency();
        let mut best = f64::INFINITY;
        for ei in 0..self.edges.len() {
            let detour = self.detour(ei, false, &adj);
            if detour + self.edges[ei].length < best {
                best = detour + self.edges[ei].length;
            }
        }
        best
    }

    /// Edge count of the shortest embedded cycle, if any.
    pub fn combinatorial_girth(&self) -> Option<usize> {
        let adj = self.adjacency();
        let mut best = f64::INFINITY;
        for ei in 0..self.edges.len() {
            let detour = self.detour(ei, true, &adj);
            if detour + 1.0 < best {
                best = detour + 1.0;
            }
        }
        if best.is_finite() {
            Some(best.round() as usize)
        } else {
            None
        }
    }

    /// Combinatorial diameter (unit edges); `None` when the graph is empty
    /// or disconnected.
    pub fn diameter(&self) -> Option<usize> {
        if self.vertices.is_empty() {
            return None;
        }
        let adj = self.adjacency();
        let mut diameter = 0usize;
        for start in 0..self.vertices.len() {
            let mut dist = vec![usize::MAX; self.vertices.len()];
            dist[start] = 0;
            let mut queue = VecDeque::new();
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &(next, _) in &adj[v] {
                    if dist[next] == usize::MAX {
                        dist[next] = dist[v] + 1;
                        queue.push_back(next);
                    }
                }
            }
            for &d in &dist {
                if d == usize::MAX {
                    return None;
                }
                diameter = diameter.max(d);
            }
        }
        Some(diameter)
    }

    /// Girth test against the CAT(1) threshold 2π, scoped to the generated
    /// subgraph.
    pub fn check_cat1(&self, tolerance: f64) -> Cat1Report {
        let girth = self.metric_girth();
        Cat1Report {
            vertex_count: self.vertices.len(),
            edge_count: self.edges.len(),
            metric_girth: girth,
            satisfied: girth >= 2.0 * std::f64::consts::PI - tolerance,
        }
    }

    /// DOT rendering with ideal-endpoint labels and edge lengths.
    pub fn dot(&self) -> String {
        let mut out = String::from("graph link {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            out.push_str(&format!(
                "  v{} [label=\"{}\"];\n",
                i,
                render_projective(&v.endpoint)
            ));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -- v{} [label=\"{:.6}\"];\n",
                e.a, e.b, e.length
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// The four arcs of the apartment cycle at weight `(pq, p, 1)` built from
/// the commuting shears `x1 + x2^q` and `x1 + x3^(pq)`, in both metrics,
/// with the exact gluing and separation certificates.
#[derive(Clone, Debug)]
pub struct OctangleReport {
    pub log_arcs: [f64; 4],
    pub simplex_arcs: [f64; 4],
    pub log_total: f64,
    pub simplex_total: f64,
    pub commutation_verified: bool,
    pub gluing_verified: bool,
    pub corners_distinct: bool,
}

/// Every invertible affine map of three variables over the field with two
/// elements, as one-generator words (1344 = 168·8 maps: the general linear
/// group of the 7-point projective plane extended by translations).  A
/// ready-made generator catalog for [`build_link`] at weight `(1,1,1)`.
pub fn affine_words_f2() -> Vec<TameWord> {
    let field = Field::prime(2).unwrap();
    let elems = [field.zero(), field.one()];
    let mut out = Vec::new();
    let mut counters = [0usize; 9];
    loop {
        let matrix: Vec<Vec<Scalar>> = (0..3)
            .map(|r| (0..3).map(|c| elems[counters[3 * r + c]].clone()).collect())
            .collect();
        for t1 in &elems {
            for t2 in &elems {
                for t3 in &elems {
                    if let Ok(gen) =
                        Generator::affine(matrix.clone(), vec![t1.clone(), t2.clone(), t3.clone()])
                    {
                        out.push(TameWord::new(3, field, vec![gen]).unwrap());
                    }
                }
            }
        }
        let mut i = 0;
        loop {
            if i == 9 {
                return out;
            }
            if counters[i] == 0 {
                counters[i] = 1;
                break;
            }
            counters[i] = 0;
            i += 1;
        }
    }
}

/// The full stabilizer of the valuation at weight `(p, p, 1)` over the field
/// with two elements, enumerated as words: shears of the first two variables
/// by polynomials in the third of degree at most `p`, the constant shear of
/// the third variable, and an invertible linear block on the first two
/// variables — `6·2^(2p+3)` words in total.  A ready-made generator catalog
/// for [`build_link`] at that weight.
pub fn shear_stabilizer_f2(p: u32) -> Result<Vec<TameWord>> {
    if p == 0 || p > 8 {
        return Err(Error::precondition(
            "the shear catalog is enumerated for 1 <= p <= 8 (it has 6*2^(2p+3) elements)",
        ));
    }
    let field = Field::prime(2).unwrap();
    let elems = [field.zero(), field.one()];
    // All polynomials in the third variable of degree <= p.
    let mut tails = vec![Polynomial::zero(3, field)];
    for mask in 1..(1u64 << (p + 1)) {
        let mut poly = Polynomial::zero(3, field);
        for k in 0..=p {
            if mask & (1 << k) != 0 {
                let mono = Monomial::new(vec![0, 0, k]);
                poly = poly.add(&Polynomial::term(mono, field.one()))?;
            }
        }
        tails.push(poly);
    }
    // The six invertible 2x2 blocks over the field with two elements.
    let mut blocks = Vec::new();
    for a in &elems {
        for b in &elems {
            for c in &elems {
                for d in &elems {
                    let mut matrix = identity_matrix(3, field);
                    matrix[0][0] = a.clone();
                    matrix[0][1] = b.clone();
                    matrix[1][0] = c.clone();
                    matrix[1][1] = d.clone();
                    if let Ok(gen) = Generator::affine(matrix, vec![field.zero(); 3]) {
                        blocks.push(gen);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for p1 in &tails {
        for p2 in &tails {
            for c in &elems {
                for block in &blocks {
                    let mut gens = Vec::new();
                    if !p1.is_zero() {
                        gens.push(Generator::elementary(1, p1.clone())?);
                    }
                    if !p2.is_zero() {
                        gens.push(Generator::elementary(2, p2.clone())?);
                    }
                    if !c.is_zero() {
                        let constant = Polynomial::parse("1", 3, field)?;
                        gens.push(Generator::elementary(3, constant)?);
                    }
                    gens.push(block.clone());
                    out.push(TameWord::new(3, field, gens)?);
                }
            }
        }
    }
    Ok(out)
}

/// Build the closed four-arc path through the apartments of `id`, `g`,
/// `g∘f`, `f` at weight `(pq, p, 1)`, where `f = (x1 + x2^q, x2, x3)` and
/// `g = (x1 + x3^(pq), x2, x3)`.  Each arc joins the ray toward `[0,0,1]`
/// to the ray toward `[0,1,0]` inside one apartment.
pub fn example_angles_cycle(p: u32, q: u32, cap: u32) -> Result<OctangleReport> {
    if p == 0 || q == 0 {
        return Err(Error::precondition("both cycle parameters must be positive"));
    }
    let field = crate::field_poly::Field::Rational;
    let m = i64::from(p) * i64::from(q);
    let f = TameWord::parse(&format!("elem 1 \"x2^{q}\""), 3, field)?;
    let g = TameWord::parse(&format!("elem 1 \"x3^{m}\""), 3, field)?;
    let commutation_verified = f.compose(&g)?.same_map(&g.compose(&f)?, cap)?;

    let alpha = Weight::from_integers(&[m, i64::from(p), 1])?;
    let toward = |k: usize| -> RayDirection {
        let mut coords = vec![BigRational::zero(); 3];
        coords[k - 1] = BigRational::one();
        RayDirection::Ideal { toward: coords }
    };
    let u3 = chart_tangent(&alpha, &toward(3))?;
    let u2 = chart_tangent(&alpha, &toward(2))?;
    let theta_log = tangent_angle(&alpha, &u3, &u2, MetricKind::Log);
    let theta_simplex = tangent_angle(&alpha, &u3, &u2, MetricKind::Simplex);

    // Rational sample weights strictly inside the two rays.
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let sample = |u: &[BigRational]| -> Result<Weight> {
        let coords: Vec<BigRational> = alpha
            .coords()
            .iter()
            .zip(u)
            .map(|(a, ui)| a + &quarter * ui)
            .collect();
        Weight::new(coords)
    };
    let w3 = sample(&u3)?;
    let w2 = sample(&u2)?;

    // The cycle corners: (id, w3), (id, w2) = (g, w2), (g, w3) = (g∘f, w3),
    // (g∘f, w2) = (f, w2), and back to (f, w3) = (id, w3).
    let id = TameWord::identity(3, field);
    let gf = g.compose(&f)?;
    let corner = |frame: &TameWord, w: &Weight| ValuationPoint::new(frame.clone(), w);
    let v0 = corner(&id, &w3)?;
    let v1 = corner(&id, &w2)?;
    let v2 = corner(&g, &w3)?;
    let v3 = corner(&f, &w2)?;

    let mut gluing_verified = fixes(&f, &w3, cap)? && fixes(&g, &w2, cap)?;
    gluing_verified &= points_equal(&v1, &corner(&g, &w2)?, cap)?;
    gluing_verified &= points_equal(&v2, &corner(&gf, &w3)?, cap)?;
    gluing_verified &= points_equal(&corner(&gf, &w2)?, &v3, cap)?;
    gluing_verified &= points_equal(&corner(&f, &w3)?, &v0, cap)?;

    let corners = [&v0, &v1, &v2, &v3];
    let mut corners_distinct = true;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if points_equal(corners[i], corners[j], cap)? {
                corners_distinct = false;
            }
        }
    }

    let log_arcs = [theta_log; 4];
    let simplex_arcs = [theta_simplex; 4];
    Ok(OctangleReport {
        log_arcs,
        simplex_arcs,
        log_total: theta_log * 4.0,
        simplex_total: theta_simplex * 4.0,
        commutation_verified,
        gluing_verified,
        corners_distinct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::{sector, SectorDescriptor};

    const CAP: u32 = 512;

    fn weight(coords: &[i64]) -> Weight {
        Weight::from_integers(coords).unwrap()
    }

    fn monomial_point(field: Field, coords: &[i64]) -> ValuationPoint {
        ValuationPoint::new(TameWord::identity(coords.len(), field), &weight(coords)).unwrap()
    }

    fn endpoint_set(rays: &[LocalRay]) -> BTreeSet<String> {
        rays.iter().map(|r| render_projective(r.endpoint())).collect()
    }

    #[test]
    fn ray_enumeration_examples() {
        // Three admissible lines through (3,2,1) give six rays with the
        // expected ideal endpoints.
        let rays = local_rays(&weight(&[3, 2, 1])).unwrap();
        assert_eq!(rays.len(), 6);
        let expect: BTreeSet<String> = ["[3,0,1]", "[0,1,0]", "[1,0,1]", "[1,1,0]", "[1,0,0]", "[0,2,1]"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(endpoint_set(&rays), expect);
        // Each ray lies on the hyperplane it reports and its sample does too.
        for ray in &rays {
            assert!(ray.hyperplane().on_hyperplane(ray.sample()));
        }
        // Circular order: consecutive angles are positive and sum to 2π.
        let alpha = weight(&[3, 2, 1]);
        let mut total = 0.0;
        for k in 0..rays.len() {
            let a = rays[k].direction();
            let b = rays[(k + 1) % rays.len()].direction();
            let theta = tangent_angle(&alpha, a, b, MetricKind::Log);
            assert!(theta > 0.01);
            total += theta;
        }
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-9);

        // A multiplicity-zero weight has no distinguished directions.
        assert!(local_rays(&weight(&[7, 5, 3])).unwrap().is_empty());

        // At (2,2,1) the three lines are principal: all sectors are π/3.
        let rays221 = local_rays(&weight(&[2, 2, 1])).unwrap();
        assert_eq!(rays221.len(), 6);
        let alpha221 = weight(&[2, 2, 1]);
        for k in 0..6 {
            let theta = tangent_angle(
                &alpha221,
                rays221[k].direction(),
                rays221[(k + 1) % 6].direction(),
                MetricKind::Log,
            );
            assert!((theta - std::f64::consts::PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_generators_give_one_hexagon() {
        let nu = monomial_point(Field::Rational, &[2, 2, 1]);
        let link = build_link(&nu, &[], 0, CAP).unwrap();
        assert_eq!(link.vertex_count(), 6);
        assert_eq!(link.edge_count(), 6);
        assert_eq!(link.apartments().len(), 1);
        for e in link.edges() {
            assert!((e.length() - std::f64::consts::PI / 3.0).abs() < 1e-12);
        }
        let total: f64 = link.edges().iter().map(LinkEdge::length).sum();
        assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        assert!((link.metric_girth() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(link.combinatorial_girth(), Some(6));
        assert!(link.check_cat1(1e-9).satisfied);
        // Apex and base tags point along the tied hyperplane.
        let trace = &link.apartments()[0];
        assert!(trace.apex_vertex().is_some());
        assert!(trace.base_vertex().is_some());
        assert_ne!(trace.apex_vertex(), trace.base_vertex());
    }

    #[test]
    fn projective_plane_link_over_f2() {
        let field = Field::prime(2).unwrap();
        let group = affine_words_f2();
        assert_eq!(group.len(), 168 * 8);
        let nu = monomial_point(field, &[1, 1, 1]);
        let link = build_link(&nu, &group, 1, CAP).unwrap();
        assert_eq!(link.vertex_count(), 14);
        assert_eq!(link.edge_count(), 21);
        assert_eq!(link.combinatorial_girth(), Some(6));
        assert!((link.metric_girth() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(link.diameter(), Some(3));
        for e in link.edges() {
            assert!((e.length() - std::f64::consts::PI / 3.0).abs() < 1e-12);
        }
        assert!(link.check_cat1(1e-9).satisfied);
        // Every vertex class of the incidence graph has degree 3.
        let mut degree = vec![0usize; link.vertex_count()];
        for e in link.edges() {
            degree[e.ends().0] += 1;
            degree[e.ends().1] += 1;
        }
        assert!(degree.iter().all(|&d| d == 3));
    }

    fn hexagon_edge_sets(link: &LinkGraph) -> Vec<(BTreeSet<usize>, BTreeSet<usize>, usize, usize)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for trace in link.apartments() {
            let edges: BTreeSet<usize> = trace.sector_edges().iter().copied().collect();
            if seen.insert(edges.clone()) {
                let vertices: BTreeSet<usize> = trace.ray_vertices().iter().copied().collect();
                out.push((
                    edges,
                    vertices,
                    trace.apex_vertex().unwrap(),
                    trace.base_vertex().unwrap(),
                ));
            }
        }
        out
    }

    #[test]
    fn branching_structure_at_p_p_one() {
        let field = Field::prime(2).unwrap();
        let group = shear_stabilizer_f2(2).unwrap();
        assert_eq!(group.len(), 128 * 6);
        let nu = monomial_point(field, &[2, 2, 1]);
        let link = build_link(&nu, &group, 1, CAP).unwrap();

        // Every embedded cycle in the generated ball has at least 6 edges.
        let girth = link.combinatorial_girth().unwrap();
        assert!(girth >= 6, "combinatorial girth {girth}");
        assert!(link.check_cat1(1e-9).satisfied);

        let hexagons = hexagon_edge_sets(&link);
        assert!(hexagons.len() > 1);

        // All apartments share one apex direction: the fiber over the
        // outward end of the sorted cone is a singleton.
        let apex = hexagons[0].2;
        for (_, _, q, _) in &hexagons {
            assert_eq!(*q, apex);
        }

        // Pairwise: hexagon intersections are a connected path of at most
        // three edges, or exactly the apex/base pair.
        for i in 0..hexagons.len() {
            for j in (i + 1)..hexagons.len() {
                let (e1, v1, _, s1) = &hexagons[i];
                let (e2, v2, _, s2) = &hexagons[j];
                let shared_edges: BTreeSet<usize> = e1.intersection(e2).copied().collect();
                let shared_vertices: BTreeSet<usize> = v1.intersection(v2).copied().collect();
                if shared_edges.is_empty() {
                    // No common sector: only the apex, possibly with a
                    // common base vertex.
                    assert!(shared_vertices.len() <= 2);
                    assert!(shared_vertices.contains(&apex));
                    if shared_vertices.len() == 2 {
                        assert_eq!(s1, s2);
                        assert!(shared_vertices.contains(s1));
                    }
                } else {
                    assert!(shared_edges.len() <= 3);
                    // The shared edges form a connected path: vertex count
                    // exceeds edge count by one.
                    let mut path_vertices = BTreeSet::new();
                    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
                    for &ei in &shared_edges {
                        let (a, b) = link.edges()[ei].ends();
                        path_vertices.insert(a);
                        path_vertices.insert(b);
                        *degree.entry(a).or_default() += 1;
                        *degree.entry(b).or_default() += 1;
                    }
                    assert_eq!(path_vertices.len(), shared_edges.len() + 1);
                    assert!(degree.values().all(|&d| d <= 2));
                }
            }
        }

        // Each apartment contributes a closed path of total length 2π.
        for trace in link.apartments().iter().take(20) {
            let total: f64 = trace
                .sector_edges()
                .iter()
                .map(|&ei| link.edges()[ei].length())
                .sum();
            assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        }
    }

    #[test]
    fn shared_sectors_match_the_algebraic_descriptor() {
        let field = Field::Rational;
        let nu = monomial_point(field, &[3, 2, 1]);
        let id = TameWord::identity(3, field);

        // Middle-cone case: the shear by 2*x2*x3 shares the closed
        // half-plane a1 >= a2 + a3 — four rays and three sectors.
        let h = TameWord::parse("elem 1 \"2*x2*x3\"", 3, field).unwrap();
        let descriptor = sector(&id, &h, &nu, CAP).unwrap();
        let (lo, hi) = match &descriptor {
            SectorDescriptor::Cone { a, b, ends } => {
                assert_eq!((*a, *b), (1, 1));
                (ends[0].clone(), ends[1].clone())
            }
            other => panic!("expected a cone descriptor, got {other}"),
        };
        let link = build_link(&nu, &[h.clone()], 1, CAP).unwrap();
        assert_eq!(link.apartments().len(), 3); // id, h, h⁻¹ — h and h⁻¹ glue identically
        let t_id = &link.apartments()[0];
        let t_h = &link.apartments()[1];
        let shared_rays: Vec<usize> = (0..6)
            .filter(|&k| t_h.ray_vertices().contains(&t_id.ray_vertices()[k]))
            .collect();
        let shared_edges: Vec<usize> = (0..6)
            .filter(|&k| t_h.sector_edges().contains(&t_id.sector_edges()[k]))
            .collect();
        assert_eq!(shared_rays.len(), 4);
        assert_eq!(shared_edges.len(), 3);
        // The shared rays are exactly those on the closed fixed side, and
        // the descriptor's ends are the two boundary rays of the shared arc.
        let ineq = AdmissibleInequality::new(1, vec![0, 1, 1]).unwrap();
        let mut boundary_endpoints = BTreeSet::new();
        for k in 0..6 {
            let sample = &local_rays(link.weight()).unwrap()[k];
            let fixed_side = ineq.holds_at(sample.sample());
            assert_eq!(shared_rays.contains(&k), fixed_side, "ray {k}");
            if fixed_side && ineq.on_hyperplane(sample.sample()) {
                boundary_endpoints.insert(render_projective(sample.endpoint()));
            }
        }
        let descriptor_ends: BTreeSet<String> = [lo, hi]
            .iter()
            .map(|e| render_projective(&canonical_projective(e)))
            .collect();
        assert_eq!(boundary_endpoints, descriptor_ends);

        // Half-space case: the shear of x2 by x3^2 shares the closed side
        // a2 >= 2*a3, whose boundary rays exit at [0,2,1] and [1,0,0].
        let h2 = TameWord::parse("elem 2 \"x3^2\"", 3, field).unwrap();
        let descriptor2 = sector(&id, &h2, &nu, CAP).unwrap();
        let ends2 = match &descriptor2 {
            SectorDescriptor::HalfSpace { ends, .. } => ends.clone(),
            other => panic!("expected a half-space descriptor, got {other}"),
        };
        let link2 = build_link(&nu, &[h2.clone()], 1, CAP).unwrap();
        let t2_id = &link2.apartments()[0];
        let t2_h = &link2.apartments()[1];
        let ineq2 = AdmissibleInequality::new(2, vec![0, 0, 2]).unwrap();
        let rays = local_rays(link2.weight()).unwrap();
        let mut boundary2 = BTreeSet::new();
        for k in 0..6 {
            let shared = t2_h.ray_vertices().contains(&t2_id.ray_vertices()[k]);
            assert_eq!(shared, ineq2.holds_at(rays[k].sample()), "ray {k}");
            if shared && ineq2.on_hyperplane(rays[k].sample()) {
                boundary2.insert(render_projective(rays[k].endpoint()));
            }
        }
        let ends2_set: BTreeSet<String> = ends2
            .iter()
            .map(|e| render_projective(&canonical_projective(e)))
            .collect();
        assert_eq!(boundary2, ends2_set);
    }

    #[test]
    fn rejects_generators_that_move_the_valuation() {
        let field = Field::Rational;
        let nu = monomial_point(field, &[3, 2, 1]);
        let mover = TameWord::parse("elem 1 \"x3^4\"", 3, field).unwrap();
        assert!(build_link(&nu, &[mover], 1, CAP).is_err());
    }

    #[test]
    fn octangle_cycle_lengths() {
        for p in 1..=3u32 {
            for q in 1..=3u32 {
                let report = example_angles_cycle(p, q, CAP).unwrap();
                assert!(report.commutation_verified);
                assert!(report.gluing_verified, "gluing at p={p} q={q}");
                assert!(
                    (report.log_total - 8.0 * std::f64::consts::PI / 3.0).abs() < 1e-9,
                    "log total at p={p} q={q}: {}",
                    report.log_total
                );
                for arc in report.log_arcs {
                    assert!((arc - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-9);
                }
                if q >= 3 {
                    assert!(
                        report.simplex_total < 2.0 * std::f64::consts::PI,
                        "simplex total at p={p} q={q}: {}",
                        report.simplex_total
                    );
                }
                if p >= 2 && q >= 2 {
                    assert!(report.corners_distinct, "corners at p={p} q={q}");
                }
            }
        }
        // The flat-chart arcs shrink toward π/3 as q grows.
        let arc = |q: u32| example_angles_cycle(1, q, CAP).unwrap().simplex_arcs[0];
        assert!(arc(2) > arc(3));
        assert!(arc(3) > arc(4));
        assert!(arc(12) > std::f64::consts::PI / 3.0);
        assert!(arc(12) - std::f64::consts::PI / 3.0 < 0.2);
    }
}
