//! Reading words, groups, weights, and ray directions from files and
//! command-line strings.

use std::path::Path;

use num_rational::BigRational;

use tamespace::{
    AdmissibleInequality, Error, Field, RayDirection, Result, Scalar, TameWord, ValuationPoint,
    Weight,
};

/// Read a file, mapping I/O failure to a precondition error naming the path.
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|err| Error::precondition(format!("cannot read {}: {err}", path.display())))
}

/// Load one word from a file in the line-oriented generator format
/// (first line outermost; blank lines and `#` comments ignored).
pub fn load_word(path: &Path, n: usize, field: Field) -> Result<TameWord> {
    TameWord::parse(&read_file(path)?, n, field)
}

/// Load a list of words from a file: word blocks separated by blank lines.
/// Blocks containing only comments are skipped.
pub fn load_words(path: &Path, n: usize, field: Field) -> Result<Vec<TameWord>> {
    let text = read_file(path)?;
    let mut words = Vec::new();
    for block in text.split("\n\n") {
        let meaningful = block
            .lines()
            .any(|l| !l.trim().is_empty() && !l.trim().starts_with('#'));
        if meaningful {
            words.push(TameWord::parse(block, n, field)?);
        }
    }
    if words.is_empty() {
        return Err(Error::precondition(format!(
            "{} contains no words (blocks are separated by blank lines)",
            path.display()
        )));
    }
    Ok(words)
}

/// Parse a weight given as comma-separated positive rationals (`3,2,1`);
/// its length determines the number of variables.
pub fn parse_weight(src: &str) -> Result<Weight> {
    let n = src.split(',').count();
    Weight::parse(src, n)
}

/// Parse a comma-separated list of rationals, zeros allowed (projective
/// boundary points like `0,0,1`).
pub fn parse_rationals(src: &str) -> Result<Vec<BigRational>> {
    let mut out = Vec::new();
    for (idx, token) in src.split(',').enumerate() {
        let q: BigRational = token.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            column: idx + 1,
            message: format!("expected a rational number, got `{token}`"),
        })?;
        out.push(q);
    }
    Ok(out)
}

/// Parse a hyperplane spec `i:m1,m2,…` (the inequality `a_i >= Σ m_j a_j`).
pub fn parse_hyperplane(src: &str) -> Result<AdmissibleInequality> {
    let mut parts = src.splitn(2, ':');
    let index_part = parts.next().unwrap_or("");
    let coeff_part = parts.next().ok_or_else(|| {
        Error::precondition(format!("hyperplane spec must look like `1:0,2,1`, got `{src}`"))
    })?;
    let i: usize = index_part.trim().parse().map_err(|_| {
        Error::precondition(format!("invalid hyperplane index `{index_part}`"))
    })?;
    let mut m = Vec::new();
    for token in coeff_part.split(',') {
        let c: u64 = token.trim().parse().map_err(|_| {
            Error::precondition(format!("invalid hyperplane coefficient `{token}`"))
        })?;
        m.push(c);
    }
    AdmissibleInequality::new(i, m)
}

/// Build a ray direction from an ideal target and an optional hyperplane.
pub fn parse_ray(toward: &str, hyperplane: Option<&str>) -> Result<RayDirection> {
    let toward = parse_rationals(toward)?;
    match hyperplane {
        None => Ok(RayDirection::Ideal { toward }),
        Some(spec) => Ok(RayDirection::Hyperplane {
            ineq: parse_hyperplane(spec)?,
            toward,
        }),
    }
}

/// The valuation point with the given weight and optional frame file.
pub fn load_point(
    weight: &Weight,
    frame: Option<&Path>,
    field: Field,
) -> Result<ValuationPoint> {
    let n = weight.n();
    let frame_word = match frame {
        Some(path) => load_word(path, n, field)?,
        None => TameWord::identity(n, field),
    };
    ValuationPoint::new(frame_word, weight)
}

/// Render a matrix of scalars as `[[a,b],[c,d]]`.
pub fn render_matrix(matrix: &[Vec<Scalar>]) -> String {
    let rows: Vec<String> = matrix
        .iter()
        .map(|row| {
            let entries: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            format!("[{}]", entries.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}
