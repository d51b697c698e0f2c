use anyhow::{bail, Context};
use nalgebra::DMatrix;
use powerwalk_core::MarkovChain;
use rand::seq::SliceRandom;
use rand::Rng;
use std::path::Path;

/// Random symmetric chain: a convex combination of three symmetrized
/// permutation matrices with random weights.
pub fn random_chain(n: usize, rng: &mut impl Rng) -> anyhow::Result<MarkovChain> {
    if n == 0 {
        bail!("random chain needs n >= 1");
    }
    let terms: Vec<(f64, Vec<usize>)> = (0..3)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            (rng.gen::<f64>() + 0.05, p)
        })
        .collect();
    let total: f64 = terms.iter().map(|t| t.0).sum();
    let terms: Vec<_> = terms.into_iter().map(|(w, p)| (w / total, p)).collect();
    Ok(MarkovChain::from_permutations(n, &terms)?)
}

/// Reads an `N×N` transition matrix: one row per line, comma separated,
/// `#` comments allowed.
pub fn load_chain_csv(path: &Path) -> anyhow::Result<MarkovChain> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening chain {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        let row = rec
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .with_context(|| format!("{}: row {}: bad number {cell:?}", path.display(), i + 1))
            })
            .collect::<anyhow::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        bail!("{}: empty matrix", path.display());
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        bail!(
            "{}: row {} has {} entries, expected {n}",
            path.display(),
            i + 1,
            r.len()
        );
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    MarkovChain::new(m).with_context(|| format!("chain in {}", path.display()))
}

fn parse_size(s: &str, spec: &str) -> anyhow::Result<usize> {
    s.parse()
        .with_context(|| format!("chain spec {spec:?}: bad size {s:?}"))
}

fn parse_laziness(s: &str, spec: &str) -> anyhow::Result<f64> {
    s.parse()
        .with_context(|| format!("chain spec {spec:?}: bad laziness {s:?}"))
}

/// Resolves a chain spec to `(label, chain)`. Names: `cycle:N`, `complete:N`,
/// `lazy-cycle:N:p`, `lazy-complete:N:p`, `random:N`; anything else is read as
/// a CSV path. `random` draws from `rng`.
pub fn resolve_chain(spec: &str, rng: &mut impl Rng) -> anyhow::Result<(String, MarkovChain)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let chain = match parts.as_slice() {
        ["cycle", n] => MarkovChain::cycle(parse_size(n, spec)?)?,
        ["complete", n] => MarkovChain::complete(parse_size(n, spec)?)?,
        ["lazy-cycle", n, p] => MarkovChain::cycle(parse_size(n, spec)?)?.lazy(parse_laziness(p, spec)?)?,
        ["lazy-complete", n, p] => MarkovChain::complete(parse_size(n, spec)?)?.lazy(parse_laziness(p, spec)?)?,
        ["random", n] => random_chain(parse_size(n, spec)?, rng)?,
        _ => {
            let path = Path::new(spec);
            if !path.exists() {
                bail!("chain {spec:?} is neither a generator name nor an existing CSV file");
            }
            load_chain_csv(path)?
        }
    };
    Ok((spec.to_string(), chain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    #[test]
    fn generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, c) = resolve_chain("lazy-cycle:5:0.25", &mut rng).unwrap();
        assert_eq!(c.matrix()[(0, 0)], 0.25);
        assert_eq!(c.matrix()[(0, 1)], 0.375);
        let (_, c) = resolve_chain("complete:3", &mut rng).unwrap();
        assert_eq!(c.matrix()[(1, 2)], 0.5);
        assert!(resolve_chain("cycle:x", &mut rng).is_err());
        assert!(resolve_chain("no-such-file.csv", &mut rng).is_err());
    }

    #[test]
    fn random_chains_are_reproducible() {
        let a = random_chain(4, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = random_chain(4, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_chain() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# lazy walk on two states\n0.25, 0.75\n0.75, 0.25").unwrap();
        let c = load_chain_csv(f.path()).unwrap();
        assert_eq!(c.size(), 2);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0.5,0.5\n0.2,0.8").unwrap();
        let err = load_chain_csv(bad.path()).unwrap_err();
        assert!(format!("{err:#}").contains("symmetric"), "{err:#}");
    }
}
