//! String ids for kernels and test functions, grid-file loading, and the
//! standard kernel catalog.
//!
//! Kernel ids:
//!
//! | id | kernel |
//! |---|---|
//! | `delta@X` | `δ_X` |
//! | `delta@X:k` | `∂^k δ_X` (`k` is `k1` or `k1,k2`) |
//! | `powerlaw@X:a` | `|y - X|^a` |
//! | `cusp@X:a` | the function `|y - X|^a`, `a > 0` |
//! | `logderiv@X`, `signedlogderiv@X` | `(d/dy) log|y - X|`, `(d/dy)(sgn(y - X) log|y - X|)` (1D) |
//! | `constant-C`, `constant:C` | the constant `C` |
//! | `bump@X:R` | a smooth bump of radius `R`, equal to 1 at `X` |
//! | `cos:K` | `cos(K · y)` |
//! | `noise:SEED[:N]` | Gaussian white noise on `N` nodes per axis |
//! | `grid:PATH` | samples read from `PATH` (CSV or binary) |
//!
//! `X` is a comma-separated point; missing coordinates are zero.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::closed_form::ClosedForm;
use crate::error::{Error, Result};
use crate::kernels::{DistributionExpr, GridField, SingularSupport};
use crate::region::Point;
use crate::testfn::{make_bump, make_moment_free, TestFunction};

/// Magic bytes opening a binary grid file.
pub const GRID_MAGIC: &[u8; 8] = b"MYGRID01";

fn bad(id: &str, why: &str) -> Error {
    Error::InvalidInput(format!("kernel id '{id}': {why}"))
}

fn parse_num(id: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| bad(id, &format!("'{s}' is not a number")))
}

fn parse_point(id: &str, s: &str, dim: usize) -> Result<Point> {
    let coords: Vec<f64> = s
        .split(',')
        .map(|c| parse_num(id, c))
        .collect::<Result<_>>()?;
    if coords.len() > dim {
        return Err(bad(
            id,
            &format!("{} coordinates in dimension {dim}", coords.len()),
        ));
    }
    let mut p = [0.0; 2];
    p[..coords.len()].copy_from_slice(&coords);
    Ok(p)
}

fn parse_index(id: &str, s: &str, dim: usize) -> Result<[usize; 2]> {
    let ks: Vec<usize> = s
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<usize>()
                .map_err(|_| bad(id, &format!("'{c}' is not an order")))
        })
        .collect::<Result<_>>()?;
    if ks.len() > dim {
        return Err(bad(id, "derivative index longer than the dimension"));
    }
    let mut k = [0; 2];
    k[..ks.len()].copy_from_slice(&ks);
    Ok(k)
}

/// Default white-noise resolution per axis.
pub fn default_noise_nodes(dim: usize) -> usize {
    if dim == 1 {
        4096
    } else {
        512
    }
}

/// Parses a kernel id in dimension `dim`. The returned kernel is labelled with `id`.
pub fn parse_kernel(id: &str, dim: usize) -> Result<DistributionExpr> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidInput(format!(
            "dimension {dim} is not 1 or 2"
        )));
    }
    let id = id.trim();
    let k = parse_kernel_inner(id, dim)?;
    Ok(k.with_label(id))
}

fn parse_kernel_inner(id: &str, dim: usize) -> Result<DistributionExpr> {
    if let Some(rest) = id
        .strip_prefix("constant-")
        .or_else(|| id.strip_prefix("constant:"))
    {
        return Ok(DistributionExpr::constant(dim, parse_num(id, rest)?));
    }
    if let Some(path) = id.strip_prefix("grid:") {
        let field = load_grid(Path::new(path))?;
        if field.dim != dim {
            return Err(bad(id, &format!("grid is {}-dimensional", field.dim)));
        }
        return Ok(DistributionExpr::grid(field, SingularSupport::Everywhere));
    }
    if let Some(rest) = id.strip_prefix("noise:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let seed = parts[0]
            .parse::<u64>()
            .map_err(|_| bad(id, "seed must be an integer"))?;
        let n = match parts.get(1) {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| bad(id, "node count must be an integer"))?,
            None => default_noise_nodes(dim),
        };
        return DistributionExpr::white_noise(dim, n, seed);
    }
    if let Some(rest) = id.strip_prefix("cos:") {
        let k = parse_point(id, rest, dim)?;
        return Ok(DistributionExpr::smooth(
            dim,
            ClosedForm::Cosine {
                wavevector: k,
                phase: 0.0,
            },
        ));
    }
    let (name, rest) = id
        .split_once('@')
        .ok_or_else(|| bad(id, "expected NAME@POINT"))?;
    let (at, arg) = match rest.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (rest, None),
    };
    let c = parse_point(id, at, dim)?;
    let need = || arg.ok_or_else(|| bad(id, "missing ':' argument"));
    let one_d = || {
        if dim == 1 {
            Ok(())
        } else {
            Err(bad(id, "only defined in one dimension"))
        }
    };
    match name {
        "delta" => match arg {
            None => Ok(DistributionExpr::delta(dim, c)),
            Some(k) => Ok(DistributionExpr::delta_derivative(
                dim,
                c,
                parse_index(id, k, dim)?,
            )),
        },
        "deltaprime" => {
            one_d()?;
            Ok(DistributionExpr::delta_derivative(dim, c, [1, 0]))
        }
        "powerlaw" => {
            let a = parse_num(id, need()?)?;
            Ok(DistributionExpr::power_law(dim, c, a))
        }
        "cusp" => {
            let a = parse_num(id, need()?)?;
            if a <= 0.0 {
                return Err(bad(id, "cusp exponents must be positive; use powerlaw"));
            }
            Ok(DistributionExpr::smooth(dim, ClosedForm::cusp(c, a)))
        }
        "bump" => {
            let r = parse_num(id, need()?)?;
            if r <= 0.0 {
                return Err(bad(id, "radius must be positive"));
            }
            Ok(DistributionExpr::smooth(
                dim,
                ClosedForm::unit_bump(c, r, dim),
            ))
        }
        "logderiv" => {
            one_d()?;
            Ok(DistributionExpr::log_derivative(c))
        }
        "signedlogderiv" => {
            one_d()?;
            Ok(DistributionExpr::signed_log_derivative(c))
        }
        _ => Err(bad(id, &format!("unknown kernel '{name}'"))),
    }
}

/// Parses `bump:rR` or `momfree:mM:rR`.
pub fn parse_test_function(id: &str, dim: usize) -> Result<TestFunction> {
    let parts: Vec<&str> = id.trim().split(':').collect();
    let order = |s: &str, prefix: char| -> Result<usize> {
        s.strip_prefix(prefix)
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidInput(format!("test function id '{id}': bad field '{s}'")))
    };
    match parts.as_slice() {
        ["bump", r] => Ok(make_bump(dim, 1.0, order(r, 'r')?)),
        ["momfree", m, r] => Ok(make_moment_free(dim, order(m, 'm')?, order(r, 'r')?)),
        _ => Err(Error::InvalidInput(format!(
            "unknown test function id '{id}'"
        ))),
    }
}

/// The six kernels the cross-checks sweep over.
pub fn standard_catalog(dim: usize) -> Vec<&'static str> {
    if dim == 1 {
        vec![
            "delta@0",
            "delta@0:1",
            "powerlaw@0:-0.5",
            "powerlaw@0:-0.75",
            "cusp@0:0.6",
            "constant-1",
        ]
    } else {
        vec![
            "delta@0",
            "delta@0:1,0",
            "powerlaw@0:-1",
            "powerlaw@0:-1.5",
            "cusp@0:0.6",
            "constant-1",
        ]
    }
}

/// Reads a grid file. CSV files start with a header line
/// `# dim=D sizes=N[,M] domain=LO,HI` followed by row-major samples separated
/// by commas or newlines. Binary files start with [`GRID_MAGIC`], then
/// little-endian `u64` dim, sizes[0], sizes[1], `f64` lo, hi, then the samples.
pub fn load_grid(path: &Path) -> Result<GridField> {
    let bytes =
        fs::read(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(GRID_MAGIC) {
        parse_grid_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::InvalidInput("grid file is neither binary nor UTF-8".into()))?;
        parse_grid_csv(&text)
    }
}

fn grid_from_header(
    dim: usize,
    sizes: [usize; 2],
    lo: f64,
    hi: f64,
    samples: Vec<f64>,
) -> Result<GridField> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidInput(format!("grid dimension {dim}")));
    }
    if hi <= lo {
        return Err(Error::InvalidInput("grid domain is empty".into()));
    }
    if dim == 2 && sizes[0] != sizes[1] {
        return Err(Error::InvalidInput("2D grids must be square".into()));
    }
    let spacing = (hi - lo) / sizes[0] as f64;
    GridField::new(
        dim,
        sizes,
        [lo, if dim == 2 { lo } else { 0.0 }],
        spacing,
        samples,
    )
}

pub fn parse_grid_csv(text: &str) -> Result<GridField> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| Error::InvalidInput("grid CSV must start with a '#' header".into()))?;
    let (mut dim, mut sizes, mut domain) = (None, None, None);
    for field in header.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("bad header field '{field}'")))?;
        let nums = |v: &str| -> Result<Vec<f64>> {
            v.split(',')
                .map(|x| {
                    x.parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad header value '{v}'")))
                })
                .collect()
        };
        match k {
            "dim" => dim = v.parse::<usize>().ok(),
            "sizes" => sizes = Some(nums(v)?),
            "domain" => domain = Some(nums(v)?),
            _ => return Err(Error::InvalidInput(format!("unknown header key '{k}'"))),
        }
    }
    let dim = dim.ok_or_else(|| Error::InvalidInput("header lacks dim".into()))?;
    let sizes = sizes.ok_or_else(|| Error::InvalidInput("header lacks sizes".into()))?;
    let domain = domain.unwrap_or_else(|| vec![-1.0, 1.0]);
    if domain.len() != 2 || sizes.is_empty() {
        return Err(Error::InvalidInput(
            "header needs sizes=N[,M] and domain=LO,HI".into(),
        ));
    }
    let n0 = sizes[0] as usize;
    let n1 = if dim == 2 {
        *sizes.get(1).unwrap_or(&sizes[0]) as usize
    } else {
        1
    };
    let samples: Vec<f64> = lines
        .flat_map(|l| l.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad sample '{s}'")))
        })
        .collect::<Result<_>>()?;
    grid_from_header(dim, [n0, n1], domain[0], domain[1], samples)
}

fn parse_grid_binary(bytes: &[u8]) -> Result<GridField> {
    let short = || Error::InvalidInput("binary grid file is truncated".into());
    let mut off = GRID_MAGIC.len();
    let mut word = || -> Result<[u8; 8]> {
        let w: [u8; 8] = bytes
            .get(off..off + 8)
            .ok_or_else(short)?
            .try_into()
            .map_err(|_| short())?;
        off += 8;
        Ok(w)
    };
    let dim = u64::from_le_bytes(word()?) as usize;
    let n0 = u64::from_le_bytes(word()?) as usize;
    let n1 = u64::from_le_bytes(word()?) as usize;
    let lo = f64::from_le_bytes(word()?);
    let hi = f64::from_le_bytes(word()?);
    let count = n0.checked_mul(n1.max(1)).ok_or_else(short)?;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        samples.push(f64::from_le_bytes(word()?));
    }
    grid_from_header(dim, [n0, n1.max(1)], lo, hi, samples)
}

fn domain_of(field: &GridField) -> (f64, f64) {
    let lo = field.lower[0];
    (lo, lo + field.spacing * field.sizes[0] as f64)
}

pub fn write_grid_csv(field: &GridField, path: &Path) -> Result<()> {
    let (lo, hi) = domain_of(field);
    let sizes = if field.dim == 1 {
        format!("{}", field.sizes[0])
    } else {
        format!("{},{}", field.sizes[0], field.sizes[1])
    };
    let mut out = format!("# dim={} sizes={sizes} domain={lo},{hi}\n", field.dim);
    for row in field.samples.chunks(field.sizes[1]) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn write_grid_binary(field: &GridField, path: &Path) -> Result<()> {
    let (lo, hi) = domain_of(field);
    let io = |e: std::io::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(path).map_err(io)?;
    let mut buf = GRID_MAGIC.to_vec();
    for v in [
        field.dim as u64,
        field.sizes[0] as u64,
        field.sizes[1] as u64,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in [lo, hi].iter().chain(field.samples.iter()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kind;

    #[test]
    fn parses_common_ids() {
        let d = parse_kernel("delta@0", 1).unwrap();
        assert!(matches!(
            d.kind(),
            Kind::DiracDelta {
                derivative: [0, 0],
                ..
            }
        ));
        assert_eq!(d.label(), "delta@0");
        let p = parse_kernel("powerlaw@0.5:-0.5", 1).unwrap();
        assert!(
            matches!(p.kind(), Kind::PowerLaw { center, exponent } if center[0] == 0.5 && *exponent == -0.5)
        );
        let q = parse_kernel("delta@0,0.25:1,0", 2).unwrap();
        assert!(
            matches!(q.kind(), Kind::DiracDelta { center, derivative: [1, 0] } if center[1] == 0.25)
        );
        assert!(parse_kernel("constant-1", 2).unwrap().is_function());
        assert!(parse_kernel("noise:3:64", 1)
            .unwrap()
            .singular_support()
            .is_everywhere());
    }

    #[test]
    fn rejects_bad_ids() {
        for id in [
            "delta",
            "powerlaw@0",
            "frob@0",
            "delta@0,0",
            "cusp@0:-1",
            "logderiv@0",
        ] {
            let dim = if id == "logderiv@0" { 2 } else { 1 };
            assert!(parse_kernel(id, dim).is_err(), "{id}");
        }
    }

    #[test]
    fn test_function_ids() {
        assert_eq!(
            parse_test_function("bump:r2", 1)
                .unwrap()
                .annihilated_moment_order(),
            -1
        );
        assert_eq!(
            parse_test_function("momfree:m1:r2", 1)
                .unwrap()
                .annihilated_moment_order(),
            1
        );
        assert!(parse_test_function("bump", 1).is_err());
    }

    #[test]
    fn grid_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let samples: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let g = GridField::new(2, [4, 4], [-1.0, -1.0], 0.5, samples).unwrap();
        for (name, write) in [
            (
                "g.csv",
                write_grid_csv as fn(&GridField, &Path) -> Result<()>,
            ),
            ("g.bin", write_grid_binary),
        ] {
            let p = dir.path().join(name);
            write(&g, &p).unwrap();
            let back = load_grid(&p).unwrap();
            assert_eq!(back.sizes, g.sizes);
            assert_eq!(back.lower, g.lower);
            assert!((back.spacing - g.spacing).abs() < 1e-15);
            for (a, b) in back.samples.iter().zip(&g.samples) {
                assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
            }
        }
    }
}
