use num_complex::Complex64;

use super::{almost_mathieu, schrodinger, CocycleError, CocycleFn};
use crate::linalg::Mat2;
use crate::trig::TrigPoly;

fn num(s: &str) -> Result<f64, CocycleError> {
    s.trim().parse::<f64>().map_err(|_| CocycleError::Parse(format!("not a number: {s:?}")))
}

fn fields(body: &str) -> Result<Vec<(&str, &str)>, CocycleError> {
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CocycleError::Parse(format!("expected key=value, got {kv:?}")))
        })
        .collect()
}

fn field(fs: &[(&str, &str)], key: &str) -> Result<f64, CocycleError> {
    let (_, v) =
        fs.iter().find(|(k, _)| *k == key).ok_or_else(|| CocycleError::Parse(format!("missing field {key}")))?;
    num(v)
}

/// Parses a cocycle description over the rotation by `alpha`.
///
/// Accepted forms: `amo:lambda=L,E=E`, `schrodinger:v=v0;v1;...,E=E` for
/// `v(x) = Σ v_k cos 2πkx`, `rotation:rho=R`, `parabolic:c=C` and
/// `constant:a,b,c,d`.
pub fn parse_cocycle(alpha: f64, spec: &str) -> Result<CocycleFn, CocycleError> {
    let (kind, body) = spec.split_once(':').ok_or_else(|| CocycleError::Parse(format!("missing ':' in {spec:?}")))?;
    let c = match kind.trim() {
        "amo" => {
            let fs = fields(body)?;
            almost_mathieu(alpha, field(&fs, "lambda")?, field(&fs, "E")?)
        }
        "schrodinger" => {
            let fs = fields(body)?;
            let (_, vs) =
                fs.iter().find(|(k, _)| *k == "v").ok_or_else(|| CocycleError::Parse("missing field v".into()))?;
            let cos: Vec<f64> = vs.split(';').map(num).collect::<Result<_, _>>()?;
            let n = cos.len() - 1;
            let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
            coeffs[n] = cos[0].into();
            for (k, v) in cos.iter().enumerate().skip(1) {
                coeffs[n + k] = (v / 2.0).into();
                coeffs[n - k] = (v / 2.0).into();
            }
            schrodinger(alpha, TrigPoly::new(coeffs), field(&fs, "E")?)
        }
        "rotation" => CocycleFn::rotation(alpha, field(&fields(body)?, "rho")?),
        "parabolic" => CocycleFn::parabolic(alpha, field(&fields(body)?, "c")?),
        "constant" => {
            let v: Vec<f64> = body.split(',').map(num).collect::<Result<_, _>>()?;
            if v.len() != 4 {
                return Err(CocycleError::Parse("constant needs four entries".into()));
            }
            CocycleFn::constant(alpha, Mat2::new(v[0], v[1], v[2], v[3]))
        }
        other => return Err(CocycleError::Parse(format!("unknown cocycle kind {other:?}"))),
    };
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amo_matches_constructor() {
        let c = parse_cocycle(0.3, "amo:lambda=2,E=0.5").unwrap();
        let d = almost_mathieu(0.3, 2.0, 0.5);
        assert!(c.eval(0.17).dist(&d.eval(0.17)) < 1e-15);
    }

    #[test]
    fn schrodinger_cosine_series() {
        let c = parse_cocycle(0.3, "schrodinger:v=0.5;2;0.25,E=1").unwrap();
        let x: f64 = 0.21;
        let v = 0.5 + 2.0 * (2.0 * std::f64::consts::PI * x).cos() + 0.25 * (4.0 * std::f64::consts::PI * x).cos();
        assert!((c.eval(x).a - (1.0 - v)).abs() < 1e-14);
    }

    #[test]
    fn others() {
        assert!(parse_cocycle(0.3, "rotation:rho=0.1").unwrap().is_rotation());
        assert_eq!(parse_cocycle(0.3, "parabolic:c=2").unwrap().as_constant(), Some(Mat2::new(1.0, 2.0, 0.0, 1.0)));
        assert!(parse_cocycle(0.3, "constant:2,0,0,0.5").is_ok());
        assert!(matches!(parse_cocycle(0.3, "constant:2,0,0,1"), Err(CocycleError::NotUnimodular { .. })));
        assert!(parse_cocycle(0.3, "bogus:x=1").is_err());
        assert!(parse_cocycle(0.3, "amo:lambda=1").is_err());
    }
}
