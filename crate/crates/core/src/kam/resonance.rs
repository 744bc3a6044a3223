use serde::Serialize;

use super::fourier::{mode_norm, pairing, Mode};

/// Resonance classes of the lattice for `ω = (1, α)`, rotation number `ϱ̃`
/// and threshold `η`. The complements are listed explicitly up to
/// `|k| <= radius`; membership itself is a direct inequality.
#[derive(Debug, Clone, Serialize)]
pub struct ResonancePartition {
    pub alpha: f64,
    pub rho_tilde: f64,
    pub eta: f64,
    pub radius: i64,
    /// `k` with `|⟨k,ω⟩| < η`.
    pub lambda1_c: Vec<Mode>,
    /// `k` with `|2ϱ̃ - ⟨k,ω⟩| < η`.
    pub lambda21_c: Vec<Mode>,
    /// `k` with `|2ϱ̃ + ⟨k,ω⟩| < η`.
    pub lambda22_c: Vec<Mode>,
}

impl ResonancePartition {
    pub fn in_lambda1(&self, k: Mode) -> bool {
        pairing(k, self.alpha).abs() >= self.eta
    }

    pub fn in_lambda21(&self, k: Mode) -> bool {
        (2.0 * self.rho_tilde - pairing(k, self.alpha)).abs() >= self.eta
    }

    pub fn in_lambda22(&self, k: Mode) -> bool {
        (2.0 * self.rho_tilde + pairing(k, self.alpha)).abs() >= self.eta
    }

    pub fn in_lambda2(&self, k: Mode) -> bool {
        self.in_lambda21(k) && self.in_lambda22(k)
    }

    /// Modes outside `Λ₂` with `|k| < bound`.
    pub fn lambda2_c_below(&self, bound: f64) -> Vec<Mode> {
        let mut out: Vec<Mode> = self
            .lambda21_c
            .iter()
            .chain(&self.lambda22_c)
            .copied()
            .filter(|&k| (mode_norm(k) as f64) < bound)
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Integers `k₁` with `|k₁ + c| < η`, scanned row by row in `k₂`.
fn complement(alpha: f64, shift: f64, eta: f64, radius: i64) -> Vec<Mode> {
    let mut out = Vec::new();
    for k2 in -radius..=radius {
        let centre = -shift - k2 as f64 * alpha;
        let lo = (centre - eta).ceil() as i64;
        let hi = (centre + eta).floor() as i64;
        for k1 in lo..=hi {
            let k = (k1, k2);
            if mode_norm(k) <= radius && (pairing(k, alpha) + shift).abs() < eta {
                out.push(k);
            }
        }
    }
    out.sort_by_key(|&k| (mode_norm(k), k));
    out
}

pub fn resonance_partition(alpha: f64, rho_tilde: f64, eta: f64, radius: i64) -> ResonancePartition {
    assert!(eta > 0.0, "threshold must be positive");
    ResonancePartition {
        alpha,
        rho_tilde,
        eta,
        radius,
        lambda1_c: complement(alpha, 0.0, eta, radius),
        lambda21_c: complement(alpha, -2.0 * rho_tilde, eta, radius),
        lambda22_c: complement(alpha, 2.0 * rho_tilde, eta, radius),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLD: f64 = 0.618_033_988_749_894_8;

    #[test]
    fn origin_is_resonant() {
        let p = resonance_partition(GOLD, 0.0, 0.01, 5);
        assert!(!p.in_lambda1((0, 0)));
        assert!(!p.in_lambda2((0, 0)));
        assert!(p.lambda1_c.contains(&(0, 0)));
    }

    #[test]
    fn golden_small_threshold_has_trivial_complement() {
        let p = resonance_partition(GOLD, 0.1, 1e-3, 50);
        assert_eq!(p.lambda1_c, vec![(0, 0)]);
    }

    #[test]
    fn complements_match_exhaustive_scan() {
        let (rho, eta, r) = (0.37, 0.05, 12);
        let p = resonance_partition(GOLD, rho, eta, r);
        for k1 in -r..=r {
            for k2 in -r..=r {
                let k = (k1, k2);
                if mode_norm(k) > r {
                    continue;
                }
                assert_eq!(p.lambda1_c.contains(&k), !p.in_lambda1(k));
                assert_eq!(p.lambda21_c.contains(&k), !p.in_lambda21(k));
                assert_eq!(p.lambda22_c.contains(&k), !p.in_lambda22(k));
                assert_eq!(p.in_lambda1(k), p.in_lambda1((-k1, -k2)));
                assert_eq!(p.in_lambda21(k), p.in_lambda22((-k1, -k2)));
            }
        }
    }
}
