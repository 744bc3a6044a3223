use num_complex::Complex64;
use num_integer::Integer;

/// A Dirichlet character with values stored as exponents of a primitive
/// `order`-th root of unity, so products and sums can be checked exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletCharacter {
    pub modulus: u64,
    /// Exponent of the cyclic group of values (an lcm of generator orders).
    pub order: u64,
    /// `exps[n]` is `Some(e)` with `χ(n) = exp(2πi e / order)`, or `None` when `gcd(n, q) > 1`.
    pub exps: Vec<Option<u64>>,
    pub conductor: u64,
    pub principal: bool,
}

impl DirichletCharacter {
    pub fn value(&self, n: u64) -> Complex64 {
        match self.exps[(n % self.modulus) as usize] {
            None => Complex64::new(0.0, 0.0),
            Some(e) => root_of_unity(e, self.order),
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        (0..self.modulus).map(|n| self.value(n)).collect()
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    /// True when every value is `±1` or `0`.
    pub fn is_real(&self) -> bool {
        self.exps.iter().flatten().all(|&e| (2 * e) % self.order == 0)
    }
}

fn root_of_unity(e: u64, m: u64) -> Complex64 {
    let e = e % m;
    // Exact values at the quarter turns.
    if 4 * e % m == 0 {
        return match 4 * e / m {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / m as f64)
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// The unit group of one prime-power factor, as a product of cyclic groups.
struct Component {
    pe: u64,
    p: u64,
    /// Generator orders.
    orders: Vec<u64>,
    /// Discrete logs of each residue mod `pe` (empty for non-units).
    logs: Vec<Option<Vec<u64>>>,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn multiplicative_order(g: u64, m: u64) -> u64 {
    let mut x = g % m;
    let mut k = 1;
    while x != 1 {
        x = x * g % m;
        k += 1;
    }
    k
}

impl Component {
    fn new(p: u64, e: u32) -> Self {
        let pe = p.pow(e);
        let phi = pe / p * (p - 1);
        let gens: Vec<(u64, u64)> = if p == 2 {
            match e {
                1 => vec![],
                2 => vec![(3, 2)],
                _ => vec![(pe - 1, 2), (5, pe / 4)],
            }
        } else {
            let g = (2..pe)
                .find(|&g| g % p != 0 && multiplicative_order(g, pe) == phi)
                .expect("odd prime powers have primitive roots");
            vec![(g, phi)]
        };
        let mut logs = vec![None; pe as usize];
        // Enumerate every product of generator powers.
        let mut idx = vec![0u64; gens.len()];
        loop {
            let mut x = 1 % pe;
            for (j, &(g, _)) in gens.iter().enumerate() {
                x = x * pow_mod(g, idx[j], pe) % pe;
            }
            logs[x as usize] = Some(idx.clone());
            let mut j = 0;
            loop {
                if j == gens.len() {
                    let orders = gens.iter().map(|&(_, o)| o).collect();
                    if pe == 2 {
                        logs[1] = Some(vec![]);
                    }
                    return Component { pe, p, orders, logs };
                }
                idx[j] += 1;
                if idx[j] < gens[j].1 {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    /// Conductor exponent of the component character with exponents `c`.
    fn conductor(&self, c: &[u64]) -> u64 {
        if c.iter().all(|&x| x == 0) {
            return 1;
        }
        if self.p == 2 {
            if self.orders.len() == 1 {
                return 4;
            }
            let o5 = self.orders[1];
            let s = o5 / o5.gcd(&c[1]);
            if s == 1 {
                4
            } else {
                4 * s
            }
        } else {
            let ord = self.orders[0] / self.orders[0].gcd(&c[0]);
            let mut cond = self.p;
            let mut rest = ord;
            while rest % self.p == 0 {
                rest /= self.p;
                cond *= self.p;
            }
            cond
        }
    }
}

/// All `φ(q)` characters modulo `q`, the principal one first.
pub fn characters(q: u64) -> Vec<DirichletCharacter> {
    assert!(q >= 1);
    let comps: Vec<Component> = factorize(q).into_iter().map(|(p, e)| Component::new(p, e)).collect();
    let orders: Vec<u64> = comps.iter().flat_map(|c| c.orders.iter().copied()).collect();
    let order = orders.iter().fold(1u64, |acc, &o| acc.lcm(&o));
    // Global discrete logs.
    let logs: Vec<Option<Vec<u64>>> = (0..q)
        .map(|n| {
            let mut out = Vec::with_capacity(orders.len());
            for c in &comps {
                out.extend(c.logs[(n % c.pe) as usize].as_ref()?.iter().copied());
            }
            Some(out)
        })
        .collect();
    let total: u64 = orders.iter().product();
    let mut chars = Vec::with_capacity(total as usize);
    let mut idx = vec![0u64; orders.len()];
    for _ in 0..total {
        let exps = logs
            .iter()
            .map(|l| {
                l.as_ref().map(|l| {
                    l.iter()
                        .zip(&idx)
                        .zip(&orders)
                        .map(|((&i, &c), &o)| (i * c % o) * (order / o))
                        .sum::<u64>()
                        % order
                })
            })
            .collect();
        let mut conductor = 1;
        let mut off = 0;
        for c in &comps {
            let k = c.orders.len();
            conductor *= c.conductor(&idx[off..off + k]);
            off += k;
        }
        let principal = idx.iter().all(|&x| x == 0);
        chars.push(DirichletCharacter { modulus: q, order, exps, conductor, principal });
        for j in 0..idx.len() {
            idx[j] += 1;
            if idx[j] < orders[j] {
                break;
            }
            idx[j] = 0;
        }
    }
    chars
}

/// Smallest `d | q` such that `χ(n) = 1` whenever `gcd(n, q) = 1` and `n ≡ 1 (mod d)`.
pub fn brute_force_conductor(chi: &DirichletCharacter) -> u64 {
    let q = chi.modulus;
    (1..=q)
        .filter(|d| q % d == 0)
        .find(|&d| (1..q.max(2)).all(|n| n % d != 1 % d || chi.exps[(n % q) as usize].is_none_or(|e| e == 0)))
        .unwrap_or(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(q: u64) -> u64 {
        (1..=q).filter(|n| n.gcd(&q) == 1).count() as u64
    }

    #[test]
    fn trivial_modulus() {
        let c = characters(1);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].value(0), Complex64::new(1.0, 0.0));
        assert_eq!(c[0].conductor, 1);
    }

    #[test]
    fn modulus_three() {
        let c = characters(3);
        assert_eq!(c.len(), 2);
        let nonprincipal = c.iter().find(|x| !x.principal).unwrap();
        assert_eq!(nonprincipal.value(2), Complex64::new(-1.0, 0.0));
        assert_eq!(nonprincipal.conductor, 3);
    }

    #[test]
    fn modulus_eight_is_real() {
        let c = characters(8);
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|x| x.is_real()));
        let mut conds: Vec<u64> = c.iter().map(|x| x.conductor).collect();
        conds.sort();
        assert_eq!(conds, vec![1, 4, 8, 8]);
    }

    #[test]
    fn counts_and_conductors_agree_with_brute_force() {
        for q in 1..=60 {
            let cs = characters(q);
            assert_eq!(cs.len() as u64, phi(q), "q = {q}");
            for c in &cs {
                assert_eq!(c.conductor, brute_force_conductor(c), "q = {q}");
            }
        }
    }
}
